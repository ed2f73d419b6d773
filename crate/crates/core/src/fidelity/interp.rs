/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(points: &[(f64, f64)]) -> Self {
        assert!(points.len() >= 2, "need at least two anchors");
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "anchors must be strictly increasing in x");

        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for k in 1..n - 1 {
                if m[k - 1] * m[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Self { xs, ys, slopes: d }
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    /// `None` outside the anchor range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return None;
        }
        let k = match self.xs.iter().rposition(|&xk| xk <= x) {
            Some(k) if k == self.xs.len() - 1 => return Some(self.ys[k]),
            Some(k) => k,
            None => 0,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = (x - self.xs[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(
            h00 * self.ys[k]
                + h10 * h * self.slopes[k]
                + h01 * self.ys[k + 1]
                + h11 * h * self.slopes[k + 1],
        )
    }
}

fn end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_through_anchors() {
        let pts = [(0.0, 0.0), (1.0, 2.0), (3.0, 2.5), (4.0, 2.5)];
        let c = MonotoneCubic::new(&pts);
        for (x, y) in pts {
            assert!((c.eval(x).unwrap() - y).abs() < 1e-15);
        }
        assert!(c.eval(-0.1).is_none());
        assert!(c.eval(4.1).is_none());
    }

    #[test]
    fn stays_monotone_on_dense_grid() {
        let c = MonotoneCubic::new(&[(0.8, 0.977), (0.95, 0.998), (0.999, 1.0), (1.0, 1.0)]);
        let mut prev = c.eval(0.8).unwrap();
        for i in 1..=2000 {
            let x = 0.8 + 0.2 * i as f64 / 2000.0;
            let y = c.eval(x.min(1.0)).unwrap();
            assert!(y >= prev - 1e-15, "x={x}");
            assert!(y <= 1.0 + 1e-15);
            prev = y;
        }
    }
}
