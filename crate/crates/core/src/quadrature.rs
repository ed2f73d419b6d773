//! Gauss–Hermite rules built with the Golub–Welsch eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights for ∫ e^{-x²} f(x) dx.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature needs at least one node");
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let b = (k as f64 / 2.0).sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], sqrt_pi * v0 * v0)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// E[f(X)] for X ~ N(mean, sigma²).
    pub fn expect_normal(&self, mean: f64, sigma: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sigma;
        let total: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mean + scale * x))
            .sum();
        total / std::f64::consts::PI.sqrt()
    }

    /// E[f(X, Y)] for independent normals X, Y.
    pub fn expect_normal_2d(
        &self,
        (mean_x, sigma_x): (f64, f64),
        (mean_y, sigma_y): (f64, f64),
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> f64 {
        let sx = std::f64::consts::SQRT_2 * sigma_x;
        let sy = std::f64::consts::SQRT_2 * sigma_y;
        let mut total = 0.0;
        for (&xi, &wi) in self.nodes.iter().zip(&self.weights) {
            let x = mean_x + sx * xi;
            let mut row = 0.0;
            for (&yj, &wj) in self.nodes.iter().zip(&self.weights) {
                row += wj * f(x, mean_y + sy * yj);
            }
            total += wi * row;
        }
        total / std::f64::consts::PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 21, 81] {
            let gh = GaussHermite::new(n);
            let s: f64 = gh.weights.iter().sum();
            assert_relative_eq!(s, std::f64::consts::PI.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn two_point_rule() {
        let gh = GaussHermite::new(2);
        assert_relative_eq!(gh.nodes[1], 1.0 / 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(gh.nodes[0], -gh.nodes[1], max_relative = 1e-12);
    }

    #[test]
    fn normal_moments_are_exact() {
        let gh = GaussHermite::new(10);
        let m2 = gh.expect_normal(1.0, 2.0, |x| x * x);
        let m4 = gh.expect_normal(0.0, 1.5, |x| x.powi(4));
        assert_relative_eq!(m2, 5.0, max_relative = 1e-12);
        assert_relative_eq!(m4, 3.0 * 1.5f64.powi(4), max_relative = 1e-12);
    }

    #[test]
    fn gaussian_characteristic_function() {
        // E[cos(kX)] = exp(-k² σ² / 2)
        let gh = GaussHermite::new(41);
        let v = gh.expect_normal(0.0, 0.7, |x| (2.0 * x).cos());
        assert_relative_eq!(v, (-2.0 * 0.49f64).exp(), max_relative = 1e-12);
        let v2 = gh.expect_normal_2d((0.0, 0.7), (0.0, 0.3), |x, y| (x - y).cos());
        assert_relative_eq!(v2, (-(0.49 + 0.09) / 2.0f64).exp(), max_relative = 1e-12);
    }
}
