//! Electron to nuclear-ensemble state transfer under the effective
//! flip-flop Hamiltonian H = A′(Φ⁺S₋ + Φ⁻S₊).
//!
//! Collective basis: |e, k⟩ with e ∈ {↑, ↓} and k the number of nuclear
//! excitations in the symmetric (Dicke) mode. The ladder element is
//! ⟨↓, k+1|H|↑, k⟩ = A′√((k+1)(N−k)), so the single-excitation coupling is
//! g = √N·A′.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid_arg, Error, Result};

/// Largest ensemble for which the collective Hamiltonian is built densely.
pub const MAX_COLLECTIVE_NUCLEI: usize = 512;
/// Largest ensemble for the full product-space oracle.
pub const MAX_FULL_NUCLEI: usize = 10;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferParams {
    pub n_nuclei: usize,
    /// Rescaled hyperfine coupling, rad/s.
    pub a_prime: f64,
    pub delta_m: u32,
}

impl TransferParams {
    pub fn new(n_nuclei: usize, a_prime: f64, delta_m: u32) -> Result<Self> {
        if n_nuclei == 0 {
            return Err(invalid_arg("need at least one nucleus"));
        }
        if !matches!(delta_m, 1 | 2) {
            return Err(invalid_arg(format!("delta_m must be 1 or 2, got {delta_m}")));
        }
        if !a_prime.is_finite() {
            return Err(invalid_arg("coupling must be finite"));
        }
        Ok(Self {
            n_nuclei,
            a_prime,
            delta_m,
        })
    }

    /// Collective coupling g = √N·A′.
    pub fn coupling(&self) -> f64 {
        (self.n_nuclei as f64).sqrt() * self.a_prime
    }

    /// Time of a complete electron to ensemble transfer, π/(2g).
    pub fn transfer_time(&self) -> f64 {
        std::f64::consts::FRAC_PI_2 / self.coupling()
    }

    fn ladder(&self, k: usize) -> f64 {
        let n = self.n_nuclei as f64;
        let k = k as f64;
        self.a_prime * ((k + 1.0) * (n - k)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// |e, k⟩ at index 2k + (e == ↓).
    Collective { n_nuclei: usize },
    /// Two independent dot/ensemble systems, index a·d + b with d = 2(N+1).
    CollectivePair { n_nuclei: usize },
    /// Electron in the most significant bit (1 = ↑), nuclei below (1 = flipped).
    Product { n_nuclei: usize },
}

impl Basis {
    pub fn dimension(self) -> usize {
        match self {
            Basis::Collective { n_nuclei } => 2 * (n_nuclei + 1),
            Basis::CollectivePair { n_nuclei } => 4 * (n_nuclei + 1) * (n_nuclei + 1),
            Basis::Product { n_nuclei } => 1 << (n_nuclei + 1),
        }
    }
}

/// Index of |e, k⟩ in the collective basis.
pub fn collective_index(up: bool, k: usize) -> usize {
    2 * k + usize::from(!up)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    basis: Basis,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(basis: Basis, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dimension() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {}-dimensional basis",
                amps.len(),
                basis.dimension()
            )));
        }
        let s = Self { basis, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid_arg(format!("state norm is {norm}, expected 1")));
        }
        Ok(s)
    }

    /// (α|↑⟩ + β|↓⟩) ⊗ |0⟩ in the collective basis.
    pub fn electron_with_polarized_ensemble(n_nuclei: usize, alpha: Complex64, beta: Complex64) -> Result<Self> {
        let basis = Basis::Collective { n_nuclei };
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        amps[collective_index(true, 0)] = alpha;
        amps[collective_index(false, 0)] = beta;
        Self::new(basis, amps)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.basis != other.basis {
            return Err(Error::Dimension("inner product across different bases".into()));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Amplitude of |e, k⟩ for a collective state.
    pub fn collective_amplitude(&self, up: bool, k: usize) -> Option<Complex64> {
        match self.basis {
            Basis::Collective { n_nuclei } if k <= n_nuclei => Some(self.amps[collective_index(up, k)]),
            _ => None,
        }
    }

    /// Tensor product of two collective states with the same ensemble size.
    pub fn pair(a: &PureState, b: &PureState) -> Result<Self> {
        match (a.basis, b.basis) {
            (Basis::Collective { n_nuclei: na }, Basis::Collective { n_nuclei: nb }) if na == nb => {
                let amps = a
                    .amps
                    .iter()
                    .flat_map(|x| b.amps.iter().map(move |y| x * y))
                    .collect();
                Ok(Self {
                    basis: Basis::CollectivePair { n_nuclei: na },
                    amps,
                })
            }
            _ => Err(Error::Dimension("pair needs two collective states of equal size".into())),
        }
    }

    /// Amplitude of |e_a, k_a⟩|e_b, k_b⟩ for a pair state.
    pub fn pair_amplitude(&self, a: (bool, usize), b: (bool, usize)) -> Option<Complex64> {
        match self.basis {
            Basis::CollectivePair { n_nuclei } if a.1 <= n_nuclei && b.1 <= n_nuclei => {
                let d = 2 * (n_nuclei + 1);
                Some(self.amps[collective_index(a.0, a.1) * d + collective_index(b.0, b.1)])
            }
            _ => None,
        }
    }

    /// Embeds a collective state in the product basis, mapping |k⟩ to the
    /// normalized symmetric superposition of all k-flip configurations.
    pub fn to_product(&self) -> Result<PureState> {
        let n = match self.basis {
            Basis::Collective { n_nuclei } if n_nuclei <= MAX_FULL_NUCLEI => n_nuclei,
            Basis::Collective { n_nuclei } => {
                return Err(Error::Dimension(format!("{n_nuclei} nuclei exceed the product-space limit")))
            }
            _ => return Err(Error::Dimension("only collective states embed".into())),
        };
        let basis = Basis::Product { n_nuclei: n };
        let mut amps = vec![Complex64::new(0.0, 0.0); basis.dimension()];
        let electron_bit = 1usize << n;
        for nuclear in 0..(1usize << n) {
            let k = nuclear.count_ones() as usize;
            let scale = 1.0 / binomial(n, k).sqrt();
            amps[electron_bit | nuclear] = self.amps[collective_index(true, k)] * scale;
            amps[nuclear] = self.amps[collective_index(false, k)] * scale;
        }
        Ok(PureState { basis, amps })
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dense flip-flop Hamiltonian in the collective basis (rad/s).
pub fn build_flipflop_hamiltonian(p: &TransferParams) -> Result<DMatrix<f64>> {
    if p.n_nuclei > MAX_COLLECTIVE_NUCLEI {
        return Err(Error::Dimension(format!(
            "{} nuclei exceed the dense limit of {MAX_COLLECTIVE_NUCLEI}",
            p.n_nuclei
        )));
    }
    let dim = Basis::Collective { n_nuclei: p.n_nuclei }.dimension();
    let mut h = DMatrix::zeros(dim, dim);
    for k in 0..p.n_nuclei {
        let i = collective_index(true, k);
        let j = collective_index(false, k + 1);
        let v = p.ladder(k);
        h[(i, j)] = v;
        h[(j, i)] = v;
    }
    Ok(h)
}

/// Exact evolution in the collective basis. H decomposes into independent
/// two-level blocks {|↑,k⟩, |↓,k+1⟩}, each rotated in closed form; the
/// states |↓,0⟩ and |↑,N⟩ are stationary.
pub fn evolve_transfer(state: &PureState, p: &TransferParams, t: f64) -> Result<PureState> {
    match state.basis {
        Basis::Collective { n_nuclei } if n_nuclei == p.n_nuclei => {
            let mut amps = state.amps.clone();
            rotate_collective(&mut amps, p, t);
            Ok(PureState {
                basis: state.basis,
                amps,
            })
        }
        Basis::CollectivePair { n_nuclei } if n_nuclei == p.n_nuclei => {
            let d = 2 * (n_nuclei + 1);
            let mut amps = state.amps.clone();
            for row in amps.chunks_mut(d) {
                rotate_collective(row, p, t);
            }
            let mut column = vec![Complex64::new(0.0, 0.0); d];
            for b in 0..d {
                for a in 0..d {
                    column[a] = amps[a * d + b];
                }
                rotate_collective(&mut column, p, t);
                for a in 0..d {
                    amps[a * d + b] = column[a];
                }
            }
            Ok(PureState {
                basis: state.basis,
                amps,
            })
        }
        _ => Err(Error::Dimension(format!(
            "state basis {:?} does not match {} nuclei",
            state.basis, p.n_nuclei
        ))),
    }
}

fn rotate_collective(amps: &mut [Complex64], p: &TransferParams, t: f64) {
    let minus_i = Complex64::new(0.0, -1.0);
    for k in 0..p.n_nuclei {
        let i = collective_index(true, k);
        let j = collective_index(false, k + 1);
        let theta = p.ladder(k) * t;
        let (s, c) = theta.sin_cos();
        let (a, b) = (amps[i], amps[j]);
        amps[i] = a * c + minus_i * s * b;
        amps[j] = minus_i * s * a + b * c;
    }
}

/// Evolution by eigendecomposition of a real symmetric generator.
pub(crate) fn evolve_dense(h: &DMatrix<f64>, amps: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let n = amps.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (m, c) in coeffs.iter_mut().enumerate() {
        let proj: Complex64 = (0..n).map(|i| v[(i, m)] * amps[i]).sum();
        *c = proj * Complex64::from_polar(1.0, -eig.eigenvalues[m] * t);
    }
    (0..n)
        .map(|i| coeffs.iter().enumerate().map(|(m, c)| v[(i, m)] * c).sum())
        .collect()
}

/// Brute-force evolution in the full 2^(N+1) product space with
/// Φ⁺ = Σᵢσ₊ⁱ over spin-1/2 nuclei. The Hamiltonian conserves the total
/// number of up spins, so each excitation sector is diagonalized separately.
pub fn full_space_oracle(p: &TransferParams, state: &PureState, t: f64) -> Result<PureState> {
    if p.delta_m != 1 {
        return Err(invalid_arg("the product-space oracle covers spin-1/2 flips (delta_m = 1) only"));
    }
    let n = p.n_nuclei;
    if n > MAX_FULL_NUCLEI {
        return Err(Error::Dimension(format!("{n} nuclei exceed the product-space limit of {MAX_FULL_NUCLEI}")));
    }
    if state.basis != (Basis::Product { n_nuclei: n }) {
        return Err(Error::Dimension("oracle input must be in the product basis".into()));
    }
    let electron_bit = 1usize << n;
    let dim = state.amps.len();
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for excitations in 0..=(n + 1) {
        let sector: Vec<usize> = (0..dim).filter(|i| i.count_ones() as usize == excitations).collect();
        let position = |idx: usize| sector.binary_search(&idx).ok();
        let mut h = DMatrix::zeros(sector.len(), sector.len());
        for (col, &idx) in sector.iter().enumerate() {
            if idx & electron_bit == 0 {
                continue;
            }
            // S₋ flips the electron down while Φ⁺ flips one nucleus up
            for q in 0..n {
                let bit = 1usize << q;
                if idx & bit == 0 {
                    let target = (idx & !electron_bit) | bit;
                    let row = position(target).expect("target stays in sector");
                    h[(row, col)] = p.a_prime;
                    h[(col, row)] = p.a_prime;
                }
            }
        }
        let local: Vec<Complex64> = sector.iter().map(|&i| state.amps[i]).collect();
        if local.iter().all(|a| a.norm_sqr() == 0.0) {
            continue;
        }
        for (&idx, amp) in sector.iter().zip(evolve_dense(&h, &local, t)) {
            out[idx] = amp;
        }
    }
    Ok(PureState {
        basis: state.basis,
        amps: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn hamiltonian_structure() {
        let p = TransferParams::new(5, 1.3, 1).unwrap();
        let h = build_flipflop_hamiltonian(&p).unwrap();
        assert_eq!(h, h.transpose());
        let up0 = collective_index(true, 0);
        let down1 = collective_index(false, 1);
        assert!((h[(up0, down1)] - p.coupling()).abs() < 1e-12);
        let down0 = collective_index(false, 0);
        assert!(h.row(down0).iter().all(|&v| v == 0.0));
        assert!(build_flipflop_hamiltonian(&TransferParams::new(MAX_COLLECTIVE_NUCLEI + 1, 1.0, 1).unwrap()).is_err());
    }

    #[test]
    fn closed_form_matches_eigendecomposition() {
        let p = TransferParams::new(6, 0.7, 2).unwrap();
        let basis = Basis::Collective { n_nuclei: 6 };
        let raw: Vec<Complex64> = (0..basis.dimension()).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let state = PureState::new(basis, raw.iter().map(|a| a / norm).collect()).unwrap();
        let h = build_flipflop_hamiltonian(&p).unwrap();
        for t in [0.0, 0.4, 2.5] {
            let a = evolve_transfer(&state, &p, t).unwrap();
            let b = evolve_dense(&h, state.amplitudes(), t);
            for (x, y) in a.amplitudes().iter().zip(&b) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn superposition_transfer_amplitudes() {
        let p = TransferParams::new(100, 2.0, 2).unwrap();
        let (alpha, beta) = (c(0.6, 0.0), c(0.0, 0.8));
        let s0 = PureState::electron_with_polarized_ensemble(100, alpha, beta).unwrap();
        let g = p.coupling();
        for t in [0.0, 0.01, 0.05, p.transfer_time()] {
            let s = evolve_transfer(&s0, &p, t).unwrap();
            let up = s.collective_amplitude(true, 0).unwrap();
            let down1 = s.collective_amplitude(false, 1).unwrap();
            let down0 = s.collective_amplitude(false, 0).unwrap();
            assert!((up - alpha * (g * t).cos()).norm() < 1e-12);
            assert!((down1 - c(0.0, -1.0) * alpha * (g * t).sin()).norm() < 1e-12);
            assert!((down0 - beta).norm() < 1e-15);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn full_transfer_and_write_read_cycle() {
        let p = TransferParams::new(20, 1.0, 1).unwrap();
        let s0 = PureState::electron_with_polarized_ensemble(20, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let written = evolve_transfer(&s0, &p, p.transfer_time()).unwrap();
        assert!((written.collective_amplitude(false, 1).unwrap() - c(0.0, -1.0)).norm() < 1e-12);

        // continuing the same evolution for another π/(2g) reads the excitation back
        let read = evolve_transfer(&written, &p, p.transfer_time()).unwrap();
        let up = read.collective_amplitude(true, 0).unwrap();
        assert!((up.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_nucleus_rabi_frequency() {
        let p = TransferParams::new(1, 3.0, 1).unwrap();
        let s0 = PureState::electron_with_polarized_ensemble(1, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let full = s0.to_product().unwrap();
        let t = 0.2;
        let out = full_space_oracle(&p, &full, t).unwrap();
        // |↓⟩|1⟩ is electron bit clear, nucleus bit set
        assert!((out.amplitudes()[0b01].norm_sqr() - (3.0 * t).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn full_space_agrees_with_collective() {
        for n in 1..=4 {
            let p = TransferParams::new(n, 0.9, 1).unwrap();
            let s0 = PureState::electron_with_polarized_ensemble(n, c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)).unwrap();
            for t in [0.1, 0.7, p.transfer_time()] {
                let coll = evolve_transfer(&s0, &p, t).unwrap().to_product().unwrap();
                let full = full_space_oracle(&p, &s0.to_product().unwrap(), t).unwrap();
                let overlap = coll.inner(&full).unwrap().norm();
                assert!((1.0 - overlap).abs() < 1e-8, "n={n} t={t} overlap={overlap}");
            }
        }
    }

    #[test]
    fn oracle_rejects_unsupported_inputs() {
        let p2 = TransferParams::new(2, 1.0, 2).unwrap();
        let s = PureState::electron_with_polarized_ensemble(2, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(full_space_oracle(&p2, &s.to_product().unwrap(), 0.1).is_err());
        let p11 = TransferParams::new(11, 1.0, 1).unwrap();
        let big = PureState::electron_with_polarized_ensemble(11, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(big.to_product().is_err());
        assert!(full_space_oracle(&p11, &s.to_product().unwrap(), 0.1).is_err());
    }

    #[test]
    fn entangled_dots_transfer_jointly() {
        let n = 8;
        let p = TransferParams::new(n, 1.0, 2).unwrap();
        let up = PureState::electron_with_polarized_ensemble(n, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let down = PureState::electron_with_polarized_ensemble(n, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        let ud = PureState::pair(&up, &down).unwrap();
        let du = PureState::pair(&down, &up).unwrap();
        let amps: Vec<Complex64> = ud
            .amplitudes()
            .iter()
            .zip(du.amplitudes())
            .map(|(a, b)| (a + b) * FRAC_1_SQRT_2)
            .collect();
        let psi = PureState::new(ud.basis(), amps).unwrap();
        let out = evolve_transfer(&psi, &p, p.transfer_time()).unwrap();
        // both electrons end in ↓ and the excitation is shared by the ensembles
        let a = out.pair_amplitude((false, 1), (false, 0)).unwrap();
        let b = out.pair_amplitude((false, 0), (false, 1)).unwrap();
        assert!((a - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((b - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn collective_enhancement_scales_as_sqrt_n() {
        for n in [1usize, 4, 9] {
            let p = TransferParams::new(n, 1.0, 1).unwrap();
            let s0 = PureState::electron_with_polarized_ensemble(n, c(1.0, 0.0), c(0.0, 0.0)).unwrap().to_product().unwrap();
            // first time the electron is fully flipped gives π/(2g)
            let g = p.coupling();
            let out = full_space_oracle(&p, &s0, std::f64::consts::FRAC_PI_2 / g).unwrap();
            let up_weight: f64 = out.amplitudes()[1 << n..].iter().map(|a| a.norm_sqr()).sum();
            assert!(up_weight < 1e-12, "n={n}");
            assert!((g - (n as f64).sqrt()).abs() < 1e-12);
        }
    }
}
