//! Small dense density matrices over qubits, with qubit 0 in the most
//! significant bit and |1⟩ standing for spin up.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid_arg, Error, Result};

pub const MAX_QUBITS: usize = 10;

pub type Gate1 = [[Complex64; 2]; 2];

const fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub const IDENTITY: Gate1 = [[re(1.0), re(0.0)], [re(0.0), re(1.0)]];
pub const PAULI_X: Gate1 = [[re(0.0), re(1.0)], [re(1.0), re(0.0)]];
pub const PAULI_Y: Gate1 = [[re(0.0), Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), re(0.0)]];
pub const PAULI_Z: Gate1 = [[re(1.0), re(0.0)], [re(0.0), re(-1.0)]];
pub const HADAMARD: Gate1 = [
    [re(FRAC_1_SQRT_2), re(FRAC_1_SQRT_2)],
    [re(FRAC_1_SQRT_2), re(-FRAC_1_SQRT_2)],
];
pub const PAULIS: [Gate1; 4] = [IDENTITY, PAULI_X, PAULI_Y, PAULI_Z];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    /// Amplitudes over |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn vector(self) -> [Complex64; 4] {
        let h = FRAC_1_SQRT_2;
        match self {
            Bell::PhiPlus => [re(h), re(0.0), re(0.0), re(h)],
            Bell::PhiMinus => [re(h), re(0.0), re(0.0), re(-h)],
            Bell::PsiPlus => [re(0.0), re(h), re(h), re(0.0)],
            Bell::PsiMinus => [re(0.0), re(h), re(-h), re(0.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_matrix(n_qubits: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Dimension(format!("{n_qubits} qubits outside 1..={MAX_QUBITS}")));
        }
        let dim = 1usize << n_qubits;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::Dimension(format!(
                "{}x{} matrix for {n_qubits} qubits",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(Self { n_qubits, rho })
    }

    pub fn pure(n_qubits: usize, amps: &[Complex64]) -> Result<Self> {
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(invalid_arg(format!("state norm² is {norm2}, expected 1")));
        }
        let v = nalgebra::DVector::from_column_slice(amps);
        Self::from_matrix(n_qubits, &v * v.adjoint())
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        let mut amps = vec![re(0.0); 1 << n_qubits];
        *amps.get_mut(index).ok_or_else(|| invalid_arg("basis index out of range"))? = re(1.0);
        Self::pure(n_qubits, &amps)
    }

    pub fn bell(state: Bell) -> Self {
        Self::pure(2, &state.vector()).expect("Bell vectors are normalized")
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        Self::from_matrix(n_qubits, DMatrix::identity(dim, dim) * re(1.0 / dim as f64))
    }

    /// p|B⟩⟨B| + (1 − p)·I/4.
    pub fn werner(state: Bell, p: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&p) {
            return Err(invalid_arg(format!("Werner parameter {p} outside [-1/3, 1]")));
        }
        let pure = Self::bell(state).rho;
        let mixed = DMatrix::identity(4, 4) * re(0.25);
        Self::from_matrix(2, pure * re(p) + mixed * re(1.0 - p))
    }

    /// Werner state with the given overlap F with |B⟩, p = (4F − 1)/3.
    pub fn werner_with_fidelity(state: Bell, fidelity: f64) -> Result<Self> {
        Self::werner(state, (4.0 * fidelity - 1.0) / 3.0)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * re(0.5);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// Unit trace, Hermitian and positive semidefinite within `tol`.
    pub fn check_physical(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(invalid_arg(format!("trace {tr} differs from 1")));
        }
        let herm_err = (&self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > tol {
            return Err(invalid_arg(format!("not Hermitian, max deviation {herm_err}")));
        }
        let min = self.min_eigenvalue();
        if min < -tol {
            return Err(invalid_arg(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        Self::from_matrix(self.n_qubits + other.n_qubits, self.rho.kronecker(&other.rho))
    }

    fn mask(&self, q: usize) -> Result<usize> {
        if q >= self.n_qubits {
            return Err(invalid_arg(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        Ok(1usize << (self.n_qubits - 1 - q))
    }

    /// ρ → UρU† for a single-qubit unitary on qubit `q`.
    pub fn apply_1q(&mut self, q: usize, u: &Gate1) -> Result<()> {
        let mask = self.mask(q)?;
        let dim = self.dim();
        for col in 0..dim {
            for i0 in (0..dim).filter(|i| i & mask == 0) {
                let i1 = i0 | mask;
                let (a0, a1) = (self.rho[(i0, col)], self.rho[(i1, col)]);
                self.rho[(i0, col)] = u[0][0] * a0 + u[0][1] * a1;
                self.rho[(i1, col)] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        for row in 0..dim {
            for j0 in (0..dim).filter(|j| j & mask == 0) {
                let j1 = j0 | mask;
                let (a0, a1) = (self.rho[(row, j0)], self.rho[(row, j1)]);
                self.rho[(row, j0)] = a0 * u[0][0].conj() + a1 * u[0][1].conj();
                self.rho[(row, j1)] = a0 * u[1][0].conj() + a1 * u[1][1].conj();
            }
        }
        Ok(())
    }

    /// Ideal controlled-Z: only |↑↑⟩ acquires a sign.
    pub fn apply_cz_ideal(&mut self, q1: usize, q2: usize) -> Result<()> {
        if q1 == q2 {
            return Err(invalid_arg("CZ needs two distinct qubits"));
        }
        let both = self.mask(q1)? | self.mask(q2)?;
        let sign = |i: usize| if i & both == both { -1.0 } else { 1.0 };
        let dim = self.dim();
        for r in 0..dim {
            for c in 0..dim {
                let s = sign(r) * sign(c);
                if s < 0.0 {
                    self.rho[(r, c)] = -self.rho[(r, c)];
                }
            }
        }
        Ok(())
    }

    /// Two-qubit depolarizing channel ρ → λρ + (1 − λ)·Tr₁₂(ρ)⊗I/4, in its
    /// 16-term Pauli Kraus form.
    pub fn depolarize_2q(&mut self, q1: usize, q2: usize, lambda: f64) -> Result<()> {
        if q1 == q2 {
            return Err(invalid_arg("depolarizing needs two distinct qubits"));
        }
        if !(-1.0 / 15.0..=1.0).contains(&lambda) {
            return Err(invalid_arg(format!("depolarizing parameter {lambda} is not completely positive")));
        }
        self.mask(q1)?;
        self.mask(q2)?;
        if lambda == 1.0 {
            return Ok(());
        }
        let w_other = (1.0 - lambda) / 16.0;
        let w_identity = lambda + w_other;
        let mut acc = &self.rho * re(w_identity);
        for (a, pa) in PAULIS.iter().enumerate() {
            for (b, pb) in PAULIS.iter().enumerate() {
                if a == 0 && b == 0 {
                    continue;
                }
                let mut term = self.clone();
                term.apply_1q(q1, pa)?;
                term.apply_1q(q2, pb)?;
                acc += term.rho * re(w_other);
            }
        }
        self.rho = acc;
        Ok(())
    }

    /// Unnormalized projection of qubit `q` onto |bit⟩.
    pub fn project(&self, q: usize, bit: u8) -> Result<Self> {
        let mask = self.mask(q)?;
        let keep = |i: usize| (i & mask != 0) == (bit == 1);
        let mut out = self.clone();
        let dim = self.dim();
        for r in 0..dim {
            for c in 0..dim {
                if !(keep(r) && keep(c)) {
                    out.rho[(r, c)] = re(0.0);
                }
            }
        }
        Ok(out)
    }

    /// Reduced state of `keep`, in the listed order.
    pub fn partial_trace_keep(&self, keep: &[usize]) -> Result<Self> {
        for (i, &q) in keep.iter().enumerate() {
            self.mask(q)?;
            if keep[..i].contains(&q) {
                return Err(invalid_arg("duplicate qubit in partial trace"));
            }
        }
        let traced: Vec<usize> = (0..self.n_qubits).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let compose = |sub: usize, env: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                idx |= ((sub >> (k - 1 - pos)) & 1) << (self.n_qubits - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                idx |= ((env >> (traced.len() - 1 - pos)) & 1) << (self.n_qubits - 1 - q);
            }
            idx
        };
        let sub_dim = 1usize << k;
        let env_dim = 1usize << traced.len();
        let mut out = DMatrix::zeros(sub_dim, sub_dim);
        for r in 0..sub_dim {
            for c in 0..sub_dim {
                let mut s = re(0.0);
                for e in 0..env_dim {
                    s += self.rho[(compose(r, e), compose(c, e))];
                }
                out[(r, c)] = s;
            }
        }
        Self::from_matrix(k, out)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.rho *= re(factor);
        self
    }

    pub(crate) fn add_assign(&mut self, other: &DensityMatrix) {
        self.rho += &other.rho;
    }
}

/// Process fidelity of a two-qubit channel with average gate fidelity `f_avg`.
pub fn process_fidelity(f_avg: f64) -> f64 {
    (5.0 * f_avg - 1.0) / 4.0
}

/// Depolarizing parameter whose channel has average fidelity `f_avg`.
pub fn depolarizing_parameter(f_avg: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f_avg) {
        return Err(invalid_arg(format!("gate fidelity {f_avg} outside [0, 1]")));
    }
    let lambda = (16.0 * process_fidelity(f_avg) - 1.0) / 15.0;
    if lambda < -1.0 / 15.0 {
        return Err(invalid_arg(format!("gate fidelity {f_avg} below the depolarizing floor 0.2")));
    }
    Ok(lambda)
}

/// Noisy CZ: ideal conjugation followed by depolarizing with average gate
/// fidelity `f_gate`.
pub fn apply_cz(rho: &DensityMatrix, q1: usize, q2: usize, f_gate: f64) -> Result<DensityMatrix> {
    let lambda = depolarizing_parameter(f_gate)?;
    let mut out = rho.clone();
    out.apply_cz_ideal(q1, q2)?;
    out.depolarize_2q(q1, q2, lambda)?;
    Ok(out)
}

/// ⟨B|ρ|B⟩ for a two-qubit state.
pub fn bell_fidelity(rho: &DensityMatrix, target: Bell) -> Result<f64> {
    if rho.n_qubits() != 2 {
        return Err(Error::Dimension(format!("Bell fidelity needs 2 qubits, got {}", rho.n_qubits())));
    }
    let v = target.vector();
    let mut s = re(0.0);
    for r in 0..4 {
        for c in 0..4 {
            s += v[r].conj() * rho.matrix()[(r, c)] * v[c];
        }
    }
    Ok(s.re)
}
