//! Entanglement swapping at a node holding D2 and D3, and the exact
//! branch-averaged chain built from it.

use rand::Rng;
use serde::Serialize;

use super::density::{
    bell_fidelity, depolarizing_parameter, Bell, DensityMatrix, Gate1, HADAMARD, IDENTITY, PAULI_X,
    PAULI_Z,
};
use crate::error::{invalid_arg, Result};

/// Corrections on the far qubit, applied right to left, indexed by the
/// recorded outcome (m2, m3).
fn correction(bits: (u8, u8)) -> &'static [Gate1] {
    match bits {
        (0, 0) => &[PAULI_X],
        (0, 1) => &[PAULI_Z, PAULI_X],
        (1, 0) => &[IDENTITY],
        _ => &[PAULI_Z],
    }
}

pub const OUTCOMES: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapNoise {
    pub f_gate: f64,
    pub f_readout: f64,
}

impl SwapNoise {
    pub const IDEAL: SwapNoise = SwapNoise {
        f_gate: 1.0,
        f_readout: 1.0,
    };

    fn flip_probability(&self) -> Result<f64> {
        if !(0.0..=1.0).contains(&self.f_readout) {
            return Err(invalid_arg(format!("readout fidelity {} outside [0, 1]", self.f_readout)));
        }
        Ok(1.0 - self.f_readout)
    }
}

/// Bell-measurement circuit H(c)·CZ(c,t)·H(c) then H(t) with the CZ
/// depolarized, leaving `b` and `c` ready for Z readout.
fn bell_measurement_circuit(rho: &mut DensityMatrix, b: usize, c: usize, noise: SwapNoise) -> Result<()> {
    let lambda = depolarizing_parameter(noise.f_gate)?;
    rho.apply_1q(b, &HADAMARD)?;
    rho.apply_cz_ideal(b, c)?;
    rho.depolarize_2q(b, c, lambda)?;
    rho.apply_1q(b, &HADAMARD)?;
    rho.apply_1q(c, &HADAMARD)?;
    Ok(())
}

/// Unnormalized post-measurement state for the recorded bits, including
/// classical readout flips, with the Pauli correction applied to `d`.
fn branch(rho: &DensityMatrix, b: usize, c: usize, d: usize, recorded: (u8, u8), flip: f64) -> Result<DensityMatrix> {
    let mut acc: Option<DensityMatrix> = None;
    for (m2, m3) in OUTCOMES {
        let weight = if m2 == recorded.0 { 1.0 - flip } else { flip }
            * if m3 == recorded.1 { 1.0 - flip } else { flip };
        if weight == 0.0 {
            continue;
        }
        let projected = rho.project(b, m2)?.project(c, m3)?.scaled(weight);
        match acc.as_mut() {
            Some(a) => a.add_assign(&projected),
            None => acc = Some(projected),
        }
    }
    let mut out = acc.expect("at least one readout weight is nonzero");
    for gate in correction(recorded) {
        out.apply_1q(d, gate)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwapBranch {
    pub bits: (u8, u8),
    pub probability: f64,
    /// Normalized, corrected state of (D1, D4).
    pub state: Option<DensityMatrix>,
}

/// All four outcome branches of a swap on a four-qubit register ordered
/// D1, D2, D3, D4. Branches of zero probability carry no state.
pub fn swap_branches(rho: &DensityMatrix, noise: SwapNoise) -> Result<Vec<SwapBranch>> {
    if rho.n_qubits() != 4 {
        return Err(invalid_arg(format!("swap expects 4 qubits, got {}", rho.n_qubits())));
    }
    let flip = noise.flip_probability()?;
    let mut work = rho.clone();
    bell_measurement_circuit(&mut work, 1, 2, noise)?;
    OUTCOMES
        .iter()
        .map(|&bits| {
            let post = branch(&work, 1, 2, 3, bits, flip)?;
            let probability = post.trace().re;
            let state = if probability > 1e-300 {
                Some(post.scaled(1.0 / probability).partial_trace_keep(&[0, 3])?)
            } else {
                None
            };
            Ok(SwapBranch {
                bits,
                probability,
                state,
            })
        })
        .collect()
}

/// Samples one swap outcome and returns the corrected (D1, D4) state.
pub fn swap_entanglement<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    noise: SwapNoise,
    rng: &mut R,
) -> Result<(DensityMatrix, (u8, u8))> {
    let branches = swap_branches(rho, noise)?;
    let u: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for b in &branches {
        if b.state.is_none() {
            continue;
        }
        cumulative += b.probability;
        chosen = Some(b);
        if u < cumulative {
            break;
        }
    }
    let b = chosen.expect("some branch has positive probability");
    Ok((b.state.clone().expect("chosen branch has a state"), b.bits))
}

/// Outcome-averaged Bell fidelity of a swap with respect to |Ψ⁺⟩.
pub fn averaged_swap_fidelity(rho: &DensityMatrix, noise: SwapNoise) -> Result<f64> {
    let mut f = 0.0;
    for b in swap_branches(rho, noise)? {
        if let Some(s) = b.state {
            f += b.probability * bell_fidelity(&s, Bell::PsiPlus)?;
        }
    }
    Ok(f)
}

/// Component fidelities entering the chain oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainComponents {
    pub f_ent: f64,
    pub f_transfer: f64,
    pub f_gate: f64,
    pub f_readout: f64,
    pub f_e_init: f64,
}

impl ChainComponents {
    pub const IDEAL: ChainComponents = ChainComponents {
        f_ent: 1.0,
        f_transfer: 1.0,
        f_gate: 1.0,
        f_readout: 1.0,
        f_e_init: 1.0,
    };

    /// Fidelity of one stored elementary pair.
    pub fn pair_fidelity(&self) -> f64 {
        self.f_e_init * self.f_e_init * self.f_ent * self.f_transfer * self.f_transfer
    }
}

/// Measure-and-correct channel: every branch is kept and summed, so the
/// register stays normalized and the measured qubits become classical.
fn swap_channel(rho: &DensityMatrix, b: usize, c: usize, d: usize, noise: SwapNoise) -> Result<DensityMatrix> {
    let flip = noise.flip_probability()?;
    let mut work = rho.clone();
    bell_measurement_circuit(&mut work, b, c, noise)?;
    let mut acc: Option<DensityMatrix> = None;
    for bits in OUTCOMES {
        let post = branch(&work, b, c, d, bits, flip)?;
        match acc.as_mut() {
            Some(a) => a.add_assign(&post),
            None => acc = Some(post),
        }
    }
    Ok(acc.expect("four branches"))
}

/// End-to-end |Ψ⁺⟩ fidelity of `links` Werner pairs joined by nested noisy
/// swaps, averaged exactly over all measurement records.
pub fn chain_fidelity_oracle(links: usize, c: &ChainComponents) -> Result<f64> {
    if !matches!(links, 1 | 2 | 4) {
        return Err(invalid_arg(format!("chain oracle supports 1, 2 or 4 links, got {links}")));
    }
    let pair = DensityMatrix::werner_with_fidelity(Bell::PsiPlus, c.pair_fidelity())?;
    let mut rho = pair.clone();
    for _ in 1..links {
        rho = rho.tensor(&pair)?;
    }
    let noise = SwapNoise {
        f_gate: c.f_gate,
        f_readout: c.f_readout,
    };
    let mut segments: Vec<(usize, usize)> = (0..links).map(|i| (2 * i, 2 * i + 1)).collect();
    while segments.len() > 1 {
        let mut next = Vec::with_capacity(segments.len() / 2);
        for pair in segments.chunks(2) {
            let (a, b) = pair[0];
            let (c_left, d) = pair[1];
            rho = swap_channel(&rho, b, c_left, d, noise)?;
            next.push((a, d));
        }
        segments = next;
    }
    let (first, last) = segments[0];
    bell_fidelity(&rho.partial_trace_keep(&[first, last])?, Bell::PsiPlus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::overall_fidelity_links;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_psi_plus() -> DensityMatrix {
        DensityMatrix::bell(Bell::PsiPlus).tensor(&DensityMatrix::bell(Bell::PsiPlus)).unwrap()
    }

    #[test]
    fn ideal_swap_is_perfect_on_every_branch() {
        let branches = swap_branches(&two_psi_plus(), SwapNoise::IDEAL).unwrap();
        assert_eq!(branches.len(), 4);
        for b in branches {
            assert!((b.probability - 0.25).abs() < 1e-14);
            let f = bell_fidelity(b.state.as_ref().unwrap(), Bell::PsiPlus).unwrap();
            assert!((f - 1.0).abs() < 1e-12, "branch {:?}: {f}", b.bits);
        }
    }

    #[test]
    fn product_input_stays_separable() {
        let rho = DensityMatrix::basis_state(4, 0).unwrap();
        for b in swap_branches(&rho, SwapNoise::IDEAL).unwrap() {
            if let Some(s) = b.state {
                for bell in [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus] {
                    assert!(bell_fidelity(&s, bell).unwrap() <= 0.5 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn noisy_gate_matches_depolarizing_algebra() {
        // depolarizing on (D2, D3) leaves the pair (D1, D4) Werner with parameter λ
        let f_gate = 0.995;
        let lambda = depolarizing_parameter(f_gate).unwrap();
        let noise = SwapNoise { f_gate, f_readout: 1.0 };
        let f = averaged_swap_fidelity(&two_psi_plus(), noise).unwrap();
        assert!((f - (lambda + (1.0 - lambda) / 4.0)).abs() < 1e-12);
        assert!(f < 1.0);
    }

    #[test]
    fn sampled_swap_returns_a_valid_branch() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = SwapNoise { f_gate: 0.99, f_readout: 0.999 };
        let (state, bits) = swap_entanglement(&two_psi_plus(), noise, &mut rng).unwrap();
        assert!(OUTCOMES.contains(&bits));
        state.check_physical(1e-10).unwrap();
        assert!(bell_fidelity(&state, Bell::PsiPlus).unwrap() > 0.95);
    }

    #[test]
    fn swap_and_chain_agree_for_two_links() {
        let c = ChainComponents {
            f_ent: 0.995,
            f_transfer: 0.993,
            f_gate: 0.995,
            f_readout: 0.99983,
            f_e_init: 0.99996,
        };
        let pair = DensityMatrix::werner_with_fidelity(Bell::PsiPlus, c.pair_fidelity()).unwrap();
        let rho = pair.tensor(&pair).unwrap();
        let via_swap = averaged_swap_fidelity(&rho, SwapNoise { f_gate: c.f_gate, f_readout: c.f_readout }).unwrap();
        let via_chain = chain_fidelity_oracle(2, &c).unwrap();
        assert!((via_swap - via_chain).abs() < 1e-12);
    }

    #[test]
    fn chain_structure() {
        for l in [1, 2, 4] {
            assert!((chain_fidelity_oracle(l, &ChainComponents::IDEAL).unwrap() - 1.0).abs() < 1e-12);
        }
        let c = ChainComponents { f_ent: 0.97, ..ChainComponents::IDEAL };
        assert!((chain_fidelity_oracle(1, &c).unwrap() - 0.97).abs() < 1e-12);
        assert!(chain_fidelity_oracle(3, &c).is_err());
    }

    #[test]
    fn readout_errors_reduce_fidelity() {
        let c = ChainComponents { f_readout: 0.99, ..ChainComponents::IDEAL };
        let f = chain_fidelity_oracle(2, &c).unwrap();
        // one wrong bit anywhere spoils the correction
        assert!((f - 0.99f64.powi(2)).abs() < 1e-12, "{f}");
    }

    #[test]
    fn oracle_tracks_multiplicative_formula() {
        let c = ChainComponents {
            f_ent: 0.995,
            f_transfer: 0.993,
            f_gate: 0.995,
            f_readout: 0.99983,
            f_e_init: 0.99996,
        };
        for l in [2usize, 4] {
            let oracle = chain_fidelity_oracle(l, &c).unwrap();
            let formula = overall_fidelity_links(l as u64, c.f_e_init, c.f_readout, c.f_ent, c.f_transfer, c.f_gate);
            assert!((oracle - formula).abs() <= 0.02, "l={l}: {oracle} vs {formula}");
        }
    }
}
