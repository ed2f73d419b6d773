//! Component fidelities of the repeater and their composition.
//!
//! Every formula returns its raw value. Perturbative expressions (the gate
//! fidelity in particular) can leave their regime of validity; instead of
//! clamping, they report warnings that callers use to gate composition.

mod interp;

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid_arg, Error, Result};
use crate::exec::{self, Execution};
use crate::params::ParameterSet;
use crate::quadrature::GaussHermite;

pub use interp::MonotoneCubic;

/// Bohr magneton over Planck's constant, Hz per tesla.
pub const BOHR_MAGNETON_HZ_PER_T: f64 = 13.996_245_4e9;

/// Per-term threshold above which a first-order expansion is flagged.
pub const PERTURBATIVE_LIMIT: f64 = 0.05;

/// Lorentzian reduction of the resonant Purcell factor with dot-cavity detuning.
pub fn purcell_at_detuning(f_res: f64, kappa: f64, delta: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(invalid_arg(format!("cavity linewidth must be > 0, got {kappa}")));
    }
    let k2 = kappa * kappa;
    Ok(k2 / (4.0 * delta * delta + k2) * f_res)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnhancedRates {
    /// Cavity-enhanced population decay rate γ′.
    pub gamma_prime: f64,
    /// Homogeneous linewidth Γ′ = γ′ + 2γ*.
    pub linewidth: f64,
}

pub fn enhanced_rates(gamma_r: f64, gamma_nr: f64, gamma_star: f64, purcell: f64) -> EnhancedRates {
    let gamma_prime = gamma_r * (1.0 + purcell) + gamma_nr;
    EnhancedRates {
        gamma_prime,
        linewidth: gamma_prime + 2.0 * gamma_star,
    }
}

/// Two-photon heralded entanglement fidelity for two emitters whose optical
/// transitions differ by `delta_omega`.
pub fn barrett_kok_fidelity(a: EnhancedRates, b: EnhancedRates, delta_omega: f64) -> f64 {
    let sum = a.linewidth + b.linewidth;
    0.5 * (1.0 + 4.0 * a.gamma_prime * b.gamma_prime / (sum * sum + 4.0 * delta_omega * delta_omega))
}

/// Optical properties of one emitter during entanglement generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmitterSpectrum {
    pub gamma_r: f64,
    pub gamma_nr: f64,
    pub gamma_star: f64,
    /// Mean transition frequency minus cavity frequency.
    pub mean_detuning: f64,
    /// Spectral-diffusion standard deviation.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cavity {
    pub f_res: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub initial_nodes: usize,
    pub rel_tol: f64,
    pub max_doublings: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            initial_nodes: 21,
            rel_tol: 1e-6,
            max_doublings: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Nodes per axis of the accepted rule.
    pub nodes: usize,
    /// Relative change against the previous, coarser rule.
    pub rel_change: f64,
}

/// Barrett–Kok fidelity averaged over independent Gaussian spectral
/// diffusion of both emitters. The Purcell factor of each emitter is
/// recomputed at its instantaneous detuning from the (fixed) cavity.
pub fn entanglement_fidelity_for(
    a: &EmitterSpectrum,
    b: &EmitterSpectrum,
    cavity: Cavity,
    opts: QuadratureOptions,
) -> Result<QuadratureEstimate> {
    let integrand = |wa: f64, wb: f64| -> f64 {
        // kappa validated before the integration starts
        let fa = purcell_at_detuning(cavity.f_res, cavity.kappa, wa).unwrap_or(0.0);
        let fb = purcell_at_detuning(cavity.f_res, cavity.kappa, wb).unwrap_or(0.0);
        let ra = enhanced_rates(a.gamma_r, a.gamma_nr, a.gamma_star, fa);
        let rb = enhanced_rates(b.gamma_r, b.gamma_nr, b.gamma_star, fb);
        barrett_kok_fidelity(ra, rb, wa - wb)
    };
    purcell_at_detuning(cavity.f_res, cavity.kappa, 0.0)?;
    if a.sigma < 0.0 || b.sigma < 0.0 {
        return Err(invalid_arg("spectral-diffusion widths must be >= 0"));
    }
    if a.sigma == 0.0 && b.sigma == 0.0 {
        return Ok(QuadratureEstimate {
            value: integrand(a.mean_detuning, b.mean_detuning),
            nodes: 1,
            rel_change: 0.0,
        });
    }

    let eval = |n: usize| {
        GaussHermite::new(n).expect_normal_2d(
            (a.mean_detuning, a.sigma),
            (b.mean_detuning, b.sigma),
            integrand,
        )
    };
    let mut nodes = opts.initial_nodes.max(1);
    let mut previous = f64::NAN;
    let mut last = eval(nodes);
    for _ in 0..opts.max_doublings {
        nodes = 2 * nodes - 1;
        previous = last;
        last = eval(nodes);
        let rel_change = ((last - previous) / last).abs();
        if rel_change < opts.rel_tol {
            return Ok(QuadratureEstimate {
                value: last,
                nodes,
                rel_change,
            });
        }
    }
    Err(Error::NonConvergence {
        nodes,
        last,
        previous,
    })
}

fn emitter(params: &ParameterSet) -> EmitterSpectrum {
    let p = &params.physical;
    EmitterSpectrum {
        gamma_r: p.gamma_r,
        gamma_nr: p.gamma_nr,
        gamma_star: p.gamma_star,
        mean_detuning: p.detuning,
        sigma: p.sigma_sd,
    }
}

/// Entanglement generation fidelity for two identical dots described by
/// the parameter set.
pub fn entanglement_fidelity(params: &ParameterSet) -> Result<QuadratureEstimate> {
    let e = emitter(params);
    let cavity = Cavity {
        f_res: params.physical.f_res,
        kappa: params.physical.kappa,
    };
    entanglement_fidelity_for(&e, &e, cavity, QuadratureOptions::default())
}

/// Electron spin initialization fidelity. Taken as configured; the optical
/// pumping model behind the default is not reproduced here.
pub fn electron_init_fidelity(params: &ParameterSet) -> f64 {
    params.physical.f_e_init
}

/// Tabulated write-read fidelity factors for partial nuclear polarization.
pub const NUCLEAR_INIT_ANCHORS: [(f64, f64); 4] =
    [(0.80, 0.977), (0.95, 0.998), (0.999, 1.0), (1.0, 1.0)];

/// Write-read fidelity factor from partial nuclear polarization, by
/// monotone interpolation of tabulated values. No extrapolation below 80%.
pub fn nuclear_init_fidelity(polarization: f64) -> Result<f64> {
    thread_local! {
        static TABLE: MonotoneCubic = MonotoneCubic::new(&NUCLEAR_INIT_ANCHORS);
    }
    TABLE.with(|t| {
        t.eval(polarization).ok_or_else(|| {
            let (lo, hi) = t.domain();
            invalid_arg(format!(
                "nuclear polarization {polarization} outside tabulated range [{lo}, {hi}]"
            ))
        })
    })
}

/// Decay of the stored spin wave from Gaussian quadrupolar inhomogeneity.
pub fn quadrupolar_factor(sigma_q: f64, delta_m: u32, t: f64) -> Result<f64> {
    if !matches!(delta_m, 1 | 2) {
        return Err(invalid_arg(format!("delta_m must be 1 or 2, got {delta_m}")));
    }
    if t < 0.0 {
        return Err(invalid_arg(format!("time must be >= 0, got {t}")));
    }
    let dm4 = (delta_m as f64).powi(4);
    Ok((-dm4 * sigma_q * sigma_q * t * t).exp())
}

pub fn transfer_fidelity(f_e_init: f64, f_n_init: f64, f_quad: f64) -> f64 {
    f_e_init * f_n_init * f_quad
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateInputs {
    pub cooperativity: f64,
    /// Excited-state decay rate γ.
    pub gamma: f64,
    /// Effective decoherence rate ξ = 1/(2 T₂).
    pub xi: f64,
    pub delta_p: f64,
    pub sigma_p: f64,
    pub delta_eps1: f64,
    pub delta_eps2: f64,
    pub g_over_kappa: f64,
}

impl GateInputs {
    pub fn from_params(params: &ParameterSet) -> Self {
        let p = &params.physical;
        let gamma = p.gamma_r + p.gamma_nr;
        Self {
            cooperativity: p.f_res * p.gamma_r / gamma,
            gamma,
            xi: if p.t2_electron > 0.0 {
                1.0 / (2.0 * p.t2_electron)
            } else {
                f64::INFINITY
            },
            delta_p: p.delta_p,
            sigma_p: p.sigma_p,
            delta_eps1: p.delta_eps1,
            delta_eps2: p.delta_eps2,
            g_over_kappa: p.g_cav / p.kappa,
        }
    }
}

/// Individual infidelity contributions of the scattering gate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GateTerms {
    pub cooperativity: f64,
    pub detuning_mismatch: f64,
    pub decoherence: f64,
    pub spectral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateFidelity {
    pub value: f64,
    pub t_gate: f64,
    pub terms: GateTerms,
    pub warnings: Vec<String>,
}

/// Gate time: twice the FWHM duration of a Gaussian photon of spectral
/// standard deviation `delta_p`.
pub fn gate_time(delta_p: f64) -> Result<f64> {
    if !(delta_p > 0.0) {
        return Err(invalid_arg(format!("photon bandwidth must be > 0, got {delta_p}")));
    }
    Ok(8.0 * PI * (2.0 * std::f64::consts::LN_2).sqrt() / delta_p)
}

/// Fidelity of the cavity-assisted photon-scattering CZ gate, to first order
/// in 1/C, ξT and 1/(γT), second order in the detunings.
pub fn gate_fidelity(g: &GateInputs) -> Result<GateFidelity> {
    if !(g.cooperativity > 0.0) {
        return Err(invalid_arg(format!("cooperativity must be > 0, got {}", g.cooperativity)));
    }
    let t_gate = gate_time(g.delta_p)?;
    let c = g.cooperativity;
    let g2 = g.gamma * g.gamma;
    let x2 = (2.0 * g.g_over_kappa).powi(2);
    let bracket = 11.0 - 20.0 * x2 + 12.0 * x2 * x2;
    let mismatch = g.delta_eps1 - g.delta_eps2;
    let terms = GateTerms {
        cooperativity: 5.0 / (2.0 * c),
        detuning_mismatch: mismatch * mismatch / (2.0 * g2 * c),
        decoherence: g.xi * t_gate,
        spectral: (g.sigma_p * g.sigma_p + g.delta_p * g.delta_p) / (4.0 * g2 * c * c) * bracket,
    };
    let value =
        1.0 - terms.cooperativity - terms.detuning_mismatch - terms.decoherence - terms.spectral;

    let mut warnings = Vec::new();
    for (name, v) in [
        ("5/(2C)", terms.cooperativity),
        ("detuning mismatch", terms.detuning_mismatch),
        ("xi*T_gate", terms.decoherence),
        ("spectral", terms.spectral),
    ] {
        if v.abs() > PERTURBATIVE_LIMIT {
            warnings.push(format!(
                "gate correction `{name}` = {v:.4} exceeds {PERTURBATIVE_LIMIT}; first-order expansion invalid"
            ));
        }
    }
    Ok(GateFidelity {
        value,
        t_gate,
        terms,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutFidelity {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// Poissonian readout fidelity with dark counts `d` over a window `t`, for
/// a weakly driven (Ω ≪ γ′) cycling transition.
pub fn readout_fidelity(
    t: f64,
    d: f64,
    eta_c: f64,
    eta_d: f64,
    omega: f64,
    gamma_prime: f64,
) -> Result<ReadoutFidelity> {
    if t < 0.0 || d < 0.0 {
        return Err(invalid_arg("readout window and dark-count rate must be >= 0"));
    }
    if !(gamma_prime > 0.0) {
        return Err(invalid_arg(format!("gamma' must be > 0, got {gamma_prime}")));
    }
    let detected = t * eta_c * eta_d * omega * omega / gamma_prime;
    let value = 0.5 * (1.0 + (-t * d).exp() - (-detected).exp());
    let mut warnings = Vec::new();
    if omega > gamma_prime / 5.0 {
        warnings.push(format!(
            "drive Omega = {omega:.3e} rad/s is not small against gamma' = {gamma_prime:.3e} rad/s"
        ));
    }
    Ok(ReadoutFidelity { value, warnings })
}

/// Drive amplitude that yields `target` readout fidelity.
pub fn readout_drive_for(
    target: f64,
    t: f64,
    d: f64,
    eta_c: f64,
    eta_d: f64,
    gamma_prime: f64,
) -> Result<f64> {
    let residual = 1.0 + (-t * d).exp() - 2.0 * target;
    if !(residual > 0.0 && residual < 1.0) {
        return Err(invalid_arg(format!(
            "readout fidelity {target} is not reachable with T = {t} s and D = {d} Hz"
        )));
    }
    let detected = -residual.ln();
    Ok((detected * gamma_prime / (t * eta_c * eta_d)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingResult {
    /// Ground-state splitting, Hz.
    pub de_g: f64,
    /// Trion splitting, Hz.
    pub de_e: f64,
    /// Overhauser shift, Hz.
    pub de_oh: f64,
    /// Bare electron Zeeman splitting, Hz.
    pub de_zeeman_g: f64,
}

/// Ground and excited splittings when the Overhauser field adds to the
/// external field.
pub fn zeeman_splittings(b_x: f64, g_e: f64, g_h: f64, polarization: f64, de_oh_max: f64) -> Result<SplittingResult> {
    if b_x < 0.0 {
        return Err(invalid_arg(format!("field must be >= 0, got {b_x}")));
    }
    let de_oh = polarization * de_oh_max;
    let de_zeeman_g = (BOHR_MAGNETON_HZ_PER_T * g_e * b_x).abs();
    Ok(SplittingResult {
        de_g: de_zeeman_g + de_oh,
        de_e: (BOHR_MAGNETON_HZ_PER_T * g_h * b_x).abs() + de_oh,
        de_oh,
        de_zeeman_g,
    })
}

/// Spacing of the Hamiltonian-engineering pulses that selects the Δm mode.
pub fn pulse_spacing(omega_z_nuclear: f64, delta_m: u32) -> Result<f64> {
    if !(omega_z_nuclear > 0.0) {
        return Err(invalid_arg("nuclear Zeeman frequency must be > 0"));
    }
    if !matches!(delta_m, 1 | 2) {
        return Err(invalid_arg(format!("delta_m must be 1 or 2, got {delta_m}")));
    }
    Ok(3.0 * PI / (4.0 * omega_z_nuclear * delta_m as f64))
}

/// Per-component fidelities of one repeater configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityBudget {
    pub f_e_init: f64,
    pub f_n_init: f64,
    pub f_quad: f64,
    pub f_transfer: f64,
    /// Barrett–Kok value at the mean detunings, before spectral averaging.
    pub f_bk_nominal: f64,
    pub f_ent: f64,
    pub f_gate: f64,
    pub f_readout: f64,
    pub t_gate: f64,
    pub purcell_generation: f64,
    pub warnings: Vec<String>,
}

impl FidelityBudget {
    pub fn from_params(params: &ParameterSet) -> Result<Self> {
        let p = &params.physical;
        let mut warnings = Vec::new();

        let f_e_init = electron_init_fidelity(params);
        let f_n_init = nuclear_init_fidelity(p.nuclear_polarization)?;
        let f_quad = quadrupolar_factor(p.sigma_q, p.delta_m, p.t_trans)?;
        let f_transfer = transfer_fidelity(f_e_init, f_n_init, f_quad);

        let purcell_generation = purcell_at_detuning(p.f_res, p.kappa, p.detuning)?;
        let nominal = enhanced_rates(p.gamma_r, p.gamma_nr, p.gamma_star, purcell_generation);
        let f_bk_nominal = barrett_kok_fidelity(nominal, nominal, 0.0);
        let f_ent = entanglement_fidelity(params)?.value;

        let gate = gate_fidelity(&GateInputs::from_params(params))?;
        warnings.extend(gate.warnings.iter().cloned());

        // readout runs on cavity resonance
        let readout_rates = enhanced_rates(p.gamma_r, p.gamma_nr, p.gamma_star, p.f_res);
        let readout = readout_fidelity(
            p.t_readout,
            p.d_dark,
            params.link.eta_c,
            params.link.eta_d,
            p.omega_readout,
            readout_rates.gamma_prime,
        )?;
        warnings.extend(readout.warnings.iter().cloned());

        for (name, v) in [
            ("F_ent", f_ent),
            ("F_transfer", f_transfer),
            ("F_gate", gate.value),
            ("F_readout", readout.value),
        ] {
            if !(0.0..=1.0).contains(&v) {
                warnings.push(format!("{name} = {v} lies outside [0, 1]"));
            }
        }

        Ok(Self {
            f_e_init,
            f_n_init,
            f_quad,
            f_transfer,
            f_bk_nominal,
            f_ent,
            f_gate: gate.value,
            f_readout: readout.value,
            t_gate: gate.t_gate,
            purcell_generation,
            warnings,
        })
    }

    /// All components within their formulas' regime of validity.
    pub fn in_regime(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Multiplicative end-to-end fidelity for `links` elementary links.
pub fn overall_fidelity_links(
    links: u64,
    f_e_init: f64,
    f_readout: f64,
    f_ent: f64,
    f_transfer: f64,
    f_gate: f64,
) -> f64 {
    let l = links as i32;
    f_e_init.powi(2 * l)
        * f_readout.powi(2 * (l - 1))
        * (f_ent * f_transfer * f_transfer).powi(l)
        * f_gate.powi(l - 1)
}

/// Overall fidelity after `n_nest` swap levels (2^n links). Reliable only
/// when every component is close to one.
pub fn overall_fidelity(budget: &FidelityBudget, n_nest: u32) -> f64 {
    overall_fidelity_links(
        1u64 << n_nest,
        budget.f_e_init,
        budget.f_readout,
        budget.f_ent,
        budget.f_transfer,
        budget.f_gate,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourPoint {
    pub f_p: f64,
    pub polarization: f64,
    pub f_ent: f64,
    pub f_transfer: f64,
    pub f_gate: f64,
    pub f_readout: f64,
    pub f_total: f64,
    pub in_regime: bool,
}

/// Overall fidelity over a grid of resonant Purcell factor (taken equal to
/// the cooperativity) and nuclear polarization. The transfer time, the
/// generation detuning and all other inputs stay fixed. Rows are ordered
/// Purcell-major.
pub fn fidelity_contour(
    params: &ParameterSet,
    fp_grid: &[f64],
    polarization_grid: &[f64],
    exec: Execution,
) -> Result<Vec<ContourPoint>> {
    if fp_grid.is_empty() || polarization_grid.is_empty() {
        return Err(invalid_arg("contour grids must be non-empty"));
    }
    let cells: Vec<(f64, f64)> = fp_grid
        .iter()
        .flat_map(|&f| polarization_grid.iter().map(move |&p| (f, p)))
        .collect();
    let n_nest = params.link.n_nest;
    let points = exec::map_slice(exec, &cells, |&(f_p, pol)| -> Result<ContourPoint> {
        let mut p = params.clone();
        p.physical.f_res = f_p;
        p.physical.nuclear_polarization = pol;
        let b = FidelityBudget::from_params(&p)?;
        Ok(ContourPoint {
            f_p,
            polarization: pol,
            f_ent: b.f_ent,
            f_transfer: b.f_transfer,
            f_gate: b.f_gate,
            f_readout: b.f_readout,
            f_total: overall_fidelity(&b, n_nest),
            in_regime: b.in_regime(),
        })
    });
    points.into_iter().collect()
}
