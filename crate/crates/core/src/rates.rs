//! Closed-form entanglement distribution rates.

use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::params::{LinkParams, ParameterSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Parallel,
    Sequential,
    TwoPlusTwo,
    Direct,
}

/// Mean waiting time, either finite or unreachable because some success
/// probability vanished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "seconds", rename_all = "snake_case")]
pub enum MeanTime {
    Finite(f64),
    Unreachable,
}

impl MeanTime {
    fn from_denominator(numerator: f64, denominator: f64) -> Self {
        if denominator > 0.0 && numerator.is_finite() {
            MeanTime::Finite(numerator / denominator)
        } else {
            MeanTime::Unreachable
        }
    }

    pub fn seconds(self) -> Option<f64> {
        match self {
            MeanTime::Finite(t) => Some(t),
            MeanTime::Unreachable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    pub p0: f64,
    pub p_swap: f64,
    pub mean_time: MeanTime,
    pub scheme: Scheme,
}

impl RateResult {
    /// Distribution rate in Hz; zero when unreachable.
    pub fn rate(&self) -> f64 {
        match self.mean_time {
            MeanTime::Finite(t) if t > 0.0 => 1.0 / t,
            MeanTime::Finite(_) => f64::INFINITY,
            MeanTime::Unreachable => 0.0,
        }
    }
}

/// Fiber transmission probability over half an elementary link.
pub fn transmission_probability(l0: f64, l_att: f64) -> Result<f64> {
    if !(l_att > 0.0) {
        return Err(invalid_arg(format!("attenuation length must be > 0, got {l_att}")));
    }
    if l0 < 0.0 {
        return Err(invalid_arg(format!("link length must be >= 0, got {l0}")));
    }
    Ok((-l0 / (2.0 * l_att)).exp())
}

/// Fraction of emission into the Purcell-enhanced decay path when two
/// equal-strength paths are available.
pub fn branching_ratio(purcell: f64) -> f64 {
    (1.0 + purcell) / (2.0 + purcell)
}

/// Heralded two-photon success probability of one elementary link.
pub fn link_success_probability(link: &LinkParams, l0: f64) -> Result<f64> {
    let eta_t = transmission_probability(l0, link.l_att)?;
    let per_photon = link.zeta * eta_t * link.p_emit * link.eta_c * link.eta_d * link.eta_fc;
    Ok(0.5 * per_photon * per_photon)
}

/// Success probability of the cavity-assisted scattering gate.
pub fn swap_success_probability(link: &LinkParams) -> f64 {
    link.gate_source_efficiency() * link.eta_c * link.eta_cav * link.eta_d
}

fn nested_time(prefactor: f64, slot: f64, p0: f64, p_swap: f64, n: u32) -> MeanTime {
    MeanTime::from_denominator(prefactor * slot, p0 * p_swap.powi(n as i32))
}

/// Mean time with all elementary links attempting simultaneously.
pub fn mean_time_parallel(params: &ParameterSet) -> Result<RateResult> {
    let link = &params.link;
    let l0 = link.elementary_length();
    let p0 = link_success_probability(link, l0)?;
    let p_swap = swap_success_probability(link);
    let n = link.n_nest;
    Ok(RateResult {
        p0,
        p_swap,
        mean_time: nested_time(1.5f64.powi(n as i32), link.slot_time(), p0, p_swap, n),
        scheme: Scheme::Parallel,
    })
}

/// Mean time when neighboring links are generated one after another. A
/// single link (`n = 0`) has no neighbor and matches the parallel value.
pub fn mean_time_sequential(params: &ParameterSet) -> Result<RateResult> {
    let link = &params.link;
    let l0 = link.elementary_length();
    let p0 = link_success_probability(link, l0)?;
    let p_swap = swap_success_probability(link);
    let n = link.n_nest;
    let prefactor = if n == 0 {
        1.0
    } else {
        2.0 * 1.5f64.powi(n as i32 - 1)
    };
    Ok(RateResult {
        p0,
        p_swap,
        mean_time: nested_time(prefactor, link.slot_time(), p0, p_swap, n),
        scheme: Scheme::Sequential,
    })
}

/// Link probability of the photon-pair scheme.
pub fn two_plus_two_link_probability(link: &LinkParams, l0: f64) -> Result<f64> {
    let eta_t = transmission_probability(l0, link.l_att)?;
    let x = eta_t * link.eta_s_pair * link.eta_d;
    Ok(0.5 * x * x)
}

/// Swap probability of the two-photon Bell measurement with external memories.
pub fn two_plus_two_swap_probability(link: &LinkParams) -> f64 {
    0.5 * link.eta_d * link.eta_d * link.eta_m.powi(4)
}

/// Mean time of the photon-pair-source repeater with external memories.
/// Memory initialization and decay are neglected, so there is no `tau_init`.
pub fn mean_time_two_plus_two(params: &ParameterSet) -> Result<RateResult> {
    let link = &params.link;
    let l0 = link.elementary_length();
    let p0 = two_plus_two_link_probability(link, l0)?;
    let p_swap = two_plus_two_swap_probability(link);
    let n = link.n_nest;
    Ok(RateResult {
        p0,
        p_swap,
        mean_time: nested_time(1.5f64.powi(n as i32), l0 / link.c_fiber, p0, p_swap, n),
        scheme: Scheme::TwoPlusTwo,
    })
}

/// Rate of sending single photons straight down the whole channel.
pub fn direct_transmission_rate(l: f64, source_rate: f64, l_att: f64) -> Result<f64> {
    if l < 0.0 {
        return Err(invalid_arg(format!("distance must be >= 0, got {l}")));
    }
    if !(l_att > 0.0) {
        return Err(invalid_arg(format!("attenuation length must be > 0, got {l_att}")));
    }
    Ok(source_rate * (-l / l_att).exp())
}

/// Finds the distance in `[lo, hi]` where the parallel repeater rate equals
/// direct transmission, by bisection on the log-ratio. Returns `None` when
/// the two curves do not cross inside the bracket.
pub fn crossover_distance(params: &ParameterSet, lo: f64, hi: f64) -> Result<Option<f64>> {
    let log_ratio = |l: f64| -> Result<f64> {
        let mut p = params.clone();
        p.link.l_total = l;
        let repeater = mean_time_parallel(&p)?.rate();
        let direct = direct_transmission_rate(l, p.link.source_rate, p.link.l_att)?;
        Ok(repeater.ln() - direct.ln())
    };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (log_ratio(a)?, log_ratio(b)?);
    if fa.signum() == fb.signum() {
        return Ok(None);
    }
    let rising = fa < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let fm = log_ratio(mid)?;
        if (fm < 0.0) == rising {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-6 * hi.max(1.0) {
            break;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
