//! Slotted Monte Carlo of the nested repeater protocol.
//!
//! All 2^n elementary links start attempting at t = 0, each needing a
//! geometric number of slots. Sibling subtrees wait for each other, then
//! swap. A failed swap discards both children, which regenerate from the
//! moment of failure. Each trial draws from its own ChaCha stream selected
//! by the trial index, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::exec::{self, Execution};
use crate::output::format_sci;
use crate::params::ParameterSet;
use crate::rates::{self, RateResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolConfig {
    pub n_nest: u32,
    pub p0: f64,
    pub p_swap: f64,
    /// Cost of one elementary attempt, s.
    pub slot_time: f64,
    /// Duration of one swap operation, s.
    pub swap_time: f64,
    /// Longest a memory may wait before its link is discarded; `None` is unlimited.
    pub memory_cutoff: Option<f64>,
    /// Discards tolerated per trial before it is declared unsuccessful.
    pub max_cutoff_discards: u32,
    pub trials: u64,
    pub seed: u64,
}

impl ProtocolConfig {
    pub const DEFAULT_MAX_CUTOFF_DISCARDS: u32 = 10;

    pub fn new(n_nest: u32, p0: f64, p_swap: f64, slot_time: f64, trials: u64, seed: u64) -> Self {
        Self {
            n_nest,
            p0,
            p_swap,
            slot_time,
            swap_time: 0.0,
            memory_cutoff: None,
            max_cutoff_discards: Self::DEFAULT_MAX_CUTOFF_DISCARDS,
            trials,
            seed,
        }
    }

    /// Parallel-scheme protocol for the link parameters of `params`.
    pub fn from_params(params: &ParameterSet, trials: u64, seed: u64) -> Result<Self> {
        let link = &params.link;
        let p0 = rates::link_success_probability(link, link.elementary_length())?;
        let p_swap = rates::swap_success_probability(link);
        Ok(Self::new(link.n_nest, p0, p_swap, link.slot_time(), trials, seed))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return Err(invalid_arg(format!("p0 must lie in (0, 1], got {}", self.p0)));
        }
        if !(self.p_swap > 0.0 && self.p_swap <= 1.0) {
            return Err(invalid_arg(format!("p_swap must lie in (0, 1], got {}", self.p_swap)));
        }
        if self.trials == 0 {
            return Err(invalid_arg("need at least one trial"));
        }
        if !(self.slot_time > 0.0) || self.swap_time < 0.0 {
            return Err(invalid_arg("slot time must be > 0 and swap time >= 0"));
        }
        if self.n_nest > 20 {
            return Err(invalid_arg(format!("nesting level {} is too deep to simulate", self.n_nest)));
        }
        if let Some(c) = self.memory_cutoff {
            if !(c >= 0.0) {
                return Err(invalid_arg(format!("memory cutoff must be >= 0, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub total_time: f64,
    /// Attempts made by each elementary link position, regenerations included.
    pub attempts_per_link: Vec<u64>,
    pub swap_failures: u64,
    pub cutoff_discards: u32,
    /// Longest wait of a junction memory before a swap.
    pub max_storage_time: f64,
    pub success: bool,
}

#[derive(Debug, Clone, Copy)]
struct Subtree {
    ready: f64,
    left_created: f64,
    right_created: f64,
}

struct Trial<'a> {
    cfg: &'a ProtocolConfig,
    rng: ChaCha8Rng,
    attempts: Vec<u64>,
    swap_failures: u64,
    discards: u32,
    max_storage: f64,
}

impl Trial<'_> {
    /// Slots until first success, by inversion so that draws at different
    /// p0 stay coupled.
    fn geometric(&mut self) -> u64 {
        let u: f64 = 1.0 - self.rng.random::<f64>();
        if self.cfg.p0 >= 1.0 {
            return 1;
        }
        let k = (u.ln() / (1.0 - self.cfg.p0).ln()).ceil();
        (k as u64).max(1)
    }

    fn build(&mut self, level: u32, offset: usize, start: f64) -> Option<Subtree> {
        if level == 0 {
            let a = self.geometric();
            self.attempts[offset] += a;
            let t = start + a as f64 * self.cfg.slot_time;
            return Some(Subtree {
                ready: t,
                left_created: t,
                right_created: t,
            });
        }
        let half = 1usize << (level - 1);
        let mut t0 = start;
        loop {
            let left = self.build(level - 1, offset, t0)?;
            let right = self.build(level - 1, offset + half, t0)?;
            let t_swap = left.ready.max(right.ready);
            let storage = t_swap - left.right_created.min(right.left_created);
            if self.cfg.memory_cutoff.is_some_and(|c| storage > c) {
                self.discards += 1;
                if self.discards > self.cfg.max_cutoff_discards {
                    return None;
                }
                t0 = t_swap;
                continue;
            }
            self.max_storage = self.max_storage.max(storage);
            let done = t_swap + self.cfg.swap_time;
            if self.rng.random::<f64>() < self.cfg.p_swap {
                return Some(Subtree {
                    ready: done,
                    left_created: left.left_created,
                    right_created: right.right_created,
                });
            }
            self.swap_failures += 1;
            t0 = done;
        }
    }
}

/// One trial, reproducible from (seed, index) alone.
pub fn simulate_trial(cfg: &ProtocolConfig, index: u64) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut trial = Trial {
        cfg,
        rng,
        attempts: vec![0; 1usize << cfg.n_nest],
        swap_failures: 0,
        discards: 0,
        max_storage: 0.0,
    };
    let root = trial.build(cfg.n_nest, 0, 0.0);
    TrialRecord {
        total_time: root.map_or(f64::NAN, |r| r.ready),
        success: root.is_some(),
        attempts_per_link: trial.attempts,
        swap_failures: trial.swap_failures,
        cutoff_discards: trial.discards,
        max_storage_time: trial.max_storage,
    }
}

pub fn run_trials(cfg: &ProtocolConfig, exec: Execution) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    Ok(exec::map_indexed(exec, cfg.trials, |i| simulate_trial(cfg, i)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingStats {
    /// Statistics cover successful trials only.
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub trials: u64,
    pub successes: u64,
    pub seed: u64,
}

impl TimingStats {
    pub fn from_records(records: &[TrialRecord], seed: u64) -> Self {
        let mut times: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.total_time).collect();
        let n = times.len();
        let mean = times.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        times.sort_by(f64::total_cmp);
        let pct = |q: f64| {
            if n == 0 {
                f64::NAN
            } else {
                let rank = ((q * n as f64).ceil() as usize).clamp(1, n);
                times[rank - 1]
            }
        };
        Self {
            mean,
            variance,
            stderr: (variance / n as f64).sqrt(),
            p50: pct(0.50),
            p90: pct(0.90),
            p99: pct(0.99),
            trials: records.len() as u64,
            successes: n as u64,
            seed,
        }
    }

    pub fn success_fraction(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

pub fn simulate_chain(cfg: &ProtocolConfig, exec: Execution) -> Result<TimingStats> {
    let records = run_trials(cfg, exec)?;
    Ok(TimingStats::from_records(&records, cfg.seed))
}

/// E[max(G₁, G₂)] for independent geometric variables on {1, 2, ...}.
pub fn expected_max_of_two_geometric(p: f64) -> f64 {
    2.0 / p - 1.0 / (p * (2.0 - p))
}

/// Exact mean completion time for `n_nest` ≤ 1 under the simulated
/// semantics, or `None` for deeper chains.
pub fn exact_mean_time(cfg: &ProtocolConfig) -> Option<f64> {
    match cfg.n_nest {
        0 => Some(cfg.slot_time / cfg.p0),
        1 => Some((expected_max_of_two_geometric(cfg.p0) * cfg.slot_time + cfg.swap_time) / cfg.p_swap),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub mc_mean: f64,
    pub mc_stderr: f64,
    /// Mean ± 3 standard errors.
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares simulated and analytic mean times. Passes when the ratio lies
/// within `tolerance` of one, or the analytic value lies inside the
/// 3-standard-error band.
pub fn compare_with_analytic(stats: &TimingStats, analytic: &RateResult, tolerance: f64) -> Result<ComparisonReport> {
    let a = analytic
        .mean_time
        .seconds()
        .ok_or_else(|| invalid_arg("analytic mean time is unreachable"))?;
    Ok(compare_with_value(stats, a, tolerance))
}

pub fn compare_with_value(stats: &TimingStats, analytic: f64, tolerance: f64) -> ComparisonReport {
    let ratio = stats.mean / analytic;
    let ci_low = stats.mean - 3.0 * stats.stderr;
    let ci_high = stats.mean + 3.0 * stats.stderr;
    ComparisonReport {
        mc_mean: stats.mean,
        mc_stderr: stats.stderr,
        ci_low,
        ci_high,
        analytic,
        ratio,
        ratio_stderr: stats.stderr / analytic,
        tolerance,
        pass: (ratio - 1.0).abs() <= tolerance || (ci_low..=ci_high).contains(&analytic),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StorageHistogram {
    /// Bin edges in seconds, one more than `counts`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub samples: Vec<f64>,
}

impl StorageHistogram {
    pub fn fraction_exceeding(&self, threshold: f64) -> f64 {
        let above = self.samples.iter().filter(|&&s| s > threshold).count();
        above as f64 / self.samples.len() as f64
    }
}

/// Distribution of the per-trial maximum storage time over successful trials.
pub fn storage_time_histogram(cfg: &ProtocolConfig, bins: usize, exec: Execution) -> Result<StorageHistogram> {
    if bins == 0 {
        return Err(invalid_arg("histogram needs at least one bin"));
    }
    let records = run_trials(cfg, exec)?;
    let samples: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.max_storage_time).collect();
    let hi = samples.iter().copied().fold(0.0, f64::max);
    let width = if hi > 0.0 { hi / bins as f64 } else { 1.0 };
    let edges = (0..=bins).map(|i| i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &s in &samples {
        let b = ((s / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(StorageHistogram { edges, counts, samples })
}

pub const TRIAL_CSV_HEADER: &str = "trial,total_time_s,swap_failures,max_storage_s";

/// Per-trial dump; failed trials report `nan` for the total time.
pub fn write_trial_csv<W: std::io::Write>(records: &[TrialRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRIAL_CSV_HEADER}")?;
    for (i, r) in records.iter().enumerate() {
        writeln!(
            w,
            "{i},{},{},{}",
            format_sci(r.total_time),
            r.swap_failures,
            format_sci(r.max_storage_time)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_link_mean_is_geometric() {
        let cfg = ProtocolConfig::new(0, 0.1, 1.0, 1.0, 100_000, 1);
        let s = simulate_chain(&cfg, Execution::Parallel).unwrap();
        assert!((s.mean - 10.0).abs() < 3.0 * s.stderr, "{} ± {}", s.mean, s.stderr);
        assert!((s.stderr - (s.variance / 100_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_closed_forms() {
        assert!((expected_max_of_two_geometric(1.0) - 1.0).abs() < 1e-15);
        assert!((expected_max_of_two_geometric(0.5) - 8.0 / 3.0).abs() < 1e-12);
        let cfg = ProtocolConfig::new(1, 0.01, 0.5, 1.0, 1, 0);
        assert!((exact_mean_time(&cfg).unwrap() - 299.497_487).abs() < 1e-5);
    }

    #[test]
    fn one_level_matches_exact_mean() {
        let cfg = ProtocolConfig::new(1, 0.01, 0.5, 1.0, 100_000, 7);
        let s = simulate_chain(&cfg, Execution::Parallel).unwrap();
        let exact = exact_mean_time(&cfg).unwrap();
        assert!((s.mean - exact).abs() < 3.0 * s.stderr, "{} vs {exact}", s.mean);
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let mut cfg = ProtocolConfig::new(3, 0.05, 0.6, 1e-3, 2_000, 42);
        cfg.swap_time = 1e-5;
        let a = run_trials(&cfg, Execution::Sequential).unwrap();
        let b = run_trials(&cfg, Execution::Parallel).unwrap();
        let c = run_trials(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
        let other = run_trials(&ProtocolConfig { seed: 43, ..cfg.clone() }, Execution::Parallel).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn storage_for_single_level_is_gap_between_links() {
        let cfg = ProtocolConfig::new(1, 0.3, 1.0, 2.0, 500, 3);
        for r in run_trials(&cfg, Execution::Sequential).unwrap() {
            let (g1, g2) = (r.attempts_per_link[0] as f64, r.attempts_per_link[1] as f64);
            assert_eq!(r.max_storage_time, (g1 - g2).abs() * 2.0);
            assert_eq!(r.total_time, g1.max(g2) * 2.0);
            assert!(r.success && r.total_time >= cfg.slot_time);
        }
    }

    #[test]
    fn storage_distribution_matches_enumeration() {
        let cfg = ProtocolConfig::new(1, 0.5, 1.0, 1.0, 100_000, 11);
        let h = storage_time_histogram(&cfg, 10, Execution::Parallel).unwrap();
        // P(|G1 − G2| = d) by direct summation over the first 60 slots
        let pmf = |g: u32| 0.5f64.powi(g as i32);
        for d in 0..=20u32 {
            let mut exact = 0.0;
            for g1 in 1..=60u32 {
                for g2 in 1..=60u32 {
                    if g1.abs_diff(g2) == d {
                        exact += pmf(g1) * pmf(g2);
                    }
                }
            }
            let freq = h.samples.iter().filter(|&&s| s == d as f64).count() as f64 / h.samples.len() as f64;
            let sigma = (exact * (1.0 - exact) / h.samples.len() as f64).sqrt();
            assert!((freq - exact).abs() <= 4.0 * sigma + 1e-12, "d={d}: {freq} vs {exact}");
        }
    }

    #[test]
    fn no_waiting_without_siblings() {
        let cfg = ProtocolConfig::new(0, 0.2, 1.0, 1.0, 1000, 5);
        let h = storage_time_histogram(&cfg, 4, Execution::Parallel).unwrap();
        assert!(h.samples.iter().all(|&s| s == 0.0));
        assert_eq!(h.fraction_exceeding(0.0), 0.0);
    }

    #[test]
    fn finite_cutoff_costs_time_and_successes() {
        let base = ProtocolConfig::new(1, 0.02, 1.0, 1.0, 20_000, 9);
        let unlimited = simulate_chain(&base, Execution::Parallel).unwrap();
        assert_eq!(unlimited.success_fraction(), 1.0);
        let median_storage = {
            let h = storage_time_histogram(&base, 10, Execution::Parallel).unwrap();
            let mut s = h.samples.clone();
            s.sort_by(f64::total_cmp);
            s[s.len() / 2]
        };
        let limited = ProtocolConfig {
            memory_cutoff: Some(0.5 * median_storage),
            ..base
        };
        let s = simulate_chain(&limited, Execution::Parallel).unwrap();
        assert!(s.success_fraction() < 1.0);
        assert!(s.mean > unlimited.mean);
    }

    #[test]
    fn mean_time_falls_with_success_probabilities() {
        let mut prev = f64::INFINITY;
        for p0 in [0.02, 0.05, 0.1, 0.3] {
            let s = simulate_chain(&ProtocolConfig::new(2, p0, 0.7, 1.0, 5_000, 21), Execution::Parallel).unwrap();
            assert!(s.mean <= prev);
            prev = s.mean;
        }
        let mut prev = f64::INFINITY;
        for ps in [0.3, 0.5, 0.8, 1.0] {
            let s = simulate_chain(&ProtocolConfig::new(2, 0.05, ps, 1.0, 5_000, 21), Execution::Parallel).unwrap();
            assert!(s.mean <= prev);
            prev = s.mean;
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(ProtocolConfig::new(1, 0.0, 0.5, 1.0, 10, 0).validate().is_err());
        assert!(ProtocolConfig::new(1, 0.1, 1.5, 1.0, 10, 0).validate().is_err());
        assert!(ProtocolConfig::new(1, 0.1, 0.5, 1.0, 0, 0).validate().is_err());
    }

    #[test]
    fn trial_csv_layout() {
        let cfg = ProtocolConfig::new(1, 0.5, 1.0, 1.0, 2, 0);
        let mut buf = Vec::new();
        write_trial_csv(&run_trials(&cfg, Execution::Sequential).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRIAL_CSV_HEADER);
        assert!(lines.next().unwrap().starts_with("0,"));
        assert_eq!(text.lines().count(), 3);
    }
}
