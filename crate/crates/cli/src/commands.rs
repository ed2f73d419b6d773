use std::fmt::Write as _;

use anyhow::{anyhow, Context};
use qdrepeater::acceptance::{self, AcceptanceOptions, CURVE_EXTRACTION};
use qdrepeater::fidelity::{self, FidelityBudget};
use qdrepeater::mcsim::{self, ProtocolConfig};
use qdrepeater::output::format_sci;
use qdrepeater::rates;
use qdrepeater::{Execution, ParameterSet};
use serde_json::json;

use crate::report::{emit, Failure, Provenance};
use crate::{Cli, Command, ContourArgs, McArgs, RatesArgs, Scale};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_TRIALS: u64 = 100_000;

/// Grid anchors that always appear in the contour output.
const FP_ANCHORS: [f64; 2] = [200.0, 500.0];
const POL_ANCHORS: [f64; 3] = [0.80, 0.95, 0.999];

pub const RATES_HEADER: &str = "L_km,rate_direct,rate_B,rate_C,rate_D,rate_2plus2";
pub const CONTOUR_HEADER: &str = "F_p,polarization,F_ent,F_transfer,F_gate,F_readout,F_total";

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let params = resolve(cli)?;
    match &cli.command {
        Command::Rates(args) => rates_cmd(cli, &params, args),
        Command::Contour(args) => contour_cmd(cli, &params, args),
        Command::Validate => validate_cmd(cli, &params),
        Command::Mc(args) => mc_cmd(cli, &params, args),
        Command::Qsim => qsim_cmd(cli, &params),
    }
}

fn resolve(cli: &Cli) -> Result<ParameterSet, Failure> {
    let base = match &cli.config {
        Some(path) => ParameterSet::load_config(path).map_err(|e| Failure::Config(e.into()))?,
        None => ParameterSet::default(),
    };
    base.with_overrides(cli.params.iter().map(String::as_str))
        .map_err(|e| Failure::Config(e.into()))
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn provenance<'a>(cli: &'a Cli, command: &'static str, params: &'a ParameterSet) -> Provenance<'a> {
    Provenance {
        command,
        config: cli.config.as_deref(),
        overrides: &cli.params,
        params,
        seed: cli.seed,
        trials: cli.trials,
    }
}

/// A sampled range of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, Failure> {
        if self.points < 2 {
            return Err(Failure::Usage(anyhow!("{name}: need at least 2 points, got {}", self.points)));
        }
        if !(self.start < self.stop) {
            return Err(Failure::Usage(anyhow!(
                "{name}: start {} must be below stop {}",
                self.start,
                self.stop
            )));
        }
        let last = (self.points - 1) as f64;
        match self.scale {
            Scale::Linear => Ok((0..self.points)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
                .collect()),
            Scale::Log => {
                if self.start <= 0.0 {
                    return Err(Failure::Usage(anyhow!("{name}: log scale needs a positive start")));
                }
                let (a, b) = (self.start.ln(), self.stop.ln());
                Ok((0..self.points).map(|i| (a + (b - a) * i as f64 / last).exp()).collect())
            }
        }
    }
}

fn rates_cmd(cli: &Cli, params: &ParameterSet, args: &RatesArgs) -> Result<(), Failure> {
    let distances = SweepSpec {
        start: args.l_start_km,
        stop: args.l_stop_km,
        points: args.points,
        scale: args.scale,
    }
    .values("distance")?;
    if distances[0] < 0.0 {
        return Err(Failure::Usage(anyhow!("distances must be >= 0 km")));
    }
    let curves: Vec<ParameterSet> = CURVE_EXTRACTION
        .iter()
        .map(|&(_, pe)| acceptance::rate_curve(params, pe))
        .collect();

    let mut csv = String::from(RATES_HEADER);
    csv.push('\n');
    for &l_km in &distances {
        let l = l_km * 1e3;
        let at = |p: &ParameterSet| {
            let mut q = p.clone();
            q.link.l_total = l;
            q
        };
        let direct = rates::direct_transmission_rate(l, params.link.source_rate, params.link.l_att).map_err(runtime)?;
        let mut row = vec![format_sci(l_km), format_sci(direct)];
        for c in &curves {
            row.push(format_sci(rates::mean_time_parallel(&at(c)).map_err(runtime)?.rate()));
        }
        row.push(format_sci(rates::mean_time_two_plus_two(&at(params)).map_err(runtime)?.rate()));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }

    let crossover = rates::crossover_distance(&curves[0], distances[0].max(1.0) * 1e3, distances[distances.len() - 1] * 1e3)
        .map_err(runtime)?;
    let extra = json!({
        "curves": CURVE_EXTRACTION.iter().map(|(n, pe)| json!({"curve": n, "p_eta_c": pe})).collect::<Vec<_>>(),
        "curve_B_direct_crossover_km": crossover.map(|l| l / 1e3),
        "units": {"L_km": "km", "rates": "Hz"},
    });
    emit(cli.out.as_deref(), &csv, &provenance(cli, "rates", params), extra)
}

/// Sweep values merged with the anchors, sorted and deduplicated.
fn with_anchors(mut values: Vec<f64>, anchors: &[f64]) -> Vec<f64> {
    values.extend_from_slice(anchors);
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    values
}

fn contour_cmd(cli: &Cli, params: &ParameterSet, args: &ContourArgs) -> Result<(), Failure> {
    let fp = SweepSpec {
        start: args.fp_start,
        stop: args.fp_stop,
        points: args.fp_points,
        scale: Scale::Linear,
    }
    .values("F_p")?;
    let pol = SweepSpec {
        start: args.pol_start,
        stop: args.pol_stop,
        points: args.pol_points,
        scale: Scale::Linear,
    }
    .values("polarization")?;
    if fp[0] <= 0.0 {
        return Err(Failure::Usage(anyhow!("Purcell factors must be > 0")));
    }
    if pol[0] < POL_ANCHORS[0] || pol[pol.len() - 1] > 1.0 {
        return Err(Failure::Usage(anyhow!(
            "polarization grid must lie within [{}, 1]",
            POL_ANCHORS[0]
        )));
    }
    let fp = with_anchors(fp, &FP_ANCHORS);
    let pol = with_anchors(pol, &POL_ANCHORS);

    let grid = fidelity::fidelity_contour(params, &fp, &pol, execution(cli)).map_err(runtime)?;
    let mut csv = String::from(CONTOUR_HEADER);
    csv.push('\n');
    let mut withheld = 0usize;
    for c in &grid {
        let total = if c.in_regime || cli.force {
            c.f_total
        } else {
            withheld += 1;
            f64::NAN
        };
        let row = [c.f_p, c.polarization, c.f_ent, c.f_transfer, c.f_gate, c.f_readout, total]
            .map(format_sci)
            .join(",");
        csv.push_str(&row);
        csv.push('\n');
    }
    if withheld > 0 {
        eprintln!(
            "warning: {withheld} grid points have components outside their perturbative regime; \
             F_total left as nan (pass --force to compose anyway)"
        );
    }
    let extra = json!({
        "n_nest": params.link.n_nest,
        "fp_grid": fp,
        "polarization_grid": pol,
        "anchors": {"F_p": FP_ANCHORS, "polarization": POL_ANCHORS},
        "out_of_regime_points": grid.iter().filter(|c| !c.in_regime).count(),
        "forced": cli.force,
    });
    emit(cli.out.as_deref(), &csv, &provenance(cli, "contour", params), extra)
}

fn validate_cmd(cli: &Cli, params: &ParameterSet) -> Result<(), Failure> {
    let mut text = String::new();
    let report = params.validate();
    let _ = writeln!(text, "parameters: cooperativity C = {:.3}", report.cooperativity);
    for v in &report.violations {
        let _ = writeln!(text, "violation: {}: {}", v.key, v.message);
    }
    for n in &report.notes {
        let _ = writeln!(text, "note: {n}");
    }
    let budget = FidelityBudget::from_params(params).map_err(runtime)?;
    let _ = writeln!(
        text,
        "component fidelities: F_ent={:.6} F_transfer={:.6} F_gate={:.6} F_readout={:.6}",
        budget.f_ent, budget.f_transfer, budget.f_gate, budget.f_readout
    );
    for w in &budget.warnings {
        let _ = writeln!(text, "warning: {w}");
    }

    let opts = AcceptanceOptions {
        seed: cli.seed.unwrap_or(AcceptanceOptions::default().seed),
        trials: cli.trials.unwrap_or(AcceptanceOptions::default().trials),
        exec: execution(cli),
    };
    let criteria = acceptance::run_all(params, &opts).map_err(runtime)?;
    let _ = writeln!(text, "\nacceptance suite (seed {}, {} trials):", opts.seed, opts.trials);
    for c in &criteria {
        let _ = write!(text, "{c}");
    }
    let failed: Vec<u8> = criteria.iter().filter(|c| !c.pass()).map(|c| c.id).collect();
    let _ = writeln!(
        text,
        "\n{}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );

    print!("{text}");
    if cli.out.is_some() {
        let extra = json!({"criteria": criteria, "warnings": budget.warnings, "violations": report.violations});
        emit(cli.out.as_deref(), &text, &provenance(cli, "validate", params), extra)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("criteria {failed:?} failed")))
    }
}

fn mc_cmd(cli: &Cli, params: &ParameterSet, args: &McArgs) -> Result<(), Failure> {
    let mut p = params.clone();
    if let Some(n) = args.nest {
        p.link.n_nest = n;
    }
    let trials = cli.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let mut cfg = ProtocolConfig::from_params(&p, trials, seed).map_err(runtime)?;
    cfg.swap_time = args.swap_time;
    cfg.memory_cutoff = args.memory_cutoff;
    cfg.validate().map_err(|e| Failure::Usage(e.into()))?;

    let records = mcsim::run_trials(&cfg, execution(cli)).map_err(runtime)?;
    let stats = mcsim::TimingStats::from_records(&records, seed);
    let analytic = rates::mean_time_parallel(&p).map_err(runtime)?;
    let comparison = mcsim::compare_with_analytic(&stats, &analytic, 0.15).map_err(runtime)?;
    let exact = mcsim::exact_mean_time(&cfg).map(|e| mcsim::compare_with_value(&stats, e, 0.0));
    let storage: Vec<f64> = records.iter().filter(|r| r.success).map(|r| r.max_storage_time).collect();
    let above = storage.iter().filter(|&&s| s > args.storage_threshold).count() as f64 / storage.len().max(1) as f64;

    let mut text = String::new();
    let _ = writeln!(text, "n = {}, p0 = {:.6e}, p_swap = {:.6e}, slot = {:.6e} s", cfg.n_nest, cfg.p0, cfg.p_swap, cfg.slot_time);
    let _ = writeln!(text, "trials = {}, successes = {}, seed = {}", stats.trials, stats.successes, seed);
    let _ = writeln!(
        text,
        "mean = {:.6e} s ± {:.6e} (s.e.), p50/p90/p99 = {:.6e}/{:.6e}/{:.6e} s",
        stats.mean, stats.stderr, stats.p50, stats.p90, stats.p99
    );
    let _ = writeln!(
        text,
        "closed form (3/2)^n: {:.6e} s, ratio = {:.4} ± {:.4}, within 15%: {}",
        comparison.analytic, comparison.ratio, comparison.ratio_stderr, comparison.pass
    );
    if let Some(e) = &exact {
        let _ = writeln!(
            text,
            "exact mean: {:.6e} s, within 3 s.e.: {}",
            e.analytic, e.pass
        );
    }
    let _ = writeln!(text, "fraction of trials storing longer than {} s: {:.6e}", args.storage_threshold, above);
    print!("{text}");

    if let Some(out) = cli.out.as_deref() {
        let mut csv = Vec::new();
        mcsim::write_trial_csv(&records, &mut csv).context("formatting trials").map_err(runtime)?;
        let csv = String::from_utf8(csv).map_err(runtime)?;
        let extra = json!({
            "protocol": cfg,
            "stats": stats,
            "comparison": comparison,
            "exact": exact,
            "storage_threshold_s": args.storage_threshold,
            "fraction_storage_above_threshold": above,
        });
        let prov = Provenance {
            seed: Some(seed),
            trials: Some(trials),
            ..provenance(cli, "mc", &p)
        };
        emit(Some(out), &csv, &prov, extra)?;
    }
    Ok(())
}

fn qsim_cmd(cli: &Cli, params: &ParameterSet) -> Result<(), Failure> {
    let budget = FidelityBudget::from_params(params).map_err(runtime)?;
    let rabi = acceptance::rabi_deviation().map_err(runtime)?;
    let cz = acceptance::cz_truth_table_deviation().map_err(runtime)?;
    let swap = acceptance::ideal_swap_min_fidelity().map_err(runtime)?;
    let transfer = acceptance::collective_vs_full_deviation().map_err(runtime)?;
    let mut chain = Vec::new();
    for l in [1usize, 2, 4] {
        let (oracle, formula) = acceptance::oracle_vs_formula(&budget, l).map_err(runtime)?;
        chain.push((l, oracle, formula));
    }

    let mut ok = rabi < 1e-9 && cz == 0.0 && (1.0 - swap).abs() < 1e-12 && transfer < 1e-8;
    let mut text = String::new();
    let _ = writeln!(text, "Rabi law, max |P(t) - sin^2(gt)|: {rabi:.3e}");
    let _ = writeln!(text, "CZ truth table, max deviation: {cz:.3e}");
    let _ = writeln!(text, "ideal swap, worst-branch Bell fidelity: {swap:.15}");
    let _ = writeln!(text, "collective vs full-space transfer (N <= 4), max 1 - |overlap|: {transfer:.3e}");
    for (l, oracle, formula) in &chain {
        let dev = (oracle - formula).abs();
        if *l > 1 {
            ok &= dev <= 0.02;
        }
        let _ = writeln!(text, "chain l = {l}: oracle {oracle:.6}, product formula {formula:.6}, |diff| {dev:.3e}");
    }
    let _ = writeln!(text, "{}", if ok { "all checks passed" } else { "some checks FAILED" });
    print!("{text}");
    if cli.out.is_some() {
        let extra = json!({
            "rabi_max_deviation": rabi,
            "cz_max_deviation": cz,
            "ideal_swap_min_fidelity": swap,
            "transfer_max_deviation": transfer,
            "chain": chain.iter().map(|(l, o, f)| json!({"links": l, "oracle": o, "formula": f})).collect::<Vec<_>>(),
        });
        emit(cli.out.as_deref(), &text, &provenance(cli, "qsim", params), extra)?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Validation("quantum-oracle checks failed".into()))
    }
}
