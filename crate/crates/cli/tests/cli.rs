use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qdrepeater(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdrepeater"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn meta(path: &Path) -> serde_json::Value {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    serde_json::from_str(&fs::read_to_string(name).expect("metadata written")).unwrap()
}

#[test]
fn rates_csv_has_exact_header_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rates.csv");
    let run = qdrepeater(&["rates", "--points", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let csv = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "L_km,rate_direct,rate_B,rate_C,rate_D,rate_2plus2");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0.000000e+00,1.000000e+10,"), "{}", lines[1]);
    assert!(lines[3].starts_with("2.000000e+03,"));
    for line in &lines[2..] {
        for field in line.split(',') {
            let (mantissa, exp) = field.split_once('e').expect("scientific notation");
            assert_eq!(mantissa.split_once('.').unwrap().1.len(), 6, "{field}");
            assert!(exp.starts_with('+') || exp.starts_with('-'), "{field}");
            field.parse::<f64>().unwrap();
        }
    }

    let m = meta(&out);
    assert_eq!(m["command"], "rates");
    assert_eq!(m["parameters"]["link"]["n_nest"], 3);
    let crossover = m["details"]["curve_B_direct_crossover_km"].as_f64().unwrap();
    assert!(crossover > 0.0 && crossover < 1000.0);
    assert!(m["parameters_config"].as_str().unwrap().contains("kappa"));
}

#[test]
fn rates_rejects_bad_sweeps_with_usage_code() {
    assert_eq!(code(&qdrepeater(&["rates", "--points", "1"])), 2);
    assert_eq!(code(&qdrepeater(&["rates", "--l-start-km", "10", "--l-stop-km", "5"])), 2);
    assert_eq!(code(&qdrepeater(&["rates", "--scale", "log"])), 2);
    let log = qdrepeater(&["rates", "--scale", "log", "--l-start-km", "10", "--points", "3"]);
    assert_eq!(code(&log), 0);
    assert!(stdout(&log).lines().nth(2).unwrap().starts_with("1.414214e+02,"));
}

#[test]
fn contour_includes_anchor_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("contour.csv");
    let run = qdrepeater(&[
        "contour", "--fp-points", "2", "--pol-points", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "F_p,polarization,F_ent,F_transfer,F_gate,F_readout,F_total");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    // 4 Purcell values (100, 200, 500, 1000) by 4 polarizations (0.8, 0.95, 0.999, 1).
    assert_eq!(rows.len(), 16);
    let cell = |fp: f64, pol: f64| {
        rows.iter()
            .find(|r| r[0] == fp && (r[1] - pol).abs() < 1e-12)
            .unwrap_or_else(|| panic!("missing anchor ({fp}, {pol})"))[6]
    };
    assert!((cell(500.0, 0.95) - 0.831).abs() < 0.01);
    assert!((cell(200.0, 0.95) - 0.734).abs() < 0.01);
    assert!((cell(500.0, 0.80) - 0.596).abs() < 0.01);
    assert!((cell(200.0, 0.80) - 0.526).abs() < 0.01);
    assert!((cell(500.0, 0.999) - 0.858).abs() < 0.01);
    assert!(meta(&out)["details"]["fp_grid"].as_array().unwrap().len() == 4);
}

#[test]
fn contour_withholds_out_of_regime_totals_unless_forced() {
    let args = ["contour", "--fp-start", "10", "--fp-stop", "20", "--fp-points", "2", "--pol-points", "2"];
    let run = qdrepeater(&args);
    assert_eq!(code(&run), 0);
    let text = stdout(&run);
    let low = text.lines().find(|l| l.starts_with("1.000000e+01,")).unwrap();
    assert!(low.ends_with(",nan"), "{low}");
    assert!(stderr(&run).contains("--force"));

    let mut forced = args.to_vec();
    forced.push("--force");
    let run = qdrepeater(&forced);
    let text = stdout(&run);
    let low = text.lines().find(|l| l.starts_with("1.000000e+01,")).unwrap();
    assert!(!low.contains("nan"), "{low}");
}

#[test]
fn contour_rejects_low_polarization() {
    assert_eq!(code(&qdrepeater(&["contour", "--pol-start", "0.5"])), 2);
}

#[test]
fn validate_passes_on_defaults() {
    let run = qdrepeater(&["validate", "--trials", "20000"]);
    assert_eq!(code(&run), 0, "{}{}", stdout(&run), stderr(&run));
    let text = stdout(&run);
    assert_eq!(text.matches("[PASS] criterion").count(), 10);
    assert!(text.contains("10/10 criteria passed"));
}

#[test]
fn validate_passes_with_another_seed() {
    let run = qdrepeater(&["validate", "--seed", "7", "--trials", "20000"]);
    assert_eq!(code(&run), 0, "{}", stdout(&run));
}

#[test]
fn validate_surfaces_gate_warning_at_low_cooperativity() {
    let run = qdrepeater(&["--param", "F_res=20", "validate", "--trials", "20000"]);
    let text = stdout(&run);
    assert!(text.contains("warning: gate correction `5/(2C)`"), "{text}");
}

#[test]
fn config_errors_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "kappa = \"fast\"\n").unwrap();
    assert_eq!(code(&qdrepeater(&["--config", bad.to_str().unwrap(), "rates"])), 3);
    assert_eq!(code(&qdrepeater(&["--config", "/no/such/file.toml", "rates"])), 3);
    assert_eq!(code(&qdrepeater(&["--param", "no_such_key=1", "rates"])), 3);
    assert_eq!(code(&qdrepeater(&["--param", "eta_d=1.5", "rates"])), 3);
}

#[test]
fn config_file_values_reach_the_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    fs::write(&cfg, "eta_d = \"0.8\"\nn_nest = \"2\"\n").unwrap();
    let out = dir.path().join("r.csv");
    let run = qdrepeater(&[
        "--config", cfg.to_str().unwrap(), "--param", "eta_cav=0.85", "rates", "--points", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let m = meta(&out);
    assert_eq!(m["parameters"]["link"]["eta_d"], 0.8);
    assert_eq!(m["parameters"]["link"]["eta_cav"], 0.85);
    assert_eq!(m["parameters"]["link"]["n_nest"], 2);
    assert_eq!(m["overrides"][0], "eta_cav=0.85");
}

#[test]
fn usage_errors_exit_with_code_2() {
    assert_eq!(code(&qdrepeater(&[])), 2);
    assert_eq!(code(&qdrepeater(&["frobnicate"])), 2);
    assert_eq!(code(&qdrepeater(&["rates", "--points", "many"])), 2);
}

#[test]
fn mc_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, extra) in [(&a, None), (&b, Some("--sequential"))] {
        let mut args = vec!["mc", "--nest", "2", "--trials", "3000", "--seed", "11", "--out", path.to_str().unwrap()];
        args.extend(extra);
        let run = qdrepeater(&args);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    let ta = fs::read_to_string(&a).unwrap();
    assert_eq!(ta, fs::read_to_string(&b).unwrap());
    assert_eq!(ta.lines().next().unwrap(), "trial,total_time_s,swap_failures,max_storage_s");
    assert_eq!(ta.lines().count(), 3001);
    let m = meta(&a);
    assert_eq!(m["seed"], 11);
    assert_eq!(m["trials"], 3000);
    assert_eq!(m["parameters"]["link"]["n_nest"], 2);
    assert!(m["details"]["comparison"]["pass"].as_bool().unwrap());

    let other = dir.path().join("c.csv");
    qdrepeater(&["mc", "--nest", "2", "--trials", "3000", "--seed", "12", "--out", other.to_str().unwrap()]);
    assert_ne!(ta, fs::read_to_string(&other).unwrap());
}

#[test]
fn mc_reports_exact_mean_for_one_level() {
    let run = qdrepeater(&["mc", "--nest", "1", "--trials", "5000"]);
    assert_eq!(code(&run), 0);
    assert!(stdout(&run).contains("exact mean:"));
}

#[test]
fn qsim_checks_pass() {
    let run = qdrepeater(&["qsim"]);
    assert_eq!(code(&run), 0, "{}", stdout(&run));
    assert!(stdout(&run).contains("all checks passed"));
}
