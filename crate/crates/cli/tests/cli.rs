use std::path::{Path, PathBuf};
use std::process::Command;

use nmdecay::config::{self, BoundStateConfig, CorrelationsConfig, EvolveConfig, SweepConfig};
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

struct Run {
    code: i32,
    output: Option<String>,
}

fn run_with(sub: &str, config: &Path, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_nmdecay"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .status()
        .unwrap();
    Run {
        code: status.code().unwrap(),
        output: std::fs::read_to_string(&out).ok(),
    }
}

fn run_text(sub: &str, text: &str, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("config");
    std::fs::write(&path, text).unwrap();
    run_with(sub, &path, extra)
}

/// Header names and data rows; `#` lines are skipped.
fn table(csv_text: &str) -> (Vec<String>, Vec<csv::StringRecord>) {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader.records().map(|r| r.unwrap()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[csv::StringRecord], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn comment<'a>(text: &'a str, prefix: &str) -> Vec<&'a str> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter(|l| l.starts_with(prefix))
        .collect()
}

#[test]
fn bound_state_at_resonance() {
    let run = run_text(
        "bound-state",
        r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}}"#,
        &["--format", "json"],
    );
    assert_eq!(run.code, 0);
    let v: Value = serde_json::from_str(&run.output.unwrap()).unwrap();
    assert!((v["p_infinity"].as_f64().unwrap() - 4.0 / 9.0).abs() < 1e-12);
    assert_eq!(v["exists"], true);
}

#[test]
fn bound_state_below_threshold() {
    let run = run_text(
        "bound-state",
        "model.family = ohmic\nmodel.eta_o = 0.01\nmodel.s = 5.5\nmodel.omega_c = 0.3\n",
        &[],
    );
    assert_eq!(run.code, 0);
    let text = run.output.unwrap();
    let (header, rows) = table(&text);
    assert_eq!(rows.len(), 1);
    let i = |n: &str| header.iter().position(|h| h == n).unwrap();
    assert_eq!(&rows[0][i("exists")], "false");
    assert_eq!(rows[0][i("p_infinity")].parse::<f64>().unwrap(), 0.0);
    assert_eq!(&rows[0][i("energy")], "");
}

#[test]
fn invalid_configs_exit_2_without_output() {
    let cases = [
        ("bound-state", "{ not json"),
        (
            "bound-state",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "typo": 1}"#,
        ),
        (
            "bound-state",
            r#"{"model": {"family": "photonic", "eta_p": -0.1, "omega_e": 1.0}}"#,
        ),
        (
            "bound-state",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "convention": {"limit_mode": true}}"#,
        ),
        (
            "evolve",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "t_max": -1}"#,
        ),
        (
            "sweep",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "parameter": "eta_p", "grid": []}"#,
        ),
        (
            "sweep",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "parameter": "eta_p",
                      "grid": {"min": 0.1, "max": 0.2, "count": 1}}"#,
        ),
        (
            "sweep",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "parameter": "s", "grid": [1, 2]}"#,
        ),
        (
            "correlations",
            r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "t_max": 1,
                             "input": {"alpha": 0.5, "beta": 0.5, "phi_plus": [[1, 0], [0, 0]], "phi_minus": [[1, 0], [0, 0]]}}"#,
        ),
    ];
    for (sub, text) in cases {
        let run = run_text(sub, text, &[]);
        assert_eq!(run.code, 2, "{sub}: {text}");
        assert!(run.output.is_none(), "{sub}: {text}");
    }
    let missing = run_with("bound-state", Path::new("/nonexistent/config.json"), &[]);
    assert_eq!(missing.code, 2);
}

#[test]
fn step_rejection_exits_3_without_output() {
    let run = run_text(
        "evolve",
        r#"{"model": {"family": "ohmic", "eta_o": 5.0, "s": 1.0, "omega_c": 20.0}, "t_max": 50, "dt": 1.0}"#,
        &[],
    );
    assert_eq!(run.code, 3);
    assert!(run.output.is_none());
}

#[test]
fn decoupled_evolution_keeps_full_population() {
    let run = run_text(
        "evolve",
        r#"{"model": {"family": "ohmic", "eta_o": 0.0, "s": 1.0, "omega_c": 1.0}, "t_max": 5, "dt": 0.01}"#,
        &[],
    );
    assert_eq!(run.code, 0);
    let (header, rows) = table(&run.output.unwrap());
    assert_eq!(header, ["t", "re_c", "im_c", "abs_c2", "x", "y", "z"]);
    assert_eq!(rows.len(), 501);
    for p in column(&header, &rows, "abs_c2") {
        assert!((p - 1.0).abs() < 1e-12);
    }
}

#[test]
fn fig1_fixture_settles_on_circle() {
    let run = run_with("evolve", &fixture("fig1.json"), &[]);
    assert_eq!(run.code, 0);
    let text = run.output.unwrap();
    let cycle = comment(&text, "limit_cycle");
    let radius: f64 = cycle[0].split(',').nth(1).unwrap().parse().unwrap();
    assert!((radius - 0.287).abs() < 0.005, "radius {radius}");
}

fn endpoint(name: &str) -> (f64, f64) {
    let run = run_with("evolve", &fixture(name), &[]);
    assert_eq!(run.code, 0);
    let (header, rows) = table(&run.output.unwrap());
    let re = column(&header, &rows, "re_c");
    let im = column(&header, &rows, "im_c");
    (*re.last().unwrap(), *im.last().unwrap())
}

#[test]
fn dt_halving_fixtures_show_second_order() {
    for family in ["photonic", "ohmic"] {
        let [a, b, c] = ["dt", "dt2", "dt4"].map(|s| endpoint(&format!("order_{family}_{s}.json")));
        let d1 = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
        let d2 = ((b.0 - c.0).powi(2) + (b.1 - c.1).powi(2)).sqrt();
        let ratio = d1 / d2;
        assert!((3.2..=4.8).contains(&ratio), "{family}: ratio {ratio}");
    }
}

#[test]
fn fig2a_fixture_peaks_at_known_optimum() {
    let run = run_with("sweep", &fixture("fig2a.json"), &[]);
    assert_eq!(run.code, 0);
    let text = run.output.unwrap();
    let (header, rows) = table(&text);
    let eta = column(&header, &rows, "eta_o");
    let p = column(&header, &rows, "p_infinity");
    let (i, max) = p
        .iter()
        .enumerate()
        .fold((0, 0.0), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    assert!((eta[i] - 0.08).abs() <= 0.005 && (max - 0.33).abs() <= 0.01);
    let threshold: f64 = comment(&text, "threshold")[0]
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    for (e, v) in eta.iter().zip(&p) {
        if *e < threshold {
            assert_eq!(*v, 0.0);
        } else {
            assert!(*v > 0.0);
        }
    }
    let optimum: Vec<&str> = comment(&text, "optimum")[0].split(',').collect();
    assert!((optimum[2].parse::<f64>().unwrap() - 0.08).abs() <= 0.005);
}

#[test]
fn fig3a_fixture_has_flat_resonant_curve() {
    let run = run_with("sweep", &fixture("fig3a.json"), &[]);
    assert_eq!(run.code, 0);
    let (header, rows) = table(&run.output.unwrap());
    let mut labels: Vec<&str> = rows.iter().map(|r| &r[0]).collect();
    labels.dedup();
    assert_eq!(labels, ["omega_e=0.8", "omega_e=1.0", "omega_e=1.2"]);
    let q = column(&header, &rows, "discord_infinity");
    let middle: Vec<f64> = rows
        .iter()
        .zip(&q)
        .filter(|(r, _)| &r[0] == "omega_e=1.0")
        .map(|(_, v)| *v)
        .collect();
    for v in middle {
        assert!((v - 0.5618).abs() < 1e-3, "{v}");
    }
}

#[test]
fn sweep_output_independent_of_worker_count() {
    let one = run_with("sweep", &fixture("fig2b.json"), &["--jobs", "1"]);
    let four = run_with("sweep", &fixture("fig2b.json"), &["--jobs", "4"]);
    assert_eq!(one.code, 0);
    assert_eq!(one.output, four.output);
}

#[test]
fn fig3b_fixture_converges_to_asymptotic_values() {
    let run = run_with("correlations", &fixture("fig3b.json"), &[]);
    assert_eq!(run.code, 0);
    let (header, rows) = table(&run.output.unwrap());
    assert_eq!(header, ["t", "abs_c2", "concurrence", "discord"]);
    let q = column(&header, &rows, "discord");
    let c = column(&header, &rows, "concurrence");
    assert!((q.last().unwrap() - 0.56).abs() < 0.01);
    assert!((c.last().unwrap() - 2.0 / 3.0).abs() < 0.005);
}

#[test]
fn degenerate_correlation_inputs() {
    let undamped = run_text(
        "correlations",
        r#"{"model": {"family": "photonic", "eta_p": 0.0, "omega_e": 1.0}, "t_max": 2, "dt": 0.01, "input": "bell"}"#,
        &[],
    );
    let (header, rows) = table(&undamped.output.unwrap());
    for name in ["abs_c2", "concurrence", "discord"] {
        for v in column(&header, &rows, name) {
            assert!((v - 1.0).abs() < 1e-9, "{name} {v}");
        }
    }
    let product = run_text(
        "correlations",
        r#"{"model": {"family": "photonic", "eta_p": 0.1, "omega_e": 1.0}, "t_max": 5, "dt": 0.01,
            "input": {"alpha": 1.0, "beta": 0.0, "phi_plus": [[0.6, 0], [0, 0.8]], "phi_minus": [[1, 0], [0, 0]]}}"#,
        &[],
    );
    let (header, rows) = table(&product.output.unwrap());
    assert!(column(&header, &rows, "concurrence")
        .iter()
        .all(|&v| v == 0.0));
}

fn echo(text: &str) -> &str {
    comment(text, "config: ")[0]
        .strip_prefix("config: ")
        .unwrap()
}

#[test]
fn parameter_echo_reproduces_config() {
    let fig1: EvolveConfig = config::load(&fixture("fig1.json")).unwrap();
    let out = run_with("evolve", &fixture("fig1.json"), &[])
        .output
        .unwrap();
    assert_eq!(config::parse::<EvolveConfig>(echo(&out)).unwrap(), fig1);

    let fig2b: SweepConfig = config::load(&fixture("fig2b.json")).unwrap();
    let out = run_with("sweep", &fixture("fig2b.json"), &[])
        .output
        .unwrap();
    assert_eq!(config::parse::<SweepConfig>(echo(&out)).unwrap(), fig2b);

    let fig3b: CorrelationsConfig = config::load(&fixture("fig3b.json")).unwrap();
    let out = run_with(
        "correlations",
        &fixture("fig3b.json"),
        &["--format", "json"],
    )
    .output
    .unwrap();
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        serde_json::from_value::<CorrelationsConfig>(v["config"].clone()).unwrap(),
        fig3b
    );

    let text = "model.family = photonic\nmodel.eta_p = 0.1\nmodel.omega_e = 1.2\n";
    let out = run_text("bound-state", text, &[]).output.unwrap();
    assert_eq!(
        config::parse::<BoundStateConfig>(echo(&out)).unwrap(),
        config::parse::<BoundStateConfig>(text).unwrap()
    );
}

#[test]
fn json_output_parses() {
    for (sub, name) in [
        ("sweep", "fig2a.json"),
        ("evolve", "order_photonic_dt.json"),
    ] {
        let run = run_with(sub, &fixture(name), &["--format", "json"]);
        assert_eq!(run.code, 0);
        let v: Value = serde_json::from_str(&run.output.unwrap()).unwrap();
        assert_eq!(v["command"], sub);
    }
}
