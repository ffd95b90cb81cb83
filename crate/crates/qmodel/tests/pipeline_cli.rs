//! End-to-end pipeline and CLI checks: determinism, stage resumption,
//! figure exports, and exit codes.

use std::path::Path;
use std::process::Command;

use qmodel::pipeline::{emit_figure_data, run_pipeline, Figure, PipelineConfig};

fn config_text(dir: &Path) -> String {
    format!(
        r#"
output_dir = "{}"

[process]
p = 0.2
n = 20000
seed = 7

[infer]
L = 1

[noise]
q_dep = 0.0
q_dep2 = 0.02
gamma_ad = 0.0
q_z = 0.0
eps_meas = 0.02
eps_prep = 0.0

[gst]
shots = "exact"

[mc]
runs = 20000
seed = 11
steps = 2
"#,
        dir.display()
    )
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn full_runs_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let config = PipelineConfig::from_toml_str(&config_text(dir)).unwrap();
        run_pipeline(&config).unwrap();
        emit_figure_data(dir, Figure::JointDist).unwrap();
        emit_figure_data(dir, Figure::ChunkHist).unwrap();
        emit_figure_data(dir, Figure::CqVsP).unwrap();
    }
    for name in [
        "sequence.txt",
        "generate.json",
        "infer.json",
        "synthesize.json",
        "simulate.json",
        "gst.json",
        "mitigate.json",
        "report.json",
        "mc_records_t1.csv",
        "mc_records_t2.csv",
        "joint_dist.csv",
        "chunk_hist.csv",
        "cq_vs_p.csv",
    ] {
        assert_eq!(
            read(dir_a.path(), name),
            read(dir_b.path(), name),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn report_contains_reference_memory_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig::from_toml_str(&config_text(dir.path())).unwrap();
    let bundle = run_pipeline(&config).unwrap().expect("report stage ran");
    assert!((bundle.cq_closed_form - 0.4690).abs() < 1e-3);
    assert!((bundle.c_mu - 1.0).abs() < 1e-3, "empirical C_mu = {}", bundle.c_mu);
    assert!((bundle.cq_inferred - 0.4690).abs() < 0.05);
    // Mitigated distributions track the ideal more closely than the noisy.
    for f in &bundle.fidelities {
        assert!(f.mitigated >= f.noisy, "t = {}: {} < {}", f.t, f.mitigated, f.noisy);
    }
    // Every reported cost multiplies the stage costs exactly.
    for (i, total) in bundle.costs.total_per_t.iter().enumerate() {
        let t = (i + 1) as i32;
        let expect = bundle.costs.preparation
            * bundle.costs.operator.powi(t)
            * bundle.costs.measurement.powi(t)
            * bundle.costs.reset.powi(t - 1);
        assert!((total - expect).abs() < 1e-12 * expect.abs().max(1.0));
    }
}

#[test]
fn figures_have_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig::from_toml_str(&config_text(dir.path())).unwrap();
    run_pipeline(&config).unwrap();

    let joint = emit_figure_data(dir.path(), Figure::JointDist).unwrap();
    let text = std::fs::read_to_string(joint).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"), "provenance header");
    assert_eq!(lines.next().unwrap(), "t,outcome,ideal,noisy,mitigated");
    // Ideal column sums to one within each t.
    let mut sums = std::collections::BTreeMap::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        let t: usize = fields[0].parse().unwrap();
        let ideal: f64 = fields[2].parse().unwrap();
        *sums.entry(t).or_insert(0.0) += ideal;
    }
    assert_eq!(sums.len(), 2);
    for (t, sum) in sums {
        assert!((sum - 1.0).abs() < 1e-9, "ideal column at t = {t} sums to {sum}");
    }

    let chunk = emit_figure_data(dir.path(), Figure::ChunkHist).unwrap();
    let text = std::fs::read_to_string(chunk).unwrap();
    // 100 chunks per t by default (runs / 100), two steps.
    let rows = text.lines().skip(2).count();
    assert_eq!(rows, 200);

    let cq = emit_figure_data(dir.path(), Figure::CqVsP).unwrap();
    let text = std::fs::read_to_string(cq).unwrap();
    assert!(text.lines().next().unwrap().contains("advantage_interval"));
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 199);
    let half: Vec<&str> = rows
        .iter()
        .copied()
        .filter(|r| r.starts_with("0.5,"))
        .collect();
    assert_eq!(half.len(), 1, "p = 0.5 row present exactly once");
    let fields: Vec<&str> = half[0].split(',').collect();
    assert_eq!(fields[1], "0", "C_mu discontinuity at p = 0.5");
    assert_eq!(fields[2], "0", "C_q vanishes at p = 0.5");
}

#[test]
fn record_stream_matches_run_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = PipelineConfig::from_toml_str(&config_text(dir.path())).unwrap();
    run_pipeline(&config).unwrap();
    let text = std::fs::read_to_string(dir.path().join("mc_records_t2.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    assert_eq!(lines.next().unwrap(), "run,outcome,sign");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20_000);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1].len(), 2, "two-step outcome word");
    assert!(first[2] == "1" || first[2] == "-1");
}

#[test]
fn stage_resumption_and_hash_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = PipelineConfig::from_toml_str(&config_text(dir.path())).unwrap();
    config.stages = Some(vec!["generate".into(), "infer".into(), "synthesize".into()]);
    run_pipeline(&config).unwrap();
    assert!(dir.path().join("synthesize.json").exists());
    assert!(!dir.path().join("simulate.json").exists());

    // Resume the remaining stages from disk.
    config.stages = Some(vec!["simulate".into(), "mitigate".into(), "report".into()]);
    let bundle = run_pipeline(&config).unwrap();
    assert!(bundle.is_some());

    // A different scientific config must refuse to resume.
    let mut changed = config.clone();
    changed.process.p = 0.25;
    changed.stages = Some(vec!["simulate".into()]);
    let err = run_pipeline(&changed).unwrap_err();
    assert!(err.to_string().contains("config"), "unexpected error: {err}");
}

#[test]
fn cli_binary_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.toml");
    // Config without output_dir: supplied via --out.
    let text = config_text(dir.path());
    let text = text.lines().filter(|l| !l.starts_with("output_dir")).collect::<Vec<_>>().join("\n");
    std::fs::write(&config_path, text).unwrap();

    let out_dir = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_qmodel"))
        .args(["run", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("report.json").exists());

    let output = Command::new(env!("CARGO_BIN_EXE_qmodel"))
        .args(["report", "--bundle"])
        .arg(&out_dir)
        .args(["--figure", "cq_vs_p"])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(out_dir.join("cq_vs_p.csv").exists());

    // Validation failures exit with code 1.
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "process.p = 7.0\nprocess.n = 10\ninfer.L = 1\ngst.shots = \"exact\"\nmc.runs = 5\n").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_qmodel"))
        .args(["run", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // Reporting from an empty bundle exits with code 1.
    let status = Command::new(env!("CARGO_BIN_EXE_qmodel"))
        .args(["report", "--bundle"])
        .arg(dir.path().join("empty"))
        .args(["--figure", "joint_dist"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
