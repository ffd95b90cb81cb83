//! Drive the whole pipeline through the library API: every stage writes
//! its artifact into a scratch directory and the report bundle comes back
//! structured.
//!
//! The `qmodel` binary exposes the same flow as
//! `qmodel run --config <file> --out <dir>`.
//!
//! Usage: cargo run --release --example full_pipeline

use qmodel::pipeline::{emit_figure_data, run_pipeline, Figure, PipelineConfig};

fn main() -> qmodel::Result<()> {
    let dir = std::env::temp_dir().join("qmodel_full_pipeline_example");
    std::fs::create_dir_all(&dir)?;
    let config = PipelineConfig::from_toml_str(&format!(
        r#"
output_dir = "{}"

[process]
p = 0.2
n = 50000
seed = 7

[infer]
L = 1

[noise]
q_dep = 0.0
q_dep2 = 0.02
gamma_ad = 0.01
q_z = 0.0
eps_meas = 0.02
eps_prep = 0.005

[gst]
shots = "exact"

[mc]
runs = 50000
seed = 11
steps = 2
"#,
        dir.display()
    ))?;

    println!("running all stages into {}", dir.display());
    let bundle = run_pipeline(&config)?.expect("report stage produces a bundle");

    println!("\nmemory measures:");
    println!("  C_mu = {:.4}, inferred C_q = {:.4} (closed form {:.4})",
        bundle.c_mu, bundle.cq_inferred, bundle.cq_closed_form);
    println!(
        "  advantage window [{:.4}, {:.4}] at threshold {:.5}",
        bundle.advantage.p_interval.0, bundle.advantage.p_interval.1, bundle.advantage.cq_threshold
    );
    println!("\nmitigation summary:");
    for (f, s) in bundle.fidelities.iter().zip(&bundle.sigma) {
        println!(
            "  t = {}: fidelity mitigated {:.6} vs noisy {:.6}; chunk std {:.4} (predicted {:.4})",
            f.t, f.mitigated, f.noisy, s.chunk_std_measured, s.predicted
        );
    }

    for figure in [Figure::JointDist, Figure::ChunkHist, Figure::CqVsP] {
        let path = emit_figure_data(&dir, figure)?;
        println!("wrote {}", path.display());
    }
    println!("\nartifacts in {}:", dir.display());
    let mut names: Vec<String> = std::fs::read_dir(&dir)?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        println!("  {name}");
    }
    Ok(())
}
