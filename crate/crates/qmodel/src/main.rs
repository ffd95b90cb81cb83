use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmodel::pipeline::{emit_figure_data, run_pipeline, Figure, PipelineConfig};

/// Quantum models of stochastic processes with probabilistic error
/// cancellation: generate, infer, synthesize, simulate, mitigate, report.
#[derive(Parser)]
#[command(name = "qmodel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run pipeline stages from a config file.
    Run {
        /// TOML config (see configs/ for examples).
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated contiguous stage list, overriding the config
        /// (generate,infer,synthesize,simulate,mitigate,report).
        #[arg(long, value_delimiter = ',')]
        stages: Option<Vec<String>>,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export figure-ready CSV data from a completed run.
    Report {
        /// Directory holding the stage artifacts.
        #[arg(long)]
        bundle: PathBuf,
        /// One of: joint_dist, chunk_hist, cq_vs_p.
        #[arg(long)]
        figure: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> qmodel::Result<()> {
    match cli.command {
        Command::Run { config, stages, out } => {
            let mut config = PipelineConfig::load(&config)?;
            if let Some(stages) = stages {
                config.stages = Some(stages);
            }
            if let Some(out) = out {
                config.output_dir = Some(out);
            }
            config.validate()?;
            let stages = config.parse_stages()?;
            let names: Vec<String> = stages.iter().map(|s| s.to_string()).collect();
            eprintln!("running stages: {}", names.join(", "));
            let bundle = run_pipeline(&config)?;
            if let Some(bundle) = bundle {
                println!(
                    "report: C_mu = {:.4}, inferred C_q = {:.4} (closed form {:.4}), \
                     advantage interval [{:.4}, {:.4}]",
                    bundle.c_mu,
                    bundle.cq_inferred,
                    bundle.cq_closed_form,
                    bundle.advantage.p_interval.0,
                    bundle.advantage.p_interval.1,
                );
                for f in &bundle.fidelities {
                    println!(
                        "t = {}: fidelity mitigated {:.6}, noisy {:.6}",
                        f.t, f.mitigated, f.noisy
                    );
                }
            }
            Ok(())
        }
        Command::Report { bundle, figure } => {
            let which = Figure::parse(&figure)?;
            let path = emit_figure_data(&bundle, which)?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}
