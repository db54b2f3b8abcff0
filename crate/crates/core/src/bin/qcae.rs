use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcae::channel::SigmaMode;
use qcae::eval::SweepConfig;
use qcae::experiment::{self, ExperimentConfig, Overrides};
use qcae::Error;

#[derive(Parser)]
#[command(name = "qcae", version, about = "Train and evaluate hybrid quantum-classical channel autoencoders")]
struct Cli {
    /// Output root; defaults to ./runs
    #[arg(long, global = true, env = "QCAE_OUT")]
    out: Option<PathBuf>,
    /// Overrides the training and evaluation seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Validate and print resolved parameter counts without training
    #[arg(long, global = true)]
    dry_run: bool,
    /// Eb/N0 to sigma mapping: paper or textbook
    #[arg(long, global = true)]
    sigma_mode: Option<SigmaMode>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one config, then sweep SNR
    Run { config: PathBuf },
    /// Train every grid point and rank them
    Grid { config: PathBuf },
    /// List the built-in models
    Zoo {
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a saved train.json
    Sweep {
        checkpoint: PathBuf,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10)]
        batches: usize,
        #[arg(long, default_value_t = 64)]
        batch: usize,
    },
}

fn out_dir(cli: &Cli, config: &Path) -> PathBuf {
    let stem = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
    cli.out.clone().unwrap_or_else(|| PathBuf::from("runs")).join(stem)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::QubitIndex { .. } | Error::Unsupported(_) | Error::Json(_) => 2,
                Error::Divergence { .. } => 3,
                _ => 1,
            })
        }
    }
}

fn execute(cli: &Cli) -> qcae::Result<()> {
    let ov = Overrides { seed: cli.seed, sigma_mode: cli.sigma_mode };
    match &cli.cmd {
        Cmd::Zoo { json } => {
            if *json {
                println!("{}", serde_json::to_string_pretty(&experiment::zoo())?);
            } else {
                print!("{}", experiment::zoo_table());
            }
        }
        Cmd::Run { config } => {
            let cfg = ExperimentConfig::load(config)?;
            if cli.dry_run {
                println!("{}", serde_json::to_string_pretty(&experiment::dry_run(&cfg, &ov)?)?);
                return Ok(());
            }
            let dir = out_dir(cli, config);
            let r = experiment::run(&cfg, &ov, &dir)?;
            println!(
                "{}: {} params, final train SER {:.4}, loss {:.4} ({:.1}s) -> {}",
                r.record.model.name,
                r.record.param_count,
                r.record.final_ser,
                r.record.final_loss,
                r.record.wall_clock_s,
                dir.display()
            );
            print!("{}", r.sweep.to_csv());
        }
        Cmd::Grid { config } => {
            let cfg = ExperimentConfig::load(config)?;
            if cli.dry_run {
                for (p, c) in experiment::grid_points(&cfg, &ov)? {
                    let d = experiment::dry_run(&c, &Overrides::default())?;
                    println!("point {:03}: {:?} -> {} params", p.index, p, d.total_params);
                }
                return Ok(());
            }
            let dir = out_dir(cli, config);
            let rows = experiment::grid(&cfg, &ov, &dir)?;
            print!("{}", experiment::grid_csv(&rows));
        }
        Cmd::Sweep { checkpoint, levels, batches, batch } => {
            let eval = SweepConfig {
                levels: levels.clone().unwrap_or_else(|| qcae::eval::DEFAULT_LEVELS.to_vec()),
                batches: *batches,
                batch: *batch,
                seed: cli.seed.unwrap_or(0),
            };
            eval.validate()?;
            if cli.dry_run {
                println!("{}", serde_json::to_string_pretty(&eval)?);
                return Ok(());
            }
            let result = experiment::sweep_checkpoint(checkpoint, &eval, cli.sigma_mode)?;
            let csv = result.to_csv();
            if let Some(out) = &cli.out {
                std::fs::create_dir_all(out)?;
                std::fs::write(out.join("sweep.csv"), &csv)?;
            }
            print!("{csv}");
        }
    }
    Ok(())
}
