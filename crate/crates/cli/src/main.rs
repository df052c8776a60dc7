use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use codenames_core::harness::config::{resolve_inputs, run_experiment, ExperimentConfig};
use codenames_core::harness::{colt_surface, compute_metrics, read_game_logs, SurfaceConfig};
use codenames_core::synthetic::{board_vocabulary, model_family, SyntheticSpec};
use codenames_core::training::{
    build_dataset, evaluate_r2, fit, read_dataset, split_holdout, write_dataset, TrainingConfig,
    VectorScheme,
};
use codenames_core::ColtWeights;

#[derive(Parser)]
#[command(name = "codenames", version, about = "Team ratings and adaptive ensembles for Codenames")]
struct Cli {
    /// Base seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Fit rating weights to simulated matchups.
    TrainColt {
        #[arg(long, value_enum, default_value = "desk")]
        preset: Preset,
        /// Number of matchups (overrides the preset).
        #[arg(long)]
        samples: Option<usize>,
        /// Games per matchup (overrides the preset).
        #[arg(long)]
        games_per_matchup: Option<usize>,
        /// How random teams are drawn: sparse, dense or dense:<alpha>.
        #[arg(long, default_value = "dense")]
        scheme: VectorScheme,
        /// Train on a previously dumped dataset instead of simulating.
        #[arg(long, conflicts_with_all = ["samples", "games_per_matchup"])]
        dataset: Option<PathBuf>,
        /// Also write the simulated dataset here.
        #[arg(long)]
        dump_dataset: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the pairing experiments described by a TOML file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the configured repetition count.
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Tabulate the rating over (win rate, win time).
    Surface {
        #[arg(long, default_value_t = 50)]
        vectors: usize,
        #[arg(long, default_value_t = 200)]
        games: usize,
        #[arg(long, default_value_t = 20)]
        grid: usize,
        #[arg(long, default_value = "dense")]
        scheme: VectorScheme,
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rate the games in a log file.
    Rate {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Write a family of synthetic neighbor files, a board word list and a
    /// matching experiment file.
    Synth {
        /// Comma-separated agent codes.
        #[arg(long, value_delimiter = ',', default_value = "a,b,c")]
        codes: Vec<String>,
        #[arg(long, default_value_t = 0.35)]
        divergence: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn weights(path: Option<&Path>) -> Result<ColtWeights> {
    match path {
        Some(p) => ColtWeights::load(p).with_context(|| format!("loading weights {}", p.display())),
        None => Ok(ColtWeights::published()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let seed = cli.seed;

    match cli.command {
        Command::TrainColt {
            preset,
            samples,
            games_per_matchup,
            scheme,
            dataset,
            dump_dataset,
            out,
        } => {
            let base = match preset {
                Preset::Desk => TrainingConfig::desk(),
                Preset::Full => TrainingConfig::full(),
            };
            let cfg = TrainingConfig {
                scheme,
                n_samples: samples.unwrap_or(base.n_samples),
                games_per_matchup: games_per_matchup.unwrap_or(base.games_per_matchup),
                seed: seed.unwrap_or(base.seed),
                ..base
            };
            let data = match &dataset {
                Some(p) => {
                    let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
                    read_dataset(BufReader::new(f), &p.display().to_string())?
                }
                None => {
                    log::info!(
                        "simulating {} matchups of {} games",
                        cfg.n_samples,
                        cfg.games_per_matchup
                    );
                    build_dataset(&cfg)?
                }
            };
            if let Some(p) = &dump_dataset {
                let mut w = create(p)?;
                write_dataset(&mut w, &data)?;
                w.flush()?;
            }
            let (train, holdout) = split_holdout(&data);
            if train.is_empty() || holdout.is_empty() {
                bail!("need at least 10 samples to hold some out");
            }
            let report = fit(train, &cfg)?;
            report.weights.save(&out)?;
            println!(
                "epochs {}  converged {}  loss {:.5}  R² train {:.4}  holdout {:.4}",
                report.epochs,
                report.converged,
                report.final_loss,
                evaluate_r2(&report.weights, train)?,
                evaluate_r2(&report.weights, holdout)?,
            );
        }

        Command::Experiment {
            config,
            out,
            repetitions,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = repetitions {
                cfg.repetitions = r;
            }
            let base = config.parent().unwrap_or(Path::new("."));
            let (registry, words, w) = resolve_inputs(&cfg, base)?;
            log::info!(
                "{} agents, {} board words, {} repetitions of {} games",
                registry.len(),
                words.len(),
                cfg.repetitions,
                cfg.games_per_block
            );
            let output = run_experiment(&cfg, &registry, &words, &w)?;
            output.write_to_dir(&out)?;
            print!("{}", output.tables);
        }

        Command::Surface {
            vectors,
            games,
            grid,
            scheme,
            weights: wpath,
            out,
        } => {
            let cfg = SurfaceConfig {
                n_vectors: vectors,
                games_each: games,
                grid_rows: grid,
                grid_cols: grid,
                seed: seed.unwrap_or(0),
                scheme,
                ..SurfaceConfig::desk()
            };
            let s = colt_surface(&cfg, &weights(wpath.as_deref())?)?;
            let mut w = create(&out)?;
            s.write_csv(&mut w)?;
            w.flush()?;
            let (per_rate, per_round) = s.trend_slopes();
            println!(
                "{} samples ({} never won); trend {per_rate:+.3} per unit win rate, {per_round:+.3} per round",
                s.samples.len(),
                s.excluded
            );
        }

        Command::Rate { log, weights: wpath } => {
            let w = weights(wpath.as_deref())?;
            let f = File::open(&log).with_context(|| format!("opening {}", log.display()))?;
            let groups = read_game_logs(BufReader::new(f), &log.display().to_string())?;
            if groups.is_empty() {
                bail!("{} contains no games", log.display());
            }
            println!("{:<32} {:>6} {:>8} {:>9} {:>9}", "pairing", "games", "colt", "win_rate", "win_time");
            for (pairing, logs) in groups {
                let m = compute_metrics(&logs, &w)?;
                let name = if pairing.is_empty() { "-" } else { pairing.as_str() };
                println!(
                    "{name:<32} {:>6} {:>8.3} {:>9.3} {:>9}",
                    logs.len(),
                    m.colt,
                    m.win_rate,
                    m.win_time.map_or("-".into(), |t| format!("{t:.2}"))
                );
            }
        }

        Command::Synth {
            codes,
            divergence,
            out,
        } => {
            if codes.is_empty() {
                bail!("no codes given");
            }
            fs::create_dir_all(&out)?;
            let spec = SyntheticSpec::default();
            let names: Vec<&str> = codes.iter().map(String::as_str).collect();
            let models = model_family(&names, &spec, divergence, seed.unwrap_or(0))?;
            let mut toml = String::from("words = \"words.txt\"\nrepetitions = 20\n\n[agents]\n");
            for (code, m) in codes.iter().zip(&models) {
                m.save(out.join(format!("{code}.nbr")))?;
                toml += &format!("{code} = \"{code}.nbr\"\n");
            }
            toml += "\n[ensemble]\n";
            fs::write(out.join("words.txt"), board_vocabulary(&spec).join("\n") + "\n")?;
            fs::write(out.join("experiment.toml"), toml)?;
            println!("wrote {} models to {}", models.len(), out.display());
        }
    }
    Ok(())
}
