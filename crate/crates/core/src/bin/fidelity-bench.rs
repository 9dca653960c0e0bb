use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fidelity_bench::bench::{self, ExperimentConfig, Preset, ReportFormat};
use fidelity_bench::datagen::CONFIG_FILE;
use fidelity_bench::kv::KeyValues;
use fidelity_bench::{Error, Result};

#[derive(Parser)]
#[command(
    version,
    about = "Decision-tree fidelity benchmark for saliency metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// key=value configuration file, applied over the preset
    #[arg(long)]
    config: Option<PathBuf>,
    /// tiny, exp1, exp2, full-exp1 or full-exp2
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn given(&self) -> bool {
        self.config.is_some() || self.preset.is_some()
    }

    fn load(&self) -> Result<ExperimentConfig> {
        let preset = self.preset.as_deref().map(Preset::parse).transpose()?;
        ExperimentConfig::load(preset, self.config.as_deref(), self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled image dataset
    Datagen {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit an exact regression tree to the training split
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one saliency map per validation image
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score saliency maps with every fidelity metric
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        expl: PathBuf,
        /// defaults to the dataset's own config.txt
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare summary.csv files side by side
    Report {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        /// one per summary, in order
        #[arg(long = "label")]
        labels: Vec<String>,
        #[arg(long)]
        csv: bool,
    },
    /// datagen, train, explain and evaluate into one directory
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dataset_config(data: &Path, args: &ConfigArgs) -> Result<ExperimentConfig> {
    if args.given() {
        return args.load();
    }
    let path = data.join(CONFIG_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let mut kv = KeyValues::parse(&text)?;
    if let Some(seed) = args.seed {
        kv.set("master_seed", seed);
    }
    ExperimentConfig::from_kv(&kv)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Datagen { config, out } => {
            let cfg = config.load()?;
            let manifest = bench::cmd_datagen(&cfg, &out)?;
            println!(
                "wrote {} images to {}",
                manifest.records.len(),
                out.display()
            );
        }
        Command::Train { data, out } => {
            let r = bench::cmd_train(&data, &out)?;
            println!(
                "tree: {} nodes, {} leaves, depth {} ({:.1}s)",
                r.n_nodes, r.n_leaves, r.depth, r.seconds
            );
            println!(
                "train: n={} mae={} mse={}",
                r.train.n, r.train.mae, r.train.mse
            );
            if let Some(v) = r.validation {
                println!("validation: n={} mae={} mse={}", v.n, v.mae, v.mse);
            }
            if r.duplicates.duplicate_rows > 0 {
                println!(
                    "duplicate rows: {} ({} with conflicting labels)",
                    r.duplicates.duplicate_rows, r.duplicates.conflicting_groups
                );
            }
        }
        Command::Explain { model, data, out } => {
            let r = bench::cmd_explain(&model, &data, &out)?;
            let failed: Vec<_> = r.spot_checks.iter().filter(|(_, p)| !p.passed()).collect();
            println!(
                "wrote {} saliency maps; premise spot checks {}/{} passed",
                r.written,
                r.spot_checks.len() - failed.len(),
                r.spot_checks.len()
            );
            if let Some((index, _)) = failed.first() {
                return Err(Error::Validation(format!(
                    "premise check failed on image {index}"
                )));
            }
        }
        Command::Evaluate {
            model,
            data,
            expl,
            config,
            out,
        } => {
            let cfg = dataset_config(&data, &config)?;
            let r = bench::cmd_evaluate(&model, &data, &expl, &cfg.metrics, cfg.master_seed, &out)?;
            for m in &r.metrics {
                println!(
                    "{:26} mean={:.6} std={:.6} degenerate={}",
                    m.metric, m.summary.mean, m.summary.std, m.degenerate
                );
            }
        }
        Command::Report {
            summaries,
            labels,
            csv,
        } => {
            let paths: Vec<&Path> = summaries.iter().map(PathBuf::as_path).collect();
            let format = if csv {
                ReportFormat::Csv
            } else {
                ReportFormat::Text
            };
            print!("{}", bench::cmd_report(&paths, &labels, format)?);
        }
        Command::Run { config, out } => {
            let cfg = config.load()?;
            let r = bench::run_pipeline(&cfg, &out)?;
            println!(
                "train mse={} validation mae={:?}",
                r.train.train.mse,
                r.train.validation.map(|v| v.mae)
            );
            for m in &r.evaluate.metrics {
                println!(
                    "{:26} mean={:.6} std={:.6}",
                    m.metric, m.summary.mean, m.summary.std
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
