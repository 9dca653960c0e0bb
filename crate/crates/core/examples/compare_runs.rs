//! Runs the tiny preset on uniform and textured backgrounds and prints the
//! comparison table.

use fidelity_bench::bench::{cmd_report, run_pipeline, Preset, ReportFormat};
use fidelity_bench::datagen::BackgroundMode;

fn main() -> fidelity_bench::Result<()> {
    let root = std::env::temp_dir().join("fidelity-bench-compare");
    let mut summaries = Vec::new();
    for (label, background) in [
        ("uniform", BackgroundMode::Uniform),
        ("textured", BackgroundMode::Procedural),
    ] {
        let mut config = Preset::Tiny.config();
        config.dataset.n_train = 300;
        config.dataset.n_val = 30;
        config.dataset.background = background;
        let run = run_pipeline(&config, &root.join(label))?;
        summaries.push(run.paths.eval.join("summary.csv"));
    }
    let paths: Vec<_> = summaries.iter().map(|p| p.as_path()).collect();
    let labels = ["uniform".to_string(), "textured".to_string()];
    print!("{}", cmd_report(&paths, &labels, ReportFormat::Text)?);
    Ok(())
}
