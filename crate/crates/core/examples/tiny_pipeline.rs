//! Runs generation, training, explanation and evaluation at the tiny preset and
//! prints where every artifact went.
//!
//! ```text
//! cargo run --example tiny_pipeline -- /tmp/tiny-run
//! ```

use std::path::PathBuf;

use fidelity_bench::bench::{run_pipeline, Preset};

fn main() -> fidelity_bench::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "tiny-run".into())
        .into();
    let mut config = Preset::Tiny.config();
    config.dataset.n_train = 200;
    config.dataset.n_val = 20;

    let run = run_pipeline(&config, &out)?;
    println!("dataset  {}", run.paths.data.display());
    println!("model    {}", run.paths.model.display());
    println!("saliency {}", run.paths.expl.display());
    println!("scores   {}", run.paths.eval.display());
    println!(
        "training mse {} ({} leaves), validation mae {:.4}",
        run.train.train.mse,
        run.train.n_leaves,
        run.train.validation.map_or(f64::NAN, |v| v.mae)
    );
    for m in &run.evaluate.metrics {
        println!(
            "{:26} {:+.4} ± {:.4}  ({} degenerate)",
            m.metric, m.summary.mean, m.summary.std, m.degenerate
        );
    }
    Ok(())
}
