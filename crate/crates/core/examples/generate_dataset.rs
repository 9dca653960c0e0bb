//! Generates a small dataset and prints the first few manifest records.
//!
//! ```text
//! cargo run --example generate_dataset -- /tmp/shapes
//! ```

use std::path::PathBuf;

use fidelity_bench::datagen::{generate_dataset, BackgroundMode, DatasetConfig};

fn main() -> fidelity_bench::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "shapes-demo".into())
        .into();
    let mut config = DatasetConfig::for_resolution(64, 64);
    config.n_train = 40;
    config.n_val = 10;
    config.background = BackgroundMode::Procedural;

    let manifest = generate_dataset(&config, 7, &out)?;
    for r in manifest.records.iter().take(5) {
        println!(
            "{}  circles={} squares={} crosses={}  label={:+.4}  {:?}",
            r.filename, r.n_circles, r.n_squares, r.n_crosses, r.label, r.split
        );
    }
    println!("{} images in {}", manifest.records.len(), out.display());
    Ok(())
}
