//! Fits an exact regression tree to in-memory scenes and checks that it
//! reproduces every training label.

use fidelity_bench::cart::{self, evaluate_regression};
use fidelity_bench::datagen::{generate_image, DatasetConfig};
use fidelity_bench::{BlackBoxModel, TreeParams};

fn main() -> fidelity_bench::Result<()> {
    let config = DatasetConfig::for_resolution(32, 32);
    let images: Vec<_> = (0..300)
        .map(|i| generate_image(&config, 11, i))
        .collect::<Result<_, _>>()?;
    let (train, val) = images.split_at(250);

    let rows: Vec<&[f64]> = train.iter().map(|s| s.image.pixels()).collect();
    let labels: Vec<f64> = train.iter().map(|s| s.label).collect();
    let tree = cart::train_rows(&rows, &labels, &TreeParams::default())?;
    println!(
        "{} nodes, {} leaves, depth {}",
        tree.nodes().len(),
        tree.n_leaves(),
        tree.depth()
    );

    for (name, set) in [("train", train), ("validation", val)] {
        let pred: Vec<f64> = set.iter().map(|s| tree.score(s.image.pixels())).collect();
        let truth: Vec<f64> = set.iter().map(|s| s.label).collect();
        let (mae, mse) = evaluate_regression(&pred, &truth)?;
        println!("{name:>10}: mae={mae:.4} mse={mse:.4}");
    }

    let bytes = cart::serialize(&tree);
    assert_eq!(cart::deserialize(&bytes)?, tree);
    println!("serialized tree: {} bytes", bytes.len());
    Ok(())
}
