//! Prints the most-relevant-first perturbation curve of a tree explanation
//! against a random ranking of the same image.

use fidelity_bench::cart;
use fidelity_bench::datagen::{generate_image, DatasetConfig};
use fidelity_bench::explain::explain_instance;
use fidelity_bench::fidelity::{region_perturbation, PerturbationSpec};
use fidelity_bench::TreeParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fidelity_bench::Result<()> {
    let config = DatasetConfig::for_resolution(32, 32);
    let data: Vec<_> = (0..300)
        .map(|i| generate_image(&config, 5, i))
        .collect::<Result<_, _>>()?;
    let rows: Vec<&[f64]> = data.iter().map(|s| s.image.pixels()).collect();
    let labels: Vec<f64> = data.iter().map(|s| s.label).collect();
    let tree = cart::train_rows(&rows, &labels, &TreeParams::default())?;

    let x = &data
        .iter()
        .find(|s| s.label.abs() > 0.3)
        .unwrap_or(&data[0])
        .image;
    let e = explain_instance(&tree, x.pixels(), x.width(), x.height())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let random: Vec<f64> = (0..x.len()).map(|_| rng.random()).collect();

    let spec = PerturbationSpec::black(2, 0);
    let steps = 20;
    let tree_rp = region_perturbation(&tree, x, e.saliency.values(), &spec, steps)?;
    let rand_rp = region_perturbation(&tree, x, &random, &spec, steps)?;
    println!("step  tree-saliency  random");
    for ((k, a), (_, b)) in tree_rp.curve.steps.iter().zip(&rand_rp.curve.steps) {
        println!("{k:>4}  {a:>13.4}  {b:>6.4}");
    }
    println!("AOPC: tree {:.4}, random {:.4}", tree_rp.aopc, rand_rp.aopc);
    Ok(())
}
