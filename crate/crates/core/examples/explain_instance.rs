//! Explains one prediction and prints the saliency map as ASCII, next to the
//! image it explains.

use fidelity_bench::cart;
use fidelity_bench::datagen::{generate_image, DatasetConfig};
use fidelity_bench::explain::{explain_instance, global_importances, premise_check};
use fidelity_bench::seed::{stream_rng, Component};
use fidelity_bench::TreeParams;

fn main() -> fidelity_bench::Result<()> {
    let config = DatasetConfig::for_resolution(32, 32);
    let data: Vec<_> = (0..200)
        .map(|i| generate_image(&config, 3, i))
        .collect::<Result<_, _>>()?;
    let rows: Vec<&[f64]> = data.iter().map(|s| s.image.pixels()).collect();
    let labels: Vec<f64> = data.iter().map(|s| s.label).collect();
    let tree = cart::train_rows(&rows, &labels, &TreeParams::default())?;

    let x = &data[0].image;
    let e = explain_instance(&tree, x.pixels(), x.width(), x.height())?;
    println!(
        "label {:.4}, prediction {:.4}, path length {}, {} salient pixels",
        data[0].label,
        e.leaf_value,
        e.path_length,
        e.saliency.support().len()
    );
    let peak = e.saliency.values().iter().cloned().fold(0.0, f64::max);
    for row in 0..x.height() {
        let image: String = (0..x.width())
            .map(|c| if x.get(row, c) > 0.5 { '#' } else { '.' })
            .collect();
        let sal: String = (0..x.width())
            .map(|c| match e.saliency.get(row, c) / peak {
                0.0 => ' ',
                v if v < 0.1 => '.',
                v if v < 0.5 => 'o',
                _ => '@',
            })
            .collect();
        println!("{image}  |{sal}|");
    }

    let mut rng = stream_rng(3, Component::Premise, 0);
    let premise = premise_check(&tree, x.pixels(), &e, &mut rng)?;
    println!(
        "premise: probed {} zero-saliency pixels, {} violations, joint violation {}",
        premise.probed, premise.violations, premise.joint_violation
    );

    let global = global_importances(&tree);
    let used = global.iter().filter(|v| **v > 0.0).count();
    println!("tree uses {used} of {} pixels overall", global.len());
    Ok(())
}
