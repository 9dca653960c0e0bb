//! Scores exact attributions of a linear model with every metric. The
//! removal-based metrics take contributions `w·x` and read 1; infidelity
//! weighs attributions by the perturbation size, so its exact input is `w` and
//! it reads 0. Shuffled copies score worse.

use fidelity_bench::fidelity::{
    faithfulness_correlation, faithfulness_estimate, infidelity, region_perturbation, LinearModel,
    PerturbationSpec,
};
use fidelity_bench::Image;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> fidelity_bench::Result<()> {
    let (w, h) = (16, 16);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = LinearModel {
        weights: (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect(),
        bias: 0.5,
    };
    let x = Image::new(w, h, (0..w * h).map(|_| rng.random()).collect())?;
    let exact = model.contributions(x.pixels());
    let mut shuffled = exact.clone();
    shuffled.shuffle(&mut rng);
    let mut shuffled_weights = model.weights.clone();
    shuffled_weights.shuffle(&mut rng);

    for (name, attr, grad) in [
        ("exact", &exact, &model.weights),
        ("shuffled", &shuffled, &shuffled_weights),
    ] {
        let spec = PerturbationSpec::black(1, 42);
        let fc = faithfulness_correlation(&model, &x, attr, &spec, 32, 100)?;
        let fe = faithfulness_estimate(&model, &x, attr, &spec, w * h)?;
        let inf = infidelity(&model, &x, grad, &PerturbationSpec::black(4, 42), 200)?;
        let rp = region_perturbation(&model, &x, attr, &PerturbationSpec::black(4, 42), 16)?;
        println!(
            "{name:>9}: FC={:+.6} FE={:+.6} INF={:.3e} AOPC={:.4}",
            fc.value, fe.value, inf, rp.aopc
        );
    }
    Ok(())
}
