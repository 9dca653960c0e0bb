use std::path::Path;

use fidelity_bench::bench::{
    cmd_evaluate, cmd_explain, cmd_report, cmd_train, expl_filename, read_results, read_summary,
    run_pipeline, ExperimentConfig, Preset, ReportFormat,
};
use fidelity_bench::datagen::{CountRange, DatasetManifest, Split};
use fidelity_bench::fidelity::{aggregate, names};
use fidelity_bench::imagecore::read_saliency_pfm;
use fidelity_bench::Error;

fn tiny() -> ExperimentConfig {
    let mut c = Preset::Tiny.config();
    c.dataset.n_train = 60;
    c.dataset.n_val = 12;
    c
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_pipeline(&tiny(), &dir.path().join("a")).unwrap();
    let b = run_pipeline(&tiny(), &dir.path().join("b")).unwrap();
    assert_eq!(read(&a.paths.model), read(&b.paths.model));
    for f in ["results.csv", "summary.csv", "evaluate_params.txt"] {
        assert_eq!(
            read(&a.paths.eval.join(f)),
            read(&b.paths.eval.join(f)),
            "{f}"
        );
    }
    assert_eq!(
        read(&a.paths.data.join("manifest.csv")),
        read(&b.paths.data.join("manifest.csv"))
    );
    let manifest = DatasetManifest::read(&a.paths.data).unwrap();
    for r in manifest.split(Split::Validation) {
        let name = expl_filename(r.index().unwrap());
        assert_eq!(
            read(&a.paths.expl.join(&name)),
            read(&b.paths.expl.join(&name))
        );
    }
}

#[test]
fn different_seed_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_pipeline(&tiny(), &dir.path().join("a")).unwrap();
    let mut other = tiny();
    other.master_seed += 1;
    let b = run_pipeline(&other, &dir.path().join("b")).unwrap();
    assert_ne!(
        read(&a.paths.data.join("manifest.csv")),
        read(&b.paths.data.join("manifest.csv"))
    );
}

#[test]
fn artifacts_have_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny();
    let run = run_pipeline(&cfg, dir.path()).unwrap();
    assert_eq!(run.train.train.mse, 0.0);
    assert_eq!(run.explain.written, cfg.dataset.n_val);

    let results_text = String::from_utf8(read(&run.paths.eval.join("results.csv"))).unwrap();
    assert_eq!(
        results_text.lines().next(),
        Some("metric,image_id,score,degenerate_flag")
    );
    let results = read_results(&run.paths.eval.join("results.csv")).unwrap();
    assert_eq!(results.len(), names::ALL.len() * cfg.dataset.n_val);
    assert!(results.iter().all(|r| r.degenerate_flag <= 1));
    // metric-major, images ascending within a metric
    for (m, chunk) in names::ALL.iter().zip(results.chunks(cfg.dataset.n_val)) {
        assert!(chunk.iter().all(|r| r.metric == *m));
        assert!(chunk.windows(2).all(|w| w[0].image_id < w[1].image_id));
    }

    let summary_text = String::from_utf8(read(&run.paths.eval.join("summary.csv"))).unwrap();
    assert_eq!(
        summary_text.lines().next(),
        Some("metric,mean,std,min,max,n,params_digest")
    );
    let summary = read_summary(&run.paths.eval.join("summary.csv")).unwrap();
    let metrics: Vec<_> = summary.iter().map(|r| r.metric.as_str()).collect();
    assert_eq!(metrics, names::ALL);
    assert!(summary
        .iter()
        .all(|r| r.params_digest == run.evaluate.params_digest));

    let params = String::from_utf8(read(&run.paths.eval.join("evaluate_params.txt"))).unwrap();
    assert!(params.contains(&format!("master_seed={}", cfg.master_seed)));
    assert!(params.contains("patch_size="));
    let provenance = String::from_utf8(read(&dir.path().join("provenance.txt"))).unwrap();
    assert!(provenance.contains("config_digest=") && provenance.contains("started_unix="));

    for name in std::fs::read_dir(&run.paths.expl).unwrap() {
        let map = read_saliency_pfm(&read(&name.unwrap().path())).unwrap();
        assert!(map.values().iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn summary_matches_recomputation_from_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_pipeline(&tiny(), dir.path()).unwrap();
    let results = read_results(&run.paths.eval.join("results.csv")).unwrap();
    for row in read_summary(&run.paths.eval.join("summary.csv")).unwrap() {
        let scores: Vec<f64> = results
            .iter()
            .filter(|r| r.metric == row.metric)
            .map(|r| r.score)
            .collect();
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
        let min = scores.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(row.n, scores.len());
        for (got, want) in [
            (row.mean, mean),
            (row.std, std),
            (row.min, min),
            (row.max, max),
        ] {
            assert!(
                (got - want).abs() <= 1e-9,
                "{}: {got} vs {want}",
                row.metric
            );
        }
        let agg = aggregate(&scores).unwrap();
        assert!((agg.mean - row.mean).abs() <= 1e-12);
    }

    let csv = cmd_report(
        &[&run.paths.eval.join("summary.csv")],
        &["tiny".into()],
        ReportFormat::Csv,
    )
    .unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let scores: Vec<f64> = results
            .iter()
            .filter(|r| r.metric == f[0])
            .map(|r| r.score)
            .collect();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        assert!((f[2].parse::<f64>().unwrap() - mean).abs() <= 1e-9);
        let flagged = results
            .iter()
            .filter(|r| r.metric == f[0] && r.degenerate_flag == 1)
            .count();
        assert_eq!(f[7].parse::<usize>().unwrap(), flagged);
    }
}

#[test]
fn two_summaries_report_side_by_side() {
    let dir = tempfile::tempdir().unwrap();
    let a = run_pipeline(&tiny(), &dir.path().join("uniform")).unwrap();
    let mut textured = tiny();
    textured.dataset.background = fidelity_bench::datagen::BackgroundMode::Procedural;
    let b = run_pipeline(&textured, &dir.path().join("textured")).unwrap();
    let sa = a.paths.eval.join("summary.csv");
    let sb = b.paths.eval.join("summary.csv");
    let text = cmd_report(&[&sa, &sb], &[], ReportFormat::Text).unwrap();
    let header = text.lines().next().unwrap();
    assert!(
        header.contains("uniform") && header.contains("textured"),
        "{header}"
    );
    assert!(text.contains("direction only"));
}

#[test]
fn constant_dataset_gives_all_zero_maps() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny();
    cfg.dataset.counts = [CountRange { min: 0, max: 0 }; 3];
    let run = run_pipeline(&cfg, dir.path()).unwrap();
    assert_eq!(run.train.n_leaves, 1);
    for entry in std::fs::read_dir(&run.paths.expl).unwrap() {
        let map = read_saliency_pfm(&read(&entry.unwrap().path())).unwrap();
        assert!(map.values().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn missing_saliency_names_the_image() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny();
    let run = run_pipeline(&cfg, dir.path()).unwrap();
    let manifest = DatasetManifest::read(&run.paths.data).unwrap();
    let victim = manifest
        .split(Split::Validation)
        .nth(3)
        .unwrap()
        .index()
        .unwrap();
    std::fs::remove_file(run.paths.expl.join(expl_filename(victim))).unwrap();
    let err = cmd_evaluate(
        &run.paths.model,
        &run.paths.data,
        &run.paths.expl,
        &cfg.metrics,
        cfg.master_seed,
        &dir.path().join("eval2"),
    )
    .unwrap_err();
    assert!(
        err.to_string().contains(&format!("image {victim}")),
        "{err}"
    );
}

#[test]
fn missing_inputs_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_train(dir.path(), &dir.path().join("tree.json")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("manifest.csv"), "{err}");

    let err = cmd_explain(&dir.path().join("nope.json"), dir.path(), dir.path()).unwrap_err();
    assert!(err.to_string().contains("nope.json"), "{err}");
}

#[test]
fn explain_spot_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_pipeline(&tiny(), dir.path()).unwrap();
    assert_eq!(run.explain.spot_checks.len(), 10);
    assert!(run.explain.spot_checks.iter().all(|(_, r)| r.passed()));
}

#[test]
fn tiny_preset_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let run = run_pipeline(&Preset::Tiny.config(), dir.path()).unwrap();
    assert_eq!(run.explain.written, 2);
    assert!(start.elapsed().as_secs_f64() < 1.0, "{:?}", start.elapsed());
}
