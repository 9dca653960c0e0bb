use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use super::report::{ResultRow, SummaryRow};
use crate::cart::{
    self, evaluate_regression, BlackBoxModel, FeatureMatrix, RegressionTree, TreeParams,
};
use crate::datagen::{csv_error, generate_dataset, load_image, DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::explain::{explain_instance, premise_check, PremiseReport};
use crate::fidelity::{evaluate_image, names, BaselineKind, MetricParams, MetricResult};
use crate::imagecore::{read_saliency_pfm, write_saliency_pfm, Image, SaliencyMap};
use crate::seed::{stream_rng, Component};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const REGRESSION_FILE: &str = "regression.csv";
pub const PARAMS_FILE: &str = "evaluate_params.txt";
pub const PROVENANCE_FILE: &str = "provenance.txt";

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn expl_filename(index: usize) -> String {
    format!("{index:06}.pfm")
}

/// Images, labels and dataset indices of one split, in manifest order.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub indices: Vec<usize>,
    pub images: Vec<Image>,
    pub labels: Vec<f64>,
}

pub fn load_split(data_dir: &Path, manifest: &DatasetManifest, split: Split) -> Result<SplitData> {
    let records: Vec<_> = manifest.split(split).collect();
    let loaded = records
        .par_iter()
        .map(|r| {
            let index = r.index().ok_or_else(|| Error::File {
                path: data_dir.join(&r.filename),
                message: "file name carries no image index".into(),
            })?;
            Ok((index, load_image(data_dir, r)?, r.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut data = SplitData {
        indices: Vec::with_capacity(loaded.len()),
        images: Vec::with_capacity(loaded.len()),
        labels: Vec::with_capacity(loaded.len()),
    };
    for (i, img, y) in loaded {
        data.indices.push(i);
        data.images.push(img);
        data.labels.push(y);
    }
    if let Some(first) = data.images.first() {
        if let Some(bad) = data
            .images
            .iter()
            .position(|im| (im.width(), im.height()) != (first.width(), first.height()))
        {
            return Err(Error::validation(format!(
                "image {} has a different size than image {}",
                data.indices[bad], data.indices[0]
            )));
        }
    }
    Ok(data)
}

pub fn load_model(path: &Path) -> Result<RegressionTree> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    cart::deserialize(&bytes).map_err(|e| e.in_file(path))
}

pub fn cmd_datagen(config: &ExperimentConfig, out_dir: &Path) -> Result<DatasetManifest> {
    generate_dataset(&config.dataset, config.master_seed, out_dir)
}

/// Identical feature rows in a training set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DuplicateReport {
    /// Rows whose exact pixels appeared earlier in the set.
    pub duplicate_rows: usize,
    /// Groups of identical rows that carry more than one label.
    pub conflicting_groups: usize,
}

pub fn scan_duplicates(images: &[Image], labels: &[f64]) -> DuplicateReport {
    let mut groups: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    for (img, y) in images.iter().zip(labels) {
        let key = img.pixels().iter().map(|p| p.to_bits()).collect();
        groups.entry(key).or_default().push(y.to_bits());
    }
    let mut report = DuplicateReport::default();
    for labels in groups.values() {
        report.duplicate_rows += labels.len() - 1;
        if labels.iter().any(|l| *l != labels[0]) {
            report.conflicting_groups += 1;
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionScores {
    pub n: usize,
    pub mae: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub train: RegressionScores,
    pub validation: Option<RegressionScores>,
    pub duplicates: DuplicateReport,
    pub n_nodes: usize,
    pub n_leaves: usize,
    pub depth: usize,
    pub seconds: f64,
}

fn score_split(tree: &RegressionTree, data: &SplitData) -> Result<Option<RegressionScores>> {
    if data.images.is_empty() {
        return Ok(None);
    }
    let predictions: Vec<f64> = data
        .images
        .par_iter()
        .map(|im| tree.score(im.pixels()))
        .collect();
    let (mae, mse) = evaluate_regression(&predictions, &data.labels)?;
    Ok(Some(RegressionScores {
        n: data.images.len(),
        mae,
        mse,
    }))
}

/// Trains on the `train` split, writes the tree to `out_model` and MAE/MSE for
/// both splits to `regression.csv` beside it.
pub fn cmd_train(data_dir: &Path, out_model: &Path) -> Result<TrainReport> {
    let start = Instant::now();
    let manifest = DatasetManifest::read(data_dir)?;
    let train_data = load_split(data_dir, &manifest, Split::Train)?;
    if train_data.images.is_empty() {
        return Err(Error::File {
            path: data_dir.join(crate::datagen::MANIFEST_FILE),
            message: "no training records".into(),
        });
    }
    let duplicates = scan_duplicates(&train_data.images, &train_data.labels);
    let features = FeatureMatrix::from_rows(
        &train_data
            .images
            .iter()
            .map(Image::pixels)
            .collect::<Vec<_>>(),
    )?;
    let tree = cart::train(&features, &train_data.labels, &TreeParams::default())?;
    drop(features);
    write_file(out_model, &cart::serialize(&tree))?;

    let train = score_split(&tree, &train_data)?.expect("non-empty");
    drop(train_data);
    let val_data = load_split(data_dir, &manifest, Split::Validation)?;
    let validation = score_split(&tree, &val_data)?;

    let mut csv = String::from("split,n,mae,mse\n");
    for (name, s) in [("train", Some(train)), ("validation", validation)] {
        if let Some(s) = s {
            writeln!(csv, "{name},{},{},{}", s.n, s.mae, s.mse).expect("string write");
        }
    }
    let csv_path = out_model
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(REGRESSION_FILE);
    write_file(&csv_path, csv.as_bytes())?;

    Ok(TrainReport {
        train,
        validation,
        duplicates,
        n_nodes: tree.nodes().len(),
        n_leaves: tree.n_leaves(),
        depth: tree.depth(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainReport {
    pub written: usize,
    /// Premise checks on up to 10 seeded validation images.
    pub spot_checks: Vec<(usize, PremiseReport)>,
}

/// Writes one saliency map per validation image to `out_dir`.
pub fn cmd_explain(model_file: &Path, data_dir: &Path, out_dir: &Path) -> Result<ExplainReport> {
    let tree = load_model(model_file)?;
    let manifest = DatasetManifest::read(data_dir)?;
    let master_seed = manifest.config.get("master_seed")?.unwrap_or(0u64);
    let data = load_split(data_dir, &manifest, Split::Validation)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let explanations = data
        .indices
        .par_iter()
        .zip(&data.images)
        .map(|(&index, img)| {
            let e = explain_instance(&tree, img.pixels(), img.width(), img.height())?;
            write_file(
                &out_dir.join(expl_filename(index)),
                &write_saliency_pfm(&e.saliency),
            )?;
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut spot_checks = Vec::new();
    let stride = (data.indices.len() / 10).max(1);
    for k in (0..data.indices.len()).step_by(stride).take(10) {
        let mut rng = stream_rng(master_seed, Component::Premise, data.indices[k] as u64);
        let report = premise_check(&tree, data.images[k].pixels(), &explanations[k], &mut rng)?;
        spot_checks.push((data.indices[k], report));
    }
    Ok(ExplainReport {
        written: explanations.len(),
        spot_checks,
    })
}

/// Runs the zero-saliency premise check on the first `limit` validation images.
pub fn premise_check_split(
    tree: &RegressionTree,
    data: &SplitData,
    master_seed: u64,
    limit: usize,
) -> Result<Vec<(usize, PremiseReport)>> {
    data.indices
        .par_iter()
        .zip(&data.images)
        .take(limit)
        .map(|(&index, img)| {
            let e = explain_instance(tree, img.pixels(), img.width(), img.height())?;
            let mut rng = stream_rng(master_seed, Component::Premise, index as u64);
            Ok((index, premise_check(tree, img.pixels(), &e, &mut rng)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateReport {
    pub metrics: Vec<MetricResult>,
    pub params: MetricParams,
    pub params_digest: String,
    pub master_seed: u64,
}

impl EvaluateReport {
    pub fn metric(&self, name: &str) -> Option<&MetricResult> {
        self.metrics.iter().find(|m| m.metric == name)
    }
}

fn params_digest(params: &MetricParams, master_seed: u64) -> String {
    let mut kv = params.to_kv();
    kv.set("master_seed", master_seed);
    let digest = Sha256::digest(kv.to_text().as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn mean_training_intensity(data_dir: &Path, manifest: &DatasetManifest) -> Result<f64> {
    let train = load_split(data_dir, manifest, Split::Train)?;
    let (sum, count) = train.images.iter().fold((0.0, 0usize), |(s, c), im| {
        (s + im.pixels().iter().sum::<f64>(), c + im.len())
    });
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}

/// Scores every validation image with all metrics and writes `results.csv`,
/// `summary.csv` and `evaluate_params.txt` to `out_dir`.
pub fn cmd_evaluate(
    model_file: &Path,
    data_dir: &Path,
    expl_dir: &Path,
    params: &MetricParams,
    master_seed: u64,
    out_dir: &Path,
) -> Result<EvaluateReport> {
    let tree = load_model(model_file)?;
    let manifest = DatasetManifest::read(data_dir)?;
    let data = load_split(data_dir, &manifest, Split::Validation)?;
    let Some(first) = data.images.first() else {
        return Err(Error::validation("validation split is empty"));
    };
    if first.len() != tree.n_features() {
        return Err(Error::validation(format!(
            "images have {} pixels, model expects {}",
            first.len(),
            tree.n_features()
        )));
    }
    params.validate(first.width(), first.height())?;
    let baseline_mean = match params.baseline {
        BaselineKind::Mean => mean_training_intensity(data_dir, &manifest)?,
        _ => 0.0,
    };

    let per_image = data
        .indices
        .par_iter()
        .zip(&data.images)
        .map(|(&index, img)| {
            let path = expl_dir.join(expl_filename(index));
            let bytes = std::fs::read(&path).map_err(|e| Error::File {
                path: path.clone(),
                message: format!("missing saliency for image {index}: {e}"),
            })?;
            let saliency: SaliencyMap = read_saliency_pfm(&bytes).map_err(|e| e.in_file(&path))?;
            if (saliency.width(), saliency.height()) != (img.width(), img.height()) {
                return Err(Error::validation(format!(
                    "saliency for image {index} is {}x{}, image is {}x{}",
                    saliency.width(),
                    saliency.height(),
                    img.width(),
                    img.height()
                )));
            }
            evaluate_image(
                &tree,
                img,
                saliency.values(),
                params,
                baseline_mean,
                master_seed,
                index as u64,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let digest = params_digest(params, master_seed);
    let mut rows = Vec::new();
    let mut metrics = Vec::new();
    for (m, name) in names::ALL.iter().enumerate() {
        let mut scores = Vec::with_capacity(per_image.len());
        let mut degenerate = 0;
        for (&index, scores_for_image) in data.indices.iter().zip(&per_image) {
            let s = scores_for_image[m];
            debug_assert_eq!(s.metric, *name);
            scores.push((index as u64, s.score));
            degenerate += usize::from(s.degenerate);
            rows.push(ResultRow {
                metric: name.to_string(),
                image_id: index as u64,
                score: s.score,
                degenerate_flag: u8::from(s.degenerate),
            });
        }
        metrics.push(MetricResult::new(*name, scores, degenerate)?);
    }

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let results_path = out_dir.join(RESULTS_FILE);
    let mut w = csv::Writer::from_path(&results_path).map_err(|e| csv_error(&results_path, e))?;
    for row in &rows {
        w.serialize(row).map_err(|e| csv_error(&results_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&results_path, e))?;

    let summary_path = out_dir.join(SUMMARY_FILE);
    let mut w = csv::Writer::from_path(&summary_path).map_err(|e| csv_error(&summary_path, e))?;
    for m in &metrics {
        w.serialize(SummaryRow {
            metric: m.metric.clone(),
            mean: m.summary.mean,
            std: m.summary.std,
            min: m.summary.min,
            max: m.summary.max,
            n: m.summary.n,
            params_digest: digest.clone(),
        })
        .map_err(|e| csv_error(&summary_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&summary_path, e))?;

    let mut kv = params.to_kv();
    kv.set("master_seed", master_seed);
    kv.set("params_digest", &digest);
    write_file(&out_dir.join(PARAMS_FILE), kv.to_text().as_bytes())?;

    Ok(EvaluateReport {
        metrics,
        params: params.clone(),
        params_digest: digest,
        master_seed,
    })
}

/// Where [`run_pipeline`] puts each artifact under one run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelinePaths {
    pub data: PathBuf,
    pub model: PathBuf,
    pub expl: PathBuf,
    pub eval: PathBuf,
}

impl PipelinePaths {
    pub fn new(run_dir: &Path) -> Self {
        Self {
            data: run_dir.join("data"),
            model: run_dir.join("model").join("tree.json"),
            expl: run_dir.join("expl"),
            eval: run_dir.join("eval"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub paths: PipelinePaths,
    pub train: TrainReport,
    pub explain: ExplainReport,
    pub evaluate: EvaluateReport,
}

/// `datagen → train → explain → evaluate` into `run_dir`, plus a
/// `provenance.txt` with the config digest, seed and timestamps.
pub fn run_pipeline(config: &ExperimentConfig, run_dir: &Path) -> Result<RunReport> {
    let started = SystemTime::now();
    let paths = PipelinePaths::new(run_dir);
    cmd_datagen(config, &paths.data)?;
    let train = cmd_train(&paths.data, &paths.model)?;
    let explain = cmd_explain(&paths.model, &paths.data, &paths.expl)?;
    let evaluate = cmd_evaluate(
        &paths.model,
        &paths.data,
        &paths.expl,
        &config.metrics,
        config.master_seed,
        &paths.eval,
    )?;

    let config_text = config.to_kv().to_text();
    let epoch = |t: SystemTime| t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let config_digest: String = Sha256::digest(config_text.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect();
    let provenance = format!(
        "config_digest={config_digest}\nmaster_seed={}\nstarted_unix={}\nfinished_unix={}\n",
        config.master_seed,
        epoch(started),
        epoch(SystemTime::now()),
    );
    write_file(&run_dir.join(PROVENANCE_FILE), provenance.as_bytes())?;
    write_file(&run_dir.join("experiment.txt"), config_text.as_bytes())?;

    Ok(RunReport {
        config: config.clone(),
        paths,
        train,
        explain,
        evaluate,
    })
}
