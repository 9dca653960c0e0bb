//! End-to-end experiment orchestration.
//!
//! Stages communicate only through files, so each can be rerun on its own:
//!
//! | stage      | reads                           | writes                                         |
//! |------------|---------------------------------|------------------------------------------------|
//! | `datagen`  | config                          | `images/`, `scenes/`, `manifest.csv`, `config.txt` |
//! | `train`    | dataset                         | tree file, `regression.csv`                    |
//! | `explain`  | tree, dataset                   | `{index:06}.pfm` per validation image          |
//! | `evaluate` | tree, dataset, explanations     | `results.csv`, `summary.csv`, `evaluate_params.txt` |
//! | `report`   | one or more `summary.csv`       | comparison table                               |

mod config;
mod pipeline;
mod report;

pub use config::{ExperimentConfig, Preset, DEFAULT_MASTER_SEED};
pub use pipeline::{
    cmd_datagen, cmd_evaluate, cmd_explain, cmd_train, expl_filename, load_model, load_split,
    premise_check_split, run_pipeline, scan_duplicates, DuplicateReport, EvaluateReport,
    ExplainReport, PipelinePaths, RegressionScores, RunReport, SplitData, TrainReport,
    RESULTS_FILE, SUMMARY_FILE,
};
pub use report::{cmd_report, read_results, read_summary, ReportFormat, ResultRow, SummaryRow};
