use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fidelity-bench"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = bin(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn subcommands_chain_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("exp.txt"),
        "# smaller than tiny\nn_train=30\nn_val=5\n",
    )
    .unwrap();
    ok(
        &[
            "datagen", "--preset", "tiny", "--config", "exp.txt", "--seed", "9", "--out", "data",
        ],
        d,
    );
    let train = ok(&["train", "--data", "data", "--out", "model/tree.json"], d);
    assert!(train.contains("train: n=30 mae=0 mse=0"), "{train}");
    assert!(d.join("model/regression.csv").exists());
    ok(
        &[
            "explain",
            "--model",
            "model/tree.json",
            "--data",
            "data",
            "--out",
            "expl",
        ],
        d,
    );
    assert_eq!(std::fs::read_dir(d.join("expl")).unwrap().count(), 5);
    ok(
        &[
            "evaluate",
            "--model",
            "model/tree.json",
            "--data",
            "data",
            "--expl",
            "expl",
            "--out",
            "eval",
        ],
        d,
    );
    let params = std::fs::read_to_string(d.join("eval/evaluate_params.txt")).unwrap();
    assert!(params.contains("master_seed=9"), "{params}");

    let report = ok(&["report", "eval/summary.csv", "--label", "mine"], d);
    assert!(report.lines().next().unwrap().contains("mine"));
    let csv = ok(&["report", "eval/summary.csv", "--csv"], d);
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn run_matches_chained_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["run", "--preset", "tiny", "--out", "run"], d);
    ok(&["datagen", "--preset", "tiny", "--out", "data"], d);
    ok(&["train", "--data", "data", "--out", "tree.json"], d);
    ok(
        &[
            "explain",
            "--model",
            "tree.json",
            "--data",
            "data",
            "--out",
            "expl",
        ],
        d,
    );
    ok(
        &[
            "evaluate",
            "--model",
            "tree.json",
            "--data",
            "data",
            "--expl",
            "expl",
            "--out",
            "eval",
        ],
        d,
    );
    assert_eq!(
        std::fs::read(d.join("run/eval/results.csv")).unwrap(),
        std::fs::read(d.join("eval/results.csv")).unwrap()
    );
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for args in [
        &["train", "--data", "missing", "--out", "t.json"][..],
        &["datagen", "--preset", "huge", "--out", "x"],
        &["report", "missing.csv"],
    ] {
        let out = bin(args, d);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.starts_with("error: "), "{args:?}: {err}");
    }

    std::fs::write(d.join("bad.txt"), "widht=64\n").unwrap();
    let out = bin(&["datagen", "--config", "bad.txt", "--out", "x"], d);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("widht"));
}
