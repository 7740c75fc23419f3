//! End-to-end checks of the installed binary: artifact layout, rerun
//! reproducibility, output formats, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;
use std::sync::OnceLock;

use tempfile::TempDir;
use toxseq::data::synth::{clintox_like, freesolv_like};
use toxseq::data::write_dataset;
use toxseq::metrics::EvalReport;

const ARTIFACTS: [&str; 8] = [
    "config.json",
    "vocab.txt",
    "model.txt",
    "history.csv",
    "train.csv",
    "test.csv",
    "eval.json",
    "eval.csv",
];

fn toxseq_cmd(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_toxseq"))
        .args(args)
        .output()
        .expect("binary should launch")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn write_clintox_fixture(dir: &Path) -> PathBuf {
    let (records, schema) = clintox_like(160, 7);
    let path = dir.join("clintox.csv");
    write_dataset(&path, &records, &schema).unwrap();
    path
}

fn write_freesolv_fixture(dir: &Path) -> PathBuf {
    let (records, schema) = freesolv_like(40, 3);
    let path = dir.join("freesolv.csv");
    write_dataset(&path, &records, &schema).unwrap();
    path
}

struct SharedRun {
    dir: TempDir,
    stdout: String,
    stderr: String,
}

impl SharedRun {
    fn data(&self) -> PathBuf {
        self.dir.path().join("clintox.csv")
    }

    fn run_dir(&self) -> PathBuf {
        self.dir.path().join("run")
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.run_dir().join(name)
    }
}

/// One small training run reused by every read-only test.
fn shared_run() -> &'static SharedRun {
    static RUN: OnceLock<SharedRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let data = write_clintox_fixture(dir.path());
        let run_dir = dir.path().join("run");
        let out = toxseq_cmd(&[
            "train",
            "--data",
            data.to_str().unwrap(),
            "--preset",
            "clintox",
            "--out",
            run_dir.to_str().unwrap(),
            "--units",
            "8",
            "--embed-dim",
            "8",
            "--lr",
            "1e-3",
            "--epochs",
            "3",
            "--batch-size",
            "16",
            "--seed",
            "1",
        ]);
        assert!(
            out.status.success(),
            "fixture training failed: {}",
            stderr_of(&out)
        );
        SharedRun {
            dir,
            stdout: stdout_of(&out),
            stderr: stderr_of(&out),
        }
    })
}

#[test]
fn train_writes_every_artifact_and_keeps_stderr_clean() {
    let run = shared_run();
    for name in ARTIFACTS {
        assert!(run.artifact(name).exists(), "missing artifact {name}");
    }
    assert!(run.stderr.is_empty(), "stderr not clean: {}", run.stderr);
    assert!(run.stdout.contains("loaded 160 records"));
    assert!(run.stdout.contains("artifacts written to"));
}

#[test]
fn config_rerun_reproduces_every_artifact_byte_for_byte() {
    let run = shared_run();
    let rerun_dir = run.dir.path().join("rerun");
    let out = toxseq_cmd(&[
        "train",
        "--config",
        run.artifact("config.json").to_str().unwrap(),
        "--out",
        rerun_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    for name in ARTIFACTS {
        let original = fs::read(run.artifact(name)).unwrap();
        let replayed = fs::read(rerun_dir.join(name)).unwrap();
        assert_eq!(original, replayed, "artifact {name} differs on rerun");
    }
}

#[test]
fn evaluate_reproduces_the_training_time_report() {
    let run = shared_run();
    let eval_dir = run.dir.path().join("eval");
    let out = toxseq_cmd(&[
        "evaluate",
        "--model",
        run.artifact("model.txt").to_str().unwrap(),
        "--data",
        run.artifact("test.csv").to_str().unwrap(),
        "--preset",
        "clintox",
        "--out",
        eval_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let from_train = fs::read(run.artifact("eval.json")).unwrap();
    let from_eval = fs::read(eval_dir.join("eval.json")).unwrap();
    assert_eq!(from_train, from_eval);

    // The saved model is the early-stopping snapshot, so its test metric is
    // the best validation value the history ever saw.
    let report = EvalReport::from_json_str(&String::from_utf8(from_eval).unwrap()).unwrap();
    let history = fs::read_to_string(run.artifact("history.csv")).unwrap();
    let best: f64 = history
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(report.mean, best);
}

#[test]
fn predict_scores_a_single_molecule() {
    let run = shared_run();
    let out = toxseq_cmd(&[
        "predict",
        "--model",
        run.artifact("model.txt").to_str().unwrap(),
        "--smiles",
        "CCO",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "smiles,FDA_APPROVED,CT_TOX");
    assert_eq!(lines.len(), 2);
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cells[0], "CCO");
    for cell in &cells[1..] {
        let p: f64 = cell.parse().unwrap();
        assert!(p > 0.0 && p < 1.0, "classification score {p} out of range");
    }
}

#[test]
fn predict_preserves_input_order() {
    let run = shared_run();
    let input = run.dir.path().join("molecules.txt");
    fs::write(&input, "CCO\nCC(=O)O\nCCO\nc1ccccc1\nCCN\n").unwrap();
    let out = toxseq_cmd(&[
        "predict",
        "--model",
        run.artifact("model.txt").to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    let smiles: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(smiles, ["CCO", "CC(=O)O", "CCO", "c1ccccc1", "CCN"]);
    assert_eq!(rows[0], rows[2], "same molecule must score identically");
}

#[test]
fn strict_predict_reports_implausible_smiles_inline() {
    let run = shared_run();
    let input = run.dir.path().join("mixed.txt");
    fs::write(&input, "CCO\nC$O\n").unwrap();
    let out = toxseq_cmd(&[
        "predict",
        "--model",
        run.artifact("model.txt").to_str().unwrap(),
        "--input",
        input.to_str().unwrap(),
        "--strict",
    ]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(!rows[0].contains("invalid"));
    assert!(rows[1].starts_with("C$O,"), "row: {}", rows[1]);
    assert!(rows[1].contains("invalid"), "row: {}", rows[1]);
}

#[test]
fn gradcheck_prints_every_block_and_passes() {
    let out = toxseq_cmd(&["gradcheck"]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let block_lines = text.lines().filter(|l| l.contains("e-")).count();
    assert!(
        block_lines >= 19,
        "expected one line per tensor, got:\n{text}"
    );
    assert!(text.contains("overall"));
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn gradcheck_detects_a_perturbed_gradient() {
    let out = toxseq_cmd(&["gradcheck", "--perturb"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr_of(&out).contains("error:"));
}

#[test]
fn export_metrics_stacks_reports_deterministically() {
    let run = shared_run();
    let eval = run.artifact("eval.json");
    let report =
        EvalReport::from_json_str(&fs::read_to_string(&eval).unwrap()).unwrap();
    let rows_per_report = report.tasks.len() + report.skipped.len() + 3;

    let eval_str = eval.to_str().unwrap();
    let out = toxseq_cmd(&["export-metrics", eval_str, eval_str]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "run,task,metric,value");
    assert_eq!(lines.len(), 1 + 2 * rows_per_report);

    let again = toxseq_cmd(&["export-metrics", eval_str, eval_str]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn export_metrics_rejects_malformed_json() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.json");
    fs::write(&bad, "{ not json").unwrap();
    let out = toxseq_cmd(&["export-metrics", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn vocab_lists_reserved_tokens_first() {
    let run = shared_run();
    let out = toxseq_cmd(&["vocab", "--data", run.data().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(stdout_of(&out).starts_with("0\t<PAD>\n1\t<UNK>\n"));
}

#[test]
fn conflicting_schema_sources_exit_2() {
    let run = shared_run();
    let out = toxseq_cmd(&[
        "train",
        "--data",
        run.data().to_str().unwrap(),
        "--preset",
        "clintox",
        "--schema",
        "whatever.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("error:"));
}

#[test]
fn undersampling_a_regression_dataset_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_freesolv_fixture(dir.path());
    let out = toxseq_cmd(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--preset",
        "freesolv",
        "--undersample",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_data_file_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = toxseq_cmd(&[
        "train",
        "--data",
        dir.path().join("nope.csv").to_str().unwrap(),
        "--preset",
        "clintox",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_freesolv_fixture(dir.path());
    let out = toxseq_cmd(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--preset",
        "freesolv",
        "--out",
        dir.path().join("run").to_str().unwrap(),
        "--units",
        "4",
        "--embed-dim",
        "4",
        "--lr",
        "1e160",
        "--no-clip",
        "--dropout",
        "0",
        "--batch-size",
        "1",
        "--epochs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_of(&out).contains("non-finite"));
}
