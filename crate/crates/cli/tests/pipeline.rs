use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rightsaudit_cli::{Overrides, Pipeline, RunConfig, Stage, StageError, StageOutcome};

fn fixture_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/audit.toml")
}

/// One model, two variants: enough for every stage, fast to run.
fn small(out: &Path) -> Overrides {
    Overrides {
        out: Some(out.to_path_buf()),
        seed: None,
        models: Some(vec!["stub-alpha".into()]),
        variants: Some(vec![
            "none.for_article.none".into(),
            "ap.summarize.clear_unbiased".into(),
        ]),
    }
}

fn pipeline(o: &Overrides) -> Pipeline {
    Pipeline::new(RunConfig::load(fixture_config(), o).unwrap()).unwrap()
}

fn stage_error(e: anyhow::Error) -> StageError {
    e.downcast::<StageError>().expect("a stage error")
}

#[test]
fn score_before_train_axis_names_the_missing_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let p = pipeline(&small(tmp.path()));
    p.run(Stage::Ingest).unwrap();
    p.run(Stage::Generate).unwrap();
    let err = p.run(Stage::Score).unwrap_err();
    assert!(err.to_string().contains("rightsaudit train-axis"), "{err}");
    assert!(matches!(stage_error(err), StageError::Missing(Stage::TrainAxis)));
}

#[test]
fn completed_stages_are_reused() {
    let tmp = tempfile::tempdir().unwrap();
    let p = pipeline(&small(tmp.path()));
    for s in Stage::ALL {
        assert_eq!(p.run(s).unwrap(), StageOutcome::Ran, "{s}");
    }
    let report = fs::read(Stage::Report.dir(tmp.path()).join("report.json")).unwrap();
    let p = pipeline(&small(tmp.path()));
    for s in Stage::ALL {
        assert_eq!(p.run(s).unwrap(), StageOutcome::UpToDate, "{s}");
    }
    assert_eq!(
        fs::read(Stage::Report.dir(tmp.path()).join("report.json")).unwrap(),
        report
    );
}

#[test]
fn edited_artifact_marks_downstream_stale() {
    let tmp = tempfile::tempdir().unwrap();
    let p = pipeline(&small(tmp.path()));
    for s in [Stage::Ingest, Stage::Generate, Stage::TrainAxis] {
        p.run(s).unwrap();
    }
    let axis = Stage::TrainAxis.dir(tmp.path()).join("axis.json");
    let mut text = fs::read_to_string(&axis).unwrap();
    text.push(' ');
    fs::write(&axis, text).unwrap();
    let err = stage_error(p.run(Stage::Score).unwrap_err());
    assert!(matches!(err, StageError::Stale(Stage::TrainAxis, _)), "{err}");
    assert!(err.to_string().contains("axis.json"), "{err}");

    // Re-running the stage repairs it.
    assert_eq!(p.run(Stage::TrainAxis).unwrap(), StageOutcome::Ran);
    assert_eq!(p.run(Stage::Score).unwrap(), StageOutcome::Ran);
}

#[test]
fn changed_seed_retrains_but_keeps_generation() {
    let tmp = tempfile::tempdir().unwrap();
    let p = pipeline(&small(tmp.path()));
    for s in [Stage::Ingest, Stage::Generate, Stage::TrainAxis] {
        p.run(s).unwrap();
    }
    let o = Overrides {
        seed: Some(7),
        ..small(tmp.path())
    };
    let p = pipeline(&o);
    assert_eq!(p.run(Stage::Ingest).unwrap(), StageOutcome::UpToDate);
    assert_eq!(p.run(Stage::Generate).unwrap(), StageOutcome::UpToDate);
    let err = stage_error(p.run(Stage::Score).unwrap_err());
    assert!(
        matches!(err, StageError::Stale(Stage::TrainAxis, ref why) if why.contains("seed")),
        "{err}"
    );
    assert_eq!(p.run(Stage::TrainAxis).unwrap(), StageOutcome::Ran);
}

#[test]
fn changed_model_set_regenerates() {
    let tmp = tempfile::tempdir().unwrap();
    let p = pipeline(&small(tmp.path()));
    p.run(Stage::Ingest).unwrap();
    p.run(Stage::Generate).unwrap();
    let o = Overrides {
        models: Some(vec!["stub-beta".into()]),
        ..small(tmp.path())
    };
    assert_eq!(pipeline(&o).run(Stage::Generate).unwrap(), StageOutcome::Ran);
}

#[test]
fn unknown_model_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Overrides {
        models: Some(vec!["nope".into()]),
        ..small(tmp.path())
    };
    let err = RunConfig::load(fixture_config(), &o).unwrap_err();
    assert!(err.to_string().contains("nope"), "{err}");
}

#[test]
fn artifacts_carry_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let p = pipeline(&small(tmp.path()));
    for s in Stage::ALL {
        p.run(s).unwrap();
    }
    let read = |s: Stage, f: &str| -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(s.dir(tmp.path()).join(f)).unwrap()).unwrap()
    };
    let summary = read(Stage::Ingest, "summary.json");
    assert_eq!(summary["data"]["articles"], 14);
    assert!(summary["provenance"]["axis_hash"].is_null());
    let metrics = read(Stage::Score, "metrics.json");
    let prov = &metrics["provenance"];
    assert_eq!(prov["seed"], 42);
    assert_eq!(prov["embedding_provider_id"], "stub-hash-v1-d768");
    assert!(prov["axis_hash"].as_str().is_some_and(|h| h.len() == 64));
    let report = read(Stage::Report, "report.json");
    assert_eq!(report["stable"]["provenance"]["axis_hash"], prov["axis_hash"]);
    assert!(report.get("generated_at").is_none());
    let eval = read(Stage::AnnotateEval, "evaluation.json");
    assert_eq!(eval["data"]["headlines"], 14);
    let gold = fs::read_to_string(Stage::AnnotateEval.dir(tmp.path()).join("gold_labels.csv")).unwrap();
    // Header plus one row per (record, question): 28 records, 16 questions.
    assert_eq!(gold.lines().count(), 1 + 28 * 16);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rightsaudit"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

#[test]
fn binary_runs_and_honors_fail_on() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let config = fixture_config();
    let config = config.to_str().unwrap();
    let base = [
        "--config",
        config,
        "--out",
        out,
        "--models",
        "stub-alpha",
        "--variants",
        "none.for_article.none,ap.summarize.none",
    ];

    let missing = cli(&[&base[..], &["report"]].concat());
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("rightsaudit score"));

    let run = cli(&[&base[..], &["run"]].concat());
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("report: done"), "{stdout}");

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(out).join("report/report.json")).unwrap()).unwrap();
    let ratings: Vec<&str> = report["stable"]["profiles"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| ["scale", "scope", "likelihood"].map(|k| p[k].as_str().unwrap()))
        .collect();
    let gated = cli(&[&base[..], &["--fail-on", "high", "report"]].concat());
    let expect = if ratings.contains(&"high") { 2 } else { 0 };
    assert_eq!(gated.status.code(), Some(expect), "{ratings:?}");
    // Scale of freedom of thought defaults to high, so medium always trips.
    assert_eq!(
        cli(&[&base[..], &["--fail-on", "medium", "report"]].concat())
            .status
            .code(),
        Some(2)
    );
}
