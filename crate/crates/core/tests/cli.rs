use std::path::Path;
use std::process::{Command, Output};

use acnet::cli::RunManifest;
use acnet::{CopulaModel, Dataset, FamilyKind, ModelFile, ParametricFamily};

mod common;
use common::{clayton_cdf, empirical_copula_gap};

fn acnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acnet"))
        .args(args)
        .current_dir(dir)
        .env("ACNET_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn synth(dir: &Path, n_train: &str, seed: &str) {
    let o = acnet(dir, &["synth", "--family", "clayton", "--theta", "5", "--n-train", n_train, "--n-test", "1000", "--seed", seed, "--out", "data"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn synth_is_reproducible_and_correct() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "2000", "7");
    let train = Dataset::load(&dir.path().join("data/train.csv")).unwrap();
    let test = Dataset::load(&dir.path().join("data/test.csv")).unwrap();
    assert_eq!((train.len(), test.len()), (2000, 1000));
    assert!(dir.path().join("data/synth.manifest.json").exists());
    let gap = empirical_copula_gap(&train, 10, |a, b| clayton_cdf(5.0, &[a, b]));
    assert!(gap <= 0.04, "gap {gap}");

    let first = std::fs::read(dir.path().join("data/train.csv")).unwrap();
    synth(dir.path(), "2000", "7");
    assert_eq!(first, std::fs::read(dir.path().join("data/train.csv")).unwrap());
}

#[test]
fn bad_family_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = acnet(dir.path(), &["synth", "--family", "clayton", "--theta", "-1", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    let o = acnet(dir.path(), &["synth", "--family", "vine", "--theta", "2", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_epoch_fit_writes_initial_model_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "200", "1");
    let o = acnet(dir.path(), &["fit", "--train", "data/train.csv", "--test", "data/test.csv", "--epochs", "0", "--seed", "3", "--out", "m.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let saved = ModelFile::load(&dir.path().join("m.json")).unwrap();
    let init = acnet::GeneratorNetwork::init(&[10, 10], 3).unwrap();
    assert_eq!(saved.generator, init.into());

    let manifest = RunManifest::load(&dir.path().join("m.json.manifest.json")).unwrap();
    assert_eq!(manifest.command, "fit");
    assert!(!manifest.partial);
    let o = acnet(dir.path(), &["replay", "m.json.manifest.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn resumed_fit_matches_continuous_fit() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "200", "2");
    let run = |args: &[&str]| {
        let o = acnet(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&["fit", "--train", "data/train.csv", "--epochs", "4", "--seed", "5", "--out", "full.json"]);
    run(&["fit", "--train", "data/train.csv", "--epochs", "0", "--seed", "5", "--out", "start.json"]);
    run(&["fit", "--train", "data/train.csv", "--epochs", "4", "--seed", "5", "--init", "start.json", "--out", "resumed.json"]);
    let a = std::fs::read(dir.path().join("full.json")).unwrap();
    let b = std::fs::read(dir.path().join("resumed.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eval_and_queries() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "200", "3");
    let indep = ModelFile { generator: ParametricFamily::independence().into(), dimension: Some(2) };
    indep.save(&dir.path().join("indep.json")).unwrap();
    let truth = ModelFile { generator: ParametricFamily::new(FamilyKind::Clayton, 5.0).unwrap().into(), dimension: Some(2) };
    truth.save(&dir.path().join("clayton.json")).unwrap();

    let o = acnet(dir.path(), &["eval", "--model", "indep.json", "--data", "data/test.csv"]);
    assert!(stdout(&o).parse::<f64>().unwrap().abs() < 1e-12);
    let o = acnet(dir.path(), &["eval", "--model", "clayton.json", "--data", "data/test.csv"]);
    let v: f64 = stdout(&o).parse().unwrap();
    assert!((v + 0.94).abs() < 0.1, "{v}");
    assert_eq!(stdout(&acnet(dir.path(), &["eval", "--model", "clayton.json", "--data", "data/test.csv"])), stdout(&o));

    let q = |args: &[&str]| -> f64 {
        let mut all = vec!["query", "--model"];
        all.extend_from_slice(args);
        stdout(&acnet(dir.path(), &all)).parse().unwrap()
    };
    assert_eq!(q(&["clayton.json", "--kind", "cdf", "--point", "1,1"]), 1.0);
    assert_eq!(q(&["clayton.json", "--kind", "rect", "--lower", "0,0", "--upper", "1,1"]), 1.0);
    assert!((q(&["indep.json", "--kind", "condcdf", "--point", "0.3,0.6", "--observed", "0"]) - 0.6).abs() < 1e-12);

    let o = acnet(dir.path(), &["query", "--model", "clayton.json", "--kind", "cdf", "--point", "0.2,zz"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zz"));

    let o = acnet(dir.path(), &["query", "--model", "clayton.json", "--kind", "cdf", "--point", "0.2,0.3,0.4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_and_grid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let truth = ModelFile { generator: ParametricFamily::new(FamilyKind::Clayton, 2.0).unwrap().into(), dimension: Some(2) };
    truth.save(&dir.path().join("c.json")).unwrap();
    let net = ModelFile { generator: acnet::GeneratorNetwork::init(&[5, 5], 1).unwrap().into(), dimension: Some(2) };
    net.save(&dir.path().join("n.json")).unwrap();

    let o = acnet(dir.path(), &["sample", "--model", "n.json", "--n", "100", "--seed", "4", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read(dir.path().join("s.csv")).unwrap();
    let o = acnet(dir.path(), &["replay", "s.csv.manifest.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(first, std::fs::read(dir.path().join("s.csv")).unwrap());

    let o = acnet(dir.path(), &["grid", "--model", "c.json", "--kind", "cdf", "--resolution", "3", "--out", "g.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let g = Dataset::load(&dir.path().join("g.csv")).unwrap();
    assert_eq!((g.len(), g.dim()), (9, 3));
    for r in g.rows() {
        assert!(r[2] >= (r[0] + r[1] - 1.0).max(0.0) && r[2] <= r[0].min(r[1]));
    }

    let indep = ModelFile { generator: ParametricFamily::independence().into(), dimension: Some(2) };
    indep.save(&dir.path().join("i.json")).unwrap();
    acnet(dir.path(), &["grid", "--model", "i.json", "--kind", "logpdf", "--resolution", "4", "--out", "l.csv"]);
    let text = std::fs::read_to_string(dir.path().join("l.csv")).unwrap();
    assert!(text.lines().all(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap().abs() < 1e-12));

    let tri = ModelFile { generator: ParametricFamily::independence().into(), dimension: Some(3) };
    tri.save(&dir.path().join("t.json")).unwrap();
    let o = acnet(dir.path(), &["grid", "--model", "t.json", "--kind", "cdf", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn censored_fit_runs_from_point_data() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "200", "4");
    let o = acnet(dir.path(), &["fit", "--train", "data/train.csv", "--test", "data/test.csv", "--loss", "censored", "--censor", "0.1", "--epochs", "2", "--out", "c.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let telemetry = std::fs::read_to_string(dir.path().join("c.telemetry.csv")).unwrap();
    assert_eq!(telemetry.lines().count(), 3);
    assert!(telemetry.starts_with("epoch,train_nll,test_nll,seconds"));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = acnet(dir.path(), &["fit", "--train", "nope.csv", "--out", "m.json"]);
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(dir.path().join("bad.csv"), "0.1,0.2\n0.3,oops\n").unwrap();
    let m = ModelFile { generator: ParametricFamily::independence().into(), dimension: Some(2) };
    m.save(&dir.path().join("i.json")).unwrap();
    let o = acnet(dir.path(), &["eval", "--model", "i.json", "--data", "bad.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn parametric_fit_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "400", "5");
    let o = acnet(dir.path(), &["fit", "--train", "data/train.csv", "--family", "clayton", "--epochs", "200", "--out", "p.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m = ModelFile::load(&dir.path().join("p.json")).unwrap();
    let model = CopulaModel::new(2, m.generator).unwrap();
    assert!(model.cdf(&[0.5, 0.5]).unwrap() > 0.3);
}
