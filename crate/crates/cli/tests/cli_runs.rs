use std::path::{Path, PathBuf};

use dbinds_cli::cli::run;
use dbinds_cli::dataset::{read_json, FeatureSet};
use dbinds_cli::error::{EXIT_DATA, EXIT_OK, EXIT_PREDICTOR, EXIT_USAGE};
use dbinds_cli::extract::ExtractReport;
use dbinds_core::classify::EvalReport;
use dbinds_core::manifest::{read_manifest, write_manifest};

fn dbinds(args: &[&str]) -> i32 {
    run(std::iter::once("dbinds").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, kind: &str, n: usize, size: usize) -> PathBuf {
    let n = n.to_string();
    let size = size.to_string();
    assert_eq!(
        dbinds(&["synth", "--out", p(dir), "--n-real", &n, "--n-generated", &n, "--kind", kind, "--size", &size, "--seed", "3"]),
        EXIT_OK
    );
    dir.join("manifest.jsonl")
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), "noise", 4, 8);
    let out = dir.path().join("f");
    assert_eq!(dbinds(&["frobnicate"]), EXIT_USAGE);
    assert_eq!(dbinds(&["extract", "--manifest", p(&m)]), EXIT_USAGE);
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out), "--strategy", "nope"]), EXIT_USAGE);
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out), "--predictor", "gpu:0"]), EXIT_USAGE);
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out), "--modules", "energy,nothing"]), EXIT_USAGE);
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out), "--val-fraction", "1.5"]), EXIT_USAGE);
    assert_eq!(dbinds(&["sweep-steps", "--manifest", p(&m), "--out", p(&out), "--steps", "0,5"]), EXIT_USAGE);
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let missing = dir.path().join("absent.jsonl");
    assert_eq!(dbinds(&["extract", "--manifest", p(&missing), "--out", p(&out)]), EXIT_DATA);
    std::fs::write(&missing, "{not json}\n").unwrap();
    assert_eq!(dbinds(&["extract", "--manifest", p(&missing), "--out", p(&out)]), EXIT_DATA);
    assert_eq!(dbinds(&["train", "--features", p(&out), "--out", p(&out)]), EXIT_DATA);
}

#[test]
fn unreachable_predictor_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), "latents", 3, 8);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let pred = format!("tcp:{addr}");
    let out = dir.path().join("f");
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out), "--predictor", &pred]), EXIT_PREDICTOR);
}

#[test]
fn pipeline_is_deterministic_and_eval_reports() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), "noise", 30, 16);
    let (f1, f2) = (dir.path().join("f1"), dir.path().join("f2"));
    for f in [&f1, &f2] {
        assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(f), "--workers", "2"]), EXIT_OK);
    }
    assert_eq!(std::fs::read(f1.join("features.ltns")).unwrap(), std::fs::read(f2.join("features.ltns")).unwrap());
    let (b1, b2) = (dir.path().join("b1"), dir.path().join("b2"));
    for b in [&b1, &b2] {
        assert_eq!(dbinds(&["train", "--features", p(&f1), "--out", p(b), "--trials", "6", "--seed", "9"]), EXIT_OK);
    }
    let bundle = std::fs::read_to_string(b1.join("bundle.json")).unwrap();
    assert_eq!(bundle, std::fs::read_to_string(b2.join("bundle.json")).unwrap());
    assert_eq!(std::fs::read_to_string(b1.join("trials.jsonl")).unwrap().lines().count(), 6);
    let echoed: serde_json::Value = serde_json::from_str(&bundle).unwrap();
    assert_eq!(echoed["config"]["seed"], 9);
    assert_eq!(echoed["config"]["optim"]["seed"], 9);

    let report_path = dir.path().join("eval.json");
    let bundle_path = b1.join("bundle.json");
    assert_eq!(dbinds(&["eval", "--bundle", p(&bundle_path), "--features", p(&f1), "--out", p(&report_path)]), EXIT_OK);
    let from_features: EvalReport = read_json(&report_path).unwrap();
    assert_eq!(from_features.n, 60);
    assert_eq!(from_features.per_source.len(), 2);
    assert_eq!(dbinds(&["eval", "--bundle", p(&bundle_path), "--manifest", p(&m), "--out", p(&report_path)]), EXIT_OK);
    let from_manifest: EvalReport = read_json(&report_path).unwrap();
    assert_eq!(from_features, from_manifest);
    assert_eq!(dbinds(&["eval", "--bundle", p(&bundle_path), "--features", p(&f1), "--manifest", p(&m)]), EXIT_USAGE);
}

#[test]
fn eval_names_missing_features() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), "noise", 12, 8);
    let (full, energy, b) = (dir.path().join("full"), dir.path().join("energy"), dir.path().join("b"));
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&full), "--modules", "energy,texture"]), EXIT_OK);
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&energy), "--modules", "energy"]), EXIT_OK);
    assert_eq!(dbinds(&["train", "--features", p(&full), "--out", p(&b), "--trials", "3", "--strategy", "module:texture"]), EXIT_OK);
    let bundle = b.join("bundle.json");
    assert_eq!(dbinds(&["eval", "--bundle", p(&bundle), "--features", p(&energy)]), EXIT_DATA);
    let err = dbinds_cli::train::FeatureDesign::design_matrix(
        &read_json::<dbinds_cli::train::Bundle>(&bundle).unwrap().design,
        &FeatureSet::load(&energy).unwrap().matrix,
    )
    .unwrap_err();
    assert!(err.to_string().contains("texture."), "{err}");
}

#[test]
fn corrupt_videos_are_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path(), "noise", 5, 8);
    let entries = read_manifest(&m).unwrap();
    std::fs::write(entries[1].resolve(dir.path()), b"LTNS garbage").unwrap();
    let out = dir.path().join("f");
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out)]), EXIT_OK);
    let rep: ExtractReport = read_json(out.join("extract_report.json")).unwrap();
    assert_eq!((rep.total, rep.succeeded), (10, 9));
    assert_eq!(rep.failures[0].id, entries[1].id);
    assert!(!rep.failures[0].predictor);
    assert_eq!(FeatureSet::load(&out).unwrap().samples.len(), 9);

    for e in &entries[..6] {
        std::fs::write(e.resolve(dir.path()), b"bad").unwrap();
    }
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out)]), EXIT_DATA);
    write_manifest(&[], &m).unwrap();
    assert_eq!(dbinds(&["extract", "--manifest", p(&m), "--out", p(&out)]), EXIT_DATA);
}
