use clap::Parser;
use dbinds_cli::cli::{Cli, Command};
use dbinds_cli::config::PREDICTOR_ENV;
use dbinds_core::PredictorSpec;

fn resolve(extra: &[&str]) -> dbinds_cli::CliResult<dbinds_cli::PipelineConfig> {
    let args = ["dbinds", "extract", "--manifest", "m.jsonl", "--out", "o"].iter().chain(extra.iter());
    match Cli::try_parse_from(args).unwrap().command {
        Command::Extract { cfg, .. } => cfg.resolve(),
        _ => unreachable!(),
    }
}

// Environment mutation is confined to this single test binary and test.
#[test]
fn defaults_then_file_then_env_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cfg.json");
    std::fs::write(&file, r#"{"predictor": "random:1", "inversion_steps": 4, "seed": 5}"#).unwrap();
    let file = file.to_str().unwrap();

    std::env::remove_var(PREDICTOR_ENV);
    let c = resolve(&[]).unwrap();
    assert_eq!((c.predictor, c.inversion_steps), (PredictorSpec::Zero, 10));

    let c = resolve(&["--config", file]).unwrap();
    assert_eq!((c.predictor, c.inversion_steps, c.seed), (PredictorSpec::Random(1), 4, 5));

    std::env::set_var(PREDICTOR_ENV, "random:2");
    assert_eq!(resolve(&["--config", file]).unwrap().predictor, PredictorSpec::Random(2));
    let c = resolve(&["--config", file, "--predictor", "random:3", "--inversion-steps", "7"]).unwrap();
    assert_eq!((c.predictor, c.inversion_steps), (PredictorSpec::Random(3), 7));

    std::env::set_var(PREDICTOR_ENV, "quantum");
    assert_eq!(resolve(&[]).unwrap_err().exit_code(), dbinds_cli::error::EXIT_USAGE);
    std::env::remove_var(PREDICTOR_ENV);

    std::fs::write(dir.path().join("bad.json"), r#"{"predictr": "zero"}"#).unwrap();
    let bad = dir.path().join("bad.json");
    assert!(resolve(&["--config", bad.to_str().unwrap()]).unwrap_err().to_string().contains("predictr"));
}
