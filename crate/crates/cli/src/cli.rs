//! Argument parsing and verb dispatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dbinds_core::manifest::{read_manifest, write_jsonl, InputKind};
use dbinds_core::{FeatureModule, VideoManifestEntry};

use crate::config::PipelineConfig;
use crate::dataset::{read_json, write_json, FeatureSet};
use crate::error::{CliError, CliResult, EXIT_OK};
use crate::extract::extract_entries;
use crate::perturb::{Perturbation, DEFAULT_GRID};
use crate::robustness::robustness_grid;
use crate::sweep::{sweep_steps, DEFAULT_STEPS};
use crate::synth::{synth_dataset, SyntheticSpec, MANIFEST_FILE};
use crate::train::{train, Bundle};

pub const BUNDLE_FILE: &str = "bundle.json";
pub const TRIALS_FILE: &str = "trials.jsonl";
pub const TRAIN_REPORT_FILE: &str = "train_report.json";
pub const EXTRACT_REPORT_FILE: &str = "extract_report.json";

#[derive(Debug, Parser)]
#[command(name = "dbinds", version, about = "Detect generated video from reconstructed initial-noise differences")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags mirroring `PipelineConfig`; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON pipeline configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub target_size: Option<usize>,
    #[arg(long)]
    pub encoder_block: Option<usize>,
    #[arg(long)]
    pub inversion_steps: Option<usize>,
    /// Comma-separated feature modules.
    #[arg(long)]
    pub modules: Option<String>,
    /// module:<p> | topk:<K> | modules:<p>,<p> | all | fuzzy[:<kw>,...]
    #[arg(long)]
    pub strategy: Option<String>,
    /// zero | linear:<c>,... | random:<seed> | tcp:<host>:<port> | exec:<cmd>
    #[arg(long)]
    pub predictor: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Required generated detection rate.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Weight multiplier on the generated class.
    #[arg(long)]
    pub weight_multiplier: Option<f64>,
    #[arg(long)]
    pub val_fraction: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Template with {in}, {out} and {quality}.
    #[arg(long)]
    pub jpeg_transcoder: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        n_real: usize,
        #[arg(long, default_value_t = 100)]
        n_generated: usize,
        #[arg(long, default_value_t = 2)]
        rank_generated: usize,
        #[arg(long, default_value_t = 1.0)]
        noise_scale_real: f64,
        #[arg(long, default_value_t = 0.1)]
        noise_scale_generated: f64,
        /// noise | latents | frames
        #[arg(long, default_value = "noise")]
        kind: String,
        #[arg(long, default_value_t = 8)]
        frames: usize,
        #[arg(long, default_value_t = 32)]
        size: usize,
        #[arg(long, default_value_t = 64)]
        pixel_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Turn a manifest into a feature matrix.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Select features and search the classifier; writes a model bundle.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Score a bundle on a feature set or a manifest.
    Eval {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
        features: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print an aligned text table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Extract, train and evaluate once per inversion step count.
    SweepSteps {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_STEPS)]
        steps: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Evaluate a bundle under pixel-domain perturbations.
    Perturb {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        /// Comma-separated conditions, e.g. blur:1.0,jpeg:95
        #[arg(long, value_delimiter = ',')]
        perturbations: Vec<String>,
        #[arg(long)]
        jpeg_transcoder: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn usage<E: std::fmt::Display>(what: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Usage(format!("{what}: {e}"))
}

impl ConfigArgs {
    /// Defaults, then the config file, then `DBINDS_PREDICTOR`, then flags.
    pub fn resolve(&self) -> CliResult<PipelineConfig> {
        let mut c = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        c.apply_env()?;
        macro_rules! set {
            ($($field:ident => $dst:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $dst = v; })*
            };
        }
        set! {
            frames => c.frames,
            stride => c.stride,
            target_size => c.target_size,
            encoder_block => c.encoder_block,
            inversion_steps => c.inversion_steps,
            seed => c.seed,
            trials => c.optim.trials,
            tau => c.optim.tau,
            weight_multiplier => c.optim.m,
            val_fraction => c.val_fraction,
            workers => c.workers,
        }
        if let Some(t) = &self.jpeg_transcoder {
            c.jpeg_transcoder = Some(t.clone());
        }
        if let Some(s) = &self.strategy {
            c.strategy = s.parse().map_err(usage("--strategy"))?;
        }
        if let Some(p) = &self.predictor {
            c.predictor = p.parse().map_err(usage("--predictor"))?;
        }
        if let Some(m) = &self.modules {
            c.features.modules = parse_modules(m)?;
        }
        c.validate()?;
        Ok(c)
    }
}

pub fn parse_modules(list: &str) -> CliResult<Vec<FeatureModule>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(usage("--modules")))
        .collect()
}

fn parse_kind(s: &str) -> CliResult<InputKind> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(usage("--kind"))
}

pub fn load_manifest(path: &Path) -> CliResult<(Vec<VideoManifestEntry>, PathBuf)> {
    let entries = read_manifest(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((entries, base))
}

fn emit_json<T: serde::Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(p) => write_json(value, p),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(dbinds_core::Error::from)?);
            Ok(())
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Synth {
            out,
            n_real,
            n_generated,
            rank_generated,
            noise_scale_real,
            noise_scale_generated,
            kind,
            frames,
            size,
            pixel_size,
            seed,
        } => {
            let spec = SyntheticSpec {
                n_real,
                n_generated,
                rank_generated,
                noise_scale_real,
                noise_scale_generated,
                kind: parse_kind(&kind)?,
                frames,
                size,
                pixel_size,
                ..Default::default()
            };
            let entries = synth_dataset(&spec, seed, &out)?;
            eprintln!("wrote {} videos to {}", entries.len(), out.join(MANIFEST_FILE).display());
        }
        Command::Extract { manifest, out, cfg } => {
            let cfg = cfg.resolve()?;
            let (entries, base) = load_manifest(&manifest)?;
            let (set, report) = extract_entries(&entries, &base, &cfg, None)?;
            set.save(&out)?;
            write_json(&report, out.join(EXTRACT_REPORT_FILE))?;
            eprintln!(
                "extracted {} x {} features ({} failed)",
                set.matrix.rows(),
                set.matrix.cols(),
                report.failures.len()
            );
        }
        Command::Train { features, out, cfg } => {
            let cfg = cfg.resolve()?;
            let set = FeatureSet::load(&features)?;
            let outcome = train(&set, &cfg)?;
            write_json(&outcome.bundle, out.join(BUNDLE_FILE))?;
            write_jsonl(&outcome.trials, out.join(TRIALS_FILE))?;
            write_json(
                &serde_json::json!({
                    "best": outcome.bundle.best,
                    "selected_features": outcome.bundle.design.selected.len(),
                    "validation": outcome.validation,
                }),
                out.join(TRAIN_REPORT_FILE),
            )?;
            eprintln!(
                "best J = {:.4} (accuracy {:.4}, gdr {:.4}) at threshold {:.6}",
                outcome.bundle.best.objective, outcome.bundle.best.accuracy, outcome.bundle.best.gdr, outcome.bundle.threshold
            );
        }
        Command::Eval {
            bundle,
            features,
            manifest,
            out,
            table,
        } => {
            let bundle: Bundle = read_json(&bundle)?;
            bundle.check()?;
            let set = match (features, manifest) {
                (Some(f), _) => FeatureSet::load(f)?,
                (None, Some(m)) => {
                    let mut cfg = bundle.config.clone();
                    cfg.apply_env()?;
                    let (entries, base) = load_manifest(&m)?;
                    extract_entries(&entries, &base, &cfg, None)?.0
                }
                (None, None) => return Err(CliError::Usage("--features or --manifest is required".into())),
            };
            let report = bundle.evaluate(&set)?;
            if let Some(p) = &out {
                write_json(&report, p)?;
            }
            if table {
                print!("{}", report.to_table());
            } else if out.is_none() {
                emit_json(&report, None)?;
            }
        }
        Command::SweepSteps { manifest, steps, out, cfg } => {
            let cfg = cfg.resolve()?;
            if steps.is_empty() || steps.contains(&0) {
                return Err(CliError::Usage("--steps needs positive step counts".into()));
            }
            let (entries, base) = load_manifest(&manifest)?;
            let report = sweep_steps(&entries, &base, &cfg, &steps)?;
            write_json(&report, &out)?;
            for r in &report.rows {
                match &r.report {
                    Some(e) => eprintln!("steps {:>3}  {:>9.4}s  accuracy {:.4}  gdr {:.4}", r.steps, r.inversion_seconds, e.accuracy, e.gdr),
                    None => eprintln!("steps {:>3}  failed: {}", r.steps, r.error.as_deref().unwrap_or("")),
                }
            }
        }
        Command::Perturb {
            manifest,
            bundle,
            perturbations,
            jpeg_transcoder,
            out,
        } => {
            let bundle: Bundle = read_json(&bundle)?;
            let grid: Vec<Perturbation> = if perturbations.is_empty() {
                DEFAULT_GRID.to_vec()
            } else {
                perturbations.iter().map(|p| p.parse()).collect::<CliResult<_>>()?
            };
            let (entries, base) = load_manifest(&manifest)?;
            let transcoder = jpeg_transcoder.or_else(|| bundle.config.jpeg_transcoder.clone());
            let report = robustness_grid(&entries, &base, &bundle, &grid, transcoder.as_deref())?;
            write_json(&report, &out)?;
            eprint!("{}", report.to_table());
        }
    }
    Ok(())
}

/// Parse `args`, run the verb and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
