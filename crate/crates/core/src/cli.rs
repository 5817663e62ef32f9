//! The `gpnam` command-line tool.
//!
//! Exit codes: 0 success, 1 usage, 2 data, 3 solver not converged (model
//! still written), 4 numeric breakdown. Every file is written atomically.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{
    load_csv, read_feature_rows, read_labeled_rows, synth_additive, IngestionReport, TrueShape,
};
use crate::error::{exit, invalid, Error, Result};
use crate::fsutil::{open_input, write_atomic};
use crate::metrics::Metric;
use crate::model::{self, format_sig9, GpnamModel, ShapeTable, Task};
use crate::rff::{approx_kernel, build_basis, mc_verify_integral_identity, rbf_kernel, BasisMode};
use crate::solvers::{FitConfig, SolverReport, WeightInit};
use crate::train::{self, Bandwidth, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Train,
    Predict,
    Evaluate,
    Shapes,
    KernelCheck,
    Synth,
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<BasisMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Command-line arguments. Unset flags fall back to the JSON config file,
/// then to built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "gpnam", version, about = "Gaussian process neural additive models")]
pub struct Args {
    pub command: Command,
    /// Input CSV with a header row.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Target column name.
    #[arg(long)]
    pub target: Option<String>,
    /// reg or clf.
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
    /// Basis size (default 100).
    #[arg(long = "S", value_name = "INT")]
    pub basis_size: Option<usize>,
    /// mc or grid (default grid).
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<BasisMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Width factor, or `auto` to search {0.25, 0.5, 1, 2, 4} on validation.
    #[arg(long, value_name = "FLOAT|auto")]
    pub bandwidth_scale: Option<String>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Train, validation and test fractions.
    #[arg(long, value_name = "A,B,C")]
    pub split: Option<String>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Shape grid size (default 256).
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Pairwise terms as zero-based feature indices.
    #[arg(long, value_name = "i:j,...")]
    pub interactions: Option<String>,
    /// JSON config file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub verbose: bool,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr_decay: Option<f64>,
    #[arg(long)]
    pub sgd_tol: Option<f64>,
    #[arg(long)]
    pub cg_tol: Option<f64>,
    #[arg(long)]
    pub cg_max_iter: Option<usize>,
    #[arg(long)]
    pub regularize_bias: bool,
    /// Scale of a seeded Gaussian SGD initialization (default: zeros).
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// Rows for `synth` (default 1000).
    #[arg(long)]
    pub n: Option<usize>,
    /// Features for `synth` (default 4).
    #[arg(long)]
    pub d: Option<usize>,
    /// Noise standard deviation for `synth` (default 0.1).
    #[arg(long)]
    pub noise: Option<f64>,
    /// Histogram bins for the density CSV (default 32).
    #[arg(long)]
    pub bins: Option<usize>,
    /// Density CSV written by `shapes` (needs --data).
    #[arg(long)]
    pub density_out: Option<PathBuf>,
}

/// Config file contents. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub task: Option<Task>,
    #[serde(rename = "S")]
    pub basis_size: Option<usize>,
    pub mode: Option<BasisMode>,
    pub seed: Option<u64>,
    pub bandwidth_scale: Option<Bandwidth>,
    pub lambda: Option<f64>,
    pub split: Option<[f64; 3]>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub grid_points: Option<usize>,
    pub interactions: Option<Vec<[usize; 2]>>,
    pub verbose: Option<bool>,
    pub fit: Option<FitConfig>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub noise: Option<f64>,
    pub bins: Option<usize>,
    pub density_out: Option<PathBuf>,
}

/// Fully resolved run configuration, echoed into JSON outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub data: Option<PathBuf>,
    pub target: Option<String>,
    pub task: Task,
    #[serde(rename = "S")]
    pub basis_size: usize,
    pub mode: BasisMode,
    pub seed: u64,
    pub bandwidth_scale: Bandwidth,
    pub split: [f64; 3],
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub grid_points: usize,
    pub interactions: Vec<[usize; 2]>,
    pub fit: FitConfig,
    pub n: usize,
    pub d: usize,
    pub noise: f64,
    pub bins: usize,
    pub density_out: Option<PathBuf>,
    pub verbose: bool,
}

fn parse_split(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| invalid(format!("--split expects three numbers A,B,C, got '{s}'")))?;
    <[f64; 3]>::try_from(parts)
        .map_err(|_| invalid(format!("--split expects three numbers A,B,C, got '{s}'")))
}

fn parse_interactions(s: &str) -> Result<Vec<[usize; 2]>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (i, j) = p
                .split_once(':')
                .ok_or_else(|| invalid(format!("interaction '{p}' is not of the form i:j")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| invalid(format!("interaction '{p}' needs integer indices")))
            };
            Ok([parse(i)?, parse(j)?])
        })
        .collect()
}

impl RunConfig {
    /// Merges flags over the config file over defaults and checks that the
    /// command has what it needs.
    pub fn resolve(args: &Args) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => ConfigFile::default(),
        };
        let mut fit = file.fit.unwrap_or_default();
        let seed = args.seed.or(file.seed).unwrap_or(0);
        fit.seed = seed;
        if let Some(v) = args.lambda.or(file.lambda) {
            fit.lambda = v;
        }
        if let Some(v) = args.lr {
            fit.sgd_lr = v;
        }
        if let Some(v) = args.batch {
            fit.sgd_batch = v;
        }
        if let Some(v) = args.epochs {
            fit.sgd_epochs = v;
        }
        if let Some(v) = args.lr_decay {
            fit.sgd_lr_decay = v;
        }
        if let Some(v) = args.sgd_tol {
            fit.sgd_tol = v;
        }
        if let Some(v) = args.cg_tol {
            fit.cg_tol = v;
        }
        if args.cg_max_iter.is_some() {
            fit.cg_max_iter = args.cg_max_iter;
        }
        if args.regularize_bias {
            fit.regularize_bias = true;
        }
        if let Some(scale) = args.init_scale {
            fit.init = WeightInit::Gaussian { scale, seed };
        }
        fit.validate()?;

        let bandwidth = match &args.bandwidth_scale {
            Some(s) => s.parse()?,
            None => file.bandwidth_scale.unwrap_or(Bandwidth::Fixed(1.0)),
        };
        let split = match &args.split {
            Some(s) => parse_split(s)?,
            None => file.split.unwrap_or([0.8, 0.1, 0.1]),
        };
        let interactions = match &args.interactions {
            Some(s) => parse_interactions(s)?,
            None => file.interactions.unwrap_or_default(),
        };
        let cfg = Self {
            command: args.command,
            data: args.data.clone().or(file.data),
            target: args.target.clone().or(file.target),
            task: args.task.or(file.task).unwrap_or(Task::Regression),
            basis_size: args.basis_size.or(file.basis_size).unwrap_or(100),
            mode: args.mode.or(file.mode).unwrap_or(BasisMode::Grid),
            seed,
            bandwidth_scale: bandwidth,
            split,
            model: args.model.clone().or(file.model),
            out: args.out.clone().or(file.out),
            grid_points: args.grid_points.or(file.grid_points).unwrap_or(256),
            interactions,
            fit,
            n: args.n.or(file.n).unwrap_or(1000),
            d: args.d.or(file.d).unwrap_or(4),
            noise: args.noise.or(file.noise).unwrap_or(0.1),
            bins: args.bins.or(file.bins).unwrap_or(32),
            density_out: args.density_out.clone().or(file.density_out),
            verbose: args.verbose || file.verbose.unwrap_or(false),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let need = |present: bool, flag: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{} requires --{flag}",
                    serde_json::to_value(self.command)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default()
                )))
            }
        };
        if self.basis_size == 0 {
            return Err(invalid("--S must be at least 1"));
        }
        match self.command {
            Command::Train => {
                need(self.data.is_some(), "data")?;
                need(self.target.is_some(), "target")?;
                need(self.model.is_some(), "model")?;
            }
            Command::Predict => {
                need(self.model.is_some(), "model")?;
                need(self.data.is_some(), "data")?;
            }
            Command::Evaluate => {
                need(self.model.is_some(), "model")?;
                need(self.data.is_some(), "data")?;
                need(self.target.is_some(), "target")?;
            }
            Command::Shapes => {
                need(self.model.is_some(), "model")?;
                need(self.out.is_some(), "out")?;
                if self.grid_points < 2 {
                    return Err(invalid("--grid-points must be at least 2"));
                }
                if self.density_out.is_some() {
                    need(self.data.is_some(), "data")?;
                    if self.bins == 0 {
                        return Err(invalid("--bins must be at least 1"));
                    }
                }
            }
            Command::KernelCheck => {}
            Command::Synth => {
                need(self.out.is_some(), "out")?;
                if self.n == 0 || self.d == 0 {
                    return Err(invalid("--n and --d must be at least 1"));
                }
            }
        }
        Ok(())
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            basis_size: self.basis_size,
            mode: self.mode,
            seed: self.seed,
            bandwidth: self.bandwidth_scale,
            split: self.split,
            split_seed: self.seed,
            interactions: self.interactions.iter().map(|p| (p[0], p[1])).collect(),
            fit: self.fit.clone(),
        }
    }
}

fn report_ingestion(cfg: &RunConfig, report: &IngestionReport) -> Result<()> {
    if cfg.verbose {
        eprintln!("{}", serde_json::to_string(report)?);
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if let Some(path) = out {
        write_atomic(path, text.as_bytes())?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn csv_bytes(rows: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut buf);
        rows(&mut w)?;
        w.flush()?;
    }
    Ok(buf)
}

#[derive(Serialize)]
struct MetricRecord<'a> {
    metric: Metric,
    value: f64,
    n: usize,
    dataset: &'a str,
    model: &'a Path,
}

#[derive(Serialize)]
struct Candidate {
    factor: f64,
    validation_score: f64,
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    config: &'a RunConfig,
    model: &'a Path,
    split_sizes: [usize; 3],
    bandwidth_scale: f64,
    bandwidth_candidates: Vec<Candidate>,
    param_count: usize,
    solver: &'a SolverReport,
    metrics: Vec<MetricRecord<'a>>,
}

fn cmd_train(cfg: &RunConfig) -> Result<i32> {
    let data_path = cfg.data.as_deref().expect("validated");
    let model_path = cfg.model.as_deref().expect("validated");
    let (dataset, report) = load_csv(data_path, cfg.target.as_deref().expect("validated"), cfg.task)?;
    report_ingestion(cfg, &report)?;
    let out = train::train(&dataset, &cfg.train_config())?;
    model::save(&out.model, model_path)?;

    let mut metrics = Vec::new();
    for (name, list) in [("validation", &out.validation), ("test", &out.test)] {
        metrics.extend(list.iter().map(|e| MetricRecord {
            metric: e.metric,
            value: e.value,
            n: e.n,
            dataset: name,
            model: model_path,
        }));
    }
    let summary = TrainSummary {
        config: cfg,
        model: model_path,
        split_sizes: out.split_sizes,
        bandwidth_scale: out.model.bandwidth_scale(),
        bandwidth_candidates: out
            .bandwidth_candidates
            .iter()
            .map(|&(factor, validation_score)| Candidate {
                factor,
                validation_score,
            })
            .collect(),
        param_count: out.model.param_count(),
        solver: &out.report,
        metrics,
    };
    emit_json(&summary, cfg.out.as_deref())?;
    if out.report.converged {
        Ok(exit::OK)
    } else {
        log::warn!("solver did not converge; model written and flagged");
        Ok(exit::NOT_CONVERGED)
    }
}

fn count_extrapolated(model: &GpnamModel, x: &crate::matrix::Matrix) -> usize {
    x.rows()
        .filter(|row| {
            row.iter()
                .zip(model.feature_ranges())
                .any(|(v, [lo, hi])| v < lo || v > hi)
        })
        .count()
}

fn cmd_predict(cfg: &RunConfig) -> Result<i32> {
    let model = model::load(cfg.model.as_deref().expect("validated"))?;
    let rows = read_feature_rows(
        open_input(cfg.data.as_deref().expect("validated"))?,
        model.feature_names(),
        model.encodings(),
    )?;
    if cfg.verbose {
        eprintln!(
            "{}",
            serde_json::json!({"rows_read": rows.rows_read, "rows_dropped": rows.rows_dropped})
        );
        let outside = count_extrapolated(&model, &rows.x);
        if outside > 0 {
            log::warn!("{outside} rows lie outside the training range of at least one feature");
        }
    }
    let pred = model.predict(&rows.x)?;
    let bytes = csv_bytes(|w| {
        w.write_record(["row_id", "prediction"])?;
        for (id, p) in rows.row_ids.iter().zip(&pred) {
            w.write_record([id.to_string(), p.to_string()])?;
        }
        Ok(())
    })?;
    match cfg.out.as_deref() {
        Some(path) => write_atomic(path, &bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(exit::OK)
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    config: &'a RunConfig,
    metrics: Vec<MetricRecord<'a>>,
}

fn cmd_evaluate(cfg: &RunConfig) -> Result<i32> {
    let model_path = cfg.model.as_deref().expect("validated");
    let model = model::load(model_path)?;
    let (data, report) = read_labeled_rows(
        open_input(cfg.data.as_deref().expect("validated"))?,
        cfg.target.as_deref().expect("validated"),
        model.task(),
        model.feature_names(),
        model.encodings(),
    )?;
    report_ingestion(cfg, &report)?;
    let results = train::evaluate(&model, &data)?;
    let dataset = cfg
        .data
        .as_deref()
        .and_then(Path::to_str)
        .unwrap_or("data");
    let summary = EvalSummary {
        config: cfg,
        metrics: results
            .iter()
            .map(|e| MetricRecord {
                metric: e.metric,
                value: e.value,
                n: e.n,
                dataset,
                model: model_path,
            })
            .collect(),
    };
    emit_json(&summary, cfg.out.as_deref())?;
    Ok(exit::OK)
}

/// `k` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..k)
            .map(|i| {
                if i == k - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (k - 1) as f64
                }
            })
            .collect(),
    }
}

/// Shape tables of every feature over its training range.
pub fn shape_tables(model: &GpnamModel, grid_points: usize) -> Result<Vec<ShapeTable>> {
    if grid_points < 2 {
        return Err(invalid("grid needs at least 2 points"));
    }
    (0..model.n_features())
        .map(|i| {
            let [lo, hi] = model.feature_ranges()[i];
            model.shape_function(i, &linspace(lo, hi, grid_points), true)
        })
        .collect()
}

/// Histogram counts of `values` over `bins` equal bins spanning `[lo, hi]`;
/// values outside are ignored, `hi` falls in the last bin.
pub fn histogram(values: impl Iterator<Item = f64>, lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    let width = (hi - lo) / bins as f64;
    for v in values {
        if v < lo || v > hi {
            continue;
        }
        let k = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    counts
}

#[derive(Serialize)]
struct ShapesSummary<'a> {
    config: &'a RunConfig,
    shapes: &'a Path,
    density: Option<&'a Path>,
    features: usize,
}

fn cmd_shapes(cfg: &RunConfig) -> Result<i32> {
    let model = model::load(cfg.model.as_deref().expect("validated"))?;
    let out = cfg.out.as_deref().expect("validated");
    let tables = shape_tables(&model, cfg.grid_points)?;
    let mut buf = Vec::new();
    ShapeTable::write_csv(&tables, &mut buf)?;

    let density = match cfg.density_out.as_deref() {
        Some(path) => {
            let rows = read_feature_rows(
                open_input(cfg.data.as_deref().expect("validated"))?,
                model.feature_names(),
                model.encodings(),
            )?;
            let bytes = csv_bytes(|w| {
                w.write_record(["feature", "bin_left", "bin_right", "count"])?;
                for (i, name) in model.feature_names().iter().enumerate() {
                    let [lo, hi] = model.feature_ranges()[i];
                    let counts = histogram(rows.x.column(i), lo, hi, cfg.bins);
                    let edges = linspace(lo, hi, cfg.bins + 1);
                    for (k, c) in counts.iter().enumerate() {
                        w.write_record([
                            name.as_str(),
                            &format_sig9(edges[k]),
                            &format_sig9(edges[k + 1]),
                            &c.to_string(),
                        ])?;
                    }
                }
                Ok(())
            })?;
            Some((path, bytes))
        }
        None => None,
    };
    write_atomic(out, &buf)?;
    if let Some((path, bytes)) = &density {
        write_atomic(path, bytes)?;
    }
    emit_json(
        &ShapesSummary {
            config: cfg,
            shapes: out,
            density: density.as_ref().map(|(p, _)| *p),
            features: tables.len(),
        },
        None,
    )?;
    Ok(exit::OK)
}

/// Probe pairs and sizes used by `kernel-check`.
pub const KERNEL_CHECK_SIZES: [usize; 4] = [50, 100, 500, 2000];
pub const KERNEL_CHECK_PROBES: usize = 200;
const IDENTITY_PROBES: usize = 10;
const IDENTITY_SAMPLES: usize = 200_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSizeReport {
    #[serde(rename = "S")]
    pub basis_size: usize,
    pub max_abs_error: f64,
    pub median_abs_error: f64,
    /// Largest `|φ(x)ᵀφ(x) − 1|` over the probe points.
    pub diagonal_max_abs_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub probes: usize,
    pub samples: usize,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelCheck {
    pub mode: BasisMode,
    pub seed: u64,
    pub bandwidth: f64,
    pub probes: usize,
    pub probe_range: [f64; 2],
    pub sizes: Vec<KernelSizeReport>,
    pub integral_identity: IdentityReport,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Kernel approximation errors against the exact RBF kernel on a fixed,
/// seeded probe set in `[−3, 3]²` with `b = 1`.
pub fn kernel_check(mode: BasisMode, seed: u64) -> Result<KernelCheck> {
    use rand::Rng;
    let mut rng = crate::rff::seeded_rng(seed, 6);
    let probes: Vec<(f64, f64)> = (0..KERNEL_CHECK_PROBES)
        .map(|_| (rng.random_range(-3.0..=3.0), rng.random_range(-3.0..=3.0)))
        .collect();
    let b = 1.0;
    let mut sizes = Vec::new();
    for &s in &KERNEL_CHECK_SIZES {
        let basis = build_basis(s, mode, seed)?;
        let mut errs = Vec::with_capacity(probes.len());
        let mut diag: f64 = 0.0;
        for &(x, xp) in &probes {
            let exact = rbf_kernel(&[x], &[xp], b)?;
            errs.push((approx_kernel(&basis, x, xp, b)? - exact).abs());
            diag = diag.max((approx_kernel(&basis, x, x, b)? - 1.0).abs());
        }
        sizes.push(KernelSizeReport {
            basis_size: s,
            max_abs_error: errs.iter().copied().fold(0.0, f64::max),
            median_abs_error: median(errs),
            diagonal_max_abs_error: diag,
        });
    }
    let mut id_err: f64 = 0.0;
    for (k, &(x, xp)) in probes.iter().take(IDENTITY_PROBES).enumerate() {
        let est = mc_verify_integral_identity(b, x, xp, IDENTITY_SAMPLES, seed.wrapping_add(k as u64))?;
        id_err = id_err.max((est - rbf_kernel(&[x], &[xp], b)?).abs());
    }
    Ok(KernelCheck {
        mode,
        seed,
        bandwidth: b,
        probes: probes.len(),
        probe_range: [-3.0, 3.0],
        sizes,
        integral_identity: IdentityReport {
            probes: IDENTITY_PROBES,
            samples: IDENTITY_SAMPLES,
            max_abs_error: id_err,
        },
    })
}

fn cmd_kernel_check(cfg: &RunConfig) -> Result<i32> {
    #[derive(Serialize)]
    struct Out<'a> {
        config: &'a RunConfig,
        #[serde(flatten)]
        check: KernelCheck,
    }
    emit_json(
        &Out {
            config: cfg,
            check: kernel_check(cfg.mode, cfg.seed)?,
        },
        cfg.out.as_deref(),
    )?;
    Ok(exit::OK)
}

fn cmd_synth(cfg: &RunConfig) -> Result<i32> {
    let synth = synth_additive(cfg.n, cfg.d, cfg.noise, cfg.seed)?;
    let ds = &synth.dataset;
    let bytes = csv_bytes(|w| {
        let mut header = ds.feature_names.clone();
        header.push("y".into());
        w.write_record(&header)?;
        for r in 0..ds.n_rows() {
            let mut rec: Vec<String> = ds.x.row(r).iter().map(f64::to_string).collect();
            rec.push(ds.y[r].to_string());
            w.write_record(&rec)?;
        }
        Ok(())
    })?;
    write_atomic(cfg.out.as_deref().expect("validated"), &bytes)?;
    #[derive(Serialize)]
    struct Out<'a> {
        config: &'a RunConfig,
        rows: usize,
        shapes: &'a [TrueShape],
    }
    emit_json(
        &Out {
            config: cfg,
            rows: ds.n_rows(),
            shapes: &synth.shapes,
        },
        None,
    )?;
    Ok(exit::OK)
}

/// Runs one resolved command and returns its exit code.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    match cfg.command {
        Command::Train => cmd_train(cfg),
        Command::Predict => cmd_predict(cfg),
        Command::Evaluate => cmd_evaluate(cfg),
        Command::Shapes => cmd_shapes(cfg),
        Command::KernelCheck => cmd_kernel_check(cfg),
        Command::Synth => cmd_synth(cfg),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Errors go to stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if args.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    let result = RunConfig::resolve(&args).and_then(|cfg| run(&cfg));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gpnam: {e}");
            e.exit_code()
        }
    }
}
