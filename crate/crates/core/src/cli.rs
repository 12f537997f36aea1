//! Command-line driver: `fit`, `eval`, `cv`, `metrics`, `gen` and `demo`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::cloud::PointCloud;
use crate::error::{Result, WqisaError};
use crate::fit::{
    convexity_along, fit, iqr_outlier_filter, monotone_along, EmptySupportPolicy, WqisaModel,
};
use crate::inference::{
    coefficient_covariance, kfold_cv, residual_sigma_estimate, se_band, variance_at,
    CoefficientCovariance, CvParameter, CvSetup, NoiseModel,
};
use crate::io::{
    format_cloud, gen_synthetic, load_cloud, save_cloud, CloudFormat, FitConfig, SyntheticKind,
    SyntheticParams,
};
use crate::metrics::{
    band_coverage, directed_hausdorff_normalized, dispersion_normalized, jaccard_points,
    Normalization,
};
use crate::spline::TensorSplineSpace;
use crate::weights::WeightSpec;

#[derive(Debug, Parser)]
#[command(
    name = "wqisa",
    version,
    about = "Weighted quasi-interpolant spline approximation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// `--config` plus per-field overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Degree per axis (one value is broadcast).
    #[arg(long, value_delimiter = ',')]
    pub degree: Option<Vec<usize>>,
    /// Basis functions per axis (one value is broadcast).
    #[arg(long = "n", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Weight, e.g. `knn:k=9`, `characteristic:r=0.1`, `gaussian:sigma=0.2`, `idw`.
    #[arg(long)]
    pub weight: Option<WeightSpec>,
    /// Empty-support policy: `error` or `nearest`.
    #[arg(long)]
    pub policy: Option<EmptySupportPolicy>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Significance of the standard-error band.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Known noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Domain box `a1:b1,a2:b2,...`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Drop points outside the domain instead of clipping them.
    #[arg(long)]
    pub drop_outside: bool,
    /// Remove residual outliers with a quartile filter before fitting.
    #[arg(long)]
    pub outlier_filter: bool,
    #[arg(long)]
    pub iqr_factor: Option<f64>,
}

fn parse_domain(text: &str) -> Result<Vec<(f64, f64)>> {
    text.split(',')
        .map(|axis| {
            let (a, b) = axis
                .split_once(':')
                .ok_or_else(|| WqisaError::InvalidParameter(format!("bad domain axis '{axis}'")))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| WqisaError::InvalidParameter(format!("bad domain bound '{s}'")))
            };
            Ok((num(a)?, num(b)?))
        })
        .collect()
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<FitConfig> {
        let mut c = match &self.config {
            Some(path) => FitConfig::load(path)?,
            None => FitConfig::default(),
        };
        if let Some(v) = &self.degree {
            c.degrees = v.clone();
        }
        if let Some(v) = &self.n {
            c.n = v.clone();
        }
        if let Some(w) = self.weight {
            c.weight = w;
        }
        if let Some(p) = self.policy {
            c.empty_support = p;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(a) = self.alpha {
            c.alpha = a;
        }
        if let Some(s) = self.sigma {
            c.sigma_eps = Some(s);
        }
        if let Some(d) = &self.domain {
            c.domain = Some(parse_domain(d)?);
        }
        c.drop_outside |= self.drop_outside;
        c.outlier_filter |= self.outlier_filter;
        if let Some(f) = self.iqr_factor {
            c.iqr_factor = f;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a cloud; writes the model JSON and a report JSON.
    Fit {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        format: CloudFormat,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Model output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report output path (defaults next to the model).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample a model on a regular grid: `u_1..u_d,f,var,lo,hi`.
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// Cloud the model was fitted on (needed for the variance).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "auto")]
        format: CloudFormat,
        /// Grid points per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-fold cross-validation over `n` or `k`.
    Cv {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "auto")]
        format: CloudFormat,
        /// `n` (basis size) or `k` (neighbours).
        #[arg(long, default_value = "n")]
        param: CvParameter,
        /// Candidates: `lo..hi` (inclusive) or a comma list.
        #[arg(long)]
        candidates: Option<String>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// CV curve CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a cloud against a model or against a second cloud.
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "auto")]
        format: CloudFormat,
        #[arg(long, conflicts_with = "other")]
        model: Option<PathBuf>,
        #[arg(long)]
        other: Option<PathBuf>,
        /// Residual normalization: none, max or range.
        #[arg(long, default_value = "none")]
        normalize: Normalization,
        /// Jaccard snapping cell size.
        #[arg(long)]
        cell: Option<f64>,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic cloud.
    Gen {
        /// sine, sine_outliers or variable_noise.
        #[arg(long, default_value = "sine")]
        kind: SyntheticKind,
        #[arg(long, default_value_t = 300)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        outlier_fraction: Option<f64>,
        #[arg(long)]
        outlier_magnitude: Option<f64>,
        #[arg(long, default_value = "xyz")]
        format: CloudFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// End-to-end bias-variance experiment on `sin(pi x)` data.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        count: usize,
        #[arg(long, default_value_t = DEMO_SIGMA)]
        sigma: f64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Output directory.
        #[arg(long, default_value = "demo")]
        out: PathBuf,
    },
}

/// Noise level used by `demo`.
pub const DEMO_SIGMA: f64 = 1.0;

/// Machine-readable error object written on failure.
pub fn error_json(err: &WqisaError) -> String {
    json!({"error": {"kind": err.kind(), "message": err.to_string()}}).to_string()
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| WqisaError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn input_cloud(
    input: Option<&Path>,
    config: &FitConfig,
    format: CloudFormat,
) -> Result<PointCloud> {
    let path = input
        .or(config.input.as_deref())
        .ok_or_else(|| WqisaError::InvalidParameter("no input cloud given".into()))?;
    load_cloud(path, format)
}

fn load_model(path: &Path) -> Result<WqisaModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| WqisaError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| WqisaError::Parse {
        line: e.line(),
        message: e.to_string(),
    })
}

fn noise_for(config: &FitConfig, model: &WqisaModel, cloud: &PointCloud) -> Result<NoiseModel> {
    match config.sigma_eps {
        Some(s) => NoiseModel::new(s),
        None => NoiseModel::new(residual_sigma_estimate(model, cloud)?),
    }
}

fn covariance_for(
    model: &WqisaModel,
    cloud: &PointCloud,
    noise: NoiseModel,
) -> Result<CoefficientCovariance> {
    coefficient_covariance(cloud, model.space(), &model.weight, model.policy, noise)
}

/// Outcome of `fit`: the model plus the report object.
pub struct FitRun {
    pub model: WqisaModel,
    pub report: Value,
}

/// Fits `cloud` under `config` and assembles the report.
pub fn fit_with_report(cloud: &PointCloud, config: &FitConfig, load_secs: f64) -> Result<FitRun> {
    let start = Instant::now();
    let space = config.space_for(cloud)?;
    let policy = config.policy();
    let (used, removed) = if config.outlier_filter {
        let r = iqr_outlier_filter(cloud, &space, &config.weight, policy, config.iqr_factor)?;
        let removed = r.removed.len();
        (r.cloud, removed)
    } else {
        (cloud.clone(), 0)
    };
    let filter_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let model = fit(&used, &space, &config.weight, policy)?;
    let fit_secs = start.elapsed().as_secs_f64();
    for w in &model.warnings {
        log::warn!("{w}");
    }
    let predicted = (0..used.len())
        .map(|i| model.evaluate_clamped(used.point(i)))
        .collect::<Result<Vec<f64>>>()?;
    let errors = dispersion_normalized(used.responses(), &predicted, Normalization::None)?;
    let global = model.global_bounds(&used);
    let axes = space.ndim();
    let monotone = (0..axes)
        .map(|a| monotone_along(model.coefficients(), &space, a))
        .collect::<Result<Vec<_>>>()?;
    let convex = (0..axes)
        .map(|a| convexity_along(model.coefficients(), &space, a))
        .collect::<Result<Vec<_>>>()?;
    let report = json!({
        "config": config,
        "error_report": errors,
        "bounds": {
            "lo": global.lo,
            "hi": global.hi,
            "coefficients_within": global.coefficients_within,
            "coefficient_min": model.coefficients().iter().copied().fold(f64::INFINITY, f64::min),
            "coefficient_max": model.coefficients().iter().copied().fold(f64::NEG_INFINITY, f64::max),
        },
        "shape_flags": {"monotone": monotone, "convex": convex},
        "timings": {"load_s": load_secs, "filter_s": filter_secs, "fit_s": fit_secs},
        "effective_count": model.effective_count,
    });
    if removed > 0 {
        log::info!("quartile filter removed {removed} points");
    }
    Ok(FitRun { model, report })
}

fn default_grid(dim: usize) -> usize {
    match dim {
        1 => 256,
        2 => 64,
        _ => 16,
    }
}

/// Regular-grid samples of `f`, its variance and band as CSV text.
pub fn grid_csv(
    model: &WqisaModel,
    covariance: &CoefficientCovariance,
    per_axis: usize,
    alpha: f64,
) -> Result<String> {
    if per_axis < 2 {
        return Err(WqisaError::InvalidParameter(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let space = model.space();
    let domain = space.domain();
    let d = domain.len();
    let mut out = String::new();
    for k in 1..=d {
        let _ = write!(out, "u_{k},");
    }
    out.push_str("f,var,lo,hi\n");
    let coord = |axis: usize, j: usize| {
        let (a, b) = domain[axis];
        if j + 1 == per_axis {
            b
        } else {
            a + (b - a) * j as f64 / (per_axis - 1) as f64
        }
    };
    let shape = vec![per_axis; d];
    let mut index = vec![0usize; d];
    loop {
        let u: Vec<f64> = index
            .iter()
            .enumerate()
            .map(|(k, &j)| coord(k, j))
            .collect();
        let f = model.evaluate(&u)?;
        let var = variance_at(model, covariance, &u)?;
        let (lo, hi) = se_band(model, covariance, &u, alpha)?;
        for v in &u {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{f},{var},{lo},{hi}");
        if !crate::spline::advance(&mut index, &shape) {
            break;
        }
    }
    Ok(out)
}

fn parse_candidates(text: &str) -> Result<Vec<usize>> {
    let bad = || WqisaError::InvalidParameter(format!("bad candidate list '{text}'"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

fn default_report_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("report.json")
}

/// Runs one subcommand.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            input,
            format,
            cfg,
            out,
            report,
        } => {
            let config = cfg.resolve()?;
            let start = Instant::now();
            let cloud = input_cloud(input.as_deref(), &config, format)?;
            let run = fit_with_report(&cloud, &config, start.elapsed().as_secs_f64())?;
            let model_path = out
                .or(config.output.clone())
                .unwrap_or_else(|| PathBuf::from("model.json"));
            let report_path = report.unwrap_or_else(|| default_report_path(&model_path));
            write_text(Some(&model_path), &to_json(&run.model))?;
            write_text(Some(&report_path), &to_json(&run.report))?;
        }
        Command::Eval {
            model,
            input,
            format,
            grid,
            cfg,
            out,
        } => {
            let config = cfg.resolve()?;
            let model = load_model(&model)?;
            let cloud = load_cloud(&input, format)?;
            let noise = noise_for(&config, &model, &cloud)?;
            let cov = covariance_for(&model, &cloud, noise)?;
            let per_axis = grid.unwrap_or_else(|| default_grid(model.space().ndim()));
            let csv = grid_csv(&model, &cov, per_axis, config.alpha)?;
            write_text(out.as_deref(), &csv)?;
        }
        Command::Cv {
            input,
            format,
            param,
            candidates,
            folds,
            repeats,
            cfg,
            out,
        } => {
            let config = cfg.resolve()?;
            let cloud = input_cloud(input.as_deref(), &config, format)?;
            let dim = cloud.dim();
            let grid = match (&candidates, &config.cv_grid) {
                (Some(text), _) => parse_candidates(text)?,
                (None, Some(g)) => g.clone(),
                (None, None) => (5..=50).collect(),
            };
            let setup = CvSetup {
                degrees: config.degrees_for(dim)?,
                n: config.n_for(dim)?,
                weight: config.weight,
                policy: config.policy(),
                domain: config.domain.clone(),
            };
            let result = kfold_cv(&cloud, &setup, param, &grid, folds, repeats, config.seed)?;
            let mut csv = String::from("candidate,score\n");
            for (c, s) in result.grid.iter().zip(&result.scores) {
                let _ = writeln!(csv, "{c},{s}");
            }
            write_text(out.as_deref(), &csv)?;
            let best = json!({"parameter": result.parameter, "best": result.best,
                "folds": result.folds, "repeats": result.repeats, "seed": config.seed});
            if out.is_some() {
                println!("{best}");
            }
        }
        Command::Metrics {
            input,
            format,
            model,
            other,
            normalize,
            cell,
            cfg,
            out,
        } => {
            let config = cfg.resolve()?;
            let cloud = load_cloud(&input, format)?;
            let records: Vec<Vec<f64>> = (0..cloud.len()).map(|i| cloud.record(i)).collect();
            let value = match (model, other) {
                (Some(path), _) => {
                    let model = load_model(&path)?;
                    let predicted = (0..cloud.len())
                        .map(|i| model.evaluate_clamped(cloud.point(i)))
                        .collect::<Result<Vec<f64>>>()?;
                    let mut report =
                        dispersion_normalized(cloud.responses(), &predicted, normalize)?;
                    let fitted: Vec<Vec<f64>> = (0..cloud.len())
                        .map(|i| {
                            let mut r = cloud.point(i).to_vec();
                            r.push(predicted[i]);
                            r
                        })
                        .collect();
                    report.hausdorff =
                        Some(directed_hausdorff_normalized(&fitted, &records, &cloud)?);
                    let noise = noise_for(&config, &model, &cloud)?;
                    let cov = covariance_for(&model, &cloud, noise)?;
                    report.band_coverage = Some(band_coverage(&cloud, &model, &cov, config.alpha)?);
                    serde_json::to_value(report).expect("serializable report")
                }
                (None, Some(path)) => {
                    let second = load_cloud(&path, format)?;
                    let theirs: Vec<Vec<f64>> =
                        (0..second.len()).map(|i| second.record(i)).collect();
                    let paired = if second.len() == cloud.len() {
                        Some(dispersion_normalized(
                            cloud.responses(),
                            second.responses(),
                            normalize,
                        )?)
                    } else {
                        None
                    };
                    json!({
                        "dispersion": paired,
                        "hausdorff": directed_hausdorff_normalized(&theirs, &records, &cloud)?,
                        "hausdorff_reverse": directed_hausdorff_normalized(&records, &theirs, &cloud)?,
                        "jaccard": jaccard_points(&records, &theirs, cell)?,
                    })
                }
                (None, None) => {
                    return Err(WqisaError::InvalidParameter(
                        "metrics needs --model or --other".into(),
                    ))
                }
            };
            write_text(out.as_deref(), &to_json(&value))?;
        }
        Command::Gen {
            kind,
            count,
            seed,
            sigma,
            outlier_fraction,
            outlier_magnitude,
            format,
            out,
        } => {
            let mut params = SyntheticParams::default();
            if let Some(s) = sigma {
                params.sigma = s;
            }
            if let Some(f) = outlier_fraction {
                params.outlier_fraction = f;
            }
            if let Some(m) = outlier_magnitude {
                params.outlier_magnitude = m;
            }
            let (cloud, _) = gen_synthetic(kind, count, seed, &params)?;
            match out {
                Some(p) => save_cloud(&p, &cloud, format)?,
                None => print!("{}", format_cloud(&cloud, format)),
            }
        }
        Command::Demo {
            seed,
            count,
            sigma,
            k,
            out,
        } => {
            let summary = demo(seed, count, sigma, k, &out)?;
            println!("{}", to_json(&summary));
        }
    }
    Ok(())
}

/// Bias-variance experiment: cross-validates `n` in `5..=50` for a 10-NN
/// (by default) fit of noisy `sin(pi x)` data, then fits at the optimum and
/// writes the cloud, CV curve, band grid and a summary into `dir`.
pub fn demo(seed: u64, count: usize, sigma: f64, k: usize, dir: &Path) -> Result<Value> {
    std::fs::create_dir_all(dir).map_err(|e| WqisaError::Io(format!("{}: {e}", dir.display())))?;
    let params = SyntheticParams {
        sigma,
        ..Default::default()
    };
    let (cloud, truth) = gen_synthetic(SyntheticKind::Sine, count, seed, &params)?;
    save_cloud(dir.join("cloud.xyz"), &cloud, CloudFormat::Xyz)?;
    let weight = WeightSpec::Knn { k };
    let domain = vec![(params.low, params.high)];
    let setup = CvSetup {
        degrees: vec![crate::constants::DEFAULT_DEGREE],
        n: vec![15],
        weight,
        policy: Default::default(),
        domain: Some(domain.clone()),
    };
    let grid: Vec<usize> = (5..=50).collect();
    let cv = kfold_cv(&cloud, &setup, CvParameter::BasisSize, &grid, 5, 1, seed)?;
    let mut csv = String::from("n,score\n");
    for (c, s) in cv.grid.iter().zip(&cv.scores) {
        let _ = writeln!(csv, "{c},{s}");
    }
    write_text(Some(&dir.join("cv.csv")), &csv)?;
    let space = TensorSplineSpace::uniform(&domain, &[cv.best], &setup.degrees)?;
    let model = fit(&cloud, &space, &weight, setup.policy)?;
    let cov = covariance_for(&model, &cloud, NoiseModel::new(sigma)?)?;
    write_text(
        Some(&dir.join("grid.csv")),
        &grid_csv(&model, &cov, 256, 0.05)?,
    )?;
    write_text(Some(&dir.join("model.json")), &to_json(&model))?;
    let probes: Vec<f64> = (0..500)
        .map(|i| params.low + (params.high - params.low) * i as f64 / 499.0)
        .collect();
    let fitted = probes
        .iter()
        .map(|&x| model.evaluate(&[x]))
        .collect::<Result<Vec<f64>>>()?;
    let exact: Vec<f64> = probes.iter().map(|&x| truth.eval(x)).collect();
    let vs_truth = dispersion_normalized(&exact, &fitted, Normalization::None)?;
    let coverage = band_coverage(&cloud, &model, &cov, 0.05)?;
    let summary = json!({
        "seed": seed,
        "count": count,
        "sigma": sigma,
        "k": k,
        "best_n": cv.best,
        "best_score": cv.scores[cv.best - 5],
        "mse_vs_truth": vs_truth.mse,
        "band_coverage": coverage,
    });
    write_text(Some(&dir.join("summary.json")), &to_json(&summary))?;
    Ok(summary)
}
