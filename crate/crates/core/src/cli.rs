//! Command-line experiments.
//!
//! Every subcommand accepts the same settings, either as flags or from a
//! TOML file given by `--config` (keys spelled like the flags, e.g.
//! `n-max = 10`); flags override the file. Reports go to `--output`, else
//! to `$SPHERE_JACOBI_OUT_DIR/<command>.<format>`, else to stdout.
//!
//! Exit codes: 0 all bounds hold, 1 a bound failed, 2 configuration error,
//! 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cutoff::{
    class_intersection_counts, cover_singular_set, gradient_integral_estimate, mr_quality_report,
    read_point_cloud, vitali_discard, CoverParams, CutoffError, CutoffField, CutoffKind,
    SamplingOptions,
};
use crate::estimates::{
    cone_stability_table, l4_identity_check, local_a_bound, ssy_chain_check, ssy_constants,
    EstimateError, EstimateReport,
};
use crate::geometry::{
    clifford_hypersurface, equator, load_chart_file, CliffordSpec, Family, GeometryError,
    ParametrizedHypersurface, POLE_MARGIN,
};
use crate::operators::{analytic_laplace_spectrum, assemble_jacobi, OperatorError, MIN_RESOLUTION};
use crate::quadrature::{volume_growth_constant, BallMetric, VolumeGrowthParams};
use crate::report::{Format, Report, Table};
use crate::spectrum::{
    observed_order, relative_variation, simons_check, smallest_eigenpairs, SimonsOptions,
    SolverOptions, SpectrumError,
};

/// Default output directory when `--output` is absent.
pub const OUT_DIR_ENV: &str = "SPHERE_JACOBI_OUT_DIR";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_BOUND: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERIC,
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        match e {
            SpectrumError::InvalidArgument(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OperatorError> for CliError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::InvalidResolution(_) | OperatorError::UnsupportedFamily(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CutoffError> for CliError {
    fn from(e: CutoffError) -> Self {
        match e {
            CutoffError::BudgetInfeasible { .. }
            | CutoffError::InvalidParameter(_)
            | CutoffError::Parse { .. }
            | CutoffError::Io(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::InvalidParameter(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Spectrum,
    Simons,
    Cutoff,
    Estimates,
    ConeTable,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Spectrum => "spectrum",
            CommandKind::Simons => "simons",
            CommandKind::Cutoff => "cutoff",
            CommandKind::Estimates => "estimates",
            CommandKind::ConeTable => "cone-table",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyName {
    Equator,
    Clifford,
    /// A chart file given by `chart-file`.
    File,
}

impl std::str::FromStr for FamilyName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "equator" => Ok(FamilyName::Equator),
            "clifford" => Ok(FamilyName::Clifford),
            "file" => Ok(FamilyName::File),
            other => Err(format!(
                "unknown family `{other}` (expected equator, clifford or file)"
            )),
        }
    }
}

/// Settings as given on the command line or in a config file; every field
/// is optional and unset fields fall back to the file, then the defaults.
#[derive(Args, Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    /// Surface family: equator, clifford or file.
    #[arg(long)]
    pub family: Option<FamilyName>,
    /// Dimension of the hypersurface.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension of the first Clifford factor.
    #[arg(long)]
    pub k: Option<usize>,
    /// Dimension of the second Clifford factor.
    #[arg(long)]
    pub l: Option<usize>,
    /// Chart file for `--family file`.
    #[arg(long)]
    pub chart_file: Option<PathBuf>,
    /// Grid resolutions per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    /// Ball budget ε.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Exponent q in Σ r^(n−q) < ε and ∫|∇φ|^q.
    #[arg(long)]
    pub exponent: Option<usize>,
    /// Cutoff kind: inf or product.
    #[arg(long)]
    pub kind: Option<CutoffKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Singular-set point cloud, one point of n+2 coordinates per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Number of random singular points on the surface when no cloud is given.
    #[arg(long)]
    pub random_points: Option<usize>,
    /// Sample points for the Simons check.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Finite-difference steps for the Simons check, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub steps: Option<Vec<f64>>,
    /// Ball radii for the local curvature bound, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    /// Ball centers for the local curvature bound.
    #[arg(long)]
    pub centers: Option<usize>,
    /// Absorption parameter a of the SSY step; defaults to 1/(2n).
    #[arg(long)]
    pub absorption: Option<f64>,
    /// Largest link dimension of the cone table.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Accepted eigenvalue error at the finest resolution.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Monte Carlo replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Report format: csv or json.
    #[arg(long)]
    pub format: Option<Format>,
}

impl Settings {
    /// Fields set here win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        macro_rules! pick {
            ($($f:ident),*) => { Settings { $($f: self.$f.or(base.$f)),* } };
        }
        pick!(
            family, n, k, l, chart_file, resolutions, epsilon, exponent, kind, seed, points,
            random_points, samples, steps, radii, centers, absorption, n_max, tolerance,
            replicates, output, format
        )
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "sphere-jacobi",
    version,
    about = "Stability spectra, Simons checks, cutoff estimates and cone tables for minimal hypersurfaces of spheres"
)]
pub struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// First stability eigenvalue over a list of resolutions.
    Spectrum(Settings),
    /// Pointwise Simons identity and inequality.
    Simons(Settings),
    /// Singular-set cover, cutoff and its integral estimates.
    Cutoff(Settings),
    /// Local curvature bound, SSY constants and the L⁴ identity.
    Estimates(Settings),
    /// Minimal-cone stability threshold by link dimension.
    ConeTable(Settings),
}

/// A fully resolved, validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: CommandKind,
    pub family: FamilyName,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub chart_file: Option<PathBuf>,
    pub resolutions: Vec<usize>,
    pub epsilon: f64,
    pub exponent: usize,
    pub kind: CutoffKind,
    pub seed: u64,
    pub points: Option<PathBuf>,
    pub random_points: usize,
    pub samples: usize,
    pub steps: Vec<f64>,
    pub radii: Vec<f64>,
    pub centers: usize,
    pub absorption: f64,
    pub n_max: usize,
    pub tolerance: f64,
    pub replicates: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Fills defaults and checks consistency.
    pub fn resolve(command: CommandKind, s: Settings) -> Result<RunConfig, CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let family = s.family.unwrap_or(FamilyName::Clifford);
        let (n, k, l) = match family {
            FamilyName::Clifford => {
                let k = s.k.unwrap_or(1);
                let l = s.l.unwrap_or(1);
                if k == 0 || l == 0 {
                    return bad(format!("Clifford factors need k, l ≥ 1, got k = {k}, l = {l}"));
                }
                if let Some(n) = s.n {
                    if n != k + l {
                        return bad(format!("Clifford dimensions must satisfy k + l = n, got {k} + {l} ≠ {n}"));
                    }
                }
                (k + l, k, l)
            }
            FamilyName::Equator => {
                let n = s.n.unwrap_or(2);
                if n == 0 {
                    return bad("equators need n ≥ 1".into());
                }
                (n, 0, 0)
            }
            FamilyName::File => {
                if s.chart_file.is_none() {
                    return bad("--family file needs --chart-file".into());
                }
                (s.n.unwrap_or(0), 0, 0)
            }
        };
        let resolutions = s.resolutions.unwrap_or_else(|| vec![32, 64, 128]);
        if resolutions.is_empty() {
            return bad("the resolution list is empty".into());
        }
        if let Some(&r) = resolutions.iter().find(|&&r| r < MIN_RESOLUTION) {
            return bad(format!("resolutions must be at least {MIN_RESOLUTION}, got {r}"));
        }
        let epsilon = s.epsilon.unwrap_or(0.05);
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return bad(format!("ε must be positive, got {epsilon}"));
        }
        let steps = s.steps.unwrap_or_else(|| vec![1.2e-2, 6e-3, 3e-3]);
        if steps.is_empty() || steps.iter().any(|&h| !(h > 0.0 && h < 0.1)) {
            return bad("finite-difference steps must lie in (0, 0.1)".into());
        }
        let radii = s.radii.unwrap_or_else(|| vec![0.1, 0.25, 0.5, 1.0]);
        if radii.iter().any(|&r| !(r > 0.0 && r < 2.0)) {
            return bad("radii must lie in (0, 2)".into());
        }
        let replicates = s.replicates.unwrap_or(16);
        if replicates < 2 {
            return bad("at least two Monte Carlo replicates are needed".into());
        }
        let n_max = s.n_max.unwrap_or(10);
        if n_max == 0 {
            return bad("--n-max must be at least 1".into());
        }
        let absorption = s.absorption.unwrap_or(if n > 0 { 0.5 / n as f64 } else { 0.25 });
        if !(absorption > 0.0) {
            return bad(format!("the absorption parameter must be positive, got {absorption}"));
        }
        let tolerance = s.tolerance.unwrap_or(1e-6);
        if !(tolerance >= 0.0) {
            return bad(format!("the tolerance must be non-negative, got {tolerance}"));
        }
        Ok(RunConfig {
            command,
            family,
            n,
            k,
            l,
            chart_file: s.chart_file,
            resolutions,
            epsilon,
            exponent: s.exponent.unwrap_or(1),
            kind: s.kind.unwrap_or(CutoffKind::Inf),
            seed: s.seed.unwrap_or(1),
            points: s.points,
            random_points: s.random_points.unwrap_or(1),
            samples: s.samples.unwrap_or(200).max(1),
            steps,
            radii,
            centers: s.centers.unwrap_or(4).max(1),
            absorption,
            n_max,
            tolerance,
            replicates,
            output: s.output,
            format: s.format.unwrap_or_default(),
        })
    }

    pub fn surface(&self) -> Result<ParametrizedHypersurface, CliError> {
        match self.family {
            FamilyName::Equator => Ok(equator(self.n as u32)),
            FamilyName::Clifford => {
                let spec = CliffordSpec::new(self.k as u32, self.l as u32)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok(clifford_hypersurface(spec))
            }
            FamilyName::File => {
                let path = self.chart_file.as_ref().expect("validated");
                let surface = load_chart_file(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                if self.n != 0 && surface.dim() != self.n {
                    return Err(CliError::Config(format!(
                        "chart file has dimension {}, config says n = {}",
                        surface.dim(),
                        self.n
                    )));
                }
                Ok(surface)
            }
        }
    }

    fn sampling(&self) -> SamplingOptions {
        SamplingOptions {
            seed: self.seed,
            replicates: self.replicates,
            ..SamplingOptions::default()
        }
    }
}

/// Reads the TOML settings file.
pub fn load_settings(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn num(x: f64) -> Value {
    json!(x)
}

/// `λ₁` and the second eigenvalue of the analytic spectrum, if known.
fn exact_levels(family: Family) -> Option<(f64, f64)> {
    let spectrum = analytic_laplace_spectrum(family).ok()?;
    let levels = spectrum.stability_eigenvalues(usize::MAX.min(64));
    let first = levels[0];
    let second = levels.iter().copied().find(|&v| v > first)?;
    Some((first, second))
}

fn run_spectrum(config: &RunConfig) -> Result<Report, CliError> {
    let surface = config.surface()?;
    let exact = exact_levels(surface.family());
    let mut table = Table::new([
        "resolution",
        "nodes",
        "lambda1",
        "exact",
        "error",
        "order",
        "lambda2",
        "error2",
        "order2",
        "residual",
        "iterations",
        "eigenvector_variation",
    ]);
    let options = SolverOptions {
        seed: config.seed,
        ..SolverOptions::default()
    };
    let mut errors = Vec::new();
    let mut errors2 = Vec::new();
    let mut steps = Vec::new();
    for &res in &config.resolutions {
        let op = assemble_jacobi(&surface, res)?;
        // The second level may be degenerate; the block sees all of it.
        let pairs = smallest_eigenpairs(&op, 2.min(op.len()), &options)?;
        let lambda1 = pairs.values[0];
        let lambda2 = pairs.values.get(1).copied().unwrap_or(f64::NAN);
        let (err, err2) = match exact {
            Some((e1, e2)) => ((lambda1 - e1).abs(), (lambda2 - e2).abs()),
            None => (f64::NAN, f64::NAN),
        };
        steps.push(1.0 / res as f64);
        errors.push(err);
        errors2.push(err2);
        let order = |e: &[f64]| {
            let k = e.len();
            if k < 2 {
                f64::NAN
            } else {
                observed_order(&steps[k - 2..], &e[k - 2..])[0]
            }
        };
        table.push(vec![
            json!(res),
            json!(op.len()),
            num(lambda1),
            num(exact.map_or(f64::NAN, |e| e.0)),
            num(err),
            num(order(&errors)),
            num(lambda2),
            num(err2),
            num(order(&errors2)),
            num(pairs.residuals[0]),
            json!(pairs.iterations),
            num(relative_variation(pairs.vectors[0].as_slice())),
        ]);
    }
    let passed = match exact {
        Some(_) => *errors.last().expect("nonempty") <= config.tolerance,
        None => true,
    };
    let details = json!({
        "surface": surface.label(),
        "family": surface.family().to_string(),
        "exact_lambda1": exact.map(|e| e.0),
    });
    Ok(Report::new("spectrum", config_value(config), passed, table, details))
}

fn run_simons(config: &RunConfig) -> Result<Report, CliError> {
    let surface = config.surface()?;
    let mut table = Table::new([
        "step",
        "identity_residual",
        "inequality_violation",
        "max_grad_a",
        "order",
    ]);
    let mut steps = config.steps.clone();
    steps.sort_by(|a, b| b.total_cmp(a));
    let mut residuals = Vec::new();
    let mut reports = Vec::new();
    for &step in &steps {
        let r = simons_check(
            &surface,
            &SimonsOptions {
                samples: config.samples,
                step,
                seed: config.seed,
                ..SimonsOptions::default()
            },
        )?;
        residuals.push(r.max_identity_residual);
        let k = residuals.len();
        let order = if k < 2 {
            f64::NAN
        } else {
            observed_order(&steps[k - 2..k], &residuals[k - 2..])[0]
        };
        table.push(vec![
            num(step),
            num(r.max_identity_residual),
            num(r.max_inequality_violation),
            num(r.max_grad_a),
            num(order),
        ]);
        reports.push(r);
    }
    let finest = reports.last().expect("nonempty");
    let passed = finest.max_identity_residual <= 1e-6
        && reports.iter().all(|r| r.max_inequality_violation == 0.0);
    Ok(Report::new(
        "simons",
        config_value(config),
        passed,
        table,
        json!({ "surface": surface.label(), "checks": reports }),
    ))
}

fn singular_points(config: &RunConfig, surface: &ParametrizedHypersurface) -> Result<Vec<DVector<f64>>, CliError> {
    match &config.points {
        Some(path) => {
            let file = std::fs::File::open(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Ok(read_point_cloud(std::io::BufReader::new(file), surface.dim() + 2)?)
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Ok((0..config.random_points)
                .map(|i| {
                    let chart = &surface.charts()[i % surface.charts().len()];
                    chart.point(&chart.sample_interior(&mut rng, POLE_MARGIN))
                })
                .collect())
        }
    }
}

fn run_cutoff(config: &RunConfig) -> Result<Report, CliError> {
    let surface = config.surface()?;
    let n = surface.dim();
    let points = singular_points(config, &surface)?;
    let sampling = config.sampling();
    let mut table = Table::new(["quantity", "value", "stderr", "bound", "passed"]);
    let (passed, details) = match config.kind {
        CutoffKind::Inf => {
            let cover = cover_singular_set(&points, &CoverParams::inf(n, config.exponent, config.epsilon))?;
            let field = CutoffField::inf(&cover);
            let g = gradient_integral_estimate(&surface, &field, &sampling)?;
            table.push(vec![
                json!("gradient_integral"),
                num(g.integral.mean),
                num(g.integral.stderr),
                num(g.bound),
                json!(g.passed),
            ]);
            table.push(vec![
                json!("budget_sum"),
                num(cover.budget_sum()),
                num(0.0),
                num(cover.epsilon),
                json!(cover.satisfied),
            ]);
            (g.passed, json!({ "cover": cover, "gradient": g }))
        }
        CutoffKind::Product => {
            let cover = cover_singular_set(
                &points,
                &CoverParams::product(n, config.exponent, config.epsilon),
            )?;
            let cover = vitali_discard(&cover);
            let classes = class_intersection_counts(&cover)?;
            let field = CutoffField::product(&cover);
            let mr = mr_quality_report(&surface, &field, &sampling)?;
            let names = ["area_not_one", "gradient_l2", "laplacian_l1"];
            for (i, e) in [mr.area_not_one, mr.grad_l2, mr.lap_l1].iter().enumerate() {
                table.push(vec![
                    json!(names[i]),
                    num(e.mean),
                    num(e.stderr),
                    num(mr.bounds[i]),
                    json!(mr.passed[i]),
                ]);
            }
            table.push(vec![
                json!("class_intersections"),
                json!(classes.max_count),
                num(0.0),
                num(classes.bound),
                json!(true),
            ]);
            (
                mr.passed.iter().all(|&p| p),
                json!({ "cover": cover, "quality": mr, "class_counts": classes }),
            )
        }
    };
    Ok(Report::new("cutoff", config_value(config), passed, table, details))
}

fn estimate_row(table: &mut Table, r: &EstimateReport) {
    table.push(vec![
        json!(r.name),
        json!(r.n),
        num(r.lhs),
        num(r.rhs),
        num(r.margin),
        num(r.stderr),
        json!(r.passed),
    ]);
}

fn run_estimates(config: &RunConfig) -> Result<Report, CliError> {
    let surface = config.surface()?;
    let n = surface.dim();
    let lambda1 = match exact_levels(surface.family()) {
        Some((l1, _)) => l1,
        None => {
            let op = assemble_jacobi(&surface, config.resolutions[0])?;
            smallest_eigenpairs(&op, 1, &SolverOptions::default())?.values[0]
        }
    };
    let c_v = volume_growth_constant(
        &surface,
        BallMetric::Euclidean,
        &VolumeGrowthParams {
            seed: config.seed,
            ..VolumeGrowthParams::default()
        },
    )?;
    let sampling = SamplingOptions {
        volume_growth: Some(c_v),
        ..config.sampling()
    };
    let mut reports = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for i in 0..config.centers {
        let chart = &surface.charts()[i % surface.charts().len()];
        let p = chart.point(&chart.sample_interior(&mut rng, POLE_MARGIN));
        for &r in &config.radii {
            reports.push(local_a_bound(&surface, &p, r, lambda1, &sampling)?.with("center", i as f64));
        }
    }
    let alpha = (-lambda1 - n as f64).abs();
    let ssy = ssy_constants(n, config.absorption, alpha)?;
    let mut coefficient = EstimateReport::new("ssy_coefficient", n, ssy.coefficient, 1.0, 0.0)
        .with("a", ssy.a)
        .with("alpha", alpha);
    coefficient.passed = ssy.admissible;
    reports.push(coefficient);
    reports.extend(ssy_chain_check(&surface, config.absorption, lambda1)?);
    if surface.family() != Family::Custom {
        reports.push(l4_identity_check(&surface)?);
    }
    let mut table = Table::new(["name", "n", "lhs", "rhs", "margin", "stderr", "passed"]);
    for r in &reports {
        estimate_row(&mut table, r);
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(Report::new(
        "estimates",
        config_value(config),
        passed,
        table,
        json!({ "lambda1": lambda1, "volume_growth": c_v, "reports": reports }),
    ))
}

fn run_cone_table(config: &RunConfig) -> Result<Report, CliError> {
    let verdicts = cone_stability_table(config.n_max);
    let mut table = Table::new(["n", "link_bound", "threshold", "margin", "stable_possible"]);
    for v in &verdicts {
        table.push(vec![
            json!(v.n),
            num(v.link_bound),
            num(v.threshold),
            num(v.margin),
            json!(v.stable_possible),
        ]);
    }
    let first = verdicts.iter().find(|v| v.stable_possible).map(|v| v.n);
    Ok(Report::new(
        "cone-table",
        config_value(config),
        true,
        table,
        json!({ "first_stable_possible": first }),
    ))
}

fn config_value(config: &RunConfig) -> Value {
    serde_json::to_value(config).expect("configs serialize")
}

/// Runs one experiment.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.command {
        CommandKind::Spectrum => run_spectrum(config),
        CommandKind::Simons => run_simons(config),
        CommandKind::Cutoff => run_cutoff(config),
        CommandKind::Estimates => run_estimates(config),
        CommandKind::ConeTable => run_cone_table(config),
    }
}

/// Where the report of `config` goes; `None` is stdout.
pub fn output_path(config: &RunConfig) -> Option<PathBuf> {
    config.output.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| {
            PathBuf::from(dir).join(format!("{}.{}", config.command.name(), config.format.extension()))
        })
    })
}

/// Parses, runs and writes the report; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sphere-jacobi: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (command, flags) = match cli.command {
        CliCommand::Spectrum(s) => (CommandKind::Spectrum, s),
        CliCommand::Simons(s) => (CommandKind::Simons, s),
        CliCommand::Cutoff(s) => (CommandKind::Cutoff, s),
        CliCommand::Estimates(s) => (CommandKind::Estimates, s),
        CliCommand::ConeTable(s) => (CommandKind::ConeTable, s),
    };
    let file = match &cli.config {
        Some(path) => load_settings(path)?,
        None => Settings::default(),
    };
    let config = RunConfig::resolve(command, flags.over(file))?;
    let report = run(&config)?;
    let text = report.render(config.format);
    match output_path(&config) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
            }
            std::fs::write(&path, text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            eprintln!(
                "{}: {} -> {}",
                command.name(),
                if report.passed { "pass" } else { "FAIL" },
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(if report.passed { EXIT_PASS } else { EXIT_BOUND })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(args: &[&str]) -> (CommandKind, Settings) {
        let cli = Cli::try_parse_from(std::iter::once("sphere-jacobi").chain(args.iter().copied())).unwrap();
        match cli.command {
            CliCommand::Spectrum(s) => (CommandKind::Spectrum, s),
            CliCommand::Simons(s) => (CommandKind::Simons, s),
            CliCommand::Cutoff(s) => (CommandKind::Cutoff, s),
            CliCommand::Estimates(s) => (CommandKind::Estimates, s),
            CliCommand::ConeTable(s) => (CommandKind::ConeTable, s),
        }
    }

    #[test]
    fn flags_override_file_settings() {
        let (cmd, flags) = settings(&["spectrum", "--k", "2", "--resolutions", "16,32"]);
        let file: Settings = toml::from_str("k = 1\nl = 2\nseed = 7\nn-max = 4\n").unwrap();
        let config = RunConfig::resolve(cmd, flags.over(file)).unwrap();
        assert_eq!((config.k, config.l, config.n), (2, 2, 4));
        assert_eq!(config.resolutions, vec![16, 32]);
        assert_eq!(config.seed, 7);
        assert_eq!(config.n_max, 4);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for args in [
            &["spectrum", "--resolutions", "4"][..],
            &["spectrum", "--k", "1", "--l", "1", "--n", "3"],
            &["cutoff", "--epsilon=-1"],
            &["spectrum", "--family", "file"],
        ] {
            let (cmd, s) = settings(args);
            assert!(matches!(RunConfig::resolve(cmd, s), Err(CliError::Config(_))), "{args:?}");
        }
        assert!(toml::from_str::<Settings>("bogus = 1").is_err());
    }

    #[test]
    fn cone_table_report() {
        let (cmd, s) = settings(&["cone-table", "--n-max", "10"]);
        let report = run(&RunConfig::resolve(cmd, s).unwrap()).unwrap();
        assert!(report.passed);
        assert_eq!(report.details["first_stable_possible"], json!(6));
        assert_eq!(report.table.rows.len(), 10);
    }
}
