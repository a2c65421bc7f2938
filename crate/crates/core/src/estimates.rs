//! Integral curvature estimates and the minimal-cone stability threshold.
//!
//! * [`local_a_bound`]: `∫_{M∩B_r(p)} |A|² ≤ C r^{n−2}` with `C` assembled
//!   from volume growth and `α = |−λ₁ − n|`;
//! * [`ssy_constants`] and [`ssy_chain_check`]: the absorption step of the
//!   Schoen–Simon–Yau argument;
//! * [`l4_identity_check`]: `∫|A|⁴ = n∫|A|²` on Clifford hypersurfaces;
//! * [`cone_stability_table`]: whether `−2n ≥ −(n+1)²/4`.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff::SamplingOptions;
use crate::geometry::{GeometryError, ParametrizedHypersurface};
use crate::quadrature::{
    initial_cells, integrate, refine_cells, stratified_estimate_terms, volume_growth_constant,
    BallMetric, VolumeGrowthParams,
};

/// Relative tolerance of [`l4_identity_check`].
pub const L4_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EstimateError {
    #[error("standard error {stderr} exceeds 10% of the bound {bound}")]
    InsufficientSamples { stderr: f64, bound: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// One inequality `lhs ≤ rhs` with its slack.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub stderr: f64,
    pub parameters: BTreeMap<String, f64>,
    /// `margin ≥ −3·stderr`.
    pub passed: bool,
}

impl EstimateReport {
    pub fn new(name: impl Into<String>, n: usize, lhs: f64, rhs: f64, stderr: f64) -> Self {
        let margin = rhs - lhs;
        EstimateReport {
            name: name.into(),
            n,
            lhs,
            rhs,
            margin,
            stderr,
            parameters: BTreeMap::new(),
            passed: margin >= -3.0 * stderr,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_owned(), value);
        self
    }
}

/// Nodes per axis giving about `2^16` tensor nodes per chart.
fn nodes_per_axis(n: usize) -> usize {
    ((65536f64).powf(1.0 / n as f64).floor() as usize).max(4)
}

/// `∫_{M∩B_r(p)} |A|²` over the Euclidean ball of `R^{n+2}` against
/// `C r^{n−2}`, `C = 2^{n+3} C_V + 4α 2^n C_V`.
pub fn local_a_bound(
    surface: &ParametrizedHypersurface,
    p: &DVector<f64>,
    r: f64,
    lambda1: f64,
    options: &SamplingOptions,
) -> Result<EstimateReport, EstimateError> {
    if !(r > 0.0 && r < 2.0) {
        return Err(EstimateError::InvalidParameter(format!(
            "radius must lie in (0, 2), got {r}"
        )));
    }
    if !lambda1.is_finite() {
        return Err(EstimateError::InvalidParameter("λ₁ must be finite".into()));
    }
    let n = surface.dim();
    let c_v = match options.volume_growth {
        Some(c) => c,
        None => volume_growth_constant(
            surface,
            BallMetric::Euclidean,
            &VolumeGrowthParams {
                seed: options.seed,
                ..VolumeGrowthParams::default()
            },
        )?,
    };
    let alpha = (-lambda1 - n as f64).abs();
    let two_n = 2f64.powi(n as i32);
    let c = 8.0 * two_n * c_v + 4.0 * alpha * two_n * c_v;
    let rhs = c * r.powi(n as i32 - 2);

    let cells = refine_cells(
        initial_cells(surface, options.cells_per_axis),
        options.max_depth,
        |cell| {
            let x = surface.charts()[cell.chart].point(&cell.center());
            let diam = cell.ambient_diameter(surface);
            ((&x - p).norm() - r).abs() <= diam && diam > r / (4.0 * options.refine_ratio)
        },
    );
    let [lhs] = stratified_estimate_terms(surface, &cells, options.replicates, options.seed, |s| {
        [if (s.point() - p).norm() < r { s.shape.norm_a2 } else { 0.0 }]
    })?;
    if lhs.stderr > 0.1 * rhs {
        return Err(EstimateError::InsufficientSamples {
            stderr: lhs.stderr,
            bound: rhs,
        });
    }
    Ok(EstimateReport::new("local_a_l2", n, lhs.mean, rhs, lhs.stderr)
        .with("r", r)
        .with("lambda1", lambda1)
        .with("alpha", alpha)
        .with("volume_growth", c_v)
        .with("C", c))
}

/// Absorption coefficient `(1+a)/(1 + 2/n − a)` and whether it is below one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsyConstants {
    pub n: usize,
    pub a: f64,
    pub alpha: f64,
    pub coefficient: f64,
    pub admissible: bool,
    /// `1 + 1/a`, the weight of `∫|A|²|∇f|²` in the stability step.
    pub remainder: f64,
}

pub fn ssy_constants(n: usize, a: f64, alpha: f64) -> Result<SsyConstants, EstimateError> {
    if n == 0 || !(a > 0.0) {
        return Err(EstimateError::InvalidParameter(format!(
            "need n ≥ 1 and a > 0, got n = {n}, a = {a}"
        )));
    }
    let denominator = 1.0 + 2.0 / n as f64 - a;
    let coefficient = (1.0 + a) / denominator;
    Ok(SsyConstants {
        n,
        a,
        alpha,
        coefficient,
        admissible: denominator > 0.0 && coefficient < 1.0,
        remainder: 1.0 + 1.0 / a,
    })
}

/// Integrals of `|A|⁴`, `|A|²` and `|∇|A||²` over `M`.
fn curvature_integrals(surface: &ParametrizedHypersurface) -> Result<[f64; 3], GeometryError> {
    let nodes = nodes_per_axis(surface.dim());
    let h = 1e-4;
    let a4 = integrate(surface, nodes, |s| s.shape.norm_a2 * s.shape.norm_a2)?;
    let a2 = integrate(surface, nodes, |s| s.shape.norm_a2)?;
    let grad = integrate(surface, nodes, |s| {
        // Central differences of |A| along each parameter axis.
        let n = s.u.len();
        let mut d = DVector::zeros(n);
        for k in 0..n {
            let mut up = s.u.clone();
            let mut down = s.u.clone();
            up[k] += h;
            down[k] -= h;
            match (surface.shape_at(s.chart, &up), surface.shape_at(s.chart, &down)) {
                (Ok(p), Ok(m)) => d[k] = (p.norm_a() - m.norm_a()) / (2.0 * h),
                _ => return 0.0,
            }
        }
        d.dot(&(&s.shape.metric_inverse * &d))
    })?;
    Ok([a4, a2, grad])
}

/// The two SSY inequalities with `f ≡ 1` on a closed hypersurface:
/// `∫|A|⁴ ≤ (1+a)∫|∇|A||² + α∫|A|²` and
/// `∫|A|⁴ ≥ (1 + 2/n − a)∫|∇|A||²`.
pub fn ssy_chain_check(
    surface: &ParametrizedHypersurface,
    a: f64,
    lambda1: f64,
) -> Result<Vec<EstimateReport>, EstimateError> {
    let n = surface.dim();
    let alpha = (-lambda1 - n as f64).abs();
    let constants = ssy_constants(n, a, alpha)?;
    let [a4, a2, grad] = curvature_integrals(surface)?;
    // Quadrature error of the integrals, in the role of a standard error.
    let tolerance = 1e-9 * a4.abs().max(a2.abs()).max(1.0);
    let stability = EstimateReport::new(
        "ssy_stability",
        n,
        a4,
        (1.0 + a) * grad + alpha * a2,
        tolerance,
    );
    let simons = EstimateReport::new("ssy_simons", n, (1.0 + 2.0 / n as f64 - a) * grad, a4, tolerance);
    Ok([stability, simons]
        .into_iter()
        .map(|r| {
            r.with("a", a)
                .with("alpha", alpha)
                .with("coefficient", constants.coefficient)
        })
        .collect())
}

/// `∫|A|⁴` against `n∫|A|²`; passes within [`L4_TOLERANCE`] relative error.
pub fn l4_identity_check(surface: &ParametrizedHypersurface) -> Result<EstimateReport, EstimateError> {
    let n = surface.dim();
    let nodes = nodes_per_axis(n);
    let a4 = integrate(surface, nodes, |s| s.shape.norm_a2 * s.shape.norm_a2)?;
    let a2 = n as f64 * integrate(surface, nodes, |s| s.shape.norm_a2)?;
    let scale = a4.abs().max(a2.abs());
    let relative = if scale == 0.0 { 0.0 } else { (a4 - a2).abs() / scale };
    let mut report = EstimateReport::new("l4_identity", n, a4, a2, 0.0).with("relative_error", relative);
    report.passed = relative <= L4_TOLERANCE;
    Ok(report)
}

/// Stability verdict for cones over `n`-dimensional links with
/// `λ₁ ≤ −2n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub n: usize,
    /// `−2n`.
    pub link_bound: f64,
    /// `−(n+1)²/4`.
    pub threshold: f64,
    /// `link_bound − threshold = (n² − 6n + 1)/4`.
    pub margin: f64,
    pub stable_possible: bool,
}

impl ConeVerdict {
    pub fn new(n: usize) -> Self {
        let n_i = n as i64;
        let quadratic = n_i * n_i - 6 * n_i + 1;
        ConeVerdict {
            n,
            link_bound: -2.0 * n as f64,
            threshold: -((n_i + 1) * (n_i + 1)) as f64 / 4.0,
            margin: quadratic as f64 / 4.0,
            stable_possible: quadratic >= 0,
        }
    }
}

/// Verdicts for `n = 1..=n_max`.
pub fn cone_stability_table(n_max: usize) -> Vec<ConeVerdict> {
    (1..=n_max).map(ConeVerdict::new).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford_hypersurface, equator, CliffordSpec};

    #[test]
    fn cone_table_threshold() {
        let table = cone_stability_table(10);
        assert_eq!(table.len(), 10);
        for v in &table {
            assert_eq!(v.stable_possible, v.n >= 6);
        }
        assert_eq!(table[5].margin, 0.25);
        assert_eq!(table[4].link_bound, -10.0);
        assert_eq!(table[4].threshold, -9.0);
        assert_eq!(table[0].threshold, -1.0);
    }

    #[test]
    fn ssy_examples() {
        let c = ssy_constants(2, 0.4, 0.0).unwrap();
        assert!((c.coefficient - 0.875).abs() < 1e-15 && c.admissible);
        let c = ssy_constants(3, 1.0 / 3.0, 0.0).unwrap();
        assert!((c.coefficient - 1.0).abs() < 1e-15 && !c.admissible);
        let c = ssy_constants(7, 0.1, 0.0).unwrap();
        assert!((c.coefficient - 1.1 / (1.0 + 2.0 / 7.0 - 0.1)).abs() < 1e-15 && c.admissible);
        assert!(ssy_constants(2, 0.0, 0.0).is_err());
    }

    #[test]
    fn l4_identity_on_reference_families() {
        let r = l4_identity_check(&clifford_hypersurface(CliffordSpec::new(2, 1).unwrap())).unwrap();
        assert!(r.passed);
        assert!(r.lhs > 0.0);
        let r = l4_identity_check(&equator(2)).unwrap();
        assert!(r.passed && r.lhs == 0.0);
    }

    #[test]
    fn ssy_chain_on_torus_is_tight() {
        let m = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
        let reports = ssy_chain_check(&m, 0.4, -4.0).unwrap();
        assert!(reports.iter().all(|r| r.passed));
        assert!(reports[0].margin.abs() < 1e-6);
    }

    #[test]
    fn local_bound_on_torus_and_equator() {
        let opts = SamplingOptions {
            volume_growth: Some(4.0),
            ..Default::default()
        };
        let m = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
        let p = m.charts()[0].point(&[0.3, 0.7]);
        let r = local_a_bound(&m, &p, 0.5, -4.0, &opts).unwrap();
        assert!(r.passed);
        // |A|² ≡ 2, and the ball area is close to πr² at this scale.
        assert!((r.lhs / 2.0 - std::f64::consts::PI * 0.25).abs() < 0.1, "{}", r.lhs);
        let e = equator(2);
        let p = e.charts()[0].point(&[1.0, 1.0]);
        let r = local_a_bound(&e, &p, 0.5, -2.0, &opts).unwrap();
        assert_eq!(r.lhs, 0.0);
    }
}
