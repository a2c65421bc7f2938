//! Closed hypersurfaces of the unit sphere `S^{n+1} ⊂ R^{n+2}` given by
//! parametrization charts, and their fundamental forms.
//!
//! Conventions: the second fundamental form is `A_ij = ⟨∂_i ν, ∂_j X⟩ =
//! −⟨ν, ∂_i∂_j X⟩` and the mean curvature is its metric trace, so that
//! `H = div_M ν`.

mod chart_file;
mod families;
mod sphere;
mod spline;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

pub use chart_file::{load_chart_file, read_chart_file, write_chart_file};
pub use families::{clifford_hypersurface, equator, CliffordSpec, Sheared};
pub use spline::SplineChart;

/// Largest metric condition number accepted by [`shape_at`].
pub const DEGENERATE_CONDITION: f64 = 1e12;
/// Largest `| |X| − 1 |` accepted by [`shape_at`].
pub const DRIFT_TOLERANCE: f64 = 1e-8;
/// Step of the central differences used for charts without exact jets.
pub const FD_STEP: f64 = 1e-5;
/// Parameter-space distance kept from coordinate poles when sampling.
pub const POLE_MARGIN: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate metric in chart {chart} at {u:?} (condition number {condition:e})")]
    DegenerateChart {
        chart: usize,
        u: Vec<f64>,
        condition: f64,
    },
    #[error("immersion leaves the unit sphere in chart {chart} at {u:?}: |X| - 1 = {drift:e}")]
    ImmersionDrift { chart: usize, u: Vec<f64>, drift: f64 },
    #[error("chart index {0} out of range")]
    NoSuchChart(usize),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not on the unit sphere: |x| = {0}")]
    NotOnSphere(f64),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("invalid Clifford parameters k = {k}, l = {l}: both must be positive")]
    InvalidClifford { k: u32, l: u32 },
    #[error("chart file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A point of the unit sphere `S^{n+1}` in ambient coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbientPoint(DVector<f64>);

impl AmbientPoint {
    pub const UNIT_TOLERANCE: f64 = 1e-12;

    pub fn new(coords: Vec<f64>) -> Result<Self, GeometryError> {
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        if (norm - 1.0).abs() > Self::UNIT_TOLERANCE {
            return Err(GeometryError::NotOnSphere(norm));
        }
        Ok(AmbientPoint(v))
    }

    /// Radially projects a nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self, GeometryError> {
        let v = DVector::from_vec(coords);
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(GeometryError::NotOnSphere(norm));
        }
        Ok(AmbientPoint(v / norm))
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    /// Dimension `n` of the hypersurfaces living in this sphere.
    pub fn dim(&self) -> usize {
        self.0.len().saturating_sub(2)
    }

    pub fn geodesic_distance(&self, other: &AmbientPoint) -> f64 {
        chord_to_arc((&self.0 - &other.0).norm())
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }
}

/// Geodesic distance on the unit sphere for a chord of length `c`.
pub fn chord_to_arc(c: f64) -> f64 {
    2.0 * (0.5 * c).clamp(0.0, 1.0).asin()
}

/// Chord length of a geodesic arc `d ∈ [0, π]`.
pub fn arc_to_chord(d: f64) -> f64 {
    2.0 * (0.5 * d.clamp(0.0, std::f64::consts::PI)).sin()
}

/// Position and first two derivatives of an immersion at a parameter point.
#[derive(Clone, Debug)]
pub struct Jet {
    pub point: DVector<f64>,
    /// `∂_i X`.
    pub first: Vec<DVector<f64>>,
    /// `∂_i ∂_j X`, stored at `i * n + j`.
    pub second: Vec<DVector<f64>>,
}

impl Jet {
    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn second(&self, i: usize, j: usize) -> &DVector<f64> {
        &self.second[i * self.dim() + j]
    }

    pub fn metric(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.first[i].dot(&self.first[j]))
    }

    /// Radial projection `X / |X|` with derivatives by the chain rule.
    pub fn normalized(&self) -> Jet {
        let n = self.dim();
        let r = self.point.norm();
        let y = &self.point / r;
        // d(X/|X|) = (I − y yᵀ) dX / r
        let proj = |v: &DVector<f64>| (v - &y * y.dot(v)) / r;
        let first: Vec<DVector<f64>> = self.first.iter().map(proj).collect();
        let mut second = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let xi = &self.first[i];
                let xj = &self.first[j];
                let xij = self.second(i, j);
                // ∂_j of (I − y yᵀ) X_i / r
                let term = proj(xij)
                    - (&first[j] * y.dot(xi) + &y * first[j].dot(xi)) / r
                    - proj(xi) * (y.dot(xj) / r);
                second.push(term);
            }
        }
        Jet {
            point: y,
            first,
            second,
        }
    }
}

/// A smooth map from a parameter box into the unit sphere `S^{n+1}`.
pub trait Immersion: Send + Sync + fmt::Debug {
    /// Parameter dimension `n`.
    fn param_dim(&self) -> usize;

    fn ambient_dim(&self) -> usize {
        self.param_dim() + 2
    }

    fn point(&self, u: &[f64]) -> DVector<f64>;

    /// Defaults to central differences with step [`FD_STEP`].
    fn jet(&self, u: &[f64]) -> Jet {
        finite_difference_jet(self, u, FD_STEP)
    }

    /// Oriented unit normal, when the map knows one in closed form.
    fn normal(&self, _u: &[f64]) -> Option<DVector<f64>> {
        None
    }
}

pub fn finite_difference_jet<I: Immersion + ?Sized>(map: &I, u: &[f64], h: f64) -> Jet {
    let n = map.param_dim();
    let at = |shifts: &[(usize, f64)]| {
        let mut v = u.to_vec();
        for &(axis, s) in shifts {
            v[axis] += s;
        }
        map.point(&v)
    };
    let point = map.point(u);
    let first: Vec<DVector<f64>> = (0..n)
        .map(|i| (at(&[(i, h)]) - at(&[(i, -h)])) / (2.0 * h))
        .collect();
    let mut second = vec![DVector::zeros(point.len()); n * n];
    for i in 0..n {
        second[i * n + i] = (at(&[(i, h)]) - &point * 2.0 + at(&[(i, -h)])) / (h * h);
        for j in i + 1..n {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            second[j * n + i] = v.clone();
            second[i * n + j] = v;
        }
    }
    Jet {
        point,
        first,
        second,
    }
}

/// An immersion given by a plain closure; derivatives by central differences.
#[derive(Clone)]
pub struct FnImmersion {
    dim: usize,
    map: Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>,
}

impl FnImmersion {
    pub fn new(dim: usize, map: impl Fn(&[f64]) -> DVector<f64> + Send + Sync + 'static) -> Self {
        FnImmersion {
            dim,
            map: Arc::new(map),
        }
    }
}

impl fmt::Debug for FnImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnImmersion").field("dim", &self.dim).finish()
    }
}

impl Immersion for FnImmersion {
    fn param_dim(&self) -> usize {
        self.dim
    }

    fn point(&self, u: &[f64]) -> DVector<f64> {
        (self.map)(u)
    }
}

/// One parametrization chart: a parameter box, per-axis periodicity and the
/// immersion defined on it.
#[derive(Clone, Debug)]
pub struct Chart {
    domain: Vec<(f64, f64)>,
    periodic: Vec<bool>,
    map: Arc<dyn Immersion>,
}

impl Chart {
    pub fn new(
        domain: Vec<(f64, f64)>,
        periodic: Vec<bool>,
        map: Arc<dyn Immersion>,
    ) -> Result<Self, GeometryError> {
        let n = map.param_dim();
        if domain.len() != n || periodic.len() != n {
            return Err(GeometryError::InvalidChart(format!(
                "immersion has {n} parameters but the box has {} axes and {} periodicity flags",
                domain.len(),
                periodic.len()
            )));
        }
        if let Some((lo, hi)) = domain.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(GeometryError::InvalidChart(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Chart {
            domain,
            periodic,
            map,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn map(&self) -> &Arc<dyn Immersion> {
        &self.map
    }

    pub fn jet(&self, u: &[f64]) -> Jet {
        self.map.jet(u)
    }

    pub fn point(&self, u: &[f64]) -> DVector<f64> {
        self.map.point(u)
    }

    /// Uniform sample of the parameter box, keeping `margin` away from the
    /// ends of non-periodic axes.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        self.domain
            .iter()
            .zip(&self.periodic)
            .map(|(&(lo, hi), &periodic)| {
                if periodic {
                    rng.random_range(lo..hi)
                } else {
                    rng.random_range(lo + margin..hi - margin)
                }
            })
            .collect()
    }
}

/// Which closed-form family a surface belongs to, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Equator { n: u32 },
    Clifford { k: u32, l: u32 },
    Custom,
}

impl Family {
    pub fn is_totally_geodesic(&self) -> bool {
        matches!(self, Family::Equator { .. })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Equator { n } => write!(f, "equator({n})"),
            Family::Clifford { k, l } => write!(f, "clifford({k},{l})"),
            Family::Custom => write!(f, "custom"),
        }
    }
}

/// A closed hypersurface `M^n ⊂ S^{n+1}` covered (up to measure zero) by
/// charts with disjoint interiors.
#[derive(Clone, Debug)]
pub struct ParametrizedHypersurface {
    dim: usize,
    charts: Vec<Chart>,
    family: Family,
    label: String,
}

impl ParametrizedHypersurface {
    pub fn new(
        dim: usize,
        charts: Vec<Chart>,
        family: Family,
        label: impl Into<String>,
    ) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidChart("dimension must be positive".into()));
        }
        if charts.is_empty() {
            return Err(GeometryError::InvalidChart("no charts".into()));
        }
        for c in &charts {
            if c.dim() != dim || c.map.ambient_dim() != dim + 2 {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        Ok(ParametrizedHypersurface {
            dim,
            charts,
            family,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, index: usize) -> Result<&Chart, GeometryError> {
        self.charts.get(index).ok_or(GeometryError::NoSuchChart(index))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn shape_at(&self, chart: usize, u: &[f64]) -> Result<ShapeData, GeometryError> {
        shape_at(self, chart, u)
    }

    /// Total area by the tensor quadrature of [`crate::quadrature`].
    pub fn area(&self, nodes_per_axis: usize) -> Result<f64, GeometryError> {
        crate::quadrature::area(self, nodes_per_axis)
    }
}

/// Metric, normal and second fundamental form at one point.
#[derive(Clone, Debug)]
pub struct ShapeData {
    pub point: DVector<f64>,
    pub metric: DMatrix<f64>,
    pub metric_inverse: DMatrix<f64>,
    pub sqrt_det_metric: f64,
    /// Unit normal, tangent to `S^{n+1}`.
    pub normal: DVector<f64>,
    /// Lowered indices.
    pub second_fundamental_form: DMatrix<f64>,
    pub mean_curvature: f64,
    /// `|A|² = g^{ac} g^{bd} A_ab A_cd`.
    pub norm_a2: f64,
}

impl ShapeData {
    pub fn norm_a(&self) -> f64 {
        self.norm_a2.max(0.0).sqrt()
    }

    /// Eigenvalues of the shape operator, descending.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        let chol = self
            .metric
            .clone()
            .cholesky()
            .expect("metric is positive definite");
        let l_inv = chol.l().try_inverse().expect("triangular factor is invertible");
        let sym = &l_inv * &self.second_fundamental_form * l_inv.transpose();
        let sym = (&sym + sym.transpose()) * 0.5;
        let mut k: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        k.sort_by(|a, b| b.total_cmp(a));
        k
    }

    /// Projection of an ambient vector onto the tangent space, returned as
    /// chart components `⟨X_i, v⟩`.
    pub fn tangent_components(jet: &Jet, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(jet.dim(), jet.first.iter().map(|x| x.dot(v)))
    }
}

/// Shape data at `u` in chart `chart`.
pub fn shape_at(
    surface: &ParametrizedHypersurface,
    chart: usize,
    u: &[f64],
) -> Result<ShapeData, GeometryError> {
    jet_and_shape(surface, chart, u).map(|(_, shape)| shape)
}

/// The chart jet at `u` together with the shape data computed from it.
pub fn jet_and_shape(
    surface: &ParametrizedHypersurface,
    chart: usize,
    u: &[f64],
) -> Result<(Jet, ShapeData), GeometryError> {
    let c = surface.chart(chart)?;
    if u.len() != c.dim() {
        return Err(GeometryError::DimensionMismatch {
            expected: c.dim(),
            got: u.len(),
        });
    }
    let jet = c.jet(u);
    let shape = shape_from_jet(&jet, c.map.normal(u)).map_err(|e| match e {
        ShapeFailure::Drift(drift) => GeometryError::ImmersionDrift {
            chart,
            u: u.to_vec(),
            drift,
        },
        ShapeFailure::Degenerate(condition) => GeometryError::DegenerateChart {
            chart,
            u: u.to_vec(),
            condition,
        },
    })?;
    Ok((jet, shape))
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum ShapeFailure {
    Drift(f64),
    Degenerate(f64),
}

/// Metric data without curvature: `(g, g⁻¹, √det g)`.
pub(crate) fn metric_data(jet: &Jet) -> Result<(DMatrix<f64>, DMatrix<f64>, f64), ShapeFailure> {
    let g = jet.metric();
    let eig = g.clone().symmetric_eigenvalues();
    let (min, max) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v.abs())));
    if !(min > 0.0) || !(max / min <= DEGENERATE_CONDITION) {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(ShapeFailure::Degenerate(condition));
    }
    let sqrt_det = eig.iter().product::<f64>().sqrt();
    let g_inv = g
        .clone()
        .cholesky()
        .ok_or(ShapeFailure::Degenerate(f64::INFINITY))?
        .inverse();
    Ok((g, g_inv, sqrt_det))
}

/// Unit normal orthogonal to `X` and every `∂_i X`, oriented so that
/// `det[ν, X, ∂_1 X, …, ∂_n X] > 0`.
pub(crate) fn cofactor_normal(jet: &Jet) -> DVector<f64> {
    let n = jet.dim();
    let dim = n + 2;
    let columns: Vec<&DVector<f64>> = std::iter::once(&jet.point).chain(jet.first.iter()).collect();
    let mut nu = DVector::zeros(dim);
    for k in 0..dim {
        let minor = DMatrix::from_fn(n + 1, n + 1, |r, c| {
            let row = if r < k { r } else { r + 1 };
            columns[c][row]
        });
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        nu[k] = sign * minor.determinant();
    }
    let norm = nu.norm();
    nu / norm
}

pub(crate) fn shape_from_jet(
    jet: &Jet,
    normal: Option<DVector<f64>>,
) -> Result<ShapeData, ShapeFailure> {
    let drift = jet.point.norm() - 1.0;
    if drift.abs() > DRIFT_TOLERANCE {
        return Err(ShapeFailure::Drift(drift));
    }
    let (metric, metric_inverse, sqrt_det_metric) = metric_data(jet)?;
    let normal = normal.unwrap_or_else(|| cofactor_normal(jet));
    let n = jet.dim();
    let a = DMatrix::from_fn(n, n, |i, j| -normal.dot(jet.second(i, j)));
    let a = (&a + a.transpose()) * 0.5;
    let mixed = &metric_inverse * &a;
    let mean_curvature = mixed.trace();
    let norm_a2 = (&mixed * &mixed).trace();
    Ok(ShapeData {
        point: jet.point.clone(),
        metric,
        metric_inverse,
        sqrt_det_metric,
        normal,
        second_fundamental_form: a,
        mean_curvature,
        norm_a2,
    })
}

/// `A_ij = ⟨∂_i ν, ∂_j X⟩` with `∂_i ν` from central differences of the
/// normal with step `h`. Used to cross-check the second-derivative formula.
pub fn second_fundamental_form_from_normal(
    surface: &ParametrizedHypersurface,
    chart: usize,
    u: &[f64],
    h: f64,
) -> Result<DMatrix<f64>, GeometryError> {
    let c = surface.chart(chart)?;
    let n = c.dim();
    let normal_at = |v: &[f64]| -> Result<DVector<f64>, GeometryError> {
        Ok(shape_at(surface, chart, v)?.normal)
    };
    let jet = c.jet(u);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[i] += h;
        dn[i] -= h;
        let dnu = (normal_at(&up)? - normal_at(&dn)?) / (2.0 * h);
        for j in 0..n {
            a[(i, j)] = dnu.dot(&jet.first[j]);
        }
    }
    Ok(a)
}
