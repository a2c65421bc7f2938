//! Quadrature and Monte Carlo integration over parametrized hypersurfaces.
//!
//! Periodic axes use the trapezoid rule, non-periodic axes Gauss–Legendre,
//! so that no node sits on a coordinate pole. Localized integrands are
//! handled on adaptively refined parameter cells, either by a per-cell
//! Gauss–Legendre rule or by stratified Monte Carlo with replicate-based
//! standard errors.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{
    chord_to_arc, jet_and_shape, GeometryError, Jet, ParametrizedHypersurface, ShapeData,
};

/// Monte Carlo samples stay this far from the ends of non-periodic axes.
pub const SAMPLE_GUARD: f64 = crate::geometry::POLE_MARGIN;

/// Safety factor applied to the measured volume-growth ratio.
pub const VOLUME_GROWTH_SAFETY: f64 = 1.1;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if m == 1 { x } else { p1 };
            let prev = if m == 1 { 1.0 } else { p0 };
            dp = m as f64 * (x * p - prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            dp = 1.0;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// One-dimensional rule on an interval.
#[derive(Clone, Debug)]
pub struct AxisRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl AxisRule {
    /// Trapezoid rule (periodic) or Gauss–Legendre (otherwise) with `m` nodes.
    pub fn new(lo: f64, hi: f64, periodic: bool, m: usize) -> Self {
        let len = hi - lo;
        if periodic {
            let h = len / m as f64;
            AxisRule {
                nodes: (0..m).map(|j| lo + (j as f64 + 0.5) * h).collect(),
                weights: vec![h; m],
            }
        } else {
            Self::gauss(lo, hi, m)
        }
    }

    pub fn gauss(lo: f64, hi: f64, m: usize) -> Self {
        let (x, w) = gauss_legendre(m);
        let half = 0.5 * (hi - lo);
        AxisRule {
            nodes: x.iter().map(|t| lo + half * (t + 1.0)).collect(),
            weights: w.iter().map(|w| w * half).collect(),
        }
    }
}

/// Every point of a tensor rule over a product of axis rules, with the
/// product weight.
fn tensor_nodes(rules: &[AxisRule]) -> Vec<(Vec<f64>, f64)> {
    let total: usize = rules.iter().map(|r| r.nodes.len()).product();
    (0..total)
        .map(|mut flat| {
            let mut u = vec![0.0; rules.len()];
            let mut w = 1.0;
            for (a, rule) in rules.iter().enumerate().rev() {
                let m = rule.nodes.len();
                let i = flat % m;
                flat /= m;
                u[a] = rule.nodes[i];
                w *= rule.weights[i];
            }
            (u, w)
        })
        .collect()
}

/// Everything an integrand may need at one surface point.
#[derive(Clone, Debug)]
pub struct SurfaceSample {
    pub chart: usize,
    pub u: Vec<f64>,
    pub jet: Jet,
    pub shape: ShapeData,
}

impl SurfaceSample {
    pub fn new(
        surface: &ParametrizedHypersurface,
        chart: usize,
        u: Vec<f64>,
    ) -> Result<Self, GeometryError> {
        let (jet, shape) = jet_and_shape(surface, chart, &u)?;
        Ok(SurfaceSample {
            chart,
            u,
            jet,
            shape,
        })
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.shape.point
    }
}

/// `∫_M f` by the tensor rule with `nodes_per_axis` nodes on every axis of
/// every chart.
pub fn integrate<F>(
    surface: &ParametrizedHypersurface,
    nodes_per_axis: usize,
    f: F,
) -> Result<f64, GeometryError>
where
    F: Fn(&SurfaceSample) -> f64 + Sync,
{
    let mut total = 0.0;
    for (ci, chart) in surface.charts().iter().enumerate() {
        let rules: Vec<AxisRule> = chart
            .domain()
            .iter()
            .zip(chart.periodic())
            .map(|(&(lo, hi), &p)| AxisRule::new(lo, hi, p, nodes_per_axis))
            .collect();
        let values = tensor_nodes(&rules)
            .into_par_iter()
            .map(|(u, w)| {
                let s = SurfaceSample::new(surface, ci, u)?;
                Ok(w * s.shape.sqrt_det_metric * f(&s))
            })
            .collect::<Result<Vec<f64>, GeometryError>>()?;
        total += values.iter().sum::<f64>();
    }
    Ok(total)
}

pub fn area(surface: &ParametrizedHypersurface, nodes_per_axis: usize) -> Result<f64, GeometryError> {
    integrate(surface, nodes_per_axis, |_| 1.0)
}

/// Quadrature nodes as ambient points with area weights.
pub fn weighted_points(
    surface: &ParametrizedHypersurface,
    nodes_per_axis: usize,
) -> Result<Vec<(DVector<f64>, f64)>, GeometryError> {
    let mut out = Vec::new();
    for (ci, chart) in surface.charts().iter().enumerate() {
        let rules: Vec<AxisRule> = chart
            .domain()
            .iter()
            .zip(chart.periodic())
            .map(|(&(lo, hi), &p)| AxisRule::new(lo, hi, p, nodes_per_axis))
            .collect();
        let part = tensor_nodes(&rules)
            .into_par_iter()
            .map(|(u, w)| {
                let (_, shape) = jet_and_shape(surface, ci, &u)?;
                Ok((shape.point, w * shape.sqrt_det_metric))
            })
            .collect::<Result<Vec<_>, GeometryError>>()?;
        out.extend(part);
    }
    Ok(out)
}

/// A box in the parameter domain of one chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCell {
    pub chart: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub depth: u32,
}

impl ParamCell {
    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// The `2^n` halves along every axis.
    pub fn split(&self) -> Vec<ParamCell> {
        let n = self.lo.len();
        let mid = self.center();
        (0..1usize << n)
            .map(|mask| {
                let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
                for a in 0..n {
                    if mask & (1 << a) == 0 {
                        hi[a] = mid[a];
                    } else {
                        lo[a] = mid[a];
                    }
                }
                ParamCell {
                    chart: self.chart,
                    lo,
                    hi,
                    depth: self.depth + 1,
                }
            })
            .collect()
    }

    /// Rough ambient diameter from the chart derivatives at the center.
    pub fn ambient_diameter(&self, surface: &ParametrizedHypersurface) -> f64 {
        let jet = surface.charts()[self.chart].jet(&self.center());
        jet.first
            .iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(x, (a, b))| x.norm() * (b - a))
            .sum()
    }
}

/// Uniform grid of `per_axis^n` cells on every chart.
pub fn initial_cells(surface: &ParametrizedHypersurface, per_axis: usize) -> Vec<ParamCell> {
    let mut cells = Vec::new();
    for (ci, chart) in surface.charts().iter().enumerate() {
        let n = chart.dim();
        let total = per_axis.pow(n as u32);
        for mut flat in 0..total {
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for a in (0..n).rev() {
                let i = flat % per_axis;
                flat /= per_axis;
                let (l, h) = chart.domain()[a];
                let step = (h - l) / per_axis as f64;
                lo[a] = l + i as f64 * step;
                hi[a] = if i + 1 == per_axis { h } else { l + (i + 1) as f64 * step };
            }
            cells.push(ParamCell {
                chart: ci,
                lo,
                hi,
                depth: 0,
            });
        }
    }
    cells
}

/// Splits every cell selected by `refine` until none is selected or
/// `max_depth` is reached. Output order depends only on the input.
pub fn refine_cells<P>(cells: Vec<ParamCell>, max_depth: u32, refine: P) -> Vec<ParamCell>
where
    P: Fn(&ParamCell) -> bool + Sync,
{
    let mut out = Vec::with_capacity(cells.len());
    let mut pending = cells;
    while !pending.is_empty() {
        let flags: Vec<bool> = pending
            .par_iter()
            .map(|c| c.depth < max_depth && refine(c))
            .collect();
        let mut next = Vec::new();
        for (cell, split) in pending.into_iter().zip(flags) {
            if split {
                next.extend(cell.split());
            } else {
                out.push(cell);
            }
        }
        pending = next;
    }
    out
}

/// `∫_M f` by an `order`-point Gauss–Legendre tensor rule on each cell.
pub fn integrate_cells<F>(
    surface: &ParametrizedHypersurface,
    cells: &[ParamCell],
    order: usize,
    f: F,
) -> Result<f64, GeometryError>
where
    F: Fn(&SurfaceSample) -> f64 + Sync,
{
    Ok(integrate_cells_terms(surface, cells, order, |s| [f(s)])?[0])
}

/// [`integrate_cells`] for `K` integrands sharing their samples.
pub fn integrate_cells_terms<const K: usize, F>(
    surface: &ParametrizedHypersurface,
    cells: &[ParamCell],
    order: usize,
    f: F,
) -> Result<[f64; K], GeometryError>
where
    F: Fn(&SurfaceSample) -> [f64; K] + Sync,
{
    let values = cells
        .par_iter()
        .map(|cell| {
            let rules: Vec<AxisRule> = cell
                .lo
                .iter()
                .zip(&cell.hi)
                .map(|(&a, &b)| AxisRule::gauss(a, b, order))
                .collect();
            let mut sum = [0.0; K];
            for (u, w) in tensor_nodes(&rules) {
                let s = SurfaceSample::new(surface, cell.chart, u)?;
                let scale = w * s.shape.sqrt_det_metric;
                for (acc, v) in sum.iter_mut().zip(f(&s)) {
                    *acc += scale * v;
                }
            }
            Ok(sum)
        })
        .collect::<Result<Vec<[f64; K]>, GeometryError>>()?;
    let mut total = [0.0; K];
    for v in values {
        for (t, x) in total.iter_mut().zip(v) {
            *t += x;
        }
    }
    Ok(total)
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate {
            mean: self.mean * c,
            stderr: self.stderr * c.abs(),
        }
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for one (replicate, cell) stream.
pub fn stream_rng(seed: u64, replicate: u64, cell: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed) ^ replicate) ^ cell))
}

/// Stratified Monte Carlo estimate of `∫_M f`: one uniform point per cell
/// per replicate, standard error from the spread of the replicate totals.
pub fn stratified_estimate<F>(
    surface: &ParametrizedHypersurface,
    cells: &[ParamCell],
    replicates: usize,
    seed: u64,
    f: F,
) -> Result<Estimate, GeometryError>
where
    F: Fn(&SurfaceSample) -> f64 + Sync,
{
    Ok(stratified_estimate_terms(surface, cells, replicates, seed, |s| [f(s)])?[0])
}

/// [`stratified_estimate`] for `K` integrands sharing their samples.
pub fn stratified_estimate_terms<const K: usize, F>(
    surface: &ParametrizedHypersurface,
    cells: &[ParamCell],
    replicates: usize,
    seed: u64,
    f: F,
) -> Result<[Estimate; K], GeometryError>
where
    F: Fn(&SurfaceSample) -> [f64; K] + Sync,
{
    assert!(replicates >= 2, "standard errors need at least two replicates");
    let per_cell = cells
        .par_iter()
        .enumerate()
        .map(|(ci, cell)| {
            let periodic = surface.charts()[cell.chart].periodic();
            let vol = cell.volume();
            (0..replicates)
                .map(|r| {
                    let mut rng = stream_rng(seed, r as u64, ci as u64);
                    let u: Vec<f64> = (0..cell.lo.len())
                        .map(|a| {
                            let (mut lo, mut hi) = (cell.lo[a], cell.hi[a]);
                            if !periodic[a] {
                                let (dlo, dhi) = surface.charts()[cell.chart].domain()[a];
                                lo = lo.max(dlo + SAMPLE_GUARD);
                                hi = hi.min(dhi - SAMPLE_GUARD);
                            }
                            rng.random_range(lo..hi)
                        })
                        .collect();
                    let s = SurfaceSample::new(surface, cell.chart, u)?;
                    let scale = vol * s.shape.sqrt_det_metric;
                    Ok(f(&s).map(|v| scale * v))
                })
                .collect::<Result<Vec<[f64; K]>, GeometryError>>()
        })
        .collect::<Result<Vec<Vec<[f64; K]>>, GeometryError>>()?;
    Ok(std::array::from_fn(|k| {
        let totals: Vec<f64> = (0..replicates)
            .map(|r| per_cell.iter().map(|v| v[r][k]).sum())
            .collect();
        mean_and_stderr(&totals)
    }))
}

pub fn mean_and_stderr(values: &[f64]) -> Estimate {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    Estimate {
        mean,
        stderr: (var / k).sqrt(),
    }
}

/// How balls around a point are measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMetric {
    /// Intrinsic distance of `S^{n+1}`.
    Geodesic,
    /// Distance of the ambient `R^{n+2}`.
    Euclidean,
}

impl BallMetric {
    pub fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let chord = (a - b).norm();
        match self {
            BallMetric::Geodesic => chord_to_arc(chord),
            BallMetric::Euclidean => chord,
        }
    }

    /// Largest radius at which the growth ratio is sampled.
    pub fn max_radius(&self) -> f64 {
        match self {
            BallMetric::Geodesic => std::f64::consts::PI,
            BallMetric::Euclidean => 1.0,
        }
    }
}

/// Sampling plan for [`volume_growth_constant`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeGrowthParams {
    pub centers: usize,
    pub radii: usize,
    pub min_radius: f64,
    /// Target total number of quadrature nodes.
    pub nodes: usize,
    pub seed: u64,
}

impl Default for VolumeGrowthParams {
    fn default() -> Self {
        VolumeGrowthParams {
            centers: 48,
            radii: 24,
            min_radius: 0.05,
            nodes: 1 << 16,
            seed: 0x00c0_ffee,
        }
    }
}

/// `C_V`: the largest sampled `area(M ∩ B_r(x)) / rⁿ` over centers on `M`
/// and geometrically spaced radii, times [`VOLUME_GROWTH_SAFETY`].
pub fn volume_growth_constant(
    surface: &ParametrizedHypersurface,
    metric: BallMetric,
    params: &VolumeGrowthParams,
) -> Result<f64, GeometryError> {
    let n = surface.dim();
    let per_axis = ((params.nodes as f64).powf(1.0 / n as f64).ceil() as usize).max(4);
    let points = weighted_points(surface, per_axis)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    // Ambient node spacing; ball indicators are smoothed over this width so
    // that the lattice does not alias into the small-radius ratios.
    let mut spacing = 0.0f64;
    for chart in surface.charts() {
        for _ in 0..16 {
            let u = chart.sample_interior(&mut rng, crate::geometry::POLE_MARGIN);
            let jet = chart.jet(&u);
            for (x, &(lo, hi)) in jet.first.iter().zip(chart.domain()) {
                spacing = spacing.max(x.norm() * (hi - lo) / per_axis as f64);
            }
        }
    }
    let r_min = params.min_radius.max(4.0 * spacing);
    let r_max = metric.max_radius();
    let radii: Vec<f64> = (0..params.radii)
        .map(|i| r_min * (r_max / r_min).powf(i as f64 / (params.radii - 1).max(1) as f64))
        .collect();
    let centers: Vec<DVector<f64>> = (0..params.centers)
        .map(|i| {
            let chart = &surface.charts()[i % surface.charts().len()];
            let u = chart.sample_interior(&mut rng, crate::geometry::POLE_MARGIN);
            chart.point(&u)
        })
        .collect();
    let half = 0.5 * spacing;
    let best = centers
        .par_iter()
        .map(|c| {
            let mut d: Vec<(f64, f64)> = points
                .iter()
                .map(|(p, w)| (metric.distance(c, p), *w))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut best = 0.0f64;
            let (mut inner, mut j) = (0.0, 0);
            for &r in &radii {
                while j < d.len() && d[j].0 <= r - half {
                    inner += d[j].1;
                    j += 1;
                }
                let band: f64 = d[j..]
                    .iter()
                    .take_while(|(dist, _)| *dist < r + half)
                    .map(|(dist, w)| w * (r + half - dist) / spacing)
                    .sum();
                best = best.max((inner + band) / r.powi(n as i32));
            }
            best
        })
        .collect::<Vec<f64>>();
    Ok(VOLUME_GROWTH_SAFETY * best.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford_hypersurface, equator, CliffordSpec};
    use std::f64::consts::PI;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for m in 1..=12 {
            let (x, w) = gauss_legendre(m);
            for p in 0..2 * m {
                let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "m = {m}, p = {p}");
            }
        }
    }

    #[test]
    fn areas_of_reference_surfaces() {
        let a = equator(2).area(256).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-6);
        let a = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap()).area(64).unwrap();
        assert!((a - 2.0 * PI * PI).abs() < 1e-8);
        let a = clifford_hypersurface(CliffordSpec::new(1, 2).unwrap()).area(48).unwrap();
        let exact = 2.0 * PI / 3f64.sqrt() * (4.0 * PI * 2.0 / 3.0);
        assert!((a - exact).abs() < 1e-6);
    }

    #[test]
    fn refined_cells_tile_the_domain() {
        let m = equator(2);
        let cells = initial_cells(&m, 4);
        let refined = refine_cells(cells, 3, |c| c.center()[0] < 0.5);
        let vol: f64 = refined.iter().map(ParamCell::volume).sum();
        assert!((vol - 2.0 * PI * PI).abs() < 1e-12);
        assert!(refined.iter().any(|c| c.depth == 3));
        let a = integrate_cells(&m, &refined, 6, |_| 1.0).unwrap();
        assert!((a - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn stratified_estimate_is_reproducible_and_accurate() {
        let m = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
        let cells = initial_cells(&m, 16);
        let f = |s: &SurfaceSample| s.point()[0].powi(2);
        let a = stratified_estimate(&m, &cells, 16, 7, f).unwrap();
        let b = stratified_estimate(&m, &cells, 16, 7, f).unwrap();
        assert_eq!(a, b);
        // x₀² = cos²θ / 2 averages to 1/4 over the torus of area 2π².
        let exact = 0.25 * 2.0 * PI * PI;
        assert!((a.mean - exact).abs() < 4.0 * a.stderr + 1e-12);
        assert!(a.stderr < 0.01 * exact);
    }

    #[test]
    fn volume_growth_of_great_sphere_is_near_pi() {
        let c = volume_growth_constant(&equator(2), BallMetric::Geodesic, &Default::default())
            .unwrap();
        // Geodesic disks on the unit S² have area 2π(1 − cos r) ≤ πr².
        assert!(c > 0.9 * PI * VOLUME_GROWTH_SAFETY && c < 1.05 * PI * VOLUME_GROWTH_SAFETY);
    }
}
