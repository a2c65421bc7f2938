//! Ball covers of finite singular sets and the cutoff functions built on
//! them.
//!
//! Two constructions are provided:
//!
//! * the *inf* cutoff `φ = min_i φ_i`, where `φ_i` vanishes on the geodesic
//!   ball `B(p_i, r_i)`, equals one outside `B(p_i, 2r_i)` and ramps in
//!   between;
//! * the *product* cutoff `φ = Π_i φ_i` on Euclidean balls, where `φ_i`
//!   vanishes on `B(p_i, r_i/2)` and equals one outside `B(p_i, r_i)`.
//!
//! Both use the quintic smoothstep as ramp profile. The combinatorial side
//! (Vitali discard, dyadic radius classes, intersection counts) lives here,
//! the integral estimates in [`integrals`].

mod field;
pub mod integrals;

use std::collections::BTreeMap;
use std::io::BufRead;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
pub use crate::quadrature::BallMetric;

pub use field::{smoothstep, smoothstep_derivatives, CutoffField, CutoffKind, CutoffSample};
pub use integrals::{
    gradient_integral_estimate, ibp_residual, mr_quality_report, GradientReport, IbpReport,
    MrReport, SamplingOptions,
};

/// Share of the budget `ε` spent by the default radius choice.
pub const BUDGET_FILL: f64 = 0.9;

/// Cap on the default radius when the budget is large.
pub const MAX_DEFAULT_RADIUS: f64 = 0.5;

/// Ball radius used when `q = n`, where the budget does not depend on radii.
pub const SCALE_FREE_RADIUS: f64 = 0.25;

#[derive(Debug, Error)]
pub enum CutoffError {
    #[error(
        "ball budget infeasible: Σ r^(n−q) = {sum} is not below ε = {epsilon} \
         (raise ε or lower the minimum radius)"
    )]
    BudgetInfeasible { sum: f64, epsilon: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("intersection bound violated: degree {degree} exceeds {bound}")]
    BoundViolated { degree: usize, bound: f64 },
    #[error("standard error {stderr} exceeds 10% of the bound {bound}")]
    InsufficientSamples { stderr: f64, bound: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point cloud line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: DVector<f64>, radius: f64) -> Self {
        Ball { center, radius }
    }
}

/// Finite cover of a singular set with its budget `Σ r_i^(n−q) < ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCover {
    pub balls: Vec<Ball>,
    pub metric: BallMetric,
    /// Dimension of the hypersurface.
    pub n: usize,
    pub q: usize,
    pub epsilon: f64,
    pub satisfied: bool,
}

impl BallCover {
    /// Wraps explicit balls, recording whether they meet the budget.
    pub fn from_balls(balls: Vec<Ball>, metric: BallMetric, n: usize, q: usize, epsilon: f64) -> Self {
        let mut cover = BallCover {
            balls,
            metric,
            n,
            q,
            epsilon,
            satisfied: false,
        };
        cover.satisfied = cover.budget_sum() < epsilon && cover.balls.iter().all(|b| b.radius < 1.0);
        cover
    }

    pub fn empty(metric: BallMetric, n: usize, q: usize, epsilon: f64) -> Self {
        BallCover::from_balls(Vec::new(), metric, n, q, epsilon)
    }

    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    /// `Σ r_i^(n−q)`.
    pub fn budget_sum(&self) -> f64 {
        let e = self.n.saturating_sub(self.q) as i32;
        self.balls.iter().map(|b| b.radius.powi(e)).sum()
    }

    /// Dyadic classes `B_m = {i : 2^m ≤ r_i < 2^(m+1)}`.
    pub fn dyadic_classes(&self) -> BTreeMap<i32, Vec<usize>> {
        let mut classes: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for (i, b) in self.balls.iter().enumerate() {
            classes.entry(dyadic_class(b.radius)).or_default().push(i);
        }
        classes
    }
}

/// The `m` with `2^m ≤ r < 2^(m+1)`.
pub fn dyadic_class(r: f64) -> i32 {
    assert!(r > 0.0 && r.is_finite(), "radius must be positive");
    let mut m = r.log2().floor() as i32;
    while 2f64.powi(m) > r {
        m -= 1;
    }
    while 2f64.powi(m + 1) <= r {
        m += 1;
    }
    m
}

/// How [`cover_singular_set`] sizes its balls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverParams {
    pub n: usize,
    pub q: usize,
    pub epsilon: f64,
    pub metric: BallMetric,
    /// The points of a cluster lie in `B(p, core_fraction · r)`.
    pub core_fraction: f64,
    /// Smallest ball radius; by default `(0.9 ε / #points)^(1/(n−q))`.
    pub min_radius: Option<f64>,
}

impl CoverParams {
    /// Geodesic balls containing their points, for the inf cutoff.
    pub fn inf(n: usize, q: usize, epsilon: f64) -> Self {
        CoverParams {
            n,
            q,
            epsilon,
            metric: BallMetric::Geodesic,
            core_fraction: 1.0,
            min_radius: None,
        }
    }

    /// Euclidean balls whose sixth-balls contain their points, so that the
    /// half-balls kept by [`vitali_discard`] still cover the set.
    pub fn product(n: usize, q: usize, epsilon: f64) -> Self {
        CoverParams {
            n,
            q,
            epsilon,
            metric: BallMetric::Euclidean,
            core_fraction: 1.0 / 6.0,
            min_radius: None,
        }
    }

    pub fn with_min_radius(mut self, r: f64) -> Self {
        self.min_radius = Some(r);
        self
    }
}

/// Greedy cover: points closer than the core of the minimum radius are
/// merged (single linkage), and every cluster gets one ball centred at its
/// most central member.
pub fn cover_singular_set(
    points: &[DVector<f64>],
    params: &CoverParams,
) -> Result<BallCover, CutoffError> {
    if !(params.epsilon > 0.0) || !params.epsilon.is_finite() {
        return Err(CutoffError::InvalidParameter(format!(
            "ε must be positive, got {}",
            params.epsilon
        )));
    }
    if params.q > params.n {
        return Err(CutoffError::InvalidParameter(format!(
            "exponent q = {} exceeds the dimension n = {}",
            params.q, params.n
        )));
    }
    if !(params.core_fraction > 0.0 && params.core_fraction <= 1.0) {
        return Err(CutoffError::InvalidParameter(
            "core fraction must lie in (0, 1]".into(),
        ));
    }
    if points.is_empty() {
        return Ok(BallCover::empty(params.metric, params.n, params.q, params.epsilon));
    }
    let e = (params.n - params.q) as i32;
    let count = points.len() as f64;
    let r_min = match params.min_radius {
        Some(r) if r > 0.0 => r,
        Some(r) => {
            return Err(CutoffError::InvalidParameter(format!(
                "minimum radius must be positive, got {r}"
            )))
        }
        None if e == 0 => SCALE_FREE_RADIUS,
        None => (BUDGET_FILL * params.epsilon / count)
            .powf(1.0 / e as f64)
            .min(MAX_DEFAULT_RADIUS),
    };
    let floor_sum = count * r_min.powi(e);
    if floor_sum >= params.epsilon {
        return Err(CutoffError::BudgetInfeasible {
            sum: floor_sum,
            epsilon: params.epsilon,
        });
    }

    let metric = params.metric;
    let link = params.core_fraction * r_min;
    let clusters = single_linkage(points, |a, b| metric.distance(a, b) <= link);
    let mut balls = Vec::with_capacity(clusters.len());
    for members in clusters {
        let (center, spread) = members
            .iter()
            .map(|&c| {
                let spread = members
                    .iter()
                    .map(|&m| metric.distance(&points[c], &points[m]))
                    .fold(0.0, f64::max);
                (c, spread)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("clusters are nonempty");
        let radius = r_min.max(spread / params.core_fraction);
        balls.push(Ball::new(points[center].clone(), radius));
    }
    let cover = BallCover::from_balls(balls, metric, params.n, params.q, params.epsilon);
    if !cover.satisfied {
        return Err(CutoffError::BudgetInfeasible {
            sum: cover.budget_sum(),
            epsilon: params.epsilon,
        });
    }
    Ok(cover)
}

/// Connected components of the graph with edges where `linked` holds,
/// each sorted, ordered by smallest member.
fn single_linkage<F>(points: &[DVector<f64>], linked: F) -> Vec<Vec<usize>>
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> bool,
{
    let mut label: Vec<Option<usize>> = vec![None; points.len()];
    let mut clusters = Vec::new();
    for start in 0..points.len() {
        if label[start].is_some() {
            continue;
        }
        let id = clusters.len();
        label[start] = Some(id);
        let mut members = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..points.len() {
                if label[j].is_none() && linked(&points[i], &points[j]) {
                    label[j] = Some(id);
                    members.push(j);
                    stack.push(j);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    clusters
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Visits balls by decreasing radius (ties by lexicographic center) and
/// drops every ball whose sixth-ball meets the sixth-ball of one already
/// kept. Kept sixth-balls are pairwise disjoint, and each dropped sixth-ball
/// lies in the half-ball of the kept ball it met.
pub fn vitali_discard(cover: &BallCover) -> BallCover {
    let mut order: Vec<&Ball> = cover.balls.iter().collect();
    order.sort_by(|a, b| {
        b.radius
            .total_cmp(&a.radius)
            .then_with(|| lexicographic(&a.center, &b.center))
    });
    let mut kept: Vec<Ball> = Vec::new();
    for ball in order {
        let meets = kept.iter().any(|k| {
            cover.metric.distance(&k.center, &ball.center) < (k.radius + ball.radius) / 6.0
        });
        if !meets {
            kept.push(ball.clone());
        }
    }
    BallCover::from_balls(kept, cover.metric, cover.n, cover.q, cover.epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    /// Largest number of other balls meeting one ball.
    pub max_degree: usize,
    /// `(3αβ)^N − 1`.
    pub bound: f64,
}

fn euclidean(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm()
}

/// Brute-force intersection degree of Euclidean balls in `R^N` whose
/// shrunken balls `B(p_i, r_i/α)` are pairwise disjoint and whose radii
/// satisfy `sup r ≤ β inf r`.
pub fn intersection_bound_check(
    balls: &[Ball],
    alpha: f64,
    beta: f64,
) -> Result<IntersectionReport, CutoffError> {
    if !(alpha >= 1.0 && beta >= 1.0) {
        return Err(CutoffError::InvalidParameter(format!(
            "α and β must be at least 1, got {alpha} and {beta}"
        )));
    }
    let dim = balls.first().map_or(0, |b| b.center.len());
    if balls.iter().any(|b| b.center.len() != dim || !(b.radius > 0.0)) {
        return Err(CutoffError::PreconditionViolated(
            "balls need a common dimension and positive radii".into(),
        ));
    }
    let bound = (3.0 * alpha * beta).powi(dim as i32) - 1.0;
    if balls.is_empty() {
        return Ok(IntersectionReport { max_degree: 0, bound });
    }
    let inf = balls.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min);
    let sup = balls.iter().map(|b| b.radius).fold(0.0, f64::max);
    if sup > beta * inf {
        return Err(CutoffError::PreconditionViolated(format!(
            "radii not comparable: sup {sup} > β·inf = {}",
            beta * inf
        )));
    }
    let mut degree = vec![0usize; balls.len()];
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let d = euclidean(&balls[i].center, &balls[j].center);
            let (ri, rj) = (balls[i].radius, balls[j].radius);
            if d < (ri + rj) / alpha {
                return Err(CutoffError::PreconditionViolated(format!(
                    "shrunken balls {i} and {j} overlap"
                )));
            }
            if d <= ri + rj {
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    let max_degree = degree.into_iter().max().unwrap_or(0);
    if max_degree as f64 > bound {
        return Err(CutoffError::BoundViolated {
            degree: max_degree,
            bound,
        });
    }
    Ok(IntersectionReport { max_degree, bound })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCountReport {
    /// `max #{i ∈ B_m : p_j ∈ B(p_i, r_i + r_j)}` over balls `j` and classes
    /// `m` at least as large as that of `j`.
    pub max_count: usize,
    /// `108^N`.
    pub bound: f64,
}

/// Counts, for each ball `j` and each dyadic class `m ≥ m_j`, the balls of
/// class `m` whose enlargement `B(p_i, r_i + r_j)` contains `p_j`. Requires
/// pairwise disjoint sixth-balls, as produced by [`vitali_discard`].
pub fn class_intersection_counts(cover: &BallCover) -> Result<ClassCountReport, CutoffError> {
    let balls = &cover.balls;
    let dim = balls.first().map_or(0, |b| b.center.len());
    let bound = 108f64.powi(dim as i32);
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let d = cover.metric.distance(&balls[i].center, &balls[j].center);
            if d < (balls[i].radius + balls[j].radius) / 6.0 {
                return Err(CutoffError::PreconditionViolated(format!(
                    "sixth-balls {i} and {j} overlap"
                )));
            }
        }
    }
    let classes = cover.dyadic_classes();
    let mut max_count = 0;
    for bj in balls {
        let mj = dyadic_class(bj.radius);
        for (_, members) in classes.range(mj..) {
            let count = members
                .iter()
                .filter(|&&i| {
                    cover.metric.distance(&balls[i].center, &bj.center) < balls[i].radius + bj.radius
                })
                .count();
            max_count = max_count.max(count);
        }
    }
    if max_count as f64 > bound {
        return Err(CutoffError::BoundViolated {
            degree: max_count,
            bound,
        });
    }
    Ok(ClassCountReport { max_count, bound })
}

/// Reads one point per line (`dim` whitespace-separated numbers); blank
/// lines and text after `#` are ignored.
pub fn read_point_cloud<R: BufRead>(reader: R, dim: usize) -> Result<Vec<DVector<f64>>, CutoffError> {
    let mut points = Vec::new();
    for (number, line) in reader.lines().enumerate() {
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let coords = content
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|_| CutoffError::Parse {
                    line: number + 1,
                    message: format!("cannot parse `{t}`"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if coords.len() != dim {
            return Err(CutoffError::Parse {
                line: number + 1,
                message: format!("expected {dim} coordinates, found {}", coords.len()),
            });
        }
        points.push(DVector::from_vec(coords));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn one_point_gets_one_ball_within_budget() {
        let p = vec![point(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0])];
        let cover = cover_singular_set(&p, &CoverParams::inf(4, 2, 0.1)).unwrap();
        assert_eq!(cover.len(), 1);
        let r = cover.balls[0].radius;
        assert!((r - 0.3).abs() < 1e-12);
        assert!(r * r < 0.1);
        assert!(cover.satisfied);
    }

    #[test]
    fn empty_set_gives_empty_cover() {
        let cover = cover_singular_set(&[], &CoverParams::inf(2, 1, 0.1)).unwrap();
        assert!(cover.is_empty() && cover.satisfied);
    }

    #[test]
    fn separated_points_share_the_budget_equally() {
        let points: Vec<_> = (0..10)
            .map(|i| {
                let mut v = vec![0.0; 9];
                v[i % 9] = if i < 9 { 1.0 } else { -1.0 };
                point(&v)
            })
            .collect();
        let cover = cover_singular_set(&points, &CoverParams::inf(7, 4, 0.01)).unwrap();
        assert_eq!(cover.len(), 10);
        for b in &cover.balls {
            assert!(b.radius.powi(3) < 1e-3 && b.radius < 0.1);
        }
        assert!(cover.budget_sum() < 0.01);
    }

    #[test]
    fn nearby_points_are_merged_and_covered() {
        let points = vec![point(&[1.0, 0.0, 0.0]), point(&[0.999_95, 0.01, 0.0])];
        let points: Vec<_> = points.into_iter().map(|p| p.normalize()).collect();
        let cover = cover_singular_set(&points, &CoverParams::inf(1, 0, 0.5)).unwrap();
        assert_eq!(cover.len(), 1);
        for p in &points {
            assert!(cover.metric.distance(p, &cover.balls[0].center) <= cover.balls[0].radius);
        }
    }

    #[test]
    fn infeasible_budgets_are_reported() {
        let p = vec![point(&[0.0, 0.0, 1.0, 0.0])];
        assert!(matches!(
            cover_singular_set(&p, &CoverParams::inf(2, 2, 0.1)),
            Err(CutoffError::BudgetInfeasible { .. })
        ));
        assert!(matches!(
            cover_singular_set(&p, &CoverParams::inf(2, 1, 0.1).with_min_radius(0.2)),
            Err(CutoffError::BudgetInfeasible { .. })
        ));
        let cover = cover_singular_set(&p, &CoverParams::inf(2, 2, 1.5)).unwrap();
        assert_eq!(cover.balls[0].radius, SCALE_FREE_RADIUS);
    }

    #[test]
    fn dyadic_classes_are_exact_at_powers_of_two() {
        assert_eq!(dyadic_class(1.0), 0);
        assert_eq!(dyadic_class(0.5), -1);
        assert_eq!(dyadic_class(0.499_999), -2);
        assert_eq!(dyadic_class(0.75), -1);
        assert_eq!(dyadic_class(2f64.powi(-10)), -10);
    }

    #[test]
    fn vitali_on_trivial_families() {
        let b = Ball::new(point(&[0.0, 0.0]), 0.3);
        let cover = BallCover::from_balls(vec![b.clone(), b], BallMetric::Euclidean, 2, 1, 1.0);
        assert_eq!(vitali_discard(&cover).len(), 1);
        let far = BallCover::from_balls(
            (0..5).map(|i| Ball::new(point(&[i as f64, 0.0]), 0.2)).collect(),
            BallMetric::Euclidean,
            2,
            1,
            10.0,
        );
        assert_eq!(vitali_discard(&far).len(), 5);
    }

    #[test]
    fn vitali_keeps_disjoint_sixths_and_coverage() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let balls: Vec<Ball> = (0..50)
            .map(|_| {
                let c = point(&[rng.random(), rng.random(), rng.random()]);
                Ball::new(c, rng.random_range(0.05..0.5))
            })
            .collect();
        let cover = BallCover::from_balls(balls, BallMetric::Euclidean, 3, 0, 100.0);
        let kept = vitali_discard(&cover);
        for (i, a) in kept.balls.iter().enumerate() {
            for b in &kept.balls[i + 1..] {
                assert!((&a.center - &b.center).norm() >= (a.radius + b.radius) / 6.0);
            }
        }
        for b in &cover.balls {
            assert!(kept
                .balls
                .iter()
                .any(|k| (&k.center - &b.center).norm() + b.radius / 6.0 <= k.radius / 2.0 + 1e-12));
        }
        let mut reversed = cover.clone();
        reversed.balls.reverse();
        assert_eq!(vitali_discard(&reversed), kept);
        class_intersection_counts(&kept).unwrap();
    }

    #[test]
    fn packed_unit_intervals() {
        let balls: Vec<Ball> = (0..10).map(|i| Ball::new(point(&[2.0 * i as f64]), 1.0)).collect();
        let r = intersection_bound_check(&balls, 1.0, 1.0).unwrap();
        assert_eq!(r.max_degree, 2);
        assert_eq!(r.bound, 2.0);
    }

    #[test]
    fn intersection_preconditions_are_checked() {
        let balls = vec![Ball::new(point(&[0.0]), 1.0), Ball::new(point(&[1.0]), 1.0)];
        assert!(matches!(
            intersection_bound_check(&balls, 1.0, 1.0),
            Err(CutoffError::PreconditionViolated(_))
        ));
        let balls = vec![Ball::new(point(&[0.0]), 1.0), Ball::new(point(&[9.0]), 3.0)];
        assert!(matches!(
            intersection_bound_check(&balls, 1.0, 2.0),
            Err(CutoffError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn point_clouds_parse() {
        let text = "# two points\n1 0 0 0\n\n0 1 0 0 # second\n";
        let pts = read_point_cloud(text.as_bytes(), 4).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(matches!(
            read_point_cloud("1 0 0\n".as_bytes(), 4),
            Err(CutoffError::Parse { line: 1, .. })
        ));
    }
}
