//! Evaluation of inf and product cutoffs with their ambient derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{Ball, BallCover, BallMetric};
use crate::fields::{surface_gradient, surface_laplacian};
use crate::quadrature::SurfaceSample;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    Inf,
    Product,
}

impl std::fmt::Display for CutoffKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CutoffKind::Inf => "inf",
            CutoffKind::Product => "product",
        })
    }
}

impl std::str::FromStr for CutoffKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "inf" => Ok(CutoffKind::Inf),
            "product" => Ok(CutoffKind::Product),
            other => Err(format!("unknown cutoff kind `{other}` (expected inf or product)")),
        }
    }
}

/// Quintic smoothstep `S(τ) = τ³(10 − 15τ + 6τ²)`, clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    smoothstep_derivatives(t).0
}

/// `(S, S', S'')` at `τ`; constant outside `[0, 1]`.
pub fn smoothstep_derivatives(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
        let ds = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let dds = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        (s, ds, dds)
    }
}

/// `sup_τ (2S')² + max(4|S''|, 4S'/(1+τ))`, the bound on
/// `r²(|Dφ_i|² + |D²φ_i|)` for the product profile `S(2ρ/r − 1)`.
fn product_profile_constant() -> f64 {
    let samples = 100_000;
    let sup = (0..=samples)
        .map(|i| {
            let t = i as f64 / samples as f64;
            let (_, ds, dds) = smoothstep_derivatives(t);
            4.0 * ds * ds + (4.0 * dds.abs()).max(4.0 * ds / (1.0 + t))
        })
        .fold(0.0, f64::max);
    // The sampled supremum misses the true one by O(1/samples²).
    sup * (1.0 + 1e-6)
}

/// Values of a cutoff on `M`: `φ`, its tangential gradient, and for the
/// product kind `Δ_M φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffSample {
    pub value: f64,
    pub gradient: DVector<f64>,
    pub laplacian: Option<f64>,
}

/// Per-ball radial data at one ambient point.
struct Radial {
    value: f64,
    gradient: DVector<f64>,
    hessian: Option<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffField {
    kind: CutoffKind,
    balls: Vec<Ball>,
    metric: BallMetric,
    epsilon: f64,
    n: usize,
    q: usize,
}

impl CutoffField {
    /// `φ = min_i S(d(x, p_i)/r_i − 1)`.
    pub fn inf(cover: &BallCover) -> Self {
        CutoffField::build(CutoffKind::Inf, cover)
    }

    /// `φ = Π_i S(2|x − p_i|/r_i − 1)`.
    pub fn product(cover: &BallCover) -> Self {
        CutoffField::build(CutoffKind::Product, cover)
    }

    pub fn build(kind: CutoffKind, cover: &BallCover) -> Self {
        CutoffField {
            kind,
            balls: cover.balls.clone(),
            metric: cover.metric,
            epsilon: cover.epsilon,
            n: cover.n,
            q: cover.q,
        }
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    pub fn metric(&self) -> BallMetric {
        self.metric
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn exponent(&self) -> usize {
        self.q
    }

    /// Distances between which ball `i`'s ramp rises from 0 to 1.
    pub fn ramp(&self, i: usize) -> (f64, f64) {
        let r = self.balls[i].radius;
        match self.kind {
            CutoffKind::Inf => (r, 2.0 * r),
            CutoffKind::Product => (0.5 * r, r),
        }
    }

    /// `C₀` with `|Dφ_i|² + |D²φ_i| ≤ C₀ r_i⁻²` for the product profile;
    /// for the inf kind, the bound `r_i · sup|Dφ_i|` on the gradient alone.
    pub fn smoothness_constant(&self) -> f64 {
        match self.kind {
            CutoffKind::Inf => 1.875,
            CutoffKind::Product => product_profile_constant(),
        }
    }

    /// `C₁ = k C₀ + C_H √C₀`, bounding `r² |Δ_M φ_i|` on a `k`-dimensional
    /// surface with `|H| ≤ C_H`.
    pub fn laplacian_constant(&self, mean_curvature_bound: f64) -> f64 {
        let c0 = self.smoothness_constant();
        self.n as f64 * c0 + mean_curvature_bound * c0.sqrt()
    }

    fn radial(&self, i: usize, x: &DVector<f64>, with_hessian: bool) -> Radial {
        let dim = x.len();
        let (lo, hi) = self.ramp(i);
        let diff = x - &self.balls[i].center;
        let chord = diff.norm();
        // d = F(chord) with F the identity or 2 asin(c/2).
        let (d, f1, f2) = match self.metric {
            BallMetric::Euclidean => (chord, 1.0, 0.0),
            BallMetric::Geodesic => {
                let c = chord.min(2.0);
                let s = (1.0 - 0.25 * c * c).max(1e-300);
                (2.0 * (0.5 * c).asin(), 1.0 / s.sqrt(), 0.25 * c / (s * s.sqrt()))
            }
        };
        let t = (d - lo) / (hi - lo);
        let (s, ds, dds) = smoothstep_derivatives(t);
        if ds == 0.0 && dds == 0.0 {
            return Radial {
                value: s,
                gradient: DVector::zeros(dim),
                hessian: with_hessian.then(|| DMatrix::zeros(dim, dim)),
            };
        }
        let k = 1.0 / (hi - lo);
        let unit = diff / chord;
        let gradient = &unit * (ds * k * f1);
        let hessian = with_hessian.then(|| {
            let radial = dds * k * k * f1 * f1 + ds * k * f2;
            let tangential = ds * k * f1 / chord;
            let outer = &unit * unit.transpose();
            &outer * radial + (DMatrix::identity(dim, dim) - &outer) * tangential
        });
        Radial {
            value: s,
            gradient,
            hessian,
        }
    }

    fn active(&self, x: &DVector<f64>) -> Vec<usize> {
        (0..self.balls.len())
            .filter(|&i| self.metric.distance(x, &self.balls[i].center) < self.ramp(i).1)
            .collect()
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.ambient(x, false).0
    }

    /// Value, ambient gradient and (product kind) ambient Hessian.
    pub fn ambient(&self, x: &DVector<f64>, with_hessian: bool) -> (f64, DVector<f64>, Option<DMatrix<f64>>) {
        let dim = x.len();
        let active = self.active(x);
        match self.kind {
            CutoffKind::Inf => {
                // Lowest index among the minimizers selects the subgradient.
                let mut best: Option<Radial> = None;
                for &i in &active {
                    let r = self.radial(i, x, false);
                    if best.as_ref().is_none_or(|b| r.value < b.value) {
                        best = Some(r);
                    }
                }
                match best {
                    Some(b) => (b.value, b.gradient, None),
                    None => (1.0, DVector::zeros(dim), None),
                }
            }
            CutoffKind::Product => {
                let parts: Vec<Radial> = active
                    .iter()
                    .map(|&i| self.radial(i, x, with_hessian))
                    .collect();
                let others = |skip: &[usize]| -> f64 {
                    parts
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| !skip.contains(j))
                        .map(|(_, p)| p.value)
                        .product()
                };
                let value = others(&[]);
                let mut gradient = DVector::zeros(dim);
                for (i, p) in parts.iter().enumerate() {
                    gradient += &p.gradient * others(&[i]);
                }
                let hessian = with_hessian.then(|| {
                    let mut h = DMatrix::zeros(dim, dim);
                    for (i, p) in parts.iter().enumerate() {
                        h += p.hessian.as_ref().expect("requested") * others(&[i]);
                        for (j, pj) in parts.iter().enumerate() {
                            if j != i {
                                h += &p.gradient * pj.gradient.transpose() * others(&[i, j]);
                            }
                        }
                    }
                    h
                });
                (value, gradient, hessian)
            }
        }
    }

    /// Restriction to `M` at a quadrature sample.
    pub fn on_surface(&self, sample: &SurfaceSample) -> CutoffSample {
        let with_hessian = self.kind == CutoffKind::Product;
        let (value, df, d2f) = self.ambient(sample.point(), with_hessian);
        CutoffSample {
            value,
            gradient: surface_gradient(sample, &df),
            laplacian: d2f.map(|h| surface_laplacian(sample, &df, &h)),
        }
    }
}
