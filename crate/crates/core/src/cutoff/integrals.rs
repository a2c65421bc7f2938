//! Integral estimates for cutoff fields on a hypersurface.
//!
//! Monte Carlo integrals stratify over chart cells that are refined where
//! some ramp is active, so that the thin annuli around small balls receive
//! their share of samples.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{CutoffError, CutoffField, CutoffKind};
use crate::fields::{restrict, AmbientField};
use crate::geometry::ParametrizedHypersurface;
use crate::quadrature::{
    initial_cells, integrate, integrate_cells_terms, refine_cells, stratified_estimate_terms,
    volume_growth_constant, Estimate, ParamCell, VolumeGrowthParams,
};

/// Largest stderr accepted, as a fraction of the bound it is compared to.
pub const STDERR_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingOptions {
    /// Uniform cells per chart axis before refinement.
    pub cells_per_axis: usize,
    /// Cells meeting a ramp are split until their diameter is below the
    /// ramp width divided by this.
    pub refine_ratio: f64,
    pub max_depth: u32,
    pub replicates: usize,
    pub seed: u64,
    /// Gauss–Legendre points per axis and cell for deterministic integrals.
    pub order: usize,
    /// Volume growth constant; measured when absent.
    pub volume_growth: Option<f64>,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions {
            cells_per_axis: 16,
            refine_ratio: 4.0,
            max_depth: 12,
            replicates: 16,
            seed: 0x5eed,
            order: 4,
            volume_growth: None,
        }
    }
}

impl SamplingOptions {
    fn volume_growth(
        &self,
        surface: &ParametrizedHypersurface,
        field: &CutoffField,
    ) -> Result<f64, CutoffError> {
        match self.volume_growth {
            Some(c) => Ok(c),
            None => Ok(volume_growth_constant(
                surface,
                field.metric(),
                &VolumeGrowthParams {
                    seed: self.seed,
                    ..VolumeGrowthParams::default()
                },
            )?),
        }
    }
}

/// Chart cells, split near every ramp of `field`.
pub fn ramp_cells(
    surface: &ParametrizedHypersurface,
    field: &CutoffField,
    options: &SamplingOptions,
) -> Vec<ParamCell> {
    let cells = initial_cells(surface, options.cells_per_axis);
    refine_cells(cells, options.max_depth, |cell| {
        let x = surface.charts()[cell.chart].point(&cell.center());
        let diam = cell.ambient_diameter(surface);
        field.balls().iter().enumerate().any(|(i, ball)| {
            let (lo, hi) = field.ramp(i);
            let d = field.metric().distance(&x, &ball.center);
            d + diam >= lo && d - diam <= hi && diam > (hi - lo) / options.refine_ratio
        })
    })
}

fn check_stderr(estimate: &Estimate, bound: f64) -> Result<(), CutoffError> {
    if estimate.stderr > STDERR_FRACTION * bound {
        Err(CutoffError::InsufficientSamples {
            stderr: estimate.stderr,
            bound,
        })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub kind: CutoffKind,
    pub n: usize,
    pub q: usize,
    pub epsilon: f64,
    pub balls: usize,
    /// `Σ r_i^(n−q)`.
    pub budget_sum: f64,
    pub volume_growth: f64,
    /// `∫_M |∇φ|^q`.
    pub integral: Estimate,
    /// `2^(n+q) C_V ε`.
    pub bound: f64,
    /// `integral ≤ bound + 3·stderr`.
    pub passed: bool,
}

/// Stratified Monte Carlo value of `∫_M |∇φ|^q` against `2^(n+q) C_V ε`.
pub fn gradient_integral_estimate(
    surface: &ParametrizedHypersurface,
    field: &CutoffField,
    options: &SamplingOptions,
) -> Result<GradientReport, CutoffError> {
    let n = surface.dim();
    let q = field.exponent();
    let c_v = options.volume_growth(surface, field)?;
    let bound = 2f64.powi((n + q) as i32) * c_v * field.epsilon();
    let cells = ramp_cells(surface, field, options);
    let [integral] = stratified_estimate_terms(surface, &cells, options.replicates, options.seed, |s| {
        [field.on_surface(s).gradient.norm().powi(q as i32)]
    })?;
    check_stderr(&integral, bound)?;
    let e = n.saturating_sub(q) as i32;
    Ok(GradientReport {
        kind: field.kind(),
        n,
        q,
        epsilon: field.epsilon(),
        balls: field.balls().len(),
        budget_sum: field.balls().iter().map(|b| b.radius.powi(e)).sum(),
        volume_growth: c_v,
        passed: integral.mean <= bound + 3.0 * integral.stderr,
        integral,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrReport {
    pub n: usize,
    /// Dimension `N` of the ambient Euclidean space.
    pub ambient_dim: usize,
    pub epsilon: f64,
    pub volume_growth: f64,
    pub smoothness_constant: f64,
    pub laplacian_constant: f64,
    pub mean_curvature_bound: f64,
    /// `H^n({φ ≠ 1})`.
    pub area_not_one: Estimate,
    /// `∫ |∇φ|²`.
    pub grad_l2: Estimate,
    /// `∫ |Δφ|`.
    pub lap_l1: Estimate,
    /// `C_V ε`, `8·108^N C₀ C_V ε` and `(C₁ + 8·108^N C₀) C_V ε`.
    pub bounds: [f64; 3],
    /// `C₁ C_V Σ r_i^(n−2)`, the sum of the per-ball Laplacian bounds.
    pub laplacian_ball_bound: f64,
    pub passed: [bool; 3],
}

fn mean_curvature_bound(surface: &ParametrizedHypersurface, nodes: usize) -> Result<f64, CutoffError> {
    let sup = AtomicU64::new(0);
    integrate(surface, nodes, |s| {
        sup.fetch_max(s.shape.mean_curvature.abs().to_bits(), Ordering::Relaxed);
        0.0
    })?;
    Ok(f64::from_bits(sup.into_inner()))
}

/// The three smallness integrals of a product cutoff against their bounds.
pub fn mr_quality_report(
    surface: &ParametrizedHypersurface,
    field: &CutoffField,
    options: &SamplingOptions,
) -> Result<MrReport, CutoffError> {
    if field.kind() != CutoffKind::Product {
        return Err(CutoffError::InvalidParameter(
            "the smallness report needs a product cutoff".into(),
        ));
    }
    let n = surface.dim();
    let ambient_dim = n + 2;
    let c_v = options.volume_growth(surface, field)?;
    let c_h = mean_curvature_bound(surface, 32)?;
    let c0 = field.smoothness_constant();
    let c1 = field.laplacian_constant(c_h);
    let eps = field.epsilon();
    let overlap = 8.0 * 108f64.powi(ambient_dim as i32);
    let bounds = [
        c_v * eps,
        overlap * c0 * c_v * eps,
        (c1 + overlap * c0) * c_v * eps,
    ];
    let cells = ramp_cells(surface, field, options);
    let [area_not_one, grad_l2, lap_l1] =
        stratified_estimate_terms(surface, &cells, options.replicates, options.seed, |s| {
            let c = field.on_surface(s);
            [
                if c.value < 1.0 { 1.0 } else { 0.0 },
                c.gradient.norm_squared(),
                c.laplacian.expect("product cutoffs have Laplacians").abs(),
            ]
        })?;
    for (e, b) in [&area_not_one, &grad_l2, &lap_l1].into_iter().zip(bounds) {
        check_stderr(e, b)?;
    }
    let passed = [
        area_not_one.mean < bounds[0],
        grad_l2.mean < bounds[1],
        lap_l1.mean < bounds[2],
    ];
    let laplacian_ball_bound = c1
        * c_v
        * field
            .balls()
            .iter()
            .map(|b| b.radius.powi(n as i32 - 2))
            .sum::<f64>();
    Ok(MrReport {
        n,
        ambient_dim,
        epsilon: eps,
        volume_growth: c_v,
        smoothness_constant: c0,
        laplacian_constant: c1,
        mean_curvature_bound: c_h,
        area_not_one,
        grad_l2,
        lap_l1,
        bounds,
        laplacian_ball_bound,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IbpReport {
    pub epsilon: f64,
    /// `∫ φ u Δv`, `∫ φ ⟨∇u, ∇v⟩` and `∫ u ⟨∇v, ∇φ⟩`.
    pub terms: [f64; 3],
    /// `|Σ terms|`.
    pub residual: f64,
    /// `∫ |u| |∇φ|`.
    pub cross_term: f64,
}

/// Integration by parts against a cutoff, by Gauss–Legendre quadrature on
/// cells refined around the ramps.
pub fn ibp_residual(
    surface: &ParametrizedHypersurface,
    field: &CutoffField,
    u: &dyn AmbientField,
    v: &dyn AmbientField,
    options: &SamplingOptions,
) -> Result<IbpReport, CutoffError> {
    let cells = ramp_cells(surface, field, options);
    let [a, b, c, cross] = integrate_cells_terms(surface, &cells, options.order, |s| {
        let phi = field.on_surface(s);
        let (uu, du, _) = restrict(u, s);
        let (_, dv, lv) = restrict(v, s);
        [
            phi.value * uu * lv,
            phi.value * du.dot(&dv),
            uu * dv.dot(&phi.gradient),
            uu.abs() * phi.gradient.norm(),
        ]
    })?;
    Ok(IbpReport {
        epsilon: field.epsilon(),
        terms: [a, b, c],
        residual: (a + b + c).abs(),
        cross_term: cross,
    })
}
