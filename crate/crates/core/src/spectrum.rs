//! First stability eigenvalues, Rayleigh quotients and Simons identity
//! checks.
//!
//! The numeric backend solves `(S − V) x = λ B x` by shift-invert block
//! subspace iteration: `K = S − V − σB` with `σ` below the spectrum is
//! factorized once (sparse Cholesky), and each sweep applies `K⁻¹B`
//! followed by a Rayleigh–Ritz projection.

pub mod simons;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;
use crate::operators::{AnalyticSpectrum, DiscreteOperator, GridField, OperatorError};

pub use simons::{simons_check, SimonsOptions, SimonsReport};

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(
        "eigensolver did not converge after {iterations} iterations \
         (lambda = {lambda}, relative residual {residual:e})"
    )]
    NoConvergence {
        iterations: usize,
        lambda: f64,
        residual: f64,
    },
    #[error("test function vanishes on the grid")]
    ZeroTestFunction,
    #[error("surface is not minimal: |H| = {mean_curvature:e} at {u:?}")]
    NonMinimal { mean_curvature: f64, u: Vec<f64> },
    #[error("factorization of the shifted operator failed: {0}")]
    Factorization(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Analytic,
    Numeric,
}

/// What to take the first eigenvalue of.
#[derive(Clone, Copy, Debug)]
pub enum EigenSource<'a> {
    Numeric(&'a DiscreteOperator),
    Analytic(&'a AnalyticSpectrum),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda1: f64,
    /// `B`-normalized, first significant entry positive. Empty for the
    /// analytic backend, whose first eigenfunction is the constant.
    pub eigenvector: Vec<f64>,
    /// `‖(S − V)x − λBx‖ / ‖Bx‖`; zero for the analytic backend.
    pub residual: f64,
    pub backend: Backend,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Extra block columns beyond the number of wanted pairs.
    pub guard_vectors: usize,
    pub seed: u64,
    /// Overrides the default shift below the spectrum.
    pub shift: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 10_000,
            guard_vectors: 4,
            seed: 0x5eed,
            shift: None,
        }
    }
}

/// The lowest eigenpairs of the stability pencil.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// `σ = min(−(2n + 1), −max(V/B) − 1)`; `S` is positive semidefinite, so
/// `S − V − σB` is positive definite.
pub fn default_shift(op: &DiscreteOperator) -> f64 {
    let max_ratio = op.potential_ratio().max();
    (-(2.0 * op.dim() as f64 + 1.0)).min(-max_ratio - 1.0)
}

struct ShiftedSolver {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl ShiftedSolver {
    fn new(op: &DiscreteOperator, sigma: f64) -> Result<Self, SpectrumError> {
        use faer::sparse::{SparseColMat, Triplet};
        let n = op.len();
        let mut trips: Vec<Triplet<usize, usize, f64>> = op
            .stiffness()
            .triplet_iter()
            .map(|(i, j, &v)| Triplet::new(i, j, v))
            .collect();
        for i in 0..n {
            trips.push(Triplet::new(i, i, -op.potential()[i] - sigma * op.mass()[i]));
        }
        let k = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| SpectrumError::Factorization(format!("{e:?}")))?;
        let llt = k
            .sp_cholesky(faer::Side::Lower)
            .map_err(|e| SpectrumError::Factorization(format!("{e:?}")))?;
        Ok(ShiftedSolver { llt })
    }

    fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        use faer::linalg::solvers::Solve;
        let mut m = faer::Mat::<f64>::from_fn(rhs.nrows(), rhs.ncols(), |i, j| rhs[(i, j)]);
        self.llt.solve_in_place(m.as_mut());
        DMatrix::from_fn(rhs.nrows(), rhs.ncols(), |i, j| m[(i, j)])
    }
}

/// `B`-orthonormalizes the columns (two passes of Gram–Schmidt); columns
/// that collapse are replaced by fresh random vectors.
fn b_orthonormalize(x: &mut DMatrix<f64>, mass: &DVector<f64>, rng: &mut ChaCha8Rng) {
    let cols = x.ncols();
    for j in 0..cols {
        for attempt in 0..4 {
            let before = x.column(j).component_mul(mass).dot(&x.column(j)).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let proj = x.column(i).component_mul(mass).dot(&x.column(j));
                    let ci = x.column(i).clone_owned();
                    x.column_mut(j).axpy(-proj, &ci, 1.0);
                }
            }
            let norm = x.column(j).component_mul(mass).dot(&x.column(j)).sqrt();
            if norm > 1e-8 * before && norm > 0.0 {
                x.column_mut(j).scale_mut(1.0 / norm);
                break;
            }
            assert!(attempt < 3, "cannot complete a B-orthonormal basis");
            for v in x.column_mut(j).iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
        }
    }
}

/// `B`-normalize and make the first entry above `1e-8 · max` positive.
fn canonical_sign(mut v: DVector<f64>, mass: &DVector<f64>) -> DVector<f64> {
    let norm = v.component_mul(mass).dot(&v).sqrt();
    v /= norm;
    let threshold = 1e-8 * v.amax();
    if let Some(first) = v.iter().find(|x| x.abs() > threshold) {
        if *first < 0.0 {
            v = -v;
        }
    }
    v
}

/// The `count` lowest eigenpairs of `(S − V) x = λ B x`.
pub fn smallest_eigenpairs(
    op: &DiscreteOperator,
    count: usize,
    options: &SolverOptions,
) -> Result<EigenPairs, SpectrumError> {
    let n = op.len();
    if count == 0 || count > n {
        return Err(SpectrumError::InvalidArgument(format!(
            "cannot compute {count} eigenpairs of a {n}-node operator"
        )));
    }
    let block = (count + options.guard_vectors).min(n);
    let sigma = options.shift.unwrap_or_else(|| default_shift(op));
    let solver = ShiftedSolver::new(op, sigma)?;
    let mass = op.mass();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut x = DMatrix::from_fn(n, block, |_, j| {
        if j == 0 {
            1.0
        } else {
            rng.random_range(-1.0..1.0)
        }
    });
    b_orthonormalize(&mut x, mass, &mut rng);

    let mut last = (f64::NAN, f64::INFINITY);
    for iteration in 1..=options.max_iterations {
        let mut bx = x.clone();
        for mut col in bx.column_iter_mut() {
            col.component_mul_assign(mass);
        }
        let mut y = solver.solve(&bx);
        b_orthonormalize(&mut y, mass, &mut rng);
        let ay = DMatrix::from_columns(
            &y.column_iter()
                .map(|c| op.apply_jacobi(&c.clone_owned()))
                .collect::<Vec<_>>(),
        );
        let small = y.transpose() * &ay;
        let small = (&small + small.transpose()) * 0.5;
        let eig = small.symmetric_eigen();
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let rotation = DMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).clone_owned())
                .collect::<Vec<_>>(),
        );
        x = &y * &rotation;
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let residuals: Vec<f64> = (0..count)
            .map(|j| {
                let v = x.column(j).clone_owned();
                let bv = v.component_mul(mass);
                (op.apply_jacobi(&v) - &bv * values[j]).norm() / bv.norm()
            })
            .collect();
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        last = (values[0], worst);
        if worst <= options.tolerance {
            let vectors = (0..count)
                .map(|j| canonical_sign(x.column(j).clone_owned(), mass))
                .collect();
            return Ok(EigenPairs {
                values: values[..count].to_vec(),
                vectors,
                residuals,
                iterations: iteration,
            });
        }
    }
    Err(SpectrumError::NoConvergence {
        iterations: options.max_iterations,
        lambda: last.0,
        residual: last.1,
    })
}

/// `λ₁` with the convention `Lu = −λu`.
pub fn first_stability_eigenvalue(source: EigenSource<'_>) -> Result<EigenResult, SpectrumError> {
    match source {
        EigenSource::Analytic(spectrum) => Ok(EigenResult {
            lambda1: spectrum.stability_eigenvalues(1)[0],
            eigenvector: Vec::new(),
            residual: 0.0,
            backend: Backend::Analytic,
            iterations: 0,
        }),
        EigenSource::Numeric(op) => {
            let pairs = smallest_eigenpairs(op, 1, &SolverOptions::default())?;
            Ok(EigenResult {
                lambda1: pairs.values[0],
                eigenvector: pairs.vectors[0].iter().copied().collect(),
                residual: pairs.residuals[0],
                backend: Backend::Numeric,
                iterations: pairs.iterations,
            })
        }
    }
}

/// `(fᵀ S f − fᵀ V f) / fᵀ B f`, the discrete
/// `∫ (|∇f|² − |A|² f² − n f²) / ∫ f²`.
pub fn rayleigh_quotient(op: &DiscreteOperator, f: &GridField) -> Result<f64, SpectrumError> {
    if f.values.len() != op.len() {
        return Err(SpectrumError::InvalidArgument(format!(
            "field has {} values, grid has {} nodes",
            f.values.len(),
            op.len()
        )));
    }
    let denom = op.mass_form(&f.values, &f.values);
    if !(denom > 0.0) {
        return Err(SpectrumError::ZeroTestFunction);
    }
    Ok(op.jacobi_form(&f.values) / denom)
}

/// `|A|` at the grid nodes.
pub fn test_function_a(op: &DiscreteOperator) -> GridField {
    GridField::from_values(op.norm_a2().map(|v| v.max(0.0).sqrt()))
}

/// `(max − min) / max |v|`; zero for the zero vector.
pub fn relative_variation(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        0.0
    } else {
        (max - min) / scale
    }
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive refinements.
pub fn observed_order(steps: &[f64], errors: &[f64]) -> Vec<f64> {
    steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford_hypersurface, equator, CliffordSpec};
    use crate::operators::{analytic_laplace_spectrum, assemble_jacobi};

    fn torus() -> crate::geometry::ParametrizedHypersurface {
        clifford_hypersurface(CliffordSpec::new(1, 1).unwrap())
    }

    #[test]
    fn numeric_clifford_first_eigenpair() {
        let op = assemble_jacobi(&torus(), 64).unwrap();
        let r = first_stability_eigenvalue(EigenSource::Numeric(&op)).unwrap();
        assert!((r.lambda1 + 4.0).abs() < 1e-9);
        assert!(r.residual <= 1e-10);
        assert!(relative_variation(&r.eigenvector) < 1e-8);
        assert!(r.eigenvector[0] > 0.0);
        let norm: f64 = r
            .eigenvector
            .iter()
            .zip(op.mass().iter())
            .map(|(x, b)| x * x * b)
            .sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_backend_is_exact() {
        for n in 1..=6 {
            let s = analytic_laplace_spectrum(crate::geometry::Family::Equator { n }).unwrap();
            let r = first_stability_eigenvalue(EigenSource::Analytic(&s)).unwrap();
            assert_eq!(r.lambda1, -(n as f64));
            assert_eq!(r.residual, 0.0);
        }
    }

    #[test]
    fn low_spectrum_of_torus_matches_closed_form() {
        let op = assemble_jacobi(&torus(), 48).unwrap();
        let pairs = smallest_eigenpairs(&op, 6, &SolverOptions::default()).unwrap();
        let exact = analytic_laplace_spectrum(torus().family())
            .unwrap()
            .stability_eigenvalues(6);
        for (a, b) in pairs.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-2, "{a} vs {b}");
        }
    }

    #[test]
    fn shifting_the_potential_shifts_eigenvalues() {
        let op = assemble_jacobi(&equator(2), 16).unwrap();
        let base = smallest_eigenpairs(&op, 3, &SolverOptions::default()).unwrap();
        let shifted = smallest_eigenpairs(&op.shift_potential(0.75), 3, &SolverOptions::default())
            .unwrap();
        for (a, b) in base.values.iter().zip(&shifted.values) {
            assert!((b - (a - 0.75)).abs() < 1e-10);
        }
    }

    #[test]
    fn rayleigh_quotients_of_reference_fields() {
        let op = assemble_jacobi(&torus(), 64).unwrap();
        let one = GridField::constant(&op, 1.0);
        assert!((rayleigh_quotient(&op, &one).unwrap() + 4.0).abs() < 1e-12);
        let f = GridField::from_params(&op, |u| u[0].cos());
        assert!((rayleigh_quotient(&op, &f).unwrap() + 2.0).abs() < 2e-3);
        let a = test_function_a(&op);
        assert!(relative_variation(a.values.as_slice()) < 1e-12);
        assert!((rayleigh_quotient(&op, &a).unwrap() + 4.0).abs() < 1e-12);

        let flat = assemble_jacobi(&equator(3), 8).unwrap();
        assert!(matches!(
            rayleigh_quotient(&flat, &test_function_a(&flat)).unwrap_err(),
            SpectrumError::ZeroTestFunction
        ));
    }

    #[test]
    fn observed_order_of_quadratic_errors() {
        let o = observed_order(&[0.1, 0.05, 0.025], &[1e-2, 2.5e-3, 6.25e-4]);
        assert!(o.iter().all(|v| (v - 2.0).abs() < 1e-12));
    }
}
