//! Scalar fields on the ambient space and their restrictions to a surface.

use nalgebra::{DMatrix, DVector};

use crate::quadrature::SurfaceSample;

/// A `C²` function on `R^{n+2}`.
pub trait AmbientField: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

/// `x ↦ ⟨a, x⟩ + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearField {
    pub direction: DVector<f64>,
    pub offset: f64,
}

impl LinearField {
    /// The coordinate function `x ↦ x_i` in `R^dim`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut direction = DVector::zeros(dim);
        direction[i] = 1.0;
        LinearField {
            direction,
            offset: 0.0,
        }
    }

    pub fn scaled(mut self, c: f64) -> Self {
        self.direction *= c;
        self.offset *= c;
        self
    }
}

impl AmbientField for LinearField {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.direction.dot(x) + self.offset
    }

    fn gradient(&self, _x: &DVector<f64>) -> DVector<f64> {
        self.direction.clone()
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField(pub f64);

impl AmbientField for ConstantField {
    fn value(&self, _x: &DVector<f64>) -> f64 {
        self.0
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(x.len())
    }

    fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(x.len(), x.len())
    }
}

/// Tangential gradient `∇^M f = X_k g^{kl} ⟨X_l, Df⟩` as an ambient vector.
pub fn surface_gradient(sample: &SurfaceSample, df: &DVector<f64>) -> DVector<f64> {
    let jet = &sample.jet;
    let comps = DVector::from_iterator(jet.dim(), jet.first.iter().map(|x| x.dot(df)));
    let coef = &sample.shape.metric_inverse * comps;
    jet.first
        .iter()
        .zip(coef.iter())
        .fold(DVector::zeros(df.len()), |acc, (x, c)| acc + x * *c)
}

/// Laplace–Beltrami of `f ∘ X`: `g^{ij} (D²f(X_i, X_j) + ⟨Df, X_ij^⊥⟩)`,
/// where `⊥` is the part normal to `M` in `R^{n+2}`.
pub fn surface_laplacian(sample: &SurfaceSample, df: &DVector<f64>, d2f: &DMatrix<f64>) -> f64 {
    let jet = &sample.jet;
    let g_inv = &sample.shape.metric_inverse;
    let n = jet.dim();
    let tangential = surface_gradient(sample, df);
    let mut out = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gij = g_inv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let xij = jet.second(i, j);
            let hess = jet.first[i].dot(&(d2f * &jet.first[j]));
            out += gij * (hess + df.dot(xij) - tangential.dot(xij));
        }
    }
    out
}

/// Value, tangential gradient and Laplacian of an ambient field on `M`.
pub fn restrict(field: &dyn AmbientField, sample: &SurfaceSample) -> (f64, DVector<f64>, f64) {
    let x = sample.point();
    let df = field.gradient(x);
    let d2f = field.hessian(x);
    (
        field.value(x),
        surface_gradient(sample, &df),
        surface_laplacian(sample, &df, &d2f),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford_hypersurface, equator, CliffordSpec};

    #[test]
    fn coordinate_functions_are_eigenfunctions() {
        // On a minimal M^n ⊂ S^{n+1} the coordinates satisfy Δx = −n x.
        let m = clifford_hypersurface(CliffordSpec::new(1, 2).unwrap());
        let s = SurfaceSample::new(&m, 0, vec![0.4, 1.3, 2.2]).unwrap();
        for i in 0..5 {
            let f = LinearField::coordinate(5, i);
            let (v, _, lap) = restrict(&f, &s);
            assert!((lap + 3.0 * v).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_is_tangent() {
        let m = equator(2);
        let s = SurfaceSample::new(&m, 0, vec![1.0, 2.0]).unwrap();
        let f = LinearField {
            direction: DVector::from_vec(vec![0.3, -1.0, 2.0, 5.0]),
            offset: 1.0,
        };
        let (_, grad, _) = restrict(&f, &s);
        assert!(grad.dot(s.point()).abs() < 1e-13);
        assert!(grad.dot(&s.shape.normal).abs() < 1e-13);
        let residual = &f.direction - &grad;
        for x in &s.jet.first {
            assert!(residual.dot(x).abs() < 1e-12);
        }
    }
}
