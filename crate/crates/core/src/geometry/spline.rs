//! Tensor-product cubic spline interpolation of sampled charts.

use nalgebra::{DMatrix, DVector};

use super::{GeometryError, Immersion};

/// Cubic spline along one axis, stored as the linear map from nodal values
/// to nodal second derivatives.
#[derive(Clone, Debug)]
struct AxisSpline {
    lo: f64,
    step: f64,
    nodes: usize,
    periodic: bool,
    /// `M = curvature · y`.
    curvature: DMatrix<f64>,
}

impl AxisSpline {
    fn new(lo: f64, hi: f64, nodes: usize, periodic: bool) -> Result<Self, GeometryError> {
        let min = if periodic { 3 } else { 2 };
        if nodes < min {
            return Err(GeometryError::InvalidChart(format!(
                "an axis needs at least {min} samples, got {nodes}"
            )));
        }
        let step = if periodic {
            (hi - lo) / nodes as f64
        } else {
            (hi - lo) / (nodes - 1) as f64
        };
        let m = nodes;
        // h/6 M_{i−1} + 2h/3 M_i + h/6 M_{i+1} = (y_{i+1} − 2y_i + y_{i−1}) / h
        let mut lhs = DMatrix::zeros(m, m);
        let mut rhs = DMatrix::zeros(m, m);
        for i in 0..m {
            let interior = periodic || (i > 0 && i + 1 < m);
            if !interior {
                lhs[(i, i)] = 1.0;
                continue;
            }
            let prev = (i + m - 1) % m;
            let next = (i + 1) % m;
            lhs[(i, prev)] += step / 6.0;
            lhs[(i, i)] += 2.0 * step / 3.0;
            lhs[(i, next)] += step / 6.0;
            rhs[(i, prev)] += 1.0 / step;
            rhs[(i, i)] -= 2.0 / step;
            rhs[(i, next)] += 1.0 / step;
        }
        let curvature = lhs
            .lu()
            .solve(&rhs)
            .ok_or_else(|| GeometryError::InvalidChart("singular spline system".into()))?;
        Ok(AxisSpline {
            lo,
            step,
            nodes,
            periodic,
            curvature,
        })
    }

    /// Weights `w` with `s(t) = Σ w_j y_j`.
    fn weights(&self, t: f64) -> DVector<f64> {
        let m = self.nodes;
        let mut x = (t - self.lo) / self.step;
        let cells = if self.periodic { m } else { m - 1 };
        if self.periodic {
            x = x.rem_euclid(m as f64);
        }
        let i = (x.floor().max(0.0) as usize).min(cells - 1);
        let b = x - i as f64;
        let a = 1.0 - b;
        let j = (i + 1) % m;
        let h2 = self.step * self.step / 6.0;
        let mut w = self.curvature.row(i).transpose() * (h2 * (a * a * a - a))
            + self.curvature.row(j).transpose() * (h2 * (b * b * b - b));
        w[i] += a;
        w[j] += b;
        w
    }
}

/// A chart interpolating ambient samples on a regular parameter grid,
/// projected radially onto the unit sphere.
///
/// Periodic axes are sampled at `lo + j·(hi − lo)/m` for `j < m`;
/// non-periodic axes at `m` equispaced nodes including both ends (natural
/// end conditions). Derivatives are taken by central differences.
#[derive(Clone, Debug)]
pub struct SplineChart {
    axes: Vec<AxisSpline>,
    ambient: usize,
    /// Row-major samples, last axis fastest.
    samples: Vec<DVector<f64>>,
}

impl SplineChart {
    pub fn new(
        domain: &[(f64, f64)],
        periodic: &[bool],
        resolution: &[usize],
        samples: Vec<DVector<f64>>,
    ) -> Result<Self, GeometryError> {
        let n = domain.len();
        if periodic.len() != n || resolution.len() != n {
            return Err(GeometryError::InvalidChart("axis metadata lengths differ".into()));
        }
        let expected: usize = resolution.iter().product();
        if samples.len() != expected {
            return Err(GeometryError::InvalidChart(format!(
                "expected {expected} samples, got {}",
                samples.len()
            )));
        }
        let ambient = n + 2;
        if let Some(bad) = samples.iter().find(|s| s.len() != ambient) {
            return Err(GeometryError::DimensionMismatch {
                expected: ambient,
                got: bad.len(),
            });
        }
        let axes = domain
            .iter()
            .zip(periodic)
            .zip(resolution)
            .map(|((&(lo, hi), &p), &m)| AxisSpline::new(lo, hi, m, p))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SplineChart {
            axes,
            ambient,
            samples,
        })
    }

    /// Tensor-product interpolant before projection.
    fn raw(&self, u: &[f64]) -> DVector<f64> {
        let weights: Vec<DVector<f64>> =
            self.axes.iter().zip(u).map(|(a, &t)| a.weights(t)).collect();
        let mut acc = DVector::zeros(self.ambient);
        let mut index = vec![0usize; self.axes.len()];
        for sample in &self.samples {
            let w: f64 = index.iter().zip(&weights).map(|(&i, w)| w[i]).product();
            if w != 0.0 {
                acc.axpy(w, sample, 1.0);
            }
            for axis in (0..index.len()).rev() {
                index[axis] += 1;
                if index[axis] < self.axes[axis].nodes {
                    break;
                }
                index[axis] = 0;
            }
        }
        acc
    }
}

impl Immersion for SplineChart {
    fn param_dim(&self) -> usize {
        self.axes.len()
    }

    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn point(&self, u: &[f64]) -> DVector<f64> {
        let p = self.raw(u);
        let norm = p.norm();
        p / norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_axis_reproduces_trigonometric_data() {
        let m = 32;
        let axis = AxisSpline::new(0.0, 2.0 * PI, m, true).unwrap();
        let y = DVector::from_fn(m, |j, _| (j as f64 * 2.0 * PI / m as f64).sin());
        for t in [0.1, 1.7, 3.0, 6.2, -0.4, 7.0] {
            let v = axis.weights(t).dot(&y);
            assert!((v - t.sin()).abs() < 1e-4, "t = {t}: {v}");
        }
    }

    #[test]
    fn natural_axis_interpolates_nodes_and_lines() {
        let axis = AxisSpline::new(-1.0, 2.0, 7, false).unwrap();
        let y = DVector::from_fn(7, |j, _| 3.0 * (-1.0 + 0.5 * j as f64) + 1.0);
        for t in [-1.0, -0.3, 0.5, 1.99, 2.0] {
            assert!((axis.weights(t).dot(&y) - (3.0 * t + 1.0)).abs() < 1e-12);
        }
        let w = axis.weights(0.5);
        assert!((w[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_sample_counts() {
        let samples = vec![DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]); 5];
        assert!(SplineChart::new(&[(0.0, 1.0); 2], &[false; 2], &[2, 2], samples).is_err());
    }
}
