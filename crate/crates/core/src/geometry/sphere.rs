//! Spherical coordinates on the unit sphere `S^m ⊂ R^{m+1}` with exact
//! first and second derivatives.
//!
//! Angles `a_0, …, a_{m−1}`: the first `m − 1` are polar angles in `[0, π]`,
//! the last is the periodic azimuth in `[0, 2π)`.
//!
//! ```text
//! x_0     = cos a_0
//! x_k     = sin a_0 ⋯ sin a_{k−1} cos a_k        (1 ≤ k < m)
//! x_m     = sin a_0 ⋯ sin a_{m−1}
//! ```

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trig {
    Sin,
    Cos,
}

impl Trig {
    /// `order`-th derivative at an angle with precomputed `(sin, cos)`.
    fn derivative(self, order: u8, sin: f64, cos: f64) -> f64 {
        match (self, order % 4) {
            (Trig::Sin, 0) | (Trig::Cos, 3) => sin,
            (Trig::Sin, 1) | (Trig::Cos, 0) => cos,
            (Trig::Sin, 2) | (Trig::Cos, 1) => -sin,
            _ => -cos,
        }
    }
}

/// Exact 2-jet of one sphere factor at a parameter point.
#[derive(Clone, Debug)]
pub(crate) struct FactorJet {
    /// `m + 1` coordinates.
    pub x: Vec<f64>,
    /// `dx[a][c] = ∂x_c / ∂a_a`.
    pub dx: Vec<Vec<f64>>,
    /// `ddx[a][b][c] = ∂²x_c / ∂a_a ∂a_b`.
    pub ddx: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug)]
pub(crate) struct SphereCoords {
    dim: usize,
    /// For each ambient coordinate, its trigonometric factors `(axis, kind)`.
    factors: Vec<Vec<(usize, Trig)>>,
}

impl SphereCoords {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "sphere dimension must be positive");
        let mut factors = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let mut f: Vec<(usize, Trig)> = (0..k.min(dim)).map(|i| (i, Trig::Sin)).collect();
            if k < dim {
                f.push((k, Trig::Cos));
            }
            factors.push(f);
        }
        SphereCoords { dim, factors }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Parameter box and periodicity of the coordinate chart.
    pub fn domain(&self) -> (Vec<(f64, f64)>, Vec<bool>) {
        let mut domain = vec![(0.0, PI); self.dim - 1];
        domain.push((0.0, 2.0 * PI));
        let mut periodic = vec![false; self.dim - 1];
        periodic.push(true);
        (domain, periodic)
    }

    pub fn point(&self, angles: &[f64]) -> Vec<f64> {
        let sc: Vec<(f64, f64)> = angles.iter().map(|a| a.sin_cos()).collect();
        self.factors
            .iter()
            .map(|f| {
                f.iter()
                    .map(|&(axis, kind)| kind.derivative(0, sc[axis].0, sc[axis].1))
                    .product()
            })
            .collect()
    }

    pub fn jet(&self, angles: &[f64]) -> FactorJet {
        let m = self.dim;
        let sc: Vec<(f64, f64)> = angles.iter().map(|a| a.sin_cos()).collect();
        let mut x = vec![0.0; m + 1];
        let mut dx = vec![vec![0.0; m + 1]; m];
        let mut ddx = vec![vec![vec![0.0; m + 1]; m]; m];
        let mut orders = vec![0u8; m];
        for (c, f) in self.factors.iter().enumerate() {
            let eval = |orders: &[u8]| -> f64 {
                f.iter()
                    .map(|&(axis, kind)| kind.derivative(orders[axis], sc[axis].0, sc[axis].1))
                    .product()
            };
            let present = |axis: usize| f.iter().any(|&(a, _)| a == axis);
            x[c] = eval(&orders);
            for a in 0..m {
                if !present(a) {
                    continue;
                }
                orders[a] += 1;
                dx[a][c] = eval(&orders);
                for b in a..m {
                    if !present(b) {
                        continue;
                    }
                    orders[b] += 1;
                    let v = eval(&orders);
                    orders[b] -= 1;
                    ddx[a][b][c] = v;
                    ddx[b][a][c] = v;
                }
                orders[a] -= 1;
            }
        }
        FactorJet { x, dx, ddx }
    }

    /// Angles of a unit vector, azimuth in `[0, 2π)`. Inverse of [`Self::point`]
    /// away from the coordinate poles.
    #[allow(dead_code)]
    pub fn angles_of(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut angles = Vec::with_capacity(m);
        for k in 0..m - 1 {
            let tail: f64 = x[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            angles.push(tail.atan2(x[k]));
        }
        let theta = x[m].atan2(x[m - 1]);
        angles.push(if theta < 0.0 { theta + 2.0 * PI } else { theta });
        angles
    }
}
