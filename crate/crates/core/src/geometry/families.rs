//! Built-in families with exact jets: equators and Clifford hypersurfaces.

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::sphere::SphereCoords;
use super::{Chart, Family, GeometryError, Immersion, Jet, ParametrizedHypersurface};

/// `S^k(√(k/n)) × S^l(√(l/n)) ⊂ S^{n+1}` with `n = k + l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordSpec {
    k: u32,
    l: u32,
}

impl CliffordSpec {
    pub fn new(k: u32, l: u32) -> Result<Self, GeometryError> {
        if k == 0 || l == 0 {
            return Err(GeometryError::InvalidClifford { k, l });
        }
        Ok(CliffordSpec { k, l })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn n(&self) -> u32 {
        self.k + self.l
    }

    /// `r_k² = k/n` and `r_l² = l/n` as (numerator, denominator) pairs.
    pub fn radii_squared(&self) -> ((u32, u32), (u32, u32)) {
        ((self.k, self.n()), (self.l, self.n()))
    }

    pub fn radius_k(&self) -> f64 {
        (self.k as f64 / self.n() as f64).sqrt()
    }

    pub fn radius_l(&self) -> f64 {
        (self.l as f64 / self.n() as f64).sqrt()
    }

    /// Principal curvatures: `√(l/k)` with multiplicity `k` and `−√(k/l)`
    /// with multiplicity `l`.
    pub fn principal_curvatures(&self) -> Vec<f64> {
        let a = (self.l as f64 / self.k as f64).sqrt();
        let b = -(self.k as f64 / self.l as f64).sqrt();
        let mut out = vec![a; self.k as usize];
        out.extend(std::iter::repeat_n(b, self.l as usize));
        out
    }

    /// `|A|² = k·(l/k) + l·(k/l) = n`, exact.
    pub fn norm_a2(&self) -> u32 {
        self.n()
    }
}

#[derive(Clone, Debug)]
enum NormalRule {
    /// `ν = e_{n+1}`.
    LastAxis,
    /// `ν = (r_l x, −r_k y)`: positive curvatures along the first factor.
    Clifford { rk: f64, rl: f64 },
}

/// `X = (r_1 x^{(1)}, r_2 x^{(2)}, …, 0, …)` for unit spheres in spherical
/// coordinates; the trailing zero coordinates pad up to `n + 2`.
#[derive(Clone, Debug)]
struct SphereProduct {
    factors: Vec<(SphereCoords, f64)>,
    ambient: usize,
    normal: NormalRule,
}

impl SphereProduct {
    fn param_ranges(&self) -> Vec<(usize, usize)> {
        let mut ranges = Vec::new();
        let mut start = 0;
        for (s, _) in &self.factors {
            ranges.push((start, start + s.dim()));
            start += s.dim();
        }
        ranges
    }

    fn domain(&self) -> (Vec<(f64, f64)>, Vec<bool>) {
        let mut domain = Vec::new();
        let mut periodic = Vec::new();
        for (s, _) in &self.factors {
            let (d, p) = s.domain();
            domain.extend(d);
            periodic.extend(p);
        }
        (domain, periodic)
    }
}

impl Immersion for SphereProduct {
    fn param_dim(&self) -> usize {
        self.factors.iter().map(|(s, _)| s.dim()).sum()
    }

    fn ambient_dim(&self) -> usize {
        self.ambient
    }

    fn point(&self, u: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.ambient);
        let mut offset = 0;
        for ((s, r), (a, b)) in self.factors.iter().zip(self.param_ranges()) {
            for (c, v) in s.point(&u[a..b]).into_iter().enumerate() {
                out[offset + c] = r * v;
            }
            offset += s.dim() + 1;
        }
        out
    }

    fn jet(&self, u: &[f64]) -> Jet {
        let n = self.param_dim();
        let mut point = DVector::zeros(self.ambient);
        let mut first = vec![DVector::zeros(self.ambient); n];
        let mut second = vec![DVector::zeros(self.ambient); n * n];
        let mut offset = 0;
        for ((s, r), (a, b)) in self.factors.iter().zip(self.param_ranges()) {
            let fj = s.jet(&u[a..b]);
            for c in 0..=s.dim() {
                point[offset + c] = r * fj.x[c];
                for i in 0..s.dim() {
                    first[a + i][offset + c] = r * fj.dx[i][c];
                    for j in 0..s.dim() {
                        second[(a + i) * n + a + j][offset + c] = r * fj.ddx[i][j][c];
                    }
                }
            }
            offset += s.dim() + 1;
        }
        Jet {
            point,
            first,
            second,
        }
    }

    fn normal(&self, u: &[f64]) -> Option<DVector<f64>> {
        let mut nu = DVector::zeros(self.ambient);
        match self.normal {
            NormalRule::LastAxis => nu[self.ambient - 1] = 1.0,
            NormalRule::Clifford { rk, rl } => {
                let ranges = self.param_ranges();
                let (s1, s2) = (&self.factors[0].0, &self.factors[1].0);
                let x = s1.point(&u[ranges[0].0..ranges[0].1]);
                let y = s2.point(&u[ranges[1].0..ranges[1].1]);
                for (c, v) in x.iter().enumerate() {
                    nu[c] = rl * v;
                }
                for (c, v) in y.iter().enumerate() {
                    nu[x.len() + c] = -rk * v;
                }
            }
        }
        Some(nu)
    }
}

fn product_surface(
    factors: Vec<(SphereCoords, f64)>,
    ambient: usize,
    normal: NormalRule,
    family: Family,
) -> ParametrizedHypersurface {
    let map = SphereProduct {
        factors,
        ambient,
        normal,
    };
    let (domain, periodic) = map.domain();
    let dim = map.param_dim();
    let chart = Chart::new(domain, periodic, Arc::new(map)).expect("built-in chart is valid");
    ParametrizedHypersurface::new(dim, vec![chart], family, family.to_string())
        .expect("built-in surface is valid")
}

/// Totally geodesic `S^n = S^{n+1} ∩ {x_{n+1} = 0}`.
///
/// # Panics
/// If `n == 0`.
pub fn equator(n: u32) -> ParametrizedHypersurface {
    assert!(n >= 1, "equator dimension must be positive");
    let n = n as usize;
    product_surface(
        vec![(SphereCoords::new(n), 1.0)],
        n + 2,
        NormalRule::LastAxis,
        Family::Equator { n: n as u32 },
    )
}

/// Product parametrization of the Clifford hypersurface; spherical
/// coordinates on each factor, periodic azimuths.
pub fn clifford_hypersurface(spec: CliffordSpec) -> ParametrizedHypersurface {
    let (k, l) = (spec.k() as usize, spec.l() as usize);
    let (rk, rl) = (spec.radius_k(), spec.radius_l());
    product_surface(
        vec![(SphereCoords::new(k), rk), (SphereCoords::new(l), rl)],
        k + l + 2,
        NormalRule::Clifford { rk, rl },
        Family::Clifford {
            k: spec.k(),
            l: spec.l(),
        },
    )
}

/// Reparametrization `u_target ↦ u_target + s·sin(u_source)` of a chart
/// whose `source` and `target` axes are 2π-periodic. The image, and hence
/// every invariant, is unchanged; the metric becomes non-diagonal.
#[derive(Clone, Debug)]
pub struct Sheared {
    inner: Arc<dyn Immersion>,
    target: usize,
    source: usize,
    amplitude: f64,
}

impl Sheared {
    fn warp(&self, u: &[f64]) -> Vec<f64> {
        let mut v = u.to_vec();
        v[self.target] += self.amplitude * u[self.source].sin();
        v
    }

    /// Shears the single chart of `surface`.
    pub fn surface(
        surface: &ParametrizedHypersurface,
        target: usize,
        source: usize,
        amplitude: f64,
    ) -> Result<ParametrizedHypersurface, GeometryError> {
        let chart = &surface.charts()[0];
        let n = chart.dim();
        if target >= n || source >= n || target == source {
            return Err(GeometryError::InvalidChart("shear axes must be distinct".into()));
        }
        if !(chart.periodic()[target] && chart.periodic()[source]) {
            return Err(GeometryError::InvalidChart("shear axes must be periodic".into()));
        }
        let map = Sheared {
            inner: chart.map().clone(),
            target,
            source,
            amplitude,
        };
        let chart = Chart::new(chart.domain().to_vec(), chart.periodic().to_vec(), Arc::new(map))?;
        ParametrizedHypersurface::new(
            n,
            vec![chart],
            surface.family(),
            format!("{} sheared", surface.label()),
        )
    }
}

impl Immersion for Sheared {
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }

    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn point(&self, u: &[f64]) -> DVector<f64> {
        self.inner.point(&self.warp(u))
    }

    fn jet(&self, u: &[f64]) -> Jet {
        let n = self.param_dim();
        let inner = self.inner.jet(&self.warp(u));
        let (s, c) = u[self.source].sin_cos();
        // Jacobian J = I + a cos(u_s) e_t e_sᵀ; only ∂_s∂_s of the target
        // coordinate is nonzero among the second derivatives.
        let jac = |a: usize, i: usize| -> f64 {
            let mut v = if a == i { 1.0 } else { 0.0 };
            if a == self.target && i == self.source {
                v += self.amplitude * c;
            }
            v
        };
        let first: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                (0..n).fold(DVector::zeros(inner.point.len()), |acc, a| {
                    acc + &inner.first[a] * jac(a, i)
                })
            })
            .collect();
        let mut second = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut v = DVector::zeros(inner.point.len());
                for a in 0..n {
                    for b in 0..n {
                        let w = jac(a, i) * jac(b, j);
                        if w != 0.0 {
                            v += inner.second(a, b) * w;
                        }
                    }
                }
                if i == self.source && j == self.source {
                    v -= &inner.first[self.target] * (self.amplitude * s);
                }
                second.push(v);
            }
        }
        Jet {
            point: inner.point,
            first,
            second,
        }
    }

    fn normal(&self, u: &[f64]) -> Option<DVector<f64>> {
        self.inner.normal(&self.warp(u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{finite_difference_jet, POLE_MARGIN};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn clifford_radii_are_rational_and_complementary() {
        for (k, l) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 3), (2, 5)] {
            let s = CliffordSpec::new(k, l).unwrap();
            let ((a, n1), (b, n2)) = s.radii_squared();
            assert_eq!(n1, n2);
            assert_eq!(a + b, n1);
            let pc = s.principal_curvatures();
            let trace: f64 = pc.iter().sum();
            let sq: f64 = pc.iter().map(|v| v * v).sum();
            assert!(trace.abs() < 1e-14);
            assert!((sq - s.n() as f64).abs() < 1e-13);
        }
        assert!(CliffordSpec::new(0, 2).is_err());
    }

    #[test]
    fn clifford_2_1_principal_curvatures() {
        let m = clifford_hypersurface(CliffordSpec::new(2, 1).unwrap());
        let shape = m.shape_at(0, &[1.0, 2.0, 0.5]).unwrap();
        let k = shape.principal_curvatures();
        let h = 0.5f64.sqrt();
        assert!((k[0] - h).abs() < 1e-12 && (k[1] - h).abs() < 1e-12);
        assert!((k[2] + 2f64.sqrt()).abs() < 1e-12);
        assert!((shape.norm_a2 - 3.0).abs() < 1e-12);
        assert!(shape.mean_curvature.abs() < 1e-12);
    }

    #[test]
    fn clifford_1_1_is_flat_torus_with_half_metric() {
        let m = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
        let shape = m.shape_at(0, &[0.3, 4.0]).unwrap();
        assert!((shape.metric[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((shape.metric[(1, 1)] - 0.5).abs() < 1e-15);
        assert!(shape.metric[(0, 1)].abs() < 1e-15);
        assert!((shape.norm_a2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn equator_is_totally_geodesic() {
        for n in [2u32, 3] {
            let m = equator(n);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            for _ in 0..100 {
                let u = m.charts()[0].sample_interior(&mut rng, POLE_MARGIN);
                let s = m.shape_at(0, &u).unwrap();
                assert_eq!(s.norm_a2, 0.0);
                assert_eq!(s.mean_curvature, 0.0);
            }
        }
    }

    #[test]
    fn exact_jets_match_finite_differences() {
        let m = clifford_hypersurface(CliffordSpec::new(2, 2).unwrap());
        let map = m.charts()[0].map();
        let u = [0.8, 1.9, 2.1, 5.0];
        let exact = map.jet(&u);
        let fd = finite_difference_jet(map.as_ref(), &u, 1e-4);
        for i in 0..4 {
            assert!((&exact.first[i] - &fd.first[i]).norm() < 1e-7);
            for j in 0..4 {
                assert!((exact.second(i, j) - fd.second(i, j)).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn analytic_normal_agrees_with_cofactor_normal_up_to_sign() {
        let m = clifford_hypersurface(CliffordSpec::new(1, 2).unwrap());
        let u = [1.0, 1.2, 3.3];
        let jet = m.charts()[0].jet(&u);
        let analytic = m.charts()[0].map().normal(&u).unwrap();
        let cof = crate::geometry::cofactor_normal(&jet);
        assert!((analytic.dot(&cof).abs() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn shear_preserves_invariants() {
        let base = clifford_hypersurface(CliffordSpec::new(1, 1).unwrap());
        let sheared = Sheared::surface(&base, 0, 1, 0.4).unwrap();
        let u = [0.7, 2.0];
        let s = sheared.shape_at(0, &u).unwrap();
        assert!(s.metric[(0, 1)].abs() > 0.05);
        assert!((s.norm_a2 - 2.0).abs() < 1e-13);
        assert!(s.mean_curvature.abs() < 1e-13);
        let fd = finite_difference_jet(sheared.charts()[0].map().as_ref(), &u, 1e-4);
        let exact = sheared.charts()[0].jet(&u);
        for i in 0..2 {
            for j in 0..2 {
                assert!((exact.second(i, j) - fd.second(i, j)).norm() < 1e-6);
            }
        }
        assert!(Sheared::surface(&equator(2), 0, 1, 0.1).is_err());
    }
}
