//! Discrete Laplace–Beltrami and Jacobi operators on chart grids, and the
//! closed-form spectra of the built-in families.
//!
//! The grid is cell centered: along every axis the nodes sit at
//! `lo + (i + ½)h`, so no node falls on a coordinate pole. The stiffness
//! matrix `S` is the finite-volume Dirichlet form `∫ |∇u|²`, the mass `B`
//! is lumped (`√g Πh` per node) and `V = (|A|² + n) B`. The stability
//! pencil is `(S − V) x = λ B x`, i.e. `L u = −λ u` for
//! `L = Δ + |A|² + n`.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DVector;
use nalgebra_sparse::CsrMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    jet_and_shape, metric_data, Family, GeometryError, ParametrizedHypersurface,
};

pub const MIN_RESOLUTION: usize = 8;

/// Relative size of off-diagonal metric entries below which a chart is
/// treated as orthogonal.
const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("resolution {0} is below the minimum of {MIN_RESOLUTION} nodes per axis")]
    InvalidResolution(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("assembly failed: {0}")]
    AssemblyFailure(String),
    #[error("no closed-form spectrum for {0}; use the numeric backend")]
    UnsupportedFamily(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cell-centered tensor grid on one chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartGrid {
    pub domain: Vec<(f64, f64)>,
    pub periodic: Vec<bool>,
    pub resolution: usize,
}

impl ChartGrid {
    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, axis: usize) -> f64 {
        let (lo, hi) = self.domain[axis];
        (hi - lo) / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.step(a)).product()
    }

    /// Per-axis indices of node `p`, last axis fastest.
    pub fn multi_index(&self, mut p: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = p % self.resolution;
            p /= self.resolution;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    /// Parameters of node `p`.
    pub fn params(&self, p: usize) -> Vec<f64> {
        self.multi_index(p)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.domain[a].0 + (i as f64 + 0.5) * self.step(a))
            .collect()
    }

    /// Next node along `axis`, wrapping on periodic axes.
    pub fn forward(&self, p: usize, axis: usize) -> Option<usize> {
        let mut idx = self.multi_index(p);
        idx[axis] += 1;
        if idx[axis] == self.resolution {
            if !self.periodic[axis] {
                return None;
            }
            idx[axis] = 0;
        }
        Some(self.flat_index(&idx))
    }
}

/// How the Dirichlet form is discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Two-point fluxes with `√g g^{aa}` at edge midpoints; diagonal metrics.
    Orthogonal,
    /// Per-cell quadratic form with averaged differences; any metric.
    Cell,
}

/// Which matrix of the pencil to export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Stiffness,
    Mass,
    Potential,
    /// `S − V`.
    Jacobi,
}

/// Symmetric accumulator that applies every off-diagonal update to both
/// triangles in the same order, so the result is exactly symmetric.
struct SymmetricBuilder {
    rows: Vec<BTreeMap<usize, f64>>,
}

impl SymmetricBuilder {
    fn new(n: usize) -> Self {
        SymmetricBuilder {
            rows: vec![BTreeMap::new(); n],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        *self.rows[i].entry(j).or_insert(0.0) += v;
        if i != j {
            *self.rows[j].entry(i).or_insert(0.0) += v;
        }
    }

    /// Adds `w (x_i − x_j)²` to the quadratic form.
    fn edge(&mut self, i: usize, j: usize, w: f64) {
        self.add(i, i, w);
        self.add(j, j, w);
        self.add(i, j, -w);
    }

    fn build(self) -> CsrMatrix<f64> {
        let n = self.rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for row in self.rows {
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            offsets.push(cols.len());
        }
        CsrMatrix::try_from_csr_data(n, n, offsets, cols, vals).expect("valid CSR layout")
    }
}

/// Assembled stiffness, mass and potential on one chart grid.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: ChartGrid,
    scheme: Scheme,
    dim: usize,
    family: Family,
    label: String,
    stiffness: CsrMatrix<f64>,
    mass: DVector<f64>,
    potential: DVector<f64>,
    norm_a2: DVector<f64>,
    points: Vec<DVector<f64>>,
}

/// Assembles the Jacobi pencil of `surface` with `resolution` nodes per axis.
pub fn assemble_jacobi(
    surface: &ParametrizedHypersurface,
    resolution: usize,
) -> Result<DiscreteOperator, OperatorError> {
    if resolution < MIN_RESOLUTION {
        return Err(OperatorError::InvalidResolution(resolution));
    }
    if surface.charts().len() != 1 {
        return Err(OperatorError::AssemblyFailure(format!(
            "grid assembly needs a single chart, the surface has {}",
            surface.charts().len()
        )));
    }
    let chart = &surface.charts()[0];
    let n = surface.dim();
    let grid = ChartGrid {
        domain: chart.domain().to_vec(),
        periodic: chart.periodic().to_vec(),
        resolution,
    };
    let total = grid.len();
    let cell = grid.cell_volume();

    let nodes = (0..total)
        .into_par_iter()
        .map(|p| jet_and_shape(surface, 0, &grid.params(p)).map(|(_, s)| s))
        .collect::<Result<Vec<_>, GeometryError>>()?;
    if let Some(bad) = nodes.iter().position(|s| !(s.sqrt_det_metric > 0.0)) {
        return Err(OperatorError::AssemblyFailure(format!(
            "non-positive mass at node {bad}"
        )));
    }
    let orthogonal = nodes.iter().all(|s| {
        let g = &s.metric;
        (0..n).all(|a| {
            (0..a).all(|b| {
                g[(a, b)].abs() <= ORTHOGONALITY_TOLERANCE * (g[(a, a)] * g[(b, b)]).sqrt()
            })
        })
    });
    let scheme = if orthogonal {
        Scheme::Orthogonal
    } else {
        Scheme::Cell
    };
    let metric_at = |u: &[f64]| -> Result<(nalgebra::DMatrix<f64>, f64), OperatorError> {
        let jet = chart.jet(u);
        let (_, g_inv, sqrt_det) = metric_data(&jet).map_err(|_| {
            OperatorError::AssemblyFailure(format!("degenerate metric at {u:?}"))
        })?;
        Ok((g_inv, sqrt_det))
    };

    let mut builder = SymmetricBuilder::new(total);
    match scheme {
        Scheme::Orthogonal => {
            let edges = (0..total)
                .into_par_iter()
                .map(|p| {
                    let u = grid.params(p);
                    let mut out = Vec::new();
                    for a in 0..n {
                        let Some(q) = grid.forward(p, a) else { continue };
                        let mut mid = u.clone();
                        mid[a] += 0.5 * grid.step(a);
                        let (g_inv, sqrt_det) = metric_at(&mid)?;
                        let h = grid.step(a);
                        out.push((q, sqrt_det * g_inv[(a, a)] * cell / (h * h)));
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>, OperatorError>>()?;
            for (p, list) in edges.into_iter().enumerate() {
                for (q, w) in list {
                    builder.edge(p, q, w);
                }
            }
        }
        Scheme::Cell => {
            let corners = 1usize << n;
            let share = 1.0 / (corners / 2) as f64;
            let cells = (0..total)
                .into_par_iter()
                .map(|p| {
                    // Corner nodes of the cell whose lowest corner is p.
                    let mut ids = vec![p; corners];
                    for (mask, id) in ids.iter_mut().enumerate() {
                        for a in 0..n {
                            if mask & (1 << a) != 0 {
                                match grid.forward(*id, a) {
                                    Some(q) => *id = q,
                                    None => return Ok(None),
                                }
                            }
                        }
                    }
                    let mut center = grid.params(p);
                    for (a, c) in center.iter_mut().enumerate() {
                        *c += 0.5 * grid.step(a);
                    }
                    let (g_inv, sqrt_det) = metric_at(&center)?;
                    Ok(Some((ids, g_inv, sqrt_det)))
                })
                .collect::<Result<Vec<_>, OperatorError>>()?;
            for (ids, g_inv, sqrt_det) in cells.into_iter().flatten() {
                let h: Vec<f64> = (0..n).map(|a| grid.step(a)).collect();
                for a in 0..n {
                    let w = sqrt_det * g_inv[(a, a)] * cell / (h[a] * h[a]) * share;
                    for mask in (0..corners).filter(|m| m & (1 << a) == 0) {
                        builder.edge(ids[mask], ids[mask | (1 << a)], w);
                    }
                }
                // Cross terms G_ab D̄_a D̄_b with D̄_a the mean difference.
                let diff = |a: usize, corner: usize| -> f64 {
                    if corner & (1 << a) != 0 {
                        share
                    } else {
                        -share
                    }
                };
                for a in 0..n {
                    for b in a + 1..n {
                        let gab = sqrt_det * g_inv[(a, b)] * cell / (h[a] * h[b]);
                        for s in 0..corners {
                            for t in s..corners {
                                let v = gab * (diff(a, s) * diff(b, t) + diff(b, s) * diff(a, t));
                                builder.add(ids[s], ids[t], v);
                            }
                        }
                    }
                }
            }
        }
    }

    let stiffness = builder.build();
    let mass = DVector::from_iterator(total, nodes.iter().map(|s| s.sqrt_det_metric * cell));
    let norm_a2 = DVector::from_iterator(total, nodes.iter().map(|s| s.norm_a2));
    let potential = DVector::from_iterator(
        total,
        nodes
            .iter()
            .zip(mass.iter())
            .map(|(s, b)| (s.norm_a2 + n as f64) * b),
    );
    let points = nodes.into_iter().map(|s| s.point).collect();
    Ok(DiscreteOperator {
        grid,
        scheme,
        dim: n,
        family: surface.family(),
        label: surface.label().to_owned(),
        stiffness,
        mass,
        potential,
        norm_a2,
        points,
    })
}

impl DiscreteOperator {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &ChartGrid {
        &self.grid
    }

    pub fn resolution(&self) -> usize {
        self.grid.resolution
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.stiffness
    }

    /// Diagonal of the lumped mass matrix.
    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }

    /// Diagonal of `V = (|A|² + n) B`.
    pub fn potential(&self) -> &DVector<f64> {
        &self.potential
    }

    /// `|A|²` at the grid nodes.
    pub fn norm_a2(&self) -> &DVector<f64> {
        &self.norm_a2
    }

    /// Ambient position of every node.
    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn area(&self) -> f64 {
        self.mass.sum()
    }

    /// Pointwise `V_pp / B_pp`.
    pub fn potential_ratio(&self) -> DVector<f64> {
        self.potential.component_div(&self.mass)
    }

    pub fn apply_stiffness(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.len(),
            self.stiffness.row_iter().map(|row| {
                row.col_indices()
                    .iter()
                    .zip(row.values())
                    .map(|(&c, v)| v * x[c])
                    .sum::<f64>()
            }),
        )
    }

    /// `(S − V) x`.
    pub fn apply_jacobi(&self, x: &DVector<f64>) -> DVector<f64> {
        self.apply_stiffness(x) - self.potential.component_mul(x)
    }

    pub fn apply_mass(&self, x: &DVector<f64>) -> DVector<f64> {
        self.mass.component_mul(x)
    }

    /// `xᵀ S x`.
    pub fn dirichlet_energy(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.apply_stiffness(x))
    }

    /// `xᵀ (S − V) x`.
    pub fn jacobi_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&self.apply_jacobi(x))
    }

    pub fn mass_form(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&self.apply_mass(y))
    }

    /// The same pencil with `V` replaced by `V + c B`; every eigenvalue
    /// moves by `−c`.
    pub fn shift_potential(&self, c: f64) -> DiscreteOperator {
        let mut out = self.clone();
        out.potential += &self.mass * c;
        out
    }

    /// `max |S − Sᵀ|`.
    pub fn symmetry_defect(&self) -> f64 {
        let t = self.stiffness.transpose();
        let diff = &self.stiffness - &t;
        diff.values().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinate triplets `(row, col, value)` of one matrix of the pencil.
    pub fn triplets(&self, kind: MatrixKind) -> Vec<(usize, usize, f64)> {
        let diagonal = |d: &DVector<f64>| d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        match kind {
            MatrixKind::Mass => diagonal(&self.mass),
            MatrixKind::Potential => diagonal(&self.potential),
            MatrixKind::Stiffness | MatrixKind::Jacobi => self
                .stiffness
                .triplet_iter()
                .map(|(i, j, &v)| {
                    let v = if kind == MatrixKind::Jacobi && i == j {
                        v - self.potential[i]
                    } else {
                        v
                    };
                    (i, j, v)
                })
                .collect(),
        }
    }

    /// Writes `row col value` lines, zero-based, values in round-trip form.
    pub fn write_triplets<W: Write>(&self, kind: MatrixKind, mut out: W) -> Result<(), OperatorError> {
        for (i, j, v) in self.triplets(kind) {
            writeln!(out, "{i} {j} {v:?}")?;
        }
        Ok(())
    }
}

/// Values of a function at the nodes of an operator's grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub values: DVector<f64>,
}

impl GridField {
    pub fn from_values(values: DVector<f64>) -> Self {
        GridField { values }
    }

    /// Samples `f` at the ambient position of every node.
    pub fn from_points(op: &DiscreteOperator, f: impl Fn(&DVector<f64>) -> f64) -> Self {
        GridField {
            values: DVector::from_iterator(op.len(), op.points().iter().map(f)),
        }
    }

    /// Samples `f` at the chart parameters of every node.
    pub fn from_params(op: &DiscreteOperator, f: impl Fn(&[f64]) -> f64) -> Self {
        GridField {
            values: DVector::from_iterator(op.len(), (0..op.len()).map(|p| f(&op.grid.params(p)))),
        }
    }

    pub fn constant(op: &DiscreteOperator, c: f64) -> Self {
        GridField {
            values: DVector::from_element(op.len(), c),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        GridField {
            values: &self.values * c,
        }
    }
}

/// One sphere factor `S^m(r)` of a product, with `r² = num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
struct SphereFactor {
    dim: u64,
    r2_num: u64,
    r2_den: u64,
}

impl SphereFactor {
    /// `j(j + m − 1)` and its multiplicity `C(j+m, m) − C(j+m−2, m)`.
    fn level(&self, j: u64) -> (u64, u64) {
        let m = self.dim;
        let mult = binomial(j + m, m) - if j >= 2 { binomial(j + m - 2, m) } else { 0 };
        (j * (j + m - 1), mult)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Exact `−Δ` spectrum of an equator or Clifford hypersurface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpectrum {
    family: Family,
    factors: Vec<SphereFactor>,
    potential: u32,
}

/// Closed-form spectrum for the built-in families; custom surfaces need the
/// numeric backend.
pub fn analytic_laplace_spectrum(family: Family) -> Result<AnalyticSpectrum, OperatorError> {
    let (factors, potential) = match family {
        Family::Equator { n } if n >= 1 => (
            vec![SphereFactor {
                dim: n as u64,
                r2_num: 1,
                r2_den: 1,
            }],
            n,
        ),
        Family::Clifford { k, l } if k >= 1 && l >= 1 => {
            let n = (k + l) as u64;
            (
                vec![
                    SphereFactor {
                        dim: k as u64,
                        r2_num: k as u64,
                        r2_den: n,
                    },
                    SphereFactor {
                        dim: l as u64,
                        r2_num: l as u64,
                        r2_den: n,
                    },
                ],
                2 * (k + l),
            )
        }
        other => return Err(OperatorError::UnsupportedFamily(other.to_string())),
    };
    Ok(AnalyticSpectrum {
        family,
        factors,
        potential,
    })
}

impl AnalyticSpectrum {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim as usize).sum()
    }

    /// `|A|² + n`, constant on these families.
    pub fn potential(&self) -> f64 {
        self.potential as f64
    }

    /// Distinct eigenvalues of `−Δ` up to `max` with multiplicities,
    /// ascending. Each value is one correctly rounded rational.
    pub fn levels_up_to(&self, max: f64) -> Vec<(f64, u64)> {
        // Common denominator of the factor contributions j(j+m−1)·den/num.
        let denom: u64 = self.factors.iter().map(|f| f.r2_num).product();
        let mut levels: Vec<(u64, u64)> = vec![(0, 1)];
        for f in &self.factors {
            let scale = f.r2_den * denom / f.r2_num;
            let mut next = Vec::new();
            for j in 0.. {
                let (v, mult) = f.level(j);
                let value = v * scale;
                if value as f64 / denom as f64 > max {
                    break;
                }
                for &(acc, m) in &levels {
                    if (acc + value) as f64 / denom as f64 <= max {
                        next.push((acc + value, m * mult));
                    }
                }
            }
            levels = next;
        }
        let mut merged: BTreeMap<u64, u64> = BTreeMap::new();
        for (v, m) in levels {
            *merged.entry(v).or_insert(0) += m;
        }
        merged
            .into_iter()
            .map(|(v, m)| (v as f64 / denom as f64, m))
            .collect()
    }

    /// The first `count` eigenvalues of `−Δ` with multiplicity.
    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        let mut max = 1.0;
        loop {
            let levels = self.levels_up_to(max);
            let total: u64 = levels.iter().map(|l| l.1).sum();
            if total as usize >= count {
                let mut out = Vec::with_capacity(count);
                for (v, m) in levels {
                    out.extend(std::iter::repeat_n(v, m as usize));
                }
                out.truncate(count);
                return out;
            }
            max *= 2.0;
        }
    }

    /// `μ − (|A|² + n)` for the first `count` Laplace eigenvalues `μ`.
    pub fn stability_eigenvalues(&self, count: usize) -> Vec<f64> {
        self.eigenvalues(count)
            .into_iter()
            .map(|mu| mu - self.potential())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{clifford_hypersurface, equator, CliffordSpec, Sheared};

    fn torus() -> ParametrizedHypersurface {
        clifford_hypersurface(CliffordSpec::new(1, 1).unwrap())
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(matches!(
            assemble_jacobi(&torus(), 4).unwrap_err(),
            OperatorError::InvalidResolution(4)
        ));
    }

    #[test]
    fn potential_ratio_is_constant() {
        let op = assemble_jacobi(&torus(), 64).unwrap();
        assert!(op.potential_ratio().iter().all(|r| (r - 4.0).abs() < 1e-10));
        assert_eq!(op.scheme(), Scheme::Orthogonal);
        let op = assemble_jacobi(&equator(2), 64).unwrap();
        assert!(op.potential_ratio().iter().all(|r| (r - 2.0).abs() < 1e-10));
    }

    #[test]
    fn constants_are_harmonic_and_stiffness_is_symmetric() {
        for op in [
            assemble_jacobi(&torus(), 32).unwrap(),
            assemble_jacobi(&equator(2), 32).unwrap(),
            assemble_jacobi(&Sheared::surface(&torus(), 0, 1, 0.3).unwrap(), 32).unwrap(),
        ] {
            let ones = DVector::from_element(op.len(), 1.0);
            let norm = op.stiffness().values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(op.apply_stiffness(&ones).amax() <= 1e-10 * norm);
            assert_eq!(op.symmetry_defect(), 0.0);
        }
    }

    #[test]
    fn sheared_chart_uses_cell_scheme() {
        let m = Sheared::surface(&torus(), 0, 1, 0.3).unwrap();
        let op = assemble_jacobi(&m, 32).unwrap();
        assert_eq!(op.scheme(), Scheme::Cell);
        assert!((op.area() - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn triplet_export_roundtrips() {
        let op = assemble_jacobi(&equator(1), 8).unwrap();
        let mut buf = Vec::new();
        op.write_triplets(MatrixKind::Jacobi, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let parsed: Vec<(usize, usize, f64)> = text
            .lines()
            .map(|l| {
                let t: Vec<&str> = l.split(' ').collect();
                (t[0].parse().unwrap(), t[1].parse().unwrap(), t[2].parse().unwrap())
            })
            .collect();
        assert_eq!(parsed, op.triplets(MatrixKind::Jacobi));
        assert_eq!(parsed.len(), 8 * 3);
    }

    #[test]
    fn analytic_spectra_of_reference_families() {
        let s = analytic_laplace_spectrum(Family::Equator { n: 2 }).unwrap();
        assert_eq!(s.eigenvalues(5), vec![0.0, 2.0, 2.0, 2.0, 6.0]);
        let s = analytic_laplace_spectrum(Family::Equator { n: 1 }).unwrap();
        assert_eq!(s.eigenvalues(5), vec![0.0, 1.0, 1.0, 4.0, 4.0]);
        let s = analytic_laplace_spectrum(Family::Clifford { k: 1, l: 1 }).unwrap();
        assert_eq!(s.eigenvalues(6), vec![0.0, 2.0, 2.0, 2.0, 2.0, 4.0]);
        assert_eq!(s.stability_eigenvalues(1), vec![-4.0]);
        // S¹(√(1/3)) × S²(√(2/3)): 3j² and 3j(j+1)/2.
        let s = analytic_laplace_spectrum(Family::Clifford { k: 1, l: 2 }).unwrap();
        assert_eq!(s.eigenvalues(6), vec![0.0, 3.0, 3.0, 3.0, 3.0, 3.0]);
        assert!(analytic_laplace_spectrum(Family::Custom).is_err());
    }

    #[test]
    fn multiplicities_match_harmonic_polynomial_counts() {
        let s = SphereFactor {
            dim: 2,
            r2_num: 1,
            r2_den: 1,
        };
        assert_eq!((0..4).map(|j| s.level(j).1).collect::<Vec<_>>(), vec![1, 3, 5, 7]);
        let s = SphereFactor {
            dim: 3,
            r2_num: 1,
            r2_den: 1,
        };
        assert_eq!((0..4).map(|j| s.level(j).1).collect::<Vec<_>>(), vec![1, 4, 9, 16]);
    }
}
