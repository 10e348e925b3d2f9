//! Discretization of the broken line `(-∞,-1] ∪ [1,∞)` with `±1` glued into
//! one junction node and measure `|r|^{d-1} dr`, truncated at `|r| = L`.
//!
//! Nodes are stored left to right: `-L, ..., -r_1, junction, r_1, ..., L`.
//! Across the junction the two branches join like an ordinary line, so all
//! stencils treat the node sequence as a single path graph. Every edge of that
//! path is a cell `[r_i, r_{i+1}]` of one branch and carries the exact mass
//! `∫ r^{d-1} dr`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dimension parameter `d > 1` of the weight `|r|^{d-1}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Dimension(f64);

impl Dimension {
    pub fn new(d: f64) -> Result<Self> {
        if !d.is_finite() || d <= 1.0 {
            return Err(Error::InvalidParameter(format!("dimension must exceed 1, got {d}")));
        }
        Ok(Self(d))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Order `|d/2 - 1|` of the `K` Bessel factor; zero exactly at `d = 2`.
    pub fn bessel_order(self) -> f64 {
        (self.0 / 2.0 - 1.0).abs()
    }

    /// Hölder conjugate `d/(d-1)`.
    pub fn conjugate(self) -> f64 {
        self.0 / (self.0 - 1.0)
    }
}

impl TryFrom<f64> for Dimension {
    type Error = Error;
    fn try_from(d: f64) -> Result<Self> {
        Self::new(d)
    }
}

impl From<Dimension> for f64 {
    fn from(d: Dimension) -> f64 {
        d.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    /// Cell widths grow geometrically from the junction; `max_ratio` is the
    /// ratio of the outermost to the innermost cell.
    Geometric { max_ratio: f64 },
}

impl Default for Spacing {
    fn default() -> Self {
        Spacing::Geometric { max_ratio: 10.0 }
    }
}

pub const MIN_NODES: usize = 64;

/// Which side of the junction a node lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Negative,
    Junction,
    Positive,
}

#[derive(Debug, Clone)]
pub struct Grid {
    id: u64,
    dim: Dimension,
    length: f64,
    spacing: Spacing,
    /// Branch radii `1 = r_0 < ... < r_m = L`.
    radii: Vec<f64>,
    /// `∫_{r_i}^{r_{i+1}} r^{d-1} dr`.
    cell_mass: Vec<f64>,
    weights: Vec<f64>,
}

fn cell_integral(d: f64, a: f64, b: f64) -> f64 {
    let h = b - a;
    a.powf(d) * (d * (h / a).ln_1p()).exp_m1() / d
}

impl Grid {
    /// Builds a grid with `n` nodes per branch (both `±1` and `±L` included).
    pub fn new(dim: Dimension, length: f64, n: usize, spacing: Spacing) -> Result<Arc<Self>> {
        if !length.is_finite() {
            return Err(Error::InvalidGrid(format!("L must be finite, got {length}")));
        }
        if length <= 1.0 {
            return Err(Error::InvalidGrid(format!("L must exceed 1, got {length}")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes per branch, got {n}")));
        }
        let m = n - 1;
        let span = length - 1.0;
        let mut radii: Vec<f64> = match spacing {
            Spacing::Uniform => (0..=m).map(|i| 1.0 + span * i as f64 / m as f64).collect(),
            Spacing::Geometric { max_ratio } => {
                if !max_ratio.is_finite() || max_ratio < 1.0 {
                    return Err(Error::InvalidGrid(format!("geometric max_ratio must be >= 1, got {max_ratio}")));
                }
                if max_ratio == 1.0 {
                    (0..=m).map(|i| 1.0 + span * i as f64 / m as f64).collect()
                } else {
                    let log_q = max_ratio.ln() / (m - 1) as f64;
                    let total = (m as f64 * log_q).exp_m1();
                    (0..=m)
                        .map(|i| 1.0 + span * (i as f64 * log_q).exp_m1() / total)
                        .collect()
                }
            }
        };
        radii[0] = 1.0;
        radii[m] = length;
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidGrid("radii not strictly increasing".into()));
        }
        let d = dim.value();
        let cell_mass: Vec<f64> = radii.windows(2).map(|w| cell_integral(d, w[0], w[1])).collect();
        let mut weights = vec![0.0; 2 * m + 1];
        for i in 0..=m {
            let left = if i > 0 { cell_mass[i - 1] } else { 0.0 };
            let right = if i < m { cell_mass[i] } else { 0.0 };
            let w = 0.5 * (left + right);
            weights[m + i] = w;
            weights[m - i] = w;
        }
        weights[m] = cell_mass[0];

        let mut hasher = DefaultHasher::new();
        d.to_bits().hash(&mut hasher);
        length.to_bits().hash(&mut hasher);
        n.hash(&mut hasher);
        match spacing {
            Spacing::Uniform => 0u8.hash(&mut hasher),
            Spacing::Geometric { max_ratio } => {
                1u8.hash(&mut hasher);
                max_ratio.to_bits().hash(&mut hasher);
            }
        }
        Ok(Arc::new(Self {
            id: hasher.finish(),
            dim,
            length,
            spacing,
            radii,
            cell_mass,
            weights,
        }))
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn dimension(&self) -> Dimension {
        self.dim
    }

    pub fn d(&self) -> f64 {
        self.dim.value()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    /// Nodes per branch.
    pub fn nodes_per_branch(&self) -> usize {
        self.radii.len()
    }

    /// Total number of nodes (the junction counted once).
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn junction(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn cell_mass(&self) -> &[f64] {
        &self.cell_mass
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn branch(&self, j: usize) -> Branch {
        let m = self.junction();
        match j.cmp(&m) {
            std::cmp::Ordering::Less => Branch::Negative,
            std::cmp::Ordering::Equal => Branch::Junction,
            std::cmp::Ordering::Greater => Branch::Positive,
        }
    }

    /// `|x_j|`.
    pub fn radius(&self, j: usize) -> f64 {
        let m = self.junction();
        self.radii[j.abs_diff(m)]
    }

    /// Signed coordinate; the junction reports `+1`.
    pub fn coord(&self, j: usize) -> f64 {
        let m = self.junction();
        if j < m {
            -self.radii[m - j]
        } else {
            self.radii[j - m]
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.coord(j)).collect()
    }

    /// Index of the node mirrored through the junction.
    pub fn mirror(&self, j: usize) -> usize {
        self.len() - 1 - j
    }

    /// Branch cell underlying the path edge `(j, j+1)`.
    pub fn edge_cell(&self, j: usize) -> usize {
        let m = self.junction();
        if j >= m {
            j - m
        } else {
            m - 1 - j
        }
    }

    /// Length of the path edge `(j, j+1)`.
    pub fn edge_length(&self, j: usize) -> f64 {
        let c = self.edge_cell(j);
        self.radii[c + 1] - self.radii[c]
    }

    /// Conductance `∫ r^{d-1} dr / h²` of the path edge `(j, j+1)`.
    pub fn edge_conductance(&self, j: usize) -> f64 {
        let c = self.edge_cell(j);
        let h = self.radii[c + 1] - self.radii[c];
        self.cell_mass[c] / (h * h)
    }

    pub fn max_spacing(&self) -> f64 {
        self.radii.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        self.radii.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// `μ([-L,-1] ∪ [1,L])` in closed form.
    pub fn exact_measure(&self) -> f64 {
        2.0 * cell_integral(self.d(), 1.0, self.length)
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || self.id == other.id
    }
}

/// Real values on the nodes of a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite value at node {j}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    /// Samples `f` at the signed node coordinates. The junction is sampled
    /// at `+1`.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.coord(j))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn junction_value(&self) -> f64 {
        self.values[self.grid.junction()]
    }

    /// Membership test for `S_0`: vanishes at the junction.
    pub fn in_s0(&self, tol: f64) -> bool {
        self.junction_value().abs() <= tol
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid.clone(), values }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `Σ w_j f_j g_j`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(self
            .grid
            .weights()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(w, (a, b))| w * a * b)
            .sum())
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        weighted_lp_norm(self, p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).unwrap_or(0.0).sqrt()
    }

    pub fn derivative(&self) -> Self {
        derivative(self)
    }

    pub fn laplacian(&self) -> Self {
        apply_laplacian(self)
    }

    /// Discrete Dirichlet form `Σ_edges κ_e Δf Δg`, the grid version of
    /// `∫ f' g' dμ` (it equals `⟨Δ_d f, g⟩` for functions vanishing at `±L`).
    pub fn energy(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        let g = &self.grid;
        let f = &self.values;
        let h = &other.values;
        Ok((0..g.len() - 1)
            .map(|j| g.edge_conductance(j) * (f[j + 1] - f[j]) * (h[j + 1] - h[j]))
            .sum())
    }

    /// Relative weighted-L² distance `‖self - other‖ / ‖other‖`.
    pub fn rel_l2_error(&self, reference: &Self) -> Result<f64> {
        let diff = self.axpy(-1.0, reference)?;
        let den = reference.l2_norm();
        Ok(if den > 0.0 { diff.l2_norm() / den } else { diff.l2_norm() })
    }
}

/// `(Σ w_j |f_j|^p)^{1/p}`.
pub fn weighted_lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must lie in [1, ∞), got {p}")));
    }
    let w = f.grid.weights();
    let scale = f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = w.iter().zip(&f.values).map(|(w, v)| w * (v.abs() / scale).powf(p)).sum();
    Ok(scale * s.powf(1.0 / p))
}

/// Three-point derivative along the path: central (non-uniform) in the
/// interior, one-sided second order at `±L`. At the junction the stencil is
/// the spacing-weighted average of the two one-sided branch differences.
pub fn derivative(f: &GridFunction) -> GridFunction {
    let g = &f.grid;
    let v = &f.values;
    let n = g.len();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        let h1 = g.edge_length(j - 1);
        let h2 = g.edge_length(j);
        let back = (v[j] - v[j - 1]) / h1;
        let fwd = (v[j + 1] - v[j]) / h2;
        out[j] = (h2 * back + h1 * fwd) / (h1 + h2);
    }
    out[0] = one_sided(g.edge_length(0), g.edge_length(1), v[0], v[1], v[2]);
    out[n - 1] = -one_sided(g.edge_length(n - 2), g.edge_length(n - 3), v[n - 1], v[n - 2], v[n - 3]);
    GridFunction::from_vec_unchecked(g.clone(), out)
}

/// Second-order derivative at the first point of `(f0, f1, f2)` with
/// spacings `h1`, `h2`.
fn one_sided(h1: f64, h2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f0 + (h1 + h2) / (h1 * h2) * f1 - h1 / (h2 * (h1 + h2)) * f2
}

/// Discrete `Δ_d f = -f'' - (d-1)/|r| f'` in conservative form
/// `(Δf)_j = Σ_edges κ_e (f_j - f_neighbor) / w_j`. The matrix is symmetric in
/// the `w`-weighted inner product; the junction row sums the fluxes of both
/// branches. Rows at `±L` are Dirichlet and return 0.
pub fn apply_laplacian(f: &GridFunction) -> GridFunction {
    let g = &f.grid;
    let v = &f.values;
    let n = g.len();
    let w = g.weights();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        let kl = g.edge_conductance(j - 1);
        let kr = g.edge_conductance(j);
        out[j] = (kl * (v[j] - v[j - 1]) + kr * (v[j] - v[j + 1])) / w[j];
    }
    GridFunction::from_vec_unchecked(g.clone(), out)
}
