//! Exact spectral decomposition of the discrete `Δ_d` (Dirichlet at `±L`),
//! used as ground truth for the quadrature-based calculus.
//!
//! The grid is symmetric under `x ↦ -x`, so the operator splits into an even
//! block (Neumann-like at the junction, half junction weight) and an odd
//! block (junction value zero). Each block is a symmetric tridiagonal matrix
//! in the weighted basis `W^{1/2} f`; eigenvalues come from implicit QL and
//! eigenvectors from inverse iteration.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

pub const MAX_ORACLE_NODES: usize = 10_000;
/// Eigenvalues this far below zero are rounding; anything lower is an error.
pub const NEGATIVE_CLAMP: f64 = -1e-10;

#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i+1`.
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn norm_bound(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.off[i].abs() } else { 0.0 };
                self.diag[i].abs() + l + r
            })
            .fold(0.0, f64::max)
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// All eigenvalues, ascending, by implicit QL with Wilkinson shifts.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.len();
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(0.0);
        for l in 0..n {
            let mut iter = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = d[m].abs() + d[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                iter += 1;
                if iter > 60 {
                    return Err(Error::Eigen(format!("QL did not converge at index {l}")));
                }
                let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = d[m] - d[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut deflated = false;
                for i in (l..m).rev() {
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenvectors for ascending `values` by inverse iteration; vectors of
    /// eigenvalues closer than `1e-7 ‖T‖` are kept mutually orthogonal.
    pub fn eigenvectors(&self, values: &[f64]) -> Vec<Vec<f64>> {
        let n = self.len();
        let norm = self.norm_bound();
        let cluster_gap = 1e-7 * norm;
        let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        let mut cluster_start = 0;
        for (k, &theta) in values.iter().enumerate() {
            if k > 0 && theta - values[k - 1] > cluster_gap {
                cluster_start = k;
            }
            // nudge coincident shifts apart so every solve is distinct
            let shift = if k > cluster_start && theta - values[k - 1] < 10.0 * f64::EPSILON * norm {
                values[k - 1] + 10.0 * f64::EPSILON * norm
            } else {
                theta
            };
            let lu = TridiagLu::new(self, shift, norm);
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i * 7 + k * 13) as f64).sin()).collect();
            for _ in 0..3 {
                x = lu.solve(&x);
                for v in &vecs[cluster_start..k] {
                    let dot: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xi, vi) in x.iter_mut().zip(v) {
                        *xi -= dot * vi;
                    }
                }
                let nrm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                for xi in &mut x {
                    *xi /= nrm;
                }
            }
            vecs.push(x);
        }
        vecs
    }
}

/// LU with partial pivoting of `T - σI`; `U` has two superdiagonals.
struct TridiagLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    fn new(t: &SymTridiagonal, sigma: f64, norm: f64) -> Self {
        let n = t.len();
        let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swap = vec![false; n];
        // current row i holds (a, b, c) at columns (i, i+1, i+2)
        let mut a = t.diag[0] - sigma;
        let mut b = if n > 1 { t.off[0] } else { 0.0 };
        for i in 0..n {
            if i + 1 == n {
                u0[i] = if a.abs() < tiny { tiny } else { a };
                break;
            }
            let lo = t.off[i];
            let na = t.diag[i + 1] - sigma;
            let nb = if i + 2 < n { t.off[i + 1] } else { 0.0 };
            if lo.abs() > a.abs() {
                // pivot on the next row
                swap[i] = true;
                u0[i] = lo;
                u1[i] = na;
                u2[i] = nb;
                let m = a / lo;
                mult[i] = m;
                a = b - m * na;
                b = -m * nb;
            } else {
                let piv = if a.abs() < tiny { tiny } else { a };
                u0[i] = piv;
                u1[i] = b;
                u2[i] = 0.0;
                let m = lo / piv;
                mult[i] = m;
                a = na - m * b;
                b = nb;
            }
        }
        Self { u0, u1, u2, mult, swap }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut y = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                y.swap(i, i + 1);
            }
            y[i + 1] -= self.mult[i] * y[i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            if i + 1 < n {
                v -= self.u1[i] * x[i + 1];
            }
            if i + 2 < n {
                v -= self.u2[i] * x[i + 2];
            }
            x[i] = v / self.u0[i];
            if !x[i].is_finite() {
                x[i] = 0.0;
            }
        }
        // rescale to keep iterates bounded
        let big = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if big > 0.0 {
            for v in &mut x {
                *v /= big;
            }
        }
        x
    }
}

/// Spectrum of one symmetry block on the half grid `i = offset..m-1`.
#[derive(Debug, Clone)]
struct HalfSpectrum {
    offset: usize,
    /// Half-grid weights `W_i`.
    weights: Vec<f64>,
    values: Vec<f64>,
    /// Eigenvectors in the unweighted coordinates `g`, normalized in `W`.
    vectors: Vec<Vec<f64>>,
    matrix: SymTridiagonal,
}

impl HalfSpectrum {
    fn build(grid: &Grid, odd: bool) -> Result<Self> {
        let m = grid.junction();
        let r = grid.radii();
        let cm = grid.cell_mass();
        let kappa: Vec<f64> = (0..m).map(|i| cm[i] / (r[i + 1] - r[i]).powi(2)).collect();
        let w_full = grid.weights();
        let offset = usize::from(odd);
        let idx: Vec<usize> = (offset..m).collect();
        let weights: Vec<f64> = idx
            .iter()
            .map(|&i| if i == 0 { 0.5 * w_full[m] } else { w_full[m + i] })
            .collect();
        let diag: Vec<f64> = idx
            .iter()
            .zip(&weights)
            .map(|(&i, w)| (if i > 0 { kappa[i - 1] } else { 0.0 } + kappa[i]) / w)
            .collect();
        let off: Vec<f64> = (0..idx.len().saturating_sub(1))
            .map(|k| -kappa[idx[k]] / (weights[k] * weights[k + 1]).sqrt())
            .collect();
        let matrix = SymTridiagonal { diag, off };
        let mut values = matrix.eigenvalues()?;
        if let Some(&low) = values.first() {
            if low < NEGATIVE_CLAMP * matrix.norm_bound().max(1.0) {
                return Err(Error::Eigen(format!("negative eigenvalue {low}")));
            }
        }
        for v in &mut values {
            *v = v.max(0.0);
        }
        let mut vectors = matrix.eigenvectors(&values);
        for v in &mut vectors {
            for (x, w) in v.iter_mut().zip(&weights) {
                *x /= w.sqrt();
            }
        }
        Ok(Self { offset, weights, values, vectors, matrix })
    }

    /// `Σ φ(θ_k) ⟨g_k, h⟩_W g_k` on the half grid.
    fn apply(&self, h: &[f64], phi: &dyn Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; h.len()];
        for (theta, v) in self.values.iter().zip(&self.vectors) {
            let c: f64 = v.iter().zip(h).zip(&self.weights).map(|((a, b), w)| a * b * w).sum();
            let s = phi(*theta) * c;
            if s != 0.0 {
                for (o, a) in out.iter_mut().zip(v) {
                    *o += s * a;
                }
            }
        }
        out
    }

    fn residual(&self) -> f64 {
        let nrm = self.matrix.norm_bound();
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(theta, v)| {
                let y: Vec<f64> = v.iter().zip(&self.weights).map(|(a, w)| a * w.sqrt()).collect();
                let ty = self.matrix.mul(&y);
                ty.iter().zip(&y).map(|(a, b)| (a - theta * b).powi(2)).sum::<f64>().sqrt() / nrm
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralOracle {
    grid: Arc<Grid>,
    even: HalfSpectrum,
    odd: HalfSpectrum,
}

pub fn build_spectral_oracle(grid: &Arc<Grid>) -> Result<SpectralOracle> {
    SpectralOracle::new(grid)
}

impl SpectralOracle {
    pub fn new(grid: &Arc<Grid>) -> Result<Self> {
        if grid.len() > MAX_ORACLE_NODES {
            return Err(Error::Eigen(format!(
                "grid has {} nodes, oracle limit is {MAX_ORACLE_NODES}",
                grid.len()
            )));
        }
        let (even, odd) = rayon_join(|| HalfSpectrum::build(grid, false), || HalfSpectrum::build(grid, true));
        Ok(Self { grid: grid.clone(), even: even?, odd: odd? })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.even.values.iter().chain(&self.odd.values).copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn len(&self) -> usize {
        self.even.values.len() + self.odd.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.even.values.last().copied().unwrap_or(0.0).max(self.odd.values.last().copied().unwrap_or(0.0))
    }

    /// Largest `‖Tv - θv‖ / ‖T‖` over all computed pairs.
    pub fn residual_error(&self) -> f64 {
        self.even.residual().max(self.odd.residual())
    }

    /// `k`-th eigenpair of the even (`odd = false`) or odd block, with the
    /// eigenvector on the full grid normalized in the weighted inner product.
    pub fn eigenpair(&self, odd: bool, k: usize) -> Option<(f64, GridFunction)> {
        let half = if odd { &self.odd } else { &self.even };
        let theta = *half.values.get(k)?;
        let g = &half.vectors[k];
        let m = self.grid.junction();
        let mut full = vec![0.0; self.grid.len()];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for (k, &v) in g.iter().enumerate() {
            let i = k + half.offset;
            full[m + i] = s * v;
            full[m - i] = if odd { -s * v } else { s * v };
        }
        if !odd {
            full[m] = s * g[0];
        }
        Some((theta, GridFunction::from_vec_unchecked(self.grid.clone(), full)))
    }

    /// `φ(Δ) f`; values at `±L` are zero.
    pub fn apply(&self, f: &GridFunction, phi: impl Fn(f64) -> f64) -> Result<GridFunction> {
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let m = self.grid.junction();
        let v = f.values();
        let fe: Vec<f64> = (0..m).map(|i| 0.5 * (v[m + i] + v[m - i])).collect();
        let fo: Vec<f64> = (1..m).map(|i| 0.5 * (v[m + i] - v[m - i])).collect();
        let re = self.even.apply(&fe, &phi);
        let ro = self.odd.apply(&fo, &phi);
        let mut out = vec![0.0; self.grid.len()];
        out[m] = re[0];
        for i in 1..m {
            out[m + i] = re[i] + ro[i - 1];
            out[m - i] = re[i] - ro[i - 1];
        }
        Ok(GridFunction::from_vec_unchecked(self.grid.clone(), out))
    }

    pub fn sqrt(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply(f, f64::sqrt)
    }

    pub fn inv_sqrt(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply(f, |t| if t > 0.0 { 1.0 / t.sqrt() } else { 0.0 })
    }

    pub fn laplacian(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply(f, |t| t)
    }

    /// `(Δ + λ²)^{-1} f`.
    pub fn resolvent(&self, f: &GridFunction, lambda: f64) -> Result<GridFunction> {
        let l2 = lambda * lambda;
        self.apply(f, |t| 1.0 / (t + l2))
    }
}

/// `(Δ_h + λ²)^{-1} f` by a direct tridiagonal solve on the whole path, with
/// `u(±L) = 0`. The system is diagonally dominant, so no pivoting is needed.
pub fn solve_resolvent(f: &GridFunction, lambda: f64) -> Result<GridFunction> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let g = f.grid();
    let n = g.len();
    let w = g.weights();
    let l2 = lambda * lambda;
    // rows 1..n-1 scaled by w_j: -κ_l u_{j-1} + (κ_l + κ_r + λ² w_j) u_j - κ_r u_{j+1} = w_j f_j
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    for j in 1..n - 1 {
        let (kl, kr) = (g.edge_conductance(j - 1), g.edge_conductance(j));
        let lower = if j > 1 { -kl } else { 0.0 };
        let upper = if j + 2 < n { -kr } else { 0.0 };
        let denom = kl + kr + l2 * w[j] - lower * c[j - 1];
        c[j] = upper / denom;
        y[j] = (w[j] * f.values()[j] - lower * y[j - 1]) / denom;
    }
    let mut u = vec![0.0; n];
    for j in (1..n - 1).rev() {
        u[j] = y[j] - c[j] * u[j + 1];
    }
    GridFunction::new(g.clone(), u)
}

fn rayon_join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dimension, Spacing};
    use approx::assert_relative_eq;

    #[test]
    fn ql_matches_closed_form() {
        // path Laplacian: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 50;
        let t = SymTridiagonal { diag: vec![2.0; n], off: vec![-1.0; n - 1] };
        let ev = t.eigenvalues().unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_relative_eq!(*v, want, epsilon = 1e-13);
        }
        let vecs = t.eigenvectors(&ev);
        for (v, th) in vecs.iter().zip(&ev) {
            let tv = t.mul(v);
            let res: f64 = tv.iter().zip(v).map(|(a, b)| (a - th * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-12);
        }
        let dot: f64 = vecs[3].iter().zip(&vecs[4]).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-12);
    }

    #[test]
    fn oracle_reproduces_laplacian() {
        let g = Grid::new(Dimension::new(2.5).unwrap(), 20.0, 300, Spacing::default()).unwrap();
        let o = SpectralOracle::new(&g).unwrap();
        assert_eq!(o.len(), g.len() - 2);
        assert!(o.eigenvalues()[0] >= 0.0);
        assert!(o.residual_error() < 1e-12);
        let f = GridFunction::from_fn(g.clone(), |x: f64| (x.abs() - 1.0) * (-(x - 3.0).powi(2)).exp());
        let lf = f.laplacian();
        let of = o.laplacian(&f).unwrap();
        assert!(lf.rel_l2_error(&of).unwrap() < 1e-9);
        let ss = o.sqrt(&o.sqrt(&f).unwrap()).unwrap();
        assert!(ss.rel_l2_error(&of).unwrap() < 1e-9);
        let (theta, phi) = o.eigenpair(true, 2).unwrap();
        assert_relative_eq!(phi.l2_norm(), 1.0, max_relative = 1e-10);
        let r = phi.laplacian().axpy(-theta, &phi).unwrap();
        assert!(r.l2_norm() < 1e-8 * o.max_eigenvalue());
    }

    #[test]
    fn direct_solve_inverts_shifted_laplacian() {
        let g = Grid::new(Dimension::new(2.5).unwrap(), 15.0, 300, Spacing::default()).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| (-(x - 3.0).powi(2)).exp());
        let u = solve_resolvent(&f, 0.4).unwrap();
        let back = u.laplacian().axpy(0.16, &u).unwrap();
        let m = g.len() - 1;
        for j in 1..m {
            assert_relative_eq!(back.values()[j], f.values()[j], epsilon = 1e-10, max_relative = 1e-9);
        }
        assert_eq!(u.values()[0], 0.0);
        assert_eq!(u.values()[m], 0.0);
    }

    #[test]
    fn size_limit() {
        let g = Grid::new(Dimension::new(3.0).unwrap(), 20.0, 6000, Spacing::default()).unwrap();
        assert!(SpectralOracle::new(&g).is_err());
    }
}
