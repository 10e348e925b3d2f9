//! Resolvent kernel of `Δ_d + λ²` on the broken line and its action on grid
//! functions.
//!
//! For `y ≥ 1` the kernel is
//!
//! ```text
//! x ≤ -1       : A k(λ|x|) k(λy)
//! 1 ≤ x ≤ y    : B k(λx) k(λy) + v λ^{d-2} k(λy) l(λx)
//! x ≥ y        : B k(λx) k(λy) + v λ^{d-2} k(λx) l(λy)
//! ```
//!
//! extended by `K(x,y) = K(-x,-y)`. Coefficients are obtained by solving the
//! junction matching conditions numerically. Everything is carried in
//! exponentially scaled form so that neither `e^{2λ}` nor `I_ν(λ|x|)`
//! overflows.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::Serialize;

use crate::bessel::RadialSolutions;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchingCoefficients {
    pub d: f64,
    pub lambda: f64,
    /// `A(λ) e^{-2λ}`.
    pub a_scaled: f64,
    /// `B(λ) e^{-2λ}`.
    pub b_scaled: f64,
    /// Delta normalization constant.
    pub v: f64,
    /// Largest relative gap between the solved coefficients and the closed
    /// forms `A = -1/(λ[kk]'(λ))`, `B = -vλ^{d-2}[kl]'(λ)/[kk]'(λ)`.
    pub closed_form_gap: f64,
}

impl MatchingCoefficients {
    /// `A(λ)`; overflows to infinity for `λ ≳ 350`.
    pub fn a(&self) -> f64 {
        self.a_scaled * (2.0 * self.lambda).exp()
    }

    pub fn b(&self) -> f64 {
        self.b_scaled * (2.0 * self.lambda).exp()
    }

    /// `v λ^{d-2}`, the weight of the `kl` part.
    pub fn kl_weight(&self) -> f64 {
        self.v * self.lambda.powf(self.d - 2.0)
    }
}

/// Small-`λ` size of `|A|, |B|` for `λ ≤ 1`, by regime. At `d = 2` the
/// scale `-1/log λ` is regularized to `1/(1 + log(1/λ))`, which has the same
/// behavior as `λ → 0` and stays finite at `λ = 1`.
pub fn coefficient_scale(d: f64, lambda: f64) -> f64 {
    if d > 2.0 {
        lambda.powf(2.0 * d - 4.0)
    } else if d == 2.0 {
        1.0 / (1.0 - lambda.ln())
    } else {
        lambda.powf(d - 2.0)
    }
}

/// Imposes (i) continuity across the junction, (ii) equality of the
/// derivatives along the glued line, (iii) unit jump of `-∂_x K |y|^{d-1}`
/// across `x = y`, and solves for `A`, `B`, `v`.
pub fn solve_matching(d: f64, lambda: f64) -> Result<MatchingCoefficients> {
    if !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be finite, got {lambda}")));
    }
    if lambda <= 0.0 {
        return Err(Error::SingularMatching(lambda));
    }
    let rad = RadialSolutions::new(d)?;
    let s = rad.eval_scaled(lambda)?;
    // (iii): the jump at x = y equals v λ^{d-2} · λ · W(λy) |y|^{d-1} with
    // W the Wronskian k l' - k' l, i.e. v times r^{d-1} W(r) at r = λy.
    let w = rad.wronskian_constant(lambda)?;
    if !(w.is_finite() && w != 0.0) {
        return Err(Error::SingularMatching(lambda));
    }
    match_junction(d, lambda, 1.0 / w, s.k, s.dk, s.l, s.dl)
}

/// Solves the two junction conditions for `(Ã, B̃)` given scaled values of
/// the decaying solution (`k0`, `dk0`) and the growing one (`l0`, `dl0`) at
/// `r = λ`.
fn match_junction(d: f64, lambda: f64, v: f64, k0: f64, dk0: f64, l0: f64, dl0: f64) -> Result<MatchingCoefficients> {
    let c = v * lambda.powf(d - 2.0);
    // (i)  k0 Ã - k0 B̃ = c l0
    // (ii) -k0' Ã - k0' B̃ = c l0'
    let (m11, m12, m21, m22) = (k0, -k0, -dk0, -dk0);
    let (r1, r2) = (c * l0, c * dl0);
    let det = m11 * m22 - m12 * m21;
    if !(det.is_finite() && det.abs() > f64::MIN_POSITIVE) {
        return Err(Error::SingularMatching(lambda));
    }
    let a_scaled = (r1 * m22 - m12 * r2) / det;
    let b_scaled = (m11 * r2 - r1 * m21) / det;

    let kk_prime = 2.0 * k0 * dk0;
    let a_closed = -1.0 / (lambda * kk_prime) / v;
    let b_closed = -c * (dk0 * l0 + k0 * dl0) / kk_prime;
    let gap = |x: f64, y: f64| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE);
    let closed_form_gap = gap(a_scaled, a_closed).max(gap(b_scaled, b_closed));
    if !(a_scaled.is_finite() && b_scaled.is_finite()) {
        return Err(Error::SingularMatching(lambda));
    }
    Ok(MatchingCoefficients { d, lambda, a_scaled, b_scaled, v, closed_form_gap })
}

/// Behaviour of the tabulated kernel at `|x| = L`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The kernel of the untruncated line, restricted to the grid.
    Open,
    /// Exact resolvent of the truncated line with `f(±L) = 0`: the decaying
    /// solution `k` is replaced by `k - (k(λL)/l(λL)) l`, which vanishes at
    /// `L`, and `A`, `B` are re-matched. This is the operator the grid
    /// Laplacian discretizes.
    #[default]
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPart {
    Full,
    Kk,
    Kl,
}

#[derive(Debug, Clone, Copy)]
pub struct ResolventKernel {
    coeffs: MatchingCoefficients,
    rad: RadialSolutions,
}

impl ResolventKernel {
    pub fn new(d: f64, lambda: f64) -> Result<Self> {
        Ok(Self {
            coeffs: solve_matching(d, lambda)?,
            rad: RadialSolutions::new(d)?,
        })
    }

    pub fn coeffs(&self) -> &MatchingCoefficients {
        &self.coeffs
    }

    pub fn lambda(&self) -> f64 {
        self.coeffs.lambda
    }

    pub fn d(&self) -> f64 {
        self.coeffs.d
    }

    /// `(kk, kl)` parts of `K(x, y)`.
    pub fn parts(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        for t in [x, y] {
            if !(t.abs() >= 1.0) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!("kernel argument {t} lies inside (-1, 1)")));
            }
        }
        let (x, y) = if y < 0.0 { (-x, -y) } else { (x, y) };
        let lam = self.coeffs.lambda;
        let ax = x.abs();
        let sx = self.rad.eval_scaled(lam * ax)?;
        let sy = self.rad.eval_scaled(lam * y)?;
        let decay = (-lam * (ax - 1.0) - lam * (y - 1.0)).exp();
        if x < 0.0 {
            return Ok((self.coeffs.a_scaled * sx.k * sy.k * decay, 0.0));
        }
        let kk = self.coeffs.b_scaled * sx.k * sy.k * decay;
        let (big, small) = if ax >= y { (sx, sy) } else { (sy, sx) };
        let kl = self.coeffs.kl_weight() * big.k * small.l * (-lam * (ax - y).abs()).exp();
        Ok((kk, kl))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        let (kk, kl) = self.parts(x, y)?;
        Ok(kk + kl)
    }

    pub fn eval_kk(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.parts(x, y)?.0)
    }

    pub fn eval_kl(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.parts(x, y)?.1)
    }
}

pub fn kernel_eval(k: &ResolventKernel, x: f64, y: f64) -> Result<f64> {
    k.eval(x, y)
}

pub fn kernel_eval_kk(k: &ResolventKernel, x: f64, y: f64) -> Result<f64> {
    k.eval_kk(x, y)
}

pub fn kernel_eval_kl(k: &ResolventKernel, x: f64, y: f64) -> Result<f64> {
    k.eval_kl(x, y)
}

/// `λ → 0` limit of the kernel for `d > 2`, the Green function of `Δ_d`.
pub fn green_kernel(d: f64, x: f64, y: f64) -> Result<f64> {
    if !(d > 2.0) {
        return Err(Error::InvalidParameter(format!("the limit kernel exists only for d > 2, got {d}")));
    }
    if !(x.abs() >= 1.0 && y.abs() >= 1.0) {
        return Err(Error::InvalidParameter("kernel argument inside (-1, 1)".into()));
    }
    let (x, y) = if y < 0.0 { (-x, -y) } else { (x, y) };
    let e = 2.0 - d;
    let c = 1.0 / (2.0 * (d - 2.0));
    Ok(if x < 0.0 {
        c * (-x).powf(e) * y.powf(e)
    } else {
        let (big, small) = if x >= y { (x, y) } else { (y, x) };
        c * big.powf(e) * (2.0 - small.powf(e))
    })
}

/// Weights of `∫_0^h e^{-λt} q(t) dt` for `q` linear with `q(0)`, `q(h)`:
/// returns `(near, far, e^{-λh})`.
fn cell_weights(lambda: f64, h: f64) -> (f64, f64, f64) {
    let z = lambda * h;
    let decay = (-z).exp();
    // e0 = ∫_0^h e^{-λt} dt, e1 = ∫_0^h e^{-λt} t/h dt
    let (e0, e1) = if z < 0.1 {
        let mut t = 1.0;
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        for k in 0..12 {
            s0 += t / (k + 1) as f64;
            s1 += t / (k + 2) as f64;
            t *= -z / (k + 1) as f64;
        }
        (h * s0, h * s1)
    } else {
        (-(-z).exp_m1() / lambda, (1.0 - decay * (1.0 + z)) / (lambda * z))
    };
    (e0 - e1, e1, decay)
}

/// Precomputed per-grid data for one `λ`: scaled radial solutions at the
/// branch radii and the exponential cell weights. The same structure with
/// `k(t) = t^{2-d}`, `l(t) = 2 - t^{2-d}` and no decay represents the Green
/// function (`λ = 0`, `d > 2`).
#[derive(Debug)]
pub struct ResolventTable {
    lambda: f64,
    kernel: Option<ResolventKernel>,
    a: f64,
    b: f64,
    w: f64,
    k: Vec<f64>,
    /// `λ k'(λr)` in the same exponential scaling as `k`.
    dk: Vec<f64>,
    l: Vec<f64>,
    /// `e^{-λ(r_i - 1)}`.
    kk_decay: Vec<f64>,
    near: Vec<f64>,
    far: Vec<f64>,
    decay: Vec<f64>,
    /// `r_i^{d-1}`.
    jac: Vec<f64>,
}

impl ResolventTable {
    pub fn new(grid: &Grid, lambda: f64) -> Result<Self> {
        Self::with_boundary(grid, lambda, Boundary::default())
    }

    pub fn with_boundary(grid: &Grid, lambda: f64, boundary: Boundary) -> Result<Self> {
        let kernel = ResolventKernel::new(grid.d(), lambda)?;
        let r = grid.radii();
        let big_l = grid.length();
        // scaled Dirichlet correction: k̃_D(λr) = k̃(λr) - ρ e^{-2λ(L-r)} l̃(λr)
        let rho = match boundary {
            Boundary::Open => 0.0,
            Boundary::Dirichlet => {
                let s = kernel.rad.eval_scaled(lambda * big_l)?;
                s.k / s.l
            }
        };
        let corr = |ri: f64| rho * (-2.0 * lambda * (big_l - ri)).exp();
        let mut k = Vec::with_capacity(r.len());
        let mut dk = Vec::with_capacity(r.len());
        let mut l = Vec::with_capacity(r.len());
        for &ri in r {
            let s = kernel.rad.eval_scaled(lambda * ri)?;
            k.push(s.k - corr(ri) * s.l);
            dk.push(lambda * (s.dk - corr(ri) * s.dl));
            l.push(s.l);
        }
        if boundary == Boundary::Dirichlet {
            *k.last_mut().expect("grid has nodes") = 0.0;
        }
        let (mut near, mut far, mut decay) = (Vec::new(), Vec::new(), Vec::new());
        for w in r.windows(2) {
            let (a, b, c) = cell_weights(lambda, w[1] - w[0]);
            near.push(a);
            far.push(b);
            decay.push(c);
        }
        let c = match boundary {
            Boundary::Open => kernel.coeffs,
            Boundary::Dirichlet => {
                let s = kernel.rad.eval_scaled(lambda)?;
                let q = corr(1.0);
                match_junction(grid.d(), lambda, kernel.coeffs.v, s.k - q * s.l, s.dk - q * s.dl, s.l, s.dl)?
            }
        };
        Ok(Self {
            lambda,
            kernel: Some(kernel),
            a: c.a_scaled,
            b: c.b_scaled,
            w: c.kl_weight(),
            k,
            dk,
            l,
            kk_decay: r.iter().map(|&ri| (-lambda * (ri - 1.0)).exp()).collect(),
            near,
            far,
            decay,
            jac: r.iter().map(|&ri| ri.powf(grid.d() - 1.0)).collect(),
        })
    }

    /// Table of the `λ → 0` limit kernel; requires `d > 2`.
    pub fn green(grid: &Grid) -> Result<Self> {
        let d = grid.d();
        if !(d > 2.0) {
            return Err(Error::InvalidParameter(format!("the limit kernel exists only for d > 2, got {d}")));
        }
        let r = grid.radii();
        let e = 2.0 - d;
        let c = 1.0 / (2.0 * (d - 2.0));
        let h: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            lambda: 0.0,
            kernel: None,
            a: c,
            b: 0.0,
            w: c,
            k: r.iter().map(|&t| t.powf(e)).collect(),
            dk: r.iter().map(|&t| e * t.powf(e - 1.0)).collect(),
            l: r.iter().map(|&t| 2.0 - t.powf(e)).collect(),
            kk_decay: vec![1.0; r.len()],
            near: h.iter().map(|h| h / 2.0).collect(),
            far: h.iter().map(|h| h / 2.0).collect(),
            decay: vec![1.0; h.len()],
            jac: r.iter().map(|&t| t.powf(d - 1.0)).collect(),
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kernel(&self) -> Option<&ResolventKernel> {
        self.kernel.as_ref()
    }

    /// `B̃ ∫_same k̃ f + Ã ∫_opp k̃ f`, the scalar carried by the kk part.
    fn kk_moment(&self, same: &[f64], opp: &[f64]) -> f64 {
        let mut g_same = 0.0;
        let mut g_opp = 0.0;
        let p = |j: usize, f: &[f64]| self.k[j] * self.jac[j] * f[j];
        for i in (0..same.len() - 1).rev() {
            g_same = self.decay[i] * g_same + self.near[i] * p(i, same) + self.far[i] * p(i + 1, same);
            g_opp = self.decay[i] * g_opp + self.near[i] * p(i, opp) + self.far[i] * p(i + 1, opp);
        }
        self.b * g_same + self.a * g_opp
    }

    /// The kk part of the kernel applied to branch data, or its radial
    /// derivative `∂_r` when `gradient` is set. On the negative branch
    /// `∂_x = -∂_r`.
    pub fn kk_branches(&self, plus: &[f64], minus: &[f64], gradient: bool) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(plus.len(), self.k.len());
        assert_eq!(minus.len(), self.k.len());
        let col = if gradient { &self.dk } else { &self.k };
        let shape = |m: f64| -> Vec<f64> {
            col.iter().zip(&self.kk_decay).map(|(c, e)| c * e * m).collect()
        };
        let (mp, mm) = (self.kk_moment(plus, minus), self.kk_moment(minus, plus));
        (shape(mp), shape(mm))
    }

    /// Resolvent at the nodes of one branch, given `f` on the same and on the
    /// opposite branch (indexed by radius, junction value first).
    fn apply_branch(&self, same: &[f64], opp: &[f64], part: KernelPart, out: &mut [f64]) {
        let n = same.len();
        let ps = |j: usize| self.k[j] * self.jac[j] * same[j];
        let po = |j: usize| self.k[j] * self.jac[j] * opp[j];
        let pl = |j: usize| self.l[j] * self.jac[j] * same[j];
        // G_i = ∫_{r_i}^L e^{-λ(y - r_i)} k̃(λy) f(y) y^{d-1} dy
        let mut g_same = vec![0.0; n];
        let mut g_opp = 0.0;
        for i in (0..n - 1).rev() {
            g_same[i] = self.decay[i] * g_same[i + 1] + self.near[i] * ps(i) + self.far[i] * ps(i + 1);
            g_opp = self.decay[i] * g_opp + self.near[i] * po(i) + self.far[i] * po(i + 1);
        }
        let kk_moment = match part {
            KernelPart::Kl => 0.0,
            _ => self.b * g_same[0] + self.a * g_opp,
        };
        let w = if part == KernelPart::Kk { 0.0 } else { self.w };
        // F_i = ∫_1^{r_i} e^{-λ(r_i - y)} l̃(λy) f(y) y^{d-1} dy
        let mut f_acc = 0.0;
        for i in 0..n {
            if i > 0 {
                f_acc = self.decay[i - 1] * f_acc + self.near[i - 1] * pl(i) + self.far[i - 1] * pl(i - 1);
            }
            out[i] = self.k[i] * self.kk_decay[i] * kk_moment + w * (self.k[i] * f_acc + self.l[i] * g_same[i]);
        }
    }

    /// Applies the kernel to branch data: `plus[i]` and `minus[i]` are the
    /// values at `±r_i`, each with its own junction value (one-sided limits
    /// for functions that jump there). Returns the result in the same layout.
    pub fn apply_branches(&self, plus: &[f64], minus: &[f64], part: KernelPart) -> (Vec<f64>, Vec<f64>) {
        let n = plus.len();
        assert_eq!(n, self.k.len());
        assert_eq!(minus.len(), n);
        let mut out_p = vec![0.0; n];
        let mut out_m = vec![0.0; n];
        self.apply_branch(plus, minus, part, &mut out_p);
        self.apply_branch(minus, plus, part, &mut out_m);
        (out_p, out_m)
    }

    /// `g(x) = ∫ K(x,y) f(y) dμ(y)` at every node of `f`'s grid.
    pub fn apply(&self, f: &GridFunction, part: KernelPart) -> GridFunction {
        let g = f.grid();
        let (plus, minus) = split_branches(f.values(), g.junction());
        let (op, om) = self.apply_branches(&plus, &minus, part);
        GridFunction::from_vec_unchecked(g.clone(), join_branches(&op, &om))
    }
}

/// Splits full-grid values into `(plus, minus)` branch arrays indexed by
/// radius; both start with the junction value.
pub fn split_branches(values: &[f64], junction: usize) -> (Vec<f64>, Vec<f64>) {
    let m = junction;
    let plus = values[m..].to_vec();
    let minus = (0..=m).map(|i| values[m - i]).collect();
    (plus, minus)
}

/// Inverse of [`split_branches`]; the junction gets the mean of the two
/// branch values.
pub fn join_branches(plus: &[f64], minus: &[f64]) -> Vec<f64> {
    let m = plus.len() - 1;
    let mut out = vec![0.0; 2 * m + 1];
    for i in 1..=m {
        out[m + i] = plus[i];
        out[m - i] = minus[i];
    }
    out[m] = 0.5 * (plus[0] + minus[0]);
    out
}

/// `(Δ_d + λ²)^{-1} f` with `f(±L) = 0`.
pub fn apply_resolvent(kernel: &ResolventKernel, f: &GridFunction) -> Result<GridFunction> {
    if kernel.d() != f.grid().d() {
        return Err(Error::InvalidParameter(format!("kernel built for d={} applied on d={} grid", kernel.d(), f.grid().d())));
    }
    let table = ResolventTable::new(f.grid(), kernel.lambda())?;
    Ok(table.apply(f, KernelPart::Full))
}

/// Applies one `λ` to several functions on the same grid, sharing the table.
pub fn apply_resolvent_batch(lambda: f64, fs: &[GridFunction], part: KernelPart) -> Result<Vec<GridFunction>> {
    let Some(first) = fs.first() else {
        return Ok(Vec::new());
    };
    let grid = first.grid().clone();
    if fs.iter().any(|f| !f.grid().same_as(&grid)) {
        return Err(Error::GridMismatch);
    }
    let table = ResolventTable::new(&grid, lambda)?;
    Ok(fs.iter().map(|f| table.apply(f, part)).collect())
}

/// Concurrent get-or-build cache of resolvent tables keyed by grid and `λ`
/// (the grid id already encodes `d`).
#[derive(Debug)]
pub struct KernelCache {
    map: RwLock<HashMap<(u64, u64, Boundary), Arc<ResolventTable>>>,
    capacity: usize,
}

impl Default for KernelCache {
    fn default() -> Self {
        Self::with_capacity(2048)
    }
}

impl KernelCache {
    pub fn with_capacity(capacity: usize) -> Self {
        Self { map: RwLock::new(HashMap::new()), capacity }
    }

    pub fn get(&self, grid: &Arc<Grid>, lambda: f64) -> Result<Arc<ResolventTable>> {
        self.get_with(grid, lambda, Boundary::default())
    }

    pub fn get_with(&self, grid: &Arc<Grid>, lambda: f64, boundary: Boundary) -> Result<Arc<ResolventTable>> {
        let key = (grid.id(), lambda.to_bits(), boundary);
        if let Some(t) = self.map.read().get(&key) {
            return Ok(t.clone());
        }
        let table = Arc::new(ResolventTable::with_boundary(grid, lambda, boundary)?);
        let mut map = self.map.write();
        if map.len() >= self.capacity {
            map.clear();
        }
        Ok(map.entry(key).or_insert(table).clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dimension, Spacing};
    use approx::assert_relative_eq;

    #[test]
    fn matching_reproduces_closed_forms() {
        for d in [1.3, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0] {
            for lambda in [1e-10, 1e-4, 0.1, 1.0, 7.0, 400.0] {
                let c = solve_matching(d, lambda).unwrap();
                assert!(c.closed_form_gap < 1e-12, "d={d} λ={lambda} gap={}", c.closed_form_gap);
                assert_relative_eq!(c.v, 1.0, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matching_rejected() {
        assert!(matches!(solve_matching(3.0, 0.0), Err(Error::SingularMatching(_))));
        assert!(solve_matching(3.0, f64::NAN).is_err());
    }

    #[test]
    fn d3_closed_form() {
        // d = 3: k(r) = √(π/2) e^{-r}/r, l(r) = sinh(r)/(√(π/2) r); the full
        // same-branch kernel is e^{-λ|x-y|}/(2λxy) + kk part.
        let k = ResolventKernel::new(3.0, 1.0).unwrap();
        let (x, y) = (30.0, 32.0);
        let kl = k.eval_kl(x, y).unwrap();
        let want = ((-2.0f64).exp() - (-62.0f64).exp()) / (2.0 * x * y);
        assert_relative_eq!(kl, want, max_relative = 1e-12);
    }

    #[test]
    fn kernel_symmetries() {
        let k = ResolventKernel::new(2.5, 0.3).unwrap();
        for &(x, y) in &[(1.0, 1.0), (1.5, 7.0), (-3.0, 2.0), (-1.0, -9.0), (40.0, -1.2)] {
            let a = k.eval(x, y).unwrap();
            assert_relative_eq!(a, k.eval(y, x).unwrap(), max_relative = 1e-12);
            assert_relative_eq!(a, k.eval(-x, -y).unwrap(), max_relative = 1e-12);
            assert!(a > 0.0);
        }
        assert_eq!(k.eval_kl(3.0, -4.0).unwrap(), 0.0);
        assert!(k.eval(0.5, 2.0).is_err());
    }

    #[test]
    fn junction_continuity() {
        let k = ResolventKernel::new(1.5, 0.7).unwrap();
        for y in [1.3, 4.0, -2.5] {
            assert_relative_eq!(k.eval(1.0, y).unwrap(), k.eval(-1.0, y).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn green_is_small_lambda_limit() {
        let lambda = 1e-7;
        let k = ResolventKernel::new(3.0, lambda).unwrap();
        for &(x, y) in &[(1.0, 2.0), (5.0, 3.0), (-4.0, 2.0), (-1.5, -1.5)] {
            assert_relative_eq!(k.eval(x, y).unwrap(), green_kernel(3.0, x, y).unwrap(), max_relative = 1e-5);
        }
        let k = ResolventKernel::new(4.5, 1e-5).unwrap();
        assert_relative_eq!(k.eval(2.0, 6.0).unwrap(), green_kernel(4.5, 2.0, 6.0).unwrap(), max_relative = 1e-5);
    }

    #[test]
    fn apply_matches_direct_sum_on_smooth_data() {
        let g = crate::grid::Grid::new(Dimension::new(2.5).unwrap(), 20.0, 3000, Spacing::Uniform).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| (-(x - 5.0).powi(2)).exp());
        let lambda = 0.8;
        let table = ResolventTable::with_boundary(&g, lambda, Boundary::Open).unwrap();
        let out = table.apply(&f, KernelPart::Full);
        let k = table.kernel().unwrap();
        for &j in &[0usize, 500, 2999, 3500, 5000] {
            let x = g.coord(j);
            let direct: f64 = (0..g.len())
                .map(|i| g.weights()[i] * k.eval(x, g.coord(i)).unwrap() * f.values()[i])
                .sum();
            assert_relative_eq!(out.values()[j], direct, max_relative = 1e-4);
        }
        let kk = table.apply(&f, KernelPart::Kk);
        let kl = table.apply(&f, KernelPart::Kl);
        let sum = kk.axpy(1.0, &kl).unwrap();
        for (a, b) in sum.values().iter().zip(out.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-13, epsilon = 1e-300);
        }
    }

    #[test]
    fn kk_gradient_matches_difference_quotient() {
        let g = crate::grid::Grid::new(Dimension::new(2.5).unwrap(), 30.0, 4000, Spacing::Uniform).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| crate::family::bump((x - 4.0) / 2.0) - crate::family::bump((x + 6.0) / 1.5));
        let (plus, minus) = split_branches(f.values(), g.junction());
        for lambda in [0.05, 0.7] {
            for boundary in [Boundary::Open, Boundary::Dirichlet] {
                let t = ResolventTable::with_boundary(&g, lambda, boundary).unwrap();
                let (vp, vm) = t.kk_branches(&plus, &minus, false);
                let (dp, dm) = t.kk_branches(&plus, &minus, true);
                let full = t.apply_branches(&plus, &minus, KernelPart::Kk);
                assert_eq!(vp, full.0);
                let r = g.radii();
                for i in [10usize, 500, 1500] {
                    for (v, dv) in [(&vp, &dp), (&vm, &dm)] {
                        let fd = (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]);
                        assert_relative_eq!(fd, dv[i], max_relative = 1e-4, epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn cache_reuses_tables() {
        let g = crate::grid::Grid::new(Dimension::new(3.0).unwrap(), 10.0, 100, Spacing::default()).unwrap();
        let cache = KernelCache::with_capacity(4);
        let a = cache.get(&g, 0.5).unwrap();
        let b = cache.get(&g, 0.5).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        for l in [1.0, 2.0, 3.0, 4.0] {
            cache.get(&g, l).unwrap();
        }
        assert!(cache.len() <= 4);
    }
}
