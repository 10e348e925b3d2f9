//! Functional calculus of `Δ_d` by `λ`-quadrature of resolvents:
//!
//! ```text
//! Δ^{1/2} f  = (2/π) ∫_0^∞ (Δ+λ²)^{-1} Δf dλ
//! Δ^{-1/2} g = (2/π) ∫_0^∞ (Δ+λ²)^{-1} g  dλ
//! ```
//!
//! `(0, ∞)` is cut into dyadic blocks on `[λ_min, λ_max]`, each integrated
//! with Gauss-Legendre and bisected until the block agrees with its two
//! halves. Both ends are closed analytically.

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_laplacian, Grid, GridFunction};
use crate::kernel::{join_branches, split_branches, Boundary, KernelCache, KernelPart, ResolventTable};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureScheme {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub gauss_points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bisections allowed below a dyadic block.
    pub max_depth: usize,
    /// `λ_min` is lowered to `lambda_min_scale / L` on large grids so that the
    /// low-energy region of wide functions is resolved.
    pub lambda_min_scale: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            lambda_min: 1e-6,
            lambda_max: 1e3,
            gauss_points: 16,
            rel_tol: 1e-6,
            abs_tol: 1e-15,
            max_depth: 10,
            lambda_min_scale: 1e-3,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.lambda_min > 0.0 && self.lambda_min.is_finite()) {
            return bad(format!("lambda_min must be positive, got {}", self.lambda_min));
        }
        if !(self.lambda_max > self.lambda_min && self.lambda_max.is_finite()) {
            return bad(format!("lambda_max must exceed lambda_min, got {}", self.lambda_max));
        }
        if self.gauss_points < 2 || self.gauss_points > 64 {
            return bad(format!("gauss_points must lie in 2..=64, got {}", self.gauss_points));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol >= 0.0) {
            return bad("tolerances must be positive".into());
        }
        if !(self.lambda_min_scale > 0.0) {
            return bad("lambda_min_scale must be positive".into());
        }
        Ok(())
    }

    /// The `λ_min` actually used on `grid`.
    pub fn effective_lambda_min(&self, grid: &Grid) -> f64 {
        self.lambda_min.min(self.lambda_min_scale / grid.length())
    }

    /// Dyadic blocks with edges at powers of two, clipped to `[lo, hi]`.
    pub fn blocks_between(lo: f64, hi: f64) -> Vec<Block> {
        let mut edges = vec![lo];
        let mut e = 2f64.powi(lo.log2().floor() as i32 + 1);
        while e < hi {
            if e > lo * (1.0 + 1e-12) {
                edges.push(e);
            }
            e *= 2.0;
        }
        edges.push(hi);
        edges.windows(2).map(|w| Block { lo: w[0], hi: w[1] }).collect()
    }

    pub fn blocks(&self) -> Vec<Block> {
        Self::blocks_between(self.lambda_min, self.lambda_max)
    }
}

/// Splits blocks at `λ0` into the low (`λ ≤ λ0`) and high (`λ ≥ λ0`) parts.
pub fn high_low_split(blocks: &[Block], lambda0: f64) -> (Vec<Block>, Vec<Block>) {
    let mut low = Vec::new();
    let mut high = Vec::new();
    for &b in blocks {
        if b.hi <= lambda0 {
            low.push(b);
        } else if b.lo >= lambda0 {
            high.push(b);
        } else {
            low.push(Block { lo: b.lo, hi: lambda0 });
            high.push(Block { lo: lambda0, hi: b.hi });
        }
    }
    (low, high)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Ordered map; results come back in input order whatever the worker
    /// count, so every reduction downstream is deterministic.
    pub fn map<T, F>(self, items: &[f64], f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(f64) -> Result<T> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(|&x| f(x)).collect();
        }
        items.iter().map(|&x| f(x)).collect()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct QuadratureStats {
    pub evaluations: usize,
    pub blocks: usize,
    pub max_block_error: f64,
}

/// Adaptive vector-valued integration of `eval` over `blocks`.
///
/// `norm` measures vectors; a block is accepted when its Gauss value and the
/// sum over its halves differ by at most
/// `max(rel_tol · ‖total‖ / √blocks, abs_tol)`.
pub fn integrate_blocks<F, N>(
    scheme: &QuadratureScheme,
    blocks: &[Block],
    exec: Execution,
    norm: N,
    eval: F,
) -> Result<(Vec<f64>, QuadratureStats)>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync + Send,
    N: Fn(&[f64]) -> f64,
{
    let (gx, gw) = gauss_legendre(scheme.gauss_points);
    let mut stats = QuadratureStats { blocks: blocks.len(), ..Default::default() };
    let rule = |b: Block, stats: &mut QuadratureStats| -> Result<Vec<f64>> {
        let half = 0.5 * (b.hi - b.lo);
        let mid = 0.5 * (b.hi + b.lo);
        let nodes: Vec<f64> = gx.iter().map(|t| mid + half * t).collect();
        let vals = exec.map(&nodes, &eval)?;
        stats.evaluations += nodes.len();
        let mut acc = vec![0.0; vals[0].len()];
        for (v, w) in vals.iter().zip(&gw) {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += half * w * x;
            }
        }
        Ok(acc)
    };
    let coarse: Vec<Vec<f64>> = blocks.iter().map(|&b| rule(b, &mut stats)).collect::<Result<_>>()?;
    let Some(first) = coarse.first() else {
        return Ok((Vec::new(), stats));
    };
    let mut total = vec![0.0; first.len()];
    for c in &coarse {
        add(&mut total, c);
    }
    let tol = (scheme.rel_tol * norm(&total) / (blocks.len() as f64).sqrt()).max(scheme.abs_tol);
    let mut result = vec![0.0; total.len()];
    for (&b, c) in blocks.iter().zip(coarse) {
        // depth-first bisection, left before right for a fixed summation order
        let mut stack = vec![(b, c, 0usize)];
        while let Some((blk, val, depth)) = stack.pop() {
            let m = 0.5 * (blk.lo + blk.hi);
            let left = Block { lo: blk.lo, hi: m };
            let right = Block { lo: m, hi: blk.hi };
            let lv = rule(left, &mut stats)?;
            let rv = rule(right, &mut stats)?;
            let mut fine = lv.clone();
            add(&mut fine, &rv);
            let diff: Vec<f64> = fine.iter().zip(&val).map(|(a, b)| a - b).collect();
            let err = norm(&diff);
            if err <= tol {
                stats.max_block_error = stats.max_block_error.max(err);
                add(&mut result, &fine);
            } else if depth >= scheme.max_depth {
                return Err(Error::Quadrature(format!(
                    "block [{:.3e}, {:.3e}] error {err:.3e} above tolerance {tol:.3e} at depth {depth}",
                    blk.lo, blk.hi
                )));
            } else {
                stack.push((right, rv, depth + 1));
                stack.push((left, lv, depth + 1));
            }
        }
    }
    Ok((result, stats))
}

fn add(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// `∫_0^∞ θ/(θ+λ²) dλ` through the same block rule, with the closed-form
/// per-eigenvalue remainders outside `[λ_min, λ_max]`; the exact value is
/// `(π/2)√θ`.
pub fn scalar_sqrt_identity(theta: f64, scheme: &QuadratureScheme) -> Result<f64> {
    let (lo, hi) = (scheme.lambda_min, scheme.lambda_max);
    let blocks = QuadratureScheme::blocks_between(lo, hi);
    let (v, _) = integrate_blocks(scheme, &blocks, Execution::Sequential, |v| v[0].abs(), |l| {
        Ok(vec![theta / (theta + l * l)])
    })?;
    let s = theta.sqrt();
    let head = s * (lo / s).atan();
    let tail = s * (std::f64::consts::FRAC_PI_2 - (hi / s).atan());
    Ok(v[0] + head + tail)
}

/// Branch layout of several grid functions stacked into one vector:
/// `[f1 plus, f1 minus, f2 plus, ...]`, each of length `m+1`.
struct Stack {
    m1: usize,
    count: usize,
}

impl Stack {
    fn pack(grid: &Grid, fs: &[Vec<f64>]) -> Vec<f64> {
        let mut out = Vec::with_capacity(fs.len() * 2 * grid.nodes_per_branch());
        for f in fs {
            let (p, m) = split_branches(f, grid.junction());
            out.extend(p);
            out.extend(m);
        }
        out
    }

    fn parts<'a>(&self, v: &'a [f64], i: usize) -> (&'a [f64], &'a [f64]) {
        let s = 2 * self.m1 * i;
        (&v[s..s + self.m1], &v[s + self.m1..s + 2 * self.m1])
    }
}

/// Weighted norm of a stacked vector (max over members).
fn stacked_norm(grid: &Grid, stack: &Stack, v: &[f64]) -> f64 {
    let r = grid.radii();
    let cm = grid.cell_mass();
    let mut worst: f64 = 0.0;
    for i in 0..stack.count {
        let (p, m) = stack.parts(v, i);
        let mut s = 0.0;
        for j in 0..r.len() {
            let w = 0.5 * (if j > 0 { cm[j - 1] } else { 0.0 } + if j + 1 < r.len() { cm[j] } else { 0.0 });
            s += w * (p[j] * p[j] + m[j] * m[j]);
        }
        worst = worst.max(s.sqrt());
    }
    worst
}

/// Replaces the junction entry of each branch by the quadratic extrapolation
/// from that branch, giving one-sided limits of functions that jump there.
fn one_sided_junction(grid: &Grid, branch: &mut [f64]) {
    let r = grid.radii();
    let (x0, x1, x2, x3) = (r[0], r[1], r[2], r[3]);
    let l1 = (x0 - x2) * (x0 - x3) / ((x1 - x2) * (x1 - x3));
    let l2 = (x0 - x1) * (x0 - x3) / ((x2 - x1) * (x2 - x3));
    let l3 = (x0 - x1) * (x0 - x2) / ((x3 - x1) * (x3 - x2));
    branch[0] = l1 * branch[1] + l2 * branch[2] + l3 * branch[3];
}

/// Options shared by the quadrature-based operators.
#[derive(Debug, Clone, Copy)]
pub struct CalculusContext<'a> {
    pub scheme: &'a QuadratureScheme,
    pub exec: Execution,
    pub cache: Option<&'a KernelCache>,
    pub part: KernelPart,
    pub boundary: Boundary,
}

impl<'a> CalculusContext<'a> {
    pub fn new(scheme: &'a QuadratureScheme) -> Self {
        Self { scheme, exec: Execution::default(), cache: None, part: KernelPart::Full, boundary: Boundary::default() }
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_cache(mut self, cache: &'a KernelCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_part(mut self, part: KernelPart) -> Self {
        self.part = part;
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    fn table(&self, grid: &std::sync::Arc<Grid>, lambda: f64) -> Result<std::sync::Arc<ResolventTable>> {
        match self.cache {
            Some(c) => c.get_with(grid, lambda, self.boundary),
            None => Ok(std::sync::Arc::new(ResolventTable::with_boundary(grid, lambda, self.boundary)?)),
        }
    }
}

fn check_batch(fs: &[GridFunction]) -> Result<std::sync::Arc<Grid>> {
    let grid = fs
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty batch".into()))?
        .grid()
        .clone();
    if fs.iter().any(|f| !f.grid().same_as(&grid)) {
        return Err(Error::GridMismatch);
    }
    Ok(grid)
}

/// `(2/π) ∫_{blocks} (Δ+λ²)^{-1} src dλ` on stacked branch data.
fn resolvent_integral(
    ctx: &CalculusContext<'_>,
    grid: &std::sync::Arc<Grid>,
    packed: &[f64],
    count: usize,
    blocks: &[Block],
) -> Result<(Vec<f64>, QuadratureStats)> {
    let stack = Stack { m1: grid.nodes_per_branch(), count };
    let eval = |lambda: f64| -> Result<Vec<f64>> {
        let table = ctx.table(grid, lambda)?;
        Ok(apply_stacked(&table, &stack, packed, ctx.part))
    };
    let (mut v, stats) = integrate_blocks(ctx.scheme, blocks, ctx.exec, |x| stacked_norm(grid, &stack, x), eval)?;
    for x in &mut v {
        *x *= FRAC_2_PI;
    }
    Ok((v, stats))
}

fn apply_stacked(table: &ResolventTable, stack: &Stack, packed: &[f64], part: KernelPart) -> Vec<f64> {
    let mut out = Vec::with_capacity(packed.len());
    for i in 0..stack.count {
        let (p, m) = stack.parts(packed, i);
        let (op, om) = table.apply_branches(p, m, part);
        out.extend(op);
        out.extend(om);
    }
    out
}

fn unpack(grid: &std::sync::Arc<Grid>, v: &[f64], count: usize) -> Vec<Vec<f64>> {
    let stack = Stack { m1: grid.nodes_per_branch(), count };
    (0..count)
        .map(|i| {
            let (p, m) = stack.parts(v, i);
            join_branches(p, m)
        })
        .collect()
}

/// Result of a quadrature-based operator together with its diagnostics.
#[derive(Debug, Clone)]
pub struct CalculusOutput {
    pub values: Vec<GridFunction>,
    pub stats: QuadratureStats,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// `Δ^{1/2} f` for a batch of functions on one grid.
///
/// The integrand is `(Δ+λ²)^{-1} Δf`, which equals `f - λ²(Δ+λ²)^{-1} f`
/// without the cancellation at large `λ`. `Δf` is taken branch by branch
/// since it generally jumps at the junction. Tails: `λ_min f` below and
/// `Δf/Λ - Δ²f/(3Λ³)` above.
pub fn sqrt_laplacian_batch(fs: &[GridFunction], ctx: &CalculusContext<'_>) -> Result<CalculusOutput> {
    ctx.scheme.validate()?;
    let grid = check_batch(fs)?;
    let lo = ctx.scheme.effective_lambda_min(&grid);
    let hi = ctx.scheme.lambda_max;
    let lap: Vec<GridFunction> = fs.iter().map(apply_laplacian).collect();
    let mut packed = Stack::pack(&grid, &lap.iter().map(|g| g.values().to_vec()).collect::<Vec<_>>());
    let stack = Stack { m1: grid.nodes_per_branch(), count: fs.len() };
    for i in 0..fs.len() {
        let s = 2 * stack.m1 * i;
        one_sided_junction(&grid, &mut packed[s..s + stack.m1]);
        one_sided_junction(&grid, &mut packed[s + stack.m1..s + 2 * stack.m1]);
    }
    let blocks = QuadratureScheme::blocks_between(lo, hi);
    let (v, stats) = resolvent_integral(ctx, &grid, &packed, fs.len(), &blocks)?;
    let values = unpack(&grid, &v, fs.len())
        .into_iter()
        .zip(fs.iter().zip(&lap))
        .map(|(mut out, (f, q))| {
            let q2 = apply_laplacian(q);
            for j in 0..out.len() {
                let tail = q.values()[j] / hi - q2.values()[j] / (3.0 * hi.powi(3));
                out[j] += FRAC_2_PI * (lo * f.values()[j] + tail);
            }
            GridFunction::new(grid.clone(), out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CalculusOutput { values, stats, lambda_min: lo, lambda_max: hi })
}

pub fn sqrt_laplacian(f: &GridFunction, scheme: &QuadratureScheme) -> Result<GridFunction> {
    let out = sqrt_laplacian_batch(std::slice::from_ref(f), &CalculusContext::new(scheme))?;
    Ok(out.values.into_iter().next().expect("one output per input"))
}

/// Fitted `∫_0^{λ_m} (Δ+λ²)^{-1} g dλ` from two resolvent samples, using the
/// small-`λ` model `C φ(λ) + D` with `φ = λ^{d-2}` (`d ≠ 2`) or `log(1/λ)`.
fn low_energy_remainder(grid: &Grid, lm: f64, r1: &[f64], r2: &[f64]) -> Vec<f64> {
    // r1 at λ_m, r2 at λ_m/2
    let d = grid.d();
    let (phi, big_phi): (Box<dyn Fn(f64) -> f64>, f64) = if (d - 2.0).abs() < 1e-12 {
        (Box::new(|l: f64| -l.ln()), lm * (1.0 - lm.ln()))
    } else {
        (Box::new(move |l: f64| l.powf(d - 2.0)), lm.powf(d - 1.0) / (d - 1.0))
    };
    let (p1, p2) = (phi(lm), phi(0.5 * lm));
    r1.iter()
        .zip(r2)
        .map(|(&a, &b)| {
            let c = (a - b) / (p1 - p2);
            let dd = a - c * p1;
            c * big_phi + dd * lm
        })
        .collect()
}

/// `Δ^{-1/2} g` for a batch.
pub fn inv_sqrt_laplacian_batch(gs: &[GridFunction], ctx: &CalculusContext<'_>) -> Result<CalculusOutput> {
    ctx.scheme.validate()?;
    let grid = check_batch(gs)?;
    let lo = ctx.scheme.effective_lambda_min(&grid);
    let hi = ctx.scheme.lambda_max;
    let packed = Stack::pack(&grid, &gs.iter().map(|g| g.values().to_vec()).collect::<Vec<_>>());
    let blocks = QuadratureScheme::blocks_between(lo, hi);
    let (mut v, stats) = resolvent_integral(ctx, &grid, &packed, gs.len(), &blocks)?;
    let stack = Stack { m1: grid.nodes_per_branch(), count: gs.len() };
    let t1 = ctx.table(&grid, lo)?;
    let t2 = ctx.table(&grid, 0.5 * lo)?;
    let rem = low_energy_remainder(
        &grid,
        lo,
        &apply_stacked(&t1, &stack, &packed, ctx.part),
        &apply_stacked(&t2, &stack, &packed, ctx.part),
    );
    for (x, r) in v.iter_mut().zip(rem) {
        *x += FRAC_2_PI * r;
    }
    let values = unpack(&grid, &v, gs.len())
        .into_iter()
        .zip(gs)
        .map(|(mut out, g)| {
            if ctx.part != KernelPart::Kk {
                let lg = apply_laplacian(g);
                for j in 0..out.len() {
                    out[j] += FRAC_2_PI * (g.values()[j] / hi - lg.values()[j] / (3.0 * hi.powi(3)));
                }
            }
            GridFunction::new(grid.clone(), out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CalculusOutput { values, stats, lambda_min: lo, lambda_max: hi })
}

pub fn inv_sqrt_laplacian(g: &GridFunction, scheme: &QuadratureScheme) -> Result<GridFunction> {
    let out = inv_sqrt_laplacian_batch(std::slice::from_ref(g), &CalculusContext::new(scheme))?;
    Ok(out.values.into_iter().next().expect("one output per input"))
}

/// `∇Δ^{-1/2} g`.
pub fn riesz_transform(g: &GridFunction, scheme: &QuadratureScheme) -> Result<GridFunction> {
    Ok(inv_sqrt_laplacian(g, scheme)?.derivative())
}

pub fn riesz_transform_batch(gs: &[GridFunction], ctx: &CalculusContext<'_>) -> Result<Vec<GridFunction>> {
    Ok(inv_sqrt_laplacian_batch(gs, ctx)?.values.iter().map(GridFunction::derivative).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        let m30: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert_relative_eq!(m30, 2.0 / 31.0, max_relative = 1e-12);
        let (x3, _) = gauss_legendre(3);
        assert_relative_eq!(x3[2], (0.6f64).sqrt(), max_relative = 1e-14);
        assert_eq!(x3[1], 0.0);
    }

    #[test]
    fn dyadic_blocks_cover_range() {
        let b = QuadratureScheme::blocks_between(1e-3, 10.0);
        assert_eq!(b[0].lo, 1e-3);
        assert_eq!(b.last().unwrap().hi, 10.0);
        assert!(b.windows(2).all(|w| w[0].hi == w[1].lo));
        assert!(b.iter().any(|x| x.lo == 1.0));
    }

    #[test]
    fn split_partitions() {
        let blocks = QuadratureScheme::blocks_between(1e-3, 10.0);
        let (low, high) = high_low_split(&blocks, 1.0);
        assert!(low.iter().all(|b| b.hi <= 1.0) && high.iter().all(|b| b.lo >= 1.0));
        assert_eq!(low.len() + high.len(), blocks.len());
        let (low, high) = high_low_split(&blocks, 3.0);
        assert_eq!(low.last().unwrap().hi, 3.0);
        assert_eq!(high[0].lo, 3.0);
        assert_eq!(low.len() + high.len(), blocks.len() + 1);
        let total: f64 = low.iter().chain(&high).map(|b| b.hi - b.lo).sum();
        assert_relative_eq!(total, 10.0 - 1e-3, max_relative = 1e-14);
    }

    #[test]
    fn scalar_identity() {
        let s = QuadratureScheme::default();
        for theta in [1e-10, 1e-4, 0.3, 1.0, 50.0, 4e4, 1e8] {
            let v = scalar_sqrt_identity(theta, &s).unwrap();
            assert_relative_eq!(v, std::f64::consts::FRAC_PI_2 * theta.sqrt(), max_relative = 1e-6);
        }
    }

    #[test]
    fn rejects_bad_scheme() {
        let s = QuadratureScheme { lambda_max: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
    }
}
