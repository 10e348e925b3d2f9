//! Harmonic annihilation and the estimates built on the kk part of the
//! resolvent: the corrector `u(x,λ)`, gradient bounds for it, the low-energy
//! bilinear form, the operator `𝒯`, and Hardy ratios.
//!
//! With `k_λ(x) = k(λ|x|)` and `u = lim_{ε→0} (Δ+ε²)^{-1} k_λ`, the function
//! `Φ_λ = k_λ + λ² u` satisfies `ΔΦ_λ = 0` away from the junction, so
//! `⟨f', Φ_λ'⟩_μ = 0` whenever `f` vanishes there.

use std::f64::consts::FRAC_2_PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bessel::RadialSolutions;
use crate::calculus::{integrate_blocks, CalculusContext, QuadratureScheme, QuadratureStats};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::kernel::{join_branches, split_branches, Boundary, KernelPart, ResolventTable};

/// Knobs of the corrector limit and of the probe statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnihilationSettings {
    /// First `ε` of the geometric sequence `ε_0 · ratio^j`.
    pub eps_start: f64,
    pub eps_ratio: f64,
    pub eps_count: usize,
    /// Richardson columns; each removes the next even power of `ε`.
    pub richardson_levels: usize,
    /// Largest accepted relative sup-norm change between the last two
    /// extrapolants.
    pub cauchy_tol: f64,
    /// Added to the denominator of the normalized defect.
    pub floor: f64,
    pub defect_tol: f64,
    /// Required inflation of the defect when `f` leaves `S_0`.
    pub sensitivity_factor: f64,
    /// Amplitude of the junction perturbation, relative to `sup|f|`.
    pub perturbation: f64,
    /// Quantile used to fit constants in the bound probes.
    pub percentile: f64,
    /// Largest accepted relative change of a fitted constant under refinement.
    pub refine_tol: f64,
}

impl Default for AnnihilationSettings {
    fn default() -> Self {
        Self {
            eps_start: 0.1,
            eps_ratio: 0.5,
            eps_count: 8,
            richardson_levels: 2,
            cauchy_tol: 1e-6,
            floor: 1e-14,
            defect_tol: 1e-5,
            sensitivity_factor: 100.0,
            perturbation: 0.1,
            percentile: 0.95,
            refine_tol: 0.05,
        }
    }
}

impl AnnihilationSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.eps_start > 0.0 && self.eps_start.is_finite()) {
            return bad("eps_start must be positive");
        }
        if !(self.eps_ratio > 0.0 && self.eps_ratio < 1.0) {
            return bad("eps_ratio must lie in (0, 1)");
        }
        if self.eps_count < 2 || self.richardson_levels + 1 >= self.eps_count {
            return bad("need eps_count >= 2 and richardson_levels < eps_count - 1");
        }
        if !(self.percentile > 0.0 && self.percentile <= 1.0) {
            return bad("percentile must lie in (0, 1]");
        }
        if !(self.cauchy_tol > 0.0 && self.floor >= 0.0 && self.defect_tol > 0.0 && self.refine_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.sensitivity_factor >= 1.0 && self.perturbation > 0.0) {
            return bad("sensitivity_factor must be >= 1 and perturbation positive");
        }
        Ok(())
    }

    pub fn epsilons(&self) -> Vec<f64> {
        (0..self.eps_count).map(|j| self.eps_start * self.eps_ratio.powi(j as i32)).collect()
    }
}

/// `k(λ|x|)` on the grid.
pub fn k_lambda(grid: &Arc<Grid>, lambda: f64) -> Result<GridFunction> {
    let rad = RadialSolutions::new(grid.d())?;
    let mut v = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let t = lambda * grid.radius(j);
        v.push(rad.eval_scaled(t)?.k * (-t).exp());
    }
    GridFunction::new(grid.clone(), v)
}

/// Exact `∂_r u(r,λ) = (r^{1-d} k'(λ) - k'(λr))/λ` of the even corrector,
/// from integrating `(r^{d-1} u')' = -r^{d-1} k(λr)` with `u'(1) = 0`.
pub fn corrector_gradient_exact(d: f64, lambda: f64, r: f64) -> Result<f64> {
    let rad = RadialSolutions::new(d)?;
    let k1 = rad.eval_scaled(lambda)?.dk * (-lambda).exp();
    let kr = rad.eval_scaled(lambda * r)?.dk * (-lambda * r).exp();
    Ok((r.powf(1.0 - d) * k1 - kr) / lambda)
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrectorField {
    pub d: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub u: GridFunction,
    #[serde(skip)]
    pub grad: GridFunction,
    pub epsilons: Vec<f64>,
    /// Relative sup-norm change between the last two extrapolants.
    pub cauchy_gap: f64,
    /// `‖(Δ+ε²)u_ε - k_λ‖₂ / ‖k_λ‖₂` at the smallest `ε`.
    pub residual: f64,
    /// Relative sup-norm gap of `∂u` against the closed form.
    pub gradient_gap: f64,
    /// Set for `d ≤ 2`, where the open-line limit does not exist.
    pub limit_unstable: bool,
    pub warnings: Vec<String>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `u(·,λ)` as the Richardson limit of `(Δ+ε²)^{-1} k_λ` over a geometric
/// `ε` sequence.
///
/// The resolvents use the Dirichlet tables, so for `ε L ≪ 1` the sequence is
/// analytic in `ε²` and each Richardson column removes one even power. The
/// limit differs from the open-line corrector by a constant, which leaves
/// `∂u` and `Φ_λ`'s gradient unchanged.
pub fn build_corrector(grid: &Arc<Grid>, lambda: f64, settings: &AnnihilationSettings, ctx: &CalculusContext<'_>) -> Result<CorrectorField> {
    settings.validate()?;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("corrector needs λ in (0, 1], got {lambda}")));
    }
    let d = grid.d();
    let k = k_lambda(grid, lambda)?;
    let eps = settings.epsilons();
    let seq: Vec<Vec<f64>> = ctx.exec.map(&eps, |e| {
        let t = ResolventTable::with_boundary(grid, e, Boundary::Dirichlet)?;
        Ok(t.apply(&k, KernelPart::Full).into_values())
    })?;

    // Richardson tableau on the last rows; t[j] holds column `c` for row j
    let q = 1.0 / settings.eps_ratio;
    let mut col = seq.clone();
    for c in 1..=settings.richardson_levels {
        let f = q.powi(2 * c as i32);
        col = (1..col.len())
            .map(|j| col[j].iter().zip(&col[j - 1]).map(|(a, b)| a + (a - b) / (f - 1.0)).collect())
            .collect();
    }
    let last = &col[col.len() - 1];
    let prev = &col[col.len() - 2];
    let diff: Vec<f64> = last.iter().zip(prev).map(|(a, b)| a - b).collect();
    let cauchy_gap = sup(&diff) / sup(last).max(f64::MIN_POSITIVE);

    let limit_unstable = d <= 2.0;
    let mut warnings = Vec::new();
    if limit_unstable {
        warnings.push(format!("limit-unstable: d = {d} <= 2, the open-line corrector diverges as ε → 0"));
    }
    if !(cauchy_gap <= settings.cauchy_tol) {
        let msg = format!("ε-extrapolation not Cauchy at d={d}, λ={lambda}: gap {cauchy_gap:.3e}");
        if limit_unstable {
            warnings.push(msg);
        } else {
            return Err(Error::Extrapolation(msg));
        }
    }

    let e_min = eps[eps.len() - 1];
    let u_min = GridFunction::new(grid.clone(), seq[seq.len() - 1].clone())?;
    let mut res = u_min.laplacian().axpy(e_min * e_min, &u_min)?.axpy(-1.0, &k)?.into_values();
    // the end rows carry the boundary condition, not the equation
    let last_node = res.len() - 1;
    res[0] = 0.0;
    res[last_node] = 0.0;
    let res = GridFunction::new(grid.clone(), res)?;
    let residual = res.l2_norm() / k.l2_norm().max(f64::MIN_POSITIVE);

    let u = GridFunction::new(grid.clone(), last.clone())?;
    let grad = u.derivative();
    let mut gap: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in grid.junction()..grid.len() - 1 {
        let exact = corrector_gradient_exact(d, lambda, grid.radius(j))?;
        gap = gap.max((grad.values()[j] - exact).abs());
        scale = scale.max(exact.abs());
    }
    Ok(CorrectorField {
        d,
        lambda,
        u,
        grad,
        epsilons: eps,
        cauchy_gap,
        residual,
        gradient_gap: gap / scale.max(f64::MIN_POSITIVE),
        limit_unstable,
        warnings,
    })
}

/// `Φ_λ = k_λ + λ² u(·,λ)`.
#[derive(Debug, Clone)]
pub struct HarmonicPart {
    pub lambda: f64,
    pub phi: GridFunction,
    pub grad: GridFunction,
}

impl HarmonicPart {
    pub fn new(c: &CorrectorField) -> Result<Self> {
        let k = k_lambda(c.u.grid(), c.lambda)?;
        let phi = k.axpy(c.lambda * c.lambda, &c.u)?;
        let grad = phi.derivative();
        Ok(Self { lambda: c.lambda, phi, grad })
    }
}

/// `|⟨f', Φ'⟩_μ| / (‖f'‖₂ ‖Φ'‖₂ + floor)`, all three computed with the grid
/// Dirichlet form.
pub fn annihilation_check(f: &GridFunction, phi: &HarmonicPart, floor: f64) -> Result<f64> {
    let num = f.energy(&phi.phi)?.abs();
    let den = f.energy(f)?.sqrt() * phi.phi.energy(&phi.phi)?.sqrt();
    Ok(num / (den + floor))
}

/// `f` plus an even bump of half-width `w` centred on the junction, scaled to
/// `amplitude · sup|f|`. The result no longer vanishes at the junction.
pub fn junction_perturbation(f: &GridFunction, amplitude: f64, w: f64) -> Result<GridFunction> {
    let a = amplitude * sup(f.values()) / crate::family::bump(0.0);
    let p = GridFunction::from_fn(f.grid().clone(), |x| a * crate::family::bump((x.abs() - 1.0) / w));
    f.axpy(1.0, &p)
}

/// Which branch of the corrector gradient bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// `λ^{1-d-δ} x^{2-d-δ}`.
    LambdaPower,
    /// `λ^{-2} x^{2-d-δ}`.
    InverseSquare,
}

impl BoundBranch {
    pub fn governing(d: f64, delta: f64) -> Self {
        if d < 3.0 && delta <= 3.0 - d {
            BoundBranch::InverseSquare
        } else {
            BoundBranch::LambdaPower
        }
    }

    pub fn eval(self, d: f64, delta: f64, lambda: f64, x: f64) -> f64 {
        let xp = x.powf(2.0 - d - delta);
        match self {
            BoundBranch::LambdaPower => lambda.powf(1.0 - d - delta) * xp,
            BoundBranch::InverseSquare => xp / (lambda * lambda),
        }
    }
}

/// The `q`-quantile of `values` (nearest rank), NaNs sorted last.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    v[idx]
}

/// Linear interpolation of branch data at radius `x`.
fn interp(r: &[f64], v: &[f64], x: f64) -> f64 {
    let i = r.partition_point(|&t| t <= x).clamp(1, r.len() - 1);
    let t = (x - r[i - 1]) / (r[i] - r[i - 1]);
    v[i - 1] + t * (v[i] - v[i - 1])
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientBound {
    pub delta: f64,
    pub branch: BoundBranch,
    pub governing: bool,
    /// Fitted constant on the coarse and the refined grid.
    pub coarse: f64,
    pub fine: f64,
    pub rel_change: f64,
    pub finite: bool,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientBoundReport {
    pub d: f64,
    pub lambdas: Vec<f64>,
    pub x_samples: usize,
    pub x_max: f64,
    pub bounds: Vec<GradientBound>,
}

impl GradientBoundReport {
    pub fn all_governing_hold(&self) -> bool {
        self.bounds.iter().filter(|b| b.governing).all(|b| b.finite && b.stable)
    }
}

/// Fits `sup |∂u(x,λ)| / bound(x,λ)` over `λ ∈ lambdas` and `x_samples`
/// log-spaced radii in `[1, x_max]`, as a quantile, on `coarse` and on
/// `fine` (same `d`). For `2 < d < 3` both bound branches are reported.
pub fn gradient_bound_probe(
    coarse: &Arc<Grid>,
    fine: &Arc<Grid>,
    deltas: &[f64],
    lambdas: &[f64],
    x_samples: usize,
    x_max: f64,
    settings: &AnnihilationSettings,
    ctx: &CalculusContext<'_>,
) -> Result<GradientBoundReport> {
    let d = coarse.d();
    if !(d > 2.0) {
        return Err(Error::InvalidParameter(format!("gradient bounds need d > 2, got {d}")));
    }
    if fine.d() != d {
        return Err(Error::GridMismatch);
    }
    if x_samples < 2 || !(x_max > 1.0 && x_max < coarse.length().min(fine.length())) {
        return Err(Error::InvalidParameter("need at least 2 samples and 1 < x_max < L".into()));
    }
    for &delta in deltas {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("δ must lie in [0, 1], got {delta}")));
        }
    }
    let xs: Vec<f64> = (0..x_samples)
        .map(|i| x_max.powf(i as f64 / (x_samples - 1) as f64).clamp(1.0, x_max))
        .collect();
    // |∂u| at every (λ, x) sample on one grid
    let sample = |g: &Arc<Grid>| -> Result<Vec<Vec<f64>>> {
        lambdas
            .iter()
            .map(|&lambda| {
                let c = build_corrector(g, lambda, settings, ctx)?;
                let (plus, _) = split_branches(c.grad.values(), g.junction());
                Ok(xs.iter().map(|&x| interp(g.radii(), &plus, x).abs()).collect())
            })
            .collect()
    };
    let gc = sample(coarse)?;
    let gf = sample(fine)?;
    let branches: &[BoundBranch] = if d < 3.0 {
        &[BoundBranch::InverseSquare, BoundBranch::LambdaPower]
    } else {
        &[BoundBranch::LambdaPower]
    };
    let mut bounds = Vec::new();
    for &delta in deltas {
        for &branch in branches {
            let fit = |grad: &[Vec<f64>]| {
                let mut ratios = Vec::with_capacity(lambdas.len() * xs.len());
                for (li, &lambda) in lambdas.iter().enumerate() {
                    for (xi, &x) in xs.iter().enumerate() {
                        ratios.push(grad[li][xi] / branch.eval(d, delta, lambda, x));
                    }
                }
                quantile(&ratios, settings.percentile)
            };
            let (a, b) = (fit(&gc), fit(&gf));
            let rel_change = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            bounds.push(GradientBound {
                delta,
                branch,
                governing: branch == BoundBranch::governing(d, delta),
                coarse: a,
                fine: b,
                rel_change,
                finite: a.is_finite() && b.is_finite(),
                stable: rel_change <= settings.refine_tol,
            });
        }
    }
    Ok(GradientBoundReport { d, lambdas: lambdas.to_vec(), x_samples, x_max, bounds })
}

/// Blocks on `[λ_min, 1]` for the low-energy integrals.
fn low_blocks(ctx: &CalculusContext<'_>, grid: &Grid) -> Vec<crate::calculus::Block> {
    QuadratureScheme::blocks_between(ctx.scheme.effective_lambda_min(grid), 1.0)
}

fn weighted_norm(grid: &Grid) -> impl Fn(&[f64]) -> f64 + '_ {
    move |v: &[f64]| {
        let w = grid.weights();
        v.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
    }
}

/// `∫_{λ_min}^1 ∂_x (kk part of (Δ+λ²)^{-1}) g dλ` on the grid, from the
/// open-line kernel, plus the `λ < λ_min` piece (integrand tends to a
/// constant there).
pub fn low_energy_kk_gradient(g: &GridFunction, ctx: &CalculusContext<'_>) -> Result<(GridFunction, QuadratureStats)> {
    let grid = g.grid().clone();
    let (plus, minus) = split_branches(g.values(), grid.junction());
    let eval = |lambda: f64| -> Result<Vec<f64>> {
        let t = ResolventTable::with_boundary(&grid, lambda, Boundary::Open)?;
        let (dp, dm) = t.kk_branches(&plus, &minus, true);
        let dm: Vec<f64> = dm.iter().map(|x| -x).collect();
        Ok(join_branches(&dp, &dm))
    };
    let blocks = low_blocks(ctx, &grid);
    let (mut v, stats) = integrate_blocks(ctx.scheme, &blocks, ctx.exec, weighted_norm(&grid), &eval)?;
    let lm = blocks[0].lo;
    for (a, b) in v.iter_mut().zip(eval(lm)?) {
        *a += lm * b;
    }
    Ok((GridFunction::new(grid, v)?, stats))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BilinearValue {
    /// `λ` outermost: the scalar `⟨f', ∂R^{kk}_λ g⟩` integrated in `λ`.
    pub value: f64,
    /// `λ` innermost: `⟨f', ∫ ∂R^{kk}_λ g dλ⟩`.
    pub swapped: f64,
    pub rel_gap: f64,
}

/// `ℬ(f,g) = ∫ f'(x) ∫_0^1 ∂_x k(λ|x|) ∫ k(λ|y|) g(y) dμ(y) F(λ) dλ dμ(x)`,
/// `F = A` across branches and `B` within one, evaluated in both orders.
pub fn bilinear_low_energy_kk(f: &GridFunction, g: &GridFunction, ctx: &CalculusContext<'_>) -> Result<BilinearValue> {
    if !f.grid().same_as(g.grid()) {
        return Err(Error::GridMismatch);
    }
    let grid = g.grid().clone();
    let fp = f.derivative();
    let (plus, minus) = split_branches(g.values(), grid.junction());
    let scalar = |lambda: f64| -> Result<Vec<f64>> {
        let t = ResolventTable::with_boundary(&grid, lambda, Boundary::Open)?;
        let (dp, dm) = t.kk_branches(&plus, &minus, true);
        let dm: Vec<f64> = dm.iter().map(|x| -x).collect();
        let v = GridFunction::new(grid.clone(), join_branches(&dp, &dm))?;
        Ok(vec![fp.inner(&v)?])
    };
    let blocks = low_blocks(ctx, &grid);
    let (s, _) = integrate_blocks(ctx.scheme, &blocks, ctx.exec, |v| v[0].abs(), &scalar)?;
    let lm = blocks[0].lo;
    let value = s[0] + lm * scalar(lm)?[0];
    let (grad, _) = low_energy_kk_gradient(g, ctx)?;
    let swapped = fp.inner(&grad)?;
    let rel_gap = (value - swapped).abs() / value.abs().max(swapped.abs()).max(f64::MIN_POSITIVE);
    Ok(BilinearValue { value, swapped, rel_gap })
}

/// `𝒯h(x) = |x| ∫_0^1 λ² F(λ) k(λ|x|) ∫ k(λ|y|) h(y) dμ(y) dλ`.
pub fn t_operator(h: &GridFunction, ctx: &CalculusContext<'_>) -> Result<GridFunction> {
    let grid = h.grid().clone();
    let (plus, minus) = split_branches(h.values(), grid.junction());
    let eval = |lambda: f64| -> Result<Vec<f64>> {
        let t = ResolventTable::with_boundary(&grid, lambda, Boundary::Open)?;
        let (vp, vm) = t.kk_branches(&plus, &minus, false);
        let mut v = join_branches(&vp, &vm);
        for x in &mut v {
            *x *= lambda * lambda;
        }
        Ok(v)
    };
    let (v, _) = integrate_blocks(ctx.scheme, &low_blocks(ctx, &grid), ctx.exec, weighted_norm(&grid), &eval)?;
    let out = v.iter().enumerate().map(|(j, x)| grid.radius(j) * x).collect();
    GridFunction::new(grid, out)
}

/// Exponent `β` of the pointwise bound `|𝒯h(x)| ≤ C |x|^β ‖h‖_{q'}`.
pub fn t_pointwise_exponent(d: f64, q: f64) -> f64 {
    let qp = q / (q - 1.0);
    if d > 2.0 {
        2.0 - d - d / qp
    } else {
        -d / qp
    }
}

/// Ratios `|𝒯h(x)| / (|x|^β ‖h‖_{q'})` at every node off the junction.
pub fn t_pointwise_ratios(h: &GridFunction, th: &GridFunction, q: f64) -> Result<Vec<f64>> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q must lie in (1, ∞), got {q}")));
    }
    let grid = h.grid();
    let beta = t_pointwise_exponent(grid.d(), q);
    let hn = h.lp_norm(q / (q - 1.0))?;
    if hn == 0.0 {
        return Ok(vec![0.0; grid.len() - 1]);
    }
    Ok((0..grid.len())
        .filter(|&j| j != grid.junction())
        .map(|j| th.values()[j].abs() / (grid.radius(j).powf(beta) * hn))
        .collect())
}

/// `s^{q'} μ{|𝒯h| > s} / ‖h‖_{q'}^{q'}` for each threshold `s`.
pub fn weak_type_products(h: &GridFunction, th: &GridFunction, q: f64, thresholds: &[f64]) -> Result<Vec<f64>> {
    let qp = q / (q - 1.0);
    let hn = h.lp_norm(qp)?.powf(qp);
    let w = th.grid().weights();
    Ok(thresholds
        .iter()
        .map(|&s| {
            let m: f64 = th.values().iter().zip(w).filter(|(v, _)| v.abs() > s).map(|(_, w)| w).sum();
            s.powf(qp) * m / hn
        })
        .collect())
}

/// `‖f/|x|‖_p / ‖f'‖_p`.
pub fn hardy_ratio(f: &GridFunction, p: f64) -> Result<f64> {
    let grid = f.grid();
    let den = f.derivative().lp_norm(p)?;
    if !(den > 0.0) {
        return Err(Error::InvalidParameter("Hardy ratio of a function with zero derivative".into()));
    }
    let q = GridFunction::new(grid.clone(), (0..grid.len()).map(|j| f.values()[j] / grid.radius(j)).collect())?;
    Ok(q.lp_norm(p)? / den)
}

/// Classical sharp constant `p/(d-p)` of the Hardy inequality, `p < d`.
pub fn hardy_constant(d: f64, p: f64) -> Option<f64> {
    (p < d).then(|| p / (d - p))
}

/// The `(2/π)`-normalized low-energy Riesz transform of `g` restricted to
/// the kk part, whose pairing with `f'` is `(2/π) ℬ(f,g)`.
pub fn low_energy_kk_riesz(g: &GridFunction, ctx: &CalculusContext<'_>) -> Result<GridFunction> {
    Ok(low_energy_kk_gradient(g, ctx)?.0.scale(FRAC_2_PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dimension, Spacing};

    #[test]
    fn quantile_nearest_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&v, 0.95), 95.0);
        assert_eq!(quantile(&v, 1.0), 100.0);
        assert!(quantile(&[], 0.5).is_nan());
    }

    #[test]
    fn governing_branch_split() {
        assert_eq!(BoundBranch::governing(3.0, 0.5), BoundBranch::LambdaPower);
        assert_eq!(BoundBranch::governing(2.5, 0.25), BoundBranch::InverseSquare);
        assert_eq!(BoundBranch::governing(2.5, 0.75), BoundBranch::LambdaPower);
    }

    #[test]
    fn exact_gradient_solves_the_ode() {
        // r^{d-1} u' integrates -r^{d-1} k(λr)
        let (d, lambda) = (3.0, 0.4);
        let rad = RadialSolutions::new(d).unwrap();
        let flux = |r: f64| r.powf(d - 1.0) * corrector_gradient_exact(d, lambda, r).unwrap();
        let h = 1e-4;
        for r in [1.5, 4.0, 20.0] {
            let lhs = (flux(r + h) - flux(r - h)) / (2.0 * h);
            let k = rad.k(lambda * r).unwrap();
            assert!((lhs + r.powf(d - 1.0) * k).abs() < 1e-6 * (r.powf(d - 1.0) * k).abs().max(1e-12));
        }
        assert!(corrector_gradient_exact(d, lambda, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn hardy_rejects_constant() {
        let g = Grid::new(Dimension::new(3.0).unwrap(), 10.0, 100, Spacing::Uniform).unwrap();
        assert!(hardy_ratio(&GridFunction::zeros(g), 2.0).is_err());
    }
}
