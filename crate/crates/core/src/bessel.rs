//! Modified Bessel functions `K_ν`, `I_ν` and the radial solutions `k`, `l`
//! of `f'' + (d-1)/r f' = f`.
//!
//! Evaluation strategy by argument:
//!
//! * `r <= 2`: ascending series. `I_ν` uses the plain power series; `K_ν` uses
//!   Temme's series for the reduced order `μ = ν - round(ν)`, which contains
//!   the logarithmic branch for integer orders as its `μ → 0` limit, followed
//!   by upward recurrence.
//! * `2 < r < r*`: Steed's continued fraction for `K_μ, K_{μ+1}`, upward
//!   recurrence, and `I_ν` from the Wronskian with the ratio `I_{ν+1}/I_ν`.
//! * `r >= r* = max(25, 2ν²)`: the large-argument asymptotic expansion.
//!
//! Everything is computed in exponentially scaled form (`e^r K_ν`,
//! `e^{-r} I_ν`) so that products like `k(λx) l(λy)` with `x > y` can be formed
//! without overflow for arbitrarily large arguments.

use std::f64::consts::PI;
use serde::Serialize;

use thiserror::Error;

/// Largest supported order.
pub const MAX_ORDER: f64 = 50.0;

/// Above this argument the unscaled `I_ν` is reported as overflow and the
/// unscaled `K_ν` is below `1e-300`.
pub const UNSCALED_LIMIT: f64 = 700.0;

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 10_000;
const SERIES_LIMIT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum BesselError {
    #[error("argument must be positive and finite, got {0}")]
    Domain(f64),
    #[error("order must lie in [0, {MAX_ORDER}], got {0}")]
    Order(f64),
    #[error("I_{nu}({r}) overflows double precision; use the scaled form")]
    Overflow { nu: f64, r: f64 },
}

pub type Result<T> = std::result::Result<T, BesselError>;

/// Taylor coefficients of `1/Γ(1+z)` about `z = 0`.
const RGAMMA_TAYLOR: [f64; 29] = [
    1.0,
    0.577_215_664_901_532_860_6,
    -0.655_878_071_520_253_881_1,
    -0.042_002_635_034_095_235_53,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_75,
    -0.009_621_971_527_876_973_562,
    0.007_218_943_246_663_099_542,
    -0.001_165_167_591_859_065_112,
    -0.000_215_241_674_114_950_972_8,
    0.000_128_050_282_388_116_186_2,
    -0.000_020_134_854_780_788_238_66,
    -0.000_001_250_493_482_142_670_657,
    0.000_001_133_027_231_981_695_882,
    -2.056_338_416_977_607_103e-7,
    6.116_095_104_481_415_818e-9,
    5.002_007_644_469_222_930e-9,
    -1.181_274_570_487_020_145e-9,
    1.043_426_711_691_100_510e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783e-14,
    -5.348_122_539_423_017_982e-15,
    1.226_778_628_238_260_790e-15,
    -1.181_259_301_697_458_770e-16,
    1.186_692_254_751_600_333e-18,
    1.412_380_655_318_031_782e-18,
    -2.298_745_684_435_370_207e-19,
];

fn rgamma_taylor(z: f64) -> f64 {
    RGAMMA_TAYLOR.iter().rev().fold(0.0, |acc, &c| acc * z + c)
}

/// `1/Γ(1+x)` for `x > -1`, via the Taylor series on `|μ| <= 1/2` and the
/// recurrence `Γ(1+x) = x Γ(x)`.
pub(crate) fn rgamma1p(x: f64) -> f64 {
    let n = x.round();
    if n < 0.0 {
        // x in (-1, -1/2): 1/Γ(1+x) = (1+x)/Γ(2+x)
        return rgamma1p(x + 1.0) * (x + 1.0);
    }
    let mu = x - n;
    let mut r = rgamma_taylor(mu);
    for j in 1..=(n as i64) {
        r /= mu + j as f64;
    }
    r
}

fn check(nu: f64, r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(BesselError::Domain(r));
    }
    if !(0.0..=MAX_ORDER).contains(&nu) {
        return Err(BesselError::Order(nu));
    }
    Ok(())
}

/// Crossover radius between the continued-fraction and asymptotic branches.
pub fn crossover_radius(nu: f64) -> f64 {
    f64::max(25.0, 2.0 * nu * nu)
}

/// Pair of consecutive orders `(F_ν, F_{ν+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPair {
    pub nu: f64,
    pub nu1: f64,
}

/// Temme's series for `(K_μ, K_{μ+1})` with `|μ| <= 1/2`, `x <= 2`, unscaled.
fn temme_series(mu: f64, x: f64) -> OrderPair {
    let x2 = 0.5 * x;
    let pimu = PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let gampl = rgamma_taylor(mu);
    let gammi = rgamma_taylor(-mu);
    // gam1 = (1/Γ(1-μ) - 1/Γ(1+μ)) / (2μ), gam2 = (1/Γ(1-μ) + 1/Γ(1+μ)) / 2,
    // both from the even/odd parts of the Taylor series.
    let mu2 = mu * mu;
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mut pw = 1.0;
    for pair in RGAMMA_TAYLOR.chunks(2) {
        gam2 += pair[0] * pw;
        if pair.len() > 1 {
            gam1 -= pair[1] * pw;
        }
        pw *= mu2;
    }
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let ee = e.exp();
    let mut p = 0.5 * ee / gampl;
    let mut q = 0.5 / (ee * gammi);
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= dd / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    OrderPair {
        nu: sum,
        nu1: sum1 * 2.0 / x,
    }
}

/// Steed's continued fraction (CF2) for `(K_μ, K_{μ+1})`, `|μ| <= 1/2`,
/// `x > 2`, scaled by `e^x`.
fn steed_cf2_scaled(mu: f64, x: f64) -> OrderPair {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut c = a1;
    let mut q = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * x)).sqrt() / s;
    let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
    OrderPair { nu: k_mu, nu1: k_mu1 }
}

/// Large-argument expansion `Σ a_k(ν) (±1/x)^k`, truncated at the smallest
/// term.
fn asymptotic_sum(nu: f64, x: f64, alternating: bool) -> f64 {
    let four_nu2 = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for k in 1..60 {
        let fk = k as f64;
        let odd = 2.0 * fk - 1.0;
        let next = term * (four_nu2 - odd * odd) / (8.0 * fk * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += if alternating && k % 2 == 1 { -term } else { term };
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    sum
}

/// `e^x K_ν(x)` from the asymptotic expansion.
pub(crate) fn k_asymptotic_scaled(nu: f64, x: f64) -> f64 {
    (PI / (2.0 * x)).sqrt() * asymptotic_sum(nu, x, false)
}

/// `e^{-x} I_ν(x)` from the asymptotic expansion.
pub(crate) fn i_asymptotic_scaled(nu: f64, x: f64) -> f64 {
    asymptotic_sum(nu, x, true) / (2.0 * PI * x).sqrt()
}

/// `e^x (K_ν(x), K_{ν+1}(x))` for `ν >= 0` by the Temme/Steed route.
pub(crate) fn k_pair_continued(nu: f64, x: f64) -> OrderPair {
    let nl = (nu + 0.5).floor();
    let mu = nu - nl;
    let mut pair = if x <= SERIES_LIMIT {
        let p = temme_series(mu, x);
        let s = x.exp();
        OrderPair {
            nu: p.nu * s,
            nu1: p.nu1 * s,
        }
    } else {
        steed_cf2_scaled(mu, x)
    };
    let xi2 = 2.0 / x;
    for i in 1..=(nl as usize) {
        let next = (mu + i as f64) * xi2 * pair.nu1 + pair.nu;
        pair.nu = pair.nu1;
        pair.nu1 = next;
    }
    pair
}

/// Ratio `I_{ν+1}(x) / I_ν(x)` by the modified Lentz continued fraction.
fn i_ratio(nu: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let xi2 = 2.0 / x;
    let mut b = (nu + 1.0) * xi2;
    let mut f = b;
    let mut c = b;
    let mut d = 0.0;
    for _ in 0..MAX_ITER {
        b += xi2;
        d = b + d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = c * d;
        f *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    1.0 / f
}

/// `(I_ν(x), I_{ν+1}(x))` from the ascending power series, unscaled.
/// Valid for any `ν > -1`.
pub(crate) fn i_pair_series(nu: f64, x: f64) -> OrderPair {
    let half = 0.5 * x;
    let q = half * half;
    let series = |order: f64| {
        let mut term = half.powf(order) * rgamma1p(order);
        let mut sum = term;
        for k in 1..MAX_ITER {
            let fk = k as f64;
            term *= q / (fk * (fk + order));
            sum += term;
            if term < EPS * sum {
                break;
            }
        }
        sum
    };
    OrderPair {
        nu: series(nu),
        nu1: series(nu + 1.0),
    }
}

/// `e^x (K_ν, K_{ν+1})` with branch selection.
pub fn k_pair_scaled(nu: f64, x: f64) -> Result<OrderPair> {
    check(nu, x)?;
    if x >= crossover_radius(nu + 1.0) {
        return Ok(OrderPair {
            nu: k_asymptotic_scaled(nu, x),
            nu1: k_asymptotic_scaled(nu + 1.0, x),
        });
    }
    Ok(k_pair_continued(nu, x))
}

/// `e^{-x} (I_ν, I_{ν+1})` with branch selection, `ν >= 0`.
pub fn i_pair_scaled(nu: f64, x: f64) -> Result<OrderPair> {
    check(nu, x)?;
    if x >= crossover_radius(nu + 1.0) {
        return Ok(OrderPair {
            nu: i_asymptotic_scaled(nu, x),
            nu1: i_asymptotic_scaled(nu + 1.0, x),
        });
    }
    if x <= SERIES_LIMIT {
        let p = i_pair_series(nu, x);
        let s = (-x).exp();
        return Ok(OrderPair {
            nu: p.nu * s,
            nu1: p.nu1 * s,
        });
    }
    let k = k_pair_continued(nu, x);
    let rho = i_ratio(nu, x);
    // Wronskian: I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x
    let i_nu = 1.0 / (x * (rho * k.nu + k.nu1));
    Ok(OrderPair {
        nu: i_nu,
        nu1: rho * i_nu,
    })
}

/// `K_ν(r)`. Returns `0.0` once the value drops below the double range.
pub fn bessel_k(nu: f64, r: f64) -> Result<f64> {
    let s = bessel_k_scaled(nu, r)?;
    Ok(s * (-r).exp())
}

/// `e^r K_ν(r)`.
pub fn bessel_k_scaled(nu: f64, r: f64) -> Result<f64> {
    check(nu, r)?;
    if r >= crossover_radius(nu) {
        return Ok(k_asymptotic_scaled(nu, r));
    }
    Ok(k_pair_continued(nu, r).nu)
}

/// `I_ν(r)`; errors with [`BesselError::Overflow`] for `r > 700`.
pub fn bessel_i(nu: f64, r: f64) -> Result<f64> {
    check(nu, r)?;
    if r > UNSCALED_LIMIT {
        return Err(BesselError::Overflow { nu, r });
    }
    Ok(bessel_i_scaled(nu, r)? * r.exp())
}

/// `e^{-r} I_ν(r)`.
pub fn bessel_i_scaled(nu: f64, r: f64) -> Result<f64> {
    check(nu, r)?;
    if r >= crossover_radius(nu) {
        return Ok(i_asymptotic_scaled(nu, r));
    }
    if r <= SERIES_LIMIT {
        return Ok(i_pair_series(nu, r).nu * (-r).exp());
    }
    let k = k_pair_continued(nu, r);
    let rho = i_ratio(nu, r);
    Ok(1.0 / (r * (rho * k.nu + k.nu1)))
}

/// Values of `k`, `k'`, `l`, `l'` at one point, exponentially scaled:
/// `k` and `k'` carry a factor `e^r`, `l` and `l'` a factor `e^{-r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledRadial {
    pub k: f64,
    pub dk: f64,
    pub l: f64,
    pub dl: f64,
}

/// The radial solutions `k(r) = r^{1-d/2} K_{|d/2-1|}(r)` and
/// `l(r) = r^{1-d/2} I_{d/2-1}(r)` for a fixed dimension `d > 1`.
///
/// Derivatives use `d/dr [r^{-μ} K_μ] = -r^{-μ} K_{μ+1}` and
/// `d/dr [r^{-μ} I_μ] = r^{-μ} I_{μ+1}` with `μ = d/2 - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSolutions {
    d: f64,
    mu: f64,
}

impl RadialSolutions {
    pub fn new(d: f64) -> Result<Self> {
        if !(d > 1.0) || !d.is_finite() {
            return Err(BesselError::Order(d / 2.0 - 1.0));
        }
        let mu = d / 2.0 - 1.0;
        if mu.abs() > MAX_ORDER {
            return Err(BesselError::Order(mu));
        }
        Ok(Self { d, mu })
    }

    pub fn dimension(&self) -> f64 {
        self.d
    }

    /// `|d/2 - 1|`, the order of the `K` factor.
    pub fn order(&self) -> f64 {
        self.mu.abs()
    }

    pub fn eval_scaled(&self, r: f64) -> Result<ScaledRadial> {
        let mu = self.mu;
        let pw = r.powf(-mu);
        if mu >= 0.0 {
            let kp = k_pair_scaled(mu, r)?;
            let ip = i_pair_scaled(mu, r)?;
            Ok(ScaledRadial {
                k: pw * kp.nu,
                dk: -pw * kp.nu1,
                l: pw * ip.nu,
                dl: pw * ip.nu1,
            })
        } else {
            // -1/2 < μ < 0: K_μ = K_{|μ|}, K_{μ+1} is a regular pair member,
            // I_μ = I_{|μ|} + (2/π) sin(|μ|π) K_{|μ|}, and I_{μ+1} with μ+1 in (1/2, 1).
            let a = -mu;
            let k_a = k_pair_scaled(a, r)?.nu;
            let k_mu1 = k_pair_scaled(mu + 1.0, r)?.nu;
            let i_a = i_pair_scaled(a, r)?.nu;
            let i_mu1 = i_pair_scaled(mu + 1.0, r)?.nu;
            let i_neg = i_a + 2.0 / PI * (a * PI).sin() * (-2.0 * r).exp() * k_a;
            Ok(ScaledRadial {
                k: pw * k_a,
                dk: -pw * k_mu1,
                l: pw * i_neg,
                dl: pw * i_mu1,
            })
        }
    }

    pub fn k(&self, r: f64) -> Result<f64> {
        Ok(self.eval_scaled(r)?.k * (-r).exp())
    }

    pub fn k_prime(&self, r: f64) -> Result<f64> {
        Ok(self.eval_scaled(r)?.dk * (-r).exp())
    }

    pub fn l(&self, r: f64) -> Result<f64> {
        if r > UNSCALED_LIMIT {
            return Err(BesselError::Overflow { nu: self.mu, r });
        }
        Ok(self.eval_scaled(r)?.l * r.exp())
    }

    pub fn l_prime(&self, r: f64) -> Result<f64> {
        if r > UNSCALED_LIMIT {
            return Err(BesselError::Overflow { nu: self.mu + 1.0, r });
        }
        Ok(self.eval_scaled(r)?.dl * r.exp())
    }

    /// `r^{d-1} (k l' - k' l)`, constant in `r` for exact solutions.
    pub fn wronskian_constant(&self, r: f64) -> Result<f64> {
        let s = self.eval_scaled(r)?;
        Ok(r.powf(self.d - 1.0) * (s.k * s.dl - s.dk * s.l))
    }
}

/// Free-function forms of the radial solutions.
pub fn k_fn(d: f64, r: f64) -> Result<f64> {
    RadialSolutions::new(d)?.k(r)
}

pub fn l_fn(d: f64, r: f64) -> Result<f64> {
    RadialSolutions::new(d)?.l(r)
}

pub fn k_fn_prime(d: f64, r: f64) -> Result<f64> {
    RadialSolutions::new(d)?.k_prime(r)
}

pub fn l_fn_prime(d: f64, r: f64) -> Result<f64> {
    RadialSolutions::new(d)?.l_prime(r)
}

/// Worst-case comparability ratios of one quantity against its model
/// profile over one range of `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeBound {
    pub quantity: &'static str,
    pub range: (f64, f64),
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl RegimeBound {
    /// `C/c`; finite and `≥ 1` when the two-sided bound holds.
    pub fn spread(&self) -> f64 {
        self.max_ratio / self.min_ratio
    }

    pub fn holds(&self) -> bool {
        self.min_ratio > 0.0 && self.max_ratio.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub d: f64,
    pub bounds: Vec<RegimeBound>,
}

impl RegimeReport {
    pub fn all_hold(&self) -> bool {
        self.bounds.iter().all(RegimeBound::holds)
    }

    pub fn get(&self, quantity: &str, large: bool) -> Option<&RegimeBound> {
        self.bounds
            .iter()
            .find(|b| b.quantity == quantity && (b.range.0 >= 1.0) == large)
    }
}

pub const SMALL_RANGE: (f64, f64) = (1e-3, 0.5);
pub const LARGE_RANGE: (f64, f64) = (2.0, 50.0);

/// Checks the two-sided bounds `k ≃ ...`, `l ≃ ...`, `k' ≃ ...`, `l' ≃ ...`
/// for small and large `r`. Small-`r` models depend on the regime
/// (`1<d<2`, `d=2`, `d>2`); at `d = 2` the `k` model is `1 - log r`. All
/// ratios are computed so that a valid bound gives positive finite numbers.
pub fn asymptotic_regime_check(d: f64) -> Result<RegimeReport> {
    let rad = RadialSolutions::new(d)?;
    let samples = 200;
    let sample = |(a, b): (f64, f64)| -> Vec<f64> {
        (0..samples)
            .map(|i| a * (b / a).powf(i as f64 / (samples - 1) as f64))
            .collect()
    };
    let mut bounds = Vec::new();
    let mut push = |quantity, range, ratios: Vec<f64>| {
        let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let max_ratio = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        bounds.push(RegimeBound { quantity, range, min_ratio, max_ratio });
    };

    let small = sample(SMALL_RANGE);
    let vals = small.iter().map(|&r| rad.eval_scaled(r)).collect::<Result<Vec<_>>>()?;
    let k_model = |r: f64| {
        if d > 2.0 {
            r.powf(2.0 - d)
        } else if d == 2.0 {
            1.0 - r.ln()
        } else {
            1.0
        }
    };
    let kp_model = |r: f64| if d == 2.0 { -1.0 / r } else { -r.powf(1.0 - d) };
    push("k", SMALL_RANGE, small.iter().zip(&vals).map(|(&r, v)| v.k * (-r).exp() / k_model(r)).collect());
    push("l", SMALL_RANGE, small.iter().zip(&vals).map(|(&r, v)| v.l * r.exp()).collect());
    push("k'", SMALL_RANGE, small.iter().zip(&vals).map(|(&r, v)| v.dk * (-r).exp() / kp_model(r)).collect());
    push("l'", SMALL_RANGE, small.iter().zip(&vals).map(|(&r, v)| v.dl * r.exp() / r).collect());

    let large = sample(LARGE_RANGE);
    let vals = large.iter().map(|&r| rad.eval_scaled(r)).collect::<Result<Vec<_>>>()?;
    let pw = |r: f64| r.powf((1.0 - d) / 2.0);
    push("k", LARGE_RANGE, large.iter().zip(&vals).map(|(&r, v)| v.k / pw(r)).collect());
    push("l", LARGE_RANGE, large.iter().zip(&vals).map(|(&r, v)| v.l / pw(r)).collect());
    push("k'", LARGE_RANGE, large.iter().zip(&vals).map(|(&r, v)| -v.dk / pw(r)).collect());
    push("l'", LARGE_RANGE, large.iter().zip(&vals).map(|(&r, v)| v.dl / pw(r)).collect());
    Ok(RegimeReport { d, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `(ν, r, e^r K_ν(r), e^{-r} I_ν(r))` from a 50-digit reference
    /// evaluation.
    const REFERENCE: &[(f64, f64, f64, f64)] = &[
        (0.0, 1e-06, 13.931456005075458808, 0.99999900000074999958),
        (0.0, 0.5, 1.52410938577390953, 0.64503527044915006811),
        (0.0, 2.0, 0.84156821507077141792, 0.30850832255367103953),
        (0.0, 2.0001, 0.84154902487215156083, 0.30849899904454154508),
        (0.0, 10.0, 0.39163193443659866573, 0.12783333716342860732),
        (0.0, 24.9, 0.24993215015402473826, 0.080359332611532213624),
        (0.0, 25.1, 0.24894399546328753308, 0.080035197254296236447),
        (0.0, 100.0, 0.12517562165912657889, 0.039944379299096682648),
        (0.25, 0.001, 11.768238628404431667, 0.16481138527875486678),
        (0.25, 1.7, 0.91947449008499936116, 0.32472773888205628791),
        (0.25, 5.0, 0.55095457600597136284, 0.18223762203904338023),
        (0.5, 1.0, 1.2533141373155002512, 0.34495131388824462599),
        (0.5, 30.0, 0.22882280821594224834, 0.072836562039471938036),
        (0.7, 2.0, 0.93111913089431403448, 0.25432331120149147337),
        (1.0, 0.0001, 10000.99955863893737, 0.000049995000312485419609),
        (1.0, 0.3, 4.1251577622444698058, 0.11237756063983879503),
        (1.0, 3.0, 0.80656348012878690333, 0.19682671329730085363),
        (1.0, 50.0, 0.1785665585588155746, 0.055993123892895399644),
        (1.5, 0.01, 1265.8472786886552145, 0.00026331779208562832305),
        (1.5, 7.0, 0.54138081991481977314, 0.12924529367161929142),
        (0.499, 1.3, 1.0989062028944977178, 0.32411201205464545133),
        (0.001, 0.7, 1.3301242942461710807, 0.55897721913050462797),
        (3.7, 12.0, 0.61775825560154872271, 0.064480135649692530913),
        (10.0, 5.0, 1448.2991377792564036, 0.000030860096549865415747),
        (10.0, 300.0, 0.085422884397143750717, 0.019499971453983564144),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matches_reference_table() {
        for &(nu, r, k, i) in REFERENCE {
            let ks = bessel_k_scaled(nu, r).unwrap();
            let is = bessel_i_scaled(nu, r).unwrap();
            assert!(rel(ks, k) < 1e-12, "K_{nu}({r}): {ks} vs {k}");
            assert!(rel(is, i) < 1e-12, "I_{nu}({r}): {is} vs {i}");
        }
    }

    #[test]
    fn half_integer_closed_forms() {
        let k = bessel_k(0.5, 1.0).unwrap();
        assert!(rel(k, (PI / 2.0).sqrt() * (-1.0f64).exp()) < 1e-12);
        assert!((k - 0.461_068_504_447_894_4).abs() < 1e-12);
        let i = bessel_i(0.5, 1.0).unwrap();
        assert!(rel(i, (2.0 / PI).sqrt() * 1.0f64.sinh()) < 1e-12);
        assert!((i - 0.937_674_888_245_488_8).abs() < 1e-12);
        for &r in &[1e-5, 0.1, 1.9, 2.1, 9.0, 24.0, 26.0, 400.0] {
            let want = (PI / (2.0 * r)).sqrt();
            assert!(rel(bessel_k_scaled(0.5, r).unwrap(), want) < 1e-12, "r={r}");
            let want_i = (1.0 - (-2.0 * r).exp()) / (2.0 * PI * r).sqrt();
            assert!(rel(bessel_i_scaled(0.5, r).unwrap(), want_i) < 1e-11, "r={r}");
        }
    }

    #[test]
    fn wronskian_at_two() {
        let nu = 0.7;
        let r = 2.0;
        let k = k_pair_scaled(nu, r).unwrap();
        let i = i_pair_scaled(nu, r).unwrap();
        let dk = nu / r * k.nu - k.nu1;
        let di = nu / r * i.nu + i.nu1;
        let w = di * k.nu - i.nu * dk;
        assert!(rel(w, 1.0 / r) < 1e-12, "{w}");
    }

    #[test]
    fn connection_formula_at_small_argument() {
        // K_ν = π (I_{-ν} - I_ν) / (2 sin νπ), usable where the cancellation is mild
        for &(nu, r) in &[(0.3, 0.2), (0.75, 0.5), (0.5, 1.0)] {
            let ineg = i_pair_series(-nu, r).nu;
            let ipos = i_pair_series(nu, r).nu;
            let k = PI * (ineg - ipos) / (2.0 * (nu * PI).sin());
            assert!(rel(bessel_k(nu, r).unwrap(), k) < 1e-12);
        }
    }

    #[test]
    fn branches_agree_across_crossovers() {
        for &nu in &[0.0, 0.25, 0.5, 0.9, 1.0, 1.5] {
            for &r in &[22.0, 25.0, 28.0, 35.0] {
                let cf = k_pair_continued(nu, r).nu;
                let asym = k_asymptotic_scaled(nu, r);
                assert!(rel(cf, asym) < 1e-9, "K nu={nu} r={r}");
                let k = k_pair_continued(nu, r);
                let rho = i_ratio(nu, r);
                let i_cf = 1.0 / (r * (rho * k.nu + k.nu1));
                assert!(rel(i_cf, i_asymptotic_scaled(nu, r)) < 1e-9, "I nu={nu} r={r}");
            }
            for &r in &[1.5, 1.99, 2.01, 2.5] {
                let mu = nu - (nu + 0.5f64).floor();
                let series = temme_series(mu, r);
                let cf = steed_cf2_scaled(mu, r);
                assert!(rel(series.nu * r.exp(), cf.nu) < 1e-12);
                assert!(rel(series.nu1 * r.exp(), cf.nu1) < 1e-12);
                let k = k_pair_continued(nu, r);
                let i_w = 1.0 / (r * (i_ratio(nu, r) * k.nu + k.nu1));
                let i_s = i_pair_series(nu, r).nu * (-r).exp();
                assert!(rel(i_w, i_s) < 1e-12);
            }
        }
    }

    #[test]
    fn errors_are_distinct() {
        assert_eq!(bessel_k(0.5, 0.0), Err(BesselError::Domain(0.0)));
        assert!(matches!(bessel_k(0.5, -1.0), Err(BesselError::Domain(_))));
        assert!(matches!(bessel_i(0.5, 800.0), Err(BesselError::Overflow { .. })));
        assert!(bessel_i_scaled(0.5, 800.0).is_ok());
        assert_eq!(bessel_k(0.0, 800.0).unwrap(), 0.0);
        assert!(matches!(bessel_k(60.0, 1.0), Err(BesselError::Order(_))));
    }

    #[test]
    fn rgamma_matches_factorials() {
        assert!((rgamma1p(4.0) - 1.0 / 24.0).abs() < 1e-16);
        assert!(rel(rgamma1p(0.5), 2.0 / PI.sqrt()) < 1e-15);
        assert!(rel(rgamma1p(-0.75), 1.0 / 3.625_609_908_221_908_4) < 1e-14);
    }

    #[test]
    fn radial_closed_form_d3() {
        let rs = RadialSolutions::new(3.0).unwrap();
        for &r in &[1e-3f64, 0.5, 1.0, 3.0, 40.0] {
            let want = (PI / 2.0).sqrt() * (-r).exp() / r;
            assert!(rel(rs.k(r).unwrap(), want) < 1e-12);
            let want_dk = -(PI / 2.0).sqrt() * (-r).exp() * (1.0 / r + 1.0 / (r * r));
            assert!(rel(rs.k_prime(r).unwrap(), want_dk) < 1e-12);
        }
        assert!((k_fn(3.0, 1.0).unwrap() - 0.461_068_504_447_894_4).abs() < 1e-12);
    }

    #[test]
    fn wronskian_constant_is_one() {
        for &d in &[1.2, 1.5, 2.0, 2.5, 3.0, 4.0, 7.0] {
            let rs = RadialSolutions::new(d).unwrap();
            for &r in &[1e-4, 0.1, 1.0, 5.0, 30.0, 1e3] {
                let w = rs.wronskian_constant(r).unwrap();
                assert!((w - 1.0).abs() < 1e-11, "d={d} r={r} w={w}");
            }
        }
    }

    #[test]
    fn sign_pattern() {
        for &d in &[1.5, 2.0, 2.5, 3.0, 4.0] {
            let rs = RadialSolutions::new(d).unwrap();
            for &r in &[1e-3, 0.1, 1.0, 10.0, 100.0, 1e4] {
                let s = rs.eval_scaled(r).unwrap();
                assert!(s.k > 0.0 && s.dk < 0.0 && s.l > 0.0 && s.dl > 0.0, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn regime_tables() {
        let r3 = asymptotic_regime_check(3.0).unwrap();
        assert!(r3.all_hold());
        assert!(r3.get("k", true).unwrap().spread() < 10.0);
        let r15 = asymptotic_regime_check(1.5).unwrap();
        assert!(r15.all_hold());
        let r2 = asymptotic_regime_check(2.0).unwrap();
        let kp = r2.get("k'", false).unwrap();
        assert!(kp.min_ratio > 0.0 && kp.max_ratio < 2.0, "{kp:?}");
        for d in [1.2, 2.5, 4.0, 7.0] {
            assert!(asymptotic_regime_check(d).unwrap().all_hold());
        }
    }
}
