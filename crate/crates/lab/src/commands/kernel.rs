//! `verify-kernel`: pointwise identities of the resolvent kernel.

use brokenline::bessel::asymptotic_regime_check;
use brokenline::kernel::{coefficient_scale, ResolventKernel};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{KernelSuite, LabConfig};
use crate::error::LabResult;
use crate::report::{CheckRow, Report};

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Random pairs on the broken line with `1 ≤ |x| ≤ radius`.
fn random_pairs(seed: u64, count: usize, radius: f64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| {
        let r = radius.powf(rng.gen::<f64>());
        if rng.gen::<bool>() {
            r
        } else {
            -r
        }
    };
    (0..count).map(|_| (point(&mut rng), point(&mut rng))).collect()
}

/// Derivative jump `∂_x K(y-, y) - ∂_x K(y+, y)` from second-order one-sided
/// stencils, which should equal `|y|^{1-d}`.
fn delta_jump(k: &ResolventKernel, y: f64, step: f64) -> LabResult<f64> {
    let h = step * y.abs();
    let s = y.signum();
    let at = |t: f64| k.eval(y + s * t, y);
    let (k0, k1, k2, m1, m2) = (at(0.0)?, at(h)?, at(2.0 * h)?, at(-h)?, at(-2.0 * h)?);
    // derivatives along the outward radius direction
    let outer = (-3.0 * k0 + 4.0 * k1 - k2) / (2.0 * h);
    let inner = (3.0 * k0 - 4.0 * m1 + m2) / (2.0 * h);
    Ok(inner - outer)
}

/// Least-squares slope `c` of `-log K` against `λ·dist` over the window.
fn decay_rate(k: &ResolventKernel, suite: &KernelSuite) -> LabResult<f64> {
    let lambda = k.lambda();
    let y = 2.0;
    let samples = 40;
    let mut pts = Vec::with_capacity(2 * samples);
    for i in 0..samples {
        let t = suite.decay_from + (suite.decay_to - suite.decay_from) * i as f64 / (samples - 1) as f64;
        let dist = t / lambda;
        // same branch, then across the junction (path distance |x| + |y| - 2)
        pts.push((t, k.eval(y + dist, y)?));
        pts.push((t, k.eval(-(dist - y + 2.0), y)?));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(-sxy / sxx)
}

pub fn run(cfg: &LabConfig) -> LabResult<Report> {
    let suite = &cfg.verify_kernel;
    let mut report = Report::new("verify-kernel");
    report.detail("config", suite)?;
    let pairs = random_pairs(cfg.seed, suite.pairs, suite.pair_radius);
    let mut spreads = Vec::new();
    for &d in &suite.dims {
        for &lambda in &suite.lambdas {
            let k = ResolventKernel::new(d, lambda)?;
            let (mut sym, mut refl, mut min_k) = (0.0f64, 0.0f64, f64::INFINITY);
            for &(x, y) in &pairs {
                let a = k.eval(x, y)?;
                sym = sym.max(rel(a, k.eval(y, x)?));
                refl = refl.max(rel(a, k.eval(-x, -y)?));
                min_k = min_k.min(a);
            }
            let c = &mut report.checks;
            c.push(CheckRow::at_most("symmetry", Some(d), Some(lambda), sym, suite.symmetry_tol));
            c.push(CheckRow::at_most("reflection", Some(d), Some(lambda), refl, suite.symmetry_tol));
            c.push(CheckRow::flag("positivity", Some(d), Some(lambda), min_k > 0.0));
            let mut jump = 0.0f64;
            for &y in &suite.jump_points {
                for y in [y, -y] {
                    jump = jump.max(rel(delta_jump(&k, y, suite.jump_step)?, y.abs().powf(1.0 - d)));
                }
            }
            c.push(CheckRow::at_most("delta_jump", Some(d), Some(lambda), jump, suite.jump_tol));
            c.push(CheckRow::at_least("decay_rate", Some(d), Some(lambda), decay_rate(&k, suite)?, suite.decay_min_rate));
            c.push(CheckRow::at_most(
                "closed_form_gap",
                Some(d),
                Some(lambda),
                k.coeffs().closed_form_gap,
                suite.closed_form_tol,
            ));
        }

        // |A|, |B| against the regime scale over [λ_lo, λ_hi]
        let (lo, hi) = (suite.ab_lambda_min, suite.ab_lambda_max);
        let mut ra = Vec::with_capacity(suite.ab_samples);
        let mut rb = Vec::with_capacity(suite.ab_samples);
        for i in 0..suite.ab_samples {
            let lambda = lo * (hi / lo).powf(i as f64 / (suite.ab_samples - 1) as f64);
            let m = ResolventKernel::new(d, lambda)?.coeffs().to_owned();
            let s = coefficient_scale(d, lambda);
            ra.push(m.a().abs() / s);
            rb.push(m.b().abs() / s);
        }
        for (name, r) in [("coefficient_a_spread", &ra), ("coefficient_b_spread", &rb)] {
            let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = r.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = if min > 0.0 && max.is_finite() { max / min } else { f64::INFINITY };
            report.checks.push(CheckRow::at_most(name, Some(d), None, spread, suite.ab_spread_max));
        }
        spreads.push(serde_json::json!({ "d": d, "a_ratios": ra, "b_ratios": rb }));

        let regime = asymptotic_regime_check(d).map_err(brokenline::Error::from)?;
        for b in &regime.bounds {
            let which = if b.range.0 >= 1.0 { "large" } else { "small" };
            let value = if b.holds() { b.spread() } else { f64::INFINITY };
            report.checks.push(CheckRow::at_most(
                format!("regime_{which}_{}", b.quantity),
                Some(d),
                None,
                value,
                suite.regime_spread_max,
            ));
        }
    }
    report.detail("coefficient_ratios", spreads)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_are_reproducible() {
        let a = random_pairs(7, 20, 10.0);
        assert_eq!(a, random_pairs(7, 20, 10.0));
        assert_ne!(a, random_pairs(8, 20, 10.0));
        assert!(a.iter().all(|&(x, y)| (1.0..=10.0).contains(&x.abs()) && (1.0..=10.0).contains(&y.abs())));
    }

    #[test]
    fn jump_matches_normalization_at_d3() {
        let k = ResolventKernel::new(3.0, 0.5).unwrap();
        let j = delta_jump(&k, 4.0, 1e-5).unwrap();
        assert!(rel(j, 4f64.powf(-2.0)) < 1e-6);
    }
}
