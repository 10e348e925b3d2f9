use brokenline::bessel::{k_fn, k_fn_prime, l_fn, l_fn_prime, RadialSolutions};
use proptest::prelude::*;

/// Residual of `f'' + (d-1)/r f' - λ² f` relative to the sum of term sizes,
/// with `f''` from a fourth-order difference of the analytic `f'`.
fn residual(d: f64, lambda: f64, r: f64, f: impl Fn(f64) -> f64, fp: impl Fn(f64) -> f64) -> f64 {
    let h = 2e-4 * r.min(1.0 / lambda);
    let fpp = (fp(r - 2.0 * h) - 8.0 * fp(r - h) + 8.0 * fp(r + h) - fp(r + 2.0 * h)) / (12.0 * h);
    let a = fpp;
    let b = (d - 1.0) / r * fp(r);
    let c = lambda * lambda * f(r);
    (a + b - c).abs() / (a.abs() + b.abs() + c.abs())
}

#[test]
fn ode_residual_unscaled() {
    for d in [1.3, 1.5, 2.0, 2.5, 3.0, 4.0, 6.5] {
        let mut r = 1e-3;
        while r < 100.0 {
            let rk = residual(d, 1.0, r, |t| k_fn(d, t).unwrap(), |t| k_fn_prime(d, t).unwrap());
            let rl = residual(d, 1.0, r, |t| l_fn(d, t).unwrap(), |t| l_fn_prime(d, t).unwrap());
            assert!(rk < 1e-8, "k d={d} r={r} res={rk}");
            assert!(rl < 1e-8, "l d={d} r={r} res={rl}");
            r *= 1.37;
        }
    }
}

#[test]
fn ode_residual_scaled_argument() {
    for d in [1.5, 2.0, 3.0] {
        let rad = RadialSolutions::new(d).unwrap();
        for lambda in [1e-3, 0.1, 1.0, 10.0] {
            for r in [1.0, 1.7, 3.0, 9.0] {
                let res = residual(
                    d,
                    lambda,
                    r,
                    |t| rad.k(lambda * t).unwrap(),
                    |t| lambda * rad.k_prime(lambda * t).unwrap(),
                );
                assert!(res < 1e-8, "d={d} λ={lambda} r={r} res={res}");
            }
        }
    }
}

#[test]
fn k_small_argument_regime_d_above_two() {
    for d in [2.5, 3.0, 5.0] {
        let vals: Vec<f64> = (0..50)
            .map(|i| 1e-4 * 1000f64.powf(i as f64 / 49.0))
            .map(|r| k_fn(d, r).unwrap() * r.powf(d - 2.0))
            .collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 3.0, "d={d} [{lo}, {hi}]");
    }
}

proptest! {
    #[test]
    fn signs_hold_everywhere(d in 1.05f64..8.0, r in 1e-4f64..300.0) {
        let rad = RadialSolutions::new(d).unwrap();
        let s = rad.eval_scaled(r).unwrap();
        prop_assert!(s.k > 0.0 && s.dk < 0.0 && s.l > 0.0 && s.dl > 0.0);
        let w = rad.wronskian_constant(r).unwrap();
        prop_assert!((w - 1.0).abs() < 1e-10, "w={}", w);
    }
}
