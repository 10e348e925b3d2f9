use brokenline::kernel::{solve_matching, KernelPart, ResolventKernel, ResolventTable};
use brokenline::oracle::solve_resolvent;
use brokenline::{Dimension, Grid, GridFunction, Spacing};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn point() -> impl Strategy<Value = f64> {
    (0.0f64..4.0, any::<bool>()).prop_map(|(t, s)| if s { 10f64.powf(t / 2.0) } else { -10f64.powf(t / 2.0) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_symmetric_and_reflection_invariant(
        d in prop::sample::select(vec![1.5, 2.0, 2.5, 3.0, 4.0]),
        lambda in 1e-3f64..5.0,
        x in point(),
        y in point(),
    ) {
        let k = ResolventKernel::new(d, lambda).unwrap();
        let a = k.eval(x, y).unwrap();
        prop_assert!(a > 0.0);
        prop_assert!(rel(a, k.eval(y, x).unwrap()) < 1e-12);
        prop_assert!(rel(a, k.eval(-x, -y).unwrap()) < 1e-12);
    }
}

#[test]
fn matching_agrees_with_closed_forms() {
    for d in [1.5, 2.0, 3.0, 4.0] {
        for lambda in [1e-3, 0.1, 1.0, 3.0] {
            let m = solve_matching(d, lambda).unwrap();
            assert!(m.closed_form_gap < 1e-10, "d={d} λ={lambda} gap={}", m.closed_form_gap);
            assert!((m.v - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn derivative_jumps_by_inverse_weight() {
    for d in [1.5, 2.0, 3.0] {
        let k = ResolventKernel::new(d, 0.4).unwrap();
        for y in [1.5, -3.0, 7.0] {
            let h = 1e-5 * f64::abs(y);
            let s = y.signum();
            let at = |t: f64| k.eval(y + s * t, y).unwrap();
            let outer = (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h);
            let inner = (3.0 * at(0.0) - 4.0 * at(-h) + at(-2.0 * h)) / (2.0 * h);
            let jump = inner - outer;
            assert!(rel(jump, f64::abs(y).powf(1.0 - d)) < 1e-6, "d={d} y={y} jump={jump}");
        }
    }
}

#[test]
fn grid_resolvent_matches_direct_solve() {
    for d in [1.5, 3.0] {
        let g = Grid::new(Dimension::new(d).unwrap(), 50.0, 2000, Spacing::default()).unwrap();
        let f = GridFunction::from_fn(g.clone(), |x| (x.abs() - 1.0) * (-(x - 2.0).powi(2) / 8.0).exp());
        for lambda in [0.1, 0.5, 2.0] {
            let t = ResolventTable::new(&g, lambda).unwrap();
            let err = t.apply(&f, KernelPart::Full).rel_l2_error(&solve_resolvent(&f, lambda).unwrap()).unwrap();
            assert!(err < 1e-3, "d={d} λ={lambda} err={err}");
        }
    }
}
