use std::sync::Arc;

use brokenline::{Dimension, Grid, GridFunction, Spacing};
use proptest::prelude::*;

fn grid(d: f64, n: usize, geometric: bool) -> Arc<Grid> {
    let spacing = if geometric { Spacing::Geometric { max_ratio: 10.0 } } else { Spacing::Uniform };
    Grid::new(Dimension::new(d).unwrap(), 20.0, n, spacing).unwrap()
}

fn smooth(g: &Arc<Grid>, a: f64, b: f64) -> GridFunction {
    let l = g.length();
    GridFunction::from_fn(g.clone(), move |x| (a * x).sin() * (1.0 - (x / l).powi(2)) + b * (-(x * x) / 9.0).exp() * (x.abs() - 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cell_masses_are_exact(d in 1.05f64..6.0, n in 64usize..600, geometric: bool) {
        let g = grid(d, n, geometric);
        let branch: f64 = g.cell_mass().iter().sum();
        let total: f64 = g.weights().iter().sum();
        prop_assert!((2.0 * branch / g.exact_measure() - 1.0).abs() < 1e-12);
        prop_assert!((total / g.exact_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_is_symmetric_and_positive(d in 1.05f64..6.0, a in 0.1f64..2.0, b in -1.0f64..1.0, geometric: bool) {
        let g = grid(d, 300, geometric);
        let (f, h) = (smooth(&g, a, b), smooth(&g, b + 1.3, a));
        let (fh, hf) = (f.energy(&h).unwrap(), h.energy(&f).unwrap());
        prop_assert!((fh - hf).abs() <= 1e-12 * fh.abs().max(1.0));
        prop_assert!(f.energy(&f).unwrap() > 0.0);
    }

    #[test]
    fn energy_matches_laplacian_pairing(d in 1.05f64..6.0, a in 0.1f64..2.0, b in -1.0f64..1.0) {
        let g = grid(d, 300, true);
        let (f, h) = (smooth(&g, a, b), smooth(&g, 0.7, 1.0 - b));
        let q = f.energy(&h).unwrap();
        let lap = f.laplacian().inner(&h).unwrap();
        prop_assert!((q - lap).abs() <= 1e-9 * q.abs().max(1.0), "q={q} lap={lap}");
    }

    #[test]
    fn reflection_preserves_norms(d in 1.05f64..6.0, a in 0.1f64..2.0, p in 1.0f64..8.0) {
        let g = grid(d, 200, true);
        let f = smooth(&g, a, 0.5);
        let r = f.reflect();
        let back = r.reflect();
        prop_assert_eq!(back.values(), f.values());
        let (nf, nr) = (f.lp_norm(p).unwrap(), r.lp_norm(p).unwrap());
        prop_assert!((nf - nr).abs() <= 1e-12 * nf);
    }

    #[test]
    fn lp_norm_is_homogeneous(d in 1.05f64..6.0, p in 1.0f64..8.0, c in -5.0f64..5.0) {
        let g = grid(d, 200, false);
        let f = smooth(&g, 0.9, 0.2);
        let lhs = f.scale(c).lp_norm(p).unwrap();
        prop_assert!((lhs - c.abs() * f.lp_norm(p).unwrap()).abs() <= 1e-12 * lhs.max(1e-300));
    }
}

#[test]
fn rejects_bad_dimensions_and_foreign_grids() {
    assert!(Dimension::new(1.0).is_err());
    assert!(Dimension::new(f64::NAN).is_err());
    // grids are identified by their parameters
    let (a, b, c) = (grid(3.0, 100, true), grid(3.0, 100, true), grid(3.0, 101, true));
    let f = GridFunction::zeros(a);
    assert!(f.inner(&GridFunction::zeros(b)).is_ok());
    assert!(f.inner(&GridFunction::zeros(c)).is_err());
}
