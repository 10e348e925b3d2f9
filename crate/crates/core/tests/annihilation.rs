use brokenline::annihilation::{annihilation_check, build_corrector, junction_perturbation, AnnihilationSettings, HarmonicPart};
use brokenline::calculus::{CalculusContext, QuadratureScheme};
use brokenline::family::{make_family, FamilyKind, FamilyParam};
use brokenline::{Dimension, Grid, Spacing};

#[test]
fn harmonic_part_annihilates_s0_and_detects_junction_values() {
    let scheme = QuadratureScheme::default();
    let ctx = CalculusContext::new(&scheme);
    let set = AnnihilationSettings::default();
    let params = [FamilyParam::new(4.0, 1.5), FamilyParam::new(10.0, 3.0)];
    for d in [2.5, 3.0] {
        let mut last = Vec::new();
        for n in [2000, 4000] {
            let g = Grid::new(Dimension::new(d).unwrap(), 50.0, n, Spacing::default()).unwrap();
            let fam = make_family(FamilyKind::Dilate, &g, &params).unwrap();
            let u = build_corrector(&g, 0.3, &set, &ctx).unwrap();
            assert!(!u.limit_unstable);
            let phi = HarmonicPart::new(&u).unwrap();
            let defects: Vec<f64> = fam.members.iter().map(|f| annihilation_check(f, &phi, set.floor).unwrap()).collect();
            for (f, &def) in fam.members.iter().zip(&defects) {
                assert!(def < set.defect_tol, "d={d} n={n} defect={def}");
                let p = junction_perturbation(f, set.perturbation, 0.5).unwrap();
                let inflated = annihilation_check(&p, &phi, set.floor).unwrap();
                assert!(inflated >= set.sensitivity_factor * def, "d={d} n={n} {inflated} vs {def}");
            }
            if !last.is_empty() {
                for (c, f) in last.iter().zip(&defects) {
                    assert!(f < c, "defect did not shrink: {c} -> {f}");
                }
            }
            last = defects;
        }
    }
}
