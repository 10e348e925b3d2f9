use brokenline::calculus::{sqrt_laplacian_batch, CalculusContext, Execution, QuadratureScheme};
use brokenline::family::{make_family, FamilyKind, FamilyParam};
use brokenline::oracle::SpectralOracle;
use brokenline::{Dimension, Grid, Spacing};

#[test]
fn sqrt_matches_oracle_and_energy() {
    let scheme = QuadratureScheme::default();
    let ctx = CalculusContext::new(&scheme);
    for d in [1.5, 3.0] {
        let g = Grid::new(Dimension::new(d).unwrap(), 50.0, 2000, Spacing::default()).unwrap();
        let params = [FamilyParam::new(4.0, 1.5), FamilyParam::new(10.0, 3.0)];
        let fam = make_family(FamilyKind::Dilate, &g, &params).unwrap();
        let oracle = SpectralOracle::new(&g).unwrap();
        let out = sqrt_laplacian_batch(&fam.members, &ctx).unwrap();
        for (f, s) in fam.members.iter().zip(&out.values) {
            let err = s.rel_l2_error(&oracle.sqrt(f).unwrap()).unwrap();
            assert!(err < 1e-3, "d={d} oracle err={err}");
            let energy = (s.l2_norm() / f.derivative().l2_norm() - 1.0).abs();
            assert!(energy < 1e-3, "d={d} energy gap={energy}");
        }
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let scheme = QuadratureScheme::default();
    let g = Grid::new(Dimension::new(2.5).unwrap(), 30.0, 400, Spacing::default()).unwrap();
    let fam = make_family(FamilyKind::Dilate, &g, &[FamilyParam::new(4.0, 1.5), FamilyParam::new(6.0, 2.0)]).unwrap();
    let seq = sqrt_laplacian_batch(&fam.members, &CalculusContext::new(&scheme).with_exec(Execution::Sequential)).unwrap();
    let par = sqrt_laplacian_batch(&fam.members, &CalculusContext::new(&scheme).with_exec(Execution::Parallel)).unwrap();
    for (a, b) in seq.values.iter().zip(&par.values) {
        assert_eq!(a.values(), b.values());
    }
}
