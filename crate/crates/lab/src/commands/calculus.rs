//! `verify-calculus`: quadrature operators against the spectral oracle and a
//! direct matrix solve.

use std::sync::Arc;

use brokenline::calculus::{inv_sqrt_laplacian_batch, scalar_sqrt_identity, sqrt_laplacian_batch, CalculusContext};
use brokenline::family::make_family;
use brokenline::kernel::{KernelPart, ResolventTable};
use brokenline::oracle::{solve_resolvent, SpectralOracle};
use brokenline::{Grid, GridFunction};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CalculusSuite, FamilySpec, GridSpec, LabConfig};
use crate::error::LabResult;
use crate::report::{CheckRow, Report};

fn members(grid: &Arc<Grid>, families: &[FamilySpec]) -> LabResult<Vec<GridFunction>> {
    let mut out = Vec::new();
    for f in families {
        out.extend(make_family(f.kind, grid, &f.params)?.members);
    }
    Ok(out)
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    // NaN propagates so a broken comparison cannot pass
    values.into_iter().fold(0.0, |m: f64, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// A seeded combination of low eigenvectors from both parity blocks.
fn mode_mix(oracle: &SpectralOracle, suite: &CalculusSuite, rng: &mut ChaCha8Rng) -> LabResult<GridFunction> {
    let pool = suite.riesz_mode_pool;
    let mut g = GridFunction::zeros(oracle.grid().clone());
    for i in sample(rng, 2 * pool, suite.riesz_modes) {
        let (_, v) = oracle
            .eigenpair(i % 2 == 1, i / 2)
            .ok_or_else(|| crate::error::LabError::Config(format!("oracle has no mode {}", i / 2)))?;
        g = g.axpy(rng.gen_range(-1.0..1.0), &v)?;
    }
    Ok(g)
}

fn rel_ip(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn run(cfg: &LabConfig) -> LabResult<Report> {
    let suite = &cfg.verify_calculus;
    let mut report = Report::new("verify-calculus");
    report.detail("config", suite)?;
    let ctx = CalculusContext::new(&cfg.quadrature);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut stats = Vec::new();

    for &d in &suite.dims {
        let grid = suite.grid.build(d)?;
        let fs = members(&grid, &suite.families)?;
        let oracle = SpectralOracle::new(&grid)?;
        let c = &mut report.checks;
        c.push(CheckRow::at_most("oracle_reconstruction", Some(d), None, oracle.residual_error(), suite.reconstruction_tol));

        for &lambda in &suite.resolvent_lambdas {
            let table = ResolventTable::new(&grid, lambda)?;
            let err = fs
                .iter()
                .map(|f| Ok(table.apply(f, KernelPart::Full).rel_l2_error(&solve_resolvent(f, lambda)?)?))
                .collect::<LabResult<Vec<_>>>()?;
            c.push(CheckRow::at_most("resolvent_vs_solve", Some(d), Some(lambda), worst(err), suite.oracle_tol));
        }

        let sq = sqrt_laplacian_batch(&fs, &ctx)?;
        let mut oracle_err = Vec::new();
        let mut energy_err = Vec::new();
        for (f, s) in fs.iter().zip(&sq.values) {
            oracle_err.push(s.rel_l2_error(&oracle.sqrt(f)?)?);
            energy_err.push((s.l2_norm() / f.derivative().l2_norm() - 1.0).abs());
        }
        c.push(CheckRow::at_most("sqrt_vs_oracle", Some(d), None, worst(oracle_err), suite.oracle_tol));
        c.push(CheckRow::at_most("energy_identity", Some(d), None, worst(energy_err), suite.energy_tol));

        let mut eig = Vec::new();
        let mut vecs = Vec::new();
        for odd in [false, true] {
            for &k in &suite.eigen_indices {
                if let Some((theta, v)) = oracle.eigenpair(odd, k) {
                    eig.push(theta.sqrt());
                    vecs.push(v);
                }
            }
        }
        let ev = sqrt_laplacian_batch(&vecs, &ctx)?;
        let err = ev.values.iter().zip(&vecs).zip(&eig).map(|((s, v), t)| Ok(s.rel_l2_error(&v.scale(*t))?));
        let err = err.collect::<LabResult<Vec<_>>>()?;
        c.push(CheckRow::at_most("eigenvector_sqrt", Some(d), None, worst(err), suite.eigen_tol));

        // ∇Δ^{-1/2} is an L² isometry; Δ^{1/2}Δ^{-1/2} = I on the mix
        let g = mode_mix(&oracle, suite, &mut rng)?;
        let inv = inv_sqrt_laplacian_batch(std::slice::from_ref(&g), &ctx)?.values.remove(0);
        let riesz = (inv.derivative().l2_norm() / g.l2_norm() - 1.0).abs();
        c.push(CheckRow::at_most("riesz_l2_isometry", Some(d), None, riesz, suite.riesz_tol));
        let back = sqrt_laplacian_batch(std::slice::from_ref(&inv), &ctx)?.values.remove(0);
        c.push(CheckRow::at_most("composition", Some(d), None, back.rel_l2_error(&g)?, suite.composition_tol));
        let inv_err = inv.rel_l2_error(&oracle.inv_sqrt(&g)?)?;
        c.push(CheckRow::at_most("inv_sqrt_vs_oracle", Some(d), None, inv_err, suite.oracle_tol));

        let thetas = oracle.eigenvalues();
        let step = (thetas.len() / 16).max(1);
        let scalar = thetas
            .iter()
            .step_by(step)
            .filter(|&&t| t > 0.0)
            .map(|&t| Ok(rel_ip(scalar_sqrt_identity(t, &cfg.quadrature)?, std::f64::consts::FRAC_PI_2 * t.sqrt())))
            .collect::<LabResult<Vec<_>>>()?;
        c.push(CheckRow::at_most(
            "scalar_identity",
            Some(d),
            None,
            worst(scalar),
            suite.scalar_tol_factor * cfg.quadrature.rel_tol,
        ));

        let fine = GridSpec { nodes: suite.identity_nodes, ..suite.grid }.build(d)?;
        let ff = members(&fine, &suite.families)?;
        let (f, g) = (&ff[0], &ff[ff.len() - 1]);
        for &lambda in &suite.identity_lambdas {
            let t = ResolventTable::new(&fine, lambda)?;
            let (rf, rg) = (t.apply(f, KernelPart::Full), t.apply(g, KernelPart::Full));
            let sa = rel_ip(rf.inner(g)?, f.inner(&rg)?);
            // ⟨f, g⟩ - λ²⟨Rf, g⟩ = Q(f, Rg); the two left terms nearly cancel
            // at large λ, so the gap is scaled by their magnitudes
            let (fg, rfg) = (f.inner(g)?, lambda * lambda * rf.inner(g)?);
            let scale = (fg.abs() + rfg.abs()).max(f64::MIN_POSITIVE);
            let dual = ((fg - rfg) - f.energy(&rg)?).abs() / scale;
            c.push(CheckRow::at_most("self_adjoint", Some(d), Some(lambda), sa, suite.identity_tol));
            c.push(CheckRow::at_most("duality", Some(d), Some(lambda), dual, suite.identity_tol));
        }
        stats.push(serde_json::json!({
            "d": d,
            "lambda_min": sq.lambda_min,
            "lambda_max": sq.lambda_max,
            "evaluations": sq.stats.evaluations,
            "max_block_error": sq.stats.max_block_error,
        }));
    }
    report.detail("quadrature", &cfg.quadrature)?;
    report.detail("quadrature_stats", stats)?;
    Ok(report)
}
