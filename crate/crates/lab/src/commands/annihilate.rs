//! `annihilate`: the harmonic-part annihilation identity, its sensitivity to
//! the junction condition, gradient bounds of the corrector, and the
//! low-energy bilinear form.

use std::sync::Arc;

use brokenline::annihilation::{
    annihilation_check, bilinear_low_energy_kk, build_corrector, gradient_bound_probe, junction_perturbation, CorrectorField,
    HarmonicPart,
};
use brokenline::calculus::CalculusContext;
use brokenline::family::make_family;
use brokenline::{Grid, GridFunction};

use crate::config::{AnnihilateSpec, FamilySpec, LabConfig};
use crate::error::LabResult;
use crate::report::{growth, CheckRow, Report};

fn members(grid: &Arc<Grid>, families: &[FamilySpec]) -> LabResult<Vec<GridFunction>> {
    let mut out = Vec::new();
    for f in families {
        out.extend(make_family(f.kind, grid, &f.params)?.members);
    }
    Ok(out)
}

fn defects(fs: &[GridFunction], phi: &HarmonicPart, floor: f64) -> LabResult<Vec<f64>> {
    Ok(fs.iter().map(|f| annihilation_check(f, phi, floor)).collect::<brokenline::Result<_>>()?)
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn corrector_summary(c: &CorrectorField) -> serde_json::Value {
    serde_json::json!({
        "d": c.d,
        "lambda": c.lambda,
        "cauchy_gap": c.cauchy_gap,
        "residual": c.residual,
        "gradient_gap": c.gradient_gap,
        "limit_unstable": c.limit_unstable,
        "warnings": c.warnings,
    })
}

pub fn run(cfg: &LabConfig) -> LabResult<Report> {
    let spec = &cfg.annihilate;
    let set = &spec.settings;
    let ctx = CalculusContext::new(&cfg.quadrature);
    let mut report = Report::new("annihilate");
    report.detail("config", spec)?;
    let mut correctors = Vec::new();
    let mut table = Vec::new();

    for &d in &spec.dims {
        let coarse = spec.grid.build(d)?;
        let fine = spec.grid.refined(spec.refine).build(d)?;
        let fc = members(&coarse, &spec.families)?;
        let ff = members(&fine, &spec.families)?;
        let perturbed = fc
            .iter()
            .map(|f| Ok(junction_perturbation(f, set.perturbation, spec.perturbation_width)?))
            .collect::<LabResult<Vec<_>>>()?;
        for &lambda in &spec.lambdas {
            let uc = build_corrector(&coarse, lambda, set, &ctx)?;
            let uf = build_corrector(&fine, lambda, set, &ctx)?;
            let (pc, pf) = (HarmonicPart::new(&uc)?, HarmonicPart::new(&uf)?);
            let dc = defects(&fc, &pc, set.floor)?;
            let df = defects(&ff, &pf, set.floor)?;
            let dp = defects(&perturbed, &pc, set.floor)?;
            let shrink: Vec<f64> = dc
                .iter()
                .zip(&df)
                .map(|(&c, &f)| if f <= spec.refine_floor { 0.0 } else { f / c })
                .collect();
            let inflation: Vec<f64> = dc.iter().zip(&dp).map(|(&c, &p)| p / c).collect();
            let c = &mut report.checks;
            if uc.limit_unstable {
                // reported, never failed: the ε-limit itself is not expected to exist
                c.push(CheckRow::flag("corrector_limit_unstable", Some(d), Some(lambda), true));
            } else {
                c.push(CheckRow::at_most("defect", Some(d), Some(lambda), max(&dc), set.defect_tol));
                c.push(CheckRow::at_most("defect_refinement_ratio", Some(d), Some(lambda), max(&shrink), spec.refine_factor));
                c.push(CheckRow::at_least("perturbation_inflation", Some(d), Some(lambda), min(&inflation), set.sensitivity_factor));
                c.push(CheckRow::at_most("corrector_cauchy_gap", Some(d), Some(lambda), uc.cauchy_gap, set.cauchy_tol));
            }
            table.push(serde_json::json!({
                "d": d,
                "lambda": lambda,
                "defect_coarse": dc,
                "defect_fine": df,
                "defect_perturbed": dp,
            }));
            correctors.push(corrector_summary(&uc));
        }
    }
    report.detail("defects", table)?;
    report.detail("correctors", correctors)?;

    let mut probes = Vec::new();
    for g in &spec.gradient_probes {
        let coarse = spec.gradient_grid.build(g.d)?;
        let fine = spec.gradient_grid.refined(spec.refine).build(g.d)?;
        let r = gradient_bound_probe(&coarse, &fine, &g.deltas, &spec.gradient_lambdas, spec.gradient_samples, spec.gradient_x_max, set, &ctx)?;
        for b in r.bounds.iter().filter(|b| b.governing) {
            let name = format!("gradient_bound_{}_delta_{}", serde_json::to_value(b.branch)?.as_str().unwrap_or("?"), b.delta);
            report.checks.push(CheckRow::flag(format!("{name}_finite"), Some(g.d), None, b.finite));
            report.checks.push(CheckRow::at_most(format!("{name}_refinement"), Some(g.d), None, b.rel_change, set.refine_tol));
        }
        probes.push(r);
    }
    report.detail("gradient_probes", probes)?;

    bilinear(cfg, spec, &ctx, &mut report)?;
    Ok(report)
}

/// Two evaluation orders of `ℬ(f, f)` agree, and `|ℬ|/(‖f'‖_p‖f‖_{p'})`
/// stays bounded along the family.
fn bilinear(cfg: &LabConfig, spec: &AnnihilateSpec, ctx: &CalculusContext<'_>, report: &mut Report) -> LabResult<()> {
    let d = spec.bilinear_d;
    let p = spec.bilinear_p;
    let grid = spec.gradient_grid.build(d)?;
    let fam = make_family(spec.bilinear_family.kind, &grid, &spec.bilinear_family.params)?;
    let mut gaps = Vec::new();
    let mut consts = Vec::new();
    let mut values = Vec::new();
    for f in &fam.members {
        let b = bilinear_low_energy_kk(f, f, ctx)?;
        gaps.push(b.rel_gap);
        consts.push(b.value.abs() / (f.derivative().lp_norm(p)? * f.lp_norm(p / (p - 1.0))?));
        values.push(b);
    }
    let c = &mut report.checks;
    c.push(CheckRow::at_most("bilinear_order_gap", Some(d), None, max(&gaps), spec.bilinear_tol));
    c.push(CheckRow::at_most("bilinear_constant_growth", Some(d), None, growth(&consts), cfg.growth_tol));
    report.detail("bilinear", serde_json::json!({ "d": d, "p": p, "values": values, "constants": consts }))
}
