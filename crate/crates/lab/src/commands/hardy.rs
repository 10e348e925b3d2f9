//! `hardy`: Hardy ratios `‖f/|x|‖_p / ‖f'‖_p` along families, plus the
//! pointwise and weak-type probes of `𝒯`.

use brokenline::annihilation::{hardy_constant, t_operator, t_pointwise_ratios, weak_type_products};
use brokenline::calculus::CalculusContext;
use brokenline::family::{make_family, FamilyKind, FamilyParam, TestFamily};
use brokenline::{Grid, GridFunction};

use crate::config::{LabConfig, TOperatorSpec};
use crate::error::LabResult;
use crate::report::{growth, CheckRow, FamilyFlag, Report, RowFailure, ScanRow};

/// Exponent `(d-p)/p` of the extremal family; the family only exists for
/// `p < d`.
pub fn extremal_exponent(d: f64, p: f64) -> Option<f64> {
    (p < d).then(|| (d - p) / p)
}

fn norms(f: &GridFunction, p: f64) -> brokenline::Result<(f64, f64)> {
    let grid = f.grid();
    let q = GridFunction::new(grid.clone(), (0..grid.len()).map(|j| f.values()[j] / grid.radius(j)).collect())?;
    Ok((q.lp_norm(p)?, f.derivative().lp_norm(p)?))
}

fn family_for(grid: &std::sync::Arc<Grid>, kind: FamilyKind, params: &[FamilyParam], d: f64, p: f64) -> brokenline::Result<Option<TestFamily>> {
    if kind != FamilyKind::HardyExtremal {
        return make_family(kind, grid, params).map(Some);
    }
    let Some(a) = extremal_exponent(d, p) else {
        return Ok(None);
    };
    let params: Vec<FamilyParam> = params.iter().map(|q| FamilyParam::new(q.center, a)).collect();
    make_family(kind, grid, &params).map(Some)
}

pub fn run(cfg: &LabConfig) -> LabResult<Report> {
    let spec = &cfg.hardy;
    let mut report = Report::new("hardy");
    report.detail("config", spec)?;
    report.detail("growth_tol", cfg.growth_tol)?;

    for &d in &spec.dims {
        let grid = spec.grid.build(d)?;
        for &p in &spec.ps {
            for fs in &spec.families {
                let name = fs.kind.name();
                let Some(fam) = family_for(&grid, fs.kind, &fs.params, d, p)? else {
                    continue;
                };
                let mut ratios = Vec::with_capacity(fam.len());
                for (i, f) in fam.members.iter().enumerate() {
                    let (num, den) = norms(f, p).unwrap_or_else(|e| {
                        report.failures.push(RowFailure { d, p: Some(p), family: name.into(), member_index: Some(i), error: e.to_string() });
                        (f64::NAN, f64::NAN)
                    });
                    ratios.push(num / den);
                    report.rows.push(ScanRow {
                        d,
                        p,
                        family: name.into(),
                        member_index: i,
                        ratio: num / den,
                        norm_num: num,
                        norm_den: den,
                        grid_n: grid.nodes_per_branch(),
                        grid_l: grid.length(),
                        quad_tol: cfg.quadrature.rel_tol,
                        wall_ms: 0,
                    });
                }
                let flag = FamilyFlag::new(d, p, name, &ratios, cfg.growth_tol, p < d);
                if let Some(c) = hardy_constant(d, p) {
                    let label = format!("{name}_sup_over_constant");
                    report.checks.push(CheckRow::at_most(label, Some(d), None, flag.sup / c, 1.0 + spec.constant_tol));
                    if fs.kind == FamilyKind::HardyExtremal {
                        let gap = (flag.sup / c - 1.0).abs();
                        report.checks.push(CheckRow::at_most("extremal_constant_gap", Some(d), None, gap, spec.constant_tol));
                    }
                }
                report.flags.push(flag);
            }
        }
    }
    t_probes(cfg, &spec.t_operator, &mut report)?;
    Ok(report)
}

/// Per-member `sup_x |𝒯h(x)| / (|x|^β ‖h‖_{q'})` on one grid.
fn pointwise_constants(grid: &std::sync::Arc<Grid>, t: &TOperatorSpec, ctx: &CalculusContext<'_>) -> LabResult<(Vec<f64>, Vec<(GridFunction, GridFunction)>)> {
    let fam = make_family(t.family.kind, grid, &t.family.params)?;
    let mut consts = Vec::with_capacity(fam.len());
    let mut pairs = Vec::with_capacity(fam.len());
    for h in fam.members {
        let th = t_operator(&h, ctx)?;
        let r = t_pointwise_ratios(&h, &th, t.q)?;
        consts.push(r.iter().copied().fold(0.0, f64::max));
        pairs.push((h, th));
    }
    Ok((consts, pairs))
}

fn t_probes(cfg: &LabConfig, t: &TOperatorSpec, report: &mut Report) -> LabResult<()> {
    let ctx = CalculusContext::new(&cfg.quadrature);
    let mut detail = Vec::new();
    for &d in &t.dims {
        let coarse = t.grid.build(d)?;
        let fine = t.grid.refined(t.refine).build(d)?;
        let (cc, pairs) = pointwise_constants(&coarse, t, &ctx)?;
        let (cf, _) = pointwise_constants(&fine, t, &ctx)?;
        let (a, b) = (cc.iter().copied().fold(0.0, f64::max), cf.iter().copied().fold(0.0, f64::max));
        let rel = (a - b).abs() / b.max(f64::MIN_POSITIVE);
        let c = &mut report.checks;
        c.push(CheckRow::flag("t_pointwise_finite", Some(d), None, a.is_finite() && b.is_finite() && b > 0.0));
        c.push(CheckRow::at_most("t_pointwise_refinement", Some(d), None, rel, t.refine_tol));
        c.push(CheckRow::at_most("t_pointwise_family_growth", Some(d), None, growth(&cf), cfg.growth_tol));

        // weak type: thresholds from sup|𝒯h|/2 down over `weak_decades`
        let mut series = vec![0.0f64; t.weak_thresholds];
        for (h, th) in &pairs {
            let top = 0.5 * th.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let s: Vec<f64> = (0..t.weak_thresholds)
                .map(|i| top * 10f64.powf(-t.weak_decades * i as f64 / (t.weak_thresholds - 1) as f64))
                .collect();
            for (acc, v) in series.iter_mut().zip(weak_type_products(h, th, t.q, &s)?) {
                *acc = acc.max(v);
            }
        }
        let g = growth(&series);
        if t.weak_dims.contains(&d) {
            report.checks.push(CheckRow::at_most("weak_type_growth", Some(d), None, g, cfg.growth_tol));
        }
        detail.push(serde_json::json!({
            "d": d,
            "exponent": brokenline::annihilation::t_pointwise_exponent(d, t.q),
            "coarse_constants": cc,
            "fine_constants": cf,
            "weak_products": series,
            "weak_growth": g,
        }));
    }
    report.detail("t_operator", detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extremal_family_needs_subcritical_p() {
        assert_eq!(extremal_exponent(3.0, 2.0), Some(0.5));
        assert_eq!(extremal_exponent(3.0, 3.0), None);
        assert_eq!(extremal_exponent(1.5, 4.0), None);
    }
}
