//! `scan-riesz` and `scan-reverse-riesz`: `‖f'‖_p` against `‖Δ^{1/2}f‖_p`
//! along a family, per `(d, p)`.

use std::time::Instant;

use brokenline::calculus::{sqrt_laplacian_batch, CalculusContext};
use brokenline::family::make_family;
use brokenline::GridFunction;

use crate::config::{LabConfig, ScanSpec};
use crate::error::LabResult;
use crate::report::{FamilyFlag, Report, RowFailure, ScanRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `‖f'‖_p / ‖Δ^{1/2}f‖_p`.
    Riesz,
    /// `‖Δ^{1/2}f‖_p / ‖f'‖_p`.
    Reverse,
}

impl Direction {
    pub fn command(self) -> &'static str {
        match self {
            Direction::Riesz => "scan-riesz",
            Direction::Reverse => "scan-reverse-riesz",
        }
    }

    /// Where the ratio is expected to stay bounded along a family.
    pub fn expected_bounded(self, d: f64, p: f64) -> bool {
        match self {
            Direction::Riesz => {
                if d > 2.0 {
                    p < d
                } else if d == 2.0 {
                    p <= 2.0
                } else {
                    p < d / (d - 1.0)
                }
            }
            Direction::Reverse => d >= 2.0 || p != d,
        }
    }

    /// `p = d` is excluded from the reverse scan when `1 < d < 2`.
    pub fn skips(self, d: f64, p: f64) -> bool {
        self == Direction::Reverse && d < 2.0 && p == d
    }
}

pub fn run(cfg: &LabConfig, dir: Direction) -> LabResult<Report> {
    let spec: &ScanSpec = match dir {
        Direction::Riesz => &cfg.scan_riesz,
        Direction::Reverse => &cfg.scan_reverse_riesz,
    };
    let mut report = Report::new(dir.command());
    report.detail("config", spec)?;
    report.detail("quadrature", &cfg.quadrature)?;
    report.detail("growth_tol", cfg.growth_tol)?;
    let ctx = CalculusContext::new(&cfg.quadrature);
    let family = spec.family.kind.name();

    for &d in &spec.dims {
        let grid = spec.grid.build(d)?;
        let fam = make_family(spec.family.kind, &grid, &spec.family.params)?;
        let start = Instant::now();
        let sqrt = sqrt_laplacian_batch(&fam.members, &ctx);
        let elapsed = start.elapsed();
        let sqrt = match sqrt {
            Ok(s) => s.values,
            Err(e) => {
                report.failures.push(RowFailure { d, p: None, family: family.into(), member_index: None, error: e.to_string() });
                continue;
            }
        };
        let wall_ms = if cfg.record_timing { elapsed.as_millis() as u64 / fam.len() as u64 } else { 0 };
        let grads: Vec<GridFunction> = fam.members.iter().map(GridFunction::derivative).collect();

        for &p in &spec.ps {
            if dir.skips(d, p) {
                continue;
            }
            let mut ratios = Vec::with_capacity(fam.len());
            for (i, (s, g)) in sqrt.iter().zip(&grads).enumerate() {
                let norms = s.lp_norm(p).and_then(|a| Ok((a, g.lp_norm(p)?)));
                let (ns, ng) = match norms {
                    Ok(v) => v,
                    Err(e) => {
                        report.failures.push(RowFailure { d, p: Some(p), family: family.into(), member_index: Some(i), error: e.to_string() });
                        (f64::NAN, f64::NAN)
                    }
                };
                let (num, den) = match dir {
                    Direction::Riesz => (ng, ns),
                    Direction::Reverse => (ns, ng),
                };
                let ratio = num / den;
                if !ratio.is_finite() && !ns.is_nan() {
                    report.failures.push(RowFailure {
                        d,
                        p: Some(p),
                        family: family.into(),
                        member_index: Some(i),
                        error: format!("non-finite ratio {num:e}/{den:e}"),
                    });
                }
                ratios.push(ratio);
                report.rows.push(ScanRow {
                    d,
                    p,
                    family: family.into(),
                    member_index: i,
                    ratio,
                    norm_num: num,
                    norm_den: den,
                    grid_n: grid.nodes_per_branch(),
                    grid_l: grid.length(),
                    quad_tol: cfg.quadrature.rel_tol,
                    wall_ms,
                });
            }
            report.flags.push(FamilyFlag::new(d, p, family, &ratios, cfg.growth_tol, dir.expected_bounded(d, p)));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_expectations() {
        let r = Direction::Riesz;
        assert!(r.expected_bounded(3.0, 2.5) && !r.expected_bounded(3.0, 4.0));
        assert!(r.expected_bounded(2.0, 2.0) && !r.expected_bounded(2.0, 2.5));
        assert!(r.expected_bounded(1.5, 2.5) && !r.expected_bounded(1.5, 3.5));
    }

    #[test]
    fn reverse_skips_critical_exponent() {
        let r = Direction::Reverse;
        assert!(r.skips(1.5, 1.5) && !r.skips(3.0, 3.0));
        assert!(r.expected_bounded(3.0, 8.0) && r.expected_bounded(1.5, 4.0));
    }
}
