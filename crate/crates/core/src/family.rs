//! Canonical test functions in `S_0`: smooth, compactly supported, zero at
//! the junction.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// `exp(1/(t²-1))` on `(-1,1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (t * t - 1.0)).exp()
    }
}

/// Smooth step: 0 for `t ≤ 0`, 1 for `t ≥ 1`, `C^∞` in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `ψ((x - c)/s)` on the positive branch.
    Dilate,
    /// `(s/w) ψ((s - c)/w)` in the junction coordinate `s = sign(x)(|x| - 1)`;
    /// needs `|c| < w` so the support straddles the junction.
    Junction,
    /// Even, rises on `[1,1+s]`, equals 1 on `[1+s,n]`, decays like
    /// `log(2n/|x|)/log 2` on `[n,2n]`. `center = n`, `scale = s`. With
    /// `s = 0` the plateau runs through the junction, so the member leaves
    /// `S_0`.
    HardyStress,
    /// Truncated `Δ_d`-harmonic function `sign(x)∫_1^{|x|} t^{1-d} dt`, cut
    /// off smoothly on `[R,2R]`. `center = R`.
    HarmonicCutoff,
    /// Odd, `|x|^{-a} sin(π log|x| / log N)` on `[1,N]`. `center = N`,
    /// `scale = a`.
    /// Has a kink at `|x| = N`, so it is kept out of the oracle comparisons.
    HardyExtremal,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Dilate,
        FamilyKind::Junction,
        FamilyKind::HardyStress,
        FamilyKind::HarmonicCutoff,
        FamilyKind::HardyExtremal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Dilate => "dilate",
            FamilyKind::Junction => "junction",
            FamilyKind::HardyStress => "hardy_stress",
            FamilyKind::HarmonicCutoff => "harmonic_cutoff",
            FamilyKind::HardyExtremal => "hardy_extremal",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParam {
    pub center: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl FamilyParam {
    pub fn new(center: f64, scale: f64) -> Self {
        Self { center, scale }
    }
}

#[derive(Debug, Clone)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub params: Vec<FamilyParam>,
    pub members: Vec<GridFunction>,
}

impl TestFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Closed-form profile of a family member at signed coordinate `x`.
pub fn profile(kind: FamilyKind, d: f64, param: FamilyParam, x: f64) -> f64 {
    let r = x.abs();
    let FamilyParam { center: c, scale } = param;
    match kind {
        FamilyKind::Dilate => {
            if x > 0.0 {
                bump((r - c) / scale)
            } else {
                0.0
            }
        }
        FamilyKind::Junction => {
            let s = x.signum() * (r - 1.0);
            s / scale * bump((s - c) / scale)
        }
        FamilyKind::HardyStress => {
            let n = c;
            if r <= 1.0 + scale {
                if scale > 0.0 {
                    smooth_step((r - 1.0) / scale)
                } else {
                    1.0
                }
            } else if r <= n {
                1.0
            } else {
                // log-scale transition n → 2n
                1.0 - smooth_step((r / n).ln() / std::f64::consts::LN_2)
            }
        }
        FamilyKind::HarmonicCutoff => {
            let big_r = c;
            let h = if (d - 2.0).abs() < 1e-12 {
                r.ln()
            } else {
                -(((2.0 - d) * r.ln()).exp_m1()) / (d - 2.0)
            };
            x.signum() * h * (1.0 - smooth_step(r / big_r - 1.0))
        }
        FamilyKind::HardyExtremal => {
            let big_n = c;
            if r >= big_n {
                0.0
            } else {
                let a = scale;
                x.signum() * r.powf(-a) * (std::f64::consts::PI * r.ln() / big_n.ln()).sin()
            }
        }
    }
}

/// Outermost radius at which the member can be non-zero.
fn outer_radius(kind: FamilyKind, param: FamilyParam) -> f64 {
    let FamilyParam { center: c, scale } = param;
    match kind {
        FamilyKind::Dilate => c + scale,
        FamilyKind::Junction => 1.0 + c.abs() + scale,
        FamilyKind::HardyStress => 2.0 * c,
        FamilyKind::HarmonicCutoff => 2.0 * c,
        FamilyKind::HardyExtremal => c,
    }
}

fn validate(kind: FamilyKind, param: FamilyParam) -> std::result::Result<(), String> {
    let FamilyParam { center: c, scale } = param;
    if !c.is_finite() || !scale.is_finite() {
        return Err("non-finite parameter".into());
    }
    match kind {
        FamilyKind::Dilate if scale <= 0.0 || c - scale < 1.0 => {
            Err(format!("bump [{}, {}] must lie in |x| >= 1", c - scale, c + scale))
        }
        FamilyKind::Junction if scale <= 0.0 || c.abs() >= scale => {
            Err(format!("junction member needs |center| < scale, got ({c}, {scale})"))
        }
        FamilyKind::HardyStress if scale < 0.0 || c < 1.0 + scale || c < 2.0 => {
            Err(format!("need rise width >= 0 and plateau end >= max(2, 1 + width), got ({c}, {scale})"))
        }
        FamilyKind::HarmonicCutoff if c <= 1.0 => Err(format!("cutoff radius must exceed 1, got {c}")),
        FamilyKind::HardyExtremal if c <= 1.0 || scale < 0.0 => {
            Err(format!("need N > 1 and exponent >= 0, got ({c}, {scale})"))
        }
        _ => Ok(()),
    }
}

/// Samples every member of a family on `grid`. Supports must stay at least
/// one node spacing inside `±L`.
pub fn make_family(kind: FamilyKind, grid: &Arc<Grid>, params: &[FamilyParam]) -> Result<TestFamily> {
    let radii = grid.radii();
    let limit = radii[radii.len() - 2];
    let d = grid.d();
    let mut members = Vec::with_capacity(params.len());
    for (i, &param) in params.iter().enumerate() {
        validate(kind, param).map_err(|reason| Error::SupportOverflow { member: i, reason })?;
        let outer = outer_radius(kind, param);
        if outer > limit {
            return Err(Error::SupportOverflow {
                member: i,
                reason: format!("outer radius {outer} exceeds L minus one spacing ({limit})"),
            });
        }
        let mut f = GridFunction::from_fn(grid.clone(), |x| profile(kind, d, param, x)).into_values();
        // members meant for S_0 vanish at the junction up to rounding
        let j = grid.junction();
        if f[j].abs() < 1e-12 {
            f[j] = 0.0;
        }
        members.push(GridFunction::new(grid.clone(), f)?);
    }
    Ok(TestFamily { kind, params: params.to_vec(), members })
}

/// Geometric ladder `start·ratio^k`, `k < count`, for family centers.
pub fn geometric_centers(start: f64, ratio: f64, count: usize, scale: impl Fn(f64) -> f64) -> Vec<FamilyParam> {
    (0..count)
        .map(|k| {
            let c = start * ratio.powi(k as i32);
            FamilyParam::new(c, scale(c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Dimension, Spacing};

    fn grid() -> Arc<Grid> {
        Grid::new(Dimension::new(3.0).unwrap(), 50.0, 2000, Spacing::Uniform).unwrap()
    }

    #[test]
    fn dilate_support() {
        let g = grid();
        let fam = make_family(FamilyKind::Dilate, &g, &[FamilyParam::new(5.0, 1.0)]).unwrap();
        let f = &fam.members[0];
        for j in 0..g.len() {
            let x = g.coord(j);
            let v = f.values()[j];
            if !(4.0 < x && x < 6.0) {
                assert_eq!(v, 0.0, "x={x}");
            }
        }
        assert!(f.values()[g.junction() + 4 * 40] > 0.0);
    }

    #[test]
    fn hardy_stress_member() {
        let g = grid();
        let fam = make_family(FamilyKind::HardyStress, &g, &[FamilyParam::new(8.0, 1.0)]).unwrap();
        let f = &fam.members[0];
        for j in 0..g.len() {
            let r = g.radius(j);
            let v = f.values()[j];
            if r <= 1.0 || r >= 16.0 {
                assert_eq!(v, 0.0);
            }
            if (2.0..=8.0).contains(&r) {
                assert_eq!(v, 1.0);
            }
        }
    }

    #[test]
    fn plateau_through_junction() {
        let g = grid();
        let fam = make_family(FamilyKind::HardyStress, &g, &[FamilyParam::new(8.0, 0.0)]).unwrap();
        let f = &fam.members[0];
        assert_eq!(f.junction_value(), 1.0);
        assert!(!f.in_s0(1e-6));
        assert!(make_family(FamilyKind::HardyStress, &g, &[FamilyParam::new(3.0, 2.5)]).is_err());
    }

    #[test]
    fn every_family_is_in_s0() {
        let g = grid();
        let cases = [
            (FamilyKind::Dilate, FamilyParam::new(10.0, 2.0)),
            (FamilyKind::Junction, FamilyParam::new(0.3, 1.0)),
            (FamilyKind::HardyStress, FamilyParam::new(4.0, 1.0)),
            (FamilyKind::HarmonicCutoff, FamilyParam::new(10.0, 1.0)),
            (FamilyKind::HardyExtremal, FamilyParam::new(40.0, 0.5)),
        ];
        for (kind, param) in cases {
            let fam = make_family(kind, &g, &[param]).unwrap();
            assert!(fam.members[0].in_s0(0.0), "{kind}");
            assert!(fam.members[0].l2_norm() > 0.0, "{kind}");
        }
    }

    #[test]
    fn overflow_rejected() {
        let g = grid();
        let err = make_family(FamilyKind::Dilate, &g, &[FamilyParam::new(5.0, 1.0), FamilyParam::new(49.5, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::SupportOverflow { member: 1, .. }));
        assert!(make_family(FamilyKind::Junction, &g, &[FamilyParam::new(2.0, 1.0)]).is_err());
        assert!(make_family(FamilyKind::HardyStress, &g, &[FamilyParam::new(30.0, 1.0)]).is_err());
    }

    #[test]
    fn names_round_trip() {
        for k in FamilyKind::ALL {
            assert_eq!(k.name().parse::<FamilyKind>().unwrap(), k);
        }
        assert!("nope".parse::<FamilyKind>().is_err());
    }
}
