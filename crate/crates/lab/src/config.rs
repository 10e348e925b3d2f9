//! Run configuration. Every tolerance used by a subcommand lives here with
//! its default; a config file only needs the fields it changes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use brokenline::annihilation::AnnihilationSettings;
use brokenline::calculus::QuadratureScheme;
use brokenline::family::{geometric_centers, FamilyKind, FamilyParam};
use brokenline::oracle::MAX_ORACLE_NODES;
use brokenline::{Dimension, Grid, Spacing};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub length: f64,
    pub nodes: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self, d: f64) -> LabResult<Arc<Grid>> {
        Ok(Grid::new(Dimension::new(d)?, self.length, self.nodes, self.spacing)?)
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self { nodes: self.nodes * factor, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub params: Vec<FamilyParam>,
}

impl FamilySpec {
    fn ladder(kind: FamilyKind, start: f64, ratio: f64, count: usize, scale: impl Fn(f64) -> f64) -> Self {
        Self { kind, params: geometric_centers(start, ratio, count, scale) }
    }

    fn explicit(kind: FamilyKind, params: &[(f64, f64)]) -> Self {
        Self { kind, params: params.iter().map(|&(c, s)| FamilyParam::new(c, s)).collect() }
    }

    /// The smooth `S_0` members sized for an `L = 50` grid.
    pub fn default_s0() -> Vec<Self> {
        vec![
            Self::explicit(FamilyKind::Dilate, &[(4.0, 1.5), (10.0, 3.0), (20.0, 5.0)]),
            Self::explicit(FamilyKind::Junction, &[(0.5, 2.0), (-1.0, 4.0)]),
            Self::explicit(FamilyKind::HardyStress, &[(4.0, 1.0), (8.0, 1.0)]),
            Self::explicit(FamilyKind::HarmonicCutoff, &[(5.0, 1.0), (12.0, 1.0)]),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSuite {
    pub dims: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Kernel assembly is refused below this `λ`.
    pub lambda_floor: f64,
    /// Random `(x, y)` pairs per `(d, λ)` for symmetry and reflection.
    pub pairs: usize,
    /// Pairs are drawn with `1 ≤ |x|, |y| ≤ pair_radius`.
    pub pair_radius: f64,
    pub symmetry_tol: f64,
    /// Points `y` at which the derivative jump across `x = y` is measured.
    pub jump_points: Vec<f64>,
    /// Relative step of the one-sided difference stencils.
    pub jump_step: f64,
    pub jump_tol: f64,
    /// Decay is fitted over `λ·dist ∈ [decay_from, decay_to]`.
    pub decay_from: f64,
    pub decay_to: f64,
    pub decay_min_rate: f64,
    /// `λ` range and sample count of the coefficient-bound suite.
    pub ab_lambda_min: f64,
    pub ab_lambda_max: f64,
    pub ab_samples: usize,
    /// Largest accepted max/min of `|A|/scale`, `|B|/scale` over the range.
    pub ab_spread_max: f64,
    /// Asymptotic-regime tables of `k`, `l`: accepted max/min ratio spread.
    pub regime_spread_max: f64,
    /// Solved `A`, `B` against their closed forms.
    pub closed_form_tol: f64,
}

impl Default for KernelSuite {
    fn default() -> Self {
        Self {
            dims: vec![1.5, 2.0, 2.5, 3.0, 4.0],
            lambdas: vec![0.05, 0.3, 1.0, 4.0],
            lambda_floor: 1e-8,
            pairs: 100,
            pair_radius: 20.0,
            symmetry_tol: 1e-12,
            jump_points: vec![1.5, 3.0, 7.0],
            jump_step: 1e-5,
            jump_tol: 1e-6,
            decay_from: 5.0,
            decay_to: 30.0,
            decay_min_rate: 0.9,
            ab_lambda_min: 1e-3,
            ab_lambda_max: 1.0,
            ab_samples: 25,
            ab_spread_max: 25.0,
            regime_spread_max: 10.0,
            closed_form_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalculusSuite {
    pub dims: Vec<f64>,
    pub grid: GridSpec,
    pub families: Vec<FamilySpec>,
    /// `λ` values of the resolvent-vs-matrix-solve check.
    pub resolvent_lambdas: Vec<f64>,
    pub oracle_tol: f64,
    pub energy_tol: f64,
    pub reconstruction_tol: f64,
    /// Oracle eigenpairs `(parity, index)` tested through the quadrature.
    pub eigen_indices: Vec<usize>,
    pub eigen_tol: f64,
    /// Eigenvectors mixed (with seeded coefficients) for the Riesz `L²` check.
    pub riesz_modes: usize,
    pub riesz_mode_pool: usize,
    pub riesz_tol: f64,
    pub composition_tol: f64,
    /// Finer grid for the self-adjointness and duality identities, whose
    /// discretization error is `O(h²)`.
    pub identity_nodes: usize,
    pub identity_lambdas: Vec<f64>,
    pub identity_tol: f64,
    /// Tolerance of the per-eigenvalue scalar identity, relative to
    /// `quadrature.rel_tol`.
    pub scalar_tol_factor: f64,
}

impl Default for CalculusSuite {
    fn default() -> Self {
        Self {
            dims: vec![1.5, 2.0, 2.5, 3.0, 4.0],
            grid: GridSpec { length: 50.0, nodes: 2000, spacing: Spacing::default() },
            families: FamilySpec::default_s0(),
            resolvent_lambdas: vec![0.1, 0.5, 2.0],
            oracle_tol: 1e-3,
            energy_tol: 1e-3,
            reconstruction_tol: 1e-8,
            eigen_indices: vec![0, 3, 10],
            eigen_tol: 1e-3,
            riesz_modes: 4,
            riesz_mode_pool: 20,
            riesz_tol: 2e-2,
            composition_tol: 1e-3,
            identity_nodes: 16000,
            identity_lambdas: vec![0.1, 0.3, 1.0],
            identity_tol: 1e-6,
            scalar_tol_factor: 10.0,
        }
    }
}

/// A `(d, p)` scan over one family on one grid per `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub dims: Vec<f64>,
    pub ps: Vec<f64>,
    pub grid: GridSpec,
    pub family: FamilySpec,
}

impl ScanSpec {
    pub fn riesz_default() -> Self {
        Self {
            dims: vec![3.0, 2.0, 1.5],
            ps: vec![1.5, 2.0, 2.5, 3.5, 4.0],
            grid: GridSpec { length: 4e8, nodes: 4000, spacing: Spacing::Geometric { max_ratio: 1e8 } },
            family: FamilySpec::ladder(FamilyKind::HarmonicCutoff, 1e3, 10.0, 6, |_| 1.0),
        }
    }

    pub fn reverse_default() -> Self {
        Self {
            dims: vec![3.0, 1.5],
            ps: vec![1.2, 1.5, 2.0, 4.0, 8.0],
            grid: GridSpec { length: 1e6, nodes: 4000, spacing: Spacing::Geometric { max_ratio: 1e6 } },
            family: FamilySpec::ladder(FamilyKind::Dilate, 4.0, 4.0, 6, |c| c / 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TOperatorSpec {
    pub dims: Vec<f64>,
    pub q: f64,
    pub grid: GridSpec,
    pub family: FamilySpec,
    /// Node multiplier of the refined grid.
    pub refine: usize,
    /// Thresholds `s` run from `sup|𝒯h|/2` down over this many decades.
    pub weak_decades: f64,
    pub weak_thresholds: usize,
    /// Dimensions at which the weak-type product is required to stay bounded.
    pub weak_dims: Vec<f64>,
    /// Largest accepted relative change of the pointwise constant.
    pub refine_tol: f64,
}

impl Default for TOperatorSpec {
    fn default() -> Self {
        Self {
            dims: vec![3.0, 1.5],
            q: 2.0,
            grid: GridSpec { length: 1e6, nodes: 2000, spacing: Spacing::Geometric { max_ratio: 1e5 } },
            family: FamilySpec::ladder(FamilyKind::HardyStress, 4.0, 4.0, 5, |_| 1.0),
            refine: 2,
            weak_decades: 3.0,
            weak_thresholds: 13,
            weak_dims: vec![1.5],
            refine_tol: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardySpec {
    pub dims: Vec<f64>,
    pub ps: Vec<f64>,
    pub grid: GridSpec,
    /// `hardy_extremal` members get the exponent `(d-p)/p` whatever their
    /// configured scale, and are only run for `p < d`.
    pub families: Vec<FamilySpec>,
    /// Accepted relative distance of the family sup from `p/(d-p)`.
    pub constant_tol: f64,
    pub t_operator: TOperatorSpec,
}

impl Default for HardySpec {
    fn default() -> Self {
        Self {
            dims: vec![3.0, 1.5],
            ps: vec![1.0, 2.0, 3.0, 4.0],
            grid: GridSpec { length: 1e11, nodes: 8000, spacing: Spacing::Geometric { max_ratio: 1e10 } },
            families: vec![
                FamilySpec::ladder(FamilyKind::HardyExtremal, 1e4, 10.0, 6, |_| 0.0),
                // zero rise width: the plateau reaches the junction
                FamilySpec::ladder(FamilyKind::HardyStress, 4.0, 100.0, 6, |_| 0.0),
            ],
            constant_tol: 0.05,
            t_operator: TOperatorSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientProbeSpec {
    pub d: f64,
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnihilateSpec {
    pub dims: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub grid: GridSpec,
    pub refine: usize,
    pub families: Vec<FamilySpec>,
    /// Half-width of the junction bump that pushes `f` out of `S_0`.
    pub perturbation_width: f64,
    /// A refinement counts as shrinking when the defect falls by this factor,
    /// or below `refine_floor`.
    pub refine_factor: f64,
    pub refine_floor: f64,
    pub settings: AnnihilationSettings,
    pub gradient_probes: Vec<GradientProbeSpec>,
    pub gradient_grid: GridSpec,
    pub gradient_lambdas: Vec<f64>,
    pub gradient_samples: usize,
    pub gradient_x_max: f64,
    /// Low-energy bilinear form: dimension, exponent and relative tolerance
    /// between the two evaluation orders.
    pub bilinear_d: f64,
    pub bilinear_p: f64,
    pub bilinear_tol: f64,
    pub bilinear_family: FamilySpec,
}

impl Default for AnnihilateSpec {
    fn default() -> Self {
        Self {
            dims: vec![2.0, 2.5, 3.0, 4.0],
            lambdas: vec![0.1, 0.3, 0.7],
            grid: GridSpec { length: 50.0, nodes: 4000, spacing: Spacing::default() },
            refine: 2,
            families: FamilySpec::default_s0(),
            perturbation_width: 0.5,
            refine_factor: 0.55,
            refine_floor: 1e-12,
            settings: AnnihilationSettings::default(),
            gradient_probes: vec![
                GradientProbeSpec { d: 3.0, deltas: vec![0.0, 0.5, 1.0] },
                GradientProbeSpec { d: 2.5, deltas: vec![0.25, 0.75] },
            ],
            gradient_grid: GridSpec { length: 50.0, nodes: 2000, spacing: Spacing::default() },
            gradient_lambdas: (0..9).map(|i| 10f64.powf(-2.0 + 0.25 * i as f64)).collect(),
            gradient_samples: 64,
            gradient_x_max: 40.0,
            bilinear_d: 3.0,
            bilinear_p: 1.5,
            bilinear_tol: 1e-6,
            bilinear_family: FamilySpec::explicit(FamilyKind::Dilate, &[(4.0, 1.5), (8.0, 2.0), (14.0, 3.0), (24.0, 5.0)]),
        }
    }
}

/// Top-level configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Record wall-clock times. Off by default so reruns are byte-identical.
    pub record_timing: bool,
    /// A family sup counts as bounded when the last quarter of the family
    /// exceeds the rest by less than this fraction.
    pub growth_tol: f64,
    pub quadrature: QuadratureScheme,
    pub verify_kernel: KernelSuite,
    pub verify_calculus: CalculusSuite,
    pub scan_riesz: ScanSpec,
    pub scan_reverse_riesz: ScanSpec,
    pub hardy: HardySpec,
    pub annihilate: AnnihilateSpec,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            seed: 20_240_917,
            out_dir: PathBuf::from("lab-out"),
            threads: 0,
            record_timing: false,
            growth_tol: 0.05,
            quadrature: QuadratureScheme::default(),
            verify_kernel: KernelSuite::default(),
            verify_calculus: CalculusSuite::default(),
            scan_riesz: ScanSpec::riesz_default(),
            scan_reverse_riesz: ScanSpec::reverse_default(),
            hardy: HardySpec::default(),
            annihilate: AnnihilateSpec::default(),
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> LabResult<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::Config(msg()))
    }
}

fn check_dims(what: &str, dims: &[f64]) -> LabResult<()> {
    check(!dims.is_empty(), || format!("{what}: dimension list is empty"))?;
    for &d in dims {
        check(d.is_finite() && d > 1.0, || format!("{what}: dimension must exceed 1, got {d}"))?;
    }
    Ok(())
}

fn check_ps(what: &str, ps: &[f64]) -> LabResult<()> {
    check(!ps.is_empty(), || format!("{what}: exponent list is empty"))?;
    for &p in ps {
        check(p.is_finite() && p >= 1.0, || format!("{what}: exponents must be >= 1, got {p}"))?;
    }
    Ok(())
}

fn check_family(what: &str, f: &FamilySpec) -> LabResult<()> {
    check(!f.params.is_empty(), || format!("{what}: family {} is empty", f.kind))
}

fn check_positive(what: &str, v: f64) -> LabResult<()> {
    check(v.is_finite() && v > 0.0, || format!("{what} must be positive and finite, got {v}"))
}

fn check_grid(what: &str, g: &GridSpec) -> LabResult<()> {
    // building a grid validates L, n and the spacing
    Grid::new(Dimension::new(2.0)?, g.length, g.nodes, g.spacing)
        .map(|_| ())
        .map_err(|e| LabError::Config(format!("{what}: {e}")))
}

impl LabConfig {
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
    }

    /// Structural checks done before any computation.
    pub fn validate(&self) -> LabResult<()> {
        self.quadrature.validate().map_err(|e| LabError::Config(format!("quadrature: {e}")))?;
        check(self.growth_tol > 0.0, || "growth_tol must be positive".into())?;

        let k = &self.verify_kernel;
        check_dims("verify_kernel", &k.dims)?;
        check(!k.lambdas.is_empty(), || "verify_kernel: λ list is empty".into())?;
        check_positive("verify_kernel.lambda_floor", k.lambda_floor)?;
        for &l in k.lambdas.iter().chain([k.ab_lambda_min, k.ab_lambda_max].iter()) {
            check(l.is_finite() && l >= k.lambda_floor, || {
                format!("verify_kernel: λ = {l} is below the floor {}", k.lambda_floor)
            })?;
        }
        check(k.ab_lambda_min < k.ab_lambda_max && k.ab_samples >= 2, || "verify_kernel: empty coefficient-bound range".into())?;
        check(k.pairs > 0 && k.pair_radius > 1.0, || "verify_kernel: need pairs > 0 and pair_radius > 1".into())?;
        for &y in &k.jump_points {
            check(y > 1.0, || format!("verify_kernel: jump point {y} must exceed 1"))?;
        }
        check(k.decay_from > 0.0 && k.decay_to > k.decay_from, || "verify_kernel: bad decay window".into())?;
        for v in [k.symmetry_tol, k.jump_step, k.jump_tol, k.decay_min_rate, k.ab_spread_max, k.regime_spread_max, k.closed_form_tol] {
            check_positive("verify_kernel tolerance", v)?;
        }

        let c = &self.verify_calculus;
        check_dims("verify_calculus", &c.dims)?;
        check_grid("verify_calculus.grid", &c.grid)?;
        check(c.grid.nodes * 2 - 1 <= MAX_ORACLE_NODES, || {
            format!("verify_calculus: {} nodes per branch exceeds the oracle limit of {MAX_ORACLE_NODES} grid nodes", c.grid.nodes)
        })?;
        check(!c.families.is_empty(), || "verify_calculus: no families".into())?;
        for f in &c.families {
            check_family("verify_calculus", f)?;
        }
        check(c.riesz_modes >= 1 && c.riesz_modes <= c.riesz_mode_pool, || "verify_calculus: riesz_modes must lie in 1..=riesz_mode_pool".into())?;
        check(c.identity_nodes >= brokenline::grid::MIN_NODES, || "verify_calculus: identity_nodes too small".into())?;
        for l in c.resolvent_lambdas.iter().chain(&c.identity_lambdas) {
            check_positive("verify_calculus λ", *l)?;
        }

        for (name, s) in [("scan_riesz", &self.scan_riesz), ("scan_reverse_riesz", &self.scan_reverse_riesz)] {
            check_dims(name, &s.dims)?;
            check_ps(name, &s.ps)?;
            check_grid(name, &s.grid)?;
            check_family(name, &s.family)?;
        }

        let h = &self.hardy;
        check_dims("hardy", &h.dims)?;
        check_ps("hardy", &h.ps)?;
        check_grid("hardy.grid", &h.grid)?;
        check(!h.families.is_empty(), || "hardy: no families".into())?;
        for f in &h.families {
            check_family("hardy", f)?;
        }
        let t = &h.t_operator;
        check_dims("hardy.t_operator", &t.dims)?;
        check(t.q > 1.0 && t.q.is_finite(), || format!("hardy.t_operator: q must lie in (1, ∞), got {}", t.q))?;
        check_grid("hardy.t_operator.grid", &t.grid)?;
        check_family("hardy.t_operator", &t.family)?;
        check(t.refine >= 2 && t.weak_thresholds >= 2 && t.weak_decades > 0.0, || "hardy.t_operator: bad refinement or thresholds".into())?;

        let a = &self.annihilate;
        check_dims("annihilate", &a.dims)?;
        check(!a.lambdas.is_empty(), || "annihilate: λ list is empty".into())?;
        for &l in &a.lambdas {
            check(l > 0.0 && l <= 1.0, || format!("annihilate: λ must lie in (0, 1], got {l}"))?;
        }
        check_grid("annihilate.grid", &a.grid)?;
        check_grid("annihilate.gradient_grid", &a.gradient_grid)?;
        check(a.refine >= 2, || "annihilate: refine must be >= 2".into())?;
        for f in a.families.iter().chain(std::iter::once(&a.bilinear_family)) {
            check_family("annihilate", f)?;
        }
        a.settings.validate().map_err(|e| LabError::Config(format!("annihilate.settings: {e}")))?;
        for g in &a.gradient_probes {
            check(g.d > 2.0, || format!("annihilate: gradient probes need d > 2, got {}", g.d))?;
            check(!g.deltas.is_empty(), || "annihilate: empty δ list".into())?;
        }
        check(a.gradient_x_max > 1.0 && a.gradient_x_max < a.gradient_grid.length, || "annihilate: gradient_x_max must lie in (1, L)".into())?;
        check(a.bilinear_d > 1.0 && a.bilinear_p > 1.0, || "annihilate: bilinear d and p must exceed 1".into())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = LabConfig::default();
        c.validate().unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: LabConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c: LabConfig = serde_json::from_str(r#"{"seed": 3, "verify_kernel": {"dims": [3.0]}}"#).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.verify_kernel.dims, vec![3.0]);
        assert_eq!(c.verify_kernel.pairs, 100);
        assert_eq!(c.scan_riesz, ScanSpec::riesz_default());
    }

    #[test]
    fn validation_errors() {
        let mut c = LabConfig::default();
        c.verify_kernel.lambdas = vec![1e-9];
        assert!(matches!(c.validate(), Err(LabError::Config(m)) if m.contains("floor")));

        let mut c = LabConfig::default();
        c.scan_reverse_riesz.family.params.clear();
        assert!(c.validate().is_err());

        let mut c = LabConfig::default();
        c.scan_riesz.dims = vec![0.5];
        assert!(c.validate().is_err());

        let mut c = LabConfig::default();
        c.verify_calculus.grid.nodes = 6000;
        assert!(c.validate().is_err());

        assert!(serde_json::from_str::<LabConfig>(r#"{"sed": 3}"#).is_err());
    }
}
