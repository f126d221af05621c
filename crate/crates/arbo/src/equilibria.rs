//! Endemic equilibria of the uncontrolled system: the quadratic in the human
//! force of infection, back-substitution, case classification and scans.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ArboError, Result};
use crate::model::{basic_field, derive_constants, force_of_infection_v, inf_norm, ModelParams, StateVector};
use crate::model::{EGG, EH, EV, IH, IV, LARVA, PUPA, RH, SH, SV};
use crate::stability::{equilibrium_stability, StabilityVerdict};
use crate::thresholds::{bifurcation_thresholds, dfe_components, dfe_trivial, vector_block_dfe, ThresholdReport};

/// Relative residual tolerance for accepted equilibria.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Roots at or below this value are not endemic.
pub const POSITIVITY_FLOOR: f64 = 1e-14;
/// Relative discriminant band treated as a double root.
pub const DOUBLE_ROOT_BAND: f64 = 1e-10;

/// Coefficients of `d2 λ² + d1 λ + d0 = 0` in the human force of infection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EndemicQuadratic {
    /// Leading coefficient (always negative).
    pub d2: f64,
    /// Linear coefficient.
    pub d1: f64,
    /// Constant coefficient.
    pub d0: f64,
    /// `d1² − 4 d2 d0`.
    pub discriminant: f64,
}

/// Builds the endemic quadratic; requires `N > 1`.
pub fn endemic_quadratic(p: &ModelParams) -> Result<EndemicQuadratic> {
    let t = bifurcation_thresholds(p);
    if !t.vectors_persist {
        return Err(ArboError::Threshold { n: t.n });
    }
    Ok(quadratic_from(p, &t))
}

fn quadratic_from(p: &ModelParams, t: &ThresholdReport) -> EndemicQuadratic {
    let k = derive_constants(p);
    let q = k.k3 * k.k3 * k.k4 * k.k4 * k.k8;
    let d2 = -k.k2 * (k.k10 * p.a * p.mu_h * p.beta_vh + k.k2 * k.k8);
    let d1 = q * p.mu_h * (t.r0 * t.r0 - t.r_c * t.r_c);
    let d0 = q * p.mu_h * p.mu_h * (t.r0 * t.r0 - 1.0);
    EndemicQuadratic { d2, d1, d0, discriminant: d1 * d1 - 4.0 * d2 * d0 }
}

impl EndemicQuadratic {
    /// Real roots in ascending order, using the cancellation-free form.
    pub fn real_roots(&self) -> Vec<f64> {
        let (d2, d1, d0) = (self.d2, self.d1, self.d0);
        let scale = (d1 * d1).max((4.0 * d2 * d0).abs());
        if scale > 0.0 && self.discriminant.abs() <= DOUBLE_ROOT_BAND * scale {
            return vec![-d1 / (2.0 * d2)];
        }
        if self.discriminant < 0.0 {
            return Vec::new();
        }
        let sq = self.discriminant.sqrt();
        let q = -0.5 * (d1 + if d1 >= 0.0 { sq } else { -sq });
        if q == 0.0 {
            return vec![0.0];
        }
        let mut r = vec![q / d2, d0 / q];
        r.sort_by(f64::total_cmp);
        r
    }

    /// Roots above the positivity floor.
    pub fn positive_roots(&self) -> Vec<f64> {
        self.real_roots().into_iter().filter(|l| *l > POSITIVITY_FLOOR).collect()
    }
}

/// Number of endemic equilibria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// No endemic equilibrium.
    NoEndemic,
    /// Exactly one endemic equilibrium.
    Unique,
    /// Two endemic equilibria.
    Two,
}

impl Classification {
    /// Number of endemic points in this class.
    pub fn count(self) -> usize {
        match self {
            Classification::NoEndemic => 0,
            Classification::Unique => 1,
            Classification::Two => 2,
        }
    }
}

/// Existence case that applies, with its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExistenceCase {
    /// Number of endemic points.
    pub class: Classification,
    /// Case label, e.g. `"(iii)(a)"`.
    pub label: &'static str,
}

/// Classifies a parameter set by the `R0`, `R_c`, `R_1b`, `R_2b` inequalities.
pub fn existence_case(t: &ThresholdReport) -> ExistenceCase {
    use Classification::*;
    let r0 = t.r0;
    if !t.vectors_persist {
        return ExistenceCase { class: NoEndemic, label: "N<=1" };
    }
    if r0 > 1.0 {
        return ExistenceCase { class: Unique, label: "(i)" };
    }
    if r0 == 1.0 {
        return if t.r_c < 1.0 {
            ExistenceCase { class: Unique, label: "(ii)(a)" }
        } else {
            ExistenceCase { class: NoEndemic, label: "(ii)(b)" }
        };
    }
    if t.two_endemic_by_r0() {
        return ExistenceCase { class: Two, label: "(iii)(a)" };
    }
    if t.r_c < r0 && (Some(r0) == t.r_1b || Some(r0) == t.r_2b) {
        return ExistenceCase { class: Unique, label: "(iii)(b)" };
    }
    ExistenceCase { class: NoEndemic, label: "(iii)(c)" }
}

/// An endemic equilibrium with its force of infection and stability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndemicPoint {
    /// Equilibrium state.
    pub state: StateVector,
    /// Human force of infection at the equilibrium.
    pub lambda_h: f64,
    /// Infinity norm of the field at the state.
    pub residual: f64,
    /// Local stability.
    pub stability: StabilityVerdict,
}

/// Every equilibrium of one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumSet {
    /// Trivial equilibrium (no vectors).
    pub dfe_trivial: StateVector,
    /// Biological disease-free equilibrium.
    pub dfe_biological: StateVector,
    /// Stability of the biological disease-free equilibrium.
    pub dfe_stability: StabilityVerdict,
    /// Endemic equilibria sorted by increasing force of infection.
    pub endemic: Vec<EndemicPoint>,
    /// Existence case.
    pub case: ExistenceCase,
    /// Quadratic the roots come from.
    pub quadratic: EndemicQuadratic,
    /// Threshold quantities.
    pub thresholds: ThresholdReport,
    /// Roots that were discarded and why.
    pub rejected: Vec<String>,
}

/// Back-substitutes a human force of infection into the equilibrium relations.
pub fn endemic_state(p: &ModelParams, lambda_h: f64) -> Result<StateVector> {
    let k = derive_constants(p);
    let [nv, egg, larva, pupa] = vector_block_dfe(p)?;
    let sh = p.lambda_h / (p.mu_h + lambda_h);
    let eh = lambda_h * sh / k.k3;
    let ih = p.gamma_h * eh / k.k4;
    let rh = p.sigma * ih / p.mu_h;
    let mut x = [0.0; 10];
    x[SH] = sh;
    x[EH] = eh;
    x[IH] = ih;
    x[RH] = rh;
    let lambda_v = force_of_infection_v(&x, p)?;
    let sv = p.theta * pupa / (lambda_v + k.k8);
    let ev = lambda_v * sv / k.k9;
    x[SV] = sv;
    x[EV] = ev;
    x[IV] = p.gamma_v * ev / k.k8;
    x[EGG] = egg;
    x[LARVA] = larva;
    x[PUPA] = pupa;
    debug_assert!((x[SV] + x[EV] + x[IV] - nv).abs() <= 1e-9 * nv.max(1.0));
    Ok(x)
}

/// Relative residual `‖f(x)‖∞ / max(1, ‖x‖∞)`.
pub fn relative_residual(x: &StateVector, p: &ModelParams) -> Result<f64> {
    Ok(inf_norm(&basic_field(x, p)?) / inf_norm(x).max(1.0))
}

/// Computes and classifies every equilibrium; requires `N > 1`.
pub fn solve_endemic(p: &ModelParams) -> Result<EquilibriumSet> {
    let thresholds = bifurcation_thresholds(p);
    if !thresholds.vectors_persist {
        return Err(ArboError::Threshold { n: thresholds.n });
    }
    let quadratic = quadratic_from(p, &thresholds);
    let dfe_biological = dfe_components(p)?;
    let mut endemic = Vec::new();
    let mut rejected = Vec::new();
    for lambda_h in quadratic.positive_roots() {
        let state = endemic_state(p, lambda_h)?;
        if state.iter().any(|c| c.is_nan() || *c <= 0.0) {
            rejected.push(format!("root {lambda_h:e} gives a non-positive component"));
            continue;
        }
        let rel = relative_residual(&state, p)?;
        if rel >= RESIDUAL_TOL {
            return Err(ArboError::Residual { residual: rel, tol: RESIDUAL_TOL });
        }
        endemic.push(EndemicPoint {
            residual: inf_norm(&basic_field(&state, p)?),
            stability: equilibrium_stability(&state, p)?,
            state,
            lambda_h,
        });
    }
    Ok(EquilibriumSet {
        dfe_trivial: dfe_trivial(p),
        dfe_stability: equilibrium_stability(&dfe_biological, p)?,
        dfe_biological,
        endemic,
        case: existence_case(&thresholds),
        quadratic,
        thresholds,
        rejected,
    })
}

/// Result of the linear equilibrium equation without disease-induced death.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaZeroReport {
    /// Coefficient `p1 > 0`.
    pub p1: f64,
    /// Coefficient `p0`.
    pub p0: f64,
    /// `true` when no endemic root exists (`R0 ≤ 1`).
    pub no_endemic: bool,
    /// Root `−p0/p1` when `R0 ≥ 1`.
    pub lambda_root: Option<f64>,
}

/// Linear equilibrium analysis for `δ = 0`; requires `N > 1`.
pub fn delta_zero_check(p: &ModelParams) -> Result<DeltaZeroReport> {
    if p.delta != 0.0 {
        return Err(ArboError::Precondition(format!("delta must be 0, got {}", p.delta)));
    }
    let t = bifurcation_thresholds(p);
    if !t.vectors_persist {
        return Err(ArboError::Threshold { n: t.n });
    }
    let k = derive_constants(p);
    let p1 = p.mu_b * p.lambda_h * k.k9 * (k.k10 * p.a * p.mu_h * p.beta_vh + k.k3 * k.k8 * (p.mu_h + p.sigma));
    let p0 = -p.mu_h * k.k3 * k.k4 * k.k8 * k.k9 * p.mu_b * p.lambda_h * (t.r0 * t.r0 - 1.0);
    let no_endemic = t.r0 <= 1.0;
    let lambda_root = if t.r0 >= 1.0 { Some(if t.r0 == 1.0 { 0.0 } else { -p0 / p1 }) } else { None };
    Ok(DeltaZeroReport { p1, p0, no_endemic, lambda_root })
}

/// One equilibrium branch at one grid value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    /// Value of the scanned parameter.
    pub param_value: f64,
    /// Basic reproduction number at this value.
    pub r0: f64,
    /// 0 for the disease-free branch, 1 for the lower and 2 for the upper endemic branch.
    pub branch_id: usize,
    /// Infectious humans.
    pub i_h: f64,
    /// Infectious vectors.
    pub i_v: f64,
    /// Local stability.
    pub stable: bool,
    /// Field residual (infinity norm).
    pub residual: f64,
    /// Failure message when the point could not be computed.
    pub error: Option<String>,
}

/// Grid of `steps` points spanning `[lo, hi]` inclusive.
pub fn scan_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![lo];
    }
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

fn scan_point(p: &ModelParams, name: &str, value: f64) -> Vec<ScanRow> {
    let failed = |msg: String| {
        vec![ScanRow {
            param_value: value,
            r0: f64::NAN,
            branch_id: 0,
            i_h: f64::NAN,
            i_v: f64::NAN,
            stable: false,
            residual: f64::NAN,
            error: Some(msg),
        }]
    };
    let q = match p.with(name, value).and_then(ModelParams::validated) {
        Ok(q) => q,
        Err(e) => return failed(e.to_string()),
    };
    let set = match solve_endemic(&q) {
        Ok(s) => s,
        Err(e) => return failed(e.to_string()),
    };
    let r0 = set.thresholds.r0;
    let mut rows = vec![ScanRow {
        param_value: value,
        r0,
        branch_id: 0,
        i_h: 0.0,
        i_v: 0.0,
        stable: set.dfe_stability.stable(),
        residual: inf_norm(&basic_field(&set.dfe_biological, &q).unwrap_or([f64::NAN; 10])),
        error: None,
    }];
    let offset = if set.endemic.len() == 1 { 2 } else { 1 };
    for (i, e) in set.endemic.iter().enumerate() {
        rows.push(ScanRow {
            param_value: value,
            r0,
            branch_id: i + offset,
            i_h: e.state[IH],
            i_v: e.state[IV],
            stable: e.stability.stable(),
            residual: e.residual,
            error: None,
        });
    }
    rows
}

/// Equilibrium branches over a parameter grid; failures become flagged rows.
pub fn bifurcation_scan(p: &ModelParams, param_name: &str, range: (f64, f64), steps: usize) -> Result<Vec<ScanRow>> {
    p.get(param_name)?;
    let grid = scan_grid(range.0, range.1, steps);
    Ok(grid.par_iter().map(|v| scan_point(p, param_name, *v)).collect::<Vec<_>>().into_iter().flatten().collect())
}

/// Smallest and largest grid values at which two endemic branches coexist.
pub fn two_branch_span(rows: &[ScanRow]) -> Option<(f64, f64)> {
    let mut values: Vec<f64> = rows.iter().filter(|r| r.branch_id == 1).map(|r| r.param_value).collect();
    values.sort_by(f64::total_cmp);
    Some((*values.first()?, *values.last()?))
}
