//! Closed-form epidemic thresholds and disease-free equilibria, including
//! the saddle-node bounds in the transmission probability `β_hv`.

use serde::Serialize;

use crate::error::{ArboError, Result};
use crate::model::{derive_constants, DerivedConstants, ModelParams, StateVector, EGG, LARVA, PUPA, SH, SV};

/// Net reproductive number of the vector population, `μ_b θ l s/(k5 k6 k7 k8)`.
pub fn net_reproductive_number(p: &ModelParams) -> f64 {
    let k = derive_constants(p);
    p.mu_b * p.theta * p.l * p.s / (k.k5 * k.k6 * k.k7 * k.k8)
}

/// Trivial equilibrium with humans only, `(Λ_h/μ_h, 0, …, 0)`.
pub fn dfe_trivial(p: &ModelParams) -> StateVector {
    let mut x = [0.0; 10];
    x[SH] = p.nh0();
    x
}

/// Total adult vectors at the biological disease-free equilibrium.
pub fn vector_total_dfe(p: &ModelParams) -> Result<f64> {
    let n = net_reproductive_number(p);
    if n <= 1.0 {
        return Err(ArboError::Threshold { n });
    }
    let k = derive_constants(p);
    Ok(p.cap_e * p.cap_l * k.k5 * k.k6 * (n - 1.0) / (p.mu_b * (p.cap_e * p.s + k.k6 * p.cap_l)))
}

/// Aquatic and adult-vector totals `(N_v, E, L, P)` shared by every
/// equilibrium with persistent vectors.
pub fn vector_block_dfe(p: &ModelParams) -> Result<[f64; 4]> {
    let nv = vector_total_dfe(p)?;
    let n = net_reproductive_number(p);
    let k = derive_constants(p);
    let pupa = k.k8 * nv / p.theta;
    let larva = k.k7 * pupa / p.l;
    let egg = p.cap_e * p.cap_l * k.k5 * k.k6 * k.k7 * k.k8 * (n - 1.0)
        / (p.s * (p.mu_b * p.l * p.cap_l * p.theta + k.k5 * k.k7 * k.k8 * p.cap_e));
    Ok([nv, egg, larva, pupa])
}

/// Biological disease-free equilibrium (vectors present, no infection).
pub fn dfe_components(p: &ModelParams) -> Result<StateVector> {
    let [nv, egg, larva, pupa] = vector_block_dfe(p)?;
    let mut x = dfe_trivial(p);
    x[SV] = nv;
    x[EGG] = egg;
    x[LARVA] = larva;
    x[PUPA] = pupa;
    Ok(x)
}

/// Infections of vectors caused by one infected human, `a β_vh k10 N_v⁰/(k3 k4 N_h⁰)`.
pub fn k_vh(p: &ModelParams) -> Result<f64> {
    let k = derive_constants(p);
    Ok(p.a * p.beta_vh * k.k10 * vector_total_dfe(p)? / (k.k3 * k.k4 * p.nh0()))
}

/// Infections of humans caused by one infected vector, `a β_hv k11/(k8 k9)`.
pub fn k_hv(p: &ModelParams) -> f64 {
    let k = derive_constants(p);
    p.a * p.beta_hv * k.k11 / (k.k8 * k.k9)
}

/// Basic reproduction number `sqrt(K_vh·K_hv)`; requires `N > 1`.
pub fn basic_reproduction_number(p: &ModelParams) -> Result<f64> {
    Ok((k_vh(p)? * k_hv(p)).sqrt())
}

/// Closed-form thresholds for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    /// Net reproductive number.
    #[serde(rename = "N")]
    pub n: f64,
    /// `true` when `N > 1`; otherwise `r0` is reported as 0.
    pub vectors_persist: bool,
    /// Basic reproduction number.
    #[serde(rename = "R0")]
    pub r0: f64,
    /// Vectors infected per infected human.
    pub k_vh: f64,
    /// Humans infected per infected vector.
    pub k_hv: f64,
    /// Threshold above which `d1 > 0`.
    #[serde(rename = "R_c")]
    pub r_c: f64,
    /// Lower saddle-node threshold in `R0`, present when `ψ ≤ 0`.
    pub r_1b: Option<f64>,
    /// Upper saddle-node threshold in `R0`, present when `ψ ≤ 0`.
    pub r_2b: Option<f64>,
    /// Sign-determining quantity `k10 a μ_h β_vh − δ γ_h k8`.
    pub psi: f64,
    /// Coefficients `(ρ0, ρ1, ρ2)` of `ρ2 x² + ρ1 x + ρ0` in `x = R0²`,
    /// whose roots are `R_1b²` and `R_2b²`.
    pub rho: [f64; 3],
    /// Value of `β_hv` giving `R0 = 1`.
    pub beta_star: Option<f64>,
    /// Value of `β_hv` giving `R0 = R_c`.
    pub beta_bar: Option<f64>,
    /// Smaller saddle-node root in `β_hv`, present when `ψ < 0`.
    pub beta_minus: Option<f64>,
    /// Larger saddle-node root in `β_hv`, present when `ψ < 0`.
    pub beta_plus: Option<f64>,
    /// Saddle-node quadratic coefficients `(sn_c2, sn_c1, sn_c0)` in `β_hv`.
    pub sn_coefficients: Option<[f64; 3]>,
}

/// Computes every threshold of the endemic-equilibrium analysis.
pub fn bifurcation_thresholds(p: &ModelParams) -> ThresholdReport {
    let k: DerivedConstants = derive_constants(p);
    let n = net_reproductive_number(p);
    let c = k.k10 * p.a * p.mu_h * p.beta_vh;
    let dg = p.delta * p.gamma_h;
    let psi = c - dg * k.k8;
    let r_c = ((2.0 * k.k8 * k.k2 + c) / (k.k3 * k.k4 * k.k8)).sqrt();

    let (r_1b, r_2b) = if psi <= 0.0 {
        let scale = 1.0 / (k.k3 * k.k4 * k.k8.sqrt());
        let a = (dg * (c + k.k2 * k.k8)).sqrt();
        let b = (-k.k2 * psi).sqrt();
        (Some(scale * (a - b).abs()), Some(scale * (a + b)))
    } else {
        (None, None)
    };

    let q = k.k3 * k.k3 * k.k4 * k.k4;
    let mh2 = p.mu_h * p.mu_h;
    let rho = [
        q * k.k10 * k.k10 * p.a * p.a * mh2 * mh2 * p.beta_vh * p.beta_vh,
        2.0 * q * k.k8 * mh2 * (k.k2 * (c - k.k8 * dg) - (c + k.k8 * k.k2) * dg),
        q * q * k.k8 * k.k8 * mh2,
    ];

    let khv = k_hv(p);
    let mut report = ThresholdReport {
        n,
        vectors_persist: n > 1.0,
        r0: 0.0,
        k_vh: 0.0,
        k_hv: khv,
        r_c,
        r_1b,
        r_2b,
        psi,
        rho,
        beta_star: None,
        beta_bar: None,
        beta_minus: None,
        beta_plus: None,
        sn_coefficients: None,
    };
    let Ok(nv0) = vector_total_dfe(p) else {
        return report;
    };
    let nh0 = p.nh0();
    let kvh = p.a * p.beta_vh * k.k10 * nv0 / (k.k3 * k.k4 * nh0);
    report.k_vh = kvh;
    report.r0 = (kvh * khv).sqrt();

    let denom = p.a * p.a * p.beta_vh * k.k10 * k.k11 * nv0;
    if denom > 0.0 {
        let beta_star = k.k3 * k.k4 * k.k8 * k.k9 * nh0 / denom;
        report.beta_star = Some(beta_star);
        report.beta_bar = Some((c + 2.0 * k.k2 * k.k8) * k.k9 * nh0 / denom);
        report.sn_coefficients = Some([rho[2] / (beta_star * beta_star), rho[1] / beta_star, rho[0]]);
        if psi < 0.0 {
            let front = k.k9 * nh0 / (k.k3 * k.k4 * k.k10 * k.k11 * p.a * p.a * nv0 * p.beta_vh);
            let a = (dg * (c + k.k2 * k.k8)).sqrt();
            let b = (-k.k2 * psi).sqrt();
            report.beta_minus = Some(front * (a - b) * (a - b));
            report.beta_plus = Some(front * (a + b) * (a + b));
        }
    }
    report
}

impl ThresholdReport {
    /// Two endemic equilibria by the `R0` inequalities:
    /// `R_c < R0 < min(1, R_1b)` or `max(R_c, R_2b) < R0 < 1`.
    pub fn two_endemic_by_r0(&self) -> bool {
        let (Some(r1), Some(r2)) = (self.r_1b, self.r_2b) else {
            return false;
        };
        let r0 = self.r0;
        self.vectors_persist && ((self.r_c < r0 && r0 < r1.min(1.0)) || (self.r_c.max(r2) < r0 && r0 < 1.0))
    }

    /// Two endemic equilibria by the `β_hv` inequalities:
    /// `β̄ < β < min(β₋, β*)` or `max(β̄, β₊) < β < β*`.
    pub fn two_endemic_by_beta(&self, beta_hv: f64) -> bool {
        let (Some(bs), Some(bb), Some(bm), Some(bp)) = (self.beta_star, self.beta_bar, self.beta_minus, self.beta_plus)
        else {
            return false;
        };
        (bb < beta_hv && beta_hv < bm.min(bs)) || (bb.max(bp) < beta_hv && beta_hv < bs)
    }

    /// Open `β_hv` intervals on which two endemic equilibria exist.
    pub fn two_endemic_beta_intervals(&self) -> Vec<(f64, f64)> {
        let (Some(bs), Some(bb), Some(bm), Some(bp)) = (self.beta_star, self.beta_bar, self.beta_minus, self.beta_plus)
        else {
            return Vec::new();
        };
        [(bb, bm.min(bs)), (bb.max(bp), bs)].into_iter().filter(|(lo, hi)| lo < hi).collect()
    }
}
