//! Parameters, derived constants, state layout and the right-hand sides of
//! the uncontrolled and controlled transmission systems.

use serde::{Deserialize, Serialize};

use crate::autodiff::Scalar;
use crate::error::{ArboError, Result};

/// Number of compartments.
pub const N_STATE: usize = 10;
/// Number of control functions.
pub const N_CONTROL: usize = 5;

/// Index of susceptible humans.
pub const SH: usize = 0;
/// Index of exposed humans.
pub const EH: usize = 1;
/// Index of infectious humans.
pub const IH: usize = 2;
/// Index of recovered humans.
pub const RH: usize = 3;
/// Index of susceptible adult vectors.
pub const SV: usize = 4;
/// Index of exposed adult vectors.
pub const EV: usize = 5;
/// Index of infectious adult vectors.
pub const IV: usize = 6;
/// Index of eggs.
pub const EGG: usize = 7;
/// Index of larvae.
pub const LARVA: usize = 8;
/// Index of pupae.
pub const PUPA: usize = 9;

/// Compartment names in state order.
pub const STATE_NAMES: [&str; N_STATE] = ["S_h", "E_h", "I_h", "R_h", "S_v", "E_v", "I_v", "E", "L", "P"];

/// The ten compartments `(S_h, E_h, I_h, R_h, S_v, E_v, I_v, E, L, P)`.
pub type StateVector = [f64; N_STATE];

/// Control intensities `(u1, …, u5)`, each in `[0, 1]`.
pub type ControlValues = [f64; N_CONTROL];

/// Biological and demographic rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Human recruitment rate (humans/day).
    #[serde(rename = "Lambda_h")]
    pub lambda_h: f64,
    /// Human natural mortality (1/day).
    pub mu_h: f64,
    /// Bites per vector per day.
    pub a: f64,
    /// Vector to human transmission probability.
    pub beta_hv: f64,
    /// Human to vector transmission probability.
    pub beta_vh: f64,
    /// Progression from exposed to infectious humans (1/day).
    pub gamma_h: f64,
    /// Disease-induced death rate (1/day).
    pub delta: f64,
    /// Human recovery rate (1/day).
    pub sigma: f64,
    /// Relative infectiousness of exposed humans.
    pub eta_h: f64,
    /// Relative infectiousness of exposed vectors.
    pub eta_v: f64,
    /// Adult vector mortality (1/day).
    pub mu_v: f64,
    /// Progression from exposed to infectious vectors (1/day).
    pub gamma_v: f64,
    /// Pupa to adult maturation rate (1/day).
    pub theta: f64,
    /// Eggs per deposit per day.
    pub mu_b: f64,
    /// Egg carrying capacity.
    #[serde(rename = "Gamma_E")]
    pub cap_e: f64,
    /// Larva carrying capacity.
    #[serde(rename = "Gamma_L")]
    pub cap_l: f64,
    /// Egg mortality (1/day).
    #[serde(rename = "mu_E")]
    pub mu_e: f64,
    /// Larva mortality (1/day).
    #[serde(rename = "mu_L")]
    pub mu_l: f64,
    /// Pupa mortality (1/day).
    #[serde(rename = "mu_P")]
    pub mu_p: f64,
    /// Egg to larva transfer rate (1/day).
    pub s: f64,
    /// Larva to pupa transfer rate (1/day).
    pub l: f64,
}

/// Names of the model parameters as used in configuration files.
pub const PARAM_NAMES: [&str; 21] = [
    "Lambda_h", "mu_h", "a", "beta_hv", "beta_vh", "gamma_h", "delta", "sigma", "eta_h", "eta_v", "mu_v", "gamma_v",
    "theta", "mu_b", "Gamma_E", "Gamma_L", "mu_E", "mu_L", "mu_P", "s", "l",
];

impl ModelParams {
    /// Baseline values used by the optimal-control experiments.
    pub fn baseline() -> Self {
        Self {
            lambda_h: 2.5,
            mu_h: 1.0 / (67.0 * 365.0),
            a: 1.0,
            beta_hv: 0.75,
            beta_vh: 0.75,
            gamma_h: 1.0 / 14.0,
            delta: 1e-3,
            sigma: 0.1428,
            eta_h: 0.35,
            eta_v: 0.35,
            mu_v: 1.0 / 30.0,
            gamma_v: 1.0 / 21.0,
            theta: 0.08,
            mu_b: 6.0,
            cap_e: 10_000.0,
            cap_l: 5_000.0,
            mu_e: 0.2,
            mu_l: 0.4,
            mu_p: 0.4,
            s: 0.7,
            l: 0.5,
        }
    }

    /// Checks every bound and lists all violations.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for name in PARAM_NAMES {
            let v = self.get(name).expect("listed name");
            if !v.is_finite() {
                errs.push(format!("{name} = {v} is not finite"));
                continue;
            }
            match name {
                "Lambda_h" | "mu_h" | "mu_v" | "theta" | "s" | "l" | "Gamma_E" | "Gamma_L" => {
                    if v <= 0.0 {
                        errs.push(format!("{name} = {v} must be > 0"));
                    }
                }
                "eta_h" | "eta_v" => {
                    if !(0.0..1.0).contains(&v) {
                        errs.push(format!("{name} = {v} must lie in [0, 1)"));
                    }
                }
                _ => {
                    if v < 0.0 {
                        errs.push(format!("{name} = {v} must be >= 0"));
                    }
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ArboError::InvalidParams(errs))
        }
    }

    /// Returns this parameter set after validation.
    pub fn validated(self) -> Result<Self> {
        self.validate().map(|()| self)
    }

    /// Reads a parameter by its configuration name.
    pub fn get(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "Lambda_h" => self.lambda_h,
            "mu_h" => self.mu_h,
            "a" => self.a,
            "beta_hv" => self.beta_hv,
            "beta_vh" => self.beta_vh,
            "gamma_h" => self.gamma_h,
            "delta" => self.delta,
            "sigma" => self.sigma,
            "eta_h" => self.eta_h,
            "eta_v" => self.eta_v,
            "mu_v" => self.mu_v,
            "gamma_v" => self.gamma_v,
            "theta" => self.theta,
            "mu_b" => self.mu_b,
            "Gamma_E" => self.cap_e,
            "Gamma_L" => self.cap_l,
            "mu_E" => self.mu_e,
            "mu_L" => self.mu_l,
            "mu_P" => self.mu_p,
            "s" => self.s,
            "l" => self.l,
            _ => return Err(ArboError::UnknownParameter(name.to_string())),
        })
    }

    /// Writes a parameter by its configuration name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "Lambda_h" => &mut self.lambda_h,
            "mu_h" => &mut self.mu_h,
            "a" => &mut self.a,
            "beta_hv" => &mut self.beta_hv,
            "beta_vh" => &mut self.beta_vh,
            "gamma_h" => &mut self.gamma_h,
            "delta" => &mut self.delta,
            "sigma" => &mut self.sigma,
            "eta_h" => &mut self.eta_h,
            "eta_v" => &mut self.eta_v,
            "mu_v" => &mut self.mu_v,
            "gamma_v" => &mut self.gamma_v,
            "theta" => &mut self.theta,
            "mu_b" => &mut self.mu_b,
            "Gamma_E" => &mut self.cap_e,
            "Gamma_L" => &mut self.cap_l,
            "mu_E" => &mut self.mu_e,
            "mu_L" => &mut self.mu_l,
            "mu_P" => &mut self.mu_p,
            "s" => &mut self.s,
            "l" => &mut self.l,
            _ => return Err(ArboError::UnknownParameter(name.to_string())),
        };
        *slot = value;
        Ok(())
    }

    /// Returns a copy with one parameter replaced.
    pub fn with(mut self, name: &str, value: f64) -> Result<Self> {
        self.set(name, value)?;
        Ok(self)
    }

    /// Total human population at the disease-free state, `Λ_h/μ_h`.
    pub fn nh0(&self) -> f64 {
        self.lambda_h / self.mu_h
    }
}

/// Efficacy constants of the five interventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlParams {
    /// Waning rate of vaccine-induced immunity (1/day).
    pub omega: f64,
    /// Efficacy of individual protection.
    pub alpha1: f64,
    /// Efficacy of treatment.
    pub alpha2: f64,
    /// Adulticide killing efficacy (1/day).
    pub c_m: f64,
    /// Larvicide-induced egg mortality (1/day).
    pub eta1: f64,
    /// Larvicide-induced larva mortality (1/day).
    pub eta2: f64,
}

impl ControlParams {
    /// Baseline values used by the optimal-control experiments.
    pub fn baseline() -> Self {
        Self { omega: 0.05, alpha1: 0.5, alpha2: 0.5, c_m: 0.2, eta1: 0.001, eta2: 0.3 }
    }

    /// All efficacies zero.
    pub fn zero() -> Self {
        Self { omega: 0.0, alpha1: 0.0, alpha2: 0.0, c_m: 0.0, eta1: 0.0, eta2: 0.0 }
    }

    /// Checks nonnegativity and the unit bounds on the two efficacies.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("omega", self.omega),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("c_m", self.c_m),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
        ] {
            if !v.is_finite() || v < 0.0 {
                errs.push(format!("{name} = {v} must be finite and >= 0"));
            }
        }
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2)] {
            if v > 1.0 {
                errs.push(format!("{name} = {v} must be <= 1"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ArboError::InvalidParams(errs))
        }
    }
}

/// Aggregated rate constants `k1..k11`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// `μ_h`
    pub k1: f64,
    /// `k3·k4 − δ·γ_h`
    pub k2: f64,
    /// `μ_h + γ_h`
    pub k3: f64,
    /// `μ_h + δ + σ`
    pub k4: f64,
    /// `s + μ_E`
    pub k5: f64,
    /// `l + μ_L`
    pub k6: f64,
    /// `θ + μ_P`
    pub k7: f64,
    /// `μ_v`
    pub k8: f64,
    /// `μ_v + γ_v`
    pub k9: f64,
    /// `η_h·k4 + γ_h`
    pub k10: f64,
    /// `η_v·k8 + γ_v`
    pub k11: f64,
}

/// Computes the aggregated constants.
pub fn derive_constants(p: &ModelParams) -> DerivedConstants {
    let k3 = p.mu_h + p.gamma_h;
    let k4 = p.mu_h + p.delta + p.sigma;
    let k8 = p.mu_v;
    DerivedConstants {
        k1: p.mu_h,
        k2: k3 * k4 - p.delta * p.gamma_h,
        k3,
        k4,
        k5: p.s + p.mu_e,
        k6: p.l + p.mu_l,
        k7: p.theta + p.mu_p,
        k8,
        k9: p.mu_v + p.gamma_v,
        k10: p.eta_h * k4 + p.gamma_h,
        k11: p.eta_v * k8 + p.gamma_v,
    }
}

impl DerivedConstants {
    /// Alternative closed form `μ_h·k4 + γ_h(μ_h + σ)` of `k2`.
    pub fn k2_alt(p: &ModelParams) -> f64 {
        let k4 = p.mu_h + p.delta + p.sigma;
        p.mu_h * k4 + p.gamma_h * (p.mu_h + p.sigma)
    }
}

fn human_total(x: &StateVector) -> Result<f64> {
    let nh = x[SH] + x[EH] + x[IH] + x[RH];
    if nh == 0.0 {
        Err(ArboError::ZeroPopulation)
    } else {
        Ok(nh)
    }
}

/// Force of infection on humans, `a·β_hv·(η_v E_v + I_v)/N_h`.
pub fn force_of_infection_h(x: &StateVector, p: &ModelParams) -> Result<f64> {
    let nh = human_total(x)?;
    Ok(p.a * p.beta_hv * (p.eta_v * x[EV] + x[IV]) / nh)
}

/// Force of infection on vectors, `a·β_vh·(η_h E_h + I_h)/N_h`.
pub fn force_of_infection_v(x: &StateVector, p: &ModelParams) -> Result<f64> {
    let nh = human_total(x)?;
    Ok(p.a * p.beta_vh * (p.eta_h * x[EH] + x[IH]) / nh)
}

/// Controlled right-hand side over a generic scalar with `β_hv` as an input.
pub(crate) fn controlled_field_t<T: Scalar>(
    x: &[T; N_STATE],
    u: &ControlValues,
    p: &ModelParams,
    c: &ControlParams,
    beta_hv: T,
) -> [T; N_STATE] {
    let k = |v: f64| T::from(v);
    let nh = x[SH] + x[EH] + x[IH] + x[RH];
    let nv = x[SV] + x[EV] + x[IV];
    let foi_h = k(p.a) * beta_hv * (k(p.eta_v) * x[EV] + x[IV]) / nh;
    let foi_v = k(p.a * p.beta_vh) * (k(p.eta_h) * x[EH] + x[IH]) / nh;
    let protect = 1.0 - c.alpha1 * u[1];
    let treat = c.alpha2 * u[2];
    let kill = c.c_m * u[3];
    let inf_h = k(protect) * foi_h * x[SH];
    let inf_v = k(protect) * foi_v * x[SV];
    [
        k(p.lambda_h) - (k(protect) * foi_h + k(p.mu_h + u[0])) * x[SH] + k(c.omega * u[0]) * x[RH],
        inf_h - k(p.mu_h + p.gamma_h) * x[EH],
        k(p.gamma_h) * x[EH] - k(p.mu_h + (1.0 - treat) * p.delta + p.sigma + treat) * x[IH],
        k(p.sigma + treat) * x[IH] + k(u[0]) * x[SH] - k(p.mu_h + c.omega * u[0]) * x[RH],
        k(p.theta) * x[PUPA] - inf_v - k(p.mu_v + kill) * x[SV],
        inf_v - k(p.mu_v + p.gamma_v + kill) * x[EV],
        k(p.gamma_v) * x[EV] - k(p.mu_v + kill) * x[IV],
        k(p.mu_b) * (k(1.0) - x[EGG] / k(p.cap_e)) * nv - k(p.s + p.mu_e + c.eta1 * u[4]) * x[EGG],
        k(p.s) * x[EGG] * (k(1.0) - x[LARVA] / k(p.cap_l)) - k(p.l + p.mu_l + c.eta2 * u[4]) * x[LARVA],
        k(p.l) * x[LARVA] - k(p.theta + p.mu_p) * x[PUPA],
    ]
}

/// Uncontrolled right-hand side over a generic scalar with `β_hv` as an input.
pub(crate) fn basic_field_t<T: Scalar>(x: &[T; N_STATE], p: &ModelParams, beta_hv: T) -> [T; N_STATE] {
    controlled_field_t(x, &[0.0; N_CONTROL], p, &ControlParams::zero(), beta_hv)
}

/// Right-hand side of the uncontrolled system.
pub fn basic_field(x: &StateVector, p: &ModelParams) -> Result<StateVector> {
    human_total(x)?;
    Ok(basic_field_t(x, p, p.beta_hv))
}

/// Right-hand side of the controlled system.
pub fn controlled_field(x: &StateVector, u: &ControlValues, p: &ModelParams, c: &ControlParams) -> Result<StateVector> {
    human_total(x)?;
    Ok(controlled_field_t(x, u, p, c, p.beta_hv))
}

/// Infinity norm of a vector.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_closed_forms_agree() {
        let p = ModelParams::baseline();
        let d = derive_constants(&p);
        assert!(((d.k2 - DerivedConstants::k2_alt(&p)) / d.k2).abs() < 1e-14);
    }

    #[test]
    fn baseline_constants() {
        let d = derive_constants(&ModelParams::baseline());
        assert!((d.k5 - 0.9).abs() < 1e-15);
        assert!((d.k6 - 0.9).abs() < 1e-15);
        assert!((d.k7 - 0.48).abs() < 1e-15);
        assert!((d.k8 - 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_rates() {
        let mut p = ModelParams::baseline();
        p.delta = 0.0;
        p.sigma = 0.0;
        p.gamma_h = 0.0;
        let d = derive_constants(&p);
        assert_eq!(d.k4, p.mu_h);
        assert!((d.k2 - p.mu_h * p.mu_h).abs() < 1e-24);
        assert!((d.k10 - p.eta_h * p.mu_h).abs() < 1e-20);
    }

    #[test]
    fn validation_lists_every_violation() {
        let mut p = ModelParams::baseline();
        p.mu_h = 0.0;
        p.eta_v = 1.0;
        p.sigma = -1.0;
        match p.validate() {
            Err(ArboError::InvalidParams(v)) => assert_eq!(v.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn get_set_roundtrip() {
        let mut p = ModelParams::baseline();
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            p.set(name, i as f64 + 0.5).unwrap();
            assert_eq!(p.get(name).unwrap(), i as f64 + 0.5);
        }
        assert!(p.get("nope").is_err());
    }

    #[test]
    fn zero_population_is_an_error() {
        let x = [0.0; N_STATE];
        let p = ModelParams::baseline();
        assert_eq!(basic_field(&x, &p), Err(ArboError::ZeroPopulation));
        assert_eq!(force_of_infection_h(&x, &p), Err(ArboError::ZeroPopulation));
    }
}
