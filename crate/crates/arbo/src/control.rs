//! Pontryagin optimality system for the five-control problem: objective,
//! Hamiltonian, adjoint field, control characterisation and the
//! forward-backward sweep.

use serde::{Deserialize, Serialize};

use crate::error::{ArboError, Result};
use crate::model::{
    controlled_field, ControlParams, ControlValues, ModelParams, StateVector, EGG, EH, EV, IH, IV, LARVA, N_CONTROL,
    N_STATE, RH, SH, SV,
};
use crate::ode::{rk4_backward, rk4_forward, trapezoid, TimeGrid, Trajectory};

/// Objective weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    /// Weight of infectious humans.
    #[serde(rename = "D1")]
    pub d1: f64,
    /// Weight of adult vectors.
    #[serde(rename = "D2")]
    pub d2: f64,
    /// Weight of eggs.
    #[serde(rename = "D3")]
    pub d3: f64,
    /// Weight of larvae.
    #[serde(rename = "D4")]
    pub d4: f64,
    /// Quadratic control weights `B1..B5`.
    #[serde(rename = "B")]
    pub b: [f64; N_CONTROL],
}

impl ObjectiveWeights {
    /// Weights of the reference experiments.
    pub fn baseline() -> Self {
        Self { d1: 10_000.0, d2: 10_000.0, d3: 5_000.0, d4: 1.0, b: [10.0; N_CONTROL] }
    }

    /// Checks that all weights are positive.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [("D1", self.d1), ("D2", self.d2), ("D3", self.d3), ("D4", self.d4)] {
            if !(v.is_finite() && v > 0.0) {
                errs.push(format!("{name} = {v} must be > 0"));
            }
        }
        for (i, v) in self.b.iter().enumerate() {
            if !(v.is_finite() && *v > 0.0) {
                errs.push(format!("B{} = {v} must be > 0", i + 1));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ArboError::InvalidParams(errs))
        }
    }
}

/// Subset of active controls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrategyMask {
    /// Strategy name.
    pub name: String,
    /// Active flag per control.
    pub active: [bool; N_CONTROL],
}

impl StrategyMask {
    /// Builds a named mask.
    pub fn new(name: &str, active: [bool; N_CONTROL]) -> Self {
        Self { name: name.to_string(), active }
    }

    /// Vaccination, protection, treatment and adulticide.
    pub fn z1() -> Self {
        Self::new("Z1", [true, true, true, true, false])
    }

    /// Vaccination, protection, treatment and larvicide.
    pub fn z2() -> Self {
        Self::new("Z2", [true, true, true, false, true])
    }

    /// Vaccination, treatment, adulticide and larvicide.
    pub fn z3() -> Self {
        Self::new("Z3", [true, false, true, true, true])
    }

    /// Vaccination, protection, adulticide and larvicide.
    pub fn z4() -> Self {
        Self::new("Z4", [true, true, false, true, true])
    }

    /// All five controls.
    pub fn all() -> Self {
        Self::new("Z", [true; N_CONTROL])
    }

    /// No control.
    pub fn none() -> Self {
        Self::new("none", [false; N_CONTROL])
    }

    /// The five strategies compared in the cost-effectiveness study.
    pub fn standard() -> Vec<Self> {
        vec![Self::z1(), Self::z2(), Self::z3(), Self::z4(), Self::all()]
    }

    /// Looks a strategy up by name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "Z1" => Ok(Self::z1()),
            "Z2" => Ok(Self::z2()),
            "Z3" => Ok(Self::z3()),
            "Z4" => Ok(Self::z4()),
            "Z" => Ok(Self::all()),
            "none" => Ok(Self::none()),
            _ => Err(ArboError::Precondition(format!("unknown strategy {name}"))),
        }
    }

    /// Zeroes inactive controls.
    pub fn apply(&self, u: &ControlValues) -> ControlValues {
        std::array::from_fn(|i| if self.active[i] { u[i] } else { 0.0 })
    }
}

/// Running cost `D1 I_h + D2 N_v + D3 E + D4 L + Σ B_i u_i²`.
pub fn running_cost(x: &StateVector, u: &ControlValues, w: &ObjectiveWeights) -> f64 {
    let controls: f64 = (0..N_CONTROL).map(|i| w.b[i] * u[i] * u[i]).sum();
    w.d1 * x[IH] + w.d2 * (x[SV] + x[EV] + x[IV]) + w.d3 * x[EGG] + w.d4 * x[LARVA] + controls
}

/// Trapezoidal objective over aligned state and control trajectories.
pub fn objective(
    states: &Trajectory<N_STATE>,
    controls: &Trajectory<N_CONTROL>,
    w: &ObjectiveWeights,
    grid: &TimeGrid,
) -> Result<f64> {
    if states.grid != *grid || controls.grid != *grid || states.values.len() != controls.values.len() {
        return Err(ArboError::GridMismatch("objective needs states and controls on one grid".into()));
    }
    let y: Vec<f64> = states.values.iter().zip(&controls.values).map(|(x, u)| running_cost(x, u, w)).collect();
    trapezoid(grid, &y)
}

/// Hamiltonian `running cost + adj·controlled_field`.
pub fn hamiltonian(
    x: &StateVector,
    u: &ControlValues,
    adj: &StateVector,
    p: &ModelParams,
    c: &ControlParams,
    w: &ObjectiveWeights,
) -> Result<f64> {
    let f = controlled_field(x, u, p, c)?;
    Ok(running_cost(x, u, w) + (0..N_STATE).map(|i| adj[i] * f[i]).sum::<f64>())
}

/// Time derivative of the adjoint vector, `−∂H/∂x`.
pub fn adjoint_field(
    x: &StateVector,
    u: &ControlValues,
    adj: &StateVector,
    p: &ModelParams,
    c: &ControlParams,
    w: &ObjectiveWeights,
) -> Result<StateVector> {
    let nh = x[SH] + x[EH] + x[IH] + x[RH];
    if nh == 0.0 {
        return Err(ArboError::ZeroPopulation);
    }
    let [l_sh, l_eh, l_ih, l_rh, l_sv, l_ev, l_iv, l_e, l_l, l_p] = *adj;
    let [u1, u2, u3, u4, u5] = *u;
    let foi_h = p.a * p.beta_hv * (p.eta_v * x[EV] + x[IV]) / nh;
    let foi_v = p.a * p.beta_vh * (p.eta_h * x[EH] + x[IH]) / nh;
    let protect = 1.0 - c.alpha1 * u2;
    let mv = p.mu_v + c.c_m * u4;
    let hum_pull = protect * x[SH] * foi_h / nh * (l_eh - l_sh);
    let vec_pull = protect * x[SV] * foi_v / nh * (l_ev - l_sv);
    let recruit = p.mu_b * (1.0 - x[EGG] / p.cap_e) * l_e;
    Ok([
        p.mu_h * l_sh + u1 * (l_sh - l_rh) + protect * foi_h * (1.0 - x[SH] / nh) * (l_sh - l_eh) + vec_pull,
        p.mu_h * l_eh
            + p.gamma_h * (l_eh - l_ih)
            + hum_pull
            + protect * x[SV] / nh * (p.a * p.beta_vh * p.eta_h - foi_v) * (l_sv - l_ev),
        -w.d1
            + (p.mu_h + (1.0 - c.alpha2 * u3) * p.delta) * l_ih
            + (p.sigma + c.alpha2 * u3) * (l_ih - l_rh)
            + hum_pull
            + protect * x[SV] / nh * (p.a * p.beta_vh - foi_v) * (l_sv - l_ev),
        p.mu_h * l_rh + c.omega * u1 * (l_rh - l_sh) + hum_pull + vec_pull,
        -w.d2 + mv * l_sv + protect * foi_v * (l_sv - l_ev) - recruit,
        -w.d2 + mv * l_ev + p.gamma_v * (l_ev - l_iv)
            - p.a * p.eta_v * p.beta_hv * protect * x[SH] / nh * (l_eh - l_sh)
            - recruit,
        -w.d2 + mv * l_iv - p.a * p.beta_hv * protect * x[SH] / nh * (l_eh - l_sh) - recruit,
        -w.d3 + (p.mu_b / p.cap_e * (x[SV] + x[EV] + x[IV]) + p.s + p.mu_e + c.eta1 * u5) * l_e
            - p.s * (1.0 - x[LARVA] / p.cap_l) * l_l,
        -w.d4 - p.l * l_p + (p.s / p.cap_l * x[EGG] + p.mu_l + p.l + c.eta2 * u5) * l_l,
        (p.mu_p + p.theta) * l_p - p.theta * l_sv,
    ])
}

/// Stationary points of the Hamiltonian in each control, before clamping.
pub fn unclamped_controls(
    x: &StateVector,
    adj: &StateVector,
    p: &ModelParams,
    c: &ControlParams,
    w: &ObjectiveWeights,
) -> Result<ControlValues> {
    let nh = x[SH] + x[EH] + x[IH] + x[RH];
    if nh == 0.0 {
        return Err(ArboError::ZeroPopulation);
    }
    let foi_h = p.a * p.beta_hv * (p.eta_v * x[EV] + x[IV]) / nh;
    let foi_v = p.a * p.beta_vh * (p.eta_h * x[EH] + x[IH]) / nh;
    Ok([
        (x[SH] - c.omega * x[RH]) * (adj[SH] - adj[RH]) / (2.0 * w.b[0]),
        c.alpha1 * (foi_h * x[SH] * (adj[EH] - adj[SH]) + foi_v * x[SV] * (adj[EV] - adj[SV])) / (2.0 * w.b[1]),
        c.alpha2 * ((1.0 - p.delta) * adj[IH] - adj[RH]) * x[IH] / (2.0 * w.b[2]),
        c.c_m * (x[SV] * adj[SV] + x[EV] * adj[EV] + x[IV] * adj[IV]) / (2.0 * w.b[3]),
        (c.eta1 * x[EGG] * adj[EGG] + c.eta2 * x[LARVA] * adj[LARVA]) / (2.0 * w.b[4]),
    ])
}

/// Optimal controls clamped to `[0, 1]` with inactive controls zeroed.
pub fn characterize_controls(
    x: &StateVector,
    adj: &StateVector,
    p: &ModelParams,
    c: &ControlParams,
    w: &ObjectiveWeights,
    mask: &StrategyMask,
) -> Result<ControlValues> {
    let raw = unclamped_controls(x, adj, p, c, w)?;
    Ok(mask.apply(&raw.map(|v| v.clamp(0.0, 1.0))))
}

/// Sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    /// Weight of the new characterised control in the convex update.
    pub mix: f64,
    /// Relative sup-norm tolerance on control and state changes.
    pub tol: f64,
    /// Iteration cap.
    pub max_iters: usize,
    /// Starting controls; zeros when absent.
    pub initial_guess: Option<Trajectory<N_CONTROL>>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { mix: 0.5, tol: 1e-3, max_iters: 200, initial_guess: None }
    }
}

/// One sweep iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationLog {
    /// Iteration number starting at 1.
    pub iteration: usize,
    /// Objective of the controls entering this iteration.
    pub objective: f64,
    /// Relative sup-norm control change.
    pub control_change: f64,
    /// Relative sup-norm state change against the previous forward pass.
    pub state_change: f64,
}

/// Converged (or abandoned) optimality-system solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Strategy solved.
    pub strategy: StrategyMask,
    /// State trajectory under the final controls.
    pub states: Trajectory<N_STATE>,
    /// Adjoint trajectory under the final controls.
    pub adjoints: Trajectory<N_STATE>,
    /// Final controls.
    pub controls: Trajectory<N_CONTROL>,
    /// Objective of the final controls.
    pub objective_j: f64,
    /// Number of iterations performed.
    pub iterations: usize,
    /// Whether both change norms fell below tolerance.
    pub converged: bool,
    /// Per-iteration history.
    pub log: Vec<IterationLog>,
}

fn relative_change<const D: usize>(new: &[[f64; D]], old: &[[f64; D]]) -> f64 {
    let mut diff = 0.0_f64;
    let mut scale = 0.0_f64;
    for (a, b) in new.iter().zip(old) {
        for i in 0..D {
            diff = diff.max((a[i] - b[i]).abs());
            scale = scale.max(a[i].abs());
        }
    }
    if diff == 0.0 {
        0.0
    } else {
        diff / scale.max(f64::MIN_POSITIVE)
    }
}

/// State trajectory of the controlled system.
pub fn simulate_controlled(
    p: &ModelParams,
    c: &ControlParams,
    x0: StateVector,
    grid: &TimeGrid,
    controls: &Trajectory<N_CONTROL>,
) -> Result<Trajectory<N_STATE>> {
    rk4_forward(|_, x, u| controlled_field(x, u, p, c), x0, grid, Some(controls))
}

/// Adjoint trajectory with zero terminal value.
pub fn solve_adjoint(
    p: &ModelParams,
    c: &ControlParams,
    w: &ObjectiveWeights,
    grid: &TimeGrid,
    states: &Trajectory<N_STATE>,
    controls: &Trajectory<N_CONTROL>,
) -> Result<Trajectory<N_STATE>> {
    rk4_backward(|_, adj, x, u| adjoint_field(x, u, adj, p, c, w), [0.0; N_STATE], grid, states, controls)
}

/// Forward-backward sweep with convex control updates.
pub fn forward_backward_sweep(
    p: &ModelParams,
    c: &ControlParams,
    w: &ObjectiveWeights,
    x0: StateVector,
    grid: &TimeGrid,
    mask: &StrategyMask,
    options: &SweepOptions,
) -> Result<SweepResult> {
    if !(options.mix > 0.0 && options.mix <= 1.0) || options.max_iters == 0 {
        return Err(ArboError::Precondition("sweep needs 0 < mix <= 1 and max_iters >= 1".into()));
    }
    let mut controls = match &options.initial_guess {
        Some(g) => {
            if g.grid != *grid {
                return Err(ArboError::GridMismatch("initial guess is not on the sweep grid".into()));
            }
            Trajectory {
                grid: *grid,
                values: g.values.iter().map(|u| mask.apply(&u.map(|v| v.clamp(0.0, 1.0)))).collect(),
            }
        }
        None => Trajectory::constant(*grid, [0.0; N_CONTROL]),
    };
    let mut log = Vec::new();
    let mut previous_states: Option<Trajectory<N_STATE>> = None;
    let mut converged = false;
    for iteration in 1..=options.max_iters {
        let states = simulate_controlled(p, c, x0, grid, &controls)?;
        let adjoints = solve_adjoint(p, c, w, grid, &states, &controls)?;
        let mut updated = Vec::with_capacity(grid.len());
        for ((x, adj), old) in states.values.iter().zip(&adjoints.values).zip(&controls.values) {
            let star = characterize_controls(x, adj, p, c, w, mask)?;
            let mixed: ControlValues =
                std::array::from_fn(|i| (options.mix * star[i] + (1.0 - options.mix) * old[i]).clamp(0.0, 1.0));
            updated.push(mask.apply(&mixed));
        }
        let control_change = relative_change(&updated, &controls.values);
        let state_change =
            previous_states.as_ref().map_or(f64::INFINITY, |prev| relative_change(&states.values, &prev.values));
        let state_change = if control_change == 0.0 && iteration == 1 { 0.0 } else { state_change };
        log.push(IterationLog {
            iteration,
            objective: objective(&states, &controls, w, grid)?,
            control_change,
            state_change,
        });
        controls.values = updated;
        previous_states = Some(states);
        if control_change < options.tol && state_change < options.tol {
            converged = true;
            break;
        }
    }
    let states = simulate_controlled(p, c, x0, grid, &controls)?;
    let adjoints = solve_adjoint(p, c, w, grid, &states, &controls)?;
    let objective_j = objective(&states, &controls, w, grid)?;
    Ok(SweepResult {
        strategy: mask.clone(),
        iterations: log.len(),
        states,
        adjoints,
        controls,
        objective_j,
        converged,
        log,
    })
}
