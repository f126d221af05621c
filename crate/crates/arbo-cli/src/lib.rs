//! Command dispatch and file emission for the `arbo` command-line tool.

pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use arbo::control::{forward_backward_sweep, objective, simulate_controlled, StrategyMask};
use arbo::econ::{cumulated_infectious, icer_analysis, StrategyReport};
use arbo::equilibria::{
    bifurcation_scan, delta_zero_check, endemic_quadratic, solve_endemic, existence_case, two_branch_span,
};
use arbo::model::{basic_field, derive_constants, N_CONTROL, STATE_NAMES};
use arbo::ode::{rk4_forward, Trajectory};
use arbo::sensitivity::sensitivity_analysis;
use arbo::stability::{bifurcation_coefficients, lyapunov_trivial_check, routh_hurwitz_trivial};
use arbo::thresholds::bifurcation_thresholds;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::RunConfig;
pub use error::CliError;
use output::{fmt_f64, OutDir};

/// Seed used when neither flag, environment nor configuration supplies one.
pub const DEFAULT_SEED: u64 = 42;

const CONTROL_NAMES: [&str; N_CONTROL] = ["u1", "u2", "u3", "u4", "u5"];
const ADJOINT_NAMES: [&str; 10] = [
    "lambda_Sh",
    "lambda_Eh",
    "lambda_Ih",
    "lambda_Rh",
    "lambda_Sv",
    "lambda_Ev",
    "lambda_Iv",
    "lambda_E",
    "lambda_L",
    "lambda_P",
];

/// Arboviral model analyses.
#[derive(Debug, Parser)]
#[command(name = "arbo", version, about)]
pub struct Cli {
    /// Options shared by every command.
    #[command(flatten)]
    pub common: CommonArgs,
    /// Analysis to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every command.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed.
    #[arg(long, global = true, env = "ARBO_SEED")]
    pub seed: Option<u64>,
    /// Model parameter override `NAME=VALUE`; repeatable.
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    pub overrides: Vec<String>,
}

/// Available analyses.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Thresholds with the trivial-equilibrium stability test.
    Thresholds,
    /// Disease-free and endemic equilibria with their stability.
    Equilibria,
    /// Equilibrium branches over a parameter range.
    Bifurcation {
        /// Parameter varied.
        #[arg(long)]
        param: Option<String>,
        /// Lower end of the range.
        #[arg(long)]
        lo: Option<f64>,
        /// Upper end of the range.
        #[arg(long)]
        hi: Option<f64>,
        /// Number of grid points.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Uncontrolled trajectories from every configured initial state.
    Simulate,
    /// R0 statistics and PRCC over Latin hypercube draws.
    Sensitivity {
        /// Number of draws.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Forward-backward sweep for each strategy.
    Control {
        /// Strategy to solve; repeatable.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
    },
    /// Cost-effectiveness ranking of the configured strategy outcomes.
    Icer,
}

/// Seed precedence: flag or environment, then configuration, then default.
pub fn resolve_seed(flag: Option<u64>, config: &RunConfig) -> u64 {
    flag.or(config.seed).unwrap_or(DEFAULT_SEED)
}

fn apply_overrides(cfg: &mut RunConfig, overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        let (name, value) =
            o.split_once('=').ok_or_else(|| CliError::Invalid(format!("override {o} is not NAME=VALUE")))?;
        let value: f64 =
            value.trim().parse().map_err(|_| CliError::Invalid(format!("override {o} has a non-numeric value")))?;
        cfg.model.set(name.trim(), value).map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    Ok(())
}

/// Runs one parsed invocation and returns its JSON summary.
pub fn run(cli: Cli) -> Result<Value, CliError> {
    let path = cli.common.config.clone().ok_or_else(|| CliError::Invalid("--config FILE is required".into()))?;
    let mut cfg = RunConfig::load(&path)?;
    apply_overrides(&mut cfg, &cli.common.overrides)?;
    cfg.validate()?;
    let out_root = cli.common.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("arbo-out"));
    let out = OutDir::create(&out_root)?;
    let seed = resolve_seed(cli.common.seed, &cfg);
    match cli.command {
        Command::Thresholds => cmd_thresholds(&cfg, &out),
        Command::Equilibria => cmd_equilibria(&cfg, &out),
        Command::Bifurcation { param, lo, hi, steps } => {
            if let Some(v) = param {
                cfg.bifurcation.parameter = v;
            }
            if let Some(v) = lo {
                cfg.bifurcation.lo = v;
            }
            if let Some(v) = hi {
                cfg.bifurcation.hi = v;
            }
            if let Some(v) = steps {
                cfg.bifurcation.steps = v;
            }
            cmd_bifurcation(&cfg, &out)
        }
        Command::Simulate => cmd_simulate(&cfg, &out),
        Command::Sensitivity { samples } => {
            if let Some(n) = samples {
                cfg.sensitivity.samples = n;
            }
            cmd_sensitivity(&cfg, &out, seed)
        }
        Command::Control { strategies } => {
            if !strategies.is_empty() {
                cfg.strategies = strategies;
                cfg.validate()?;
            }
            cmd_control(&cfg, &out)
        }
        Command::Icer => cmd_icer(&cfg, &out),
    }
}

/// Thresholds report.
pub fn cmd_thresholds(cfg: &RunConfig, out: &OutDir) -> Result<Value, CliError> {
    let p = &cfg.model;
    let t = bifurcation_thresholds(p);
    let result = json!({
        "thresholds": t,
        "derived_constants": derive_constants(p),
        "routh_hurwitz": routh_hurwitz_trivial(p),
        "quadratic": endemic_quadratic(p).ok(),
        "existence_case": existence_case(&t),
        "two_endemic_beta_intervals": t.two_endemic_beta_intervals(),
    });
    out.write_report("thresholds.json", "thresholds", &result)
}

/// Equilibria report.
pub fn cmd_equilibria(cfg: &RunConfig, out: &OutDir) -> Result<Value, CliError> {
    let p = &cfg.model;
    let set = solve_endemic(p)?;
    let coefficients = match bifurcation_coefficients(p) {
        Ok(c) => json!(c),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let delta_zero = if p.delta == 0.0 { Some(delta_zero_check(p)?) } else { None };
    let result = json!({ "equilibria": set, "bifurcation": coefficients, "delta_zero": delta_zero });
    out.write_report("equilibria.json", "equilibria", &result)
}

/// Equilibrium branch scan.
pub fn cmd_bifurcation(cfg: &RunConfig, out: &OutDir) -> Result<Value, CliError> {
    let s = &cfg.bifurcation;
    if s.steps < 2 || !(s.lo.is_finite() && s.hi.is_finite() && s.hi > s.lo) {
        return Err(CliError::Invalid(format!("scan needs steps >= 2 and hi > lo, got {s:?}")));
    }
    let rows = bifurcation_scan(&cfg.model, &s.parameter, (s.lo, s.hi), s.steps)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.param_value),
                fmt_f64(r.r0),
                r.branch_id.to_string(),
                fmt_f64(r.i_h),
                fmt_f64(r.i_v),
                r.stable.to_string(),
                fmt_f64(r.residual),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    out.write_csv(
        "bifurcation.csv",
        &["param_value", "r0", "branch_id", "i_h", "i_v", "stable", "residual", "error"],
        &csv_rows,
    )?;
    let t = bifurcation_thresholds(&cfg.model);
    let result = json!({
        "parameter": s.parameter,
        "range": [s.lo, s.hi],
        "steps": s.steps,
        "two_branch_span": two_branch_span(&rows),
        "two_endemic_beta_intervals": t.two_endemic_beta_intervals(),
        "beta_minus": t.beta_minus,
        "beta_bar": t.beta_bar,
        "beta_star": t.beta_star,
        "failed_points": rows.iter().filter(|r| r.error.is_some()).count(),
    });
    out.write_report("bifurcation.json", "bifurcation", &result)
}

/// Uncontrolled simulations.
pub fn cmd_simulate(cfg: &RunConfig, out: &OutDir) -> Result<Value, CliError> {
    let p = &cfg.model;
    let grid = cfg.time_grid()?;
    let mut runs = Vec::new();
    for (k, x0) in cfg.initial_states.iter().enumerate() {
        let traj = rk4_forward(|_, x, _: &[f64; 0]| basic_field(x, p), *x0, &grid, None)?;
        out.write_trajectory(&format!("simulate_{k}.csv"), &STATE_NAMES, &traj)?;
        let lyapunov = lyapunov_trivial_check(p, &traj).ok();
        runs.push(json!({ "initial_state": x0, "final_state": traj.last(), "lyapunov": lyapunov }));
    }
    out.write_report("simulate.json", "simulate", &json!({ "grid": grid, "runs": runs }))
}

/// Sensitivity study.
pub fn cmd_sensitivity(cfg: &RunConfig, out: &OutDir, seed: u64) -> Result<Value, CliError> {
    let report = sensitivity_analysis(&cfg.distribution(), cfg.sensitivity.samples, seed)?;
    let hist: Vec<Vec<String>> =
        report.r0.histogram.iter().map(|b| vec![fmt_f64(b.bin_lo), fmt_f64(b.bin_hi), b.count.to_string()]).collect();
    out.write_csv("r0_histogram.csv", &["bin_lo", "bin_hi", "count"], &hist)?;
    let prcc: Vec<Vec<String>> = report.prcc.coefficients.iter().map(|(n, v)| vec![n.clone(), fmt_f64(*v)]).collect();
    out.write_csv("prcc.csv", &["parameter", "prcc"], &prcc)?;
    out.write_report(
        "sensitivity.json",
        "sensitivity",
        &json!({ "seed": seed, "samples": cfg.sensitivity.samples, "report": report }),
    )
}

/// Optimal control for each configured strategy.
pub fn cmd_control(cfg: &RunConfig, out: &OutDir) -> Result<Value, CliError> {
    let (p, c, w) = (&cfg.model, &cfg.control, &cfg.weights);
    let grid = cfg.time_grid()?;
    let x0 = cfg.initial_states[0];
    let zero = Trajectory::constant(grid, [0.0; N_CONTROL]);
    let baseline = simulate_controlled(p, c, x0, &grid, &zero)?;
    let baseline_ih = cumulated_infectious(&baseline)?;
    let baseline_j = objective(&baseline, &zero, w, &grid)?;
    out.write_trajectory("control_none_states.csv", &STATE_NAMES, &baseline)?;

    let options = cfg.sweep_options();
    let mut summaries = Vec::new();
    let mut reports = Vec::new();
    let mut failed = Vec::new();
    for name in &cfg.strategies {
        let mask = StrategyMask::from_name(name)?;
        let res = forward_backward_sweep(p, c, w, x0, &grid, &mask, &options)?;
        out.write_trajectory(&format!("control_{name}_states.csv"), &STATE_NAMES, &res.states)?;
        out.write_trajectory(&format!("control_{name}_controls.csv"), &CONTROL_NAMES, &res.controls)?;
        out.write_trajectory(&format!("control_{name}_adjoints.csv"), &ADJOINT_NAMES, &res.adjoints)?;
        let cumulated = cumulated_infectious(&res.states)?;
        let report = StrategyReport::from_run(name, cumulated, baseline_ih, res.objective_j)?;
        if !res.converged {
            failed.push(name.clone());
        }
        summaries.push(json!({
            "strategy": name,
            "objective_j": res.objective_j,
            "iterations": res.iterations,
            "converged": res.converged,
            "cumulated_ih": cumulated,
            "efficiency_percent": report.efficiency_percent,
            "log": res.log,
        }));
        reports.push(report);
    }
    let icer = match icer_analysis(&reports) {
        Ok(t) => json!(t),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let result = json!({
        "baseline": { "cumulated_ih": baseline_ih, "objective_j": baseline_j },
        "strategies": summaries,
        "icer": icer,
    });
    let value = out.write_report("control.json", "control", &result)?;
    if failed.is_empty() {
        Ok(value)
    } else {
        Err(CliError::NonConvergence(failed.join(", ")))
    }
}

/// Cost-effectiveness ranking of configured outcomes.
pub fn cmd_icer(cfg: &RunConfig, out: &OutDir) -> Result<Value, CliError> {
    let table = icer_analysis(&cfg.icer_reports)?;
    out.write_report("icer.json", "icer", &table)
}
