#![allow(dead_code)]

use arbo::model::ModelParams;
use arbo::sensitivity::{lhs_sample, ParamDistribution};

pub fn literature_draws(n: usize, seed: u64) -> Vec<ModelParams> {
    lhs_sample(&ParamDistribution::table2_default(), n, seed).unwrap()
}

/// Ranges with strong disease-induced death so that backward bifurcation is common.
pub fn backward_prone() -> ParamDistribution {
    let mut d = ParamDistribution::table2_default();
    for (name, r) in [
        ("Lambda_h", [2.0, 40.0]),
        ("delta", [0.05, 1.5]),
        ("sigma", [0.005, 0.15]),
        ("beta_hv", [0.001, 1.0]),
        ("beta_vh", [0.05, 1.0]),
    ] {
        d.ranges.insert(name.to_string(), r);
    }
    d
}

pub fn backward_draws(n: usize, seed: u64) -> Vec<ModelParams> {
    lhs_sample(&backward_prone(), n, seed).unwrap()
}

/// Backward-bifurcation example with the transmission probability as printed.
pub fn backward_example() -> ModelParams {
    let mut p = ModelParams::baseline();
    p.lambda_h = 30.0;
    p.beta_hv = 0.008;
    p.eta_h = 0.78;
    p.eta_v = 0.99;
    p.delta = 1.0;
    p.sigma = 0.01428;
    p.beta_vh = 0.5;
    p.gamma_v = 1.0 / 14.0;
    p.cap_e = 1e4;
    p.cap_l = 5e3;
    p.mu_l = 0.2;
    p
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
