use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use arbo::control::{
    adjoint_field, forward_backward_sweep, hamiltonian, objective, simulate_controlled, unclamped_controls,
    StrategyMask, SweepResult,
};
use arbo::econ::{cumulated_infectious, efficiency_index, icer_analysis};
use arbo::equilibria::{bifurcation_scan, endemic_quadratic, relative_residual, solve_endemic, two_branch_span};
use arbo::model::{basic_field, derive_constants, ModelParams, StateVector, IH, N_CONTROL, N_STATE};
use arbo::ode::{rk4_forward, TimeGrid, Trajectory};
use arbo::sensitivity::{lhs_sample, sensitivity_analysis, ParamDistribution};
use arbo::stability::{bifurcation_coefficients, lyapunov_trivial_check, Direction};
use arbo::thresholds::{basic_reproduction_number, bifurcation_thresholds, net_reproductive_number, vector_total_dfe};
use arbo_cli::RunConfig;
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Check {
    label: String,
    pass: bool,
    info: bool,
}

struct Criterion {
    id: u32,
    title: &'static str,
    checks: Vec<Check>,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Self { id, title, checks: Vec::new() }
    }

    fn check(&mut self, pass: bool, label: String) {
        self.checks.push(Check { label, pass, info: false });
    }

    fn note(&mut self, label: String) {
        self.checks.push(Check { label, pass: true, info: true });
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.check(elapsed < limit, format!("runtime {:.3} s < {:.3} s", elapsed.as_secs_f64(), limit.as_secs_f64()));
    }

    fn print(&self) -> bool {
        let pass = self.checks.iter().all(|c| c.pass);
        println!("{} criterion {}: {}", if pass { "PASS" } else { "FAIL" }, self.id, self.title);
        for c in &self.checks {
            let mark = if c.info {
                "i"
            } else if c.pass {
                "ok"
            } else {
                "x"
            };
            println!("    [{mark}] {}", c.label);
        }
        pass
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn config(name: &str) -> RunConfig {
    RunConfig::load(&fixture(name)).expect("fixture parses")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn thresholds_criterion() -> Criterion {
    let mut c = Criterion::new(1, "thresholds of the backward-bifurcation example");
    let p = config("sec22_backward.json").model;
    let start = Instant::now();
    let t = bifurcation_thresholds(&p);
    let elapsed = start.elapsed();
    c.check(within(t.r0, 0.4359, 5e-4), format!("R0 = {:.5} (target 0.4359 ± 0.0005)", t.r0));
    c.check(within(t.r_c, 0.0367, 5e-4), format!("Rc = {:.5} (target 0.0367 ± 0.0005)", t.r_c));
    match t.beta_star {
        Some(bs) => {
            let r = basic_reproduction_number(&p.with("beta_hv", bs).unwrap()).unwrap();
            c.check((r - 1.0).abs() < 1e-12, format!("R0 at beta* = {bs:.6} is 1 + {:.1e}", r - 1.0));
        }
        None => c.check(false, "beta* undefined".into()),
    }
    c.runtime(elapsed, Duration::from_millis(1));
    c
}

fn quadratic_criterion() -> Criterion {
    let mut c = Criterion::new(2, "endemic quadratic of the backward-bifurcation example");
    let p = config("sec22_backward.json").model;
    let q = endemic_quadratic(&p).unwrap();
    for (name, value, target) in [
        ("d2", q.d2, -5.6537e-8),
        ("d1", q.d1, 1.1504e-10),
        ("d0", q.d0, -2.4857e-14),
        ("disc", q.discriminant, 7.6134e-21),
    ] {
        c.check(rel(value, target) < 1e-3, format!("{name} = {value:.5e} (target {target:.4e}, rel 1e-3)"));
    }
    let set = solve_endemic(&p).unwrap();
    c.check(set.endemic.len() == 2, format!("{} positive endemic roots (target 2)", set.endemic.len()));
    let printed: [[f64; N_STATE]; 2] = [
        [104_660.0, 104_660.0, 25.0, 8850.0, 7530.0, 97.0, 206.0, 8393.0, 31_334.0, 3264.0],
        [16_394.0, 16_384.0, 29.0, 10_092.0, 6558.0, 406.0, 869.0, 8393.0, 31_334.0, 3264.0],
    ];
    for (k, e) in set.endemic.iter().enumerate() {
        let res = relative_residual(&e.state, &p).unwrap();
        c.check(res < 1e-8, format!("endemic point {k} residual {res:.1e} < 1e-8"));
        let worst = (0..N_STATE).map(|i| rel(e.state[i], printed[k][i])).fold(0.0, f64::max);
        c.check(worst <= 0.05, format!("endemic point {k} worst component deviation {:.1}% <= 5%", 100.0 * worst));
    }
    c
}

fn direction_criterion() -> Criterion {
    let mut c = Criterion::new(3, "bifurcation direction");
    let p = config("sec22_backward.json").model;
    match bifurcation_coefficients(&p) {
        Ok(b) => {
            c.check(
                b.bif_a1 > 0.0 && b.bif_a2 > 0.0,
                format!("a1 = {:.4e}, a2 = {:.4e} at beta* = {:.6}", b.bif_a1, b.bif_a2, b.beta_star),
            );
            let d1 = rel(b.bif_a1, b.bif_a1_hessian);
            let d2 = rel(b.bif_a2, b.bif_a2_hessian);
            c.check(d1 < 1e-6 && d2 < 1e-6, format!("closed form vs Hessian: a1 rel {d1:.1e}, a2 rel {d2:.1e}"));
        }
        Err(e) => c.check(false, format!("coefficients failed: {e}")),
    }
    let mut dist = ParamDistribution::table2_default();
    dist.ranges.insert("delta".into(), [0.0, 0.0]);
    let mut tested = 0;
    let mut backward = 0;
    for q in lhs_sample(&dist, 400, 2024).unwrap() {
        if tested == 200 || net_reproductive_number(&q) <= 1.0 {
            continue;
        }
        tested += 1;
        if bifurcation_coefficients(&q).map(|b| b.direction == Direction::Backward).unwrap_or(true) {
            backward += 1;
        }
    }
    c.check(tested == 200 && backward == 0, format!("{backward} of {tested} delta = 0 draws backward"));
    c
}

fn scan_criterion() -> Criterion {
    let mut c = Criterion::new(4, "bifurcation scan over beta_hv in [0, 0.0877]");
    let p = config("sec22_backward.json").model;
    let (lo, hi, steps) = (0.0, 0.0877, 500);
    let cell = (hi - lo) / (steps - 1) as f64;
    let start = Instant::now();
    let rows = bifurcation_scan(&p, "beta_hv", (lo, hi), steps).unwrap();
    let elapsed = start.elapsed();
    let t = bifurcation_thresholds(&p);
    let span = two_branch_span(&rows);
    match span {
        Some((a, b)) => {
            c.check(
                (a - 0.0028).abs() <= cell && (b - 0.0390).abs() <= cell,
                format!("two-branch span ({a:.5}, {b:.5}) vs (0.0028, 0.0390), cell {cell:.2e}"),
            );
            let expected: Vec<(f64, f64)> = t
                .two_endemic_beta_intervals()
                .into_iter()
                .filter(|(x, y)| *y > lo && *x < hi)
                .map(|(x, y)| (x.max(lo), y.min(hi)))
                .collect();
            let agree = expected.len() == 1 && (a - expected[0].0).abs() <= cell && (b - expected[0].1).abs() <= cell;
            c.check(agree, format!("span vs closed-form interval {expected:?} clipped to the scan range"));
        }
        None => c.check(false, "no two-branch rows in the scan".into()),
    }
    c.note(format!(
        "closed-form thresholds: beta- = {:?}, beta+ = {:?}, beta_bar = {:?}, beta* = {:?}",
        t.beta_minus, t.beta_plus, t.beta_bar, t.beta_star
    ));
    c.runtime(elapsed, Duration::from_secs(10));
    c
}

fn bistability_criterion() -> Criterion {
    let mut c = Criterion::new(5, "bistability from the two documented initial states");
    let cfg = config("sec22_backward.json");
    let p = cfg.model;
    let grid = cfg.time_grid().unwrap();
    let set = solve_endemic(&p).unwrap();
    let stable_ih = set.endemic.iter().find(|e| e.stability.stable()).map(|e| e.state[IH]);
    let mut finals = Vec::new();
    for x0 in &cfg.initial_states {
        let start = Instant::now();
        let traj = rk4_forward(|_, x, _: &[f64; 0]| basic_field(x, &p), *x0, &grid, None).unwrap();
        c.runtime(start.elapsed(), Duration::from_secs(1));
        finals.push(traj.last()[IH]);
    }
    c.check(
        finals[0] < 1e-3 * cfg.initial_states[0][IH],
        format!("start 1 final Ih = {:.4e} (target: disease-free)", finals[0]),
    );
    match stable_ih {
        Some(target) => c.check(
            rel(finals[1], target) <= 0.1,
            format!("start 2 final Ih = {:.4e} vs stable endemic Ih = {target:.4e}", finals[1]),
        ),
        None => c.check(false, format!("start 2 final Ih = {:.4e}; no stable endemic point exists", finals[1])),
    }
    c
}

fn sensitivity_criterion() -> Criterion {
    let mut c = Criterion::new(6, "sensitivity study with n = 5000");
    let cfg = config("table2_baseline.json");
    let start = Instant::now();
    let r = sensitivity_analysis(&cfg.distribution(), 5000, 42).unwrap();
    let elapsed = start.elapsed();
    c.check((1.76..=2.15).contains(&r.r0.mean), format!("mean R0 = {:.4} in [1.76, 2.15]", r.r0.mean));
    c.check((1.6..=2.1).contains(&r.r0.std), format!("std R0 = {:.4} in [1.6, 2.1]", r.r0.std));
    c.check((0.61..=0.68).contains(&r.r0.p_ge_1), format!("P(R0 >= 1) = {:.4} in [0.61, 0.68]", r.r0.p_ge_1));
    c.check(r.conditions.n_le_1 <= 0.01, format!("P(N <= 1) = {:.4} <= 0.01", r.conditions.n_le_1));
    c.check(r.conditions.two_endemic <= 0.01, format!("P(two endemic) = {:.4} <= 0.01", r.conditions.two_endemic));
    let table = [
        ("beta_vh", 0.7345, true),
        ("beta_hv", 0.7285, true),
        ("a", 0.6454, true),
        ("theta", 0.6187, true),
        ("mu_v", -0.5521, true),
        ("Lambda_h", -0.5435, true),
        ("l", 0.5144, true),
        ("Gamma_L", 0.3813, false),
        ("s", 0.3733, false),
        ("Gamma_E", 0.3698, false),
    ];
    for (name, reference, close) in table {
        let v = r.prcc.get(name).unwrap_or(f64::NAN);
        if close {
            c.check((v - reference).abs() <= 0.15, format!("PRCC {name} = {v:.4} vs {reference} ± 0.15"));
        } else {
            c.check(v.signum() == reference.signum(), format!("PRCC {name} = {v:.4}, sign of {reference}"));
        }
    }
    c.runtime(elapsed, Duration::from_secs(30));
    c
}

struct ControlRuns {
    cfg: RunConfig,
    runs: Vec<SweepResult>,
}

fn control_criterion() -> (Criterion, ControlRuns) {
    let mut c = Criterion::new(7, "optimal control of the five strategies");
    let cfg = config("table5_control.json");
    let (p, ctl, w) = (&cfg.model, &cfg.control, &cfg.weights);
    let grid = cfg.time_grid().unwrap();
    let x0 = cfg.initial_states[0];
    let start = Instant::now();
    let zero = Trajectory::constant(grid, [0.0; N_CONTROL]);
    let base = simulate_controlled(p, ctl, x0, &grid, &zero).unwrap();
    let base_ih = cumulated_infectious(&base).unwrap();
    let base_j = objective(&base, &zero, w, &grid).unwrap();
    let mut runs = Vec::new();
    let mut eff = std::collections::BTreeMap::new();
    for mask in StrategyMask::standard() {
        let r = forward_backward_sweep(p, ctl, w, x0, &grid, &mask, &cfg.sweep_options()).unwrap();
        let f = efficiency_index(cumulated_infectious(&r.states).unwrap(), base_ih).unwrap();
        c.check(
            r.converged && r.iterations <= 200 && r.objective_j < base_j,
            format!(
                "{}: converged in {} iterations, J = {:.5e} < J(0) = {base_j:.5e}, efficiency {f:.3}%",
                mask.name, r.iterations, r.objective_j
            ),
        );
        eff.insert(mask.name.clone(), f);
        runs.push(r);
    }
    let elapsed = start.elapsed();
    c.check(rel(base_ih, 4105.0) <= 0.05, format!("no-control cumulated Ih = {base_ih:.2} vs 4105 ± 5%"));
    c.check(within(eff["Z"], 88.05, 3.0), format!("efficiency of Z = {:.3} vs 88.05 ± 3", eff["Z"]));
    c.check(within(eff["Z1"], eff["Z"], 0.5), format!("|F(Z1) - F(Z)| = {:.3} <= 0.5", (eff["Z1"] - eff["Z"]).abs()));
    c.check(
        eff["Z1"] >= eff["Z2"] && eff["Z2"] >= eff["Z3"] && eff["Z3"] >= eff["Z4"],
        "F(Z1) >= F(Z2) >= F(Z3) >= F(Z4)".into(),
    );
    c.runtime(elapsed, Duration::from_secs(60));
    (c, ControlRuns { cfg, runs })
}

fn icer_criterion() -> Criterion {
    let mut c = Criterion::new(8, "cost-effectiveness ranking of the tabulated outcomes");
    let t = icer_analysis(&config("table9_icer.json").icer_reports).unwrap();
    let targets = [
        ("Z4", None, 8706.8473),
        ("Z3", Some("Z4"), -993.6407),
        ("Z3", None, 8569.4175),
        ("Z2", Some("Z3"), 17_005_192.0),
        ("Z1", Some("Z3"), -1333.3333),
    ];
    for (s, against, target) in targets {
        let v = t.icer(s, against).unwrap_or(f64::NAN);
        let label = against.map_or(format!("ICER({s})"), |a| format!("ICER({s}|{a})"));
        c.check(rel(v, target) < 5e-5, format!("{label} = {v:.4} vs {target}"));
    }
    let order = t.elimination_order();
    c.check(order == ["Z4", "Z2", "Z3"], format!("elimination order {order:?}"));
    let z = t.row("Z").map(|r| r.equivalent_to.clone());
    c.check(z == Some(Some("Z1".into())), "Z equivalent to Z1".into());
    c
}

fn ngm_radius(p: &ModelParams) -> f64 {
    let k = derive_constants(p);
    let ratio = vector_total_dfe(p).unwrap() / p.nh0();
    #[rustfmt::skip]
    let f = Matrix4::new(
        0.0, 0.0, p.a * p.beta_hv * p.eta_v, p.a * p.beta_hv,
        0.0, 0.0, 0.0, 0.0,
        p.a * p.beta_vh * p.eta_h * ratio, p.a * p.beta_vh * ratio, 0.0, 0.0,
        0.0, 0.0, 0.0, 0.0,
    );
    #[rustfmt::skip]
    let v = Matrix4::new(
        k.k3, 0.0, 0.0, 0.0,
        -p.gamma_h, k.k4, 0.0, 0.0,
        0.0, 0.0, k.k9, 0.0,
        0.0, 0.0, -p.gamma_v, k.k8,
    );
    (f * v.try_inverse().unwrap()).complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_state(rng: &mut ChaCha8Rng) -> StateVector {
    let scale = [1000.0, 300.0, 150.0, 100.0, 4000.0, 500.0, 200.0, 1e4, 5e3, 3e3];
    std::array::from_fn(|i| scale[i] * rng.random_range(0.05..1.5))
}

fn rk4_order() -> f64 {
    let err = |n: usize| {
        let grid = TimeGrid::new(0.0, 2.0, n).unwrap();
        let tr = rk4_forward(|t, x: &[f64; 1], _: &[f64; 0]| Ok([-x[0] + t]), [1.0], &grid, None).unwrap();
        (0..grid.len())
            .map(|i| (tr.values[i][0] - (grid.t(i) - 1.0 + 2.0 * (-grid.t(i)).exp())).abs())
            .fold(0.0, f64::max)
    };
    (err(20) / err(40)).log2()
}

fn property_criterion(ctl: &ControlRuns) -> Criterion {
    let mut c = Criterion::new(9, "property suites");
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    let draws = lhs_sample(&ParamDistribution::table2_default(), 1000, 7).unwrap();
    let worst = draws
        .iter()
        .filter(|p| net_reproductive_number(p) > 1.0)
        .map(|p| rel(basic_reproduction_number(p).unwrap(), ngm_radius(p)))
        .fold(0.0, f64::max);
    c.check(worst < 1e-10, format!("R0 vs next-generation spectral radius: worst rel {worst:.1e} over 1000 draws"));

    let (p, cp, w) = (&ctl.cfg.model, &ctl.cfg.control, &ctl.cfg.weights);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let x = random_state(&mut rng);
        let u: [f64; N_CONTROL] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
        let adj: StateVector = std::array::from_fn(|_| rng.random_range(-2e4..2e4));
        let field = adjoint_field(&x, &u, &adj, p, cp, w).unwrap();
        for i in 0..N_STATE {
            let h = 1e-5 * x[i].abs().max(1.0);
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let fd = -(hamiltonian(&xp, &u, &adj, p, cp, w).unwrap() - hamiltonian(&xm, &u, &adj, p, cp, w).unwrap())
                / (2.0 * h);
            worst = worst.max((field[i] - fd).abs() / fd.abs().max(1.0));
        }
    }
    c.check(worst < 1e-5, format!("adjoint field vs -dH/dx: worst rel {worst:.1e} over 100 points"));

    let mut worst = 0.0_f64;
    let mut interior = 0;
    let mut masks_ok = true;
    let mut terminal_ok = true;
    for r in &ctl.runs {
        terminal_ok &= *r.adjoints.last() == [0.0; N_STATE];
        for (k, u) in r.controls.values.iter().enumerate() {
            let (x, adj) = (&r.states.values[k], &r.adjoints.values[k]);
            let raw = unclamped_controls(x, adj, p, cp, w).unwrap();
            for i in 0..N_CONTROL {
                let expect = if r.strategy.active[i] { raw[i].clamp(0.0, 1.0) } else { 0.0 };
                masks_ok &=
                    (0.0..=1.0).contains(&u[i]) && (!r.strategy.active[i] && u[i] == 0.0 || r.strategy.active[i]);
                if r.strategy.active[i] && u[i] > 1e-3 && u[i] < 1.0 - 1e-3 && expect > 1e-3 && expect < 1.0 - 1e-3 {
                    worst = worst.max((u[i] - expect).abs());
                    interior += 1;
                }
            }
        }
    }
    c.check(
        worst < 1e-2,
        format!("stationarity at {interior} interior control nodes: worst |u - u*(x, lambda)| = {worst:.1e}"),
    );
    c.check(terminal_ok, "transversality: terminal adjoints are exactly zero".into());
    c.check(masks_ok, "controls lie in [0, 1] and inactive controls vanish".into());

    let grid = TimeGrid::new(0.0, 20.0, 400).unwrap();
    let mut invariant = true;
    for _ in 0..20 {
        let x0 = random_state(&mut rng);
        let controls = Trajectory {
            grid,
            values: (0..grid.len()).map(|_| std::array::from_fn(|_| rng.random_range(0.0..1.0))).collect(),
        };
        let tr = simulate_controlled(p, cp, x0, &grid, &controls).unwrap();
        let bound = x0[..4].iter().sum::<f64>().max(p.nh0());
        invariant &=
            tr.values.iter().all(|x| x.iter().all(|v| *v >= 0.0) && x[..4].iter().sum::<f64>() <= bound * (1.0 + 1e-9));
    }
    c.check(invariant, "positivity and human bound under random controls".into());

    let mut block_ok = true;
    let mut full_ok = true;
    let lgrid = TimeGrid::new(0.0, 200.0, 2000).unwrap();
    for _ in 0..20 {
        let mut q = ModelParams::baseline();
        q.mu_b = rng.random_range(0.005..0.05);
        let mut x0 = random_state(&mut rng);
        let humans: f64 = x0[..4].iter().sum();
        let target = q.nh0() * rng.random_range(0.2..1.0);
        for v in &mut x0[..4] {
            *v *= target / humans;
        }
        let tr = rk4_forward(|_, x, _: &[f64; 0]| basic_field(x, &q), x0, &lgrid, None).unwrap();
        let rep = lyapunov_trivial_check(&q, &tr).unwrap();
        block_ok &= rep.max_increment_vector_block <= 1e-9;
        full_ok &= rep.monotone;
    }
    c.check(block_ok, "Lyapunov: vector and aquatic part non-increasing for N <= 1".into());
    c.check(full_ok, "Lyapunov: full candidate non-increasing for starts in the invariant region".into());

    let order = rk4_order();
    c.check((3.8..4.3).contains(&order), format!("RK4 observed order {order:.3}"));
    c
}

fn main() {
    let (control, runs) = control_criterion();
    let criteria = [
        thresholds_criterion(),
        quadratic_criterion(),
        direction_criterion(),
        scan_criterion(),
        bistability_criterion(),
        sensitivity_criterion(),
        control,
        icer_criterion(),
        property_criterion(&runs),
    ];
    let passed = criteria.iter().map(Criterion::print).filter(|p| *p).count();
    println!("acceptance: {passed} of {} criteria pass", criteria.len());
}
