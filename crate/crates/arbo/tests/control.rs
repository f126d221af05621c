use arbo::control::{
    adjoint_field, characterize_controls, forward_backward_sweep, hamiltonian, objective, simulate_controlled,
    unclamped_controls, ObjectiveWeights, StrategyMask, SweepOptions,
};
use arbo::model::{ControlParams, ModelParams, StateVector, EGG, LARVA, N_CONTROL, N_STATE, RH, SH, SV};
use arbo::ode::{TimeGrid, Trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng) -> StateVector {
    let scale = [1000.0, 300.0, 150.0, 100.0, 4000.0, 500.0, 200.0, 1e4, 5e3, 3e3];
    std::array::from_fn(|i| scale[i] * rng.random_range(0.05..1.5))
}

fn random_adjoint(rng: &mut ChaCha8Rng) -> StateVector {
    std::array::from_fn(|_| rng.random_range(-2e4..2e4))
}

fn random_controls(rng: &mut ChaCha8Rng) -> [f64; N_CONTROL] {
    std::array::from_fn(|_| rng.random_range(0.0..1.0))
}

fn setup() -> (ModelParams, ControlParams, ObjectiveWeights) {
    (ModelParams::baseline(), ControlParams::baseline(), ObjectiveWeights::baseline())
}

#[test]
fn adjoint_field_is_negative_state_gradient_of_hamiltonian() {
    let (p, c, w) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let x = random_state(&mut rng);
        let u = random_controls(&mut rng);
        let adj = random_adjoint(&mut rng);
        let field = adjoint_field(&x, &u, &adj, &p, &c, &w).unwrap();
        for i in 0..N_STATE {
            let h = 1e-5 * x[i].abs().max(1.0);
            let (mut xp, mut xm) = (x, x);
            xp[i] += h;
            xm[i] -= h;
            let fd = -(hamiltonian(&xp, &u, &adj, &p, &c, &w).unwrap()
                - hamiltonian(&xm, &u, &adj, &p, &c, &w).unwrap())
                / (2.0 * h);
            let err = (field[i] - fd).abs() / fd.abs().max(1.0);
            assert!(err < 1e-5, "component {i}: analytic {} vs fd {fd}", field[i]);
        }
    }
}

#[test]
fn unclamped_controls_are_stationary_points_of_the_hamiltonian() {
    let (p, c, w) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let x = random_state(&mut rng);
        let adj = random_adjoint(&mut rng);
        let star = unclamped_controls(&x, &adj, &p, &c, &w).unwrap();
        for i in 0..N_CONTROL {
            let h = 1e-4 * star[i].abs().max(1.0);
            let (mut up, mut um) = (star, star);
            up[i] += h;
            um[i] -= h;
            let d = (hamiltonian(&x, &up, &adj, &p, &c, &w).unwrap() - hamiltonian(&x, &um, &adj, &p, &c, &w).unwrap())
                / (2.0 * h);
            let curvature = 2.0 * w.b[i];
            assert!(d.abs() < 1e-5 * curvature * star[i].abs().max(1.0) + 1e-6, "u{} derivative {d}", i + 1);
        }
    }
}

#[test]
fn characterised_controls_are_clamped_and_masked() {
    let (p, c, w) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for mask in StrategyMask::standard() {
        for _ in 0..50 {
            let x = random_state(&mut rng);
            let adj = random_adjoint(&mut rng);
            let raw = unclamped_controls(&x, &adj, &p, &c, &w).unwrap();
            let u = characterize_controls(&x, &adj, &p, &c, &w, &mask).unwrap();
            for i in 0..N_CONTROL {
                let expected = if mask.active[i] { raw[i].clamp(0.0, 1.0) } else { 0.0 };
                assert_eq!(u[i], expected);
            }
        }
    }
}

#[test]
fn vaccination_control_vanishes_when_susceptible_and_recovered_costates_agree() {
    let (p, c, w) = setup();
    let x = [700.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 1e4, 5e3, 3e3];
    let mut adj = [0.0; N_STATE];
    adj[SH] = 5.0;
    adj[RH] = 5.0;
    assert_eq!(unclamped_controls(&x, &adj, &p, &c, &w).unwrap()[0], 0.0);
}

#[test]
fn larvicide_control_vanishes_without_aquatic_stages() {
    let (p, c, w) = setup();
    let mut x = [700.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 1e4, 5e3, 3e3];
    x[EGG] = 0.0;
    x[LARVA] = 0.0;
    let adj = [100.0; N_STATE];
    assert_eq!(unclamped_controls(&x, &adj, &p, &c, &w).unwrap()[4], 0.0);
}

#[test]
fn controlled_trajectories_stay_in_the_invariant_region() {
    let (p, c, _) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let grid = TimeGrid::new(0.0, 20.0, 400).unwrap();
    for _ in 0..40 {
        let x0 = random_state(&mut rng);
        let controls = Trajectory { grid, values: (0..grid.len()).map(|_| random_controls(&mut rng)).collect() };
        let tr = simulate_controlled(&p, &c, x0, &grid, &controls).unwrap();
        let nh0 = x0[..4].iter().sum::<f64>();
        let nh_bound = nh0.max(p.nh0());
        for x in &tr.values {
            assert!(x.iter().all(|v| *v >= -1e-9), "{x:?}");
            assert!(x[..4].iter().sum::<f64>() <= nh_bound * (1.0 + 1e-9));
            assert!(x[EGG] <= x0[EGG].max(p.cap_e) * (1.0 + 1e-9));
            assert!(x[LARVA] <= x0[LARVA].max(p.cap_l) * (1.0 + 1e-9));
            assert!(x[SV] >= 0.0);
        }
    }
}

fn reference_problem() -> (ModelParams, ControlParams, ObjectiveWeights, StateVector, TimeGrid) {
    let (p, c, w) = setup();
    let x0 = [700.0, 220.0, 100.0, 60.0, 3000.0, 400.0, 120.0, 1e4, 5e3, 3e3];
    (p, c, w, x0, TimeGrid::with_step(0.0, 20.0, 0.01).unwrap())
}

#[test]
fn sweep_converges_lowers_the_objective_and_satisfies_transversality() {
    let (p, c, w, x0, grid) = reference_problem();
    let zero = Trajectory::constant(grid, [0.0; N_CONTROL]);
    let j0 = objective(&simulate_controlled(&p, &c, x0, &grid, &zero).unwrap(), &zero, &w, &grid).unwrap();
    for mask in StrategyMask::standard() {
        let r = forward_backward_sweep(&p, &c, &w, x0, &grid, &mask, &SweepOptions::default()).unwrap();
        assert!(r.converged && r.iterations <= 200, "{} after {}", mask.name, r.iterations);
        assert!(r.objective_j < j0, "{}: {} >= {j0}", mask.name, r.objective_j);
        assert_eq!(*r.adjoints.last(), [0.0; N_STATE]);
        for (i, active) in mask.active.iter().enumerate() {
            if !active {
                assert!(r.controls.values.iter().all(|u| u[i] == 0.0));
            }
        }
        assert!(r.controls.values.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }
}

#[test]
fn converged_interior_controls_are_near_stationary() {
    let (p, c, w, x0, grid) = reference_problem();
    let options = SweepOptions { tol: 1e-8, max_iters: 400, ..SweepOptions::default() };
    let r = forward_backward_sweep(&p, &c, &w, x0, &grid, &StrategyMask::all(), &options).unwrap();
    assert!(r.converged);
    let mut interior = 0;
    for k in (0..grid.len()).step_by(10) {
        let (x, adj, u) = (&r.states.values[k], &r.adjoints.values[k], &r.controls.values[k]);
        for i in 0..N_CONTROL {
            if u[i] > 1e-3 && u[i] < 1.0 - 1e-3 {
                let h = 1e-6;
                let (mut up, mut um) = (*u, *u);
                up[i] += h;
                um[i] -= h;
                let d = (hamiltonian(x, &up, adj, &p, &c, &w).unwrap() - hamiltonian(x, &um, adj, &p, &c, &w).unwrap())
                    / (2.0 * h);
                assert!(d.abs() < 1e-3 * 2.0 * w.b[i], "node {k} u{}: dH/du = {d}", i + 1);
                interior += 1;
            }
        }
    }
    assert!(interior > 10, "{interior}");
}

#[test]
fn sweep_honours_an_initial_guess_and_rejects_bad_options() {
    let (p, c, w, x0, grid) = reference_problem();
    let first = forward_backward_sweep(&p, &c, &w, x0, &grid, &StrategyMask::z1(), &SweepOptions::default()).unwrap();
    let warm = SweepOptions { initial_guess: Some(first.controls.clone()), ..SweepOptions::default() };
    let second = forward_backward_sweep(&p, &c, &w, x0, &grid, &StrategyMask::z1(), &warm).unwrap();
    assert!(second.iterations < first.iterations);
    let bad = SweepOptions { mix: 0.0, ..SweepOptions::default() };
    assert!(forward_backward_sweep(&p, &c, &w, x0, &grid, &StrategyMask::z1(), &bad).is_err());
}
