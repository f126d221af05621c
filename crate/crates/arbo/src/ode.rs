//! Fixed-step classic Runge–Kutta integration forward in time for states and
//! backward in time for adjoints.

use serde::Serialize;

use crate::error::{ArboError, Result};

/// Uniform time grid `t_i = t0 + i·dt`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    /// Initial time (days).
    pub t0: f64,
    /// Final time (days).
    pub tf: f64,
    /// Number of steps.
    pub n_steps: usize,
}

impl TimeGrid {
    /// Builds a grid, rejecting empty or reversed intervals.
    pub fn new(t0: f64, tf: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 || !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(ArboError::Precondition(format!(
                "time grid needs n_steps >= 1 and tf > t0 (got t0={t0}, tf={tf}, n_steps={n_steps})"
            )));
        }
        Ok(Self { t0, tf, n_steps })
    }

    /// Grid from a step size, rounding the step count to the nearest integer.
    pub fn with_step(t0: f64, tf: f64, dt: f64) -> Result<Self> {
        let n = ((tf - t0) / dt).round();
        if n.is_nan() || n < 1.0 {
            return Err(ArboError::Precondition(format!("step {dt} does not fit in [{t0}, {tf}]")));
        }
        Self::new(t0, tf, n as usize)
    }

    /// Step size.
    pub fn dt(&self) -> f64 {
        (self.tf - self.t0) / self.n_steps as f64
    }

    /// Time of node `i`.
    pub fn t(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt()
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    /// Always false; a grid has at least two nodes.
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Values of a `D`-dimensional quantity at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const D: usize> {
    /// Grid the values live on.
    pub grid: TimeGrid,
    /// One vector per node, in increasing time.
    pub values: Vec<[f64; D]>,
}

impl<const D: usize> Trajectory<D> {
    /// Constant trajectory.
    pub fn constant(grid: TimeGrid, value: [f64; D]) -> Self {
        Self { grid, values: vec![value; grid.len()] }
    }

    /// Component `k` at every node.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    /// Value at the final node.
    pub fn last(&self) -> &[f64; D] {
        self.values.last().expect("trajectory has at least one node")
    }

    fn check_grid(&self, grid: &TimeGrid, what: &str) -> Result<()> {
        if self.grid != *grid || self.values.len() != grid.len() {
            return Err(ArboError::GridMismatch(format!("{what} is not on the integration grid")));
        }
        Ok(())
    }
}

fn axpy<const D: usize>(x: &[f64; D], a: f64, k: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| x[i] + a * k[i])
}

fn midpoint<const D: usize>(a: &[f64; D], b: &[f64; D]) -> [f64; D] {
    std::array::from_fn(|i| 0.5 * (a[i] + b[i]))
}

fn finite_or<const D: usize>(x: &[f64; D], step: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ArboError::NonFinite { step })
    }
}

/// Classic RK4 of `x' = field(t, x, u)` over the grid.
///
/// With a control trajectory, stage controls at half steps are the linear
/// interpolation between adjacent nodes; without one, zeros are passed.
pub fn rk4_forward<const D: usize, const C: usize, F>(
    mut field: F,
    x0: [f64; D],
    grid: &TimeGrid,
    controls: Option<&Trajectory<C>>,
) -> Result<Trajectory<D>>
where
    F: FnMut(f64, &[f64; D], &[f64; C]) -> Result<[f64; D]>,
{
    if let Some(u) = controls {
        u.check_grid(grid, "control trajectory")?;
    }
    finite_or(&x0, 0)?;
    let zero = [0.0; C];
    let ctrl = |i: usize| controls.map_or(zero, |u| u.values[i]);
    let dt = grid.dt();
    let mut values = Vec::with_capacity(grid.len());
    values.push(x0);
    let mut x = x0;
    for i in 0..grid.n_steps {
        let t = grid.t(i);
        let (u0, u1) = (ctrl(i), ctrl(i + 1));
        let um = midpoint(&u0, &u1);
        let k1 = field(t, &x, &u0)?;
        let k2 = field(t + 0.5 * dt, &axpy(&x, 0.5 * dt, &k1), &um)?;
        let k3 = field(t + 0.5 * dt, &axpy(&x, 0.5 * dt, &k2), &um)?;
        let k4 = field(t + dt, &axpy(&x, dt, &k3), &u1)?;
        x = std::array::from_fn(|j| x[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        finite_or(&x, i + 1)?;
        values.push(x);
    }
    Ok(Trajectory { grid: *grid, values })
}

/// Classic RK4 of `λ' = field(t, λ, x, u)` from `tf` back to `t0`.
///
/// Stage states and controls at half steps are averages of adjacent nodes.
pub fn rk4_backward<const D: usize, const S: usize, const C: usize, F>(
    mut field: F,
    terminal: [f64; D],
    grid: &TimeGrid,
    states: &Trajectory<S>,
    controls: &Trajectory<C>,
) -> Result<Trajectory<D>>
where
    F: FnMut(f64, &[f64; D], &[f64; S], &[f64; C]) -> Result<[f64; D]>,
{
    states.check_grid(grid, "state trajectory")?;
    controls.check_grid(grid, "control trajectory")?;
    finite_or(&terminal, grid.n_steps)?;
    let dt = grid.dt();
    let mut values = vec![[0.0; D]; grid.len()];
    values[grid.n_steps] = terminal;
    let mut lam = terminal;
    for i in (1..=grid.n_steps).rev() {
        let t = grid.t(i);
        let (x1, x0) = (&states.values[i], &states.values[i - 1]);
        let (u1, u0) = (&controls.values[i], &controls.values[i - 1]);
        let xm = midpoint(x1, x0);
        let um = midpoint(u1, u0);
        let k1 = field(t, &lam, x1, u1)?;
        let k2 = field(t - 0.5 * dt, &axpy(&lam, -0.5 * dt, &k1), &xm, &um)?;
        let k3 = field(t - 0.5 * dt, &axpy(&lam, -0.5 * dt, &k2), &xm, &um)?;
        let k4 = field(t - dt, &axpy(&lam, -dt, &k3), x0, u0)?;
        lam = std::array::from_fn(|j| lam[j] - dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        finite_or(&lam, i - 1)?;
        values[i - 1] = lam;
    }
    Ok(Trajectory { grid: *grid, values })
}

/// Trapezoidal integral of samples on a uniform grid.
pub fn trapezoid(grid: &TimeGrid, y: &[f64]) -> Result<f64> {
    if y.len() != grid.len() {
        return Err(ArboError::GridMismatch(format!("{} samples for {} nodes", y.len(), grid.len())));
    }
    let inner: f64 = y[1..y.len() - 1].iter().sum();
    Ok(grid.dt() * (inner + 0.5 * (y[0] + y[y.len() - 1])))
}
