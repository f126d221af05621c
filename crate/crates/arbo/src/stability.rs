//! Local stability verdicts, centre-manifold bifurcation coefficients at the
//! transcritical point and a numeric Lyapunov monotonicity harness.

use nalgebra::{DMatrix, Matrix4, SMatrix, SVector};
use serde::Serialize;

use crate::autodiff::HyperDual;
use crate::error::{ArboError, Result};
use crate::model::{
    basic_field, basic_field_t, controlled_field, derive_constants, ControlParams, ControlValues, ModelParams,
    StateVector, EH, EV, IH, IV, N_STATE, RH, SH, SV,
};
use crate::ode::Trajectory;
use crate::thresholds::{bifurcation_thresholds, dfe_components, dfe_trivial, net_reproductive_number};

/// Dense 10×10 matrix.
pub type Matrix10 = SMatrix<f64, N_STATE, N_STATE>;

/// Eigenvalue band treated as neither stable nor unstable.
pub const STABILITY_TOL: f64 = 1e-9;

/// Which right-hand side to linearise.
#[derive(Debug, Clone, Copy)]
pub enum FieldKind<'a> {
    /// Uncontrolled system.
    Basic,
    /// Controlled system with frozen controls.
    Controlled {
        /// Control values.
        u: ControlValues,
        /// Control efficacies.
        c: &'a ControlParams,
    },
}

/// Central finite-difference Jacobian with steps `1e-6·max(1, |x_i|)`.
pub fn jacobian(x: &StateVector, p: &ModelParams, kind: FieldKind<'_>) -> Result<Matrix10> {
    let f = |y: &StateVector| match kind {
        FieldKind::Basic => basic_field(y, p),
        FieldKind::Controlled { u, c } => controlled_field(y, &u, p, c),
    };
    let mut j = Matrix10::zeros();
    for i in 0..N_STATE {
        let h = 1e-6 * x[i].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[i] += h;
        xm[i] -= h;
        let (fp, fm) = (f(&xp)?, f(&xm)?);
        for k in 0..N_STATE {
            j[(k, i)] = (fp[k] - fm[k]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Jacobian of the uncontrolled field by forward-mode differentiation.
pub fn jacobian_exact(x: &StateVector, p: &ModelParams) -> Result<Matrix10> {
    if x[SH] + x[EH] + x[IH] + x[RH] == 0.0 {
        return Err(ArboError::ZeroPopulation);
    }
    let mut j = Matrix10::zeros();
    for i in 0..N_STATE {
        let xd: [HyperDual; N_STATE] =
            std::array::from_fn(|k| HyperDual::new(x[k], if k == i { 1.0 } else { 0.0 }, 0.0, 0.0));
        let f = basic_field_t(&xd, p, HyperDual::from(p.beta_hv));
        for k in 0..N_STATE {
            j[(k, i)] = f[k].e1;
        }
    }
    Ok(j)
}

/// Stability class of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stability {
    /// Largest real part below `−tol`.
    Stable,
    /// Largest real part within `±tol`.
    Marginal,
    /// Largest real part above `tol`.
    Unstable,
}

/// How a verdict was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StabilityMethod {
    /// Dense eigenvalue computation.
    Eigen,
    /// Hurwitz determinants of the characteristic polynomial.
    RouthHurwitz,
}

/// Local stability verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict {
    /// Largest real part of the spectrum (1/day).
    pub eigen_max_real: f64,
    /// Stability class.
    pub stability: Stability,
    /// Method used.
    pub method: StabilityMethod,
}

impl StabilityVerdict {
    /// `true` for asymptotically stable verdicts.
    pub fn stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

fn classify(max_real: f64) -> Stability {
    if max_real < -STABILITY_TOL {
        Stability::Stable
    } else if max_real > STABILITY_TOL {
        Stability::Unstable
    } else {
        Stability::Marginal
    }
}

/// Largest real part of the eigenvalues of a square matrix.
pub fn max_real_eigenvalue<const D: usize>(j: &SMatrix<f64, D, D>) -> f64 {
    DMatrix::from_column_slice(D, D, j.as_slice())
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Eigenvalue verdict for a Jacobian.
pub fn eigen_verdict(j: &Matrix10) -> StabilityVerdict {
    let m = max_real_eigenvalue(j);
    StabilityVerdict { eigen_max_real: m, stability: classify(m), method: StabilityMethod::Eigen }
}

/// Eigenvalue verdict for an equilibrium of the uncontrolled system.
pub fn equilibrium_stability(x: &StateVector, p: &ModelParams) -> Result<StabilityVerdict> {
    Ok(eigen_verdict(&jacobian_exact(x, p)?))
}

/// Routh–Hurwitz data for the adult-vector and aquatic block at the trivial equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RouthHurwitzReport {
    /// Quartic coefficients `quartic_c1..quartic_c4`.
    pub quartic: [f64; 4],
    /// Hurwitz determinants `H1..H4`.
    pub hurwitz: [f64; 4],
    /// Verdict: stable iff every determinant is positive.
    pub verdict: StabilityVerdict,
}

/// Routh–Hurwitz verdict for the trivial equilibrium.
pub fn routh_hurwitz_trivial(p: &ModelParams) -> RouthHurwitzReport {
    let k = derive_constants(p);
    let n = net_reproductive_number(p);
    let (k5, k6, k7, k8) = (k.k5, k.k6, k.k7, k.k8);
    let c1 = k8 + k7 + k6 + k5;
    let c2 = (k7 + k6 + k5) * k8 + (k6 + k5) * k7 + k5 * k6;
    let c3 = ((k6 + k5) * k7 + k5 * k6) * k8 + k5 * k6 * k7;
    let c4 = k5 * k6 * k7 * k8 * (1.0 - n);
    let h1 = c1;
    let h2 = c1 * c2 - c3;
    let h3 = c1 * c2 * c3 - c1 * c1 * c4 - c3 * c3;
    let h4 = c4 * h3;
    let all_positive = [h1, h2, h3, h4].iter().all(|h| *h > 0.0);
    #[rustfmt::skip]
    let block = Matrix4::new(
        -k8, 0.0, 0.0, p.theta,
        p.mu_b, -k5, 0.0, 0.0,
        0.0, p.s, -k6, 0.0,
        0.0, 0.0, p.l, -k7,
    );
    let m = max_real_eigenvalue(&block);
    let stability = if all_positive {
        Stability::Stable
    } else if c4 == 0.0 {
        Stability::Marginal
    } else {
        Stability::Unstable
    };
    RouthHurwitzReport {
        quartic: [c1, c2, c3, c4],
        hurwitz: [h1, h2, h3, h4],
        verdict: StabilityVerdict { eigen_max_real: m, stability, method: StabilityMethod::RouthHurwitz },
    }
}

/// Direction of the transcritical bifurcation at `R0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Endemic branch emerges for `R0 < 1`.
    Backward,
    /// Endemic branch emerges for `R0 > 1`.
    Forward,
}

/// Centre-manifold coefficients at `β_hv = β*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationCoefficients {
    /// Transcritical value of `β_hv`.
    pub beta_star: f64,
    /// Positive contribution to `bif_a1`.
    pub zeta1: f64,
    /// Negative contribution to `bif_a1`.
    pub zeta2: f64,
    /// `ζ1 − ζ2`.
    pub bif_a1: f64,
    /// `bif_a1` from the generic second-derivative sum.
    pub bif_a1_hessian: f64,
    /// Closed-form `bif_a2`.
    pub bif_a2: f64,
    /// `bif_a2` from the generic mixed-derivative sum.
    pub bif_a2_hessian: f64,
    /// Left null vector, scaled so `v·w = 1`.
    pub left_vec: StateVector,
    /// Right null vector, scaled so `w7 = 1`.
    pub right_vec: StateVector,
    /// Real part of the eigenvalue closest to zero.
    pub zero_eigenvalue: f64,
    /// Bifurcation direction (`Backward` iff `bif_a1 > 0`).
    pub direction: Direction,
}

/// Closed-form `(ζ1, ζ2, bif_a2)` for given null vectors at the biological
/// disease-free equilibrium `x1` with `β_hv = beta`.
pub fn zeta_closed_form(
    p: &ModelParams,
    x1: &StateVector,
    beta: f64,
    v: &StateVector,
    w: &StateVector,
) -> (f64, f64, f64) {
    let k = derive_constants(p);
    let nh = x1[SH];
    let sv_ratio = x1[SV] / nh;
    let ah = p.a * beta / nh;
    let av = p.a * p.beta_vh / nh;
    let hum = p.eta_h * w[EH] + w[IH];
    let vec = p.eta_v * w[EV] + w[IV];
    let w5_pos = w[SV] + k.k9 / p.gamma_v * w[IV];
    let zeta1 = v[EV] * (2.0 * av * hum * w5_pos - 2.0 * av * sv_ratio * hum * w[SH]);
    let zeta2 = 2.0 * v[EH] * ah * (w[EH] + w[IH] + w[RH]) * vec
        + v[EV]
            * (2.0 * av * hum * k.k9 / p.gamma_v * w[IV]
                + 2.0
                    * av
                    * sv_ratio
                    * (p.eta_h * w[EH] * w[EH] + (1.0 + p.eta_h) * w[EH] * w[IH] + w[IH] * w[IH] + hum * w[RH]));
    let a2 = p.a * v[EH] * vec * x1[SH] / nh;
    (zeta1, zeta2, a2)
}

/// Generic sums `Σ v_k w_i w_j ∂²f_k/∂x_i∂x_j` and `Σ v_k w_i ∂²f_k/∂x_i∂β_hv`.
pub fn hessian_sums(p: &ModelParams, x1: &StateVector, beta: f64, v: &StateVector, w: &StateVector) -> (f64, f64) {
    let xx: [HyperDual; N_STATE] = std::array::from_fn(|i| HyperDual::new(x1[i], w[i], w[i], 0.0));
    let fxx = basic_field_t(&xx, p, HyperDual::from(beta));
    let xb: [HyperDual; N_STATE] = std::array::from_fn(|i| HyperDual::new(x1[i], w[i], 0.0, 0.0));
    let fxb = basic_field_t(&xb, p, HyperDual::new(beta, 0.0, 1.0, 0.0));
    let a1 = (0..N_STATE).map(|k| v[k] * fxx[k].e12).sum();
    let a2 = (0..N_STATE).map(|k| v[k] * fxb[k].e12).sum();
    (a1, a2)
}

/// Null vectors and bifurcation coefficients at the transcritical point.
pub fn bifurcation_coefficients(p: &ModelParams) -> Result<BifurcationCoefficients> {
    let report = bifurcation_thresholds(p);
    let beta_star = report.beta_star.ok_or(ArboError::Threshold { n: report.n })?;
    let mut ps = *p;
    ps.beta_hv = beta_star;
    let x1 = dfe_components(&ps)?;
    let j = jacobian_exact(&x1, &ps)?;

    let svd = j.svd(true, true);
    let (u, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let mut order: Vec<usize> = (0..N_STATE).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let (smallest, second) = (svd.singular_values[order[0]], svd.singular_values[order[1]]);
    let largest = svd.singular_values[order[N_STATE - 1]];
    if !(smallest <= 1e-10 * largest && smallest <= 1e-6 * second) {
        return Err(ArboError::KernelDimension { smallest, second });
    }
    let wv: SVector<f64, N_STATE> = vt.row(order[0]).transpose();
    let vv: SVector<f64, N_STATE> = u.column(order[0]).into_owned();
    if wv[IV] == 0.0 {
        return Err(ArboError::KernelDimension { smallest, second });
    }
    let w: StateVector = std::array::from_fn(|i| wv[i] / wv[IV]);
    let vw: f64 = (0..N_STATE).map(|i| vv[i] * w[i]).sum();
    let v: StateVector = std::array::from_fn(|i| vv[i] / vw);

    let (zeta1, zeta2, bif_a2) = zeta_closed_form(&ps, &x1, beta_star, &v, &w);
    let (bif_a1_hessian, bif_a2_hessian) = hessian_sums(&ps, &x1, beta_star, &v, &w);
    let bif_a1 = zeta1 - zeta2;

    let zero_eigenvalue =
        j.complex_eigenvalues().iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).map_or(f64::NAN, |z| z.re);

    Ok(BifurcationCoefficients {
        beta_star,
        zeta1,
        zeta2,
        bif_a1,
        bif_a1_hessian,
        bif_a2,
        bif_a2_hessian,
        left_vec: v,
        right_vec: w,
        zero_eigenvalue,
        direction: if bif_a1 > 0.0 { Direction::Backward } else { Direction::Forward },
    })
}

/// Weights `g` of the linear function `⟨g, X − E0⟩`.
pub fn lyapunov_weights(p: &ModelParams) -> StateVector {
    let k = derive_constants(p);
    [
        1.0,
        1.0,
        1.0,
        1.0,
        1.0,
        1.0,
        1.0,
        k.k8 / p.mu_b,
        k.k5 * k.k8 / (p.mu_b * p.s),
        k.k5 * k.k6 * k.k8 / (p.mu_b * p.s * p.l),
    ]
}

/// Monotonicity of `⟨g, X − E0⟩` along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovReport {
    /// Function value at each node.
    pub values: Vec<f64>,
    /// Largest increase between consecutive nodes.
    pub max_increment: f64,
    /// Largest increase of the adult-vector and aquatic part alone.
    pub max_increment_vector_block: f64,
    /// `true` when `max_increment ≤ 1e-9·max(|L(0)|, 1)`.
    pub monotone: bool,
}

/// Evaluates the linear Lyapunov candidate along a trajectory; requires `N ≤ 1`.
pub fn lyapunov_trivial_check(p: &ModelParams, traj: &Trajectory<N_STATE>) -> Result<LyapunovReport> {
    let n = net_reproductive_number(p);
    if n > 1.0 {
        return Err(ArboError::Precondition(format!("Lyapunov check needs N <= 1, got {n}")));
    }
    let g = lyapunov_weights(p);
    let e0 = dfe_trivial(p);
    let full: Vec<f64> = traj.values.iter().map(|x| (0..N_STATE).map(|i| g[i] * (x[i] - e0[i])).sum()).collect();
    let block: Vec<f64> = traj.values.iter().map(|x| (SV..N_STATE).map(|i| g[i] * x[i]).sum()).collect();
    let max_inc = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let max_increment = max_inc(&full);
    let scale = full.first().map_or(1.0, |l0| l0.abs().max(1.0));
    Ok(LyapunovReport {
        max_increment,
        max_increment_vector_block: max_inc(&block),
        monotone: max_increment <= 1e-9 * scale,
        values: full,
    })
}
