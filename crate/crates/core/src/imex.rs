//! SBDF2 and variable-step VSSBDF2 semi-implicit steps over an abstract
//! problem split `u' = f(u) + g(u)`.
//!
//! `f` is the (possibly nonlinear) explicitly treated term and `g` is a
//! linear, stiff, implicitly treated operator. A step therefore costs a
//! few explicit evaluations plus one shifted linear solve
//! `(c I - dt G) x = rhs`, which each problem implements in whatever
//! form its operator makes cheap (tridiagonal for the PDE models here).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// The contract a model exposes to the time steppers.
///
/// `apply_g` must be linear; the steppers and the stability analysis
/// both rely on `g` having a constant matrix representation.
pub trait ImexProblem: Sync {
    fn dim(&self) -> usize;

    /// Explicit term `f(u, t)`.
    fn eval_f(&self, u: &DVector<f64>, t: f64) -> Result<DVector<f64>>;

    /// Action of the linear implicit operator `G u`.
    fn apply_g(&self, u: &DVector<f64>) -> DVector<f64>;

    /// Solve `(c I - dt G) x = rhs`.
    fn solve_shifted(&self, c: f64, dt: f64, rhs: &DVector<f64>) -> Result<DVector<f64>>;

    /// Hook invoked with each freshly computed stage value, e.g. to
    /// re-establish an elliptic constraint. Default: no-op.
    fn post_stage(&self, _u: &mut DVector<f64>, _t: f64) -> Result<()> {
        Ok(())
    }
}

/// The two time levels a two-step method consumes.
#[derive(Clone, Debug)]
pub struct StepperHistory {
    /// State at `t_now - dt_old`.
    pub u_prev: DVector<f64>,
    /// State at `t_now`.
    pub u_now: DVector<f64>,
    pub t_now: f64,
    pub dt_old: f64,
}

impl StepperHistory {
    pub fn new(u_prev: DVector<f64>, u_now: DVector<f64>, t_now: f64, dt_old: f64) -> Self {
        StepperHistory {
            u_prev,
            u_now,
            t_now,
            dt_old,
        }
    }

    pub fn t_prev(&self) -> f64 {
        self.t_now - self.dt_old
    }

    /// Slide the window forward by one accepted step.
    pub fn advance(&mut self, u_next: DVector<f64>, dt_used: f64) {
        self.u_prev = std::mem::replace(&mut self.u_now, u_next);
        self.t_now += dt_used;
        self.dt_old = dt_used;
    }
}

/// Shared core of the constant-step and variable-step schemes:
/// `(c_new u^{n+1} - c_now u^n + c_old u^{n-1})/dt
///  = g(u^{n+1}) + c_now f(u^n) - (c_now - 1) f(u^{n-1})`.
fn step_core(
    problem: &dyn ImexProblem,
    hist: &StepperHistory,
    dt: f64,
    c_new: f64,
    c_now: f64,
    c_old: f64,
) -> Result<DVector<f64>> {
    let f_now = problem.eval_f(&hist.u_now, hist.t_now)?;
    let f_prev = problem.eval_f(&hist.u_prev, hist.t_prev())?;
    // The explicit weights are (c_now, -(c_now - 1)): (2, -1) for SBDF2
    // and ((1+w), -w) for VSSBDF2.
    let rhs = &hist.u_now * c_now - &hist.u_prev * c_old
        + (f_now * c_now - f_prev * (c_now - 1.0)) * dt;
    let mut u_next = problem.solve_shifted(c_new, dt, &rhs).map_err(|e| match e {
        Error::NumericFailure { what, .. } => Error::numeric_at(what, dt),
        other => other,
    })?;
    problem.post_stage(&mut u_next, hist.t_now + dt)?;
    Ok(u_next)
}

/// One constant-step SBDF2 step of size `dt`:
/// `(3/2 u^{n+1} - 2 u^n + 1/2 u^{n-1})/dt = g(u^{n+1}) + 2 f(u^n) - f(u^{n-1})`.
pub fn sbdf2_step(
    problem: &dyn ImexProblem,
    hist: &StepperHistory,
    dt: f64,
) -> Result<DVector<f64>> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("sbdf2_step: dt = {dt} must be positive")));
    }
    step_core(problem, hist, dt, 1.5, 2.0, 0.5)
}

/// One variable-step VSSBDF2 step of size `dt_now`, with
/// `omega = dt_now / dt_old`:
/// `((1+2w)/(1+w) u^{n+1} - (1+w) u^n + w^2/(1+w) u^{n-1})/dt_now
///  = g(u^{n+1}) + (1+w) f(u^n) - w f(u^{n-1})`.
///
/// At `omega = 1` the coefficients reduce exactly to the SBDF2 ones, so
/// the two entry points share one code path and agree bitwise.
pub fn vssbdf2_step(
    problem: &dyn ImexProblem,
    hist: &StepperHistory,
    dt_now: f64,
) -> Result<DVector<f64>> {
    if !(dt_now > 0.0) {
        return Err(Error::invalid(format!(
            "vssbdf2_step: dt_now = {dt_now} must be positive"
        )));
    }
    let omega = dt_now / hist.dt_old;
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::invalid(format!(
            "vssbdf2_step: step ratio omega = {omega} is not usable"
        )));
    }
    let c_new = (1.0 + 2.0 * omega) / (1.0 + omega);
    let c_now = 1.0 + omega;
    let c_old = omega * omega / (1.0 + omega);
    step_core(problem, hist, dt_now, c_new, c_now, c_old)
}

/// Bootstrap level from a single semi-implicit Euler step:
/// `(u^1 - u^0)/dt = g(u^1) + f(u^0)`.
pub fn bootstrap_step(
    problem: &dyn ImexProblem,
    u0: &DVector<f64>,
    t0: f64,
    dt: f64,
) -> Result<DVector<f64>> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!(
            "bootstrap_step: dt = {dt} must be positive"
        )));
    }
    let f0 = problem.eval_f(u0, t0)?;
    let rhs = u0 + f0 * dt;
    let mut u1 = problem.solve_shifted(1.0, dt, &rhs).map_err(|e| match e {
        Error::NumericFailure { what, .. } => Error::numeric_at(what, dt),
        other => other,
    })?;
    problem.post_stage(&mut u1, t0 + dt)?;
    Ok(u1)
}

/// Max-norm of `f(u) + g(u)`; zero at a numerical steady state.
pub fn steady_residual(problem: &dyn ImexProblem, u: &DVector<f64>) -> Result<f64> {
    let f = problem.eval_f(u, 0.0)?;
    let g = problem.apply_g(u);
    Ok((f + g).amax())
}

/// Dense linear test problem `u' = B u + A u` with `f = B u` explicit
/// and `g = A u` implicit. Mostly useful for tests and demos.
pub struct DenseLinearProblem {
    pub f_matrix: DMatrix<f64>,
    pub g_matrix: DMatrix<f64>,
}

impl DenseLinearProblem {
    pub fn new(f_matrix: DMatrix<f64>, g_matrix: DMatrix<f64>) -> Self {
        assert_eq!(f_matrix.nrows(), g_matrix.nrows());
        assert!(f_matrix.is_square() && g_matrix.is_square());
        DenseLinearProblem { f_matrix, g_matrix }
    }
}

impl ImexProblem for DenseLinearProblem {
    fn dim(&self) -> usize {
        self.g_matrix.nrows()
    }

    fn eval_f(&self, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(&self.f_matrix * u)
    }

    fn apply_g(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.g_matrix * u
    }

    fn solve_shifted(&self, c: f64, dt: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.dim();
        let m = DMatrix::<f64>::identity(n, n) * c - &self.g_matrix * dt;
        m.lu()
            .solve(rhs)
            .ok_or_else(|| Error::numeric_at("singular shifted linear system", dt))
    }
}
