//! Numerical steady states: adaptive search, fixed-step refinement, and
//! an optional Newton polish.
//!
//! The route follows what the rest of the crate needs: run the adaptive
//! stepper until the trajectory hovers near a steady state (its
//! limiting step size also estimates the stable range), then rerun with
//! constant SBDF2 steps safely below that limit so the iteration
//! contracts onto the fixed point, and finally polish with a couple of
//! damped Newton corrections on `f + g = 0`. Models with a conserved
//! quantity have a singular Jacobian (a one-parameter family of steady
//! states), so the Newton correction uses the pseudo-inverse, which
//! leaves the conserved direction untouched.

use crate::adaptive::{integrate_with, AdaptiveConfig, IntegrateOptions, StepRecord};
use crate::error::{Error, Result};
use crate::imex::{bootstrap_step, sbdf2_step, steady_residual, ImexProblem, StepperHistory};
use crate::stability::{exact_jacobian_g, numeric_jacobian_f};
use crate::sweep::{extract_dt_infinity, DtInfinity};
use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct SteadyOptions {
    /// Adaptive phase horizon.
    pub t_transient: f64,
    pub adaptive: AdaptiveConfig,
    /// Fixed-step size as a fraction of the adaptive limiting step.
    pub dt_fraction: f64,
    /// Target max-norm of `f + g`.
    pub residual_tol: f64,
    /// Cap on the fixed-step refinement horizon.
    pub t_refine_max: f64,
    pub newton_polish: bool,
    /// Warm start; skips the adaptive phase. The value is the starting
    /// state together with a trusted stable step size.
    pub warm_start: Option<(DVector<f64>, f64)>,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        SteadyOptions {
            t_transient: 60.0,
            adaptive: AdaptiveConfig {
                dt_init: 1e-5,
                ..AdaptiveConfig::default()
            },
            dt_fraction: 0.45,
            residual_tol: 1e-10,
            t_refine_max: 400.0,
            newton_polish: true,
            warm_start: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyOutcome {
    pub state: DVector<f64>,
    pub residual: f64,
    /// Limiting step of the adaptive phase, when it stabilized.
    pub dt_infinity: Option<f64>,
    /// Fixed step used in the refinement phase.
    pub dt_refine: f64,
    /// Attempt log of the adaptive phase (empty on warm starts).
    pub records: Vec<StepRecord>,
}

/// Find the steady state reached from `u0`.
pub fn find_steady(
    problem: &dyn ImexProblem,
    u0: &DVector<f64>,
    opts: &SteadyOptions,
) -> Result<SteadyOutcome> {
    let (mut u, dt_stable, dt_infinity, records) = match &opts.warm_start {
        Some((state, dt)) => (state.clone(), *dt, None, Vec::new()),
        None => {
            let traj = integrate_with(
                problem,
                u0,
                0.0,
                opts.t_transient,
                &opts.adaptive,
                IntegrateOptions {
                    state_stride: usize::MAX,
                },
            )?;
            let window = 100.min(traj.accepted_steps / 2).max(2);
            let dtinf = extract_dt_infinity(&traj.records, window, opts.adaptive.dt_max);
            let dt_stable = match dtinf {
                DtInfinity::Stabilized(v) => v,
                // no conditional plateau: any recent accepted step works
                _ => traj
                    .records
                    .iter()
                    .rev()
                    .filter(|r| r.accepted)
                    .nth(1)
                    .map_or(opts.adaptive.dt_max, |r| r.dt),
            };
            (traj.final_state, dt_stable, dtinf.value(), traj.records)
        }
    };

    // fixed-step contraction at a step size safely inside the stable
    // range
    let dt = (opts.dt_fraction * dt_stable).max(opts.adaptive.dt_min);
    let u1 = bootstrap_step(problem, &u, 0.0, dt)?;
    let mut hist = StepperHistory::new(u.clone(), u1, dt, dt);
    let mut residual = steady_residual(problem, &hist.u_now)?;
    let mut t = dt;
    let check_every = 50;
    let mut since_check = 0;
    let mut last_checked = residual;
    while t < opts.t_refine_max && residual > opts.residual_tol {
        let next = sbdf2_step(problem, &hist, dt)?;
        hist.advance(next, dt);
        t += dt;
        since_check += 1;
        if since_check >= check_every {
            since_check = 0;
            residual = steady_residual(problem, &hist.u_now)?;
            // stalled at the contraction floor
            if residual > 0.97 * last_checked && residual < 1e-6 {
                break;
            }
            last_checked = residual;
        }
    }
    u = hist.u_now.clone();
    residual = steady_residual(problem, &u)?;

    if opts.newton_polish && residual > opts.residual_tol * 1e-2 {
        let (polished, polished_residual) = newton_polish(problem, &u, residual)?;
        if polished_residual < residual {
            u = polished;
            residual = polished_residual;
        }
    }

    Ok(SteadyOutcome {
        state: u,
        residual,
        dt_infinity,
        dt_refine: dt,
        records,
    })
}

/// A few pseudo-inverse Newton corrections on `f + g = 0`; stops as
/// soon as a correction fails to reduce the residual.
fn newton_polish(
    problem: &dyn ImexProblem,
    u_start: &DVector<f64>,
    start_residual: f64,
) -> Result<(DVector<f64>, f64)> {
    let mut u = u_start.clone();
    let mut best = start_residual;
    let j_g = exact_jacobian_g(problem);
    for _ in 0..6 {
        let j_f = numeric_jacobian_f(problem, &u, crate::stability::default_fd_step(&u))?;
        let jacobian: DMatrix<f64> = &j_f + &j_g;
        let rhs = -(problem.eval_f(&u, 0.0)? + problem.apply_g(&u));
        let svd = jacobian.svd(true, true);
        let delta = svd
            .solve(&rhs, 1e-10)
            .map_err(|e| Error::numeric(format!("steady Newton solve failed: {e}")))?;
        let mut candidate = &u + &delta;
        // backtracking in case the full step overshoots
        let mut improved = false;
        for _ in 0..4 {
            let r = steady_residual(problem, &candidate)?;
            if r < best {
                best = r;
                u = candidate.clone();
                improved = true;
                break;
            }
            candidate = &u + (&candidate - &u) * 0.25;
        }
        if !improved || best < 1e-13 {
            break;
        }
    }
    Ok((u, best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;
    use crate::pnp_fbv::{PnpModel, PnpParams};
    use crate::scalar::LogisticProblem;

    #[test]
    fn logistic_steady_state_is_one() {
        let p = LogisticProblem::new(1.0).unwrap();
        let opts = SteadyOptions {
            t_transient: 60.0,
            adaptive: AdaptiveConfig {
                dt_max: 2.0,
                dt_init: 1e-3,
                ..AdaptiveConfig::default()
            },
            ..SteadyOptions::default()
        };
        let out = find_steady(&p, &DVector::from_element(1, 0.05), &opts).unwrap();
        assert!((out.state[0] - 1.0).abs() < 1e-10, "u_ss = {}", out.state[0]);
        assert!(out.residual < 1e-10);
    }

    #[test]
    fn pnp_steady_state_small_mesh() {
        let m = PnpModel::new(
            PnpParams::with_voltage(0.1, 2.0),
            Mesh::uniform(30).unwrap(),
        )
        .unwrap();
        let u0 = m.pack(&m.default_initial_state());
        let opts = SteadyOptions {
            t_transient: 30.0,
            ..SteadyOptions::default()
        };
        let out = find_steady(&m, &u0, &opts).unwrap();
        assert!(out.residual < 1e-9, "residual {}", out.residual);
        // a perturbed state is far from steady
        let mut bad = out.state.clone();
        for i in 0..31 {
            let x = i as f64 / 30.0;
            bad[i] += 0.1 * (2.0 * std::f64::consts::PI * x).sin();
        }
        assert!(m.steady_residual(&bad).unwrap() > 1e-3);
        // warm start converges quickly from the answer
        let warm = SteadyOptions {
            warm_start: Some((out.state.clone(), out.dt_refine)),
            ..opts
        };
        let again = find_steady(&m, &u0, &warm).unwrap();
        assert!(again.residual < 1e-9);
    }
}
