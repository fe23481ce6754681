//! The adaptive stepper finds the SBDF2 stability threshold of the
//! logistic equation.
//!
//! For `u' = r u (1 - u)` split with `r u` implicit and `-r u^2`
//! explicit, the scheme linearized about the stable steady state
//! `u = 1` is conditionally stable with threshold `dt* = 4/(7r)`. The
//! run below shows the step size stabilizing at exactly that value and
//! the solution hovering a small distance away from the steady state.

use nalgebra::DVector;
use vssbdf2::adaptive::{integrate_with, AdaptiveConfig, IntegrateOptions};
use vssbdf2::scalar::LogisticProblem;
use vssbdf2::sweep::extract_dt_infinity;

fn main() {
    println!("r      dt* = 4/(7r)   dt_inf        ratio    |1 - u(750)|");
    for r in [0.5, 1.0, 2.0, 4.0] {
        let problem = LogisticProblem::new(r).unwrap();
        let dt_star = problem.dt_star();
        let cfg = AdaptiveConfig {
            dt_max: 2.0 * dt_star,
            dt_init: 1e-3 * dt_star,
            ..AdaptiveConfig::default()
        };
        let traj = integrate_with(
            &problem,
            &DVector::from_element(1, 0.01),
            0.0,
            750.0,
            &cfg,
            IntegrateOptions {
                state_stride: usize::MAX,
            },
        )
        .unwrap();
        let dt_inf = extract_dt_infinity(&traj.records, 100, cfg.dt_max)
            .value()
            .expect("plateau");
        println!(
            "{r:<6} {dt_star:<14.6e} {dt_inf:<13.6e} {:<8.5} {:.3e}",
            dt_inf / dt_star,
            (1.0 - traj.final_state[0]).abs()
        );
    }
}
