//! Relaxation of the electrochemical cell to its steady state under the
//! adaptive stepper, showing the three plateau signatures: the step
//! size stabilizes below dt_max, the error estimate stays inside the
//! acceptance window, and the solution stalls a small distance from the
//! steady state.

use vssbdf2::adaptive::{integrate_with, AdaptiveConfig, IntegrateOptions};
use vssbdf2::mesh::Mesh;
use vssbdf2::pnp_fbv::{PnpModel, PnpParams};
use vssbdf2::steady::{find_steady, SteadyOptions};
use vssbdf2::sweep::extract_dt_infinity;

fn main() {
    let model = PnpModel::new(
        PnpParams::with_voltage(0.05, 2.0),
        Mesh::uniform(90).unwrap(),
    )
    .unwrap();
    let u0 = model.pack(&model.default_initial_state());
    let cfg = AdaptiveConfig {
        dt_init: 1e-5,
        ..AdaptiveConfig::default()
    };
    let traj = integrate_with(
        &model,
        &u0,
        0.0,
        120.0,
        &cfg,
        IntegrateOptions {
            state_stride: usize::MAX,
        },
    )
    .unwrap();

    println!("accepted steps: {}", traj.accepted_steps);
    println!("attempted steps: {}", traj.records.len());
    let in_window = traj
        .records
        .iter()
        .filter(|r| r.accepted)
        .filter(|r| r.lte_estimate <= cfg.tol + cfg.range)
        .count();
    println!(
        "accepted estimates inside the window: {}/{}",
        in_window, traj.accepted_steps
    );
    let dtinf = extract_dt_infinity(&traj.records, 1000, cfg.dt_max);
    match dtinf.value() {
        Some(v) => println!("dt_infinity = {v:.6e} ({})", dtinf.status()),
        None => println!("dt_infinity: {}", dtinf.status()),
    }

    let steady = find_steady(&model, &u0, &SteadyOptions::default()).unwrap();
    println!("steady residual = {:.3e}", steady.residual);
    let dev = (&traj.final_state - &steady.state).amax();
    println!("|u(120) - u_ss| = {dev:.3e}  (hovering, not converging)");
    let (mp, mm) = model.species_masses(&traj.final_state);
    println!("species masses at t = 120: c+ = {mp:.12}, c- = {mm:.12}");
}
