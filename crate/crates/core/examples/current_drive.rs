//! Current-controlled operation: the state grows an auxiliary variable
//! `q = phi_x(1,t)` with its own rate equation enforcing current
//! conservation, and the cathode voltage becomes an output instead of
//! an input.

use vssbdf2::adaptive::{integrate_with, AdaptiveConfig, IntegrateOptions};
use vssbdf2::mesh::Mesh;
use vssbdf2::pnp_fbv::{PnpModel, PnpParams};
use vssbdf2::sweep::extract_dt_infinity;

fn main() {
    let model = PnpModel::new(
        PnpParams::with_current(0.1, 0.3),
        Mesh::uniform(60).unwrap(),
    )
    .unwrap();
    let u0 = model.pack(&model.default_initial_state());
    let cfg = AdaptiveConfig {
        dt_init: 1e-6,
        dt_max: 0.5,
        ..AdaptiveConfig::default()
    };
    let traj = integrate_with(
        &model,
        &u0,
        0.0,
        60.0,
        &cfg,
        IntegrateOptions {
            state_stride: usize::MAX,
        },
    )
    .unwrap();
    let state = model.unpack(&traj.final_state);
    let pot = model.potential(&traj.final_state).unwrap();
    println!("accepted steps: {}", traj.accepted_steps);
    println!("q = phi_x(1) at t = 60: {:.6}", state.q.unwrap());
    println!("recovered cathode voltage: {:.6}", pot.cathode_voltage());
    println!(
        "residual toward steady state: {:.3e}",
        model.steady_residual(&traj.final_state).unwrap()
    );
    let dtinf = extract_dt_infinity(&traj.records, 500, cfg.dt_max);
    println!("dt_infinity: {:?} ({})", dtinf.value(), dtinf.status());
}
