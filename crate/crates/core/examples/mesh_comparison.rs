//! The threshold depends on the mesh only mildly: the critical
//! eigenmodes are smooth, so refining near the electrodes does not send
//! dt* to zero the way a diffusive CFL constraint would.

use vssbdf2::mesh::Mesh;
use vssbdf2::pnp_fbv::{PnpModel, PnpParams};
use vssbdf2::stability::{assemble_jacobians, find_threshold};
use vssbdf2::steady::{find_steady, SteadyOptions};

fn main() {
    let meshes = [
        Mesh::uniform(90).unwrap(),
        Mesh::piecewise(0.1, 1.0 / 150.0, 4.0 / 75.0).unwrap(),
        Mesh::piecewise(0.1, 1.0 / 300.0, 2.0 / 75.0).unwrap(),
        Mesh::piecewise(0.1, 1.0 / 450.0, 4.0 / 225.0).unwrap(),
    ];
    let eps = 0.05;
    println!("mesh                                        nodes  dt*(eps = {eps})");
    let mut reference = None;
    for mesh in meshes {
        let model = PnpModel::new(PnpParams::with_voltage(eps, 2.0), mesh.clone()).unwrap();
        let u0 = model.pack(&model.default_initial_state());
        let steady = find_steady(&model, &u0, &SteadyOptions::default()).unwrap();
        let jac = assemble_jacobians(&model, &steady.state, None).unwrap();
        let report = find_threshold(&jac.j_f, &jac.j_g, 2e-4, 1.0, 1e-6).unwrap();
        let dt_star = report.dt_star.unwrap();
        let rel = match reference {
            None => {
                reference = Some(dt_star);
                0.0
            }
            Some(re) => (dt_star - re) / re * 100.0,
        };
        println!(
            "{:<43} {:<6} {dt_star:.6e}  ({rel:+.2}% vs uniform)",
            mesh.id(),
            mesh.n_nodes()
        );
    }
}
