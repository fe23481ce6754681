//! Linear stability analysis of the electrochemical cell about its
//! numerical steady state: build the Jacobians, scan the companion
//! matrix spectrum in dt, bisect the threshold, and report the crossing
//! eigenpair.
//!
//! At eps = 0.05 one real eigenvalue leaves the unit circle at -1; at
//! eps = 0.12 a complex-conjugate pair crosses instead.

use vssbdf2::mesh::Mesh;
use vssbdf2::pnp_fbv::{PnpModel, PnpParams};
use vssbdf2::stability::{assemble_jacobians, find_threshold, Crossing};
use vssbdf2::steady::{find_steady, SteadyOptions};

fn main() {
    for eps in [0.05, 0.12] {
        let model = PnpModel::new(
            PnpParams::with_voltage(eps, 2.0),
            Mesh::uniform(90).unwrap(),
        )
        .unwrap();
        let u0 = model.pack(&model.default_initial_state());
        let steady = find_steady(&model, &u0, &SteadyOptions::default()).unwrap();
        let jac = assemble_jacobians(&model, &steady.state, None).unwrap();
        let report = find_threshold(&jac.j_f, &jac.j_g, 2e-4, 1.0, 1e-6).unwrap();

        println!("eps = {eps}");
        println!("  steady residual = {:.3e}", steady.residual);
        println!("  radius samples evaluated: {}", report.radius_samples.len());
        match (report.dt_star, report.crossing) {
            (Some(dt_star), Some(Crossing::RealMinusOne)) => {
                println!(
                    "  dt* = {dt_star:.6e}, one real eigenvalue crosses at {:.6}",
                    report.critical_eigenvalue.unwrap().re
                );
            }
            (Some(dt_star), Some(Crossing::ComplexPair(lam))) => {
                println!(
                    "  dt* = {dt_star:.6e}, complex pair crosses at {:.4} +/- {:.4}i",
                    lam.re, lam.im
                );
            }
            _ => println!("  no threshold found below dt = 1"),
        }
        if let Some(vec) = &report.critical_eigvec {
            let n = model.n_nodes();
            let max_c_plus = (0..n).map(|i| vec[i].norm()).fold(0.0f64, f64::max);
            let max_c_minus = (0..n).map(|i| vec[n + i].norm()).fold(0.0f64, f64::max);
            println!(
                "  critical eigenvector component magnitudes: c+ up to {max_c_plus:.3}, c- up to {max_c_minus:.3}"
            );
        }
    }
}
