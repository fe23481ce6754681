//! For small Debye ratios the threshold decays like a power of eps
//! slightly above two, with the exponent growing in the applied
//! voltage. Coarse grid for speed; the acceptance suite runs the full
//! version.

use vssbdf2::mesh::Mesh;
use vssbdf2::pnp_fbv::PnpParams;
use vssbdf2::sweep::{epsilon_sweep, fit_power_law, SweepConfig};

fn main() {
    let mesh = Mesh::uniform(90).unwrap();
    let cfg = SweepConfig::default();
    let n = 6;
    let grid: Vec<f64> = (0..n)
        .map(|k| 0.03 + (0.1 - 0.03) * k as f64 / (n - 1) as f64)
        .collect();
    println!("voltage  exponent  prefactor");
    for v in [0.0, 1.0, 2.0, 3.0] {
        let base = PnpParams::with_voltage(0.1, v);
        let points = epsilon_sweep(&base, &grid, &mesh, &cfg);
        let samples: Vec<(f64, f64)> = points
            .iter()
            .filter_map(|p| p.dt_star.map(|d| (p.eps, d)))
            .collect();
        let fit = fit_power_law(&samples).unwrap();
        println!("{v:<8} {:<9.4} {:.4}", fit.exponent, fit.prefactor);
    }
}
