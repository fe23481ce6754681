//! Threshold curve dt*(eps) at fixed voltage, on a coarse grid so the
//! example stays quick.
//!
//! The curve carries a corner near eps = 0.108 and a jump near
//! eps = 0.135; between them the instability is a complex-conjugate
//! pair instead of a single real eigenvalue at -1. Sixteen points are
//! enough to see the shape and localize the crossing-type changes; the
//! jump/corner detectors are calibrated for the denser 40-point grid
//! (run `vssbdf2 sweep --set sweep.points=40` or the acceptance suite
//! for those).

use vssbdf2::mesh::Mesh;
use vssbdf2::pnp_fbv::PnpParams;
use vssbdf2::stability::Crossing;
use vssbdf2::sweep::{detect_features, epsilon_sweep, FeatureConfig, SweepConfig};

fn main() {
    let mesh = Mesh::uniform(90).unwrap();
    let base = PnpParams::with_voltage(0.1, 2.0);
    let cfg = SweepConfig::default();
    let n = 16;
    let grid: Vec<f64> = (0..n)
        .map(|k| 0.05 + (0.2 - 0.05) * k as f64 / (n - 1) as f64)
        .collect();
    let points = epsilon_sweep(&base, &grid, &mesh, &cfg);

    println!("eps        dt*          crossing");
    for p in &points {
        let crossing = match p.crossing {
            Some(Crossing::RealMinusOne) => "real -1",
            Some(Crossing::ComplexPair(_)) => "complex pair",
            None => "none",
        };
        println!(
            "{:<10.4} {:<12.6e} {crossing}",
            p.eps,
            p.dt_star.unwrap_or(f64::NAN)
        );
    }
    let feats = detect_features(&points, &FeatureConfig::default());
    print!("{}", feats.summary());
}
