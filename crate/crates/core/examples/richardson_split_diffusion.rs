//! Richardson extrapolation changes the stability of the underlying
//! scheme. For the Dirichlet diffusion split `u_t = D1 u_xx + D2 u_xx`
//! (implicit/explicit) the plain scheme obeys
//! `1/dt* = |lambda_N| (3 D2 - D1)/4`; with the extrapolation step the
//! adaptive plateau follows a different line, destabilizing part of the
//! otherwise unconditionally stable range and stabilizing large D2.

use vssbdf2::adaptive::AdaptiveConfig;
use vssbdf2::mesh::Mesh;
use vssbdf2::sweep::{richardson_comparison, ReComparisonConfig};

fn main() {
    let mesh = Mesh::uniform(20).unwrap();
    let d1 = 2.0;
    let n = 8;
    let grid: Vec<f64> = (0..n)
        .map(|k| 1.05 * d1 / 3.0 + (2.0 * d1 / 3.0 - 1.05 * d1 / 3.0) * k as f64 / (n - 1) as f64)
        .collect();
    let cmp = richardson_comparison(d1, &grid, &mesh, &ReComparisonConfig::default()).unwrap();

    println!("lambda_N = {:.4}", cmp.lambda_n);
    println!("D2       1/dt* (no RE)   1/dt_inf (no RE)  1/dt_inf (RE)");
    for p in &cmp.points {
        println!(
            "{:<8.4} {:<15.4} {:<17.4} {:<.4}",
            p.d2,
            p.dt_star_formula.map_or(f64::NAN, |d| 1.0 / d),
            p.dt_inf_no_re.map_or(f64::NAN, |d| 1.0 / d),
            p.dt_inf_re.map_or(f64::NAN, |d| 1.0 / d),
        );
    }
    if let Some(fit) = &cmp.re_fit {
        println!(
            "with-RE line: 1/dt_inf = {:.4} D2 {:+.4}  (i.e. |lambda_N| ({:.4} D2 {:+.4} D1))",
            fit.slope,
            fit.intercept,
            fit.slope / cmp.lambda_n.abs(),
            fit.intercept / (cmp.lambda_n.abs() * d1)
        );
    }

    // a point that is unconditionally stable without extrapolation but
    // not with it
    let capped = ReComparisonConfig {
        adaptive: AdaptiveConfig {
            dt_max: 0.2,
            ..AdaptiveConfig::default()
        },
        ..ReComparisonConfig::default()
    };
    let extra = richardson_comparison(d1, &[0.6], &mesh, &capped).unwrap();
    let p = &extra.points[0];
    println!(
        "D2 = 0.6 (< D1/3): no-RE run coarsens to dt_max ({}), with-RE plateau dt_inf = {:?}",
        p.status,
        p.dt_inf_re
    );
}
