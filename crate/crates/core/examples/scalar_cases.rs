//! Closed-form stability of the scalar split `u' = lambda u + alpha u`
//! (implicit lambda, explicit alpha), walking through the case
//! analysis: instability is possible only for `alpha < 0` with
//! `3 alpha < lambda`, where `dt* = 4/(lambda - 3 alpha)`.

use vssbdf2::scalar::{classify_stability, discriminant_roots, rho_roots, ScalarSplit, Stability};

fn main() {
    let cases = [
        ("logistic linearization", 1.0, -2.0),
        ("explicit part stabilizing (case 1)", -3.0, 1.0),
        ("mild explicit part (case 2)", -5.0, -1.0),
        ("boundary 3a = l (case 3)", -3.0, -1.0),
        ("conditional, decaying implicit (case 4)", -1.0, -1.0),
        ("conditional, growing implicit (case 5)", 2.0, -3.0),
    ];
    for (name, lambda, alpha) in cases {
        let s = ScalarSplit::new(lambda, alpha);
        let verdict = classify_stability(s).unwrap();
        let (d_lo, d_hi) = discriminant_roots(s);
        print!("{name}: lambda = {lambda}, alpha = {alpha} -> ");
        match verdict {
            Stability::Unconditional => println!("unconditionally stable"),
            Stability::Conditional { dt_star } => {
                let (rho_plus, _) = rho_roots(s, dt_star).unwrap();
                println!(
                    "conditional, dt* = {dt_star:.6} (rho_+ there = {:.4}{:+.4}i)",
                    rho_plus.re, rho_plus.im
                );
            }
        }
        println!(
            "    discriminant roots: {} / {}",
            d_lo.map_or("none".into(), |v| format!("{v:.4}")),
            d_hi.map_or("none".into(), |v| format!("{v:.4}"))
        );
    }
}
