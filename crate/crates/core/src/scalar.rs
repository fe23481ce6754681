//! Scalar stability theory and closed-form testbed models.
//!
//! For the scalar split `u' = lambda u + alpha u` (implicit `lambda u`,
//! explicit `alpha u`, decaying when `lambda + alpha < 0`) the SBDF2
//! amplification factors are the roots of
//! `(3/2 - dt lambda) rho^2 - (2 + 2 alpha dt) rho + (1/2 + alpha dt) = 0`,
//! which gives in closed form
//! `rho_pm = (-2 - 2 alpha dt pm sqrt(1 + 2 dt (1 + 2 alpha dt)(alpha + lambda)))
//!           / (-3 + 2 dt lambda)`.
//!
//! Tracking these roots over dt yields the complete case analysis: the
//! scheme is conditionally stable exactly when `alpha < 0` and
//! `3 alpha < lambda`, with threshold `dt* = 4 / (lambda - 3 alpha)`.
//! The other models here (logistic equation, split diffusion,
//! diffusion with a sink) reduce mode-by-mode to this scalar theory and
//! serve as analytic oracles for the matrix-based stability machinery.

use crate::error::{Error, Result};
use crate::imex::ImexProblem;
use crate::mesh::{BoundaryPolicy, DiffOp, Mesh};
use crate::tridiag::Tridiag;
use nalgebra::{Complex, DVector};

/// Coefficients of the scalar split `u' = lambda u + alpha u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarSplit {
    /// Implicitly treated coefficient.
    pub lambda: f64,
    /// Explicitly treated coefficient.
    pub alpha: f64,
}

impl ScalarSplit {
    pub fn new(lambda: f64, alpha: f64) -> Self {
        ScalarSplit { lambda, alpha }
    }
}

/// Stability verdict for a scalar split (or a reduction to one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stability {
    Unconditional,
    Conditional { dt_star: f64 },
}

impl Stability {
    pub fn dt_star(&self) -> Option<f64> {
        match self {
            Stability::Unconditional => None,
            Stability::Conditional { dt_star } => Some(*dt_star),
        }
    }
}

/// Amplification factors `(rho_plus, rho_minus)` of the SBDF2 scheme at
/// step size `dt`. `rho_plus -> 1/3` (spurious root) and
/// `rho_minus -> 1` (essential root) as `dt -> 0`.
pub fn rho_roots(s: ScalarSplit, dt: f64) -> Result<(Complex<f64>, Complex<f64>)> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("rho_roots: dt = {dt} must be positive")));
    }
    let denom = -3.0 + 2.0 * dt * s.lambda;
    if denom.abs() < 1e-12 * (1.0 + 2.0 * dt * s.lambda.abs()) {
        return Err(Error::numeric_at("rho_roots: pole 3 = 2 dt lambda", dt));
    }
    let disc = 1.0 + 2.0 * dt * (1.0 + 2.0 * s.alpha * dt) * (s.alpha + s.lambda);
    let sqrt_disc = if disc >= 0.0 {
        Complex::new(disc.sqrt(), 0.0)
    } else {
        Complex::new(0.0, (-disc).sqrt())
    };
    let base = Complex::new(-2.0 - 2.0 * s.alpha * dt, 0.0);
    let rho_plus = (base + sqrt_disc) / denom;
    let rho_minus = (base - sqrt_disc) / denom;
    Ok((rho_plus, rho_minus))
}

/// Positive real roots `(dt_minus, dt_plus)` of the discriminant
/// `1 + 2 dt (1 + 2 alpha dt)(alpha + lambda)`; between them the
/// amplification factors form a complex pair. Returns `None` entries
/// for non-real or non-positive roots.
pub fn discriminant_roots(s: ScalarSplit) -> (Option<f64>, Option<f64>) {
    if s.alpha == 0.0 {
        // discriminant is linear in dt; a single root
        let slope = 2.0 * (s.alpha + s.lambda);
        if slope == 0.0 {
            return (None, None);
        }
        let root = -1.0 / slope;
        return (positive(root), None);
    }
    let inner = 1.0 - 4.0 * s.alpha / (s.lambda + s.alpha);
    if inner < 0.0 {
        return (None, None);
    }
    let sq = inner.sqrt();
    let dt_minus = -(1.0 - sq) / (4.0 * s.alpha);
    let dt_plus = -(1.0 + sq) / (4.0 * s.alpha);
    let (mut lo, mut hi) = (positive(dt_minus), positive(dt_plus));
    if let (Some(a), Some(b)) = (lo, hi) {
        if a > b {
            (lo, hi) = (Some(b), Some(a));
        }
    }
    (lo, hi)
}

fn positive(x: f64) -> Option<f64> {
    if x.is_finite() && x > 0.0 {
        Some(x)
    } else {
        None
    }
}

/// Case analysis of the scalar split. Requires a decaying true solution
/// (`lambda + alpha < 0`). Conditional stability occurs exactly when
/// `alpha < 0` and `3 alpha < lambda`, with `dt* = 4/(lambda - 3 alpha)`.
pub fn classify_stability(s: ScalarSplit) -> Result<Stability> {
    if !(s.lambda + s.alpha < 0.0) {
        return Err(Error::invalid(format!(
            "classify_stability: lambda + alpha = {} must be negative",
            s.lambda + s.alpha
        )));
    }
    if s.alpha < 0.0 && 3.0 * s.alpha < s.lambda {
        Ok(Stability::Conditional {
            dt_star: 4.0 / (s.lambda - 3.0 * s.alpha),
        })
    } else {
        Ok(Stability::Unconditional)
    }
}

/// Logistic equation `u' = r u (1 - u)` split as `f(u) = -r u^2`
/// (explicit) and `g(u) = r u` (implicit). Its linearization about the
/// stable steady state `u = 1` is the scalar split
/// `(lambda, alpha) = (r, -2r)`, conditionally stable with
/// `dt* = 4/(7r)`.
pub struct LogisticProblem {
    pub r: f64,
}

impl LogisticProblem {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("logistic rate r = {r} must be positive")));
        }
        Ok(LogisticProblem { r })
    }

    pub fn dt_star(&self) -> f64 {
        4.0 / (7.0 * self.r)
    }
}

impl ImexProblem for LogisticProblem {
    fn dim(&self) -> usize {
        1
    }

    fn eval_f(&self, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(DVector::from_element(1, -self.r * u[0] * u[0]))
    }

    fn apply_g(&self, u: &DVector<f64>) -> DVector<f64> {
        u * self.r
    }

    fn solve_shifted(&self, c: f64, dt: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let denom = c - dt * self.r;
        if denom.abs() < 1e-14 * c.abs().max(1.0) {
            return Err(Error::numeric_at("logistic implicit solve singular", dt));
        }
        Ok(rhs / denom)
    }
}

/// Threshold for `u_t = D1 u_xx + D2 u_xx` (Dirichlet, `D1` implicit,
/// `D2` explicit) in terms of the most negative Dirichlet eigenvalue
/// `lambda_n`: conditional iff `D1 < 3 D2`, with
/// `dt* = 4 / (|lambda_n| (3 D2 - D1))`. The critical mode is the
/// highest-frequency one.
pub fn split_diffusion_threshold(d1: f64, d2: f64, lambda_n: f64) -> Result<Stability> {
    if !(d1 + d2 > 0.0) {
        return Err(Error::invalid("split diffusion requires D1 + D2 > 0"));
    }
    if !(lambda_n < 0.0) {
        return Err(Error::invalid("lambda_n must be negative"));
    }
    if d1 < 3.0 * d2 {
        Ok(Stability::Conditional {
            dt_star: 4.0 / (lambda_n.abs() * (3.0 * d2 - d1)),
        })
    } else {
        Ok(Stability::Unconditional)
    }
}

/// Threshold for the diffusion equation with a sink,
/// `u_t = D1 u_xx - u/eps^2` (Dirichlet, diffusion implicit, sink
/// explicit), in terms of the Dirichlet eigenvalue closest to zero,
/// `lambda_1`: conditional iff `eps^2 D1 |lambda_1| < 3`, with
/// `dt* = 4 / (D1 lambda_1 + 3/eps^2)`. The critical mode is the
/// lowest-frequency one, so the threshold is mesh-insensitive.
pub fn sink_diffusion_threshold(d1: f64, eps: f64, lambda_1: f64) -> Result<Stability> {
    if !(d1 > 0.0) || !(eps > 0.0) {
        return Err(Error::invalid("sink diffusion requires D1 > 0 and eps > 0"));
    }
    if !(lambda_1 < 0.0) {
        return Err(Error::invalid("lambda_1 must be negative"));
    }
    if eps * eps * d1 * lambda_1.abs() < 3.0 {
        Ok(Stability::Conditional {
            dt_star: 4.0 / (d1 * lambda_1 + 3.0 / (eps * eps)),
        })
    } else {
        Ok(Stability::Unconditional)
    }
}

/// `u_t = D1 u_xx + D2 u_xx` on interior nodes of a mesh with
/// homogeneous Dirichlet boundary values, `D1 u_xx` implicit and
/// `D2 u_xx` explicit. State vector = interior node values.
pub struct SplitDiffusionProblem {
    pub d1: f64,
    pub d2: f64,
    laplacian: Tridiag,
    interior_x: Vec<f64>,
}

impl SplitDiffusionProblem {
    pub fn new(d1: f64, d2: f64, mesh: &Mesh) -> Result<Self> {
        if !(d1 + d2 > 0.0) {
            return Err(Error::invalid("split diffusion requires D1 + D2 > 0"));
        }
        let (laplacian, interior_x) = dirichlet_interior(mesh);
        Ok(SplitDiffusionProblem {
            d1,
            d2,
            laplacian,
            interior_x,
        })
    }

    /// Interior samples of `sin(pi x)`, the usual initial data.
    pub fn sine_initial_state(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.interior_x.len(),
            self.interior_x
                .iter()
                .map(|x| (std::f64::consts::PI * x).sin()),
        )
    }

    pub fn interior_nodes(&self) -> &[f64] {
        &self.interior_x
    }
}

impl ImexProblem for SplitDiffusionProblem {
    fn dim(&self) -> usize {
        self.interior_x.len()
    }

    fn eval_f(&self, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        let lu = self.laplacian.apply(u.as_slice());
        Ok(DVector::from_iterator(lu.len(), lu.into_iter().map(|v| self.d2 * v)))
    }

    fn apply_g(&self, u: &DVector<f64>) -> DVector<f64> {
        let lu = self.laplacian.apply(u.as_slice());
        DVector::from_iterator(lu.len(), lu.into_iter().map(|v| self.d1 * v))
    }

    fn solve_shifted(&self, c: f64, dt: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.laplacian.scaled_shift(c, -dt * self.d1);
        let x = m.solve(rhs.as_slice()).map_err(|e| match e {
            Error::NumericFailure { what, .. } => Error::numeric_at(what, dt),
            other => other,
        })?;
        Ok(DVector::from_vec(x))
    }
}

/// `u_t = D1 u_xx - u/eps^2` on interior nodes with homogeneous
/// Dirichlet boundary values; diffusion implicit, sink explicit.
pub struct SinkDiffusionProblem {
    pub d1: f64,
    pub eps: f64,
    laplacian: Tridiag,
    interior_x: Vec<f64>,
}

impl SinkDiffusionProblem {
    pub fn new(d1: f64, eps: f64, mesh: &Mesh) -> Result<Self> {
        if !(d1 > 0.0) || !(eps > 0.0) {
            return Err(Error::invalid("sink diffusion requires D1 > 0 and eps > 0"));
        }
        let (laplacian, interior_x) = dirichlet_interior(mesh);
        Ok(SinkDiffusionProblem {
            d1,
            eps,
            laplacian,
            interior_x,
        })
    }

    pub fn sine_initial_state(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.interior_x.len(),
            self.interior_x
                .iter()
                .map(|x| (std::f64::consts::PI * x).sin()),
        )
    }
}

impl ImexProblem for SinkDiffusionProblem {
    fn dim(&self) -> usize {
        self.interior_x.len()
    }

    fn eval_f(&self, u: &DVector<f64>, _t: f64) -> Result<DVector<f64>> {
        Ok(u * (-1.0 / (self.eps * self.eps)))
    }

    fn apply_g(&self, u: &DVector<f64>) -> DVector<f64> {
        let lu = self.laplacian.apply(u.as_slice());
        DVector::from_iterator(lu.len(), lu.into_iter().map(|v| self.d1 * v))
    }

    fn solve_shifted(&self, c: f64, dt: f64, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.laplacian.scaled_shift(c, -dt * self.d1);
        let x = m.solve(rhs.as_slice()).map_err(|e| match e {
            Error::NumericFailure { what, .. } => Error::numeric_at(what, dt),
            other => other,
        })?;
        Ok(DVector::from_vec(x))
    }
}

/// Dirichlet-reduced second-difference operator and the interior node
/// positions it acts on.
fn dirichlet_interior(mesh: &Mesh) -> (Tridiag, Vec<f64>) {
    let op = DiffOp::second_difference(mesh, BoundaryPolicy::InteriorOnly);
    let n = mesh.n_nodes();
    let m = n - 2;
    let rows = op.rows();
    let mut t = Tridiag::zeros(m);
    for i in 0..m {
        t.diag[i] = rows.diag[i + 1];
        if i + 1 < m {
            t.sup[i] = rows.sup[i + 1];
            t.sub[i] = rows.sub[i + 1];
        }
    }
    let interior_x = mesh.nodes()[1..n - 1].to_vec();
    (t, interior_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imex::{sbdf2_step, StepperHistory};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rho_limits_as_dt_vanishes() {
        let s = ScalarSplit::new(-1.0, -0.5);
        let (rp, rm) = rho_roots(s, 1e-9).unwrap();
        assert_relative_eq!(rp.re, 1.0 / 3.0, max_relative = 1e-6);
        assert_relative_eq!(rm.re, 1.0, max_relative = 1e-6);
        assert!(rp.im == 0.0 && rm.im == 0.0);
    }

    #[test]
    fn logistic_threshold_hits_minus_one() {
        for r in [0.5, 1.0, 2.0, 4.0] {
            let s = ScalarSplit::new(r, -2.0 * r);
            let (rp, _) = rho_roots(s, 4.0 / (7.0 * r)).unwrap();
            assert_relative_eq!(rp.re, -1.0, max_relative = 1e-12);
            assert!(rp.im.abs() < 1e-12);
        }
    }

    #[test]
    fn roots_satisfy_scheme_quadratic() {
        let s = ScalarSplit::new(-1.0, -1.0);
        let dt = 0.1;
        let (rp, rm) = rho_roots(s, dt).unwrap();
        for rho in [rp, rm] {
            let val = rho * rho * (1.5 - dt * s.lambda)
                - rho * (2.0 + 2.0 * s.alpha * dt)
                + Complex::new(0.5 + s.alpha * dt, 0.0);
            assert!(val.norm() < 1e-13, "quadratic residual {}", val.norm());
        }
    }

    #[test]
    fn pole_is_reported() {
        let s = ScalarSplit::new(2.0, -9.0);
        assert!(rho_roots(s, 0.75).is_err());
    }

    #[test]
    fn discriminant_root_cases() {
        // alpha > 0: one positive root (roots real before it, complex after)
        let s = ScalarSplit::new(-3.0, 1.0);
        let (lo, hi) = discriminant_roots(s);
        assert!(lo.is_some() && hi.is_none());
        let dt_m = lo.unwrap();
        let disc_mid = |dt: f64| 1.0 + 2.0 * dt * (1.0 + 2.0 * s.alpha * dt) * (s.alpha + s.lambda);
        assert!(disc_mid(dt_m).abs() < 1e-10);
        assert!(disc_mid(0.5 * dt_m) > 0.0);
        assert!(disc_mid(2.0 * dt_m) < 0.0);

        // alpha = lambda = -1: the inner square root argument is negative,
        // so the discriminant never vanishes and the roots stay real.
        let s = ScalarSplit::new(-1.0, -1.0);
        assert_eq!(discriminant_roots(s), (None, None));
        for k in 1..60 {
            let dt = 0.1 * k as f64;
            assert!(disc_of(s, dt) > 0.0);
        }

        // Case 2 shape: alpha < 0, 3 alpha > lambda -> two positive roots
        let s = ScalarSplit::new(-5.0, -1.0);
        let (lo, hi) = discriminant_roots(s);
        let (a, b) = (lo.unwrap(), hi.unwrap());
        assert!(a < b);
        assert!(disc_of(s, 0.5 * (a + b)) < 0.0);
        assert!(disc_of(s, 0.5 * a) > 0.0);
        assert!(disc_of(s, 2.0 * b) > 0.0);

        // Case 3: lambda = 3 alpha, double root, roots stay in (-1, 1)
        let s = ScalarSplit::new(-3.0, -1.0);
        let (lo, hi) = discriminant_roots(s);
        assert_relative_eq!(lo.unwrap(), hi.unwrap(), max_relative = 1e-12);
    }

    fn disc_of(s: ScalarSplit, dt: f64) -> f64 {
        1.0 + 2.0 * dt * (1.0 + 2.0 * s.alpha * dt) * (s.alpha + s.lambda)
    }

    #[test]
    fn classification_cases() {
        // logistic linearization
        let s = classify_stability(ScalarSplit::new(1.0, -2.0)).unwrap();
        assert_eq!(s, Stability::Conditional { dt_star: 4.0 / 7.0 });
        // Case 1
        let s = classify_stability(ScalarSplit::new(-3.0, 1.0)).unwrap();
        assert_eq!(s, Stability::Unconditional);
        // Case 3 boundary
        let s = classify_stability(ScalarSplit::new(-3.0, -1.0)).unwrap();
        assert_eq!(s, Stability::Unconditional);
        // growing true solution is rejected
        assert!(classify_stability(ScalarSplit::new(1.0, -0.5)).is_err());
    }

    #[test]
    fn classification_matches_roots_on_grid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut conditional_seen = 0;
        for _ in 0..50 {
            let lambda = rng.gen_range(-5.0..5.0);
            let alpha = rng.gen_range(-5.0..5.0);
            if lambda + alpha >= -1e-3 {
                continue;
            }
            let s = ScalarSplit::new(lambda, alpha);
            match classify_stability(s).unwrap() {
                Stability::Conditional { dt_star } => {
                    conditional_seen += 1;
                    // |rho| < 1 strictly inside (0, dt*), > 1 just beyond
                    for k in 1..40 {
                        let dt = dt_star * k as f64 / 41.0;
                        let (rp, rm) = rho_roots(s, dt).unwrap();
                        assert!(rp.norm() < 1.0 + 1e-12 && rm.norm() < 1.0 + 1e-12);
                    }
                    let (rp, rm) = rho_roots(s, dt_star * 1.01).unwrap();
                    assert!(rp.norm().max(rm.norm()) > 1.0);
                }
                Stability::Unconditional => {
                    for k in 1..40 {
                        let dt = 0.3 * k as f64;
                        if let Ok((rp, rm)) = rho_roots(s, dt) {
                            assert!(
                                rp.norm() < 1.0 + 1e-9 && rm.norm() < 1.0 + 1e-9,
                                "universal bound failed at dt={dt} for ({lambda},{alpha})"
                            );
                        }
                    }
                }
            }
        }
        assert!(conditional_seen > 3);
    }

    #[test]
    fn logistic_problem_fixed_points() {
        let p = LogisticProblem::new(1.0).unwrap();
        for u in [0.0, 1.0] {
            let uu = DVector::from_element(1, u);
            let r = crate::imex::steady_residual(&p, &uu).unwrap();
            assert!(r < 1e-14);
        }
    }

    #[test]
    fn logistic_sbdf2_converges_below_threshold_only() {
        let p = LogisticProblem::new(1.0).unwrap();
        let run = |dt: f64| -> f64 {
            let u0 = 0.01;
            // forward Euler starter, as in the constant-step experiment
            let u1 = u0 + dt * (p.r * u0 - p.r * u0 * u0);
            let mut hist = StepperHistory::new(
                DVector::from_element(1, u0),
                DVector::from_element(1, u1),
                dt,
                dt,
            );
            for _ in 0..999 {
                match sbdf2_step(&p, &hist, dt) {
                    Ok(u) => hist.advance(u, dt),
                    Err(_) => return f64::INFINITY,
                }
                if !hist.u_now[0].is_finite() {
                    return f64::NAN;
                }
            }
            hist.u_now[0]
        };
        let below = run(0.5);
        assert!((below - 1.0).abs() < 1e-6, "u at dt=0.5: {below}");
        let above = run(0.6);
        assert!(!((above - 1.0).abs() < 1e-3), "u at dt=0.6: {above}");
    }

    #[test]
    fn split_diffusion_threshold_cases() {
        let mesh = Mesh::uniform(20).unwrap();
        let op = DiffOp::second_difference(&mesh, BoundaryPolicy::InteriorOnly);
        let (_, lambda_n) = op.extreme_eigenvalues().unwrap();
        let d1 = 2.0;
        let d2 = 2.0 * d1 / 3.0;
        let s = split_diffusion_threshold(d1, d2, lambda_n).unwrap();
        let dt_star = s.dt_star().unwrap();
        assert_relative_eq!(
            dt_star,
            4.0 / (lambda_n.abs() * (3.0 * d2 - d1)),
            max_relative = 1e-14
        );
        // boundary: no constraint at D2 <= D1/3
        let s = split_diffusion_threshold(d1, d1 / 3.0, lambda_n).unwrap();
        assert_eq!(s, Stability::Unconditional);
    }

    #[test]
    fn split_diffusion_minimum_over_modes() {
        // the per-mode reduction of classify_stability, minimized over all
        // Dirichlet modes, must agree with the closed form at lambda_n
        let mesh = Mesh::uniform(20).unwrap();
        let op = DiffOp::second_difference(&mesh, BoundaryPolicy::InteriorOnly);
        let modes = op.dirichlet_eigenvalues().unwrap();
        let (d1, d2) = (2.0, 1.1);
        let mut best = f64::INFINITY;
        for lk in &modes {
            if let Stability::Conditional { dt_star } =
                classify_stability(ScalarSplit::new(d1 * lk, d2 * lk)).unwrap()
            {
                best = best.min(dt_star);
            }
        }
        let formula = split_diffusion_threshold(d1, d2, modes[0]).unwrap();
        assert_relative_eq!(best, formula.dt_star().unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn sink_diffusion_threshold_cases() {
        let mesh = Mesh::uniform(40).unwrap();
        let op = DiffOp::second_difference(&mesh, BoundaryPolicy::InteriorOnly);
        let (lambda_1, _) = op.extreme_eigenvalues().unwrap();
        // eps = 1: eps^2 D1 |lambda_1| ~ 9.87 > 3 -> unconditional
        let s = sink_diffusion_threshold(1.0, 1.0, lambda_1).unwrap();
        assert_eq!(s, Stability::Unconditional);
        // eps = 0.1: conditional with dt* = 4/(lambda_1 + 300)
        let s = sink_diffusion_threshold(1.0, 0.1, lambda_1).unwrap();
        assert_relative_eq!(
            s.dt_star().unwrap(),
            4.0 / (lambda_1 + 300.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn pde_testbeds_decay_from_sine() {
        let mesh = Mesh::uniform(20).unwrap();
        let p = SplitDiffusionProblem::new(2.0, 1.0, &mesh).unwrap();
        let u0 = p.sine_initial_state();
        let dt = 1e-4;
        let u1 = crate::imex::bootstrap_step(&p, &u0, 0.0, dt).unwrap();
        assert!(u1.amax() < u0.amax());
        let p = SinkDiffusionProblem::new(1.0, 0.3, &mesh).unwrap();
        let u0 = p.sine_initial_state();
        let u1 = crate::imex::bootstrap_step(&p, &u0, 0.0, dt).unwrap();
        assert!(u1.amax() < u0.amax());
    }
}
