//! Linear stability of the SBDF2 scheme about a numerical steady state.
//!
//! Linearizing the scheme about `u_ss` with Jacobians `J_f` (dense,
//! finite differences) and `J_g` (exact, since `g` is linear) gives the
//! three-level recursion
//! `d^{n+1} = M_new M_now d^n + M_new M_old d^{n-1}` with
//! `M_new = (3/2 I - dt J_g)^{-1}`, `M_now = 2 I + 2 dt J_f`,
//! `M_old = -1/2 I - dt J_f`. Stacking `[d^{n-1}; d^n]` turns it into a
//! one-step map with companion matrix
//! `A = [[0, I], [M_new M_old, M_new M_now]]`; the scheme is stable at
//! step size `dt` exactly when the spectral radius of `A` is below one.
//! A geometric scan in `dt` followed by bisection on `radius - 1`
//! locates the threshold `dt*` and the eigenpair that crosses the unit
//! circle.

use crate::error::{Error, Result};
use crate::imex::ImexProblem;
use nalgebra::{Complex, DMatrix, DVector};

/// Jacobians of the split right-hand side at a steady state.
#[derive(Clone, Debug)]
pub struct Jacobians {
    pub j_f: DMatrix<f64>,
    pub j_g: DMatrix<f64>,
    pub u_ss: DVector<f64>,
    /// Finite-difference step used for `j_f`.
    pub fd_step: f64,
}

/// Centred-difference step scaled to the state magnitude.
pub fn default_fd_step(u_ss: &DVector<f64>) -> f64 {
    1e-6 * (1.0 + u_ss.amax())
}

/// Dense Jacobian of the explicit term by centred differences, column
/// `j` being `(f(u + h e_j) - f(u - h e_j)) / 2h`.
pub fn numeric_jacobian_f(
    problem: &dyn ImexProblem,
    u_ss: &DVector<f64>,
    h: f64,
) -> Result<DMatrix<f64>> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("fd step h = {h} must be positive")));
    }
    let n = problem.dim();
    if u_ss.len() != n {
        return Err(Error::invalid("numeric_jacobian_f: state has wrong length"));
    }
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = u_ss.clone();
    for j in 0..n {
        probe[j] = u_ss[j] + h;
        let fp = problem.eval_f(&probe, 0.0).map_err(|e| {
            Error::numeric(format!("f evaluation failed at +h, column {j}: {e}"))
        })?;
        probe[j] = u_ss[j] - h;
        let fm = problem.eval_f(&probe, 0.0).map_err(|e| {
            Error::numeric(format!("f evaluation failed at -h, column {j}: {e}"))
        })?;
        probe[j] = u_ss[j];
        let col = (fp - fm) / (2.0 * h);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Exact dense Jacobian of the linear implicit operator, assembled
/// column by column from `apply_g`.
pub fn exact_jacobian_g(problem: &dyn ImexProblem) -> DMatrix<f64> {
    let n = problem.dim();
    let mut jac = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        jac.set_column(j, &problem.apply_g(&e));
        e[j] = 0.0;
    }
    jac
}

/// Assemble both Jacobians at `u_ss` (`h = None` picks the default
/// scaled step).
pub fn assemble_jacobians(
    problem: &dyn ImexProblem,
    u_ss: &DVector<f64>,
    h: Option<f64>,
) -> Result<Jacobians> {
    let fd_step = h.unwrap_or_else(|| default_fd_step(u_ss));
    Ok(Jacobians {
        j_f: numeric_jacobian_f(problem, u_ss, fd_step)?,
        j_g: exact_jacobian_g(problem),
        u_ss: u_ss.clone(),
        fd_step,
    })
}

/// The one-step companion form of the linearized scheme at a given dt.
#[derive(Clone, Debug)]
pub struct CompanionSystem {
    /// `2 dim x 2 dim` block matrix `[[0, I], [M_new M_old, M_new M_now]]`.
    pub a: DMatrix<f64>,
    pub dt: f64,
    pub m_new: DMatrix<f64>,
    pub m_now: DMatrix<f64>,
    pub m_old: DMatrix<f64>,
}

impl CompanionSystem {
    pub fn dim(&self) -> usize {
        self.a.nrows() / 2
    }
}

pub fn build_companion(j_f: &DMatrix<f64>, j_g: &DMatrix<f64>, dt: f64) -> Result<CompanionSystem> {
    let n = j_f.nrows();
    if j_f.ncols() != n || j_g.nrows() != n || j_g.ncols() != n {
        return Err(Error::invalid("build_companion: Jacobians must be square and equal size"));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("build_companion: dt = {dt} must be positive")));
    }
    let shifted = DMatrix::<f64>::identity(n, n) * 1.5 - j_g * dt;
    let m_new = shifted
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::numeric_at("companion: (3/2 I - dt J_g) is singular", dt))?;
    let m_now = DMatrix::<f64>::identity(n, n) * 2.0 + j_f * (2.0 * dt);
    let m_old = DMatrix::<f64>::identity(n, n) * -0.5 - j_f * dt;
    let lower_left = &m_new * &m_old;
    let lower_right = &m_new * &m_now;
    let mut a = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        a[(i, n + i)] = 1.0;
    }
    a.view_mut((n, 0), (n, n)).copy_from(&lower_left);
    a.view_mut((n, n), (n, n)).copy_from(&lower_right);
    Ok(CompanionSystem {
        a,
        dt,
        m_new,
        m_now,
        m_old,
    })
}

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 200_000;

fn companion_eigenvalues(cs: &CompanionSystem) -> Result<Vec<Complex<f64>>> {
    let schur = nalgebra::linalg::Schur::try_new(cs.a.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::numeric_at("Schur decomposition did not converge", cs.dt))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Spectral radius and the maximizing eigenvalue (no eigenvector).
pub fn spectral_radius_only(cs: &CompanionSystem) -> Result<(f64, Complex<f64>)> {
    let eig = companion_eigenvalues(cs)?;
    Ok(argmax_modulus(&eig, 0.0))
}

/// As [`spectral_radius_only`], ignoring eigenvalues within
/// `neutral_tol` of `+1`. A model with an exactly conserved quantity
/// (here: the trapezoid mass of `c_-`) carries a one-parameter family
/// of steady states, and the companion matrix then has an eigenvalue
/// pinned at exactly `+1` for every dt; that neutral mode never
/// decides conditional stability and must not mask the crossing branch.
pub fn spectral_radius_excluding(
    cs: &CompanionSystem,
    neutral_tol: f64,
) -> Result<(f64, Complex<f64>)> {
    let eig = companion_eigenvalues(cs)?;
    Ok(argmax_modulus(&eig, neutral_tol))
}

fn argmax_modulus(eig: &[Complex<f64>], neutral_tol: f64) -> (f64, Complex<f64>) {
    let one = Complex::new(1.0, 0.0);
    let mut best = Complex::new(0.0, 0.0);
    let mut radius = -1.0;
    for lam in eig {
        if neutral_tol > 0.0 && (lam - one).norm() <= neutral_tol {
            continue;
        }
        let r = lam.norm();
        if r > radius {
            radius = r;
            best = *lam;
        }
    }
    (radius, best)
}

/// Full spectral radius: the maximizing eigenvalue plus its eigenvector
/// reported as the first-`dim` block (the `d` component of
/// `v = [d; lambda d]`), unit 2-norm, phase fixed so the
/// largest-magnitude entry is real positive.
pub fn spectral_radius(
    cs: &CompanionSystem,
) -> Result<(f64, Complex<f64>, DVector<Complex<f64>>)> {
    let (radius, lam) = spectral_radius_only(cs)?;
    let d = critical_eigvec(cs, lam)?;
    Ok((radius, lam, d))
}

/// Inverse iteration with a complex shift just off the eigenvalue.
fn critical_eigvec(cs: &CompanionSystem, lam: Complex<f64>) -> Result<DVector<Complex<f64>>> {
    let n2 = cs.a.nrows();
    let ac = cs.a.map(|x| Complex::new(x, 0.0));
    let mut shift_scale = 1e-8;
    for _attempt in 0..4 {
        let sigma = lam * Complex::new(1.0 + shift_scale, 0.0)
            + Complex::new(0.0, shift_scale * (lam.norm() + 1e-3));
        let mut m = ac.clone();
        for i in 0..n2 {
            m[(i, i)] -= sigma;
        }
        let lu = m.lu();
        // deterministic start with all modes weakly excited
        let mut v = DVector::<Complex<f64>>::from_fn(n2, |i, _| {
            Complex::new(1.0 + 0.37 * ((i as f64) * 1.7).sin(), 0.11 * ((i as f64) * 0.9).cos())
        });
        v /= Complex::new(v.norm(), 0.0);
        let mut ok = true;
        for _ in 0..4 {
            match lu.solve(&v) {
                Some(w) => {
                    let nv = w.norm();
                    if !nv.is_finite() || nv == 0.0 {
                        ok = false;
                        break;
                    }
                    v = w / Complex::new(nv, 0.0);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            // Rayleigh check: accept if the pair is consistent
            let av = &ac * &v;
            let rayleigh = v.dotc(&av);
            if (rayleigh - lam).norm() <= 1e-6 * (1.0 + lam.norm()) {
                return Ok(extract_d_half(cs, &v));
            }
        }
        shift_scale *= 100.0;
    }
    Err(Error::numeric_at(
        "inverse iteration for the critical eigenvector failed",
        cs.dt,
    ))
}

fn extract_d_half(cs: &CompanionSystem, v: &DVector<Complex<f64>>) -> DVector<Complex<f64>> {
    let dim = cs.dim();
    let mut d = v.rows(0, dim).into_owned();
    let norm = d.norm();
    if norm > 0.0 {
        d /= Complex::new(norm, 0.0);
    }
    // phase: make the largest-magnitude entry real positive
    let mut k = 0;
    let mut best = -1.0;
    for (i, z) in d.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            k = i;
        }
    }
    if best > 0.0 {
        let phase = d[k] / Complex::new(d[k].norm(), 0.0);
        let rot = phase.conj();
        for z in d.iter_mut() {
            *z *= rot;
        }
    }
    d
}

/// How the first eigenvalue leaves the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Crossing {
    /// A single real eigenvalue crossing at -1.
    RealMinusOne,
    /// A complex-conjugate pair; the member with positive imaginary
    /// part is stored.
    ComplexPair(Complex<f64>),
}

#[derive(Clone, Copy, Debug)]
pub struct RadiusSample {
    pub dt: f64,
    pub radius: f64,
}

/// Outcome of a threshold search. `dt_star == None` means no crossing
/// was bracketed below `dt_hi`; that is suggestive of, not proof of,
/// unconditional stability.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub dt_star: Option<f64>,
    pub crossing: Option<Crossing>,
    pub critical_eigenvalue: Option<Complex<f64>>,
    /// `d`-half of the critical eigenvector, unit norm, deterministic
    /// phase.
    pub critical_eigvec: Option<DVector<Complex<f64>>>,
    /// Every (dt, spectral radius) pair evaluated, sorted by dt.
    pub radius_samples: Vec<RadiusSample>,
    pub dt_hi: f64,
}

impl StabilityReport {
    pub fn found(&self) -> bool {
        self.dt_star.is_some()
    }

    /// Magnitude of the imaginary part of the crossing eigenvalue.
    pub fn im_lambda(&self) -> Option<f64> {
        self.critical_eigenvalue.map(|z| z.im.abs())
    }

    pub fn samples_csv(&self) -> String {
        let mut s = String::from("dt,spectral_radius\n");
        for r in &self.radius_samples {
            s.push_str(&format!("{:.16e},{:.16e}\n", r.dt, r.radius));
        }
        s
    }

    pub fn summary(&self) -> String {
        match (self.dt_star, &self.crossing) {
            (Some(dt), Some(Crossing::RealMinusOne)) => format!(
                "dt_star = {dt:.6e}\ncrossing = real eigenvalue at -1 (lambda = {})\n",
                fmt_complex(self.critical_eigenvalue.unwrap())
            ),
            (Some(dt), Some(Crossing::ComplexPair(lam))) => format!(
                "dt_star = {dt:.6e}\ncrossing = complex pair {} and conjugate\n",
                fmt_complex(*lam)
            ),
            _ => format!(
                "no threshold found below dt_hi = {:.6e} (suggestive, not a proof, of unconditional stability)\n",
                self.dt_hi
            ),
        }
    }
}

fn fmt_complex(z: Complex<f64>) -> String {
    format!("{:.6}{}{:.6}i", z.re, if z.im >= 0.0 { "+" } else { "-" }, z.im.abs())
}

/// Options of the threshold search; the defaults match the geometric
/// scan factor and bisection width used throughout.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdOptions {
    pub scan_factor: f64,
    pub rel_tol: f64,
    /// |Im lambda| above this at the crossing classifies it as a
    /// complex pair.
    pub im_threshold: f64,
    /// Eigenvalues within this distance of `+1` are treated as neutral
    /// conserved-quantity modes and excluded from the tracked radius.
    pub neutral_tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions {
            scan_factor: 1.3,
            rel_tol: 1e-6,
            im_threshold: 1e-6,
            neutral_tol: 1e-9,
        }
    }
}

/// Scan geometrically from `dt_lo` until the spectral radius reaches 1
/// or `dt_hi`, then bisect the bracket to relative width `rel_tol`.
pub fn find_threshold(
    j_f: &DMatrix<f64>,
    j_g: &DMatrix<f64>,
    dt_lo: f64,
    dt_hi: f64,
    rel_tol: f64,
) -> Result<StabilityReport> {
    find_threshold_with(
        j_f,
        j_g,
        dt_lo,
        dt_hi,
        ThresholdOptions {
            rel_tol,
            ..ThresholdOptions::default()
        },
    )
}

pub fn find_threshold_with(
    j_f: &DMatrix<f64>,
    j_g: &DMatrix<f64>,
    dt_lo: f64,
    dt_hi: f64,
    opts: ThresholdOptions,
) -> Result<StabilityReport> {
    if !(dt_lo > 0.0 && dt_hi > dt_lo) {
        return Err(Error::invalid(format!(
            "find_threshold: need 0 < dt_lo < dt_hi, got {dt_lo}, {dt_hi}"
        )));
    }
    let radius_at = |dt: f64| -> Result<f64> {
        let cs = build_companion(j_f, j_g, dt)?;
        Ok(spectral_radius_excluding(&cs, opts.neutral_tol)?.0)
    };
    let mut samples: Vec<RadiusSample> = Vec::new();
    let r_lo = radius_at(dt_lo)?;
    samples.push(RadiusSample {
        dt: dt_lo,
        radius: r_lo,
    });
    if r_lo >= 1.0 {
        return Err(Error::invalid(format!(
            "find_threshold: spectral radius {r_lo:.6} at dt_lo = {dt_lo:.3e} is not below 1"
        )));
    }
    // geometric scan
    let mut a = dt_lo;
    let mut bracket: Option<(f64, f64)> = None;
    let mut dt = dt_lo;
    loop {
        dt *= opts.scan_factor;
        let clipped = dt.min(dt_hi);
        let r = radius_at(clipped)?;
        samples.push(RadiusSample {
            dt: clipped,
            radius: r,
        });
        if r >= 1.0 {
            bracket = Some((a, clipped));
            break;
        }
        a = clipped;
        if clipped >= dt_hi {
            break;
        }
    }
    let (mut lo, mut hi) = match bracket {
        Some(b) => b,
        None => {
            samples.sort_by(|x, y| x.dt.partial_cmp(&y.dt).unwrap());
            return Ok(StabilityReport {
                dt_star: None,
                crossing: None,
                critical_eigenvalue: None,
                critical_eigvec: None,
                radius_samples: samples,
                dt_hi,
            });
        }
    };
    while (hi - lo) / lo > opts.rel_tol {
        let mid = 0.5 * (lo + hi);
        let r = radius_at(mid)?;
        samples.push(RadiusSample {
            dt: mid,
            radius: r,
        });
        if r >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let dt_star = 0.5 * (lo + hi);
    // classify at the unstable end of the bracket
    let cs = build_companion(j_f, j_g, hi)?;
    let (_, lam) = spectral_radius_excluding(&cs, opts.neutral_tol)?;
    let d = critical_eigvec(&cs, lam)?;
    let crossing = if lam.im.abs() > opts.im_threshold {
        Crossing::ComplexPair(Complex::new(lam.re, lam.im.abs()))
    } else {
        Crossing::RealMinusOne
    };
    samples.sort_by(|x, y| x.dt.partial_cmp(&y.dt).unwrap());
    Ok(StabilityReport {
        dt_star: Some(dt_star),
        crossing: Some(crossing),
        critical_eigenvalue: Some(lam),
        critical_eigvec: Some(d),
        radius_samples: samples,
        dt_hi,
    })
}

/// Modulus of the inner product between the normalized late-time
/// deviation `u_tail - u_ss` and the unit critical eigenvector; 1 means
/// the deviation lies along the critical mode.
pub fn compare_deviation_to_eigvec(
    u_tail: &DVector<f64>,
    u_ss: &DVector<f64>,
    critical_eigvec: &DVector<Complex<f64>>,
) -> f64 {
    assert_eq!(u_tail.len(), u_ss.len());
    assert_eq!(u_tail.len(), critical_eigvec.len());
    let d = u_tail - u_ss;
    let norm = d.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut acc = Complex::new(0.0, 0.0);
    for i in 0..d.len() {
        acc += critical_eigvec[i].conj() * Complex::new(d[i] / norm, 0.0);
    }
    acc.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{classify_stability, rho_roots, LogisticProblem, ScalarSplit, Stability};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn centred_difference_is_exact_for_quadratic_f() {
        let p = LogisticProblem::new(1.7).unwrap();
        let u = DVector::from_element(1, 1.0);
        for h in [1e-3, 1e-5, 1e-7] {
            let j = numeric_jacobian_f(&p, &u, h).unwrap();
            assert_relative_eq!(j[(0, 0)], -2.0 * p.r, max_relative = 1e-9);
        }
    }

    #[test]
    fn linear_f_recovered_exactly() {
        use crate::imex::DenseLinearProblem;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let n = 5;
        let fm = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        let p = DenseLinearProblem::new(fm.clone(), DMatrix::zeros(n, n));
        let u = DVector::from_fn(n, |i, _| 0.1 * i as f64);
        let j = numeric_jacobian_f(&p, &u, 1e-6).unwrap();
        for i in 0..n {
            for k in 0..n {
                assert_relative_eq!(j[(i, k)], fm[(i, k)], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn assembled_g_jacobian_is_exact() {
        let mesh = crate::mesh::Mesh::uniform(16).unwrap();
        let p = crate::pnp_fbv::PnpModel::new(
            crate::pnp_fbv::PnpParams::with_voltage(0.1, 2.0),
            mesh,
        )
        .unwrap();
        let j_g = exact_jacobian_g(&p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let x = DVector::from_fn(p.dim(), |_, _| rng.gen_range(-1.0..1.0));
        let direct = p.apply_g(&x);
        let via_matrix = &j_g * &x;
        for i in 0..p.dim() {
            assert!(
                (direct[i] - via_matrix[i]).abs() <= 1e-12 * (1.0 + direct[i].abs()),
                "row {i}"
            );
        }
    }

    #[test]
    fn companion_block_structure() {
        let j_f = DMatrix::from_element(2, 2, -0.3);
        let j_g = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -2.0]));
        let cs = build_companion(&j_f, &j_g, 0.1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(cs.a[(i, j)], 0.0);
                assert_eq!(cs.a[(i, 2 + j)], if i == j { 1.0 } else { 0.0 });
            }
        }
        // M_new inverse property
        let shifted = DMatrix::<f64>::identity(2, 2) * 1.5 - &j_g * 0.1;
        let prod = &cs.m_new * shifted;
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(prod[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn dim_one_companion_matches_rho_roots() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let lambda = rng.gen_range(-4.0..1.5);
            let alpha = rng.gen_range(-4.0..4.0);
            let dt = rng.gen_range(0.01..0.8);
            let s = ScalarSplit::new(lambda, alpha);
            // skip near the scheme pole where both sides blow up
            if (3.0 - 2.0 * dt * lambda).abs() < 0.3 {
                continue;
            }
            let (rp, rm) = rho_roots(s, dt).unwrap();
            let j_f = DMatrix::from_element(1, 1, alpha);
            let j_g = DMatrix::from_element(1, 1, lambda);
            let cs = build_companion(&j_f, &j_g, dt).unwrap();
            let key = |z: &Complex<f64>| (z.re, z.im);
            let mut eig = companion_eigenvalues(&cs).unwrap();
            eig.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            let mut expect = [rp, rm];
            expect.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
            for (e, x) in eig.iter().zip(expect.iter()) {
                assert!(
                    (e - x).norm() <= 1e-10 * (1.0 + x.norm()),
                    "eig {e} vs root {x} at lambda={lambda}, alpha={alpha}, dt={dt}"
                );
            }
        }
    }

    #[test]
    fn dt_to_zero_limits() {
        let j_f = DMatrix::from_element(1, 1, -2.0);
        let j_g = DMatrix::from_element(1, 1, 1.0);
        let cs = build_companion(&j_f, &j_g, 1e-10).unwrap();
        let mut eig = companion_eigenvalues(&cs).unwrap();
        eig.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        assert_relative_eq!(eig[0].re, 1.0 / 3.0, max_relative = 1e-6);
        assert_relative_eq!(eig[1].re, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn logistic_threshold_found_to_tolerance() {
        for r in [0.5f64, 1.0, 2.0, 4.0] {
            let j_f = DMatrix::from_element(1, 1, -2.0 * r);
            let j_g = DMatrix::from_element(1, 1, r);
            let report = find_threshold(&j_f, &j_g, 0.01 / r, 10.0 / r, 2e-7).unwrap();
            let dt_star = report.dt_star.unwrap();
            let expect = 4.0 / (7.0 * r);
            assert!(
                (dt_star - expect).abs() / expect < 1e-6,
                "r={r}: {dt_star} vs {expect}"
            );
            assert_eq!(report.crossing, Some(Crossing::RealMinusOne));
            let lam = report.critical_eigenvalue.unwrap();
            assert!((lam.re + 1.0).abs() < 1e-3 && lam.im.abs() < 1e-9);
        }
    }

    #[test]
    fn report_brackets_the_radius() {
        let j_f = DMatrix::from_element(1, 1, -2.0);
        let j_g = DMatrix::from_element(1, 1, 1.0);
        let report = find_threshold(&j_f, &j_g, 0.01, 10.0, 1e-6).unwrap();
        let dt_star = report.dt_star.unwrap();
        let r_below = spectral_radius_only(&build_companion(&j_f, &j_g, 0.999 * dt_star).unwrap())
            .unwrap()
            .0;
        let r_above = spectral_radius_only(&build_companion(&j_f, &j_g, 1.001 * dt_star).unwrap())
            .unwrap()
            .0;
        assert!(r_below < 1.0 && r_above > 1.0);
    }

    #[test]
    fn no_threshold_reported_when_unconditional() {
        // alpha > 0 case: unconditionally stable
        let j_f = DMatrix::from_element(1, 1, 0.5);
        let j_g = DMatrix::from_element(1, 1, -3.0);
        assert_eq!(
            classify_stability(ScalarSplit::new(-3.0, 0.5)).unwrap(),
            Stability::Unconditional
        );
        let report = find_threshold(&j_f, &j_g, 0.01, 50.0, 1e-6).unwrap();
        assert!(report.dt_star.is_none());
        assert!(!report.radius_samples.is_empty());
    }

    #[test]
    fn radius_at_dt_lo_above_one_is_invalid() {
        let j_f = DMatrix::from_element(1, 1, -2.0);
        let j_g = DMatrix::from_element(1, 1, 1.0);
        // dt_lo far beyond the threshold 4/7
        assert!(find_threshold(&j_f, &j_g, 5.0, 10.0, 1e-6).is_err());
    }

    #[test]
    fn eigvec_alignment_extremes() {
        let v = DVector::from_vec(vec![
            Complex::new(1.0 / 2.0f64.sqrt(), 0.0),
            Complex::new(1.0 / 2.0f64.sqrt(), 0.0),
        ]);
        let u_ss = DVector::from_vec(vec![0.0, 0.0]);
        let parallel = DVector::from_vec(vec![3.0, 3.0]);
        assert_relative_eq!(
            compare_deviation_to_eigvec(&parallel, &u_ss, &v),
            1.0,
            max_relative = 1e-12
        );
        let orth = DVector::from_vec(vec![1.0, -1.0]);
        assert!(compare_deviation_to_eigvec(&orth, &u_ss, &v) < 1e-12);
    }

    #[test]
    fn linear_recursion_bounded_below_threshold_growing_above() {
        // random simultaneously-diagonalizable pairs with a known
        // threshold, conjugated by a random orthogonal map
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _case in 0..20 {
            let n = 6usize;
            let mut lam = Vec::new();
            let mut alp = Vec::new();
            let mut dt_star = f64::INFINITY;
            for _ in 0..n {
                // conditional scalar pairs: alpha < 0, 3 alpha < lambda,
                // lambda + alpha < 0
                let alpha: f64 = rng.gen_range(-3.0..-0.2);
                let lambda = rng.gen_range(3.0 * alpha..-0.1 * alpha.abs());
                lam.push(lambda);
                alp.push(alpha);
                if let Stability::Conditional { dt_star: d } =
                    classify_stability(ScalarSplit::new(lambda, alpha)).unwrap()
                {
                    dt_star = dt_star.min(d);
                }
            }
            assert!(dt_star.is_finite());
            // random orthogonal Q from QR of a random matrix
            let raw = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let q = raw.qr().q();
            let j_f = &q * DMatrix::from_diagonal(&DVector::from_vec(alp.clone())) * q.transpose();
            let j_g = &q * DMatrix::from_diagonal(&DVector::from_vec(lam.clone())) * q.transpose();

            let simulate = |dt: f64| -> f64 {
                let cs = build_companion(&j_f, &j_g, dt).unwrap();
                let ll = cs.a.view((n, 0), (n, n)).into_owned();
                let lr = cs.a.view((n, n), (n, n)).into_owned();
                let mut d0 = DVector::from_fn(n, |i, _| ((i * 7 + 1) as f64 * 0.29).sin());
                let mut d1 = DVector::from_fn(n, |i, _| ((i * 3 + 2) as f64 * 0.53).cos());
                let mut worst: f64 = 0.0;
                for _ in 0..2000 {
                    let d2 = &lr * &d1 + &ll * &d0;
                    d0 = std::mem::replace(&mut d1, d2);
                    worst = worst.max(d1.amax());
                    if !worst.is_finite() {
                        break;
                    }
                }
                worst
            };
            let below = simulate(0.97 * dt_star);
            assert!(below < 1e3, "bounded run blew up: {below}");
            let above = simulate(1.03 * dt_star);
            assert!(above > 1e3 || !above.is_finite(), "unstable run stayed small: {above}");
        }
    }

    #[test]
    fn fixed_point_consistency_logistic() {
        use crate::imex::{sbdf2_step, StepperHistory};
        let p = LogisticProblem::new(1.0).unwrap();
        let u_ss = DVector::from_element(1, 1.0);
        assert!(crate::imex::steady_residual(&p, &u_ss).unwrap() < 1e-14);
        for dt in [0.01, 0.1, 0.5] {
            let hist = StepperHistory::new(u_ss.clone(), u_ss.clone(), 0.0, dt);
            let u = sbdf2_step(&p, &hist, dt).unwrap();
            assert!((u[0] - 1.0).abs() < 1e-8);
        }
    }
}
