//! Adaptive VSSBDF2 time stepping with a coarse/fine local-error
//! estimate.
//!
//! Each attempted step advances twice: one "coarse" VSSBDF2 step of
//! size `dt_now`, and two "fine" half steps whose first half consumes
//! the half-history state `u^{n-1/2}`. The weighted difference of the
//! two arrivals estimates the local truncation error of the coarse
//! step; the step is accepted when that estimate sits below
//! `tol + range`, and the next step size follows the cube-root law
//! `dt (tol/est)^{1/3}` that matches an O(dt^3) local error.
//!
//! The accepted value is the coarse solution, or the Richardson blend
//! of coarse and fine when extrapolation is enabled.

use crate::error::{Error, Result};
use crate::imex::{bootstrap_step, vssbdf2_step, ImexProblem, StepperHistory};
use nalgebra::DVector;

/// How the accepted-step size reacts to the error estimate.
///
/// Near a conditionally stable steady state the estimate tracks the
/// critical-mode amplitude rather than `dt^3`, and a pure proportional
/// law rings around the limiting step size. The damped variants keep
/// the same equilibrium (`est = tol`, which forces `|lambda(dt)| = 1`,
/// i.e. `dt = dt*`) while suppressing the oscillation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepController {
    /// Apply `dt (tol/est)^{1/3}` after every accepted step.
    CubeRoot,
    /// Hold dt while the estimate stays inside `(tol - range,
    /// tol + range)`; apply the cube-root law only when it leaves the
    /// window.
    WindowHold,
    /// Proportional-integral law
    /// `dt (tol/est)^{ki} (est_prev/est)^{kp}`; the derivative-like
    /// second factor damps the estimate-lag oscillation.
    Pi { ki: f64, kp: f64 },
}

impl StepController {
    pub fn default_pi() -> Self {
        StepController::Pi { ki: 0.15, kp: 0.3 }
    }
}

/// Where the fine track's half-history state `u^{n-1/2}` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfHistory {
    /// Quadratic interpolation through the last three accepted levels,
    /// evaluated at `t^n - dt_old/2`; linear until three levels exist.
    Quadratic,
    /// Linear interpolation of the two most recent levels.
    Linear,
    /// Reuse the fine intermediate state computed during the previous
    /// accepted step (the fine track is self-sustaining).
    FineTrack,
}

/// Parameters of the adaptive stepper.
#[derive(Clone, Debug)]
pub struct AdaptiveConfig {
    /// Target local-truncation-error estimate.
    pub tol: f64,
    /// Half-width of the acceptance window around `tol`; must satisfy
    /// `0 < range < tol`.
    pub range: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_init: f64,
    /// Blend coarse and fine solutions on accept.
    pub richardson: bool,
    pub max_rejects_per_step: usize,
    /// Cap on `dt_next / dt` after an accepted step.
    pub growth_cap: f64,
    /// Floor on `dt_next / dt` after a rejected step.
    pub shrink_floor: f64,
    pub half_history: HalfHistory,
    pub controller: StepController,
    /// Rejections leave a memory: accepted candidates are capped at
    /// `reject_backoff` times the smallest recently rejected dt. Near a
    /// stability-limited plateau the estimate lags the step size, and
    /// without the cap the controller repeatedly overshoots the
    /// threshold and dives; the memory pins the candidate at the
    /// boundary instead.
    pub reject_backoff: f64,
    /// Per accepted step, the reject memory relaxes by this factor when
    /// the estimate sits inside the window.
    pub reject_cap_relax: f64,
    /// Faster relaxation used while the estimate starves below the
    /// window (the constraint that caused the rejection has passed).
    pub reject_cap_relax_starved: f64,
    /// The controller reacts to the maximum estimate over this many
    /// recent accepted steps. Critical modes with complex eigenvalues
    /// rotate, which makes the per-step estimate beat over a band wider
    /// than the acceptance window; the trailing maximum tracks the beat
    /// envelope instead, which is stationary at a plateau. 1 reproduces
    /// plain per-step control.
    pub controller_est_window: usize,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            tol: 1e-6,
            range: 1e-6 / 3.0,
            dt_min: 1e-10,
            dt_max: 1.0,
            dt_init: 1e-4,
            richardson: false,
            max_rejects_per_step: 40,
            growth_cap: 2.0,
            shrink_floor: 0.1,
            half_history: HalfHistory::FineTrack,
            controller: StepController::default_pi(),
            reject_backoff: 0.99,
            reject_cap_relax: 1.002,
            reject_cap_relax_starved: 1.003,
            controller_est_window: 30,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.range > 0.0 && self.range < self.tol) {
            return Err(Error::invalid(format!(
                "adaptive config requires 0 < range < tol, got tol={}, range={}",
                self.tol, self.range
            )));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::invalid(format!(
                "adaptive config requires 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if !(self.growth_cap > 1.0) || !(self.shrink_floor > 0.0 && self.shrink_floor < 1.0) {
            return Err(Error::invalid(
                "adaptive config requires growth_cap > 1 and shrink_floor in (0,1)",
            ));
        }
        Ok(())
    }
}

/// One attempted step, accepted or not.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Target time of the attempt (`t^n + dt`).
    pub t: f64,
    pub dt: f64,
    /// Max-norm of the local-truncation-error estimate.
    pub lte_estimate: f64,
    pub accepted: bool,
    /// Rejections already incurred on this step before the attempt.
    pub reject_count: u32,
}

/// Local-truncation-error estimate of the coarse step from the
/// coarse/fine pair:
/// `est = 8 (dt_old + dt_now)/(7 dt_old + 5 dt_now) (u_c - u_f)`.
/// Returns the estimate vector and its max-norm.
pub fn estimate_lte(
    u_coarse: &DVector<f64>,
    u_fine: &DVector<f64>,
    dt_old: f64,
    dt_now: f64,
) -> (DVector<f64>, f64) {
    let factor = 8.0 * (dt_old + dt_now) / (7.0 * dt_old + 5.0 * dt_now);
    let est = (u_coarse - u_fine) * factor;
    let norm = est.amax();
    (est, norm)
}

/// Richardson blend `alpha u_c + beta u_f` with
/// `alpha = -(dt_old + 3 dt_now)/(7 dt_old + 5 dt_now)` and
/// `beta = 8 (dt_old + dt_now)/(7 dt_old + 5 dt_now)`; `alpha + beta = 1`.
pub fn richardson_combine(
    u_coarse: &DVector<f64>,
    u_fine: &DVector<f64>,
    dt_old: f64,
    dt_now: f64,
) -> DVector<f64> {
    let denom = 7.0 * dt_old + 5.0 * dt_now;
    let alpha = -(dt_old + 3.0 * dt_now) / denom;
    let beta = 8.0 * (dt_old + dt_now) / denom;
    u_coarse * alpha + u_fine * beta
}

/// The controller's raw step-size law `dt (tol/est)^{1/3}`; infinite
/// when the estimate vanishes (caps are applied by the caller).
pub fn step_size_law(dt: f64, est_norm: f64, tol: f64) -> f64 {
    if est_norm > 0.0 {
        dt * (tol / est_norm).cbrt()
    } else {
        f64::INFINITY
    }
}

/// Result of one attempted adaptive step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub accepted: bool,
    /// Accepted solution at `t + dt_used` (coarse or Richardson blend);
    /// on reject this still holds the coarse trial value.
    pub u_next: DVector<f64>,
    /// Fine intermediate state at `t + dt_used/2`.
    pub u_fine_half: DVector<f64>,
    /// Fine arrival at `t + dt_used`.
    pub u_fine: DVector<f64>,
    pub dt_used: f64,
    pub dt_next: f64,
    pub record: StepRecord,
}

/// Attempt one adaptive step of size `dt_candidate` from the coarse
/// history and the matching fine half-history
/// (`u^{n-1/2}` at `t^n - dt_old/2` paired with `u^n`).
pub fn advance_one(
    problem: &dyn ImexProblem,
    hist: &StepperHistory,
    hist_fine_half: &StepperHistory,
    cfg: &AdaptiveConfig,
    dt_candidate: f64,
    reject_count: u32,
) -> Result<StepOutcome> {
    let scale = hist.dt_old.max(1e-300);
    if (hist_fine_half.t_now - hist.t_now).abs() > 1e-9 * scale.max(hist.t_now.abs())
        || (hist_fine_half.dt_old - hist.dt_old / 2.0).abs() > 1e-9 * scale
    {
        return Err(Error::invalid(
            "advance_one: fine half-history is not consistent with the coarse history",
        ));
    }
    if !(dt_candidate >= cfg.dt_min * (1.0 - 1e-12) && dt_candidate <= cfg.dt_max * (1.0 + 1e-12))
    {
        return Err(Error::invalid(format!(
            "advance_one: dt_candidate = {dt_candidate} outside [{}, {}]",
            cfg.dt_min, cfg.dt_max
        )));
    }
    let dt = dt_candidate;
    let u_coarse = vssbdf2_step(problem, hist, dt)?;
    let u_fine_half = vssbdf2_step(problem, hist_fine_half, dt / 2.0)?;
    let fine_second = StepperHistory::new(
        hist.u_now.clone(),
        u_fine_half.clone(),
        hist.t_now + dt / 2.0,
        dt / 2.0,
    );
    let u_fine = vssbdf2_step(problem, &fine_second, dt / 2.0)?;
    let (_, est_norm) = estimate_lte(&u_coarse, &u_fine, hist.dt_old, dt);

    let at_floor = dt <= cfg.dt_min * (1.0 + 1e-12);
    let accepted = est_norm <= cfg.tol + cfg.range || at_floor;
    let raw = step_size_law(dt, est_norm, cfg.tol);
    let dt_next = if accepted {
        raw.min(cfg.growth_cap * dt).clamp(cfg.dt_min, cfg.dt_max)
    } else {
        raw.max(cfg.shrink_floor * dt).clamp(cfg.dt_min, cfg.dt_max)
    };
    let u_next = if accepted && cfg.richardson {
        richardson_combine(&u_coarse, &u_fine, hist.dt_old, dt)
    } else {
        u_coarse
    };
    let record = StepRecord {
        t: hist.t_now + dt,
        dt,
        lte_estimate: est_norm,
        accepted,
        reject_count,
    };
    Ok(StepOutcome {
        accepted,
        u_next,
        u_fine_half,
        u_fine,
        dt_used: dt,
        dt_next,
        record,
    })
}

/// Accepted trajectory plus the full attempt log.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Times of the retained states (subsampled by `state_stride`).
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Every attempted step, accepted or rejected, in order.
    pub records: Vec<StepRecord>,
    pub final_time: f64,
    pub final_state: DVector<f64>,
    pub accepted_steps: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    /// Keep every k-th accepted state (the initial and final states are
    /// always kept). 1 keeps everything.
    pub state_stride: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { state_stride: 1 }
    }
}

/// Integrate from `t0` to `t_end` with the adaptive stepper, retaining
/// every accepted state.
pub fn integrate(
    problem: &dyn ImexProblem,
    u0: &DVector<f64>,
    t0: f64,
    t_end: f64,
    cfg: &AdaptiveConfig,
) -> Result<Trajectory> {
    integrate_with(problem, u0, t0, t_end, cfg, IntegrateOptions::default())
}

/// As [`integrate`], with control over state retention.
pub fn integrate_with(
    problem: &dyn ImexProblem,
    u0: &DVector<f64>,
    t0: f64,
    t_end: f64,
    cfg: &AdaptiveConfig,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_end > t0) {
        return Err(Error::invalid(format!(
            "integrate: t_end = {t_end} must exceed t0 = {t0}"
        )));
    }
    let stride = opts.state_stride.max(1);

    // Bootstrap the second level with one IMEX Euler step, halving the
    // step on failure.
    let mut dt_boot = cfg.dt_init.min((t_end - t0) / 2.0).max(cfg.dt_min);
    let mut u1 = None;
    for _ in 0..200 {
        match bootstrap_step(problem, u0, t0, dt_boot) {
            Ok(u) => {
                u1 = Some(u);
                break;
            }
            Err(_) if dt_boot > cfg.dt_min => {
                dt_boot = (dt_boot / 2.0).max(cfg.dt_min);
            }
            Err(e) => return Err(e),
        }
    }
    let u1 = u1.ok_or_else(|| Error::numeric("bootstrap failed down to dt_min"))?;

    let mut times = vec![t0, t0 + dt_boot];
    let mut states = vec![u0.clone(), u1.clone()];
    let mut records: Vec<StepRecord> = Vec::new();
    let mut accepted_steps = 0usize;

    let mut hist = StepperHistory::new(u0.clone(), u1, t0 + dt_boot, dt_boot);
    // first half-history: linear interpolation of the two known levels
    let mut half_state = interp_linear(
        (t0, u0),
        (hist.t_now, &hist.u_now),
        hist.t_now - hist.dt_old / 2.0,
    );
    let mut dt_candidate = dt_boot.clamp(cfg.dt_min, cfg.dt_max);

    let t_tiny = 1e-12 * t_end.abs().max(1.0);
    let mut est_prev: Option<f64> = None;
    let mut reject_cap: Option<f64> = None;
    // decaying maximum of accepted estimates: rises instantly with each
    // peak, relaxes on the window's time scale
    let env_decay = 1.0 - 1.0 / cfg.controller_est_window.max(1) as f64;
    let mut est_envelope = 0.0f64;
    while hist.t_now < t_end - t_tiny {
        let remaining = t_end - hist.t_now;
        let mut dt_try = dt_candidate.min(remaining);
        let mut rejects = 0u32;
        loop {
            let fine_hist = StepperHistory::new(
                half_state.clone(),
                hist.u_now.clone(),
                hist.t_now,
                hist.dt_old / 2.0,
            );
            let out = advance_one(problem, &hist, &fine_hist, cfg, dt_try, rejects)?;
            records.push(out.record.clone());
            if out.accepted {
                accepted_steps += 1;
                half_state = match cfg.half_history {
                    HalfHistory::FineTrack => out.u_fine_half,
                    HalfHistory::Linear => interp_linear(
                        (hist.t_now, &hist.u_now),
                        (hist.t_now + out.dt_used, &out.u_next),
                        hist.t_now + out.dt_used / 2.0,
                    ),
                    HalfHistory::Quadratic => interp_quadratic(
                        (hist.t_prev(), &hist.u_prev),
                        (hist.t_now, &hist.u_now),
                        (hist.t_now + out.dt_used, &out.u_next),
                        hist.t_now + out.dt_used / 2.0,
                    ),
                };
                hist.advance(out.u_next, out.dt_used);
                if accepted_steps.is_multiple_of(stride) || hist.t_now >= t_end - t_tiny {
                    times.push(hist.t_now);
                    states.push(hist.u_now.clone());
                }
                est_envelope = out.record.lte_estimate.max(est_envelope * env_decay);
                dt_candidate = next_candidate(
                    cfg,
                    out.dt_used,
                    est_envelope,
                    est_prev,
                    out.dt_next,
                );
                if let Some(cap) = reject_cap.as_mut() {
                    // deep starvation means the constraint that caused
                    // the rejections is gone; mild starvation also
                    // happens in the troughs of an oscillatory estimate,
                    // where the cap must creep, not jump
                    *cap *= if est_envelope < 0.02 * cfg.tol {
                        cfg.reject_cap_relax_starved.max(1.01)
                    } else if est_envelope < cfg.tol - cfg.range {
                        cfg.reject_cap_relax_starved
                    } else {
                        cfg.reject_cap_relax
                    };
                    if *cap >= cfg.dt_max {
                        reject_cap = None;
                    } else {
                        dt_candidate = dt_candidate.min(*cap).max(cfg.dt_min);
                    }
                }
                est_prev = Some(est_envelope);
                break;
            }
            rejects += 1;
            let backoff = (cfg.reject_backoff * out.dt_used).max(cfg.dt_min);
            reject_cap = Some(reject_cap.map_or(backoff, |c: f64| c.min(backoff)));
            if rejects as usize > cfg.max_rejects_per_step {
                return Err(Error::StepFailure {
                    t: hist.t_now,
                    what: format!(
                        "exceeded {} rejects (last dt = {:.6e}, lte = {:.6e})",
                        cfg.max_rejects_per_step, out.dt_used, out.record.lte_estimate
                    ),
                    records,
                });
            }
            // graded retry: a single rejection (the common case at a
            // stability plateau) dips gently, repeated ones dive
            let floor_frac = match rejects {
                1 => 0.97,
                2 => 0.9,
                3 => 0.6,
                _ => 0.3,
            };
            dt_try = out
                .dt_next
                .max(floor_frac * out.dt_used)
                .max(cfg.dt_min)
                .min(remaining);
        }
    }

    Ok(Trajectory {
        times,
        final_time: hist.t_now,
        final_state: hist.u_now.clone(),
        states,
        records,
        accepted_steps,
    })
}

/// Accepted-step size policy; rejected retries always follow the
/// floored cube-root law computed in [`advance_one`].
fn next_candidate(
    cfg: &AdaptiveConfig,
    dt_used: f64,
    est: f64,
    est_prev: Option<f64>,
    law_next: f64,
) -> f64 {
    match cfg.controller {
        StepController::CubeRoot => law_next,
        StepController::WindowHold => {
            if est >= cfg.tol - cfg.range && est <= cfg.tol + cfg.range {
                dt_used.clamp(cfg.dt_min, cfg.dt_max)
            } else {
                law_next
            }
        }
        StepController::Pi { ki, kp } => {
            let floor = 1e-6 * cfg.tol;
            let e = est.max(floor);
            let ep = est_prev.unwrap_or(e).max(floor);
            // accepted steps met the tolerance, so downward drift is
            // limited to 1% per step; fast shrinking happens through
            // explicit rejections
            let factor = ((cfg.tol / e).powf(ki) * (ep / e).powf(kp)).max(0.99);
            (dt_used * factor)
                .min(cfg.growth_cap * dt_used)
                .clamp(cfg.dt_min, cfg.dt_max)
        }
    }
}

fn interp_linear(p0: (f64, &DVector<f64>), p1: (f64, &DVector<f64>), t: f64) -> DVector<f64> {
    let w = (t - p0.0) / (p1.0 - p0.0);
    p0.1 * (1.0 - w) + p1.1 * w
}

fn interp_quadratic(
    p0: (f64, &DVector<f64>),
    p1: (f64, &DVector<f64>),
    p2: (f64, &DVector<f64>),
    t: f64,
) -> DVector<f64> {
    let (t0, t1, t2) = (p0.0, p1.0, p2.0);
    let w0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
    let w1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
    let w2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
    p0.1 * w0 + p1.1 * w1 + p2.1 * w2
}
