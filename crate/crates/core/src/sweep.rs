//! Experiment driver: limiting-step extraction, threshold sweeps over
//! the Debye ratio, feature detection on the threshold curve, power-law
//! fits, and the Richardson-extrapolation comparison.

use crate::adaptive::{integrate_with, AdaptiveConfig, IntegrateOptions, StepRecord};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::pnp_fbv::{PnpModel, PnpParams};
use crate::scalar::{split_diffusion_threshold, SplitDiffusionProblem, Stability};
use crate::stability::{
    assemble_jacobians, find_threshold_with, Crossing, StabilityReport, ThresholdOptions,
};
use crate::steady::{find_steady, SteadyOptions};
use rayon::prelude::*;

/// Limiting step size of an adaptive run, or the reason none exists.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtInfinity {
    Stabilized(f64),
    /// The tail is sitting on the configured maximum step; a cap is not
    /// a threshold.
    HitDtMax,
    /// The tail has not reached a statistically stationary level.
    NotStabilized,
    TooFewSteps,
}

impl DtInfinity {
    pub fn value(&self) -> Option<f64> {
        match self {
            DtInfinity::Stabilized(v) => Some(*v),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            DtInfinity::Stabilized(_) => "ok",
            DtInfinity::HitDtMax => "hit_dt_max",
            DtInfinity::NotStabilized => "not_stabilized",
            DtInfinity::TooFewSteps => "too_few_steps",
        }
    }
}

/// Mean dt over the last `window` accepted steps. The final accepted
/// step is excluded (it is clamped to land exactly on the end time).
/// Returns `HitDtMax` when any tail step sits on the cap, and
/// `NotStabilized` when the means of the two window halves disagree by
/// more than 5% (at a complex-pair crossing the plateau is a bounded
/// orbit around `dt*`, so per-step scatter is expected; drifting
/// half-means are not).
pub fn extract_dt_infinity(records: &[StepRecord], window: usize, dt_max: f64) -> DtInfinity {
    let window = window.max(2);
    let mut accepted: Vec<f64> = records.iter().filter(|r| r.accepted).map(|r| r.dt).collect();
    accepted.pop();
    if accepted.len() < window {
        return DtInfinity::TooFewSteps;
    }
    let tail = &accepted[accepted.len() - window..];
    if tail.iter().any(|dt| *dt >= dt_max * (1.0 - 1e-9)) {
        return DtInfinity::HitDtMax;
    }
    let mean: f64 = tail.iter().sum::<f64>() / window as f64;
    let half = window / 2;
    let m1: f64 = tail[..half].iter().sum::<f64>() / half as f64;
    let m2: f64 = tail[half..].iter().sum::<f64>() / (window - half) as f64;
    if (m1 - m2).abs() / mean > 0.05 {
        return DtInfinity::NotStabilized;
    }
    DtInfinity::Stabilized(mean)
}

/// What an epsilon-sweep evaluates per grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    Analysis,
    Adaptive,
    Both,
}

/// Everything a sweep worker needs per point.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub jobs: usize,
    pub adaptive: AdaptiveConfig,
    pub steady: SteadyOptions,
    /// Horizon and extraction window of the dt-infinity run.
    pub t_adaptive: f64,
    pub dt_inf_window: usize,
    /// Threshold search bracket and tolerance.
    pub dt_lo: f64,
    pub dt_hi: f64,
    pub rel_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mode: SweepMode::Analysis,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            adaptive: AdaptiveConfig::default(),
            steady: SteadyOptions::default(),
            t_adaptive: 600.0,
            dt_inf_window: 2000,
            dt_lo: 1e-4,
            dt_hi: 1.0,
            rel_tol: 1e-6,
        }
    }
}

/// One evaluated sweep point.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub eps: f64,
    pub drive: f64,
    pub dt_star: Option<f64>,
    pub crossing: Option<Crossing>,
    pub im_lambda: Option<f64>,
    pub dt_infinity: Option<f64>,
    pub dt_inf_status: String,
    pub mesh_id: String,
    pub status: String,
}

impl SweepPoint {
    fn failed(eps: f64, drive: f64, mesh_id: &str, err: &Error) -> Self {
        SweepPoint {
            eps,
            drive,
            dt_star: None,
            crossing: None,
            im_lambda: None,
            dt_infinity: None,
            dt_inf_status: "skipped".into(),
            mesh_id: mesh_id.to_string(),
            status: format!("error: {err}"),
        }
    }
}

/// Evaluate one PNP operating point: steady state, then threshold
/// analysis and/or the adaptive limiting step.
pub fn evaluate_point(params: &PnpParams, mesh: &Mesh, cfg: &SweepConfig) -> Result<SweepPoint> {
    let model = PnpModel::new(*params, mesh.clone())?;
    let u0 = model.pack(&model.default_initial_state());
    let steady = find_steady(&model, &u0, &cfg.steady)?;

    let mut point = SweepPoint {
        eps: params.eps,
        drive: params.drive.value(),
        dt_star: None,
        crossing: None,
        im_lambda: None,
        dt_infinity: None,
        dt_inf_status: "skipped".into(),
        mesh_id: mesh.id().to_string(),
        status: "ok".into(),
    };

    if matches!(cfg.mode, SweepMode::Analysis | SweepMode::Both) {
        let jac = assemble_jacobians(&model, &steady.state, None)?;
        let report = threshold_with_retry(&jac.j_f, &jac.j_g, cfg)?;
        point.dt_star = report.dt_star;
        point.crossing = report.crossing;
        point.im_lambda = report.im_lambda();
        if report.dt_star.is_none() {
            point.status = "no_threshold".into();
        }
    }

    if matches!(cfg.mode, SweepMode::Adaptive | SweepMode::Both) {
        let traj = integrate_with(
            &model,
            &u0,
            0.0,
            cfg.t_adaptive,
            &cfg.adaptive,
            IntegrateOptions {
                state_stride: usize::MAX,
            },
        )?;
        let dtinf = extract_dt_infinity(&traj.records, cfg.dt_inf_window, cfg.adaptive.dt_max);
        point.dt_infinity = dtinf.value();
        point.dt_inf_status = dtinf.status().to_string();
    }

    Ok(point)
}

/// The scan needs a stable starting point; if `dt_lo` is already past
/// the threshold, retry smaller before giving up.
fn threshold_with_retry(
    j_f: &nalgebra::DMatrix<f64>,
    j_g: &nalgebra::DMatrix<f64>,
    cfg: &SweepConfig,
) -> Result<StabilityReport> {
    let mut dt_lo = cfg.dt_lo;
    for _ in 0..6 {
        match find_threshold_with(
            j_f,
            j_g,
            dt_lo,
            cfg.dt_hi,
            ThresholdOptions {
                rel_tol: cfg.rel_tol,
                ..ThresholdOptions::default()
            },
        ) {
            Err(Error::InvalidArgument(_)) => dt_lo /= 10.0,
            other => return other,
        }
    }
    Err(Error::invalid(format!(
        "no stable dt_lo found down to {dt_lo:.3e}"
    )))
}

/// Sweep the Debye ratio over a grid; points are independent jobs and
/// failures are recorded, not fatal. Results keep grid order.
pub fn epsilon_sweep(
    base: &PnpParams,
    eps_grid: &[f64],
    mesh: &Mesh,
    cfg: &SweepConfig,
) -> Vec<SweepPoint> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build();
    let run = |eps: &f64| -> SweepPoint {
        let params = PnpParams { eps: *eps, ..*base };
        evaluate_point(&params, mesh, cfg)
            .unwrap_or_else(|e| SweepPoint::failed(*eps, base.drive.value(), mesh.id(), &e))
    };
    match pool {
        Ok(pool) => pool.install(|| eps_grid.par_iter().map(run).collect()),
        Err(_) => eps_grid.iter().map(run).collect(),
    }
}

/// Crossing-type boundaries refined by bisection on epsilon. New points
/// are inserted so the returned list stays sorted by eps.
pub fn refine_crossing_boundaries(
    base: &PnpParams,
    mesh: &Mesh,
    cfg: &SweepConfig,
    points: &mut Vec<SweepPoint>,
    resolution: f64,
) {
    let is_complex = |p: &SweepPoint| matches!(p.crossing, Some(Crossing::ComplexPair(_)));
    loop {
        let mut insert_at: Option<(usize, f64)> = None;
        for k in 0..points.len().saturating_sub(1) {
            let (a, b) = (&points[k], &points[k + 1]);
            if a.crossing.is_none() || b.crossing.is_none() {
                continue;
            }
            if is_complex(a) != is_complex(b) && (b.eps - a.eps) > resolution {
                insert_at = Some((k + 1, 0.5 * (a.eps + b.eps)));
                break;
            }
        }
        let Some((idx, eps)) = insert_at else { break };
        let params = PnpParams { eps, ..*base };
        let p = evaluate_point(&params, mesh, cfg)
            .unwrap_or_else(|e| SweepPoint::failed(eps, base.drive.value(), mesh.id(), &e));
        points.insert(idx, p);
    }
}

/// Detector thresholds; the defaults flag a jump at 5x the median
/// neighbor difference and a corner at 10x the median second
/// difference, both scale-invariant.
#[derive(Clone, Copy, Debug)]
pub struct FeatureConfig {
    pub jump_factor: f64,
    pub corner_factor: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            jump_factor: 5.0,
            corner_factor: 10.0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct FeatureReport {
    /// Epsilon locations where dt*(eps) jumps.
    pub jumps: Vec<f64>,
    /// Epsilon locations where the slope of dt*(eps) breaks.
    pub corners: Vec<f64>,
    /// Epsilon locations where the crossing type flips.
    pub crossing_changes: Vec<f64>,
}

impl FeatureReport {
    pub fn summary(&self) -> String {
        let fmt = |v: &[f64]| {
            if v.is_empty() {
                "none".to_string()
            } else {
                v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
            }
        };
        format!(
            "jumps at eps = {}\ncorners at eps = {}\ncrossing-type changes at eps = {}\n",
            fmt(&self.jumps),
            fmt(&self.corners),
            fmt(&self.crossing_changes)
        )
    }
}

/// Locate jumps, corners, and crossing-type changes on a threshold
/// curve. Jumps are excluded from the corner scan (a jump dominates its
/// neighborhood's second differences).
pub fn detect_features(points: &[SweepPoint], cfg: &FeatureConfig) -> FeatureReport {
    let data: Vec<(f64, f64, bool)> = points
        .iter()
        .filter_map(|p| {
            p.dt_star.map(|d| {
                (
                    p.eps,
                    d,
                    matches!(p.crossing, Some(Crossing::ComplexPair(_))),
                )
            })
        })
        .collect();
    let mut report = FeatureReport::default();
    if data.len() < 4 {
        return report;
    }

    for k in 0..data.len() - 1 {
        if data[k].2 != data[k + 1].2 {
            report.crossing_changes.push(0.5 * (data[k].0 + data[k + 1].0));
        }
    }

    // scale floor keeps the thresholds meaningful when the medians
    // vanish (synthetic piecewise data) without breaking scale
    // invariance
    let scale = median(data.iter().map(|d| d.1.abs()));
    let diffs: Vec<f64> = data.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let med_diff = median(diffs.iter().map(|d| d.abs()));
    let jump_threshold = (cfg.jump_factor * med_diff).max(1e-9 * scale);
    let mut jump_idx: Vec<usize> = Vec::new();
    for (k, d) in diffs.iter().enumerate() {
        if d.abs() > jump_threshold {
            jump_idx.push(k);
        }
    }
    // merge adjacent flagged intervals, report the largest in each run
    let mut k = 0;
    while k < jump_idx.len() {
        let mut j = k;
        while j + 1 < jump_idx.len() && jump_idx[j + 1] == jump_idx[j] + 1 {
            j += 1;
        }
        let best = (k..=j)
            .map(|i| jump_idx[i])
            .max_by(|a, b| diffs[*a].abs().partial_cmp(&diffs[*b].abs()).unwrap())
            .unwrap();
        report.jumps.push(0.5 * (data[best].0 + data[best + 1].0));
        k = j + 1;
    }

    let second: Vec<f64> = (1..data.len() - 1)
        .map(|i| data[i + 1].1 - 2.0 * data[i].1 + data[i - 1].1)
        .collect();
    let med_second = median(second.iter().map(|d| d.abs()));
    let corner_threshold = (cfg.corner_factor * med_second).max(1e-9 * scale);
    let near_jump = |i: usize| jump_idx.iter().any(|j| i >= j.saturating_sub(1) && i <= j + 1);
    let mut corner_idx: Vec<usize> = Vec::new();
    for (k, d) in second.iter().enumerate() {
        // second difference at data index k+1 spans intervals k, k+1
        if d.abs() > corner_threshold && !near_jump(k) && !near_jump(k + 1) {
            corner_idx.push(k);
        }
    }
    let mut k = 0;
    while k < corner_idx.len() {
        let mut j = k;
        while j + 1 < corner_idx.len() && corner_idx[j + 1] == corner_idx[j] + 1 {
            j += 1;
        }
        let best = (k..=j)
            .map(|i| corner_idx[i])
            .max_by(|a, b| second[*a].abs().partial_cmp(&second[*b].abs()).unwrap())
            .unwrap();
        report.corners.push(data[best + 1].0);
        k = j + 1;
    }
    report
}

fn median(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

/// Least-squares fit of `dt* = prefactor * eps^exponent` in log-log
/// coordinates.
#[derive(Clone, Copy, Debug)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
}

pub fn fit_power_law(samples: &[(f64, f64)]) -> Result<PowerLawFit> {
    if samples.len() < 2 {
        return Err(Error::invalid("power-law fit needs at least two samples"));
    }
    if samples.iter().any(|(x, y)| *x <= 0.0 || *y <= 0.0) {
        return Err(Error::invalid("power-law fit needs positive samples"));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in samples {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::invalid("power-law fit is degenerate"));
    }
    let exponent = (n * sxy - sx * sy) / denom;
    let intercept = (sy - exponent * sx) / n;
    Ok(PowerLawFit {
        exponent,
        prefactor: intercept.exp(),
    })
}

/// Straight-line least squares `y = slope x + intercept`.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_line(samples: &[(f64, f64)]) -> Result<LineFit> {
    if samples.len() < 2 {
        return Err(Error::invalid("line fit needs at least two samples"));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in samples {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::invalid("line fit is degenerate"));
    }
    let slope = (n * sxy - sx * sy) / denom;
    Ok(LineFit {
        slope,
        intercept: (sy - slope * sx) / n,
    })
}

/// One point of the Richardson-extrapolation comparison on the split
/// diffusion model.
#[derive(Clone, Debug)]
pub struct ReComparisonPoint {
    pub d2: f64,
    pub dt_star_analysis: Option<f64>,
    pub dt_star_formula: Option<f64>,
    pub dt_inf_no_re: Option<f64>,
    pub dt_inf_re: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug)]
pub struct ReComparison {
    pub d1: f64,
    pub lambda_n: f64,
    pub points: Vec<ReComparisonPoint>,
    /// Least-squares line through `1/dt_inf(with RE)` versus `D2`.
    pub re_fit: Option<LineFit>,
}

pub struct ReComparisonConfig {
    pub adaptive: AdaptiveConfig,
    pub t_run: f64,
    pub dt_inf_window: usize,
    /// dt_max per point is `min(adaptive.dt_max, dt_max_factor * dt*)`
    /// when the no-RE scheme is conditionally stable.
    pub dt_max_factor: f64,
    pub jobs: usize,
    pub rel_tol: f64,
}

impl Default for ReComparisonConfig {
    fn default() -> Self {
        ReComparisonConfig {
            adaptive: AdaptiveConfig::default(),
            t_run: 400.0,
            dt_inf_window: 400,
            dt_max_factor: 2.0,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            rel_tol: 1e-8,
        }
    }
}

/// For each D2: adaptive limiting steps without and with Richardson
/// extrapolation, plus the analysis threshold of the underlying scheme.
pub fn richardson_comparison(
    d1: f64,
    d2_grid: &[f64],
    mesh: &Mesh,
    cfg: &ReComparisonConfig,
) -> Result<ReComparison> {
    if d2_grid.is_empty() {
        return Err(Error::invalid("richardson comparison needs a nonempty D2 grid"));
    }
    let op = crate::mesh::DiffOp::second_difference(mesh, crate::mesh::BoundaryPolicy::InteriorOnly);
    let (_, lambda_n) = op.extreme_eigenvalues()?;

    let eval = |d2: &f64| -> ReComparisonPoint {
        match re_point(d1, *d2, mesh, lambda_n, cfg) {
            Ok(p) => p,
            Err(e) => ReComparisonPoint {
                d2: *d2,
                dt_star_analysis: None,
                dt_star_formula: None,
                dt_inf_no_re: None,
                dt_inf_re: None,
                status: format!("error: {e}"),
            },
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build();
    let points: Vec<ReComparisonPoint> = match pool {
        Ok(pool) => pool.install(|| d2_grid.par_iter().map(eval).collect()),
        Err(_) => d2_grid.iter().map(eval).collect(),
    };

    let fit_samples: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.dt_inf_re.map(|d| (p.d2, 1.0 / d)))
        .collect();
    let re_fit = fit_line(&fit_samples).ok();
    Ok(ReComparison {
        d1,
        lambda_n,
        points,
        re_fit,
    })
}

fn re_point(
    d1: f64,
    d2: f64,
    mesh: &Mesh,
    lambda_n: f64,
    cfg: &ReComparisonConfig,
) -> Result<ReComparisonPoint> {
    let problem = SplitDiffusionProblem::new(d1, d2, mesh)?;
    let formula = split_diffusion_threshold(d1, d2, lambda_n)?;
    let dt_star_formula = formula.dt_star();

    let dt_max = match formula {
        Stability::Conditional { dt_star } => (cfg.dt_max_factor * dt_star).min(cfg.adaptive.dt_max),
        Stability::Unconditional => cfg.adaptive.dt_max,
    };
    let mut run_cfg = cfg.adaptive.clone();
    run_cfg.dt_max = dt_max;
    run_cfg.dt_init = run_cfg.dt_init.min(dt_max / 4.0).max(run_cfg.dt_min);

    let u0 = problem.sine_initial_state();
    let extract = |richardson: bool| -> Result<DtInfinity> {
        let mut c = run_cfg.clone();
        c.richardson = richardson;
        let traj = integrate_with(
            &problem,
            &u0,
            0.0,
            cfg.t_run,
            &c,
            IntegrateOptions {
                state_stride: usize::MAX,
            },
        )?;
        Ok(extract_dt_infinity(&traj.records, cfg.dt_inf_window, c.dt_max))
    };
    let no_re = extract(false)?;
    let with_re = extract(true)?;

    // analysis threshold of the constant-step scheme about the zero
    // steady state (f is linear, so the centred differences are exact)
    let u_ss = nalgebra::DVector::zeros(problem_dim(mesh));
    let jac = assemble_jacobians(&problem, &u_ss, None)?;
    let report = match dt_star_formula {
        Some(dt_star) => find_threshold_with(
            &jac.j_f,
            &jac.j_g,
            dt_star / 50.0,
            (20.0 * dt_star).min(1e6),
            ThresholdOptions {
                rel_tol: cfg.rel_tol,
                ..ThresholdOptions::default()
            },
        )?,
        None => find_threshold_with(
            &jac.j_f,
            &jac.j_g,
            1e-4,
            10.0,
            ThresholdOptions {
                rel_tol: cfg.rel_tol,
                ..ThresholdOptions::default()
            },
        )?,
    };

    Ok(ReComparisonPoint {
        d2,
        dt_star_analysis: report.dt_star,
        dt_star_formula,
        dt_inf_no_re: no_re.value(),
        dt_inf_re: with_re.value(),
        status: format!("no_re={} re={}", no_re.status(), with_re.status()),
    })
}

fn problem_dim(mesh: &Mesh) -> usize {
    mesh.n_nodes() - 2
}

/// CSV rows for a sweep, one per point.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("eps,drive,dt_star,crossing,im_lambda,dt_infinity,mesh_id,status\n");
    for p in points {
        let crossing = match &p.crossing {
            Some(Crossing::RealMinusOne) => "real_minus_one",
            Some(Crossing::ComplexPair(_)) => "complex_pair",
            None => "",
        };
        s.push_str(&format!(
            "{:.16e},{:.16e},{},{},{},{},{},{}\n",
            p.eps,
            p.drive,
            p.dt_star.map_or(String::new(), |v| format!("{v:.16e}")),
            crossing,
            p.im_lambda.map_or(String::new(), |v| format!("{v:.16e}")),
            p.dt_infinity.map_or(String::new(), |v| format!("{v:.16e}")),
            p.mesh_id,
            if p.dt_inf_status == "skipped" {
                p.status.clone()
            } else {
                format!("{}|dtinf:{}", p.status, p.dt_inf_status)
            },
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(dt: f64, accepted: bool) -> StepRecord {
        StepRecord {
            t: 0.0,
            dt,
            lte_estimate: 1e-6,
            accepted,
            reject_count: 0,
        }
    }

    #[test]
    fn extraction_constant_tail() {
        let mut records: Vec<StepRecord> = (0..160).map(|_| rec(0.003, true)).collect();
        records.push(rec(0.001, true)); // clamped final step
        match extract_dt_infinity(&records, 100, 1.0) {
            DtInfinity::Stabilized(v) => assert_relative_eq!(v, 0.003, max_relative = 1e-12),
            other => panic!("expected stabilized extraction, got {other:?}"),
        }
    }

    #[test]
    fn extraction_flags_dt_max() {
        let mut records: Vec<StepRecord> = (0..200).map(|_| rec(0.5, true)).collect();
        records.push(rec(0.2, true));
        assert_eq!(extract_dt_infinity(&records, 100, 0.5), DtInfinity::HitDtMax);
    }

    #[test]
    fn extraction_flags_drift_and_short_runs() {
        // steadily growing tail: half means differ by far more than 5%
        let mut records: Vec<StepRecord> =
            (0..200).map(|k| rec(1e-3 * 1.02f64.powi(k), true)).collect();
        records.push(rec(1e-3, true));
        assert_eq!(
            extract_dt_infinity(&records, 100, 1.0),
            DtInfinity::NotStabilized
        );
        let records: Vec<StepRecord> = (0..50).map(|_| rec(0.003, true)).collect();
        assert_eq!(
            extract_dt_infinity(&records, 100, 1.0),
            DtInfinity::TooFewSteps
        );
    }

    fn synth_point(eps: f64, dt: f64, complex: bool) -> SweepPoint {
        SweepPoint {
            eps,
            drive: 2.0,
            dt_star: Some(dt),
            crossing: Some(if complex {
                Crossing::ComplexPair(nalgebra::Complex::new(-0.9, 0.3))
            } else {
                Crossing::RealMinusOne
            }),
            im_lambda: None,
            dt_infinity: None,
            dt_inf_status: "skipped".into(),
            mesh_id: "m".into(),
            status: "ok".into(),
        }
    }

    #[test]
    fn smooth_curve_has_no_features() {
        let pts: Vec<SweepPoint> = (0..40)
            .map(|k| {
                let eps = 0.05 + 0.003 * k as f64;
                synth_point(eps, 0.5 * eps * eps, false)
            })
            .collect();
        let rep = detect_features(&pts, &FeatureConfig::default());
        assert!(rep.jumps.is_empty());
        assert!(rep.corners.is_empty());
        assert!(rep.crossing_changes.is_empty());
    }

    #[test]
    fn step_function_is_a_jump() {
        let pts: Vec<SweepPoint> = (0..40)
            .map(|k| {
                let eps = 0.05 + 0.003 * k as f64;
                let dt = if k < 20 { 0.01 + 1e-5 * k as f64 } else { 0.03 + 1e-5 * k as f64 };
                synth_point(eps, dt, false)
            })
            .collect();
        let rep = detect_features(&pts, &FeatureConfig::default());
        assert_eq!(rep.jumps.len(), 1);
        let expect = 0.5 * (pts[19].eps + pts[20].eps);
        assert_relative_eq!(rep.jumps[0], expect, max_relative = 1e-12);
        // the jump should not double-report as a corner
        assert!(rep.corners.is_empty());
    }

    #[test]
    fn kink_is_a_corner_and_detectors_are_scale_invariant() {
        let mk = |scale: f64| -> Vec<SweepPoint> {
            (0..41)
                .map(|k| {
                    let eps = 0.05 + 0.003 * k as f64;
                    let dt = if k <= 20 {
                        0.01 + 2e-4 * k as f64
                    } else {
                        0.01 + 2e-4 * 20.0 + 1.2e-3 * (k - 20) as f64
                    };
                    synth_point(eps, dt * scale, false)
                })
                .collect()
        };
        let rep1 = detect_features(&mk(1.0), &FeatureConfig::default());
        let rep2 = detect_features(&mk(37.5), &FeatureConfig::default());
        assert_eq!(rep1.corners.len(), 1);
        assert_relative_eq!(rep1.corners[0], 0.05 + 0.003 * 20.0, max_relative = 1e-12);
        assert_eq!(rep1.corners, rep2.corners);
        assert_eq!(rep1.jumps, rep2.jumps);
    }

    #[test]
    fn crossing_change_located() {
        let pts: Vec<SweepPoint> = (0..20)
            .map(|k| {
                let eps = 0.1 + 0.002 * k as f64;
                synth_point(eps, 0.01 + 1e-4 * k as f64, k >= 9 && k < 15)
            })
            .collect();
        let rep = detect_features(&pts, &FeatureConfig::default());
        assert_eq!(rep.crossing_changes.len(), 2);
    }

    #[test]
    fn power_law_exact_recovery() {
        let samples: Vec<(f64, f64)> = (1..30)
            .map(|k| {
                let x = 0.01 * k as f64;
                (x, 3.7 * x * x)
            })
            .collect();
        let fit = fit_power_law(&samples).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, max_relative = 1e-10);
        assert_relative_eq!(fit.prefactor, 3.7, max_relative = 1e-9);
    }

    #[test]
    fn line_fit_exact() {
        let samples: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 2.5 * k as f64 - 1.0)).collect();
        let fit = fit_line(&samples).unwrap();
        assert_relative_eq!(fit.slope, 2.5, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, -1.0, max_relative = 1e-10);
    }
}
