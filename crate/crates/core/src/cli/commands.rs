//! The five subcommands behind the thin binary.

use super::{fmt_f64, write_csv, ModelKind, RunConfig, SweepKind};
use crate::adaptive::{integrate_with, IntegrateOptions, StepRecord, Trajectory};
use crate::error::{Error, Result};
use crate::imex::{steady_residual, ImexProblem};
use crate::pnp_fbv::PnpModel;
use crate::scalar::{
    classify_stability, discriminant_roots, rho_roots, LogisticProblem, ScalarSplit,
    SinkDiffusionProblem, SplitDiffusionProblem, Stability,
};
use crate::stability::{assemble_jacobians, StabilityReport};
use crate::steady::{find_steady, SteadyOutcome};
use crate::sweep::{
    detect_features, epsilon_sweep, extract_dt_infinity, fit_power_law,
    refine_crossing_boundaries, richardson_comparison, sweep_csv, FeatureConfig,
    ReComparisonConfig, SweepMode,
};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use std::path::Path;

/// A configured model instance plus its default initial state.
enum BuiltModel {
    Pnp(PnpModel),
    Logistic(LogisticProblem),
    Split(SplitDiffusionProblem),
    Sink(SinkDiffusionProblem),
}

impl BuiltModel {
    fn build(cfg: &RunConfig) -> Result<BuiltModel> {
        Ok(match cfg.model {
            ModelKind::Pnp => {
                BuiltModel::Pnp(PnpModel::new(cfg.pnp_params()?, cfg.build_mesh()?)?)
            }
            ModelKind::Logistic => BuiltModel::Logistic(LogisticProblem::new(cfg.r)?),
            ModelKind::SplitDiffusion => {
                BuiltModel::Split(SplitDiffusionProblem::new(cfg.d1, cfg.d2, &cfg.build_mesh()?)?)
            }
            ModelKind::SinkDiffusion => {
                BuiltModel::Sink(SinkDiffusionProblem::new(cfg.d1, cfg.eps, &cfg.build_mesh()?)?)
            }
        })
    }

    fn problem(&self) -> &dyn ImexProblem {
        match self {
            BuiltModel::Pnp(m) => m,
            BuiltModel::Logistic(m) => m,
            BuiltModel::Split(m) => m,
            BuiltModel::Sink(m) => m,
        }
    }

    fn initial_state(&self) -> DVector<f64> {
        match self {
            BuiltModel::Pnp(m) => m.pack(&m.default_initial_state()),
            BuiltModel::Logistic(_) => DVector::from_element(1, 0.01),
            BuiltModel::Split(m) => m.sine_initial_state(),
            BuiltModel::Sink(m) => m.sine_initial_state(),
        }
    }

    fn describe(&self, cfg: &RunConfig) -> String {
        match self {
            BuiltModel::Pnp(m) => format!(
                "pnp: eps = {}, delta = {}, drive = {} {}, mesh = {}",
                m.params().eps,
                m.params().delta,
                cfg.drive,
                cfg.drive_value,
                m.mesh().id()
            ),
            BuiltModel::Logistic(m) => format!("logistic: r = {}", m.r),
            BuiltModel::Split(m) => format!("split diffusion: D1 = {}, D2 = {}", m.d1, m.d2),
            BuiltModel::Sink(m) => format!("diffusion with sink: D1 = {}, eps = {}", m.d1, m.eps),
        }
    }

    /// State snapshot rows; PNP gets its physical columns, the other
    /// models a generic index/value listing.
    fn state_csv(&self, u: &DVector<f64>) -> Result<String> {
        match self {
            BuiltModel::Pnp(m) => m.snapshot_csv(u),
            _ => {
                let mut s = String::from("index,value\n");
                for (i, v) in u.iter().enumerate() {
                    s.push_str(&format!("{i},{}\n", fmt_f64(*v)));
                }
                Ok(s)
            }
        }
    }
}

fn records_csv(records: &[StepRecord]) -> String {
    let mut s = String::from("t,dt,lte,accepted,reject_count\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.t),
            fmt_f64(r.dt),
            fmt_f64(r.lte_estimate),
            u8::from(r.accepted),
            r.reject_count
        ));
    }
    s
}

fn trajectory_summary(cfg: &RunConfig, traj: &Trajectory) -> String {
    let rejects = traj.records.len() - traj.accepted_steps;
    let window = cfg.dt_inf_window.min(traj.accepted_steps / 2).max(2);
    let dtinf = extract_dt_infinity(&traj.records, window, cfg.dt_max);
    let mut s = format!(
        "final_time = {}\naccepted_steps = {}\nrejected_steps = {}\n",
        fmt_f64(traj.final_time),
        traj.accepted_steps,
        rejects
    );
    match dtinf.value() {
        Some(v) => s.push_str(&format!(
            "dt_infinity = {} (window {window}, status {})\n",
            fmt_f64(v),
            dtinf.status()
        )),
        None => s.push_str(&format!("dt_infinity = none (status {})\n", dtinf.status())),
    }
    s
}

/// Node positions of the configured mesh, for reproducibility; skipped
/// for the mesh-free logistic model.
fn write_mesh_artifact(cfg: &RunConfig, out: &Path) -> Result<()> {
    if cfg.model != ModelKind::Logistic {
        write_csv(&out.join("mesh.csv"), &cfg.build_mesh()?.to_csv(), cfg)?;
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let model = BuiltModel::build(cfg)?;
    let problem = model.problem();
    let u0 = model.initial_state();
    write_mesh_artifact(cfg, out)?;
    let stride = if cfg.snapshot_stride == 0 {
        usize::MAX
    } else {
        cfg.snapshot_stride
    };
    let traj = integrate_with(
        problem,
        &u0,
        0.0,
        cfg.t_end,
        &cfg.adaptive_config(),
        IntegrateOptions { state_stride: stride },
    )?;

    write_csv(&out.join("records.csv"), &records_csv(&traj.records), cfg)?;
    write_csv(
        &out.join("state_final.csv"),
        &model.state_csv(&traj.final_state)?,
        cfg,
    )?;
    if cfg.snapshot_stride > 0 {
        let body = match &model {
            BuiltModel::Pnp(m) => {
                let mut s = String::from("t,x,c_plus,c_minus,phi\n");
                for (t, state) in traj.times.iter().zip(&traj.states) {
                    let snap = m.snapshot_csv(state)?;
                    for line in snap.lines().skip(1) {
                        s.push_str(&format!("{},{line}\n", fmt_f64(*t)));
                    }
                }
                s
            }
            _ => {
                let mut s = String::from("t,index,value\n");
                for (t, state) in traj.times.iter().zip(&traj.states) {
                    for (i, v) in state.iter().enumerate() {
                        s.push_str(&format!("{},{i},{}\n", fmt_f64(*t), fmt_f64(*v)));
                    }
                }
                s
            }
        };
        write_csv(&out.join("snapshots.csv"), &body, cfg)?;
    }

    let mut summary = format!("model = {}\n", model.describe(cfg));
    summary.push_str(&trajectory_summary(cfg, &traj));
    summary.push_str(&format!(
        "steady_residual = {}\n",
        fmt_f64(steady_residual(problem, &traj.final_state)?)
    ));
    if let BuiltModel::Pnp(m) = &model {
        let (mp, mm) = m.species_masses(&traj.final_state);
        summary.push_str(&format!(
            "mass_c_plus = {}\nmass_c_minus = {}\nmin_concentration = {}\n",
            fmt_f64(mp),
            fmt_f64(mm),
            fmt_f64(m.min_concentration(&traj.final_state))
        ));
    }
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn steady_of(cfg: &RunConfig, model: &BuiltModel) -> Result<SteadyOutcome> {
    find_steady(model.problem(), &model.initial_state(), &cfg.steady_options())
}

pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<()> {
    let model = BuiltModel::build(cfg)?;
    write_mesh_artifact(cfg, out)?;
    let steady = steady_of(cfg, &model)?;
    write_csv(&out.join("steady_state.csv"), &model.state_csv(&steady.state)?, cfg)?;
    let summary = format!(
        "model = {}\nsteady_residual = {}\ndt_refine = {}\ndt_infinity_estimate = {}\n",
        model.describe(cfg),
        fmt_f64(steady.residual),
        fmt_f64(steady.dt_refine),
        steady
            .dt_infinity
            .map_or("none".to_string(), fmt_f64)
    );
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

pub fn cmd_stability(cfg: &RunConfig, out: &Path) -> Result<()> {
    let model = BuiltModel::build(cfg)?;
    let problem = model.problem();
    write_mesh_artifact(cfg, out)?;
    let steady = steady_of(cfg, &model)?;
    let jac = assemble_jacobians(problem, &steady.state, None)?;
    let report = threshold_retry(&jac.j_f, &jac.j_g, cfg)?;

    write_csv(&out.join("radius_samples.csv"), &report.samples_csv(), cfg)?;
    if let Some(vec) = &report.critical_eigvec {
        let body = match &model {
            BuiltModel::Pnp(m) => {
                let n = m.n_nodes();
                let mut s = String::from("x,re_c_plus,im_c_plus,re_c_minus,im_c_minus\n");
                for (i, x) in m.mesh().nodes().iter().enumerate() {
                    s.push_str(&format!(
                        "{},{},{},{},{}\n",
                        fmt_f64(*x),
                        fmt_f64(vec[i].re),
                        fmt_f64(vec[i].im),
                        fmt_f64(vec[n + i].re),
                        fmt_f64(vec[n + i].im)
                    ));
                }
                s
            }
            _ => {
                let mut s = String::from("index,re,im\n");
                for (i, z) in vec.iter().enumerate() {
                    s.push_str(&format!("{i},{},{}\n", fmt_f64(z.re), fmt_f64(z.im)));
                }
                s
            }
        };
        write_csv(&out.join("eigenvector.csv"), &body, cfg)?;
    }

    let mut summary = format!(
        "model = {}\nsteady_residual = {}\n{}",
        model.describe(cfg),
        fmt_f64(steady.residual),
        report.summary()
    );
    summary.push_str(&jacobian_probe(problem, cfg.seed)?);
    std::fs::write(out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

/// Seeded consistency probe of the implicit operator: linearity of `g`
/// and the inverse property of the shifted solve.
fn jacobian_probe(problem: &dyn ImexProblem, seed: u64) -> Result<String> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = problem.dim();
    let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let lin = (problem.apply_g(&(&x * a + &y * b)) - problem.apply_g(&x) * a
        - problem.apply_g(&y) * b)
        .amax();
    let (c, dt) = (1.5, 1e-3);
    let rhs = &x * c - problem.apply_g(&x) * dt;
    let inv = (problem.solve_shifted(c, dt, &rhs)? - &x).amax();
    Ok(format!(
        "g_linearity_probe = {}\nsolve_inverse_probe = {}\nprobe_seed = {seed}\n",
        fmt_f64(lin),
        fmt_f64(inv)
    ))
}

fn threshold_retry(
    j_f: &nalgebra::DMatrix<f64>,
    j_g: &nalgebra::DMatrix<f64>,
    cfg: &RunConfig,
) -> Result<StabilityReport> {
    let mut dt_lo = cfg.dt_lo;
    for _ in 0..6 {
        match crate::stability::find_threshold(j_f, j_g, dt_lo, cfg.dt_hi, cfg.rel_tol) {
            Err(Error::InvalidArgument(_)) => dt_lo /= 10.0,
            other => return other,
        }
    }
    Err(Error::invalid(format!("no stable dt_lo found down to {dt_lo:.3e}")))
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<()> {
    match cfg.sweep_kind {
        SweepKind::Epsilon => {
            let mesh = cfg.build_mesh()?;
            let base = cfg.pnp_params()?;
            let sweep_cfg = cfg.sweep_config();
            let grid = linspace(cfg.eps_min, cfg.eps_max, cfg.sweep_points);
            let mut points = epsilon_sweep(&base, &grid, &mesh, &sweep_cfg);
            if cfg.refine {
                refine_crossing_boundaries(&base, &mesh, &sweep_cfg, &mut points, cfg.resolution);
            }
            let feats = detect_features(&points, &FeatureConfig::default());
            write_csv(&out.join("sweep.csv"), &sweep_csv(&points), cfg)?;
            std::fs::write(out.join("features.txt"), feats.summary())?;
            print!("{}", feats.summary());
        }
        SweepKind::VoltagePower => {
            let mesh = cfg.build_mesh()?;
            let mut sweep_cfg = cfg.sweep_config();
            sweep_cfg.mode = SweepMode::Analysis;
            let grid = linspace(cfg.eps_min, cfg.eps_max, cfg.sweep_points);
            let mut report = String::from("voltage,exponent,prefactor,points\n");
            let mut rows = String::new();
            for v in &cfg.voltages {
                let base = crate::pnp_fbv::PnpParams {
                    drive: crate::pnp_fbv::Drive::Voltage(*v),
                    ..cfg.pnp_params()?
                };
                let points = epsilon_sweep(&base, &grid, &mesh, &sweep_cfg);
                rows.push_str(&sweep_csv(&points).lines().skip(1).collect::<Vec<_>>().join("\n"));
                rows.push('\n');
                let samples: Vec<(f64, f64)> = points
                    .iter()
                    .filter_map(|p| p.dt_star.map(|d| (p.eps, d)))
                    .collect();
                let fit = fit_power_law(&samples)?;
                report.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_f64(*v),
                    fmt_f64(fit.exponent),
                    fmt_f64(fit.prefactor),
                    samples.len()
                ));
            }
            let header = "eps,drive,dt_star,crossing,im_lambda,dt_infinity,mesh_id,status\n";
            write_csv(&out.join("sweep.csv"), &format!("{header}{rows}"), cfg)?;
            write_csv(&out.join("powerlaw.csv"), &report, cfg)?;
            print!("{report}");
        }
        SweepKind::Richardson => {
            let mesh = cfg.build_mesh()?;
            let grid = linspace(cfg.d2_min, cfg.d2_max, cfg.d2_points);
            let re_cfg = ReComparisonConfig {
                adaptive: cfg.adaptive_config(),
                t_run: cfg.t_adaptive,
                dt_inf_window: cfg.dt_inf_window.min(400),
                dt_max_factor: 2.0,
                jobs: cfg.jobs,
                rel_tol: 1e-8,
            };
            let cmp = richardson_comparison(cfg.d1, &grid, &mesh, &re_cfg)?;
            let mut body =
                String::from("d2,dt_star_analysis,dt_star_formula,dt_inf_no_re,dt_inf_re,status\n");
            for p in &cmp.points {
                body.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_f64(p.d2),
                    p.dt_star_analysis.map_or(String::new(), fmt_f64),
                    p.dt_star_formula.map_or(String::new(), fmt_f64),
                    p.dt_inf_no_re.map_or(String::new(), fmt_f64),
                    p.dt_inf_re.map_or(String::new(), fmt_f64),
                    p.status
                ));
            }
            write_csv(&out.join("richardson.csv"), &body, cfg)?;
            let mut summary = format!(
                "d1 = {}\nlambda_n = {}\n",
                fmt_f64(cmp.d1),
                fmt_f64(cmp.lambda_n)
            );
            if let Some(fit) = &cmp.re_fit {
                summary.push_str(&format!(
                    "re_fit_slope = {}\nre_fit_intercept = {}\n",
                    fmt_f64(fit.slope),
                    fmt_f64(fit.intercept)
                ));
            }
            std::fs::write(out.join("summary.txt"), &summary)?;
            print!("{summary}");
        }
    }
    Ok(())
}

pub fn cmd_scalar(cfg: &RunConfig, out: &Path) -> Result<()> {
    let s = ScalarSplit::new(cfg.lambda, cfg.alpha);
    let verdict = classify_stability(s)?;
    let case = scalar_case(s);
    let (dt_minus, dt_plus) = discriminant_roots(s);
    let mut report = format!(
        "lambda = {}\nalpha = {}\ncase = {case}\n",
        fmt_f64(s.lambda),
        fmt_f64(s.alpha)
    );
    match verdict {
        Stability::Unconditional => report.push_str("stability = unconditional\n"),
        Stability::Conditional { dt_star } => {
            report.push_str(&format!(
                "stability = conditional\ndt_star = {}\n",
                fmt_f64(dt_star)
            ));
        }
    }
    report.push_str(&format!(
        "discriminant_roots = {} / {}\n",
        dt_minus.map_or("none".into(), fmt_f64),
        dt_plus.map_or("none".into(), fmt_f64)
    ));

    let dt_hi = match verdict {
        Stability::Conditional { dt_star } => 1.5 * dt_star,
        Stability::Unconditional => 4.0 / (s.lambda.abs() + s.alpha.abs()).max(1.0),
    };
    let mut table = String::from("dt,re_rho_plus,im_rho_plus,re_rho_minus,im_rho_minus,max_abs\n");
    for k in 1..=cfg.dt_grid_points {
        let dt = dt_hi * k as f64 / cfg.dt_grid_points as f64;
        match rho_roots(s, dt) {
            Ok((rp, rm)) => {
                table.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    fmt_f64(dt),
                    fmt_f64(rp.re),
                    fmt_f64(rp.im),
                    fmt_f64(rm.re),
                    fmt_f64(rm.im),
                    fmt_f64(rp.norm().max(rm.norm()))
                ));
            }
            Err(_) => table.push_str(&format!("{},,,,,\n", fmt_f64(dt))),
        }
    }
    write_csv(&out.join("rho_table.csv"), &table, cfg)?;
    std::fs::write(out.join("scalar_report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn scalar_case(s: ScalarSplit) -> &'static str {
    if s.alpha > 0.0 {
        "1 (alpha > 0)"
    } else if s.alpha == 0.0 {
        "degenerate (alpha = 0)"
    } else if 3.0 * s.alpha > s.lambda {
        "2 (alpha < 0, 3 alpha > lambda)"
    } else if 3.0 * s.alpha == s.lambda {
        "3 (alpha < 0, 3 alpha = lambda)"
    } else if s.lambda < 0.0 {
        "4 (alpha < 0, 3 alpha < lambda < 0)"
    } else {
        "5 (alpha < 0, 3 alpha < lambda, lambda > 0)"
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}
