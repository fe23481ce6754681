//! Flat `key = value` run configuration with `[section]` headers.
//!
//! The format is diff-friendly and parsed without dependencies. Unknown
//! sections or keys are rejected so typos fail loudly. `--set
//! section.key=value` overrides individual entries after the file is
//! read.

use crate::adaptive::{AdaptiveConfig, HalfHistory, StepController};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::pnp_fbv::{Drive, PnpParams};
use crate::steady::SteadyOptions;
use crate::sweep::{SweepConfig, SweepMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Pnp,
    Logistic,
    SplitDiffusion,
    SinkDiffusion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshKind {
    Uniform,
    Piecewise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    Epsilon,
    VoltagePower,
    Richardson,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    // [model]
    pub model: ModelKind,
    pub eps: f64,
    pub delta: f64,
    pub k_ca: f64,
    pub k_cc: f64,
    pub j_ra: f64,
    pub j_rc: f64,
    pub drive: String, // "voltage" | "current"
    pub drive_value: f64,
    pub r: f64,
    pub d1: f64,
    pub d2: f64,
    // [mesh]
    pub mesh: MeshKind,
    pub n_cells: usize,
    pub edge_frac: f64,
    pub dx_edge: f64,
    pub dx_bulk: f64,
    // [adaptive]
    pub tol: f64,
    pub range: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_init: f64,
    pub richardson: bool,
    pub max_rejects: usize,
    pub growth_cap: f64,
    pub shrink_floor: f64,
    pub controller: String, // "pi" | "cube_root" | "window_hold"
    pub pi_ki: f64,
    pub pi_kp: f64,
    pub est_window: usize,
    pub half_history: String, // "fine_track" | "quadratic" | "linear"
    // [run]
    pub t_end: f64,
    pub snapshot_stride: usize,
    pub seed: u64,
    // [steady]
    pub t_transient: f64,
    pub dt_fraction: f64,
    pub residual_tol: f64,
    pub t_refine_max: f64,
    pub newton_polish: bool,
    // [stability]
    pub dt_lo: f64,
    pub dt_hi: f64,
    pub rel_tol: f64,
    // [scalar]
    pub lambda: f64,
    pub alpha: f64,
    pub dt_grid_points: usize,
    // [sweep]
    pub sweep_kind: SweepKind,
    pub sweep_mode: String, // "analysis" | "adaptive" | "both"
    pub eps_min: f64,
    pub eps_max: f64,
    pub sweep_points: usize,
    pub refine: bool,
    pub resolution: f64,
    pub voltages: Vec<f64>,
    pub d2_min: f64,
    pub d2_max: f64,
    pub d2_points: usize,
    pub t_adaptive: f64,
    pub dt_inf_window: usize,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let adaptive = AdaptiveConfig::default();
        RunConfig {
            model: ModelKind::Pnp,
            eps: 0.05,
            delta: 1.0,
            k_ca: 1.0,
            k_cc: 1.0,
            j_ra: 1.0,
            j_rc: 1.0,
            drive: "voltage".into(),
            drive_value: 2.0,
            r: 1.0,
            d1: 2.0,
            d2: 1.0,
            mesh: MeshKind::Uniform,
            n_cells: 90,
            edge_frac: 0.1,
            dx_edge: 1.0 / 150.0,
            dx_bulk: 4.0 / 75.0,
            tol: adaptive.tol,
            range: adaptive.range,
            dt_min: adaptive.dt_min,
            dt_max: adaptive.dt_max,
            dt_init: adaptive.dt_init,
            richardson: false,
            max_rejects: adaptive.max_rejects_per_step,
            growth_cap: adaptive.growth_cap,
            shrink_floor: adaptive.shrink_floor,
            controller: "pi".into(),
            pi_ki: 0.15,
            pi_kp: 0.3,
            est_window: adaptive.controller_est_window,
            half_history: "fine_track".into(),
            t_end: 100.0,
            snapshot_stride: 0,
            seed: 42,
            t_transient: 60.0,
            dt_fraction: 0.45,
            residual_tol: 1e-10,
            t_refine_max: 400.0,
            newton_polish: true,
            dt_lo: 1e-4,
            dt_hi: 1.0,
            rel_tol: 1e-6,
            lambda: 1.0,
            alpha: -2.0,
            dt_grid_points: 25,
            sweep_kind: SweepKind::Epsilon,
            sweep_mode: "analysis".into(),
            eps_min: 0.05,
            eps_max: 0.2,
            sweep_points: 40,
            refine: true,
            resolution: 0.002,
            voltages: vec![0.0, 1.0, 2.0, 3.0],
            d2_min: 0.7,
            d2_max: 2.0 * 2.0 / 3.0,
            d2_points: 10,
            t_adaptive: 600.0,
            dt_inf_window: 2000,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl RunConfig {
    /// Parse a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                known_section(&section)
                    .then_some(())
                    .ok_or_else(|| Error::Config(format!("unknown section [{section}]")))?;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            cfg.set(&section, key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one `section.key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects section.key=value, got {spec}")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("--set key must be section.key, got {path}")))?;
        self.set(section, key, value.trim())
    }

    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let unknown = || Error::Config(format!("unknown key {section}.{key}"));
        match section {
            "model" => match key {
                "kind" => {
                    self.model = match value {
                        "pnp" => ModelKind::Pnp,
                        "logistic" => ModelKind::Logistic,
                        "split_diffusion" => ModelKind::SplitDiffusion,
                        "sink_diffusion" => ModelKind::SinkDiffusion,
                        other => {
                            return Err(Error::Config(format!("unknown model kind {other}")))
                        }
                    }
                }
                "eps" => self.eps = num(section, key, value)?,
                "delta" => self.delta = num(section, key, value)?,
                "k_ca" => self.k_ca = num(section, key, value)?,
                "k_cc" => self.k_cc = num(section, key, value)?,
                "j_ra" => self.j_ra = num(section, key, value)?,
                "j_rc" => self.j_rc = num(section, key, value)?,
                "drive" => match value {
                    "voltage" | "current" => self.drive = value.into(),
                    other => return Err(Error::Config(format!("unknown drive {other}"))),
                },
                "value" => self.drive_value = num(section, key, value)?,
                "r" => self.r = num(section, key, value)?,
                "d1" => self.d1 = num(section, key, value)?,
                "d2" => self.d2 = num(section, key, value)?,
                _ => return Err(unknown()),
            },
            "mesh" => match key {
                "kind" => {
                    self.mesh = match value {
                        "uniform" => MeshKind::Uniform,
                        "piecewise" => MeshKind::Piecewise,
                        other => return Err(Error::Config(format!("unknown mesh kind {other}"))),
                    }
                }
                "n_cells" => self.n_cells = int(section, key, value)?,
                "edge_frac" => self.edge_frac = num(section, key, value)?,
                "dx_edge" => self.dx_edge = num(section, key, value)?,
                "dx_bulk" => self.dx_bulk = num(section, key, value)?,
                _ => return Err(unknown()),
            },
            "adaptive" => match key {
                "tol" => self.tol = num(section, key, value)?,
                "range" => self.range = num(section, key, value)?,
                "dt_min" => self.dt_min = num(section, key, value)?,
                "dt_max" => self.dt_max = num(section, key, value)?,
                "dt_init" => self.dt_init = num(section, key, value)?,
                "richardson" => self.richardson = boolean(section, key, value)?,
                "max_rejects" => self.max_rejects = int(section, key, value)?,
                "growth_cap" => self.growth_cap = num(section, key, value)?,
                "shrink_floor" => self.shrink_floor = num(section, key, value)?,
                "controller" => match value {
                    "pi" | "cube_root" | "window_hold" => self.controller = value.into(),
                    other => return Err(Error::Config(format!("unknown controller {other}"))),
                },
                "pi_ki" => self.pi_ki = num(section, key, value)?,
                "pi_kp" => self.pi_kp = num(section, key, value)?,
                "est_window" => self.est_window = int(section, key, value)?,
                "half_history" => match value {
                    "fine_track" | "quadratic" | "linear" => self.half_history = value.into(),
                    other => return Err(Error::Config(format!("unknown half_history {other}"))),
                },
                _ => return Err(unknown()),
            },
            "run" => match key {
                "t_end" => self.t_end = num(section, key, value)?,
                "snapshot_stride" => self.snapshot_stride = int(section, key, value)?,
                "seed" => self.seed = int(section, key, value)? as u64,
                _ => return Err(unknown()),
            },
            "steady" => match key {
                "t_transient" => self.t_transient = num(section, key, value)?,
                "dt_fraction" => self.dt_fraction = num(section, key, value)?,
                "residual_tol" => self.residual_tol = num(section, key, value)?,
                "t_refine_max" => self.t_refine_max = num(section, key, value)?,
                "newton_polish" => self.newton_polish = boolean(section, key, value)?,
                _ => return Err(unknown()),
            },
            "stability" => match key {
                "dt_lo" => self.dt_lo = num(section, key, value)?,
                "dt_hi" => self.dt_hi = num(section, key, value)?,
                "rel_tol" => self.rel_tol = num(section, key, value)?,
                _ => return Err(unknown()),
            },
            "scalar" => match key {
                "lambda" => self.lambda = num(section, key, value)?,
                "alpha" => self.alpha = num(section, key, value)?,
                "dt_grid_points" => self.dt_grid_points = int(section, key, value)?,
                _ => return Err(unknown()),
            },
            "sweep" => match key {
                "kind" => {
                    self.sweep_kind = match value {
                        "epsilon" => SweepKind::Epsilon,
                        "voltage_power" => SweepKind::VoltagePower,
                        "richardson" => SweepKind::Richardson,
                        other => return Err(Error::Config(format!("unknown sweep kind {other}"))),
                    }
                }
                "mode" => match value {
                    "analysis" | "adaptive" | "both" => self.sweep_mode = value.into(),
                    other => return Err(Error::Config(format!("unknown sweep mode {other}"))),
                },
                "eps_min" => self.eps_min = num(section, key, value)?,
                "eps_max" => self.eps_max = num(section, key, value)?,
                "points" => self.sweep_points = int(section, key, value)?,
                "refine" => self.refine = boolean(section, key, value)?,
                "resolution" => self.resolution = num(section, key, value)?,
                "voltages" => {
                    self.voltages = value
                        .split(',')
                        .map(|v| {
                            v.trim().parse::<f64>().map_err(|_| {
                                Error::Config(format!("bad voltage list entry {v:?}"))
                            })
                        })
                        .collect::<Result<Vec<f64>>>()?;
                }
                "d2_min" => self.d2_min = num(section, key, value)?,
                "d2_max" => self.d2_max = num(section, key, value)?,
                "d2_points" => self.d2_points = int(section, key, value)?,
                "t_adaptive" => self.t_adaptive = num(section, key, value)?,
                "dt_inf_window" => self.dt_inf_window = int(section, key, value)?,
                "jobs" => self.jobs = int(section, key, value)?,
                _ => return Err(unknown()),
            },
            "" => {
                return Err(Error::Config(format!(
                    "key {key} appears before any [section] header"
                )))
            }
            _ => return Err(Error::Config(format!("unknown section [{section}]"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.adaptive_config().validate()?;
        if self.model == ModelKind::Pnp {
            self.pnp_params()?.validate()?;
        }
        if self.sweep_points < 1 || self.d2_points < 1 {
            return Err(Error::Config("sweep grids need at least one point".into()));
        }
        Ok(())
    }

    /// Canonical serialization; equal configs serialize identically, so
    /// the hash of this text identifies the run.
    pub fn canonical(&self) -> String {
        format!(
            "[model]\nkind = {:?}\neps = {:e}\ndelta = {:e}\nk_ca = {:e}\nk_cc = {:e}\nj_ra = {:e}\nj_rc = {:e}\ndrive = {}\nvalue = {:e}\nr = {:e}\nd1 = {:e}\nd2 = {:e}\n\
             [mesh]\nkind = {:?}\nn_cells = {}\nedge_frac = {:e}\ndx_edge = {:e}\ndx_bulk = {:e}\n\
             [adaptive]\ntol = {:e}\nrange = {:e}\ndt_min = {:e}\ndt_max = {:e}\ndt_init = {:e}\nrichardson = {}\nmax_rejects = {}\ngrowth_cap = {:e}\nshrink_floor = {:e}\ncontroller = {}\npi_ki = {:e}\npi_kp = {:e}\nest_window = {}\nhalf_history = {}\n\
             [run]\nt_end = {:e}\nsnapshot_stride = {}\nseed = {}\n\
             [steady]\nt_transient = {:e}\ndt_fraction = {:e}\nresidual_tol = {:e}\nt_refine_max = {:e}\nnewton_polish = {}\n\
             [stability]\ndt_lo = {:e}\ndt_hi = {:e}\nrel_tol = {:e}\n\
             [scalar]\nlambda = {:e}\nalpha = {:e}\ndt_grid_points = {}\n\
             [sweep]\nkind = {:?}\nmode = {}\neps_min = {:e}\neps_max = {:e}\npoints = {}\nrefine = {}\nresolution = {:e}\nvoltages = {}\nd2_min = {:e}\nd2_max = {:e}\nd2_points = {}\nt_adaptive = {:e}\ndt_inf_window = {}\njobs = {}\n",
            self.model, self.eps, self.delta, self.k_ca, self.k_cc, self.j_ra, self.j_rc,
            self.drive, self.drive_value, self.r, self.d1, self.d2,
            self.mesh, self.n_cells, self.edge_frac, self.dx_edge, self.dx_bulk,
            self.tol, self.range, self.dt_min, self.dt_max, self.dt_init, self.richardson,
            self.max_rejects, self.growth_cap, self.shrink_floor, self.controller,
            self.pi_ki, self.pi_kp, self.est_window, self.half_history,
            self.t_end, self.snapshot_stride, self.seed,
            self.t_transient, self.dt_fraction, self.residual_tol, self.t_refine_max,
            self.newton_polish,
            self.dt_lo, self.dt_hi, self.rel_tol,
            self.lambda, self.alpha, self.dt_grid_points,
            self.sweep_kind, self.sweep_mode, self.eps_min, self.eps_max, self.sweep_points,
            self.refine, self.resolution,
            self.voltages.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","),
            self.d2_min, self.d2_max, self.d2_points, self.t_adaptive, self.dt_inf_window,
            self.jobs,
        )
    }

    /// FNV-1a over the canonical serialization.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    pub fn adaptive_config(&self) -> AdaptiveConfig {
        AdaptiveConfig {
            tol: self.tol,
            range: self.range,
            dt_min: self.dt_min,
            dt_max: self.dt_max,
            dt_init: self.dt_init,
            richardson: self.richardson,
            max_rejects_per_step: self.max_rejects,
            growth_cap: self.growth_cap,
            shrink_floor: self.shrink_floor,
            half_history: match self.half_history.as_str() {
                "quadratic" => HalfHistory::Quadratic,
                "linear" => HalfHistory::Linear,
                _ => HalfHistory::FineTrack,
            },
            controller: match self.controller.as_str() {
                "cube_root" => StepController::CubeRoot,
                "window_hold" => StepController::WindowHold,
                _ => StepController::Pi {
                    ki: self.pi_ki,
                    kp: self.pi_kp,
                },
            },
            reject_backoff: AdaptiveConfig::default().reject_backoff,
            reject_cap_relax: AdaptiveConfig::default().reject_cap_relax,
            reject_cap_relax_starved: AdaptiveConfig::default().reject_cap_relax_starved,
            controller_est_window: self.est_window,
        }
    }

    pub fn pnp_params(&self) -> Result<PnpParams> {
        Ok(PnpParams {
            eps: self.eps,
            delta: self.delta,
            k_ca: self.k_ca,
            k_cc: self.k_cc,
            j_ra: self.j_ra,
            j_rc: self.j_rc,
            drive: if self.drive == "current" {
                Drive::Current(self.drive_value)
            } else {
                Drive::Voltage(self.drive_value)
            },
        })
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match self.mesh {
            MeshKind::Uniform => Mesh::uniform(self.n_cells),
            MeshKind::Piecewise => Mesh::piecewise(self.edge_frac, self.dx_edge, self.dx_bulk),
        }
    }

    pub fn steady_options(&self) -> SteadyOptions {
        SteadyOptions {
            t_transient: self.t_transient,
            adaptive: AdaptiveConfig {
                dt_init: 1e-5,
                ..self.adaptive_config()
            },
            dt_fraction: self.dt_fraction,
            residual_tol: self.residual_tol,
            t_refine_max: self.t_refine_max,
            newton_polish: self.newton_polish,
            warm_start: None,
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            mode: match self.sweep_mode.as_str() {
                "adaptive" => SweepMode::Adaptive,
                "both" => SweepMode::Both,
                _ => SweepMode::Analysis,
            },
            jobs: self.jobs,
            adaptive: self.adaptive_config(),
            steady: self.steady_options(),
            t_adaptive: self.t_adaptive,
            dt_inf_window: self.dt_inf_window,
            dt_lo: self.dt_lo,
            dt_hi: self.dt_hi,
            rel_tol: self.rel_tol,
        }
    }
}

fn known_section(name: &str) -> bool {
    matches!(
        name,
        "model" | "mesh" | "adaptive" | "run" | "steady" | "stability" | "scalar" | "sweep"
    )
}

fn num(section: &str, key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{section}.{key}: expected a number, got {value:?}")))
}

fn int(section: &str, key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{section}.{key}: expected an integer, got {value:?}")))
}

fn boolean(section: &str, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!(
            "{section}.{key}: expected true/false, got {value:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip_and_hash_stability() {
        let text = "\n[model]\nkind = pnp\neps = 0.12\n\n[adaptive]\ntol = 1e-7\nrange = 3e-8\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.eps, 0.12);
        assert_eq!(cfg.tol, 1e-7);
        let again = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.hash(), again.hash());
        let other = RunConfig::parse("[model]\neps = 0.13\n").unwrap();
        assert_ne!(cfg.hash(), other.hash());
    }

    #[test]
    fn unknown_keys_and_sections_rejected() {
        assert!(RunConfig::parse("[model]\nepz = 0.1\n").is_err());
        assert!(RunConfig::parse("[modle]\neps = 0.1\n").is_err());
        assert!(RunConfig::parse("eps = 0.1\n").is_err());
    }

    #[test]
    fn overrides_apply_after_parse() {
        let mut cfg = RunConfig::parse("[model]\neps = 0.05\n").unwrap();
        cfg.apply_override("model.eps=0.2").unwrap();
        assert_eq!(cfg.eps, 0.2);
        cfg.apply_override("sweep.voltages=0,1.5,3").unwrap();
        assert_eq!(cfg.voltages, vec![0.0, 1.5, 3.0]);
        assert!(cfg.apply_override("nope.eps=1").is_err());
        assert!(cfg.apply_override("model.eps").is_err());
    }

    #[test]
    fn invalid_window_rejected() {
        // range >= tol violates the adaptive invariants
        let r = RunConfig::parse("[adaptive]\ntol = 1e-6\nrange = 2e-6\n");
        assert!(r.is_err());
    }
}
