//! Adaptive VSSBDF2 semi-implicit time integration with a linearized
//! stability analyzer, built around a Poisson-Nernst-Planck /
//! Butler-Volmer electrochemical cell.
//!
//! The central object of study: for a dissipative system whose SBDF2
//! scheme is conditionally stable about an attracting steady state, the
//! adaptive stepper's step sizes stabilize at the stability threshold
//! `dt*` of the linearized scheme instead of coarsening to the cap.
//! The crate provides both sides of that measurement:
//!
//! - [`imex`] defines the problem split `u' = f(u) + g(u)` and the
//!   SBDF2 / variable-step VSSBDF2 steps;
//! - [`adaptive`] estimates the local error from a coarse/fine step
//!   pair and drives the step size, optionally blending the pair with
//!   Richardson extrapolation;
//! - [`pnp_fbv`] is the ion-transport model with reactive electrode
//!   boundaries, in voltage- or current-controlled operation;
//! - [`scalar`] holds the closed-form stability theory and the small
//!   testbed models that reduce to it;
//! - [`stability`] linearizes a model about a steady state and locates
//!   `dt*` from the companion-matrix spectrum;
//! - [`steady`] finds numerical steady states;
//! - [`sweep`] runs the parameter studies (threshold curves, feature
//!   detection, power laws, the Richardson comparison);
//! - [`mesh`] and [`tridiag`] carry the discretization plumbing;
//! - [`cli`] backs the `vssbdf2` binary.
//!
//! ```no_run
//! use nalgebra::DVector;
//! use vssbdf2::adaptive::{integrate, AdaptiveConfig};
//! use vssbdf2::scalar::LogisticProblem;
//!
//! let problem = LogisticProblem::new(1.0)?;
//! let cfg = AdaptiveConfig {
//!     dt_max: 2.0 * problem.dt_star(),
//!     ..AdaptiveConfig::default()
//! };
//! let traj = integrate(&problem, &DVector::from_element(1, 0.01), 0.0, 750.0, &cfg)?;
//! // the accepted step sizes have stabilized near dt* = 4/(7r)
//! # Ok::<(), vssbdf2::Error>(())
//! ```

pub mod adaptive;
pub mod cli;
pub mod error;
pub mod imex;
pub mod mesh;
pub mod pnp_fbv;
pub mod scalar;
pub mod stability;
pub mod steady;
pub mod sweep;
pub mod tridiag;

pub use error::{Error, Result};
