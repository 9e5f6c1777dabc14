//! Simulation and verification toolkit for recurrent nearest-neighbour random
//! walks in random i.i.d. environments.
//!
//! The crate is organised around five layers:
//!
//! * [`env`] — environment distributions, sampled environment windows and the
//!   cumulative log-odds potential;
//! * [`walk`] — quenched trajectory simulation, local times, additive
//!   functionals and persistence trials;
//! * [`quenched`] — exact closed-form hitting probabilities, exit-time bounds
//!   and expected local times for a fixed environment, all evaluated in
//!   log-space;
//! * [`plpath`] / [`extrema`] — piecewise-linear paths (discretised two-sided
//!   Brownian motion, interpolated potentials) and their x-extrema
//!   decomposition, valley bottoms and sign-change sweeps;
//! * [`experiments`] — Monte Carlo campaign drivers: persistence estimation,
//!   exponent fits, rate-function checks and localization diagnostics.
//!
//! All randomness flows from explicit seeds through [`seeds::child_seed`], so
//! every result is reproducible for any worker count.

pub mod env;
pub mod experiments;
pub mod extrema;
pub mod plpath;
pub mod quenched;
pub mod seeds;
pub mod stats;
pub mod walk;

pub use env::{potential, EnvDistribution, Environment, Potential};
pub use extrema::{
    decompose, excess_samples, slopes, sweep_sign_changes, valley_bottom, ExtremaDecomposition,
    SignChangeRecord,
};
pub use plpath::{interpolate_potential, sample_two_sided_bm, BmGridSpec, PiecewiseLinearPath};
pub use walk::{exit_trial, hitting_time, persistence_trial, simulate, FunctionalSpec, WalkRecord};
