//! Pseudo-spectral simulation kernels for incompressible plasma models on
//! periodic boxes: the Navier-Stokes-Maxwell system with fractional viscosity,
//! its Maxwell and Hall-MHD/MHD limits, and perturbations around a constant
//! magnetic background.
//!
//! The crate is organised bottom-up:
//! - [`grid`]: periodic grids, FFTs, wavevector bookkeeping;
//! - [`field`]: spectral and physical vector fields;
//! - [`ops`]: differential and product operators (Leray projection, curl,
//!   fractional Laplacian, dealiased products, ball truncation);
//! - [`norms`]: Lebesgue/Sobolev norms and inner products;
//! - [`lp`]: Littlewood-Paley blocks, Besov and Chemin-Lerner norms, heat
//!   propagation with Duhamel forcing, annulus-decay and maximal-regularity
//!   checks;
//! - [`systems`]: right-hand sides of the evolved systems;
//! - [`stepper`]: integrating-factor RK4 and trajectory integration;
//! - [`diagnostics`]: sampled scalar observables and inequality monitors.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod lp;
pub mod norms;
pub mod ops;
pub mod stepper;
pub mod systems;

pub use diagnostics::{
    ball_energy, bgw_monitor, energy_report, fit_power_law, g_schedule, helicity, helicity_flux,
    integrate_samples, log_gronwall_bound, measure, total_energy, velocity_split, BgwReport,
    DiagnosticRecord, EnergyReport, RecorderConfig, SplitReport,
};
pub use error::{CoreError, Result};
pub use field::{PhysicalField, SpectralField};
pub use grid::{make_grid, Grid};
pub use lp::{
    annulus_decay_check, besov_norm, chemin_lerner_norm, dyadic_block, heat_step,
    maximal_regularity_ratio, shell_energies, shell_index, shell_range, AnnulusReport,
    HeatPropagator, MaxRegParams, MaxRegReport,
};
pub use norms::{homogeneous_norm, hs_norm, l2_inner, l2_norm, sobolev_norm, NormSpec};
pub use ops::{
    advect, const_advect, cross, curl, dealias, dot, fractional_laplacian, gradient,
    leray_project, truncate,
};
pub use stepper::{cfl_dt, integrate, step, StepperConfig, Trajectory};
pub use systems::{
    enforce_constraints, ohm_current, rhs, PhysParams, PlasmaState, StiffRate, SystemKind,
    Tendency,
};
