//! Spherically symmetric compressible Navier-Stokes flow with degenerate,
//! density-dependent viscosity on an exterior domain `r >= a`.
//!
//! The solver works on the reformulated system in `(rho, h, phi, v, u)`,
//! where the effective velocity `v` turns the degenerate viscous term into a
//! damped transport equation. Time steps are Picard iterations of linear
//! transport and implicit diffusion problems.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod domain;
pub mod error;
pub mod kernels;
pub mod params;
pub mod presets;
pub mod stepper;
pub mod transform;
pub mod tridiag;
pub mod verify;

pub use diagnostics::{full_report, DiagnosticsReport, EnergyTerms};
pub use domain::{make_grid, PrimitiveState, RadialGrid, ReformState};
pub use error::{Error, Result};
pub use kernels::{Limiter, MomentumAdvection, OuterBc, TransportMode, TransportScheme};
pub use params::{check_admissibility, find_delta_star, AdmissibilityReport, PhysParams};
pub use presets::InitPreset;
pub use stepper::{run, PicardConfig, RunConfig, RunOutput, Snapshot, StepScheme};
pub use verify::{MmsPreset, MmsReport, MmsSetup};
