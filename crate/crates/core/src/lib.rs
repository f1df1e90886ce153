//! Simulation and verification of the inverse hessian-quotient curvature flow
//! `Ẋ = ν/F` for star-shaped hypersurfaces in anti-de Sitter–Schwarzschild
//! space, with hyperbolic and Euclidean space as limiting ambients.
//!
//! Hypersurfaces are graphs over `S^n` described by their areal radius
//! `ρ = φ(r)`. The crate is organised bottom-up:
//!
//! * [`ambient`]: warp factor, horizon, curvature coefficients
//! * [`symfunc`]: elementary symmetric functions and the speed `F`
//! * [`surface`]: sphere grids, derivatives, and per-node extrinsic geometry
//! * [`flow`]: explicit RK4 evolution under a diffusive CFL bound
//! * [`diagnostics`]: decay-rate fits, bound checks, identity residuals

pub mod ambient;
pub mod diagnostics;
pub mod flow;
pub mod io;
pub mod surface;
pub mod symfunc;

pub use ambient::{horizon_radius, AmbientError, AmbientKind, CurvatureCoeffs, WarpDerivatives, WarpedAmbient};
pub use diagnostics::{BoundReport, ClaimEntry, RateFit};
pub use flow::{FlowConfig, FlowError, FlowRecord, FlowRow, GraphState, InitialData, RunOutcome};
pub use surface::{GeometryError, GeometrySnapshot, GridMode, SphericalGrid};
pub use symfunc::{CurvatureSpeed, CurvatureVector, QuotientSpeed, SymFuncError};
