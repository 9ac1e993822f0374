//! Numerical soliton solutions of quasilinear Schrödinger equations
//!
//! ```text
//! -Δu + V(x)u + (κ/2)[Δ|u|²]u = l(u),   x ∈ ℝᴺ, κ > 0
//! ```
//!
//! via a truncated dual change of variables `v = G(u)`, a mountain-pass
//! solver for the resulting semilinear functional, and a suite of
//! certificates (PDE residual, L∞ bounds, energy bound, Pohozaev identity,
//! Moser iteration chain) evaluated on the computed profile.
//!
//! The crate is `no_std` with `alloc`; the `std` feature (on by default)
//! only affects the error trait plumbing.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod functional;
pub mod grid;
mod linalg;
mod ode;
pub mod solver;
pub mod sweep;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use functional::{EnergyReport, EnergyTerms, Problem};
pub use solver::{mountain_pass_solve, GridSettings, Solution, SolverConfig};
pub use grid::{Field, PotentialShape, PotentialSpec, RadialGrid};
pub use verify::{VerificationReport, VerifyOptions};
pub use sweep::{SweepEntry, SweepResult};
pub use transforms::{Model, ModelSpec, TableRow, TransformTable};
