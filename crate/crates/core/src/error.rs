use alloc::string::String;

use crate::transforms::Model;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {reason}")]
    InvalidModel { reason: String },

    #[error("invalid potential: {reason}")]
    InvalidPotential { reason: String },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("invalid solver settings: {reason}")]
    InvalidSolver { reason: String },

    #[error("operation requires the {expected:?} model")]
    WrongModel { expected: Model },

    #[error("operation requires a constant potential V = V_inf")]
    NonConstantPotential,

    #[error("argument out of domain: {reason}")]
    Domain { reason: String },

    #[error("inverse transform did not converge for t = {target}")]
    InverseNoConvergence { target: f64 },

    #[error("no negative-energy endpoint found up to amplitude {amplitude} (J = {energy})")]
    EndpointEscalation { amplitude: f64, energy: f64 },

    #[error("mountain-pass path collapsed onto the trivial critical point")]
    TrivialAttractor,

    #[error("field length {found} does not match grid with {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
