//! Pseudo-spectral lab for the L²-critical boson star equation
//! `i∂ₜu = √(−Δ+m²)u − (|x|⁻¹∗|u|²)u`.

pub mod error;
pub mod estimates;
pub mod evolution;
pub mod groundstate;
pub mod illposed;
mod par;
pub mod quad;
pub mod report;
pub mod spectral;

pub use error::{LabError, Result};
