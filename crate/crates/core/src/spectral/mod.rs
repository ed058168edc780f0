//! Grids, transforms, Fourier multipliers, projectors and Sobolev norms.

pub mod container;
pub mod fft;
pub mod field;
pub mod grid;
pub mod multiplier;
pub mod norms;
pub mod projector;
pub mod radial;

pub use field::{Field, Representation};
pub use grid::Grid3;
pub use multiplier::{
    apply_multiplier, apply_symbol_fn, coulomb_potential, half_wave_symbol, MultiplierSymbol,
};
pub use norms::{homogeneous_sobolev_norm, sobolev_norm};
pub use projector::{beta1, beta_lambda, project, project_with_info, ProjectorSpec};
pub use radial::{
    apply_radial_multiplier, radial_coulomb_potential, radial_sobolev_norm, RadialGrid,
    RadialProfile,
};

/// Which Coulomb solver an operation should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombBackend {
    TorusFft,
    RadialNewton,
}
