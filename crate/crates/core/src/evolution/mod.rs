//! Time stepping, conserved quantities, the scaling symmetry and the cubic
//! Picard iterate.

pub mod config;
pub mod duhamel;
pub mod medium;
pub mod propagate;
pub mod rescale;

pub use config::{EvolutionConfig, Gauge, Sign};
pub use duhamel::{
    duhamel_third_iterate, duhamel_third_iterate_with, CoulombKernel, DuhamelOptions,
    DuhamelResult,
};
pub use medium::{hartree_potential, Medium};
pub use propagate::{
    evolve, evolve_observed, linear_frequency, observables, propagate_linear, strang_step,
    Observables, Trajectory,
};
pub use rescale::{rescale, rescale_radial};
