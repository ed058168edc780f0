//! Counterexample data and scaling experiments for the failure of the
//! cubic estimate, and soliton decoherence.

mod scaling;
mod trilinear;
mod uniform;
mod wavepacket;

pub use scaling::{
    c3_scaling_experiment, c3_table, derive_seed, radial_scaling_experiment, radial_table,
    ratio_report, region_volume, sample_points, ScalingRow, ScalingTable, MAX_RELATIVE_STDERR,
};
pub use trilinear::{
    duhamel_weight, duhamel_weight_direct, f_t_monte_carlo, f_t_uniform_reference, phi_m,
    resonance, TrilinearResult, TRILINEAR_CONSTANT,
};
pub use uniform::{mu_pair, soliton_overlap, uniform_continuity_experiment};
pub use wavepacket::{build_envelope, build_wavepacket, WavepacketSpec, MAX_MU_OVER_LAMBDA};
