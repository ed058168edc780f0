//! Solitary-wave profiles: the massless `Q` and the family `R_μ`.

mod diagnostics;
mod solver;

pub use diagnostics::{
    decay_exponent_fit, decay_fit, family_limit_check, family_limit_check_default,
    newton_potential, optimal_constant_sides, pohozaev_ratio, profile_pohozaev_ratio,
    soliton_evolution_check, soliton_phase_error, soliton_profile, DecayFit,
};
pub use solver::{
    constrained_minimize, constrained_minimize_with, default_initial_guess, minimize_raw,
    petviashvili_solve, GroundState, VariationalReport,
};
