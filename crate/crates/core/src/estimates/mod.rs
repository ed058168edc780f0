//! Space-time `X^{s,b}` norms and empirical probes of the Strichartz and
//! bilinear estimates.

mod probe;
mod radial;
mod spacetime;
mod xsb;

pub use probe::{estimate_ids, run_probe, ProbeConfig, ProbeKind, ProbeMax, ProbeResult, ProbeRow};
pub use radial::{radial_bilinear_parts, radial_bilinear_sweep, sample_radial_annulus, RadialSpaceTime};
pub use spacetime::SpaceTimeField;
pub use xsb::{
    bilinear_parts, bilinear_ratio, modulation_fraction, project_ball, project_dyadic,
    sample_xsb_function, strichartz_parts, strichartz_ratio, strichartz_ratio_at, xsb_norm,
    xsb_norm_with, Concentration, Conjugation, XsbParams,
};
