use std::f64::consts::PI;

use bslab::estimates::*;
use bslab::spectral::{beta1, Grid3, RadialGrid};
use bslab::LabError;
use num_complex::Complex64;
use proptest::prelude::*;

fn small_grid() -> Grid3 {
    Grid3::new(8, 8.0).unwrap()
}

fn params() -> XsbParams {
    XsbParams {
        t_cutoff: 1.0,
        ..XsbParams::default()
    }
}

fn cone(seed: u64) -> SpaceTimeField {
    sample_xsb_function(seed, Concentration::Cone { radius: 2.0 }, small_grid(), 16, 1.0, 0.0).unwrap()
}

#[test]
fn xsb_with_zero_weights_is_spacetime_l2() {
    let u = sample_xsb_function(3, Concentration::Random, small_grid(), 8, 1.0, 0.0).unwrap();
    let a = xsb_norm_with(&u, 0.0, 0.0);
    let b = u.l2_norm();
    assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
}

#[test]
fn spectral_round_trip() {
    let u = sample_xsb_function(5, Concentration::Random, small_grid(), 8, 1.0, 0.0).unwrap();
    let back = SpaceTimeField::from_spectral(*u.grid(), u.n_t(), u.t_period(), u.spectral()).unwrap();
    let err = u
        .values()
        .iter()
        .zip(back.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-12, "{err}");
}

#[test]
fn xsb_norm_is_monotone_in_s() {
    let u = cone(1);
    let mut last = 0.0;
    for s in [-0.5, 0.0, 0.25, 0.5, 1.0] {
        let v = xsb_norm_with(&u, s, 0.6);
        assert!(v >= last);
        last = v;
    }
}

/// `u = ψ_T(t)e^{−itω}e^{iξ₀·x}`: `‖u‖_{0,b}/‖u‖_{0,0}` from a direct DFT of
/// the cutoff, independent of the FFT path.
fn single_mode_ratio_oracle(t_cutoff: f64, n_t: usize, omega: f64, xi_norm: f64, b: f64) -> f64 {
    let t_period = 4.0 * t_cutoff;
    let dt = t_period / n_t as f64;
    let dtau = 2.0 * PI / t_period;
    let (mut num, mut den) = (0.0, 0.0);
    for k in 0..n_t {
        let kk = if k < n_t / 2 { k as f64 } else { k as f64 - n_t as f64 };
        let tau = kk * dtau;
        let mut g = Complex64::default();
        for j in 0..n_t {
            let t = (j as f64 - (n_t / 2) as f64) * dt;
            g += Complex64::from_polar(beta1(t / t_cutoff), -t * (omega + tau));
        }
        let w = g.norm_sqr();
        num += (1.0 + (tau + xi_norm).powi(2)).powf(b) * w;
        den += w;
    }
    (num / den).sqrt()
}

fn single_mode(grid: Grid3, n_t: usize, t_cutoff: f64, mode: (usize, usize, usize), omega: f64) -> SpaceTimeField {
    let i0 = grid.index(mode.0, mode.1, mode.2);
    let xi = grid.frequency(i0);
    SpaceTimeField::from_slices(grid, n_t, 4.0 * t_cutoff, |t| {
        let c = beta1(t / t_cutoff);
        (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                let ph = xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2] - omega * t;
                Complex64::from_polar(c, ph)
            })
            .collect()
    })
    .unwrap()
}

#[test]
fn single_mode_concentrates_on_the_cone() {
    let grid = small_grid();
    let (n_t, t_cutoff, b) = (32, 1.0, 0.6);
    let mode = (1, 2, 0);
    let xi = grid.frequency_norm(grid.index(mode.0, mode.1, mode.2));
    let on = single_mode(grid, n_t, t_cutoff, mode, xi);
    let off = single_mode(grid, n_t, t_cutoff, mode, xi + 3.0);
    let r_on = xsb_norm_with(&on, 0.0, b) / on.l2_norm();
    let r_off = xsb_norm_with(&off, 0.0, b) / off.l2_norm();
    let o_on = single_mode_ratio_oracle(t_cutoff, n_t, xi, xi, b);
    let o_off = single_mode_ratio_oracle(t_cutoff, n_t, xi + 3.0, xi, b);
    assert!((r_on - o_on).abs() < 1e-10 * o_on, "{r_on} vs {o_on}");
    assert!((r_off - o_off).abs() < 1e-10 * o_off, "{r_off} vs {o_off}");
    assert!(r_on < r_off);
}

#[test]
fn cone_samples_have_modulation_near_the_cone() {
    for seed in 0..5 {
        let u = sample_xsb_function(seed, Concentration::Cone { radius: 2.0 }, small_grid(), 32, 2.0, 0.0).unwrap();
        let frac = modulation_fraction(&u, 0.6, 4.0 * 2.0 * PI / 2.0);
        assert!(frac >= 0.9, "seed {seed}: {frac}");
    }
}

#[test]
fn samples_are_deterministic_per_seed() {
    for conc in [
        Concentration::Cone { radius: 2.0 },
        Concentration::Cube { lambda: 1.6 },
        Concentration::Annulus { lambda: 1.0 },
        Concentration::Random,
    ] {
        let a = sample_xsb_function(11, conc, small_grid(), 16, 1.0, 0.5).unwrap();
        let b = sample_xsb_function(11, conc, small_grid(), 16, 1.0, 0.5).unwrap();
        let c = sample_xsb_function(12, conc, small_grid(), 16, 1.0, 0.5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}

#[test]
fn sample_outside_band_is_rejected() {
    let e = sample_xsb_function(0, Concentration::Cone { radius: 3.0 }, small_grid(), 16, 1.0, 0.0).unwrap_err();
    assert!(matches!(e, LabError::InvalidGrid(_)));
    let e = sample_xsb_function(0, Concentration::Cone { radius: 2.0 }, small_grid(), 4, 1.0, 0.0).unwrap_err();
    assert!(matches!(e, LabError::InvalidGrid(_)));
}

#[test]
fn zero_inputs_give_zero_ratio() {
    let z = SpaceTimeField::zeros(small_grid(), 16, 4.0).unwrap();
    assert_eq!(strichartz_ratio(&z, 1.0, &params()).unwrap(), 0.0);
    let u = cone(2);
    let r = bilinear_ratio(&u, &z, 1.0, 2.0, &params(), false, Conjugation::default()).unwrap();
    assert_eq!(r, 0.0);
}

#[test]
fn b_at_most_half_is_rejected() {
    let u = cone(2);
    let p = params().with_b(0.4);
    assert!(matches!(strichartz_ratio(&u, 1.0, &p), Err(LabError::InvalidParameter(_))));
    assert!(matches!(
        bilinear_ratio(&u, &u, 1.0, 2.0, &p, false, Conjugation::default()),
        Err(LabError::InvalidParameter(_))
    ));
    let mut cfg = ProbeConfig::preset(ProbeKind::Str1);
    cfg.params.b = 0.4;
    assert!(run_probe(&cfg).is_err());
}

#[test]
fn radial_flag_checks_the_input() {
    let u = cone(4);
    assert!(!u.is_spatially_radial(1e-10));
    let e = bilinear_ratio(&u, &u, 1.0, 2.0, &params(), true, Conjugation::default()).unwrap_err();
    assert!(matches!(e, LabError::InvalidParameter(_)));

    let g = Grid3::new(16, 8.0).unwrap();
    let v = sample_xsb_function(4, Concentration::Annulus { lambda: 2.0 }, g, 16, 1.0, 0.0).unwrap();
    assert!(v.is_spatially_radial(1e-10));
    let r = bilinear_ratio(&v, &v, 1.0, 2.0, &params(), true, Conjugation { first: false, second: true }).unwrap();
    assert!(r > 0.0 && r.is_finite());
    // λ < μ is outside the radial form
    assert!(bilinear_ratio(&v, &v, 4.0, 2.0, &params(), true, Conjugation::default()).is_err());
}

#[test]
fn well_posed_regime() {
    assert!(XsbParams::default().is_well_posed_regime());
    assert!(!XsbParams::default().with_b(0.75).is_well_posed_regime());
    assert!(!XsbParams::default().with_b(0.5).is_well_posed_regime());
}

#[test]
fn params_round_trip_through_serde() {
    let p: XsbParams = serde_json::from_str(r#"{"s": 0.25, "b": 0.6, "T": 2.0}"#).unwrap();
    assert_eq!(p.b_prime, -0.3);
    assert_eq!(p.t_cutoff, 2.0);
    let back: XsbParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(p, back);
}

#[test]
fn radial_spacetime_plancherel() {
    let g = RadialGrid::new(16.0, 256).unwrap();
    let u = sample_radial_annulus(9, 4.0, g, 64, 1.0, 0.0).unwrap();
    let a = u.xsb_norm(0.0, 0.0);
    let b = u.l2_norm();
    assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
    let v = u.xsb_norms(&[0.0, 0.25], 0.6);
    assert!(v[1] > v[0]);
}

#[test]
fn radial_sweep_matches_single_evaluations() {
    let g = RadialGrid::new(16.0, 256).unwrap();
    let u1 = sample_radial_annulus(1, 4.0, g, 64, 1.0, 0.0).unwrap();
    let u2 = sample_radial_annulus(2, 4.0, g, 64, 1.0, 0.0).unwrap();
    let c = Conjugation { first: false, second: true };
    let sweep = radial_bilinear_sweep(&u1, &u2, &[1.0, 2.0], 4.0, 0.6, c).unwrap();
    for (i, mu) in [1.0, 2.0].into_iter().enumerate() {
        assert_eq!(sweep[i], radial_bilinear_parts(&u1, &u2, mu, 4.0, 0.6, c).unwrap());
    }
}

#[test]
fn probe_is_reproducible_and_reports_argmax() {
    let mut cfg = ProbeConfig::preset(ProbeKind::BilStr);
    cfg.seeds = 3;
    cfg.n = 8;
    cfg.box_length = 6.0;
    cfg.n_t = 16;
    cfg.params.t_cutoff = 1.0;
    cfg.mus = vec![1.0, 2.0];
    let a = run_probe(&cfg).unwrap();
    let b = run_probe(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 6);
    for m in &a.maxima {
        let best = a
            .rows
            .iter()
            .filter(|r| r.mu == m.mu)
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, m.max_ratio);
        assert!(a.rows.iter().any(|r| r.mu == m.mu && r.seed == m.argmax_seed && r.ratio == m.max_ratio));
    }
}

#[test]
fn probe_kind_parses() {
    for id in ["str1", "str1b", "str2", "bil-str", "bil-rad"] {
        let p: ProbeKind = id.parse().unwrap();
        assert_eq!(p.id(), id);
    }
    assert!("str3".parse::<ProbeKind>().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ratios_are_phase_and_scale_invariant(seed in 0u64..1000, re in -3.0f64..3.0, im in -3.0f64..3.0, theta in 0.0f64..6.283) {
        prop_assume!(re.hypot(im) > 0.1);
        let u = cone(seed);
        let v = cone(seed + 1);
        let p = params();
        let c = Complex64::new(re, im);
        let unit = Complex64::from_polar(1.0, theta);
        let s0 = strichartz_ratio(&u, 1.0, &p).unwrap();
        for k in [c, unit] {
            let s1 = strichartz_ratio(&u.scale(k), 1.0, &p).unwrap();
            prop_assert!((s0 - s1).abs() <= 1e-12 * s0);
        }
        let conj = Conjugation { first: false, second: true };
        let b0 = bilinear_ratio(&u, &v, 1.0, 2.0, &p, false, conj).unwrap();
        let b1 = bilinear_ratio(&u.scale(c), &v.scale(unit), 1.0, 2.0, &p, false, conj).unwrap();
        prop_assert!((b0 - b1).abs() <= 1e-12 * b0);
    }

    #[test]
    fn plancherel_holds_for_random_samples(seed in 0u64..10_000) {
        let u = sample_xsb_function(seed, Concentration::Random, small_grid(), 8, 0.5, 0.0).unwrap();
        let a = xsb_norm(&u, &XsbParams { s: 0.0, b: 0.0, ..params() });
        let b = u.l2_norm();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}
