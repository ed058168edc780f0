use std::f64::consts::PI;

use bslab::quad::gauss_legendre;
use bslab::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: Grid3, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals = (0..grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::from_values(grid, vals, Representation::Physical).unwrap()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    let (a, b) = (a.to_physical(), b.to_physical());
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn half_wave_symbol_values() {
    assert_eq!(half_wave_symbol([0.0; 3], 1.0), 0.0);
    assert!((half_wave_symbol([3.0, 4.0, 0.0], 0.0) + 5.0).abs() < 1e-15);
    assert!((half_wave_symbol([0.0, 0.0, 3f64.sqrt()], 1.0) + 1.0).abs() < 1e-15);
}

#[test]
fn symbol_equivalence_bounds() {
    let g = Grid3::new(16, 10.0).unwrap();
    for m in [0.0, 1.0] {
        for i in 0..g.len() {
            let k = g.frequency_norm(i);
            let p = half_wave_symbol(g.frequency(i), m).abs();
            assert!(p <= k + 1e-12 && k <= p + 2.0 * m + 1e-12);
        }
    }
}

#[test]
fn sqrt_op_on_a_single_mode_matches_dense_application() {
    // dense oracle: (Au)(x_j) = Σ_k K(x_j − x_k)u(x_k) with the kernel of the
    // symbol built from the plane-wave basis on the 8³ lattice
    let g = Grid3::new(8, 2.0 * PI).unwrap();
    let xi0 = [1.0, 0.0, 0.0];
    let u = Field::from_fn(g, |x| Complex64::from_polar(1.0, xi0[0] * x[0]));
    let au = apply_multiplier(&u, &MultiplierSymbol::SqrtOp { m: 0.0 }).to_physical();
    let n = g.len();
    let basis: Vec<[f64; 3]> = (0..n).map(|i| g.frequency(i)).collect();
    let xs: Vec<[f64; 3]> = (0..n).map(|i| g.position(i)).collect();
    let uv = u.values();
    for j in [0usize, 17, 100, 311] {
        let mut acc = Complex64::default();
        for (k, xk) in xs.iter().enumerate() {
            let mut kern = Complex64::default();
            for xi in &basis {
                let s = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                let ph = xi[0] * (xs[j][0] - xk[0]) + xi[1] * (xs[j][1] - xk[1]) + xi[2] * (xs[j][2] - xk[2]);
                kern += Complex64::from_polar(s, ph);
            }
            acc += kern * uv[k] / n as f64;
        }
        assert!((acc - au.values()[j]).norm() < 1e-10, "{acc} vs {}", au.values()[j]);
        assert!((au.values()[j] - uv[j]).norm() < 1e-12);
    }
}

#[test]
fn multiplier_identities() {
    let g = Grid3::new(16, 12.0).unwrap();
    let u = random_field(g, 1);
    let id = apply_multiplier(&u, &MultiplierSymbol::JapaneseBracketPower { s: 0.0 });
    assert!(max_diff(&u, &id) < 1e-12);
    let one = Field::from_fn(g, |_| Complex64::new(1.0, 0.0));
    let two = apply_multiplier(&one, &MultiplierSymbol::SqrtOp { m: 2.0 });
    assert!(two.to_physical().values().iter().all(|v| (v - 2.0).norm() < 1e-12));
    for m in [0.0, 1.0] {
        let twice = apply_multiplier(&apply_multiplier(&u, &MultiplierSymbol::SqrtOp { m }), &MultiplierSymbol::SqrtOp { m });
        let once = apply_symbol_fn(&u, |xi| Complex64::new(m * m + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], 0.0));
        let scale = once.l2_norm();
        assert!(max_diff(&twice, &once) < 1e-12 * scale);
    }
}

#[test]
fn dyadic_partition_of_unity() {
    let g = Grid3::new(32, 16.0).unwrap();
    let u = random_field(g, 7);
    let mut sum = project(&u, &ProjectorSpec::SmoothDyadic { lambda: 1.0 });
    let mut lambda = 2.0;
    while lambda <= 4.0 * g.nyquist() {
        sum = sum.add(&project(&u, &ProjectorSpec::SmoothDyadic { lambda }));
        lambda *= 2.0;
    }
    assert!(max_diff(&sum, &u) < 1e-12);
}

#[test]
fn sharp_projectors() {
    let g = Grid3::new(16, 12.0).unwrap();
    let u = random_field(g, 3);
    let full = project(&u, &ProjectorSpec::SharpBall { center: [0.0; 3], radius: 1e6 });
    assert!(max_diff(&full, &u) < 1e-12);
    let cube = ProjectorSpec::SharpCube { center: [1.0, 0.0, 0.5], half_side: 1.2 };
    let once = project(&u, &cube);
    assert!(max_diff(&project(&once, &cube), &once) < 1e-14);
    // commutes with multipliers
    let sym = MultiplierSymbol::SqrtOp { m: 1.0 };
    let a = apply_multiplier(&project(&u, &cube), &sym);
    let b = project(&apply_multiplier(&u, &sym), &cube);
    assert!(max_diff(&a, &b) < 1e-12);
    let empty = project_with_info(&u, &ProjectorSpec::SharpBall { center: [0.1, 0.1, 0.1], radius: 0.01 });
    assert!(empty.empty);
}

#[test]
fn torus_coulomb_potential_is_real() {
    let g = Grid3::new(32, 16.0).unwrap();
    let rho = Field::from_fn(g, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::new((-r2).exp() * (1.0 + 0.3 * x[0].sin()), 0.0)
    });
    let v = coulomb_potential(&rho).unwrap().to_physical();
    let max_im = v.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_re = v.values().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    assert!(max_im <= 1e-12 * max_re);
}

/// `V(r) = ∫ρ(y)/|x−y|dy` by the shell formula `(1/r)∫₀^r ρ 4πs²ds + ∫_r^∞ ρ 4πs ds`.
fn newton_oracle(rho: impl Fn(f64) -> f64, r: f64) -> f64 {
    let inner: f64 = gauss_legendre(200, 0.0, r)
        .into_iter()
        .map(|(s, w)| w * 4.0 * PI * s * s * rho(s))
        .sum();
    let outer: f64 = gauss_legendre(200, r, 12.0)
        .into_iter()
        .map(|(s, w)| w * 4.0 * PI * s * rho(s))
        .sum();
    inner / r + outer
}

#[test]
fn radial_newton_potential_of_a_gaussian() {
    let g = RadialGrid::new(64.0, 4096).unwrap();
    let rho = RadialProfile::from_real_fn(g, |r| (-r * r).exp());
    let v = radial_coulomb_potential(&rho).unwrap();
    let samples = v.interpolate(&[0.5, 1.0, 2.0]);
    for (r, got) in [0.5, 1.0, 2.0].into_iter().zip(samples) {
        let want = newton_oracle(|s| (-s * s).exp(), r);
        assert!((got.re - want).abs() < 1e-8 * want, "r = {r}: {} vs {want}", got.re);
    }
    // far field → M/r
    let mass = PI.powf(1.5);
    let far = v.interpolate(&[40.0])[0].re;
    assert!((far * 40.0 / mass - 1.0).abs() < 1e-8);
    let zero = radial_coulomb_potential(&RadialProfile::from_real_fn(g, |_| 0.0)).unwrap();
    assert!(zero.values().iter().all(|z| z.norm() == 0.0));
}

#[test]
fn radial_transform_properties() {
    let g = RadialGrid::new(32.0, 1024).unwrap();
    let f = RadialProfile::from_real_fn(g, |r| (-r * r / 2.0).exp());
    let fh = f.to_spectral();
    let err = fh
        .values()
        .iter()
        .enumerate()
        .map(|(j, v)| (v.re - (-g.k(j).powi(2) / 2.0).exp()).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-10);
    let p = RadialProfile::from_real_fn(g, |r| (1.0 + r.cos() * 0.2) * (-r * r / 8.0).exp());
    let back = p.to_spectral().to_physical();
    assert!(back.sub(&p).l2_norm() < 1e-8 * p.l2_norm());
    assert!((p.to_spectral().l2_norm() / p.l2_norm() - 1.0).abs() < 1e-10);
    let ones = RadialProfile::from_real_fn(g, |r| if r <= 10.0 { 1.0 } else { 0.0 });
    let vol = ones.l2_norm_sq();
    assert!((vol / (4.0 * PI / 3.0 * 1000.0) - 1.0).abs() < 1e-2);
}

#[test]
fn radial_multiplier_matches_torus_on_a_gaussian() {
    let g3 = Grid3::new(64, 32.0).unwrap();
    let gr = RadialGrid::new(32.0, 1024).unwrap();
    let sym = MultiplierSymbol::SqrtOp { m: 1.0 };
    let gauss = |r2: f64| (-r2 / 2.0).exp();
    let u3 = apply_multiplier(
        &Field::from_fn(g3, |x| Complex64::new(gauss(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), 0.0)),
        &sym,
    )
    .to_physical();
    let ur = apply_radial_multiplier(&RadialProfile::from_real_fn(gr, |r| gauss(r * r)), &sym);
    for ix in [32, 34, 37] {
        let i = g3.index(ix, 32, 32);
        let a = u3.values()[i].re;
        let b = ur.interpolate(&[g3.position(i)[0].abs().max(1e-12)])[0].re;
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
    }
}

#[test]
fn sobolev_norms_of_zero_and_monotone() {
    let g = Grid3::new(16, 12.0).unwrap();
    let z = Field::zeros(g, Representation::Physical);
    assert_eq!(sobolev_norm(&z, 1.0), 0.0);
    let u = random_field(g, 9);
    assert!(sobolev_norm(&u, 0.5) >= sobolev_norm(&u, 0.0));
    assert!((sobolev_norm(&u, 0.0) - u.l2_norm()).abs() < 1e-12 * u.l2_norm());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn plancherel(seed in 0u64..100_000, n_log in 2u32..5, l in 1.0f64..40.0) {
        let g = Grid3::new(1 << n_log, l).unwrap();
        let u = random_field(g, seed);
        let a = u.l2_norm();
        let b = u.to_spectral().l2_norm();
        prop_assert!((a - b).abs() <= 1e-12 * a);
        prop_assert!(max_diff(&u.to_spectral().to_physical(), &u) <= 1e-12 * u.linf_norm() * 10.0);
    }

    #[test]
    fn smooth_bump_bounds(s in -3.0f64..3.0, lambda in 1.0f64..64.0) {
        let b = beta1(s);
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert_eq!(b, beta1(-s));
        let d = beta_lambda(lambda, s.abs() * lambda);
        prop_assert!((-1e-15..=1.0 + 1e-15).contains(&d));
    }

    #[test]
    fn container_round_trip(seed in 0u64..1000) {
        let g = Grid3::new(4, 3.0).unwrap();
        let u = random_field(g, seed);
        let mut buf = Vec::new();
        container::write_field(&mut buf, &u).unwrap();
        let back = container::read_field(&mut buf.as_slice()).unwrap();
        let phys = back.to_physical();
        prop_assert_eq!(phys.values(), u.values());
    }
}
