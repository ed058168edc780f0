//! Small quadrature helpers on top of `gauss-quad`.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre `(node, weight)` pairs mapped to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Composite Simpson weights for `n` (even) intervals of width `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even interval count");
    (0..=n)
        .map(|i| {
            let c = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}
