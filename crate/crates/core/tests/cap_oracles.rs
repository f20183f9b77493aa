use approx::assert_relative_eq;
use capfilm::cap::{cap_for_volume, cap_from_angle, cap_volume, cap_volume_quadrature, eps_max, theta_for_lambda};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Hit-or-miss estimate of the region under the upper cap, outside the
/// tube, doubled for the lower half.
fn monte_carlo_volume(delta: f64, theta: f64, n: usize, seed: u64) -> (f64, f64) {
    let cap = cap_from_angle(delta, theta).unwrap();
    let rc = cap.contact_radius;
    let top = cap.apex_height;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let x = rng.random_range(-rc..rc);
        let y = rng.random_range(-rc..rc);
        let z = rng.random_range(0.0..top);
        let rho = x.hypot(y);
        if rho > rc || z > cap.height(rho) {
            continue;
        }
        if (rho - 1.0).powi(2) + z * z < delta * delta {
            continue;
        }
        hits += 1;
    }
    let box_vol = 4.0 * rc * rc * top;
    let p = hits as f64 / n as f64;
    let est = 2.0 * box_vol * p;
    let sigma = 2.0 * box_vol * (p * (1.0 - p) / n as f64).sqrt();
    (est, sigma)
}

#[test]
fn closed_form_volume_matches_monte_carlo() {
    for (k, &(delta, theta)) in [(0.1, 0.3), (0.05, 0.8), (0.2, 1.2), (0.1, 0.05)].iter().enumerate() {
        let exact = cap_volume(delta, theta).unwrap();
        let (est, sigma) = monte_carlo_volume(delta, theta, 2_000_000, 17 + k as u64);
        assert!(
            (est - exact).abs() <= 5.0 * sigma,
            "delta {delta} theta {theta}: exact {exact}, estimate {est} ± {sigma}"
        );
    }
}

#[test]
fn lambda_scales_like_two_over_r_at_tiny_volume() {
    let cap = cap_for_volume(0.1, 1e-7).unwrap();
    assert_relative_eq!(cap.lambda, 2.0 / cap.r, max_relative = 1e-12);
    assert!(cap.orthogonality_residual().abs() < 1e-12);
}

#[test]
fn volume_beyond_the_largest_cap_is_rejected() {
    let top = eps_max(0.1).unwrap();
    assert!(cap_for_volume(0.1, 0.999 * top).is_ok());
    assert!(cap_for_volume(0.1, 1.01 * top).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_increases_with_angle(delta in 0.01f64..0.45, a in 0.01f64..1.5, b in 0.01f64..1.5) {
        prop_assume!((a - b).abs() > 1e-6);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(cap_volume(delta, lo).unwrap() < cap_volume(delta, hi).unwrap());
    }

    #[test]
    fn closed_form_agrees_with_quadrature(delta in 0.01f64..0.45, theta in 0.01f64..1.5) {
        let v = cap_volume(delta, theta).unwrap();
        let q = cap_volume_quadrature(delta, theta).unwrap();
        prop_assert!((v - q).abs() <= 1e-9 * v, "closed {v} quadrature {q}");
    }

    #[test]
    fn volume_inversion_round_trips(delta in 0.01f64..0.45, theta in 0.001f64..1.5) {
        let eps = cap_volume(delta, theta).unwrap();
        let cap = cap_for_volume(delta, eps).unwrap();
        prop_assert!((cap.theta - theta).abs() <= 1e-9 * theta);
        prop_assert!((cap.volume - eps).abs() <= 1e-11 * eps);
        if theta < delta.acos() {
            let back = theta_for_lambda(delta, cap.lambda).unwrap();
            prop_assert!((back - theta).abs() <= 1e-8 * theta);
        }
    }
}
