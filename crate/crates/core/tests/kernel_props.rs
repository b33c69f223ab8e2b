mod common;

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nlkpp::kernel::Kernel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{density_kernels, quadrature_setup, shipped_kernels, transform_by_quadrature};

#[test]
fn transform_matches_quadrature_on_random_frequencies() {
    let kernels = [
        Kernel::gaussian(1.0).unwrap(),
        Kernel::top_hat(0.75).unwrap(),
        Kernel::phi_beta(100.0).unwrap(),
        Kernel::phi_beta(4.0).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in &kernels {
        let (reach, panels) = quadrature_setup(k);
        for _ in 0..100 {
            let xi: f64 = rng.gen_range(-10.0..10.0);
            let q = transform_by_quadrature(k, xi, reach, panels);
            assert!(
                (k.fourier(xi) - q).abs() < 1e-9,
                "{} at xi = {xi}: {} vs {q}",
                k.label(),
                k.fourier(xi)
            );
        }
    }
}

#[test]
fn unit_mass() {
    for k in shipped_kernels() {
        let tol = if k.label().starts_with("tabulated") { 1e-10 } else { 0.0 };
        assert!((k.fourier(0.0) - 1.0).abs() <= tol, "{}", k.label());
    }
}

#[test]
fn density_reference_values() {
    assert_relative_eq!(
        Kernel::gaussian(1.0).unwrap().density(0.0).unwrap(),
        1.0 / PI.sqrt(),
        max_relative = 1e-15
    );
    // c_4 = 3/4, so the peak is 1 / (c_4 sqrt pi).
    let peak = Kernel::phi_beta(4.0).unwrap().density(0.0).unwrap();
    assert_relative_eq!(peak, 4.0 / (3.0 * PI.sqrt()), max_relative = 1e-15);
    assert_relative_eq!(peak, 0.752252778063675049, max_relative = 1e-15);
    assert_eq!(Kernel::top_hat(2.0).unwrap().density(3.0).unwrap(), 0.0);
    assert!(Kernel::dirac_pair(1.0).unwrap().density(0.0).is_err());
}

#[test]
fn phi_beta_transform_at_sqrt_beta() {
    for beta in [4.0, 100.0, 1e4] {
        let c = 1.0 - 1.0 / f64::sqrt(beta) + 1.0 / beta;
        let p2 = PI * PI;
        let expect = ((-beta * p2).exp() - (-p2).exp() / beta.sqrt() + (-p2 / beta).exp() / beta) / c;
        let got = Kernel::phi_beta(beta).unwrap().fourier(beta.sqrt());
        assert_relative_eq!(got, expect, max_relative = 1e-13);
    }
}

#[test]
fn phi_beta_single_lobe_recipe() {
    let k = Kernel::phi_beta(100.0).unwrap();
    let l = k.single_mode_period().unwrap();
    // Independent check of the crossing: bisection on the closed form.
    let (mut lo, mut hi) = (4.0, 6.0);
    assert!(k.fourier(lo) < 0.0 && k.fourier(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k.fourier(mid) < 0.0 {
            lo = mid
        } else {
            hi = mid
        }
    }
    assert_relative_eq!(hi, 4.85445382357148266, max_relative = 1e-12);
    assert_relative_eq!(l, 1.5 / hi, max_relative = 1e-12);
    assert!(1.0 / l < hi && hi < 2.0 / l);
    let r = k.check_hypothesis(l, 64);
    assert!(r.satisfied);
    assert_eq!(r.k0, Some(1));
    // Positive far out: the negative lobe is bounded.
    assert!(k.fourier(10.0) > 0.0);
}

#[test]
fn hypothesis_examples() {
    let g = Kernel::gaussian(1.0).unwrap().check_hypothesis(10.0, 64);
    assert!(!g.satisfied && g.k0.is_none());
    let d = Kernel::dirac_pair(1.0).unwrap().check_hypothesis(2.0, 8);
    assert!(!d.satisfied);
    assert_eq!(d.negative_count(), 4);
    for (k, v) in d.values.iter().enumerate() {
        assert_relative_eq!(*v, (PI * k as f64).cos(), epsilon = 1e-14);
    }
}

#[test]
fn window_bounds() {
    let (s, e) = Kernel::gaussian(1.0).unwrap().window_bound().unwrap();
    assert_relative_eq!(s, 0.832554611157697756, max_relative = 1e-15);
    assert_relative_eq!(e, 0.282094791773878143, max_relative = 1e-14);
    assert_relative_eq!(e, 0.5 / PI.sqrt(), max_relative = 1e-14);
    assert_eq!(Kernel::top_hat(0.4).unwrap().window_bound().unwrap(), (0.4, 1.25));
    assert!(Kernel::dirac_pair(1.0).unwrap().window_bound().is_err());
    // The bound really is a lower bound on (-sigma, sigma).
    for k in density_kernels() {
        let (s, e) = k.window_bound().unwrap();
        for i in 0..=200 {
            let x = -s + 2.0 * s * i as f64 / 200.0;
            assert!(k.density(x * 0.999999).unwrap() >= e * (1.0 - 1e-12), "{}", k.label());
        }
    }
}

proptest! {
    #[test]
    fn transform_bounded_and_even(xi in -50.0..50.0f64) {
        for k in shipped_kernels() {
            let f = k.fourier(xi);
            prop_assert!(f.abs() <= 1.0 + 1e-12, "{} at {xi}: {f}", k.label());
            prop_assert_eq!(f, k.fourier(-xi));
        }
    }

    #[test]
    fn phi_beta_density_positive(beta in 1.01..1e4f64, x in -10.0..10.0f64) {
        let k = Kernel::phi_beta(beta).unwrap();
        prop_assert!(k.density(x).unwrap() > 0.0);
    }

    #[test]
    fn hypothesis_failure_persists(beta in 2.0..400.0f64, period in 0.2..30.0f64, k_max in 1usize..64) {
        // A second negative value can only be joined by more as k_max grows.
        let k = Kernel::phi_beta(beta).unwrap();
        let small = k.check_hypothesis(period, k_max);
        if small.negative_count() >= 2 {
            prop_assert!(!k.check_hypothesis(period, 2 * k_max).satisfied);
        }
    }

    #[test]
    fn top_hat_first_zero(a in 0.05..5.0f64) {
        prop_assert!(Kernel::top_hat(a).unwrap().fourier(0.5 / a).abs() < 1e-15);
    }
}
