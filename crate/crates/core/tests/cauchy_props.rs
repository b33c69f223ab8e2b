mod common;

use std::f64::consts::PI;

use nlkpp::cauchy::{
    bound_certificate, dirac_counterexample, evolve, local_average, DiracOptions, EvolveOptions,
    InitialCondition, Scheme, EDGE_WIDTH_CELLS,
};
use nlkpp::error::Error;
use nlkpp::kernel::Kernel;
use nlkpp::spectral::{Field, Grid};
use nlkpp::stability::mu_star;
use nlkpp::steady_state::{find_steady, NewtonOptions};
use proptest::collection::vec;
use proptest::prelude::*;

use common::{density_kernels, logistic, rk4_reference, simpson};

fn smooth_problem() -> (Kernel, Grid, f64, Field) {
    let p = 10.0;
    let g = Grid::new(p, 32).unwrap();
    let u0 = Field::from_fn(g, |x| {
        0.5 + 0.3 * (2.0 * PI * x / p).cos() + 0.2 * (4.0 * PI * x / p).cos()
    })
    .unwrap();
    (Kernel::gaussian(1.0).unwrap(), g, 2.0, u0)
}

fn observed_orders(scheme: Scheme, dts: [f64; 3]) -> (Vec<f64>, Vec<f64>) {
    let (k, g, mu, u0) = smooth_problem();
    let t_end = 1.0;
    let reference = rk4_reference(&k, g.period(), mu, u0.values(), t_end, 4000);
    let reference = Field::new(g, reference).unwrap();
    let errors: Vec<f64> = dts
        .iter()
        .map(|dt| {
            let opts = EvolveOptions { scheme, dt: Some(*dt), ..Default::default() };
            evolve(&u0, mu, &k, t_end, &opts).unwrap().last().u.distance(&reference).unwrap()
        })
        .collect();
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    (errors, orders)
}

#[test]
fn exponential_euler_is_first_order() {
    let (errors, orders) = observed_orders(Scheme::Imex1, [0.02, 0.01, 0.005]);
    for p in &orders {
        assert!(*p >= 0.9, "orders {orders:?}, errors {errors:?}");
    }
}

#[test]
fn strang_is_second_order() {
    let (errors, orders) = observed_orders(Scheme::Strang, [0.04, 0.02, 0.01]);
    for p in &orders {
        assert!(*p >= 1.9, "orders {orders:?}, errors {errors:?}");
    }
}

#[test]
fn constant_data_follow_the_logistic_ode() {
    let g = Grid::new(10.0, 64).unwrap();
    for k in density_kernels() {
        for c in [0.05, 0.4, 2.5] {
            let u0 = Field::constant(g, c).unwrap();
            let opts = EvolveOptions { scheme: Scheme::Strang, dt: Some(0.005), record_every: 100, ..Default::default() };
            let traj = evolve(&u0, 1.0, &k, 5.0, &opts).unwrap();
            for s in &traj.states {
                let exact = logistic(c, 1.0, s.t);
                for v in s.u.values() {
                    assert!((v - exact).abs() < 1e-8, "{} c={c} t={}: {v} vs {exact}", k.label(), s.t);
                }
            }
        }
    }
}

#[test]
fn equilibria_stay_put() {
    let g = Grid::new(12.0, 128).unwrap();
    for k in density_kernels() {
        for c in [0.0, 1.0] {
            let u0 = Field::constant(g, c).unwrap();
            for scheme in [Scheme::Imex1, Scheme::Strang] {
                let opts = EvolveOptions { scheme, dt: Some(0.01), ..Default::default() };
                let traj = evolve(&u0, 4.0, &k, 2.0, &opts).unwrap();
                assert!(traj.states.iter().all(|s| s.u.distance(&u0).unwrap() < 1e-12));
            }
        }
    }
}

#[test]
fn tiny_bump_grows_like_the_linear_heat_flow() {
    let (p, n, mu, t_end, a) = (40.0, 1024, 1.5, 1.0, 1.0);
    let g = Grid::new(p, n).unwrap();
    let amp = 1e-6;
    let u0 = InitialCondition::Bump { center: 0.0, half_width: a, height: amp }.sample(g).unwrap();
    // Diffusion and mu u commute, so Strang splitting is exact for the linear part.
    let opts = EvolveOptions { scheme: Scheme::Strang, dt: Some(1e-3), ..Default::default() };
    let u = evolve(&u0, mu, &Kernel::gaussian(1.0).unwrap(), t_end, &opts).unwrap().last().u.clone();
    // The data are the indicator smoothed by a Gaussian of variance delta^2/2,
    // so the heat flow only widens that Gaussian.
    let delta = EDGE_WIDTH_CELLS * g.spacing();
    let s = (delta * delta + 4.0 * t_end).sqrt();
    let growth = (mu * t_end).exp();
    let exact = |x: f64| amp * growth * 0.5 * (libm::erf((x + a) / s) - libm::erf((x - a) / s));
    let peak = exact(0.0);
    for (x, v) in g.nodes().zip(u.values()) {
        let e = exact(x);
        if e > 1e-3 * peak {
            assert!((v - e).abs() < 1e-3 * e, "x={x}: {v} vs {e}");
        }
    }
}

#[test]
fn bumps_stay_nonnegative() {
    let g = Grid::new(40.0, 512).unwrap();
    let u0 = InitialCondition::Bump { center: 0.0, half_width: 1.0, height: 3.0 }.sample(g).unwrap();
    for k in density_kernels() {
        for mu in [0.5, 2.0, 5.0] {
            let opts = EvolveOptions { noise_floor: Some(1e-13), record_every: 8, ..Default::default() };
            let traj = evolve(&u0, mu, &k, 3.0, &opts).unwrap();
            let min = traj.states.iter().fold(f64::INFINITY, |m, s| m.min(s.u.min()));
            assert!(min >= -1e-12, "{} mu={mu}: {min}", k.label());
        }
    }
}

#[test]
fn local_average_matches_quadrature() {
    let p = 8.0;
    let g = Grid::new(p, 128).unwrap();
    let f = |x: f64| 1.5 + 0.4 * (2.0 * PI * x / p).cos() - 0.3 * (6.0 * PI * x / p + 0.7).sin()
        + 0.05 * (10.0 * PI * x / p).cos();
    let u = Field::from_fn(g, f).unwrap();
    for sigma in [0.1, 0.8325546111576977, 1.7, 3.9] {
        let v = local_average(&u, sigma).unwrap();
        for (x, got) in g.nodes().zip(v.values()) {
            let want = simpson(f, x - 0.5 * sigma, x + 0.5 * sigma, 2000);
            assert!((got - want).abs() < 1e-8, "sigma={sigma} x={x}: {got} vs {want}");
        }
    }
}

#[test]
fn local_average_of_a_narrow_bump_is_its_mass() {
    let g = Grid::new(20.0, 4096).unwrap();
    let u = InitialCondition::Bump { center: 0.0, half_width: 0.2, height: 3.0 }.sample(g).unwrap();
    let mass = u.integral();
    let v = local_average(&u, 1.0).unwrap();
    let centre = g.len() / 2;
    assert!((v.values()[centre] - mass).abs() < 1e-10 * mass);
    assert!((mass - 1.2).abs() < 1e-10);
}

#[test]
fn local_average_rejects_wide_windows() {
    let u = Field::constant(Grid::new(4.0, 32).unwrap(), 1.0).unwrap();
    assert!(local_average(&u, 2.0).is_err());
    assert!(local_average(&u, 0.0).is_err());
}

#[test]
fn certificate_at_the_unit_state() {
    let k = Kernel::gaussian(1.0).unwrap();
    let (sigma, eta) = k.window_bound().unwrap();
    let u0 = Field::constant(Grid::new(10.0, 64).unwrap(), 1.0).unwrap();
    let traj = evolve(&u0, 2.0, &k, 1.0, &EvolveOptions::default()).unwrap();
    let c = bound_certificate(&traj).unwrap();
    assert!((c.sup_v_observed - sigma).abs() < 1e-12);
    assert!((c.m_theoretical - sigma.max(1.0 / eta)).abs() < 1e-15);
    assert!(c.holds && c.margin() >= 0.0);
}

#[test]
fn certificate_along_a_logistic_run() {
    let k = Kernel::gaussian(1.0).unwrap();
    let (sigma, eta) = k.window_bound().unwrap();
    let (c0, mu, t_end) = (0.05, 1.0, 5.0);
    let u0 = Field::constant(Grid::new(10.0, 64).unwrap(), c0).unwrap();
    let opts = EvolveOptions { scheme: Scheme::Strang, dt: Some(0.005), ..Default::default() };
    let cert = bound_certificate(&evolve(&u0, mu, &k, t_end, &opts).unwrap()).unwrap();
    let expected = sigma * logistic(c0, mu, t_end).max(c0);
    assert!((cert.sup_v_observed - expected).abs() < 1e-8);
    assert!((cert.m_theoretical - (sigma * c0).max(1.0 / eta)).abs() < 1e-15);
    assert!(cert.holds);
}

#[test]
fn certificate_survives_an_aggressive_run() {
    let k = Kernel::gaussian(1.0).unwrap();
    let g = Grid::new(40.0, 512).unwrap();
    let u0 = InitialCondition::Bump { center: 0.0, half_width: 1.0, height: 10.0 }.sample(g).unwrap();
    let opts = EvolveOptions { record_every: 16, noise_floor: Some(1e-13), ..Default::default() };
    let traj = evolve(&u0, 10.0, &k, 100.0, &opts).unwrap();
    let c = bound_certificate(&traj).unwrap();
    assert!(c.holds, "{c:?}");
    assert!(c.sup_u_observed.is_finite());
}

#[test]
fn certificate_refuses_dirac_pairs() {
    let g = Grid::new(2.0 * PI, 64).unwrap();
    let k = Kernel::dirac_pair(PI).unwrap();
    let traj = evolve(&Field::constant(g, 1.0).unwrap(), 1.0, &k, 0.1, &EvolveOptions::default()).unwrap();
    assert!(matches!(bound_certificate(&traj), Err(Error::CertificateInapplicable(_))));
}

#[test]
fn steady_profile_is_stationary_in_time() {
    let k = Kernel::phi_beta(100.0).unwrap();
    let l = k.single_mode_period().unwrap();
    let mu = 1.5 * mu_star(&k, l, 1).unwrap();
    let g = Grid::new(l, 64).unwrap();
    let opts = NewtonOptions { deflate_constant: true, ..Default::default() };
    let s = find_steady(mu, &k, &Field::cosine(g, 1.0, 0.05, 1).unwrap(), &opts).unwrap();
    let traj = evolve(&s.u, mu, &k, 10.0, &EvolveOptions { record_every: 1000, ..Default::default() }).unwrap();
    let drift = traj.states.iter().fold(0.0_f64, |m, st| m.max(st.u.distance(&s.u).unwrap()));
    assert!(drift < 1e-8, "{drift}");
}

#[test]
fn dirac_pair_growth_rate() {
    let l = PI;
    let g = Grid::new(2.0 * l, 256).unwrap();
    let r = dirac_counterexample(2.0, l, 0.1, 20.0, g, &DiracOptions::default()).unwrap();
    assert!((r.theoretical_rate - 1.0).abs() < 1e-14);
    assert!(r.relative_rate_error() < 0.01, "{}", r.fit.slope);
    assert!(r.first_time_u_exceeds(1e3).is_some_and(|t| t < 20.0));
}

#[test]
fn dirac_pair_below_threshold_decays() {
    let l = PI;
    let g = Grid::new(2.0 * l, 256).unwrap();
    let r = dirac_counterexample(0.5, l, 0.1, 20.0, g, &DiracOptions::default()).unwrap();
    assert!((r.fit.slope + 0.5).abs() < 0.005, "{}", r.fit.slope);
    assert!(!r.blew_up);
    assert!(r.w_sup.last().unwrap() < &r.w_sup[0]);
    assert!(r.u_sup.iter().all(|u| *u < 1.2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn even_data_stay_even(a in vec(0.0..0.3f64, 4), mu in 0.2..6.0f64, which in 0usize..5) {
        let k = &density_kernels()[which];
        let p = 12.0;
        let g = Grid::new(p, 128).unwrap();
        let u0 = Field::from_fn(g, |x| {
            1.0 + a.iter().enumerate().map(|(j, c)| c * (2.0 * PI * (j + 1) as f64 * x / p).cos()).sum::<f64>()
        }).unwrap();
        for scheme in [Scheme::Imex1, Scheme::Strang] {
            let opts = EvolveOptions { scheme, dt: Some(0.01), ..Default::default() };
            let u = evolve(&u0, mu, k, 1.0, &opts).unwrap().last().u.clone();
            prop_assert!(u.asymmetry() < 1e-12 * u.sup_norm());
        }
    }

    #[test]
    fn positive_data_stay_positive(a in vec(-0.1..0.1f64, 4), mu in 0.2..6.0f64, which in 0usize..5) {
        let k = &density_kernels()[which];
        let p = 12.0;
        let g = Grid::new(p, 128).unwrap();
        let u0 = Field::from_fn(g, |x| {
            0.5 + a.iter().enumerate().map(|(j, c)| c * (2.0 * PI * (j + 1) as f64 * x / p + j as f64).cos()).sum::<f64>()
        }).unwrap();
        let traj = evolve(&u0, mu, k, 2.0, &EvolveOptions::default()).unwrap();
        prop_assert!(traj.states.iter().all(|s| s.u.min() > 0.0));
    }
}
