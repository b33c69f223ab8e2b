//! Time integration of `u_t = u_xx + mu u (1 - phi * u)` on a periodic grid.

mod dirac;
mod initial;

pub use dirac::{dirac_counterexample, DiracOptions, DiracReport, Splitting};
pub use initial::{mollified_indicator, InitialCondition, EDGE_CUTOFF, EDGE_WIDTH_CELLS};

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{Family, Kernel};
use crate::spectral::{
    apply_symbol, dft_forward, dft_inverse, grid_shift, laplacian_symbol, spectral_tail, Field,
    Grid,
};

/// Time discretization. Diffusion is integrated exactly in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// First order: exponential Euler,
    /// `U <- e^{-k dt} U + (1 - e^{-k dt})/k R(u)^`.
    #[default]
    Imex1,
    /// Second order: half-step reaction (RK4), exact diffusion, half-step reaction.
    Strang,
}

/// Precomputed per-mode factors for a fixed grid, kernel, `mu` and `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    mu: f64,
    dt: f64,
    scheme: Scheme,
    phi_hat: Vec<f64>,
    /// Index shift for Dirac-pair kernels.
    shift: Option<i64>,
    decay: Vec<f64>,
    forcing: Vec<f64>,
}

impl Stepper {
    pub fn new(kernel: &Kernel, grid: Grid, mu: f64, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if !mu.is_finite() {
            return Err(Error::NonFinite { name: "mu", value: mu });
        }
        let shift = match kernel.family() {
            Family::DiracPair { shift } => Some(grid_shift(&grid, *shift)?),
            _ => None,
        };
        let n = grid.len();
        let phi_hat = (0..n).map(|m| kernel.fourier(grid.frequency(m))).collect();
        let kappa: Vec<f64> = (0..n).map(|m| laplacian_symbol(grid.frequency(m))).collect();
        let decay = kappa.iter().map(|k| (-k * dt).exp()).collect();
        let forcing = kappa
            .iter()
            .map(|&k| if k == 0.0 { dt } else { -(-k * dt).exp_m1() / k })
            .collect();
        Ok(Self { grid, mu, dt, scheme, phi_hat, shift, decay, forcing })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn convolve(&self, u: &Field) -> Field {
        match self.shift {
            Some(s) => {
                let (a, b) = (u.shifted(s), u.shifted(-s));
                Field::from_raw(
                    self.grid,
                    a.values().iter().zip(b.values()).map(|(x, y)| 0.5 * (x + y)).collect(),
                )
            }
            None => {
                let mut s = dft_forward(u);
                for (c, p) in s.coeffs_mut().iter_mut().zip(&self.phi_hat) {
                    *c *= p;
                }
                dft_inverse(&s)
            }
        }
    }

    /// `mu u (1 - phi * u)`.
    pub fn reaction(&self, u: &Field) -> Field {
        let c = self.convolve(u);
        let mu = self.mu;
        Field::from_raw(
            self.grid,
            u.values().iter().zip(c.values()).map(|(a, b)| mu * a * (1.0 - b)).collect(),
        )
    }

    fn rk4_reaction(&self, u: &Field, h: f64) -> Field {
        let add = |a: &Field, b: &Field, s: f64| {
            Field::from_raw(
                self.grid,
                a.values().iter().zip(b.values()).map(|(x, y)| x + s * y).collect(),
            )
        };
        let k1 = self.reaction(u);
        let k2 = self.reaction(&add(u, &k1, 0.5 * h));
        let k3 = self.reaction(&add(u, &k2, 0.5 * h));
        let k4 = self.reaction(&add(u, &k3, h));
        let values = (0..u.values().len())
            .map(|j| {
                u.values()[j]
                    + h / 6.0
                        * (k1.values()[j] + 2.0 * k2.values()[j] + 2.0 * k3.values()[j] + k4.values()[j])
            })
            .collect();
        Field::from_raw(self.grid, values)
    }

    /// One step without any checks.
    pub fn advance(&self, u: &Field) -> Field {
        match self.scheme {
            Scheme::Imex1 => {
                let mut s = dft_forward(u);
                let r = dft_forward(&self.reaction(u));
                for (((c, rc), e), f) in s
                    .coeffs_mut()
                    .iter_mut()
                    .zip(r.coeffs())
                    .zip(&self.decay)
                    .zip(&self.forcing)
                {
                    *c = *c * *e + *rc * *f;
                }
                dft_inverse(&s)
            }
            Scheme::Strang => {
                let half = self.rk4_reaction(u, 0.5 * self.dt);
                let mut s = dft_forward(&half);
                for (c, e) in s.coeffs_mut().iter_mut().zip(&self.decay) {
                    *c *= Complex64::new(*e, 0.0);
                }
                self.rk4_reaction(&dft_inverse(&s), 0.5 * self.dt)
            }
        }
    }
}

/// A recorded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Field,
    pub mu: f64,
    pub kernel: Arc<Kernel>,
}

/// Advances `state` by one step of size `dt`. Non-finite values are reported as blow-up.
pub fn step(state: &SimState, dt: f64, scheme: Scheme) -> Result<SimState> {
    let stepper = Stepper::new(&state.kernel, *state.u.grid(), state.mu, dt, scheme)?;
    let u = stepper.advance(&state.u);
    let t = state.t + dt;
    check_finite(&u, t)?;
    Ok(SimState { t, u, mu: state.mu, kernel: state.kernel.clone() })
}

fn check_finite(u: &Field, t: f64) -> Result<()> {
    if u.values().iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        let sup_u = u
            .values()
            .iter()
            .fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
        Err(Error::BlowUp { t, sup_u })
    }
}

/// Reaction-limited step `min(0.5 / (mu (1 + |phi * u0|)), T / 4096)`.
pub fn default_dt(u0: &Field, mu: f64, kernel: &Kernel, t_end: f64) -> Result<f64> {
    let conv = crate::spectral::convolve(kernel, u0)?.sup_norm();
    let reaction = if mu > 0.0 { 0.5 / (mu * (1.0 + conv)) } else { f64::INFINITY };
    Ok(reaction.min(t_end / 4096.0))
}

pub const TAIL_LIMIT: f64 = 1e-10;
pub const NEGATIVITY_LIMIT: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub scheme: Scheme,
    /// Step size; `None` uses [`default_dt`]. Rounded down so that a whole
    /// number of steps reaches `T`.
    pub dt: Option<f64>,
    pub record_every: usize,
    /// After each step, zero every value with `|u|` below this.
    ///
    /// Ahead of a front the linearization is `u_t = u_xx + mu u`, which
    /// amplifies FFT round-off (~1e-16) by `e^{mu t}`; without a floor the
    /// noise overtakes the domain long before the front does.
    pub noise_floor: Option<f64>,
    /// Fail when a recorded snapshot at `t > 0` has spectral tail above [`TAIL_LIMIT`].
    pub check_resolution: bool,
    /// Fail when a recorded snapshot dips below [`NEGATIVITY_LIMIT`]; only
    /// applied when `u0 >= 0`.
    pub check_nonnegative: bool,
    /// Keep recorded states in the returned trajectory; long runs that only
    /// need the observer can turn this off to save memory.
    pub keep_states: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            scheme: Scheme::Imex1,
            dt: None,
            record_every: 1,
            noise_floor: None,
            check_resolution: true,
            check_nonnegative: true,
            keep_states: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub mu: f64,
    pub kernel: Arc<Kernel>,
    pub dt: f64,
    pub steps: usize,
    pub states: Vec<SimState>,
}

impl Trajectory {
    pub fn last(&self) -> &SimState {
        self.states.last().expect("trajectory keeps at least the initial state")
    }

    /// Largest `sup |u|` over retained states.
    pub fn sup_u(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max(s.u.sup_norm()))
    }
}

/// Fixed-step integration to `t_end`, recording the initial state, every
/// `record_every`-th step and the final state.
pub fn evolve(
    u0: &Field,
    mu: f64,
    kernel: &Kernel,
    t_end: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    evolve_with(u0, mu, kernel, t_end, opts, |_| Ok(()))
}

/// As [`evolve`], calling `observe` on each recorded state as it is produced.
pub fn evolve_with(
    u0: &Field,
    mu: f64,
    kernel: &Kernel,
    t_end: f64,
    opts: &EvolveOptions,
    mut observe: impl FnMut(&SimState) -> Result<()>,
) -> Result<Trajectory> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("T must be positive, got {t_end}")));
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidArgument("record_every must be at least 1".into()));
    }
    let target = match opts.dt {
        Some(dt) => dt,
        None => default_dt(u0, mu, kernel, t_end)?,
    };
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {target}")));
    }
    let steps = (t_end / target).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let stepper = Stepper::new(kernel, *u0.grid(), mu, dt, opts.scheme)?;
    let kernel = Arc::new(kernel.clone());
    let nonneg = opts.check_nonnegative && u0.min() >= 0.0;

    let initial = SimState { t: 0.0, u: u0.clone(), mu, kernel: kernel.clone() };
    observe(&initial)?;
    let mut states = vec![initial];
    let mut u = u0.clone();
    for i in 1..=steps {
        u = stepper.advance(&u);
        if let Some(floor) = opts.noise_floor {
            for v in u.values_mut() {
                if v.abs() < floor {
                    *v = 0.0;
                }
            }
        }
        let t = if i == steps { t_end } else { i as f64 * dt };
        check_finite(&u, t)?;
        if i % opts.record_every == 0 || i == steps {
            if opts.check_resolution {
                let tail = spectral_tail(&u);
                if tail > TAIL_LIMIT {
                    return Err(Error::UnderResolved { t, tail, limit: TAIL_LIMIT });
                }
            }
            if nonneg {
                let min_u = u.min();
                if min_u < NEGATIVITY_LIMIT {
                    return Err(Error::Negative { t, min_u });
                }
            }
            let state = SimState { t, u: u.clone(), mu, kernel: kernel.clone() };
            observe(&state)?;
            if opts.keep_states {
                states.push(state);
            }
        }
    }
    Ok(Trajectory { mu, kernel, dt, steps, states })
}

/// Sliding-window integral `v(x) = int_{x - sigma/2}^{x + sigma/2} u`,
/// applied as the exact multiplier `sin(pi sigma xi) / (pi xi)`.
pub fn local_average(u: &Field, sigma: f64) -> Result<Field> {
    let p = u.grid().period();
    if !(sigma > 0.0) || sigma >= 0.5 * p {
        return Err(Error::InvalidArgument(format!(
            "window {sigma} must lie in (0, P/2) = (0, {})",
            0.5 * p
        )));
    }
    Ok(apply_symbol(u, |xi| {
        if xi == 0.0 {
            sigma
        } else {
            let a = std::f64::consts::PI * xi;
            (a * sigma).sin() / a
        }
    }))
}

/// Observed bounds against the constant `M = max(sigma |u0|, 1/eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate {
    pub sigma: f64,
    pub eta: f64,
    pub m_theoretical: f64,
    pub sup_v_observed: f64,
    pub sup_u_observed: f64,
    /// `sup_v_observed <= m_theoretical (1 + 1e-6)`.
    pub holds: bool,
}

impl BoundCertificate {
    pub fn margin(&self) -> f64 {
        self.m_theoretical - self.sup_v_observed
    }
}

/// Incremental form of [`bound_certificate`], fed one snapshot at a time.
#[derive(Debug, Clone)]
pub struct CertificateBuilder {
    sigma: f64,
    eta: f64,
    sup_u0: Option<f64>,
    sup_v: f64,
    sup_u: f64,
}

impl CertificateBuilder {
    pub fn new(kernel: &Kernel) -> Result<Self> {
        if kernel.is_atomic() {
            return Err(Error::CertificateInapplicable(
                "Dirac-pair kernels have no density window; their solutions can be unbounded".into(),
            ));
        }
        let (sigma, eta) = kernel.window_bound()?;
        Ok(Self { sigma, eta, sup_u0: None, sup_v: 0.0, sup_u: 0.0 })
    }

    /// The first state observed is taken as the initial datum.
    pub fn observe(&mut self, state: &SimState) -> Result<()> {
        let sup = state.u.sup_norm();
        self.sup_u0.get_or_insert(sup);
        self.sup_u = self.sup_u.max(sup);
        self.sup_v = self.sup_v.max(local_average(&state.u, self.sigma)?.sup_norm());
        Ok(())
    }

    pub fn finish(&self) -> BoundCertificate {
        let m = (self.sigma * self.sup_u0.unwrap_or(0.0)).max(1.0 / self.eta);
        BoundCertificate {
            sigma: self.sigma,
            eta: self.eta,
            m_theoretical: m,
            sup_v_observed: self.sup_v,
            sup_u_observed: self.sup_u,
            holds: self.sup_v <= m * (1.0 + 1e-6) && self.sup_u.is_finite(),
        }
    }
}

pub fn bound_certificate(traj: &Trajectory) -> Result<BoundCertificate> {
    let mut b = CertificateBuilder::new(&traj.kernel)?;
    for s in &traj.states {
        b.observe(s)?;
    }
    Ok(b.finish())
}
