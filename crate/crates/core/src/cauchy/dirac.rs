//! The Dirac-pair kernel `phi = (delta_{-L} + delta_L) / 2` on a period-`2L` domain.
//!
//! There `phi * u (x) = u(x + L) =: v(x)`, and the nonlocal equation becomes
//! the local pair
//!
//! ```text
//! u_t = u_xx + mu u (1 - v),   v_t = v_xx + mu v (1 - u)
//! ```
//!
//! whose difference `w = u - v` solves the linear `w_t = w_xx + mu w`. From
//! `u0 = 1 + rho cos(pi x / L)`, `w = 2 rho cos(pi x / L) e^{(mu - pi^2/L^2) t}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::spectral::{dft_forward, dft_inverse, grid_shift, laplacian_symbol, Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Diffusion, then reaction.
    #[default]
    Lie,
    /// Half diffusion, reaction, half diffusion.
    Strang,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracOptions {
    pub dt: f64,
    pub splitting: Splitting,
    pub record_every: usize,
    /// Stop once `sup |w|` exceeds this.
    pub w_cap: f64,
    /// Fit the growth rate on records with `t >= fit_from`.
    pub fit_from: f64,
}

impl Default for DiracOptions {
    fn default() -> Self {
        Self { dt: 2e-3, splitting: Splitting::Lie, record_every: 10, w_cap: 1e10, fit_from: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracReport {
    pub mu: f64,
    pub half_period: f64,
    pub rho: f64,
    /// `mu - pi^2 / L^2`.
    pub theoretical_rate: f64,
    /// Least-squares slope of `ln sup |w|` against `t`.
    pub fit: LinearFit,
    pub times: Vec<f64>,
    pub w_sup: Vec<f64>,
    pub u_sup: Vec<f64>,
    pub v_sup: Vec<f64>,
    pub t_stop: f64,
    /// The run stopped because `sup |w|` passed the cap.
    pub blew_up: bool,
    pub u_final: Field,
    pub v_final: Field,
}

impl DiracReport {
    pub fn relative_rate_error(&self) -> f64 {
        (self.fit.slope - self.theoretical_rate).abs() / self.theoretical_rate.abs()
    }

    /// First recorded time at which `sup |u|` exceeds `level`.
    pub fn first_time_u_exceeds(&self, level: f64) -> Option<f64> {
        self.times
            .iter()
            .zip(&self.u_sup)
            .find(|(_, u)| **u > level)
            .map(|(t, _)| *t)
    }
}

/// Exact flow of `u' = mu u (1 - v)`, `v' = mu v (1 - u)` over time `tau`.
///
/// For positive data, `w = u - v` grows like `e^{mu t}` and `ln(u/v) - w` is
/// conserved, which pins both components. A nonpositive component evolves
/// linearly with its partner frozen; the partner is recovered from `w`.
pub(crate) fn react(u0: f64, v0: f64, mu: f64, tau: f64) -> (f64, f64) {
    let g = (mu * tau).exp();
    let w0 = u0 - v0;
    let w = w0 * g;
    if u0 > 0.0 && v0 > 0.0 {
        if w0 == 0.0 {
            let u = u0 * g / (1.0 + u0 * (g - 1.0));
            return (u, u);
        }
        let rho = (w0 / v0).ln_1p() + (w - w0);
        let v = w / rho.exp_m1();
        let u = w / -(-rho).exp_m1();
        (u, v)
    } else if v0 <= 0.0 {
        let v = v0 * (mu * tau * (1.0 - u0)).exp();
        (w + v, v)
    } else {
        let u = u0 * (mu * tau * (1.0 - v0)).exp();
        (u, u - w)
    }
}

fn diffuse(u: &Field, decay: &[f64]) -> Field {
    let mut s = dft_forward(u);
    for (c, e) in s.coeffs_mut().iter_mut().zip(decay) {
        *c *= e;
    }
    dft_inverse(&s)
}

/// Integrates the coupled pair from `u0 = 1 + rho cos(pi x / L)`,
/// `v0 = u0(x + L)` on `grid` (period `2L`) until `t_end` or until
/// `sup |w|` passes `opts.w_cap`, and fits the growth rate of `sup |w|`.
pub fn dirac_counterexample(
    mu: f64,
    half_period: f64,
    rho: f64,
    t_end: f64,
    grid: Grid,
    opts: &DiracOptions,
) -> Result<DiracReport> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidArgument(format!("rho must lie in (0, 1), got {rho}")));
    }
    if !(mu > 0.0) || !(t_end > 0.0) || !(opts.dt > 0.0) || opts.record_every == 0 {
        return Err(Error::InvalidArgument(
            "mu, T, dt and record_every must be positive".into(),
        ));
    }
    if (grid.period() - 2.0 * half_period).abs() > 1e-12 * grid.period() {
        return Err(Error::InvalidArgument(format!(
            "grid period {} must equal 2L = {}",
            grid.period(),
            2.0 * half_period
        )));
    }
    let cells = grid_shift(&grid, half_period)?;
    let u0 = Field::from_fn(grid, |x| 1.0 + rho * (PI * x / half_period).cos())?;
    let v0 = u0.shifted(-cells);

    let steps = (t_end / opts.dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let diffusion_time = match opts.splitting {
        Splitting::Lie => dt,
        Splitting::Strang => 0.5 * dt,
    };
    let decay: Vec<f64> = (0..grid.len())
        .map(|m| (-laplacian_symbol(grid.frequency(m)) * diffusion_time).exp())
        .collect();

    let mut times = Vec::new();
    let mut w_sup = Vec::new();
    let mut u_sup = Vec::new();
    let mut v_sup = Vec::new();
    let mut record = |t: f64, u: &Field, v: &Field| -> f64 {
        let w = u
            .values()
            .iter()
            .zip(v.values())
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        times.push(t);
        w_sup.push(w);
        u_sup.push(u.sup_norm());
        v_sup.push(v.sup_norm());
        w
    };

    let (mut u, mut v) = (u0, v0);
    record(0.0, &u, &v);
    let mut t_stop = 0.0;
    let mut blew_up = false;
    for i in 1..=steps {
        u = diffuse(&u, &decay);
        v = diffuse(&v, &decay);
        let (mut un, mut vn) = (u.into_values(), v.into_values());
        for (a, b) in un.iter_mut().zip(vn.iter_mut()) {
            (*a, *b) = react(*a, *b, mu, dt);
        }
        u = Field::from_raw(grid, un);
        v = Field::from_raw(grid, vn);
        if opts.splitting == Splitting::Strang {
            u = diffuse(&u, &decay);
            v = diffuse(&v, &decay);
        }
        let t = i as f64 * dt;
        t_stop = t;
        let finite = u.values().iter().chain(v.values()).all(|x| x.is_finite());
        if !finite {
            blew_up = true;
            break;
        }
        if i % opts.record_every == 0 || i == steps {
            let w = record(t, &u, &v);
            if w > opts.w_cap {
                blew_up = true;
                break;
            }
        }
    }

    let (ts, logs): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&w_sup)
        .filter(|(t, w)| **t >= opts.fit_from && **w > 0.0 && **w <= opts.w_cap)
        .map(|(t, w)| (*t, w.ln()))
        .unzip();
    let fit = linear_fit(&ts, &logs, 10)?;

    Ok(DiracReport {
        mu,
        half_period,
        rho,
        theoretical_rate: mu - PI * PI / (half_period * half_period),
        fit,
        times,
        w_sup,
        u_sup,
        v_sup,
        t_stop,
        blew_up,
        u_final: u,
        v_final: v,
    })
}
