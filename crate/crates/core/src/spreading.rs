//! Front tracking and spreading-speed measurement from compactly supported data.

use crate::cauchy::{evolve_with, EvolveOptions, InitialCondition, Scheme};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::kernel::Kernel;
use crate::spectral::{Field, Grid};

/// Outermost crossings `(left, right)` of `u = level`, linearly interpolated
/// between nodes.
pub fn front_position(u: &Field, level: f64) -> Result<(f64, f64)> {
    let max_u = u.max();
    if !(max_u > level) {
        return Err(Error::NoFront { level, max_u });
    }
    let grid = u.grid();
    let v = u.values();
    let n = v.len();
    let h = grid.spacing();
    let r = (0..n).rev().find(|&j| v[j] >= level).expect("max exceeds level");
    let right = if r + 1 < n {
        grid.node(r) + h * (v[r] - level) / (v[r] - v[r + 1])
    } else {
        grid.node(r)
    };
    let l = (0..n).find(|&j| v[j] >= level).expect("max exceeds level");
    let left = if l > 0 {
        grid.node(l) - h * (v[l] - level) / (v[l] - v[l - 1])
    } else {
        grid.node(l)
    };
    Ok((left, right))
}

/// Front positions at one level over time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrontTrace {
    pub level: f64,
    pub times: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl FrontTrace {
    pub fn new(level: f64) -> Self {
        Self { level, ..Default::default() }
    }

    pub fn push(&mut self, t: f64, left: f64, right: f64) {
        self.times.push(t);
        self.left.push(left);
        self.right.push(right);
    }
}

/// Fitted front speeds; `left.slope` is negative for an expanding front.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate {
    pub right: LinearFit,
    pub left: LinearFit,
}

impl SpeedEstimate {
    pub fn right_speed(&self) -> f64 {
        self.right.slope
    }

    pub fn left_speed(&self) -> f64 {
        -self.left.slope
    }
}

/// Least-squares slopes of position against time over `t >= t_min`
/// (at least 10 samples).
pub fn estimate_speed(trace: &FrontTrace, t_min: f64) -> Result<SpeedEstimate> {
    let pick = |xs: &[f64]| -> (Vec<f64>, Vec<f64>) {
        trace
            .times
            .iter()
            .zip(xs)
            .filter(|(t, _)| **t >= t_min)
            .map(|(t, x)| (*t, *x))
            .unzip()
    };
    let (tr, xr) = pick(&trace.right);
    let (tl, xl) = pick(&trace.left);
    Ok(SpeedEstimate { right: linear_fit(&tr, &xr, 10)?, left: linear_fit(&tl, &xl, 10)? })
}

/// Upper bound on `u(t, x)` from comparison with `v_t = v_xx + mu v`, for
/// data supported in `[-R, R]` and bounded by `u0_sup`:
/// `u0_sup e^{mu t} (erf((x+R)/(2 sqrt t)) - erf((x-R)/(2 sqrt t))) / 2`.
pub fn heat_envelope(t: f64, x: f64, mu: f64, radius: f64, u0_sup: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("envelope needs t > 0, got {t}")));
    }
    let s = 2.0 * t.sqrt();
    let a = x.abs();
    // erfc form keeps relative accuracy far out in the tail.
    let mass = 0.5 * (libm::erfc((a - radius) / s) - libm::erfc((a + radius) / s));
    Ok(u0_sup * (mu * t).exp() * mass)
}

/// Smallest admissible period: four times the distance covered at speed
/// `2 sqrt mu` plus the initial support width.
pub fn recommended_period(mu: f64, t_end: f64, support_width: f64) -> f64 {
    4.0 * (2.0 * mu.sqrt() * t_end + support_width)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadConfig {
    pub period: f64,
    pub n: usize,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub record_every: usize,
    pub levels: Vec<f64>,
    /// Bump centered at 0.
    pub half_width: f64,
    pub height: f64,
    /// Start of the fit window; `None` means `T / 2`.
    pub t_min: Option<f64>,
    /// Persistence is checked on `|x| <= c_in_fraction * 2 sqrt(mu) * T`.
    pub c_in_fraction: f64,
    pub noise_floor: f64,
    pub scheme: Scheme,
}

impl SpreadConfig {
    /// Settings for speed runs at `mu` up to time `t_end`: the period is
    /// the power of two above [`recommended_period`], `h = 1/16`.
    pub fn for_mu(mu: f64, t_end: f64) -> Self {
        let half_width = 1.0;
        let period = recommended_period(mu, t_end, 2.0 * half_width).log2().ceil().exp2();
        Self {
            period,
            n: (period * 16.0) as usize,
            t_end,
            dt: None,
            record_every: 16,
            levels: vec![0.5, 0.1, 0.01],
            half_width,
            height: 1.0,
            t_min: None,
            c_in_fraction: 0.8,
            noise_floor: 1e-13,
            scheme: Scheme::Imex1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    /// Largest `u / envelope` seen (0 where both vanish).
    pub worst_ratio: f64,
    /// Points with `u > envelope (1 + 1e-6)`.
    pub violations: usize,
    pub points: usize,
}

impl EnvelopeCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone)]
pub struct SpreadReport {
    pub mu: f64,
    pub traces: Vec<FrontTrace>,
    pub speeds: Vec<SpeedEstimate>,
    pub envelope: EnvelopeCheck,
    /// `c_in = c_in_fraction * 2 sqrt mu`.
    pub c_in: f64,
    /// `min u(T, x)` over `|x| <= c_in T`.
    pub interior_min: f64,
    pub sup_u: f64,
    pub final_state: Field,
    pub dt: f64,
}

impl SpreadReport {
    pub fn theoretical_speed(&self) -> f64 {
        2.0 * self.mu.sqrt()
    }
}

/// Evolves a centered bump and measures fronts, envelope domination and
/// interior persistence.
pub fn spreading_experiment(mu: f64, kernel: &Kernel, config: &SpreadConfig) -> Result<SpreadReport> {
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    if config.levels.is_empty() || config.levels.iter().any(|l| !(*l > 0.0 && *l < config.height)) {
        return Err(Error::InvalidArgument(format!(
            "levels must lie in (0, height = {})",
            config.height
        )));
    }
    let grid = Grid::new(config.period, config.n)?;
    let ic = InitialCondition::Bump { center: 0.0, half_width: config.half_width, height: config.height };
    let (lo, hi) = ic.support(grid).expect("bump has compact support");
    let need = recommended_period(mu, config.t_end, hi - lo);
    if config.period < need {
        return Err(Error::InvalidArgument(format!(
            "period {} is below the wraparound-safe size {need:.1} (4 (2 sqrt(mu) T + support))",
            config.period
        )));
    }
    let u0 = ic.sample(grid)?;
    let radius = hi + grid.spacing();
    let u0_sup = u0.max();
    let half = 0.5 * config.period;
    let margin = 0.05 * config.period;

    let mut traces: Vec<FrontTrace> = config.levels.iter().map(|l| FrontTrace::new(*l)).collect();
    let mut envelope = EnvelopeCheck { worst_ratio: 0.0, violations: 0, points: 0 };
    let mut sup_u: f64 = 0.0;
    let mut last = u0.clone();

    let opts = EvolveOptions {
        scheme: config.scheme,
        dt: config.dt,
        record_every: config.record_every,
        noise_floor: Some(config.noise_floor),
        keep_states: false,
        ..Default::default()
    };
    let traj = evolve_with(&u0, mu, kernel, config.t_end, &opts, |state| {
        let t = state.t;
        sup_u = sup_u.max(state.u.sup_norm());
        for trace in traces.iter_mut() {
            let (left, right) = front_position(&state.u, trace.level)?;
            if right > half - margin || left < -half + margin {
                let position = if right > half - margin { right } else { left };
                return Err(Error::Wraparound { t, position, edge: half });
            }
            trace.push(t, left, right);
        }
        if t > 0.0 {
            for (x, u) in grid.nodes().zip(state.u.values()) {
                let env = heat_envelope(t, x, mu, radius, u0_sup)?;
                envelope.points += 1;
                if *u > env * (1.0 + 1e-6) {
                    envelope.violations += 1;
                }
                if *u > 0.0 {
                    envelope.worst_ratio = envelope.worst_ratio.max(u / env);
                }
            }
        }
        if t == config.t_end {
            last = state.u.clone();
        }
        Ok(())
    })?;

    let t_min = config.t_min.unwrap_or(0.5 * config.t_end);
    let speeds = traces
        .iter()
        .map(|tr| estimate_speed(tr, t_min))
        .collect::<Result<Vec<_>>>()?;
    let c_in = config.c_in_fraction * 2.0 * mu.sqrt();
    let reach = c_in * config.t_end;
    let interior_min = grid
        .nodes()
        .zip(last.values())
        .filter(|(x, _)| x.abs() <= reach)
        .fold(f64::INFINITY, |m, (_, u)| m.min(*u));

    Ok(SpreadReport {
        mu,
        traces,
        speeds,
        envelope,
        c_in,
        interior_min,
        sup_u,
        final_state: last,
        dt: traj.dt,
    })
}
