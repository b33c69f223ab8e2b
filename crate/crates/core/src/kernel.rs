//! Interaction kernels: closed-form densities, their Fourier transforms
//! and executable checks of the admissibility hypotheses.
//!
//! The transform convention is `phi_hat(xi) = int phi(x) exp(-2 i pi xi x) dx`,
//! so a unit-mass kernel has `phi_hat(0) = 1`. Every shipped family is even,
//! which makes the transform real.

use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};

/// Values of `phi_hat` below `-TOL_FOURIER` count as negative.
pub const TOL_FOURIER: f64 = 1e-12;

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Kernel family together with its defining parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `exp(-x^2/s^2) / (s sqrt(pi))`.
    Gaussian { width: f64 },
    /// Uniform density `1/(2a)` on `[-a, a]`.
    TopHat { half_width: f64 },
    /// Difference-of-Gaussians family whose transform changes sign.
    PhiBeta { beta: f64 },
    /// `(delta_{-l} + delta_{l}) / 2`; atomic, no density.
    DiracPair { shift: f64 },
    /// One period of an already-periodized kernel sampled at
    /// `x_j = -P/2 + j P/n`, normalized to unit trapezoid mass.
    Tabulated { period: f64, values: Vec<f64> },
}

/// An admissible convolution kernel. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: Family,
    window: Option<(f64, f64)>,
}

impl Kernel {
    pub fn gaussian(width: f64) -> Result<Self> {
        positive("width", width)?;
        Self::build(Family::Gaussian { width })
    }

    pub fn top_hat(half_width: f64) -> Result<Self> {
        positive("half_width", half_width)?;
        Self::build(Family::TopHat { half_width })
    }

    /// Requires `beta > 1`, which also guarantees `c_beta > 0`.
    pub fn phi_beta(beta: f64) -> Result<Self> {
        ensure_finite("beta", beta)?;
        if beta <= 1.0 {
            return Err(Error::InvalidKernel(format!(
                "phi_beta requires beta > 1, got {beta}"
            )));
        }
        let c = phi_beta_norm(beta);
        if c <= 0.0 {
            return Err(Error::InvalidKernel(format!("c_beta = {c} is not positive")));
        }
        let kernel = Self::build(Family::PhiBeta { beta })?;
        // Sample densely near the origin, where the negative Gaussian lives.
        for i in 0..=4000 {
            let s = i as f64 / 4000.0;
            let x = 10.0 * s * s;
            if kernel.density(x)? <= 0.0 {
                return Err(Error::InvalidKernel(format!(
                    "phi_beta density not positive at x = {x}"
                )));
            }
        }
        Ok(kernel)
    }

    pub fn dirac_pair(shift: f64) -> Result<Self> {
        positive("shift", shift)?;
        Ok(Self {
            family: Family::DiracPair { shift },
            window: None,
        })
    }

    /// Builds a tabulated kernel from samples on `x_j = -P/2 + j P/n`.
    ///
    /// Samples must be nonnegative and even (`v[j] == v[n-j]`); they are
    /// rescaled so that the trapezoid mass over one period is exactly one.
    pub fn tabulated(period: f64, samples: Vec<f64>) -> Result<Self> {
        positive("period", period)?;
        let n = samples.len();
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidKernel(format!(
                "tabulated kernel needs an even number (>= 4) of samples, got {n}"
            )));
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidKernel(format!(
                "tabulated samples must be finite and nonnegative, found {bad}"
            )));
        }
        let peak = samples.iter().cloned().fold(0.0, f64::max);
        let asym = (1..n)
            .map(|j| (samples[j] - samples[n - j]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-10 * peak.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidKernel(format!(
                "tabulated kernel must be even, asymmetry {asym:e}"
            )));
        }
        let h = period / n as f64;
        let mass: f64 = samples.iter().sum::<f64>() * h;
        if mass <= 0.0 {
            return Err(Error::InvalidKernel("tabulated kernel has zero mass".into()));
        }
        let values = samples.into_iter().map(|v| v / mass).collect();
        Self::build(Family::Tabulated { period, values })
    }

    fn build(family: Family) -> Result<Self> {
        let mut kernel = Self {
            family,
            window: None,
        };
        kernel.window = Some(kernel.compute_window()?);
        Ok(kernel)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.family, Family::DiracPair { .. })
    }

    /// Short human-readable label, e.g. `phi_beta(beta=100)`.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Gaussian { width } => format!("gaussian(s={width})"),
            Family::TopHat { half_width } => format!("tophat(a={half_width})"),
            Family::PhiBeta { beta } => format!("phi_beta(beta={beta})"),
            Family::DiracPair { shift } => format!("dirac_pair(shift={shift})"),
            Family::Tabulated { period, values } => {
                format!("tabulated(period={period}, n={})", values.len())
            }
        }
    }

    /// Pointwise density `phi(x)`.
    pub fn density(&self, x: f64) -> Result<f64> {
        ensure_finite("x", x)?;
        Ok(match &self.family {
            Family::Gaussian { width } => {
                let z = x / width;
                (-z * z).exp() / (width * SQRT_PI)
            }
            Family::TopHat { half_width } => {
                if x.abs() <= *half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
            Family::PhiBeta { beta } => {
                let x2 = x * x;
                ((-x2).exp() - (-beta * x2).exp() + (-beta * beta * x2).exp())
                    / (phi_beta_norm(*beta) * SQRT_PI)
            }
            Family::DiracPair { .. } => return Err(Error::AtomicKernel),
            Family::Tabulated { period, values } => interp_periodic(*period, values, x),
        })
    }

    /// Closed-form Fourier transform `phi_hat(xi)`.
    pub fn fourier(&self, xi: f64) -> f64 {
        match &self.family {
            Family::Gaussian { width } => {
                let z = PI * width * xi;
                (-z * z).exp()
            }
            Family::TopHat { half_width } => {
                let z = 2.0 * PI * half_width * xi;
                if z == 0.0 {
                    1.0
                } else {
                    z.sin() / z
                }
            }
            Family::PhiBeta { beta } => {
                let q = PI * PI * xi * xi;
                ((-q).exp() - (-q / beta).exp() / beta.sqrt() + (-q / (beta * beta)).exp() / beta)
                    / phi_beta_norm(*beta)
            }
            Family::DiracPair { shift } => (2.0 * PI * shift * xi).cos(),
            Family::Tabulated { period, values } => {
                let n = values.len();
                let h = period / n as f64;
                if xi == 0.0 {
                    return values.iter().sum::<f64>() * h;
                }
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let x = -0.5 * period + j as f64 * h;
                        v * (2.0 * PI * xi * x).cos()
                    })
                    .sum::<f64>()
                    * h
            }
        }
    }

    /// A pair `(sigma, eta)` with `phi >= eta` on `(-sigma, sigma)`.
    ///
    /// Sigma is the half-width at half-maximum (the support half-width for
    /// top-hats) and `eta = phi(sigma)`.
    pub fn window_bound(&self) -> Result<(f64, f64)> {
        self.window.ok_or_else(|| {
            Error::WindowViolated(format!(
                "{} has no positive lower bound on any interval around 0",
                self.label()
            ))
        })
    }

    fn compute_window(&self) -> Result<(f64, f64)> {
        match &self.family {
            Family::Gaussian { width } => {
                let sigma = width * std::f64::consts::LN_2.sqrt();
                Ok((sigma, self.density(sigma)?))
            }
            Family::TopHat { half_width } => Ok((*half_width, 0.5 / half_width)),
            Family::PhiBeta { beta } => {
                let half = 0.5 * self.density(0.0)?;
                let step = 0.01 / beta;
                let mut lo = 0.0;
                let mut hi = step;
                while self.density(hi)? >= half {
                    lo = hi;
                    hi += step;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.density(mid)? >= half {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok((lo, self.density(lo)?.min(half)))
            }
            Family::DiracPair { .. } => Err(Error::WindowViolated(
                "atomic kernel has no density near 0".into(),
            )),
            Family::Tabulated { period, values } => tabulated_window(*period, values),
        }
    }

    /// Scans `k = 0..=k_max` for the single-negative-mode condition at period `period`.
    pub fn check_hypothesis(&self, period: f64, k_max: usize) -> HypothesisReport {
        let values: Vec<f64> = (0..=k_max)
            .map(|k| self.fourier(k as f64 / period))
            .collect();
        let negatives: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v < -TOL_FOURIER)
            .map(|(k, _)| k)
            .collect();
        let (satisfied, k0) = match negatives.as_slice() {
            [k0] => (true, Some(*k0)),
            [first, ..] => (false, Some(*first)),
            [] => (false, None),
        };
        HypothesisReport {
            satisfied,
            k0: if satisfied { k0 } else { None },
            period,
            k_max,
            values,
        }
    }

    /// Largest `xi*` in `(0, xi_max]` such that `phi_hat < 0` just left of it
    /// and `phi_hat >= 0` on `[xi*, xi_max]`.
    pub fn last_negative_crossing(&self, xi_max: f64, samples: usize) -> Option<f64> {
        let dx = xi_max / samples as f64;
        let mut last = None;
        for i in 0..samples {
            let a = i as f64 * dx;
            let b = a + dx;
            if self.fourier(a) < 0.0 && self.fourier(b) >= 0.0 {
                last = Some((a, b));
            }
        }
        if self.fourier(xi_max) < 0.0 {
            return None;
        }
        let (mut lo, mut hi) = last?;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.fourier(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(hi)
    }

    /// A period `L` with `1/L < xi* < 2/L` (the midpoint `L = 1.5/xi*`), for
    /// kernels whose transform is eventually nonnegative after a negative band.
    /// Returns `None` when no such crossing exists.
    pub fn single_mode_period(&self) -> Option<f64> {
        let xi_max = match &self.family {
            Family::PhiBeta { beta } => 2.0 * (beta * beta.ln()).sqrt() + 2.0,
            Family::Gaussian { .. } | Family::DiracPair { .. } | Family::TopHat { .. } => {
                return None
            }
            Family::Tabulated { period, values } => 0.5 * values.len() as f64 / period,
        };
        let xi_star = self.last_negative_crossing(xi_max, 20_000)?;
        let period = 1.5 / xi_star;
        (self.fourier(1.0 / period) < 0.0).then_some(period)
    }
}

/// Outcome of [`Kernel::check_hypothesis`].
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub satisfied: bool,
    /// The unique negative index; `None` unless `satisfied`.
    pub k0: Option<usize>,
    pub period: f64,
    pub k_max: usize,
    /// `phi_hat(k / period)` for `k = 0..=k_max`.
    pub values: Vec<f64>,
}

impl HypothesisReport {
    pub fn negative_count(&self) -> usize {
        self.values.iter().filter(|v| **v < -TOL_FOURIER).count()
    }
}

pub(crate) fn phi_beta_norm(beta: f64) -> f64 {
    1.0 - 1.0 / beta.sqrt() + 1.0 / beta
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value <= 0.0 {
        return Err(Error::InvalidKernel(format!("{name} must be positive, got {value}")));
    }
    Ok(())
}

fn interp_periodic(period: f64, values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let h = period / n as f64;
    let s = (x + 0.5 * period).rem_euclid(period) / h;
    let j = (s.floor() as usize).min(n - 1);
    let frac = s - j as f64;
    values[j] * (1.0 - frac) + values[(j + 1) % n] * frac
}

fn tabulated_window(period: f64, values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    let h = period / n as f64;
    let center = n / 2;
    let peak = values[center];
    if peak <= 0.0 {
        return Err(Error::WindowViolated(
            "tabulated kernel vanishes at x = 0".into(),
        ));
    }
    let half = 0.5 * peak;
    // Walk right (the kernel is even) until the linear interpolant drops below half.
    for m in 1..n / 2 {
        let v = values[center + m];
        if v < half {
            let prev = values[center + m - 1];
            let frac = (prev - half) / (prev - v);
            let sigma = (m as f64 - 1.0 + frac) * h;
            return Ok((sigma, half));
        }
    }
    // Never halves: use the widest interior window and its minimum.
    let sigma = (n / 2 - 1) as f64 * h;
    let eta = values[1..n].iter().cloned().fold(f64::INFINITY, f64::min);
    if eta <= 0.0 {
        return Err(Error::WindowViolated("tabulated kernel touches zero".into()));
    }
    Ok((sigma, eta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_peak() {
        let k = Kernel::gaussian(1.0).unwrap();
        assert_relative_eq!(k.density(0.0).unwrap(), 0.564_189_583_547_756_3, epsilon = 1e-15);
    }

    #[test]
    fn phi_beta_peak_at_beta_4() {
        let k = Kernel::phi_beta(4.0).unwrap();
        // c_4 = 3/4
        assert_relative_eq!(
            k.density(0.0).unwrap(),
            1.0 / (0.75 * SQRT_PI),
            epsilon = 1e-15
        );
        assert_relative_eq!(k.density(0.0).unwrap(), 0.752_252_778_063_675, epsilon = 1e-14);
    }

    #[test]
    fn top_hat_outside_support() {
        let k = Kernel::top_hat(2.0).unwrap();
        assert_eq!(k.density(3.0).unwrap(), 0.0);
        assert_eq!(k.density(-1.0).unwrap(), 0.25);
    }

    #[test]
    fn dirac_has_no_density_or_window() {
        let k = Kernel::dirac_pair(1.0).unwrap();
        assert!(matches!(k.density(0.0), Err(Error::AtomicKernel)));
        assert!(matches!(k.window_bound(), Err(Error::WindowViolated(_))));
    }

    #[test]
    fn non_finite_x_is_rejected() {
        let k = Kernel::gaussian(1.0).unwrap();
        assert!(matches!(k.density(f64::NAN), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn phi_beta_rejects_small_beta() {
        assert!(Kernel::phi_beta(1.0).is_err());
        assert!(Kernel::phi_beta(0.5).is_err());
        assert!(Kernel::phi_beta(1.0001).is_ok());
    }

    #[test]
    fn transform_is_one_at_origin() {
        for k in [
            Kernel::gaussian(0.7).unwrap(),
            Kernel::top_hat(2.0).unwrap(),
            Kernel::phi_beta(100.0).unwrap(),
            Kernel::dirac_pair(1.3).unwrap(),
        ] {
            assert_eq!(k.fourier(0.0), 1.0, "{}", k.label());
        }
    }

    #[test]
    fn top_hat_first_zero() {
        let a = 1.7;
        let k = Kernel::top_hat(a).unwrap();
        assert!(k.fourier(1.0 / (2.0 * a)).abs() < 1e-15);
    }

    #[test]
    fn phi_beta_transform_at_sqrt_beta() {
        // Closed form at xi = sqrt(beta) versus the generic evaluation.
        for beta in [100.0_f64, 1e9, 1e10] {
            let k = Kernel::phi_beta(beta).unwrap();
            let c = phi_beta_norm(beta);
            let expected = ((-beta * PI * PI).exp() - (-PI * PI).exp() / beta.sqrt()
                + (-PI * PI / beta).exp() / beta)
                / c;
            assert_relative_eq!(k.fourier(beta.sqrt()), expected, max_relative = 1e-12);
        }
        // Negative only once beta is large enough for the middle term to dominate.
        assert!(Kernel::phi_beta(100.0).unwrap().fourier(10.0) > 0.0);
        assert!(Kernel::phi_beta(1e10).unwrap().fourier(1e5) < 0.0);
    }

    #[test]
    fn gaussian_window_is_hwhm() {
        let k = Kernel::gaussian(1.0).unwrap();
        let (sigma, eta) = k.window_bound().unwrap();
        assert_relative_eq!(sigma, 0.832_554_611_157_697_8, epsilon = 1e-15);
        assert_relative_eq!(eta, 0.282_094_791_773_878_14, epsilon = 1e-15);
        assert_relative_eq!(k.density(sigma).unwrap(), 0.5 * k.density(0.0).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn top_hat_window() {
        let k = Kernel::top_hat(3.0).unwrap();
        assert_eq!(k.window_bound().unwrap(), (3.0, 1.0 / 6.0));
    }

    #[test]
    fn phi_beta_window_is_valid() {
        for beta in [2.0, 10.0, 100.0, 1e4] {
            let k = Kernel::phi_beta(beta).unwrap();
            let (sigma, eta) = k.window_bound().unwrap();
            assert!(sigma > 0.0 && eta > 0.0);
            for i in 0..=1000 {
                let x = sigma * (i as f64 / 1000.0) * (1.0 - 1e-12);
                assert!(k.density(x).unwrap() >= eta * (1.0 - 1e-12), "beta {beta} x {x}");
            }
        }
    }

    #[test]
    fn gaussian_never_satisfies_hypothesis() {
        let k = Kernel::gaussian(1.0).unwrap();
        let r = k.check_hypothesis(10.0, 64);
        assert!(!r.satisfied);
        assert_eq!(r.k0, None);
        assert_eq!(r.values.len(), 65);
    }

    #[test]
    fn dirac_pair_alternates() {
        let k = Kernel::dirac_pair(1.0).unwrap();
        let r = k.check_hypothesis(2.0, 8);
        assert!(!r.satisfied);
        for (k, v) in r.values.iter().enumerate() {
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - expected).abs() < 1e-12);
        }
        assert_eq!(r.negative_count(), 4);
    }

    #[test]
    fn phi_beta_single_mode_period() {
        let k = Kernel::phi_beta(100.0).unwrap();
        let period = k.single_mode_period().unwrap();
        // xi* = 4.854453823571483 from an independent root solve.
        assert_relative_eq!(period, 1.5 / 4.854_453_823_571_483, max_relative = 1e-10);
        let r = k.check_hypothesis(period, 256);
        assert!(r.satisfied);
        assert_eq!(r.k0, Some(1));
        assert!(Kernel::gaussian(1.0).unwrap().single_mode_period().is_none());
    }

    #[test]
    fn tabulated_is_normalized() {
        let period = 8.0;
        let n = 64;
        let h = period / n as f64;
        let samples: Vec<f64> = (0..n)
            .map(|j| {
                let x = -0.5 * period + j as f64 * h;
                3.0 * (-x * x).exp()
            })
            .collect();
        let k = Kernel::tabulated(period, samples).unwrap();
        assert!((k.fourier(0.0) - 1.0).abs() < 1e-10);
        let (sigma, eta) = k.window_bound().unwrap();
        assert!(sigma > 0.7 && sigma < 0.9, "{sigma}");
        assert!(eta > 0.0);
        // Interpolation reproduces the nodes; the e^{-16} tail cut off at x = 4 shifts the mass.
        assert_relative_eq!(k.density(0.0).unwrap(), 1.0 / SQRT_PI, max_relative = 1e-7);
    }

    #[test]
    fn tabulated_rejects_odd_or_negative() {
        assert!(Kernel::tabulated(1.0, vec![0.0, 1.0, 2.0, 3.0]).is_err());
        assert!(Kernel::tabulated(1.0, vec![1.0, -1.0, 2.0, -1.0]).is_err());
    }
}
