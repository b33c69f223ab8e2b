//! Periodic grids, fields and the spectral operators built on the DFT.
//!
//! Nodes are `x_j = -P/2 + j h`, `h = P/n`, so `x_{n/2} = 0` and a field is
//! even about the origin iff `u[j] == u[(n - j) % n]`.
//!
//! DFT convention: `U_m = sum_j u_j exp(-2 i pi j m / n)` (unnormalized
//! forward), inverse carries the `1/n`. A constant field `c` therefore maps
//! to `U_0 = c n`. Bin `m` represents the signed wavenumber `m` for
//! `m <= n/2` and `m - n` above; the Nyquist bin is treated as even.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::kernel::{Family, Kernel};

/// Uniform periodic 1-D grid. Structurally compared; never resampled implicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    period: f64,
    n: usize,
}

impl Grid {
    /// `n` must be a power of two and at least 8.
    pub fn new(period: f64, n: usize) -> Result<Self> {
        if !period.is_finite() || period <= 0.0 {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { period, n })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -0.5 * self.period + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// Signed wavenumber index of DFT bin `m`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Frequency `|k|/P` of bin `m`.
    pub fn frequency(&self, m: usize) -> f64 {
        self.wavenumber(m).unsigned_abs() as f64 / self.period
    }

    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                p1: self.period,
                n1: self.n,
                p2: other.period,
                n2: other.n,
            })
        }
    }
}

/// Real values sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite { name: "field value", value: *v });
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness check; used on hot paths whose inputs are already checked.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.len()])
    }

    /// `mean + amplitude cos(2 pi mode x / P)`.
    pub fn cosine(grid: Grid, mean: f64, amplitude: f64, mode: usize) -> Result<Self> {
        let p = grid.period();
        Self::from_fn(grid, |x| mean + amplitude * (2.0 * PI * mode as f64 * x / p).cos())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = j;
            }
        }
        best
    }

    /// Rectangle-rule integral over one period (spectrally exact for periodic data).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.spacing()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| f(*v)).collect())
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.grid.check_same(&other.grid)?;
        Ok(Field::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        ))
    }

    /// `alpha self + beta other`.
    pub fn axpby(&self, alpha: f64, other: &Field, beta: f64) -> Result<Field> {
        self.zip_map(other, |a, b| alpha * a + beta * b)
    }

    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// `sup |self - other|`.
    pub fn distance(&self, other: &Field) -> Result<f64> {
        Ok(self.zip_map(other, |a, b| a - b)?.sup_norm())
    }

    /// Cyclic translation: `result[j] = self[j - offset]`.
    pub fn shifted(&self, offset: i64) -> Field {
        let n = self.values.len() as i64;
        let values = (0..n)
            .map(|j| self.values[(j - offset).rem_euclid(n) as usize])
            .collect();
        Field::from_raw(self.grid, values)
    }

    /// `sup_j |u[j] - u[-j]|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .map(|j| (self.values[j] - self.values[(n - j) % n]).abs())
            .fold(0.0, f64::max)
    }

    /// Projection onto even fields: `(u[j] + u[-j]) / 2`.
    pub fn symmetrized(&self) -> Field {
        let n = self.values.len();
        let values = (0..n)
            .map(|j| 0.5 * (self.values[j] + self.values[(n - j) % n]))
            .collect();
        Field::from_raw(self.grid, values)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.values.len() * 48);
        out.push_str("x,u\n");
        for (x, u) in self.grid.nodes().zip(&self.values) {
            out.push_str(&format!("{x},{u}\n"));
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Raw little-endian snapshot: `period: f64`, `n: u64`, then `n` f64 values.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(16 + 8 * self.values.len());
        buf.extend_from_slice(&self.grid.period.to_le_bytes());
        buf.extend_from_slice(&(self.grid.n as u64).to_le_bytes());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> std::result::Result<Self, String> {
        if bytes.len() < 16 {
            return Err(format!("{} bytes is shorter than the 16-byte header", bytes.len()));
        }
        let period = f64::from_le_bytes(bytes[0..8].try_into().unwrap());
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let expected = n
            .checked_mul(8)
            .and_then(|p| p.checked_add(16))
            .ok_or_else(|| format!("point count {n} overflows"))?;
        if bytes.len() != expected {
            return Err(format!("expected {expected} bytes for n = {n}, found {}", bytes.len()));
        }
        let grid = Grid::new(period, n).map_err(|e| e.to_string())?;
        let values = bytes[16..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Field::new(grid, values).map_err(|e| e.to_string())
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes).map_err(|reason| Error::FieldFormat {
            path: path.to_path_buf(),
            reason,
        })
    }

    /// Reads `x,u` CSV (header optional); the grid period is `n * (x_1 - x_0)`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let bad = |reason: String| Error::FieldFormat {
            path: path.to_path_buf(),
            reason,
        };
        let mut xs = Vec::new();
        let mut us = Vec::new();
        for (line_no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (line_no == 0 && line.starts_with('x')) {
                continue;
            }
            let mut parts = line.split(',');
            let (Some(x), Some(u)) = (parts.next(), parts.next()) else {
                return Err(bad(format!("line {}: expected two columns", line_no + 1)));
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("line {}: {e}", line_no + 1)))
            };
            xs.push(parse(x)?);
            us.push(parse(u)?);
        }
        if xs.len() < 2 {
            return Err(bad("fewer than two rows".into()));
        }
        let h = xs[1] - xs[0];
        let grid = Grid::new(h * xs.len() as f64, xs.len())?;
        Field::new(grid, us)
    }
}

/// Complex DFT coefficients of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Multiplies bin `m` by `symbol(frequency(m))`.
    pub fn scale_by(&mut self, symbol: impl Fn(f64) -> f64) {
        let grid = self.grid;
        for (m, c) in self.coeffs.iter_mut().enumerate() {
            *c *= symbol(grid.frequency(m));
        }
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<usize, Plans>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry(n)
            .or_insert_with(|| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n)))
            .clone()
    })
}

pub fn dft_forward(field: &Field) -> Spectrum {
    let mut coeffs: Vec<Complex64> = field.values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    plans(coeffs.len()).0.process(&mut coeffs);
    Spectrum {
        grid: field.grid,
        coeffs,
    }
}

/// Inverse DFT; the imaginary part (round-off for real symbols) is discarded.
pub fn dft_inverse(spectrum: &Spectrum) -> Field {
    let mut coeffs = spectrum.coeffs.clone();
    let n = coeffs.len();
    plans(n).1.process(&mut coeffs);
    let scale = 1.0 / n as f64;
    Field::from_raw(spectrum.grid, coeffs.iter().map(|c| c.re * scale).collect())
}

/// Applies a real even Fourier multiplier `symbol(|k|/P)` to `u`.
pub fn apply_symbol(u: &Field, symbol: impl Fn(f64) -> f64) -> Field {
    let mut s = dft_forward(u);
    s.scale_by(symbol);
    dft_inverse(&s)
}

/// Full-line convolution of `kernel` with the periodic extension of `u`.
///
/// Multiplies the spectrum by the exact transform `phi_hat(k/P)`. Dirac
/// pairs are applied as exact index shifts and require `shift/h` integral.
pub fn convolve(kernel: &Kernel, u: &Field) -> Result<Field> {
    if let Family::DiracPair { shift } = kernel.family() {
        let s = grid_shift(u.grid(), *shift)?;
        let left = u.shifted(s);
        let right = u.shifted(-s);
        return left.axpby(0.5, &right, 0.5);
    }
    Ok(apply_symbol(u, |xi| kernel.fourier(xi)))
}

/// Number of grid cells in `shift`, if it is an integer multiple of `h`.
pub(crate) fn grid_shift(grid: &Grid, shift: f64) -> Result<i64> {
    let h = grid.spacing();
    let cells = shift / h;
    let rounded = cells.round();
    if (cells - rounded).abs() > 1e-9 * cells.abs().max(1.0) {
        return Err(Error::MisalignedShift { shift, spacing: h });
    }
    Ok(rounded as i64)
}

/// Squared angular wavenumber `(2 pi xi)^2`.
pub fn laplacian_symbol(xi: f64) -> f64 {
    let w = 2.0 * PI * xi;
    w * w
}

/// Spectral `u''`.
pub fn second_derivative(u: &Field) -> Field {
    apply_symbol(u, |xi| -laplacian_symbol(xi))
}

/// Relative magnitude below which DFT bins are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-15;

/// Spectral `u''` with round-off level bins shrunk first: each bin is
/// weighted by `|U|^2 / (|U|^2 + tau^2)`, `tau = NOISE_FLOOR * max |U|`.
///
/// Round-off in the top bins is multiplied by `(pi n / P)^2`; at fine grids
/// that alone puts a sup-norm floor near `1e-9` on `u''` even for a
/// perfectly resolved profile. A hard cutoff makes the residual jump as
/// bins near `tau` cross it, which stalls Newton.
pub fn second_derivative_denoised(u: &Field) -> Field {
    let mut s = dft_forward(u);
    let top = s.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    let tau = NOISE_FLOOR * top;
    let grid = s.grid;
    for (m, c) in s.coeffs.iter_mut().enumerate() {
        let a = c.norm_sqr();
        let w = if a == 0.0 { 0.0 } else { a / (a + tau * tau) };
        *c *= -w * laplacian_symbol(grid.frequency(m));
    }
    dft_inverse(&s)
}

/// Solves `-v'' + v = f` spectrally.
pub fn helmholtz_solve(f: &Field) -> Field {
    apply_symbol(f, |xi| 1.0 / (1.0 + laplacian_symbol(xi)))
}

/// Largest relative magnitude in the top quarter of the spectrum,
/// `max_{|k| >= 3n/8} |U_k| / max_k |U_k|`.
pub fn spectral_tail(u: &Field) -> f64 {
    let s = dft_forward(u);
    let n = u.grid.len();
    let cutoff = (3 * n / 8) as u64;
    let mut top = 0.0_f64;
    let mut tail = 0.0_f64;
    for (m, c) in s.coeffs.iter().enumerate() {
        let a = c.norm();
        top = top.max(a);
        if u.grid.wavenumber(m).unsigned_abs() >= cutoff {
            tail = tail.max(a);
        }
    }
    if top == 0.0 {
        0.0
    } else {
        tail / top
    }
}

/// Cosine coefficients `a_k = (2/L) int_0^L u(x) cos(2 pi k x / L) dx`,
/// `k = 0..=n/2`. Under this normalization a constant `c` has `a_0 = 2c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoefficients {
    pub period: f64,
    pub a: Vec<f64>,
}

impl CosineCoefficients {
    /// `u(x) = a_0/2 + sum_{0<k<n/2} a_k cos(2 pi k x/L) + a_{n/2}/2 cos(pi n x/L)`.
    pub fn reconstruct(&self, grid: Grid) -> Result<Field> {
        if grid.len() / 2 + 1 != self.a.len() || grid.period() != self.period {
            return Err(Error::InvalidArgument(
                "coefficient count or period does not match the grid".into(),
            ));
        }
        let half = grid.len() / 2;
        let p = self.period;
        Field::from_fn(grid, |x| {
            self.a
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let w = if k == 0 || k == half { 0.5 } else { 1.0 };
                    w * a * (2.0 * PI * k as f64 * x / p).cos()
                })
                .sum()
        })
    }
}

/// Asymmetry tolerance, relative to `max(1, sup|u|)`.
pub const EVEN_TOL: f64 = 1e-10;

pub fn cosine_coefficients(u: &Field) -> Result<CosineCoefficients> {
    let asym = u.asymmetry();
    if asym > EVEN_TOL * u.sup_norm().max(1.0) {
        return Err(Error::NotEven { asymmetry: asym });
    }
    let n = u.grid.len();
    let s = dft_forward(u);
    let a = (0..=n / 2)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            2.0 / n as f64 * sign * s.coeffs[k].re
        })
        .collect();
    Ok(CosineCoefficients {
        period: u.grid.period,
        a,
    })
}
