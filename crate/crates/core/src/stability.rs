//! Linearization about the constant state `u = 1`.
//!
//! Two views of the same spectrum: the eigenvalues `lambda_k` of the
//! derivative of the fixed-point map `T` (see [`crate::steady_state::apply_t`]),
//! and the growth rates `s_k` of the linearized evolution
//! `w_t = w_xx - mu (phi * w)`. With `A_k = (2 pi k / L)^2`,
//!
//! ```text
//! lambda_k = (1 - mu phi_hat(k/L)) / (A_k + 1)
//! s_k      = -A_k - mu phi_hat(k/L)
//! ```
//!
//! so `lambda_k - 1 = s_k / (A_k + 1)` and the two agree on which modes are unstable.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::spectral::{convolve, helmholtz_solve, laplacian_symbol, Field, Grid};

/// `(2 pi k / L)^2`.
fn mode_stiffness(k: usize, period: f64) -> f64 {
    laplacian_symbol(k as f64 / period)
}

/// Eigenvalue of the fixed-point derivative on `cos(2 pi k x / L)`.
pub fn dt_eigenvalue(mu: f64, k: usize, period: f64, kernel: &Kernel) -> f64 {
    let a = mode_stiffness(k, period);
    (1.0 - mu * kernel.fourier(k as f64 / period)) / (a + 1.0)
}

/// Exponential rate of mode `k` under the linearized evolution.
pub fn pde_growth_rate(mu: f64, k: usize, period: f64, kernel: &Kernel) -> f64 {
    -mode_stiffness(k, period) - mu * kernel.fourier(k as f64 / period)
}

/// Competition strength above which mode `k0` destabilizes.
pub fn mu_star(kernel: &Kernel, period: f64, k0: usize) -> Result<f64> {
    let value = kernel.fourier(k0 as f64 / period);
    if k0 == 0 || value >= 0.0 {
        return Err(Error::NotDestabilizable { k0, value });
    }
    Ok(mode_stiffness(k0, period) / value.abs())
}

/// The eigenvalue on the destabilizing mode `k0`; exceeds 1 iff `mu > mu_star`.
pub fn lambda_mu(mu: f64, kernel: &Kernel, period: f64, k0: usize) -> Result<f64> {
    mu_star(kernel, period, k0)?;
    Ok(dt_eigenvalue(mu, k0, period, kernel))
}

/// Per-mode spectrum for `k = 0..=k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpectrum {
    pub period: f64,
    pub mu: f64,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    /// Indices with `lambda_k > 1`.
    pub unstable_modes: Vec<usize>,
}

impl ModeSpectrum {
    pub fn new(mu: f64, period: f64, kernel: &Kernel, k_max: usize) -> Self {
        let lambda: Vec<f64> = (0..=k_max)
            .map(|k| dt_eigenvalue(mu, k, period, kernel))
            .collect();
        let s = (0..=k_max)
            .map(|k| pde_growth_rate(mu, k, period, kernel))
            .collect();
        let unstable_modes = (0..=k_max).filter(|&k| lambda[k] > 1.0).collect();
        Self {
            period,
            mu,
            lambda,
            s,
            unstable_modes,
        }
    }

    /// `max_k |lambda_k|`.
    pub fn spectral_radius(&self) -> f64 {
        self.lambda.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// The sufficient small-`mu` contraction bound `min(4 pi^2 / L^2, 1/2)`.
pub fn contraction_bound(period: f64) -> f64 {
    mode_stiffness(1, period).min(0.5)
}

/// Exact stability boundaries over `k <= k_max`, reported separately from
/// the sufficient [`contraction_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Smallest `mu` at which some `s_k > 0`, with the mode that crosses first.
    pub pde: Option<(f64, usize)>,
    /// Supremum of `mu` with `max_k |lambda_k| < 1`.
    pub operator: f64,
}

pub fn sharp_thresholds(kernel: &Kernel, period: f64, k_max: usize) -> Thresholds {
    let mut pde: Option<(f64, usize)> = None;
    // lambda_0 = 1 - mu leaves (-1, 1) at mu = 2.
    let mut operator: f64 = 2.0;
    for k in 1..=k_max {
        let a = mode_stiffness(k, period);
        let f = kernel.fourier(k as f64 / period);
        if f < 0.0 {
            let m = a / f.abs();
            if pde.map_or(true, |(best, _)| m < best) {
                pde = Some((m, k));
            }
            operator = operator.min(m);
        } else if f > 0.0 {
            operator = operator.min((a + 2.0) / f);
        }
    }
    Thresholds { pde, operator }
}

/// Orthonormal basis of even grid functions: `e_0`, `e_{n/2}` and
/// `(e_j + e_{n-j}) / sqrt 2` for `0 < j < n/2`.
fn even_basis_vector(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if i == 0 || i == n / 2 {
        v[i] = 1.0;
    } else {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        v[i] = w;
        v[n - i] = w;
    }
    v
}

/// `w = DT(1) u`, the solution of `-w'' + w = u - mu (phi * u)`.
fn apply_derivative_at_one(u: &Field, mu: f64, kernel: &Kernel) -> Result<Field> {
    let rhs = u.axpby(1.0, &convolve(kernel, u)?, -mu)?;
    Ok(helmholtz_solve(&rhs))
}

fn assemble(
    grid: Grid,
    mu: f64,
    kernel: &Kernel,
    basis: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    let m = basis.len();
    let mut mat = DMatrix::zeros(m, m);
    for (i, b) in basis.iter().enumerate() {
        let image = apply_derivative_at_one(&Field::from_raw(grid, b.clone()), mu, kernel)?;
        for (j, c) in basis.iter().enumerate() {
            mat[(j, i)] = c.iter().zip(image.values()).map(|(x, y)| x * y).sum();
        }
    }
    // Symmetric up to round-off; average away the asymmetric part.
    Ok((&mat + mat.transpose()) * 0.5)
}

fn eigenpairs(grid: Grid, mat: DMatrix<f64>, basis: &[Vec<f64>]) -> Vec<(f64, Field)> {
    let eig = SymmetricEigen::new(mat);
    let mut pairs: Vec<(f64, Field)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(c, &value)| {
            let mut v = vec![0.0; grid.len()];
            for (i, b) in basis.iter().enumerate() {
                let w = eig.eigenvectors[(i, c)];
                for (vj, bj) in v.iter_mut().zip(b) {
                    *vj += w * bj;
                }
            }
            (value, Field::from_raw(grid, v))
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs
}

/// Eigenpairs of `DT(1)` assembled as a dense matrix on even grid
/// functions, sorted by descending eigenvalue. Eigenvectors are unit
/// vectors in the Euclidean grid norm.
pub fn numeric_dt_eigenpairs(mu: f64, grid: Grid, kernel: &Kernel) -> Result<Vec<(f64, Field)>> {
    let n = grid.len();
    let basis: Vec<Vec<f64>> = (0..=n / 2).map(|i| even_basis_vector(n, i)).collect();
    let mat = assemble(grid, mu, kernel, &basis)?;
    Ok(eigenpairs(grid, mat, &basis))
}

/// Eigenvalues of `DT(1)` on even grid functions, descending.
pub fn numeric_dt_spectrum(mu: f64, grid: Grid, kernel: &Kernel) -> Result<Vec<f64>> {
    Ok(numeric_dt_eigenpairs(mu, grid, kernel)?
        .into_iter()
        .map(|(v, _)| v)
        .collect())
}

/// Eigenvalues of `DT(1)` on all grid functions, sine modes included, descending.
pub fn numeric_dt_spectrum_full(mu: f64, grid: Grid, kernel: &Kernel) -> Result<Vec<f64>> {
    let n = grid.len();
    let basis: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    let mat = assemble(grid, mu, kernel, &basis)?;
    let mut values: Vec<f64> = SymmetricEigen::new(mat).eigenvalues.iter().cloned().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}
