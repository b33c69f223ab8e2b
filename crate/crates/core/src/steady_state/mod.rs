//! Periodic steady states of `u'' + mu u (1 - phi * u) = 0` by Newton iteration.

mod gmres;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::spectral::{
    convolve, dft_forward, dft_inverse, helmholtz_solve, laplacian_symbol, second_derivative,
    second_derivative_denoised, Field, Grid,
};
use crate::stability::mu_star;

/// `u'' + mu u (1 - phi * u)`, with `u''` taken after shrinking round-off
/// level bins (see [`second_derivative_denoised`]).
pub fn residual(u: &Field, mu: f64, kernel: &Kernel) -> Result<Field> {
    let c = convolve(kernel, u)?;
    let reaction = u.zip_map(&c, |a, b| mu * a * (1.0 - b))?;
    second_derivative_denoised(u).axpby(1.0, &reaction, 1.0)
}

/// The fixed-point map: `v` solving `-v'' + v = u + mu u (1 - phi * u)`.
pub fn apply_t(u: &Field, mu: f64, kernel: &Kernel) -> Result<Field> {
    let c = convolve(kernel, u)?;
    let rhs = u.zip_map(&c, |a, b| a + mu * a * (1.0 - b))?;
    Ok(helmholtz_solve(&rhs))
}

/// An accepted solution of the steady equation.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub u: Field,
    pub mu: f64,
    pub residual_norm: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `max_u - min_u < 1e-8`.
    pub is_constant: bool,
    pub newton_steps: usize,
    /// Residual sup-norm before each Newton step, and after the last.
    pub history: Vec<f64>,
}

impl SteadyState {
    pub fn amplitude(&self) -> f64 {
        self.max_u - self.min_u
    }
}

/// How Newton corrections are solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolver {
    /// Dense LU when `n <= 256`, otherwise GMRES.
    Auto,
    Dense,
    Gmres,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    /// Project every iterate onto even fields.
    pub even_restrict: bool,
    pub tol: f64,
    pub max_steps: usize,
    pub solver: LinearSolver,
    /// Deflate the constant root `u = 1`, so Newton started near it is
    /// pushed toward a different solution.
    pub deflate_constant: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            even_restrict: true,
            tol: 1e-10,
            max_steps: 50,
            solver: LinearSolver::Auto,
            deflate_constant: false,
        }
    }
}

pub const CONSTANT_TOL: f64 = 1e-8;

/// Newton iteration on [`residual`] from `init`; the period is that of `init`'s grid.
pub fn find_steady(mu: f64, kernel: &Kernel, init: &Field, opts: &NewtonOptions) -> Result<SteadyState> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    if init.min() <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "initial guess must be positive, min = {}",
            init.min()
        )));
    }
    let grid = *init.grid();
    let mut u = if opts.even_restrict { init.symmetrized() } else { init.clone() };
    let mut history = Vec::new();
    for step in 0..=opts.max_steps {
        let f = residual(&u, mu, kernel)?;
        let r = f.sup_norm();
        history.push(r);
        if !r.is_finite() {
            break;
        }
        if r < opts.tol {
            let (min_u, max_u) = (u.min(), u.max());
            return Ok(SteadyState {
                u,
                mu,
                residual_norm: r,
                min_u,
                max_u,
                is_constant: max_u - min_u < CONSTANT_TOL,
                newton_steps: step,
                history,
            });
        }
        if step == opts.max_steps {
            break;
        }
        let mut delta = newton_correction(&u, &f, mu, kernel, grid, opts)?;
        if opts.deflate_constant {
            delta = deflate(&u, delta)?;
        }
        u = u.axpby(1.0, &delta, 1.0)?;
        if opts.even_restrict {
            u = u.symmetrized();
        }
        let min_u = u.min();
        if min_u < 0.0 {
            return Err(Error::LeftPositiveCone { step: step + 1, min_u });
        }
    }
    Err(Error::NoConvergence {
        steps: opts.max_steps,
        history,
    })
}

/// Rescales a Newton step for `F` into the step for `m(u) F(u)` with
/// `m(u) = 1/|u - 1|^2 + 1`: `d / (1 - (grad m . d) / m)`.
fn deflate(u: &Field, delta: Field) -> Result<Field> {
    let shifted = u.map(|v| v - 1.0);
    let h = u.grid().spacing();
    let d2 = h * shifted.dot(&shifted)?;
    if d2 == 0.0 {
        return Ok(delta);
    }
    let m = 1.0 / d2 + 1.0;
    let grad_dot = -2.0 * h * shifted.dot(&delta)? / (d2 * d2);
    Ok(delta.map(|v| v / (1.0 - grad_dot / m)))
}

/// Jacobian action `d'' + mu d (1 - phi * u) - mu u (phi * d)`.
fn jacobian_apply(u: &Field, conv_u: &Field, d: &Field, mu: f64, kernel: &Kernel) -> Result<Field> {
    let conv_d = convolve(kernel, d)?;
    let local = d.zip_map(conv_u, |a, c| mu * a * (1.0 - c))?;
    let coupling = u.zip_map(&conv_d, |a, c| mu * a * c)?;
    second_derivative(d)
        .axpby(1.0, &local, 1.0)?
        .axpby(1.0, &coupling, -1.0)
}

/// Inverse of the preconditioner `d -> d'' - mu d`, diagonal in Fourier space.
fn precondition_inverse(d: &Field, mu: f64) -> Field {
    let mut s = dft_forward(d);
    s.scale_by(|xi| -1.0 / (laplacian_symbol(xi) + mu));
    dft_inverse(&s)
}

fn newton_correction(
    u: &Field,
    f: &Field,
    mu: f64,
    kernel: &Kernel,
    grid: Grid,
    opts: &NewtonOptions,
) -> Result<Field> {
    let conv_u = convolve(kernel, u)?;
    let dense = match opts.solver {
        LinearSolver::Dense => true,
        LinearSolver::Gmres => false,
        LinearSolver::Auto => grid.len() <= 256,
    };
    // Odd round-off in the residual would otherwise excite the translation
    // mode `u'`, which the Jacobian annihilates.
    let even = |f: Field| if opts.even_restrict { f.symmetrized() } else { f };
    let rhs = even(f.map(|v| -v));
    let delta = if dense {
        dense_solve(u, &conv_u, &rhs, mu, kernel, grid, opts.even_restrict)?
    } else {
        let apply = |y: &[f64]| -> Result<Vec<f64>> {
            let d = precondition_inverse(&Field::from_raw(grid, y.to_vec()), mu);
            Ok(even(jacobian_apply(u, &conv_u, &d, mu, kernel)?).into_values())
        };
        let n = grid.len();
        let out = gmres::gmres(apply, rhs.values(), 1e-13, n.min(1024), 4 * n)?;
        let absolute = out.relative_residual * rhs.sup_norm() * (n as f64).sqrt();
        if !(out.relative_residual < 1e-8 || absolute < 1e-3 * opts.tol) {
            return Err(Error::LinearSolve(format!(
                "GMRES stalled at relative residual {:e} after {} iterations",
                out.relative_residual, out.iterations
            )));
        }
        precondition_inverse(&Field::from_raw(grid, out.x), mu)
    };
    Ok(if opts.even_restrict { delta.symmetrized() } else { delta })
}

/// Column `i` of the basis used for the dense solve: even nodal pairs, or unit vectors.
fn basis_vector(n: usize, i: usize, even: bool) -> Vec<f64> {
    let mut v = vec![0.0; n];
    if even && i != 0 && i != n / 2 {
        v[i] = std::f64::consts::FRAC_1_SQRT_2;
        v[n - i] = std::f64::consts::FRAC_1_SQRT_2;
    } else {
        v[i] = 1.0;
    }
    v
}

fn dense_solve(
    u: &Field,
    conv_u: &Field,
    rhs: &Field,
    mu: f64,
    kernel: &Kernel,
    grid: Grid,
    even: bool,
) -> Result<Field> {
    let n = grid.len();
    let m = if even { n / 2 + 1 } else { n };
    let basis: Vec<Vec<f64>> = (0..m).map(|i| basis_vector(n, i, even)).collect();
    let project = |v: &[f64]| -> DVector<f64> {
        DVector::from_iterator(m, basis.iter().map(|b| b.iter().zip(v).map(|(x, y)| x * y).sum()))
    };
    let mut mat = DMatrix::zeros(m, m);
    for (i, b) in basis.iter().enumerate() {
        let image = jacobian_apply(u, conv_u, &Field::from_raw(grid, b.clone()), mu, kernel)?;
        mat.set_column(i, &project(image.values()));
    }
    let coeffs = mat
        .lu()
        .solve(&project(rhs.values()))
        .ok_or_else(|| Error::LinearSolve("singular Jacobian".into()))?;
    let mut out = vec![0.0; n];
    for (c, b) in coeffs.iter().zip(&basis) {
        for (o, bj) in out.iter_mut().zip(b) {
            *o += c * bj;
        }
    }
    Ok(Field::from_raw(grid, out))
}

/// Marches `mu` from `mu_from` to `mu_to` in `steps` equal increments
/// (`steps + 1` states), warm-starting each solve from the previous state.
/// The first solve is seeded with `1 + 0.05 cos(2 pi k0 x / L)`.
pub fn continuation(
    kernel: &Kernel,
    grid: Grid,
    k0: usize,
    mu_from: f64,
    mu_to: f64,
    steps: usize,
    opts: &NewtonOptions,
) -> Result<Vec<SteadyState>> {
    let threshold = mu_star(kernel, grid.period(), k0)?;
    if !(mu_from > threshold) {
        return Err(Error::InvalidArgument(format!(
            "continuation must start above the threshold {threshold}, got {mu_from}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("steps must be at least 2, got {steps}")));
    }
    let mut guess = Field::cosine(grid, 1.0, 0.05, k0)?;
    let mut branch = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let mu = mu_from + i as f64 * (mu_to - mu_from) / steps as f64;
        let state = find_steady(mu, kernel, &guess, opts).map_err(|e| Error::AtParameter {
            mu,
            source: Box::new(e),
        })?;
        guess = state.u.clone();
        branch.push(state);
    }
    Ok(branch)
}

/// Checks on an accepted state: positivity and the maximum-point
/// inequality `(phi * u)(x_max) <= 1` implied by `u''(x_max) <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub min_u: f64,
    pub max_u: f64,
    pub argmax: f64,
    pub conv_at_max: f64,
    pub holds: bool,
}

pub fn verify_bounds(state: &SteadyState, kernel: &Kernel) -> Result<BoundsReport> {
    let j = state.u.argmax();
    let conv_at_max = convolve(kernel, &state.u)?.values()[j];
    Ok(BoundsReport {
        min_u: state.min_u,
        max_u: state.max_u,
        argmax: state.u.grid().node(j),
        conv_at_max,
        holds: state.min_u > 0.0 && conv_at_max <= 1.0 + 1e-8,
    })
}
