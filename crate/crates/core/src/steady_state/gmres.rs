//! Restarted GMRES with Givens rotations on plain vectors.

pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` from `x = 0`, stopping at `|b - A x| <= rtol |b|`.
pub(crate) fn gmres<E>(
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>, E>,
    b: &[f64],
    rtol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<GmresOutcome, E> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x, relative_residual: 0.0, iterations: 0 });
    }
    let mut iterations = 0;
    let mut r = b.to_vec();
    let mut beta = bnorm;
    while iterations < max_iter {
        let m = restart.min(max_iter - iterations);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![0.0; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = apply(&basis[j])?;
            iterations += 1;
            // Modified Gram-Schmidt, twice for stability.
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(&w, q);
                    h[i][j] += c;
                    for (wk, qk) in w.iter_mut().zip(q) {
                        *wk -= c * qk;
                    }
                }
            }
            let wn = norm(&w);
            h[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                used = j;
                break;
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            if g[j + 1].abs() <= rtol * bnorm || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // Back substitution on the triangular system.
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (i, yi) in y.iter().enumerate() {
            for (xk, qk) in x.iter_mut().zip(&basis[i]) {
                *xk += yi * qk;
            }
        }
        let ax = apply(&x)?;
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        beta = norm(&r);
        if beta <= rtol * bnorm || used == 0 {
            break;
        }
    }
    Ok(GmresOutcome { relative_residual: beta / bnorm, x, iterations })
}
