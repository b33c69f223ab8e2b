//! Ordinary least-squares line fits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub samples: usize,
}

/// Fits `y = slope x + intercept`; needs at least `min_samples` (and 3) points.
pub fn linear_fit(xs: &[f64], ys: &[f64], min_samples: usize) -> Result<LinearFit> {
    let n = xs.len().min(ys.len());
    let need = min_samples.max(3);
    if n < need {
        return Err(Error::InsufficientSamples { have: n, need });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs[..n]
        .iter()
        .zip(&ys[..n])
        .map(|(x, y)| {
            let e = y - slope * x - intercept;
            e * e
        })
        .sum();
    let stderr = (sse / (nf - 2.0) / sxx).sqrt();
    Ok(LinearFit { slope, intercept, stderr, samples: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys, 10).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14);
        assert!((f.intercept + 1.0).abs() < 1e-13);
        assert!(f.stderr < 1e-13);
        assert!(linear_fit(&xs[..5], &ys[..5], 10).is_err());
    }
}
