//! Initial data for the Cauchy problem.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::spectral::{Field, Grid};

/// Width of the Gaussian mollifier applied to bump edges, in grid spacings.
pub const EDGE_WIDTH_CELLS: f64 = 4.0;

/// Beyond this many mollifier widths past the edge the bump is exactly zero
/// (the profile there is below `1e-32` of the height).
pub const EDGE_CUTOFF: f64 = 8.5;

/// `[-a, a]` indicator convolved with a unit-mass Gaussian of width `delta`:
/// `(erf((x + a)/delta) - erf((x - a)/delta)) / 2`.
pub fn mollified_indicator(x: f64, a: f64, delta: f64) -> f64 {
    let d = x.abs();
    if d > a + EDGE_CUTOFF * delta {
        return 0.0;
    }
    0.5 * (libm::erfc((d - a) / delta) - libm::erfc((d + a) / delta))
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Constant(f64),
    /// Indicator of `[center - half_width, center + half_width]` scaled by
    /// `height`, edges mollified by a Gaussian of width `4h`.
    Bump { center: f64, half_width: f64, height: f64 },
    /// `mean + amplitude cos(2 pi mode x / P)`.
    Cosine { mean: f64, amplitude: f64, mode: usize },
    /// Field snapshot: binary format, or CSV if the extension is `.csv`.
    File(PathBuf),
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            InitialCondition::Constant(c) if !c.is_finite() => bad(format!("constant {c}")),
            InitialCondition::Bump { center, half_width, height } => {
                if !center.is_finite() || !(*half_width > 0.0) || !height.is_finite() {
                    bad(format!(
                        "bump needs finite center/height and positive half-width, got ({center}, {half_width}, {height})"
                    ))
                } else {
                    Ok(())
                }
            }
            InitialCondition::Cosine { mean, amplitude, .. } if !mean.is_finite() || !amplitude.is_finite() => {
                bad("cosine needs finite mean and amplitude".into())
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<Field> {
        self.validate()?;
        match self {
            InitialCondition::Constant(c) => Field::constant(grid, *c),
            InitialCondition::Bump { center, half_width, height } => {
                let delta = EDGE_WIDTH_CELLS * grid.spacing();
                Field::from_fn(grid, |x| height * mollified_indicator(x - center, *half_width, delta))
            }
            InitialCondition::Cosine { mean, amplitude, mode } => {
                Field::cosine(grid, *mean, *amplitude, *mode)
            }
            InitialCondition::File(path) => {
                let field = if path.extension().is_some_and(|e| e == "csv") {
                    Field::read_csv(path)?
                } else {
                    Field::read_binary(path)?
                };
                grid.check_same(field.grid())?;
                Ok(field)
            }
        }
    }

    /// Closed support `[lo, hi]` of the sampled data, if compact.
    pub fn support(&self, grid: Grid) -> Option<(f64, f64)> {
        match self {
            InitialCondition::Bump { center, half_width, .. } => {
                let reach = half_width + EDGE_CUTOFF * EDGE_WIDTH_CELLS * grid.spacing();
                Some((center - reach, center + reach))
            }
            _ => None,
        }
    }
}
