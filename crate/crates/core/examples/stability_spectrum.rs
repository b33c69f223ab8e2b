//! Mode-by-mode spectrum of the linearization about u = 1 as mu crosses mu*.
//!
//! ```bash
//! cargo run --release --example stability_spectrum
//! ```

use std::error::Error;

use nlkpp::kernel::Kernel;
use nlkpp::spectral::Grid;
use nlkpp::stability::{contraction_bound, mu_star, numeric_dt_spectrum, sharp_thresholds, ModeSpectrum};

fn main() -> Result<(), Box<dyn Error>> {
    let kernel = Kernel::phi_beta(100.0)?;
    let period = kernel.single_mode_period().ok_or("no single-mode period")?;
    let ms = mu_star(&kernel, period, 1)?;
    let th = sharp_thresholds(&kernel, period, 256);
    println!("L = {period:.6}, mu* = {ms:.4}");
    println!("sharp operator bound {}, sufficient bound {}", th.operator, contraction_bound(period));

    println!("\n{:>8} {:>12} {:>12} {:>9}", "mu/mu*", "lambda_1", "s_1", "unstable");
    for f in [0.5, 0.9, 1.0, 1.1, 1.5] {
        let s = ModeSpectrum::new(f * ms, period, &kernel, 64);
        println!("{f:>8.2} {:>12.6} {:>12.3} {:>9}", s.lambda[1], s.s[1], format!("{:?}", s.unstable_modes));
    }

    // The same eigenvalues from the assembled discrete operator.
    let grid = Grid::new(period, 32)?;
    let numeric = numeric_dt_spectrum(1.5 * ms, grid, &kernel)?;
    let formula = ModeSpectrum::new(1.5 * ms, period, &kernel, 16);
    let mut sorted = formula.lambda.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let worst = numeric.iter().zip(&sorted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("\nassembled vs formula at n = 32: max difference {worst:.2e}");
    Ok(())
}
