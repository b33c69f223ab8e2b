//! Without a density the solution can grow without bound: the Dirac-pair kernel.
//!
//! ```bash
//! cargo run --release --example dirac_blowup
//! ```

use std::error::Error;
use std::f64::consts::PI;

use nlkpp::cauchy::{dirac_counterexample, DiracOptions};
use nlkpp::spectral::Grid;

fn main() -> Result<(), Box<dyn Error>> {
    let l = PI;
    let grid = Grid::new(2.0 * l, 1024)?;
    for mu in [0.5, 1.0, 2.0] {
        let r = dirac_counterexample(mu, l, 0.1, 20.0, grid, &DiracOptions::default())?;
        let hit = r.first_time_u_exceeds(1e3).map_or("never".into(), |t| format!("{t:.2}"));
        println!(
            "mu = {mu}: rate {:+.8} (predicted {:+.8}), sup u > 1e3 at t = {hit}",
            r.fit.slope, r.theoretical_rate
        );
    }
    Ok(())
}
