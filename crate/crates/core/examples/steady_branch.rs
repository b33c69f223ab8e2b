//! Newton continuation of the patterned branch past mu*.
//!
//! ```bash
//! cargo run --release --example steady_branch
//! ```

use std::error::Error;

use nlkpp::cauchy::{evolve, EvolveOptions};
use nlkpp::kernel::Kernel;
use nlkpp::spectral::Grid;
use nlkpp::stability::mu_star;
use nlkpp::steady_state::{continuation, verify_bounds, NewtonOptions};

fn main() -> Result<(), Box<dyn Error>> {
    let kernel = Kernel::phi_beta(100.0)?;
    let period = kernel.single_mode_period().ok_or("no single-mode period")?;
    let ms = mu_star(&kernel, period, 1)?;
    let grid = Grid::new(period, 64)?;
    let opts = NewtonOptions { deflate_constant: true, ..Default::default() };

    let branch = continuation(&kernel, grid, 1, 1.02 * ms, 1.5 * ms, 12, &opts)?;
    println!("{:>8} {:>10} {:>10} {:>10} {:>6} {:>6}", "mu/mu*", "amplitude", "min u", "max u", "steps", "bound");
    for s in &branch {
        let b = verify_bounds(s, &kernel)?;
        println!(
            "{:>8.3} {:>10.6} {:>10.6} {:>10.6} {:>6} {:>6}",
            s.mu / ms,
            s.amplitude(),
            s.min_u,
            s.max_u,
            s.newton_steps,
            b.holds
        );
    }

    // The last state should not move under the flow.
    let last = branch.last().unwrap();
    let opts = EvolveOptions { record_every: 1000, ..Default::default() };
    let traj = evolve(&last.u, last.mu, &kernel, 1.0, &opts)?;
    let drift = traj.states.iter().map(|s| s.u.distance(&last.u).unwrap()).fold(0.0, f64::max);
    println!("\ndrift over t in [0, 1]: {drift:.2e}");
    Ok(())
}
