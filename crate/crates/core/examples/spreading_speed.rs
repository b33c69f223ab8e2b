//! Front speeds from a compact bump against 2 sqrt(mu).
//!
//! ```bash
//! cargo run --release --example spreading_speed
//! ```

use std::error::Error;

use nlkpp::kernel::Kernel;
use nlkpp::spreading::{spreading_experiment, SpreadConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let kernel = Kernel::gaussian(1.0)?;
    for mu in [1.0, 4.0] {
        let mut config = SpreadConfig::for_mu(mu, 60.0);
        config.t_min = Some(30.0);
        let r = spreading_experiment(mu, &kernel, &config)?;
        println!("mu = {mu} (P = {}, n = {}, dt = {:.2e})", config.period, config.n, r.dt);
        for (tr, s) in r.traces.iter().zip(&r.speeds) {
            println!(
                "  level {:<5} right {:.4}  left {:.4}  ratio {:.4}",
                tr.level,
                s.right_speed(),
                s.left_speed(),
                s.right_speed() / r.theoretical_speed()
            );
        }
        println!(
            "  envelope violations {} / {}, interior min {:.4}",
            r.envelope.violations, r.envelope.points, r.interior_min
        );
    }
    Ok(())
}
