//! A tall bump under a Gaussian kernel: the local average stays below its bound.
//!
//! ```bash
//! cargo run --release --example bounded_cauchy
//! ```

use std::error::Error;

use nlkpp::cauchy::{evolve_with, CertificateBuilder, EvolveOptions, InitialCondition};
use nlkpp::kernel::Kernel;
use nlkpp::spectral::Grid;

fn main() -> Result<(), Box<dyn Error>> {
    let kernel = Kernel::gaussian(1.0)?;
    let grid = Grid::new(40.0, 512)?;
    let u0 = InitialCondition::Bump { center: 0.0, half_width: 1.0, height: 10.0 }.sample(grid)?;

    let mut cert = CertificateBuilder::new(&kernel)?;
    let opts = EvolveOptions {
        record_every: 8,
        noise_floor: Some(1e-13),
        keep_states: false,
        ..Default::default()
    };
    let mut next = 0.0;
    evolve_with(&u0, 5.0, &kernel, 50.0, &opts, |s| {
        cert.observe(s)?;
        if s.t >= next {
            println!("t = {:5.1}  sup u = {:8.4}  mass = {:9.3}", s.t, s.u.sup_norm(), s.u.integral());
            next += 5.0;
        }
        Ok(())
    })?;

    let c = cert.finish();
    println!("\nsigma = {:.6}, eta = {:.6}", c.sigma, c.eta);
    println!("sup v = {:.6} <= M = {:.6}: {}", c.sup_v_observed, c.m_theoretical, c.holds);
    Ok(())
}
