//! Which kernels can destabilize the constant state, and at which period.
//!
//! ```bash
//! cargo run --release --example kernel_hypothesis
//! ```

use std::error::Error;
use std::f64::consts::PI;

use nlkpp::kernel::Kernel;
use nlkpp::stability::mu_star;

fn main() -> Result<(), Box<dyn Error>> {
    let kernels = [
        Kernel::gaussian(1.0)?,
        Kernel::top_hat(1.0)?,
        Kernel::phi_beta(100.0)?,
        Kernel::dirac_pair(PI)?,
    ];
    for k in &kernels {
        print!("{:<24}", k.label());
        match k.window_bound() {
            Ok((sigma, eta)) => print!(" sigma = {sigma:.6}, eta = {eta:.6}"),
            Err(e) => print!(" no window bound ({e})"),
        }
        println!();
    }

    // phi_beta has a single negative lobe; pick L so only k = 1 lands in it.
    let k = &kernels[2];
    let period = k.single_mode_period().ok_or("no negative lobe")?;
    let report = k.check_hypothesis(period, 64);
    println!("\n{} at L = {period:.6}", k.label());
    for (i, v) in report.values.iter().enumerate().take(6) {
        println!("  k = {i}: phi_hat = {v:+.6e}");
    }
    let k0 = report.k0.ok_or("hypothesis fails")?;
    println!("  single negative mode k0 = {k0}, mu* = {:.6}", mu_star(k, period, k0)?);

    // Top hat: many negative modes at a long period.
    let th = kernels[1].check_hypothesis(20.0, 64);
    println!("\ntop hat at L = 20: {} negative modes up to k = 64", th.negative_count());
    Ok(())
}
