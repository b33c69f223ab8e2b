//! Runs a shipped config through the same path as the `nlkpp` binary.
//!
//! ```bash
//! cargo run --release --example config_sweep -- crates/core/examples/configs/sweep_steady.toml
//! ```

use std::error::Error;
use std::path::PathBuf;

use nlkpp::cli::config::{parse_config, Kind};
use nlkpp::cli::{output, run};

fn main() -> Result<(), Box<dyn Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/sweep_steady.toml"));
    let mut cfg = parse_config(&path, Kind::Sweep)?;
    cfg.output_dir = std::env::temp_dir().join("nlkpp-config-sweep");
    let outcome = run::run(&cfg)?;
    output::write_manifest(&cfg.output_dir)?;
    for line in outcome.lines {
        println!("{line}");
    }
    print!("{}", std::fs::read_to_string(cfg.output_dir.join("sweep.csv"))?);
    Ok(())
}
