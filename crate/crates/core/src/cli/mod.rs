//! Command-line front end: `nlkpp <subcommand> [--config FILE] [flags]`.
//!
//! Flags override the matching config keys. Exit codes: 0 success, 1 bad
//! input or I/O, 2 numerical failure, 3 the counterexample run detected
//! unbounded growth.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

pub use config::{validate, ConfigErrors, ExperimentConfig, Kind};
pub use run::Outcome;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_GROWTH: i32 = 3;

/// Environment variable naming the output directory; `--out` takes precedence.
pub const OUT_ENV: &str = "NLKPP_OUT";

#[derive(Debug, Parser)]
#[command(name = "nlkpp", version, about = "Pseudo-spectral experiments for the nonlocal Fisher-KPP equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// TOML experiment file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Kernel as family:key=value, e.g. gaussian:s=1, top_hat:a=0.5,
    /// phi_beta:beta=100, dirac_pair:shift=3.14, tabulated:file=phi.bin.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Period L, or "recipe" for the single-mode period of the kernel.
    #[arg(long, short = 'L')]
    pub period: Option<String>,
    /// Grid size (power of two).
    #[arg(long, short)]
    pub n: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// from:to:steps
    #[arg(long, allow_negative_numbers = true)]
    pub mu_range: Option<String>,
    /// Final time.
    #[arg(long, short = 'T', visible_alias = "T", allow_negative_numbers = true)]
    pub t_end: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub record_every: Option<i64>,
    /// Output directory (overrides NLKPP_OUT and the config).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform, window constants and single-negative-mode check.
    Kernel(Common),
    /// Per-mode spectrum of the linearization about u = 1.
    Stability {
        #[command(flatten)]
        common: Common,
        /// Also diagonalize the discretized map on the even grid functions.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        k_max: Option<i64>,
    },
    /// Newton solve for a periodic steady state, optionally along a branch.
    Steady {
        #[command(flatten)]
        common: Common,
        /// Continue the branch to MU_TO in STEPS increments.
        #[arg(long, num_args = 2, value_names = ["MU_TO", "STEPS"])]
        continue_to: Option<Vec<String>>,
        #[arg(long)]
        k0: Option<i64>,
    },
    /// Time integration with snapshots and the local-average bound.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Initial data as type:key=value, e.g. bump:half_width=1,height=10.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Front tracking from a compactly supported bump.
    Spread {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
    },
    /// Coupled Dirac-pair system with cosine data.
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Parallel parameter sweep of another experiment.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// stability | steady | evolve | spread
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long, short)]
        jobs: Option<i64>,
    },
}

fn initial_table_from_str(spec: &str) -> Result<Table, String> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut t = Table::new();
    t.insert("type".into(), Value::String(kind.trim().to_string()));
    for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("initial parameter '{part}' is not key=value"))?;
        let (k, v) = (k.trim(), v.trim());
        let value = match k {
            "path" => Value::String(v.to_string()),
            "mode" => Value::Integer(v.parse().map_err(|e| format!("initial.mode: {e}"))?),
            _ => Value::Float(v.parse().map_err(|e| format!("initial.{k}: {e}"))?),
        };
        t.insert(k.to_string(), value);
    }
    Ok(t)
}

impl Command {
    pub fn kind(&self) -> Kind {
        match self {
            Command::Kernel(_) => Kind::Kernel,
            Command::Stability { .. } => Kind::Stability,
            Command::Steady { .. } => Kind::Steady,
            Command::Evolve { .. } => Kind::Evolve,
            Command::Spread { .. } => Kind::Spread,
            Command::Counterexample { .. } => Kind::Counterexample,
            Command::Sweep { .. } => Kind::Sweep,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Kernel(c) => c,
            Command::Stability { common, .. }
            | Command::Steady { common, .. }
            | Command::Evolve { common, .. }
            | Command::Spread { common, .. }
            | Command::Counterexample { common, .. }
            | Command::Sweep { common, .. } => common,
        }
    }

    /// Writes flag values over `table`; returns problems with the flags themselves.
    fn apply(&self, table: &mut Table) -> Vec<String> {
        let mut errors = Vec::new();
        let c = self.common();
        if let Some(k) = &c.kernel {
            match config::kernel_table_from_str(k) {
                Ok(t) => {
                    table.insert("kernel".into(), Value::Table(t));
                }
                Err(e) => errors.push(format!("--kernel: {e}")),
            }
        }
        if let Some(p) = &c.period {
            let v = match p.parse::<f64>() {
                Ok(x) => Value::Float(x),
                Err(_) => Value::String(p.clone()),
            };
            config::set_key(table, "grid", "period", v);
        }
        if let Some(n) = c.n {
            config::set_key(table, "grid", "n", Value::Integer(n));
        }
        if let Some(mu) = c.mu {
            if let Some(m) = table.get_mut("model").and_then(Value::as_table_mut) {
                m.remove("mu_range");
                m.remove("mu_values");
            }
            config::set_key(table, "model", "mu", Value::Float(mu));
        }
        if let Some(r) = &c.mu_range {
            match config::mu_range_from_str(r) {
                Ok(v) => {
                    if let Some(m) = table.get_mut("model").and_then(Value::as_table_mut) {
                        m.remove("mu");
                        m.remove("mu_values");
                    }
                    config::set_key(table, "model", "mu_range", v);
                }
                Err(e) => errors.push(format!("--mu-range: {e}")),
            }
        }
        if let Some(t) = c.t_end {
            config::set_key(table, "integration", "t_end", Value::Float(t));
        }
        if let Some(dt) = c.dt {
            config::set_key(table, "integration", "dt", Value::Float(dt));
        }
        if let Some(r) = c.record_every {
            config::set_key(table, "integration", "record_every", Value::Integer(r));
        }
        match self {
            Command::Stability { full, k_max, .. } => {
                if *full {
                    config::set_key(table, "stability", "full_spectrum", Value::Boolean(true));
                }
                if let Some(k) = k_max {
                    config::set_key(table, "stability", "k_max", Value::Integer(*k));
                }
            }
            Command::Steady { continue_to, k0, .. } => {
                if let Some(v) = continue_to {
                    match (v[0].parse::<f64>(), v[1].parse::<i64>()) {
                        (Ok(to), Ok(steps)) => {
                            config::set_key(table, "steady", "continue_to", Value::Float(to));
                            config::set_key(table, "steady", "steps", Value::Integer(steps));
                        }
                        _ => errors.push(format!("--continue-to: expected MU_TO STEPS, got {v:?}")),
                    }
                }
                if let Some(k) = k0 {
                    config::set_key(table, "steady", "k0", Value::Integer(*k));
                }
            }
            Command::Evolve { initial, scheme, .. } => {
                if let Some(s) = initial {
                    match initial_table_from_str(s) {
                        Ok(t) => {
                            table.insert("initial".into(), Value::Table(t));
                        }
                        Err(e) => errors.push(format!("--initial: {e}")),
                    }
                }
                if let Some(s) = scheme {
                    config::set_key(table, "integration", "scheme", Value::String(s.clone()));
                }
            }
            Command::Spread { levels: Some(l), .. } => {
                let arr = l.iter().map(|x| Value::Float(*x)).collect();
                config::set_key(table, "spread", "levels", Value::Array(arr));
            }
            Command::Counterexample { rho: Some(r), .. } => {
                config::set_key(table, "counterexample", "rho", Value::Float(*r));
            }
            Command::Sweep { experiment, jobs, .. } => {
                if let Some(e) = experiment {
                    config::set_key(table, "sweep", "experiment", Value::String(e.clone()));
                }
                if let Some(j) = jobs {
                    config::set_key(table, "sweep", "jobs", Value::Integer(*j));
                }
            }
            _ => {}
        }
        errors
    }
}

/// Builds the validated config for a parsed command line.
pub fn resolve(cli: &Cli, env_out: Option<&str>) -> Result<ExperimentConfig, ConfigErrors> {
    let common = cli.command.common();
    let mut table = match &common.config {
        Some(path) => config::read_table(path)?,
        None => Table::new(),
    };
    let flag_errors = cli.command.apply(&mut table);
    match validate(&table, cli.command.kind(), env_out, common.out.as_deref()) {
        Ok(cfg) if flag_errors.is_empty() => Ok(cfg),
        Ok(_) => Err(ConfigErrors(flag_errors)),
        Err(ConfigErrors(mut e)) => {
            e.splice(0..0, flag_errors);
            Err(ConfigErrors(e))
        }
    }
}

/// Runs a parsed command line, printing results and diagnostics; returns the exit code.
pub fn execute(cli: &Cli) -> i32 {
    let env_out = std::env::var(OUT_ENV).ok();
    let cfg = match resolve(cli, env_out.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let result = run::run(&cfg);
    if cfg.output_dir.is_dir() {
        if let Err(e) = output::write_manifest(&cfg.output_dir) {
            eprintln!("error: writing manifest: {e}");
            return EXIT_INPUT;
        }
    }
    match result {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            println!("outputs in {}", cfg.output_dir.display());
            if outcome.growth_signal {
                EXIT_GROWTH
            } else if outcome.numerical_failure {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_INPUT
            }
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}
