//! Experiment configuration: TOML files, flag overrides and validation.
//!
//! A config is parsed into a raw table, flags are written over it, and the
//! result is validated in one pass that reports every problem it finds.
//!
//! ```toml
//! kind = "evolve"            # optional; must match the subcommand if given
//! output_dir = "out/evolve"
//!
//! [kernel]
//! family = "gaussian"        # gaussian | top_hat | phi_beta | dirac_pair | tabulated
//! width = 1.0                # half_width (top_hat), beta, shift (dirac_pair), file (tabulated)
//!
//! [grid]
//! period = 40.0              # or "recipe": L = 1.5 / (last negative zero of phi_hat)
//! n = 512                    # power of two, default 128
//!
//! [model]
//! mu = 5.0                   # or mu_range = [from, to, steps], or mu_values = [...]
//!
//! [initial]
//! type = "bump"              # constant (value) | bump (center, half_width, height)
//! half_width = 1.0           #   | cosine (mean, amplitude, mode) | file (path)
//! height = 10.0
//!
//! [integration]
//! t_end = 50.0
//! record_every = 16          # dt, scheme = "imex1" | "strang" and noise_floor
//!                            # (default 1e-13, 0 disables) are optional
//! ```
//!
//! Further sections: `[stability]` (k_max, full_spectrum), `[steady]` (k0,
//! continue_to, steps, deflate, even_restrict, seed_amplitude, solver),
//! `[spread]` (levels, t_min, c_in_fraction, half_width, height),
//! `[counterexample]` (rho, dt, splitting, record_every, w_cap) and
//! `[sweep]` (experiment, jobs).

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::cauchy::{InitialCondition, Scheme, Splitting};
use crate::error::Result;
use crate::kernel::Kernel;
use crate::spectral::Field;
use crate::steady_state::LinearSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Kernel,
    Stability,
    Steady,
    Evolve,
    Spread,
    Counterexample,
    Sweep,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Kernel => "kernel",
            Kind::Stability => "stability",
            Kind::Steady => "steady",
            Kind::Evolve => "evolve",
            Kind::Spread => "spread",
            Kind::Counterexample => "counterexample",
            Kind::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "kernel" | "kernel-report" => Kind::Kernel,
            "stability" => Kind::Stability,
            "steady" => Kind::Steady,
            "evolve" => Kind::Evolve,
            "spread" => Kind::Spread,
            "counterexample" => Kind::Counterexample,
            "sweep" => Kind::Sweep,
            _ => return None,
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Gaussian { width: f64 },
    TopHat { half_width: f64 },
    PhiBeta { beta: f64 },
    DiracPair { shift: f64 },
    /// Field file (binary or `.csv`) holding one period of samples.
    Tabulated { file: PathBuf },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match self {
            KernelSpec::Gaussian { width } => Kernel::gaussian(*width),
            KernelSpec::TopHat { half_width } => Kernel::top_hat(*half_width),
            KernelSpec::PhiBeta { beta } => Kernel::phi_beta(*beta),
            KernelSpec::DiracPair { shift } => Kernel::dirac_pair(*shift),
            KernelSpec::Tabulated { file } => {
                let field = if file.extension().is_some_and(|e| e == "csv") {
                    Field::read_csv(file)?
                } else {
                    Field::read_binary(file)?
                };
                Kernel::tabulated(field.grid().period(), field.into_values())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeriodSpec {
    Value(f64),
    /// Single-mode period of the kernel, `1.5 / xi*`.
    Recipe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuRange {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl MuRange {
    /// `steps + 1` equally spaced values from `from` to `to`.
    pub fn values(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| self.from + i as f64 * (self.to - self.from) / self.steps as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationSpec {
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub record_every: usize,
    pub scheme: Scheme,
    pub noise_floor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySpec {
    pub k_max: Option<usize>,
    pub full_spectrum: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadySpec {
    pub k0: Option<usize>,
    pub continue_to: Option<(f64, usize)>,
    /// `None`: deflate the constant state exactly when `mu` exceeds its threshold.
    pub deflate: Option<bool>,
    pub even_restrict: bool,
    pub seed_amplitude: f64,
    pub solver: LinearSolver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadSpec {
    pub levels: Vec<f64>,
    pub t_min: Option<f64>,
    pub c_in_fraction: f64,
    pub half_width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleSpec {
    pub rho: f64,
    pub dt: f64,
    pub splitting: Splitting,
    pub record_every: usize,
    pub w_cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub experiment: Kind,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub kernel: KernelSpec,
    pub period: Option<PeriodSpec>,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub mu_range: Option<MuRange>,
    pub mu_values: Option<Vec<f64>>,
    pub initial: Option<InitialCondition>,
    pub integration: IntegrationSpec,
    pub stability: StabilitySpec,
    pub steady: SteadySpec,
    pub spread: SpreadSpec,
    pub counterexample: CounterexampleSpec,
    pub sweep: SweepSpec,
    pub output_dir: PathBuf,
}

pub const DEFAULT_N: usize = 128;

/// Values below this are zeroed after each time step; `noise_floor = 0` disables it.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-13;

impl ExperimentConfig {
    pub fn n_or_default(&self) -> usize {
        self.n.unwrap_or(DEFAULT_N)
    }

    /// All `mu` values the experiment visits, in order.
    pub fn mu_list(&self) -> Vec<f64> {
        if let Some(v) = &self.mu_values {
            v.clone()
        } else if let Some(r) = &self.mu_range {
            r.values()
        } else {
            self.mu.into_iter().collect()
        }
    }
}

/// Every validation problem found, each naming its key.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration:")?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const SCHEMA: &[(&str, &[&str])] = &[
    ("kernel", &["family", "width", "half_width", "beta", "shift", "file"]),
    ("grid", &["period", "n"]),
    ("model", &["mu", "mu_range", "mu_values"]),
    ("initial", &["type", "value", "center", "half_width", "height", "mean", "amplitude", "mode", "path"]),
    ("integration", &["t_end", "dt", "record_every", "scheme", "noise_floor"]),
    ("stability", &["k_max", "full_spectrum"]),
    ("steady", &["k0", "continue_to", "steps", "deflate", "even_restrict", "seed_amplitude", "solver"]),
    ("spread", &["levels", "t_min", "c_in_fraction", "half_width", "height"]),
    ("counterexample", &["rho", "dt", "splitting", "record_every", "w_cap"]),
    ("sweep", &["experiment", "jobs"]),
];

const TOP_LEVEL: &[&str] = &["kind", "output_dir"];

pub fn read_table(path: &Path) -> std::result::Result<Table, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
    text.parse::<Table>()
        .map_err(|e| ConfigErrors(vec![format!("{}: {e}", path.display())]))
}

/// Sets `section.key = value`, creating the section if needed.
pub fn set_key(table: &mut Table, section: &str, key: &str, value: Value) {
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    if !entry.is_table() {
        *entry = Value::Table(Table::new());
    }
    entry.as_table_mut().unwrap().insert(key.to_string(), value);
}

/// Parses `family:key=value,...` (e.g. `phi_beta:beta=100`) into a `[kernel]` table.
pub fn kernel_table_from_str(spec: &str) -> std::result::Result<Table, String> {
    let (family, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let family = match family.trim() {
        "tophat" => "top_hat",
        f => f,
    };
    let mut t = Table::new();
    t.insert("family".into(), Value::String(family.to_string()));
    for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("kernel parameter '{part}' is not key=value"))?;
        let key = match (family, k.trim()) {
            ("gaussian", "s") => "width",
            ("top_hat", "a") => "half_width",
            ("dirac_pair", "l" | "ell") => "shift",
            (_, k) => k,
        };
        let value = if key == "file" {
            Value::String(v.trim().to_string())
        } else {
            Value::Float(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("kernel parameter {key}: {e}"))?,
            )
        };
        t.insert(key.to_string(), value);
    }
    Ok(t)
}

/// Parses `from:to:steps`.
pub fn mu_range_from_str(s: &str) -> std::result::Result<Value, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("mu range '{s}' must be from:to:steps"));
    }
    let f = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("mu range '{s}': {e}"));
    let steps = parts[2]
        .trim()
        .parse::<i64>()
        .map_err(|e| format!("mu range '{s}': {e}"))?;
    Ok(Value::Array(vec![
        Value::Float(f(parts[0])?),
        Value::Float(f(parts[1])?),
        Value::Integer(steps),
    ]))
}

struct Checker<'a> {
    root: &'a Table,
    errors: Vec<String>,
}

impl<'a> Checker<'a> {
    fn section(&self, name: &str) -> Option<&'a Table> {
        self.root.get(name).and_then(Value::as_table)
    }

    fn raw(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.section(section).and_then(|t| t.get(key))
    }

    fn err(&mut self, section: &str, key: &str, msg: impl fmt::Display) {
        self.errors.push(format!("{section}.{key}: {msg}"));
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        match self.raw(section, key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.err(section, key, format!("expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn positive(&mut self, section: &str, key: &str) -> Option<f64> {
        let v = self.float(section, key)?;
        if v > 0.0 && v.is_finite() {
            Some(v)
        } else {
            self.err(section, key, format!("must be positive, got {v}"));
            None
        }
    }

    fn integer(&mut self, section: &str, key: &str) -> Option<i64> {
        match self.raw(section, key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.err(section, key, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn count(&mut self, section: &str, key: &str, min: i64) -> Option<usize> {
        let v = self.integer(section, key)?;
        if v >= min {
            Some(v as usize)
        } else {
            self.err(section, key, format!("must be at least {min}, got {v}"));
            None
        }
    }

    fn boolean(&mut self, section: &str, key: &str) -> Option<bool> {
        match self.raw(section, key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.err(section, key, format!("expected true or false, found {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, section: &str, key: &str) -> Option<&'a str> {
        match self.raw(section, key)? {
            Value::String(s) => Some(s.as_str()),
            other => {
                self.err(section, key, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn floats(&mut self, section: &str, key: &str) -> Option<Vec<f64>> {
        let arr = match self.raw(section, key)? {
            Value::Array(a) => a,
            other => {
                self.err(section, key, format!("expected an array, found {}", other.type_str()));
                return None;
            }
        };
        let mut out = Vec::with_capacity(arr.len());
        for v in arr {
            match v {
                Value::Float(f) => out.push(*f),
                Value::Integer(i) => out.push(*i as f64),
                other => {
                    self.err(section, key, format!("array entries must be numbers, found {}", other.type_str()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn unknown_keys(&mut self) {
        let sections: BTreeSet<&str> = SCHEMA.iter().map(|(s, _)| *s).collect();
        for (key, value) in self.root {
            if TOP_LEVEL.contains(&key.as_str()) {
                continue;
            }
            if !sections.contains(key.as_str()) {
                self.errors.push(format!("{key}: unknown key"));
                continue;
            }
            let Some(table) = value.as_table() else {
                self.errors.push(format!("{key}: expected a table"));
                continue;
            };
            let allowed = SCHEMA.iter().find(|(s, _)| *s == key).unwrap().1;
            for k in table.keys() {
                if !allowed.contains(&k.as_str()) {
                    self.errors.push(format!("{key}.{k}: unknown key"));
                }
            }
        }
    }
}

fn top_string<'a>(c: &mut Checker<'a>, key: &str) -> Option<&'a str> {
    match c.root.get(key)? {
        Value::String(s) => Some(s.as_str()),
        other => {
            c.errors.push(format!("{key}: expected a string, found {}", other.type_str()));
            None
        }
    }
}

fn parse_kernel(c: &mut Checker<'_>) -> Option<KernelSpec> {
    if c.section("kernel").is_none() {
        c.errors.push("kernel: missing section (e.g. --kernel gaussian:s=1)".into());
        return None;
    }
    let family = c.string("kernel", "family");
    let Some(family) = family else {
        if c.raw("kernel", "family").is_none() {
            c.err("kernel", "family", "missing");
        }
        return None;
    };
    let require = |c: &mut Checker<'_>, key: &str| {
        if c.raw("kernel", key).is_none() {
            c.err("kernel", key, format!("required for the {family} family"));
            None
        } else {
            c.positive("kernel", key)
        }
    };
    let unused: &[&str] = match family {
        "gaussian" => &["half_width", "beta", "shift", "file"],
        "top_hat" => &["width", "beta", "shift", "file"],
        "phi_beta" => &["width", "half_width", "shift", "file"],
        "dirac_pair" => &["width", "half_width", "beta", "file"],
        "tabulated" => &["width", "half_width", "beta", "shift"],
        _ => &[],
    };
    for k in unused {
        if c.raw("kernel", k).is_some() {
            c.err("kernel", k, format!("not a parameter of the {family} family"));
        }
    }
    match family {
        "gaussian" => require(c, "width").map(|width| KernelSpec::Gaussian { width }),
        "top_hat" => require(c, "half_width").map(|half_width| KernelSpec::TopHat { half_width }),
        "phi_beta" => {
            let beta = require(c, "beta")?;
            if beta <= 1.0 {
                c.err("kernel", "beta", format!("must exceed 1, got {beta}"));
                return None;
            }
            Some(KernelSpec::PhiBeta { beta })
        }
        "dirac_pair" => require(c, "shift").map(|shift| KernelSpec::DiracPair { shift }),
        "tabulated" => {
            let file = c.string("kernel", "file");
            match file {
                Some(f) if Path::new(f).is_file() => Some(KernelSpec::Tabulated { file: f.into() }),
                Some(f) => {
                    c.err("kernel", "file", format!("'{f}' does not exist"));
                    None
                }
                None => {
                    if c.raw("kernel", "file").is_none() {
                        c.err("kernel", "file", "required for the tabulated family");
                    }
                    None
                }
            }
        }
        other => {
            c.err(
                "kernel",
                "family",
                format!("unknown family '{other}' (gaussian, top_hat, phi_beta, dirac_pair, tabulated)"),
            );
            None
        }
    }
}

fn parse_initial(c: &mut Checker<'_>) -> Option<InitialCondition> {
    c.section("initial")?;
    let kind = c.string("initial", "type").unwrap_or("missing");
    let allowed: &[&str] = match kind {
        "constant" => &["value"],
        "bump" => &["center", "half_width", "height"],
        "cosine" => &["mean", "amplitude", "mode"],
        "file" => &["path"],
        _ => &[],
    };
    for k in ["value", "center", "half_width", "height", "mean", "amplitude", "mode", "path"] {
        if c.raw("initial", k).is_some() && !allowed.contains(&k) {
            c.err("initial", k, format!("not a parameter of initial type '{kind}'"));
        }
    }
    match kind {
        "constant" => {
            let v = c.float("initial", "value");
            if v.is_none() && c.raw("initial", "value").is_none() {
                c.err("initial", "value", "required for a constant initial condition");
            }
            v.map(InitialCondition::Constant)
        }
        "bump" => {
            let center = c.float("initial", "center").unwrap_or(0.0);
            let half_width = c.positive("initial", "half_width").unwrap_or(1.0);
            let height = c.positive("initial", "height").unwrap_or(1.0);
            Some(InitialCondition::Bump { center, half_width, height })
        }
        "cosine" => {
            let mean = c.float("initial", "mean").unwrap_or(1.0);
            let amplitude = c.float("initial", "amplitude").unwrap_or(0.05);
            let mode = c.count("initial", "mode", 0).unwrap_or(1);
            Some(InitialCondition::Cosine { mean, amplitude, mode })
        }
        "file" => match c.string("initial", "path") {
            Some(p) if Path::new(p).is_file() => Some(InitialCondition::File(p.into())),
            Some(p) => {
                c.err("initial", "path", format!("'{p}' does not exist"));
                None
            }
            None => {
                c.err("initial", "path", "required for a file initial condition");
                None
            }
        },
        other => {
            c.err("initial", "type", format!("unknown type '{other}' (constant, bump, cosine, file)"));
            None
        }
    }
}

/// Validates a raw table for the experiment `kind`.
///
/// `env_out` (the `NLKPP_OUT` variable) overrides `output_dir`; a flag
/// override should already have been written into the table's `output_dir`
/// and is passed as `flag_out` so it wins over both.
pub fn validate(
    table: &Table,
    kind: Kind,
    env_out: Option<&str>,
    flag_out: Option<&Path>,
) -> std::result::Result<ExperimentConfig, ConfigErrors> {
    let mut c = Checker { root: table, errors: Vec::new() };
    c.unknown_keys();

    if let Some(k) = top_string(&mut c, "kind") {
        match Kind::parse(k) {
            Some(parsed) if parsed == kind => {}
            Some(parsed) => c.errors.push(format!(
                "kind: config is for '{parsed}' but the '{kind}' subcommand was run"
            )),
            None => c.errors.push(format!("kind: unknown experiment kind '{k}'")),
        }
    }
    let output_dir = flag_out
        .map(Path::to_path_buf)
        .or_else(|| env_out.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| top_string(&mut c, "output_dir").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(format!("nlkpp-out/{kind}")));

    let kernel = parse_kernel(&mut c);

    let period = match c.raw("grid", "period") {
        Some(Value::String(s)) if s == "recipe" => Some(PeriodSpec::Recipe),
        Some(Value::String(s)) => {
            c.err("grid", "period", format!("expected a number or \"recipe\", got '{s}'"));
            None
        }
        Some(_) => c.positive("grid", "period").map(PeriodSpec::Value),
        None => None,
    };
    if period == Some(PeriodSpec::Recipe) && !matches!(kernel, Some(KernelSpec::PhiBeta { .. } | KernelSpec::Tabulated { .. }) | None) {
        c.err("grid", "period", "\"recipe\" needs a kernel with a negative transform lobe (phi_beta or tabulated)");
    }
    let n = c.count("grid", "n", 0);
    if let Some(n) = n {
        if n < 8 || !n.is_power_of_two() {
            c.err("grid", "n", format!("must be a power of two >= 8, got {n}"));
        }
    }

    let mu = c.positive("model", "mu");
    let mu_range = c.floats("model", "mu_range").and_then(|v| {
        if v.len() != 3 {
            c.err("model", "mu_range", "expected [from, to, steps]");
            return None;
        }
        let steps = v[2];
        if !(v[0] > 0.0 && v[1] > 0.0) {
            c.err("model", "mu_range", format!("mu must be positive, got {} to {}", v[0], v[1]));
            return None;
        }
        if steps < 1.0 || steps.fract() != 0.0 {
            c.err("model", "mu_range", format!("steps must be a positive integer, got {steps}"));
            return None;
        }
        Some(MuRange { from: v[0], to: v[1], steps: steps as usize })
    });
    let mu_values = c.floats("model", "mu_values").and_then(|v| {
        if v.is_empty() || v.iter().any(|m| !(*m > 0.0)) {
            c.err("model", "mu_values", "must be a nonempty list of positive numbers");
            None
        } else {
            Some(v)
        }
    });
    let mu_sources = [c.raw("model", "mu"), c.raw("model", "mu_range"), c.raw("model", "mu_values")]
        .iter()
        .filter(|v| v.is_some())
        .count();
    if mu_sources > 1 {
        c.errors.push("model: give only one of mu, mu_range, mu_values".into());
    }

    let initial = parse_initial(&mut c);

    let scheme = match c.string("integration", "scheme") {
        None | Some("imex1") => Scheme::Imex1,
        Some("strang") => Scheme::Strang,
        Some(s) => {
            c.err("integration", "scheme", format!("unknown scheme '{s}' (imex1, strang)"));
            Scheme::Imex1
        }
    };
    let integration = IntegrationSpec {
        t_end: c.positive("integration", "t_end"),
        dt: c.positive("integration", "dt"),
        record_every: c.count("integration", "record_every", 1).unwrap_or(16),
        scheme,
        noise_floor: match c.float("integration", "noise_floor") {
            None => Some(DEFAULT_NOISE_FLOOR),
            Some(f) if f == 0.0 => None,
            Some(f) if f > 0.0 && f < 1e-3 => Some(f),
            Some(f) => {
                c.err("integration", "noise_floor", format!("must lie in [0, 1e-3), got {f}"));
                None
            }
        },
    };

    let stability = StabilitySpec {
        k_max: c.count("stability", "k_max", 1),
        full_spectrum: c.boolean("stability", "full_spectrum").unwrap_or(false),
    };

    let continue_to = c.positive("steady", "continue_to");
    let steps = c.count("steady", "steps", 2);
    if steps.is_some() && continue_to.is_none() {
        c.err("steady", "steps", "only meaningful together with continue_to");
    }
    let solver = match c.string("steady", "solver") {
        None | Some("auto") => LinearSolver::Auto,
        Some("dense") => LinearSolver::Dense,
        Some("gmres") => LinearSolver::Gmres,
        Some(s) => {
            c.err("steady", "solver", format!("unknown solver '{s}' (auto, dense, gmres)"));
            LinearSolver::Auto
        }
    };
    let steady = SteadySpec {
        k0: c.count("steady", "k0", 1),
        continue_to: continue_to.map(|to| (to, steps.unwrap_or(10))),
        deflate: c.boolean("steady", "deflate"),
        even_restrict: c.boolean("steady", "even_restrict").unwrap_or(true),
        seed_amplitude: c.positive("steady", "seed_amplitude").unwrap_or(0.05),
        solver,
    };

    let height = c.positive("spread", "height").unwrap_or(1.0);
    let levels = c.floats("spread", "levels").unwrap_or_else(|| vec![0.5, 0.1, 0.01]);
    if levels.is_empty() || levels.iter().any(|l| !(*l > 0.0 && *l < height)) {
        c.err("spread", "levels", format!("levels must lie in (0, height = {height})"));
    }
    let c_in_fraction = c.positive("spread", "c_in_fraction").unwrap_or(0.8);
    if c_in_fraction >= 1.0 {
        c.err("spread", "c_in_fraction", format!("must be below 1, got {c_in_fraction}"));
    }
    let spread = SpreadSpec {
        levels,
        t_min: c.positive("spread", "t_min"),
        c_in_fraction,
        half_width: c.positive("spread", "half_width").unwrap_or(1.0),
        height,
    };

    let rho = c.positive("counterexample", "rho").unwrap_or(0.1);
    if rho >= 1.0 {
        c.err("counterexample", "rho", format!("must lie in (0, 1), got {rho}"));
    }
    let splitting = match c.string("counterexample", "splitting") {
        None | Some("lie") => Splitting::Lie,
        Some("strang") => Splitting::Strang,
        Some(s) => {
            c.err("counterexample", "splitting", format!("unknown splitting '{s}' (lie, strang)"));
            Splitting::Lie
        }
    };
    let counterexample = CounterexampleSpec {
        rho,
        dt: c.positive("counterexample", "dt").unwrap_or(2e-3),
        splitting,
        record_every: c.count("counterexample", "record_every", 1).unwrap_or(10),
        w_cap: c.positive("counterexample", "w_cap").unwrap_or(1e10),
    };

    let experiment = match c.string("sweep", "experiment") {
        None => Kind::Steady,
        Some(s) => match Kind::parse(s) {
            Some(k @ (Kind::Stability | Kind::Steady | Kind::Evolve | Kind::Spread)) => k,
            _ => {
                c.err("sweep", "experiment", format!("'{s}' cannot be swept (stability, steady, evolve, spread)"));
                Kind::Steady
            }
        },
    };
    let sweep = SweepSpec { experiment, jobs: c.count("sweep", "jobs", 1).unwrap_or(1) };

    // Requirements that depend on the experiment.
    let has_mu = mu.is_some() || mu_range.is_some() || mu_values.is_some();
    let mu_key_present = c.raw("model", "mu").is_some()
        || c.raw("model", "mu_range").is_some()
        || c.raw("model", "mu_values").is_some();
    let effective = if kind == Kind::Sweep { experiment } else { kind };
    match kind {
        Kind::Kernel => {}
        Kind::Stability => {
            if !has_mu && !mu_key_present {
                c.errors.push("model.mu: stability needs mu or mu_range".into());
            }
        }
        Kind::Steady | Kind::Evolve | Kind::Spread | Kind::Counterexample => {
            if mu.is_none() && c.raw("model", "mu").is_none() {
                c.errors.push(format!("model.mu: required for {kind}"));
            }
            if mu_range.is_some() || mu_values.is_some() {
                c.errors.push(format!("model: {kind} takes a single mu; use sweep for ranges"));
            }
        }
        Kind::Sweep => {
            if mu_range.is_none() && mu_values.is_none() && c.raw("model", "mu_range").is_none() && c.raw("model", "mu_values").is_none() {
                c.errors.push("model.mu_range: sweep needs mu_range or mu_values".into());
            }
        }
    }
    if matches!(effective, Kind::Stability | Kind::Steady | Kind::Evolve) && period.is_none() && c.raw("grid", "period").is_none() {
        c.errors.push(format!("grid.period: required for {effective}"));
    }
    if matches!(effective, Kind::Evolve | Kind::Spread | Kind::Counterexample)
        && integration.t_end.is_none()
        && c.raw("integration", "t_end").is_none()
    {
        c.errors.push(format!("integration.t_end: required for {effective}"));
    }
    if effective == Kind::Evolve && initial.is_none() && c.section("initial").is_none() {
        c.errors.push("initial: evolve needs an initial condition".into());
    }
    if kind == Kind::Counterexample {
        if let Some(k) = &kernel {
            if !matches!(k, KernelSpec::DiracPair { .. }) {
                c.errors.push("kernel.family: counterexample requires a dirac_pair kernel".into());
            }
        }
    }

    if !c.errors.is_empty() {
        return Err(ConfigErrors(c.errors));
    }
    Ok(ExperimentConfig {
        kind,
        kernel: kernel.expect("validated"),
        period,
        n,
        mu,
        mu_range,
        mu_values,
        initial,
        integration,
        stability,
        steady,
        spread,
        counterexample,
        sweep,
        output_dir,
    })
}

/// Reads and validates a config file without overrides.
pub fn parse_config(path: &Path, kind: Kind) -> std::result::Result<ExperimentConfig, ConfigErrors> {
    let table = read_table(path)?;
    validate(&table, kind, None, None)
}
