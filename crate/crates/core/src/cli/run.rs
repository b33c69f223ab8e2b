//! Executes a validated [`ExperimentConfig`] and writes its outputs.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ExperimentConfig, Kind, PeriodSpec};
use super::output::Csv;
use crate::cauchy::{
    dirac_counterexample, evolve_with, local_average, CertificateBuilder, DiracOptions, EvolveOptions,
};
use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::spectral::{Field, Grid};
use crate::spreading::{spreading_experiment, SpreadConfig};
use crate::stability::{
    contraction_bound, mu_star, numeric_dt_spectrum_full, sharp_thresholds, ModeSpectrum,
};
use crate::steady_state::{continuation, find_steady, verify_bounds, NewtonOptions, SteadyState};

/// What a run reports back besides its files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Lines for stdout.
    pub lines: Vec<String>,
    /// Scalar results, used as sweep columns.
    pub metrics: Vec<(&'static str, f64)>,
    /// The counterexample run saw the predicted growth.
    pub growth_signal: bool,
    /// Some sweep point failed numerically.
    pub numerical_failure: bool,
}

fn resolve_period(cfg: &ExperimentConfig, kernel: &Kernel) -> Result<Option<f64>> {
    match cfg.period {
        Some(PeriodSpec::Value(p)) => Ok(Some(p)),
        Some(PeriodSpec::Recipe) => kernel.single_mode_period().map(Some).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "grid.period: no single-mode period exists for kernel {}",
                kernel.label()
            ))
        }),
        None => Ok(None),
    }
}

fn need_period(cfg: &ExperimentConfig, kernel: &Kernel) -> Result<f64> {
    resolve_period(cfg, kernel)?
        .ok_or_else(|| Error::InvalidArgument(format!("grid.period is required for {}", cfg.kind)))
}

fn need_t_end(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.integration
        .t_end
        .ok_or_else(|| Error::InvalidArgument(format!("integration.t_end is required for {}", cfg.kind)))
}

fn single_mu(cfg: &ExperimentConfig) -> Result<f64> {
    cfg.mu
        .ok_or_else(|| Error::InvalidArgument(format!("model.mu is required for {}", cfg.kind)))
}

/// Runs the experiment into `cfg.output_dir` (created if needed).
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.output_dir)?;
    let kernel = cfg.kernel.build()?;
    let out = cfg.output_dir.as_path();
    match cfg.kind {
        Kind::Kernel => kernel_report(cfg, &kernel, out),
        Kind::Stability => stability(cfg, &kernel, out),
        Kind::Steady => steady(cfg, &kernel, out),
        Kind::Evolve => evolve(cfg, &kernel, out),
        Kind::Spread => spread(cfg, &kernel, out),
        Kind::Counterexample => counterexample(cfg, out),
        Kind::Sweep => sweep(cfg, out),
    }
}

fn kernel_report(cfg: &ExperimentConfig, kernel: &Kernel, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::default();
    let mut info = Csv::new(&["key", "value"]);
    info.row(&[&"kernel", &kernel.label()]);
    info.row(&[&"atomic", &kernel.is_atomic()]);
    o.lines.push(format!("kernel {}", kernel.label()));
    if let Ok((sigma, eta)) = kernel.window_bound() {
        info.row(&[&"window_sigma", &sigma]);
        info.row(&[&"window_eta", &eta]);
        o.lines.push(format!("window bound: sigma = {sigma}, eta = {eta}"));
        o.metrics.push(("sigma", sigma));
        o.metrics.push(("eta", eta));
    }
    if let Some(p) = kernel.single_mode_period() {
        info.row(&[&"single_mode_period", &p]);
        o.lines.push(format!("single-mode period L = {p}"));
    }
    let period = resolve_period(cfg, kernel)?;
    let k_max = cfg.stability.k_max.unwrap_or(64);
    let xi_max = match period {
        Some(p) => k_max as f64 / p,
        None => 8.0,
    };
    let mut transform = Csv::new(&["xi", "phi_hat"]);
    for i in 0..=400 {
        let xi = xi_max * i as f64 / 400.0;
        transform.row(&[&xi, &kernel.fourier(xi)]);
    }
    transform.write(&out.join("transform.csv"))?;
    if !kernel.is_atomic() {
        let reach = period.map_or(4.0, |p| 0.5 * p);
        let mut density = Csv::new(&["x", "phi"]);
        for i in 0..=400 {
            let x = -reach + 2.0 * reach * i as f64 / 400.0;
            density.row(&[&x, &kernel.density(x)?]);
        }
        density.write(&out.join("density.csv"))?;
    }
    if let Some(p) = period {
        let report = kernel.check_hypothesis(p, k_max);
        let mut h = Csv::new(&["k", "xi", "phi_hat", "negative"]);
        for (k, v) in report.values.iter().enumerate() {
            h.row(&[&k, &(k as f64 / p), v, &(*v < -crate::kernel::TOL_FOURIER)]);
        }
        h.write(&out.join("hypothesis.csv"))?;
        info.row(&[&"period", &p]);
        info.row(&[&"hypothesis_satisfied", &report.satisfied]);
        info.row(&[&"negative_modes", &report.negative_count()]);
        if let Some(k0) = report.k0 {
            let ms = mu_star(kernel, p, k0)?;
            info.row(&[&"k0", &k0]);
            info.row(&[&"mu_star", &ms]);
            o.lines.push(format!("single negative mode k0 = {k0} at L = {p}; mu* = {ms}"));
            o.metrics.push(("mu_star", ms));
        } else {
            o.lines.push(format!(
                "L = {p}: {} negative modes up to k = {k_max}; single-mode condition fails",
                report.negative_count()
            ));
        }
    }
    info.write(&out.join("kernel.csv"))?;
    Ok(o)
}

fn stability(cfg: &ExperimentConfig, kernel: &Kernel, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::default();
    let period = need_period(cfg, kernel)?;
    let n = cfg.n_or_default();
    let k_max = cfg.stability.k_max.unwrap_or(n / 2);
    let report = kernel.check_hypothesis(period, k_max);
    let thresholds = sharp_thresholds(kernel, period, k_max);
    let bound = contraction_bound(period);

    let mut info = Csv::new(&["key", "value"]);
    info.row(&[&"period", &period]);
    info.row(&[&"k_max", &k_max]);
    info.row(&[&"hypothesis_satisfied", &report.satisfied]);
    let mut line = String::new();
    if let Some(k0) = report.k0 {
        let ms = mu_star(kernel, period, k0)?;
        info.row(&[&"k0", &k0]);
        info.row(&[&"mu_star", &ms]);
        line.push_str(&format!("mu* = {ms} (k0 = {k0}); "));
    } else {
        line.push_str("single-mode condition fails; ");
    }
    match thresholds.pde {
        Some((m, k)) => {
            info.row(&[&"pde_threshold", &m]);
            info.row(&[&"pde_threshold_mode", &k]);
            line.push_str(&format!("PDE threshold {m} (k = {k}); "));
        }
        None => line.push_str("no destabilizing mode; "),
    }
    info.row(&[&"operator_bound", &thresholds.operator]);
    info.row(&[&"contraction_bound", &bound]);
    line.push_str(&format!(
        "operator contraction up to mu = {}; sufficient bound {bound}",
        thresholds.operator
    ));
    info.write(&out.join("thresholds.csv"))?;
    o.lines.push(line);

    let mut spectrum = Csv::new(&["mu", "k", "lambda_k", "s_k", "unstable"]);
    let mut summary = Csv::new(&["mu", "spectral_radius", "unstable_count", "max_s"]);
    let mut numeric = Csv::new(&["mu", "index", "eigenvalue"]);
    for mu in cfg.mu_list() {
        let ms = ModeSpectrum::new(mu, period, kernel, k_max);
        for k in 0..=k_max {
            spectrum.row(&[&mu, &k, &ms.lambda[k], &ms.s[k], &(ms.lambda[k] > 1.0)]);
        }
        let max_s = ms.s.iter().skip(1).fold(f64::NEG_INFINITY, |m, s| m.max(*s));
        let rho = ms.spectral_radius();
        summary.row(&[&mu, &rho, &ms.unstable_modes.len(), &max_s]);
        o.metrics = vec![
            ("spectral_radius", rho),
            ("unstable_count", ms.unstable_modes.len() as f64),
            ("max_s", max_s),
        ];
        if cfg.stability.full_spectrum {
            let grid = Grid::new(period, n)?;
            for (i, ev) in numeric_dt_spectrum_full(mu, grid, kernel)?.iter().enumerate() {
                numeric.row(&[&mu, &i, ev]);
            }
        }
    }
    spectrum.write(&out.join("spectrum.csv"))?;
    summary.write(&out.join("summary.csv"))?;
    if cfg.stability.full_spectrum {
        numeric.write(&out.join("numeric_spectrum.csv"))?;
    }
    Ok(o)
}

fn steady(cfg: &ExperimentConfig, kernel: &Kernel, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::default();
    let period = need_period(cfg, kernel)?;
    let mu = single_mu(cfg)?;
    let grid = Grid::new(period, cfg.n_or_default())?;
    let k0 = cfg
        .steady
        .k0
        .or_else(|| kernel.check_hypothesis(period, grid.nyquist()).k0)
        .unwrap_or(1);
    let threshold = mu_star(kernel, period, k0).ok();
    let deflate = cfg
        .steady
        .deflate
        .unwrap_or_else(|| threshold.is_some_and(|t| mu > t));
    let opts = NewtonOptions {
        even_restrict: cfg.steady.even_restrict,
        solver: cfg.steady.solver,
        deflate_constant: deflate,
        ..Default::default()
    };
    let states: Vec<SteadyState> = match cfg.steady.continue_to {
        Some((to, steps)) => continuation(kernel, grid, k0, mu, to, steps, &opts)?,
        None => {
            let seed = match &cfg.initial {
                Some(ic) => ic.sample(grid)?,
                None => Field::cosine(grid, 1.0, cfg.steady.seed_amplitude, k0)?,
            };
            vec![find_steady(mu, kernel, &seed, &opts)?]
        }
    };

    fs::create_dir_all(out.join("states"))?;
    let mut branch = Csv::new(&[
        "mu", "amplitude", "residual", "min_u", "max_u", "newton_steps", "constant", "bounds_hold",
    ]);
    for (i, s) in states.iter().enumerate() {
        let b = verify_bounds(s, kernel)?;
        branch.row(&[
            &s.mu,
            &s.amplitude(),
            &s.residual_norm,
            &s.min_u,
            &s.max_u,
            &s.newton_steps,
            &s.is_constant,
            &b.holds,
        ]);
        s.u.write_csv(&out.join(format!("states/state_{i:03}.csv")))?;
    }
    branch.write(&out.join("branch.csv"))?;
    let last = states.last().expect("at least one state");
    o.lines.push(format!(
        "{} state(s); last at mu = {}: amplitude {:.6}, residual {:.2e}, min {:.6}, max {:.6}",
        states.len(),
        last.mu,
        last.amplitude(),
        last.residual_norm,
        last.min_u,
        last.max_u
    ));
    o.metrics = vec![
        ("amplitude", last.amplitude()),
        ("residual", last.residual_norm),
        ("min_u", last.min_u),
        ("max_u", last.max_u),
        ("newton_steps", last.newton_steps as f64),
    ];
    Ok(o)
}

fn evolve(cfg: &ExperimentConfig, kernel: &Kernel, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::default();
    let period = need_period(cfg, kernel)?;
    let mu = single_mu(cfg)?;
    let t_end = need_t_end(cfg)?;
    let grid = Grid::new(period, cfg.n_or_default())?;
    let ic = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("initial condition required for evolve".into()))?;
    let u0 = ic.sample(grid)?;
    let opts = EvolveOptions {
        scheme: cfg.integration.scheme,
        dt: cfg.integration.dt,
        record_every: cfg.integration.record_every,
        noise_floor: cfg.integration.noise_floor,
        keep_states: false,
        ..Default::default()
    };
    let mut cert = CertificateBuilder::new(kernel).ok();
    let sigma = cert.as_ref().map(|_| kernel.window_bound()).transpose()?.map(|w| w.0);
    fs::create_dir_all(out.join("snapshots"))?;
    let mut summary = Csv::new(&["t", "sup_u", "sup_v", "min_u", "mass"]);
    let mut index = 0usize;
    let mut last_min = f64::NAN;
    let mut last_mass = f64::NAN;
    let traj = evolve_with(&u0, mu, kernel, t_end, &opts, |state| {
        let sup_v = match sigma {
            Some(s) => local_average(&state.u, s)?.sup_norm(),
            None => f64::NAN,
        };
        if let Some(c) = cert.as_mut() {
            c.observe(state)?;
        }
        last_min = state.u.min();
        last_mass = state.u.integral();
        summary.row(&[&state.t, &state.u.sup_norm(), &sup_v, &last_min, &last_mass]);
        state.u.write_binary(&out.join(format!("snapshots/snap_{index:05}.bin")))?;
        index += 1;
        Ok(())
    });
    summary.write(&out.join("summary.csv"))?;
    let traj = traj?;
    o.lines.push(format!(
        "evolved to T = {t_end} in {} steps of dt = {:.3e}; {index} snapshots",
        traj.steps, traj.dt
    ));
    o.metrics = vec![("min_u_final", last_min), ("mass_final", last_mass)];
    match cert {
        Some(c) => {
            let b = c.finish();
            let mut csv = Csv::new(&["key", "value"]);
            csv.row(&[&"sigma", &b.sigma]);
            csv.row(&[&"eta", &b.eta]);
            csv.row(&[&"m_theoretical", &b.m_theoretical]);
            csv.row(&[&"sup_v_observed", &b.sup_v_observed]);
            csv.row(&[&"sup_u_observed", &b.sup_u_observed]);
            csv.row(&[&"holds", &b.holds]);
            csv.write(&out.join("certificate.csv"))?;
            o.lines.push(format!(
                "local-average bound: sup v = {:.6} vs M = {:.6} ({}); sup u = {:.6}",
                b.sup_v_observed,
                b.m_theoretical,
                if b.holds { "holds" } else { "VIOLATED" },
                b.sup_u_observed
            ));
            o.metrics.push(("sup_u", b.sup_u_observed));
            o.metrics.push(("sup_v", b.sup_v_observed));
            o.metrics.push(("m_theoretical", b.m_theoretical));
        }
        None => o.lines.push("atomic kernel: no a priori bound is available".into()),
    }
    Ok(o)
}

fn spread(cfg: &ExperimentConfig, kernel: &Kernel, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::default();
    let mu = single_mu(cfg)?;
    let t_end = need_t_end(cfg)?;
    let mut sc = SpreadConfig::for_mu(mu, t_end);
    if let Some(p) = resolve_period(cfg, kernel)? {
        sc.period = p;
        sc.n = cfg.n.unwrap_or(((p * 16.0) as usize).next_power_of_two());
    } else if let Some(n) = cfg.n {
        sc.n = n;
    }
    sc.dt = cfg.integration.dt;
    sc.record_every = cfg.integration.record_every;
    sc.scheme = cfg.integration.scheme;
    if let Some(f) = cfg.integration.noise_floor {
        sc.noise_floor = f;
    }
    sc.levels = cfg.spread.levels.clone();
    sc.half_width = cfg.spread.half_width;
    sc.height = cfg.spread.height;
    sc.t_min = cfg.spread.t_min;
    sc.c_in_fraction = cfg.spread.c_in_fraction;

    let r = spreading_experiment(mu, kernel, &sc)?;
    let mut trace = Csv::new(&["level", "t", "left", "right"]);
    for tr in &r.traces {
        for i in 0..tr.times.len() {
            trace.row(&[&tr.level, &tr.times[i], &tr.left[i], &tr.right[i]]);
        }
    }
    trace.write(&out.join("trace.csv"))?;
    let c = r.theoretical_speed();
    let mut fit = Csv::new(&[
        "level", "right_speed", "right_stderr", "left_speed", "left_stderr", "theoretical", "ratio",
    ]);
    for (tr, s) in r.traces.iter().zip(&r.speeds) {
        fit.row(&[
            &tr.level,
            &s.right_speed(),
            &s.right.stderr,
            &s.left_speed(),
            &s.left.stderr,
            &c,
            &(s.right_speed() / c),
        ]);
        o.lines.push(format!(
            "level {}: speed {:.4} right, {:.4} left (2 sqrt mu = {:.4}, ratio {:.4})",
            tr.level,
            s.right_speed(),
            s.left_speed(),
            c,
            s.right_speed() / c
        ));
    }
    fit.write(&out.join("fit.csv"))?;
    let mut env = Csv::new(&["key", "value"]);
    env.row(&[&"period", &sc.period]);
    env.row(&[&"n", &sc.n]);
    env.row(&[&"dt", &r.dt]);
    env.row(&[&"worst_ratio", &r.envelope.worst_ratio]);
    env.row(&[&"violations", &r.envelope.violations]);
    env.row(&[&"points", &r.envelope.points]);
    env.row(&[&"holds", &r.envelope.holds()]);
    env.row(&[&"c_in", &r.c_in]);
    env.row(&[&"interior_min", &r.interior_min]);
    env.write(&out.join("envelope.csv"))?;
    r.final_state.write_csv(&out.join("final.csv"))?;
    o.lines.push(format!(
        "heat envelope {} ({} violations of {} points, worst ratio {:.3}); min u on |x| <= c_in T: {:.4}",
        if r.envelope.holds() { "dominates" } else { "VIOLATED" },
        r.envelope.violations,
        r.envelope.points,
        r.envelope.worst_ratio,
        r.interior_min
    ));
    let last = r.speeds.last().expect("at least one level");
    o.metrics = vec![
        ("speed", last.right_speed()),
        ("speed_ratio", last.right_speed() / c),
        ("envelope_worst", r.envelope.worst_ratio),
        ("interior_min", r.interior_min),
    ];
    Ok(o)
}

fn counterexample(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mut o = Outcome::default();
    let crate::cli::config::KernelSpec::DiracPair { shift } = cfg.kernel else {
        return Err(Error::InvalidArgument("counterexample requires a dirac_pair kernel".into()));
    };
    let mu = single_mu(cfg)?;
    let t_end = need_t_end(cfg)?;
    let period = match cfg.period {
        Some(PeriodSpec::Value(p)) => p,
        _ => 2.0 * shift,
    };
    let grid = Grid::new(period, cfg.n.unwrap_or(1024))?;
    let ce = &cfg.counterexample;
    let opts = DiracOptions {
        dt: ce.dt,
        splitting: ce.splitting,
        record_every: ce.record_every,
        w_cap: ce.w_cap,
        fit_from: 0.0,
    };
    let r = dirac_counterexample(mu, shift, ce.rho, t_end, grid, &opts)?;
    let mut growth = Csv::new(&["t", "w_sup", "u_sup", "v_sup"]);
    for i in 0..r.times.len() {
        growth.row(&[&r.times[i], &r.w_sup[i], &r.u_sup[i], &r.v_sup[i]]);
    }
    growth.write(&out.join("growth.csv"))?;
    let mut fit = Csv::new(&["key", "value"]);
    fit.row(&[&"mu", &mu]);
    fit.row(&[&"half_period", &shift]);
    fit.row(&[&"rho", &ce.rho]);
    fit.row(&[&"theoretical_rate", &r.theoretical_rate]);
    fit.row(&[&"fitted_rate", &r.fit.slope]);
    fit.row(&[&"stderr", &r.fit.stderr]);
    fit.row(&[&"relative_error", &r.relative_rate_error()]);
    fit.row(&[&"t_stop", &r.t_stop]);
    fit.row(&[&"blew_up", &r.blew_up]);
    fit.write(&out.join("fit.csv"))?;
    o.growth_signal = r.fit.slope > 0.0 && r.fit.slope > 3.0 * r.fit.stderr;
    o.lines.push(format!(
        "sup|u - v| grows at rate {:.10} (predicted {:.10}, relative error {:.2e}); sup u = {:.4e} at t = {}",
        r.fit.slope,
        r.theoretical_rate,
        r.relative_rate_error(),
        r.u_sup.last().copied().unwrap_or(f64::NAN),
        r.t_stop
    ));
    if o.growth_signal {
        o.lines.push("unbounded growth detected".into());
    }
    o.metrics = vec![
        ("fitted_rate", r.fit.slope),
        ("theoretical_rate", r.theoretical_rate),
        ("relative_error", r.relative_rate_error()),
    ];
    Ok(o)
}

fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let mus = cfg.mu_list();
    let points: Vec<ExperimentConfig> = mus
        .iter()
        .enumerate()
        .map(|(i, mu)| {
            let mut p = cfg.clone();
            p.kind = cfg.sweep.experiment;
            p.mu = Some(*mu);
            p.mu_range = None;
            p.mu_values = None;
            p.steady.continue_to = None;
            p.output_dir = out.join(format!("points/mu_{i:03}"));
            p
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<Outcome>> = pool.install(|| points.par_iter().map(run).collect());

    let names: Vec<&'static str> = results
        .iter()
        .find_map(|r| r.as_ref().ok())
        .map(|o| o.metrics.iter().map(|(k, _)| *k).collect())
        .unwrap_or_default();
    let mut header = vec!["mu", "status"];
    header.extend(&names);
    let mut csv = Csv::new(&header);
    let mut o = Outcome::default();
    let mut failures = 0;
    for (mu, r) in mus.iter().zip(results) {
        let mut cells: Vec<String> = vec![mu.to_string()];
        match r {
            Ok(ref p) => {
                cells.push("ok".into());
                for name in &names {
                    let v = p.metrics.iter().find(|(k, _)| k == name).map_or(f64::NAN, |(_, v)| *v);
                    cells.push(v.to_string());
                }
            }
            Err(e) => {
                failures += 1;
                o.numerical_failure |= e.is_numerical();
                if !e.is_numerical() {
                    return Err(Error::AtParameter { mu: *mu, source: Box::new(e) });
                }
                cells.push(format!("\"{}\"", e.to_string().replace('"', "'")));
                cells.extend(names.iter().map(|_| "NaN".to_string()));
            }
        }
        let refs: Vec<&dyn std::fmt::Display> = cells.iter().map(|c| c as &dyn std::fmt::Display).collect();
        csv.row(&refs);
    }
    csv.write(&out.join("sweep.csv"))?;
    o.lines.push(format!(
        "{} sweep over {} values of mu: {} ok, {failures} failed",
        cfg.sweep.experiment,
        mus.len(),
        mus.len() - failures
    ));
    Ok(o)
}
