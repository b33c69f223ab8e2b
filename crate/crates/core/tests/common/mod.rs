//! Independent oracles shared by the integration tests. Nothing here calls
//! the transform or time-stepping code under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use nlkpp::kernel::Kernel;

/// Composite Simpson rule with `intervals` (rounded up to even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `int phi(x) cos(2 pi xi x) dx` by quadrature of the density.
pub fn transform_by_quadrature(kernel: &Kernel, xi: f64, reach: f64, intervals: usize) -> f64 {
    simpson(|x| kernel.density(x).unwrap() * (2.0 * PI * xi * x).cos(), -reach, reach, intervals)
}

/// Quadrature reach and panel count resolving each analytic density.
pub fn quadrature_setup(k: &Kernel) -> (f64, usize) {
    match k.label().as_str() {
        l if l.starts_with("gaussian") => (12.0, 6000),
        l if l.starts_with("tophat") => (0.75, 4000),
        _ => (9.0, 60000),
    }
}

/// O(n^2) periodic convolution `sum_j h phi_P(x_i - x_j) u_j` with the
/// periodized density.
pub fn direct_convolution(kernel: &Kernel, period: f64, u: &[f64], images: i32) -> Vec<f64> {
    let n = u.len();
    let h = period / n as f64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = (i as f64 - j as f64) * h;
                    let phi: f64 = (-images..=images)
                        .map(|m| kernel.density(d + m as f64 * period).unwrap())
                        .sum();
                    h * phi * u[j]
                })
                .sum()
        })
        .collect()
}

/// Real and imaginary parts of the unnormalized DFT, by direct summation.
pub fn naive_dft(u: &[f64]) -> Vec<(f64, f64)> {
    let n = u.len();
    (0..n)
        .map(|m| {
            u.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, v)| {
                let a = -2.0 * PI * (m * j % n) as f64 / n as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .collect()
}

fn inverse_naive_dft(c: &[(f64, f64)]) -> Vec<f64> {
    let n = c.len();
    (0..n)
        .map(|j| {
            c.iter()
                .enumerate()
                .map(|(m, (re, im))| {
                    let a = 2.0 * PI * (m * j % n) as f64 / n as f64;
                    re * a.cos() - im * a.sin()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

fn signed(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    }
}

/// Method-of-lines right-hand side `u'' + mu u (1 - phi * u)` via naive DFTs.
fn rhs(kernel: &Kernel, period: f64, mu: f64, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let c = naive_dft(u);
    let lap: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .map(|(m, (re, im))| {
            let k = 2.0 * PI * signed(m, n) / period;
            (-k * k * re, -k * k * im)
        })
        .collect();
    let conv: Vec<(f64, f64)> = c
        .iter()
        .enumerate()
        .map(|(m, (re, im))| {
            let f = kernel.fourier(signed(m, n) / period);
            (f * re, f * im)
        })
        .collect();
    let d2 = inverse_naive_dft(&lap);
    let pu = inverse_naive_dft(&conv);
    (0..n).map(|j| d2[j] + mu * u[j] * (1.0 - pu[j])).collect()
}

/// Classical RK4 on the semi-discrete system; a reference independent of
/// the library's splitting and exponential integrators.
pub fn rk4_reference(kernel: &Kernel, period: f64, mu: f64, u0: &[f64], t_end: f64, steps: usize) -> Vec<f64> {
    let dt = t_end / steps as f64;
    let mut u = u0.to_vec();
    let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(x, y)| x + s * y).collect::<Vec<_>>();
    for _ in 0..steps {
        let k1 = rhs(kernel, period, mu, &u);
        let k2 = rhs(kernel, period, mu, &axpy(&u, 0.5 * dt, &k1));
        let k3 = rhs(kernel, period, mu, &axpy(&u, 0.5 * dt, &k2));
        let k4 = rhs(kernel, period, mu, &axpy(&u, dt, &k3));
        for j in 0..u.len() {
            u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    u
}

/// Logistic solution `u0 e^{mu t} / (1 + u0 (e^{mu t} - 1))`.
pub fn logistic(u0: f64, mu: f64, t: f64) -> f64 {
    let g = (mu * t).exp();
    u0 * g / (1.0 + u0 * (g - 1.0))
}

/// One of each shipped family with a density, plus a tabulated Gaussian.
pub fn density_kernels() -> Vec<Kernel> {
    let period = 20.0;
    let n = 512;
    let h = period / n as f64;
    let samples = (0..n)
        .map(|j| {
            let x = -0.5 * period + j as f64 * h;
            (-x * x / 2.25).exp()
        })
        .collect();
    vec![
        Kernel::gaussian(1.0).unwrap(),
        Kernel::top_hat(0.75).unwrap(),
        Kernel::phi_beta(100.0).unwrap(),
        Kernel::phi_beta(4.0).unwrap(),
        Kernel::tabulated(period, samples).unwrap(),
    ]
}

pub fn shipped_kernels() -> Vec<Kernel> {
    let mut k = density_kernels();
    k.push(Kernel::dirac_pair(PI).unwrap());
    k
}

/// Runs the command-line binary; returns (exit code, stdout, stderr).
pub fn run_cli(args: &[&str], env_out: Option<&std::path::Path>) -> (i32, String, String) {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_nlkpp"));
    cmd.args(args).env_remove("NLKPP_OUT");
    if let Some(dir) = env_out {
        cmd.env("NLKPP_OUT", dir);
    }
    let out = cmd.output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Relative paths of all files under `dir`, sorted.
pub fn list_files(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    fn walk(d: &std::path::Path, base: &std::path::Path, out: &mut Vec<std::path::PathBuf>) {
        for e in std::fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(&p, base, out);
            } else {
                out.push(p.strip_prefix(base).unwrap().to_path_buf());
            }
        }
    }
    let mut v = Vec::new();
    walk(dir, dir, &mut v);
    v.sort();
    v
}

/// Shipped example configs, sorted by name.
pub fn example_configs() -> Vec<std::path::PathBuf> {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    v.sort();
    v
}

/// Runs `config` twice into fresh directories and compares every artifact byte
/// for byte. Returns the exit code of the first run.
pub fn rerun_identical(config: &std::path::Path) -> Result<i32, String> {
    let sub = config.file_stem().unwrap().to_string_lossy().split('_').next().unwrap().to_string();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let cfg = config.to_str().unwrap();
    let (code_a, _, err_a) = run_cli(&[&sub, "--config", cfg, "--out", a.to_str().unwrap()], None);
    let (code_b, _, _) = run_cli(&[&sub, "--config", cfg, "--out", b.to_str().unwrap()], None);
    if code_a != code_b {
        return Err(format!("exit codes differ: {code_a} vs {code_b}"));
    }
    if code_a != 0 && code_a != 3 {
        return Err(format!("exit code {code_a}: {err_a}"));
    }
    let (fa, fb) = (list_files(&a), list_files(&b));
    if fa != fb {
        return Err("different file sets".into());
    }
    if !fa.iter().any(|f| f == std::path::Path::new("manifest.csv")) {
        return Err("no manifest".into());
    }
    for f in &fa {
        if std::fs::read(a.join(f)).unwrap() != std::fs::read(b.join(f)).unwrap() {
            return Err(format!("{} differs", f.display()));
        }
    }
    Ok(code_a)
}
