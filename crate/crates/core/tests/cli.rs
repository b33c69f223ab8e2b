mod common;

use std::fs;
use std::path::Path;

use nlkpp::cli::config::{parse_config, PeriodSpec, DEFAULT_N, DEFAULT_NOISE_FLOOR};
use nlkpp::cli::{Kind, EXIT_GROWTH, EXIT_INPUT, EXIT_OK};

use common::{example_configs, list_files, rerun_identical, run_cli};

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn minimal_stability_config_gets_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "s.toml", "[kernel]\nfamily = \"gaussian\"\nwidth = 1.0\n[grid]\nperiod = 10.0\n[model]\nmu = 2.0\n");
    let cfg = parse_config(&p, Kind::Stability).unwrap();
    assert_eq!(cfg.kind, Kind::Stability);
    assert_eq!(cfg.n_or_default(), DEFAULT_N);
    assert_eq!(cfg.period, Some(PeriodSpec::Value(10.0)));
    assert_eq!(cfg.mu_list(), vec![2.0]);
    assert_eq!(cfg.integration.noise_floor, Some(DEFAULT_NOISE_FLOOR));
    assert!(!cfg.stability.full_spectrum);
    assert_eq!(cfg.output_dir, Path::new("nlkpp-out/stability"));
}

#[test]
fn errors_name_their_keys_and_are_all_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(
        tmp.path(),
        "bad.toml",
        "[kernel]\nfamily = \"gaussian\"\nwidth = 1.0\nwidht = 2.0\n[grid]\nperiod = 10.0\nn = 100\n[model]\nmu = -1.0\n",
    );
    let errs = parse_config(&p, Kind::Stability).unwrap_err().0;
    assert!(errs.iter().any(|e| e.contains("mu")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("grid.n")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("widht")), "{errs:?}");
    assert!(errs.len() >= 3);
}

#[test]
fn counterexample_needs_a_dirac_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let p = write(tmp.path(), "c.toml", "[kernel]\nfamily = \"gaussian\"\nwidth = 1.0\n[model]\nmu = 2.0\n[integration]\nt_end = 5.0\n");
    let errs = parse_config(&p, Kind::Counterexample).unwrap_err().0;
    assert!(errs.iter().any(|e| e.contains("kernel")), "{errs:?}");
    let out = tmp.path().join("o");
    let (code, _, err) = run_cli(&["counterexample", "--config", p.to_str().unwrap(), "-o", out.to_str().unwrap()], None);
    assert_eq!(code, EXIT_INPUT, "{err}");
}

#[test]
fn sweep_writes_one_row_per_mu() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sweep");
    let (code, _, err) = run_cli(
        &["sweep", "--experiment", "stability", "--kernel", "gaussian:s=1", "-L", "10", "-n", "64",
          "--mu-range", "0.5:4:7", "-j", "3", "-o", out.to_str().unwrap()],
        None,
    );
    assert_eq!(code, EXIT_OK, "{err}");
    let table = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for (i, r) in rows.iter().enumerate() {
        let mu: f64 = r.split(',').next().unwrap().parse().unwrap();
        assert!((mu - (0.5 + 0.5 * i as f64)).abs() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = |s: &str| tmp.path().join(s).to_str().unwrap().to_string();
    let (code, _, err) = run_cli(&["stability", "--kernel", "gaussian:s=1", "-L", "10", "--mu", "-2", "-o", &o("a")], None);
    assert_eq!(code, EXIT_INPUT);
    assert!(err.contains("mu"), "{err}");
    assert_eq!(run_cli(&["stability", "--bogus"], None).0, EXIT_INPUT);
    assert_eq!(run_cli(&["kernel", "--kernel", "gaussian:s=1", "-L", "10", "-n", "100", "-o", &o("b")], None).0, EXIT_INPUT);
    let (code, _, err) = run_cli(
        &["counterexample", "--kernel", "dirac_pair:shift=3.141592653589793", "--mu", "2", "-T", "12", "-o", &o("c")],
        None,
    );
    assert_eq!(code, EXIT_GROWTH, "{err}");
    let (code, _, err) = run_cli(&["kernel", "--kernel", "phi_beta:beta=100", "-L", "recipe", "-o", &o("d")], None);
    assert_eq!(code, EXIT_OK, "{err}");
}

#[test]
fn numerical_failure_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    // Eight points per unit length cannot hold a front this steep.
    let (code, _, err) = run_cli(
        &["evolve", "--kernel", "gaussian:s=1", "-L", "8", "-n", "64", "--mu", "400",
          "--initial", "bump:half_width=0.5,height=1", "-T", "1", "-o", out.to_str().unwrap()],
        None,
    );
    assert_eq!(code, nlkpp::cli::EXIT_NUMERICAL, "{err}");
    assert!(out.join("summary.csv").exists());
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let from_env = tmp.path().join("env");
    let from_flag = tmp.path().join("flag");
    let from_cfg = tmp.path().join("cfg");
    let cfg = write(
        tmp.path(),
        "k.toml",
        &format!("output_dir = {:?}\n[kernel]\nfamily = \"gaussian\"\nwidth = 1.0\n[grid]\nperiod = 10.0\n", from_cfg.to_str().unwrap()),
    );
    let c = cfg.to_str().unwrap();
    assert_eq!(run_cli(&["kernel", "-c", c], None).0, EXIT_OK);
    assert!(from_cfg.join("manifest.csv").exists());
    assert_eq!(run_cli(&["kernel", "-c", c], Some(&from_env)).0, EXIT_OK);
    assert!(from_env.join("manifest.csv").exists());
    assert_eq!(run_cli(&["kernel", "-c", c, "-o", from_flag.to_str().unwrap()], Some(&from_env)).0, EXIT_OK);
    assert!(from_flag.join("manifest.csv").exists());
}

#[test]
fn manifest_covers_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("m");
    let (code, _, _) = run_cli(&["stability", "--kernel", "top_hat:a=0.5", "-L", "6", "--mu", "1", "--full", "-o", out.to_str().unwrap()], None);
    assert_eq!(code, EXIT_OK);
    let manifest = fs::read_to_string(out.join("manifest.csv")).unwrap();
    let listed: Vec<&str> = manifest.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    let on_disk: Vec<String> = list_files(&out)
        .into_iter()
        .map(|p| p.to_string_lossy().into_owned())
        .filter(|p| p != "manifest.csv")
        .collect();
    assert_eq!(listed, on_disk);
}

#[test]
fn every_example_config_parses() {
    for p in example_configs() {
        let text = fs::read_to_string(&p).unwrap();
        let kind: toml::Table = toml::from_str(&text).unwrap();
        let kind = Kind::parse(kind["kind"].as_str().unwrap()).unwrap();
        parse_config(&p, kind).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn example_configs_rerun_byte_identically() {
    let configs = example_configs();
    assert!(configs.len() >= 7);
    for p in configs {
        let code = rerun_identical(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let expected = if p.to_string_lossy().contains("counterexample") { EXIT_GROWTH } else { EXIT_OK };
        assert_eq!(code, expected, "{}", p.display());
    }
}
