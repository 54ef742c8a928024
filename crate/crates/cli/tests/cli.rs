//! End-to-end tests of the command-line surface: exit codes, output files,
//! provenance, determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_multifluid"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const BASE_CONFIG: &str = "\
[law]
kind = power
rho_ref = 1.0
mu_ref = 0.5
coeff = affine:1.0,0.2,0.9,1.2
gamma = affine:1.34,0.04,1.32,1.38

[window]
gamma_lo = 1.3
gamma_hi = 1.4

[psi]
alpha_lo = 1.0
alpha_hi = 0.5

[grid]
n = 64
length = 6.283185307179586

[time]
t_end = 0.05
cfl = 0.4

[init]
family = gaussian-rho-bump
rho_amp = 0.15
rho_radius = 1.2

[output]
prefix = t
diag_interval = 0.01

[audit]
rho_min = 0.1
rho_max = 10.0
samples = 32
";

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).arg("--out").arg(dir).output().expect("binary must run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

#[test]
fn check_law_passes_for_conforming_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ok.cfg", BASE_CONFIG);
    let out = run_in(tmp.path(), &["check-law", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(tmp.path().join("t_audit.txt")).unwrap();
    assert!(report.starts_with("# multifluid"));
    assert!(report.contains("pass = true"));
}

#[test]
fn check_law_rejects_inadmissible_window_with_reason() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_text = BASE_CONFIG.replace("gamma_hi = 1.4", "gamma_hi = 2.0");
    let cfg = write_config(tmp.path(), "bad.cfg", &cfg_text);
    let out = run_in(tmp.path(), &["check-law", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let report = std::fs::read_to_string(tmp.path().join("law_audit.txt")).unwrap();
    assert!(report.contains("gamma-window"), "report: {report}");
    assert!(report.contains("pass = false"));
}

#[test]
fn malformed_config_names_key_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_text = format!("{BASE_CONFIG}\n[grid]\nwavelength = 7\n");
    let cfg = write_config(tmp.path(), "typo.cfg", &cfg_text);
    let out = run_in(tmp.path(), &["check-law", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wavelength"), "stderr: {err}");
    assert!(err.contains("line"), "stderr: {err}");
}

#[test]
fn run_completes_and_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", BASE_CONFIG);
    let out = run_in(tmp.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let diag1 = std::fs::read(tmp.path().join("t_diagnostics.csv")).unwrap();
    assert!(!diag1.is_empty());
    // H1 decreases monotonically on this benchmark.
    let text = String::from_utf8_lossy(&diag1);
    let h1: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t'))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(h1.len() >= 5);
    assert!(h1.windows(2).all(|w| w[1] <= w[0] + 1e-13), "H1 not monotone: {h1:?}");

    let out2 = run_in(tmp.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out2), 0);
    let diag2 = std::fs::read(tmp.path().join("t_diagnostics.csv")).unwrap();
    assert_eq!(diag1, diag2, "reruns must be byte-identical");
}

#[test]
fn cfl_override_ten_diverges_with_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", BASE_CONFIG);
    let out = run_in(
        tmp.path(),
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--set",
            "time.cfl=10.0",
            "--set",
            "time.t_end=0.5",
            "--set",
            "output.diag_interval=0.05",
        ],
    );
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("simulation-diverged"), "stderr: {err}");
    assert!(err.contains("cell"), "divergence must name the cell: {err}");
    // Partial diagnostics were flushed.
    assert!(tmp.path().join("t_diagnostics.csv").exists());
}

#[test]
fn strict_flag_turns_failing_budget_verdict_into_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", BASE_CONFIG);
    // A very coarse record cadence makes the trapezoidal budget quadrature
    // of the decaying dissipation overshoot the tolerance while the
    // integration itself completes fine.
    let args_common = [
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "init.family=velocity-pulse",
        "--set",
        "init.u_amp=0.3",
        "--set",
        "time.t_end=0.2",
        "--set",
        "output.diag_interval=0.1",
    ];
    let relaxed = run_in(tmp.path(), &args_common);
    assert_eq!(code(&relaxed), 0, "without --strict the run exit stays 0");
    let verdicts = std::fs::read_to_string(tmp.path().join("t_verdicts.txt")).unwrap();
    assert!(verdicts.contains("budget.verdict = FAIL"), "{verdicts}");

    let mut strict_args = args_common.to_vec();
    strict_args.push("--strict");
    let strict = run_in(tmp.path(), &strict_args);
    assert_eq!(code(&strict), 4, "stderr: {}", String::from_utf8_lossy(&strict.stderr));
}

#[test]
fn plot_data_extracts_columns_and_rejects_unknown() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "run.cfg", BASE_CONFIG);
    assert_eq!(code(&run_in(tmp.path(), &["run", "--config", cfg.to_str().unwrap()])), 0);

    let diag = tmp.path().join("t_diagnostics.csv");
    let out = run_in(
        tmp.path(),
        &["plot-data", "--input", diag.to_str().unwrap(), "--column", "H1"],
    );
    assert_eq!(code(&out), 0);
    let extracted = std::fs::read_to_string(tmp.path().join("t_diagnostics_H1.csv")).unwrap();
    let diag_rows = std::fs::read_to_string(&diag)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    let plot_rows = extracted.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(diag_rows, plot_rows, "row count must be preserved");
    assert!(extracted.contains("t,H1"));

    // Snapshot column extraction.
    let snap = tmp.path().join("t_final.csv");
    let out = run_in(
        tmp.path(),
        &["plot-data", "--input", snap.to_str().unwrap(), "--column", "rho"],
    );
    assert_eq!(code(&out), 0);
    let rho = std::fs::read_to_string(tmp.path().join("t_final_rho.csv")).unwrap();
    assert!(rho.contains("x,rho"));

    // Unknown column: exit 1 and the available columns are listed.
    let out = run_in(
        tmp.path(),
        &["plot-data", "--input", diag.to_str().unwrap(), "--column", "bogus"],
    );
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("available") && err.contains("mugrad_sup"), "{err}");
}

#[test]
fn compare_identical_configs_reports_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", BASE_CONFIG);
    let out = run_in(
        tmp.path(),
        &[
            "compare",
            "--config",
            cfg.to_str().unwrap(),
            "--config2",
            cfg.to_str().unwrap(),
        ],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(tmp.path().join("t_stability.txt")).unwrap();
    assert!(report.contains("stability.verdict = IDENTICAL"), "{report}");
    assert!(report.contains("sup_x = 0.000000e0"), "{report}");
}

#[test]
fn compare_perturbed_config_passes_with_finite_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "a.cfg", BASE_CONFIG);
    let b_text = BASE_CONFIG.replace("rho_amp = 0.15", "rho_amp = 0.151");
    let b = write_config(tmp.path(), "b.cfg", &b_text);
    let out = run_in(
        tmp.path(),
        &["compare", "--config", a.to_str().unwrap(), "--config2", b.to_str().unwrap()],
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(tmp.path().join("t_stability.txt")).unwrap();
    assert!(report.contains("stability.verdict = PASS"), "{report}");
    assert!(!report.contains("rate = undefined"), "{report}");
    let csv = std::fs::read_to_string(tmp.path().join("t_stability.csv")).unwrap();
    assert!(csv.contains("t,X,X_tau,X_zeta,X_chi"));
}

#[test]
fn compare_mismatched_grids_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write_config(tmp.path(), "a.cfg", BASE_CONFIG);
    let b_text = BASE_CONFIG.replace("n = 64", "n = 32");
    let b = write_config(tmp.path(), "b.cfg", &b_text);
    let out = run_in(
        tmp.path(),
        &["compare", "--config", a.to_str().unwrap(), "--config2", b.to_str().unwrap()],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("identical grids"));
}

#[test]
fn output_dir_env_var_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let envdir = tmp.path().join("envout");
    let cfg = write_config(tmp.path(), "run.cfg", BASE_CONFIG);
    let out = bin()
        .args(["run", "--config", cfg.to_str().unwrap()])
        .env("MULTIFLUID_OUTPUT_DIR", &envdir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(envdir.join("t_diagnostics.csv").exists());
}

#[test]
fn skip_audit_allows_nonconforming_law_to_run() {
    let tmp = tempfile::tempdir().unwrap();
    // gamma = 2 violates the (1.3, 1.4) window but integrates fine.
    let cfg_text = BASE_CONFIG
        .replace("gamma = affine:1.34,0.04,1.32,1.38", "gamma = 2.0")
        .replace("rho_max = 10.0", "rho_max = 100.0");
    let cfg = write_config(tmp.path(), "run.cfg", &cfg_text);
    let audited = run_in(tmp.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&audited), 2, "audit must stop the run");
    let skipped = run_in(
        tmp.path(),
        &["run", "--config", cfg.to_str().unwrap(), "--skip-audit"],
    );
    assert_eq!(code(&skipped), 0, "stderr: {}", String::from_utf8_lossy(&skipped.stderr));
    let verdicts = std::fs::read_to_string(tmp.path().join("t_verdicts.txt")).unwrap();
    assert!(verdicts.contains("audit.verdict = SKIPPED"), "{verdicts}");
}

#[test]
fn mms_subcommand_writes_order_table() {
    let tmp = tempfile::tempdir().unwrap();
    // Pressure above 1 keeps the psi branch point out of the manufactured
    // fields; tiny sizes keep the test fast.
    let cfg_text = format!(
        "{BASE_CONFIG}
[mms]
sizes = 32,64
t_end = 0.05
"
    )
    .replace("coeff = affine:1.0,0.2,0.9,1.2", "coeff = affine:2.0,0.2,1.8,2.3");
    let cfg = write_config(tmp.path(), "mms.cfg", &cfg_text);
    let out = run_in(tmp.path(), &["mms", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(tmp.path().join("t_mms.csv")).unwrap();
    assert!(table.contains("n,err_rho,err_u,err_mu"), "{table}");
    assert!(table.lines().filter(|l| !l.starts_with('#')).count() >= 3);
}
