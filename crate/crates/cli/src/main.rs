//! Command-line front end: validate pressure laws, run simulations, run
//! convergence studies, compare trajectories, extract plot columns.
//!
//! Exit codes: 0 ok, 1 usage or parse error, 2 admissibility failure,
//! 3 simulation diverged, 4 verdict failure under --strict.

use multifluid::config::{build_run_config, fnv1a, ConfigFile, RunConfig};
use multifluid::constitutive::{audit_law, gamma_window_valid, AdmissibilityReport};
use multifluid::diagnostics::{
    density_bounds_check, entropy_budget_check, stability_compare, transport_invariant_check,
    StabilityVerdict,
};
use multifluid::error::Error;
use multifluid::output;
use multifluid::solver::{self, mms::TravelingWave, RunOutcome, RunParams, RHO_FLOOR_FACTOR};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_ADMISSIBILITY: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_VERDICT: u8 = 4;

const USAGE: &str = "\
usage: multifluid <subcommand> [flags]

subcommands:
  check-law   audit the configured pressure law against its window
  run         integrate the configured problem, write diagnostics + verdicts
  mms         manufactured-solution convergence study
  compare     run two configs and compare their trajectories
  plot-data   extract (abscissa, column) pairs from an output CSV

flags:
  --config PATH        run configuration file
  --config2 PATH       second configuration (compare)
  --set section.key=v  override a config entry (repeatable)
  --strict             nonzero exit when a verdict fails
  --skip-audit         integrate even if the law audit fails
  --out DIR            output directory (overrides MULTIFLUID_OUTPUT_DIR
                       and the config's output.dir)
  --input PATH         input CSV (plot-data)
  --column NAME        column to extract (plot-data)
";

struct Args {
    subcommand: String,
    config: Option<PathBuf>,
    config2: Option<PathBuf>,
    sets: Vec<String>,
    strict: bool,
    skip_audit: bool,
    out: Option<PathBuf>,
    input: Option<PathBuf>,
    column: Option<String>,
}

fn parse_args(mut argv: std::env::Args) -> Result<Args, String> {
    let _ = argv.next();
    let subcommand = argv.next().ok_or("missing subcommand")?;
    let mut args = Args {
        subcommand,
        config: None,
        config2: None,
        sets: Vec::new(),
        strict: false,
        skip_audit: false,
        out: None,
        input: None,
        column: None,
    };
    while let Some(flag) = argv.next() {
        let mut value = |name: &str| -> Result<String, String> {
            argv.next().ok_or(format!("flag {name} needs a value"))
        };
        match flag.as_str() {
            "--config" => args.config = Some(PathBuf::from(value("--config")?)),
            "--config2" => args.config2 = Some(PathBuf::from(value("--config2")?)),
            "--set" => args.sets.push(value("--set")?),
            "--strict" => args.strict = true,
            "--skip-audit" => args.skip_audit = true,
            "--out" => args.out = Some(PathBuf::from(value("--out")?)),
            "--input" => args.input = Some(PathBuf::from(value("--input")?)),
            "--column" => args.column = Some(value("--column")?),
            other => return Err(format!("unknown flag '{other}'")),
        }
    }
    Ok(args)
}

fn main() -> ExitCode {
    let args = match parse_args(std::env::args()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}\n{USAGE}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let code = match args.subcommand.as_str() {
        "check-law" => check_law_cmd(&args),
        "run" => run_cmd(&args),
        "mms" => mms_cmd(&args),
        "compare" => compare_cmd(&args),
        "plot-data" => plot_data_cmd(&args),
        other => {
            eprintln!("error: unknown subcommand '{other}'\n{USAGE}");
            EXIT_USAGE
        }
    };
    ExitCode::from(code)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SimulationDiverged { .. } => EXIT_DIVERGED,
        Error::WindowInadmissible { .. } | Error::InadmissibleAlpha(_) => EXIT_ADMISSIBILITY,
        _ => EXIT_USAGE,
    }
}

fn load_config(args: &Args) -> Result<ConfigFile, (u8, String)> {
    let path = args
        .config
        .as_ref()
        .ok_or((EXIT_USAGE, "missing --config".to_string()))?;
    let mut cfg = ConfigFile::load(path).map_err(|e| (EXIT_USAGE, e.to_string()))?;
    for s in &args.sets {
        cfg.apply_override(s).map_err(|e| (EXIT_USAGE, e.to_string()))?;
    }
    Ok(cfg)
}

/// Output directory precedence: --out, then MULTIFLUID_OUTPUT_DIR, then the
/// config's output.dir.
fn out_dir(args: &Args, from_config: &Path) -> PathBuf {
    if let Some(out) = &args.out {
        return out.clone();
    }
    if let Ok(env) = std::env::var("MULTIFLUID_OUTPUT_DIR") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    from_config.to_path_buf()
}

fn check_law_cmd(args: &Args) -> u8 {
    let cfg = match load_config(args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let rc = match build_run_config(&cfg) {
        Ok(rc) => rc,
        Err(Error::WindowInadmissible { .. }) | Err(Error::InadmissibleAlpha(_)) => {
            // The window or exponents fail admissibility before a psi can
            // even be built; report that as an audit failure, not a crash.
            match cfg.window_values() {
                Ok((gl, gh)) => return write_window_failure(args, &cfg, gl, gh),
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let dir = out_dir(args, &rc.output.dir);
    let report = match audit_law(&rc.law, &rc.window, &rc.psi, &rc.audit_box) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let head = output::provenance("check-law", cfg.hash(), cfg.overrides());
    let path = dir.join(format!("{}_audit.txt", rc.output.prefix));
    if let Err(e) = output::write_key_values(&path, &head, &report.key_values()) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    print_audit_summary(&report);
    if report.pass {
        EXIT_OK
    } else {
        EXIT_ADMISSIBILITY
    }
}

/// Inadmissible window discovered before psi construction: emit a minimal
/// audit report with the gamma-window reason line.
fn write_window_failure(args: &Args, cfg: &ConfigFile, gl: f64, gh: f64) -> u8 {
    let valid = gamma_window_valid(gl, gh).unwrap_or(false);
    let dir = out_dir(args, Path::new("out"));
    let head = output::provenance("check-law", cfg.hash(), cfg.overrides());
    let pairs = vec![
        ("window.gamma_lo".to_string(), format!("{gl}")),
        ("window.gamma_hi".to_string(), format!("{gh}")),
        ("window.valid".to_string(), format!("{valid}")),
        (
            "failure.0".to_string(),
            format!("gamma-window: ({gl}, {gh}) violates the admissibility inequalities"),
        ),
        ("pass".to_string(), "false".to_string()),
    ];
    let path = dir.join("law_audit.txt");
    if let Err(e) = output::write_key_values(&path, &head, &pairs) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    eprintln!("admissibility failure: gamma-window ({gl}, {gh})");
    EXIT_ADMISSIBILITY
}

fn print_audit_summary(report: &AdmissibilityReport) {
    println!("law audit: {}", if report.pass { "PASS" } else { "FAIL" });
    for f in &report.failures {
        println!("  reason: {f}");
    }
}

fn run_cmd(args: &Args) -> u8 {
    let cfg = match load_config(args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let rc = match build_run_config(&cfg) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let dir = out_dir(args, &rc.output.dir);
    let head = output::provenance("run", cfg.hash(), cfg.overrides());

    let mut audit_pass = true;
    if !args.skip_audit {
        match audit_law(&rc.law, &rc.window, &rc.psi, &rc.audit_box) {
            Ok(report) => {
                audit_pass = report.pass;
                if !report.pass {
                    let path = dir.join(format!("{}_audit.txt", rc.output.prefix));
                    let _ = output::write_key_values(&path, &head, &report.key_values());
                    print_audit_summary(&report);
                    return EXIT_ADMISSIBILITY;
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return exit_code_for(&e);
            }
        }
    }

    let (state0, c0) = match solver::init_data(&rc.init, &rc.grid, &rc.law) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let params = RunParams {
        law: &rc.law,
        psi: &rc.psi,
        grid: rc.grid,
        t_end: rc.t_end,
        cfl: rc.cfl,
        reconstruction: rc.reconstruction,
        diag_interval: rc.output.diag_interval,
        collect_states: rc.output.snapshot_every > 0,
        quad: multifluid::thermo::EnergyQuadrature::default(),
    };
    let outcome = solver::run_from_state(&params, state0);

    // Flush whatever was collected before deciding the exit code.
    let diag_path = dir.join(format!("{}_diagnostics.csv", rc.output.prefix));
    if let Err(e) = output::write_diagnostics_csv(&diag_path, &head, &outcome.records) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if rc.output.snapshot_every > 0 {
        for (k, (_, s)) in outcome.states.iter().enumerate() {
            if k % rc.output.snapshot_every == 0 {
                let p = dir.join(format!("{}_snapshot_{k:06}.csv", rc.output.prefix));
                if let Err(e) = output::write_snapshot_csv(&p, &head, s, &rc.grid, &rc.law, &rc.psi) {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
        }
    }
    let final_path = dir.join(format!("{}_final.csv", rc.output.prefix));
    if let Err(e) =
        output::write_snapshot_csv(&final_path, &head, &outcome.final_state, &rc.grid, &rc.law, &rc.psi)
    {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }

    let verdicts = verdict_pairs(&rc, &outcome, audit_pass, args.skip_audit, c0);
    let verdict_path = dir.join(format!("{}_verdicts.txt", rc.output.prefix));
    if let Err(e) = output::write_key_values(&verdict_path, &head, &verdicts.0) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    for (k, v) in &verdicts.0 {
        if k.ends_with(".verdict") {
            println!("{k} = {v}");
        }
    }

    if let Some(err) = &outcome.error {
        eprintln!("error: {err} (diagnostics flushed up to t = {})", outcome.final_state.t);
        return EXIT_DIVERGED;
    }
    if args.strict && !verdicts.1 {
        eprintln!("verdict failure under --strict");
        return EXIT_VERDICT;
    }
    EXIT_OK
}

/// Assemble the verdict key=value block; returns (pairs, all_pass).
fn verdict_pairs(
    rc: &RunConfig,
    outcome: &RunOutcome,
    audit_pass: bool,
    audit_skipped: bool,
    c0: f64,
) -> (Vec<(String, String)>, bool) {
    let mut pairs = Vec::new();
    let mut all_pass = true;
    pairs.push(("init.gradient_constant".into(), format!("{c0:.6e}")));
    pairs.push((
        "audit.verdict".into(),
        if audit_skipped { "SKIPPED".into() } else if audit_pass { "PASS".into() } else { "FAIL".into() },
    ));

    if outcome.records.len() >= 2 {
        let h1_0 = outcome.records[0].h1;
        let tol1 = multifluid::diagnostics::classical_tolerance(h1_0, rc.grid.n, rc.grid.n);
        match entropy_budget_check(&outcome.records, tol1) {
            Ok(rep) => {
                all_pass &= rep.classical_pass;
                pairs.push(("budget.r1_max".into(), format!("{:.6e}", rep.r1_max)));
                pairs.push(("budget.r1_final".into(), format!("{:.6e}", rep.r1_final)));
                pairs.push(("budget.r2_final".into(), format!("{:.6e}", rep.r2_final)));
                pairs.push(("budget.tol1".into(), format!("{:.6e}", rep.tol1)));
                pairs.push((
                    "budget.verdict".into(),
                    if rep.classical_pass { "PASS".into() } else { "FAIL".into() },
                ));
            }
            Err(e) => {
                all_pass = false;
                pairs.push(("budget.verdict".into(), format!("ERROR: {e}")));
            }
        }
        match transport_invariant_check(&outcome.records) {
            Ok(rep) => {
                all_pass &= rep.pass;
                pairs.push(("transport.initial".into(), format!("{:.6e}", rep.initial)));
                pairs.push(("transport.drift".into(), format!("{:.6e}", rep.drift)));
                pairs.push((
                    "transport.verdict".into(),
                    if rep.pass { "PASS".into() } else { "FAIL".into() },
                ));
            }
            Err(e) => {
                all_pass = false;
                pairs.push(("transport.verdict".into(), format!("ERROR: {e}")));
            }
        }
    }
    match density_bounds_check(&outcome.records, RHO_FLOOR_FACTOR * rc.law.rho_ref) {
        Ok(rep) => {
            all_pass &= rep.pass;
            pairs.push(("density.min".into(), format!("{:.6e}", rep.rho_min)));
            pairs.push(("density.max".into(), format!("{:.6e}", rep.rho_max)));
            if let Some(t) = rep.first_violation {
                pairs.push(("density.first_violation".into(), format!("{t:.6e}")));
            }
            pairs.push((
                "density.verdict".into(),
                if rep.pass { "PASS".into() } else { "FAIL".into() },
            ));
        }
        Err(e) => {
            all_pass = false;
            pairs.push(("density.verdict".into(), format!("ERROR: {e}")));
        }
    }
    if outcome.error.is_some() {
        all_pass = false;
        pairs.push(("run.verdict".into(), "DIVERGED".into()));
    } else {
        pairs.push(("run.verdict".into(), "COMPLETED".into()));
    }
    (pairs, all_pass)
}

fn mms_cmd(args: &Args) -> u8 {
    let cfg = match load_config(args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let rc = match build_run_config(&cfg) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let dir = out_dir(args, &rc.output.dir);
    let head = output::provenance("mms", cfg.hash(), cfg.overrides());

    // Keep the manufactured mass fraction inside the law's declared range.
    let mu_slack = (rc.law.mu_range.1 - rc.law.mu_ref).min(rc.law.mu_ref - rc.law.mu_range.0);
    let wave = TravelingWave {
        rho0: rc.law.rho_ref,
        rho_amp: 0.08 * rc.law.rho_ref,
        u0: 0.4,
        u_amp: 0.1,
        mu0: rc.law.mu_ref,
        mu_amp: 0.05f64.min(0.9 * mu_slack).max(0.0),
        mode: 1,
        omega: 1.0,
        length: rc.grid.length,
    };
    // Sweep members are independent; run them concurrently.
    let results: Vec<multifluid::Result<(usize, [f64; 3])>> = std::thread::scope(|scope| {
        let handles: Vec<_> = rc
            .mms
            .sizes
            .iter()
            .map(|&n| {
                let law = &rc.law;
                let psi = &rc.psi;
                let wave = &wave;
                let (t_end, cfl, recon) = (rc.mms.t_end, rc.mms.cfl, rc.reconstruction);
                scope.spawn(move || {
                    multifluid::solver::mms::mms_study(law, psi, wave, &[n, 2 * n], t_end, cfl, recon)
                        .map(|rep| (n, rep.errors[0]))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("mms worker panicked")).collect()
    });
    let mut errors = Vec::new();
    for r in results {
        match r {
            Ok((n, e)) => errors.push((n, e)),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    errors.sort_by_key(|&(n, _)| n);

    let mut csv = String::from("n,err_rho,err_u,err_mu,order_rho,order_u,order_mu\n");
    println!("{:>6} {:>12} {:>12} {:>12}   orders", "n", "err_rho", "err_u", "err_mu");
    let mut monotone = true;
    for (i, (n, e)) in errors.iter().enumerate() {
        let ord = if i > 0 {
            let prev = &errors[i - 1].1;
            let o = [
                (prev[0] / e[0]).log2(),
                (prev[1] / e[1]).log2(),
                (prev[2] / e[2]).log2(),
            ];
            monotone &= e.iter().zip(prev).all(|(a, b)| a < b);
            o
        } else {
            [f64::NAN; 3]
        };
        println!(
            "{n:>6} {:>12.4e} {:>12.4e} {:>12.4e}   {:.2} {:.2} {:.2}",
            e[0], e[1], e[2], ord[0], ord[1], ord[2]
        );
        csv.push_str(&format!(
            "{n},{:.16e},{:.16e},{:.16e},{:.6},{:.6},{:.6}\n",
            e[0], e[1], e[2], ord[0], ord[1], ord[2]
        ));
    }
    let path = dir.join(format!("{}_mms.csv", rc.output.prefix));
    if let Err(e) = output::write_file_with_header(&path, &head, &csv) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if !monotone {
        eprintln!("verification failure: errors did not decrease monotonically");
        if args.strict {
            return EXIT_VERDICT;
        }
    }
    EXIT_OK
}

fn compare_cmd(args: &Args) -> u8 {
    let cfg2_path = match &args.config2 {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: compare needs --config2");
            return EXIT_USAGE;
        }
    };
    let cfg1 = match load_config(args) {
        Ok(c) => c,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            return code;
        }
    };
    let cfg2 = match ConfigFile::load(&cfg2_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let rc1 = match build_run_config(&cfg1) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let rc2 = match build_run_config(&cfg2) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    if rc1.grid.n != rc2.grid.n
        || rc1.grid.length != rc2.grid.length
        || rc1.t_end != rc2.t_end
        || rc1.output.diag_interval != rc2.output.diag_interval
    {
        eprintln!("error: invalid-input: compare needs identical grids and output times");
        return EXIT_USAGE;
    }

    let run_one = |rc: &RunConfig| -> multifluid::Result<Vec<(f64, multifluid::State)>> {
        let (state0, _) = solver::init_data(&rc.init, &rc.grid, &rc.law)?;
        let params = RunParams {
            law: &rc.law,
            psi: &rc.psi,
            grid: rc.grid,
            t_end: rc.t_end,
            cfl: rc.cfl,
            reconstruction: rc.reconstruction,
            diag_interval: rc.output.diag_interval,
            collect_states: true,
            quad: multifluid::thermo::EnergyQuadrature::default(),
        };
        let out = solver::run_from_state(&params, state0);
        match out.error {
            Some(e) => Err(e),
            None => Ok(out.states),
        }
    };
    // The two member runs share nothing mutable; run them concurrently.
    let (traj1, traj2) = std::thread::scope(|scope| {
        let h1 = scope.spawn(|| run_one(&rc1));
        let h2 = scope.spawn(|| run_one(&rc2));
        (h1.join().expect("compare worker panicked"), h2.join().expect("compare worker panicked"))
    });
    let (traj1, traj2) = match (traj1, traj2) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return exit_code_for(&e);
        }
    };
    let report = match stability_compare(&traj1, &traj2, &rc1.grid) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };

    let hash = fnv1a(format!("{:016x}|{:016x}", cfg1.hash(), cfg2.hash()).as_bytes());
    let head = output::provenance("compare", hash, cfg1.overrides());
    let dir = out_dir(args, &rc1.output.dir);
    let csv_path = dir.join(format!("{}_stability.csv", rc1.output.prefix));
    if let Err(e) = output::write_stability_csv(&csv_path, &head, &report.series) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let verdict = match report.verdict {
        StabilityVerdict::Identical => "IDENTICAL",
        StabilityVerdict::Pass => "PASS",
        StabilityVerdict::Fail => "FAIL",
    };
    let pairs = vec![
        ("sup_x".to_string(), format!("{:.6e}", report.sup_x)),
        (
            "rate".to_string(),
            report.rate.map(|k| format!("{k:.6e}")).unwrap_or_else(|| "undefined".into()),
        ),
        ("stability.verdict".to_string(), verdict.to_string()),
    ];
    let txt_path = dir.join(format!("{}_stability.txt", rc1.output.prefix));
    if let Err(e) = output::write_key_values(&txt_path, &head, &pairs) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    println!("stability.verdict = {verdict}");
    if args.strict && report.verdict == StabilityVerdict::Fail {
        return EXIT_VERDICT;
    }
    EXIT_OK
}

fn plot_data_cmd(args: &Args) -> u8 {
    let input = match &args.input {
        Some(p) => p,
        None => {
            eprintln!("error: plot-data needs --input");
            return EXIT_USAGE;
        }
    };
    let column = match &args.column {
        Some(c) => c,
        None => {
            eprintln!("error: plot-data needs --column");
            return EXIT_USAGE;
        }
    };
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", input.display());
            return EXIT_USAGE;
        }
    };
    let body = match output::extract_column(&text, column) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let head = output::provenance("plot-data", fnv1a(text.as_bytes()), &[]);
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = out_dir(args, input.parent().unwrap_or(Path::new(".")));
    let path = dir.join(format!("{stem}_{column}.csv"));
    if let Err(e) = output::write_file_with_header(&path, &head, &body) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    println!("{}", path.display());
    EXIT_OK
}
