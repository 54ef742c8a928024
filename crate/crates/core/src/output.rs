//! Output files: provenance headers, CSV writers, column extraction.
//!
//! Every output file starts with a provenance comment block recording the
//! tool version, the subcommand, the config hash, and the applied overrides
//! (never wall-clock time), so identical invocations produce byte-identical
//! files.

use crate::constitutive::{PressureLaw, PsiSpec};
use crate::diagnostics::{DiagnosticsRecord, StabilityRecord, DIAGNOSTICS_HEADER};
use crate::error::{Error, Result};
use crate::fields::cell_fields;
use crate::grid::Grid;
use crate::State;
use std::io::Write;
use std::path::Path;

pub const TOOL_NAME: &str = "multifluid";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance comment block placed at the top of every output file.
pub fn provenance(subcommand: &str, config_hash: u64, overrides: &[String]) -> String {
    let ov = if overrides.is_empty() { "none".to_string() } else { overrides.join(";") };
    format!(
        "# {TOOL_NAME} {TOOL_VERSION}\n# subcommand: {subcommand}\n# config-hash: {config_hash:016x}\n# overrides: {ov}\n"
    )
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Write `header` (the provenance block) followed by `body`.
pub fn write_file_with_header(path: &Path, header: &str, body: &str) -> Result<()> {
    let mut out = String::with_capacity(header.len() + body.len());
    out.push_str(header);
    out.push_str(body);
    write_file(path, &out)
}

pub fn write_diagnostics_csv(
    path: &Path,
    header: &str,
    records: &[DiagnosticsRecord],
) -> Result<()> {
    let mut out = String::with_capacity(records.len() * 200 + header.len());
    out.push_str(header);
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    write_file(path, &out)
}

/// Field snapshot: one row per cell, 17 significant digits.
pub fn write_snapshot_csv(
    path: &Path,
    header: &str,
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
) -> Result<()> {
    let f = cell_fields(state, grid, law, psi);
    let mut out = String::with_capacity(grid.n * 120 + header.len());
    out.push_str(header);
    out.push_str("x,rho,u,mu,p,nu\n");
    for i in 0..grid.n {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            grid.x_center(i),
            state.rho[i],
            f.u[i],
            f.mu[i],
            f.p[i],
            f.nu[i]
        ));
    }
    write_file(path, &out)
}

pub fn write_key_values(path: &Path, header: &str, pairs: &[(String, String)]) -> Result<()> {
    let mut out = String::from(header);
    for (k, v) in pairs {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    write_file(path, &out)
}

pub fn write_stability_csv(path: &Path, header: &str, series: &[StabilityRecord]) -> Result<()> {
    let mut out = String::from(header);
    out.push_str("t,X,X_tau,X_zeta,X_chi\n");
    for r in series {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.t, r.x_total, r.x_tau, r.x_zeta, r.x_chi
        ));
    }
    write_file(path, &out)
}

/// Extract `(abscissa, column)` pairs from a diagnostics or snapshot CSV.
/// The abscissa is the file's first column; provenance comments are skipped.
/// Unknown columns list the available ones.
pub fn extract_column(text: &str, column: &str) -> Result<String> {
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("input has no header row".into()))?;
    let names: Vec<&str> = header.split(',').map(str::trim).collect();
    if names.len() < 2 {
        return Err(Error::InvalidInput(format!("not a columnar file: header '{header}'")));
    }
    let idx = names.iter().position(|n| *n == column).ok_or_else(|| {
        Error::InvalidInput(format!(
            "unknown column '{column}'; available: {}",
            names.join(", ")
        ))
    })?;
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", names[0], names[idx]));
    for (row_no, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != names.len() {
            return Err(Error::InvalidInput(format!(
                "row {} has {} fields, header has {}",
                row_no + 2,
                fields.len(),
                names.len()
            )));
        }
        out.push_str(fields[0].trim());
        out.push(',');
        out.push_str(fields[idx].trim());
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_block_has_no_timestamps() {
        let h = provenance("run", 0xdeadbeef, &["time.cfl=0.2".into()]);
        assert!(h.contains("config-hash: 00000000deadbeef"));
        assert!(h.contains("overrides: time.cfl=0.2"));
        assert!(h.lines().all(|l| l.starts_with('#')));
    }

    #[test]
    fn extract_column_preserves_rows_and_text() {
        let text = "# multifluid 0.1.0\n# subcommand: run\nt,mass,H1\n0.0,6.28,1.5\n0.1,6.28,1.4\n";
        let out = extract_column(text, "H1").unwrap();
        assert_eq!(out, "t,H1\n0.0,1.5\n0.1,1.4\n");
        // Idempotent in the sense that re-extracting the same column from
        // the output works and reproduces it.
        let again = extract_column(&out, "H1").unwrap();
        assert_eq!(again, out);
    }

    #[test]
    fn extract_unknown_column_lists_available() {
        let text = "t,mass,H1\n0.0,6.28,1.5\n";
        match extract_column(text, "bogus") {
            Err(Error::InvalidInput(msg)) => {
                assert!(msg.contains("t, mass, H1"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }
}
