//! Sectioned key=value run configuration.
//!
//! The format is line-oriented: `[section]` headers, `key = value` entries,
//! `#` comments, blank lines. Unknown sections or keys are parse errors (a
//! typo must not silently fall back to a default). Values for parameter
//! curves accept three spellings:
//!
//! ```text
//! gamma = 1.35                          constant
//! gamma = affine:1.34,0.04,1.32,1.38    intercept,slope,clamp_lo,clamp_hi
//! gamma = table:0.0=1.32,1.0=1.38       monotone-cubic control points
//! ```

use crate::constitutive::{
    AlphaChoice, GammaWindow, ParamCurve, PressureLaw, PsiSpec, SamplingBox,
};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::solver::{InitFamily, InitSpec, Reconstruction};
use std::collections::BTreeSet;
use std::path::PathBuf;

/// FNV-1a 64-bit hash; stable across builds so provenance headers are
/// reproducible.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

/// A parsed (but not yet validated) config file plus applied overrides.
#[derive(Debug, Clone)]
pub struct ConfigFile {
    sections: Vec<(String, Vec<Entry>)>,
    hash: u64,
    overrides: Vec<String>,
}

const KNOWN_SECTIONS: &[&str] =
    &["law", "window", "psi", "grid", "time", "init", "output", "audit", "mms"];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut sections: Vec<(String, Vec<Entry>)> = Vec::new();
        let mut current: Option<usize> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unterminated section header '{line}'"),
                    });
                }
                let name = line[1..line.len() - 1].trim().to_string();
                if !KNOWN_SECTIONS.contains(&name.as_str()) {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!(
                            "unknown section '[{name}]' (known: {})",
                            KNOWN_SECTIONS.join(", ")
                        ),
                    });
                }
                if let Some(pos) = sections.iter().position(|(s, _)| *s == name) {
                    current = Some(pos);
                } else {
                    sections.push((name, Vec::new()));
                    current = Some(sections.len() - 1);
                }
                continue;
            }
            let (key, value) = match line.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("expected 'key = value', got '{line}'"),
                    })
                }
            };
            if key.is_empty() {
                return Err(Error::Parse { line: line_no, msg: "empty key".into() });
            }
            match current {
                Some(pos) => {
                    if let Some(e) = sections[pos].1.iter_mut().find(|e| e.key == key) {
                        e.value = value;
                        e.line = line_no;
                    } else {
                        sections[pos].1.push(Entry { key, value, line: line_no });
                    }
                }
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("key '{key}' appears before any [section] header"),
                    })
                }
            }
        }
        Ok(ConfigFile { sections, hash: fnv1a(text.as_bytes()), overrides: Vec::new() })
    }

    pub fn load(path: &std::path::Path) -> Result<ConfigFile> {
        let text = std::fs::read_to_string(path)?;
        ConfigFile::parse(&text)
    }

    /// Apply a `section.key=value` override (the `--set` flag). Overrides
    /// fold into the config hash so provenance reflects them.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (path, value) = spec.split_once('=').ok_or_else(|| Error::InvalidInput(format!(
            "override '{spec}' must look like section.key=value"
        )))?;
        let (section, key) = path.split_once('.').ok_or_else(|| Error::InvalidInput(format!(
            "override '{spec}' must name section.key"
        )))?;
        let (section, key, value) = (section.trim(), key.trim(), value.trim());
        if !KNOWN_SECTIONS.contains(&section) {
            return Err(Error::InvalidInput(format!("override names unknown section '{section}'")));
        }
        let pos = match self.sections.iter().position(|(s, _)| s == section) {
            Some(p) => p,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                self.sections.len() - 1
            }
        };
        if let Some(e) = self.sections[pos].1.iter_mut().find(|e| e.key == key) {
            e.value = value.to_string();
            e.line = 0;
        } else {
            self.sections[pos].1.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            });
        }
        self.hash = fnv1a(format!("{:016x}|{spec}", self.hash).as_bytes());
        self.overrides.push(spec.to_string());
        Ok(())
    }

    pub fn hash(&self) -> u64 {
        self.hash
    }

    pub fn overrides(&self) -> &[String] {
        &self.overrides
    }

    fn entry(&self, section: &str, key: &str) -> Option<&Entry> {
        self.sections
            .iter()
            .find(|(s, _)| s == section)
            .and_then(|(_, es)| es.iter().find(|e| e.key == key))
    }

    fn get_str(&self, section: &str, key: &str) -> Option<&str> {
        self.entry(section, key).map(|e| e.value.as_str())
    }

    fn get_f64(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<f64>().map_err(|_| Error::Parse {
                line: e.line,
                msg: format!("key '{section}.{key}': expected a number, got '{}'", e.value),
            }),
        }
    }

    fn require_f64(&self, section: &str, key: &str) -> Result<f64> {
        match self.entry(section, key) {
            None => Err(Error::Parse {
                line: 0,
                msg: format!("missing required key '{section}.{key}'"),
            }),
            Some(_) => self.get_f64(section, key, f64::NAN),
        }
    }

    fn get_usize(&self, section: &str, key: &str, default: usize) -> Result<usize> {
        match self.entry(section, key) {
            None => Ok(default),
            Some(e) => e.value.parse::<usize>().map_err(|_| Error::Parse {
                line: e.line,
                msg: format!("key '{section}.{key}': expected an integer, got '{}'", e.value),
            }),
        }
    }

    fn get_curve(&self, section: &str, key: &str, default: f64) -> Result<ParamCurve> {
        match self.entry(section, key) {
            None => Ok(ParamCurve::constant(default)),
            Some(e) => parse_curve(&e.value).map_err(|msg| Error::Parse {
                line: e.line,
                msg: format!("key '{section}.{key}': {msg}"),
            }),
        }
    }

    /// Reject unknown keys so misspellings fail loudly.
    fn check_keys(&self) -> Result<()> {
        let known: &[(&str, &[&str])] = &[
            ("law", &[
                "kind", "rho_ref", "mu_ref", "mu_min", "mu_max", "coeff", "gamma", "c1", "c2",
                "c3", "gamma1", "gamma2", "gamma3",
            ]),
            ("window", &["gamma_lo", "gamma_hi"]),
            ("psi", &["alpha_lo", "alpha_hi", "c_psi"]),
            ("grid", &["n", "length", "boundary"]),
            ("time", &["t_end", "cfl", "reconstruction"]),
            ("init", &[
                "family", "u_background", "rho_amp", "rho_radius", "rho_center", "mu_delta",
                "mu_width", "mu_half_width", "mu_center", "u_amp", "u_radius", "u_center",
            ]),
            ("output", &["dir", "prefix", "diag_interval", "snapshot_every"]),
            ("audit", &["rho_min", "rho_max", "mu_min", "mu_max", "samples"]),
            ("mms", &["sizes", "t_end", "cfl"]),
        ];
        for (section, entries) in &self.sections {
            let allowed: BTreeSet<&str> = known
                .iter()
                .find(|(s, _)| s == section)
                .map(|(_, ks)| ks.iter().copied().collect())
                .unwrap_or_default();
            for e in entries {
                if !allowed.contains(e.key.as_str()) {
                    return Err(Error::Parse {
                        line: e.line,
                        msg: format!("unknown key '{}' in [{section}]", e.key),
                    });
                }
            }
        }
        Ok(())
    }

    /// Raw window values, available before any admissibility validation (the
    /// law checker reports inadmissible windows rather than erroring).
    pub fn window_values(&self) -> Result<(f64, f64)> {
        Ok((self.require_f64("window", "gamma_lo")?, self.require_f64("window", "gamma_hi")?))
    }

    /// Raw psi exponent values.
    pub fn alpha_values(&self) -> Result<(f64, f64, f64)> {
        Ok((
            self.require_f64("psi", "alpha_lo")?,
            self.require_f64("psi", "alpha_hi")?,
            self.get_f64("psi", "c_psi", 1.0)?,
        ))
    }
}

fn parse_curve(value: &str) -> std::result::Result<ParamCurve, String> {
    if let Some(rest) = value.strip_prefix("affine:") {
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!(
                "affine curve needs intercept,slope,lo,hi (got {} values)",
                parts.len()
            ));
        }
        let mut v = [0.0; 4];
        for (i, p) in parts.iter().enumerate() {
            v[i] = p.parse::<f64>().map_err(|_| format!("'{p}' is not a number"))?;
        }
        ParamCurve::affine(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
    } else if let Some(rest) = value.strip_prefix("table:") {
        let mut pts = Vec::new();
        for item in rest.split(',') {
            let (m, v) = item
                .split_once('=')
                .ok_or_else(|| format!("table entry '{item}' must be mu=value"))?;
            let m = m.trim().parse::<f64>().map_err(|_| format!("'{m}' is not a number"))?;
            let v = v.trim().parse::<f64>().map_err(|_| format!("'{v}' is not a number"))?;
            pts.push((m, v));
        }
        ParamCurve::tabulated(&pts).map_err(|e| e.to_string())
    } else {
        let v = value.parse::<f64>().map_err(|_| format!("'{value}' is not a number"))?;
        Ok(ParamCurve::constant(v))
    }
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub prefix: String,
    pub diag_interval: f64,
    /// Write a field snapshot at every k-th diagnostic record (0 disables
    /// intermediate snapshots; the final state is always written).
    pub snapshot_every: usize,
}

#[derive(Debug, Clone)]
pub struct MmsConfig {
    pub sizes: Vec<usize>,
    pub t_end: f64,
    pub cfl: f64,
}

/// Fully validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub law: PressureLaw,
    pub window: GammaWindow,
    pub psi: PsiSpec,
    pub grid: Grid,
    pub t_end: f64,
    pub cfl: f64,
    pub reconstruction: Reconstruction,
    pub init: InitSpec,
    pub output: OutputConfig,
    pub audit_box: SamplingBox,
    pub mms: MmsConfig,
    pub hash: u64,
    pub overrides: Vec<String>,
}

/// Build the law/window/psi triple only (what the law checker needs after
/// its raw-value pre-checks).
pub fn build_constitutive(cfg: &ConfigFile) -> Result<(PressureLaw, GammaWindow, PsiSpec)> {
    cfg.check_keys()?;
    let law = build_law(cfg)?;
    let (gl, gh) = cfg.window_values()?;
    let window = GammaWindow::new(gl, gh)?;
    let (al, ah, c_psi) = cfg.alpha_values()?;
    let alpha = AlphaChoice::new(&window, al, ah)?;
    let psi = PsiSpec::with_scale(alpha, c_psi)?;
    Ok((law, window, psi))
}

fn build_law(cfg: &ConfigFile) -> Result<PressureLaw> {
    let kind = cfg.get_str("law", "kind").unwrap_or("power").to_string();
    let rho_ref = cfg.get_f64("law", "rho_ref", 1.0)?;
    let mu_ref = cfg.get_f64("law", "mu_ref", 0.5)?;
    let mu_min = cfg.get_f64("law", "mu_min", 0.0)?;
    let mu_max = cfg.get_f64("law", "mu_max", 1.0)?;
    match kind.as_str() {
        "power" | "custom-tabulated" => {
            let coeff = cfg.get_curve("law", "coeff", 1.0)?;
            let gamma = cfg.get_curve("law", "gamma", 1.35)?;
            PressureLaw::power(coeff, gamma, rho_ref, mu_ref, (mu_min, mu_max))
        }
        "nuclear" => {
            let c = [
                cfg.get_f64("law", "c1", 1.0)?,
                cfg.get_f64("law", "c2", 1.0)?,
                cfg.get_f64("law", "c3", 1.0)?,
            ];
            let gamma = [
                cfg.get_curve("law", "gamma1", 3.0)?,
                cfg.get_curve("law", "gamma2", 2.0)?,
                cfg.get_curve("law", "gamma3", 1.75)?,
            ];
            PressureLaw::nuclear(c, gamma, rho_ref, mu_ref, (mu_min, mu_max))
        }
        other => {
            let line = cfg.entry("law", "kind").map(|e| e.line).unwrap_or(0);
            Err(Error::Parse {
                line,
                msg: format!("unknown law kind '{other}' (power, nuclear, custom-tabulated)"),
            })
        }
    }
}

pub fn build_run_config(cfg: &ConfigFile) -> Result<RunConfig> {
    let (law, window, psi) = build_constitutive(cfg)?;

    let n = cfg.get_usize("grid", "n", 256)?;
    let length = cfg.get_f64("grid", "length", 2.0 * std::f64::consts::PI)?;
    let boundary = match cfg.get_str("grid", "boundary").unwrap_or("periodic") {
        "periodic" => Boundary::Periodic,
        "farfield-clamp" => Boundary::FarfieldClamp,
        other => {
            let line = cfg.entry("grid", "boundary").map(|e| e.line).unwrap_or(0);
            return Err(Error::Parse {
                line,
                msg: format!("unknown boundary '{other}' (periodic, farfield-clamp)"),
            });
        }
    };
    let grid = Grid::new(n, length, boundary)?;

    let t_end = cfg.get_f64("time", "t_end", 0.5)?;
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be >= 0, got {t_end}")));
    }
    let cfl = cfg.get_f64("time", "cfl", 0.4)?;
    if !(cfl.is_finite() && cfl > 0.0) {
        return Err(Error::InvalidParameter(format!("cfl must be positive, got {cfl}")));
    }
    let reconstruction = match cfg.get_str("time", "reconstruction").unwrap_or("fromm") {
        "fromm" => Reconstruction::Fromm,
        "none" => Reconstruction::FirstOrder,
        other => {
            let line = cfg.entry("time", "reconstruction").map(|e| e.line).unwrap_or(0);
            return Err(Error::Parse {
                line,
                msg: format!("unknown reconstruction '{other}' (fromm, none)"),
            });
        }
    };

    let init = build_init(cfg, length)?;

    let output = OutputConfig {
        dir: PathBuf::from(cfg.get_str("output", "dir").unwrap_or("out")),
        prefix: cfg.get_str("output", "prefix").unwrap_or("run").to_string(),
        diag_interval: cfg.get_f64("output", "diag_interval", 0.01)?,
        snapshot_every: cfg.get_usize("output", "snapshot_every", 0)?,
    };
    if !(output.diag_interval.is_finite() && output.diag_interval > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "diag_interval must be positive, got {}",
            output.diag_interval
        )));
    }

    let audit_box = SamplingBox::new(
        cfg.get_f64("audit", "rho_min", 0.1)?,
        cfg.get_f64("audit", "rho_max", 10.0)?,
        cfg.get_f64("audit", "mu_min", law.mu_range.0)?,
        cfg.get_f64("audit", "mu_max", law.mu_range.1)?,
        cfg.get_usize("audit", "samples", 48)?,
    )?;

    let mms = MmsConfig {
        sizes: match cfg.get_str("mms", "sizes") {
            None => vec![64, 128, 256, 512],
            Some(s) => {
                let mut sizes = Vec::new();
                for part in s.split(',') {
                    let n: usize = part.trim().parse().map_err(|_| Error::Parse {
                        line: cfg.entry("mms", "sizes").map(|e| e.line).unwrap_or(0),
                        msg: format!("mms.sizes entry '{part}' is not an integer"),
                    })?;
                    sizes.push(n);
                }
                sizes
            }
        },
        t_end: cfg.get_f64("mms", "t_end", 0.25)?,
        cfl: cfg.get_f64("mms", "cfl", 0.4)?,
    };

    Ok(RunConfig {
        law,
        window,
        psi,
        grid,
        t_end,
        cfl,
        reconstruction,
        init,
        output,
        audit_box,
        mms,
        hash: cfg.hash(),
        overrides: cfg.overrides().to_vec(),
    })
}

fn build_init(cfg: &ConfigFile, length: f64) -> Result<InitSpec> {
    let family = cfg.get_str("init", "family").unwrap_or("uniform").to_string();
    let u_background = cfg.get_f64("init", "u_background", 0.0)?;
    let center = length / 2.0;
    let quarter = length / 4.0;

    let rho_amp = cfg.get_f64("init", "rho_amp", 0.2)?;
    let rho_radius = cfg.get_f64("init", "rho_radius", quarter)?;
    let rho_center = cfg.get_f64("init", "rho_center", center)?;
    let mu_delta = cfg.get_f64("init", "mu_delta", 0.2)?;
    let mu_width = cfg.get_f64("init", "mu_width", length / 32.0)?;
    let mu_half_width = cfg.get_f64("init", "mu_half_width", quarter)?;
    let mu_center = cfg.get_f64("init", "mu_center", center)?;
    let u_amp = cfg.get_f64("init", "u_amp", 0.1)?;
    let u_radius = cfg.get_f64("init", "u_radius", quarter)?;
    let u_center = cfg.get_f64("init", "u_center", center)?;

    let family = match family.as_str() {
        "uniform" => InitFamily::Uniform,
        "gaussian-rho-bump" => {
            InitFamily::GaussianRhoBump { amp: rho_amp, radius: rho_radius, center: rho_center }
        }
        "tanh-mu-interface" => InitFamily::TanhMuInterface {
            delta_mu: mu_delta,
            width: mu_width,
            half_width: mu_half_width,
            center: mu_center,
        },
        "velocity-pulse" => {
            InitFamily::VelocityPulse { amp: u_amp, radius: u_radius, center: u_center }
        }
        "composite" => InitFamily::Composite {
            rho_amp,
            rho_radius,
            rho_center,
            delta_mu: mu_delta,
            mu_width,
            mu_half_width,
            mu_center,
            u_amp,
            u_radius,
            u_center,
        },
        other => {
            let line = cfg.entry("init", "family").map(|e| e.line).unwrap_or(0);
            return Err(Error::Parse {
                line,
                msg: format!(
                    "unknown init family '{other}' (uniform, gaussian-rho-bump, \
                     tanh-mu-interface, velocity-pulse, composite)"
                ),
            });
        }
    };
    Ok(InitSpec { family, u_background })
}
