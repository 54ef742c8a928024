//! Run diagnostics: conserved totals, the two entropy budgets, density
//! bounds, the transported-gradient invariant, and the two-trajectory
//! stability functional.

use crate::constitutive::{PressureLaw, PsiSpec};
use crate::error::{Error, Result};
use crate::fields::cell_fields;
use crate::grid::Grid;
use crate::thermo::{energy_per_cell, EnergyQuadrature};
use crate::State;

/// Scalar diagnostics of one state snapshot. The five norms mirror the
/// a priori bounds the entropy budgets control:
/// `n1 = ||sqrt(nu) du/dx||_L2`, `n2 = ||sqrt(rho) u||_L2`,
/// `n3 = ||E||_L1`, `n4 = ||(d/dx psi(p))/sqrt(rho)||_L2`,
/// `n5 = ||(psi'(p)/rho)^(1/2) dp/dx||_L2`; `n1^2 = d1` and `n5^2 = d2`
/// by construction (same sums).
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub species: f64,
    pub h1: f64,
    pub d1: f64,
    pub h2: f64,
    pub d2: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// sup over cells of |(d mu/dx) / rho|.
    pub mugrad_sup: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
    pub n5: f64,
}

pub const DIAGNOSTICS_HEADER: &str =
    "t,mass,momentum,species,H1,D1,H2,D2,rho_min,rho_max,mugrad_sup,n1,n2,n3,n4,n5";

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.t,
            self.mass,
            self.momentum,
            self.species,
            self.h1,
            self.d1,
            self.h2,
            self.d2,
            self.rho_min,
            self.rho_max,
            self.mugrad_sup,
            self.n1,
            self.n2,
            self.n3,
            self.n4,
            self.n5
        )
    }
}

/// Compute every diagnostic of a snapshot with the integrator's stencils.
pub fn record(
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
    quad: &EnergyQuadrature,
) -> Result<DiagnosticsRecord> {
    state.check_positive()?;
    let f = cell_fields(state, grid, law, psi);
    let energy = energy_per_cell(state, law, quad)?;
    let dx = grid.dx;

    let mut mass = 0.0;
    let mut momentum = 0.0;
    let mut species = 0.0;
    let mut h1 = 0.0;
    let mut d1 = 0.0;
    let mut h2 = 0.0;
    let mut d2 = 0.0;
    let mut rho_min = f64::INFINITY;
    let mut rho_max = f64::NEG_INFINITY;
    let mut mugrad_sup = 0.0f64;
    let mut n2sq = 0.0;
    let mut n3 = 0.0;
    let mut n4sq = 0.0;

    for i in 0..grid.n {
        let rho = state.rho[i];
        let u = f.u[i];
        mass += rho * dx;
        momentum += state.mom[i] * dx;
        species += state.spc[i] * dx;
        rho_min = rho_min.min(rho);
        rho_max = rho_max.max(rho);

        h1 += (0.5 * rho * u * u + energy[i]) * dx;
        let visc = f.viscous_flux(grid, i); // nu_face * du/dx at face i+1/2
        let nu_face =
            0.5 * (f.nu[i] + crate::fields::ext(&f.nu, i as isize + 1, grid, f.ghost.nu));
        if nu_face > 0.0 {
            d1 += visc * visc / nu_face * dx;
        }

        let dpsi = f.dpsi_dx(grid, i);
        let w = u + dpsi / rho;
        h2 += (0.5 * rho * w * w + energy[i]) * dx;
        let dp = f.dp_dx(grid, i);
        d2 += f.psi_prime[i] / rho * dp * dp * dx;

        mugrad_sup = mugrad_sup.max(f.mu_grad_over_rho(state, grid, i).abs());
        n2sq += rho * u * u * dx;
        n3 += energy[i].abs() * dx;
        n4sq += dpsi * dpsi / rho * dx;
    }

    let rec = DiagnosticsRecord {
        t: state.t,
        mass,
        momentum,
        species,
        h1,
        d1,
        h2,
        d2,
        rho_min,
        rho_max,
        mugrad_sup,
        n1: d1.sqrt(),
        n2: n2sq.sqrt(),
        n3,
        n4: n4sq.sqrt(),
        n5: d2.sqrt(),
    };
    for (name, v) in [
        ("mass", rec.mass),
        ("H1", rec.h1),
        ("D1", rec.d1),
        ("H2", rec.h2),
        ("D2", rec.d2),
        ("mugrad_sup", rec.mugrad_sup),
    ] {
        if !v.is_finite() {
            return Err(Error::NumericFailure(format!("non-finite diagnostic {name}")));
        }
    }
    Ok(rec)
}

/// Classical-budget tolerance at grid size `n`, anchored at the reference
/// resolution and tightened proportionally to dx under refinement.
pub fn classical_tolerance(h1_initial: f64, n: usize, n_reference: usize) -> f64 {
    1e-6 * h1_initial.max(1.0) * n_reference as f64 / n as f64
}

/// Entropy-budget residuals over a record series.
///
/// `r1(t) = H1(t) - H1(0) + int_0^t D1` must stay below the tolerance (the
/// budget is an inequality: the scheme may only add dissipation);
/// `r2(t) = |H2(t) - H2(0) + int_0^t D2|` is reported (the effective-velocity
/// budget is an equality) and is expected to shrink under refinement.
/// Time integrals use the trapezoidal rule on the record times.
#[derive(Debug, Clone)]
pub struct BudgetReport {
    /// Signed maximum of r1 over the series.
    pub r1_max: f64,
    pub r1_final: f64,
    pub r2_max: f64,
    pub r2_final: f64,
    pub tol1: f64,
    pub classical_pass: bool,
}

pub fn entropy_budget_check(records: &[DiagnosticsRecord], tol1: f64) -> Result<BudgetReport> {
    if records.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "budget check needs at least 2 records, got {}",
            records.len()
        )));
    }
    for w in records.windows(2) {
        if !(w[1].t.is_finite() && w[1].t > w[0].t) {
            return Err(Error::InvalidInput(
                "records must carry strictly increasing finite times".into(),
            ));
        }
    }
    let h1_0 = records[0].h1;
    let h2_0 = records[0].h2;
    let mut int_d1 = 0.0;
    let mut int_d2 = 0.0;
    let mut r1_max = 0.0f64;
    let mut r2_max = 0.0f64;
    let mut r1_final = 0.0;
    let mut r2_final = 0.0;
    for k in 1..records.len() {
        let dt = records[k].t - records[k - 1].t;
        int_d1 += 0.5 * dt * (records[k].d1 + records[k - 1].d1);
        int_d2 += 0.5 * dt * (records[k].d2 + records[k - 1].d2);
        r1_final = records[k].h1 - h1_0 + int_d1;
        r2_final = (records[k].h2 - h2_0 + int_d2).abs();
        r1_max = r1_max.max(r1_final);
        r2_max = r2_max.max(r2_final);
    }
    Ok(BudgetReport {
        r1_max,
        r1_final,
        r2_max,
        r2_final,
        tol1,
        classical_pass: r1_max <= tol1,
    })
}

/// Per-doubling decay ratios of a positive residual across resolutions
/// (sorted by grid size); ratio k is `residual(n_k) / residual(n_{k+1})`.
pub fn refinement_ratios(series: &[(usize, f64)]) -> Vec<f64> {
    let mut s = series.to_vec();
    s.sort_by_key(|&(n, _)| n);
    s.windows(2).map(|w| w[0].1 / w[1].1).collect()
}

/// Drift report for the transported gradient bound sup |(d mu/dx)/rho|.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub initial: f64,
    pub peak: f64,
    /// `max_t sup(t) - sup(0)`, never negative (the max includes t = 0).
    pub drift: f64,
    pub pass: bool,
}

pub fn transport_invariant_check(records: &[DiagnosticsRecord]) -> Result<TransportReport> {
    if records.len() < 2 {
        return Err(Error::InvalidInput("transport check needs at least 2 records".into()));
    }
    let initial = records[0].mugrad_sup;
    let peak = records.iter().fold(0.0f64, |m, r| m.max(r.mugrad_sup));
    let drift = peak - initial;
    // Absolute slack keeps the zero-gradient case from failing on round-off.
    let pass = drift <= 0.05 * initial + 1e-12 * initial.max(1.0);
    Ok(TransportReport { initial, peak, drift, pass })
}

/// Realized density bounds over a record series.
#[derive(Debug, Clone)]
pub struct DensityBoundsReport {
    pub rho_min: f64,
    pub rho_max: f64,
    pub pass: bool,
    pub first_violation: Option<f64>,
}

pub fn density_bounds_check(records: &[DiagnosticsRecord], rho_floor: f64) -> Result<DensityBoundsReport> {
    if records.is_empty() {
        return Err(Error::InvalidInput("density check needs at least 1 record".into()));
    }
    let mut rho_min = f64::INFINITY;
    let mut rho_max = f64::NEG_INFINITY;
    let mut first_violation = None;
    for r in records {
        rho_min = rho_min.min(r.rho_min);
        rho_max = rho_max.max(r.rho_max);
        if r.rho_min <= rho_floor && first_violation.is_none() {
            first_violation = Some(r.t);
        }
    }
    Ok(DensityBoundsReport { rho_min, rho_max, pass: first_violation.is_none(), first_violation })
}

/// One time sample of the two-trajectory distance functional
/// `X(t) = sum (tau^2 + rho_1 zeta^2 + chi^2) dx` with `tau = rho1 - rho2`,
/// `zeta = u1 - u2`, `chi = mu1 - mu2`.
#[derive(Debug, Clone)]
pub struct StabilityRecord {
    pub t: f64,
    pub x_total: f64,
    pub x_tau: f64,
    pub x_zeta: f64,
    pub x_chi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    /// X(t) identically zero: the trajectories coincide.
    Identical,
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub series: Vec<StabilityRecord>,
    pub sup_x: f64,
    /// Least-squares slope of ln X(t); None when X vanishes somewhere in the
    /// fit window.
    pub rate: Option<f64>,
    pub verdict: StabilityVerdict,
}

/// Number of leading output samples excluded from the rate fit (initial
/// transient carries stencil noise).
pub const RATE_FIT_SKIP: usize = 5;

/// Maximum tolerated excursion of X above the fitted exponential envelope.
const ENVELOPE_SLACK: f64 = 0.10;

/// Compare two trajectories sampled on the same grid at the same times.
pub fn stability_compare(
    traj1: &[(f64, State)],
    traj2: &[(f64, State)],
    grid: &Grid,
) -> Result<StabilityReport> {
    if traj1.len() != traj2.len() || traj1.is_empty() {
        return Err(Error::InvalidInput(format!(
            "trajectories must share output times, got lengths {} and {}",
            traj1.len(),
            traj2.len()
        )));
    }
    let n = grid.n;
    let mut series = Vec::with_capacity(traj1.len());
    for ((t1, s1), (t2, s2)) in traj1.iter().zip(traj2) {
        if t1 != t2 {
            return Err(Error::InvalidInput(format!(
                "mismatched output times {t1} vs {t2}"
            )));
        }
        if s1.rho.len() != n || s2.rho.len() != n {
            return Err(Error::InvalidInput("mismatched grids".into()));
        }
        s1.check_positive()?;
        let mut x_tau = 0.0;
        let mut x_zeta = 0.0;
        let mut x_chi = 0.0;
        for i in 0..n {
            let tau = s1.rho[i] - s2.rho[i];
            let zeta = s1.velocity(i) - s2.velocity(i);
            let chi = s1.mass_fraction(i) - s2.mass_fraction(i);
            x_tau += tau * tau * grid.dx;
            x_zeta += s1.rho[i] * zeta * zeta * grid.dx;
            x_chi += chi * chi * grid.dx;
        }
        series.push(StabilityRecord {
            t: *t1,
            x_total: x_tau + x_zeta + x_chi,
            x_tau,
            x_zeta,
            x_chi,
        });
    }

    let sup_x = series.iter().fold(0.0f64, |m, r| m.max(r.x_total));
    if sup_x == 0.0 {
        return Ok(StabilityReport { series, sup_x, rate: None, verdict: StabilityVerdict::Identical });
    }
    if series[0].x_total == 0.0 {
        // Coinciding initial data must stay coincident.
        return Ok(StabilityReport { series, sup_x, rate: None, verdict: StabilityVerdict::Fail });
    }

    let fit: Vec<(f64, f64)> = series
        .iter()
        .skip(RATE_FIT_SKIP.min(series.len().saturating_sub(2)))
        .filter(|r| r.x_total > 0.0)
        .map(|r| (r.t, r.x_total.ln()))
        .collect();
    if fit.len() < 2 {
        return Ok(StabilityReport { series, sup_x, rate: None, verdict: StabilityVerdict::Fail });
    }
    let m = fit.len() as f64;
    let st: f64 = fit.iter().map(|p| p.0).sum();
    let sy: f64 = fit.iter().map(|p| p.1).sum();
    let stt: f64 = fit.iter().map(|p| p.0 * p.0).sum();
    let sty: f64 = fit.iter().map(|p| p.0 * p.1).sum();
    let denom = m * stt - st * st;
    if denom <= 0.0 {
        return Ok(StabilityReport { series, sup_x, rate: None, verdict: StabilityVerdict::Fail });
    }
    let k_hat = (m * sty - st * sy) / denom;
    let intercept = (sy - k_hat * st) / m;

    // Super-exponential excursion: X rising more than the slack above the
    // fitted envelope anywhere in the fit window.
    let max_excess = fit
        .iter()
        .map(|&(t, lnx)| lnx - (intercept + k_hat * t))
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = if k_hat.is_finite() && max_excess <= (1.0 + ENVELOPE_SLACK).ln() {
        StabilityVerdict::Pass
    } else {
        StabilityVerdict::Fail
    };
    Ok(StabilityReport { series, sup_x, rate: Some(k_hat), verdict })
}
