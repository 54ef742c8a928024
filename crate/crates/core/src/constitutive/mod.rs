//! Constitutive layer: pressure laws, the pressure function psi, the derived
//! viscosity, and the admissibility windows tying them together.
//!
//! The viscosity is not a free function here; it is slaved to the pressure by
//!
//! ```text
//! nu(rho, mu) = rho * dp/drho * psi'(p(rho, mu))
//! ```
//!
//! with `psi'` a decreasing power of the pressure on each side of p = 1. The
//! admissible exponent ranges are controlled by an adiabatic window
//! (gamma_lo, gamma_hi); `audit` numerically certifies that a concrete law
//! stays inside the envelopes the window promises.

pub mod audit;
pub mod curve;

pub use audit::{audit_law, AdmissibilityReport, SamplingBox};
pub use curve::ParamCurve;

use crate::error::{Error, Result};

/// Adiabatic exponent window (gamma_lo = lower exponent, gamma_hi = upper).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaWindow {
    pub gamma_lo: f64,
    pub gamma_hi: f64,
}

/// Check the two window inequalities:
///
/// ```text
/// (gamma_hi - 1/2) / gamma_lo < (gamma_lo + 1/2) / gamma_hi
/// (gamma_lo - 1/2) / gamma_hi > (gamma_hi + 1/2) / gamma_lo - 1
/// ```
///
/// Inputs must be finite and > 1.
pub fn gamma_window_valid(gamma_lo: f64, gamma_hi: f64) -> Result<bool> {
    if !gamma_lo.is_finite() || !gamma_hi.is_finite() || gamma_lo <= 1.0 || gamma_hi <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "adiabatic exponents must be finite and > 1, got ({gamma_lo}, {gamma_hi})"
        )));
    }
    let first = (gamma_hi - 0.5) / gamma_lo < (gamma_lo + 0.5) / gamma_hi;
    let second = (gamma_lo - 0.5) / gamma_hi > (gamma_hi + 0.5) / gamma_lo - 1.0;
    Ok(first && second)
}

impl GammaWindow {
    pub fn new(gamma_lo: f64, gamma_hi: f64) -> Result<Self> {
        // Validity of the inequalities is a separate question; construction
        // only requires a well-ordered pair of exponents.
        gamma_window_valid(gamma_lo, gamma_hi)?;
        if gamma_lo > gamma_hi {
            return Err(Error::InvalidParameter(format!(
                "window must satisfy gamma_lo <= gamma_hi, got ({gamma_lo}, {gamma_hi})"
            )));
        }
        Ok(GammaWindow { gamma_lo, gamma_hi })
    }

    pub fn is_admissible(&self) -> bool {
        gamma_window_valid(self.gamma_lo, self.gamma_hi).unwrap_or(false)
    }

    pub fn alpha_window(&self) -> Result<AlphaIntervals> {
        alpha_window(self.gamma_lo, self.gamma_hi)
    }
}

/// The admissible intervals for the two psi exponents.
///
/// `alpha_lo` governs the low-pressure branch (p <= 1) and lives in the
/// half-open interval `(lo.0, lo.1]`; `alpha_hi` governs the high-pressure
/// branch (p >= 1) and lives in `[hi.0, hi.1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaIntervals {
    pub lo: (f64, f64),
    pub hi: (f64, f64),
}

impl AlphaIntervals {
    /// Interval midpoints, the default concrete exponent choice.
    pub fn midpoints(&self) -> (f64, f64) {
        (
            0.5 * (self.lo.0 + self.lo.1),
            0.5 * (self.hi.0 + self.hi.1),
        )
    }
}

/// Compute the exponent intervals implied by an admissible window:
///
/// ```text
/// alpha_lo in ( (gamma_hi - 1/2)/gamma_lo , (gamma_lo + 1/2)/gamma_hi ]
/// alpha_hi in [ (gamma_hi + 1/2)/gamma_lo - 1 , (gamma_lo - 1/2)/gamma_hi )
/// ```
///
/// Fails with `WindowInadmissible` when the window inequalities do not hold
/// (exactly the case where one of the intervals is empty).
pub fn alpha_window(gamma_lo: f64, gamma_hi: f64) -> Result<AlphaIntervals> {
    if !gamma_window_valid(gamma_lo, gamma_hi)? {
        return Err(Error::WindowInadmissible { gamma_lo, gamma_hi });
    }
    Ok(AlphaIntervals {
        lo: ((gamma_hi - 0.5) / gamma_lo, (gamma_lo + 0.5) / gamma_hi),
        hi: ((gamma_hi + 0.5) / gamma_lo - 1.0, (gamma_lo - 0.5) / gamma_hi),
    })
}

/// Derived density-weight exponents for the two pressure branches:
/// `eta = alpha_lo * gamma_lo - gamma_hi + 1/2` and
/// `sigma = gamma_lo - alpha_hi * gamma_hi - 1/2`.
///
/// Requires the alphas to sit strictly inside their admissible intervals
/// (interval endpoints that would make an exponent vanish are rejected).
pub fn xi_exponents(gamma_lo: f64, gamma_hi: f64, alpha_lo: f64, alpha_hi: f64) -> Result<(f64, f64)> {
    let iv = alpha_window(gamma_lo, gamma_hi)?;
    if !(alpha_lo > iv.lo.0 && alpha_lo <= iv.lo.1) {
        return Err(Error::InadmissibleAlpha(format!(
            "alpha_lo = {alpha_lo} outside ({}, {}]",
            iv.lo.0, iv.lo.1
        )));
    }
    if !(alpha_hi >= iv.hi.0 && alpha_hi < iv.hi.1) {
        return Err(Error::InadmissibleAlpha(format!(
            "alpha_hi = {alpha_hi} outside [{}, {})",
            iv.hi.0, iv.hi.1
        )));
    }
    let eta = alpha_lo * gamma_lo - gamma_hi + 0.5;
    let sigma = gamma_lo - alpha_hi * gamma_hi - 0.5;
    if eta <= 0.0 || sigma <= 0.0 {
        return Err(Error::InadmissibleAlpha(format!(
            "derived exponents must be positive: eta = {eta}, sigma = {sigma}"
        )));
    }
    Ok((eta, sigma))
}

/// A validated exponent pair for the two branches of psi'.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaChoice {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub eta: f64,
    pub sigma: f64,
}

impl AlphaChoice {
    pub fn new(window: &GammaWindow, alpha_lo: f64, alpha_hi: f64) -> Result<Self> {
        let (eta, sigma) = xi_exponents(window.gamma_lo, window.gamma_hi, alpha_lo, alpha_hi)?;
        Ok(AlphaChoice { alpha_lo, alpha_hi, eta, sigma })
    }
}

/// The pressure function psi, realized as the minimal admissible choice
///
/// ```text
/// psi'(p) = c_psi * p^(-alpha_lo)  for p <= 1
/// psi'(p) = c_psi * p^(-alpha_hi)  for p >= 1
/// ```
///
/// (the two branches agree at p = 1), normalized so that psi(1) = 0.
#[derive(Debug, Clone, Copy)]
pub struct PsiSpec {
    pub alpha: AlphaChoice,
    pub c_psi: f64,
}

impl PsiSpec {
    pub fn new(alpha: AlphaChoice) -> Self {
        PsiSpec { alpha, c_psi: 1.0 }
    }

    pub fn with_scale(alpha: AlphaChoice, c_psi: f64) -> Result<Self> {
        if !(c_psi.is_finite() && c_psi >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "psi scale must be finite and >= 1, got {c_psi}"
            )));
        }
        Ok(PsiSpec { alpha, c_psi })
    }

    fn branch_exponent(&self, p: f64) -> f64 {
        if p <= 1.0 {
            self.alpha.alpha_lo
        } else {
            self.alpha.alpha_hi
        }
    }

    pub fn psi_prime(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidPressure(p));
        }
        Ok(self.c_psi * p.powf(-self.branch_exponent(p)))
    }

    /// psi(p) with psi(1) = 0, in closed form per branch:
    /// `c_psi * (p^(1-a) - 1)/(1-a)` (or `c_psi * ln p` when a = 1).
    pub fn psi(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidPressure(p));
        }
        let a = self.branch_exponent(p);
        if (a - 1.0).abs() < 1e-12 {
            Ok(self.c_psi * p.ln())
        } else {
            Ok(self.c_psi * (p.powf(1.0 - a) - 1.0) / (1.0 - a))
        }
    }

    /// psi''(p) per branch; discontinuous across p = 1 when the two
    /// exponents differ (the low-pressure branch value is returned there).
    pub fn psi_second(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidPressure(p));
        }
        let a = self.branch_exponent(p);
        Ok(-a * self.c_psi * p.powf(-a - 1.0))
    }
}

/// Pressure and its first partial derivatives at a state point.
#[derive(Debug, Clone, Copy)]
pub struct PressureEval {
    pub p: f64,
    pub p_rho: f64,
    pub p_mu: f64,
}

/// First and second partial derivatives of the pressure.
#[derive(Debug, Clone, Copy)]
pub struct PressureEvalFull {
    pub p: f64,
    pub p_rho: f64,
    pub p_mu: f64,
    pub p_rhorho: f64,
    pub p_rhomu: f64,
}

#[derive(Debug, Clone)]
pub enum LawKind {
    /// `p = C(mu) * rho^gamma(mu)`. Tabulated parameter curves give the
    /// custom-tabulated variant of this form.
    Power { coeff: ParamCurve, gamma: ParamCurve },
    /// `p = c1 * rho^g1(mu) - c2 * rho^g2(mu) + c3 * rho^g3(mu)`.
    Nuclear { c: [f64; 3], gamma: [ParamCurve; 3] },
}

/// A barotropic multicomponent pressure law with its reference state.
#[derive(Debug, Clone)]
pub struct PressureLaw {
    pub kind: LawKind,
    pub rho_ref: f64,
    pub mu_ref: f64,
    pub mu_range: (f64, f64),
}

impl PressureLaw {
    pub fn power(
        coeff: ParamCurve,
        gamma: ParamCurve,
        rho_ref: f64,
        mu_ref: f64,
        mu_range: (f64, f64),
    ) -> Result<Self> {
        let law = PressureLaw { kind: LawKind::Power { coeff, gamma }, rho_ref, mu_ref, mu_range };
        law.validate()?;
        Ok(law)
    }

    pub fn nuclear(
        c: [f64; 3],
        gamma: [ParamCurve; 3],
        rho_ref: f64,
        mu_ref: f64,
        mu_range: (f64, f64),
    ) -> Result<Self> {
        if c.iter().any(|&ci| !(ci.is_finite() && ci > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "nuclear law coefficients must be positive, got {c:?}"
            )));
        }
        let law = PressureLaw { kind: LawKind::Nuclear { c, gamma }, rho_ref, mu_ref, mu_range };
        law.validate()?;
        Ok(law)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rho_ref.is_finite() && self.rho_ref > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "reference density must be positive, got {}",
                self.rho_ref
            )));
        }
        if !self.mu_ref.is_finite() {
            return Err(Error::InvalidParameter("reference mass fraction must be finite".into()));
        }
        if !(self.mu_range.0 <= self.mu_ref && self.mu_ref <= self.mu_range.1) {
            return Err(Error::InvalidParameter(format!(
                "reference mass fraction {} outside declared range [{}, {}]",
                self.mu_ref, self.mu_range.0, self.mu_range.1
            )));
        }
        if let LawKind::Power { coeff, .. } = &self.kind {
            let (clo, _) = coeff.bounds();
            if clo <= 0.0 {
                return Err(Error::InvalidParameter(
                    "power-law coefficient curve must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    fn check_args(&self, rho: f64, mu: f64) -> Result<()> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::VacuumInput { rho, cell: None });
        }
        if !(mu.is_finite() && mu >= self.mu_range.0 && mu <= self.mu_range.1) {
            return Err(Error::InvalidParameter(format!(
                "mass fraction {mu} outside declared range [{}, {}]",
                self.mu_range.0, self.mu_range.1
            )));
        }
        Ok(())
    }

    /// Pressure and first partial derivatives (analytic, no differencing).
    pub fn eval(&self, rho: f64, mu: f64) -> Result<PressureEval> {
        self.check_args(rho, mu)?;
        let f = self.eval_full_unchecked(rho, mu);
        Ok(PressureEval { p: f.p, p_rho: f.p_rho, p_mu: f.p_mu })
    }

    /// Pressure with first and second partial derivatives.
    pub fn eval_full(&self, rho: f64, mu: f64) -> Result<PressureEvalFull> {
        self.check_args(rho, mu)?;
        Ok(self.eval_full_unchecked(rho, mu))
    }

    pub fn pressure(&self, rho: f64, mu: f64) -> Result<f64> {
        Ok(self.eval(rho, mu)?.p)
    }

    /// Hot-path evaluation of `(p, dp/drho)` without argument checks. NaN
    /// propagates for invalid arguments and is caught by the integrator's
    /// divergence detection.
    #[inline]
    pub fn eval_basic(&self, rho: f64, mu: f64) -> (f64, f64) {
        match &self.kind {
            LawKind::Power { coeff, gamma } => {
                let c = coeff.eval(mu);
                let g = gamma.eval(mu);
                let p = c * rho.powf(g);
                (p, g * p / rho)
            }
            LawKind::Nuclear { c, gamma } => {
                let mut p = 0.0;
                let mut p_rho = 0.0;
                for k in 0..3 {
                    let sign = if k == 1 { -1.0 } else { 1.0 };
                    let g = gamma[k].eval(mu);
                    let term = sign * c[k] * rho.powf(g);
                    p += term;
                    p_rho += g * term / rho;
                }
                (p, p_rho)
            }
        }
    }

    fn eval_full_unchecked(&self, rho: f64, mu: f64) -> PressureEvalFull {
        let lnr = rho.ln();
        match &self.kind {
            LawKind::Power { coeff, gamma } => {
                let c = coeff.eval(mu);
                let cp = coeff.deriv(mu);
                let g = gamma.eval(mu);
                let gp = gamma.deriv(mu);
                let p = c * rho.powf(g);
                let p_rho = g * p / rho;
                let p_mu = p * (cp / c + gp * lnr);
                let p_rhorho = g * (g - 1.0) * p / (rho * rho);
                let p_rhomu = (gp * p + g * p_mu) / rho;
                PressureEvalFull { p, p_rho, p_mu, p_rhorho, p_rhomu }
            }
            LawKind::Nuclear { c, gamma } => {
                let mut out = PressureEvalFull { p: 0.0, p_rho: 0.0, p_mu: 0.0, p_rhorho: 0.0, p_rhomu: 0.0 };
                for k in 0..3 {
                    let sign = if k == 1 { -1.0 } else { 1.0 };
                    let g = gamma[k].eval(mu);
                    let gp = gamma[k].deriv(mu);
                    let term = sign * c[k] * rho.powf(g);
                    let term_mu = term * gp * lnr;
                    out.p += term;
                    out.p_rho += g * term / rho;
                    out.p_mu += term_mu;
                    out.p_rhorho += g * (g - 1.0) * term / (rho * rho);
                    out.p_rhomu += (gp * term + g * term_mu) / rho;
                }
                out
            }
        }
    }

    /// Closed-form primitive `F(rho, mu) = int_{rho_ref}^{rho} (p(s,mu) -
    /// p(rho_ref,mu)) / s^2 ds`, available for the power and nuclear kinds.
    /// The tempered internal energy is `rho * F + p(ref,ref) - p(ref,mu)`.
    pub fn energy_primitive_closed(&self, rho: f64, mu: f64) -> Option<f64> {
        if rho == self.rho_ref {
            return Some(0.0);
        }
        let rr = self.rho_ref;
        let term = |c: f64, g: f64| -> f64 {
            // int (c s^g - c rr^g)/s^2 ds from rr to rho
            let head = if (g - 1.0).abs() < 1e-12 {
                c * (rho / rr).ln()
            } else {
                c * (rho.powf(g - 1.0) - rr.powf(g - 1.0)) / (g - 1.0)
            };
            head + c * rr.powf(g) * (1.0 / rho - 1.0 / rr)
        };
        match &self.kind {
            LawKind::Power { coeff, gamma } => Some(term(coeff.eval(mu), gamma.eval(mu))),
            LawKind::Nuclear { c, gamma } => Some(
                term(c[0], gamma[0].eval(mu)) - term(c[1], gamma[1].eval(mu))
                    + term(c[2], gamma[2].eval(mu)),
            ),
        }
    }
}

/// The derived viscosity `nu = rho * dp/drho * psi'(p)`.
///
/// Zero is a legal return value (it flags a degenerate law; the audit
/// reports the lower-bound failure), but negative density is an error.
pub fn viscosity(law: &PressureLaw, psi: &PsiSpec, rho: f64, mu: f64) -> Result<f64> {
    let e = law.eval(rho, mu)?;
    if e.p <= 0.0 {
        return Err(Error::InvalidPressure(e.p));
    }
    Ok(rho * e.p_rho * psi.psi_prime(e.p)?)
}
