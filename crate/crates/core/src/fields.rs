//! Derived per-cell fields shared by the integrator, the entropy
//! functionals, and the diagnostics, so that all of them use the same
//! stencils and the same constitutive evaluations.

use crate::constitutive::{PressureLaw, PsiSpec};
use crate::grid::{Boundary, Grid};
use crate::State;

/// Primitive and constitutive fields evaluated at every cell, plus the
/// ghost values used by the far-field clamp boundary.
pub(crate) struct CellFields {
    pub u: Vec<f64>,
    pub mu: Vec<f64>,
    pub p: Vec<f64>,
    pub p_rho: Vec<f64>,
    pub nu: Vec<f64>,
    pub psi_p: Vec<f64>,
    pub psi_prime: Vec<f64>,
    pub ghost: Ghost,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Ghost {
    pub rho: f64,
    pub u: f64,
    pub mu: f64,
    pub p: f64,
    pub nu: f64,
    pub psi_p: f64,
}

/// Evaluate all derived fields. Invalid states produce NaNs that the
/// integrator's divergence check reports; this path performs no argument
/// checking of its own.
pub(crate) fn cell_fields(state: &State, grid: &Grid, law: &PressureLaw, psi: &PsiSpec) -> CellFields {
    cell_fields_impl(state, grid, law, psi, true)
}

/// Same, but skips the psi(p) values the flux evaluation never touches.
pub(crate) fn cell_fields_rhs(
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
) -> CellFields {
    cell_fields_impl(state, grid, law, psi, false)
}

fn cell_fields_impl(
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
    with_psi_values: bool,
) -> CellFields {
    let n = grid.n;
    let mut u = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut p_rho = Vec::with_capacity(n);
    let mut nu = Vec::with_capacity(n);
    let mut psi_p = Vec::with_capacity(n);
    let mut psi_prime = Vec::with_capacity(n);

    let a_lo = psi.alpha.alpha_lo;
    let a_hi = psi.alpha.alpha_hi;
    let c_psi = psi.c_psi;

    for i in 0..n {
        let r = state.rho[i];
        let ui = state.mom[i] / r;
        let mi = state.spc[i] / r;
        let (pi, pri) = law.eval_basic(r, mi);
        let a = if pi <= 1.0 { a_lo } else { a_hi };
        let pp = c_psi * pi.powf(-a);
        if with_psi_values {
            let psv = if (a - 1.0).abs() < 1e-12 {
                c_psi * pi.ln()
            } else {
                c_psi * (pi.powf(1.0 - a) - 1.0) / (1.0 - a)
            };
            psi_p.push(psv);
        }
        u.push(ui);
        mu.push(mi);
        p.push(pi);
        p_rho.push(pri);
        nu.push(r * pri * pp);
        psi_prime.push(pp);
    }

    let (gp, gpr) = law.eval_basic(law.rho_ref, law.mu_ref);
    let gpp = psi.psi_prime(gp).unwrap_or(f64::NAN);
    let ghost = Ghost {
        rho: law.rho_ref,
        u: 0.0,
        mu: law.mu_ref,
        p: gp,
        nu: law.rho_ref * gpr * gpp,
        psi_p: psi.psi(gp).unwrap_or(f64::NAN),
    };

    CellFields { u, mu, p, p_rho, nu, psi_p, psi_prime, ghost }
}

/// Value of `v` at possibly out-of-range index `i`: periodic wrap, or the
/// supplied ghost value under the far-field clamp.
#[inline]
pub(crate) fn ext(v: &[f64], i: isize, grid: &Grid, ghost: f64) -> f64 {
    let n = grid.n as isize;
    if i >= 0 && i < n {
        v[i as usize]
    } else {
        match grid.boundary {
            Boundary::Periodic => v[(((i % n) + n) % n) as usize],
            Boundary::FarfieldClamp => ghost,
        }
    }
}

impl CellFields {
    /// Central difference of the cell pressures, the stencil the momentum
    /// equation uses for the pressure gradient.
    #[inline]
    pub(crate) fn dp_dx(&self, grid: &Grid, i: usize) -> f64 {
        let ii = i as isize;
        (ext(&self.p, ii + 1, grid, self.ghost.p) - ext(&self.p, ii - 1, grid, self.ghost.p))
            / (2.0 * grid.dx)
    }

    /// Central difference of psi(p), the stencil of the effective-velocity
    /// correction.
    #[inline]
    pub(crate) fn dpsi_dx(&self, grid: &Grid, i: usize) -> f64 {
        let ii = i as isize;
        (ext(&self.psi_p, ii + 1, grid, self.ghost.psi_p)
            - ext(&self.psi_p, ii - 1, grid, self.ghost.psi_p))
            / (2.0 * grid.dx)
    }

    /// Face-averaged viscosity times face velocity difference over dx: the
    /// viscous flux at face i+1/2, also the stencil of the entropy
    /// dissipation sum.
    #[inline]
    pub(crate) fn viscous_flux(&self, grid: &Grid, i: usize) -> f64 {
        let ii = i as isize;
        let nu_face = 0.5
            * (ext(&self.nu, ii, grid, self.ghost.nu) + ext(&self.nu, ii + 1, grid, self.ghost.nu));
        let du = (ext(&self.u, ii + 1, grid, self.ghost.u) - ext(&self.u, ii, grid, self.ghost.u))
            / grid.dx;
        nu_face * du
    }

    /// Central difference of the mass fraction over density, the transported
    /// gradient the diagnostics monitor.
    #[inline]
    pub(crate) fn mu_grad_over_rho(&self, state: &State, grid: &Grid, i: usize) -> f64 {
        let ii = i as isize;
        let dmu = (ext(&self.mu, ii + 1, grid, self.ghost.mu)
            - ext(&self.mu, ii - 1, grid, self.ghost.mu))
            / (2.0 * grid.dx);
        dmu / state.rho[i]
    }
}
