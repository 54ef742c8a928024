//! Manufactured-solution verification of the discretization.
//!
//! A smooth traveling wave with analytic source terms is integrated on a
//! sequence of grids; the discrete L2 errors against the manufactured
//! fields give the observed convergence order per field.

use crate::constitutive::{PressureLaw, PsiSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::solver::{stable_dt, step, Reconstruction};
use crate::State;

/// Smooth periodic traveling-wave fields
/// `rho = rho0 + rho_amp sin(theta)`, `u = u0 + u_amp cos(theta)`,
/// `mu = mu0 + mu_amp sin(theta)` with `theta = k 2pi/L x - omega t`.
#[derive(Debug, Clone, Copy)]
pub struct TravelingWave {
    pub rho0: f64,
    pub rho_amp: f64,
    pub u0: f64,
    pub u_amp: f64,
    pub mu0: f64,
    pub mu_amp: f64,
    pub mode: usize,
    pub omega: f64,
    pub length: f64,
}

impl TravelingWave {
    fn kappa(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.mode as f64 / self.length
    }

    pub fn fields(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let th = self.kappa() * x - self.omega * t;
        (
            self.rho0 + self.rho_amp * th.sin(),
            self.u0 + self.u_amp * th.cos(),
            self.mu0 + self.mu_amp * th.sin(),
        )
    }

    /// Source terms that make the wave an exact solution of the system.
    pub fn source(&self, law: &PressureLaw, psi: &PsiSpec, t: f64, x: f64) -> (f64, f64, f64) {
        let k = self.kappa();
        let th = k * x - self.omega * t;
        let (sn, cs) = th.sin_cos();

        let rho = self.rho0 + self.rho_amp * sn;
        let u = self.u0 + self.u_amp * cs;
        let mu = self.mu0 + self.mu_amp * sn;

        let rho_t = -self.omega * self.rho_amp * cs;
        let rho_x = k * self.rho_amp * cs;
        let u_t = self.omega * self.u_amp * sn;
        let u_x = -k * self.u_amp * sn;
        let u_xx = -k * k * self.u_amp * cs;
        let mu_t = -self.omega * self.mu_amp * cs;
        let mu_x = k * self.mu_amp * cs;

        let e = law.eval_full(rho, mu).expect("manufactured fields must stay admissible");
        let pp = psi.psi_prime(e.p).expect("manufactured pressure must be positive");
        let pps = psi.psi_second(e.p).expect("manufactured pressure must be positive");

        let p_x = e.p_rho * rho_x + e.p_mu * mu_x;
        let nu = rho * e.p_rho * pp;
        let nu_x = rho_x * e.p_rho * pp
            + rho * (e.p_rhorho * rho_x + e.p_rhomu * mu_x) * pp
            + rho * e.p_rho * pps * p_x;

        let s_rho = rho_t + rho_x * u + rho * u_x;
        let s_mom = rho_t * u + rho * u_t + rho_x * u * u + 2.0 * rho * u * u_x + p_x
            - (nu_x * u_x + nu * u_xx);
        let s_spc = rho_t * mu + rho * mu_t + rho_x * u * mu + rho * u_x * mu + rho * u * mu_x;
        (s_rho, s_mom, s_spc)
    }
}

#[derive(Debug, Clone)]
pub struct MmsReport {
    pub sizes: Vec<usize>,
    /// L2 errors per grid, fields ordered (rho, u, mu).
    pub errors: Vec<[f64; 3]>,
    /// Observed orders between consecutive grids, per field.
    pub orders: Vec<[f64; 3]>,
}

impl MmsReport {
    /// Mean observed order per field over all grid pairs.
    pub fn mean_orders(&self) -> [f64; 3] {
        let mut m = [0.0; 3];
        for o in &self.orders {
            for f in 0..3 {
                m[f] += o[f];
            }
        }
        for f in &mut m {
            *f /= self.orders.len() as f64;
        }
        m
    }
}

/// Integrate the manufactured problem to `t_end` on every grid size and
/// return errors and observed orders. Errors must decrease monotonically
/// with resolution, otherwise the study fails.
pub fn mms_study(
    law: &PressureLaw,
    psi: &PsiSpec,
    wave: &TravelingWave,
    sizes: &[usize],
    t_end: f64,
    cfl: f64,
    recon: Reconstruction,
) -> Result<MmsReport> {
    if sizes.len() < 2 {
        return Err(Error::InvalidParameter("convergence study needs at least 2 grids".into()));
    }
    let mut errors: Vec<[f64; 3]> = Vec::new();
    for &n in sizes {
        let grid = Grid::periodic(n, wave.length)?;
        let mut state = State::from_profiles(&grid, |x| wave.fields(0.0, x));
        let src = |t: f64, x: f64| wave.source(law, psi, t, x);
        while state.t < t_end {
            let dt = stable_dt(&state, &grid, law, psi, cfl)?.min(t_end - state.t);
            state = step(&state, dt, &grid, law, psi, recon, Some(&src))?;
        }
        let mut e2 = [0.0f64; 3];
        for i in 0..grid.n {
            let (r, u, m) = wave.fields(state.t, grid.x_center(i));
            let dr = state.rho[i] - r;
            let du = state.velocity(i) - u;
            let dm = state.mass_fraction(i) - m;
            e2[0] += dr * dr * grid.dx;
            e2[1] += du * du * grid.dx;
            e2[2] += dm * dm * grid.dx;
        }
        errors.push([e2[0].sqrt(), e2[1].sqrt(), e2[2].sqrt()]);
    }

    let mut orders = Vec::new();
    for w in errors.windows(2) {
        let mut o = [0.0; 3];
        for f in 0..3 {
            if w[1][f] >= w[0][f] {
                return Err(Error::VerificationFailure(format!(
                    "error in field {f} did not decrease under refinement: {} -> {}",
                    w[0][f], w[1][f]
                )));
            }
            o[f] = (w[0][f] / w[1][f]).log2();
        }
        orders.push(o);
    }
    Ok(MmsReport { sizes: sizes.to_vec(), errors, orders })
}
