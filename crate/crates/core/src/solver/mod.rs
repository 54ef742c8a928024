//! Finite-volume integrator for the barotropic multicomponent system with
//! pressure-derived viscosity.
//!
//! Scheme: collocated cell-centered mesh; Rusanov (local Lax-Friedrichs)
//! convective fluxes on linearly reconstructed face states with signal speed
//! `|u| + sqrt(dp/drho)`; species advected as `rho mu` with the face mass
//! flux and upwinded face mass fraction, which preserves the discrete
//! maximum principle on mu exactly; pressure gradient and viscous term by
//! second-order central differences; SSP-RK2 in time.

pub mod mms;

use crate::constitutive::{PressureLaw, PsiSpec};
use crate::error::{Error, Result};
use crate::fields::{cell_fields_rhs, ext};
use crate::grid::{Boundary, Grid};
use crate::State;

/// Density floor as a fraction of the reference density. Reaching it is a
/// divergence, not something to clamp away: vacuum formation means the
/// scheme has left the regime the bounds promise.
pub const RHO_FLOOR_FACTOR: f64 = 1e-10;

/// Face-state reconstruction for the convective fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reconstruction {
    /// Unlimited Fromm slopes (second order); the mass-fraction face values
    /// are clamped to the adjacent cell range to keep the maximum principle.
    Fromm,
    /// Piecewise-constant states (first order), kept for verification runs.
    FirstOrder,
}

/// Initial-condition families. Profiles are built from the law's reference
/// state; amplitudes of zero reproduce the uniform state.
#[derive(Debug, Clone)]
pub enum InitFamily {
    Uniform,
    /// Compactly supported smooth density bump `rho_ref + amp * b(d/radius)`
    /// with `b(r) = exp(1 - 1/(1 - r^2))`; identically `rho_ref` beyond
    /// `radius` from the center.
    GaussianRhoBump { amp: f64, radius: f64, center: f64 },
    /// Smoothed species slab: `mu_ref + delta_mu/2 * [tanh((s+half_width)/width)
    /// - tanh((s-half_width)/width)]` in centered coordinates s.
    TanhMuInterface { delta_mu: f64, width: f64, half_width: f64, center: f64 },
    /// Compact velocity pulse `amp * b(d/radius)`.
    VelocityPulse { amp: f64, radius: f64, center: f64 },
    /// All three features together.
    Composite {
        rho_amp: f64,
        rho_radius: f64,
        rho_center: f64,
        delta_mu: f64,
        mu_width: f64,
        mu_half_width: f64,
        mu_center: f64,
        u_amp: f64,
        u_radius: f64,
        u_center: f64,
    },
}

#[derive(Debug, Clone)]
pub struct InitSpec {
    pub family: InitFamily,
    /// Uniform background velocity added to every family.
    pub u_background: f64,
}

impl InitSpec {
    pub fn uniform() -> Self {
        InitSpec { family: InitFamily::Uniform, u_background: 0.0 }
    }
}

/// C-infinity bump with unit height and support |r| < 1.
fn bump(r: f64) -> f64 {
    let r2 = r * r;
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

/// Signed offset of x from the center, wrapped into [-L/2, L/2).
fn centered(x: f64, center: f64, length: f64) -> f64 {
    let mut s = (x - center).rem_euclid(length);
    if s >= 0.5 * length {
        s -= length;
    }
    s
}

/// Build cell-averaged initial data (midpoint sampling) and the realized
/// gradient constant `C0 = sup |d mu0/dx| / rho0`.
pub fn init_data(spec: &InitSpec, grid: &Grid, law: &PressureLaw) -> Result<(State, f64)> {
    let rho_ref = law.rho_ref;
    let mu_ref = law.mu_ref;
    let length = grid.length;

    let profile = |x: f64| -> (f64, f64, f64) {
        let mut rho = rho_ref;
        let mut u = spec.u_background;
        let mut mu = mu_ref;
        match &spec.family {
            InitFamily::Uniform => {}
            InitFamily::GaussianRhoBump { amp, radius, center } => {
                rho += amp * bump(centered(x, *center, length) / radius);
            }
            InitFamily::TanhMuInterface { delta_mu, width, half_width, center } => {
                let s = centered(x, *center, length);
                mu += 0.5 * delta_mu * (((s + half_width) / width).tanh() - ((s - half_width) / width).tanh());
            }
            InitFamily::VelocityPulse { amp, radius, center } => {
                u += amp * bump(centered(x, *center, length) / radius);
            }
            InitFamily::Composite {
                rho_amp,
                rho_radius,
                rho_center,
                delta_mu,
                mu_width,
                mu_half_width,
                mu_center,
                u_amp,
                u_radius,
                u_center,
            } => {
                rho += rho_amp * bump(centered(x, *rho_center, length) / rho_radius);
                let s = centered(x, *mu_center, length);
                mu += 0.5
                    * delta_mu
                    * (((s + mu_half_width) / mu_width).tanh() - ((s - mu_half_width) / mu_width).tanh());
                u += u_amp * bump(centered(x, *u_center, length) / u_radius);
            }
        }
        (rho, u, mu)
    };

    let state = State::from_profiles(grid, profile);
    for i in 0..grid.n {
        let r = state.rho[i];
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidInitialData(format!(
                "density {r} at cell {i} (x = {})",
                grid.x_center(i)
            )));
        }
        if !state.mom[i].is_finite() || !state.spc[i].is_finite() {
            return Err(Error::InvalidInitialData(format!("non-finite fields at cell {i}")));
        }
    }

    // Realized gradient constant, with the diagnostics stencil.
    let mut c0 = 0.0f64;
    for i in 0..grid.n {
        let mu_p = state.mass_fraction((i + 1) % grid.n);
        let mu_m = state.mass_fraction((i + grid.n - 1) % grid.n);
        let g = ((mu_p - mu_m) / (2.0 * grid.dx) / state.rho[i]).abs();
        c0 = c0.max(g);
    }
    Ok((state, c0))
}

/// Tendency arrays (d/dt of the conserved fields).
#[derive(Debug, Clone)]
pub struct Tendencies {
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    pub spc: Vec<f64>,
}

/// Optional manufactured source `(t, x) -> (s_rho, s_mom, s_spc)`.
pub type Source<'a> = &'a dyn Fn(f64, f64) -> (f64, f64, f64);

/// Semi-discrete right-hand side at stage time `t_stage`.
pub fn rhs(
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
    recon: Reconstruction,
    source: Option<Source>,
    t_stage: f64,
) -> Result<Tendencies> {
    state.check_positive()?;
    Ok(rhs_unchecked(state, grid, law, psi, recon, source, t_stage))
}

fn rhs_unchecked(
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
    recon: Reconstruction,
    source: Option<Source>,
    t_stage: f64,
) -> Tendencies {
    let n = grid.n;
    let dx = grid.dx;
    let f = cell_fields_rhs(state, grid, law, psi);
    let g = f.ghost;

    let rho_at = |i: isize| ext(&state.rho, i, grid, g.rho);
    let u_at = |i: isize| ext(&f.u, i, grid, g.u);
    let mu_at = |i: isize| ext(&f.mu, i, grid, g.mu);
    let prho_at = |i: isize| ext(&f.p_rho, i, grid, g.p);

    let ghost_cell = |i: isize| grid.boundary == Boundary::FarfieldClamp && (i < 0 || i >= n as isize);

    // Half-jump to the face (Fromm slope); zero for first order and at
    // far-field ghosts.
    let slope = |v: &dyn Fn(isize) -> f64, i: isize| -> f64 {
        match recon {
            Reconstruction::FirstOrder => 0.0,
            Reconstruction::Fromm => {
                if ghost_cell(i) {
                    0.0
                } else {
                    0.25 * (v(i + 1) - v(i - 1))
                }
            }
        }
    };

    // Mass-fraction half-jump: minmod instead of Fromm. The slope magnitude
    // never exceeds either one-sided difference, which is exactly what makes
    // the upwinded species update a convex combination of neighbor values
    // (the discrete maximum principle) under the CFL bound.
    let mu_slope = |i: isize| -> f64 {
        match recon {
            Reconstruction::FirstOrder => 0.0,
            Reconstruction::Fromm => {
                if ghost_cell(i) {
                    0.0
                } else {
                    let dl = mu_at(i) - mu_at(i - 1);
                    let dr = mu_at(i + 1) - mu_at(i);
                    if dl * dr <= 0.0 {
                        0.0
                    } else if dl.abs() <= dr.abs() {
                        0.5 * dl
                    } else {
                        0.5 * dr
                    }
                }
            }
        }
    };

    let n_faces = match grid.boundary {
        Boundary::Periodic => n,
        Boundary::FarfieldClamp => n + 1,
    };

    // Face k sits between cells k-1 and k.
    let mut f_rho = vec![0.0; n_faces];
    let mut f_mom = vec![0.0; n_faces];
    let mut f_spc = vec![0.0; n_faces];
    let mut g_visc = vec![0.0; n_faces];

    for k in 0..n_faces {
        let il = k as isize - 1;
        let ir = k as isize;

        let rho_l = rho_at(il) + slope(&rho_at, il);
        let rho_r = rho_at(ir) - slope(&rho_at, ir);
        let u_l = u_at(il) + slope(&u_at, il);
        let u_r = u_at(ir) - slope(&u_at, ir);

        let mu_l = mu_at(il) + mu_slope(il);
        let mu_r = mu_at(ir) - mu_slope(ir);

        let lambda = (u_at(il).abs() + prho_at(il).sqrt()).max(u_at(ir).abs() + prho_at(ir).sqrt());

        let fr = 0.5 * (rho_l * u_l + rho_r * u_r) - 0.5 * lambda * (rho_r - rho_l);
        f_rho[k] = fr;
        f_mom[k] = 0.5 * (rho_l * u_l * u_l + rho_r * u_r * u_r)
            - 0.5 * lambda * (rho_r * u_r - rho_l * u_l);
        f_spc[k] = fr * if fr >= 0.0 { mu_l } else { mu_r };

        let nu_face = 0.5 * (ext(&f.nu, il, grid, g.nu) + ext(&f.nu, ir, grid, g.nu));
        g_visc[k] = nu_face * (u_at(ir) - u_at(il)) / dx;
    }

    let mut tend = Tendencies { rho: vec![0.0; n], mom: vec![0.0; n], spc: vec![0.0; n] };
    for i in 0..n {
        let (kl, kr) = match grid.boundary {
            Boundary::Periodic => (i, (i + 1) % n),
            Boundary::FarfieldClamp => (i, i + 1),
        };
        tend.rho[i] = -(f_rho[kr] - f_rho[kl]) / dx;
        tend.spc[i] = -(f_spc[kr] - f_spc[kl]) / dx;
        let dp = (ext(&f.p, i as isize + 1, grid, g.p) - ext(&f.p, i as isize - 1, grid, g.p))
            / (2.0 * dx);
        tend.mom[i] = -(f_mom[kr] - f_mom[kl]) / dx - dp + (g_visc[kr] - g_visc[kl]) / dx;
    }

    if let Some(src) = source {
        for i in 0..n {
            let (sr, sm, ss) = src(t_stage, grid.x_center(i));
            tend.rho[i] += sr;
            tend.mom[i] += sm;
            tend.spc[i] += ss;
        }
    }
    tend
}

/// Largest stable time step:
/// `dt = cfl * min_i( dx/(|u_i| + c_i), rho_i dx^2 / (2 nu_i) )` with
/// `c = sqrt(dp/drho)`. The supported CFL range is (0, 1]; larger values are
/// accepted so instability experiments can demonstrate the divergence path.
pub fn stable_dt(
    state: &State,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
    cfl: f64,
) -> Result<f64> {
    if !(cfl.is_finite() && cfl > 0.0) {
        return Err(Error::InvalidParameter(format!("cfl must be positive, got {cfl}")));
    }
    let f = cell_fields_rhs(state, grid, law, psi);
    let mut limit = f64::INFINITY;
    for i in 0..grid.n {
        let c = f.p_rho[i].sqrt();
        let adv = grid.dx / (f.u[i].abs() + c);
        let visc = if f.nu[i] > 0.0 {
            state.rho[i] * grid.dx * grid.dx / (2.0 * f.nu[i])
        } else {
            f64::INFINITY
        };
        limit = limit.min(adv.min(visc));
    }
    let dt = cfl * limit;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NumericFailure(format!(
            "non-finite stable time step (limit = {limit})"
        )));
    }
    Ok(dt)
}

/// One SSP-RK2 (Heun) step. Fails with `SimulationDiverged` if any stage
/// produces NaN/Inf or drives the density to the floor.
pub fn step(
    state: &State,
    dt: f64,
    grid: &Grid,
    law: &PressureLaw,
    psi: &PsiSpec,
    recon: Reconstruction,
    source: Option<Source>,
) -> Result<State> {
    let floor = RHO_FLOOR_FACTOR * law.rho_ref;
    let n = grid.n;

    let k1 = rhs(state, grid, law, psi, recon, source, state.t)?;
    let mut s1 = State {
        t: state.t + dt,
        rho: Vec::with_capacity(n),
        mom: Vec::with_capacity(n),
        spc: Vec::with_capacity(n),
    };
    for i in 0..n {
        s1.rho.push(state.rho[i] + dt * k1.rho[i]);
        s1.mom.push(state.mom[i] + dt * k1.mom[i]);
        s1.spc.push(state.spc[i] + dt * k1.spc[i]);
    }
    s1.check_diverged(floor)?;

    let k2 = rhs_unchecked(&s1, grid, law, psi, recon, source, s1.t);
    let mut out = State {
        t: state.t + dt,
        rho: Vec::with_capacity(n),
        mom: Vec::with_capacity(n),
        spc: Vec::with_capacity(n),
    };
    for i in 0..n {
        out.rho.push(0.5 * (state.rho[i] + s1.rho[i] + dt * k2.rho[i]));
        out.mom.push(0.5 * (state.mom[i] + s1.mom[i] + dt * k2.mom[i]));
        out.spc.push(0.5 * (state.spc[i] + s1.spc[i] + dt * k2.spc[i]));
    }
    out.check_diverged(floor)?;
    Ok(out)
}

/// Everything a run needs besides the initial data.
pub struct RunParams<'a> {
    pub law: &'a PressureLaw,
    pub psi: &'a PsiSpec,
    pub grid: Grid,
    pub t_end: f64,
    pub cfl: f64,
    pub reconstruction: Reconstruction,
    pub diag_interval: f64,
    /// Keep a full state snapshot at every diagnostic time (needed by the
    /// trajectory comparison).
    pub collect_states: bool,
    pub quad: crate::thermo::EnergyQuadrature,
}

/// Result of a run. `error` is set when the integration stopped early; the
/// series collected up to that point are still valid.
pub struct RunOutcome {
    pub records: Vec<crate::diagnostics::DiagnosticsRecord>,
    pub states: Vec<(f64, State)>,
    pub final_state: State,
    pub dt_history: Vec<f64>,
    pub error: Option<Error>,
}

/// Integrate from `state0` to `t_end`, emitting a diagnostics record at
/// every multiple of `diag_interval` (steps are clamped to land on these
/// times exactly, so runs with identical cadence share output times
/// bitwise) and at `t_end`. Deterministic for fixed inputs.
pub fn run_from_state(params: &RunParams, state0: State) -> RunOutcome {
    let mut records = Vec::new();
    let mut states = Vec::new();
    let mut dt_history = Vec::new();

    // A record failure (vacuum, non-finite sums) ends the run like any
    // other divergence; everything collected so far stays in the outcome.
    let record_now = |state: &State,
                      records: &mut Vec<crate::diagnostics::DiagnosticsRecord>,
                      states: &mut Vec<(f64, State)>|
     -> Option<Error> {
        if params.collect_states {
            states.push((state.t, state.clone()));
        }
        match crate::diagnostics::record(state, &params.grid, params.law, params.psi, &params.quad)
        {
            Ok(r) => {
                records.push(r);
                None
            }
            Err(e) => Some(e),
        }
    };

    let mut state = state0;
    if let Some(e) = record_now(&state, &mut records, &mut states) {
        let final_state = state;
        return RunOutcome { records, states, final_state, dt_history, error: Some(e) };
    }

    let mut k_out: u64 = 1;
    while state.t < params.t_end {
        let mut dt = match stable_dt(&state, &params.grid, params.law, params.psi, params.cfl) {
            Ok(dt) => dt,
            Err(e) => {
                let final_state = state;
                return RunOutcome { records, states, final_state, dt_history, error: Some(e) };
            }
        };
        let next_out = (k_out as f64 * params.diag_interval).min(params.t_end);
        let mut at_output = false;
        if state.t + dt >= next_out {
            dt = next_out - state.t;
            at_output = true;
        }
        match step(&state, dt, &params.grid, params.law, params.psi, params.reconstruction, None) {
            Ok(mut s) => {
                if at_output {
                    s.t = next_out; // land exactly, no accumulation drift
                }
                dt_history.push(dt);
                state = s;
            }
            Err(e) => {
                let final_state = state;
                return RunOutcome { records, states, final_state, dt_history, error: Some(e) };
            }
        }
        if at_output {
            if let Some(e) = record_now(&state, &mut records, &mut states) {
                let final_state = state;
                return RunOutcome { records, states, final_state, dt_history, error: Some(e) };
            }
            if next_out >= params.t_end {
                break;
            }
            k_out += 1;
        }
    }

    RunOutcome { records, states, final_state: state, dt_history, error: None }
}

/// Build initial data from a family spec and integrate.
pub fn run(params: &RunParams, init: &InitSpec) -> Result<RunOutcome> {
    let (state0, _c0) = init_data(init, &params.grid, params.law)?;
    Ok(run_from_state(params, state0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{AlphaChoice, GammaWindow, ParamCurve};
    use std::f64::consts::PI;

    fn quadratic_law() -> PressureLaw {
        PressureLaw::power(
            ParamCurve::constant(1.0),
            ParamCurve::constant(2.0),
            1.0,
            0.0,
            (-1.0, 1.0),
        )
        .unwrap()
    }

    fn psi_for_gamma2() -> PsiSpec {
        // Window holding gamma = 2: (1.9, 2.1) satisfies both inequalities.
        let w = GammaWindow::new(1.9, 2.1).unwrap();
        PsiSpec::new(AlphaChoice::new(&w, 1.0, 0.5).unwrap())
    }

    fn mu_coupled_law() -> PressureLaw {
        PressureLaw::power(
            ParamCurve::affine(1.0, 0.2, 0.9, 1.2).unwrap(),
            ParamCurve::affine(1.34, 0.04, 1.32, 1.38).unwrap(),
            1.0,
            0.5,
            (0.0, 1.0),
        )
        .unwrap()
    }

    fn bench_psi() -> PsiSpec {
        let w = GammaWindow::new(1.3, 1.4).unwrap();
        PsiSpec::new(AlphaChoice::new(&w, 1.0, 0.5).unwrap())
    }

    #[test]
    fn uniform_family_is_exact_reference_state() {
        let law = mu_coupled_law();
        let g = Grid::periodic(32, 2.0 * PI).unwrap();
        let (s, c0) = init_data(&InitSpec::uniform(), &g, &law).unwrap();
        assert!(s.rho.iter().all(|&r| r == 1.0));
        assert!(s.mom.iter().all(|&m| m == 0.0));
        assert!(s.spc.iter().all(|&q| q == 0.5));
        assert_eq!(c0, 0.0);
    }

    #[test]
    fn tanh_interface_gradient_constant_converges() {
        let law = mu_coupled_law();
        let delta_mu = 0.4;
        let width = 0.15;
        let expect = delta_mu / (2.0 * width);
        let mut errs = Vec::new();
        for &n in &[256usize, 512, 1024] {
            let g = Grid::periodic(n, 2.0 * PI).unwrap();
            let spec = InitSpec {
                family: InitFamily::TanhMuInterface {
                    delta_mu,
                    width,
                    half_width: PI / 2.0,
                    center: PI,
                },
                u_background: 0.0,
            };
            let (_, c0) = init_data(&spec, &g, &law).unwrap();
            errs.push((c0 - expect).abs() / expect);
        }
        assert!(errs[2] < 1e-3, "C0 relative error {:?}", errs);
        assert!(errs[2] < errs[0]);
    }

    #[test]
    fn bump_amplitude_reaching_vacuum_is_rejected() {
        let law = quadratic_law();
        let g = Grid::periodic(64, 2.0 * PI).unwrap();
        // Center the bump on a cell so the extremum is sampled: amplitude
        // -rho_ref drives that cell to exactly zero density.
        let spec = InitSpec {
            family: InitFamily::GaussianRhoBump { amp: -1.0, radius: PI / 2.0, center: g.x_center(32) },
            u_background: 0.0,
        };
        assert!(matches!(
            init_data(&spec, &g, &law),
            Err(Error::InvalidInitialData(_))
        ));
    }

    #[test]
    fn bump_far_field_is_exactly_reference() {
        let law = quadratic_law();
        let g = Grid::periodic(128, 2.0 * PI).unwrap();
        let spec = InitSpec {
            family: InitFamily::GaussianRhoBump { amp: 0.3, radius: 1.0, center: PI },
            u_background: 0.0,
        };
        let (s, _) = init_data(&spec, &g, &law).unwrap();
        // Cells more than one radius from the center carry the reference
        // state exactly.
        for i in 0..g.n {
            if g.periodic_distance(g.x_center(i), PI) > 1.0 {
                assert_eq!(s.rho[i], 1.0);
                assert_eq!(s.mom[i], 0.0);
            }
        }
        assert!(s.rho.iter().any(|&r| r > 1.2));
    }

    #[test]
    fn rest_state_tendencies_are_exactly_zero() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let g = Grid::periodic(64, 2.0 * PI).unwrap();
        let s = State::uniform(&g, 1.0, 0.0, 0.5);
        let t = rhs(&s, &g, &law, &psi, Reconstruction::Fromm, None, 0.0).unwrap();
        assert!(t.rho.iter().all(|&v| v == 0.0));
        assert!(t.mom.iter().all(|&v| v == 0.0));
        assert!(t.spc.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tendency_sums_vanish_for_conserved_fields() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let g = Grid::periodic(128, 2.0 * PI).unwrap();
        let s = State::from_profiles(&g, |x| {
            (1.0 + 0.2 * x.sin(), 0.3 * (2.0 * x).cos(), 0.5 + 0.2 * x.cos())
        });
        let t = rhs(&s, &g, &law, &psi, Reconstruction::Fromm, None, 0.0).unwrap();
        let sum = |v: &[f64]| v.iter().sum::<f64>() * g.dx;
        assert!(sum(&t.rho).abs() < 1e-13);
        assert!(sum(&t.spc).abs() < 1e-13);
        assert!(sum(&t.mom).abs() < 1e-12);
    }

    #[test]
    fn mu_profile_translates_with_uniform_flow() {
        // mu-independent law, uniform rho and u: the species profile is
        // passively advected; after t the solution is the translated profile.
        let law = quadratic_law();
        let psi = psi_for_gamma2();
        let n = 256;
        let g = Grid::periodic(n, 2.0 * PI).unwrap();
        let u0 = 0.7;
        let mu_f = |x: f64| 0.5 + 0.3 * x.sin();
        let s0 = State::from_profiles(&g, |x| (1.0, u0, mu_f(x)));

        let t_final = 0.5;
        let mut s = s0.clone();
        while s.t < t_final {
            let dt = stable_dt(&s, &g, &law, &psi, 0.4).unwrap().min(t_final - s.t);
            s = step(&s, dt, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
        }
        // rho and momentum stay uniform to round-off.
        for i in 0..n {
            assert!((s.rho[i] - 1.0).abs() < 1e-12);
            assert!((s.velocity(i) - u0).abs() < 1e-12);
        }
        // mu matches the translated profile to discretization error.
        let mut l2 = 0.0;
        for i in 0..n {
            let x = g.x_center(i);
            let err = s.mass_fraction(i) - mu_f(x - u0 * s.t);
            l2 += err * err * g.dx;
        }
        assert!(l2.sqrt() < 5e-3, "L2 error {}", l2.sqrt());
        // Total species conserved; extrema not enlarged.
        let tot0: f64 = s0.spc.iter().sum::<f64>() * g.dx;
        let tot1: f64 = s.spc.iter().sum::<f64>() * g.dx;
        assert!((tot1 - tot0).abs() < 1e-12 * tot0.abs());
        let (min0, max0) = (0..n).fold((f64::MAX, f64::MIN), |(lo, hi), i| {
            (lo.min(s0.mass_fraction(i)), hi.max(s0.mass_fraction(i)))
        });
        for i in 0..n {
            let m = s.mass_fraction(i);
            assert!(m >= min0 - 1e-12 && m <= max0 + 1e-12);
        }
    }

    #[test]
    fn stable_dt_formula_values() {
        let law = quadratic_law();
        let psi = psi_for_gamma2();
        let g = Grid::periodic(8, 2.0 * PI).unwrap();
        let s = State::uniform(&g, 1.0, 0.0, 0.0);
        // p = rho^2 at rho = 1: c = sqrt(2), nu = 2.
        let dt = stable_dt(&s, &g, &law, &psi, 1.0).unwrap();
        let dx = g.dx;
        let expect = (dx / 2f64.sqrt()).min(dx * dx / 4.0);
        assert!((dt - expect).abs() < 1e-15);
        assert!((dt - 0.15421256876702122).abs() < 1e-12);

        // Halving dx quarters the step in the diffusion-dominated regime.
        let g2 = Grid::periodic(16, 2.0 * PI).unwrap();
        let s2 = State::uniform(&g2, 1.0, 0.0, 0.0);
        let dt2 = stable_dt(&s2, &g2, &law, &psi, 1.0).unwrap();
        assert!((dt2 - dt / 4.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_state_is_a_fixed_point_of_step() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let g = Grid::periodic(32, 2.0 * PI).unwrap();
        let s = State::uniform(&g, 1.0, 0.0, 0.5);
        let dt = stable_dt(&s, &g, &law, &psi, 0.4).unwrap();
        let s1 = step(&s, dt, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
        assert_eq!(s1.rho, s.rho);
        assert_eq!(s1.mom, s.mom);
        assert_eq!(s1.spc, s.spc);
    }

    #[test]
    fn oversized_step_diverges_with_cell_report() {
        let law = quadratic_law();
        let psi = psi_for_gamma2();
        let g = Grid::periodic(128, 2.0 * PI).unwrap();
        let s0 = State::from_profiles(&g, |x| {
            let pert = 1e-3 * x.sin();
            (1.0 + pert, 2f64.sqrt() * pert, 0.0)
        });
        let dt = 10.0 * stable_dt(&s0, &g, &law, &psi, 1.0).unwrap();
        let mut s = s0;
        let mut diverged = false;
        for _ in 0..400 {
            match step(&s, dt, &g, &law, &psi, Reconstruction::Fromm, None) {
                Ok(next) => s = next,
                Err(Error::SimulationDiverged { .. }) => {
                    diverged = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(diverged, "10x the stable step must blow up");
    }

    #[test]
    fn translation_equivariance_is_bitwise() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let g = Grid::periodic(64, 2.0 * PI).unwrap();
        let s0 = State::from_profiles(&g, |x| {
            (1.0 + 0.2 * x.sin(), 0.1 * x.cos(), 0.5 + 0.1 * (2.0 * x).sin())
        });
        let k = 13;
        let mut a = s0.clone();
        let mut b = s0.rotated(k);
        for _ in 0..25 {
            let dta = stable_dt(&a, &g, &law, &psi, 0.4).unwrap();
            let dtb = stable_dt(&b, &g, &law, &psi, 0.4).unwrap();
            assert_eq!(dta.to_bits(), dtb.to_bits());
            a = step(&a, dta, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
            b = step(&b, dtb, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
        }
        let a_rot = a.rotated(k);
        for i in 0..g.n {
            assert_eq!(a_rot.rho[i].to_bits(), b.rho[i].to_bits());
            assert_eq!(a_rot.mom[i].to_bits(), b.mom[i].to_bits());
            assert_eq!(a_rot.spc[i].to_bits(), b.spc[i].to_bits());
        }
    }

    #[test]
    fn conservation_over_many_steps() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let g = Grid::periodic(128, 2.0 * PI).unwrap();
        let spec = InitSpec {
            family: InitFamily::Composite {
                rho_amp: 0.25,
                rho_radius: 1.2,
                rho_center: PI,
                delta_mu: 0.3,
                mu_width: 0.25,
                mu_half_width: 1.0,
                mu_center: PI,
                u_amp: 0.1,
                u_radius: 1.0,
                u_center: PI / 2.0,
            },
            u_background: 0.0,
        };
        let (s0, _) = init_data(&spec, &g, &law).unwrap();
        let sum = |v: &[f64]| v.iter().sum::<f64>() * g.dx;
        let (m0, p0, q0) = (sum(&s0.rho), sum(&s0.mom), sum(&s0.spc));
        let (mut min_mu, mut max_mu) = (f64::MAX, f64::MIN);
        for i in 0..g.n {
            min_mu = min_mu.min(s0.mass_fraction(i));
            max_mu = max_mu.max(s0.mass_fraction(i));
        }

        let mut s = s0;
        let mut steps = 0;
        while steps < 1200 {
            let dt = stable_dt(&s, &g, &law, &psi, 0.4).unwrap();
            s = step(&s, dt, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
            steps += 1;
        }
        assert!((sum(&s.rho) - m0).abs() <= 1e-12 * m0.abs());
        assert!((sum(&s.spc) - q0).abs() <= 1e-12 * q0.abs());
        assert!((sum(&s.mom) - p0).abs() <= 1e-10 * m0.abs().max(1.0));
        for i in 0..g.n {
            let m = s.mass_fraction(i);
            assert!(
                m >= min_mu - 1e-12 && m <= max_mu + 1e-12,
                "mu = {m} outside [{min_mu}, {max_mu}] at cell {i}"
            );
        }
    }

    #[test]
    fn density_stays_above_half_initial_over_unit_time() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let g = Grid::periodic(128, 2.0 * PI).unwrap();
        let spec = InitSpec {
            family: InitFamily::GaussianRhoBump { amp: 0.15, radius: 1.2, center: PI },
            u_background: 0.0,
        };
        let (s0, _) = init_data(&spec, &g, &law).unwrap();
        let min0 = s0.rho.iter().cloned().fold(f64::MAX, f64::min);
        let max0 = s0.rho.iter().cloned().fold(f64::MIN, f64::max);
        let mut s = s0;
        let mut min_seen = min0;
        let mut max_seen = max0;
        while s.t < 1.0 {
            let dt = stable_dt(&s, &g, &law, &psi, 0.4).unwrap().min(1.0 - s.t);
            s = step(&s, dt, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
            for &r in &s.rho {
                min_seen = min_seen.min(r);
                max_seen = max_seen.max(r);
            }
        }
        assert!(min_seen >= 0.5 * min0, "min rho {min_seen} fell below half of {min0}");
        assert!(max_seen <= 2.0 * max0, "max rho {max_seen} rose above twice {max0}");
    }

    #[test]
    fn gradient_sup_monotone_for_first_order_decoupled_advection() {
        // With piecewise-constant upwinding the species update is a convex
        // combination of neighbor values, and so is the update of the
        // difference field: the transported-gradient sup can only decay.
        // (The reconstructed scheme tracks it to within the drift check
        // instead; its discrete sup wobbles with the sub-cell interface
        // position.)
        let law = quadratic_law();
        let psi = psi_for_gamma2();
        let g = Grid::periodic(128, 2.0 * PI).unwrap();
        let spec = InitSpec {
            family: InitFamily::TanhMuInterface {
                delta_mu: 0.4,
                width: 0.2,
                half_width: PI / 2.0,
                center: PI,
            },
            u_background: 0.5,
        };
        let (mut s, c0) = init_data(&spec, &g, &law).unwrap();
        let sup = |s: &State| -> f64 {
            let mut m = 0.0f64;
            for i in 0..g.n {
                let d = (s.mass_fraction((i + 1) % g.n) - s.mass_fraction((i + g.n - 1) % g.n))
                    / (2.0 * g.dx);
                m = m.max((d / s.rho[i]).abs());
            }
            m
        };
        let mut prev = sup(&s);
        assert!((prev - c0).abs() <= 1e-12);
        for _ in 0..800 {
            let dt = stable_dt(&s, &g, &law, &psi, 0.4).unwrap();
            s = step(&s, dt, &g, &law, &psi, Reconstruction::FirstOrder, None).unwrap();
            let cur = sup(&s);
            assert!(cur <= prev + 1e-13, "gradient sup rose: {prev} -> {cur}");
            prev = cur;
        }
    }

    #[test]
    fn farfield_clamp_mode_holds_boundary_at_reference() {
        let law = quadratic_law();
        let psi = psi_for_gamma2();
        let g = Grid::new(128, 2.0 * PI, Boundary::FarfieldClamp).unwrap();
        let spec = InitSpec {
            family: InitFamily::GaussianRhoBump { amp: 0.2, radius: 0.8, center: PI },
            u_background: 0.0,
        };
        let (mut s, _) = init_data(&spec, &g, &law).unwrap();
        for _ in 0..200 {
            let dt = stable_dt(&s, &g, &law, &psi, 0.4).unwrap();
            s = step(&s, dt, &g, &law, &psi, Reconstruction::Fromm, None).unwrap();
        }
        assert!((s.rho[0] - 1.0).abs() < 1e-6);
        assert!((s.rho[g.n - 1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_t_end_emits_initial_record_only() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let params = RunParams {
            law: &law,
            psi: &psi,
            grid: Grid::periodic(32, 2.0 * PI).unwrap(),
            t_end: 0.0,
            cfl: 0.4,
            reconstruction: Reconstruction::Fromm,
            diag_interval: 0.1,
            collect_states: false,
            quad: crate::thermo::EnergyQuadrature::default(),
        };
        let out = run(&params, &InitSpec::uniform()).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].t, 0.0);
    }

    #[test]
    fn run_emits_records_at_exact_cadence() {
        let law = mu_coupled_law();
        let psi = bench_psi();
        let params = RunParams {
            law: &law,
            psi: &psi,
            grid: Grid::periodic(64, 2.0 * PI).unwrap(),
            t_end: 0.05,
            cfl: 0.4,
            reconstruction: Reconstruction::Fromm,
            diag_interval: 0.01,
            collect_states: true,
            quad: crate::thermo::EnergyQuadrature::default(),
        };
        let spec = InitSpec {
            family: InitFamily::GaussianRhoBump { amp: 0.2, radius: 1.0, center: PI },
            u_background: 0.0,
        };
        let out = run(&params, &spec).unwrap();
        assert!(out.error.is_none());
        assert_eq!(out.records.len(), 6);
        for (k, r) in out.records.iter().enumerate() {
            assert_eq!(r.t, k as f64 * 0.01);
        }
        assert_eq!(out.states.len(), out.records.len());
    }
}
