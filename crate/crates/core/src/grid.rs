//! Cell-centered 1D mesh and conserved-field state.

use crate::error::{Error, Result};

/// Treatment of the domain ends. The entropy budgets and conservation
/// statements hold discretely on the periodic mesh; the far-field clamp pins
/// ghost cells to the reference state for open-domain experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    FarfieldClamp,
}

#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
    pub dx: f64,
    pub boundary: Boundary,
}

impl Grid {
    pub fn new(n: usize, length: f64, boundary: Boundary) -> Result<Self> {
        if n < 8 {
            return Err(Error::InvalidParameter(format!("grid needs at least 8 cells, got {n}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        Ok(Grid { n, length, dx: length / n as f64, boundary })
    }

    pub fn periodic(n: usize, length: f64) -> Result<Self> {
        Grid::new(n, length, Boundary::Periodic)
    }

    /// Center coordinate of cell `i`.
    #[inline]
    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// Periodic wrap of a possibly out-of-range index.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        let n = self.n as isize;
        (((i % n) + n) % n) as usize
    }

    /// Shortest periodic distance between two coordinates.
    pub fn periodic_distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(self.length);
        d.min(self.length - d)
    }
}

/// Conserved fields on the mesh: density, momentum, species density.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub rho: Vec<f64>,
    pub mom: Vec<f64>,
    pub spc: Vec<f64>,
}

impl State {
    pub fn uniform(grid: &Grid, rho: f64, u: f64, mu: f64) -> State {
        State {
            t: 0.0,
            rho: vec![rho; grid.n],
            mom: vec![rho * u; grid.n],
            spc: vec![rho * mu; grid.n],
        }
    }

    /// Build a state by sampling `(rho, u, mu)` profiles at cell centers.
    pub fn from_profiles<F>(grid: &Grid, f: F) -> State
    where
        F: Fn(f64) -> (f64, f64, f64),
    {
        let mut s = State {
            t: 0.0,
            rho: Vec::with_capacity(grid.n),
            mom: Vec::with_capacity(grid.n),
            spc: Vec::with_capacity(grid.n),
        };
        for i in 0..grid.n {
            let (rho, u, mu) = f(grid.x_center(i));
            s.rho.push(rho);
            s.mom.push(rho * u);
            s.spc.push(rho * mu);
        }
        s
    }

    #[inline]
    pub fn velocity(&self, i: usize) -> f64 {
        self.mom[i] / self.rho[i]
    }

    #[inline]
    pub fn mass_fraction(&self, i: usize) -> f64 {
        self.spc[i] / self.rho[i]
    }

    /// Reject states with nonpositive density (vacuum) anywhere.
    pub fn check_positive(&self) -> Result<()> {
        for (i, &r) in self.rho.iter().enumerate() {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::VacuumInput { rho: r, cell: Some(i) });
            }
        }
        Ok(())
    }

    /// Divergence detection for the integrator: NaN/Inf in any field or
    /// density at or below the floor.
    pub fn check_diverged(&self, floor: f64) -> Result<()> {
        for i in 0..self.rho.len() {
            if !self.rho[i].is_finite() || self.rho[i] <= floor {
                return Err(Error::SimulationDiverged { t: self.t, cell: i, field: "rho" });
            }
            if !self.mom[i].is_finite() {
                return Err(Error::SimulationDiverged { t: self.t, cell: i, field: "momentum" });
            }
            if !self.spc[i].is_finite() {
                return Err(Error::SimulationDiverged { t: self.t, cell: i, field: "species" });
            }
        }
        Ok(())
    }

    /// Periodic rotation by `k` cells (used by the translation-equivariance
    /// tests).
    pub fn rotated(&self, k: usize) -> State {
        let n = self.rho.len();
        let rot = |v: &[f64]| -> Vec<f64> { (0..n).map(|i| v[(i + n - k % n) % n]).collect() };
        State { t: self.t, rho: rot(&self.rho), mom: rot(&self.mom), spc: rot(&self.spc) }
    }
}
