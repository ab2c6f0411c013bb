//! System definition shared by every pipeline stage.

use crate::error::{Error, Result};

/// A cluster of `n_spins` equivalent spins-1/2 with a single pairwise
/// coupling constant `coupling` (D), dimensionless inverse temperature
/// `b = hbar * omega_0 / (k_B * T)` and a grid of dimensionless times D*tau.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    n_spins: u32,
    coupling: f64,
    b: f64,
    tau_grid: Vec<f64>,
}

impl SystemParams {
    pub fn new(n_spins: u32, coupling: f64, b: f64, tau_grid: Vec<f64>) -> Result<Self> {
        if n_spins < 1 {
            return Err(Error::InvalidParameter("n_spins must be >= 1".into()));
        }
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "coupling must be a positive finite number, got {coupling}"
            )));
        }
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b must be a nonnegative finite number, got {b}"
            )));
        }
        if tau_grid.is_empty() {
            return Err(Error::InvalidParameter("tau_grid must not be empty".into()));
        }
        if !tau_grid.iter().all(|t| t.is_finite() && *t >= 0.0) {
            return Err(Error::InvalidParameter(
                "tau_grid entries must be finite and nonnegative".into(),
            ));
        }
        if tau_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "tau_grid must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            n_spins,
            coupling,
            b,
            tau_grid,
        })
    }

    /// D = 1, so times are reported directly as the dimensionless product D*tau.
    pub fn with_unit_coupling(n_spins: u32, b: f64, tau_grid: Vec<f64>) -> Result<Self> {
        Self::new(n_spins, 1.0, b, tau_grid)
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn tau_grid(&self) -> &[f64] {
        &self.tau_grid
    }
}

/// Evenly spaced grid with `steps` points covering [start, stop].
pub fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    let h = (stop - start) / (steps - 1) as f64;
    (0..steps).map(|i| start + h * i as f64).collect()
}
