//! Temperature-dependent scalars and the log-space weights that combine
//! per-sector traces into observable intensities.
//!
//! Per-sector density matrices are stored scale-normalized: the
//! low-temperature diagonal is e^{b(M-S)} (in (0, 1]) instead of e^{bM}/Z,
//! which would overflow for hundreds of spins at low temperature. The
//! factors pulled out of the matrices are folded into the per-sector log
//! weight together with the multiplicity and the observable normalization.
//! In the reduced case the partition function cancels exactly against the
//! closed form of Tr{rho_eq^2}, and the cancelled expression is what gets
//! evaluated -- never a difference of two large logs.

use crate::blocks::{log_multiplicity, BlockLabel};
use crate::dynamics::SpectrumKind;
use crate::error::{Error, Result};
use crate::math::ln_two_cosh;

/// CODATA 2018 reduced Planck constant, J s.
pub const REDUCED_PLANCK_J_S: f64 = 1.054_571_817e-34;
/// SI-exact Boltzmann constant, J/K.
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// b = hbar * omega_0 / (k_B * T).
pub fn b_from_temperature(larmor_rad_s: f64, temperature_k: f64) -> Result<f64> {
    if !(larmor_rad_s > 0.0) || !larmor_rad_s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "larmor frequency must be positive, got {larmor_rad_s}"
        )));
    }
    if !(temperature_k > 0.0) || !temperature_k.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "temperature must be positive, got {temperature_k}"
        )));
    }
    Ok(REDUCED_PLANCK_J_S * larmor_rad_s / (BOLTZMANN_J_PER_K * temperature_k))
}

/// Closed-form equilibrium scalars for N spins at inverse temperature b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoContext {
    n_spins: u32,
    b: f64,
    log_partition: f64,
    tr_rho_iz: f64,
    log_tr_rho_sq: f64,
}

impl ThermoContext {
    pub fn new(n_spins: u32, b: f64) -> Result<Self> {
        if n_spins < 1 {
            return Err(Error::InvalidParameter("n_spins must be >= 1".into()));
        }
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b must be nonnegative and finite, got {b}"
            )));
        }
        let n = n_spins as f64;
        let log_partition = n * ln_two_cosh(b / 2.0);
        Ok(Self {
            n_spins,
            b,
            log_partition,
            // Tr{rho_eq I_z} = (N/2) tanh(b/2)
            tr_rho_iz: 0.5 * n * (b / 2.0).tanh(),
            // Tr{rho_eq^2} = (2 cosh b)^N / Z^2
            log_tr_rho_sq: n * ln_two_cosh(b) - 2.0 * log_partition,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// ln Z = N ln(2 cosh(b/2)).
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn tr_rho_iz(&self) -> f64 {
        self.tr_rho_iz
    }

    pub fn log_tr_rho_sq(&self) -> f64 {
        self.log_tr_rho_sq
    }

    /// ln Tr{I_z^2} = N ln 2 + ln(N/4); normalizer of the b -> 0 limit.
    pub fn log_tr_iz_sq(&self) -> f64 {
        let n = self.n_spins as f64;
        n * 2.0f64.ln() + (n / 4.0).ln()
    }
}

/// Logarithm of the factor that multiplies a scale-normalized per-sector
/// trace so that summing exp(weight) * trace over sectors yields the
/// observable intensity.
///
/// Reduced:  ln n_N(S) + 2bS - N ln(2 cosh b)        (Z cancelled exactly)
/// Standard: ln n_N(S) + bS - ln Z - ln Tr{rho_eq I_z}
///
/// At b = 0 the standard normalization is 0/0; callers must switch to the
/// high-temperature limit ([`block_log_weight_high_t_limit`]), which this
/// signals with [`Error::HighTemperatureLimit`].
pub fn block_log_weight(kind: SpectrumKind, label: BlockLabel, ctx: &ThermoContext) -> Result<f64> {
    let log_mult = log_multiplicity(ctx.n_spins, label)?;
    let s = label.total_spin();
    let n = ctx.n_spins as f64;
    match kind {
        SpectrumKind::Reduced => Ok(log_mult + 2.0 * ctx.b * s - n * ln_two_cosh(ctx.b)),
        SpectrumKind::Standard => {
            if ctx.b == 0.0 {
                return Err(Error::HighTemperatureLimit);
            }
            Ok(log_mult + ctx.b * s - ctx.log_partition - ctx.tr_rho_iz.ln())
        }
    }
}

/// Weight for standard intensities in the b -> 0 limit, where rho_eq is
/// replaced by its high-temperature linearization and both density matrices
/// are the I_z block: ln n_N(S) - ln Tr{I_z^2}.
pub fn block_log_weight_high_t_limit(label: BlockLabel, ctx: &ThermoContext) -> Result<f64> {
    let log_mult = log_multiplicity(ctx.n_spins, label)?;
    Ok(log_mult - ctx.log_tr_iz_sq())
}
