//! Second moment of the reduced spectrum, the quantum Fisher information
//! lower bound F_Q = 2 M_2, and entanglement-depth certification.

use serde::Serialize;

use crate::dynamics::{CoherenceSpectrum, SpectrumKind};
use crate::error::{Error, Result};
use crate::math::CompensatedSum;

/// Absolute slack on the M_2 <= N^2/2 bound, absorbing rounding across a
/// hundred-odd sectors. F_Q inherits twice the slack.
pub const SECOND_MOMENT_BOUND_TOLERANCE: f64 = 1e-6;

/// Certification outcome at one (b, tau) point. `fisher_lower_bound` is the
/// bound 2 M_2, never the Fisher information itself. `certified_k = 0` means
/// nothing is certified and the cluster size defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementCertificate {
    pub tau: f64,
    pub b: f64,
    pub second_moment: f64,
    pub fq_lower_bound: f64,
    pub certified_k: u32,
    pub certified_cluster: u32,
}

/// M_2 = sum_n n^2 J_{LT,n}. Defined for reduced spectra only.
pub fn second_moment(spectrum: &CoherenceSpectrum) -> Result<f64> {
    if spectrum.kind() != SpectrumKind::Reduced {
        return Err(Error::KindMismatch {
            expected: SpectrumKind::Reduced,
            got: spectrum.kind(),
        });
    }
    let mut acc = CompensatedSum::new();
    for (order, j) in spectrum.orders() {
        acc.add((order * order) as f64 * j);
    }
    Ok(acc.value())
}

/// Threshold m k^2 + (N - m k)^2 with m = floor(N/k). Exceeding it (strictly)
/// certifies a (k+1)-particle entangled state.
pub fn entanglement_threshold(n_spins: u32, k: u32) -> Result<f64> {
    if k < 1 || k > n_spins.saturating_sub(1) {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 1 <= k <= N-1, got k={k} for N={n_spins}"
        )));
    }
    let m = (n_spins / k) as u64;
    let k = k as u64;
    let n = n_spins as u64;
    Ok((m * k * k + (n - m * k) * (n - m * k)) as f64)
}

/// Largest k in [1, N-1] whose threshold is strictly exceeded, scanning k
/// downward (the threshold is only piecewise monotone in k, so the scan
/// order is part of the contract). Returns 0 when nothing is certified.
pub fn certify(fq_lower_bound: f64, n_spins: u32) -> u32 {
    if n_spins < 2 {
        return 0;
    }
    for k in (1..=n_spins - 1).rev() {
        let threshold = entanglement_threshold(n_spins, k)
            .expect("k is in range by construction");
        if fq_lower_bound > threshold {
            return k;
        }
    }
    0
}

/// Full certificate for one reduced spectrum.
pub fn certificate_for(spectrum: &CoherenceSpectrum) -> Result<EntanglementCertificate> {
    let m2 = second_moment(spectrum)?;
    let fq = 2.0 * m2;
    let k = certify(fq, spectrum.n_spins());
    Ok(EntanglementCertificate {
        tau: spectrum.tau(),
        b: spectrum.b(),
        second_moment: m2,
        fq_lower_bound: fq,
        certified_k: k,
        certified_cluster: if k >= 1 { k + 1 } else { 1 },
    })
}

/// Outcome of checking M_2 <= N^2/2 (and F_Q <= N^2) on one spectrum.
/// A violation is reported, never clipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMomentBoundReport {
    pub second_moment: f64,
    pub limit: f64,
    /// limit - M_2; negative on violation.
    pub margin: f64,
    pub fq_lower_bound: f64,
    pub fq_limit: f64,
    pub fq_margin: f64,
    pub passed: bool,
}

pub fn verify_second_moment_bound(spectrum: &CoherenceSpectrum) -> Result<SecondMomentBoundReport> {
    let m2 = second_moment(spectrum)?;
    let n = spectrum.n_spins() as f64;
    let limit = n * n / 2.0;
    let fq = 2.0 * m2;
    let fq_limit = n * n;
    let passed = m2 <= limit + SECOND_MOMENT_BOUND_TOLERANCE
        && fq <= fq_limit + 2.0 * SECOND_MOMENT_BOUND_TOLERANCE;
    Ok(SecondMomentBoundReport {
        second_moment: m2,
        limit,
        margin: limit - m2,
        fq_lower_bound: fq,
        fq_limit,
        fq_margin: fq_limit - fq,
        passed,
    })
}
