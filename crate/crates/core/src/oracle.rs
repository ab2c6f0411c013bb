//! Independent references used to validate the sector pipeline: closed
//! forms for the three-spin system and a brute-force simulator that works
//! in the full 2^N computational basis with no sector structure, no parity
//! split, and a dense eigensolver from a different library.
//!
//! Computational-basis convention: bit j set means spin j up, contributing
//! +1/2 to M, so the I_z eigenvalue of basis state s is popcount(s) - N/2.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::{CoherenceSpectrum, SpectrumKind};
use crate::error::{Error, Result};
use crate::math::CompensatedSum;

/// Standard three-spin intensities: J_0 = (2 cos^2(sqrt(3) D tau) + 1)/3 and
/// J_{+/-2} = sin^2(sqrt(3) D tau)/3, with `d_tau` the dimensionless product.
pub fn three_spin_standard(d_tau: f64) -> (f64, f64) {
    let c = (3.0f64.sqrt() * d_tau).cos();
    let s = (3.0f64.sqrt() * d_tau).sin();
    ((2.0 * c * c + 1.0) / 3.0, s * s / 3.0)
}

/// Reduced three-spin intensities: J_0 = 1 - (1/2) tanh^2(b) sin^2(...) and
/// J_{+/-2} = (1/4) tanh^2(b) sin^2(...).
pub fn three_spin_reduced(b: f64, d_tau: f64) -> (f64, f64) {
    let s2 = b.tanh().powi(2) * (3.0f64.sqrt() * d_tau).sin().powi(2);
    (1.0 - 0.5 * s2, 0.25 * s2)
}

/// Construction cap: the state stores dense 2^N matrices.
pub const BRUTE_FORCE_STATE_CAP: u32 = 10;
/// Evaluation cap for [`brute_force_spectra`].
pub const BRUTE_FORCE_SPECTRA_CAP: u32 = 8;

/// Full-Hilbert-space model: dense Hamiltonian, I_z diagonal, and the
/// eigendecomposition used to propagate.
pub struct BruteForceState {
    n_spins: u32,
    hamiltonian: DMatrix<f64>,
    iz_diagonal: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl BruteForceState {
    pub fn new(n_spins: u32, coupling: f64) -> Result<Self> {
        if n_spins < 1 || n_spins > BRUTE_FORCE_STATE_CAP {
            return Err(Error::OracleTooLarge(n_spins, BRUTE_FORCE_STATE_CAP));
        }
        let n = n_spins as usize;
        let dim = 1usize << n;

        // H = -(D/4) [(I+)^2 + (I-)^2]: every unordered pair of down spins
        // couples to the doubly-raised state with amplitude -D/2 (and the
        // transpose entry for the lowering part).
        let mut hamiltonian = DMatrix::<f64>::zeros(dim, dim);
        for s in 0..dim {
            for j in 0..n {
                if s & (1 << j) != 0 {
                    continue;
                }
                for k in (j + 1)..n {
                    if s & (1 << k) != 0 {
                        continue;
                    }
                    let t = s | (1 << j) | (1 << k);
                    hamiltonian[(t, s)] = -coupling / 2.0;
                    hamiltonian[(s, t)] = -coupling / 2.0;
                }
            }
        }
        let iz_diagonal: Vec<f64> = (0..dim)
            .map(|s| s.count_ones() as f64 - n as f64 / 2.0)
            .collect();

        let eigen = SymmetricEigen::new(hamiltonian.clone());
        Ok(Self {
            n_spins,
            hamiltonian,
            iz_diagonal,
            eigenvalues: eigen.eigenvalues.iter().copied().collect(),
            eigenvectors: eigen.eigenvectors,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn iz_diagonal(&self) -> &[f64] {
        &self.iz_diagonal
    }

    /// max |[H, I^2]|, with I^2 = I_z^2 + (I+ I- + I- I+)/2 built from the
    /// collective ladder operators.
    pub fn total_spin_commutator_defect(&self) -> f64 {
        let n = self.n_spins as usize;
        let dim = 1usize << n;
        let mut raise = DMatrix::<f64>::zeros(dim, dim);
        for s in 0..dim {
            for j in 0..n {
                if s & (1 << j) == 0 {
                    raise[(s | (1 << j), s)] = 1.0;
                }
            }
        }
        let lower = raise.transpose();
        let mut i_sq = (&raise * &lower + &lower * &raise) * 0.5;
        for s in 0..dim {
            i_sq[(s, s)] += self.iz_diagonal[s] * self.iz_diagonal[s];
        }
        let commutator = &self.hamiltonian * &i_sq - i_sq * &self.hamiltonian;
        commutator.iter().fold(0.0f64, |w, v| w.max(v.abs()))
    }

    /// Every nonzero Hamiltonian entry must connect states whose M values
    /// differ by an even number (here: exactly 2).
    pub fn parity_structure_ok(&self) -> bool {
        let dim = 1usize << self.n_spins;
        for s in 0..dim {
            for t in 0..dim {
                if self.hamiltonian[(s, t)] != 0.0 {
                    let dm = (self.iz_diagonal[s] - self.iz_diagonal[t]).round() as i64;
                    if dm.rem_euclid(2) != 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn propagator(&self, tau: f64) -> DMatrix<Complex64> {
        let dim = self.eigenvalues.len();
        let v = self.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let mut phases = DMatrix::<Complex64>::zeros(dim, dim);
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            phases[(i, i)] = Complex64::from_polar(1.0, -lambda * tau);
        }
        &v * phases * v.transpose()
    }

    /// (standard, reduced) spectra at one (b, tau) point, with every trace
    /// and normalization computed numerically.
    pub fn spectra(&self, b: f64, tau: f64) -> Result<(CoherenceSpectrum, CoherenceSpectrum)> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "b must be nonnegative and finite, got {b}"
            )));
        }
        let dim = 1usize << self.n_spins;

        let z: f64 = self.iz_diagonal.iter().map(|&m| (b * m).exp()).sum();
        let tr_eq_iz: f64 = self
            .iz_diagonal
            .iter()
            .map(|&m| m * (b * m).exp())
            .sum::<f64>()
            / z;
        let tr_eq_sq: f64 = self
            .iz_diagonal
            .iter()
            .map(|&m| (2.0 * b * m).exp())
            .sum::<f64>()
            / (z * z);
        let tr_iz_sq: f64 = self.iz_diagonal.iter().map(|&m| m * m).sum();

        let u = self.propagator(tau);
        let u_dag = u.adjoint();
        let evolve_diag = |diag: &dyn Fn(usize) -> f64| -> DMatrix<Complex64> {
            let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
            for s in 0..dim {
                rho[(s, s)] = Complex64::new(diag(s), 0.0);
            }
            &u * rho * &u_dag
        };

        let rho_ht = evolve_diag(&|s| self.iz_diagonal[s]);
        let rho_lt = evolve_diag(&|s| (b * self.iz_diagonal[s]).exp() / z);

        let nn = self.n_spins as i64;
        let bins = |a: &DMatrix<Complex64>, bm: &DMatrix<Complex64>| -> Vec<f64> {
            let mut acc = vec![CompensatedSum::new(); 2 * self.n_spins as usize + 1];
            for s in 0..dim {
                for t in 0..dim {
                    let dm = (self.iz_diagonal[s] - self.iz_diagonal[t]).round() as i64;
                    acc[(dm + nn) as usize].add((a[(s, t)] * bm[(t, s)]).re);
                }
            }
            acc.into_iter().map(|c| c.value()).collect()
        };

        // At b = 0 the standard normalization Tr{rho_eq I_z} vanishes; the
        // limit replaces rho_eq by its high-temperature I_z part.
        let standard = if b == 0.0 {
            bins(&rho_ht, &rho_ht)
                .into_iter()
                .map(|v| v / tr_iz_sq)
                .collect()
        } else {
            bins(&rho_lt, &rho_ht)
                .into_iter()
                .map(|v| v / tr_eq_iz)
                .collect::<Vec<_>>()
        };
        let reduced: Vec<f64> = bins(&rho_lt, &rho_lt)
            .into_iter()
            .map(|v| v / tr_eq_sq)
            .collect();

        Ok((
            CoherenceSpectrum::from_intensities(
                self.n_spins,
                SpectrumKind::Standard,
                standard,
                tau,
                b,
            )?,
            CoherenceSpectrum::from_intensities(
                self.n_spins,
                SpectrumKind::Reduced,
                reduced,
                tau,
                b,
            )?,
        ))
    }
}

/// One-shot brute-force evaluation with the hard cost cap.
pub fn brute_force_spectra(
    n_spins: u32,
    b: f64,
    tau: f64,
) -> Result<(CoherenceSpectrum, CoherenceSpectrum)> {
    if n_spins > BRUTE_FORCE_SPECTRA_CAP {
        return Err(Error::OracleTooLarge(n_spins, BRUTE_FORCE_SPECTRA_CAP));
    }
    BruteForceState::new(n_spins, 1.0)?.spectra(b, tau)
}
