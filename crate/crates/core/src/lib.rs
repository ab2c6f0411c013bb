//! Multiple-quantum coherence spectra for a cluster of N equivalent
//! spins-1/2 at arbitrary temperature, and entanglement-depth certification
//! from the second moment of the reduced spectrum.
//!
//! The computation never touches the 2^N Hilbert space: the coherence
//! Hamiltonian commutes with the total spin, so everything decomposes into
//! total-spin sectors of dimension at most N+1, each of which further splits
//! into two tridiagonal parity halves. Statistical multiplicities and
//! equilibrium factors are carried in log space, which keeps hundreds of
//! spins at low temperature inside f64 range.
//!
//! Typical use:
//!
//! ```
//! use mqnmr::{
//!     blocks::BlockSet, dynamics::{SpectrumEngine, SpectrumKind},
//!     entanglement::certificate_for, params::SystemParams,
//!     thermo::ThermoContext,
//! };
//!
//! let params = SystemParams::with_unit_coupling(21, 1.0, vec![0.0, 0.5, 1.0]).unwrap();
//! let blocks = BlockSet::build(&params).unwrap();
//! let ctx = ThermoContext::new(21, 1.0).unwrap();
//! let engine = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Reduced).unwrap();
//! let spectra = engine.sweep(params.tau_grid()).unwrap();
//! let certificate = certificate_for(&spectra[2]).unwrap();
//! assert!(certificate.fq_lower_bound >= 0.0);
//! ```

pub mod blocks;
pub mod dynamics;
pub mod eigen;
pub mod entanglement;
mod error;
pub mod math;
pub mod oracle;
pub mod params;
pub mod thermo;
pub mod validate;

pub use error::{Error, Result};
