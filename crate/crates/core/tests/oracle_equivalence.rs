//! Sector pipeline vs the full-Hilbert-space simulator for small systems:
//! the two routes share no linear algebra, so agreement pins down the
//! Hamiltonian, the weights, and the normalization at once.

use mqnmr::blocks::BlockSet;
use mqnmr::dynamics::{SpectrumEngine, SpectrumKind};
use mqnmr::oracle::BruteForceState;
use mqnmr::params::{linspace, SystemParams};
use mqnmr::thermo::ThermoContext;

#[test]
fn block_pipeline_matches_brute_force() {
    let taus = linspace(0.0, 6.0, 20);
    for n in 2..=6u32 {
        let params = SystemParams::with_unit_coupling(n, 0.0, vec![0.0]).unwrap();
        let blocks = BlockSet::build(&params).unwrap();
        let oracle = BruteForceState::new(n, 1.0).unwrap();
        for b in [0.0, 0.1, 1.0, 3.5] {
            let ctx = ThermoContext::new(n, b).unwrap();
            let standard = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Standard).unwrap();
            let reduced = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Reduced).unwrap();
            for &tau in &taus {
                let (oracle_standard, oracle_reduced) = oracle.spectra(b, tau).unwrap();
                let s = standard.spectrum_at(tau).unwrap();
                let r = reduced.spectrum_at(tau).unwrap();
                for (order, j) in s.orders() {
                    let dev = (j - oracle_standard.intensity(order)).abs();
                    assert!(dev < 1e-9, "standard N={n} b={b} tau={tau} n={order}: {dev:e}");
                }
                for (order, j) in r.orders() {
                    let dev = (j - oracle_reduced.intensity(order)).abs();
                    assert!(dev < 1e-9, "reduced N={n} b={b} tau={tau} n={order}: {dev:e}");
                }
            }
        }
    }
}

#[test]
fn second_moment_matches_brute_force_for_five_spins() {
    let params = SystemParams::with_unit_coupling(5, 1.0, vec![0.0]).unwrap();
    let blocks = BlockSet::build(&params).unwrap();
    let ctx = ThermoContext::new(5, 1.0).unwrap();
    let engine = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Reduced).unwrap();
    let oracle = BruteForceState::new(5, 1.0).unwrap();
    for &tau in &linspace(0.0, 4.0, 10) {
        let pipeline = mqnmr::entanglement::second_moment(&engine.spectrum_at(tau).unwrap()).unwrap();
        let (_, reduced) = oracle.spectra(1.0, tau).unwrap();
        let brute = mqnmr::entanglement::second_moment(&reduced).unwrap();
        assert!(
            (pipeline - brute).abs() < 1e-10,
            "tau={tau}: {pipeline} vs {brute}"
        );
    }
}
