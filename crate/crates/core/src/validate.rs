//! Self-validation suite: closed-form comparisons, brute-force equivalence,
//! conservation/symmetry checks at scale, and the second-moment bound.
//!
//! The suite exists to be run (via the CLI) against a fresh build, and to
//! fail loudly when fed a deliberately broken Hamiltonian
//! ([`MutationFixture`]), which demonstrates that the comparisons have
//! enough power to catch a wrong build.

use serde::Serialize;

use crate::blocks::{BlockSet, MutationFixture};
use crate::dynamics::{SpectrumEngine, SpectrumKind};
use crate::entanglement::verify_second_moment_bound;
use crate::error::Result;
use crate::math::log_sum_exp;
use crate::oracle::{three_spin_reduced, three_spin_standard, BruteForceState};
use crate::params::{linspace, SystemParams};
use crate::thermo::ThermoContext;
use crate::{blocks, thermo};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed deviation, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_worst(name: &str, worst: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed: worst <= tolerance,
            worst,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// Build the sector pipeline from a deliberately wrong Hamiltonian.
    pub mutation: Option<MutationFixture>,
}

const LARGE_N: u32 = 201;

fn build_blocks(n: u32, mutation: Option<MutationFixture>) -> Result<BlockSet> {
    let params = SystemParams::with_unit_coupling(n, 0.0, vec![0.0])?;
    match mutation {
        None => BlockSet::build(&params),
        Some(fixture) => BlockSet::build_with_fixture(&params, fixture),
    }
}

fn check_three_spin_closed_forms(
    blocks: &BlockSet,
    kind: SpectrumKind,
) -> Result<CheckResult> {
    let taus = linspace(0.0, 2.0 * std::f64::consts::PI / 3.0f64.sqrt(), 200);
    let mut worst = 0.0f64;
    for b in [0.1, 1.0, 3.5] {
        let ctx = ThermoContext::new(3, b)?;
        let engine = SpectrumEngine::new(blocks, &ctx, kind)?;
        for spec in engine.sweep(&taus)? {
            let (j0, j2) = match kind {
                SpectrumKind::Standard => three_spin_standard(spec.tau()),
                SpectrumKind::Reduced => three_spin_reduced(b, spec.tau()),
            };
            worst = worst
                .max((spec.intensity(0) - j0).abs())
                .max((spec.intensity(2) - j2).abs())
                .max((spec.intensity(-2) - j2).abs());
        }
    }
    let name = match kind {
        SpectrumKind::Standard => "three_spin_standard_closed_form",
        SpectrumKind::Reduced => "three_spin_reduced_closed_form",
    };
    Ok(CheckResult::from_worst(
        name,
        worst,
        1e-12,
        "200 tau points, b in {0.1, 1, 3.5}".into(),
    ))
}

fn check_three_spin_oracle_consistency() -> Result<CheckResult> {
    let state = BruteForceState::new(3, 1.0)?;
    let mut worst = 0.0f64;
    for b in [0.1, 1.0, 3.5] {
        for &tau in &linspace(0.0, 4.0, 50) {
            let (standard, reduced) = state.spectra(b, tau)?;
            let (j0, j2) = three_spin_standard(tau);
            let (r0, r2) = three_spin_reduced(b, tau);
            worst = worst
                .max((standard.intensity(0) - j0).abs())
                .max((standard.intensity(2) - j2).abs())
                .max((reduced.intensity(0) - r0).abs())
                .max((reduced.intensity(2) - r2).abs());
        }
    }
    Ok(CheckResult::from_worst(
        "three_spin_oracle_consistency",
        worst,
        1e-11,
        "brute force vs closed forms, 50 tau points".into(),
    ))
}

fn check_oracle_equivalence(mutation: Option<MutationFixture>) -> Result<CheckResult> {
    let taus = linspace(0.0, 6.0, 20);
    let mut worst = 0.0f64;
    let mut per_n = Vec::new();
    for n in 2..=6u32 {
        let blocks = build_blocks(n, mutation)?;
        let state = BruteForceState::new(n, 1.0)?;
        let mut worst_n = 0.0f64;
        for b in [0.0, 0.1, 1.0, 3.5] {
            let ctx = ThermoContext::new(n, b)?;
            let standard_engine = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Standard)?;
            let reduced_engine = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Reduced)?;
            for &tau in &taus {
                let (oracle_standard, oracle_reduced) = state.spectra(b, tau)?;
                let standard = standard_engine.spectrum_at(tau)?;
                let reduced = reduced_engine.spectrum_at(tau)?;
                for (order, j) in standard.orders() {
                    worst_n = worst_n.max((j - oracle_standard.intensity(order)).abs());
                }
                for (order, j) in reduced.orders() {
                    worst_n = worst_n.max((j - oracle_reduced.intensity(order)).abs());
                }
            }
        }
        per_n.push(format!("N={n}: {worst_n:.3e}"));
        worst = worst.max(worst_n);
    }
    Ok(CheckResult::from_worst(
        "oracle_equivalence_small_n",
        worst,
        1e-9,
        format!(
            "block pipeline vs 2^N simulator, b in {{0, 0.1, 1, 3.5}}, 20 tau points, both kinds; {}",
            per_n.join(", ")
        ),
    ))
}

fn check_multiplicity_identity() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for n in (1..=30u32).chain([LARGE_N]) {
        let params = SystemParams::with_unit_coupling(n, 0.0, vec![0.0])?;
        let terms: Vec<f64> = blocks::enumerate_blocks(&params)
            .into_iter()
            .map(|l| {
                blocks::log_multiplicity(n, l).map(|lm| lm + (l.dimension() as f64).ln())
            })
            .collect::<Result<_>>()?;
        let expected = n as f64 * 2.0f64.ln();
        worst = worst.max((log_sum_exp(&terms) - expected).abs() / expected);
    }
    Ok(CheckResult::from_worst(
        "multiplicity_dimension_identity",
        worst,
        1e-10,
        "sum_S n_N(S)(2S+1) = 2^N in log space, N in 1..=30 and 201".into(),
    ))
}

fn check_parity_split_lossless(blocks_201: &BlockSet) -> Result<CheckResult> {
    let mut intact = true;
    for block in blocks_201.blocks() {
        let h = blocks::build_block_hamiltonian(block.label, 1.0);
        let (even, odd) = blocks::parity_split(&h)?;
        if blocks::parity_join(&even, &odd) != h {
            intact = false;
        }
    }
    Ok(CheckResult {
        name: "parity_split_lossless".into(),
        passed: intact,
        worst: if intact { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail: "bit-for-bit reassembly over every sector of N=201".into(),
    })
}

fn check_eigen_invariants(blocks_201: &BlockSet) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for block in blocks_201.blocks() {
        for (eigen, half) in [
            (&block.eigen_even, &block.even_half),
            (&block.eigen_odd, &block.odd_half),
        ] {
            if eigen.dim() == 0 {
                continue;
            }
            let h_norm = half
                .off_diagonal
                .iter()
                .chain(&half.diagonal)
                .fold(0.0f64, |w, v| w.max(v.abs()));
            worst = worst
                .max(eigen.orthogonality_defect() / 1e-12)
                .max(eigen.reconstruction_defect(half) / (1e-10 * h_norm.max(1.0)))
                .max(eigen.plus_minus_pairing_defect() / 1e-10);
        }
    }
    // Normalized units: each defect is divided by its own tolerance.
    Ok(CheckResult::from_worst(
        "eigen_invariants_n201",
        worst,
        1.0,
        "orthogonality 1e-12, reconstruction 1e-10 * max(1, |H|), +/- pairing 1e-10".into(),
    ))
}

fn check_weights_finite() -> Result<CheckResult> {
    let params = SystemParams::with_unit_coupling(LARGE_N, 0.0, vec![0.0])?;
    let labels = blocks::enumerate_blocks(&params);
    let mut max_reduced = f64::NEG_INFINITY;
    let mut all_finite = true;
    for b in [0.0, 0.1, 0.5, 1.0, 3.5, 10.0] {
        let ctx = ThermoContext::new(LARGE_N, b)?;
        for &label in &labels {
            let reduced = thermo::block_log_weight(SpectrumKind::Reduced, label, &ctx)?;
            let standard = if b == 0.0 {
                thermo::block_log_weight_high_t_limit(label, &ctx)?
            } else {
                thermo::block_log_weight(SpectrumKind::Standard, label, &ctx)?
            };
            all_finite &= reduced.is_finite() && standard.is_finite();
            max_reduced = max_reduced.max(reduced);
        }
    }
    Ok(CheckResult {
        name: "block_weights_finite".into(),
        passed: all_finite && max_reduced <= 0.0,
        worst: max_reduced,
        tolerance: 0.0,
        detail: format!("N=201, b in [0, 10]; max reduced log weight {max_reduced:.3e}"),
    })
}

fn check_conservation_at_scale(blocks_201: &BlockSet) -> Result<(CheckResult, CheckResult)> {
    let taus = linspace(0.0, 6.0, 25);
    let mut worst_sum = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let mut odd_clean = true;
    let mut worst_bound_margin = f64::INFINITY;
    let mut bound_ok = true;

    for b in [0.1, 3.5] {
        let ctx = ThermoContext::new(LARGE_N, b)?;
        let engine = SpectrumEngine::new(blocks_201, &ctx, SpectrumKind::Reduced)?;
        for spec in engine.sweep(&taus)? {
            worst_sum = worst_sum.max((spec.total() - 1.0).abs());
            for (order, j) in spec.orders() {
                worst_symmetry = worst_symmetry.max((j - spec.intensity(-order)).abs());
                if order.rem_euclid(2) == 1 && j != 0.0 {
                    odd_clean = false;
                }
            }
            let report = verify_second_moment_bound(&spec)?;
            bound_ok &= report.passed;
            worst_bound_margin = worst_bound_margin.min(report.margin);
        }
    }

    let conservation = CheckResult {
        name: "conservation_and_symmetry_n201".into(),
        passed: worst_sum <= 1e-9 && worst_symmetry <= 1e-10 && odd_clean,
        worst: worst_sum.max(worst_symmetry),
        tolerance: 1e-9,
        detail: format!(
            "|sum-1| worst {worst_sum:.3e}, J_n vs J_-n worst {worst_symmetry:.3e}, odd orders exactly zero: {odd_clean}"
        ),
    };
    let bound = CheckResult {
        name: "second_moment_bound_n201".into(),
        passed: bound_ok,
        worst: -worst_bound_margin.min(0.0),
        tolerance: 0.0,
        detail: format!("smallest margin to N^2/2: {worst_bound_margin:.6}"),
    };
    Ok((conservation, bound))
}

/// Run the whole suite. With a mutation fixture installed the closed-form
/// and oracle comparisons must fail, which is itself checked by tests.
pub fn run_validation(options: ValidationOptions) -> Result<ValidationReport> {
    let blocks_3 = build_blocks(3, options.mutation)?;
    let blocks_201 = build_blocks(LARGE_N, options.mutation)?;

    let mut checks = vec![
        check_three_spin_closed_forms(&blocks_3, SpectrumKind::Standard)?,
        check_three_spin_closed_forms(&blocks_3, SpectrumKind::Reduced)?,
        check_three_spin_oracle_consistency()?,
        check_oracle_equivalence(options.mutation)?,
        check_multiplicity_identity()?,
        check_parity_split_lossless(&blocks_201)?,
        check_eigen_invariants(&blocks_201)?,
        check_weights_finite()?,
    ];
    let (conservation, bound) = check_conservation_at_scale(&blocks_201)?;
    checks.push(conservation);
    checks.push(bound);

    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { passed, checks })
}
