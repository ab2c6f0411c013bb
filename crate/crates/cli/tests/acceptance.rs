//! Acceptance suite. Each test prints one `acceptance criterion N: PASS/FAIL`
//! line (visible with `cargo test --test acceptance -- --nocapture`) and
//! asserts the criterion at its stated tolerance.
//!
//! Criteria 3-5 share one four-temperature, 600-point sweep of the 201-spin
//! system, computed once.

use std::process::Command;
use std::time::{Duration, Instant};

use once_cell::sync::Lazy;
use tempfile::tempdir;

use mqnmr::blocks::BlockSet;
use mqnmr::dynamics::{CoherenceSpectrum, SpectrumEngine, SpectrumKind};
use mqnmr::entanglement::{certificate_for, verify_second_moment_bound};
use mqnmr::oracle::{three_spin_reduced, three_spin_standard, BruteForceState};
use mqnmr::params::{linspace, SystemParams};
use mqnmr::thermo::{b_from_temperature, ThermoContext};

const LARGE_N: u32 = 201;
const SWEEP_B: [f64; 4] = [0.1, 0.5, 1.0, 3.5];
const SWEEP_POINTS: usize = 600;

struct HeavySweep {
    per_b: Vec<(f64, Vec<CoherenceSpectrum>)>,
    elapsed: Duration,
}

static SWEEP: Lazy<HeavySweep> = Lazy::new(|| {
    let start = Instant::now();
    let params = SystemParams::with_unit_coupling(LARGE_N, 0.0, vec![0.0]).unwrap();
    let blocks = BlockSet::build(&params).unwrap();
    let taus = linspace(0.0, 6.0, SWEEP_POINTS);
    let per_b = SWEEP_B
        .iter()
        .map(|&b| {
            let ctx = ThermoContext::new(LARGE_N, b).unwrap();
            let engine = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Reduced).unwrap();
            (b, engine.sweep(&taus).unwrap())
        })
        .collect();
    HeavySweep {
        per_b,
        elapsed: start.elapsed(),
    }
});

fn report(criterion: &str, failures: &[String], detail: String) {
    if failures.is_empty() {
        println!("acceptance criterion {criterion}: PASS — {detail}");
    } else {
        println!(
            "acceptance criterion {criterion}: FAIL — {}",
            failures.join("; ")
        );
    }
    assert!(failures.is_empty(), "criterion {criterion}: {failures:?}");
}

#[test]
fn criterion_1_three_spin_closed_forms() {
    let start = Instant::now();
    let params = SystemParams::with_unit_coupling(3, 0.0, vec![0.0]).unwrap();
    let blocks = BlockSet::build(&params).unwrap();
    let taus = linspace(0.0, 2.0 * std::f64::consts::PI / 3.0f64.sqrt(), 200);

    let mut worst = 0.0f64;
    for b in [0.1, 1.0, 3.5] {
        let ctx = ThermoContext::new(3, b).unwrap();
        let standard = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Standard).unwrap();
        let reduced = SpectrumEngine::new(&blocks, &ctx, SpectrumKind::Reduced).unwrap();
        for &tau in &taus {
            let s = standard.spectrum_at(tau).unwrap();
            let (j0, j2) = three_spin_standard(tau);
            worst = worst
                .max((s.intensity(0) - j0).abs())
                .max((s.intensity(2) - j2).abs())
                .max((s.intensity(-2) - j2).abs());

            let r = reduced.spectrum_at(tau).unwrap();
            let (r0, r2) = three_spin_reduced(b, tau);
            worst = worst
                .max((r.intensity(0) - r0).abs())
                .max((r.intensity(2) - r2).abs())
                .max((r.intensity(-2) - r2).abs());
        }
    }
    let elapsed = start.elapsed();

    let mut failures = Vec::new();
    if worst >= 1e-12 {
        failures.push(format!("max abs error {worst:e} >= 1e-12"));
    }
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:?} >= 1 s"));
    }
    report(
        "1",
        &failures,
        format!("closed forms to {worst:.2e} over 200 tau points, b in {{0.1, 1, 3.5}}, in {elapsed:?}"),
    );
}

#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let taus = linspace(0.0, 6.0, 20);
    let mut worst = 0.0f64;
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
                for (order, j) in standard.spectrum_at(tau).unwrap().orders() {
                    worst = worst.max((j - oracle_standard.intensity(order)).abs());
                }
                for (order, j) in reduced.spectrum_at(tau).unwrap().orders() {
                    worst = worst.max((j - oracle_reduced.intensity(order)).abs());
                }
            }
        }
    }
    let elapsed = start.elapsed();

    let mut failures = Vec::new();
    if worst >= 1e-9 {
        failures.push(format!("max abs deviation {worst:e} >= 1e-9"));
    }
    if elapsed >= Duration::from_secs(30) {
        failures.push(format!("runtime {elapsed:?} >= 30 s"));
    }
    report(
        "2",
        &failures,
        format!("block pipeline vs 2^N oracle, N in 2..=6, both kinds, worst {worst:.2e}, in {elapsed:?}"),
    );
}

#[test]
fn criterion_3_conservation_and_symmetry_at_scale() {
    let sweep = &*SWEEP;
    let mut worst_sum = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let mut failures = Vec::new();

    for (b, spectra) in &sweep.per_b {
        for spec in spectra {
            let sum_dev = (spec.total() - 1.0).abs();
            worst_sum = worst_sum.max(sum_dev);
            if sum_dev >= 1e-9 {
                failures.push(format!("|sum-1| = {sum_dev:e} at b={b} tau={}", spec.tau()));
                break;
            }
            for (order, j) in spec.orders() {
                if !j.is_finite() {
                    failures.push(format!("non-finite J_{order} at b={b} tau={}", spec.tau()));
                }
                let symmetry = (j - spec.intensity(-order)).abs();
                worst_symmetry = worst_symmetry.max(symmetry);
                if symmetry >= 1e-10 {
                    failures.push(format!("J symmetry {symmetry:e} at b={b} order={order}"));
                    break;
                }
                if order.rem_euclid(2) == 1 && j != 0.0 {
                    failures.push(format!("odd order {order} not exactly zero at b={b}"));
                    break;
                }
            }
        }
    }
    report(
        "3",
        &failures,
        format!(
            "N=201, 4 temperatures x {SWEEP_POINTS} points: |sum-1| worst {worst_sum:.2e}, symmetry worst {worst_symmetry:.2e}, odd orders exactly zero, all finite"
        ),
    );
}

#[test]
fn criterion_4_second_moment_bound() {
    let sweep = &*SWEEP;
    let n = LARGE_N as f64;
    let mut smallest_margin = f64::INFINITY;
    let mut failures = Vec::new();
    for (b, spectra) in &sweep.per_b {
        for spec in spectra {
            let bound = verify_second_moment_bound(spec).unwrap();
            smallest_margin = smallest_margin.min(bound.margin);
            if bound.second_moment > n * n / 2.0 + 1e-6 {
                failures.push(format!(
                    "M2 = {} exceeds N^2/2 at b={b} tau={}",
                    bound.second_moment,
                    spec.tau()
                ));
            }
            if bound.fq_lower_bound > n * n + 2e-6 {
                failures.push(format!(
                    "F_Q = {} exceeds N^2 at b={b} tau={}",
                    bound.fq_lower_bound,
                    spec.tau()
                ));
            }
        }
    }
    report(
        "4",
        &failures,
        format!("M2 <= N^2/2 and F_Q <= N^2 over the sweep; smallest margin to N^2/2 is {smallest_margin:.1}"),
    );
}

#[test]
fn criterion_5_figure_level_reproduction() {
    let sweep = &*SWEEP;
    let mut max_cluster_by_b = Vec::new();
    let mut max_k_by_b = Vec::new();
    for (b, spectra) in &sweep.per_b {
        let mut max_k = 0u32;
        let mut max_cluster = 1u32;
        for spec in spectra {
            let cert = certificate_for(spec).unwrap();
            max_k = max_k.max(cert.certified_k);
            max_cluster = max_cluster.max(cert.certified_cluster);
        }
        max_cluster_by_b.push((*b, max_cluster));
        max_k_by_b.push((*b, max_k));
    }

    let mut failures = Vec::new();
    let cluster = |target_b: f64| {
        max_cluster_by_b
            .iter()
            .find(|(b, _)| *b == target_b)
            .unwrap()
            .1
    };
    let k_at = |target_b: f64| max_k_by_b.iter().find(|(b, _)| *b == target_b).unwrap().1;

    if cluster(0.1) != 2 {
        failures.push(format!("b=0.1: max cluster {} != 2", cluster(0.1)));
    }
    let k05 = k_at(0.5);
    if !(25..=29).contains(&k05) {
        failures.push(format!("b=0.5: max k {k05} not within 27 +/- 2"));
    }
    let c1 = cluster(1.0);
    if !(89..=95).contains(&c1) {
        failures.push(format!("b=1: max cluster {c1} not within 92 +/- 3"));
    }
    let c35 = cluster(3.5);
    if !(176..=182).contains(&c35) {
        failures.push(format!("b=3.5: max cluster {c35} not within 179 +/- 3"));
    }
    if !max_cluster_by_b.windows(2).all(|w| w[0].1 <= w[1].1) {
        failures.push(format!("clusters not non-decreasing in b: {max_cluster_by_b:?}"));
    }
    if sweep.elapsed > Duration::from_secs(30 * 60) {
        failures.push(format!("sweep took {:?} > 30 min", sweep.elapsed));
    }

    report(
        "5",
        &failures,
        format!(
            "max clusters {:?} (k at b=0.5: {k05}); four-b sweep of {SWEEP_POINTS} points in {:?}",
            max_cluster_by_b, sweep.elapsed
        ),
    );
}

#[test]
fn criterion_6_temperature_conversion() {
    let larmor = 2.0 * std::f64::consts::PI * 500e6;
    let b1 = b_from_temperature(larmor, 0.24).unwrap();
    let b2 = b_from_temperature(larmor, 6.856e-3).unwrap();

    let mut failures = Vec::new();
    if (b1 - 0.100).abs() > 0.001 {
        failures.push(format!("T=0.24 K -> b={b1}, expected 0.100 +/- 0.001"));
    }
    if (b2 - 3.500).abs() > 0.002 {
        failures.push(format!("T=6.856 mK -> b={b2}, expected 3.500 +/- 0.002"));
    }
    report(
        "6",
        &failures,
        format!("omega_0 = 2 pi 500 MHz: T=0.24 K -> b={b1:.6}, T=6.856 mK -> b={b2:.6}"),
    );
}

#[test]
fn criterion_7_thread_count_determinism() {
    let dir = tempdir().unwrap();
    let run = |threads: &str, name: &str| -> Vec<u8> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_mqnmr"))
            .args([
                "sweep", "--spins", "201", "--b", "1", "--dtau", "0:3:25", "--threads", threads,
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let single = run("1", "single.csv");
    let eight = run("8", "eight.csv");

    let mut failures = Vec::new();
    if single != eight {
        failures.push("threads=1 and threads=8 produced different bytes".to_string());
    }
    report(
        "7",
        &failures,
        format!("N=201 sweep, threads 1 vs 8: byte-identical CSV ({} bytes)", single.len()),
    );
}

#[test]
fn criterion_8_validate_exit_codes() {
    let clean = Command::new(env!("CARGO_BIN_EXE_mqnmr"))
        .arg("validate")
        .output()
        .unwrap();
    let mutated = Command::new(env!("CARGO_BIN_EXE_mqnmr"))
        .args(["validate", "--inject-sign-error"])
        .output()
        .unwrap();

    let mut failures = Vec::new();
    if clean.status.code() != Some(0) {
        failures.push(format!(
            "clean validate exited {:?}: {}",
            clean.status.code(),
            String::from_utf8_lossy(&clean.stdout)
        ));
    }
    if mutated.status.code() != Some(1) {
        failures.push(format!(
            "mutated validate exited {:?}, expected 1",
            mutated.status.code()
        ));
    }
    report(
        "8",
        &failures,
        "validate exits 0 on a clean build and 1 with the sign-error fixture".to_string(),
    );
}
