//! Time evolution of the per-sector density matrices, coherence-order
//! projection, and spectrum assembly.
//!
//! Both initial matrices are diagonal in the M basis, so each sector is
//! evolved as `rho(tau) = U P(tau) U^T` with `C = U^T rho(0) U` precomputed
//! once and `P(tau) = C o exp(-i (l_a - l_b) tau)` a Hadamard product that
//! costs O(d^2) per time point. The phase factor splits into rank-one
//! cos/sin vectors, so the whole update runs on real matrix products.
//! Evolution never mixes the two parity sublattices: cross-parity entries
//! of every density matrix stay exactly zero, which is why odd coherence
//! orders vanish identically.

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{BlockLabel, BlockSet, SpinBlock};
use crate::error::{Error, Result};
use crate::math::CompensatedSum;
use crate::thermo::{block_log_weight, block_log_weight_high_t_limit, ThermoContext};

/// Which observable a spectrum represents: standard intensities pair the
/// low-temperature state with the evolved I_z, reduced intensities pair the
/// low-temperature state with itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Standard,
    Reduced,
}

/// Which initial state a density block was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    /// Scale-normalized equilibrium state: diagonal e^{b(M-S)}.
    LowTemperature,
    /// The I_z block: diagonal M.
    HighTemperature,
}

/// One sector of a density matrix, stored scale-normalized. The physical
/// matrix is `e^{log_scale} * matrix`; the scale never enters the dynamics
/// (evolution is unitary) and is folded into the sector weights when
/// spectra are assembled.
#[derive(Debug, Clone)]
pub struct DensityBlock {
    pub label: BlockLabel,
    pub matrix: Array2<Complex64>,
    pub log_scale: f64,
}

impl DensityBlock {
    /// max |rho - rho^dagger|.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let delta = self.matrix[[i, j]] - self.matrix[[j, i]].conj();
                worst = worst.max(delta.norm());
            }
        }
        worst
    }
}

fn initial_diagonal(label: BlockLabel, ctx: &ThermoContext, source: DensitySource) -> Vec<f64> {
    let s = label.total_spin();
    label
        .m_values()
        .iter()
        .map(|&m| match source {
            DensitySource::LowTemperature => (ctx.b() * (m - s)).exp(),
            DensitySource::HighTemperature => m,
        })
        .collect()
}

/// Initial density matrix of one sector at tau = 0.
pub fn initial_density_block(
    label: BlockLabel,
    ctx: &ThermoContext,
    source: DensitySource,
) -> DensityBlock {
    let d = label.dimension();
    let mut matrix = Array2::<Complex64>::zeros((d, d));
    for (i, v) in initial_diagonal(label, ctx, source).into_iter().enumerate() {
        matrix[[i, i]] = Complex64::new(v, 0.0);
    }
    let log_scale = match source {
        // True diagonal is e^{bM}/Z = e^{log_scale} e^{b(M-S)}.
        DensitySource::LowTemperature => ctx.b() * label.total_spin() - ctx.log_partition(),
        DensitySource::HighTemperature => 0.0,
    };
    DensityBlock {
        label,
        matrix,
        log_scale,
    }
}

/// `C = U^T diag(rho0) U` for one parity half.
fn propagator_c(vectors: &Array2<f64>, half_diag: &[f64]) -> Array2<f64> {
    let mut scaled = vectors.clone();
    for (k, &rho) in half_diag.iter().enumerate() {
        scaled.row_mut(k).mapv_inplace(|v| v * rho);
    }
    vectors.t().dot(&scaled)
}

/// Evolve one parity half: returns (Re, Im) of `U (C o e^{-i dl tau}) U^T`.
fn evolve_half(
    vectors: &Array2<f64>,
    values: &[f64],
    c: &Array2<f64>,
    tau: f64,
) -> (Array2<f64>, Array2<f64>) {
    let h = values.len();
    let mut cos = vec![0.0f64; h];
    let mut sin = vec![0.0f64; h];
    for (k, &lambda) in values.iter().enumerate() {
        let (s, co) = (lambda * tau).sin_cos();
        cos[k] = co;
        sin[k] = s;
    }
    let mut p_re = Array2::<f64>::zeros((h, h));
    let mut p_im = Array2::<f64>::zeros((h, h));
    for a in 0..h {
        for b in 0..h {
            // e^{-i (l_a - l_b) tau} = (ca cb + sa sb) - i (sa cb - ca sb)
            p_re[[a, b]] = c[[a, b]] * (cos[a] * cos[b] + sin[a] * sin[b]);
            p_im[[a, b]] = -c[[a, b]] * (sin[a] * cos[b] - cos[a] * sin[b]);
        }
    }
    let re = vectors.dot(&p_re).dot(&vectors.t());
    let im = vectors.dot(&p_im).dot(&vectors.t());
    (re, im)
}

fn scatter_half(full: &mut Array2<Complex64>, re: &Array2<f64>, im: &Array2<f64>, start: usize) {
    let h = re.nrows();
    for a in 0..h {
        for b in 0..h {
            full[[start + 2 * a, start + 2 * b]] = Complex64::new(re[[a, b]], im[[a, b]]);
        }
    }
}

/// Full-sector evolution from precomputed parity C matrices.
fn evolve_full(
    block: &SpinBlock,
    c_even: &Array2<f64>,
    c_odd: &Array2<f64>,
    tau: f64,
) -> Array2<Complex64> {
    let d = block.label.dimension();
    let mut full = Array2::<Complex64>::zeros((d, d));
    let (re, im) = evolve_half(
        &block.eigen_even.vectors,
        &block.eigen_even.values,
        c_even,
        tau,
    );
    scatter_half(&mut full, &re, &im, 0);
    let (re, im) = evolve_half(
        &block.eigen_odd.vectors,
        &block.eigen_odd.values,
        c_odd,
        tau,
    );
    scatter_half(&mut full, &re, &im, 1);
    full
}

fn diagonal_halves(rho0: &DensityBlock) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = rho0.matrix.nrows();
    debug_assert!(
        {
            let mut diag = true;
            for i in 0..d {
                for j in 0..d {
                    if i != j && rho0.matrix[[i, j]] != Complex64::ZERO {
                        diag = false;
                    }
                }
            }
            diag
        },
        "rho(0) must be diagonal in the M basis"
    );
    if d != rho0.label.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {d}x{d} but the label needs {}",
            rho0.label.dimension()
        )));
    }
    let even = (0..d).step_by(2).map(|i| rho0.matrix[[i, i]].re).collect();
    let odd = (1..d).step_by(2).map(|i| rho0.matrix[[i, i]].re).collect();
    Ok((even, odd))
}

/// One-shot evolution of a diagonal initial sector. Multi-tau callers should
/// use [`SpectrumEngine`], which keeps the `C = U^T rho(0) U` products
/// around instead of rebuilding them per time point.
pub fn evolve_block(rho0: &DensityBlock, block: &SpinBlock, tau: f64) -> Result<DensityBlock> {
    if rho0.label != block.label {
        return Err(Error::DimensionMismatch(format!(
            "density block 2S={} does not match spin block 2S={}",
            rho0.label.two_s(),
            block.label.two_s()
        )));
    }
    let (even, odd) = diagonal_halves(rho0)?;
    let c_even = propagator_c(&block.eigen_even.vectors, &even);
    let c_odd = propagator_c(&block.eigen_odd.vectors, &odd);
    Ok(DensityBlock {
        label: rho0.label,
        matrix: evolve_full(block, &c_even, &c_odd, tau),
        log_scale: rho0.log_scale,
    })
}

fn strip_sum(a: &Array2<Complex64>, b: &Array2<Complex64>, order: i64) -> (Complex64, f64) {
    let d = a.nrows() as i64;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let mut scale = CompensatedSum::new();
    let lo = (-order).max(0);
    let hi = d - order.max(0);
    for i in lo..hi {
        let j = i + order;
        let x = a[[i as usize, j as usize]];
        let y = b[[j as usize, i as usize]];
        re.add(x.re * y.re - x.im * y.im);
        im.add(x.re * y.im + x.im * y.re);
        scale.add(x.re.abs() * y.re.abs() + x.im.abs() * y.im.abs());
        scale.add(x.re.abs() * y.im.abs() + x.im.abs() * y.re.abs());
    }
    (Complex64::new(re.value(), im.value()), scale.value())
}

/// Tr{A_n B_{-n}}: the sum over entry pairs with coherence order n,
/// i.e. row M minus column M' equal to n. The result is real for Hermitian
/// inputs; the imaginary residue is checked against a scale-aware 1e-12
/// tolerance and discarded. Scale factors are the caller's responsibility.
pub fn coherence_trace(a: &DensityBlock, b: &DensityBlock, order: i64) -> Result<f64> {
    if a.label != b.label {
        return Err(Error::DimensionMismatch(format!(
            "coherence trace across different sectors: 2S={} vs 2S={}",
            a.label.two_s(),
            b.label.two_s()
        )));
    }
    if order.unsigned_abs() > a.label.two_s() as u64 {
        return Ok(0.0);
    }
    let (value, scale) = strip_sum(&a.matrix, &b.matrix, order);
    if value.im.abs() > 1e-12 * scale.max(1.0) {
        return Err(Error::NonFinite(format!(
            "coherence trace at order {order} has imaginary residue {:.3e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// Normalized coherence-order intensities J_n at one (b, tau) point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceSpectrum {
    n_spins: u32,
    kind: SpectrumKind,
    /// Index i holds order n = i - N; odd orders are exactly zero.
    intensities: Vec<f64>,
    tau: f64,
    b: f64,
}

impl CoherenceSpectrum {
    pub fn from_intensities(
        n_spins: u32,
        kind: SpectrumKind,
        intensities: Vec<f64>,
        tau: f64,
        b: f64,
    ) -> Result<Self> {
        if intensities.len() != 2 * n_spins as usize + 1 {
            return Err(Error::DimensionMismatch(format!(
                "need {} intensities for N={n_spins}, got {}",
                2 * n_spins + 1,
                intensities.len()
            )));
        }
        if let Some(bad) = intensities.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("intensity {bad}")));
        }
        Ok(Self {
            n_spins,
            kind,
            intensities,
            tau,
            b,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// J_n; zero outside the physical order range.
    pub fn intensity(&self, order: i64) -> f64 {
        let idx = order + self.n_spins as i64;
        if idx < 0 || idx >= self.intensities.len() as i64 {
            return 0.0;
        }
        self.intensities[idx as usize]
    }

    /// (order, intensity) pairs for n = -N..=N.
    pub fn orders(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n_spins as i64;
        self.intensities
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i as i64 - n, v))
    }

    /// Compensated sum over all orders; 1 when the spectrum is conserved.
    pub fn total(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for &v in &self.intensities {
            acc.add(v);
        }
        acc.value()
    }
}

struct PreparedBlock {
    index: usize,
    weight: f64,
    a_even: Array2<f64>,
    a_odd: Array2<f64>,
    /// C matrices of the second source; `None` when both traces come from
    /// the same evolved matrix (reduced kind, or the b = 0 standard limit).
    b_halves: Option<(Array2<f64>, Array2<f64>)>,
}

/// Assembles spectra for one (N, b, kind) across many time points, reusing
/// the per-sector `C` products. Sectors are processed in descending S with
/// compensated accumulation, so results do not depend on thread count.
pub struct SpectrumEngine<'a> {
    blocks: &'a BlockSet,
    ctx: &'a ThermoContext,
    kind: SpectrumKind,
    prepared: Vec<PreparedBlock>,
}

impl<'a> SpectrumEngine<'a> {
    pub fn new(blocks: &'a BlockSet, ctx: &'a ThermoContext, kind: SpectrumKind) -> Result<Self> {
        Self::with_pruning(blocks, ctx, kind, None)
    }

    /// `log_weight_cut = Some(c)` skips sectors whose log weight falls more
    /// than `c` below the maximum. Exact by default (`None`).
    pub fn with_pruning(
        blocks: &'a BlockSet,
        ctx: &'a ThermoContext,
        kind: SpectrumKind,
        log_weight_cut: Option<f64>,
    ) -> Result<Self> {
        if blocks.n_spins() != ctx.n_spins() {
            return Err(Error::DimensionMismatch(format!(
                "block set is for N={}, context for N={}",
                blocks.n_spins(),
                ctx.n_spins()
            )));
        }
        let ht_limit = kind == SpectrumKind::Standard && ctx.b() == 0.0;

        let mut weights = Vec::with_capacity(blocks.blocks().len());
        for block in blocks.blocks() {
            let w = if ht_limit {
                block_log_weight_high_t_limit(block.label, ctx)?
            } else {
                block_log_weight(kind, block.label, ctx)?
            };
            if !w.is_finite() {
                return Err(Error::NonFinite(format!(
                    "log weight of sector 2S={}",
                    block.label.two_s()
                )));
            }
            weights.push(w);
        }
        let max_weight = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let mut prepared = Vec::new();
        for (index, block) in blocks.blocks().iter().enumerate() {
            let log_weight = weights[index];
            if let Some(cut) = log_weight_cut {
                if log_weight < max_weight - cut {
                    continue;
                }
            }
            let (even_idx, odd_idx) = block.parity_indices();
            let gather = |source: DensitySource, idx: &[usize]| -> Vec<f64> {
                let diag = initial_diagonal(block.label, ctx, source);
                idx.iter().map(|&i| diag[i]).collect()
            };
            let a_source = if ht_limit {
                DensitySource::HighTemperature
            } else {
                DensitySource::LowTemperature
            };
            let a_even = propagator_c(&block.eigen_even.vectors, &gather(a_source, &even_idx));
            let a_odd = propagator_c(&block.eigen_odd.vectors, &gather(a_source, &odd_idx));
            let b_halves = if kind == SpectrumKind::Standard && !ht_limit {
                let src = DensitySource::HighTemperature;
                Some((
                    propagator_c(&block.eigen_even.vectors, &gather(src, &even_idx)),
                    propagator_c(&block.eigen_odd.vectors, &gather(src, &odd_idx)),
                ))
            } else {
                None
            };
            prepared.push(PreparedBlock {
                index,
                weight: log_weight.exp(),
                a_even,
                a_odd,
                b_halves,
            });
        }
        Ok(Self {
            blocks,
            ctx,
            kind,
            prepared,
        })
    }

    /// Number of sectors that survived pruning.
    pub fn retained(&self) -> usize {
        self.prepared.len()
    }

    pub fn spectrum_at(&self, tau: f64) -> Result<CoherenceSpectrum> {
        let n = self.blocks.n_spins() as i64;
        let mut acc = vec![CompensatedSum::new(); 2 * n as usize + 1];

        for pb in &self.prepared {
            let block = &self.blocks.blocks()[pb.index];
            let a = evolve_full(block, &pb.a_even, &pb.a_odd, tau);
            let b_mat = pb
                .b_halves
                .as_ref()
                .map(|(ce, co)| evolve_full(block, ce, co, tau));
            let b_ref = b_mat.as_ref().unwrap_or(&a);

            let two_s = block.label.two_s() as i64;
            let start = -two_s + (two_s & 1);
            let mut order = start;
            while order <= two_s {
                let (value, scale) = strip_sum(&a, b_ref, order);
                if value.im.abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::NonFinite(format!(
                        "sector 2S={two_s} at tau={tau}: order {order} trace has imaginary residue {:.3e}",
                        value.im
                    )));
                }
                acc[(order + n) as usize].add(pb.weight * value.re);
                order += 2;
            }
        }

        let intensities: Vec<f64> = acc.into_iter().map(|s| s.value()).collect();
        if let Some(bad) = intensities.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "intensity {bad} at tau={tau}, b={}",
                self.ctx.b()
            )));
        }
        CoherenceSpectrum::from_intensities(
            self.blocks.n_spins(),
            self.kind,
            intensities,
            tau,
            self.ctx.b(),
        )
    }

    /// Spectra for a list of time points, computed in parallel. Each point
    /// is an independent pure computation, so the output is identical for
    /// any worker count.
    pub fn sweep(&self, taus: &[f64]) -> Result<Vec<CoherenceSpectrum>> {
        taus.par_iter().map(|&tau| self.spectrum_at(tau)).collect()
    }
}

/// Build the sector machinery and evaluate one spectrum.
pub fn assemble_spectrum(
    blocks: &BlockSet,
    ctx: &ThermoContext,
    kind: SpectrumKind,
    tau: f64,
) -> Result<CoherenceSpectrum> {
    SpectrumEngine::new(blocks, ctx, kind)?.spectrum_at(tau)
}

/// Phase grid with exact order separation up to |n| = N: 2N+1 points on
/// [0, 2pi).
pub fn canonical_phi_grid(n_spins: u32) -> Vec<f64> {
    let k = 2 * n_spins as usize + 1;
    (0..k)
        .map(|i| 2.0 * std::f64::consts::PI * i as f64 / k as f64)
        .collect()
}

/// Phase-encoded signal G(phi) = sum_n J_n e^{i n phi}.
pub fn signal_from_spectrum(
    spectrum: &CoherenceSpectrum,
    phi_grid: &[f64],
) -> Result<Vec<Complex64>> {
    if phi_grid.is_empty() {
        return Err(Error::InvalidParameter("phi grid must not be empty".into()));
    }
    Ok(phi_grid
        .iter()
        .map(|&phi| {
            let mut g = Complex64::ZERO;
            for (order, j) in spectrum.orders() {
                g += Complex64::from_polar(j, order as f64 * phi);
            }
            g
        })
        .collect())
}

/// Recover intensities from a signal sampled on the uniform grid
/// phi_k = 2 pi k / K with K >= 2N+1. Exact inverse of
/// [`signal_from_spectrum`] on the canonical grid; the imaginary part of
/// each Fourier coefficient is discarded.
pub fn spectrum_from_signal(signal: &[Complex64], n_spins: u32) -> Result<Vec<f64>> {
    let k = signal.len();
    let needed = 2 * n_spins as usize + 1;
    if k < needed {
        return Err(Error::GridTooSmall { needed, got: k });
    }
    let n = n_spins as i64;
    let mut intensities = Vec::with_capacity(needed);
    for order in -n..=n {
        let mut re = CompensatedSum::new();
        for (i, g) in signal.iter().enumerate() {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
            let w = Complex64::from_polar(1.0, -(order as f64) * phi);
            re.add(g.re * w.re - g.im * w.im);
        }
        intensities.push(re.value() / k as f64);
    }
    Ok(intensities)
}
