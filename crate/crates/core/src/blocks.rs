//! Total-spin sector decomposition of a system of equivalent spins-1/2.
//!
//! The coherence-transfer Hamiltonian `H = -(D/4) [(I+)^2 + (I-)^2]` commutes
//! with the square of the total spin, so the 2^N problem splits into sectors
//! labelled by S (dimension 2S+1, statistical multiplicity n_N(S)). Within a
//! sector the basis is ordered by descending magnetic quantum number
//! M = S, S-1, ..., -S, and the coherence order of matrix element (row M,
//! col M') is n = M - M'. Because H only couples M <-> M-2, each sector
//! further splits into two decoupled tridiagonal halves (even/odd sublattice
//! of the M index), which is what gets diagonalized.

use ndarray::Array2;

use crate::eigen::{eigen_tridiagonal, EigenSystem};
use crate::error::{Error, Result};
use crate::math;
use crate::params::SystemParams;

/// One total-spin sector. S is stored as the integer 2S, which has the same
/// parity as N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockLabel {
    two_s: u32,
}

impl BlockLabel {
    pub fn new(n_spins: u32, two_s: u32) -> Result<Self> {
        if two_s > n_spins || two_s % 2 != n_spins % 2 {
            return Err(Error::InvalidBlockLabel { n_spins, two_s });
        }
        Ok(Self { two_s })
    }

    /// Unchecked constructor for callers that already hold a valid 2S.
    pub(crate) fn from_two_s(two_s: u32) -> Self {
        Self { two_s }
    }

    pub fn two_s(&self) -> u32 {
        self.two_s
    }

    pub fn total_spin(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn dimension(&self) -> usize {
        self.two_s as usize + 1
    }

    /// Magnetic quantum numbers in basis order, M = S down to -S.
    pub fn m_values(&self) -> Vec<f64> {
        let s = self.total_spin();
        (0..self.dimension()).map(|i| s - i as f64).collect()
    }
}

/// All sector labels for N spins, in descending S. There are floor(N/2) + 1.
pub fn enumerate_blocks(params: &SystemParams) -> Vec<BlockLabel> {
    let n = params.n_spins();
    (0..=n / 2)
        .map(|k| BlockLabel::from_two_s(n - 2 * k))
        .collect()
}

/// ln n_N(S) where n_N(S) = N! (2S+1) / [(N/2+S+1)! (N/2-S)!] counts the
/// states of total spin S. Computed entirely in log space: the factorials
/// overflow f64 long before N reaches the system sizes of interest.
pub fn log_multiplicity(n_spins: u32, label: BlockLabel) -> Result<f64> {
    let two_s = label.two_s();
    if two_s > n_spins || two_s % 2 != n_spins % 2 {
        return Err(Error::InvalidBlockLabel { n_spins, two_s });
    }
    let n = n_spins as u64;
    let two_s = two_s as u64;
    // N and 2S share parity, so both factorial arguments are integers.
    let upper = (n + two_s) / 2 + 1; // N/2 + S + 1
    let lower = (n - two_s) / 2; // N/2 - S
    Ok(math::ln_factorial(n) + ((two_s + 1) as f64).ln()
        - math::ln_factorial(upper)
        - math::ln_factorial(lower))
}

/// Real symmetric tridiagonal matrix: the shape of a parity half.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSymmetric {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl TridiagonalSymmetric {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.dim();
        let mut m = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            m[[i, i]] = self.diagonal[i];
        }
        for i in 0..n.saturating_sub(1) {
            m[[i, i + 1]] = self.off_diagonal[i];
            m[[i + 1, i]] = self.off_diagonal[i];
        }
        m
    }
}

/// Deliberately broken Hamiltonian variants. Used only by the validation
/// suite to demonstrate that its comparisons catch a wrong build: flipping
/// the sign of the M(M-1) term inside the coupling formula changes matrix
/// element magnitudes, which no gauge transformation can hide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationFixture {
    CouplingSignError,
}

fn coupling_element(s: f64, m: f64, coupling: f64, fixture: Option<MutationFixture>) -> f64 {
    let ss = s * (s + 1.0);
    let first = match fixture {
        None => ss - m * (m - 1.0),
        Some(MutationFixture::CouplingSignError) => ss + m * (m - 1.0),
    };
    let second = ss - (m - 1.0) * (m - 2.0);
    -(coupling / 4.0) * (first * second).sqrt()
}

fn block_hamiltonian_impl(
    label: BlockLabel,
    coupling: f64,
    fixture: Option<MutationFixture>,
) -> Array2<f64> {
    let d = label.dimension();
    let m_values = label.m_values();
    let s = label.total_spin();
    let mut h = Array2::<f64>::zeros((d, d));
    for i in 0..d.saturating_sub(2) {
        // Element <M-2|H|M> with M = m_values[i]; H is symmetric.
        let v = coupling_element(s, m_values[i], coupling, fixture);
        h[[i, i + 2]] = v;
        h[[i + 2, i]] = v;
    }
    h
}

/// Sector Hamiltonian in the descending-M basis: pentadiagonal with zero
/// main and first off-diagonals, and
/// `<M-2|H|M> = -(D/4) sqrt[(S(S+1)-M(M-1)) (S(S+1)-(M-1)(M-2))]`.
pub fn build_block_hamiltonian(label: BlockLabel, coupling: f64) -> Array2<f64> {
    block_hamiltonian_impl(label, coupling, None)
}

/// Restrict a +/-2-coupled sector Hamiltonian to its even- and odd-index M
/// sublattices. Entries are copied, never recomputed, so scattering the two
/// halves back reproduces the input bit-for-bit.
pub fn parity_split(h: &Array2<f64>) -> Result<(TridiagonalSymmetric, TridiagonalSymmetric)> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "block Hamiltonian must be square, got {}x{}",
            d,
            h.ncols()
        )));
    }
    for i in 0..d {
        for j in 0..d {
            let dist = i.abs_diff(j);
            if dist != 0 && dist != 2 && h[[i, j]] != 0.0 {
                return Err(Error::StructureViolation { row: i, col: j });
            }
        }
    }

    let half = |start: usize| -> TridiagonalSymmetric {
        let idx: Vec<usize> = (start..d).step_by(2).collect();
        let diagonal = idx.iter().map(|&i| h[[i, i]]).collect();
        let off_diagonal = idx.windows(2).map(|w| h[[w[0], w[1]]]).collect();
        TridiagonalSymmetric {
            diagonal,
            off_diagonal,
        }
    };
    Ok((half(0), half(1)))
}

/// Scatter two parity halves back into the full sector matrix (zero
/// elsewhere). Inverse of [`parity_split`] for structurally valid input.
pub fn parity_join(even: &TridiagonalSymmetric, odd: &TridiagonalSymmetric) -> Array2<f64> {
    let d = even.dim() + odd.dim();
    let mut h = Array2::<f64>::zeros((d, d));
    for (half, start) in [(even, 0usize), (odd, 1usize)] {
        let idx: Vec<usize> = (start..d).step_by(2).collect();
        for (k, &i) in idx.iter().enumerate() {
            h[[i, i]] = half.diagonal[k];
        }
        for (k, w) in idx.windows(2).enumerate() {
            h[[w[0], w[1]]] = half.off_diagonal[k];
            h[[w[1], w[0]]] = half.off_diagonal[k];
        }
    }
    h
}

/// A fully prepared sector: parity halves, their eigensystems, and the
/// log-space multiplicity. Immutable after construction; the Hamiltonian and
/// eigensystems do not depend on temperature, so one `BlockSet` serves every
/// (b, tau) query for a given N and D.
#[derive(Debug, Clone)]
pub struct SpinBlock {
    pub label: BlockLabel,
    pub m_values: Vec<f64>,
    pub even_half: TridiagonalSymmetric,
    pub odd_half: TridiagonalSymmetric,
    pub eigen_even: EigenSystem,
    pub eigen_odd: EigenSystem,
    pub log_multiplicity: f64,
}

impl SpinBlock {
    fn build(
        n_spins: u32,
        label: BlockLabel,
        coupling: f64,
        fixture: Option<MutationFixture>,
    ) -> Result<Self> {
        let h = block_hamiltonian_impl(label, coupling, fixture);
        let (even_half, odd_half) = parity_split(&h)?;
        let annotate = |err: Error, parity: &str| match err {
            Error::EigenNonConvergence {
                index, iterations, ..
            } => Error::EigenNonConvergence {
                index,
                iterations,
                context: format!(" (block 2S={}, {parity} half)", label.two_s()),
            },
            other => other,
        };
        let eigen_even = eigen_tridiagonal(&even_half).map_err(|e| annotate(e, "even"))?;
        let eigen_odd = eigen_tridiagonal(&odd_half).map_err(|e| annotate(e, "odd"))?;
        Ok(Self {
            label,
            m_values: label.m_values(),
            even_half,
            odd_half,
            eigen_even,
            eigen_odd,
            log_multiplicity: log_multiplicity(n_spins, label)?,
        })
    }

    /// Basis indices of the even and odd M sublattices.
    pub fn parity_indices(&self) -> (Vec<usize>, Vec<usize>) {
        let d = self.label.dimension();
        (
            (0..d).step_by(2).collect(),
            (1..d).step_by(2).collect(),
        )
    }
}

/// Every sector of an N-spin system, in descending S.
#[derive(Debug, Clone)]
pub struct BlockSet {
    n_spins: u32,
    coupling: f64,
    blocks: Vec<SpinBlock>,
}

impl BlockSet {
    pub fn build(params: &SystemParams) -> Result<Self> {
        Self::build_impl(params, None)
    }

    /// Build with a deliberately wrong Hamiltonian; validation-suite only.
    pub fn build_with_fixture(params: &SystemParams, fixture: MutationFixture) -> Result<Self> {
        Self::build_impl(params, Some(fixture))
    }

    fn build_impl(params: &SystemParams, fixture: Option<MutationFixture>) -> Result<Self> {
        let blocks = enumerate_blocks(params)
            .into_iter()
            .map(|label| SpinBlock::build(params.n_spins(), label, params.coupling(), fixture))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_spins: params.n_spins(),
            coupling: params.coupling(),
            blocks,
        })
    }

    pub fn n_spins(&self) -> u32 {
        self.n_spins
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn blocks(&self) -> &[SpinBlock] {
        &self.blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::log_sum_exp;
    use approx::assert_abs_diff_eq;

    fn params(n: u32) -> SystemParams {
        SystemParams::with_unit_coupling(n, 0.5, vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn enumerate_blocks_examples() {
        let three: Vec<u32> = enumerate_blocks(&params(3)).iter().map(|l| l.two_s()).collect();
        assert_eq!(three, vec![3, 1]); // S = 3/2, 1/2

        let one: Vec<u32> = enumerate_blocks(&params(1)).iter().map(|l| l.two_s()).collect();
        assert_eq!(one, vec![1]); // S = 1/2

        let four: Vec<u32> = enumerate_blocks(&params(4)).iter().map(|l| l.two_s()).collect();
        assert_eq!(four, vec![4, 2, 0]); // S = 2, 1, 0

        for n in 1..=12u32 {
            let labels = enumerate_blocks(&params(n));
            assert_eq!(labels.len(), (n / 2 + 1) as usize);
            assert!(labels.windows(2).all(|w| w[0].two_s() > w[1].two_s()));
        }
    }

    #[test]
    fn label_validation() {
        assert!(BlockLabel::new(3, 3).is_ok());
        assert!(BlockLabel::new(3, 2).is_err()); // parity mismatch
        assert!(BlockLabel::new(3, 5).is_err()); // S > N/2
    }

    #[test]
    fn log_multiplicity_three_spins() {
        let l32 = BlockLabel::new(3, 3).unwrap();
        let l12 = BlockLabel::new(3, 1).unwrap();
        assert_abs_diff_eq!(log_multiplicity(3, l32).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(log_multiplicity(3, l12).unwrap(), 2.0f64.ln(), epsilon = 1e-12);
        assert!(log_multiplicity(4, l32).is_err());
    }

    #[test]
    fn multiplicities_exponentiate_to_integers_for_small_n() {
        // Cross-check against direct binomial counting:
        // n_N(S) = C(N, N/2 - S) - C(N, N/2 - S - 1).
        let binom = |n: u64, k: u64| -> f64 {
            if k > n {
                return 0.0;
            }
            let mut v = 1.0f64;
            for i in 0..k {
                v = v * (n - i) as f64 / (i + 1) as f64;
            }
            v
        };
        for n in 1..=20u32 {
            for label in enumerate_blocks(&params(n)) {
                let k = (n - label.two_s()) as u64 / 2;
                let expected = binom(n as u64, k)
                    - if k == 0 { 0.0 } else { binom(n as u64, k - 1) };
                let got = log_multiplicity(n, label).unwrap().exp();
                let rel = (got - expected).abs() / expected;
                assert!(rel < 1e-9, "N={n} 2S={}: {got} vs {expected}", label.two_s());
            }
        }
    }

    #[test]
    fn dimension_identity_in_log_space() {
        // sum_S n_N(S) (2S+1) = 2^N, checked as logs for N up to 30 and 201.
        for n in (1..=30u32).chain([201]) {
            let terms: Vec<f64> = enumerate_blocks(&params(n))
                .into_iter()
                .map(|l| log_multiplicity(n, l).unwrap() + (l.dimension() as f64).ln())
                .collect();
            let total = log_sum_exp(&terms);
            let expected = n as f64 * 2.0f64.ln();
            let rel = (total - expected).abs() / expected;
            assert!(rel < 1e-10, "N={n}: {total} vs {expected}");
        }
    }

    #[test]
    fn hamiltonian_matches_the_three_spin_sector() {
        let l = BlockLabel::new(3, 3).unwrap();
        let h = build_block_hamiltonian(l, 1.0);
        let v = -(3.0f64.sqrt()) / 2.0;
        let mut expected = Array2::<f64>::zeros((4, 4));
        for (i, j) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            expected[[i, j]] = v;
        }
        assert_eq!(h, expected);

        let h12 = build_block_hamiltonian(BlockLabel::new(3, 1).unwrap(), 1.0);
        assert_eq!(h12, Array2::<f64>::zeros((2, 2)));

        let h0 = build_block_hamiltonian(BlockLabel::new(4, 0).unwrap(), 1.0);
        assert_eq!(h0, Array2::<f64>::zeros((1, 1)));
    }

    #[test]
    fn hamiltonian_scales_with_coupling() {
        let l = BlockLabel::new(3, 3).unwrap();
        let h1 = build_block_hamiltonian(l, 1.0);
        let h2 = build_block_hamiltonian(l, 2.0);
        assert_abs_diff_eq!(h2[[0, 2]], 2.0 * h1[[0, 2]], epsilon = 1e-15);
    }

    #[test]
    fn parity_split_three_spin_sector() {
        let l = BlockLabel::new(3, 3).unwrap();
        let h = build_block_hamiltonian(l, 1.0);
        let (even, odd) = parity_split(&h).unwrap();
        let v = -(3.0f64.sqrt()) / 2.0;
        for half in [&even, &odd] {
            assert_eq!(half.diagonal, vec![0.0, 0.0]);
            assert_eq!(half.off_diagonal, vec![v]);
        }

        let h12 = build_block_hamiltonian(BlockLabel::new(3, 1).unwrap(), 1.0);
        let (e12, o12) = parity_split(&h12).unwrap();
        assert_eq!(e12.diagonal, vec![0.0]);
        assert_eq!(o12.diagonal, vec![0.0]);
        assert!(e12.off_diagonal.is_empty());
        assert!(o12.off_diagonal.is_empty());
    }

    #[test]
    fn parity_split_is_lossless() {
        for n in [3u32, 6, 9, 14] {
            for label in enumerate_blocks(&params(n)) {
                let h = build_block_hamiltonian(label, 1.0);
                let (even, odd) = parity_split(&h).unwrap();
                assert_eq!(parity_join(&even, &odd), h, "N={n} 2S={}", label.two_s());
            }
        }
    }

    #[test]
    fn parity_split_rejects_structure_violations() {
        let mut h = build_block_hamiltonian(BlockLabel::new(3, 3).unwrap(), 1.0);
        h[[0, 1]] = 0.5;
        match parity_split(&h) {
            Err(Error::StructureViolation { row: 0, col: 1 }) => {}
            other => panic!("expected structure violation, got {other:?}"),
        }
    }

    #[test]
    fn odd_n_halves_share_their_spectrum() {
        // M -> -M maps one sublattice onto the other when the dimension is
        // even (odd N), so the two halves must agree as multisets.
        for n in [3u32, 5, 7] {
            for block in BlockSet::build(&params(n)).unwrap().blocks() {
                let mut even = block.eigen_even.values.clone();
                let mut odd = block.eigen_odd.values.clone();
                even.sort_by(|a, b| a.partial_cmp(b).unwrap());
                odd.sort_by(|a, b| a.partial_cmp(b).unwrap());
                assert_eq!(even.len(), odd.len());
                for (a, b) in even.iter().zip(&odd) {
                    assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn halves_cover_the_block() {
        for n in [4u32, 7, 10] {
            for block in BlockSet::build(&params(n)).unwrap().blocks() {
                assert_eq!(
                    block.even_half.dim() + block.odd_half.dim(),
                    block.label.dimension()
                );
            }
        }
    }

    #[test]
    fn block_spectrum_is_symmetric_about_zero() {
        for block in BlockSet::build(&params(8)).unwrap().blocks() {
            for eigen in [&block.eigen_even, &block.eigen_odd] {
                assert!(eigen.plus_minus_pairing_defect() < 1e-10);
            }
        }
    }

    #[test]
    fn mutation_fixture_changes_the_matrix() {
        let l = BlockLabel::new(3, 3).unwrap();
        let clean = build_block_hamiltonian(l, 1.0);
        let broken = block_hamiltonian_impl(l, 1.0, Some(MutationFixture::CouplingSignError));
        assert_ne!(clean, broken);
        // Still finite and symmetric, so the pipeline runs it without panics.
        assert!(broken.iter().all(|v| v.is_finite()));
    }
}
