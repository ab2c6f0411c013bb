//! Deterministic eigensolver for real symmetric tridiagonal matrices.
//!
//! Implicit-shift QL with eigenvector accumulation. Output convention:
//! eigenvalues ascending (ties keep the pre-sort order), and each eigenvector
//! is flipped so that its largest-magnitude component is positive. The same
//! input bits always produce the same output bits, which is what makes CSV
//! output reproducible across runs and thread counts.

use ndarray::Array2;

use crate::blocks::TridiagonalSymmetric;
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 50;

/// Eigendecomposition of a real symmetric matrix: `H = V diag(values) V^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column i pairs with `values[i]`.
    pub vectors: Array2<f64>,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// max |V^T V - I|.
    pub fn orthogonality_defect(&self) -> f64 {
        let vtv = self.vectors.t().dot(&self.vectors);
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vtv[[i, j]] - target).abs());
            }
        }
        worst
    }

    /// max |V diag(values) V^T - T| against the tridiagonal input.
    pub fn reconstruction_defect(&self, t: &TridiagonalSymmetric) -> f64 {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, lambda) in self.values.iter().enumerate() {
            scaled.column_mut(j).mapv_inplace(|v| v * lambda);
        }
        let rebuilt = scaled.dot(&self.vectors.t());
        let dense = t.to_dense();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((rebuilt[[i, j]] - dense[[i, j]]).abs());
            }
        }
        worst
    }

    /// Spectra of the parity halves of a coherence-transfer block are
    /// symmetric about zero (zero-diagonal tridiagonal = bipartite).
    /// Returns the worst mismatch when |values| are sorted and paired,
    /// counting an unpaired smallest entry (odd dimension) as |lambda|.
    pub fn plus_minus_pairing_defect(&self) -> f64 {
        let mut mags: Vec<f64> = self.values.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut worst = 0.0f64;
        let mut start = 0;
        if mags.len() % 2 == 1 {
            worst = mags[0];
            start = 1;
        }
        for pair in mags[start..].chunks_exact(2) {
            worst = worst.max((pair[0] - pair[1]).abs());
        }
        worst
    }
}

/// Diagonalize a symmetric tridiagonal matrix.
///
/// Errors with [`Error::EigenNonConvergence`] if an eigenvalue needs more
/// than 50 implicit QL sweeps (callers annotate the failing block).
pub fn eigen_tridiagonal(t: &TridiagonalSymmetric) -> Result<EigenSystem> {
    let n = t.dim();
    if n == 0 {
        // The odd parity half of a one-dimensional sector is empty.
        return Ok(EigenSystem {
            values: Vec::new(),
            vectors: Array2::zeros((0, 0)),
        });
    }
    if t.off_diagonal.len() + 1 != n {
        return Err(Error::DimensionMismatch(format!(
            "off-diagonal length {} does not match dimension {}",
            t.off_diagonal.len(),
            n
        )));
    }

    let mut d = t.diagonal.clone();
    let mut e = t.off_diagonal.clone();
    e.push(0.0);
    let mut z = Array2::<f64>::eye(n);

    for l in 0..n {
        let mut iterations = 0usize;
        loop {
            // First index m >= l whose off-diagonal is negligible.
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::EigenNonConvergence {
                    index: l,
                    iterations,
                    context: String::new(),
                });
            }

            // Implicit shift from the 2x2 at the top of the active window.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;

            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                for k in 0..n {
                    f = z[[k, i + 1]];
                    z[[k, i + 1]] = s * z[[k, i]] + c * f;
                    z[[k, i]] = c * z[[k, i]] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // Ascending order; stable so exact ties (e.g. an all-zero matrix) keep
    // the accumulation order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap().then(a.cmp(&b)));

    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column_mut(dst);
        col.assign(&z.column(src));
        // Sign convention: largest-magnitude component positive, first such
        // component deciding on exact ties.
        let mut pivot = 0usize;
        let mut best = 0.0f64;
        for (k, &v) in col.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                pivot = k;
            }
        }
        if col[pivot] < 0.0 {
            col.mapv_inplace(|v| -v);
        }
    }

    Ok(EigenSystem { values, vectors })
}
