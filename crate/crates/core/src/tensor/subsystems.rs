//! Multipartite index bookkeeping: partial transpose, partial trace and
//! subsystem permutations on operators over `H_1 ⊗ ... ⊗ H_n`.
//!
//! Subsystems are numbered from 1 in every public signature. Basis index
//! `i` of the composite space corresponds to the mixed-radix digits
//! `(i_1, ..., i_n)` with `i_1` most significant.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Ordered local dimensions of a composite Hilbert space, each at least 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct HilbertDims(Vec<usize>);

impl HilbertDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("dimension list is empty".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDims(format!(
                "local dimension {d} is below 2 in {dims:?}"
            )));
        }
        Ok(HilbertDims(dims))
    }

    pub fn qubits(n: usize) -> Self {
        HilbertDims(vec![2; n.max(1)])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Local dimension of 1-based subsystem `k`.
    pub fn dim(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_all_qubits(&self) -> bool {
        self.0.iter().all(|&d| d == 2)
    }

    /// Row-major strides per (0-based) position.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1];
        }
        strides
    }

    /// Mixed-radix digits of a composite basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for k in (0..self.0.len()).rev() {
            out[k] = index % self.0[k];
            index /= self.0[k];
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&d, &n)| acc * n + d)
    }

    /// Dimensions of the listed subsystems, in list order.
    pub fn select(&self, subsystems: &[usize]) -> Result<HilbertDims> {
        let subsystems = self.check_subset(subsystems)?;
        HilbertDims::new(subsystems.iter().map(|&k| self.dim(k)).collect())
    }

    /// Validates a 1-based subset and returns it with duplicates rejected.
    pub fn check_subset<'a>(&self, subset: &'a [usize]) -> Result<&'a [usize]> {
        let n = self.len();
        let mut seen = vec![false; n + 1];
        for &k in subset {
            if k == 0 || k > n {
                return Err(Error::BadSubset(format!("subsystem {k} outside 1..={n}")));
            }
            if seen[k] {
                return Err(Error::BadSubset(format!("subsystem {k} listed twice")));
            }
            seen[k] = true;
        }
        Ok(subset)
    }

    /// Sorted complement of a subset within `1..=n`.
    pub fn complement(&self, subset: &[usize]) -> Vec<usize> {
        (1..=self.len()).filter(|k| !subset.contains(k)).collect()
    }

    fn check_operator(&self, m: &ComplexMatrix) -> Result<usize> {
        let n = m.require_square("operator")?;
        if n != self.total() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {n}x{n} but dims {:?} have total {}",
                self.0,
                self.total()
            )));
        }
        Ok(n)
    }
}

impl TryFrom<Vec<usize>> for HilbertDims {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        HilbertDims::new(v)
    }
}

impl From<HilbertDims> for Vec<usize> {
    fn from(d: HilbertDims) -> Vec<usize> {
        d.0
    }
}

impl std::fmt::Display for HilbertDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("x"))
    }
}

/// Transposes the tensor factors listed in `subset`: the entry at multi-indices
/// `(i_1..i_n), (j_1..j_n)` moves to the position where `i_k` and `j_k` are
/// exchanged for every `k` in the subset.
pub fn partial_transpose(
    m: &ComplexMatrix,
    dims: &HilbertDims,
    subset: &[usize],
) -> Result<ComplexMatrix> {
    let n = dims.check_operator(m)?;
    let subset = dims.check_subset(subset)?;
    let strides = dims.strides();
    let table: Vec<Vec<usize>> = (0..n).map(|i| dims.digits(i)).collect();

    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let (mut r2, mut c2) = (r as isize, c as isize);
            for &k in subset {
                let delta =
                    (table[c][k - 1] as isize - table[r][k - 1] as isize) * strides[k - 1] as isize;
                r2 += delta;
                c2 -= delta;
            }
            out[(r2 as usize, c2 as usize)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Traces out the subsystems in `subset`; the result acts on the remaining
/// subsystems in ascending order. Tracing everything leaves the 1x1 matrix `[Tr m]`.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: &HilbertDims,
    subset: &[usize],
) -> Result<ComplexMatrix> {
    let n = dims.check_operator(m)?;
    let subset = dims.check_subset(subset)?;
    let kept = dims.complement(subset);
    let kept_dims: Vec<usize> = kept.iter().map(|&k| dims.dim(k)).collect();
    let out_n: usize = kept_dims.iter().product();

    let table: Vec<Vec<usize>> = (0..n).map(|i| dims.digits(i)).collect();
    let reduced: Vec<usize> = table
        .iter()
        .map(|d| kept.iter().fold(0, |acc, &k| acc * dims.dim(k) + d[k - 1]))
        .collect();

    let mut out = ComplexMatrix::zeros(out_n, out_n);
    for r in 0..n {
        for c in 0..n {
            if subset.iter().all(|&k| table[r][k - 1] == table[c][k - 1]) {
                out[(reduced[r], reduced[c])] += m[(r, c)];
            }
        }
    }
    Ok(out)
}

/// Reorders tensor factors. Position `j` of the output holds input subsystem
/// `perm[j]` (1-based), so `permute(a ⊗ b, [2, 1]) = b ⊗ a`. Applying `p` then
/// `q` equals applying the single permutation `j -> p[q[j]]`.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &HilbertDims,
    perm: &[usize],
) -> Result<(ComplexMatrix, HilbertDims)> {
    let n = dims.check_operator(m)?;
    let index_map = permutation_index_map(dims, perm)?;
    let new_dims = dims.select(perm)?;
    let mut out = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            out[(index_map[r], index_map[c])] = m[(r, c)];
        }
    }
    Ok((out, new_dims))
}

/// Same reordering applied to a state vector.
pub fn permute_vector(v: &[C64], dims: &HilbertDims, perm: &[usize]) -> Result<Vec<C64>> {
    if v.len() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} does not match dims {dims}",
            v.len()
        )));
    }
    let index_map = permutation_index_map(dims, perm)?;
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[index_map[i]] = x;
    }
    Ok(out)
}

/// Checks `perm` and returns, for every input basis index, its output index.
fn permutation_index_map(dims: &HilbertDims, perm: &[usize]) -> Result<Vec<usize>> {
    if perm.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {} subsystems",
            perm.len(),
            dims.len()
        )));
    }
    dims.check_subset(perm)?;
    let new_dims = dims.select(perm)?;
    Ok((0..dims.total())
        .map(|i| {
            let d = dims.digits(i);
            let permuted: Vec<usize> = perm.iter().map(|&k| d[k - 1]).collect();
            new_dims.index_of(&permuted)
        })
        .collect())
}

/// Inverse of a 1-based permutation.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (j, &p) in perm.iter().enumerate() {
        inv[p - 1] = j + 1;
    }
    inv
}
