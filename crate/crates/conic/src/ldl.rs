//! Sparse LDLᵀ factorization for quasi-definite matrices.
//!
//! The matrix is supplied as a fixed list of upper-triangular coordinates;
//! numeric values are refreshed on every factorization. A minimum-degree
//! ordering is computed once from the pattern. Pivots are never reordered
//! numerically, so the expected sign of every pivot must be known up front.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::scalar::Scalar;

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LdlError {
    #[error("entry ({0}, {1}) is below the diagonal")]
    NotUpper(usize, usize),
    #[error("zero or non-finite pivot at column {0}")]
    BadPivot(usize),
}

/// Minimum-degree elimination order for a symmetric pattern.
///
/// `edges` are off-diagonal coordinates (either triangle). Returns `perm`
/// with `perm[k]` the original index eliminated at step `k`.
pub fn minimum_degree(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut nbrs: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for &(i, j) in edges {
        if i != j {
            nbrs[i].insert(j);
            nbrs[j].insert(i);
        }
    }
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..n).map(|v| Reverse((nbrs[v].len(), v))).collect();
    let mut done = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    while let Some(Reverse((deg, v))) = heap.pop() {
        if done[v] || deg != nbrs[v].len() {
            continue;
        }
        done[v] = true;
        perm.push(v);
        let clique: Vec<usize> = nbrs[v].drain().collect();
        for &u in &clique {
            nbrs[u].remove(&v);
        }
        for (a, &u) in clique.iter().enumerate() {
            for &w in &clique[a + 1..] {
                if nbrs[u].insert(w) {
                    nbrs[w].insert(u);
                }
            }
        }
        for &u in &clique {
            heap.push(Reverse((nbrs[u].len(), u)));
        }
    }
    perm
}

/// Factorization workspace: ordering, symbolic analysis and numeric factors.
#[derive(Debug, Clone)]
pub struct LdlFactor<T> {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    // permuted upper-triangular pattern
    ap: Vec<usize>,
    ai: Vec<usize>,
    ax: Vec<T>,
    // position in `ax` of each user entry
    entry_pos: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<T>,
    d: Vec<T>,
    dinv: Vec<T>,
    // pivot signs in permuted order
    signs: Vec<i8>,
    /// Number of pivots replaced by the dynamic regularization in the last factorization.
    pub dynamic_bumps: usize,
}

impl<T: Scalar> LdlFactor<T> {
    /// Symbolic analysis. `entries` are upper-triangular `(row, col)` pairs
    /// (`row <= col`); every diagonal must be present. `signs[i]` is the
    /// expected pivot sign (+1 or -1) of original index `i`.
    pub fn new(n: usize, entries: &[(usize, usize)], signs: &[i8]) -> Result<Self, LdlError> {
        for &(r, c) in entries {
            if r > c {
                return Err(LdlError::NotUpper(r, c));
            }
        }
        let perm = minimum_degree(n, entries);
        let mut iperm = vec![0usize; n];
        for (k, &p) in perm.iter().enumerate() {
            iperm[p] = k;
        }

        // permuted coordinates, kept upper triangular
        let mut coords: Vec<(usize, usize, usize)> = entries
            .iter()
            .enumerate()
            .map(|(id, &(r, c))| {
                let (pr, pc) = (iperm[r], iperm[c]);
                (pr.min(pc), pr.max(pc), id)
            })
            .collect();
        coords.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));

        let mut ap = vec![0usize; n + 1];
        let mut ai = Vec::with_capacity(coords.len());
        let mut entry_pos = vec![0usize; entries.len()];
        for (pos, &(r, c, id)) in coords.iter().enumerate() {
            ap[c + 1] += 1;
            ai.push(r);
            entry_pos[id] = pos;
        }
        for c in 0..n {
            ap[c + 1] += ap[c];
        }

        // elimination tree and column counts
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &row in &ai[ap[j]..ap[j + 1]] {
                let mut i = row;
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                    if i == NONE {
                        break;
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let nnz_l = lp[n];
        let signs = perm.iter().map(|&p| signs[p]).collect();

        Ok(Self {
            n,
            ax: vec![T::zero(); ai.len()],
            ap,
            ai,
            entry_pos,
            etree,
            lp,
            li: vec![0; nnz_l],
            lx: vec![T::zero(); nnz_l],
            d: vec![T::zero(); n],
            dinv: vec![T::zero(); n],
            perm,
            iperm,
            signs,
            dynamic_bumps: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric factorization. `values[k]` belongs to `entries[k]` from [`LdlFactor::new`].
    /// Pivots whose signed magnitude falls below `dyn_eps` are replaced by `sign * dyn_delta`.
    pub fn factor(&mut self, values: &[T], dyn_eps: T, dyn_delta: T) -> Result<(), LdlError> {
        debug_assert_eq!(values.len(), self.entry_pos.len());
        for x in self.ax.iter_mut() {
            *x = T::zero();
        }
        for (id, &v) in values.iter().enumerate() {
            self.ax[self.entry_pos[id]] += v;
        }

        let n = self.n;
        let mut y_vals = vec![T::zero(); n];
        let mut y_marked = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_in_col: Vec<usize> = self.lp[..n].to_vec();
        self.dynamic_bumps = 0;

        for k in 0..n {
            let mut nnz_y = 0usize;
            self.d[k] = T::zero();
            for p in self.ap[k]..self.ap[k + 1] {
                let b = self.ai[p];
                if b == k {
                    self.d[k] = self.ax[p];
                    continue;
                }
                y_vals[b] = self.ax[p];
                if y_marked[b] {
                    continue;
                }
                y_marked[b] = true;
                elim[0] = b;
                let mut ne = 1usize;
                let mut next = self.etree[b];
                while next != NONE && next < k {
                    if y_marked[next] {
                        break;
                    }
                    y_marked[next] = true;
                    elim[ne] = next;
                    ne += 1;
                    next = self.etree[next];
                }
                while ne > 0 {
                    ne -= 1;
                    y_idx[nnz_y] = elim[ne];
                    nnz_y += 1;
                }
            }

            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let tmp = next_in_col[c];
                let yc = y_vals[c];
                for j in self.lp[c]..tmp {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[tmp] = k;
                self.lx[tmp] = yc * self.dinv[c];
                self.d[k] -= yc * self.lx[tmp];
                next_in_col[c] += 1;
                y_vals[c] = T::zero();
                y_marked[c] = false;
            }

            let sign = T::lit(self.signs[k] as f64);
            if !self.d[k].is_finite() {
                return Err(LdlError::BadPivot(self.perm[k]));
            }
            if self.d[k] * sign < dyn_eps {
                self.d[k] = sign * dyn_delta;
                self.dynamic_bumps += 1;
            }
            if self.d[k] == T::zero() {
                return Err(LdlError::BadPivot(self.perm[k]));
            }
            self.dinv[k] = T::one() / self.d[k];
        }
        Ok(())
    }

    /// Solves `K x = b` in place (original ordering).
    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        let mut x: Vec<T> = (0..n).map(|k| b[self.perm[k]]).collect();
        for i in 0..n {
            let xi = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                x[self.li[j]] -= self.lx[j] * xi;
            }
        }
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[j] * x[self.li[j]];
            }
            x[i] = acc;
        }
        for k in 0..n {
            b[self.perm[k]] = x[k];
        }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse_permutation(&self) -> &[usize] {
        &self.iperm
    }
}
