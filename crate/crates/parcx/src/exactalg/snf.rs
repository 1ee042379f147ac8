use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::{DenseMat, SparseIntMatrix};
use crate::error::{Error, Result};

/// `U·A·V = diag(d₁,…,d_r, 0,…)` with `d_i | d_{i+1}`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    /// Nonzero diagonal entries, units included.
    pub invariant_factors: Vec<BigInt>,
    pub left_transform: DenseMat,
    pub right_transform: DenseMat,
    /// Inverse of the left transform.
    pub left_inverse: DenseMat,
    pub rows: usize,
    pub cols: usize,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }

    /// Factors larger than one.
    pub fn nonunit_factors(&self) -> Vec<BigInt> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

struct Work {
    a: DenseMat,
    u: DenseMat,
    uinv: DenseMat,
    v: DenseMat,
    track: bool,
}

impl Work {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if self.track {
            self.u.swap(i, j);
            for row in self.uinv.iter_mut() {
                row.swap(i, j);
            }
        }
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        if self.track {
            for row in self.v.iter_mut() {
                row.swap(i, j);
            }
        }
    }
    /// row_i -= q·row_t
    fn row_op(&mut self, i: usize, t: usize, q: &BigInt) {
        let (ri, rt) = two_rows(&mut self.a, i, t);
        axpy(ri, rt, q);
        if self.track {
            let (ui, ut) = two_rows(&mut self.u, i, t);
            axpy(ui, ut, q);
            // inverse: col_t += q·col_i
            for row in self.uinv.iter_mut() {
                if !row[i].is_zero() {
                    let add = &row[i] * q;
                    row[t] += add;
                }
            }
        }
    }
    /// col_j -= q·col_t
    fn col_op(&mut self, j: usize, t: usize, q: &BigInt) {
        for row in self.a.iter_mut() {
            if !row[t].is_zero() {
                let s = &row[t] * q;
                row[j] -= s;
            }
        }
        if self.track {
            for row in self.v.iter_mut() {
                if !row[t].is_zero() {
                    let s = &row[t] * q;
                    row[j] -= s;
                }
            }
        }
    }
    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut() {
            *x = -x.clone();
        }
        if self.track {
            for x in self.u[i].iter_mut() {
                *x = -x.clone();
            }
            for row in self.uinv.iter_mut() {
                row[i] = -row[i].clone();
            }
        }
    }
}

fn two_rows(m: &mut DenseMat, i: usize, t: usize) -> (&mut Vec<BigInt>, &Vec<BigInt>) {
    assert_ne!(i, t);
    if i < t {
        let (lo, hi) = m.split_at_mut(t);
        (&mut lo[i], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(i);
        (&mut hi[0], &lo[t])
    }
}

fn axpy(dst: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    for (d, s) in dst.iter_mut().zip(src) {
        if !s.is_zero() {
            *d -= s * q;
        }
    }
}

fn dense_snf(a: DenseMat, rows: usize, cols: usize, track: bool) -> (Vec<BigInt>, Work) {
    let id = |n: usize| -> DenseMat {
        if track {
            super::matrix::identity_dense(n)
        } else {
            Vec::new()
        }
    };
    let mut w = Work { a, u: id(rows), uinv: id(rows), v: id(cols), track };
    let mut factors = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !w.a[i][j].is_zero() && best.map_or(true, |(bi, bj)| w.a[i][j].abs() < w.a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        if bi != t {
            w.swap_rows(bi, t);
        }
        if bj != t {
            w.swap_cols(bj, t);
        }
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !w.a[i][t].is_zero() {
                    let q = &w.a[i][t] / &w.a[t][t];
                    if !q.is_zero() {
                        w.row_op(i, t, &q);
                    }
                    if !w.a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !w.a[t][j].is_zero() {
                    let q = &w.a[t][j] / &w.a[t][t];
                    if !q.is_zero() {
                        w.col_op(j, t, &q);
                    }
                    if !w.a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // move the smallest remainder in row/column t to the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !w.a[i][t].is_zero() && w.a[i][t].abs() < w.a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !w.a[t][j].is_zero() && w.a[t][j].abs() < w.a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    w.swap_rows(best.0, t);
                }
                if best.1 != t {
                    w.swap_cols(best.1, t);
                }
                continue;
            }
            // divisibility of the trailing block
            let p = w.a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&w.a[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    let m1 = -BigInt::one();
                    w.row_op(t, i, &m1);
                }
                None => break,
            }
        }
        if w.a[t][t].is_negative() {
            w.negate_row(t);
        }
        factors.push(w.a[t][t].clone());
        t += 1;
    }
    (factors, w)
}

/// Smith normal form with unimodular transforms.
pub fn smith_normal_form(a: &SparseIntMatrix) -> SmithForm {
    let (factors, w) = dense_snf(a.to_dense(), a.rows(), a.cols(), true);
    SmithForm {
        invariant_factors: factors,
        left_transform: w.u,
        right_transform: w.v,
        left_inverse: w.uinv,
        rows: a.rows(),
        cols: a.cols(),
    }
}

/// Nonzero invariant factors (units included), computed by sparse unit-pivot
/// elimination followed by a dense Smith form of the remainder.
pub fn invariant_factors(a: &SparseIntMatrix) -> Vec<BigInt> {
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); a.rows()];
    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); a.cols()];
    for (i, j, x) in a.iter() {
        rows[i].insert(j, x.clone());
        col_rows[j].insert(i);
    }
    let mut ones = 0usize;
    let mut alive: BTreeSet<usize> = (0..a.rows()).filter(|&i| !rows[i].is_empty()).collect();
    loop {
        // Markowitz-style choice among unit entries.
        let mut best: Option<(usize, usize, usize)> = None;
        for &i in &alive {
            let rl = rows[i].len();
            for (&j, x) in &rows[i] {
                if x.abs().is_one() {
                    let cost = (rl - 1) * (col_rows[j].len() - 1);
                    if best.map_or(true, |(_, _, c)| cost < c) {
                        best = Some((i, j, cost));
                    }
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((r, c, _)) = best else { break };
        ones += 1;
        let prow = std::mem::take(&mut rows[r]);
        alive.remove(&r);
        for &j in prow.keys() {
            col_rows[j].remove(&r);
        }
        let pv = prow[&c].clone();
        let others: Vec<usize> = col_rows[c].iter().copied().collect();
        for i in others {
            let f = &rows[i][&c] * &pv; // pv = ±1, so pv⁻¹ = pv
            for (&j, x) in &prow {
                let e = rows[i].entry(j).or_default();
                *e -= &f * x;
                if e.is_zero() {
                    rows[i].remove(&j);
                    col_rows[j].remove(&i);
                } else {
                    col_rows[j].insert(i);
                }
            }
            if rows[i].is_empty() {
                alive.remove(&i);
            }
        }
        col_rows[c].clear();
    }
    let live_rows: Vec<usize> = alive.into_iter().collect();
    let mut live_cols: Vec<usize> = live_rows.iter().flat_map(|&i| rows[i].keys().copied()).collect();
    live_cols.sort_unstable();
    live_cols.dedup();
    let mut out: Vec<BigInt> = vec![BigInt::one(); ones];
    if !live_rows.is_empty() {
        let cidx: BTreeMap<usize, usize> = live_cols.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        let mut d = vec![vec![BigInt::zero(); live_cols.len()]; live_rows.len()];
        for (k, &i) in live_rows.iter().enumerate() {
            for (j, x) in &rows[i] {
                d[k][cidx[j]] = x.clone();
            }
        }
        let (f, _) = dense_snf(d, live_rows.len(), live_cols.len(), false);
        out.extend(f);
    }
    out.sort();
    out
}

/// Saturated basis of `{x : A x = 0}`, as column vectors.
pub fn integer_kernel(a: &SparseIntMatrix) -> Vec<Vec<BigInt>> {
    let sf = smith_normal_form(a);
    let r = sf.rank();
    (r..a.cols()).map(|j| sf.right_transform.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Basis of the lattice spanned by the columns of `A`.
pub fn integer_image_basis(a: &SparseIntMatrix) -> Vec<Vec<BigInt>> {
    let sf = smith_normal_form(a);
    // A·V = U⁻¹·D, whose first r columns form a basis.
    (0..sf.rank())
        .map(|j| sf.left_inverse.iter().map(|row| &row[j] * &sf.invariant_factors[j]).collect())
        .collect()
}

/// Integer solution of `A x = b`, if any, using a precomputed Smith form of `A`.
pub fn solve_integer(sf: &SmithForm, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let ub: Vec<BigInt> = sf
        .left_transform
        .iter()
        .map(|row| row.iter().zip(b).filter(|(x, _)| !x.is_zero()).map(|(x, y)| x * y).sum())
        .collect();
    let r = sf.rank();
    let mut y = vec![BigInt::zero(); sf.cols];
    for i in 0..ub.len() {
        if i < r {
            let (q, rem) = ub[i].div_rem(&sf.invariant_factors[i]);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        } else if !ub[i].is_zero() {
            return None;
        }
    }
    Some(
        sf.right_transform
            .iter()
            .map(|row| row.iter().zip(&y).filter(|(_, v)| !v.is_zero()).map(|(x, v)| x * v).sum())
            .collect(),
    )
}

/// `L / M` for `M ⊆ L`, where `basis` is a basis of `L` and `gens` generate `M`.
/// Returns the free rank and the invariant factors larger than one.
pub fn lattice_quotient(basis: &[Vec<BigInt>], gens: &[Vec<BigInt>]) -> Result<(usize, Vec<BigInt>)> {
    let r = basis.len();
    if r == 0 {
        return Ok((0, vec![]));
    }
    let n = basis[0].len();
    let mut b = SparseIntMatrix::zeros(n, r);
    for (j, col) in basis.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            b.set(i, j, x.clone());
        }
    }
    let sf = smith_normal_form(&b);
    let mut coords = SparseIntMatrix::zeros(r, gens.len());
    for (j, g) in gens.iter().enumerate() {
        let x = solve_integer(&sf, g).ok_or_else(|| Error::Integrity("generator outside the lattice".into()))?;
        for (i, v) in x.into_iter().enumerate() {
            coords.set(i, j, v);
        }
    }
    let f = invariant_factors(&coords);
    let free = r - f.len();
    Ok((free, f.into_iter().filter(|d| !d.is_one()).collect()))
}
