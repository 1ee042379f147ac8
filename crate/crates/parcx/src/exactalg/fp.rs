use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::matrix::SparseIntMatrix;

pub fn fp_inv(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

pub(crate) fn big_mod(x: &BigInt, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let mut r = x % &pb;
    if r < BigInt::from(0) {
        r += &pb;
    }
    r.to_u64().expect("residue fits")
}

/// Rank over `F_p` by sparse elimination.
pub fn fp_rank(a: &SparseIntMatrix, p: u64) -> usize {
    let mut rows: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); a.rows()];
    for (i, j, x) in a.iter() {
        let v = big_mod(x, p);
        if v != 0 {
            rows[i].insert(j, v);
        }
    }
    let mut pivot_rows: BTreeMap<usize, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut rank = 0;
    for mut row in rows.into_iter() {
        // reduce against stored pivots until the leading column is new
        loop {
            let Some((&c, &v)) = row.iter().next() else { break };
            match pivot_rows.get(&c) {
                Some(prow) => {
                    let f = v; // stored pivots are normalised to 1
                    for (&j, &x) in prow {
                        let e = row.entry(j).or_insert(0);
                        *e = (*e + p - f * x % p) % p;
                        if *e == 0 {
                            row.remove(&j);
                        }
                    }
                }
                None => {
                    let inv = fp_inv(v, p);
                    for x in row.values_mut() {
                        *x = *x * inv % p;
                    }
                    pivot_rows.insert(c, row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}

/// Basis of `{x : A x = 0}` over `F_p`, for dense `A` given by rows.
pub fn fp_nullspace(a: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut m: Vec<Vec<u64>> = a.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, pr);
        let inv = fp_inv(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = *x * inv % p;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = row[c];
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[i][f]) % p;
            }
            v
        })
        .collect()
}

/// Incremental echelon basis that remembers how each stored row combines the
/// inserted vectors.
#[derive(Clone, Debug)]
pub struct FpSubspace {
    p: u64,
    dim: usize,
    rows: Vec<(usize, Vec<u64>, Vec<u64>)>,
    inserted: usize,
}

impl FpSubspace {
    pub fn new(dim: usize, p: u64) -> Self {
        FpSubspace { p, dim, rows: Vec::new(), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// Residual of `v` and the coefficients `c` (over inserted vectors) with
    /// `v = Σ c_i·inserted_i + residual`.
    pub fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let p = self.p;
        let mut v: Vec<u64> = v.iter().map(|x| x % p).collect();
        let mut coeff = vec![0u64; self.inserted];
        for (pc, row, combo) in &self.rows {
            let f = v[*pc];
            if f == 0 {
                continue;
            }
            for (x, y) in v.iter_mut().zip(row) {
                if *y != 0 {
                    *x = (*x + p - f * y % p) % p;
                }
            }
            for (c, y) in coeff.iter_mut().zip(combo) {
                if *y != 0 {
                    *c = (*c + f * y) % p;
                }
            }
        }
        (v, coeff)
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).0.iter().all(|&x| x == 0)
    }

    /// Inserts `v`; returns false when it was already in the span. The
    /// vector is counted as inserted only when independent.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let p = self.p;
        let (res, coeff) = self.reduce(v);
        let Some(pc) = res.iter().position(|&x| x != 0) else { return false };
        let inv = fp_inv(res[pc], p);
        let row: Vec<u64> = res.iter().map(|x| x * inv % p).collect();
        // res = v − Σ coeff·inserted, so row = inv·(e_new − Σ coeff·e_i)
        let mut combo: Vec<u64> = coeff.iter().map(|c| (p - c) % p * inv % p).collect();
        combo.push(inv);
        for (_, _, c) in self.rows.iter_mut() {
            c.push(0);
        }
        self.inserted += 1;
        // keep the basis reduced so later rows never reintroduce earlier pivots
        for (_, r, c) in self.rows.iter_mut() {
            let f = r[pc];
            if f != 0 {
                for (x, y) in r.iter_mut().zip(&row) {
                    *x = (*x + p - f * y % p) % p;
                }
                for (x, y) in c.iter_mut().zip(&combo) {
                    *x = (*x + p - f * y % p) % p;
                }
            }
        }
        self.rows.push((pc, row, combo));
        true
    }
}

/// One homology group of a complex over `F_p`, with a basis of classes and
/// coordinates for cycles.
#[derive(Clone, Debug)]
pub struct FpHomologyBasis {
    span: FpSubspace,
    nbound: usize,
    reps: Vec<Vec<u64>>,
}

impl FpHomologyBasis {
    /// `d_in: C_q → C_{q−1}` and `d_out: C_{q+1} → C_q` as dense rows; `dim = dim C_q`.
    pub fn new(d_in: &[Vec<u64>], d_out: &[Vec<u64>], dim: usize, p: u64) -> Self {
        let mut span = FpSubspace::new(dim, p);
        let ncols = d_out.first().map_or(0, |r| r.len());
        for c in 0..ncols {
            let col: Vec<u64> = d_out.iter().map(|r| r[c] % p).collect();
            span.insert(&col);
        }
        let nbound = span.rank();
        let mut reps = Vec::new();
        for z in fp_nullspace(d_in, dim, p) {
            if span.insert(&z) {
                reps.push(z);
            }
        }
        FpHomologyBasis { span, nbound, reps }
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Cycles representing the basis classes.
    pub fn reps(&self) -> &[Vec<u64>] {
        &self.reps
    }

    /// Coordinates of the class of a cycle.
    pub fn coords(&self, v: &[u64]) -> crate::Result<Vec<u64>> {
        let (res, c) = self.span.reduce(v);
        if res.iter().any(|&x| x != 0) {
            return Err(crate::Error::Integrity("vector is not a cycle".into()));
        }
        Ok(c[self.nbound..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_coordinates() {
        let p = 3;
        let mut s = FpSubspace::new(3, p);
        assert!(s.insert(&[1, 1, 0]));
        assert!(s.insert(&[0, 1, 1]));
        assert!(!s.insert(&[1, 2, 1]));
        let (res, c) = s.reduce(&[1, 2, 1]);
        assert!(res.iter().all(|&x| x == 0));
        assert_eq!(c, vec![1, 1]);
        let (_, c) = s.reduce(&[2, 0, 1]);
        // 2·(1,1,0) + 2·(0,1,1) = (2,4,2) = (2,1,2), residual nonzero
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn nullspace() {
        let ns = fp_nullspace(&[vec![1, 1, 0], vec![0, 1, 1]], 3, 2);
        assert_eq!(ns, vec![vec![1, 1, 1]]);
    }
}
