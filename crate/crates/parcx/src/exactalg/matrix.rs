use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense integer matrix, row-major.
pub type DenseMat = Vec<Vec<BigInt>>;

pub fn identity_dense(n: usize) -> DenseMat {
    (0..n).map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect()).collect()
}

pub fn dense_mul(a: &DenseMat, b: &DenseMat, inner: usize) -> DenseMat {
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = BigInt::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += &row[k] * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn dense_to_sparse(a: &DenseMat, rows: usize, cols: usize) -> SparseIntMatrix {
    let mut m = SparseIntMatrix::zeros(rows, cols);
    for (i, row) in a.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m.set(i, j, x.clone());
        }
    }
    m
}

/// Sparse integer matrix; absent entries are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseIntMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::from(1));
        }
        m
    }

    pub fn from_dense(a: &[Vec<i64>]) -> Self {
        let rows = a.len();
        let cols = a.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows, cols);
        for (i, r) in a.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    pub fn from_triplets(rows: usize, cols: usize, t: impl IntoIterator<Item = (usize, usize, BigInt)>) -> Result<Self> {
        let mut m = Self::zeros(rows, cols);
        for (i, j, x) in t {
            if i >= rows || j >= cols {
                return Err(Error::Domain(format!("entry ({i},{j}) outside {rows}x{cols}")));
            }
            m.add(i, j, &x);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        debug_assert!(i < self.rows && j < self.cols);
        if x.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), x);
        }
    }

    pub fn add(&mut self, i: usize, j: usize, x: &BigInt) {
        if x.is_zero() {
            return;
        }
        let e = self.entries.entry((i, j)).or_default();
        *e += x;
        if e.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.entries.iter().map(|(&(i, j), x)| (i, j, x))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> Self {
        SparseIntMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|(&(i, j), x)| ((j, i), x.clone())).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (&(i, j), x) in &self.entries {
            d[i][j] = x.clone();
        }
        d
    }

    /// Column lists `(row, value)`.
    pub fn columns(&self) -> Vec<Vec<(usize, BigInt)>> {
        let mut c = vec![Vec::new(); self.cols];
        for (&(i, j), x) in &self.entries {
            c[j].push((i, x.clone()));
        }
        c
    }

    pub fn mul(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Domain(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut rows_of: Vec<Vec<(usize, &BigInt)>> = vec![Vec::new(); self.cols];
        for (&(i, k), x) in &self.entries {
            rows_of[k].push((i, x));
        }
        let mut out = SparseIntMatrix::zeros(self.rows, other.cols);
        for (&(k, j), y) in &other.entries {
            for &(i, x) in &rows_of[k] {
                out.add(i, j, &(x * y));
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.rows];
        for (&(i, j), x) in &self.entries {
            if !v[j].is_zero() {
                out[i] += x * &v[j];
            }
        }
        out
    }

    pub fn scale(&self, s: &BigInt) -> SparseIntMatrix {
        let mut m = Self::zeros(self.rows, self.cols);
        for (&(i, j), x) in &self.entries {
            m.set(i, j, x * s);
        }
        m
    }

    pub fn sub(&self, other: &SparseIntMatrix) -> SparseIntMatrix {
        let mut m = self.clone();
        for (&(i, j), x) in &other.entries {
            m.add(i, j, &-x);
        }
        m
    }

    /// Reduces every entry into `[0, p)`.
    pub fn reduce_mod(&self, p: u64) -> SparseIntMatrix {
        let pb = BigInt::from(p);
        let mut m = Self::zeros(self.rows, self.cols);
        for (&(i, j), x) in &self.entries {
            let mut r = x % &pb;
            if r < BigInt::zero() {
                r += &pb;
            }
            m.set(i, j, r);
        }
        m
    }

    /// Places `block` with its top-left corner at `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &[Vec<i64>], scale: i64) {
        for (i, row) in block.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                if x != 0 {
                    self.add(r0 + i, c0 + j, &BigInt::from(x * scale));
                }
            }
        }
    }

    /// Entries as `i64`; errors on overflow.
    pub fn entries_i64(&self) -> Result<Vec<(usize, usize, i64)>> {
        self.entries
            .iter()
            .map(|(&(i, j), x)| x.to_i64().map(|v| (i, j, v)).ok_or_else(|| Error::Capacity("entry exceeds i64".into())))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Triplets {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, String)>,
}

impl Serialize for SparseIntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Triplets {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|(&(i, j), x)| (i, j, x.to_string())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseIntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let t = Triplets::deserialize(d)?;
        let mut trip = Vec::new();
        for (i, j, x) in t.entries {
            let v: BigInt = x.parse().map_err(serde::de::Error::custom)?;
            trip.push((i, j, v));
        }
        SparseIntMatrix::from_triplets(t.rows, t.cols, trip).map_err(serde::de::Error::custom)
    }
}
