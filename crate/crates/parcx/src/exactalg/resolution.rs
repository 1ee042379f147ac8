use std::collections::HashMap;

use super::fp::{fp_nullspace, fp_rank, FpSubspace};
use super::matrix::SparseIntMatrix;
use crate::error::{check_cap, Error, Result};
use crate::permgroups::{check_prime, PermGroup, Permutation};

/// Multiplication table of a small permutation group.
#[derive(Clone, Debug)]
pub struct GroupTable {
    pub group: PermGroup,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    index: HashMap<Permutation, usize>,
}

impl GroupTable {
    pub fn new(group: &PermGroup) -> Result<Self> {
        check_cap("group order for a multiplication table", group.order(), 1440)?;
        let elems = group.elements();
        let index: HashMap<Permutation, usize> = elems.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let mul = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&a.compose(b)]).collect())
            .collect();
        let inv = elems.iter().map(|a| index[&a.inverse()]).collect();
        let identity = index[&group.identity()];
        Ok(GroupTable { group: group.clone(), mul, inv, identity, index })
    }

    pub fn order(&self) -> usize {
        self.inv.len()
    }
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a][b]
    }
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }
    pub fn identity(&self) -> usize {
        self.identity
    }
    pub fn element(&self, i: usize) -> &Permutation {
        &self.group.elements()[i]
    }
    pub fn index_of(&self, g: &Permutation) -> Option<usize> {
        self.index.get(g).copied()
    }
}

/// One term `λ·h·e_b` of a boundary in a free `F_p[H]`-complex.
pub type AlgebraTerm = (usize, usize, u64);

/// A complex of finitely generated free `F_p[H]`-modules augmented to `F_p`.
///
/// Vectors in degree `i` are dense of length `ranks[i]·|H|`, indexed by
/// `b·|H| + h` for the element `h·e_b`.
#[derive(Clone, Debug)]
pub struct FreeComplex {
    pub p: u64,
    pub table: GroupTable,
    pub ranks: Vec<usize>,
    /// `boundary[i][s]` lists the terms of `∂e_s` for `i ≥ 1`; `boundary[0]` is empty.
    pub boundary: Vec<Vec<Vec<AlgebraTerm>>>,
}

impl FreeComplex {
    pub fn length(&self) -> usize {
        self.ranks.len() - 1
    }

    pub fn dim(&self, i: usize) -> usize {
        self.ranks.get(i).copied().unwrap_or(0) * self.table.order()
    }

    /// `g·x` for a vector in degree `i`.
    pub fn act(&self, g: usize, x: &[u64]) -> Vec<u64> {
        let n = self.table.order();
        let mut out = vec![0u64; x.len()];
        for (idx, &v) in x.iter().enumerate() {
            if v != 0 {
                let (b, h) = (idx / n, idx % n);
                out[b * n + self.table.mul(g, h)] = v;
            }
        }
        out
    }

    /// `∂x` for `x` in degree `i ≥ 1`, or the augmentation for `i = 0`.
    pub fn apply_boundary(&self, i: usize, x: &[u64]) -> Vec<u64> {
        let p = self.p;
        let n = self.table.order();
        if i == 0 {
            let s = x.iter().fold(0u64, |a, &v| (a + v) % p);
            return vec![s];
        }
        let mut out = vec![0u64; self.dim(i - 1)];
        for (idx, &v) in x.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (s, g) = (idx / n, idx % n);
            for &(b, h, l) in &self.boundary[i][s] {
                let t = b * n + self.table.mul(g, h);
                out[t] = (out[t] + v * l) % p;
            }
        }
        out
    }

    /// `∂_i` (or the augmentation) as an `F_p`-matrix with integer entries.
    pub fn boundary_matrix(&self, i: usize) -> SparseIntMatrix {
        let rows = if i == 0 { 1 } else { self.dim(i - 1) };
        let mut m = SparseIntMatrix::zeros(rows, self.dim(i));
        for c in 0..self.dim(i) {
            let mut e = vec![0u64; self.dim(i)];
            e[c] = 1;
            for (r, v) in self.apply_boundary(i, &e).into_iter().enumerate() {
                if v != 0 {
                    m.set(r, c, v.into());
                }
            }
        }
        m
    }

    /// Checks `∂∂ = 0` and exactness of the augmented complex below the top.
    pub fn check_exact(&self) -> Result<()> {
        let p = self.p;
        for i in 0..self.length() {
            let inc = self.boundary_matrix(i + 1);
            let out = self.boundary_matrix(i);
            let prod = out.mul(&inc)?.reduce_mod(p);
            if !prod.is_zero() {
                return Err(Error::Integrity(format!("resolution boundary composite nonzero at {i}")));
            }
            let ker = self.dim(i) - fp_rank(&out, p);
            if fp_rank(&inc, p) != ker {
                return Err(Error::Integrity(format!("resolution not exact in degree {i}")));
            }
        }
        if fp_rank(&self.boundary_matrix(0), p) != 1 {
            return Err(Error::Integrity("augmentation is not onto".into()));
        }
        Ok(())
    }

    /// The restriction to a subgroup `H`, free on `{t·e_b}` for right coset
    /// representatives `t` with `K = ⊔ H·t`.
    pub fn restrict(&self, sub: &PermGroup) -> Result<Restriction> {
        let big = &self.table;
        let subt = GroupTable::new(sub)?;
        let mut reps: Vec<usize> = Vec::new();
        let mut decomp: Vec<Option<(usize, usize)>> = vec![None; big.order()];
        for k in 0..big.order() {
            if decomp[k].is_some() {
                continue;
            }
            let j = reps.len();
            reps.push(k);
            for h in 0..subt.order() {
                let hi = big.index_of(subt.element(h)).ok_or_else(|| Error::Containment("subgroup is not contained in the group".into()))?;
                decomp[big.mul(hi, k)] = Some((h, j));
            }
        }
        let decomp: Vec<(usize, usize)> = decomp.into_iter().map(|d| d.expect("cosets cover")).collect();
        let m = reps.len();
        let mut boundary = vec![Vec::new()];
        for i in 1..self.ranks.len() {
            let mut deg = Vec::new();
            for b in 0..self.ranks[i] {
                for &t in &reps {
                    let terms = self.boundary[i][b]
                        .iter()
                        .map(|&(c, k, l)| {
                            let (h, j) = decomp[big.mul(t, k)];
                            (c * m + j, h, l)
                        })
                        .collect();
                    deg.push(terms);
                }
            }
            boundary.push(deg);
        }
        let complex = FreeComplex {
            p: self.p,
            table: subt,
            ranks: self.ranks.iter().map(|r| r * m).collect(),
            boundary,
        };
        Ok(Restriction { complex, reps, decomp })
    }
}

/// A free complex viewed over a subgroup.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub complex: FreeComplex,
    /// Right coset representatives, as indices in the big group.
    pub reps: Vec<usize>,
    /// `k = h·reps[j]` for every element `k` of the big group.
    pub decomp: Vec<(usize, usize)>,
}

/// Free resolution of `F_p` over `F_p[H]`, built by greedy sifting of kernel
/// vectors.
pub fn free_resolution_over_group_algebra(h: &PermGroup, p: u64, length: usize) -> Result<FreeComplex> {
    check_prime(p as usize)?;
    check_cap("group order for a resolution", h.order(), 24)?;
    check_cap("resolution length", length, 10)?;
    let table = GroupTable::new(h)?;
    let mut c = FreeComplex { p, table, ranks: vec![1], boundary: vec![Vec::new()] };
    for i in 0..length {
        let out = c.boundary_matrix(i);
        let n_in = c.dim(i);
        let rows: Vec<Vec<u64>> = (0..out.rows())
            .map(|r| (0..n_in).map(|col| super::fp::big_mod(&out.get(r, col), p)).collect())
            .collect();
        let kernel = fp_nullspace(&rows, n_in, p);
        let mut span = FpSubspace::new(n_in, p);
        let mut gens: Vec<Vec<AlgebraTerm>> = Vec::new();
        let n = c.table.order();
        let mut sorted = kernel;
        sorted.sort_by_key(|v| v.iter().filter(|&&x| x != 0).count());
        for z in sorted {
            if span.contains(&z) {
                continue;
            }
            for g in 0..n {
                span.insert(&c.act(g, &z));
            }
            gens.push(
                z.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(|(idx, &v)| (idx / n, idx % n, v))
                    .collect(),
            );
        }
        c.ranks.push(gens.len());
        c.boundary.push(gens);
    }
    Ok(c)
}

/// A chain map between free complexes covering the identity of `F_p`,
/// semilinear along a group homomorphism.
#[derive(Clone, Debug)]
pub struct ChainLift {
    /// `images[i][s]` is the image of the source generator `e_s` in degree `i`.
    pub images: Vec<Vec<Vec<u64>>>,
    /// Source group index ↦ target group index.
    pub alpha: Vec<usize>,
}

impl ChainLift {
    /// Image of an arbitrary source vector in degree `i`.
    pub fn apply(&self, src: &FreeComplex, dst: &FreeComplex, i: usize, x: &[u64]) -> Vec<u64> {
        let p = dst.p;
        let n = src.table.order();
        let mut out = vec![0u64; dst.dim(i)];
        for (idx, &v) in x.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let (s, h) = (idx / n, idx % n);
            let moved = dst.act(self.alpha[h], &self.images[i][s]);
            for (o, m) in out.iter_mut().zip(moved) {
                if m != 0 {
                    *o = (*o + v * m) % p;
                }
            }
        }
        out
    }
}

/// Lifts the identity of `F_p` to a chain map `src → dst` through degree
/// `top`, semilinear along `alpha`.
pub fn lift(src: &FreeComplex, dst: &FreeComplex, alpha: &[usize], top: usize) -> Result<ChainLift> {
    if src.p != dst.p {
        return Err(Error::Domain("complexes are over different primes".into()));
    }
    if top > src.length() || top > dst.length() {
        return Err(Error::Domain("lift requested beyond the resolution length".into()));
    }
    let mut lift = ChainLift { images: Vec::new(), alpha: alpha.to_vec() };
    let mut e0 = vec![0u64; dst.dim(0)];
    e0[dst.table.identity()] = 1;
    lift.images.push(vec![e0; src.ranks[0]]);
    for i in 1..=top {
        let mut span = FpSubspace::new(dst.dim(i - 1), dst.p);
        let mut cols = Vec::new();
        for c in 0..dst.dim(i) {
            let mut e = vec![0u64; dst.dim(i)];
            e[c] = 1;
            if span.insert(&dst.apply_boundary(i, &e)) {
                cols.push(c);
            }
        }
        let mut imgs = Vec::new();
        for s in 0..src.ranks[i] {
            let mut es = vec![0u64; src.dim(i)];
            es[s * src.table.order() + src.table.identity()] = 1;
            let y = lift.apply(src, dst, i - 1, &src.apply_boundary(i, &es));
            let (res, coeff) = span.reduce(&y);
            if res.iter().any(|&v| v != 0) {
                return Err(Error::Integrity(format!("target complex is not exact in degree {}", i - 1)));
            }
            let mut x = vec![0u64; dst.dim(i)];
            for (k, &cf) in coeff.iter().enumerate() {
                x[cols[k]] = cf;
            }
            imgs.push(x);
        }
        lift.images.push(imgs);
    }
    Ok(lift)
}
