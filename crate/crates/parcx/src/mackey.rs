//! Coefficient systems and Mackey functors on the orbit category of a finite
//! permutation group.
//!
//! Every value is a free module (`Z^r`, `Z_(p)^r` or `F_p^r`) and every map is
//! an integer [`Mat`] whose rows index the target. Maps attached to subgroups
//! follow one convention throughout:
//!
//! * [`MackeyFunctor::transfer`] is covariant along the projection `G/H → G/K`;
//! * [`MackeyFunctor::restriction`] is contravariant along the same projection;
//! * [`MackeyFunctor::conjugation`] is covariant along `xH ↦ xg⁻¹·(gHg⁻¹)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::complexes::element_tables;
use crate::error::{check_cap, Error, Result};
use crate::exactalg::{
    fp_nullspace, fp_rank, free_resolution_over_group_algebra, integer_kernel, FpHomologyBasis, invariant_factors, lift,
    smith_normal_form, solve_integer, FGAbGroup, FpSubspace, FreeComplex, GroupRingModule, Ring, SmithForm,
    SparseIntMatrix,
};
use crate::permgroups::{
    centralizer, check_prime, classify_action, kernel_to_pi0_real_centralizer, odd_involutions, p_subgroup_classes,
    subgroup_classes, symmetric_group, PermGroup, Permutation,
};
use crate::verify::VerificationReport;

/// Dense integer matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

fn reduce_entry(x: i64, m: u64) -> i64 {
    if m == 0 {
        x
    } else {
        x.rem_euclid(m as i64)
    }
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, r: &[Vec<i64>]) -> Result<Self> {
        if r.len() != rows || r.iter().any(|x| x.len() != cols) {
            return Err(Error::Domain("matrix rows have the wrong shape".into()));
        }
        Ok(Mat { rows, cols, data: r.concat() })
    }

    /// Builds a matrix from its columns, each of length `rows`.
    pub fn from_columns(rows: usize, cols: &[Vec<i64>]) -> Self {
        let mut m = Mat::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.data[i * m.cols + j] = x;
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: i64) {
        self.data[i * self.cols + j] = x;
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.data.chunks(self.cols).map(|c| c.to_vec()).collect()
    }

    pub fn to_sparse(&self) -> SparseIntMatrix {
        let t = (0..self.rows)
            .flat_map(|i| (0..self.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) != 0)
            .map(|(i, j)| (i, j, BigInt::from(self.get(i, j))));
        SparseIntMatrix::from_triplets(self.rows, self.cols, t).expect("indices in range")
    }

    /// Entries reduced into `[0, m)`; `m = 0` leaves them alone.
    pub fn reduced(&self, m: u64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| reduce_entry(x, m)).collect() }
    }

    pub fn mul(&self, other: &Mat, m: u64) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::Domain(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let x = self.get(i, l) as i128;
                if x == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let y = other.get(l, j) as i128;
                    if y != 0 {
                        let v = out.data[i * out.cols + j] as i128 + x * y;
                        let v = if m == 0 { v } else { v.rem_euclid(m as i128) };
                        out.data[i * out.cols + j] = i64::try_from(v).map_err(|_| Error::Capacity("matrix entry overflow".into()))?;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Mat, m: u64) -> Result<Mat> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Domain("cannot add matrices of different shapes".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| reduce_entry(a + b, m)).collect();
        Ok(Mat { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: i64, m: u64) -> Mat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| reduce_entry(x * s, m)).collect() }
    }

    /// Equality after reducing both sides mod `m`.
    pub fn eq_mod(&self, other: &Mat, m: u64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.reduced(m).data == other.reduced(m).data
    }

    pub fn is_identity_mod(&self, m: u64) -> bool {
        self.rows == self.cols && self.eq_mod(&Mat::identity(self.rows), m)
    }

    /// Places `block` with its top-left corner at `(r0, c0)`, adding to what is there.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &Mat, m: u64) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                let k = (r0 + i) * self.cols + c0 + j;
                self.data[k] = reduce_entry(self.data[k] + block.get(i, j), m);
            }
        }
    }
}

/// Invertibility over `Z_(p)` (or `F_p`) when `p` is given, over `Z` otherwise.
pub fn is_invertible(a: &Mat, p: Option<u64>) -> bool {
    if a.rows != a.cols {
        return false;
    }
    if a.rows == 0 {
        return true;
    }
    match p {
        Some(p) => fp_rank(&a.reduced(p).to_sparse(), p) == a.rows,
        None => {
            let f = invariant_factors(&a.to_sparse());
            f.len() == a.rows && f.iter().all(|x| x == &BigInt::from(1) || x == &BigInt::from(-1))
        }
    }
}

/// Mackey functor (or plain coefficient system) on the orbits of a group,
/// possibly graded by an internal degree `b`.
pub trait MackeyFunctor: Send + Sync {
    fn name(&self) -> String;
    fn group(&self) -> &PermGroup;
    fn ring(&self) -> Ring;
    /// Prime at which integral values are reported.
    fn prime(&self) -> Option<u64>;
    /// Number of internal degrees.
    fn degrees(&self) -> usize {
        1
    }
    fn rank(&self, h: &PermGroup, b: usize) -> Result<usize>;
    /// Covariant map `Γ(G/H) → Γ(G/K)` along the projection, `H ≤ K`.
    fn transfer(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat>;
    /// Contravariant map `Γ(G/K) → Γ(G/H)` along the projection, `H ≤ K`.
    fn restriction(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat>;
    /// `Γ(G/H) → Γ(G/gHg⁻¹)`.
    fn conjugation(&self, h: &PermGroup, g: &Permutation, b: usize) -> Result<Mat>;
}

pub fn modulus(g: &dyn MackeyFunctor) -> u64 {
    g.ring().characteristic()
}

/// Prime used when deciding invertibility: the field characteristic or the
/// reporting prime.
pub fn local_prime(g: &dyn MackeyFunctor) -> Option<u64> {
    match g.ring() {
        Ring::Fp(p) => Some(p),
        Ring::Integers => g.prime(),
    }
}

pub fn value(g: &dyn MackeyFunctor, h: &PermGroup, b: usize) -> Result<FGAbGroup> {
    let r = g.rank(h, b)?;
    Ok(match g.ring() {
        Ring::Fp(p) => FGAbGroup::fp(p, r),
        Ring::Integers => FGAbGroup { rank: r, torsion: vec![], prime: g.prime() },
    })
}

fn check_sub(h: &PermGroup, k: &PermGroup) -> Result<()> {
    if h.is_subgroup_of(k) {
        Ok(())
    } else {
        Err(Error::Containment(format!("{h} is not contained in {k}")))
    }
}

fn check_member(g: &PermGroup, x: &Permutation) -> Result<()> {
    if g.contains(x) {
        Ok(())
    } else {
        Err(Error::Containment(format!("{x} is not in {g}")))
    }
}

/// Covariant map along `G/H → G/K`, `xH ↦ xwK`, where `w⁻¹Hw ≤ K`.
pub fn orbit_covariant(g: &dyn MackeyFunctor, h: &PermGroup, k: &PermGroup, w: &Permutation, b: usize) -> Result<Mat> {
    let wi = w.inverse();
    let h2 = h.conjugate(&wi);
    check_sub(&h2, k)?;
    let c = g.conjugation(h, &wi, b)?;
    g.transfer(&h2, k, b)?.mul(&c, modulus(g))
}

/// Contravariant map along `G/H → G/K`, `xH ↦ xwK`, where `w⁻¹Hw ≤ K`.
pub fn orbit_contravariant(g: &dyn MackeyFunctor, h: &PermGroup, k: &PermGroup, w: &Permutation, b: usize) -> Result<Mat> {
    let wi = w.inverse();
    let h2 = h.conjugate(&wi);
    check_sub(&h2, k)?;
    let r = g.restriction(&h2, k, b)?;
    g.conjugation(&h2, w, b)?.mul(&r, modulus(g))
}

/// The system with value `R^rank` everywhere and identity maps. It is a
/// coefficient system but usually not a Mackey functor.
#[derive(Clone, Debug)]
pub struct ConstantSystem {
    group: PermGroup,
    ring: Ring,
    prime: Option<u64>,
    rank: usize,
}

impl ConstantSystem {
    pub fn new(group: PermGroup, ring: Ring, prime: Option<u64>, rank: usize) -> Self {
        ConstantSystem { group, ring, prime, rank }
    }
}

impl MackeyFunctor for ConstantSystem {
    fn name(&self) -> String {
        "constant".into()
    }
    fn group(&self) -> &PermGroup {
        &self.group
    }
    fn ring(&self) -> Ring {
        self.ring
    }
    fn prime(&self) -> Option<u64> {
        self.prime
    }
    fn rank(&self, h: &PermGroup, _b: usize) -> Result<usize> {
        check_sub(h, &self.group)?;
        Ok(self.rank)
    }
    fn transfer(&self, h: &PermGroup, k: &PermGroup, _b: usize) -> Result<Mat> {
        check_sub(h, k)?;
        check_sub(k, &self.group)?;
        Ok(Mat::identity(self.rank))
    }
    fn restriction(&self, h: &PermGroup, k: &PermGroup, _b: usize) -> Result<Mat> {
        check_sub(h, k)?;
        check_sub(k, &self.group)?;
        Ok(Mat::identity(self.rank))
    }
    fn conjugation(&self, h: &PermGroup, g: &Permutation, _b: usize) -> Result<Mat> {
        check_sub(h, &self.group)?;
        check_member(&self.group, g)?;
        Ok(Mat::identity(self.rank))
    }
}

enum Solver {
    Integral(SmithForm),
    Modular(FpSubspace),
}

struct Invariants {
    basis: Vec<Vec<i64>>,
    solver: Solver,
}

impl Invariants {
    fn coords(&self, v: &[i64]) -> Result<Vec<i64>> {
        match &self.solver {
            Solver::Integral(sf) => {
                let b: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                let x = solve_integer(sf, &b).ok_or_else(|| Error::Integrity("vector is not an invariant".into()))?;
                x.iter()
                    .map(|y| y.to_i64().ok_or_else(|| Error::Capacity("coordinate overflow".into())))
                    .collect()
            }
            Solver::Modular(s) => {
                let w: Vec<u64> = v.iter().map(|&x| reduce_entry(x, s.prime()) as u64).collect();
                let (res, c) = s.reduce(&w);
                if res.iter().any(|&x| x != 0) {
                    return Err(Error::Integrity("vector is not an invariant".into()));
                }
                Ok(c.into_iter().map(|x| x as i64).collect())
            }
        }
    }
}

/// `H ↦ M^H` for a module `M` over the group ring.
pub struct FixedPointFunctor {
    module: GroupRingModule,
    label: String,
    cache: Mutex<HashMap<PermGroup, Arc<Invariants>>>,
}

impl FixedPointFunctor {
    pub fn new(module: GroupRingModule, label: &str) -> Self {
        FixedPointFunctor { module, label: label.to_string(), cache: Mutex::new(HashMap::new()) }
    }

    pub fn module(&self) -> &GroupRingModule {
        &self.module
    }

    fn invariants(&self, h: &PermGroup) -> Result<Arc<Invariants>> {
        if let Some(x) = self.cache.lock().expect("cache lock").get(h) {
            return Ok(x.clone());
        }
        check_sub(h, &self.module.group)?;
        let r = self.module.rank;
        let mut rows: Vec<Vec<i64>> = Vec::new();
        for x in h.generators() {
            let m = self.module.matrix(x)?;
            for (i, row) in m.iter().enumerate() {
                rows.push(row.iter().enumerate().map(|(j, &v)| v - i64::from(i == j)).collect());
            }
        }
        let ch = self.module.characteristic;
        let inv = if ch == 0 {
            let a = Mat::from_rows(rows.len(), r, &rows)?.to_sparse();
            let basis: Vec<Vec<i64>> = integer_kernel(&a)
                .into_iter()
                .map(|c| c.iter().map(|x| x.to_i64().ok_or_else(|| Error::Capacity("invariant overflow".into()))).collect())
                .collect::<Result<_>>()?;
            let b = Mat::from_columns(r, &basis).to_sparse();
            Invariants { basis, solver: Solver::Integral(smith_normal_form(&b)) }
        } else {
            let fr: Vec<Vec<u64>> = rows.iter().map(|row| row.iter().map(|&x| reduce_entry(x, ch) as u64).collect()).collect();
            let ns = fp_nullspace(&fr, r, ch);
            let mut s = FpSubspace::new(r, ch);
            for v in &ns {
                s.insert(v);
            }
            let basis = ns.into_iter().map(|v| v.into_iter().map(|x| x as i64).collect()).collect();
            Invariants { basis, solver: Solver::Modular(s) }
        };
        let inv = Arc::new(inv);
        self.cache.lock().expect("cache lock").insert(h.clone(), inv.clone());
        Ok(inv)
    }

    fn act(&self, g: &Permutation, v: &[i64]) -> Result<Vec<i64>> {
        let m = self.module.matrix(g)?;
        Ok(m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }
}

impl MackeyFunctor for FixedPointFunctor {
    fn name(&self) -> String {
        format!("fixed-points({})", self.label)
    }
    fn group(&self) -> &PermGroup {
        &self.module.group
    }
    fn ring(&self) -> Ring {
        match self.module.characteristic {
            0 => Ring::Integers,
            p => Ring::Fp(p),
        }
    }
    fn prime(&self) -> Option<u64> {
        match self.module.characteristic {
            0 => self.module.prime,
            p => Some(p),
        }
    }
    fn rank(&self, h: &PermGroup, _b: usize) -> Result<usize> {
        Ok(self.invariants(h)?.basis.len())
    }
    fn transfer(&self, h: &PermGroup, k: &PermGroup, _b: usize) -> Result<Mat> {
        check_sub(h, k)?;
        let (ih, ik) = (self.invariants(h)?, self.invariants(k)?);
        let reps = k.left_coset_reps(h);
        let mut cols = Vec::new();
        for m in &ih.basis {
            let mut v = vec![0i64; self.module.rank];
            for t in &reps {
                for (a, b) in v.iter_mut().zip(self.act(t, m)?) {
                    *a += b;
                }
            }
            cols.push(ik.coords(&v)?);
        }
        Ok(Mat::from_columns(ik.basis.len(), &cols).reduced(self.module.characteristic))
    }
    fn restriction(&self, h: &PermGroup, k: &PermGroup, _b: usize) -> Result<Mat> {
        check_sub(h, k)?;
        let (ih, ik) = (self.invariants(h)?, self.invariants(k)?);
        let cols: Vec<Vec<i64>> = ik.basis.iter().map(|m| ih.coords(m)).collect::<Result<_>>()?;
        Ok(Mat::from_columns(ih.basis.len(), &cols).reduced(self.module.characteristic))
    }
    fn conjugation(&self, h: &PermGroup, g: &Permutation, _b: usize) -> Result<Mat> {
        check_member(&self.module.group, g)?;
        let h2 = h.conjugate(g);
        let (ih, ih2) = (self.invariants(h)?, self.invariants(&h2)?);
        let cols: Vec<Vec<i64>> = ih.basis.iter().map(|m| ih2.coords(&self.act(g, m)?)).collect::<Result<_>>()?;
        Ok(Mat::from_columns(ih2.basis.len(), &cols).reduced(self.module.characteristic))
    }
}

/// Oriented simplices of the boundary of the signed cross-polytope in
/// `(R^j)^n`, including the empty simplex. Degree is the number of vertices,
/// so the complex computes the reduced homology of `S^{nj}`.
struct SignedCells {
    by_degree: Vec<Vec<Vec<u8>>>,
    offset: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    degree_of: Vec<usize>,
}

impl SignedCells {
    fn new(n: usize, j: usize) -> Self {
        let m = n * j;
        let mut by_degree: Vec<Vec<Vec<u8>>> = vec![Vec::new(); m + 1];
        for mask in 0u32..1 << m {
            let pos: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            for signs in 0u32..1 << pos.len() {
                let cell: Vec<u8> = pos.iter().enumerate().map(|(r, &x)| (2 * x + (signs >> r & 1) as usize) as u8).collect();
                by_degree[pos.len()].push(cell);
            }
        }
        let mut offset = Vec::new();
        let mut index = HashMap::new();
        let mut degree_of = Vec::new();
        for (d, cells) in by_degree.iter_mut().enumerate() {
            cells.sort();
            offset.push(degree_of.len());
            for c in cells.iter() {
                index.insert(c.clone(), degree_of.len());
                degree_of.push(d);
            }
        }
        SignedCells { by_degree, offset, index, degree_of }
    }

    fn count(&self, d: usize) -> usize {
        self.by_degree.get(d).map_or(0, |c| c.len())
    }

    fn total(&self) -> usize {
        self.degree_of.len()
    }

    fn local(&self, gid: usize) -> usize {
        gid - self.offset[self.degree_of[gid]]
    }

    fn cell(&self, gid: usize) -> &Vec<u8> {
        &self.by_degree[self.degree_of[gid]][self.local(gid)]
    }

    /// `(negated, image)` for the permutation `g` of the coordinate blocks.
    fn act(&self, g: &Permutation, j: usize, gid: usize) -> (bool, usize) {
        let c = self.cell(gid);
        let img: Vec<u8> = c
            .iter()
            .map(|&v| {
                let (pos, s) = (v as usize / 2, v as usize % 2);
                let (i, t) = (pos / j, pos % j);
                (2 * (g.apply(i) * j + t) + s) as u8
            })
            .collect();
        let mut inv = 0;
        for a in 0..img.len() {
            for b in a + 1..img.len() {
                if img[a] > img[b] {
                    inv += 1;
                }
            }
        }
        let mut sorted = img;
        sorted.sort_unstable();
        (inv % 2 == 1, self.index[&sorted])
    }

    /// Faces of a cell with signs `(−1)^r`.
    fn boundary(&self, gid: usize) -> Vec<(bool, usize)> {
        let c = self.cell(gid);
        (0..c.len())
            .map(|r| {
                let mut f = c.clone();
                f.remove(r);
                (r % 2 == 1, self.index[&f])
            })
            .collect()
    }
}

/// Chains of the reduced Borel construction for one subgroup.
struct BorelData {
    res: FreeComplex,
    /// Subgroup element index ↦ index in the ambient symmetric group.
    to_g: Vec<usize>,
    /// `blocks[t]` lists `(i, start, ncells)` for resolution degree `i`.
    blocks: Vec<Vec<(usize, usize, usize)>>,
    dims: Vec<usize>,
    bases: Vec<FpHomologyBasis>,
}

impl BorelData {
    /// Start of the block of resolution degree `i`; empty blocks are absent.
    fn start(&self, t: usize, i: usize) -> usize {
        self.blocks[t].iter().find(|x| x.0 == i).map_or(0, |x| x.1)
    }

    /// `(i, a, cell local index)` of a basis vector in degree `t`.
    fn decode(&self, t: usize, idx: usize) -> (usize, usize, usize) {
        let &(i, start, nc) = self.blocks[t].iter().rev().find(|x| x.1 <= idx).expect("index in range");
        let off = idx - start;
        (i, off / nc, off % nc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum MapKey {
    Transfer(PermGroup, PermGroup),
    Restriction(PermGroup, PermGroup),
    Conjugation(PermGroup, Permutation),
}

/// Mod-`p` homology of the reduced Borel construction of `S^{nj}` with its
/// coordinate-permuting action, as a graded Mackey functor for `Σ_n`.
pub struct BorelFunctor {
    n: usize,
    p: u64,
    j: usize,
    bmax: usize,
    group: PermGroup,
    cells: SignedCells,
    gindex: HashMap<Permutation, usize>,
    /// `cell_act[g][c]`: `(negated, image)`.
    cell_act: Vec<Vec<(bool, usize)>>,
    data: Mutex<HashMap<PermGroup, Arc<BorelData>>>,
    maps: Mutex<HashMap<MapKey, Arc<Vec<Mat>>>>,
}

impl BorelFunctor {
    pub fn new(n: usize, p: u64, j: usize, bmax: usize) -> Result<Self> {
        check_prime(p as usize)?;
        check_cap("n", n, 4)?;
        check_cap("j", j, 1)?;
        check_cap("bmax", bmax, 8)?;
        if n == 0 || j == 0 {
            return Err(Error::Domain("n and j must be positive".into()));
        }
        if p != 2 && j % 2 == 0 {
            return Err(Error::Domain("j must be odd when p is odd".into()));
        }
        let group = symmetric_group(n)?;
        let cells = SignedCells::new(n, j);
        let gindex: HashMap<Permutation, usize> = group.elements().iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
        let cell_act = group.elements().iter().map(|g| (0..cells.total()).map(|c| cells.act(g, j, c)).collect()).collect();
        Ok(BorelFunctor {
            n,
            p,
            j,
            bmax,
            group,
            cells,
            gindex,
            cell_act,
            data: Mutex::new(HashMap::new()),
            maps: Mutex::new(HashMap::new()),
        })
    }

    pub fn parameters(&self) -> (usize, u64, usize, usize) {
        (self.n, self.p, self.j, self.bmax)
    }

    fn data(&self, h: &PermGroup) -> Result<Arc<BorelData>> {
        if let Some(d) = self.data.lock().expect("cache lock").get(h) {
            return Ok(d.clone());
        }
        check_sub(h, &self.group)?;
        let d = Arc::new(self.build(h)?);
        self.data.lock().expect("cache lock").insert(h.clone(), d.clone());
        Ok(d)
    }

    fn build(&self, h: &PermGroup) -> Result<BorelData> {
        let p = self.p;
        let top = self.bmax + 1;
        let res = free_resolution_over_group_algebra(h, p, top)?;
        let to_g: Vec<usize> = h.elements().iter().map(|x| self.gindex[x]).collect();
        let mut blocks = Vec::new();
        let mut dims = Vec::new();
        for t in 0..=top {
            let mut bl = Vec::new();
            let mut start = 0;
            for i in 0..=t.min(top) {
                let nc = self.cells.count(t - i);
                if nc == 0 || res.ranks[i] == 0 {
                    continue;
                }
                bl.push((i, start, nc));
                start += res.ranks[i] * nc;
            }
            blocks.push(bl);
            dims.push(start);
        }
        let tab = &res.table;
        let mut diffs: Vec<Vec<Vec<u64>>> = vec![Vec::new()];
        for t in 1..=top {
            let mut rows = vec![vec![0u64; dims[t]]; dims[t - 1]];
            for &(i, start, nc) in &blocks[t] {
                let deg = t - i;
                for a in 0..res.ranks[i] {
                    for cl in 0..nc {
                        let col = start + a * nc + cl;
                        let gc = self.cells.offset[deg] + cl;
                        if i >= 1 {
                            for &(bb, hh, lam) in &res.boundary[i][a] {
                                let g = to_g[tab.inv(hh)];
                                let (neg, c2) = self.cell_act[g][gc];
                                let n2 = self.cells.count(deg);
                                let row = blocks[t - 1].iter().find(|x| x.0 == i - 1).expect("block").1
                                    + bb * n2
                                    + self.cells.local(c2);
                                let v = if neg { (p - lam % p) % p } else { lam % p };
                                rows[row][col] = (rows[row][col] + v) % p;
                            }
                        }
                        if deg >= 1 {
                            let n2 = self.cells.count(deg - 1);
                            let s0 = blocks[t - 1].iter().find(|x| x.0 == i).expect("block").1;
                            for (neg, f) in self.cells.boundary(gc) {
                                let row = s0 + a * n2 + self.cells.local(f);
                                let v = if neg ^ (i % 2 == 1) { p - 1 } else { 1 };
                                rows[row][col] = (rows[row][col] + v) % p;
                            }
                        }
                    }
                }
            }
            diffs.push(rows);
        }
        let bases = (0..=self.bmax)
            .map(|b| FpHomologyBasis::new(&diffs[b], &diffs[b + 1], dims[b], p))
            .collect();
        Ok(BorelData { res, to_g, blocks, dims, bases })
    }

    /// Matrices in every degree of the map induced by a chain map given on
    /// basis vectors.
    fn induced(
        &self,
        src: &BorelData,
        dst: &BorelData,
        image: impl Fn(usize, usize, usize, usize) -> Vec<(usize, u64)>,
    ) -> Result<Vec<Mat>> {
        let p = self.p;
        let mut out = Vec::new();
        for b in 0..=self.bmax {
            let mut cols = Vec::new();
            for z in src.bases[b].reps() {
                let mut y = vec![0u64; dst.dims[b]];
                for (idx, &v) in z.iter().enumerate() {
                    if v == 0 {
                        continue;
                    }
                    let (i, a, cl) = src.decode(b, idx);
                    for (k, w) in image(b, i, a, cl) {
                        y[k] = (y[k] + v * w) % p;
                    }
                }
                cols.push(dst.bases[b].coords(&y)?.into_iter().map(|x| x as i64).collect());
            }
            out.push(Mat::from_columns(dst.bases[b].dim(), &cols));
        }
        Ok(out)
    }

    fn signed(&self, neg: bool, v: u64) -> u64 {
        if neg {
            (self.p - v % self.p) % self.p
        } else {
            v % self.p
        }
    }

    fn cached(&self, key: MapKey, b: usize, f: impl FnOnce() -> Result<Vec<Mat>>) -> Result<Mat> {
        if b > self.bmax {
            return Err(Error::Domain(format!("degree {b} is outside the computed window")));
        }
        if let Some(m) = self.maps.lock().expect("cache lock").get(&key) {
            return Ok(m[b].clone());
        }
        let m = Arc::new(f()?);
        self.maps.lock().expect("cache lock").insert(key, m.clone());
        Ok(m[b].clone())
    }

    fn compute_transfer(&self, h: &PermGroup, k: &PermGroup) -> Result<Vec<Mat>> {
        let (dh, dk) = (self.data(h)?, self.data(k)?);
        let alpha: Vec<usize> = h.elements().iter().map(|x| dk.res.table.index_of(x).expect("subgroup")).collect();
        let phi = lift(&dh.res, &dk.res, &alpha, self.bmax)?;
        let ko = dk.res.table.order();
        self.induced(&dh, &dk, |t, i, a, cl| {
            let gc = self.cells.offset[t - i] + cl;
            let nc = self.cells.count(t - i);
            let start = dk.start(t, i);
            phi.images[i][a]
                .iter()
                .enumerate()
                .filter(|(_, &mu)| mu != 0)
                .map(|(pos, &mu)| {
                    let (bb, kk) = (pos / ko, pos % ko);
                    let (neg, c2) = self.cell_act[dk.to_g[dk.res.table.inv(kk)]][gc];
                    (start + bb * nc + self.cells.local(c2), self.signed(neg, mu))
                })
                .collect()
        })
    }

    fn compute_conjugation(&self, h: &PermGroup, g: &Permutation) -> Result<Vec<Mat>> {
        let h2 = h.conjugate(g);
        let (dh, dh2) = (self.data(h)?, self.data(&h2)?);
        let alpha: Vec<usize> =
            h.elements().iter().map(|x| dh2.res.table.index_of(&x.conjugate_by(g)).expect("conjugate")).collect();
        let theta = lift(&dh.res, &dh2.res, &alpha, self.bmax)?;
        let ko = dh2.res.table.order();
        // k ↦ index of k⁻¹g in the ambient group
        let kg: Vec<usize> = (0..ko).map(|k| self.gindex[&dh2.res.table.element(k).inverse().compose(g)]).collect();
        self.induced(&dh, &dh2, |t, i, a, cl| {
            let gc = self.cells.offset[t - i] + cl;
            let nc = self.cells.count(t - i);
            let start = dh2.start(t, i);
            theta.images[i][a]
                .iter()
                .enumerate()
                .filter(|(_, &mu)| mu != 0)
                .map(|(pos, &mu)| {
                    let (bb, kk) = (pos / ko, pos % ko);
                    let (neg, c2) = self.cell_act[kg[kk]][gc];
                    (start + bb * nc + self.cells.local(c2), self.signed(neg, mu))
                })
                .collect()
        })
    }

    fn compute_restriction(&self, h: &PermGroup, k: &PermGroup) -> Result<Vec<Mat>> {
        let (dh, dk) = (self.data(h)?, self.data(k)?);
        let restricted = dk.res.restrict(h)?;
        let alpha: Vec<usize> = (0..h.order()).collect();
        let psi = lift(&restricted.complex, &dh.res, &alpha, self.bmax)?;
        let m = restricted.reps.len();
        let ho = dh.res.table.order();
        let reps: Vec<Permutation> = restricted.reps.iter().map(|&r| dk.res.table.element(r).clone()).collect();
        // (h, j) ↦ index of h⁻¹ t_j in the ambient group
        let ht: Vec<Vec<usize>> = (0..ho)
            .map(|x| {
                let hi = dh.res.table.element(x).inverse();
                reps.iter().map(|t| self.gindex[&hi.compose(t)]).collect()
            })
            .collect();
        self.induced(&dk, &dh, |t, i, bk, cl| {
            let gc = self.cells.offset[t - i] + cl;
            let nc = self.cells.count(t - i);
            let start = dh.start(t, i);
            let mut out = Vec::new();
            for jj in 0..m {
                for (pos, &mu) in psi.images[i][bk * m + jj].iter().enumerate() {
                    if mu == 0 {
                        continue;
                    }
                    let (a, x) = (pos / ho, pos % ho);
                    let (neg, c2) = self.cell_act[ht[x][jj]][gc];
                    out.push((start + a * nc + self.cells.local(c2), self.signed(neg, mu)));
                }
            }
            out
        })
    }
}

impl MackeyFunctor for BorelFunctor {
    fn name(&self) -> String {
        format!("borel:{},{},{},{}", self.n, self.p, self.j, self.bmax)
    }
    fn group(&self) -> &PermGroup {
        &self.group
    }
    fn ring(&self) -> Ring {
        Ring::Fp(self.p)
    }
    fn prime(&self) -> Option<u64> {
        Some(self.p)
    }
    fn degrees(&self) -> usize {
        self.bmax + 1
    }
    fn rank(&self, h: &PermGroup, b: usize) -> Result<usize> {
        if b > self.bmax {
            return Err(Error::Domain(format!("degree {b} is outside the computed window")));
        }
        Ok(self.data(h)?.bases[b].dim())
    }
    fn transfer(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat> {
        check_sub(h, k)?;
        check_sub(k, &self.group)?;
        self.cached(MapKey::Transfer(h.clone(), k.clone()), b, || self.compute_transfer(h, k))
    }
    fn restriction(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat> {
        check_sub(h, k)?;
        check_sub(k, &self.group)?;
        self.cached(MapKey::Restriction(h.clone(), k.clone()), b, || self.compute_restriction(h, k))
    }
    fn conjugation(&self, h: &PermGroup, g: &Permutation, b: usize) -> Result<Mat> {
        check_sub(h, &self.group)?;
        check_member(&self.group, g)?;
        self.cached(MapKey::Conjugation(h.clone(), g.clone()), b, || self.compute_conjugation(h, g))
    }
}

/// Wraps a functor and perturbs one covariant map; used as a negative control.
pub struct CorruptedFunctor {
    inner: Arc<dyn MackeyFunctor>,
    source: PermGroup,
    target: PermGroup,
    degree: usize,
}

impl CorruptedFunctor {
    /// Adds one to the corner entry of the map from the trivial subgroup to
    /// the whole group in the first degree where both values are nonzero.
    pub fn new(inner: Arc<dyn MackeyFunctor>) -> Result<Self> {
        let g = inner.group().clone();
        let e = PermGroup::trivial(g.degree());
        for b in 0..inner.degrees() {
            if inner.rank(&e, b)? > 0 && inner.rank(&g, b)? > 0 {
                return Ok(CorruptedFunctor { inner, source: e, target: g, degree: b });
            }
        }
        Err(Error::Domain("no nonzero map to corrupt".into()))
    }
}

impl MackeyFunctor for CorruptedFunctor {
    fn name(&self) -> String {
        format!("corrupted({})", self.inner.name())
    }
    fn group(&self) -> &PermGroup {
        self.inner.group()
    }
    fn ring(&self) -> Ring {
        self.inner.ring()
    }
    fn prime(&self) -> Option<u64> {
        self.inner.prime()
    }
    fn degrees(&self) -> usize {
        self.inner.degrees()
    }
    fn rank(&self, h: &PermGroup, b: usize) -> Result<usize> {
        self.inner.rank(h, b)
    }
    fn transfer(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat> {
        let mut m = self.inner.transfer(h, k, b)?;
        if h == &self.source && k == &self.target && b == self.degree {
            let x = m.get(0, 0) + 1;
            m.set(0, 0, reduce_entry(x, modulus(self)));
        }
        Ok(m)
    }
    fn restriction(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat> {
        self.inner.restriction(h, k, b)
    }
    fn conjugation(&self, h: &PermGroup, g: &Permutation, b: usize) -> Result<Mat> {
        self.inner.conjugation(h, g, b)
    }
}

/// A finite left `G`-set on points `0..size`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiniteGSet {
    pub group: PermGroup,
    pub size: usize,
    /// Image of every point under each generator.
    pub gen_images: Vec<Vec<usize>>,
}

/// One orbit: representative, stabilizer, and `witness[x]` with `x = witness[x]·rep`.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub rep: usize,
    pub stabilizer: PermGroup,
    pub points: Vec<usize>,
    pub witness: HashMap<usize, Permutation>,
}

impl FiniteGSet {
    pub fn new(group: PermGroup, size: usize, gen_images: Vec<Vec<usize>>) -> Result<Self> {
        if gen_images.len() != group.generators().len() || gen_images.iter().any(|v| v.len() != size || v.iter().any(|&x| x >= size)) {
            return Err(Error::Domain("generator images do not match the set".into()));
        }
        element_tables(&group, &gen_images, size)?;
        Ok(FiniteGSet { group, size, gen_images })
    }

    /// `⊔ G/H_i`, with the points of each orbit indexed by left coset representatives.
    pub fn from_orbits(group: &PermGroup, subs: &[PermGroup]) -> Result<Self> {
        let mut cosets: Vec<(usize, Permutation)> = Vec::new();
        let mut which: Vec<HashMap<Permutation, usize>> = Vec::new();
        for (o, h) in subs.iter().enumerate() {
            check_sub(h, group)?;
            let mut m = HashMap::new();
            for t in group.left_coset_reps(h) {
                let idx = cosets.len();
                for x in h.elements() {
                    m.insert(t.compose(x), idx);
                }
                cosets.push((o, t));
            }
            which.push(m);
        }
        let gen_images = group
            .generators()
            .iter()
            .map(|s| cosets.iter().map(|(o, t)| which[*o][&s.compose(t)]).collect())
            .collect();
        FiniteGSet::new(group.clone(), cosets.len(), gen_images)
    }

    pub fn orbits(&self) -> Vec<Orbit> {
        self.orbits_with(None)
    }

    /// Orbit decomposition. With a generator, representatives and witnesses
    /// are chosen at random instead of canonically.
    pub fn orbits_with(&self, mut rng: Option<&mut ChaCha8Rng>) -> Vec<Orbit> {
        let tables = element_tables(&self.group, &self.gen_images, self.size).expect("validated action");
        let mut seen = vec![false; self.size];
        let mut out = Vec::new();
        for s in 0..self.size {
            if seen[s] {
                continue;
            }
            let (mut points, _) = self.bfs(s);
            for &x in &points {
                seen[x] = true;
            }
            let rep = match rng.as_deref_mut() {
                Some(r) => points[r.gen_range(0..points.len())],
                None => s,
            };
            let (_, mut witness) = self.bfs(rep);
            let stab: Vec<Permutation> = self
                .group
                .elements()
                .iter()
                .zip(tables.iter())
                .filter(|(_, t)| t[rep] as usize == rep)
                .map(|(g, _)| g.clone())
                .collect();
            if let Some(r) = rng.as_deref_mut() {
                for w in witness.values_mut() {
                    *w = w.compose(&stab[r.gen_range(0..stab.len())]);
                }
            }
            points.sort_unstable();
            out.push(Orbit { rep, stabilizer: PermGroup::from_elements(self.group.degree(), stab), points, witness });
        }
        out
    }

    /// Points reachable from `s` and witnesses `x = w·s`.
    fn bfs(&self, s: usize) -> (Vec<usize>, HashMap<usize, Permutation>) {
        let mut witness = HashMap::new();
        witness.insert(s, self.group.identity());
        let mut points = vec![s];
        let mut i = 0;
        while i < points.len() {
            let x = points[i];
            for (g, img) in self.group.generators().iter().zip(&self.gen_images) {
                let y = img[x];
                if !witness.contains_key(&y) {
                    let w = g.compose(&witness[&x]);
                    witness.insert(y, w);
                    points.push(y);
                }
            }
            i += 1;
        }
        (points, witness)
    }
}

/// An equivariant map of finite `G`-sets.
#[derive(Clone, Debug)]
pub struct GMap {
    pub source: FiniteGSet,
    pub target: FiniteGSet,
    pub map: Vec<usize>,
}

impl GMap {
    pub fn new(source: FiniteGSet, target: FiniteGSet, map: Vec<usize>) -> Result<Self> {
        if source.group != target.group || map.len() != source.size || map.iter().any(|&y| y >= target.size) {
            return Err(Error::Domain("map does not fit its G-sets".into()));
        }
        for (si, ti) in source.gen_images.iter().zip(&target.gen_images) {
            if (0..source.size).any(|x| map[si[x]] != ti[map[x]]) {
                return Err(Error::Domain("map is not equivariant".into()));
            }
        }
        Ok(GMap { source, target, map })
    }

    pub fn identity(s: &FiniteGSet) -> Self {
        GMap { source: s.clone(), target: s.clone(), map: (0..s.size).collect() }
    }
}

/// Values of `Γ` on a finite `G`-set: the direct sum over orbits.
pub fn evaluate(g: &dyn MackeyFunctor, s: &FiniteGSet, b: usize) -> Result<FGAbGroup> {
    let mut r = 0;
    for o in s.orbits() {
        r += g.rank(&o.stabilizer, b)?;
    }
    Ok(match g.ring() {
        Ring::Fp(p) => FGAbGroup::fp(p, r),
        Ring::Integers => FGAbGroup { rank: r, torsion: vec![], prime: g.prime() },
    })
}

pub fn layout(g: &dyn MackeyFunctor, orbits: &[Orbit], b: usize) -> Result<(Vec<usize>, usize)> {
    let mut offs = Vec::new();
    let mut total = 0;
    for o in orbits {
        offs.push(total);
        total += g.rank(&o.stabilizer, b)?;
    }
    Ok((offs, total))
}

/// For every source orbit: target orbit index and the witness `w` with
/// `f(rep) = w·rep'`.
fn orbit_images(map: &[usize], so: &[Orbit], to: &[Orbit]) -> Vec<(usize, Permutation)> {
    let mut orbit_of = HashMap::new();
    for (i, t) in to.iter().enumerate() {
        for &x in &t.points {
            orbit_of.insert(x, i);
        }
    }
    so.iter()
        .map(|o| {
            let y = map[o.rep];
            let ti = orbit_of[&y];
            (ti, to[ti].witness[&y].clone())
        })
        .collect()
}

/// `γ(f)` for a map given on points, using fixed orbit decompositions of
/// source and target.
pub fn covariant_on_orbits(g: &dyn MackeyFunctor, map: &[usize], so: &[Orbit], to: &[Orbit], b: usize) -> Result<Mat> {
    let (soff, sdim) = layout(g, so, b)?;
    let (toff, tdim) = layout(g, to, b)?;
    let mut m = Mat::zeros(tdim, sdim);
    for (i, (ti, w)) in orbit_images(map, so, to).into_iter().enumerate() {
        let block = orbit_covariant(g, &so[i].stabilizer, &to[ti].stabilizer, &w, b)?;
        m.add_block(toff[ti], soff[i], &block, modulus(g));
    }
    Ok(m)
}

/// `γ^♮(f)` for a map given on points.
pub fn contravariant_on_orbits(g: &dyn MackeyFunctor, map: &[usize], so: &[Orbit], to: &[Orbit], b: usize) -> Result<Mat> {
    let (soff, sdim) = layout(g, so, b)?;
    let (toff, tdim) = layout(g, to, b)?;
    let mut m = Mat::zeros(sdim, tdim);
    for (i, (ti, w)) in orbit_images(map, so, to).into_iter().enumerate() {
        let block = orbit_contravariant(g, &so[i].stabilizer, &to[ti].stabilizer, &w, b)?;
        m.add_block(soff[i], toff[ti], &block, modulus(g));
    }
    Ok(m)
}

/// `γ(f): Γ(S) → Γ(T)`.
pub fn covariant_matrix(g: &dyn MackeyFunctor, f: &GMap, b: usize) -> Result<Mat> {
    covariant_on_orbits(g, &f.map, &f.source.orbits(), &f.target.orbits(), b)
}

/// `γ^♮(f): Γ(T) → Γ(S)`.
pub fn contravariant_matrix(g: &dyn MackeyFunctor, f: &GMap, b: usize) -> Result<Mat> {
    contravariant_on_orbits(g, &f.map, &f.source.orbits(), &f.target.orbits(), b)
}

/// The map `Γ(S) → Γ(T)` of the span `S ← V → T`.
pub fn span_apply(g: &dyn MackeyFunctor, left: &GMap, right: &GMap, b: usize) -> Result<Mat> {
    if left.source.gen_images != right.source.gen_images || left.source.size != right.source.size {
        return Err(Error::Domain("span legs have different sources".into()));
    }
    let back = contravariant_matrix(g, left, b)?;
    covariant_matrix(g, right, b)?.mul(&back, modulus(g))
}

pub(crate) fn mat_json(m: &Mat) -> Value {
    json!(m.to_rows())
}

pub(crate) fn group_json(h: &PermGroup) -> Value {
    serde_json::to_value(h).expect("group serializes")
}

/// Subgroup catalogue used by the checkers when none is given.
pub fn default_catalogue(g: &PermGroup) -> Result<Vec<PermGroup>> {
    if g.order() <= 120 {
        subgroup_classes(g)
    } else {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in [2usize, 3, 5, 7] {
            if g.order() % p == 0 {
                for h in p_subgroup_classes(g, p)? {
                    if seen.insert(h.clone()) {
                        out.push(h);
                    }
                }
            }
        }
        if seen.insert(g.clone()) {
            out.push(g.clone());
        }
        Ok(out)
    }
}

/// Pairs `(H, K)` with `H` a catalogue member and `K` a conjugate of a
/// catalogue member containing it.
fn containment_pairs(g: &PermGroup, cat: &[PermGroup]) -> Vec<(PermGroup, PermGroup)> {
    let mut out = Vec::new();
    for h in cat {
        for k in cat {
            if let Some(w) = g.subconjugacy_witness(h, k) {
                // w⁻¹ h w ≤ k, so h ≤ w k w⁻¹
                out.push((h.clone(), k.conjugate(&w)));
            }
        }
    }
    out
}

/// Checks functoriality, conjugation coherence, the double coset formula and
/// additivity on the given subgroup catalogue (all subgroup classes if `None`).
pub fn check_mackey_axioms(g: &dyn MackeyFunctor, catalogue: Option<&[PermGroup]>) -> Result<VerificationReport> {
    let grp = g.group().clone();
    let cat = match catalogue {
        Some(c) => c.to_vec(),
        None => default_catalogue(&grp)?,
    };
    let m = modulus(g);
    let mut rep = VerificationReport::new("mackey-axioms", json!({"functor": g.name(), "subgroups": cat.len()}));
    let pairs = containment_pairs(&grp, &cat);
    for b in 0..g.degrees() {
        let ok = |rep: &mut VerificationReport, check: &str, lhs: &Mat, rhs: &Mat, subs: &[&PermGroup]| {
            if !lhs.eq_mod(rhs, m) {
                let w = json!({
                    "degree": b,
                    "subgroups": subs.iter().map(|h| group_json(h)).collect::<Vec<_>>(),
                    "lhs": mat_json(lhs),
                    "rhs": mat_json(rhs),
                });
                rep.push(check, false, format!("violated in degree {b}"), w);
                false
            } else {
                true
            }
        };
        let mut all = true;
        for h in &cat {
            let r = g.rank(h, b)?;
            let id = Mat::identity(r);
            all &= ok(&mut rep, "identity-transfer", &g.transfer(h, h, b)?, &id, &[h]);
            all &= ok(&mut rep, "identity-restriction", &g.restriction(h, h, b)?, &id, &[h]);
            for x in h.generators() {
                all &= ok(&mut rep, "inner-conjugation", &g.conjugation(h, x, b)?, &id, &[h]);
            }
            let gens = grp.generators();
            for x in gens {
                for y in gens {
                    let xy = x.compose(y);
                    let lhs = g.conjugation(h, &xy, b)?;
                    let rhs = g.conjugation(&h.conjugate(y), x, b)?.mul(&g.conjugation(h, y, b)?, m)?;
                    all &= ok(&mut rep, "conjugation-composition", &lhs, &rhs, &[h]);
                }
            }
        }
        for (h, k) in &pairs {
            for x in grp.generators() {
                let (h2, k2) = (h.conjugate(x), k.conjugate(x));
                let lhs = g.conjugation(k, x, b)?.mul(&g.transfer(h, k, b)?, m)?;
                let rhs = g.transfer(&h2, &k2, b)?.mul(&g.conjugation(h, x, b)?, m)?;
                all &= ok(&mut rep, "conjugation-transfer", &lhs, &rhs, &[h, k]);
                let lhs = g.conjugation(h, x, b)?.mul(&g.restriction(h, k, b)?, m)?;
                let rhs = g.restriction(&h2, &k2, b)?.mul(&g.conjugation(k, x, b)?, m)?;
                all &= ok(&mut rep, "conjugation-restriction", &lhs, &rhs, &[h, k]);
            }
        }
        for (h, j) in &pairs {
            for (j2, k) in &pairs {
                if j2 != j {
                    continue;
                }
                let lhs = g.transfer(j, k, b)?.mul(&g.transfer(h, j, b)?, m)?;
                all &= ok(&mut rep, "transfer-composition", &lhs, &g.transfer(h, k, b)?, &[h, j, k]);
                let lhs = g.restriction(h, j, b)?.mul(&g.restriction(j, k, b)?, m)?;
                all &= ok(&mut rep, "restriction-composition", &lhs, &g.restriction(h, k, b)?, &[h, j, k]);
            }
        }
        // double coset formula inside the whole group
        for j in &cat {
            for h in &cat {
                let lhs = g.restriction(j, &grp, b)?.mul(&g.transfer(h, &grp, b)?, m)?;
                let mut rhs = Mat::zeros(g.rank(j, b)?, g.rank(h, b)?);
                for x in grp.double_coset_reps(j, h) {
                    let xi = x.inverse();
                    let a = h.intersection(&j.conjugate(&xi));
                    let c = j.intersection(&h.conjugate(&x));
                    let term = g
                        .transfer(&c, j, b)?
                        .mul(&g.conjugation(&a, &x, b)?, m)?
                        .mul(&g.restriction(&a, h, b)?, m)?;
                    rhs = rhs.add(&term, m)?;
                }
                if !ok(&mut rep, "double-coset", &lhs, &rhs, &[j, h]) {
                    all = false;
                }
            }
        }
        // additivity: the fold G/H ⊔ G/H → G/H composed with its transpose
        for h in &cat {
            let two = FiniteGSet::from_orbits(&grp, &[h.clone(), h.clone()])?;
            let one = FiniteGSet::from_orbits(&grp, &[h.clone()])?;
            let half = one.size;
            let fold = GMap::new(two, one.clone(), (0..2 * half).map(|x| x % half).collect())?;
            let lhs = span_apply(g, &fold, &fold, b)?;
            let r = g.rank(h, b)?;
            all &= ok(&mut rep, "additivity", &lhs, &Mat::identity(r).scale(2, m), &[h]);
        }
        if all {
            rep.push("degree", true, format!("all identities hold in degree {b}"), Value::Null);
        }
    }
    Ok(rep)
}

/// Whether `tr^K_H ∘ res^K_H = [K:H]` on every catalogue pair.
pub fn is_cohomological(g: &dyn MackeyFunctor, catalogue: &[PermGroup]) -> Result<Option<Value>> {
    let grp = g.group().clone();
    let m = modulus(g);
    for (h, k) in containment_pairs(&grp, catalogue) {
        for b in 0..g.degrees() {
            let lhs = g.transfer(&h, &k, b)?.mul(&g.restriction(&h, &k, b)?, m)?;
            let idx = (k.order() / h.order()) as i64;
            let rhs = Mat::identity(g.rank(&k, b)?).scale(idx, m);
            if !lhs.eq_mod(&rhs, m) {
                return Ok(Some(json!({"degree": b, "subgroup": group_json(&h), "overgroup": group_json(&k)})));
            }
        }
    }
    Ok(None)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Decides whether every span `T ← S → T` whose fibres have size prime to `p`
/// acts invertibly, by a sufficient criterion and a bounded search.
///
/// The search takes `T = G/K` for catalogue members `K` and fibres made of at
/// most three orbits `K/H_i` with `H_i` drawn from the catalogue, subject to
/// `|S| ≤ size_bound`.
pub fn check_p_constrained(
    g: &dyn MackeyFunctor,
    p: u64,
    size_bound: usize,
    catalogue: Option<&[PermGroup]>,
) -> Result<VerificationReport> {
    check_prime(p as usize)?;
    let grp = g.group().clone();
    let cat = match catalogue {
        Some(c) => c.to_vec(),
        None => default_catalogue(&grp)?,
    };
    let m = modulus(g);
    let mut rep = VerificationReport::new(
        "p-constrained",
        json!({"functor": g.name(), "p": p, "size_bound": size_bound, "subgroups": cat.len()}),
    );
    let local = match g.ring() {
        Ring::Fp(q) => q == p,
        Ring::Integers => g.prime() == Some(p),
    };
    let coh = is_cohomological(g, &cat)?;
    let fast = local && coh.is_none();
    rep.push(
        "cohomological-and-p-local",
        true,
        format!("cohomological: {}, p-local: {local}", coh.is_none()),
        json!({"cohomological": coh.is_none(), "p_local": local, "sufficient": fast}),
    );
    let inv_prime = if local { Some(p) } else { local_prime(g).filter(|&q| q == p) };
    let mut bad = false;
    for k in &cat {
        let base = grp.order() / k.order();
        let mut options: Vec<PermGroup> = Vec::new();
        for h in &cat {
            if let Some(w) = grp.subconjugacy_witness(h, k) {
                options.push(h.conjugate(&w.inverse()));
            }
        }
        let idx: Vec<usize> = options.iter().map(|h| k.order() / h.order()).collect();
        let mut stack: Vec<Vec<usize>> = (0..options.len()).map(|i| vec![i]).collect();
        while let Some(ms) = stack.pop() {
            let fibre: usize = ms.iter().map(|&i| idx[i]).sum();
            if base * fibre > size_bound {
                continue;
            }
            if gcd(fibre, p as usize) == 1 {
                for b in 0..g.degrees() {
                    let r = g.rank(k, b)?;
                    let mut sum = Mat::zeros(r, r);
                    for &i in &ms {
                        let h = &options[i];
                        sum = sum.add(&g.transfer(h, k, b)?.mul(&g.restriction(h, k, b)?, m)?, m)?;
                    }
                    if !is_invertible(&sum, inv_prime) {
                        bad = true;
                        rep.push(
                            "bounded-search",
                            false,
                            format!("span with fibre size {fibre} is not invertible in degree {b}"),
                            json!({
                                "degree": b,
                                "base": group_json(k),
                                "fibre_orbits": ms.iter().map(|&i| group_json(&options[i])).collect::<Vec<_>>(),
                                "matrix": mat_json(&sum),
                            }),
                        );
                        break;
                    }
                }
            }
            if ms.len() < 3 {
                let last = *ms.last().expect("nonempty");
                for i in last..options.len() {
                    let mut next = ms.clone();
                    next.push(i);
                    stack.push(next);
                }
            }
        }
    }
    if !bad {
        rep.push("bounded-search", true, "every searched span is invertible", Value::Null);
    }
    Ok(rep)
}

/// Elementary abelian `p`-subgroups of `Σ_n` acting freely and
/// nontransitively, one per conjugacy class.
pub fn qualifying_subgroups(n: usize, p: usize) -> Result<Vec<PermGroup>> {
    let s = symmetric_group(n)?;
    Ok(p_subgroup_classes(&s, p)?
        .into_iter()
        .filter(|d| {
            let c = classify_action(d, n);
            c.elementary_abelian && c.free && !c.transitive
        })
        .collect())
}

fn require_symmetric(g: &dyn MackeyFunctor, n: usize) -> Result<PermGroup> {
    let s = symmetric_group(n)?;
    if g.group() != &s {
        return Err(Error::Domain(format!("functor is not defined on the symmetric group of degree {n}")));
    }
    Ok(s)
}

/// Every element of the kernel of `Cen(D) → π₀ Cen_{GL_n(R)}(D)` must act
/// trivially on `Γ(Σ_n/D)`.
pub fn check_centralizer_condition(g: &dyn MackeyFunctor, n: usize, p: u64) -> Result<VerificationReport> {
    check_prime(p as usize)?;
    check_cap("n", n, 6)?;
    let s = require_symmetric(g, n)?;
    let m = modulus(g);
    let mut rep = VerificationReport::new("centralizer-condition", json!({"functor": g.name(), "n": n, "p": p}));
    for d in qualifying_subgroups(n, p as usize)? {
        let c = centralizer(&s, &d)?;
        let ker = kernel_to_pi0_real_centralizer(&d, n, p as usize, &c)?;
        let mut good = true;
        'outer: for x in ker.generators() {
            for b in 0..g.degrees() {
                let a = g.conjugation(&d, x, b)?;
                if !a.is_identity_mod(m) {
                    rep.push(
                        "kernel-acts-trivially",
                        false,
                        format!("{x} acts nontrivially in degree {b}"),
                        json!({"subgroup": group_json(&d), "element": x, "degree": b, "matrix": mat_json(&a)}),
                    );
                    good = false;
                    break 'outer;
                }
            }
        }
        if good {
            rep.push(
                "kernel-acts-trivially",
                true,
                format!("kernel of order {} acts trivially", ker.order()),
                json!({"subgroup": group_json(&d)}),
            );
        }
    }
    Ok(rep)
}

/// Every odd involution centralizing `D` must act by `−1` on `Γ(Σ_n/D)`.
pub fn check_involution_condition(g: &dyn MackeyFunctor, n: usize, p: u64) -> Result<VerificationReport> {
    check_prime(p as usize)?;
    if p == 2 {
        return Err(Error::Domain("the involution condition needs an odd prime".into()));
    }
    check_cap("n", n, 6)?;
    let s = require_symmetric(g, n)?;
    let m = modulus(g);
    let mut rep = VerificationReport::new("involution-condition", json!({"functor": g.name(), "n": n, "p": p}));
    for d in qualifying_subgroups(n, p as usize)? {
        let c = centralizer(&s, &d)?;
        let mut good = true;
        'outer: for tau in odd_involutions(&c) {
            for b in 0..g.degrees() {
                let a = g.conjugation(&d, &tau, b)?;
                let minus = Mat::identity(a.rows).scale(-1, m);
                if !a.eq_mod(&minus, m) {
                    rep.push(
                        "odd-involution-acts-by-minus-one",
                        false,
                        format!("{tau} does not act by -1 in degree {b}"),
                        json!({"subgroup": group_json(&d), "element": tau, "degree": b, "matrix": mat_json(&a)}),
                    );
                    good = false;
                    break 'outer;
                }
            }
        }
        if good {
            rep.push("odd-involution-acts-by-minus-one", true, "all odd involutions act by -1", json!({"subgroup": group_json(&d)}));
        }
    }
    Ok(rep)
}

/// Values and structure maps on a catalogue, for export.
pub fn bundle(g: &dyn MackeyFunctor, catalogue: &[PermGroup]) -> Result<Value> {
    let grp = g.group().clone();
    let mut values = Vec::new();
    let mut maps = Vec::new();
    for b in 0..g.degrees() {
        for h in catalogue {
            values.push(json!({"degree": b, "subgroup": group_json(h), "value": value(g, h, b)?}));
        }
        for (h, k) in containment_pairs(&grp, catalogue) {
            if h == k {
                continue;
            }
            maps.push(json!({
                "degree": b,
                "subgroup": group_json(&h),
                "overgroup": group_json(&k),
                "transfer": mat_json(&g.transfer(&h, &k, b)?),
                "restriction": mat_json(&g.restriction(&h, &k, b)?),
            }));
        }
    }
    Ok(json!({"functor": g.name(), "group": group_json(&grp), "values": values, "maps": maps}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroups::regular_embedding;

    fn sym(n: usize) -> PermGroup {
        symmetric_group(n).unwrap()
    }

    fn fixed(g: &PermGroup, m: GroupRingModule) -> FixedPointFunctor {
        let _ = g;
        FixedPointFunctor::new(m, "test")
    }

    #[test]
    fn sign_invariants_vanish() {
        let g = sym(3);
        let f = fixed(&g, GroupRingModule::sign(&g, 0, Some(3)).unwrap());
        let h = PermGroup::generate(3, vec![Permutation::from_cycles(3, &[&[1, 2]]).unwrap()]).unwrap();
        assert_eq!(f.rank(&h, 0).unwrap(), 0);
        assert_eq!(f.rank(&PermGroup::trivial(3), 0).unwrap(), 1);
    }

    #[test]
    fn trivial_module_axioms_and_corruption() {
        let g = sym(3);
        let f: Arc<dyn MackeyFunctor> = Arc::new(fixed(&g, GroupRingModule::trivial(&g, 0, None, 1).unwrap()));
        assert!(check_mackey_axioms(f.as_ref(), None).unwrap().passed());
        let bad = CorruptedFunctor::new(f).unwrap();
        let r = check_mackey_axioms(&bad, None).unwrap();
        assert!(!r.passed());
        assert!(r.failures().any(|x| x.check == "double-coset"));
    }

    #[test]
    fn regular_invariants_rank() {
        let g = sym(4);
        let f = fixed(&g, GroupRingModule::regular(&g, 0, Some(2)).unwrap());
        let d = regular_embedding(2, 2).unwrap();
        let s = FiniteGSet::from_orbits(&g, &[d]).unwrap();
        assert_eq!(s.size, 6);
        // one orbit with stabilizer of order 4: M^D has rank 24/4
        assert_eq!(evaluate(&f, &s, 0).unwrap().rank, 6);
        let empty = FiniteGSet::from_orbits(&g, &[]).unwrap();
        assert_eq!(evaluate(&f, &empty, 0).unwrap().rank, 0);
    }

    #[test]
    fn fold_span_doubles() {
        let g = sym(3);
        let c = ConstantSystem::new(g.clone(), Ring::Integers, None, 1);
        let two = FiniteGSet::from_orbits(&g, &[g.clone(), g.clone()]).unwrap();
        assert_eq!(evaluate(&c, &two, 0).unwrap().rank, 2);
        let one = FiniteGSet::from_orbits(&g, &[g.clone()]).unwrap();
        let fold = GMap::new(two, one, vec![0, 0]).unwrap();
        assert_eq!(span_apply(&c, &fold, &fold, 0).unwrap(), Mat::identity(1).scale(2, 0));
    }

    #[test]
    fn localization_decides_p_constraint() {
        let g = sym(3);
        let good = fixed(&g, GroupRingModule::sign(&g, 0, Some(3)).unwrap());
        assert!(check_p_constrained(&good, 3, 9, None).unwrap().passed());
        let bad = fixed(&g, GroupRingModule::trivial(&g, 0, None, 1).unwrap());
        assert!(!check_p_constrained(&bad, 3, 9, None).unwrap().passed());
    }

    #[test]
    fn centralizer_and_involution_conditions() {
        let g = sym(4);
        let triv = fixed(&g, GroupRingModule::trivial(&g, 0, Some(2), 1).unwrap());
        assert!(check_centralizer_condition(&triv, 4, 2).unwrap().passed());
        let reg = fixed(&g, GroupRingModule::regular(&g, 0, Some(2)).unwrap());
        let r = check_centralizer_condition(&reg, 4, 2).unwrap();
        assert!(!r.passed());
        let s3 = sym(3);
        let sign = fixed(&s3, GroupRingModule::sign(&s3, 0, Some(3)).unwrap());
        assert!(check_involution_condition(&sign, 3, 3).unwrap().passed());
        let t = fixed(&s3, GroupRingModule::trivial(&s3, 0, Some(3), 1).unwrap());
        assert!(!check_involution_condition(&t, 3, 3).unwrap().passed());
        assert!(matches!(check_involution_condition(&sign, 3, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn borel_values_for_the_swap_sphere() {
        let f = BorelFunctor::new(2, 2, 1, 6).unwrap();
        let g = sym(2);
        let e = PermGroup::trivial(2);
        let full: Vec<usize> = (0..=6).map(|b| f.rank(&g, b).unwrap()).collect();
        assert_eq!(full, vec![0, 0, 1, 1, 1, 1, 1]);
        let free: Vec<usize> = (0..=6).map(|b| f.rank(&e, b).unwrap()).collect();
        assert_eq!(free, vec![0, 0, 1, 0, 0, 0, 0]);
        assert!(check_mackey_axioms(&f, None).unwrap().passed());
    }
}
