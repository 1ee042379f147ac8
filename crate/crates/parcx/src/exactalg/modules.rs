
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::fp::{fp_nullspace, fp_rank, FpSubspace};
use super::homology::FGAbGroup;
use super::matrix::SparseIntMatrix;
use super::snf::{integer_kernel, invariant_factors, lattice_quotient, smith_normal_form, solve_integer};
use crate::error::{Error, Result};
use crate::permgroups::{PermGroup, Permutation};

pub type IntMat = Vec<Vec<i64>>;

fn mat_mul(a: &IntMat, b: &IntMat) -> IntMat {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let k = b.len();
    let mut out = vec![vec![0i64; m]; n];
    for i in 0..n {
        for l in 0..k {
            let x = a[i][l];
            if x != 0 {
                for j in 0..m {
                    out[i][j] += x * b[l][j];
                }
            }
        }
    }
    out
}

fn identity(n: usize) -> IntMat {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

/// A finitely generated module over `Z[H]` (free as an abelian group) or over
/// `F_p[H]`, stored as a left action by integer matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ModuleData")]
pub struct GroupRingModule {
    pub group: PermGroup,
    /// `0` for integral modules, `p` for `F_p`-modules.
    pub characteristic: u64,
    /// Prime at which integral answers are reported.
    pub prime: Option<u64>,
    pub rank: usize,
    /// One matrix per generator of `group`, in order.
    pub action: Vec<IntMat>,
    #[serde(skip)]
    all: Vec<IntMat>,
}

#[derive(Deserialize)]
struct ModuleData {
    group: PermGroup,
    characteristic: u64,
    prime: Option<u64>,
    rank: usize,
    action: Vec<IntMat>,
}

impl TryFrom<ModuleData> for GroupRingModule {
    type Error = Error;
    fn try_from(d: ModuleData) -> Result<Self> {
        GroupRingModule::new(d.group, d.characteristic, d.prime, d.rank, d.action)
    }
}

impl GroupRingModule {
    /// Builds a module from generator matrices, checking every relation by
    /// walking the Cayley graph.
    pub fn new(group: PermGroup, characteristic: u64, prime: Option<u64>, rank: usize, action: Vec<IntMat>) -> Result<Self> {
        if action.len() != group.generators().len() {
            return Err(Error::Domain("one action matrix per generator is required".into()));
        }
        for m in &action {
            if m.len() != rank || m.iter().any(|r| r.len() != rank) {
                return Err(Error::Domain("action matrix has the wrong size".into()));
            }
        }
        let reduce = |m: IntMat| -> IntMat {
            if characteristic == 0 {
                m
            } else {
                let p = characteristic as i64;
                m.into_iter().map(|r| r.into_iter().map(|x| x.rem_euclid(p)).collect()).collect()
            }
        };
        let action: Vec<IntMat> = action.into_iter().map(reduce).collect();
        let n = group.order();
        let mut all: Vec<Option<IntMat>> = vec![None; n];
        let e = group.position(&group.identity()).expect("identity");
        all[e] = Some(identity(rank));
        let mut queue = vec![e];
        while let Some(x) = queue.pop() {
            let mx = all[x].clone().expect("visited");
            for (s, ms) in group.generators().iter().zip(&action) {
                let y = group.position(&s.compose(&group.elements()[x])).expect("closed");
                let my = reduce(mat_mul(ms, &mx));
                match &all[y] {
                    Some(old) if *old != my => {
                        return Err(Error::Integrity("action matrices violate a group relation".into()));
                    }
                    Some(_) => {}
                    None => {
                        all[y] = Some(my);
                        queue.push(y);
                    }
                }
            }
        }
        let all: Vec<IntMat> = all.into_iter().map(|m| m.expect("group is generated")).collect();
        Ok(GroupRingModule { group, characteristic, prime, rank, action, all })
    }

    /// Module `R^rank` with trivial action.
    pub fn trivial(group: &PermGroup, characteristic: u64, prime: Option<u64>, rank: usize) -> Result<Self> {
        let gens = group.generators().len();
        Self::new(group.clone(), characteristic, prime, rank, vec![identity(rank); gens])
    }

    /// Rank-one module on which `g` acts by `sign(g)`.
    pub fn sign(group: &PermGroup, characteristic: u64, prime: Option<u64>) -> Result<Self> {
        let action = group.generators().iter().map(|g| vec![vec![g.sign() as i64]]).collect();
        Self::new(group.clone(), characteristic, prime, 1, action)
    }

    /// Permutation module on `points` given the image of each point under
    /// each generator.
    pub fn permutation(group: &PermGroup, characteristic: u64, prime: Option<u64>, images: &[Vec<usize>]) -> Result<Self> {
        let n = images.first().map_or(0, |v| v.len());
        let action = images
            .iter()
            .map(|img| {
                let mut m = vec![vec![0i64; n]; n];
                for (j, &i) in img.iter().enumerate() {
                    m[i][j] = 1;
                }
                m
            })
            .collect();
        Self::new(group.clone(), characteristic, prime, n, action)
    }

    /// The free module of rank one, basis indexed by the group elements.
    pub fn regular(group: &PermGroup, characteristic: u64, prime: Option<u64>) -> Result<Self> {
        let images: Vec<Vec<usize>> = group
            .generators()
            .iter()
            .map(|s| group.elements().iter().map(|h| group.position(&s.compose(h)).expect("closed")).collect())
            .collect();
        if images.is_empty() {
            return Self::new(group.clone(), characteristic, prime, group.order(), vec![]);
        }
        Self::permutation(group, characteristic, prime, &images)
    }

    /// Matrix of an arbitrary group element.
    pub fn matrix(&self, g: &Permutation) -> Result<&IntMat> {
        let i = self.group.position(g).ok_or_else(|| Error::Containment(format!("{g} is not in the group")))?;
        Ok(&self.all[i])
    }

    pub fn matrix_at(&self, i: usize) -> &IntMat {
        &self.all[i]
    }

    /// The same module with matrices reduced mod `p`.
    pub fn reduce_mod(&self, p: u64) -> Result<Self> {
        Self::new(self.group.clone(), p, Some(p), self.rank, self.action.clone())
    }

    fn report(&self, g: FGAbGroup) -> FGAbGroup {
        match self.prime {
            Some(p) if self.characteristic == 0 => g.p_localize(p),
            _ => g,
        }
    }
}

fn check_compatible(a: &GroupRingModule, b: &GroupRingModule) -> Result<()> {
    if a.group != b.group {
        return Err(Error::Domain("modules are over different groups".into()));
    }
    if a.characteristic != b.characteristic {
        return Err(Error::Domain("modules have different characteristic".into()));
    }
    if a.group.generators() != b.group.generators() {
        return Err(Error::Domain("modules use different generating sets".into()));
    }
    Ok(())
}

fn kron_relations(a: &GroupRingModule, b: &GroupRingModule) -> Result<SparseIntMatrix> {
    // columns: a(g)·x ⊗ y − x ⊗ g·y  with a converted to a right module
    let (na, nb) = (a.rank, b.rank);
    let gens = a.group.generators();
    let mut m = SparseIntMatrix::zeros(na * nb, na * nb * gens.len());
    for (s, g) in gens.iter().enumerate() {
        let ra = a.matrix(&g.inverse())?;
        let rb = &b.action[s];
        for i in 0..na {
            for j in 0..nb {
                let col = s * na * nb + i * nb + j;
                for i2 in 0..na {
                    if ra[i2][i] != 0 {
                        m.add(i2 * nb + j, col, &BigInt::from(ra[i2][i]));
                    }
                }
                for j2 in 0..nb {
                    if rb[j2][j] != 0 {
                        m.add(i * nb + j2, col, &BigInt::from(-rb[j2][j]));
                    }
                }
            }
        }
    }
    Ok(m)
}

fn cokernel(m: &SparseIntMatrix, dim: usize, characteristic: u64) -> Result<FGAbGroup> {
    if characteristic == 0 {
        let f = invariant_factors(m);
        FGAbGroup::from_factors(dim - f.len(), &f)
    } else {
        Ok(FGAbGroup::fp(characteristic, dim - fp_rank(m, characteristic)))
    }
}

/// `A ⊗_{R[H]} B`, with the left module `A` made into a right module by `g ↦ g⁻¹`.
pub fn tensor_over_group_ring(a: &GroupRingModule, b: &GroupRingModule) -> Result<FGAbGroup> {
    check_compatible(a, b)?;
    let m = kron_relations(a, b)?;
    Ok(a.report(cokernel(&m, a.rank * b.rank, a.characteristic)?))
}

/// `Hom_{R[H]}(A, B)`.
pub fn hom_over_group_ring(a: &GroupRingModule, b: &GroupRingModule) -> Result<FGAbGroup> {
    check_compatible(a, b)?;
    let (na, nb) = (a.rank, b.rank);
    if na == 0 || nb == 0 {
        return Ok(a.report(FGAbGroup::zero()));
    }
    // unknown X (nb × na), index j*na + i; equations B(g)X − XA(g) = 0
    let gens = a.group.generators().len();
    let mut m = SparseIntMatrix::zeros(gens * nb * na, nb * na);
    for s in 0..gens {
        let (ra, rb) = (&a.action[s], &b.action[s]);
        for j in 0..nb {
            for i in 0..na {
                let row = s * nb * na + j * na + i;
                for k in 0..nb {
                    if rb[j][k] != 0 {
                        m.add(row, k * na + i, &BigInt::from(rb[j][k]));
                    }
                }
                for k in 0..na {
                    if ra[k][i] != 0 {
                        m.add(row, j * na + k, &BigInt::from(-ra[k][i]));
                    }
                }
            }
        }
    }
    let n = nb * na;
    let g = if a.characteristic == 0 {
        // the solution lattice is saturated, hence free
        FGAbGroup::free(n - invariant_factors(&m).len())
    } else {
        FGAbGroup::fp(a.characteristic, n - fp_rank(&m, a.characteristic))
    };
    Ok(a.report(g))
}

/// Generators `x_1..x_m` of `A` whose orbit spans `A` (over `Z`: with index
/// prime to the reporting prime, or index one when none is set).
fn choose_generators(a: &GroupRingModule) -> Result<Vec<usize>> {
    let elems = a.group.order();
    let mut chosen = Vec::new();
    let mut cols: Vec<Vec<i64>> = Vec::new();
    let enough = |cols: &Vec<Vec<i64>>| -> bool {
        if cols.is_empty() {
            return a.rank == 0;
        }
        let mut m = SparseIntMatrix::zeros(a.rank, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        if a.characteristic != 0 {
            return fp_rank(&m, a.characteristic) == a.rank;
        }
        let f = invariant_factors(&m);
        f.len() == a.rank
            && f.iter().all(|d| match a.prime {
                Some(p) => (d % BigInt::from(p)) != BigInt::zero(),
                None => d == &BigInt::from(1),
            })
    };
    if enough(&cols) {
        return Ok(chosen);
    }
    for j in 0..a.rank {
        for h in 0..elems {
            cols.push(a.all[h].iter().map(|r| r[j]).collect());
        }
        chosen.push(j);
        if enough(&cols) {
            return Ok(chosen);
        }
    }
    Err(Error::Integrity("basis vectors fail to generate the module".into()))
}

/// `Tor_1^{R[H]}(A, B)`, computed from a free presentation of whichever side
/// keeps the linear algebra smaller (`Tor_1` is symmetric for group rings).
pub fn tor1_over_group_ring(a: &GroupRingModule, b: &GroupRingModule) -> Result<FGAbGroup> {
    check_compatible(a, b)?;
    let ga = choose_generators(a)?;
    let gb = choose_generators(b)?;
    let h = a.group.order();
    let cost_a = (ga.len() * h).saturating_sub(a.rank) * b.rank;
    let cost_b = (gb.len() * h).saturating_sub(b.rank) * a.rank;
    let g = if cost_a <= cost_b { tor1_presented(a, &ga, b)? } else { tor1_presented(b, &gb, a)? };
    Ok(a.report(g))
}

/// `Tor_1` from the exact sequence `0 → K → F → A → 0` with `F = R[H]^m`:
/// `Tor_1(A, B) = ker((K ⊗_H B) → (F ⊗_H B))`.
fn tor1_presented(a: &GroupRingModule, gens: &[usize], b: &GroupRingModule) -> Result<FGAbGroup> {
    let group = &a.group;
    let h = group.order();
    let m = gens.len();
    let nf = m * h;
    // F → A, basis (i, x) ↦ x·e_{gens[i]}
    let mut pres = SparseIntMatrix::zeros(a.rank, nf);
    for (i, &gj) in gens.iter().enumerate() {
        for x in 0..h {
            for r in 0..a.rank {
                let v = a.all[x][r][gj];
                if v != 0 {
                    pres.set(r, i * h + x, BigInt::from(v));
                }
            }
        }
    }
    // left multiplication on F by each generator
    let perm_of = |s: &Permutation| -> Vec<usize> {
        (0..nf)
            .map(|c| {
                let (i, x) = (c / h, c % h);
                i * h + group.position(&s.compose(&group.elements()[x])).expect("closed")
            })
            .collect()
    };
    let gen_perms: Vec<Vec<usize>> = group.generators().iter().map(perm_of).collect();
    let inv_index: Vec<usize> = group
        .elements()
        .iter()
        .map(|x| group.position(&x.inverse()).expect("closed"))
        .collect();
    let nb = b.rank;
    if a.characteristic == 0 {
        let kbasis = integer_kernel(&pres);
        let r = kbasis.len();
        if r == 0 || nb == 0 {
            return Ok(FGAbGroup::zero());
        }
        let mut kmat = SparseIntMatrix::zeros(nf, r);
        for (j, col) in kbasis.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                kmat.set(i, j, x.clone());
            }
        }
        let ksf = smith_normal_form(&kmat);
        let mut action = Vec::new();
        for perm in &gen_perms {
            let mut mat = vec![vec![0i64; r]; r];
            for (j, col) in kbasis.iter().enumerate() {
                let mut moved = vec![BigInt::zero(); nf];
                for (c, x) in col.iter().enumerate() {
                    moved[perm[c]] = x.clone();
                }
                let y = solve_integer(&ksf, &moved).ok_or_else(|| Error::Integrity("kernel is not stable".into()))?;
                for (i, v) in y.iter().enumerate() {
                    mat[i][j] = v.to_i64().ok_or_else(|| Error::Capacity("kernel action entry too large".into()))?;
                }
            }
            action.push(mat);
        }
        let k = GroupRingModule::new(group.clone(), 0, a.prime, r, action)?;
        let rel = kron_relations(&k, b)?;
        // φ: K ⊗ B → B^m, (i, x) ⊗ y ↦ e_i ⊗ x⁻¹·y
        let mut phi = SparseIntMatrix::zeros(m * nb, r * nb);
        for (kj, col) in kbasis.iter().enumerate() {
            for (c, coef) in col.iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                let (i, x) = (c / h, c % h);
                let bx = &b.all[inv_index[x]];
                for y in 0..nb {
                    for t in 0..nb {
                        if bx[t][y] != 0 {
                            phi.add(i * nb + t, kj * nb + y, &(coef * BigInt::from(bx[t][y])));
                        }
                    }
                }
            }
        }
        let lbasis = integer_kernel(&phi);
        let relcols: Vec<Vec<BigInt>> = rel
            .columns()
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|c| {
                let mut v = vec![BigInt::zero(); r * nb];
                for (i, x) in c {
                    v[i] = x;
                }
                v
            })
            .collect();
        let (free, tors) = lattice_quotient(&lbasis, &relcols)?;
        FGAbGroup::from_factors(free, &tors)
    } else {
        let p = a.characteristic;
        let rows: Vec<Vec<u64>> = (0..a.rank)
            .map(|i| (0..nf).map(|j| super::fp::big_mod(&pres.get(i, j), p)).collect())
            .collect();
        let kbasis = fp_nullspace(&rows, nf, p);
        let r = kbasis.len();
        if r == 0 || nb == 0 {
            return Ok(FGAbGroup::fp(p, 0));
        }
        let mut sub = FpSubspace::new(nf, p);
        for v in &kbasis {
            sub.insert(v);
        }
        let mut action = Vec::new();
        for perm in &gen_perms {
            let mut mat = vec![vec![0i64; r]; r];
            for (j, col) in kbasis.iter().enumerate() {
                let mut moved = vec![0u64; nf];
                for (c, &x) in col.iter().enumerate() {
                    moved[perm[c]] = x;
                }
                let (res, coeff) = sub.reduce(&moved);
                if res.iter().any(|&x| x != 0) {
                    return Err(Error::Integrity("kernel is not stable".into()));
                }
                for (i, &v) in coeff.iter().enumerate() {
                    mat[i][j] = v as i64;
                }
            }
            action.push(mat);
        }
        let k = GroupRingModule::new(group.clone(), p, Some(p), r, action)?;
        let rel = kron_relations(&k, b)?;
        let mut phi = SparseIntMatrix::zeros(m * nb, r * nb);
        for (kj, col) in kbasis.iter().enumerate() {
            for (c, &coef) in col.iter().enumerate() {
                if coef == 0 {
                    continue;
                }
                let (i, x) = (c / h, c % h);
                let bx = &b.all[inv_index[x]];
                for y in 0..nb {
                    for t in 0..nb {
                        if bx[t][y] != 0 {
                            phi.add(i * nb + t, kj * nb + y, &BigInt::from(coef as i64 * bx[t][y]));
                        }
                    }
                }
            }
        }
        let dim_l = r * nb - fp_rank(&phi, p);
        Ok(FGAbGroup::fp(p, dim_l - fp_rank(&rel, p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroups::symmetric_group;

    #[test]
    fn coinvariants_of_sign() {
        let g = symmetric_group(3).unwrap();
        let s = GroupRingModule::sign(&g, 0, None).unwrap();
        let t = GroupRingModule::trivial(&g, 0, None, 1).unwrap();
        let c = tensor_over_group_ring(&s, &t).unwrap();
        assert_eq!(c.torsion, vec![2]);
        assert_eq!(hom_over_group_ring(&s, &t).unwrap(), FGAbGroup::zero());
    }

    #[test]
    fn tor_of_trivial_over_cyclic() {
        let g = PermGroup::generate(2, vec![Permutation::from_cycles(2, &[&[1, 2]]).unwrap()]).unwrap();
        let t = GroupRingModule::trivial(&g, 0, Some(2), 1).unwrap();
        assert_eq!(tor1_over_group_ring(&t, &t).unwrap().torsion, vec![2]);
        let r = GroupRingModule::regular(&g, 0, Some(2)).unwrap();
        assert!(tor1_over_group_ring(&r, &t).unwrap().is_zero());
        let t2 = t.reduce_mod(2).unwrap();
        assert_eq!(tor1_over_group_ring(&t2, &t2).unwrap(), FGAbGroup::fp(2, 1));
    }
}
