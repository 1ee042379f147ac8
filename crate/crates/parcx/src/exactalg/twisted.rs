use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::homology::{cohomology, homology, ChainComplex, CochainComplex, FGAbGroup, Ring};
use super::matrix::SparseIntMatrix;
use super::modules::GroupRingModule;
use crate::error::{Error, Result};
use crate::permgroups::{PermGroup, Permutation};

/// One term `coeff·g·r` of a boundary, `r` an orbit representative one
/// degree down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeTerm {
    pub coeff: i64,
    pub element: Permutation,
    pub target: usize,
}

/// A chain complex of free `Z[W]`-modules given by orbit representatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreeGComplex {
    pub group: PermGroup,
    /// Number of free generators in each degree.
    pub reps: Vec<usize>,
    /// `boundary[q][r]` is `∂` of representative `r` in degree `q`.
    pub boundary: Vec<Vec<Vec<FreeTerm>>>,
}

impl FreeGComplex {
    /// Validates indices, group membership and `∂∂ = 0` in the group ring.
    pub fn new(group: PermGroup, reps: Vec<usize>, boundary: Vec<Vec<Vec<FreeTerm>>>) -> Result<Self> {
        if boundary.len() != reps.len() {
            return Err(Error::Domain("one boundary list per degree is required".into()));
        }
        for (q, deg) in boundary.iter().enumerate() {
            if deg.len() != reps[q] {
                return Err(Error::Domain(format!("degree {q} lists {} boundaries for {} cells", deg.len(), reps[q])));
            }
            for t in deg.iter().flatten() {
                if q == 0 || t.target >= reps[q - 1] {
                    return Err(Error::Domain(format!("boundary term in degree {q} names a missing cell")));
                }
                if !group.contains(&t.element) {
                    return Err(Error::Containment(format!("{} is not in the acting group", t.element)));
                }
            }
        }
        let c = FreeGComplex { group, reps, boundary };
        c.check()?;
        Ok(c)
    }

    pub fn top(&self) -> usize {
        self.reps.len().saturating_sub(1)
    }

    fn check(&self) -> Result<()> {
        for q in 2..self.reps.len() {
            for r in 0..self.reps[q] {
                let mut acc: std::collections::BTreeMap<(usize, Permutation), i64> = Default::default();
                for t in &self.boundary[q][r] {
                    for u in &self.boundary[q - 1][t.target] {
                        *acc.entry((u.target, t.element.compose(&u.element))).or_default() += t.coeff * u.coeff;
                    }
                }
                if acc.values().any(|&v| v != 0) {
                    return Err(Error::Integrity(format!("boundary composite nonzero on cell {r} of degree {q}")));
                }
            }
        }
        Ok(())
    }
}

fn ring_of(m: &GroupRingModule) -> Ring {
    if m.characteristic == 0 {
        Ring::Integers
    } else {
        Ring::Fp(m.characteristic)
    }
}

fn check_module(c: &FreeGComplex, m: &GroupRingModule) -> Result<()> {
    if c.group != m.group {
        return Err(Error::Domain("module is over a different group".into()));
    }
    Ok(())
}

fn report(m: &GroupRingModule, g: FGAbGroup) -> FGAbGroup {
    match m.prime {
        Some(p) if m.characteristic == 0 => g.p_localize(p),
        _ => g,
    }
}

/// `C ⊗_{Z[W]} M` as a chain complex; `g·r ⊗ m = r ⊗ g⁻¹·m`.
pub fn twisted_chains(c: &FreeGComplex, m: &GroupRingModule) -> Result<ChainComplex> {
    check_module(c, m)?;
    let n = m.rank;
    let dims: Vec<usize> = c.reps.iter().map(|r| r * n).collect();
    let mut bds = vec![SparseIntMatrix::zeros(0, dims[0])];
    for q in 1..c.reps.len() {
        let mut d = SparseIntMatrix::zeros(dims[q - 1], dims[q]);
        for (r, terms) in c.boundary[q].iter().enumerate() {
            for t in terms {
                let rho = m.matrix(&t.element.inverse())?;
                for i in 0..n {
                    for j in 0..n {
                        if rho[i][j] != 0 {
                            d.add(t.target * n + i, r * n + j, &BigInt::from(t.coeff * rho[i][j]));
                        }
                    }
                }
            }
        }
        bds.push(d);
    }
    ChainComplex::new(ring_of(m), dims, bds)
}

/// `Hom_{Z[W]}(C, M)`; a cochain is its values on representatives.
pub fn twisted_cochains(c: &FreeGComplex, m: &GroupRingModule) -> Result<CochainComplex> {
    check_module(c, m)?;
    let n = m.rank;
    let dims: Vec<usize> = c.reps.iter().map(|r| r * n).collect();
    let mut cob = Vec::new();
    for q in 0..c.reps.len() {
        if q + 1 == c.reps.len() {
            cob.push(SparseIntMatrix::zeros(0, dims[q]));
            continue;
        }
        let mut d = SparseIntMatrix::zeros(dims[q + 1], dims[q]);
        for (r, terms) in c.boundary[q + 1].iter().enumerate() {
            for t in terms {
                let rho = m.matrix(&t.element)?;
                for i in 0..n {
                    for j in 0..n {
                        if rho[i][j] != 0 {
                            d.add(r * n + i, t.target * n + j, &BigInt::from(t.coeff * rho[i][j]));
                        }
                    }
                }
            }
        }
        cob.push(d);
    }
    let cc = CochainComplex { ring: ring_of(m), dims, coboundaries: cob };
    cc.check()?;
    Ok(cc)
}

/// `H_q(C ⊗_{Z[W]} M)` for `q = 0..=max_degree`.
pub fn twisted_homology(c: &FreeGComplex, m: &GroupRingModule, max_degree: usize) -> Result<Vec<FGAbGroup>> {
    let cc = twisted_chains(c, m)?;
    (0..=max_degree).map(|q| homology(&cc, q).map(|g| report(m, g))).collect()
}

/// `H^q(Hom_{Z[W]}(C, M))` for `q = 0..=max_degree`.
pub fn twisted_cohomology(c: &FreeGComplex, m: &GroupRingModule, max_degree: usize) -> Result<Vec<FGAbGroup>> {
    let cc = twisted_cochains(c, m)?;
    (0..=max_degree).map(|q| cohomology(&cc, q).map(|g| report(m, g))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_z2() -> FreeGComplex {
        // S^1 with antipodal action: one free vertex orbit, one free edge orbit
        let t = Permutation::from_cycles(2, &[&[1, 2]]).unwrap();
        let g = PermGroup::generate(2, vec![t.clone()]).unwrap();
        let e = g.identity();
        let d1 = vec![vec![
            FreeTerm { coeff: 1, element: t, target: 0 },
            FreeTerm { coeff: -1, element: e, target: 0 },
        ]];
        FreeGComplex::new(g, vec![1, 1], vec![vec![vec![]], d1]).unwrap()
    }

    #[test]
    fn projective_line() {
        let c = circle_z2();
        let triv = GroupRingModule::trivial(&c.group, 0, None, 1).unwrap();
        let h = twisted_homology(&c, &triv, 1).unwrap();
        assert_eq!(h[0], FGAbGroup::free(1));
        assert_eq!(h[1], FGAbGroup::free(1));
        let sign = GroupRingModule::sign(&c.group, 0, None).unwrap();
        let h = twisted_homology(&c, &sign, 1).unwrap();
        assert_eq!(h[0].torsion, vec![2]);
    }
}
