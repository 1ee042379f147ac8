use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::fp::fp_rank;
use super::matrix::{dense_mul, DenseMat, SparseIntMatrix};
use super::snf::{integer_kernel, invariant_factors, smith_normal_form, solve_integer};
use crate::error::{Error, Result};

/// Coefficient ring of a computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    Integers,
    Fp(u64),
}

impl Ring {
    pub fn characteristic(&self) -> u64 {
        match self {
            Ring::Integers => 0,
            Ring::Fp(p) => *p,
        }
    }
}

/// A finitely generated abelian group `Z^rank ⊕ ⊕ Z/d_i`.
///
/// When `prime` is set the group is reported `p`-locally: the free part
/// stands for `Z_(p)^rank` and torsion factors are powers of `p`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FGAbGroup {
    pub rank: usize,
    pub torsion: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
}

impl PartialEq for FGAbGroup {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.torsion == other.torsion
    }
}
impl Eq for FGAbGroup {}

impl FGAbGroup {
    pub fn zero() -> Self {
        FGAbGroup::default()
    }

    pub fn free(rank: usize) -> Self {
        FGAbGroup { rank, torsion: vec![], prime: None }
    }

    /// An `F_p`-vector space of the given dimension.
    pub fn fp(p: u64, dim: usize) -> Self {
        FGAbGroup { rank: 0, torsion: vec![p; dim], prime: Some(p) }
    }

    pub fn from_factors(rank: usize, factors: &[BigInt]) -> Result<Self> {
        let mut torsion = Vec::new();
        for d in factors {
            if d.is_one() {
                continue;
            }
            torsion.push(d.to_u64().ok_or_else(|| Error::Capacity(format!("torsion factor {d} exceeds u64")))?);
        }
        torsion.sort_unstable();
        Ok(FGAbGroup { rank, torsion, prime: None })
    }

    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    /// Keeps only the `p`-primary part of each torsion factor.
    pub fn p_localize(&self, p: u64) -> Self {
        let mut torsion: Vec<u64> = self
            .torsion
            .iter()
            .map(|&d| {
                let mut q = 1;
                let mut d = d;
                while d % p == 0 {
                    d /= p;
                    q *= p;
                }
                q
            })
            .filter(|&q| q > 1)
            .collect();
        torsion.sort_unstable();
        FGAbGroup { rank: self.rank, torsion, prime: Some(p) }
    }

    /// Total count of cyclic summands.
    pub fn generators(&self) -> usize {
        self.rank + self.torsion.len()
    }
}

impl fmt::Display for FGAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.rank > 0 {
            let base = match self.prime {
                Some(p) => format!("Z({p})"),
                None => "Z".into(),
            };
            parts.push(if self.rank == 1 { base } else { format!("{base}^{}", self.rank) });
        }
        for d in &self.torsion {
            parts.push(format!("Z/{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Integral chain complexes share the same type.
pub type ChainComplexZ = ChainComplex;

/// `∂_q : C_q → C_{q−1}` for `q = 1..=top`; `boundaries[0]` is unused.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainComplex {
    pub ring: Ring,
    pub dims: Vec<usize>,
    pub boundaries: Vec<SparseIntMatrix>,
}

impl ChainComplex {
    pub fn new(ring: Ring, dims: Vec<usize>, mut boundaries: Vec<SparseIntMatrix>) -> Result<Self> {
        if boundaries.len() + 1 == dims.len() {
            boundaries.insert(0, SparseIntMatrix::zeros(0, dims.first().copied().unwrap_or(0)));
        }
        if boundaries.len() != dims.len() {
            return Err(Error::Domain("boundary count does not match degrees".into()));
        }
        for q in 1..dims.len() {
            let b = &boundaries[q];
            if b.rows() != dims[q - 1] || b.cols() != dims[q] {
                return Err(Error::Domain(format!("boundary {q} has shape {}x{}", b.rows(), b.cols())));
            }
        }
        let c = ChainComplex { ring, dims, boundaries };
        c.check()?;
        Ok(c)
    }

    pub fn top(&self) -> usize {
        self.dims.len().saturating_sub(1)
    }

    pub fn dim(&self, q: usize) -> usize {
        self.dims.get(q).copied().unwrap_or(0)
    }

    pub fn boundary(&self, q: usize) -> Option<&SparseIntMatrix> {
        if q >= 1 && q < self.dims.len() {
            Some(&self.boundaries[q])
        } else {
            None
        }
    }

    /// Verifies `∂∂ = 0`.
    pub fn check(&self) -> Result<()> {
        for q in 2..self.dims.len() {
            let mut prod = self.boundaries[q - 1].mul(&self.boundaries[q])?;
            if let Ring::Fp(p) = self.ring {
                prod = prod.reduce_mod(p);
            }
            if !prod.is_zero() {
                return Err(Error::Integrity(format!("boundary composite nonzero in degree {q}")));
            }
        }
        Ok(())
    }

    /// The dual cochain complex `Hom(C, R)`.
    pub fn dual(&self) -> CochainComplex {
        let top = self.top();
        let mut cob = Vec::new();
        for q in 0..top {
            cob.push(self.boundaries[q + 1].transpose());
        }
        cob.push(SparseIntMatrix::zeros(0, self.dim(top)));
        CochainComplex { ring: self.ring, dims: self.dims.clone(), coboundaries: cob }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().enumerate().map(|(q, &d)| if q % 2 == 0 { d as i64 } else { -(d as i64) }).sum()
    }
}

/// `δ^q : C^q → C^{q+1}` for `q = 0..=top`; the last map is to zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CochainComplex {
    pub ring: Ring,
    pub dims: Vec<usize>,
    pub coboundaries: Vec<SparseIntMatrix>,
}

impl CochainComplex {
    pub fn check(&self) -> Result<()> {
        for q in 1..self.dims.len() {
            let mut prod = self.coboundaries[q].mul(&self.coboundaries[q - 1])?;
            if let Ring::Fp(p) = self.ring {
                prod = prod.reduce_mod(p);
            }
            if !prod.is_zero() {
                return Err(Error::Integrity(format!("coboundary composite nonzero in degree {q}")));
            }
        }
        Ok(())
    }
}

fn rank_of(m: &SparseIntMatrix, ring: Ring) -> usize {
    match ring {
        Ring::Integers => invariant_factors(m).len(),
        Ring::Fp(p) => fp_rank(m, p),
    }
}

/// `ker(out) / im(inc)` on a space of dimension `dim`.
fn subquotient(dim: usize, out: Option<&SparseIntMatrix>, inc: Option<&SparseIntMatrix>, ring: Ring) -> Result<FGAbGroup> {
    let r_out = out.map_or(0, |m| rank_of(m, ring));
    match ring {
        Ring::Integers => {
            let f = inc.map(invariant_factors).unwrap_or_default();
            let rank = dim - r_out - f.len();
            FGAbGroup::from_factors(rank, &f)
        }
        Ring::Fp(p) => {
            let r_in = inc.map_or(0, |m| fp_rank(m, p));
            Ok(FGAbGroup::fp(p, dim - r_out - r_in))
        }
    }
}

/// `H_q(C)`; over `F_p` the answer is an elementary abelian `p`-group.
pub fn homology(c: &ChainComplex, q: usize) -> Result<FGAbGroup> {
    if q > c.top() {
        return Ok(match c.ring {
            Ring::Fp(p) => FGAbGroup::fp(p, 0),
            Ring::Integers => FGAbGroup::zero(),
        });
    }
    subquotient(c.dim(q), c.boundary(q), c.boundary(q + 1), c.ring)
}

/// `H^q(C)`.
pub fn cohomology(c: &CochainComplex, q: usize) -> Result<FGAbGroup> {
    if q >= c.dims.len() {
        return Ok(match c.ring {
            Ring::Fp(p) => FGAbGroup::fp(p, 0),
            Ring::Integers => FGAbGroup::zero(),
        });
    }
    let out = &c.coboundaries[q];
    let inc = if q > 0 { Some(&c.coboundaries[q - 1]) } else { None };
    subquotient(c.dims[q], if out.rows() > 0 { Some(out) } else { None }, inc, c.ring)
}

/// Explicit cycles generating `H_q` over the integers.
#[derive(Clone, Debug)]
pub struct HomologyWitnesses {
    pub group: FGAbGroup,
    /// Generators of the cyclic summands: torsion generators first (matching
    /// `group.torsion`), then free generators.
    pub generators: Vec<Vec<BigInt>>,
    /// Orders of the summands, `0` for free ones.
    pub orders: Vec<BigInt>,
    cycle_basis: Vec<Vec<BigInt>>,
    /// Rows map cycle coordinates to summand coordinates.
    to_summands: DenseMat,
}

impl HomologyWitnesses {
    /// Coordinates of a cycle in the summand basis (torsion entries reduced).
    pub fn coordinates(&self, z: &[BigInt]) -> Result<Vec<BigInt>> {
        let n = z.len();
        let k = self.cycle_basis.len();
        if k == 0 {
            return if z.iter().all(|x| x.is_zero()) {
                Ok(vec![])
            } else {
                Err(Error::Integrity("vector is not a cycle".into()))
            };
        }
        let mut b = SparseIntMatrix::zeros(n, k);
        for (j, col) in self.cycle_basis.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                b.set(i, j, x.clone());
            }
        }
        let sf = smith_normal_form(&b);
        let c = solve_integer(&sf, z).ok_or_else(|| Error::Integrity("vector is not a cycle".into()))?;
        Ok(self
            .to_summands
            .iter()
            .zip(&self.orders)
            .map(|(row, ord)| {
                let x: BigInt = row.iter().zip(&c).map(|(a, b)| a * b).sum();
                if ord.is_zero() {
                    x
                } else {
                    ((x % ord) + ord) % ord
                }
            })
            .collect())
    }
}

/// `H_q` over the integers together with generating cycles.
pub fn homology_with_witnesses(c: &ChainComplex, q: usize) -> Result<HomologyWitnesses> {
    if c.ring != Ring::Integers {
        return Err(Error::Domain("witnesses are computed over the integers".into()));
    }
    let n = c.dim(q);
    let z: Vec<Vec<BigInt>> = match c.boundary(q) {
        Some(d) => integer_kernel(d),
        None => (0..n).map(|i| (0..n).map(|j| BigInt::from(u8::from(i == j))).collect()).collect(),
    };
    let k = z.len();
    let mut zb = SparseIntMatrix::zeros(n, k);
    for (j, col) in z.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            zb.set(i, j, x.clone());
        }
    }
    // boundaries in cycle coordinates
    let bcols = c.boundary(q + 1).map(|b| b.columns()).unwrap_or_default();
    let zsf = smith_normal_form(&zb);
    let mut coords = SparseIntMatrix::zeros(k, bcols.len());
    for (j, col) in bcols.iter().enumerate() {
        let mut v = vec![BigInt::zero(); n];
        for (i, x) in col {
            v[*i] = x.clone();
        }
        let x = solve_integer(&zsf, &v).ok_or_else(|| Error::Integrity("boundary is not a cycle".into()))?;
        for (i, val) in x.into_iter().enumerate() {
            coords.set(i, j, val);
        }
    }
    let sf = smith_normal_form(&coords);
    // new cycle basis Z·U⁻¹; column i pairs with diagonal entry i
    let zdense: DenseMat = (0..n).map(|i| z.iter().map(|col| col[i].clone()).collect()).collect();
    let newbasis = if k > 0 { dense_mul(&zdense, &sf.left_inverse, k) } else { vec![] };
    let col = |j: usize| -> Vec<BigInt> { newbasis.iter().map(|row| row[j].clone()).collect() };
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for j in 0..sf.rank() {
        let d = &sf.invariant_factors[j];
        if !d.is_one() {
            generators.push(col(j));
            orders.push(d.clone());
        }
    }
    for j in sf.rank()..k {
        generators.push(col(j));
        orders.push(BigInt::zero());
    }
    let group = FGAbGroup::from_factors(k - sf.rank(), &sf.invariant_factors)?;
    // torsion summands first, then free ones, matching `generators`
    let mut order_idx: Vec<usize> = (0..sf.rank()).filter(|&j| !sf.invariant_factors[j].is_one()).collect();
    order_idx.extend(sf.rank()..k);
    let to_summands: DenseMat = order_idx.iter().map(|&j| sf.left_transform[j].clone()).collect();
    Ok(HomologyWitnesses { group, generators, orders, cycle_basis: z, to_summands })
}

/// Matrix of a chain map on `H_q`, in witness coordinates.
#[derive(Clone, Debug)]
pub struct InducedMap {
    pub source: FGAbGroup,
    pub target: FGAbGroup,
    /// Column `j` is the image of source summand `j`.
    pub matrix: Vec<Vec<BigInt>>,
}

/// Induced map of `f : C → C'` on `H_q`; `f[q]` is the degree-`q` component.
pub fn induced_map_on_homology(src: &ChainComplex, dst: &ChainComplex, f: &[SparseIntMatrix], q: usize) -> Result<InducedMap> {
    for deg in [q, q + 1] {
        if deg == 0 || deg > src.top() {
            continue;
        }
        let (Some(fd), Some(fd1)) = (f.get(deg), f.get(deg - 1)) else {
            return Err(Error::Domain("chain map is missing a degree".into()));
        };
        let lhs = match dst.boundary(deg) {
            Some(b) => b.mul(fd)?,
            None => SparseIntMatrix::zeros(dst.dim(deg - 1), src.dim(deg)),
        };
        let rhs = fd1.mul(src.boundary(deg).expect("degree in range"))?;
        if !lhs.sub(&rhs).is_zero() {
            return Err(Error::Integrity(format!("not a chain map in degree {deg}")));
        }
    }
    let a = homology_with_witnesses(src, q)?;
    let b = homology_with_witnesses(dst, q)?;
    let fq = f.get(q).ok_or_else(|| Error::Domain("chain map is missing a degree".into()))?;
    let mut cols = Vec::new();
    for g in &a.generators {
        cols.push(b.coordinates(&fq.mul_vec(g))?);
    }
    let rows = b.generators.len();
    let matrix = (0..rows).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    Ok(InducedMap { source: a.group.clone(), target: b.group.clone(), matrix })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> ChainComplex {
        // three vertices, three edges
        let d1 = SparseIntMatrix::from_dense(&[vec![-1, 0, 1], vec![1, -1, 0], vec![0, 1, -1]]);
        ChainComplex::new(Ring::Integers, vec![3, 3], vec![d1]).unwrap()
    }

    #[test]
    fn circle_homology() {
        let c = circle();
        assert_eq!(homology(&c, 0).unwrap(), FGAbGroup::free(1));
        assert_eq!(homology(&c, 1).unwrap(), FGAbGroup::free(1));
        let w = homology_with_witnesses(&c, 1).unwrap();
        assert_eq!(w.generators.len(), 1);
    }

    #[test]
    fn rp2_torsion() {
        // Z --2--> Z
        let d1 = SparseIntMatrix::from_dense(&[vec![2]]);
        let c = ChainComplex::new(Ring::Integers, vec![1, 1], vec![d1]).unwrap();
        let h = homology(&c, 0).unwrap();
        assert_eq!(h.torsion, vec![2]);
        assert!(h.p_localize(3).is_zero());
        let w = homology_with_witnesses(&c, 0).unwrap();
        assert_eq!(w.orders, vec![BigInt::from(2)]);
    }
}
