//! Bredon chains and cochains of order complexes with coefficients in a
//! coefficient system or Mackey functor.
//!
//! Degree `q` of the chain complex is `⊕ γ(G/Stab σ)` over orbit
//! representatives `σ` of `q`-simplices. The face `d_i` contributes
//! `(−1)^i` times the map induced by the orbit morphism `σ ↦ d_iσ`.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::complexes::{borel_model, GComplex, Label};
use crate::exactalg::{
    cohomology, homology, twisted_homology, ChainComplex, CochainComplex, FGAbGroup, FpHomologyBasis, GroupRingModule,
    Ring,
};
use crate::mackey::{
    contravariant_on_orbits, covariant_on_orbits, is_invertible, layout, modulus, FiniteGSet, MackeyFunctor, Mat, Orbit,
};
use crate::permgroups::{normalizer, PermGroup, Permutation};
use crate::verify::VerificationReport;
use crate::{Error, Result};

/// How orbit representatives and witnesses are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Representatives {
    #[default]
    Canonical,
    /// Random representatives and witnesses from a seeded generator.
    Shuffled(u64),
}

/// The `G`-set of `q`-simplices.
pub fn simplex_gset(x: &GComplex, q: usize) -> Result<FiniteGSet> {
    let n = x.count(q);
    let imgs = (0..x.gen_images.len()).map(|k| (0..n).map(|s| x.act_simplex_by_generator(k, q, s)).collect()).collect();
    FiniteGSet::new(x.group.clone(), n, imgs)
}

/// `d_i : X_q → X_{q−1}` on simplex indices.
pub fn face_map(x: &GComplex, q: usize, i: usize) -> Vec<usize> {
    x.simplices[q]
        .iter()
        .map(|s| {
            let mut f = s.clone();
            f.remove(i);
            x.simplex_index(q - 1, &f).expect("faces are present")
        })
        .collect()
}

fn decompose(x: &GComplex, reps: Representatives) -> Result<Vec<Vec<Orbit>>> {
    let mut rng = match reps {
        Representatives::Canonical => None,
        Representatives::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut out = Vec::new();
    for q in 0..x.simplices.len() {
        out.push(simplex_gset(x, q)?.orbits_with(rng.as_mut()));
    }
    Ok(out)
}

fn check_group(x: &GComplex, g: &dyn MackeyFunctor) -> Result<()> {
    if x.group != *g.group() {
        return Err(Error::Domain(format!("coefficients live on {} but the complex carries {}", g.group(), x.group)));
    }
    Ok(())
}

/// Row range of the basepoint's `G/G` block in degree 0.
fn basepoint_block(x: &GComplex, g: &dyn MackeyFunctor, orbits0: &[Orbit], b: usize) -> Result<(usize, usize)> {
    let v = x.basepoint.ok_or_else(|| Error::Domain("reduced homology needs a basepoint".into()))?;
    let s = x.simplex_index(0, &[v]).expect("basepoint is a vertex");
    let (offs, _) = layout(g, orbits0, b)?;
    let o = orbits0.iter().position(|o| o.points.contains(&s)).expect("every vertex lies in an orbit");
    Ok((offs[o], g.rank(&orbits0[o].stabilizer, b)?))
}

fn drop_rows(m: &Mat, start: usize, len: usize) -> Mat {
    let rows: Vec<Vec<i64>> = m.to_rows().into_iter().enumerate().filter(|(i, _)| *i < start || *i >= start + len).map(|(_, r)| r).collect();
    Mat::from_rows(rows.len(), m.cols, &rows).expect("shape preserved")
}

fn drop_cols(m: &Mat, start: usize, len: usize) -> Mat {
    let rows: Vec<Vec<i64>> = m
        .to_rows()
        .into_iter()
        .map(|r| r.into_iter().enumerate().filter(|(j, _)| *j < start || *j >= start + len).map(|(_, v)| v).collect())
        .collect();
    Mat::from_rows(m.rows, m.cols - len.min(m.cols), &rows).expect("shape preserved")
}

/// One orbit of simplices as it appears in serialized output.
#[derive(Clone, Debug, Serialize)]
pub struct OrbitSummary {
    /// 1-based vertex indices of the representative.
    pub representative: Vec<usize>,
    pub stabilizer_order: usize,
    pub stabilizer: String,
    pub rank: usize,
}

fn summaries(x: &GComplex, g: &dyn MackeyFunctor, orbits: &[Vec<Orbit>], b: usize) -> Result<Vec<Vec<OrbitSummary>>> {
    orbits
        .iter()
        .enumerate()
        .map(|(q, os)| {
            os.iter()
                .map(|o| {
                    Ok(OrbitSummary {
                        representative: x.simplices[q][o.rep].iter().map(|v| v + 1).collect(),
                        stabilizer_order: o.stabilizer.order(),
                        stabilizer: o.stabilizer.to_string(),
                        rank: g.rank(&o.stabilizer, b)?,
                    })
                })
                .collect()
        })
        .collect()
}

fn ring_of(g: &dyn MackeyFunctor) -> Ring {
    g.ring()
}

fn report_value(a: FGAbGroup, prime: Option<u64>, ring: Ring) -> FGAbGroup {
    match (ring, prime) {
        (Ring::Integers, Some(p)) => a.p_localize(p),
        _ => a,
    }
}

/// Bredon chains `C_*(X; γ)`.
#[derive(Clone, Debug, Serialize)]
pub struct BredonChainComplex {
    pub functor: String,
    pub internal_degree: usize,
    pub reduced: bool,
    pub orbits: Vec<Vec<OrbitSummary>>,
    /// `boundaries[q]: C_q → C_{q−1}` for `q ≥ 1`.
    #[serde(skip)]
    pub boundaries: Vec<Mat>,
    pub chains: ChainComplex,
    pub prime: Option<u64>,
}

impl BredonChainComplex {
    pub fn homology(&self, q: usize) -> Result<FGAbGroup> {
        Ok(report_value(homology(&self.chains, q)?, self.prime, self.chains.ring))
    }

    pub fn homology_all(&self) -> Result<Vec<FGAbGroup>> {
        (0..self.chains.dims.len()).map(|q| self.homology(q)).collect()
    }
}

/// Bredon cochains `C^*(X; γ^♮)`.
#[derive(Clone, Debug, Serialize)]
pub struct BredonCochainComplex {
    pub functor: String,
    pub internal_degree: usize,
    pub reduced: bool,
    pub orbits: Vec<Vec<OrbitSummary>>,
    /// `coboundaries[q]: C^q → C^{q+1}`.
    #[serde(skip)]
    pub coboundaries: Vec<Mat>,
    pub cochains: CochainComplex,
    pub prime: Option<u64>,
}

impl BredonCochainComplex {
    pub fn cohomology(&self, q: usize) -> Result<FGAbGroup> {
        Ok(report_value(cohomology(&self.cochains, q)?, self.prime, self.cochains.ring))
    }

    pub fn cohomology_all(&self) -> Result<Vec<FGAbGroup>> {
        (0..self.cochains.dims.len()).map(|q| self.cohomology(q)).collect()
    }
}

fn chain_mats(x: &GComplex, g: &dyn MackeyFunctor, orbits: &[Vec<Orbit>], b: usize) -> Result<(Vec<usize>, Vec<Mat>)> {
    let m = modulus(g);
    let dims = orbits.iter().map(|os| layout(g, os, b).map(|l| l.1)).collect::<Result<Vec<_>>>()?;
    let bds = (1..orbits.len())
        .into_par_iter()
        .map(|q| {
            let mut d = Mat::zeros(dims[q - 1], dims[q]);
            for i in 0..=q {
                let f = covariant_on_orbits(g, &face_map(x, q, i), &orbits[q], &orbits[q - 1], b)?;
                d = d.add(&f.scale(if i % 2 == 0 { 1 } else { -1 }, m), m)?;
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((dims, bds))
}

fn cochain_mats(x: &GComplex, g: &dyn MackeyFunctor, orbits: &[Vec<Orbit>], b: usize) -> Result<(Vec<usize>, Vec<Mat>)> {
    let m = modulus(g);
    let dims = orbits.iter().map(|os| layout(g, os, b).map(|l| l.1)).collect::<Result<Vec<_>>>()?;
    let mut cbds = (1..orbits.len())
        .into_par_iter()
        .map(|q| {
            let mut d = Mat::zeros(dims[q], dims[q - 1]);
            for i in 0..=q {
                let f = contravariant_on_orbits(g, &face_map(x, q, i), &orbits[q], &orbits[q - 1], b)?;
                d = d.add(&f.scale(if i % 2 == 0 { 1 } else { -1 }, m), m)?;
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(&last) = dims.last() {
        cbds.push(Mat::zeros(0, last));
    }
    Ok((dims, cbds))
}

fn assemble_chains(
    x: &GComplex,
    g: &dyn MackeyFunctor,
    orbits: &[Vec<Orbit>],
    b: usize,
    reduced: bool,
) -> Result<BredonChainComplex> {
    let (mut dims, mut bds) = chain_mats(x, g, orbits, b)?;
    if reduced && !orbits.is_empty() {
        let (start, len) = basepoint_block(x, g, &orbits[0], b)?;
        dims[0] -= len;
        if let Some(d1) = bds.first_mut() {
            *d1 = drop_rows(d1, start, len);
        }
    }
    if dims.is_empty() {
        dims.push(0);
    }
    let chains = ChainComplex::new(ring_of(g), dims, bds.iter().map(Mat::to_sparse).collect())?;
    Ok(BredonChainComplex {
        functor: g.name(),
        internal_degree: b,
        reduced,
        orbits: summaries(x, g, orbits, b)?,
        boundaries: bds,
        chains,
        prime: g.prime(),
    })
}

fn assemble_cochains(
    x: &GComplex,
    g: &dyn MackeyFunctor,
    orbits: &[Vec<Orbit>],
    b: usize,
    reduced: bool,
) -> Result<BredonCochainComplex> {
    let (mut dims, mut cbds) = cochain_mats(x, g, orbits, b)?;
    if reduced && !orbits.is_empty() {
        let (start, len) = basepoint_block(x, g, &orbits[0], b)?;
        dims[0] -= len;
        cbds[0] = drop_cols(&cbds[0], start, len);
    }
    if dims.is_empty() {
        dims.push(0);
        cbds.push(Mat::zeros(0, 0));
    }
    let cochains = CochainComplex { ring: ring_of(g), dims, coboundaries: cbds.iter().map(Mat::to_sparse).collect() };
    cochains.check()?;
    Ok(BredonCochainComplex {
        functor: g.name(),
        internal_degree: b,
        reduced,
        orbits: summaries(x, g, orbits, b)?,
        coboundaries: cbds,
        cochains,
        prime: g.prime(),
    })
}

pub fn bredon_chains(
    x: &GComplex,
    g: &dyn MackeyFunctor,
    b: usize,
    reduced: bool,
    reps: Representatives,
) -> Result<BredonChainComplex> {
    check_group(x, g)?;
    assemble_chains(x, g, &decompose(x, reps)?, b, reduced)
}

pub fn bredon_cochains(
    x: &GComplex,
    g: &dyn MackeyFunctor,
    b: usize,
    reduced: bool,
    reps: Representatives,
) -> Result<BredonCochainComplex> {
    check_group(x, g)?;
    assemble_cochains(x, g, &decompose(x, reps)?, b, reduced)
}

/// `H_q^{br}(X; γ)` for every `q` up to the dimension of `X`.
pub fn bredon_homology(x: &GComplex, g: &dyn MackeyFunctor, b: usize, reduced: bool) -> Result<Vec<FGAbGroup>> {
    bredon_chains(x, g, b, reduced, Representatives::Canonical)?.homology_all()
}

pub fn bredon_cohomology(x: &GComplex, g: &dyn MackeyFunctor, b: usize, reduced: bool) -> Result<Vec<FGAbGroup>> {
    bredon_cochains(x, g, b, reduced, Representatives::Canonical)?.cohomology_all()
}

/// A simplicial `G`-map of complexes, given on vertices.
#[derive(Clone, Debug)]
pub struct SimplicialGMap {
    pub source: GComplex,
    pub target: GComplex,
    pub vertex_map: Vec<usize>,
    /// Image index of every simplex, per degree.
    pub simplex_maps: Vec<Vec<usize>>,
}

impl SimplicialGMap {
    pub fn new(source: GComplex, target: GComplex, vertex_map: Vec<usize>) -> Result<Self> {
        if source.group != target.group || source.group.generators() != target.group.generators() {
            return Err(Error::Domain("source and target carry different actions".into()));
        }
        if vertex_map.len() != source.vertex_labels.len() || vertex_map.iter().any(|&v| v >= target.vertex_labels.len()) {
            return Err(Error::Domain("vertex map has the wrong shape".into()));
        }
        for (si, ti) in source.gen_images.iter().zip(&target.gen_images) {
            if (0..vertex_map.len()).any(|v| vertex_map[si[v]] != ti[vertex_map[v]]) {
                return Err(Error::Domain("vertex map is not equivariant".into()));
            }
        }
        let mut simplex_maps = Vec::new();
        for (q, level) in source.simplices.iter().enumerate() {
            let mut m = Vec::with_capacity(level.len());
            for s in level {
                let mut img: Vec<usize> = s.iter().map(|&v| vertex_map[v]).collect();
                img.sort_unstable();
                img.dedup();
                let t = (img.len() == q + 1)
                    .then(|| target.simplex_index(q, &img))
                    .flatten()
                    .ok_or_else(|| Error::Domain(format!("simplex {s:?} does not map to a {q}-simplex")))?;
                m.push(t);
            }
            simplex_maps.push(m);
        }
        Ok(SimplicialGMap { source, target, vertex_map, simplex_maps })
    }

    /// Checks that every face square is a pullback, i.e. `f` is a covering.
    pub fn check_covering(&self) -> Result<()> {
        for q in 1..self.source.simplices.len() {
            let mut pre: HashMap<usize, Vec<usize>> = HashMap::new();
            for (s, &t) in self.simplex_maps[q].iter().enumerate() {
                pre.entry(t).or_default().push(s);
            }
            let mut pre_low: HashMap<usize, HashSet<usize>> = HashMap::new();
            for (s, &t) in self.simplex_maps[q - 1].iter().enumerate() {
                pre_low.entry(t).or_default().insert(s);
            }
            for i in 0..=q {
                let ds = face_map(&self.source, q, i);
                let dt = face_map(&self.target, q, i);
                for y in 0..self.target.count(q) {
                    let ups = pre.get(&y).cloned().unwrap_or_default();
                    let downs: HashSet<usize> = ups.iter().map(|&s| ds[s]).collect();
                    let expect = pre_low.get(&dt[y]).cloned().unwrap_or_default();
                    if downs.len() != ups.len() || downs != expect {
                        return Err(Error::Domain(format!(
                            "face square d_{i} at target {q}-simplex {:?} is not a pullback",
                            self.target.simplices[q][y]
                        )));
                    }
                }
            }
        }
        if self.source.simplices.len() > self.target.simplices.len() {
            return Err(Error::Domain("source has higher dimension than target".into()));
        }
        Ok(())
    }

    /// Number of vertices over each target vertex.
    pub fn fibre_sizes(&self) -> Vec<usize> {
        let mut c = vec![0; self.target.vertex_labels.len()];
        for &v in &self.vertex_map {
            c[v] += 1;
        }
        c
    }
}

/// Chain-level transfer of a covering and the pushforward along it.
#[derive(Clone, Debug)]
pub struct BredonTransfer {
    pub source: BredonChainComplex,
    pub target: BredonChainComplex,
    /// `tr_q : C_q(Y) → C_q(X)`.
    pub transfer: Vec<Mat>,
    /// `f_q : C_q(X) → C_q(Y)`.
    pub pushforward: Vec<Mat>,
    pub source_cochains: BredonCochainComplex,
    pub target_cochains: BredonCochainComplex,
}

impl BredonTransfer {
    /// `f_* ∘ tr` on `C_q(Y)`; on cochains the same matrix computes `tr ∘ f^*`.
    pub fn composite(&self, q: usize) -> Result<Mat> {
        self.pushforward[q].mul(&self.transfer[q], modulus_of(self.source.chains.ring))
    }
}

fn modulus_of(r: Ring) -> u64 {
    r.characteristic()
}

fn commutes(a: &Mat, b: &Mat, c: &Mat, d: &Mat, m: u64) -> Result<bool> {
    Ok(a.mul(b, m)?.eq_mod(&c.mul(d, m)?, m))
}

/// Transfer along a covering `f: X → Y`, checked to be a chain map.
pub fn bredon_transfer(f: &SimplicialGMap, g: &dyn MackeyFunctor, b: usize) -> Result<BredonTransfer> {
    check_group(&f.source, g)?;
    f.check_covering()?;
    let xo = decompose(&f.source, Representatives::Canonical)?;
    let yo = decompose(&f.target, Representatives::Canonical)?;
    let m = modulus(g);
    let mut transfer = Vec::new();
    let mut pushforward = Vec::new();
    for q in 0..yo.len() {
        let (xs, ys) = (xo.get(q).map_or(&[][..], |v| &v[..]), &yo[q][..]);
        let map = f.simplex_maps.get(q).cloned().unwrap_or_default();
        transfer.push(contravariant_on_orbits(g, &map, xs, ys, b)?);
        pushforward.push(covariant_on_orbits(g, &map, xs, ys, b)?);
    }
    let source = assemble_chains(&f.source, g, &xo, b, false)?;
    let target = assemble_chains(&f.target, g, &yo, b, false)?;
    for q in 1..yo.len() {
        let xd = source.boundaries.get(q - 1).cloned();
        let yd = &target.boundaries[q - 1];
        if let Some(xd) = xd {
            if !commutes(&xd, &transfer[q], &transfer[q - 1], yd, m)? || !commutes(yd, &pushforward[q], &pushforward[q - 1], &xd, m)? {
                return Err(Error::Integrity(format!("transfer is not a chain map in degree {q}")));
            }
        }
    }
    let source_cochains = assemble_cochains(&f.source, g, &xo, b, false)?;
    let target_cochains = assemble_cochains(&f.target, g, &yo, b, false)?;
    Ok(BredonTransfer { source, target, transfer, pushforward, source_cochains, target_cochains })
}

/// Matrix over `F_p` of an endomorphism `a` of a complex on its homology in
/// one degree, where `leaving` starts there and `entering` ends there.
fn induced_endomorphism(a: &Mat, leaving: Option<&Mat>, entering: Option<&Mat>, dim: usize, p: u64) -> Result<Mat> {
    let rows = |m: Option<&Mat>| -> Vec<Vec<u64>> {
        m.map(|m| m.reduced(p).to_rows().into_iter().map(|r| r.into_iter().map(|v| v as u64).collect()).collect()).unwrap_or_default()
    };
    let basis = FpHomologyBasis::new(&rows(leaving), &rows(entering), dim, p);
    let a = a.reduced(p);
    let mut cols = Vec::new();
    for v in basis.reps() {
        let img: Vec<u64> = (0..dim).map(|i| (0..dim).fold(0u64, |s, j| (s + a.get(i, j) as u64 * v[j]) % p)).collect();
        cols.push(basis.coords(&img)?.into_iter().map(|c| c as i64).collect::<Vec<_>>());
    }
    Ok(Mat::from_columns(basis.dim(), &cols))
}

/// Checks that `f_* tr_f` on homology and `tr_f f^*` on cohomology are
/// invertible after localizing at `p`.
pub fn verify_transfer_retract(f: &SimplicialGMap, g: &dyn MackeyFunctor, p: u64, b: usize) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new(
        "transfer-retract",
        json!({"functor": g.name(), "prime": p, "internal_degree": b, "fibre_sizes": f.fibre_sizes()}),
    );
    if let Ring::Fp(q) = g.ring() {
        if q != p {
            return Err(Error::Domain(format!("coefficients are over F_{q}, not localized at {p}")));
        }
    }
    let bad: Vec<usize> = f.fibre_sizes().into_iter().filter(|&s| s % p as usize == 0).collect();
    if !bad.is_empty() {
        rep.push("fibre-sizes-prime-to-p", false, format!("fibre sizes {bad:?} are divisible by {p}"), json!(bad));
        rep.outcome = Some("precondition-violated".into());
        return Ok(rep);
    }
    rep.push("fibre-sizes-prime-to-p", true, "every fibre has size prime to p", serde_json::Value::Null);
    let t = bredon_transfer(f, g, b)?;
    let dims = &t.target.chains.dims;
    for q in 0..dims.len() {
        // f^* and tr on cochains are the matrices of tr and f_* on chains
        let a = t.composite(q)?;
        let leaving = q.checked_sub(1).and_then(|i| t.target.boundaries.get(i));
        let h = induced_endomorphism(&a, leaving, t.target.boundaries.get(q), dims[q], p)?;
        let ok = is_invertible(&h, Some(p));
        rep.push(&format!("homology-composite-{q}"), ok, format!("f_* tr on H_{q} of rank {}", h.rows), json!(h.to_rows()));
        let entering = q.checked_sub(1).and_then(|i| t.target_cochains.coboundaries.get(i));
        let hc = induced_endomorphism(&a, t.target_cochains.coboundaries.get(q), entering, dims[q], p)?;
        let ok = is_invertible(&hc, Some(p));
        rep.push(&format!("cohomology-composite-{q}"), ok, format!("tr f^* on H^{q} of rank {}", hc.rows), json!(hc.to_rows()));
    }
    Ok(rep)
}

/// `γ|_K(K/H) = γ(G/H)` for `H ≤ K ≤ G`.
pub struct RestrictedFunctor {
    inner: Arc<dyn MackeyFunctor>,
    group: PermGroup,
}

impl MackeyFunctor for RestrictedFunctor {
    fn name(&self) -> String {
        format!("res[{}]({})", self.group.order(), self.inner.name())
    }
    fn group(&self) -> &PermGroup {
        &self.group
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
        self.check(h)?;
        self.inner.rank(h, b)
    }
    fn transfer(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat> {
        self.check(k)?;
        self.inner.transfer(h, k, b)
    }
    fn restriction(&self, h: &PermGroup, k: &PermGroup, b: usize) -> Result<Mat> {
        self.check(k)?;
        self.inner.restriction(h, k, b)
    }
    fn conjugation(&self, h: &PermGroup, g: &Permutation, b: usize) -> Result<Mat> {
        self.check(h)?;
        if !self.group.contains(g) {
            return Err(Error::Containment(format!("{g} is not in {}", self.group)));
        }
        self.inner.conjugation(h, g, b)
    }
}

impl RestrictedFunctor {
    fn check(&self, h: &PermGroup) -> Result<()> {
        if h.is_subgroup_of(&self.group) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{h} is not a subgroup of {}", self.group)))
        }
    }
}

pub fn restrict_coefficients(g: Arc<dyn MackeyFunctor>, k: &PermGroup) -> Result<RestrictedFunctor> {
    if !k.is_subgroup_of(g.group()) {
        return Err(Error::Containment(format!("{k} is not contained in {}", g.group())));
    }
    Ok(RestrictedFunctor { inner: g, group: k.clone() })
}

/// `G ×_K Y`: vertex `(i, v)` is `t_i × v` for left coset representatives `t_i`.
pub fn induced_complex(g: &PermGroup, y: &GComplex) -> Result<GComplex> {
    let k = &y.group;
    if !k.is_subgroup_of(g) {
        return Err(Error::Containment(format!("{k} is not contained in {g}")));
    }
    let reps = g.left_coset_reps(k);
    let nv = y.vertex_labels.len();
    let mut coset: HashMap<Permutation, (usize, usize)> = HashMap::new();
    for (i, t) in reps.iter().enumerate() {
        for (e, x) in k.elements().iter().enumerate() {
            coset.insert(t.compose(x), (i, e));
        }
    }
    let tables = y.element_tables()?;
    let gen_images = g
        .generators()
        .iter()
        .map(|s| {
            let mut img = vec![0; reps.len() * nv];
            for (i, t) in reps.iter().enumerate() {
                let (j, e) = coset[&s.compose(t)];
                for v in 0..nv {
                    img[i * nv + v] = j * nv + tables[e][v] as usize;
                }
            }
            img
        })
        .collect();
    let labels = (0..reps.len()).flat_map(|i| (0..nv).map(move |v| Label::Simplex(vec![i, v]))).collect();
    let simplices = y
        .simplices
        .iter()
        .map(|level| (0..reps.len()).flat_map(|i| level.iter().map(move |s| s.iter().map(|v| i * nv + v).collect())).collect())
        .collect();
    GComplex::new(labels, simplices, g.clone(), gen_images, None)
}

/// Compares `H^{K,br}_*(Y; γ|_K)` with `H^{G,br}_*(G ×_K Y; γ)`.
pub fn verify_restriction_identity(g: Arc<dyn MackeyFunctor>, y: &GComplex, b: usize) -> Result<VerificationReport> {
    let k = y.group.clone();
    let mut rep = VerificationReport::new(
        "restriction-identity",
        json!({"functor": g.name(), "subgroup_order": k.order(), "internal_degree": b}),
    );
    let res = restrict_coefficients(g.clone(), &k)?;
    let left = bredon_homology(y, &res, b, false)?;
    let ind = induced_complex(g.group(), y)?;
    let right = bredon_homology(&ind, g.as_ref(), b, false)?;
    for q in 0..left.len().max(right.len()) {
        let l = left.get(q).cloned().unwrap_or_else(FGAbGroup::zero);
        let r = right.get(q).cloned().unwrap_or_else(FGAbGroup::zero);
        let same = l.rank == r.rank && l.torsion == r.torsion;
        rep.push(&format!("degree-{q}"), same, format!("restricted {l} vs induced {r}"), serde_json::Value::Null);
    }
    Ok(rep)
}

/// `X^D` with the residual action of `W = N_G(D)/D`.
pub fn fixed_points_with_weyl_action(x: &GComplex, d: &PermGroup) -> Result<(crate::permgroups::WeylData, GComplex)> {
    let wd = normalizer(&x.group, d)?;
    let tables = x.element_tables()?;
    let fixed = x.fixed_subcomplex(d)?;
    let dg: Vec<usize> = d.generators().iter().map(|g| x.group.position(g).expect("D ≤ G")).collect();
    let keep: Vec<usize> = (0..x.vertex_labels.len()).filter(|&v| dg.iter().all(|&g| tables[g][v] as usize == v)).collect();
    let mut renum = vec![usize::MAX; x.vertex_labels.len()];
    for (i, &v) in keep.iter().enumerate() {
        renum[v] = i;
    }
    let imgs = wd
        .quotient
        .generators()
        .iter()
        .map(|w| {
            let n = wd.lift(w)?;
            let t = &tables[x.group.position(&n).expect("N ≤ G")];
            Ok(keep.iter().map(|&v| renum[t[v] as usize]).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let f = fixed.with_action(wd.quotient.clone(), imgs)?;
    Ok((wd, f))
}

/// `γ(G/D)` as a module over the Weyl group.
pub fn weyl_module(wd: &crate::permgroups::WeylData, g: &dyn MackeyFunctor, b: usize) -> Result<GroupRingModule> {
    let d = &wd.subgroup;
    let rank = g.rank(d, b)?;
    let mats = wd
        .quotient
        .generators()
        .iter()
        .map(|w| Ok(g.conjugation(d, &wd.lift(w)?, b)?.to_rows()))
        .collect::<Result<Vec<_>>>()?;
    GroupRingModule::new(wd.quotient.clone(), g.ring().characteristic(), g.prime(), rank, mats)
}

fn remove_summand(a: &FGAbGroup, s: &FGAbGroup) -> Result<FGAbGroup> {
    let mut torsion = a.torsion.clone();
    for t in &s.torsion {
        let i = torsion.iter().position(|x| x == t).ok_or_else(|| Error::Integrity(format!("{s} is not a summand of {a}")))?;
        torsion.remove(i);
    }
    let rank = a.rank.checked_sub(s.rank).ok_or_else(|| Error::Integrity(format!("{s} is not a summand of {a}")))?;
    Ok(FGAbGroup { rank, torsion, prime: a.prime })
}

/// `H_*((X^D)_{hW}; γ(G/D))` in degrees `0..=max_degree`. The reduced
/// variant removes the summand split off by the basepoint.
pub fn one_class_approximation_homology(
    x: &GComplex,
    d: &PermGroup,
    g: &dyn MackeyFunctor,
    b: usize,
    max_degree: usize,
    reduced: bool,
) -> Result<Vec<FGAbGroup>> {
    check_group(x, g)?;
    let (wd, f) = fixed_points_with_weyl_action(x, d)?;
    let m = weyl_module(&wd, g, b)?;
    let zero = || match g.ring() {
        Ring::Fp(p) => FGAbGroup::fp(p, 0),
        Ring::Integers => FGAbGroup { rank: 0, torsion: vec![], prime: g.prime() },
    };
    if f.count(0) == 0 {
        return Ok(vec![zero(); max_degree + 1]);
    }
    let localize = |v: Vec<FGAbGroup>| -> Vec<FGAbGroup> { v.into_iter().map(|a| report_value(a, g.prime(), g.ring())).collect() };
    let hom = localize(twisted_homology(&borel_model(&wd.quotient, &f, max_degree + 1)?, &m, max_degree)?);
    if !reduced {
        return Ok(hom);
    }
    let bp = f.basepoint.ok_or_else(|| Error::Domain("reduced homology needs a basepoint fixed by D".into()))?;
    let pt = GComplex::new(
        vec![f.vertex_labels[bp].clone()],
        vec![vec![vec![0]]],
        wd.quotient.clone(),
        vec![vec![0]; wd.quotient.generators().len()],
        Some(0),
    )?;
    let base = localize(twisted_homology(&borel_model(&wd.quotient, &pt, max_degree + 1)?, &m, max_degree)?);
    hom.iter().zip(&base).map(|(a, s)| remove_summand(a, s)).collect()
}
