//! Permutation groups of small degree, stored with their full element list.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complexes::{Label, Poset};
use crate::error::{check_cap, Error, Result};

/// Largest group order materialised anywhere.
pub const MAX_ORDER: usize = 40320;

/// A bijection of `{0..n-1}`; serialised as 1-based image lists.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    img: Vec<u8>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation { img: (0..n as u8).collect() }
    }

    /// Builds from 0-based images.
    pub fn from_images0(img: Vec<u8>) -> Result<Self> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &i in &img {
            let i = i as usize;
            if i >= n || seen[i] {
                return Err(Error::Domain(format!("not a bijection: {img:?}")));
            }
            seen[i] = true;
        }
        Ok(Permutation { img })
    }

    /// Builds from 1-based images, as in `[2,1,4,3]`.
    pub fn from_images(img: &[usize]) -> Result<Self> {
        if img.len() > 255 {
            return Err(Error::Capacity("degree above 255".into()));
        }
        let v: Option<Vec<u8>> = img.iter().map(|&i| i.checked_sub(1).map(|x| x as u8)).collect();
        match v {
            Some(v) if img.iter().all(|&i| i <= 255) => Self::from_images0(v),
            _ => Err(Error::Domain(format!("bad image list {img:?}"))),
        }
    }

    /// Builds from 1-based cycles, e.g. `&[&[1,2],&[3,4]]`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut img: Vec<u8> = (0..n as u8).collect();
        let mut used = HashSet::new();
        for c in cycles {
            for (i, &x) in c.iter().enumerate() {
                let y = c[(i + 1) % c.len()];
                if x == 0 || x > n || y == 0 || y > n || !used.insert(x) {
                    return Err(Error::Domain(format!("bad cycle {c:?}")));
                }
                img[x - 1] = (y - 1) as u8;
            }
        }
        Self::from_images0(img)
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    /// Image of the 0-based point `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.img[i] as usize
    }

    pub fn images0(&self) -> &[u8] {
        &self.img
    }

    pub fn images(&self) -> Vec<usize> {
        self.img.iter().map(|&i| i as usize + 1).collect()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation { img: other.img.iter().map(|&i| self.img[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.img.len()];
        for (i, &j) in self.img.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        Permutation { img: inv }
    }

    /// `g self g⁻¹`.
    pub fn conjugate_by(&self, g: &Permutation) -> Permutation {
        g.compose(self).compose(&g.inverse())
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    /// Cycles as 0-based point lists, including fixed points.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.img.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut x = self.apply(s);
            while x != s {
                seen[x] = true;
                c.push(x);
                x = self.apply(x);
            }
            out.push(c);
        }
        out
    }

    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(|c| c.len()).collect();
        t.sort_unstable();
        t
    }

    pub fn order(&self) -> usize {
        self.cycles().iter().fold(1, |acc, c| num_integer::lcm(acc, c.len()))
    }

    /// `(−1)^(n − #cycles)`.
    pub fn sign(&self) -> i32 {
        if (self.img.len() - self.cycles().len()) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn pow(&self, k: usize) -> Permutation {
        let mut r = Permutation::identity(self.degree());
        for _ in 0..k {
            r = r.compose(self);
        }
        r
    }

    /// Moves points of `{0..n-1}` into a larger degree, fixing the rest.
    pub fn extend(&self, n: usize) -> Permutation {
        let mut img = self.img.clone();
        img.extend(self.img.len() as u8..n as u8);
        Permutation { img }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cs: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cs.is_empty() {
            return write!(f, "()");
        }
        for c in cs {
            write!(f, "(")?;
            let parts: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "{}", parts.join(if self.degree() > 9 { "," } else { "" }))?;
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.images().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<usize> = Vec::deserialize(d)?;
        Permutation::from_images(&v).map_err(serde::de::Error::custom)
    }
}

/// A permutation group with its sorted element list.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
}

impl PartialEq for PermGroup {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}
impl Eq for PermGroup {}

impl std::hash::Hash for PermGroup {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.degree.hash(state);
        self.elements.hash(state);
    }
}

impl PartialOrd for PermGroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PermGroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.order(), &self.elements).cmp(&(other.order(), &other.elements))
    }
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.generators.iter().map(|p| p.to_string()).collect();
        write!(f, "<{}> (order {})", g.join(","), self.order())
    }
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    degree: usize,
    generators: Vec<Permutation>,
}

impl Serialize for PermGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupJson { degree: self.degree, generators: self.generators.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PermGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GroupJson::deserialize(d)?;
        PermGroup::generate(j.degree, j.generators).map_err(serde::de::Error::custom)
    }
}

impl PermGroup {
    pub fn trivial(n: usize) -> Self {
        PermGroup { degree: n, generators: vec![], elements: vec![Permutation::identity(n)] }
    }

    /// Closure of `gens` under composition.
    pub fn generate(degree: usize, gens: Vec<Permutation>) -> Result<Self> {
        for g in &gens {
            if g.degree() != degree {
                return Err(Error::Domain(format!("generator {g} has wrong degree")));
            }
        }
        let gens: Vec<Permutation> = {
            let mut v: Vec<Permutation> = gens.into_iter().filter(|g| !g.is_identity()).collect();
            v.dedup();
            v
        };
        let id = Permutation::identity(degree);
        let mut seen: HashSet<Permutation> = HashSet::new();
        seen.insert(id.clone());
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in &gens {
                let y = g.compose(&x);
                if !seen.contains(&y) {
                    if seen.len() >= MAX_ORDER {
                        return Err(Error::Capacity(format!("group order above {MAX_ORDER}")));
                    }
                    seen.insert(y.clone());
                    queue.push_back(y);
                }
            }
        }
        let mut elements: Vec<Permutation> = seen.into_iter().collect();
        elements.sort();
        Ok(PermGroup { degree, generators: gens, elements })
    }

    /// Wraps a list already known to be closed; picks a small generating set.
    pub fn from_elements(degree: usize, mut elements: Vec<Permutation>) -> Self {
        elements.sort();
        elements.dedup();
        let generators = small_generating_set(degree, &elements);
        PermGroup { degree, generators, elements }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn order(&self) -> usize {
        self.elements.len()
    }
    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }
    pub fn identity(&self) -> Permutation {
        Permutation::identity(self.degree)
    }
    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn position(&self, p: &Permutation) -> Option<usize> {
        self.elements.binary_search(p).ok()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.position(p).is_some()
    }

    pub fn is_subgroup_of(&self, g: &PermGroup) -> bool {
        self.degree == g.degree && self.generators.iter().all(|x| g.contains(x))
    }

    /// `g H g⁻¹`.
    pub fn conjugate(&self, g: &Permutation) -> PermGroup {
        let gi = g.inverse();
        let elements: Vec<Permutation> =
            self.elements.iter().map(|h| g.compose(h).compose(&gi)).collect();
        let mut elements = elements;
        elements.sort();
        let generators = self.generators.iter().map(|h| g.compose(h).compose(&gi)).collect();
        PermGroup { degree: self.degree, generators, elements }
    }

    pub fn normalizes(&self, h: &PermGroup) -> bool {
        self.generators.iter().all(|g| normalizes_elem(g, h))
    }

    pub fn is_normal_in(&self, g: &PermGroup) -> bool {
        g.generators.iter().all(|x| normalizes_elem(x, self))
    }

    pub fn is_abelian(&self) -> bool {
        let gs = &self.generators;
        gs.iter().all(|a| gs.iter().all(|b| a.compose(b) == b.compose(a)))
    }

    /// Whether the order is a power of `p` (the trivial group counts).
    pub fn is_p_group(&self, p: usize) -> bool {
        let mut m = self.order();
        while m % p == 0 {
            m /= p;
        }
        m == 1
    }

    /// Elementary abelian for some prime; the trivial group qualifies.
    pub fn is_elementary_abelian(&self) -> bool {
        if self.is_trivial() {
            return true;
        }
        let orders: BTreeSet<usize> =
            self.elements.iter().filter(|e| !e.is_identity()).map(|e| e.order()).collect();
        orders.len() == 1 && is_prime(*orders.iter().next().unwrap()) && self.is_abelian()
    }

    pub fn intersection(&self, other: &PermGroup) -> PermGroup {
        let el: Vec<Permutation> =
            self.elements.iter().filter(|x| other.contains(x)).cloned().collect();
        PermGroup::from_elements(self.degree, el)
    }

    /// Subgroup generated by both.
    pub fn join(&self, other: &PermGroup) -> Result<PermGroup> {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        PermGroup::generate(self.degree, gens)
    }

    /// Point orbits, each sorted, ordered by minimum.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.degree;
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut orb = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < orb.len() {
                let x = orb[i];
                for g in &self.generators {
                    let y = g.apply(x);
                    if !seen[y] {
                        seen[y] = true;
                        orb.push(y);
                    }
                }
                i += 1;
            }
            orb.sort_unstable();
            out.push(orb);
        }
        out
    }

    /// Representatives `t` with `self = ⊔ t·sub`.
    pub fn left_coset_reps(&self, sub: &PermGroup) -> Vec<Permutation> {
        let mut covered: HashSet<Permutation> = HashSet::new();
        let mut reps = Vec::new();
        for t in &self.elements {
            if covered.contains(t) {
                continue;
            }
            reps.push(t.clone());
            for h in &sub.elements {
                covered.insert(t.compose(h));
            }
        }
        reps
    }

    /// Representatives `t` with `self = ⊔ sub·t`.
    pub fn right_coset_reps(&self, sub: &PermGroup) -> Vec<Permutation> {
        let mut covered: HashSet<Permutation> = HashSet::new();
        let mut reps = Vec::new();
        for t in &self.elements {
            if covered.contains(t) {
                continue;
            }
            reps.push(t.clone());
            for h in &sub.elements {
                covered.insert(h.compose(t));
            }
        }
        reps
    }

    /// Representatives `g` of the double cosets `J g H` inside `self`.
    pub fn double_coset_reps(&self, j: &PermGroup, h: &PermGroup) -> Vec<Permutation> {
        let mut covered: HashSet<Permutation> = HashSet::new();
        let mut reps = Vec::new();
        for g in &self.elements {
            if covered.contains(g) {
                continue;
            }
            reps.push(g.clone());
            for a in &j.elements {
                let ag = a.compose(g);
                for b in &h.elements {
                    covered.insert(ag.compose(b));
                }
            }
        }
        reps
    }

    /// Index of `sub` in `self`.
    pub fn index_of(&self, sub: &PermGroup) -> usize {
        self.order() / sub.order()
    }

    /// Elements `g` with `g⁻¹ h g ≤ k`, i.e. witnesses for maps `G/h → G/k`.
    pub fn subconjugacy_witness(&self, h: &PermGroup, k: &PermGroup) -> Option<Permutation> {
        if k.order() % h.order() != 0 {
            return None;
        }
        self.elements.iter().find(|g| {
            let gi = g.inverse();
            h.generators.iter().all(|x| k.contains(&gi.compose(x).compose(g)))
        }).cloned()
    }

    /// Some `g ∈ self` with `g a g⁻¹ = b`.
    pub fn conjugating_element(&self, a: &PermGroup, b: &PermGroup) -> Option<Permutation> {
        if a.order() != b.order() {
            return None;
        }
        self.elements.iter().find(|g| {
            let gi = g.inverse();
            a.generators.iter().all(|x| b.contains(&g.compose(x).compose(&gi)))
        }).cloned()
    }

    /// Elements of order exactly two.
    pub fn involutions(&self) -> Vec<Permutation> {
        self.elements.iter().filter(|e| !e.is_identity() && e.compose(e).is_identity()).cloned().collect()
    }

    /// Restricts the group to a union of orbits, renumbering points in the given order.
    pub fn restrict_to(&self, points: &[usize]) -> Result<PermGroup> {
        let pos: HashMap<usize, usize> = points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut gens = Vec::new();
        for g in &self.generators {
            let mut img = Vec::with_capacity(points.len());
            for &x in points {
                match pos.get(&g.apply(x)) {
                    Some(&y) => img.push(y as u8),
                    None => return Err(Error::Domain("points not invariant".into())),
                }
            }
            gens.push(Permutation::from_images0(img)?);
        }
        PermGroup::generate(points.len(), gens)
    }
}

fn normalizes_elem(g: &Permutation, h: &PermGroup) -> bool {
    let gi = g.inverse();
    h.generators.iter().all(|x| h.contains(&g.compose(x).compose(&gi)))
}

/// Greedy generating set: add each element not already generated.
fn small_generating_set(degree: usize, elements: &[Permutation]) -> Vec<Permutation> {
    let mut gens: Vec<Permutation> = Vec::new();
    let mut span: HashSet<Permutation> = HashSet::new();
    span.insert(Permutation::identity(degree));
    // Prefer elements of large order first; they tend to generate more.
    let mut cand: Vec<&Permutation> = elements.iter().collect();
    cand.sort_by_key(|p| (std::cmp::Reverse(p.order()), (*p).clone()));
    for x in cand {
        if span.len() == elements.len() {
            break;
        }
        if span.contains(x) {
            continue;
        }
        gens.push(x.clone());
        let mut queue: VecDeque<Permutation> = span.iter().cloned().collect();
        while let Some(y) = queue.pop_front() {
            for g in &gens {
                let z = g.compose(&y);
                if span.insert(z.clone()) {
                    queue.push_back(z);
                }
            }
        }
    }
    gens.sort();
    gens
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

pub(crate) fn check_prime(p: usize) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not prime")))
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// The full symmetric group on `{1..n}`.
pub fn symmetric_group(n: usize) -> Result<PermGroup> {
    if n == 0 {
        return Err(Error::Domain("degree must be positive".into()));
    }
    check_cap("symmetric group degree", n, 8)?;
    let mut gens = Vec::new();
    if n >= 2 {
        gens.push(Permutation::from_cycles(n, &[&[1, 2]])?);
        let cyc: Vec<usize> = (1..=n).collect();
        gens.push(Permutation::from_cycles(n, &[&cyc])?);
    }
    let g = PermGroup::generate(n, gens)?;
    debug_assert_eq!(g.order(), factorial(n));
    Ok(g)
}

/// Even permutations of `{1..n}`.
pub fn alternating_group(n: usize) -> Result<PermGroup> {
    let s = symmetric_group(n)?;
    let el = s.elements.iter().filter(|e| e.sign() == 1).cloned().collect();
    Ok(PermGroup::from_elements(n, el))
}

/// Centralizer of `d` inside `g`.
pub fn centralizer(g: &PermGroup, d: &PermGroup) -> Result<PermGroup> {
    if !d.is_subgroup_of(g) {
        return Err(Error::Containment(format!("{d} is not contained in {g}")));
    }
    let el = g
        .elements
        .iter()
        .filter(|x| d.generators.iter().all(|y| x.compose(y) == y.compose(x)))
        .cloned()
        .collect();
    Ok(PermGroup::from_elements(g.degree, el))
}

/// Normalizer of `d` in `g`, the Weyl group and the projection.
pub fn normalizer(g: &PermGroup, d: &PermGroup) -> Result<WeylData> {
    if !d.is_subgroup_of(g) {
        return Err(Error::Containment(format!("{d} is not contained in {g}")));
    }
    let el: Vec<Permutation> = g.elements.iter().filter(|x| normalizes_elem(x, d)).cloned().collect();
    let n = PermGroup::from_elements(g.degree, el);
    WeylData::new(g.clone(), d.clone(), n)
}

/// `N/D` realised as a permutation group on the cosets of `D` in `N`.
#[derive(Clone, Debug)]
pub struct WeylData {
    pub ambient: PermGroup,
    pub subgroup: PermGroup,
    pub normalizer: PermGroup,
    pub quotient: PermGroup,
    cosets: Vec<Permutation>,
    coset_of: HashMap<Permutation, usize>,
    lifts: HashMap<Permutation, Permutation>,
}

impl WeylData {
    fn new(ambient: PermGroup, d: PermGroup, n: PermGroup) -> Result<Self> {
        let cosets = n.left_coset_reps(&d);
        let mut coset_of = HashMap::new();
        for (i, t) in cosets.iter().enumerate() {
            for x in &d.elements {
                coset_of.insert(t.compose(x), i);
            }
        }
        let deg = cosets.len();
        let act = |x: &Permutation| -> Permutation {
            let img: Vec<u8> = cosets.iter().map(|t| coset_of[&x.compose(t)] as u8).collect();
            Permutation { img }
        };
        let gens: Vec<Permutation> = n.generators.iter().map(act).collect();
        let quotient = PermGroup::generate(deg, gens)?;
        let mut lifts = HashMap::new();
        for x in &n.elements {
            lifts.entry(act(x)).or_insert_with(|| x.clone());
        }
        Ok(WeylData { ambient, subgroup: d, normalizer: n, quotient, cosets, coset_of, lifts })
    }

    /// Image in `W` of an element of `N`.
    pub fn project(&self, x: &Permutation) -> Result<Permutation> {
        if !self.normalizer.contains(x) {
            return Err(Error::Containment(format!("{x} not in the normalizer")));
        }
        let img: Vec<u8> =
            self.cosets.iter().map(|t| self.coset_of[&x.compose(t)] as u8).collect();
        Ok(Permutation { img })
    }

    /// A fixed preimage in `N` of an element of `W`.
    pub fn lift(&self, w: &Permutation) -> Result<Permutation> {
        self.lifts.get(w).cloned().ok_or_else(|| Error::Containment(format!("{w} not in W")))
    }
}

/// Point index of a vector in `(Z/p)^k`, little-endian base-p digits.
pub fn vector_index(v: &[usize], p: usize) -> usize {
    v.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Digits of a point index.
pub fn index_vector(mut x: usize, k: usize, p: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(k);
    for _ in 0..k {
        v.push(x % p);
        x /= p;
    }
    v
}

fn check_pk(k: usize, p: usize, cap: usize) -> Result<usize> {
    check_prime(p)?;
    if k == 0 {
        return Err(Error::Domain("k must be positive".into()));
    }
    let n = p.checked_pow(k as u32).ok_or_else(|| Error::Capacity("p^k overflows".into()))?;
    check_cap("p^k", n, cap)?;
    Ok(n)
}

/// The translation subgroup `(Z/p)^k ≤ Σ_{p^k}`.
pub fn regular_embedding(k: usize, p: usize) -> Result<PermGroup> {
    let n = check_pk(k, p, 9)?;
    let mut gens = Vec::new();
    for i in 0..k {
        let img: Vec<u8> = (0..n)
            .map(|x| {
                let mut v = index_vector(x, k, p);
                v[i] = (v[i] + 1) % p;
                vector_index(&v, p) as u8
            })
            .collect();
        gens.push(Permutation::from_images0(img)?);
    }
    PermGroup::generate(n, gens)
}

fn linear_perm(m: &[Vec<usize>], k: usize, p: usize) -> Result<Permutation> {
    let n = p.pow(k as u32);
    let img: Vec<u8> = (0..n)
        .map(|x| {
            let v = index_vector(x, k, p);
            let w: Vec<usize> = (0..k).map(|i| (0..k).map(|j| m[i][j] * v[j]).sum::<usize>() % p).collect();
            vector_index(&w, p) as u8
        })
        .collect();
    Permutation::from_images0(img)
}

/// `GL_k(F_p)` acting linearly on the `p^k` points.
pub fn general_linear_group(k: usize, p: usize) -> Result<PermGroup> {
    let n = check_pk(k, p, 27)?;
    let mut gens = Vec::new();
    let ident: Vec<Vec<usize>> = (0..k).map(|i| (0..k).map(|j| usize::from(i == j)).collect()).collect();
    for i in 0..k {
        for j in 0..k {
            if i != j {
                let mut m = ident.clone();
                m[i][j] = 1;
                gens.push(linear_perm(&m, k, p)?);
            }
        }
    }
    // A primitive root scales the first coordinate.
    let root = (1..p).find(|&a| (1..p - 1).all(|e| (a.pow(e as u32)) % p != 1)).unwrap_or(1);
    if root != 1 {
        let mut m = ident.clone();
        m[0][0] = root;
        gens.push(linear_perm(&m, k, p)?);
    }
    PermGroup::generate(n, gens)
}

/// `Aff_k(F_p)`, the normalizer of the translations.
pub fn affine_group(k: usize, p: usize) -> Result<PermGroup> {
    let t = regular_embedding(k, p)?;
    let l = general_linear_group(k, p)?;
    t.join(&l)
}

/// Order of `GL_k(F_p)`.
pub fn gl_order(k: usize, p: usize) -> usize {
    let q = p.pow(k as u32);
    (0..k).map(|i| q - p.pow(i as u32)).product()
}

/// A Sylow `p`-subgroup, grown one step of order `p` at a time.
pub fn sylow_subgroup(g: &PermGroup, p: usize) -> Result<PermGroup> {
    check_prime(p)?;
    let mut s = PermGroup::trivial(g.degree);
    let mut sylow_order = 1;
    let mut m = g.order();
    while m % p == 0 {
        m /= p;
        sylow_order *= p;
    }
    while s.order() < sylow_order {
        let next = g
            .elements
            .iter()
            .find(|x| !s.contains(x) && normalizes_elem(x, &s) && s.contains(&x.pow(p)))
            .cloned()
            .ok_or_else(|| Error::Integrity("Sylow growth failed".into()))?;
        let mut gens = s.generators.clone();
        gens.push(next);
        s = PermGroup::generate(g.degree, gens)?;
    }
    Ok(s)
}

/// All subgroups of a group of order at most 128 via bitmask closure.
fn subgroups_of_small(g: &PermGroup) -> Result<Vec<PermGroup>> {
    let m = g.order();
    if m > 128 {
        return Err(Error::Capacity(format!("subgroup lattice of order {m} group")));
    }
    let el = &g.elements;
    let idx: HashMap<&Permutation, usize> = el.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let table: Vec<Vec<u8>> =
        (0..m).map(|a| (0..m).map(|b| idx[&el[a].compose(&el[b])] as u8).collect()).collect();
    let id = idx[&g.identity()];
    let close = |mut mask: u128| -> u128 {
        loop {
            let mut next = mask;
            for a in 0..m {
                if mask >> a & 1 == 0 {
                    continue;
                }
                for b in 0..m {
                    if mask >> b & 1 == 1 {
                        next |= 1u128 << table[a][b];
                    }
                }
            }
            if next == mask {
                return mask;
            }
            mask = next;
        }
    };
    let start = 1u128 << id;
    let mut seen: HashSet<u128> = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(s) = queue.pop_front() {
        for x in 0..m {
            if s >> x & 1 == 1 {
                continue;
            }
            let t = close(s | 1u128 << x);
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    let mut out: Vec<PermGroup> = seen
        .into_iter()
        .map(|mask| {
            let e: Vec<Permutation> = (0..m).filter(|&i| mask >> i & 1 == 1).map(|i| el[i].clone()).collect();
            PermGroup::from_elements(g.degree, e)
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Fuses a list of subgroups of `g` into `g`-conjugacy class representatives.
pub fn fuse_conjugates(g: &PermGroup, subs: Vec<PermGroup>) -> Vec<PermGroup> {
    let sig = |h: &PermGroup| -> (usize, Vec<Vec<usize>>) {
        let mut t: Vec<Vec<usize>> = h.elements.iter().map(|e| e.cycle_type()).collect();
        t.sort();
        (h.order(), t)
    };
    let mut buckets: HashMap<(usize, Vec<Vec<usize>>), Vec<PermGroup>> = HashMap::new();
    let mut reps = Vec::new();
    for h in subs {
        let b = buckets.entry(sig(&h)).or_default();
        if b.iter().any(|r| g.conjugating_element(&h, r).is_some()) {
            continue;
        }
        b.push(h.clone());
        reps.push(h);
    }
    reps.sort();
    reps
}

/// Conjugacy-class representatives of `p`-subgroups, trivial group included.
pub fn p_subgroup_classes(g: &PermGroup, p: usize) -> Result<Vec<PermGroup>> {
    check_prime(p)?;
    let s = sylow_subgroup(g, p)?;
    let subs = subgroups_of_small(&s)?;
    Ok(fuse_conjugates(g, subs))
}

/// Every subgroup of a group of order at most 120.
pub fn all_subgroups(g: &PermGroup) -> Result<Vec<PermGroup>> {
    if g.order() > 120 {
        return Err(Error::Capacity(format!("subgroup lattice of a group of order {}", g.order())));
    }
    let mut seen: HashSet<PermGroup> = HashSet::new();
    let mut cyclic: Vec<PermGroup> = Vec::new();
    for x in &g.elements {
        let c = PermGroup::generate(g.degree, vec![x.clone()])?;
        if seen.insert(c.clone()) {
            cyclic.push(c);
        }
    }
    let mut all: Vec<PermGroup> = cyclic.clone();
    let mut frontier = cyclic.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for h in &frontier {
            for c in &cyclic {
                if c.generators.iter().all(|x| h.contains(x)) {
                    continue;
                }
                let j = h.join(c)?;
                if seen.insert(j.clone()) {
                    all.push(j.clone());
                    next.push(j);
                }
            }
        }
        frontier = next;
    }
    all.sort();
    Ok(all)
}

/// Conjugacy classes of all subgroups, for groups of order at most 120.
pub fn subgroup_classes(g: &PermGroup) -> Result<Vec<PermGroup>> {
    Ok(fuse_conjugates(g, all_subgroups(g)?))
}

/// How a subgroup of `Σ_n` acts on `{1..n}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionClass {
    pub elementary_abelian: bool,
    pub free: bool,
    pub transitive: bool,
}

pub fn classify_action(d: &PermGroup, n: usize) -> ActionClass {
    let free = d.elements.iter().all(|e| e.is_identity() || (0..n).all(|i| e.apply(i) != i));
    ActionClass {
        elementary_abelian: d.is_elementary_abelian(),
        free,
        transitive: d.orbits().len() == 1,
    }
}

/// The poset of nontrivial `p`-subgroups of `w`, with the conjugation action.
pub fn p_subgroup_poset(w: &PermGroup, p: usize) -> Result<Poset> {
    check_prime(p)?;
    if w.order() > 5040 {
        return Err(Error::Capacity("group too large for the p-subgroup poset".into()));
    }
    let classes = p_subgroup_classes(w, p)?;
    let mut all: BTreeSet<PermGroup> = BTreeSet::new();
    for c in classes.iter().filter(|c| !c.is_trivial()) {
        for t in w.left_coset_reps(c) {
            all.insert(c.conjugate(&t));
        }
    }
    let labels: Vec<Label> = all.into_iter().map(|h| Label::Subgroup(h.elements)).collect();
    Poset::from_labels(labels, |a, b| match (a, b) {
        (Label::Subgroup(x), Label::Subgroup(y)) => x.len() < y.len() && x.iter().all(|e| y.binary_search(e).is_ok()),
        _ => false,
    }, Some(w.clone()))
}

/// Integer permutation matrix: column `j` has a 1 in row `σ(j)`.
fn perm_matrix(g: &Permutation, n: usize) -> Vec<Vec<BigRational>> {
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for (j, row) in (0..n).map(|j| (j, g.apply(j))) {
        m[row][j] = BigRational::one();
    }
    m
}

fn rational_rank_basis(cols: &[Vec<BigRational>]) -> Vec<usize> {
    // Indices of a maximal independent subset of the given columns.
    let mut basis: Vec<Vec<BigRational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for (ci, c) in cols.iter().enumerate() {
        let mut v = c.clone();
        for (b, &pv) in basis.iter().zip(&pivots) {
            if !v[pv].is_zero() {
                let f = v[pv].clone() / b[pv].clone();
                for i in 0..v.len() {
                    v[i] = v[i].clone() - f.clone() * b[i].clone();
                }
            }
        }
        if let Some(pv) = v.iter().position(|x| !x.is_zero()) {
            basis.push(v);
            pivots.push(pv);
            chosen.push(ci);
        }
    }
    chosen
}

fn rational_det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(r) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if r != c {
            a.swap(r, c);
            det = -det;
        }
        let piv = a[c][c].clone();
        det *= piv.clone();
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = a[r][c].clone() / piv.clone();
            for k in c..n {
                let t = f.clone() * a[c][k].clone();
                a[r][k] -= t;
            }
        }
    }
    det
}

/// Solves `B x = v` for a full-column-rank `B` whose span contains `v`.
fn rational_solve(b: &[Vec<BigRational>], v: &[BigRational]) -> Vec<BigRational> {
    let rows = v.len();
    let cols = b.len();
    let mut aug: Vec<Vec<BigRational>> =
        (0..rows).map(|r| { let mut row: Vec<BigRational> = (0..cols).map(|c| b[c][r].clone()).collect(); row.push(v[r].clone()); row }).collect();
    let mut piv_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pr) = (r..rows).find(|&i| !aug[i][c].is_zero()) else { continue };
        aug.swap(r, pr);
        let p = aug[r][c].clone();
        for k in 0..=cols {
            aug[r][k] = aug[r][k].clone() / p.clone();
        }
        for i in 0..rows {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for k in 0..=cols {
                    let t = f.clone() * aug[r][k].clone();
                    aug[i][k] -= t;
                }
            }
        }
        piv_cols.push(c);
        r += 1;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (i, &c) in piv_cols.iter().enumerate() {
        x[c] = aug[i][cols].clone();
    }
    x
}

/// Elements of `c` acting with determinant +1 on every real-type isotypic
/// component of the permutation representation of `d` on `Q^n`.
pub fn kernel_to_pi0_real_centralizer(d: &PermGroup, n: usize, p: usize, c: &PermGroup) -> Result<PermGroup> {
    check_prime(p)?;
    if !d.is_elementary_abelian() || !d.is_p_group(p) {
        return Err(Error::Domain(format!("{d} is not an elementary abelian {p}-group")));
    }
    if d.degree() != n || c.degree() != n {
        return Err(Error::Domain("degree mismatch".into()));
    }
    // Real characters: all ±1 characters for p = 2, only the trivial one otherwise.
    let chars: Vec<Vec<i32>> = if p == 2 && !d.is_trivial() {
        let gens = &d.generators;
        let basis = independent_generators(d);
        let _ = gens;
        let r = basis.len();
        (0..1usize << r)
            .map(|mask| {
                d.elements
                    .iter()
                    .map(|e| {
                        let coords = express_in_basis(e, &basis, d);
                        let s: usize = coords.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).sum();
                        if s % 2 == 0 { 1 } else { -1 }
                    })
                    .collect()
            })
            .collect()
    } else {
        vec![vec![1; d.order()]]
    };
    let mut components: Vec<Vec<Vec<BigRational>>> = Vec::new();
    for chi in &chars {
        let mut proj = vec![vec![BigRational::zero(); n]; n];
        for (e, &s) in d.elements.iter().zip(chi) {
            for j in 0..n {
                let i = e.apply(j);
                proj[i][j] += BigRational::from_integer(s.into());
            }
        }
        let cols: Vec<Vec<BigRational>> = (0..n).map(|j| proj.iter().map(|row| row[j].clone()).collect()).collect();
        let idx = rational_rank_basis(&cols);
        if !idx.is_empty() {
            components.push(idx.into_iter().map(|j| cols[j].clone()).collect());
        }
    }
    let mut kept = Vec::new();
    for g in &c.elements {
        let m = perm_matrix(g, n);
        let ok = components.iter().all(|basis| {
            let images: Vec<Vec<BigRational>> = basis
                .iter()
                .map(|v| (0..n).map(|i| (0..n).map(|j| m[i][j].clone() * v[j].clone()).sum()).collect())
                .collect();
            let coords: Vec<Vec<BigRational>> = images.iter().map(|w| rational_solve(basis, w)).collect();
            // coords[j] is column j of the restricted matrix.
            let k = basis.len();
            let mat: Vec<Vec<BigRational>> = (0..k).map(|i| (0..k).map(|j| coords[j][i].clone()).collect()).collect();
            rational_det(mat).is_positive()
        });
        if ok {
            kept.push(g.clone());
        }
    }
    Ok(PermGroup::from_elements(n, kept))
}

/// A basis of an elementary abelian group viewed as an `F_p`-vector space.
fn independent_generators(d: &PermGroup) -> Vec<Permutation> {
    let mut basis: Vec<Permutation> = Vec::new();
    let mut span = PermGroup::trivial(d.degree());
    for e in d.elements() {
        if !span.contains(e) {
            basis.push(e.clone());
            span = PermGroup::generate(d.degree(), basis.clone()).expect("subgroup of a small group");
        }
    }
    basis
}

/// Exponent vector of `e` in an elementary abelian 2-group basis.
fn express_in_basis(e: &Permutation, basis: &[Permutation], d: &PermGroup) -> Vec<usize> {
    let r = basis.len();
    for mask in 0..1usize << r {
        let mut x = d.identity();
        for (i, b) in basis.iter().enumerate() {
            if mask >> i & 1 == 1 {
                x = x.compose(b);
            }
        }
        if &x == e {
            return (0..r).map(|i| mask >> i & 1).collect();
        }
    }
    vec![0; r]
}

/// Order-two elements of `c` that are odd permutations.
pub fn odd_involutions(c: &PermGroup) -> Vec<Permutation> {
    c.involutions().into_iter().filter(|e| e.sign() == -1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(c: &[&[usize]], n: usize) -> Permutation {
        Permutation::from_cycles(n, c).unwrap()
    }

    #[test]
    fn sign_and_order() {
        let p = perm(&[&[1, 2, 3]], 4);
        assert_eq!(p.sign(), 1);
        assert_eq!(p.order(), 3);
        assert_eq!(perm(&[&[1, 2]], 3).sign(), -1);
        assert_eq!(p.images(), vec![2, 3, 1, 4]);
        assert_eq!(serde_json::to_string(&perm(&[&[1, 2], &[3, 4]], 4)).unwrap(), "[2,1,4,3]");
    }

    #[test]
    fn sylow_counts() {
        let s4 = symmetric_group(4).unwrap();
        assert_eq!(sylow_subgroup(&s4, 2).unwrap().order(), 8);
        assert_eq!(sylow_subgroup(&s4, 3).unwrap().order(), 3);
    }

    #[test]
    fn gl_orders() {
        assert_eq!(general_linear_group(2, 2).unwrap().order(), 6);
        assert_eq!(general_linear_group(2, 3).unwrap().order(), 48);
        assert_eq!(general_linear_group(3, 2).unwrap().order(), 168);
        assert_eq!(affine_group(2, 2).unwrap().order(), 24);
    }

    #[test]
    fn subgroup_count_s4() {
        let s4 = symmetric_group(4).unwrap();
        assert_eq!(all_subgroups(&s4).unwrap().len(), 30);
        assert_eq!(subgroup_classes(&s4).unwrap().len(), 11);
    }
}
