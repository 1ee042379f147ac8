//! Posets, set partitions and order complexes with group actions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{check_cap, Error, Result};
use crate::exactalg::{homology, ChainComplex, FGAbGroup, FreeGComplex, FreeTerm, Ring, SparseIntMatrix};
use crate::permgroups::{check_prime, general_linear_group, index_vector, symmetric_group, vector_index, PermGroup, Permutation};

/// A partition of `{0..n-1}` with blocks sorted and ordered by minimum.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetPartition {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            for &x in b {
                if x >= n || seen[x] {
                    return Err(Error::Domain(format!("blocks do not partition {{1..{n}}}")));
                }
                seen[x] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain(format!("blocks do not cover {{1..{n}}}")));
        }
        Ok(Self::canonical(n, blocks))
    }

    fn canonical(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        SetPartition { n, blocks }
    }

    /// From a block label per point.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for (x, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(x);
        }
        Self::canonical(labels.len(), map.into_values().collect())
    }

    pub fn discrete(n: usize) -> Self {
        Self::canonical(n, (0..n).map(|x| vec![x]).collect())
    }

    pub fn indiscrete(n: usize) -> Self {
        Self::canonical(n, vec![(0..n).collect()])
    }

    pub fn is_proper(&self) -> bool {
        self.blocks.len() > 1
    }

    pub fn is_nontrivial(&self) -> bool {
        self.blocks.iter().any(|b| b.len() > 1)
    }

    /// Block index of each point.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &x in b {
                l[x] = i;
            }
        }
        l
    }

    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.blocks.iter().any(|b| b.contains(&x) && b.contains(&y))
    }

    /// `self ≤ other`: every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &SetPartition) -> bool {
        let l = other.labels();
        self.blocks.iter().all(|b| b.iter().all(|&x| l[x] == l[b[0]]))
    }

    pub fn act(&self, g: &Permutation) -> SetPartition {
        Self::canonical(self.n, self.blocks.iter().map(|b| b.iter().map(|&x| g.apply(x)).collect()).collect())
    }

    /// `x ∼ y ⇒ gx ∼ gy` for every `g` in the group.
    pub fn is_fixed_by(&self, g: &PermGroup) -> bool {
        g.generators().iter().all(|s| self.act(s) == *self)
    }

    /// `x ∼ vx` for every `v` in the group and every point.
    pub fn is_strongly_fixed_by(&self, g: &PermGroup) -> bool {
        let l = self.labels();
        g.generators().iter().all(|s| (0..self.n).all(|x| l[x] == l[s.apply(x)]))
    }

    /// Finest common coarsening.
    pub fn join(&self, other: &SetPartition) -> SetPartition {
        let mut uf: Vec<usize> = (0..self.n).collect();
        fn find(uf: &mut Vec<usize>, x: usize) -> usize {
            let mut r = x;
            while uf[r] != r {
                r = uf[r];
            }
            let mut y = x;
            while uf[y] != r {
                let nx = uf[y];
                uf[y] = r;
                y = nx;
            }
            r
        }
        for b in self.blocks.iter().chain(&other.blocks) {
            for &x in &b[1..] {
                let (a, c) = (find(&mut uf, b[0]), find(&mut uf, x));
                uf[a] = c;
            }
        }
        let labels: Vec<usize> = (0..self.n).map(|x| find(&mut uf, x)).collect();
        Self::from_labels(&labels)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.n > 9 { "," } else { "" };
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(sep))
            .collect();
        write!(f, "{{{}}}", parts.join("|"))
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Every partition of `{0..n-1}`, via restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    if n == 0 {
        return vec![SetPartition { n: 0, blocks: vec![] }];
    }
    let mut a = vec![0usize; n];
    loop {
        out.push(SetPartition::from_labels(&a));
        // next restricted growth string
        let mut i = n - 1;
        loop {
            let m = a[..i].iter().copied().max().unwrap_or(0);
            if i > 0 && a[i] <= m {
                a[i] += 1;
                for x in a[i + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
            if i <= 1 {
                return out;
            }
            i -= 1;
        }
    }
}

/// The element type of the posets built here.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Label {
    Partition(SetPartition),
    /// A set of points, e.g. a linear subspace given by its vectors.
    PointSet(Vec<usize>),
    /// A subgroup by its sorted elements; acted on by conjugation.
    Subgroup(Vec<Permutation>),
    /// Suspension points: `0` is the south pole, `1` the north pole.
    Pole(u8),
    /// A face of a cross-polytope: signed vertices `(i, t, positive)`.
    SignedFace(Vec<(u8, u8, bool)>),
    /// A simplex of some other complex, by vertex indices.
    Simplex(Vec<usize>),
}

impl Label {
    /// Action of a permutation; `None` for labels whose action is external.
    pub fn act(&self, g: &Permutation) -> Option<Label> {
        Some(match self {
            Label::Partition(l) => Label::Partition(l.act(g)),
            Label::PointSet(s) => {
                let mut v: Vec<usize> = s.iter().map(|&x| g.apply(x)).collect();
                v.sort_unstable();
                Label::PointSet(v)
            }
            Label::Subgroup(h) => {
                let mut v: Vec<Permutation> = h.iter().map(|x| x.conjugate_by(g)).collect();
                v.sort();
                Label::Subgroup(v)
            }
            Label::Pole(i) => Label::Pole(*i),
            Label::SignedFace(f) => {
                let mut v: Vec<(u8, u8, bool)> = f.iter().map(|&(i, t, s)| (g.apply(i as usize) as u8, t, s)).collect();
                v.sort_unstable();
                Label::SignedFace(v)
            }
            Label::Simplex(_) => return None,
        })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Partition(l) => write!(f, "{l}"),
            Label::PointSet(s) => {
                let v: Vec<String> = s.iter().map(|x| (x + 1).to_string()).collect();
                write!(f, "<{}>", v.join(","))
            }
            Label::Subgroup(h) => write!(f, "subgroup of order {}", h.len()),
            Label::Pole(0) => write!(f, "s"),
            Label::Pole(_) => write!(f, "n"),
            Label::SignedFace(v) => {
                let s: Vec<String> =
                    v.iter().map(|&(i, t, pos)| format!("{}e{}.{}", if pos { "+" } else { "-" }, i + 1, t + 1)).collect();
                write!(f, "[{}]", s.join(" "))
            }
            Label::Simplex(v) => write!(f, "{v:?}"),
        }
    }
}

/// Permutation tables for every element of a group, from generator tables.
pub(crate) fn element_tables(group: &PermGroup, gen_images: &[Vec<usize>], size: usize) -> Result<Vec<Vec<u32>>> {
    let n = group.order();
    let mut all: Vec<Option<Vec<u32>>> = vec![None; n];
    let e = group.position(&group.identity()).expect("identity");
    all[e] = Some((0..size as u32).collect());
    let mut stack = vec![e];
    while let Some(x) = stack.pop() {
        let tx = all[x].clone().expect("visited");
        for (s, img) in group.generators().iter().zip(gen_images) {
            let y = group.position(&s.compose(&group.elements()[x])).expect("closed");
            let ty: Vec<u32> = tx.iter().map(|&v| img[v as usize] as u32).collect();
            match &all[y] {
                Some(old) if *old != ty => return Err(Error::Integrity("generator tables do not define an action".into())),
                Some(_) => {}
                None => {
                    all[y] = Some(ty);
                    stack.push(y);
                }
            }
        }
    }
    Ok(all.into_iter().map(|t| t.expect("generated")).collect())
}

/// A finite poset, stored in a linear extension so that `i < j` whenever
/// element `i` is below element `j`.
#[derive(Clone, Debug)]
pub struct Poset {
    pub labels: Vec<Label>,
    less: Vec<Vec<bool>>,
    up: Vec<Vec<usize>>,
    pub group: PermGroup,
    /// Image of each element under each generator of `group`.
    pub gen_images: Vec<Vec<usize>>,
    tables: OnceLock<Vec<Vec<u32>>>,
}

impl Poset {
    /// Builds a poset from labels and a strict order; when a group is given
    /// it acts through [`Label::act`].
    pub fn from_labels(labels: Vec<Label>, less: impl Fn(&Label, &Label) -> bool, group: Option<PermGroup>) -> Result<Self> {
        let n = labels.len();
        let below: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| less(&labels[j], &labels[i])).count()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| below[a].cmp(&below[b]).then(labels[a].cmp(&labels[b])));
        let labels: Vec<Label> = order.iter().map(|&i| labels[i].clone()).collect();
        let rel: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| less(&labels[i], &labels[j])).collect()).collect();
        let group = group.unwrap_or_else(|| PermGroup::trivial(1));
        let index: HashMap<&Label, usize> = labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let mut gen_images = Vec::new();
        for g in group.generators() {
            let mut img = Vec::with_capacity(n);
            for l in &labels {
                let m = l.act(g).ok_or_else(|| Error::Domain("label type has no intrinsic action".into()))?;
                img.push(*index.get(&m).ok_or_else(|| Error::Domain(format!("action does not preserve the poset ({l})")))?);
            }
            gen_images.push(img);
        }
        Self::from_parts(labels, rel, group, gen_images)
    }

    /// Builds from an explicit relation matrix and generator tables. The
    /// element order must already be a linear extension.
    pub fn from_parts(labels: Vec<Label>, less: Vec<Vec<bool>>, group: PermGroup, gen_images: Vec<Vec<usize>>) -> Result<Self> {
        let n = labels.len();
        for i in 0..n {
            if less[i][i] {
                return Err(Error::Domain("order relation is not irreflexive".into()));
            }
            for j in 0..n {
                if less[i][j] && j < i {
                    return Err(Error::Domain("element order is not a linear extension".into()));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if less[i][j] {
                    for k in (j + 1)..n {
                        if less[j][k] && !less[i][k] {
                            return Err(Error::Domain("order relation is not transitive".into()));
                        }
                    }
                }
            }
        }
        if gen_images.len() != group.generators().len() {
            return Err(Error::Domain("one element table per generator is required".into()));
        }
        for img in &gen_images {
            for i in 0..n {
                for j in 0..n {
                    if less[i][j] != less[img[i]][img[j]] {
                        return Err(Error::Domain("group does not act by order automorphisms".into()));
                    }
                }
            }
        }
        let up = (0..n).map(|i| (0..n).filter(|&j| less[i][j]).collect()).collect();
        Ok(Poset { labels, less, up, group, gen_images, tables: OnceLock::new() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn less(&self, i: usize, j: usize) -> bool {
        self.less[i][j]
    }

    pub fn relation_count(&self) -> usize {
        self.up.iter().map(|u| u.len()).sum()
    }

    /// Covering pairs `(i, j)`: `i < j` with nothing strictly between.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.len() {
            for &j in &self.up[i] {
                if !self.up[i].iter().any(|&k| self.less[k][j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Element permutation for every group element, indexed like `group.elements()`.
    pub fn element_tables(&self) -> Result<&Vec<Vec<u32>>> {
        if let Some(t) = self.tables.get() {
            return Ok(t);
        }
        let t = element_tables(&self.group, &self.gen_images, self.len())?;
        Ok(self.tables.get_or_init(|| t))
    }

    pub fn position(&self, l: &Label) -> Option<usize> {
        self.labels.iter().position(|x| x == l)
    }

    /// All strict chains, grouped by length minus one.
    pub fn chains(&self) -> Vec<Vec<Vec<usize>>> {
        let mut out: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..self.len()).map(|i| vec![i]).collect();
        stack.reverse();
        while let Some(c) = stack.pop() {
            let d = c.len() - 1;
            if out.len() <= d {
                out.resize(d + 1, Vec::new());
            }
            let last = *c.last().expect("nonempty");
            for &j in self.up[last].iter().rev() {
                let mut e = c.clone();
                e.push(j);
                stack.push(e);
            }
            out[d].push(c);
        }
        for level in out.iter_mut() {
            level.sort();
        }
        out
    }

    /// Graphviz rendering of the Hasse diagram.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph poset {\n  rankdir=BT;\n");
        for (i, l) in self.labels.iter().enumerate() {
            s.push_str(&format!("  v{i} [label=\"{}\"];\n", l.to_string().replace('"', "'")));
        }
        for (i, j) in self.covers() {
            s.push_str(&format!("  v{i} -> v{j};\n"));
        }
        s.push_str("}\n");
        s
    }

    /// The same poset with the action restricted to a subgroup.
    pub fn restrict_group(&self, h: &PermGroup) -> Result<Poset> {
        let tables = self.element_tables()?;
        let mut imgs = Vec::new();
        for g in h.generators() {
            let i = self.group.position(g).ok_or_else(|| Error::Containment(format!("{g} does not act on the poset")))?;
            imgs.push(tables[i].iter().map(|&x| x as usize).collect());
        }
        Poset::from_parts(self.labels.clone(), self.less.clone(), h.clone(), imgs)
    }
}

impl Serialize for Poset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Poset", 2)?;
        let names: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        st.serialize_field("elements", &names)?;
        st.serialize_field("covers", &self.covers())?;
        st.end()
    }
}

/// Proper nontrivial partitions of `{1..n}` under refinement, with `Σ_n`
/// acting when `n ≤ 7`.
pub fn partition_poset(n: usize) -> Result<Poset> {
    check_cap("partition poset size n", n, 9)?;
    let labels: Vec<Label> = all_partitions(n)
        .into_iter()
        .filter(|l| l.is_proper() && l.is_nontrivial())
        .map(Label::Partition)
        .collect();
    let group = if n <= 7 { Some(symmetric_group(n.max(1))?) } else { None };
    Poset::from_labels(labels, partition_less, group)
}

fn partition_less(a: &Label, b: &Label) -> bool {
    match (a, b) {
        (Label::Partition(x), Label::Partition(y)) => x != y && x.refines(y),
        _ => false,
    }
}

fn span(vs: &[usize], k: usize, p: usize) -> BTreeSet<usize> {
    let mut s: BTreeSet<usize> = BTreeSet::from([0]);
    for &v in vs {
        let vv = index_vector(v, k, p);
        let cur: Vec<usize> = s.iter().copied().collect();
        for c in cur {
            let cv = index_vector(c, k, p);
            for a in 1..p {
                let w: Vec<usize> = cv.iter().zip(&vv).map(|(x, y)| (x + a * y) % p).collect();
                s.insert(vector_index(&w, p));
            }
        }
    }
    s
}

/// All subspaces of `F_p^k` of dimension strictly between `0` and `k`.
pub fn proper_subspaces(k: usize, p: usize) -> Vec<Vec<usize>> {
    let n = p.pow(k as u32);
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![0]];
    while let Some(s) = frontier.pop() {
        for v in 1..n {
            if s.binary_search(&v).is_ok() {
                continue;
            }
            let mut gens = s.clone();
            gens.push(v);
            let t: Vec<usize> = span(&gens, k, p).into_iter().collect();
            if t.len() < n && found.insert(t.clone()) {
                frontier.push(t);
            }
        }
    }
    found.into_iter().collect()
}

/// Proper nontrivial subgroups of `(Z/p)^k` under inclusion, with `GL_k(F_p)`
/// acting on points.
pub fn subgroup_poset_b(k: usize, p: usize) -> Result<Poset> {
    check_prime(p)?;
    let gl = general_linear_group(k, p)?;
    let labels = proper_subspaces(k, p).into_iter().map(Label::PointSet).collect();
    Poset::from_labels(labels, pointset_less, Some(gl))
}

fn pointset_less(a: &Label, b: &Label) -> bool {
    match (a, b) {
        (Label::PointSet(x), Label::PointSet(y)) => x.len() < y.len() && x.iter().all(|e| y.binary_search(e).is_ok()),
        _ => false,
    }
}

/// Elements fixed by every generator of `h`, with the induced order; the
/// result carries the trivial action.
pub fn fixed_subposet(p: &Poset, h: &PermGroup) -> Result<Poset> {
    let tables = p.element_tables()?;
    let mut keep = Vec::new();
    'outer: for i in 0..p.len() {
        for g in h.generators() {
            let gi = p.group.position(g).ok_or_else(|| Error::Containment(format!("{g} does not act on the poset")))?;
            if tables[gi][i] as usize != i {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    let labels = keep.iter().map(|&i| p.labels[i].clone()).collect();
    let less = keep.iter().map(|&i| keep.iter().map(|&j| p.less[i][j]).collect()).collect();
    Poset::from_parts(labels, less, PermGroup::trivial(p.group.degree()), vec![])
}

/// Fixed subposet carrying the action of a group `n` that normalizes `h`.
pub fn fixed_subposet_with_action(p: &Poset, h: &PermGroup, n: &PermGroup) -> Result<Poset> {
    if !n.normalizes(h) {
        return Err(Error::Domain("acting group does not normalize the fixing subgroup".into()));
    }
    let fixed = fixed_subposet(p, h)?;
    let tables = p.element_tables()?;
    let index: HashMap<&Label, usize> = fixed.labels.iter().enumerate().map(|(i, l)| (l, i)).collect();
    let mut imgs = Vec::new();
    for g in n.generators() {
        let gi = p.group.position(g).ok_or_else(|| Error::Containment(format!("{g} does not act on the poset")))?;
        let img = fixed
            .labels
            .iter()
            .map(|l| {
                let i = p.position(l).expect("fixed element is in the poset");
                index[&p.labels[tables[gi][i] as usize]]
            })
            .collect();
        imgs.push(img);
    }
    Poset::from_parts(fixed.labels.clone(), fixed.less.clone(), n.clone(), imgs)
}

/// The minimal strongly `V`-fixed coarsening of `λ`.
pub fn strongly_fixed_coarsening(lambda: &SetPartition, v: &PermGroup) -> SetPartition {
    let orbits = SetPartition::canonical(lambda.n, v.orbits().into_iter().filter(|o| o.iter().all(|&x| x < lambda.n)).collect());
    if orbits.blocks.iter().map(|b| b.len()).sum::<usize>() != lambda.n {
        return lambda.clone();
    }
    lambda.join(&orbits)
}

/// The order-preserving map `B_k → P_{p^k}` sending a subgroup to its cosets.
#[derive(Clone, Debug)]
pub struct TitsMap {
    pub source: Poset,
    pub target: Poset,
    pub map: Vec<usize>,
}

pub fn tits_map(k: usize, p: usize) -> Result<TitsMap> {
    let source = subgroup_poset_b(k, p)?;
    let n = p.pow(k as u32);
    let target = partition_poset(n)?;
    let mut map = Vec::new();
    for l in &source.labels {
        let Label::PointSet(v) = l else { unreachable!("subspace labels") };
        let part = coset_partition(v, k, p);
        map.push(target.position(&Label::Partition(part)).ok_or_else(|| Error::Integrity("coset partition is not proper".into()))?);
    }
    Ok(TitsMap { source, target, map })
}

/// Cosets `x + V` as a partition of the `p^k` points.
pub fn coset_partition(v: &[usize], k: usize, p: usize) -> SetPartition {
    let n = p.pow(k as u32);
    let labels: Vec<usize> = (0..n)
        .map(|x| {
            let xv = index_vector(x, k, p);
            v.iter()
                .map(|&w| {
                    let wv = index_vector(w, k, p);
                    vector_index(&xv.iter().zip(&wv).map(|(a, b)| (a + b) % p).collect::<Vec<_>>(), p)
                })
                .min()
                .expect("subspace contains zero")
        })
        .collect();
    SetPartition::from_labels(&labels)
}

/// A simplicial complex with vertices `0..vertex_count`, simplices stored as
/// increasing vertex tuples, and a group acting on vertices.
#[derive(Clone, Debug)]
pub struct GComplex {
    pub vertex_labels: Vec<Label>,
    pub simplices: Vec<Vec<Vec<usize>>>,
    pub group: PermGroup,
    /// Image of each vertex under each generator of `group`.
    pub gen_images: Vec<Vec<usize>>,
    pub basepoint: Option<usize>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    tables: OnceLock<Vec<Vec<u32>>>,
}

impl GComplex {
    pub fn new(
        vertex_labels: Vec<Label>,
        mut simplices: Vec<Vec<Vec<usize>>>,
        group: PermGroup,
        gen_images: Vec<Vec<usize>>,
        basepoint: Option<usize>,
    ) -> Result<Self> {
        while simplices.last().is_some_and(|l| l.is_empty()) {
            simplices.pop();
        }
        let index: Vec<HashMap<Vec<usize>, usize>> = simplices
            .iter()
            .map(|level| level.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();
        let nv = vertex_labels.len();
        if gen_images.len() != group.generators().len() {
            return Err(Error::Domain("one vertex table per generator is required".into()));
        }
        for (q, level) in simplices.iter().enumerate() {
            for s in level {
                if s.len() != q + 1 || s.windows(2).any(|w| w[0] >= w[1]) || s.iter().any(|&v| v >= nv) {
                    return Err(Error::Domain(format!("malformed {q}-simplex {s:?}")));
                }
                if q > 0 {
                    for j in 0..=q {
                        let mut f = s.clone();
                        f.remove(j);
                        if !index[q - 1].contains_key(&f) {
                            return Err(Error::Domain(format!("face {f:?} of {s:?} is missing")));
                        }
                    }
                }
            }
        }
        let c = GComplex { vertex_labels, simplices, group, gen_images, basepoint, index, tables: OnceLock::new() };
        for img in &c.gen_images {
            if let Some(b) = basepoint {
                if img[b] != b {
                    return Err(Error::Domain("basepoint is not fixed by the action".into()));
                }
            }
            for (q, level) in c.simplices.iter().enumerate() {
                for s in level {
                    let mut t: Vec<usize> = s.iter().map(|&v| img[v]).collect();
                    t.sort_unstable();
                    if !c.index[q].contains_key(&t) {
                        return Err(Error::Domain("action does not preserve simplices".into()));
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn count(&self, q: usize) -> usize {
        self.simplices.get(q).map_or(0, |l| l.len())
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(|l| l.len()).collect()
    }

    pub fn simplex_index(&self, q: usize, s: &[usize]) -> Option<usize> {
        self.index.get(q).and_then(|m| m.get(s)).copied()
    }

    /// Vertex permutation for every group element, indexed like `group.elements()`.
    pub fn element_tables(&self) -> Result<&Vec<Vec<u32>>> {
        if let Some(t) = self.tables.get() {
            return Ok(t);
        }
        let t = element_tables(&self.group, &self.gen_images, self.vertex_labels.len())?;
        Ok(self.tables.get_or_init(|| t))
    }

    /// Index of `g·σ` where `g` is given by its element index.
    pub fn act_simplex(&self, g: usize, q: usize, s: usize) -> Result<usize> {
        let t = &self.element_tables()?[g];
        let mut img: Vec<usize> = self.simplices[q][s].iter().map(|&v| t[v] as usize).collect();
        img.sort_unstable();
        Ok(self.index[q][&img])
    }

    /// Index of `g·σ` where `g` is the `k`-th generator.
    pub fn act_simplex_by_generator(&self, k: usize, q: usize, s: usize) -> usize {
        let mut img: Vec<usize> = self.simplices[q][s].iter().map(|&v| self.gen_images[k][v]).collect();
        img.sort_unstable();
        self.index[q][&img]
    }

    /// `{g : gσ = σ}`.
    pub fn stabilizer(&self, q: usize, s: usize) -> Result<PermGroup> {
        let mut els = Vec::new();
        for (i, g) in self.group.elements().iter().enumerate() {
            if self.act_simplex(i, q, s)? == s {
                els.push(g.clone());
            }
        }
        Ok(PermGroup::from_elements(self.group.degree(), els))
    }

    /// Orbit id of every simplex in degree `q`, and one representative per orbit.
    pub fn orbits(&self, q: usize) -> (Vec<usize>, Vec<usize>) {
        let n = self.count(q);
        let mut id = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for s in 0..n {
            if id[s] != usize::MAX {
                continue;
            }
            let o = reps.len();
            reps.push(s);
            id[s] = o;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for k in 0..self.gen_images.len() {
                    let y = self.act_simplex_by_generator(k, q, x);
                    if id[y] == usize::MAX {
                        id[y] = o;
                        stack.push(y);
                    }
                }
            }
        }
        (id, reps)
    }

    /// Simplicial chains with `∂ = Σ (−1)^j d_j`.
    pub fn chain_complex(&self, ring: Ring) -> Result<ChainComplex> {
        let dims = self.counts();
        if dims.is_empty() {
            return ChainComplex::new(ring, vec![0], vec![]);
        }
        let mut bds = Vec::new();
        for q in 1..dims.len() {
            let mut d = SparseIntMatrix::zeros(dims[q - 1], dims[q]);
            for (c, s) in self.simplices[q].iter().enumerate() {
                for j in 0..=q {
                    let mut f = s.clone();
                    f.remove(j);
                    let r = self.index[q - 1][&f];
                    d.add(r, c, &(if j % 2 == 0 { 1 } else { -1 }).into());
                }
            }
            bds.push(d);
        }
        ChainComplex::new(ring, dims, bds)
    }

    pub fn homology(&self, q: usize, ring: Ring) -> Result<FGAbGroup> {
        homology(&self.chain_complex(ring)?, q)
    }

    /// Reduced homology (relative to the basepoint when present).
    pub fn reduced_homology(&self, q: usize, ring: Ring) -> Result<FGAbGroup> {
        let mut h = self.homology(q, ring)?;
        if q == 0 && self.count(0) > 0 {
            match ring {
                Ring::Integers => h.rank -= 1,
                Ring::Fp(_) => {
                    h.torsion.pop();
                }
            }
        }
        Ok(h)
    }

    pub fn reduced_homology_all(&self, ring: Ring) -> Result<Vec<FGAbGroup>> {
        let top = self.dimension().unwrap_or(0);
        (0..=top).map(|q| self.reduced_homology(q, ring)).collect()
    }

    /// Simplices fixed by every generator of `h`, with trivial action.
    pub fn fixed_subcomplex(&self, h: &PermGroup) -> Result<GComplex> {
        let tables = self.element_tables()?;
        let idx: Vec<usize> = h
            .generators()
            .iter()
            .map(|g| self.group.position(g).ok_or_else(|| Error::Containment(format!("{g} does not act on the complex"))))
            .collect::<Result<_>>()?;
        let fixed_vertex: Vec<bool> = (0..self.vertex_labels.len()).map(|v| idx.iter().all(|&g| tables[g][v] as usize == v)).collect();
        let keep: Vec<usize> = (0..fixed_vertex.len()).filter(|&v| fixed_vertex[v]).collect();
        let mut renum = vec![usize::MAX; fixed_vertex.len()];
        for (i, &v) in keep.iter().enumerate() {
            renum[v] = i;
        }
        // a simplex is fixed iff its vertex set is; for order complexes that
        // means every vertex is fixed
        let mut simplices = Vec::new();
        for (q, level) in self.simplices.iter().enumerate() {
            let mut l = Vec::new();
            for (i, s) in level.iter().enumerate() {
                if idx.iter().all(|&g| self.act_simplex(g, q, i).ok() == Some(i)) {
                    if s.iter().all(|&v| fixed_vertex[v]) {
                        l.push(s.iter().map(|&v| renum[v]).collect());
                    } else {
                        return Err(Error::Domain("a fixed simplex has moving vertices; subdivide first".into()));
                    }
                }
            }
            simplices.push(l);
        }
        let labels = keep.iter().map(|&v| self.vertex_labels[v].clone()).collect();
        let basepoint = self.basepoint.map(|b| renum[b]).filter(|&b| b != usize::MAX);
        GComplex::new(labels, simplices, PermGroup::trivial(self.group.degree()), vec![], basepoint)
    }

    /// The same complex with the action restricted to a subgroup.
    pub fn restrict_group(&self, h: &PermGroup) -> Result<GComplex> {
        let tables = self.element_tables()?;
        let mut imgs = Vec::new();
        for g in h.generators() {
            let i = self.group.position(g).ok_or_else(|| Error::Containment(format!("{g} does not act on the complex")))?;
            imgs.push(tables[i].iter().map(|&x| x as usize).collect());
        }
        GComplex::new(self.vertex_labels.clone(), self.simplices.clone(), h.clone(), imgs, self.basepoint)
    }

    /// Replaces the acting group, given vertex tables for its generators.
    pub fn with_action(&self, group: PermGroup, gen_images: Vec<Vec<usize>>) -> Result<GComplex> {
        GComplex::new(self.vertex_labels.clone(), self.simplices.clone(), group, gen_images, self.basepoint)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.counts().iter().enumerate().map(|(q, &c)| if q % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
    }
}

impl Serialize for GComplex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GComplex", 4)?;
        st.serialize_field("dimension", &self.dimension().map(|d| d as i64).unwrap_or(-1))?;
        let one_based: Vec<Vec<Vec<usize>>> =
            self.simplices.iter().map(|l| l.iter().map(|s| s.iter().map(|v| v + 1).collect()).collect()).collect();
        st.serialize_field("simplices", &one_based)?;
        st.serialize_field("vertices", &self.vertex_labels.iter().map(|l| l.to_string()).collect::<Vec<_>>())?;
        st.serialize_field("basepoint", &self.basepoint.map(|b| b + 1))?;
        st.end()
    }
}

/// The nerve: `q`-simplices are chains `x_0 < … < x_q`.
pub fn order_complex(p: &Poset) -> Result<GComplex> {
    GComplex::new(p.labels.clone(), p.chains(), p.group.clone(), p.gen_images.clone(), None)
}

/// Adjoins two fixed cone points `s` (the basepoint) and `n̂` as incomparable
/// minimal vertices.
pub fn unreduced_suspension(x: &GComplex) -> Result<GComplex> {
    if x.basepoint.is_some() {
        return Err(Error::Domain("complex is already pointed".into()));
    }
    let mut labels = vec![Label::Pole(0), Label::Pole(1)];
    labels.extend(x.vertex_labels.iter().cloned());
    let d = x.simplices.len();
    let mut simplices: Vec<Vec<Vec<usize>>> = vec![Vec::new(); d + 1];
    simplices[0].push(vec![0]);
    simplices[0].push(vec![1]);
    for (q, level) in x.simplices.iter().enumerate() {
        for s in level {
            let shifted: Vec<usize> = s.iter().map(|v| v + 2).collect();
            for pole in 0..2 {
                let mut c = vec![pole];
                c.extend(&shifted);
                simplices[q + 1].push(c);
            }
            simplices[q].push(shifted);
        }
    }
    for level in simplices.iter_mut() {
        level.sort();
    }
    let gen_images = x
        .gen_images
        .iter()
        .map(|img| {
            let mut m = vec![0, 1];
            m.extend(img.iter().map(|v| v + 2));
            m
        })
        .collect();
    GComplex::new(labels, simplices, x.group.clone(), gen_images, Some(0))
}

/// The poset with two incomparable minimal elements adjoined.
pub fn suspension_poset(p: &Poset) -> Result<Poset> {
    let n = p.len();
    let mut labels = vec![Label::Pole(0), Label::Pole(1)];
    labels.extend(p.labels.iter().cloned());
    let mut less = vec![vec![false; n + 2]; n + 2];
    for i in 0..n {
        less[0][i + 2] = true;
        less[1][i + 2] = true;
        for j in 0..n {
            less[i + 2][j + 2] = p.less[i][j];
        }
    }
    let imgs = p
        .gen_images
        .iter()
        .map(|img| {
            let mut m = vec![0, 1];
            m.extend(img.iter().map(|v| v + 2));
            m
        })
        .collect();
    Poset::from_parts(labels, less, p.group.clone(), imgs)
}

/// The face poset of a complex (nonempty simplices under inclusion).
pub fn face_poset(x: &GComplex) -> Result<Poset> {
    let mut labels = Vec::new();
    let mut pos: Vec<(usize, usize)> = Vec::new();
    for (q, level) in x.simplices.iter().enumerate() {
        for (i, s) in level.iter().enumerate() {
            labels.push(Label::Simplex(s.clone()));
            pos.push((q, i));
        }
    }
    let n = labels.len();
    let offsets: Vec<usize> = x.simplices.iter().scan(0, |acc, l| {
        let o = *acc;
        *acc += l.len();
        Some(o)
    }).collect();
    let mut less = vec![vec![false; n]; n];
    for a in 0..n {
        let Label::Simplex(sa) = &labels[a] else { unreachable!() };
        for b in 0..n {
            let Label::Simplex(sb) = &labels[b] else { unreachable!() };
            less[a][b] = sa.len() < sb.len() && sa.iter().all(|v| sb.binary_search(v).is_ok());
        }
    }
    let imgs = (0..x.gen_images.len())
        .map(|k| pos.iter().map(|&(q, i)| offsets[q] + x.act_simplex_by_generator(k, q, i)).collect())
        .collect();
    Poset::from_parts(labels, less, x.group.clone(), imgs)
}

/// Barycentric subdivision: the order complex of the face poset.
pub fn barycentric_subdivision(x: &GComplex) -> Result<GComplex> {
    order_complex(&face_poset(x)?)
}

/// Faces of the boundary of the cross-polytope on `±e_{i,t}`: nonempty sets of
/// signed vertices with no antipodal pair.
pub fn cross_polytope_faces(n: usize, j: usize) -> Vec<Vec<(u8, u8, bool)>> {
    let verts: Vec<(u8, u8)> = (0..n).flat_map(|i| (0..j).map(move |t| (i as u8, t as u8))).collect();
    let m = verts.len();
    let mut out = Vec::new();
    // each coordinate: absent, +, −
    let total = 3usize.pow(m as u32);
    for code in 1..total {
        let mut c = code;
        let mut f = Vec::new();
        for &(i, t) in &verts {
            match c % 3 {
                1 => f.push((i, t, true)),
                2 => f.push((i, t, false)),
                _ => {}
            }
            c /= 3;
        }
        f.sort_unstable();
        out.push(f);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// `S^{nj}` with `Σ_n` permuting coordinates: the suspension of the
/// subdivided boundary of the `nj`-dimensional cross-polytope, pointed at
/// the south pole.
pub fn sphere_model(n: usize, j: usize) -> Result<GComplex> {
    if n == 0 || j == 0 {
        return Err(Error::Domain("sphere model needs n, j ≥ 1".into()));
    }
    check_cap("n·j for the sphere model", n * j, 6)?;
    let labels: Vec<Label> = cross_polytope_faces(n, j)
        .into_iter()
        .map(Label::SignedFace)
        .collect();
    let face_less = |a: &Label, b: &Label| match (a, b) {
        (Label::SignedFace(x), Label::SignedFace(y)) => x.len() < y.len() && x.iter().all(|e| y.binary_search(e).is_ok()),
        _ => false,
    };
    let poset = Poset::from_labels(labels, face_less, Some(symmetric_group(n)?))?;
    unreduced_suspension(&order_complex(&poset)?)
}

/// Chains of `EW × F` truncated at `EW`-degree `n_trunc`, as a complex of free
/// `Z[W]`-modules. Representatives are `(e, u_1, …, u_a) ⊗ σ`.
pub fn borel_model(w: &PermGroup, f: &GComplex, n_trunc: usize) -> Result<FreeGComplex> {
    if f.group != *w || f.group.generators() != w.generators() {
        return Err(Error::Domain("complex must carry an action of the given group".into()));
    }
    let order = w.order();
    let total: usize = f.counts().iter().sum();
    let est = order.checked_pow(n_trunc as u32).and_then(|x| x.checked_mul(total)).unwrap_or(usize::MAX);
    check_cap("Borel model size", est, 2_000_000)?;
    let fdim = f.simplices.len();
    if fdim == 0 {
        return FreeGComplex::new(w.clone(), vec![0], vec![vec![]]);
    }
    let top = n_trunc + fdim - 1;
    let pow: Vec<usize> = (0..=n_trunc).map(|a| order.pow(a as u32)).collect();
    // offsets[q][a] = first representative of EW-degree a in total degree q
    let mut offsets: Vec<Vec<usize>> = Vec::new();
    let mut reps = Vec::new();
    for q in 0..=top {
        let mut off = Vec::new();
        let mut acc = 0;
        for a in 0..=n_trunc.min(q) {
            off.push(acc);
            let b = q - a;
            if b < fdim {
                acc += pow[a] * f.count(b);
            }
        }
        offsets.push(off);
        reps.push(acc);
    }
    let elems = w.elements();
    let pos = |g: &Permutation| w.position(g).expect("closed");
    let mut boundary: Vec<Vec<Vec<FreeTerm>>> = vec![vec![Vec::new(); reps[0]]];
    for q in 1..=top {
        let mut level = vec![Vec::new(); reps[q]];
        for a in 0..=n_trunc.min(q) {
            let b = q - a;
            if b >= fdim {
                continue;
            }
            let nb = f.count(b);
            for ui in 0..pow[a] {
                let us: Vec<usize> = (0..a).map(|t| (ui / order.pow(t as u32)) % order).collect();
                for s in 0..nb {
                    let me = offsets[q][a] + ui * nb + s;
                    let mut terms = Vec::new();
                    if a >= 1 {
                        // face 0: (u_1, …, u_a) = u_1·(e, u_1⁻¹u_2, …)
                        let u1 = &elems[us[0]];
                        let u1inv = u1.inverse();
                        let rest: Vec<usize> = us[1..].iter().map(|&u| pos(&u1inv.compose(&elems[u]))).collect();
                        let s2 = f.act_simplex(pos(&u1inv), b, s)?;
                        let idx = encode(&rest, order);
                        terms.push(FreeTerm { coeff: 1, element: u1.clone(), target: offsets[q - 1][a - 1] + idx * nb + s2 });
                        for i in 1..=a {
                            let mut rest: Vec<usize> = us.clone();
                            rest.remove(i - 1);
                            let idx = encode(&rest, order);
                            let sign = if i % 2 == 0 { 1 } else { -1 };
                            terms.push(FreeTerm { coeff: sign, element: w.identity(), target: offsets[q - 1][a - 1] + idx * nb + s });
                        }
                    }
                    if b >= 1 {
                        let nb1 = f.count(b - 1);
                        let sa = if a % 2 == 0 { 1 } else { -1 };
                        for jj in 0..=b {
                            let mut face = f.simplices[b][s].clone();
                            face.remove(jj);
                            let fi = f.simplex_index(b - 1, &face).expect("faces present");
                            let sj = if jj % 2 == 0 { 1 } else { -1 };
                            terms.push(FreeTerm { coeff: sa * sj, element: w.identity(), target: offsets[q - 1][a] + ui * nb1 + fi });
                        }
                    }
                    level[me] = terms;
                }
            }
        }
        boundary.push(level);
    }
    FreeGComplex::new(w.clone(), reps, boundary)
}

fn encode(us: &[usize], order: usize) -> usize {
    us.iter().rev().fold(0, |acc, &u| acc * order + u)
}

/// A complex with `count` points permuted by `group` via `images`.
pub fn discrete_complex(group: &PermGroup, count: usize, images: Vec<Vec<usize>>) -> Result<GComplex> {
    let labels = (0..count).map(|i| Label::Simplex(vec![i])).collect();
    GComplex::new(labels, vec![(0..count).map(|i| vec![i]).collect()], group.clone(), images, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let b: Vec<usize> = (1..=6).map(|n| all_partitions(n).len()).collect();
        assert_eq!(b, vec![1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn p4_shape() {
        let p = partition_poset(4).unwrap();
        assert_eq!(p.len(), 13);
        assert_eq!(p.relation_count(), 18);
        let x = order_complex(&p).unwrap();
        assert_eq!(x.counts(), vec![13, 18]);
        assert_eq!(x.reduced_homology(1, Ring::Integers).unwrap(), FGAbGroup::free(6));
    }

    #[test]
    fn b3_counts() {
        let b = subgroup_poset_b(3, 2).unwrap();
        assert_eq!(b.len(), 14);
        assert_eq!(b.relation_count(), 21);
        assert!(subgroup_poset_b(1, 3).unwrap().is_empty());
    }

    #[test]
    fn suspension_of_p4() {
        let x = unreduced_suspension(&order_complex(&partition_poset(4).unwrap()).unwrap()).unwrap();
        assert_eq!(x.counts(), vec![15, 44, 36]);
    }

    #[test]
    fn sphere_fixed_points() {
        let s = sphere_model(2, 1).unwrap();
        let h = s.group.clone();
        let f = s.fixed_subcomplex(&h).unwrap();
        assert_eq!(f.reduced_homology(1, Ring::Integers).unwrap(), FGAbGroup::free(1));
        assert_eq!(s.reduced_homology(2, Ring::Integers).unwrap(), FGAbGroup::free(1));
    }
}
