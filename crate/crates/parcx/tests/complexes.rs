use parcx::complexes::*;
use parcx::exactalg::{twisted_homology, FGAbGroup, GroupRingModule, Ring};
use parcx::permgroups::*;
use proptest::prelude::*;

fn group(n: usize, gens: &[&[&[usize]]]) -> PermGroup {
    PermGroup::generate(n, gens.iter().map(|c| Permutation::from_cycles(n, c).unwrap()).collect()).unwrap()
}

fn part(n: usize, blocks: &[&[usize]]) -> SetPartition {
    SetPartition::new(n, blocks.iter().map(|b| b.iter().map(|x| x - 1).collect()).collect()).unwrap()
}

// Bell numbers by the triangle recurrence.
fn bell(n: usize) -> usize {
    let mut row = vec![1usize];
    for _ in 1..n {
        let mut next = vec![*row.last().unwrap()];
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    *row.last().unwrap()
}

#[test]
fn partition_counts_match_bell_numbers() {
    for n in 1..=7 {
        assert_eq!(all_partitions(n).len(), bell(n), "n = {n}");
    }
    for n in 2..=6 {
        assert_eq!(partition_poset(n).unwrap().len(), bell(n) - 2);
    }
}

#[test]
fn small_partition_posets() {
    let p3 = partition_poset(3).unwrap();
    assert_eq!((p3.len(), p3.relation_count()), (3, 0));
    let p4 = partition_poset(4).unwrap();
    assert_eq!((p4.len(), p4.covers().len()), (13, 18));
    let x = order_complex(&p4).unwrap();
    assert_eq!(x.counts(), vec![13, 18]);
    assert_eq!(x.euler_characteristic() - 1, -6);
    assert_eq!(x.reduced_homology(1, Ring::Integers).unwrap(), FGAbGroup::free(6));
    assert!(x.reduced_homology(0, Ring::Integers).unwrap().is_zero());
}

#[test]
fn top_homology_of_partition_complex_has_rank_factorial() {
    for n in 3..=5 {
        let x = order_complex(&partition_poset(n).unwrap()).unwrap();
        let h = x.reduced_homology_all(Ring::Integers).unwrap();
        let f: usize = (1..n).product();
        for (q, g) in h.iter().enumerate() {
            let expect = if q == n - 3 { FGAbGroup::free(f) } else { FGAbGroup::zero() };
            assert_eq!(*g, expect, "n = {n}, q = {q}");
        }
    }
}

#[test]
fn order_complex_edges_are_comparable_pairs() {
    let p = partition_poset(5).unwrap();
    let x = order_complex(&p).unwrap();
    let pairs = (0..p.len()).flat_map(|i| (0..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p.less(i, j)).count();
    assert_eq!(x.count(1), pairs);
    assert_eq!(pairs, p.relation_count());
}

#[test]
fn subspace_posets() {
    assert!(subgroup_poset_b(1, 2).unwrap().is_empty());
    assert_eq!(subgroup_poset_b(2, 2).unwrap().len(), 3);
    assert_eq!(subgroup_poset_b(2, 3).unwrap().len(), 4);
    let b = subgroup_poset_b(3, 2).unwrap();
    assert_eq!((b.len(), b.relation_count()), (14, 21));
}

#[test]
fn tits_map_sends_subspaces_to_coset_partitions() {
    let t = tits_map(2, 2).unwrap();
    assert_eq!(t.map.len(), 3);
    for &i in &t.map {
        let Label::Partition(pt) = &t.target.labels[i] else { panic!("partition label") };
        assert_eq!(pt.blocks.len(), 2);
        assert!(pt.blocks.iter().all(|b| b.len() == 2));
    }
}

#[test]
fn suspension_counts() {
    let pts = order_complex(&partition_poset(3).unwrap()).unwrap();
    let s = unreduced_suspension(&pts).unwrap();
    assert_eq!(s.counts(), vec![5, 6]);
    assert_eq!(s.reduced_homology(1, Ring::Integers).unwrap(), FGAbGroup::free(2));
    let s4 = unreduced_suspension(&order_complex(&partition_poset(4).unwrap()).unwrap()).unwrap();
    assert_eq!(s4.counts(), vec![15, 44, 36]);
    assert_eq!(s4.reduced_homology(2, Ring::Integers).unwrap(), FGAbGroup::free(6));
}

#[test]
fn fixed_subposets_match_brute_force() {
    let p4 = partition_poset(4).unwrap();
    let cases = [
        (regular_embedding(2, 2).unwrap(), 3),
        (group(4, &[&[&[1, 2]]]), 5),
        (group(4, &[&[&[1, 2], &[3, 4]]]), 5),
        (PermGroup::trivial(4), 13),
    ];
    for (h, expect) in cases {
        let f = fixed_subposet(&p4, &h).unwrap();
        let brute = all_partitions(4).into_iter().filter(|l| l.is_proper() && l.is_nontrivial() && l.is_fixed_by(&h)).count();
        assert_eq!(f.len(), brute, "{h}");
        assert_eq!(f.len(), expect, "{h}");
    }
}

#[test]
fn strong_coarsening_examples() {
    let v = group(4, &[&[&[1, 2]]]);
    let got = strongly_fixed_coarsening(&part(4, &[&[1, 3], &[2], &[4]]), &v);
    assert_eq!(got, part(4, &[&[1, 2, 3], &[4]]));
    assert!(got.is_strongly_fixed_by(&v));
    let already = part(4, &[&[1, 2], &[3, 4]]);
    assert_eq!(strongly_fixed_coarsening(&already, &v), already);
}

#[test]
fn borel_model_of_point_gives_classifying_space() {
    let w = group(2, &[&[&[1, 2]]]);
    let pt = discrete_complex(&w, 1, vec![vec![0]]).unwrap();
    let c = borel_model(&w, &pt, 6).unwrap();
    let f2 = GroupRingModule::trivial(&w, 2, None, 1).unwrap();
    let h = twisted_homology(&c, &f2, 4).unwrap();
    for (q, g) in h.iter().enumerate() {
        assert_eq!(g.generators(), 1, "degree {q}");
    }
    let z = GroupRingModule::trivial(&w, 0, None, 1).unwrap();
    let hz = twisted_homology(&c, &z, 4).unwrap();
    assert_eq!(hz[0], FGAbGroup::free(1));
    assert_eq!(hz[1].torsion, vec![2]);
    assert!(hz[2].is_zero());
    assert_eq!(hz[3].torsion, vec![2]);
}

#[test]
fn sphere_model_is_a_sphere() {
    let s = sphere_model(2, 1).unwrap();
    let h = s.reduced_homology_all(Ring::Integers).unwrap();
    assert_eq!(h.iter().filter(|g| !g.is_zero()).count(), 1);
    assert_eq!(h[2], FGAbGroup::free(1));
}

#[test]
fn euler_characteristic_matches_homology() {
    for n in 3..=5 {
        let x = order_complex(&partition_poset(n).unwrap()).unwrap();
        let chi: i64 = x.counts().iter().enumerate().map(|(q, &c)| if q % 2 == 0 { c as i64 } else { -(c as i64) }).sum();
        assert_eq!(chi, x.euler_characteristic());
        let h: i64 = (0..x.counts().len())
            .map(|q| {
                let r = x.homology(q, Ring::Integers).unwrap().rank as i64;
                if q % 2 == 0 { r } else { -r }
            })
            .sum();
        assert_eq!(h, chi);
    }
}

#[test]
fn capacity_is_enforced() {
    assert!(partition_poset(10).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stabilizers_conjugate(q in 0usize..2, s in 0usize..200, g in 0usize..120) {
        let x = order_complex(&partition_poset(5).unwrap()).unwrap();
        let s = s % x.count(q);
        let gi = g % x.group.order();
        let elt = x.group.elements()[gi].clone();
        let t = x.act_simplex(gi, q, s).unwrap();
        let a = x.stabilizer(q, s).unwrap();
        let b = x.stabilizer(q, t).unwrap();
        prop_assert_eq!(a.conjugate(&elt), b.clone());
        prop_assert_eq!(a.order(), b.order());
    }

    #[test]
    fn partition_action_preserves_refinement(a in 0usize..52, b in 0usize..52, g in 0usize..120) {
        let all = all_partitions(5);
        let s5 = symmetric_group(5).unwrap();
        let p = &s5.elements()[g];
        let (x, y) = (&all[a], &all[b]);
        prop_assert_eq!(x.refines(y), x.act(p).refines(&y.act(p)));
        prop_assert!(x.refines(&x.join(y)));
        prop_assert!(y.refines(&x.join(y)));
    }
}
