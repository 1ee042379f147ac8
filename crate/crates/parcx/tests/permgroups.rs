use parcx::permgroups::*;
use proptest::prelude::*;

fn perm(n: usize, cycles: &[&[usize]]) -> Permutation {
    Permutation::from_cycles(n, cycles).unwrap()
}

fn group(n: usize, gens: &[&[&[usize]]]) -> PermGroup {
    PermGroup::generate(n, gens.iter().map(|c| perm(n, c)).collect()).unwrap()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[test]
fn symmetric_group_orders() {
    assert_eq!(symmetric_group(1).unwrap().order(), 1);
    assert_eq!(symmetric_group(4).unwrap().order(), 24);
    assert_eq!(symmetric_group(6).unwrap().order(), 720);
    assert!(symmetric_group(9).is_err());
}

#[test]
fn centralizers_in_s4() {
    let s4 = symmetric_group(4).unwrap();
    let v4 = group(4, &[&[&[1, 2], &[3, 4]], &[&[1, 3], &[2, 4]]]);
    assert_eq!(centralizer(&s4, &v4).unwrap(), v4);
    let d = group(4, &[&[&[1, 2], &[3, 4]]]);
    assert_eq!(centralizer(&s4, &d).unwrap().order(), 8);
    assert_eq!(centralizer(&s4, &PermGroup::trivial(4)).unwrap(), s4);
    let s3 = symmetric_group(3).unwrap();
    assert!(centralizer(&s3, &d).is_err());
}

#[test]
fn normalizers_and_weyl_groups() {
    let s4 = symmetric_group(4).unwrap();
    let w = normalizer(&s4, &regular_embedding(2, 2).unwrap()).unwrap();
    assert_eq!((w.normalizer.order(), w.quotient.order()), (24, 6));
    let s3 = symmetric_group(3).unwrap();
    let w = normalizer(&s3, &group(3, &[&[&[1, 2, 3]]])).unwrap();
    assert_eq!((w.normalizer.order(), w.quotient.order()), (6, 2));
    let w = normalizer(&s3, &s3).unwrap();
    assert_eq!((w.normalizer.order(), w.quotient.order()), (6, 1));
}

#[test]
fn lift_and_project_are_inverse_on_the_quotient() {
    let s4 = symmetric_group(4).unwrap();
    let w = normalizer(&s4, &regular_embedding(2, 2).unwrap()).unwrap();
    for x in w.quotient.elements() {
        assert_eq!(&w.project(&w.lift(x).unwrap()).unwrap(), x);
    }
}

#[test]
fn regular_embeddings() {
    assert_eq!(regular_embedding(1, 2).unwrap(), group(2, &[&[&[1, 2]]]));
    assert_eq!(regular_embedding(1, 3).unwrap(), group(3, &[&[&[1, 2, 3]]]));
    let d = regular_embedding(2, 2).unwrap();
    assert_eq!(d.order(), 4);
    for x in d.elements().iter().filter(|x| !x.is_identity()) {
        assert_eq!(x.cycle_type(), vec![2, 2]);
    }
    for (k, p) in [(1usize, 2usize), (2, 2), (1, 3), (3, 2), (2, 3)] {
        let d = regular_embedding(k, p).unwrap();
        let c = classify_action(&d, p.pow(k as u32));
        assert!(c.elementary_abelian && c.free && c.transitive);
    }
}

#[test]
fn weyl_quotient_of_translations_is_gl() {
    for (k, p) in [(2usize, 2usize), (3, 2)] {
        let n = p.pow(k as u32);
        let w = normalizer(&symmetric_group(n).unwrap(), &regular_embedding(k, p).unwrap()).unwrap();
        let brute = (0..k).map(|i| n - p.pow(i as u32)).product::<usize>();
        assert_eq!(w.quotient.order(), brute);
        assert_eq!(gl_order(k, p), brute);
        assert_eq!(general_linear_group(k, p).unwrap().order(), brute);
    }
    assert_eq!(gl_order(2, 2), 6);
    assert_eq!(gl_order(2, 3), 48);
}

#[test]
fn p_subgroup_class_counts() {
    let s4 = symmetric_group(4).unwrap();
    let mut orders: Vec<usize> = p_subgroup_classes(&s4, 2).unwrap().iter().map(PermGroup::order).collect();
    orders.sort();
    assert_eq!(orders, vec![1, 2, 2, 4, 4, 4, 8]);
    assert_eq!(p_subgroup_classes(&symmetric_group(3).unwrap(), 3).unwrap().len(), 2);
    assert_eq!(p_subgroup_classes(&symmetric_group(2).unwrap(), 3).unwrap().len(), 1);
}

#[test]
fn sylow_counts_are_one_mod_p() {
    for (n, p) in [(4, 2), (4, 3), (5, 2), (5, 3), (5, 5), (6, 3)] {
        let g = symmetric_group(n).unwrap();
        let syl = sylow_subgroup(&g, p).unwrap();
        let count = g.order() / normalizer(&g, &syl).unwrap().normalizer.order();
        assert_eq!(count % p, 1, "n={n} p={p}");
    }
}

#[test]
fn classify_small_actions() {
    let c = classify_action(&group(4, &[&[&[1, 2], &[3, 4]]]), 4);
    assert_eq!((c.elementary_abelian, c.free, c.transitive), (true, true, false));
    let c = classify_action(&regular_embedding(2, 2).unwrap(), 4);
    assert_eq!((c.elementary_abelian, c.free, c.transitive), (true, true, true));
    let c = classify_action(&group(4, &[&[&[1, 2]]]), 4);
    assert_eq!((c.elementary_abelian, c.free, c.transitive), (true, false, false));
    let c = classify_action(&PermGroup::trivial(4), 4);
    assert_eq!((c.elementary_abelian, c.free, c.transitive), (true, true, false));
}

#[test]
fn p_subgroup_posets() {
    let s3 = symmetric_group(3).unwrap();
    assert_eq!(p_subgroup_poset(&s3, 3).unwrap().len(), 1);
    let l = p_subgroup_poset(&s3, 2).unwrap();
    assert_eq!((l.len(), l.relation_count()), (3, 0));
    assert!(p_subgroup_poset(&PermGroup::trivial(3), 2).unwrap().is_empty());
}

#[test]
fn real_centralizer_kernels() {
    let s4 = symmetric_group(4).unwrap();
    let d = group(4, &[&[&[1, 2], &[3, 4]]]);
    let c = centralizer(&s4, &d).unwrap();
    assert_eq!(kernel_to_pi0_real_centralizer(&d, 4, 2, &c).unwrap(), d);
    let k = kernel_to_pi0_real_centralizer(&PermGroup::trivial(4), 4, 2, &s4).unwrap();
    assert_eq!(k, alternating_group(4).unwrap());
    let z3 = group(3, &[&[&[1, 2, 3]]]);
    assert_eq!(kernel_to_pi0_real_centralizer(&z3, 3, 3, &z3).unwrap(), z3);
    let z4 = group(4, &[&[&[1, 2, 3, 4]]]);
    assert!(kernel_to_pi0_real_centralizer(&z4, 4, 2, &z4).is_err());
}

#[test]
fn centralizer_modulo_kernel_is_elementary_abelian_2_group() {
    let s6 = symmetric_group(6).unwrap();
    for d in p_subgroup_classes(&s6, 2).unwrap().into_iter().filter(PermGroup::is_elementary_abelian) {
        let c = centralizer(&s6, &d).unwrap();
        let k = kernel_to_pi0_real_centralizer(&d, 6, 2, &c).unwrap();
        assert!(k.is_normal_in(&c), "{d}");
        for x in c.elements() {
            assert!(k.contains(&x.compose(x)), "{d}: square of {x}");
            for y in c.elements() {
                let comm = x.compose(y).compose(&x.inverse()).compose(&y.inverse());
                assert!(k.contains(&comm), "{d}: commutator");
            }
        }
    }
}

#[test]
fn d_lies_in_kernel_exactly_for_even_multiplicities() {
    // (12)(34)(56) is -1 on a 3-dimensional component
    let s6 = symmetric_group(6).unwrap();
    let d = group(6, &[&[&[1, 2], &[3, 4], &[5, 6]]]);
    let k = kernel_to_pi0_real_centralizer(&d, 6, 2, &centralizer(&s6, &d).unwrap()).unwrap();
    assert!(!d.is_subgroup_of(&k));
    let s4 = symmetric_group(4).unwrap();
    let d = group(4, &[&[&[1, 2], &[3, 4]]]);
    let k = kernel_to_pi0_real_centralizer(&d, 4, 2, &centralizer(&s4, &d).unwrap()).unwrap();
    assert!(d.is_subgroup_of(&k));
}

#[test]
fn odd_involution_lists() {
    let s3 = symmetric_group(3).unwrap();
    let mut t = odd_involutions(&s3);
    t.sort();
    let mut want = vec![perm(3, &[&[1, 2]]), perm(3, &[&[1, 3]]), perm(3, &[&[2, 3]])];
    want.sort();
    assert_eq!(t, want);
    assert!(odd_involutions(&alternating_group(4).unwrap()).is_empty());
    let c = centralizer(&symmetric_group(4).unwrap(), &group(4, &[&[&[1, 2], &[3, 4]]])).unwrap();
    let mut t = odd_involutions(&c);
    t.sort();
    let mut want = vec![perm(4, &[&[1, 2]]), perm(4, &[&[3, 4]])];
    want.sort();
    assert_eq!(t, want);
}

#[test]
fn permutation_json_is_one_based() {
    let x = perm(4, &[&[1, 2]]);
    assert_eq!(serde_json::to_string(&x).unwrap(), "[2,1,3,4]");
    let back: Permutation = serde_json::from_str("[2,1,3,4]").unwrap();
    assert_eq!(back, x);
    let g = symmetric_group(3).unwrap();
    let back: PermGroup = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
    assert_eq!(back, g);
}

fn arb_perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(&v.iter().map(|x| x + 1).collect::<Vec<_>>()).unwrap())
}

proptest! {
    #[test]
    fn composition_laws(a in arb_perm(6), b in arb_perm(6), c in arb_perm(6)) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert_eq!(a.compose(&b).sign(), a.sign() * b.sign());
        prop_assert!(a.pow(a.order()).is_identity());
        prop_assert_eq!(a.compose(&b).apply(0), a.apply(b.apply(0)));
    }

    #[test]
    fn generated_subgroups(a in arb_perm(5), b in arb_perm(5)) {
        let s5 = symmetric_group(5).unwrap();
        let d = PermGroup::generate(5, vec![a, b]).unwrap();
        prop_assert_eq!(s5.order() % d.order(), 0);
        let c = centralizer(&s5, &d).unwrap();
        let w = normalizer(&s5, &d).unwrap();
        prop_assert!(c.is_subgroup_of(&w.normalizer));
        prop_assert!(d.is_normal_in(&w.normalizer));
        prop_assert_eq!(w.quotient.order() * d.order(), w.normalizer.order());
        prop_assert_eq!(s5.left_coset_reps(&d).len(), s5.order() / d.order());
    }
}

#[test]
fn factorials_match_symmetric_orders() {
    for n in 1..=7 {
        assert_eq!(symmetric_group(n).unwrap().order(), factorial(n));
    }
}
