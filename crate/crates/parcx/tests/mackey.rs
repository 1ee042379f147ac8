use std::sync::Arc;

use parcx::complexes::{borel_model, discrete_complex, sphere_model};
use parcx::exactalg::{twisted_homology, GroupRingModule, Ring};
use parcx::mackey::*;
use parcx::permgroups::*;
use parcx::verify::builtin_functor;
use proptest::prelude::*;

fn sym(n: usize) -> PermGroup {
    symmetric_group(n).unwrap()
}

fn group(n: usize, gens: &[&[&[usize]]]) -> PermGroup {
    PermGroup::generate(n, gens.iter().map(|c| Permutation::from_cycles(n, c).unwrap()).collect()).unwrap()
}

fn fp(m: GroupRingModule) -> FixedPointFunctor {
    FixedPointFunctor::new(m, "test")
}

#[test]
fn evaluation_examples() {
    let g = sym(3);
    let c = ConstantSystem::new(g.clone(), Ring::Integers, None, 1);
    let two = FiniteGSet::from_orbits(&g, &[g.clone(), PermGroup::trivial(3)]).unwrap();
    assert_eq!(evaluate(&c, &two, 0).unwrap().rank, 2);
    let empty = FiniteGSet::from_orbits(&g, &[]).unwrap();
    assert!(evaluate(&c, &empty, 0).unwrap().is_zero());

    let s4 = sym(4);
    let reg = fp(GroupRingModule::regular(&s4, 0, Some(2)).unwrap());
    let orbit = FiniteGSet::from_orbits(&s4, &[regular_embedding(2, 2).unwrap()]).unwrap();
    assert_eq!(evaluate(&reg, &orbit, 0).unwrap().rank, 6);
}

#[test]
fn regular_fixed_points_have_rank_index() {
    let s4 = sym(4);
    let reg = fp(GroupRingModule::regular(&s4, 0, Some(2)).unwrap());
    for h in subgroup_classes(&s4).unwrap() {
        assert_eq!(reg.rank(&h, 0).unwrap(), 24 / h.order(), "{h}");
    }
}

#[test]
fn fixed_point_values() {
    let s3 = sym(3);
    let t = fp(GroupRingModule::trivial(&s3, 0, Some(2), 1).unwrap());
    for h in subgroup_classes(&s3).unwrap() {
        assert_eq!(value(&t, &h, 0).unwrap().to_string(), "Z(2)");
    }
    let sign = fp(GroupRingModule::sign(&s3, 0, Some(3)).unwrap());
    assert!(value(&sign, &group(3, &[&[&[1, 2]]]), 0).unwrap().is_zero());
    assert_eq!(value(&sign, &group(3, &[&[&[1, 2, 3]]]), 0).unwrap().rank, 1);
}

#[test]
fn constant_system_values_and_maps() {
    let g = sym(3);
    let c = ConstantSystem::new(g.clone(), Ring::Integers, None, 2);
    let h = group(3, &[&[&[1, 2]]]);
    assert_eq!(c.rank(&h, 0).unwrap(), 2);
    assert!(c.transfer(&h, &g, 0).unwrap().is_identity_mod(0));
    assert!(c.restriction(&h, &g, 0).unwrap().is_identity_mod(0));
}

#[test]
fn transfer_after_restriction_is_the_index() {
    for name in ["fp-trivial", "fp-sign", "fp-regular"] {
        for (n, p) in [(3usize, 2usize), (3, 3), (4, 2)] {
            let f = builtin_functor(name, n, p).unwrap();
            let subs = all_subgroups(f.group()).unwrap();
            for h in &subs {
                for k in subs.iter().filter(|k| h.is_subgroup_of(k)) {
                    let r = f.restriction(h, k, 0).unwrap();
                    let t = f.transfer(h, k, 0).unwrap();
                    let tr = t.mul(&r, 0).unwrap();
                    let idx = (k.order() / h.order()) as i64;
                    assert_eq!(tr, Mat::identity(tr.rows).scale(idx, 0), "{name} {h} ≤ {k}");
                }
            }
        }
    }
}

#[test]
fn covariant_maps_compose() {
    let g = sym(4);
    let f = fp(GroupRingModule::regular(&g, 0, Some(2)).unwrap());
    let e = PermGroup::trivial(4);
    let id = g.identity();
    for h in subgroup_classes(&g).unwrap() {
        let a = orbit_covariant(&f, &e, &h, &id, 0).unwrap();
        let b = orbit_covariant(&f, &h, &g, &id, 0).unwrap();
        let direct = orbit_covariant(&f, &e, &g, &id, 0).unwrap();
        assert_eq!(b.mul(&a, 0).unwrap(), direct);
        let a = orbit_contravariant(&f, &e, &h, &id, 0).unwrap();
        let b = orbit_contravariant(&f, &h, &g, &id, 0).unwrap();
        assert_eq!(a.mul(&b, 0).unwrap(), orbit_contravariant(&f, &e, &g, &id, 0).unwrap());
    }
}

#[test]
fn inner_automorphisms_act_trivially() {
    let g = sym(4);
    let f = fp(GroupRingModule::regular(&g, 0, Some(2)).unwrap());
    for h in subgroup_classes(&g).unwrap() {
        for x in h.elements() {
            assert!(f.conjugation(&h, x, 0).unwrap().is_identity_mod(0), "{h} by {x}");
        }
    }
}

#[test]
fn span_examples() {
    let g = sym(3);
    let f = fp(GroupRingModule::regular(&g, 0, Some(3)).unwrap());
    let h = group(3, &[&[&[1, 2]]]);
    let s = FiniteGSet::from_orbits(&g, &[h.clone()]).unwrap();
    let t = FiniteGSet::from_orbits(&g, &[g.clone()]).unwrap();
    let proj = GMap::new(s.clone(), t.clone(), vec![0; s.size]).unwrap();
    let ids = GMap::identity(&s);
    assert_eq!(span_apply(&f, &ids, &proj, 0).unwrap(), covariant_matrix(&f, &proj, 0).unwrap());
    assert_eq!(span_apply(&f, &proj, &ids, 0).unwrap(), contravariant_matrix(&f, &proj, 0).unwrap());

    let c = ConstantSystem::new(g.clone(), Ring::Integers, Some(3), 1);
    let two = FiniteGSet::from_orbits(&g, &[g.clone(), g.clone()]).unwrap();
    let fold = GMap::new(two, t.clone(), vec![0, 0]).unwrap();
    assert_eq!(span_apply(&c, &fold, &fold, 0).unwrap(), Mat::identity(1).scale(2, 0));
    assert!(check_p_constrained(&c, 3, 1, Some(&[g.clone()])).unwrap().passed());
}

#[test]
fn mismatched_span_legs_are_rejected() {
    let g = sym(3);
    let f = fp(GroupRingModule::trivial(&g, 0, None, 1).unwrap());
    let s = FiniteGSet::from_orbits(&g, &[PermGroup::trivial(3)]).unwrap();
    let t = FiniteGSet::from_orbits(&g, &[g.clone()]).unwrap();
    let a = GMap::identity(&s);
    let b = GMap::identity(&t);
    assert!(span_apply(&f, &a, &b, 0).is_err());
}

#[test]
fn axioms_for_builtins_and_a_corrupted_control() {
    let s3 = sym(3);
    let t: Arc<dyn MackeyFunctor> = Arc::new(fp(GroupRingModule::trivial(&s3, 0, None, 1).unwrap()));
    assert!(check_mackey_axioms(t.as_ref(), None).unwrap().passed());
    for name in ["fp-trivial", "fp-sign", "fp-regular"] {
        let f = builtin_functor(name, 4, 2).unwrap();
        assert!(check_mackey_axioms(f.as_ref(), None).unwrap().passed(), "{name}");
    }
    let bad = CorruptedFunctor::new(t).unwrap();
    let r = check_mackey_axioms(&bad, None).unwrap();
    let fail = r.failures().find(|x| x.check == "double-coset").expect("double coset failure");
    assert!(!fail.witness.is_null());
}

#[test]
fn constant_system_is_not_a_mackey_functor() {
    let c = builtin_functor("constant", 3, 2).unwrap();
    let r = check_mackey_axioms(c.as_ref(), None).unwrap();
    assert!(!r.passed());
    assert!(r.failures().all(|x| x.check == "double-coset"));
}

#[test]
fn p_constrained_examples() {
    let g = sym(3);
    let sign = fp(GroupRingModule::sign(&g, 0, Some(3)).unwrap());
    assert!(check_p_constrained(&sign, 3, 9, None).unwrap().passed());
    let z = fp(GroupRingModule::trivial(&g, 0, None, 1).unwrap());
    assert!(!check_p_constrained(&z, 3, 9, None).unwrap().passed());
    let c = builtin_functor("constant", 3, 3).unwrap();
    assert!(!check_p_constrained(c.as_ref(), 3, 9, None).unwrap().passed());
}

#[test]
fn centralizer_condition_examples() {
    let s4 = sym(4);
    assert!(check_centralizer_condition(&fp(GroupRingModule::trivial(&s4, 0, Some(2), 1).unwrap()), 4, 2).unwrap().passed());
    let r = check_centralizer_condition(&fp(GroupRingModule::regular(&s4, 0, Some(2)).unwrap()), 4, 2).unwrap();
    assert!(!r.passed());
    let borel = BorelFunctor::new(4, 2, 1, 4).unwrap();
    assert!(check_centralizer_condition(&borel, 4, 2).unwrap().passed());
}

#[test]
fn involution_condition_examples() {
    let s3 = sym(3);
    assert!(check_involution_condition(&fp(GroupRingModule::sign(&s3, 0, Some(3)).unwrap()), 3, 3).unwrap().passed());
    assert!(!check_involution_condition(&fp(GroupRingModule::trivial(&s3, 0, Some(3), 1).unwrap()), 3, 3).unwrap().passed());
    let borel = BorelFunctor::new(3, 3, 1, 4).unwrap();
    assert!(check_involution_condition(&borel, 3, 3).unwrap().passed());
}

#[test]
fn qualifying_subgroups_are_elementary_abelian() {
    for (n, p) in [(4, 2), (6, 2), (6, 3)] {
        for d in qualifying_subgroups(n, p).unwrap() {
            assert!(d.is_elementary_abelian() && d.is_p_group(p), "{d}");
        }
    }
}

#[test]
fn borel_values_against_sphere_and_thom_oracles() {
    let f = BorelFunctor::new(2, 2, 1, 6).unwrap();
    // trivial subgroup: reduced homology of the sphere itself
    let s = sphere_model(2, 1).unwrap();
    let h = s.reduced_homology_all(Ring::Fp(2)).unwrap();
    for b in 0..=6 {
        let want = h.get(b).map_or(0, |g| g.generators());
        assert_eq!(f.rank(&PermGroup::trivial(2), b).unwrap(), want, "b = {b}");
    }
    // full group: Thom isomorphism shifts group homology of Z/2 up by 2
    let w = sym(2);
    let pt = discrete_complex(&w, 1, vec![vec![0]]).unwrap();
    let bz2 = twisted_homology(&borel_model(&w, &pt, 7).unwrap(), &GroupRingModule::trivial(&w, 2, None, 1).unwrap(), 5).unwrap();
    for b in 0..=6 {
        let want = if b < 2 { 0 } else { bz2[b - 2].generators() };
        assert_eq!(f.rank(&w, b).unwrap(), want, "b = {b}");
    }
    assert!(check_mackey_axioms(&f, None).unwrap().passed());
}

#[test]
fn borel_at_trivial_subgroup_is_concentrated() {
    for n in 2..=4 {
        let f = BorelFunctor::new(n, 2, 1, 6).unwrap();
        let ranks: Vec<usize> = (0..=6).map(|b| f.rank(&PermGroup::trivial(n), b).unwrap()).collect();
        let want: Vec<usize> = (0..=6).map(|b| usize::from(b == n)).collect();
        assert_eq!(ranks, want, "n = {n}");
    }
}

#[test]
fn borel_parameter_checks() {
    assert!(BorelFunctor::new(3, 3, 2, 4).is_err());
    assert!(BorelFunctor::new(5, 2, 1, 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conjugation_is_functorial(a in 0usize..24, b in 0usize..24, hi in 0usize..11) {
        let g = sym(4);
        let f = fp(GroupRingModule::regular(&g, 0, Some(2)).unwrap());
        let subs = subgroup_classes(&g).unwrap();
        let h = &subs[hi % subs.len()];
        let (x, y) = (&g.elements()[a], &g.elements()[b]);
        let cx = f.conjugation(h, x, 0).unwrap();
        let cy = f.conjugation(&h.conjugate(x), y, 0).unwrap();
        let cyx = f.conjugation(h, &y.compose(x), 0).unwrap();
        prop_assert_eq!(cy.mul(&cx, 0).unwrap(), cyx);
    }
}
