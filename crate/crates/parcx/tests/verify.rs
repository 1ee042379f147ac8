use parcx::complexes::{order_complex, partition_poset, subgroup_poset_b};
use parcx::exactalg::{FGAbGroup, GroupRingModule, Ring};
use parcx::mackey::{BorelFunctor, ConstantSystem, FixedPointFunctor, MackeyFunctor};
use parcx::permgroups::*;
use parcx::verify::*;
use serde_json::Value;

fn group(n: usize, gens: &[&[&[usize]]]) -> PermGroup {
    PermGroup::generate(n, gens.iter().map(|c| Permutation::from_cycles(n, c).unwrap()).collect()).unwrap()
}

fn cyclic(n: usize) -> PermGroup {
    let c: Vec<usize> = (1..=n).collect();
    group(n, &[&[&c]])
}

fn strs(v: &[FGAbGroup]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn witness_group(f: &parcx::verify::Finding, key: &str) -> PermGroup {
    serde_json::from_value(f.witness[key].clone()).unwrap()
}

#[test]
fn steinberg_ranks_follow_the_euler_characteristic() {
    for (k, p, rank) in [(1, 2, 1), (2, 2, 2), (1, 3, 1), (2, 3, 3), (3, 2, 8)] {
        let st = steinberg(k, p).unwrap();
        assert_eq!(st.rank, rank);
        assert_eq!(st.rank, p.pow((k * (k - 1) / 2) as u32));
        assert_eq!(st.nonzero_degrees, vec![k - 1]);
        if k > 1 {
            // reduced Euler characteristic of B_k, computed from simplex counts
            let x = order_complex(&subgroup_poset_b(k, p).unwrap()).unwrap();
            let chi: i64 = x.counts().iter().enumerate().map(|(q, &c)| if q % 2 == 0 { c as i64 } else { -(c as i64) }).sum();
            assert_eq!((chi - 1).unsigned_abs() as usize, rank);
        }
        assert!(st.tor1_trivial.is_zero());
        assert!(verify_steinberg(k, p).unwrap().passed());
    }
}

#[test]
fn steinberg_two_is_the_standard_representation() {
    let st = steinberg(2, 2).unwrap();
    let g = &st.module.group;
    let c3 = g.elements().iter().find(|x| x.order() == 3).unwrap();
    let m = st.module.matrix(c3).unwrap();
    assert_eq!(m[0][0] + m[1][1], -1);
    let st1 = steinberg(1, 3).unwrap();
    for x in st1.module.group.elements() {
        assert_eq!(st1.module.matrix(x).unwrap(), &vec![vec![1]]);
    }
    assert!(steinberg(3, 5).is_err());
}

#[test]
fn steinberg_side_examples() {
    let (t, _) = rhs_main(2, 2, builtin_functor("fp-trivial", 4, 2).unwrap().as_ref(), 0).unwrap();
    assert!(t.is_zero());
    let (t, tor) = rhs_main(1, 2, builtin_functor("fp-trivial", 2, 2).unwrap().as_ref(), 0).unwrap();
    assert_eq!(strs(&t.homology), vec!["Z(2)"]);
    assert!(tor.is_zero());
    let (t, _) = rhs_main(1, 3, builtin_functor("fp-sign", 3, 3).unwrap().as_ref(), 0).unwrap();
    assert!(t.is_zero());
    assert!(rhs_main(2, 2, builtin_functor("fp-trivial", 3, 2).unwrap().as_ref(), 0).is_err());
}

#[test]
fn direct_side_examples() {
    assert!(lhs_main(3, 2, builtin_functor("fp-trivial", 3, 2).unwrap().as_ref(), 0).unwrap().is_zero());
    for name in ["fp-trivial", "fp-sign", "fp-regular"] {
        let g = builtin_functor(name, 2, 2).unwrap();
        let t = lhs_main(2, 2, g.as_ref(), 0).unwrap();
        let top = parcx::mackey::value(g.as_ref(), g.group(), 0).unwrap();
        assert_eq!(t.homology[0], top, "{name}");
        assert!(t.homology[1..].iter().all(FGAbGroup::is_zero));
    }
    assert!(lhs_main(6, 3, builtin_functor("fp-trivial", 6, 3).unwrap().as_ref(), 0).is_err());
}

#[test]
fn main_statement_positive_cases() {
    for (n, p, name) in [(3, 3, "fp-sign"), (5, 2, "fp-trivial"), (4, 2, "fp-trivial"), (2, 2, "fp-sign")] {
        let g = builtin_functor(name, n, p).unwrap();
        let r = verify_main_theorem(n, p, g.as_ref()).unwrap();
        assert!(r.passed(), "{n} {p} {name}: {:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.outcome.as_deref(), Some("hypotheses-pass, conclusion-true"));
    }
    let r = verify_main_theorem(3, 3, builtin_functor("fp-sign", 3, 3).unwrap().as_ref()).unwrap();
    let sides = &r.parameters["sides"][0];
    assert!(sides["lhs"]["homology"].as_array().unwrap().iter().all(|v| v == "0"));
    assert!(sides["rhs"]["homology"].as_array().unwrap().iter().all(|v| v == "0"));
}

#[test]
fn main_statement_negative_control() {
    let g = builtin_functor("fp-trivial", 3, 3).unwrap();
    let r = verify_main_theorem(3, 3, g.as_ref()).unwrap();
    assert!(!r.passed());
    assert_eq!(r.outcome.as_deref(), Some("hypotheses-fail, conclusion-false"));
    assert!(r.failures().any(|f| f.check == "hypothesis:involution-condition"));
    let lhs = lhs_main(3, 3, g.as_ref(), 0).unwrap();
    let (rhs, _) = rhs_main(1, 3, g.as_ref(), 0).unwrap();
    assert_eq!(strs(&lhs.homology), vec!["Z/3", "0"]);
    assert!(lhs.cohomology.iter().all(FGAbGroup::is_zero));
    assert_eq!(rhs.homology[0].to_string(), "Z(3)");
    assert_eq!(rhs.cohomology[0].to_string(), "Z(3)");
    assert_ne!(lhs.homology[0], rhs.homology[0]);
}

#[test]
fn borel_coefficients_concentrate_in_degree_one() {
    let g = BorelFunctor::new(4, 2, 1, 6).unwrap();
    let r = verify_main_theorem(4, 2, &g).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let conc = r.findings.iter().find(|f| f.check == "concentration-degree").unwrap();
    assert_eq!(conc.witness, serde_json::json!([1]));
    let direct = lhs_main(4, 2, &g, 5).unwrap();
    assert_eq!(strs(&direct.homology), vec!["0", "Z/2", "0"]);
}

#[test]
fn survey_examples_in_degree_four() {
    let r = survey_fixed_points(4, 2).unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let s4 = symmetric_group(4).unwrap();
    let t = group(4, &[&[&[1, 2]]]);
    let conj = |h: &PermGroup| {
        r.findings
            .iter()
            .filter(|f| f.check == "classification")
            .find(|f| s4.conjugating_element(&witness_group(f, "subgroup"), h).is_some())
            .unwrap()
            .clone()
    };
    let f = conj(&t);
    assert_eq!(f.witness["fixed_elements"], 5);
    assert_eq!(f.witness["acyclic"], true);
    let d2 = regular_embedding(2, 2).unwrap();
    let f = conj(&d2);
    assert!(f.detail.contains("exempt"));
    assert_eq!(f.witness["fixed_elements"], 3);
    assert_eq!(f.witness["reduced_homology"], serde_json::json!(["Z^2"]));
    let syl = sylow_subgroup(&s4, 2).unwrap();
    assert_eq!(conj(&syl).witness["acyclic"], true);
}

#[test]
fn survey_passes_through_six() {
    for n in 2..=6 {
        for p in [2, 3] {
            let r = survey_fixed_points(n, p).unwrap();
            assert!(r.passed(), "n={n} p={p}: {:?}", r.failures().collect::<Vec<_>>());
        }
    }
}

#[test]
fn group_theory_examples() {
    let r = check_group_theory_cases(4, 2).unwrap();
    assert!(r.passed());
    assert!(r.findings.iter().all(|f| f.witness["clause"] == 1));
    assert!(check_group_theory_cases(3, 3).unwrap().passed());
    let r = check_group_theory_cases(6, 3).unwrap();
    assert!(r.passed());
    let d = group(6, &[&[&[1, 2, 3], &[4, 5, 6]]]);
    let s6 = symmetric_group(6).unwrap();
    let hit = r
        .findings
        .iter()
        .find(|f| f.witness["K_order"] == 72 && s6.conjugating_element(&witness_group(f, "D"), &d).is_some())
        .expect("case for the wreath stabilizer");
    assert!(hit.witness["clause"] == 1 || hit.witness["clause"] == 2);
    if hit.witness["clause"] == 2 {
        assert!(hit.witness["involution"].is_array());
    }
}

#[test]
fn isotropy_of_p4() {
    let iso = isotropy_classes(4).unwrap();
    let mut orders: Vec<usize> = iso.iter().map(PermGroup::order).collect();
    orders.sort_unstable();
    // stabilizers of the 3 vertex orbits and 2 edge orbits, fused up to conjugacy
    assert!(orders.contains(&6) && orders.contains(&8) && orders.contains(&4));
}

#[test]
fn superfluous_examples() {
    let s3 = symmetric_group(3).unwrap();
    let sign = GroupRingModule::sign(&s3, 3, None).unwrap();
    let r = check_superfluous(&s3, 3, &sign, 2).unwrap();
    assert_eq!(r.outcome.as_deref(), Some("superfluous"));
    let signz = GroupRingModule::sign(&s3, 0, Some(3)).unwrap();
    assert!(check_superfluous(&s3, 3, &signz, 2).unwrap().passed());
    let z2 = cyclic(2);
    let m = GroupRingModule::trivial(&z2, 2, None, 1).unwrap();
    assert!(check_superfluous(&z2, 2, &m, 3).unwrap().passed());
    let e = PermGroup::trivial(1);
    let m = GroupRingModule::trivial(&e, 2, None, 1).unwrap();
    let r = check_superfluous(&e, 2, &m, 2).unwrap();
    assert_eq!(r.outcome.as_deref(), Some("not-superfluous"));
    let z3 = cyclic(3);
    let m = GroupRingModule::trivial(&z3, 2, None, 1).unwrap();
    assert_eq!(check_superfluous(&z3, 2, &m, 2).unwrap().outcome.as_deref(), Some("not-superfluous"));
}

#[test]
fn pruning_examples() {
    for p in [2usize, 3] {
        let z = cyclic(p);
        let m = GroupRingModule::trivial(&z, 0, Some(p as u64), 1).unwrap();
        assert!(verify_algebraic_pruning(&z, p, &m, 2).unwrap().passed());
    }
    let s3 = symmetric_group(3).unwrap();
    let m = GroupRingModule::trivial(&s3, 0, Some(2), 1).unwrap();
    assert_eq!(action_kernel(&m).unwrap(), s3);
    assert!(verify_algebraic_pruning(&s3, 2, &m, 2).unwrap().passed());
    let sign = GroupRingModule::sign(&s3, 0, Some(2)).unwrap();
    assert_eq!(action_kernel(&sign).unwrap().order(), 3);
    assert_eq!(verify_algebraic_pruning(&s3, 2, &sign, 2).unwrap().status, Status::Skipped);
    let z3 = cyclic(3);
    let reg = GroupRingModule::regular(&z3, 0, Some(2)).unwrap();
    assert!(action_kernel(&reg).unwrap().is_trivial());
    let r = verify_algebraic_pruning(&z3, 2, &reg, 2).unwrap();
    assert_eq!(r.status, Status::Skipped);
}

#[test]
fn poset_lemmas_hold() {
    let r = verify_poset_lemmas().unwrap();
    assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    let reg = regular_representation(&cyclic(4)).unwrap();
    assert_eq!((reg.degree(), reg.order()), (4, 4));
}

#[test]
fn one_class_lemma_examples() {
    let s4 = symmetric_group(4).unwrap();
    let x4 = order_complex(&partition_poset(4).unwrap()).unwrap();
    let v4 = regular_embedding(2, 2).unwrap();
    let c = ConstantSystem::new(s4.clone(), Ring::Integers, None, 1);
    assert!(verify_one_class_lemma(&x4, &v4, &c, 0, 3).unwrap().passed());
    // W trivial: D8 is self-normalizing
    let d8 = sylow_subgroup(&s4, 2).unwrap();
    let sign: Box<dyn MackeyFunctor> = Box::new(FixedPointFunctor::new(GroupRingModule::sign(&s4, 0, Some(2)).unwrap(), "sign"));
    assert!(verify_one_class_lemma(&x4, &d8, sign.as_ref(), 0, 3).unwrap().passed());
    // empty fixed points
    let x5 = order_complex(&partition_poset(5).unwrap()).unwrap();
    let c5 = ConstantSystem::new(symmetric_group(5).unwrap(), Ring::Integers, None, 1);
    let r = verify_one_class_lemma(&x5, &cyclic(5), &c5, 0, 2).unwrap();
    assert!(r.passed());
    assert!(verify_one_class_lemma(&x4, &v4, &c, 0, 1).is_err());
}

#[test]
fn reports_are_deterministic() {
    let g = builtin_functor("fp-regular", 4, 2).unwrap();
    let a = verify_main_theorem(4, 2, g.as_ref()).unwrap().deterministic_json();
    let b = verify_main_theorem(4, 2, g.as_ref()).unwrap().deterministic_json();
    assert_eq!(a, b);
    let a = check_group_theory_cases(5, 2).unwrap().deterministic_json();
    let b = check_group_theory_cases(5, 2).unwrap().deterministic_json();
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert!(v.get("elapsed_ms").is_none());
}

#[test]
fn report_json_round_trips() {
    let r = survey_fixed_points(4, 2).unwrap();
    let back: VerificationReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn snf_report_passes() {
    assert!(snf_property_report(50, 8, 3).unwrap().passed());
}

#[test]
fn builtin_names() {
    assert!(builtin_functor("nonsense", 3, 2).is_err());
    assert_eq!(prime_power_exponent(8, 2), Some(3));
    assert_eq!(prime_power_exponent(6, 2), None);
    assert_eq!(prime_power_exponent(1, 2), None);
}
