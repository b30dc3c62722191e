use ifl_core::fullness::fullness_certificate;
use ifl_core::howell::howell_form;
use ifl_core::ideals::{enumerate_ideals, maximal_ideal, IdealHandle};
use ifl_core::matrix as mx;
use ifl_core::pink::{congruence_level, gamma, group_from_strings, sl2_elements, verify_pink_theorem};
use ifl_core::rings::Ring;
use proptest::prelude::*;

const CAP: usize = 500_000;

#[test]
fn sl2_orders() {
    // |SL2(Z/p^a)| = p^{3a}(1 - p^-2); kernel of reduction mod T has order p^{3(b-1)}.
    for (p, a, b, order) in [(3, 1, 1, 24), (3, 2, 1, 648), (3, 1, 2, 648), (3, 1, 3, 17496), (5, 1, 1, 120), (7, 1, 1, 336)] {
        let r = Ring::trunc_iwasawa(p, a, b).unwrap();
        assert_eq!(sl2_elements(&r, CAP).unwrap().order(), order, "p={p} a={a} b={b}");
    }
}

#[test]
fn ideal_counts() {
    let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
    assert_eq!(enumerate_ideals(&r, 1 << 20).unwrap().len(), 4);
    let r = Ring::trunc_iwasawa(5, 3, 1).unwrap();
    assert_eq!(enumerate_ideals(&r, 1 << 20).unwrap().len(), 4);
    assert!(Ring::trunc_iwasawa(2, 3, 1).is_err());
}

#[test]
fn principal_congruence_orders() {
    let r = Ring::trunc_iwasawa(3, 2, 2).unwrap();
    assert_eq!(gamma(&maximal_ideal(&r), CAP).unwrap().order(), 19683);
    let t = IdealHandle::from_strings(&r, &["T"]).unwrap();
    assert_eq!(gamma(&t, CAP).unwrap().order(), 729);
}

#[test]
fn level_of_gamma_is_recovered() {
    let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
    for i in enumerate_ideals(&r, 1 << 20).unwrap() {
        let g = gamma(&i, CAP).unwrap();
        assert_eq!(congruence_level(&g, CAP).unwrap().ideal, i);
    }
}

#[test]
fn pink_theorem_on_gamma_t() {
    let r = Ring::trunc_iwasawa(3, 1, 3).unwrap();
    let g = group_from_strings(&r, &["1,T;0,1", "1,0;T,1", "1+T,0;0,1+2*T+T^2"], CAP).unwrap();
    assert_eq!(g.order(), 729);
    let v = verify_pink_theorem(&g, 3, CAP).unwrap();
    assert!(v.passed && v.normal_in_h1);
}

#[test]
fn fullness_certificate_is_sound() {
    let r = Ring::trunc_iwasawa(3, 2, 2).unwrap();
    let o = r.ops().unwrap();
    let g = gamma(&maximal_ideal(&r), CAP).unwrap();
    let j = mx::parse(&o, "1,0;0,8").unwrap();
    let cert = fullness_certificate(&g, &j, CAP).unwrap();
    assert!(cert.verified);
    assert!(!cert.ideal.is_zero());
    assert!(gamma(&cert.ideal, CAP).unwrap().is_subset(&g));
}

fn rows() -> impl Strategy<Value = Vec<Vec<u64>>> {
    prop::collection::vec(prop::collection::vec(0u64..27, 3), 0..5)
}

proptest! {
    #[test]
    fn howell_form_spans_its_input(rs in rows()) {
        let h = howell_form(rs.clone(), 3, 3, 3);
        for r in &rs {
            prop_assert!(h.contains(r));
        }
        let again = howell_form(h.rows.clone(), 3, 3, 3);
        prop_assert_eq!(&again.rows, &h.rows);
        let mut rev = rs.clone();
        rev.reverse();
        prop_assert_eq!(howell_form(rev, 3, 3, 3).rows, h.rows);
    }

    #[test]
    fn intersection_and_sum_sizes(x in rows(), y in rows()) {
        let a = howell_form(x, 3, 3, 3);
        let b = howell_form(y, 3, 3, 3);
        let s = a.sum(&b);
        let i = a.intersection(&b);
        prop_assert_eq!(s.size() * i.size(), a.size() * b.size());
        prop_assert!(s.contains_lattice(&a) && a.contains_lattice(&i));
    }
}
