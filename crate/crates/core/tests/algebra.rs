use neutrix_core::scale::OrderPattern;
use neutrix_core::{AsymptoticReal, Exp, ExternalNumber, Idem, Neutrix};
use proptest::prelude::*;

fn half_exp() -> impl Strategy<Value = Exp> {
    (-4i64..=4).prop_map(|k| Exp::new(k, 2))
}

fn neutrix() -> impl Strategy<Value = Neutrix> {
    prop_oneof![
        Just(Neutrix::Zero),
        (half_exp(), any::<bool>()).prop_map(|(q, o)| Neutrix::Scaled(q, if o { Idem::Oslash } else { Idem::Pounds })),
        Just(Neutrix::Meps),
        Just(Neutrix::Mueps),
        Just(Neutrix::Full),
    ]
}

fn coef() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0])
}

fn rep() -> impl Strategy<Value = AsymptoticReal> {
    prop::collection::vec((coef(), half_exp()), 0..3).prop_map(AsymptoticReal::from_terms)
}

fn external() -> impl Strategy<Value = ExternalNumber> {
    (rep(), neutrix()).prop_map(|(r, n)| ExternalNumber::new(r, n))
}

fn zeroless() -> impl Strategy<Value = ExternalNumber> {
    external().prop_filter("zeroless", |a| a.is_zeroless())
}

fn appreciable() -> impl Strategy<Value = ExternalNumber> {
    (coef(), prop::collection::vec((coef(), (1i64..=4).prop_map(|k| Exp::new(k, 2))), 0..2), neutrix())
        .prop_map(|(c, rest, n)| {
            let mut r = AsymptoticReal::constant(c);
            r = r.add(&AsymptoticReal::from_terms(rest));
            ExternalNumber::new(r, n)
        })
        .prop_filter("zeroless", |a| a.is_zeroless())
}

/// Representative leading term `a` of a zeroless number, as a precise number.
fn lead(a: &ExternalNumber) -> ExternalNumber {
    ExternalNumber::precise(a.rep().clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn addition_commutes_and_associates(a in external(), b in external(), c in external()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
    }

    #[test]
    fn multiplication_commutes_and_associates(a in external(), b in external(), c in external()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn subdistributive(a in external(), b in external(), c in external()) {
        let d = ExternalNumber::distributivity_check(&a, &b, &c);
        prop_assert!(d.lhs.contains(&d.rhs), "({a} + {b})({c}) = {} not in {}", d.rhs, d.lhs);
    }

    #[test]
    fn distributive_with_correction(a in external(), b in external(), c in external()) {
        let d = ExternalNumber::distributivity_check(&a, &b, &c);
        let corrected = d
            .rhs
            .add(&ExternalNumber::from_neutrix(d.correction_alpha))
            .add(&ExternalNumber::from_neutrix(d.correction_beta));
        prop_assert_eq!(d.lhs, corrected);
    }

    #[test]
    fn zeroless_absorbs_like_its_representative(a in zeroless(), b in neutrix()) {
        let nb = ExternalNumber::from_neutrix(b);
        prop_assert_eq!(a.mul(&nb), lead(&a).mul(&nb));
        prop_assert_eq!(nb.div(&a).unwrap(), nb.div(&lead(&a)).unwrap());
    }

    #[test]
    fn reciprocal_neutrix(a in zeroless()) {
        let lhs = a.inv().unwrap().neutrix();
        let sq = lead(&a).mul(&lead(&a));
        let rhs = ExternalNumber::from_neutrix(a.neutrix()).div(&sq).unwrap().neutrix();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn relative_uncertainty_infinitesimal(a in zeroless()) {
        prop_assert!(a.relative_uncertainty().is_subset_of(&Neutrix::OSLASH));
        prop_assert!(a.inv().unwrap().relative_uncertainty().is_subset_of(&Neutrix::OSLASH));
    }

    #[test]
    fn zeroless_misses_its_oslash_multiple(a in zeroless()) {
        let small = a.mul(&ExternalNumber::from_neutrix(Neutrix::OSLASH));
        prop_assert!(a.disjoint(&small), "{a} meets {small}");
    }

    #[test]
    fn product_neutrix_of_zeroless(a in zeroless(), c in zeroless()) {
        let lhs = a.mul(&c).neutrix();
        let rhs = lead(&a)
            .mul(&ExternalNumber::from_neutrix(c.neutrix()))
            .neutrix()
            .add(&ExternalNumber::from_neutrix(a.neutrix()).mul(&lead(&c)).neutrix());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn appreciable_factor_fixes_neutrices(a in appreciable(), b in neutrix()) {
        let nb = ExternalNumber::from_neutrix(b);
        prop_assert_eq!(a.mul(&nb).neutrix(), b);
        prop_assert_eq!(nb.div(&a).unwrap().neutrix(), b);
    }

    #[test]
    fn order_is_total_off_the_superset_case(a in external(), b in external()) {
        let pattern = a.compare(&b);
        let d = a.rep().sub(b.rep());
        let strict_superset = b.neutrix().is_subset_of(&a.neutrix()) && b.neutrix() != a.neutrix();
        let exceptional = strict_superset && d.in_neutrix(&a.neutrix());
        prop_assert_eq!(pattern == OrderPattern::Incomparable, exceptional, "{} vs {}", a, b);
    }

    #[test]
    fn order_is_transitive(a in external(), b in external(), c in external()) {
        if a.leq(&b) && b.leq(&c) {
            prop_assert!(a.leq(&c), "{a} <= {b} <= {c}");
        }
        if a.lt(&b) && b.lt(&c) {
            prop_assert!(a.lt(&c), "{a} < {b} < {c}");
        }
    }

    #[test]
    fn translation_keeps_order(a in external(), b in external(), c in external()) {
        if a.lt(&b) {
            prop_assert!(a.add(&c).leq(&b.add(&c)));
        }
    }
}

#[test]
fn oslash_and_pounds_pattern() {
    let o = ExternalNumber::from_neutrix(Neutrix::OSLASH);
    let l = ExternalNumber::from_neutrix(Neutrix::POUNDS);
    assert!(o.leq(&l) && o.geq(&l));
    assert!(!l.leq(&o));
    assert_eq!(o.compare(&l), OrderPattern::LeqAndGeq);
}
