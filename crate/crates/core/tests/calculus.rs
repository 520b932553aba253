use neutrix_core::calc::{inner_limit, limit, neutrix_derivative, outer_limit, ExternalPoint, LimitKind};
use neutrix_core::flex::{eval, eval_f64, Expr, Prim};
use neutrix_core::scale::{exp, exp_frac};
use neutrix_core::{AsymptoticReal, ExternalNumber, Neutrix};
use proptest::prelude::*;

fn coef() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0])
}

fn small_neutrix() -> impl Strategy<Value = Neutrix> {
    prop::sample::select(vec![
        Neutrix::Zero,
        Neutrix::OSLASH,
        Neutrix::oslash(exp(1)),
        Neutrix::pounds(exp(1)),
        Neutrix::pounds(exp_frac(1, 2)),
    ])
}

fn m_neutrix() -> impl Strategy<Value = Neutrix> {
    prop::sample::select(vec![
        Neutrix::OSLASH,
        Neutrix::oslash(exp_frac(1, 2)),
        Neutrix::pounds(exp(1)),
        Neutrix::pounds(exp_frac(1, 2)),
    ])
}

fn point() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![-2.0, -1.0, 0.0, 0.5, 1.0, 3.0])
}

fn monomial(c: Expr, k: i32) -> Expr {
    if k == 0 {
        c
    } else {
        Expr::mul(c, Expr::pow(Expr::x(), k))
    }
}

/// `sum c_k x^k + sum N_j x^j`.
fn flexible_poly() -> impl Strategy<Value = Expr> {
    (
        prop::collection::vec((coef(), 0i32..=3), 1..4),
        prop::collection::vec((small_neutrix(), 0i32..=2), 0..3),
    )
        .prop_map(|(exact, loose)| {
            let mut e = Expr::c(0.0);
            for (c, k) in exact {
                e = Expr::add(e, monomial(Expr::c(c), k));
            }
            for (n, k) in loose {
                e = Expr::add(e, monomial(Expr::neutrix(n), k));
            }
            e
        })
}

fn internal_poly() -> impl Strategy<Value = Vec<(f64, i32)>> {
    prop::collection::vec((coef(), 0i32..=4), 1..5)
}

fn poly_expr(terms: &[(f64, i32)]) -> Expr {
    terms.iter().fold(Expr::c(0.0), |e, (c, k)| Expr::add(e, monomial(Expr::c(*c), *k)))
}

fn internal_tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::x()), Just(Expr::y()), coef().prop_map(Expr::c)];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), 1i32..=3).prop_map(|(a, k)| Expr::pow(a, k)),
            inner.clone().prop_map(|a| Expr::smooth(Prim::Sin, a)),
            inner.clone().prop_map(|a| Expr::smooth(Prim::Cos, a)),
            inner.prop_map(|a| Expr::smooth(Prim::Exp, Expr::mul(Expr::c(0.25), a))),
        ]
    })
}

/// `(c_1 + oslash) x + ... + (c_k + oslash) x^k`.
fn imprecise_poly(cs: &[f64]) -> Expr {
    cs.iter().enumerate().fold(Expr::c(0.0), |e, (i, c)| {
        let coef = ExternalNumber::new(AsymptoticReal::constant(*c), Neutrix::OSLASH);
        Expr::add(e, monomial(Expr::en(coef), i as i32 + 1))
    })
}

fn at(a: f64) -> AsymptoticReal {
    AsymptoticReal::constant(a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn internal_eval_matches_floats(e in internal_tree(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let v = eval(&e, &[ExternalNumber::real(x), ExternalNumber::real(y)]).unwrap();
        let exact = v.rep().standard_part().unwrap_or(0.0);
        let float = eval_f64(&e, [x, y], 1e-12);
        prop_assert!(v.is_precise());
        prop_assert!((exact - float).abs() <= 1e-12 * float.abs().max(1.0), "{exact} vs {float}");
    }

    #[test]
    fn widening_a_coefficient_widens_the_value(
        terms in prop::collection::vec((coef(), small_neutrix(), 0i32..=3), 1..4),
        which in 0usize..4,
        wider in small_neutrix(),
        x in point(),
    ) {
        let which = which % terms.len();
        let build = |widen: bool| {
            terms.iter().enumerate().fold(Expr::c(0.0), |e, (i, (c, n, k))| {
                let n = if widen && i == which { n.add(&wider) } else { *n };
                let coef = ExternalNumber::new(AsymptoticReal::constant(*c), n);
                Expr::add(e, monomial(Expr::en(coef), *k))
            })
        };
        let p = [ExternalNumber::real(x), ExternalNumber::zero()];
        let narrow = eval(&build(false), &p).unwrap();
        let wide = eval(&build(true), &p).unwrap();
        prop_assert!(narrow.neutrix().is_subset_of(&wide.neutrix()));
        prop_assert!(wide.contains(&narrow), "{narrow} not in {wide}");
    }

    #[test]
    fn outer_limit_inside_inner_limit(f in flexible_poly(), a in point(), m in m_neutrix()) {
        let p = ExternalPoint::one(at(a), m);
        let outer = outer_limit(&f, &p).unwrap().value;
        let inner = inner_limit(&f, &p).unwrap().value;
        prop_assert!(inner.contains(&outer), "outer {outer}, inner {inner}");
    }

    #[test]
    fn inner_limit_grows_with_m(f in flexible_poly(), a in point(), m in m_neutrix(), m2 in m_neutrix()) {
        let (small, big) = if m.is_subset_of(&m2) { (m, m2) } else { (m2, m) };
        let lo = inner_limit(&f, &ExternalPoint::one(at(a), small)).unwrap().value;
        let hi = inner_limit(&f, &ExternalPoint::one(at(a), big)).unwrap().value;
        prop_assert!(hi.contains(&lo), "{small}: {lo}, {big}: {hi}");
    }

    #[test]
    fn limit_laws(f in flexible_poly(), g in flexible_poly(), c in coef(), a in point(), m in m_neutrix()) {
        let p = ExternalPoint::one(at(a), m);
        let lim = |e: &Expr| limit(e, &p, LimitKind::Outer).unwrap().value;
        let (lf, lg) = (lim(&f), lim(&g));
        let sum = lim(&Expr::add(f.clone(), g.clone()));
        prop_assert!(lf.add(&lg).contains(&sum));
        prop_assert!(sum.neutrix().is_subset_of(&lf.neutrix().add(&lg.neutrix())));
        prop_assert_eq!(lim(&Expr::mul(Expr::c(c), f.clone())), lf.scale(c));
        if lf.is_zeroless() || lg.is_zeroless() {
            let prod = lim(&Expr::mul(f.clone(), g.clone()));
            prop_assert!(lf.mul(&lg).contains(&prod), "{prod} not in ({lf})({lg})");
        }
        if lf.is_zeroless() {
            let rec = lim(&Expr::div(Expr::c(1.0), f.clone()));
            prop_assert_eq!(rec, lf.inv().unwrap());
        }
    }

    #[test]
    fn ordinary_derivative_in_neutrix_derivative(terms in internal_poly(), a in point(), m in m_neutrix()) {
        let f = poly_expr(&terms);
        let slope: f64 = terms
            .iter()
            .filter(|(_, k)| *k > 0)
            .map(|(c, k)| c * *k as f64 * a.powi(k - 1))
            .sum();
        let d = neutrix_derivative(&f, &at(a), m).unwrap().value;
        prop_assert!(d.contains_real(&AsymptoticReal::constant(slope)), "{slope} not in {d}");
    }

    #[test]
    fn derivative_of_imprecise_polynomial(cs in prop::collection::vec(coef(), 2..5), x in prop::sample::select(vec![0.5f64, 1.0, 2.0])) {
        let p = imprecise_poly(&cs);
        let slope: f64 = cs.iter().enumerate().map(|(i, c)| (i + 1) as f64 * c * x.powi(i as i32)).sum();
        let d = neutrix_derivative(&p, &at(x), Neutrix::OSLASH).unwrap().value;
        prop_assert_eq!(d, ExternalNumber::new(AsymptoticReal::constant(slope), Neutrix::OSLASH));
    }

    #[test]
    fn derivative_imprecision_grows_with_x(cs in prop::collection::vec(coef(), 2..5)) {
        // At x = 1/eps the singular term N(P(x))/h = oslash x^k dominates.
        let k = cs.len() as i64;
        let big = AsymptoticReal::monomial(1.0, exp(-1));
        let d = neutrix_derivative(&imprecise_poly(&cs), &big, Neutrix::OSLASH).unwrap().value;
        prop_assert_eq!(d.neutrix(), Neutrix::oslash(exp(-k)));
    }
}
