use neutrix_core::flex::{eval, Expr};
use neutrix_core::opt::{
    fermat_certificate, implicit_solve, lagrange_solve, verdict_near_optimum, OptimalityQuery, Sense, Verdict,
};
use neutrix_core::scale::{exp, exp_frac};
use neutrix_core::{AsymptoticReal, Exp, ExternalNumber, Neutrix};
use proptest::prelude::*;

fn positive() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.5, 1.0, 2.0, 3.0])
}

fn noise() -> impl Strategy<Value = Neutrix> {
    prop::sample::select(vec![
        Neutrix::Zero,
        Neutrix::OSLASH,
        Neutrix::oslash(exp(1)),
        Neutrix::pounds(exp(1)),
        Neutrix::pounds(exp(2)),
    ])
}

fn scale_neutrix() -> impl Strategy<Value = Neutrix> {
    prop::sample::select(vec![
        Neutrix::Zero,
        Neutrix::OSLASH,
        Neutrix::oslash(exp_frac(1, 2)),
        Neutrix::pounds(exp_frac(1, 2)),
        Neutrix::oslash(exp(1)),
        Neutrix::pounds(exp(1)),
    ])
}

/// `c (x - x0)^2 + N0 + N1 x`.
fn objective(c: f64, x0: f64, n0: Neutrix, n1: Neutrix) -> Expr {
    let d = Expr::sub(Expr::x(), Expr::c(x0));
    let q = Expr::mul(Expr::c(c), Expr::pow(d, 2));
    Expr::add(Expr::add(q, Expr::neutrix(n0)), Expr::mul(Expr::neutrix(n1), Expr::x()))
}

fn offset(x0: f64, sigma: f64, t: Exp) -> AsymptoticReal {
    AsymptoticReal::constant(x0).add(&AsymptoticReal::monomial(sigma, t))
}

const LINE: [f64; 2] = [f64::NEG_INFINITY, f64::INFINITY];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn certificates_survive_smaller_m_and_larger_n(
        c in positive(),
        n0 in noise(),
        n1 in noise(),
        m in scale_neutrix(),
        n in scale_neutrix(),
        m2 in scale_neutrix(),
        n2 in scale_neutrix(),
        sigma in prop::sample::select(vec![-1.0, 0.5, 2.0]),
        t in (0i64..=8).prop_map(|k| Exp::new(k, 4)),
    ) {
        prop_assume!(m2.is_subset_of(&m) && n.is_subset_of(&n2));
        let f = objective(c, 1.0, n0, n1);
        let a = [offset(1.0, sigma, t)];
        let q = OptimalityQuery::local(f, LINE, Sense::Min, m, n);
        if verdict_near_optimum(&q, &a).unwrap() == Verdict::Holds {
            let shrunk = OptimalityQuery { m: Some(vec![m2]), n: n2, ..q };
            prop_assert_eq!(verdict_near_optimum(&shrunk, &a).unwrap(), Verdict::Holds);
        }
    }

    #[test]
    fn fermat_certificates_admit_no_better_neighbor(
        c in positive(),
        x0 in prop::sample::select(vec![0.0, 1.0]),
        n0 in noise(),
        n1 in noise(),
        a in prop::sample::select(vec![0.0, 1.0, -1.0]),
        m in prop::sample::select(vec![Neutrix::OSLASH, Neutrix::pounds(exp(1))]),
        l in prop::sample::select(vec![Neutrix::OSLASH, Neutrix::POUNDS, Neutrix::pounds(exp(1))]),
    ) {
        let f = objective(c, x0, n0, n1);
        let at = AsymptoticReal::constant(a);
        let cert = fermat_certificate(&f, &at, m, l).unwrap();
        if cert.is_certified() {
            let fa = eval(&f, &[ExternalNumber::precise(at.clone())]).unwrap();
            let bar = fa.add(&ExternalNumber::from_neutrix(l));
            let lo = m.exponent().unwrap_or(Exp::from_integer(0));
            for k in 0..=8 {
                let t = lo + Exp::new(k, 4);
                for sigma in [-2.0, -1.0, 0.5, 1.0, 2.0] {
                    let x = offset(a, sigma, t);
                    let fx = eval(&f, &[ExternalNumber::precise(x)]).unwrap();
                    prop_assert!(!fx.lt(&bar), "F({a} + {sigma} eps^{t}) = {fx} < {bar}");
                }
            }
        }
    }

    #[test]
    fn implicit_witness_is_consistent(
        p in positive(),
        r in positive(),
        x0 in prop::sample::select(vec![-0.5, 0.0, 0.25, 0.5]),
    ) {
        let rest = 1.0 - p * x0 * x0;
        prop_assume!(rest > 0.1);
        let y0 = (rest / r).sqrt();
        let g = Expr::sub(
            Expr::sub(Expr::c(1.0), Expr::mul(Expr::c(p), Expr::pow(Expr::x(), 2))),
            Expr::mul(Expr::c(r), Expr::pow(Expr::y(), 2)),
        );
        let res = implicit_solve(
            &g,
            (&AsymptoticReal::constant(x0), &AsymptoticReal::constant(y0)),
            Neutrix::OSLASH,
            Neutrix::OSLASH,
        )
        .unwrap();
        prop_assert!(res.max_residual < 1e-9);
        for (x, y) in &res.witness {
            prop_assert!((1.0 - p * x * x - r * y * y).abs() < 1e-9);
        }
        prop_assert_eq!(res.derivative_bound.neutrix(), Neutrix::OSLASH);
        let centre = res.derivative_bound.rep().standard_part().unwrap();
        // inside the oslash class at eps = 1e-12 with guard band 1/4
        prop_assert!((res.slope - centre).abs() < 1e-3, "slope {} vs {}", res.slope, res.derivative_bound);
        prop_assert!((res.slope + p * x0 / (r * y0)).abs() < 1e-6);
    }

    #[test]
    fn multiplier_choice_does_not_matter(
        u in positive(),
        v in positive(),
        angle in prop::sample::select(vec![1.0f64, 2.0, 3.0]),
    ) {
        // F = -(1 + eps oslash) u x - (1 + eps pounds) v y^2 + oslash on the unit circle
        let theta = std::f64::consts::PI / (2.0 + 2.0 * angle);
        let (a, b) = (theta.cos(), theta.sin());
        let fx = Expr::mul(Expr::en(ExternalNumber::new(AsymptoticReal::constant(-u), Neutrix::oslash(exp(1)))), Expr::x());
        let fy = Expr::mul(
            Expr::en(ExternalNumber::new(AsymptoticReal::constant(-v), Neutrix::pounds(exp(1)))),
            Expr::pow(Expr::y(), 2),
        );
        let f = Expr::add(Expr::add(fx, fy), Expr::neutrix(Neutrix::OSLASH));
        let g = Expr::sub(Expr::sub(Expr::c(1.0), Expr::pow(Expr::x(), 2)), Expr::pow(Expr::y(), 2));
        let res = lagrange_solve(
            &f,
            &g,
            (&AsymptoticReal::constant(a), &AsymptoticReal::constant(b)),
            Neutrix::OSLASH,
            Neutrix::OSLASH,
        )
        .unwrap();
        let dfy = &res.partials[1];
        let gy = ExternalNumber::real(res.constraint_partials[1]);
        let quotient = dfy.div(&gy).unwrap();
        for shift in [exp_frac(1, 2), exp(1), exp(3)] {
            let other = AsymptoticReal::constant(res.lambda).add(&AsymptoticReal::monomial(1.0, shift));
            prop_assume!(quotient.contains_real(&other));
            let residual = dfy.sub(&gy.mul(&ExternalNumber::precise(other)));
            prop_assert_eq!(&residual, &res.residual_y);
            prop_assert_eq!(residual.neutrix(), dfy.neutrix());
        }
    }
}
