use proptest::prelude::*;

use sublinear::analysis::Analysis;
use sublinear::catalogue::step_problem;
use sublinear::certify::{certify_analysis, Verdict};
use sublinear::config::SweepAxis;
use sublinear::constants::cp;
use sublinear::eigen::{principal_eigenvalue, EigenOptions};
use sublinear::factors::CumulativeFactor;
use sublinear::solve::{Grid, Operator};
use sublinear::{decompose_weight, normalize, ClosedForm, Coefficient, Interval, Problem};

fn poly_coef(c: &[f64]) -> Coefficient {
    Coefficient::closed(0.0, 1.0, ClosedForm::polynomial(c).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cp_closed_form(p in 0.001f64..0.999) {
        let c = cp(p);
        prop_assert!(rel(c, 2.0 * (1.0 + p) / ((1.0 - p) * (1.0 - p))) < 1e-14);
        prop_assert!(c > 2.0);
    }

    #[test]
    fn sinh_square_dominates_cosh(x in 1e-3f64..10.0) {
        let s = (x / 2f64.sqrt()).sinh();
        prop_assert!(s * s > x.cosh() - 1.0);
    }

    #[test]
    fn integrating_factors_are_reciprocal(b0 in -5.0f64..5.0, b1 in -5.0f64..5.0, b2 in -5.0f64..5.0, x in 0.0f64..1.0) {
        let f = CumulativeFactor::build(&poly_coef(&[b0, b1, b2]), 1 << 12);
        prop_assert!((f.bbar(x) * f.bunder(x) - 1.0).abs() < 1e-12);
        let exact = b0 * x + b1 * x * x / 2.0 + b2 * x * x * x / 3.0;
        prop_assert!((f.bbar(x).ln() - exact).abs() < 1e-10);
    }

    #[test]
    fn weight_split_reconstructs(c0 in -2.0f64..2.0, c1 in -6.0f64..6.0, c2 in -6.0f64..6.0, x in 0.0f64..1.0) {
        let m = poly_coef(&[c0, c1, c2]);
        let d = decompose_weight(&m);
        let (mp, mm) = (d.m_plus.eval(x), d.m_minus.eval(x));
        prop_assert!(mp >= 0.0 && mm >= 0.0);
        prop_assert!(mp * mm == 0.0);
        prop_assert!((mp - mm - m.eval(x)).abs() < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent(a in 0.2f64..5.0, b in -3.0f64..3.0, c in 0.0f64..3.0, x in 0.0f64..1.0) {
        let pr = Problem::new(0.0, 1.0, Coefficient::constant(0.0, 1.0, a), Coefficient::constant(0.0, 1.0, b), Coefficient::constant(0.0, 1.0, c), poly_coef(&[-0.5, 2.0]), 0.5).unwrap();
        let n1 = normalize(&pr).unwrap();
        let n2 = normalize(&n1).unwrap();
        prop_assert!(n1.has_unit_leading());
        for (u, v, w) in [(&n1.b, &n2.b, b), (&n1.c, &n2.c, c)] {
            prop_assert_eq!(u.eval(x), v.eval(x));
            prop_assert!((u.eval(x) - w / a).abs() < 1e-13);
        }
        prop_assert!((n1.m.eval(x) - (2.0 * x - 0.5) / a).abs() < 1e-13);
    }

    #[test]
    fn lin_comb_is_linear(s in -3.0f64..3.0, t in -3.0f64..3.0, x in 0.0f64..1.0) {
        let f = Coefficient::step(&[0.0, 0.3, 1.0], &[1.0, -2.0]).unwrap();
        let g = poly_coef(&[0.5, 1.0, -1.0]);
        let h = Coefficient::lin_comb(s, &f, t, &g).unwrap();
        prop_assert!((h.eval(x) - (s * f.eval(x) + t * g.eval(x))).abs() < 1e-13);
    }

    #[test]
    fn tridiagonal_solve_inverts_apply(b in -4.0f64..4.0, c in 0.0f64..5.0, seed in 0u64..1000) {
        let pr = Problem::simple(0.0, 1.0, c, Coefficient::constant(0.0, 1.0, 1.0), 0.5).unwrap();
        let pr = Problem::with_unit_leading(0.0, 1.0, Coefficient::constant(0.0, 1.0, b), pr.c.clone(), pr.m.clone(), 0.5).unwrap();
        let op = Operator::new(&pr, Grid::new(&pr, 200));
        let rhs: Vec<f64> = (0..op.n()).map(|i| ((i as u64 * 2654435761 + seed) % 1000) as f64 / 500.0 - 1.0).collect();
        let u = op.solve(&rhs, None).unwrap();
        let back = op.apply(&u);
        let err = back.iter().zip(&rhs).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        prop_assert!(err < 1e-8, "{}", err);
    }

    #[test]
    fn sweep_values_hit_both_ends(lo in -10.0f64..10.0, span in 0.1f64..10.0, steps in 2usize..50) {
        let ax = SweepAxis::parse(&format!("p:{}:{}:{}", lo, lo + span, steps)).unwrap();
        let v = ax.values();
        prop_assert_eq!(v.len(), steps);
        prop_assert_eq!(v[0], lo);
        prop_assert!((v[steps - 1] - (lo + span)).abs() < 1e-12);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn eigenvalue_scales_inversely(eta in 0.0f64..2.0, tau in 0.1f64..10.0) {
        let pr = step_problem(eta, 1.0, 0.5).unwrap();
        let iv = Interval::new(0.4, 0.6);
        let opts = EigenOptions::default();
        let l = principal_eigenvalue(&pr, iv, &opts).unwrap().lambda1;
        let ls = principal_eigenvalue(&pr.scaled_weight(tau), iv, &opts).unwrap().lambda1;
        prop_assert!(rel(ls * tau, l) < 1e-8, "{} {}", ls * tau, l);
    }

    #[test]
    fn certify_verdict_scale_free(eta in 0.0f64..0.3, c in 0.0f64..2.0, p in 0.1f64..0.9, tau in 0.1f64..10.0) {
        let pr = step_problem(eta, c, p).unwrap();
        let v = certify_analysis(&Analysis::with_defaults(&pr).unwrap());
        let w = certify_analysis(&Analysis::with_defaults(&pr.scaled_weight(tau)).unwrap());
        prop_assert_eq!(v.verdict, w.verdict);
        for (a, b) in v.reports.iter().zip(&w.reports) {
            if a.decisively_holds() || a.decisively_fails() {
                prop_assert_eq!(a.holds, b.holds, "{:?}", a.name);
            }
        }
    }

    #[test]
    fn exists_certificates_yield_valid_subsolutions(eta in 0.0f64..0.12, p in 0.2f64..0.8) {
        let pr = step_problem(eta, 1.0, p).unwrap();
        let an = Analysis::with_defaults(&pr).unwrap();
        let cert = certify_analysis(&an);
        if cert.verdict == Verdict::Exists {
            let spec = sublinear::construct::construct_subsolution(&an, cert.witness.as_ref().unwrap()).unwrap();
            let ver = sublinear::construct::verify_subsolution(&spec);
            prop_assert!(ver.passed, "{:?}", ver);
        }
    }
}
