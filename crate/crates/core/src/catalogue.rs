//! Reference problems used by the tests, the shipped configs and the
//! acceptance suite.

use std::f64::consts::PI;

use crate::coefficient::Coefficient;
use crate::error::Result;
use crate::model::Problem;

/// `m = 1` on `(0.4, 0.6)` and `-eta` elsewhere on `(0, 1)`, `b = 0`.
pub fn step_weight(eta: f64) -> Coefficient {
    Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-eta, 1.0, -eta]).expect("valid breakpoints")
}

pub fn step_problem(eta: f64, c: f64, p: f64) -> Result<Problem> {
    Problem::simple(0.0, 1.0, c, step_weight(eta), p)
}

/// Step weight with constant drift `b` and `c = 0`.
pub fn drift_problem(b: f64, eta: f64, p: f64) -> Result<Problem> {
    Problem::with_unit_leading(0.0, 1.0, Coefficient::constant(0.0, 1.0, b), Coefficient::zero(0.0, 1.0), step_weight(eta), p)
}

/// `u*(x) = sin(pi x) (1 + cos(pi x) / 2)`.
pub fn manufactured_solution(x: f64) -> f64 {
    (PI * x).sin() * (1.0 + 0.5 * (PI * x).cos())
}

/// Weight for which `u*` solves `-u'' = m u^{1/2}` on `(0, 1)`; it changes
/// sign at `x = 2/3`.
pub fn manufactured_weight() -> Coefficient {
    Coefficient::from_fn(0.0, 1.0, |x| {
        let u = manufactured_solution(x);
        if u <= 0.0 {
            // the limit at both ends is zero
            return 0.0;
        }
        PI * PI * (PI * x).sin() * (1.0 + 2.0 * (PI * x).cos()) / u.sqrt()
    })
    .expect("valid domain")
}

pub fn manufactured_problem() -> Result<Problem> {
    Problem::simple(0.0, 1.0, 0.0, manufactured_weight(), 0.5)
}

/// `m = -1` on `(0, 1)`.
pub fn negative_problem(p: f64) -> Result<Problem> {
    Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, -1.0), p)
}

/// `m = 1` on `(0, 1)`.
pub fn positive_problem(p: f64) -> Result<Problem> {
    Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, 1.0), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Analysis;
    use crate::certify::certify_analysis;

    #[test]
    fn manufactured_weight_sign() {
        let m = manufactured_weight();
        assert!(m.eval(0.5) > 0.0 && m.eval(0.8) < 0.0);
        assert!(m.eval(2.0 / 3.0).abs() < 1e-12);
        let an = Analysis::with_defaults(&manufactured_problem().unwrap()).unwrap();
        assert_eq!(an.candidates.len(), 1);
        assert!((an.candidates[0].interval.hi - 2.0 / 3.0).abs() < 1e-12);
        let c = certify_analysis(&an);
        assert_eq!(c.verdict, crate::certify::Verdict::Exists);
    }

    #[test]
    fn manufactured_recovery() {
        let pr = manufactured_problem().unwrap();
        let err = |n: usize| {
            let r = crate::pipeline::solve_problem(&pr, &crate::solve::SolveOptions { n, ..Default::default() }).unwrap();
            r.solution.nodes().iter().zip(&r.solution.u).fold(0.0f64, |a, (&x, &u)| a.max((u - manufactured_solution(x)).abs()))
        };
        let ratio = err(499) / err(999);
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }
}
