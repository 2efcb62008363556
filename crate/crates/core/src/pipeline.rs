//! Certificate to solution: construct the witness subsolution, pair it with
//! a supersolution, iterate, and undo the weight scale.

use serde::Serialize;

use crate::analysis::Analysis;
use crate::certify::{certify_analysis, Certificate, Verdict};
use crate::constants::apriori_bound_from;
use crate::construct::{build_supersolution, construct_subsolution, verify_function, SubsolutionSpec, SupersolutionSpec, Verification};
use crate::error::{Error, Result};
use crate::model::Problem;
use crate::solve::{solve_sublinear, SolveOptions, SolveResult};

#[derive(Clone, Debug, Serialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub max: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Solved {
    pub certificate: Certificate,
    pub subsolution: SubsolutionSpec,
    pub verification: Verification,
    /// Weight scale of the iterated problem.
    pub tau: f64,
    pub supersolution: SupersolutionSpec,
    /// Solution of `L u = tau m u^p`.
    pub scaled: SolveResult,
    /// Solution of the problem as given.
    pub solution: SolveResult,
    pub apriori: BoundCheck,
}

/// Relative slack in the a priori bound check.
pub const BOUND_SLACK: f64 = 1e-6;

pub fn solve_problem(problem: &Problem, opts: &SolveOptions) -> Result<Solved> {
    let an = Analysis::with_defaults(problem)?;
    solve_analysis(&an, opts)
}

pub fn solve_analysis(an: &Analysis, opts: &SolveOptions) -> Result<Solved> {
    let certificate = certify_analysis(an);
    if certificate.verdict != Verdict::Exists {
        return Err(Error::Precondition(format!("no existence certificate: {}", certificate.reason)));
    }
    let w = certificate.witness.clone().expect("exists carries a witness");
    let spec = construct_subsolution(an, &w)?;
    let mut verification = crate::construct::verify_subsolution(&spec);
    if !verification.passed {
        return Err(Error::Precondition(format!("constructed subsolution fails by {:e} at x = {}", verification.max_violation, verification.worst_x)));
    }
    let pr = &an.problem;
    let tau = if w.modified {
        // a subsolution of -u'' + b u' <= t (s m - c) u^p with u <= 1 and
        // t >= 1 is one of L u <= t s m u^p
        let (_, s) = an.modified_problem()?;
        let t = w.tau * s;
        verification = verify_function(pr, t, &spec.glued);
        if !verification.passed {
            return Err(Error::Precondition(format!("modified-weight subsolution fails for the original weight by {:e}", verification.max_violation)));
        }
        t
    } else {
        w.tau
    };
    let sup = build_supersolution(an, tau, opts.n, 1.0)?;
    let scaled = solve_sublinear(pr, tau, &spec.glued, &sup.function, opts)?;
    let p = pr.p;
    let s = tau.powf(-1.0 / (1.0 - p));
    let solution = scaled.rescaled(pr, s)?;
    let ab = apriori_bound_from(p, an.j_plus.value, an.sup_plus_over_c);
    let max = solution.max();
    let apriori = BoundCheck { bound: ab.bound, max, passed: max <= ab.bound * (1.0 + BOUND_SLACK) };
    Ok(Solved { certificate, subsolution: spec, verification, tau, supersolution: sup, scaled, solution, apriori })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;

    #[test]
    fn step_problem_end_to_end() {
        let pr = Problem::simple(0.0, 1.0, 1.0, Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-0.1, 1.0, -0.1]).unwrap(), 0.5).unwrap();
        let r = solve_problem(&pr, &SolveOptions::default()).unwrap();
        assert!(r.scaled.residual_inf <= 1e-6, "{}", r.scaled.residual_inf);
        assert!(r.solution.min_interior > 0.0);
        assert!(r.apriori.passed, "{:?}", r.apriori);
        assert!(r.scaled.order_defect <= 1e-5);
    }
}
