//! Positive solutions of `L u = m f(u)` for nonlinearities squeezed between
//! multiples of `u^p` near zero and growing at most like `u^q` at infinity.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::Analysis;
use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::model::Problem;
use crate::pipeline::solve_analysis;
use crate::solve::{iterate, pow0, Grid, Operator, Reaction, SolveOptions, SolveResult};

/// Sample count for the envelope checks.
pub const ENVELOPE_SAMPLES: usize = 1000;

#[derive(Clone)]
pub struct NonlinearitySpec {
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// `k1 xi^p <= f(xi) <= k2 xi^p` on `[0, K_under]`.
    pub k1: f64,
    pub k2: f64,
    /// `f(xi) <= k3 xi^q` for `xi >= K_over`.
    pub k3: f64,
    pub q: f64,
    pub k_over: f64,
}

impl fmt::Debug for NonlinearitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearitySpec")
            .field("k1", &self.k1)
            .field("k2", &self.k2)
            .field("k3", &self.k3)
            .field("q", &self.q)
            .field("k_over", &self.k_over)
            .finish()
    }
}

impl NonlinearitySpec {
    /// `K_under = (k1 J^+)^{1/(1-p)}`.
    pub fn k_under(&self, p: f64, j_plus: f64) -> f64 {
        (self.k1 * j_plus).max(0.0).powf(1.0 / (1.0 - p))
    }

    /// Sampled check of both envelopes; returns `K_under`.
    pub fn check(&self, p: f64, j_plus: f64) -> Result<f64> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::Nonlinearity { xi: f64::NAN, what: format!("q = {} outside (0, 1)", self.q) });
        }
        if !(self.k1 > 0.0 && self.k2 >= self.k1 && self.k3 > 0.0 && self.k_over > 0.0) {
            return Err(Error::Nonlinearity { xi: f64::NAN, what: "constants must satisfy 0 < k1 <= k2, k3 > 0, K_over > 0".into() });
        }
        let ku = self.k_under(p, j_plus);
        let n = ENVELOPE_SAMPLES;
        for i in 0..=n {
            let xi = ku * i as f64 / n as f64;
            let (fx, xp) = ((self.f)(xi), pow0(xi, p));
            let tol = 1e-14 * xp;
            if fx < self.k1 * xp - tol {
                return Err(Error::Nonlinearity { xi, what: format!("f = {fx} below k1 xi^p = {}", self.k1 * xp) });
            }
            if fx > self.k2 * xp + tol {
                return Err(Error::Nonlinearity { xi, what: format!("f = {fx} above k2 xi^p = {}", self.k2 * xp) });
            }
        }
        for i in 0..=n {
            let xi = self.k_over * (1.0 + 9.0 * i as f64 / n as f64);
            let (fx, bound) = ((self.f)(xi), self.k3 * xi.powf(self.q));
            if fx > bound * (1.0 + 1e-14) {
                return Err(Error::Nonlinearity { xi, what: format!("f = {fx} above k3 xi^q = {bound}") });
            }
        }
        Ok(ku)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralResult {
    pub k_under: f64,
    pub k_super: f64,
    pub phi_sup: f64,
    /// Solution of `L u = (k1 m^+ - k2 m^-) u^p`, the subsolution.
    pub lower: SolveResult,
    pub solution: SolveResult,
}

fn dfdx(f: &(dyn Fn(f64) -> f64 + Send + Sync), x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1e-12);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Solves `L u = m f(u)` with the solution for the weight
/// `k1 m^+ - k2 m^-` as subsolution and `k (phi + 1)`, `L phi = m^+`, as
/// supersolution.
pub fn solve_general_f(problem: &Problem, spec: &NonlinearitySpec, opts: &SolveOptions) -> Result<GeneralResult> {
    let an = Analysis::with_defaults(problem)?;
    let pr = &an.problem;
    let p = pr.p;
    let k_under = spec.check(p, an.j_plus.value)?;

    let m_mod = Coefficient::lin_comb(spec.k1, &an.decomp.m_plus, -spec.k2, &an.decomp.m_minus)?;
    let modified = Analysis::new(&pr.with_weight(m_mod), an.options)?;
    let lower = solve_analysis(&modified, opts)?.solution;
    if lower.max() > k_under * (1.0 + 1e-6) {
        return Err(Error::Precondition(format!("subsolution exceeds K_under = {k_under}")));
    }

    let grid = Grid::new(pr, opts.n);
    assert_eq!(grid, lower.grid);
    let mp = an.decomp.m_plus.clone();
    let phi = crate::solve::solve_linear(pr, grid, |x| mp.eval(x))?;
    let phi_sup = phi.iter().copied().fold(0.0, f64::max);
    let q = spec.q;
    let k_super = spec.k_over.max((spec.k3 * (phi_sup + 1.0).powf(q)).powf(1.0 / (1.0 - q))).max(k_under);
    let upper: Vec<f64> = phi.iter().map(|v| k_super * (v + 1.0)).collect();
    let top = k_super * (phi_sup + 1.0);

    let op = Operator::new(pr, grid);
    let lo = lower.interior().to_vec();
    let f = spec.f.clone();
    // sampled Lipschitz bound of xi -> m f(xi) on [lower_i, top]
    let samples = 256;
    let shift: Vec<f64> = op
        .m
        .iter()
        .zip(&lo)
        .map(|(&m, &l)| {
            if m == 0.0 {
                return 0.0;
            }
            let ratio = (top / l).powf(1.0 / samples as f64);
            let mut worst: f64 = 0.0;
            let mut x0 = l;
            let mut f0 = f(x0);
            for _ in 0..samples {
                let x1 = x0 * ratio;
                let f1 = f(x1);
                let slope = (f1 - f0) / (x1 - x0);
                worst = worst.max(-m * slope).max(-m * dfdx(&*f, x0));
                x0 = x1;
                f0 = f1;
            }
            1.25 * worst
        })
        .collect();
    let ff = |v: f64| f(v);
    let df = |v: f64| dfdx(&*f, v);
    let reaction = Reaction { f: &ff, df: &df };
    let solution = iterate(&op, &op.m, &reaction, &shift, lo, upper, opts)?;
    Ok(GeneralResult { k_under, k_super, phi_sup, lower, solution })
}

/// `f(xi) = xi^{1/2} (1 + sin(10 xi) / 2)` with envelope constants valid on
/// `[0, 0.01]`, that is for `J^+ <= 0.1`.
pub fn oscillating_example() -> NonlinearitySpec {
    NonlinearitySpec {
        f: Arc::new(|x: f64| pow0(x, 0.5) * (1.0 + 0.5 * (10.0 * x).sin())),
        k1: 1.0,
        k2: 1.05,
        k3: 1.5,
        q: 0.5,
        k_over: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::{positive_problem, step_problem};

    #[test]
    fn envelope_example() {
        let pr = positive_problem(0.5).unwrap();
        let spec = NonlinearitySpec { f: Arc::new(|x: f64| pow0(x, 0.5)), k1: 1.0, k2: 1.0, k3: 1.0, q: 0.5, k_over: 1.0 };
        let an = Analysis::with_defaults(&pr).unwrap();
        assert!((spec.check(0.5, an.j_plus.value).unwrap() - 0.25).abs() < 1e-9);
        let bad = NonlinearitySpec { k1: 1.1, ..spec.clone() };
        assert!(matches!(bad.check(0.5, 0.5), Err(Error::Nonlinearity { .. })));
    }

    #[test]
    fn pure_power_reduces_to_sublinear() {
        let pr = step_problem(0.1, 1.0, 0.5).unwrap();
        let spec = NonlinearitySpec { f: Arc::new(|x: f64| pow0(x, 0.5)), k1: 1.0, k2: 1.0, k3: 1.0, q: 0.5, k_over: 1.0 };
        let r = solve_general_f(&pr, &spec, &SolveOptions::default()).unwrap();
        let diff = r.solution.u.iter().zip(&r.lower.u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(diff < 1e-9, "{diff}");
    }

    #[test]
    fn oscillating_nonlinearity() {
        let pr = step_problem(0.05, 1.0, 0.5).unwrap();
        let r = solve_general_f(&pr, &oscillating_example(), &SolveOptions::default()).unwrap();
        assert!(r.solution.residual_inf <= 1e-6, "{}", r.solution.residual_inf);
        assert!(r.solution.min_interior > 0.0);
        assert!(r.solution.converged);
    }
}
