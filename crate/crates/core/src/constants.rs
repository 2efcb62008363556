//! Scalar quantities entering the existence and nonexistence conditions.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factors::{weighted_cumulative, CumulativeFactor, CumulativeTable, DEFAULT_TABLE_NODES};
use crate::model::{normalize, Interval, Problem};
use crate::quadrature::{integrate, Quadrature};
use crate::weight::{decompose_weight, WeightDecomposition};

/// Default absolute tolerance for condition-grade integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// `C_p = 2(1+p)/(1-p)^2`.
pub fn cp(p: f64) -> f64 {
    2.0 * (1.0 + p) / ((1.0 - p) * (1.0 - p))
}

/// Shared cumulative tables for one normalized problem. Everything here is
/// independent of the exponent `p`.
#[derive(Clone, Debug)]
pub struct Tables {
    pub factor: CumulativeFactor,
    /// `int_alpha^x Bbar`.
    pub int_bbar: CumulativeTable,
    /// `int_alpha^x m^+ Bunder`.
    pub plus: CumulativeTable,
    /// `int_alpha^x m^- Bunder`.
    pub minus: CumulativeTable,
    /// Union of the breakpoints of `b`, `c` and `m^±`.
    pub breaks: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
}

impl Tables {
    pub fn new(problem: &Problem, decomp: &WeightDecomposition, n: usize) -> Self {
        let (alpha, beta) = (problem.alpha, problem.beta);
        let factor = CumulativeFactor::build(&problem.b, n);
        let mut breaks = problem.b.interior_breakpoints();
        breaks.extend(problem.c.interior_breakpoints());
        breaks.extend(decomp.m_plus.interior_breakpoints());
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breaks.dedup();
        let int_bbar = CumulativeTable::build(alpha, beta, &breaks, n, factor.bbar_field());
        let plus = weighted_cumulative(&decomp.m_plus, &factor, &breaks, n);
        let minus = weighted_cumulative(&decomp.m_minus, &factor, &breaks, n);
        Self { factor, int_bbar, plus, minus, breaks, alpha, beta }
    }

    pub fn bbar(&self, x: f64) -> f64 {
        self.factor.bbar(x)
    }

    fn outer(&self, lo: f64, hi: f64, inner: impl Fn(f64) -> f64, tol: f64) -> Result<Quadrature> {
        let bbar = self.factor.bbar_field();
        integrate(|x| bbar(x) * inner(x), lo, hi, &self.breaks, tol)
    }

    /// `J^+ = int_alpha^beta Bbar(x) ||m^+ Bunder||_{L^1(alpha,x)} dx`.
    pub fn apriori_integral(&self, tol: f64) -> Result<Quadrature> {
        let mut q = self.outer(self.alpha, self.beta, |x| self.plus.eval(x), tol)?;
        q.error += self.plus.quad_error() * self.int_bbar.total();
        Ok(q)
    }

    /// The two windowed nested integrals of `m^- Bunder` and their maximum.
    pub fn script_m(&self, interval: Interval, tol: f64) -> Result<(f64, f64)> {
        let total = self.minus.total();
        let right = self.outer(interval.lo, self.beta, |x| total - self.minus.eval(x), tol)?;
        let left = self.outer(self.alpha, interval.hi, |x| self.minus.eval(x), tol)?;
        let err = right.error.max(left.error) + self.minus.quad_error() * self.int_bbar.total();
        Ok((right.value.max(left.value), err))
    }

    /// `K_b = int_alpha^beta Bbar(x) ||Bunder||_{L^2(alpha,x)} dx`.
    pub fn k_b(&self, tol: f64) -> Result<Quadrature> {
        let n = self.int_bbar.nodes().len() - 1;
        let bunder = self.factor.bunder_field();
        let sq = CumulativeTable::build(self.alpha, self.beta, &self.breaks, n, Arc::new(move |x| bunder(x).powi(2)));
        let mut q = self.outer(self.alpha, self.beta, |x| sq.eval(x).sqrt(), tol)?;
        q.error += sq.quad_error();
        Ok(q)
    }

    /// `gamma_b = max(||Bbar||_{L^1(alpha,x1)}, ||Bbar||_{L^1(x0,beta)})`.
    pub fn gamma_b(&self, interval: Interval) -> f64 {
        let left = self.int_bbar.eval(interval.hi);
        let right = self.int_bbar.total() - self.int_bbar.eval(interval.lo);
        left.max(right)
    }

    pub fn bunder_sup(&self) -> f64 {
        self.factor.bunder_sup(self.alpha, self.beta)
    }
}

/// `gamma = max(beta - x0, x1 - alpha)`.
pub fn gamma(problem: &Problem, interval: Interval) -> f64 {
    (problem.beta - interval.lo).max(interval.hi - problem.alpha)
}

/// `sup_{M^+} m^+/c`, or `None` unless `c > 0` on all of `M^+`.
pub fn sup_plus_over_c(problem: &Problem, decomp: &WeightDecomposition) -> Option<f64> {
    if !decomp.positive_on_plus(&problem.c) {
        return None;
    }
    let mut best: f64 = 0.0;
    for iv in &decomp.plus_region {
        for piece in decomp.m_plus.pieces() {
            let a = piece.lo.max(iv.lo);
            let b = piece.hi.min(iv.hi);
            if b <= a {
                continue;
            }
            let mid = 0.5 * (a + b);
            let cpiece = &problem.c.pieces()[problem.c.piece_index(mid, crate::coefficient::Side::Right)];
            // pieces of c may split this window further
            let mut cuts = vec![a];
            cuts.extend(problem.c.interior_breakpoints().into_iter().filter(|&x| x > a && x < b));
            cuts.push(b);
            for w in cuts.windows(2) {
                let cm = &problem.c.pieces()[problem.c.piece_index(0.5 * (w[0] + w[1]), crate::coefficient::Side::Right)];
                let _ = cpiece;
                let (_, v) = crate::numeric::maximize_on(|x| piece.form.eval(x).max(0.0) / cm.form.eval(x), w[0], w[1], 256);
                best = best.max(v);
            }
        }
    }
    Some(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivedConstants {
    pub cp: f64,
    pub j_plus: f64,
    pub j_plus_error: f64,
    pub gamma: f64,
    pub gamma_b: f64,
    pub script_m: f64,
    pub script_m_error: f64,
    pub k_b: f64,
    pub k_b_error: f64,
    pub problem_hash: u64,
}

pub fn derived_constants_with(problem: &Problem, tables: &Tables, interval: Interval, tol: f64) -> Result<DerivedConstants> {
    if !(problem.p > 0.0 && problem.p < 1.0) {
        return Err(Error::ExponentOutOfRange(problem.p));
    }
    let j = tables.apriori_integral(tol)?;
    let (sm, sm_err) = tables.script_m(interval, tol)?;
    let kb = tables.k_b(tol)?;
    Ok(DerivedConstants {
        cp: cp(problem.p),
        j_plus: j.value,
        j_plus_error: j.error,
        gamma: gamma(problem, interval),
        gamma_b: tables.gamma_b(interval),
        script_m: sm,
        script_m_error: sm_err,
        k_b: kb.value,
        k_b_error: kb.error,
        problem_hash: problem.fingerprint(),
    })
}

pub fn derived_constants(problem: &Problem, interval: Interval) -> Result<DerivedConstants> {
    let problem = normalize(problem)?;
    let decomp = decompose_weight(&problem.m);
    let tables = Tables::new(&problem, &decomp, DEFAULT_TABLE_NODES);
    derived_constants_with(&problem, &tables, interval, DEFAULT_QUAD_TOL)
}

/// `J^+` for a problem, normalizing first.
pub fn apriori_integral(problem: &Problem) -> Result<Quadrature> {
    let problem = normalize(problem)?;
    let decomp = decompose_weight(&problem.m);
    Tables::new(&problem, &decomp, DEFAULT_TABLE_NODES).apriori_integral(DEFAULT_QUAD_TOL)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AprioriBound {
    /// `(J^+)^{1/(1-p)}`.
    pub integral_bound: f64,
    /// `(sup_{M^+} m^+/c)^{1/(1-p)}` when `c > 0` on `M^+`.
    pub ratio_bound: Option<f64>,
    pub bound: f64,
}

pub fn apriori_bound_from(p: f64, j_plus: f64, sup_ratio: Option<f64>) -> AprioriBound {
    let e = 1.0 / (1.0 - p);
    let integral_bound = j_plus.max(0.0).powf(e);
    let ratio_bound = sup_ratio.map(|r| r.powf(e));
    let bound = ratio_bound.map_or(integral_bound, |r| r.min(integral_bound));
    AprioriBound { integral_bound, ratio_bound, bound }
}

/// Sup-norm ceiling for every nonnegative subsolution.
pub fn apriori_bound(problem: &Problem) -> Result<AprioriBound> {
    let problem = normalize(problem)?;
    let decomp = decompose_weight(&problem.m);
    let j = Tables::new(&problem, &decomp, DEFAULT_TABLE_NODES).apriori_integral(DEFAULT_QUAD_TOL)?;
    Ok(apriori_bound_from(problem.p, j.value, sup_plus_over_c(&problem, &decomp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;

    fn step_problem(eta: f64, c: f64, p: f64) -> Problem {
        Problem::simple(0.0, 1.0, c, Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-eta, 1.0, -eta]).unwrap(), p).unwrap()
    }

    #[test]
    fn cp_values() {
        assert_eq!(cp(0.5), 12.0);
        assert_eq!(cp(0.0), 2.0);
        assert!((cp(0.3) - 2.6 / 0.49).abs() < 1e-14);
    }

    #[test]
    fn apriori_integral_examples() {
        let p = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, 1.0), 0.5).unwrap();
        assert!((apriori_integral(&p).unwrap().value - 0.5).abs() < 1e-10);
        let q = apriori_integral(&step_problem(1.0, 0.0, 0.5)).unwrap();
        assert!((q.value - 0.1).abs() < 1e-10);
        let n = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, -1.0), 0.5).unwrap();
        assert_eq!(apriori_integral(&n).unwrap().value, 0.0);
    }

    #[test]
    fn script_m_and_k_b() {
        let d = derived_constants(&step_problem(1.0, 0.0, 0.5), Interval::new(0.4, 0.6)).unwrap();
        assert!((d.script_m - 0.16).abs() < 1e-10);
        assert!((d.k_b - 2.0 / 3.0).abs() < 1e-9);
        assert!((d.gamma - 0.6).abs() < 1e-15);
        assert!((d.gamma_b - 0.6).abs() < 1e-12);
        assert_eq!(d.cp, 12.0);
    }

    #[test]
    fn bounds() {
        let p = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, 1.0), 0.5).unwrap();
        let b = apriori_bound(&p).unwrap();
        assert!((b.bound - 0.25).abs() < 1e-10);
        assert!(b.ratio_bound.is_none());

        let m = Coefficient::step(&[0.0, 0.5, 1.0], &[2.0, 1.0]).unwrap();
        let q = Problem::simple(0.0, 1.0, 1.0, m, 0.5).unwrap();
        let b = apriori_bound(&q).unwrap();
        assert!((b.ratio_bound.unwrap() - 4.0).abs() < 1e-12);
        assert!(b.bound <= 4.0);

        let n = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, -1.0), 0.5).unwrap();
        assert_eq!(apriori_bound(&n).unwrap().bound, 0.0);
    }
}
