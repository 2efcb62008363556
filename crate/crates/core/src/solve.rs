//! Finite-difference solves: the linear Dirichlet problem, monotone
//! iteration between ordered sub- and supersolutions, and exponent lifting.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{normalize, Problem};
use crate::piecewise::PiecewiseFunction;

/// Uniform grid with `n` interior nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub alpha: f64,
    pub beta: f64,
    pub n: usize,
    pub h: f64,
}

impl Grid {
    /// Refines `n` until `h ||b||_inf / 2 < 1`.
    pub fn new(problem: &Problem, n: usize) -> Self {
        let bsup = problem.b.sup_abs();
        let mut n = n.max(3);
        loop {
            let h = (problem.beta - problem.alpha) / (n + 1) as f64;
            if h * bsup / 2.0 < 1.0 {
                return Self { alpha: problem.alpha, beta: problem.beta, n, h };
            }
            n = 2 * n + 1;
        }
    }

    /// Node `i` for `i = 0..=n+1`; the ends are the boundary.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n + 1 {
            self.beta
        } else {
            self.alpha + self.h * i as f64
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n + 1).map(|i| self.node(i)).collect()
    }

    pub fn interior(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.node(i)).collect()
    }

    /// Interior samples of a function.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (1..=self.n).map(|i| f(self.node(i))).collect()
    }
}

/// Central-difference discretization of `-u'' + b u' + c u` with zero
/// Dirichlet data, stored row by row for the interior nodes.
#[derive(Clone, Debug)]
pub struct Operator {
    pub grid: Grid,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Weight at the interior nodes.
    pub m: Vec<f64>,
    pub p: f64,
}

impl Operator {
    /// The problem must have unit leading coefficient.
    pub fn new(problem: &Problem, grid: Grid) -> Self {
        debug_assert!(problem.has_unit_leading());
        let h2 = grid.h * grid.h;
        let mut lower = Vec::with_capacity(grid.n);
        let mut diag = Vec::with_capacity(grid.n);
        let mut upper = Vec::with_capacity(grid.n);
        let mut m = Vec::with_capacity(grid.n);
        for i in 1..=grid.n {
            let x = grid.node(i);
            let b = problem.b.eval(x);
            lower.push(-1.0 / h2 - b / (2.0 * grid.h));
            diag.push(2.0 / h2 + problem.c.eval(x));
            upper.push(-1.0 / h2 + b / (2.0 * grid.h));
            m.push(problem.m.eval(x));
        }
        Self { grid, lower, diag, upper, m, p: problem.p }
    }

    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// `(A u)_i` for interior values `u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.lower[i] * u[i - 1] } else { 0.0 };
                let r = if i + 1 < n { self.upper[i] * u[i + 1] } else { 0.0 };
                l + self.diag[i] * u[i] + r
            })
            .collect()
    }

    /// Solves `(A + diag(shift)) u = rhs` by tridiagonal elimination.
    pub fn solve(&self, rhs: &[f64], shift: Option<&[f64]>) -> Result<Vec<f64>> {
        let d: Vec<f64> = match shift {
            Some(s) => self.diag.iter().zip(s).map(|(d, s)| d + s).collect(),
            None => self.diag.clone(),
        };
        thomas(&self.lower, &d, &self.upper, rhs)
    }

    /// `A u - scale * m u^p` at each interior node, with `0^p = 0`.
    pub fn residual(&self, u: &[f64], scale: f64) -> Vec<f64> {
        let au = self.apply(u);
        au.iter().zip(u).zip(&self.m).map(|((a, &v), m)| a - scale * m * pow0(v, self.p)).collect()
    }
}

pub(crate) fn pow0(v: f64, p: f64) -> f64 {
    if v > 0.0 {
        v.powf(p)
    } else {
        0.0
    }
}

/// Thomas algorithm for `lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1]`.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(Error::Singular(0));
    }
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(i));
        }
        c[i] = upper[i] / beta;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

fn unit(problem: &Problem) -> Result<Problem> {
    if problem.has_unit_leading() {
        Ok(problem.clone())
    } else {
        normalize(problem)
    }
}

/// Solves `-u'' + b u' + c u = rhs`, `u = 0` at both ends; returns the
/// interior values.
pub fn solve_linear(problem: &Problem, grid: Grid, rhs: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    let problem = unit(problem)?;
    let op = Operator::new(&problem, grid);
    op.solve(&grid.sample(rhs), None)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SolveOptions {
    pub n: usize,
    /// Stop the monotone phase once the sup-change drops below this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Accepted dip below the previous iterate, relative to the upper bound.
    /// The sampled subsolution is a discrete subsolution only up to the
    /// truncation error.
    pub monotone_slack: f64,
    /// Newton polish after the monotone phase.
    pub newton: bool,
    pub residual_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { n: 2000, tol: 1e-10, max_iterations: 10_000, monotone_slack: 1e-5, newton: true, residual_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub grid: Grid,
    /// Values at all nodes including the boundary zeros.
    pub u: Vec<f64>,
    pub residual_inf: f64,
    /// `residual_inf <= residual_tol * max(1, sup u)`.
    pub converged: bool,
    pub residual_tol: f64,
    pub min_interior: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    /// Sup-change per monotone iteration.
    pub monotone_trace: Vec<f64>,
    /// Largest dip of an iterate below its predecessor.
    pub order_defect: f64,
    /// Scale applied to `m` in the solved equation.
    pub weight_scale: f64,
}

impl SolveResult {
    pub fn interior(&self) -> &[f64] {
        &self.u[1..self.u.len() - 1]
    }

    pub fn max(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.grid.nodes()
    }

    /// `s u` as a solution for the weight `weight_scale s^{1-p} m`; with
    /// `s = tau^{-1/(1-p)}` this undoes a weight scale `tau`.
    pub fn rescaled(&self, problem: &Problem, s: f64) -> Result<SolveResult> {
        let problem = unit(problem)?;
        let u: Vec<f64> = self.u.iter().map(|v| v * s).collect();
        let scale = self.weight_scale * s.powf(1.0 - problem.p);
        let op = Operator::new(&problem, self.grid);
        let r = op.residual(&u[1..u.len() - 1], scale);
        let residual_inf = sup(&r);
        Ok(SolveResult {
            residual_inf,
            converged: residual_inf <= self.residual_tol * sup(&u).max(1.0),
            min_interior: u[1..u.len() - 1].iter().copied().fold(f64::INFINITY, f64::min),
            u,
            weight_scale: scale,
            ..self.clone()
        })
    }

    /// Columns `x,u,Lu,rhs,residual`.
    pub fn write_csv(&self, problem: &Problem, w: &mut impl Write) -> Result<()> {
        let problem = unit(problem)?;
        let op = Operator::new(&problem, self.grid);
        let inner = self.interior();
        let lu = op.apply(inner);
        let io = |e: std::io::Error| Error::Config(e.to_string());
        writeln!(w, "x,u,Lu,rhs,residual").map_err(io)?;
        let nodes = self.nodes();
        for (i, &x) in nodes.iter().enumerate() {
            let (l, r) = if i == 0 || i == nodes.len() - 1 {
                (0.0, 0.0)
            } else {
                (lu[i - 1], self.weight_scale * op.m[i - 1] * pow0(inner[i - 1], problem.p))
            };
            writeln!(w, "{x:.12e},{:.12e},{l:.12e},{r:.12e},{:.12e}", self.u[i], l - r).map_err(io)?;
        }
        Ok(())
    }
}

/// Monotone iteration `(A + Lambda) u_{k+1} = tau m u_k^p + Lambda u_k`
/// started at the subsolution. `Lambda_i = p tau m^-(x_i) lower_i^{p-1}`
/// keeps `xi -> tau m xi^p + Lambda_i xi` nondecreasing above `lower_i`,
/// which every iterate dominates.
pub fn solve_sublinear(
    problem: &Problem,
    tau: f64,
    lower: &PiecewiseFunction,
    upper: &PiecewiseFunction,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let problem = unit(problem)?;
    let grid = Grid::new(&problem, opts.n);
    let lo = grid.sample(|x| lower.eval(x));
    let hi = grid.sample(|x| upper.eval(x));
    solve_between(&problem, grid, tau, lo, hi, opts)
}

/// Same iteration from sampled bounds.
pub fn solve_between(problem: &Problem, grid: Grid, tau: f64, lower: Vec<f64>, upper: Vec<f64>, opts: &SolveOptions) -> Result<SolveResult> {
    let problem = unit(problem)?;
    let p = problem.p;
    let op = Operator::new(&problem, grid);
    let weight: Vec<f64> = op.m.iter().map(|m| tau * m).collect();
    let shift: Vec<f64> = weight.iter().zip(&lower).map(|(&m, &l)| if m < 0.0 && l > 0.0 { -p * m * l.powf(p - 1.0) } else { 0.0 }).collect();
    let reaction = Reaction { f: &|v| pow0(v, p), df: &|v| p * v.powf(p - 1.0) };
    let mut r = iterate(&op, &weight, &reaction, &shift, lower, upper, opts)?;
    r.weight_scale = tau;
    Ok(r)
}

/// Nonlinearity `f` with derivative, entering as `weight(x) f(u)`.
pub struct Reaction<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub df: &'a dyn Fn(f64) -> f64,
}

/// Monotone iteration for `A u = w f(u)` between sampled bounds with the
/// given nodal shift, followed by an optional Newton polish.
pub fn iterate(
    op: &Operator,
    weight: &[f64],
    reaction: &Reaction,
    shift: &[f64],
    lower: Vec<f64>,
    upper: Vec<f64>,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let grid = op.grid;
    for (i, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
        if !(l > 0.0) {
            return Err(Error::Precondition(format!("subsolution not positive at x = {}", grid.node(i + 1))));
        }
        if l > u {
            return Err(Error::Precondition(format!("subsolution above supersolution at x = {}", grid.node(i + 1))));
        }
    }
    let residual = |u: &[f64]| -> Vec<f64> {
        let au = op.apply(u);
        au.iter().zip(u).zip(weight).map(|((a, &v), w)| a - w * (reaction.f)(v)).collect()
    };
    let mut u = lower;
    let mut trace = Vec::new();
    let mut defect: f64 = 0.0;
    let mut iterations = 0;
    let mut last = f64::INFINITY;
    while iterations < opts.max_iterations {
        let rhs: Vec<f64> = u.iter().zip(weight).zip(shift).map(|((&v, &w), &s)| w * (reaction.f)(v) + s * v).collect();
        let next = op.solve(&rhs, Some(shift))?;
        // iterates increase, so the current size is the natural scale
        let scale = sup(&u);
        let slack = opts.monotone_slack * scale;
        let mut change: f64 = 0.0;
        for (i, (&a, &b)) in next.iter().zip(&u).enumerate() {
            let dip = b - a;
            if dip > slack || a > upper[i] + slack {
                return Err(Error::EscapedOrderInterval { x: grid.node(i + 1) });
            }
            defect = defect.max(dip);
            change = change.max((a - b).abs());
        }
        iterations += 1;
        trace.push(change);
        u = next;
        last = change;
        if change < opts.tol {
            break;
        }
        // the Newton phase finishes what the monotone phase has bracketed
        if opts.newton && change < 1e-6 * scale.max(1e-300) {
            break;
        }
    }
    let mut newton_iterations = 0;
    if opts.newton {
        for _ in 0..50 {
            let r = residual(&u);
            let d: Vec<f64> = op.diag.iter().zip(&u).zip(weight).map(|((d, &v), w)| d - w * (reaction.df)(v)).collect();
            let step = thomas(&op.lower, &d, &op.upper, &r)?;
            let r0 = sup(&r);
            let mut t = 1.0;
            let mut trial: Vec<f64>;
            loop {
                trial = u.iter().zip(&step).map(|(v, s)| v - t * s).collect();
                if trial.iter().all(|&v| v > 0.0) && sup(&residual(&trial)) <= r0 {
                    break;
                }
                t *= 0.5;
                if t < 1e-6 {
                    trial = u.clone();
                    break;
                }
            }
            newton_iterations += 1;
            let moved = trial.iter().zip(&u).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            u = trial;
            if moved <= 1e-15 * sup(&u).max(1e-300) {
                break;
            }
        }
    } else if last >= opts.tol {
        return Err(Error::NotConverged { iterations, last_change: last });
    }
    let r = residual(&u);
    let residual_inf = sup(&r);
    let mut full = Vec::with_capacity(grid.n + 2);
    full.push(0.0);
    full.extend_from_slice(&u);
    full.push(0.0);
    Ok(SolveResult {
        grid,
        residual_inf,
        converged: residual_inf <= opts.residual_tol * sup(&u).max(1.0),
        residual_tol: opts.residual_tol,
        min_interior: u.iter().copied().fold(f64::INFINITY, f64::min),
        u: full,
        iterations,
        newton_iterations,
        monotone_trace: trace,
        order_defect: defect,
        weight_scale: 1.0,
    })
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Lifted {
    pub gamma: f64,
    pub q: f64,
    /// `u^gamma` at all nodes.
    pub w: Vec<f64>,
    /// Largest positive part of `A w - gamma m w^q`.
    pub max_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `u^gamma`, `gamma = (1-p)/(1-q)`, as a subsolution for exponent `q` and
/// weight `gamma m`, checked at every interior node.
pub fn lift_exponent(problem: &Problem, u: &SolveResult, q: f64) -> Result<Lifted> {
    let problem = unit(problem)?;
    let p = problem.p;
    if !(q > p && q < 1.0) {
        return Err(Error::Precondition(format!("lifting needs p < q < 1, got p = {p}, q = {q}")));
    }
    let gamma = (1.0 - p) / (1.0 - q);
    let w: Vec<f64> = u.u.iter().map(|&v| pow0(v, gamma)).collect();
    let op = Operator::new(&problem.with_p(q)?, u.grid);
    let scale = gamma * u.weight_scale;
    let r = op.residual(&w[1..w.len() - 1], scale);
    let max_violation = r.iter().fold(0.0f64, |a, &v| a.max(v));
    let msup = op.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tolerance = 1e-8 * (1.0 + scale * msup);
    Ok(Lifted { gamma, q, w, max_violation, tolerance, passed: max_violation <= tolerance })
}

/// Discrete subsolution defect `max (A v - tau m v^p)^+` of interior values.
pub fn discrete_defect(problem: &Problem, grid: Grid, tau: f64, v: &[f64]) -> Result<f64> {
    let problem = unit(problem)?;
    let op = Operator::new(&problem, grid);
    Ok(op.residual(v, tau).iter().fold(0.0f64, |a, &r| a.max(r)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;
    use std::f64::consts::PI;

    fn plain(m: Coefficient) -> Problem {
        Problem::simple(0.0, 1.0, 0.0, m, 0.5).unwrap()
    }

    #[test]
    fn quadratic_is_exact() {
        let p = plain(Coefficient::constant(0.0, 1.0, 1.0));
        let g = Grid::new(&p, 99);
        let u = solve_linear(&p, g, |_| 1.0).unwrap();
        for (i, v) in u.iter().enumerate() {
            let x = g.node(i + 1);
            assert!((v - x * (1.0 - x) / 2.0).abs() < 1e-13);
        }
        assert!(solve_linear(&p, g, |_| 0.0).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sine_rhs() {
        let p = plain(Coefficient::constant(0.0, 1.0, 1.0));
        let g = Grid::new(&p, 2000);
        let u = solve_linear(&p, g, |x| PI * PI * (PI * x).sin()).unwrap();
        let err = u.iter().enumerate().fold(0.0f64, |a, (i, v)| a.max((v - (PI * g.node(i + 1)).sin()).abs()));
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn grid_refines_for_drift() {
        let p = Problem::with_unit_leading(
            0.0,
            1.0,
            Coefficient::constant(0.0, 1.0, 500.0),
            Coefficient::zero(0.0, 1.0),
            Coefficient::constant(0.0, 1.0, 1.0),
            0.5,
        )
        .unwrap();
        let g = Grid::new(&p, 100);
        assert!(g.h * 500.0 / 2.0 < 1.0);
    }

    #[test]
    fn positive_weight_iteration() {
        // -u'' = u^{1/2}: start from a small multiple of sin, end at the unique positive solution
        let p = plain(Coefficient::constant(0.0, 1.0, 1.0));
        let g = Grid::new(&p, 400);
        let lower = g.sample(|x| 1e-3 * (PI * x).sin());
        let upper = g.sample(|x| 1.0 + x * (1.0 - x));
        let r = solve_between(&p, g, 1.0, lower, upper, &SolveOptions::default()).unwrap();
        assert!(r.residual_inf < 1e-9, "{}", r.residual_inf);
        assert!(r.min_interior > 0.0);
        assert!(r.monotone_trace.len() > 1);
        // bound from the a priori integral: (1/2)^2
        assert!(r.max() <= 0.25);
    }

    #[test]
    fn zero_lower_rejected() {
        let p = plain(Coefficient::constant(0.0, 1.0, 1.0));
        let g = Grid::new(&p, 50);
        let e = solve_between(&p, g, 1.0, vec![0.0; 50], vec![1.0; 50], &SolveOptions::default());
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn lifting_gamma() {
        let p = plain(Coefficient::constant(0.0, 1.0, 1.0));
        let g = Grid::new(&p, 400);
        let r = solve_between(&p, g, 1.0, g.sample(|x| 1e-3 * (PI * x).sin()), g.sample(|_| 1.0), &SolveOptions::default()).unwrap();
        let l = lift_exponent(&p, &r, 0.75).unwrap();
        assert_eq!(l.gamma, 2.0);
        assert!(l.passed, "{} > {}", l.max_violation, l.tolerance);
        assert!((l.w[7] - r.u[7] * r.u[7]).abs() < 1e-16);
        assert!(lift_exponent(&p, &r, 0.5).is_err());
    }
}
