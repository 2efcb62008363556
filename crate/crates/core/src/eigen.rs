//! Principal eigenpair of `-u'' + b u' + c u = lambda m u` on a subinterval
//! with zero boundary values and `m >= 0` there.

use std::sync::Arc;

use serde::Serialize;

use crate::coefficient::Side;
use crate::error::{Error, Result};
use crate::factors::{CumulativeFactor, DEFAULT_TABLE_NODES};
use crate::model::{normalize, Interval, Problem};
use crate::piecewise::{PiecewiseFunction, QuinticSamples, Shape};
use crate::quadrature::gauss7;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenOptions {
    /// Interior nodes on the coarsest grid.
    pub n: usize,
    pub tol: f64,
    pub max_iterations: usize,
    /// Refinement stops once the coarsest grid exceeds this many nodes.
    pub max_n: usize,
    /// Integration steps used to rebuild the eigenfunction.
    pub shooting_steps: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { n: 2000, tol: 1e-8, max_iterations: 10_000, max_n: 64_000, shooting_steps: 8192 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenValue {
    pub lambda1: f64,
    pub error: f64,
    /// Coarsest grid of the extrapolation triple.
    pub n: usize,
    pub interval: Interval,
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub lambda1: f64,
    pub error: f64,
    pub n: usize,
    pub interval: Interval,
    /// Eigenfunction on `I`, positive inside, zero at the ends, sup norm one.
    pub u2: PiecewiseFunction,
}

/// Sorted breakpoints of the coefficients strictly inside `(lo, hi)`.
fn inner_breaks(problem: &Problem, lo: f64, hi: f64) -> Vec<f64> {
    let mut v: Vec<f64> = [&problem.b, &problem.c, &problem.m]
        .iter()
        .flat_map(|c| c.interior_breakpoints())
        .filter(|&x| x > lo && x < hi)
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v
}

/// `int_a^b f` with a Gauss rule on each break-free part.
fn split_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let start = breaks.partition_point(|&x| x <= a);
    let mut acc = 0.0;
    let mut left = a;
    for &x in &breaks[start..] {
        if x >= b {
            break;
        }
        acc += gauss7(f, left, x);
        left = x;
    }
    acc + gauss7(f, left, b)
}

struct Discretization {
    h: f64,
    /// `Bunder` at the half nodes `x_{i+1/2}`, `i = 0..N`.
    flux: Vec<f64>,
    /// Cell averages of `Bunder c` and `Bunder m` at interior nodes.
    react: Vec<f64>,
    mass: Vec<f64>,
}

impl Discretization {
    fn new(problem: &Problem, factor: &CumulativeFactor, iv: Interval, cells: usize, breaks: &[f64]) -> Self {
        let h = iv.len() / cells as f64;
        let x = |i: f64| iv.lo + i * h;
        let flux = (0..cells).map(|i| factor.bunder(x(i as f64 + 0.5))).collect();
        let mut react = Vec::with_capacity(cells - 1);
        let mut mass = Vec::with_capacity(cells - 1);
        let bc = |t: f64| factor.bunder(t) * problem.c.eval(t);
        let bm = |t: f64| factor.bunder(t) * problem.m.eval(t);
        for i in 1..cells {
            let (a, b) = (x(i as f64 - 0.5), x(i as f64 + 0.5));
            react.push(split_gauss(&bc, a, b, breaks) / h);
            mass.push(split_gauss(&bm, a, b, breaks) / h);
        }
        Self { h, flux, react, mass }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let h2 = self.h * self.h;
        let mut diag: Vec<f64> = (0..n).map(|i| (self.flux[i] + self.flux[i + 1]) / h2 + self.react[i]).collect();
        let off: Vec<f64> = (1..n).map(|i| -self.flux[i] / h2).collect();
        let mut y = rhs.to_vec();
        for i in 1..n {
            let w = off[i - 1] / diag[i - 1];
            diag[i] -= w * off[i - 1];
            y[i] -= w * y[i - 1];
        }
        y[n - 1] /= diag[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = (y[i] - off[i] * y[i + 1]) / diag[i];
        }
        y
    }

    /// Rayleigh quotient in energy form, which is free of cancellation.
    fn rayleigh(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let h2 = self.h * self.h;
        let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { u[i as usize] };
        let mut num = 0.0;
        for i in 0..=n {
            let d = at(i as isize) - at(i as isize - 1);
            num += self.flux[i] * d * d / h2;
        }
        let mut den = 0.0;
        for i in 0..n {
            num += self.react[i] * u[i] * u[i];
            den += self.mass[i] * u[i] * u[i];
        }
        num / den
    }

    fn residual(&self, u: &[f64], lambda: f64) -> f64 {
        let n = u.len();
        let h2 = self.h * self.h;
        let at = |i: isize| if i < 0 || i as usize >= n { 0.0 } else { u[i as usize] };
        let mut r: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let ii = i as isize;
            let au = (self.flux[i] * (u[i] - at(ii - 1)) - self.flux[i + 1] * (at(ii + 1) - u[i])) / h2 + self.react[i] * u[i];
            r = r.max((au - lambda * self.mass[i] * u[i]).abs());
            scale = scale.max((lambda * self.mass[i] * u[i]).abs());
        }
        r / scale.max(f64::MIN_POSITIVE)
    }
}

/// Smallest eigenvalue of the discrete pencil by inverse iteration.
fn discrete_lambda(d: &Discretization, max_iterations: usize) -> Result<f64> {
    let n = d.mass.len();
    if d.mass.iter().all(|&m| m <= 0.0) {
        return Err(Error::ZeroWeight(0.0, 0.0));
    }
    let mut u: Vec<f64> = (1..=n).map(|i| (std::f64::consts::PI * i as f64 / (n + 1) as f64).sin()).collect();
    let mut lambda = f64::INFINITY;
    let mut stalled = 0;
    for it in 0..max_iterations {
        let rhs: Vec<f64> = u.iter().zip(&d.mass).map(|(a, m)| a * m).collect();
        let mut v = d.solve(&rhs);
        let norm = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        v.iter_mut().for_each(|x| *x /= norm);
        let next = d.rayleigh(&v);
        u = v;
        let change = (next - lambda).abs();
        lambda = next;
        if change <= 1e-14 * lambda.abs() {
            stalled += 1;
            if stalled >= 2 && it >= 3 {
                return Ok(lambda);
            }
        } else {
            stalled = 0;
        }
    }
    Err(Error::EigenNotConverged { iterations: max_iterations, residual: d.residual(&u, lambda) })
}

fn check_weight(problem: &Problem, iv: Interval) -> Result<()> {
    let (mn, mx) = problem.m.min_max_on(iv.lo, iv.hi);
    if mn < -1e-12 * (1.0 + mx.abs()) {
        return Err(Error::Precondition(format!("weight is negative on ({}, {})", iv.lo, iv.hi)));
    }
    if mx <= 0.0 {
        return Err(Error::ZeroWeight(iv.lo, iv.hi));
    }
    Ok(())
}

/// `lambda_1(m, I)` for a problem with unit leading coefficient, using
/// three grids and two levels of Richardson extrapolation.
pub fn principal_eigenvalue_with(problem: &Problem, factor: &CumulativeFactor, iv: Interval, opts: &EigenOptions) -> Result<EigenValue> {
    check_weight(problem, iv)?;
    let breaks = inner_breaks(problem, iv.lo, iv.hi);
    let mut cells = opts.n + 1;
    let lam = |cells: usize| {
        discrete_lambda(&Discretization::new(problem, factor, iv, cells, &breaks), opts.max_iterations).map_err(|e| match e {
            Error::ZeroWeight(..) => Error::ZeroWeight(iv.lo, iv.hi),
            e => e,
        })
    };
    let mut l1 = lam(cells)?;
    let mut l2 = lam(2 * cells)?;
    loop {
        let l4 = lam(4 * cells)?;
        let r1 = (4.0 * l2 - l1) / 3.0;
        let r2 = (4.0 * l4 - l2) / 3.0;
        let error = (r2 - r1).abs();
        if error <= opts.tol || 2 * cells > opts.max_n {
            return Ok(EigenValue { lambda1: r2, error, n: cells - 1, interval: iv });
        }
        cells *= 2;
        l1 = l2;
        l2 = l4;
    }
}

const OUTPUT_STRIDE: usize = 8;

struct Trajectory {
    xs: Vec<f64>,
    us: Vec<f64>,
    dus: Vec<f64>,
    d2l: Vec<f64>,
    d2r: Vec<f64>,
}

fn rk4_trajectory(problem: &Problem, iv: Interval, edges: &[f64], lambda: f64, steps: usize) -> Trajectory {
    let rhs = |x: f64, side: Side, u: f64, du: f64| {
        problem.b.eval_side(x, side) * du + (problem.c.eval_side(x, side) - lambda * problem.m.eval_side(x, side)) * u
    };
    let mut t = Trajectory {
        xs: vec![iv.lo],
        us: vec![0.0],
        dus: vec![1.0],
        d2l: vec![0.0],
        d2r: vec![rhs(iv.lo, Side::Right, 0.0, 1.0)],
    };
    let (mut u, mut du) = (0.0, 1.0);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let cells = (((b - a) / iv.len()) * steps as f64).ceil().max(16.0) as usize;
        let h = (b - a) / cells as f64;
        // inside a segment the coefficients are smooth; use the segment's side at its ends
        let f = |x: f64, u: f64, du: f64| {
            let side = if x <= a { Side::Right } else { Side::Left };
            (du, rhs(x, side, u, du))
        };
        for j in 0..cells {
            let x = a + j as f64 * h;
            let xn = if j + 1 == cells { b } else { a + (j + 1) as f64 * h };
            let (k1u, k1d) = f(x, u, du);
            let (k2u, k2d) = f(x + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
            let (k3u, k3d) = f(x + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
            let (k4u, k4d) = f(xn, u + h * k3u, du + h * k3d);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
            // sparser output nodes keep the interpolated u'' clear of roundoff,
            // which the quintic amplifies by 1/h^2
            if (j + 1) % OUTPUT_STRIDE != 0 && j + 1 != cells {
                continue;
            }
            t.xs.push(xn);
            t.us.push(u);
            t.dus.push(du);
            t.d2l.push(rhs(xn, Side::Left, u, du));
            t.d2r.push(if j + 1 == cells && xn < iv.hi { rhs(xn, Side::Right, u, du) } else { rhs(xn, Side::Left, u, du) });
        }
    }
    t
}

/// Eigenfunction by RK4 shooting. The eigenvalue is first refined by a
/// secant iteration on the right-end value; what is left of the mismatch is
/// removed by a linear correction. Normalized to sup norm one.
pub fn shoot_eigenfunction(problem: &Problem, iv: Interval, lambda: f64, steps: usize) -> Result<PiecewiseFunction> {
    let breaks = inner_breaks(problem, iv.lo, iv.hi);
    let mut edges = vec![iv.lo];
    edges.extend(&breaks);
    edges.push(iv.hi);

    let miss = |l: f64| {
        let t = rk4_trajectory(problem, iv, &edges, l, steps);
        let scale = t.us.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        (*t.us.last().unwrap() / scale, t)
    };
    let (mut l0, mut l1) = (lambda, lambda * (1.0 + 1e-7));
    let (mut f0, mut best) = miss(l0);
    let mut best_miss = f0.abs();
    for _ in 0..20 {
        let (f1, t1) = miss(l1);
        if f1.abs() < best_miss {
            best_miss = f1.abs();
            best = t1;
        }
        if f1 == f0 || f1.abs() < 1e-15 {
            break;
        }
        let next = l1 - f1 * (l1 - l0) / (f1 - f0);
        (l0, f0, l1) = (l1, f1, next);
        // stay near the finite-difference value: another branch would be a different eigenvalue
        if (l1 - lambda).abs() > 1e-4 * lambda {
            break;
        }
    }
    let Trajectory { xs, mut us, mut dus, d2l, d2r } = best;
    let n = xs.len();
    // fold the endpoint mismatch into a linear term; its second derivative is zero
    let miss = us[n - 1];
    let slope = miss / iv.len();
    for i in 0..n {
        us[i] -= slope * (xs[i] - iv.lo);
        dus[i] -= slope;
    }
    us[n - 1] = 0.0;
    if us[1..n - 1].iter().any(|&v| v <= 0.0) {
        return Err(Error::Precondition(format!(
            "shooting at lambda = {lambda} produced a sign change on ({}, {})",
            iv.lo, iv.hi
        )));
    }
    let q = QuinticSamples::new(xs, us, dus, d2l, d2r);
    let imax = (0..n).max_by(|&i, &j| q.values()[i].total_cmp(&q.values()[j])).unwrap();
    let lo = q.nodes()[imax.saturating_sub(1)];
    let hi = q.nodes()[(imax + 1).min(n - 1)];
    let (_, peak) = crate::numeric::maximize_on(|x| q.jet(x, Side::Right).0, lo, hi, 32);
    let peak = peak.max(q.values()[imax]);
    Ok(PiecewiseFunction::single(iv.lo, iv.hi, Shape::Quintic(Arc::new(q.scaled(1.0 / peak)))))
}

pub fn principal_eigenpair_with(problem: &Problem, factor: &CumulativeFactor, iv: Interval, opts: &EigenOptions) -> Result<EigenPair> {
    let ev = principal_eigenvalue_with(problem, factor, iv, opts)?;
    let u2 = shoot_eigenfunction(problem, iv, ev.lambda1, opts.shooting_steps)?;
    Ok(EigenPair { lambda1: ev.lambda1, error: ev.error, n: ev.n, interval: iv, u2 })
}

/// Principal eigenpair for weight `m` on `I`; normalizes the operator first.
pub fn principal_eigenpair(problem: &Problem, iv: Interval, opts: &EigenOptions) -> Result<EigenPair> {
    let problem = normalize(problem)?;
    let factor = CumulativeFactor::build(&problem.b, DEFAULT_TABLE_NODES);
    principal_eigenpair_with(&problem, &factor, iv, opts)
}

pub fn principal_eigenvalue(problem: &Problem, iv: Interval, opts: &EigenOptions) -> Result<EigenValue> {
    let problem = normalize(problem)?;
    let factor = CumulativeFactor::build(&problem.b, DEFAULT_TABLE_NODES);
    principal_eigenvalue_with(&problem, &factor, iv, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;
    use std::f64::consts::PI;

    fn unit(c: f64, b: f64) -> Problem {
        Problem::with_unit_leading(
            0.0,
            1.0,
            Coefficient::constant(0.0, 1.0, b),
            Coefficient::constant(0.0, 1.0, c),
            Coefficient::constant(0.0, 1.0, 1.0),
            0.5,
        )
        .unwrap()
    }

    #[test]
    fn laplacian_unit_interval() {
        let p = unit(0.0, 0.0);
        let e = principal_eigenpair(&p, Interval::new(0.0, 1.0), &EigenOptions::default()).unwrap();
        assert!((e.lambda1 - PI * PI).abs() < 1e-8, "{}", e.lambda1 - PI * PI);
        for x in [0.1, 0.5, 0.77] {
            assert!((e.u2.eval(x) - (PI * x).sin()).abs() < 1e-9);
        }
        assert_eq!(e.u2.eval(1.0), 0.0);
    }

    #[test]
    fn shifted_short_interval() {
        let p = unit(1.0, 0.0);
        let e = principal_eigenvalue(&p, Interval::new(0.4, 0.6), &EigenOptions::default()).unwrap();
        let exact = 25.0 * PI * PI + 1.0;
        assert!(((e.lambda1 - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn constant_drift() {
        let p = unit(0.0, 4.0);
        let e = principal_eigenpair(&p, Interval::new(0.0, 1.0), &EigenOptions::default()).unwrap();
        let exact = PI * PI + 4.0;
        assert!(((e.lambda1 - exact) / exact).abs() < 1e-9);
        // u = e^{2x} sin(pi x) up to scaling
        let f = |x: f64| (2.0 * x).exp() * (PI * x).sin();
        let r = e.u2.eval(0.5) / f(0.5);
        assert!((e.u2.eval(0.8) - r * f(0.8)).abs() < 1e-8);
    }

    #[test]
    fn rejects_zero_and_negative_weight() {
        let p = Problem::simple(0.0, 1.0, 0.0, Coefficient::step(&[0.0, 0.5, 1.0], &[0.0, -1.0]).unwrap(), 0.5).unwrap();
        assert!(matches!(principal_eigenvalue(&p, Interval::new(0.0, 0.5), &EigenOptions::default()), Err(Error::ZeroWeight(..))));
        assert!(matches!(principal_eigenvalue(&p, Interval::new(0.0, 1.0), &EigenOptions::default()), Err(Error::Precondition(_))));
    }

    #[test]
    fn partially_vanishing_weight() {
        // m = 1 on (0, 1/2), 0 on (1/2, 1): lambda solves tan(s/2) = -s/2, s = sqrt(lambda)
        let p = Problem::simple(0.0, 1.0, 0.0, Coefficient::step(&[0.0, 0.5, 1.0], &[1.0, 0.0]).unwrap(), 0.5).unwrap();
        let e = principal_eigenpair(&p, Interval::new(0.0, 1.0), &EigenOptions::default()).unwrap();
        let s = e.lambda1.sqrt();
        assert!(((0.5 * s).tan() + 0.5 * s).abs() < 1e-6, "{}", e.lambda1);
        assert!(e.u2.eval(0.9) > 0.0);
    }
}
