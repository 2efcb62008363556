//! Explicit subsolutions glued from two outer pieces and the principal
//! eigenfunction, their pointwise verification, and the large
//! supersolution `k (phi + 1)`.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::analysis::Analysis;
use crate::certify::{Method, Witness};
use crate::coefficient::Side;
use crate::constants::cp;
use crate::error::{Error, Result};
use crate::factors::{CumulativeTable, ScalarField};
use crate::model::{Interval, Problem};
use crate::piecewise::{Base, GridSamples, IntegralTerm, Orientation, PiecewiseFunction, Segment, Shape};
use crate::solve::{pow0, solve_linear, Grid};

/// Points in the crossing scan of the gluing step.
pub const GLUE_SCAN: usize = 4096;
/// Interior verification points per smooth piece.
pub const VERIFY_POINTS: usize = 10_000;
pub const JUNCTION_VALUE_TOL: f64 = 1e-10;
pub const JUNCTION_SLOPE_TOL: f64 = 1e-8;

/// The left and right outer pieces `u1 = f^k` and `u3 = g^k`.
#[derive(Clone, Debug)]
pub struct OuterPieces {
    pub method: Method,
    pub tau: f64,
    pub k: f64,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub u1: Shape,
    pub u3: Shape,
}

fn sinh_pair(alpha: f64, beta: f64, amp: f64, rate: f64, k: f64) -> (Shape, Shape) {
    if amp == 0.0 {
        return (Shape::Zero, Shape::Zero);
    }
    let l = Base::Sinh { amp, rate, anchor: alpha, orientation: Orientation::Left };
    let r = Base::Sinh { amp, rate, anchor: beta, orientation: Orientation::Right };
    (Shape::Power { base: l, k }, Shape::Power { base: r, k })
}

fn table(an: &Analysis, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Arc<CumulativeTable> {
    let t = &an.tables;
    Arc::new(CumulativeTable::build(t.alpha, t.beta, &t.breaks, an.options.table_nodes, Arc::new(f)))
}

fn integral_shape(sigma: f64, terms: Vec<IntegralTerm>, orientation: Orientation, k: f64) -> Shape {
    Shape::Power { base: Base::Integral { sigma, terms, orientation }, k }
}

/// Outer pieces for the witness method on the analysis' normalized problem.
/// `c_norm` is the sup norm of `c` used by the sinh/cosh formulas.
pub fn build_outer_pieces(an: &Analysis, iv: Interval, tau: f64, method: Method, c_norm: f64) -> Result<OuterPieces> {
    let pr = &an.problem;
    let (alpha, beta) = (pr.alpha, pr.beta);
    let p = pr.p;
    let cpv = cp(p);
    let mm = an.norms.m_minus_sup;
    let out = match method {
        Method::Sinh => {
            let k = 2.0 / (1.0 - p);
            if c_norm <= 0.0 {
                return Err(Error::Precondition("sinh construction needs ||c|| > 0".into()));
            }
            let amp = (tau * mm / c_norm).sqrt();
            let (u1, u3) = sinh_pair(alpha, beta, amp, (c_norm / cpv).sqrt(), k);
            OuterPieces { method, tau, k, sigma: amp, epsilon: None, u1, u3 }
        }
        Method::Cosh => {
            let k = 1.0 / (1.0 - p);
            if c_norm <= 0.0 {
                return Err(Error::Precondition("cosh construction needs ||c|| > 0".into()));
            }
            let amp = tau * mm / c_norm;
            let rate = (c_norm / k).sqrt();
            let (u1, u3) = if amp == 0.0 {
                (Shape::Zero, Shape::Zero)
            } else {
                (
                    Shape::Power { base: Base::CoshMinusOne { amp, rate, anchor: alpha, orientation: Orientation::Left }, k },
                    Shape::Power { base: Base::CoshMinusOne { amp, rate, anchor: beta, orientation: Orientation::Right }, k },
                )
            };
            OuterPieces { method, tau, k, sigma: amp, epsilon: None, u1, u3 }
        }
        Method::I1 => {
            let k = 2.0 / (1.0 - p);
            let bu = an.norms.bunder_sup;
            let sigma = (bu * bu * (tau * mm + an.norms.c_sup) / cpv).sqrt();
            if sigma == 0.0 {
                OuterPieces { method, tau, k, sigma, epsilon: None, u1: Shape::Zero, u3: Shape::Zero }
            } else {
                let t = Arc::new(an.tables.int_bbar.clone());
                let d = db_bbar(an);
                let term = IntegralTerm { coef: 1.0, table: t, dintegrand: d };
                OuterPieces {
                    method,
                    tau,
                    k,
                    sigma,
                    epsilon: None,
                    u1: integral_shape(sigma, vec![term.clone()], Orientation::Left, k),
                    u3: integral_shape(sigma, vec![term], Orientation::Right, k),
                }
            }
        }
        Method::I2 => return build_i2(an, iv, tau),
    };
    check_outer(an, iv, &out)?;
    Ok(out)
}

/// `Bbar' = b Bbar`.
fn db_bbar(an: &Analysis) -> ScalarField {
    let b = an.problem.b.clone();
    let bb = an.tables.factor.bbar_field();
    Arc::new(move |x| b.eval(x) * bb(x))
}

fn build_i2(an: &Analysis, iv: Interval, tau: f64) -> Result<OuterPieces> {
    let pr = &an.problem;
    let (alpha, beta) = (pr.alpha, pr.beta);
    let k = 1.0 / (1.0 - pr.p);
    let sigma = tau * (1.0 - pr.p);
    let minus = Arc::new(an.tables.minus.clone());
    let total = minus.total();
    let bbar = an.tables.factor.bbar_field();
    let b = pr.b.clone();
    let mminus = an.decomp.m_minus.clone();

    let (mn, bb) = (minus.clone(), bbar.clone());
    let g0l = table(an, move |y| bb(y) * mn.eval(y));
    let (mn, bb, bc, mc) = (minus.clone(), bbar.clone(), b.clone(), mminus.clone());
    let d0l: ScalarField = Arc::new(move |y| bc.eval(y) * bb(y) * mn.eval(y) + mc.eval(y));
    let bb = bbar.clone();
    let g1l = table(an, move |y| bb(y) * (y - alpha));
    let (bb, bc) = (bbar.clone(), b.clone());
    let d1l: ScalarField = Arc::new(move |y| bc.eval(y) * bb(y) * (y - alpha) + bb(y));

    let (mn, bb) = (minus.clone(), bbar.clone());
    let g0r = table(an, move |y| bb(y) * (total - mn.eval(y)));
    let (mn, bb, bc, mc) = (minus.clone(), bbar.clone(), b.clone(), mminus.clone());
    let d0r: ScalarField = Arc::new(move |y| bc.eval(y) * bb(y) * (total - mn.eval(y)) - mc.eval(y));
    let bb = bbar.clone();
    let g1r = table(an, move |y| bb(y) * (beta - y));
    let (bb, bc) = (bbar, b);
    let d1r: ScalarField = Arc::new(move |y| bc.eval(y) * bb(y) * (beta - y) - bb(y));

    let mut eps = 1e-3;
    for _ in 0..60 {
        let u1 = integral_shape(
            sigma,
            vec![
                IntegralTerm { coef: 1.0, table: g0l.clone(), dintegrand: d0l.clone() },
                IntegralTerm { coef: eps, table: g1l.clone(), dintegrand: d1l.clone() },
            ],
            Orientation::Left,
            k,
        );
        let u3 = integral_shape(
            sigma,
            vec![
                IntegralTerm { coef: 1.0, table: g0r.clone(), dintegrand: d0r.clone() },
                IntegralTerm { coef: eps, table: g1r.clone(), dintegrand: d1r.clone() },
            ],
            Orientation::Right,
            k,
        );
        let out = OuterPieces { method: Method::I2, tau, k, sigma, epsilon: Some(eps), u1, u3 };
        if outer_sups(&out, an, iv).0 <= 1.0 {
            check_outer(an, iv, &out)?;
            return Ok(out);
        }
        eps *= 0.5;
    }
    Err(Error::TauOutsideWindow(format!("no epsilon gives ||u1|| <= 1 at tau = {tau}")))
}

/// Largest sampled values of `u1` on `[alpha, x1]` and `u3` on `[x0, beta]`.
fn outer_sups(out: &OuterPieces, an: &Analysis, iv: Interval) -> (f64, f64) {
    let (alpha, beta) = (an.problem.alpha, an.problem.beta);
    let n = GLUE_SCAN;
    let mut s1: f64 = 0.0;
    let mut s3: f64 = 0.0;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        s1 = s1.max(out.u1.jet(alpha + (iv.hi - alpha) * t, Side::Right).0);
        s3 = s3.max(out.u3.jet(iv.lo + (beta - iv.lo) * t, Side::Right).0);
    }
    (s1.max(s3), s1.min(s3))
}

fn check_outer(an: &Analysis, iv: Interval, out: &OuterPieces) -> Result<()> {
    let (alpha, beta) = (an.problem.alpha, an.problem.beta);
    if out.u1.jet(alpha, Side::Right).0 != 0.0 || out.u3.jet(beta, Side::Left).0 != 0.0 {
        return Err(Error::Precondition("outer pieces must vanish on the boundary".into()));
    }
    let n = GLUE_SCAN;
    let mut prev = 0.0;
    for i in 1..=n {
        let v = out.u1.jet(alpha + (iv.hi - alpha) * i as f64 / n as f64, Side::Right).0;
        if v < prev {
            return Err(Error::Precondition("u1 is not increasing".into()));
        }
        prev = v;
    }
    let (s, _) = outer_sups(out, an, iv);
    if s > 1.0 {
        return Err(Error::TauOutsideWindow(format!("outer piece reaches {s} > 1 at tau = {}", out.tau)));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Junction {
    pub x: f64,
    /// `|u_i - u_{i+1}|` at the junction.
    pub value_gap: f64,
    /// `u_i' - u_{i+1}'`; nonpositive up to tolerance.
    pub slope_jump: f64,
}

/// A glued subsolution `u1 | u2 | u3` of `L u <= tau m u^p` for `problem`.
#[derive(Clone, Debug, Serialize)]
pub struct SubsolutionSpec {
    pub tau: f64,
    pub method: Method,
    pub k: f64,
    pub sigma: f64,
    pub epsilon: Option<f64>,
    pub interval: Interval,
    pub lambda1: f64,
    pub x_under0: f64,
    pub x_over1: f64,
    pub junctions: Vec<Junction>,
    /// Normalized problem the inequality refers to.
    #[serde(skip)]
    pub problem: Problem,
    #[serde(skip)]
    pub glued: PiecewiseFunction,
}

/// First point of `(from, to]` where `d` turns nonpositive, refined by
/// bisection.
fn crossing(d: impl Fn(f64) -> f64, from: f64, to: f64) -> Option<f64> {
    let n = GLUE_SCAN;
    let mut prev = from;
    for i in 1..=n {
        let x = from + (to - from) * i as f64 / n as f64;
        if d(x) <= 0.0 {
            let (mut a, mut b) = (prev, x);
            while (b - a).abs() > 1e-12 {
                let mid = 0.5 * (a + b);
                if d(mid) > 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Some(b);
        }
        prev = x;
    }
    None
}

/// Glues `u1` and `u3` to the normalized eigenfunction `u2` of `iv`.
pub fn glue(problem: &Problem, outer: &OuterPieces, u2: &PiecewiseFunction, lambda1: f64, iv: Interval) -> Result<SubsolutionSpec> {
    let (alpha, beta) = (problem.alpha, problem.beta);
    let v1 = |x: f64| outer.u1.jet(x, Side::Left);
    let v3 = |x: f64| outer.u3.jet(x, Side::Right);
    let eig = |x: f64| u2.jet(x);
    let mut segments = Vec::new();
    let mut junctions = Vec::new();

    let left_zero = matches!(outer.u1, Shape::Zero);
    let right_zero = matches!(outer.u3, Shape::Zero);
    let x_under0 = if iv.lo <= alpha {
        alpha
    } else if left_zero {
        iv.lo
    } else {
        crossing(|x| v1(x).0 - eig(x).0, iv.lo, iv.hi)
            .ok_or_else(|| Error::Glue(format!("u1 never meets u2 on ({}, {}); u1(x1) = {}", iv.lo, iv.hi, v1(iv.hi).0)))?
    };
    let x_over1 = if iv.hi >= beta {
        beta
    } else if right_zero {
        iv.hi
    } else {
        crossing(|x| v3(x).0 - eig(x).0, iv.hi, iv.lo)
            .ok_or_else(|| Error::Glue(format!("u3 never meets u2 on ({}, {}); u3(x0) = {}", iv.lo, iv.hi, v3(iv.lo).0)))?
    };
    if !(x_under0 < x_over1) {
        return Err(Error::Glue(format!("junctions out of order: {x_under0} >= {x_over1}")));
    }
    if x_under0 > alpha {
        let (a, b) = (v1(x_under0), u2.jet_side(x_under0, Side::Right));
        junctions.push(Junction { x: x_under0, value_gap: (a.0 - b.0).abs(), slope_jump: a.1 - b.1 });
        segments.push(Segment { lo: alpha, hi: x_under0, shape: outer.u1.clone() });
    }
    let inner = u2.segments().first().map(|s| s.shape.clone()).unwrap_or(Shape::Zero);
    segments.push(Segment { lo: x_under0, hi: x_over1, shape: inner });
    if x_over1 < beta {
        let (a, b) = (u2.jet_side(x_over1, Side::Left), v3(x_over1));
        junctions.push(Junction { x: x_over1, value_gap: (a.0 - b.0).abs(), slope_jump: a.1 - b.1 });
        segments.push(Segment { lo: x_over1, hi: beta, shape: outer.u3.clone() });
    }
    for j in &junctions {
        if j.value_gap > JUNCTION_VALUE_TOL {
            return Err(Error::Glue(format!("value gap {:e} at x = {}", j.value_gap, j.x)));
        }
        if j.slope_jump > JUNCTION_SLOPE_TOL {
            return Err(Error::Glue(format!("slope decreases by {:e} at x = {}", j.slope_jump, j.x)));
        }
    }
    Ok(SubsolutionSpec {
        tau: outer.tau,
        method: outer.method,
        k: outer.k,
        sigma: outer.sigma,
        epsilon: outer.epsilon,
        interval: iv,
        lambda1,
        x_under0,
        x_over1,
        junctions,
        problem: problem.clone(),
        glued: PiecewiseFunction::new(segments),
    })
}

/// Rebuilds the subsolution behind a certificate witness. For a witness on
/// the modified weight, `an` must be the analysis of the original problem.
pub fn construct_subsolution(an: &Analysis, w: &Witness) -> Result<SubsolutionSpec> {
    let modified;
    let an = if w.modified {
        modified = an.modified_analysis().map_err(Error::Precondition)?;
        &modified
    } else {
        an
    };
    let outer = build_outer_pieces(an, w.interval, w.tau, w.method, w.c_norm)?;
    let pair = an.eigenpair(w.interval)?;
    glue(&an.problem, &outer, &pair.u2, pair.lambda1, w.interval)
}

#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub max_violation: f64,
    pub worst_x: f64,
    pub tolerance: f64,
    pub points: usize,
    pub passed: bool,
}

/// Checks `-u'' + b u' + c u <= tau m u^p` at `VERIFY_POINTS` interior
/// points of every segment, with one-sided exact derivatives.
pub fn verify_function(problem: &Problem, tau: f64, u: &PiecewiseFunction) -> Verification {
    let msup = problem.m.sup_abs();
    let tolerance = 1e-8 * (1.0 + tau * msup);
    let mut worst = (0.0f64, f64::NAN);
    let mut points = 0;
    for s in u.segments() {
        let n = VERIFY_POINTS;
        for i in 1..=n {
            let x = s.lo + (s.hi - s.lo) * i as f64 / (n + 1) as f64;
            let (v, d1, d2) = s.shape.jet(x, Side::Right);
            let a = problem.a.eval(x);
            let lhs = -a * d2 + problem.b.eval(x) * d1 + problem.c.eval(x) * v;
            let r = lhs - tau * problem.m.eval(x) * pow0(v, problem.p);
            if r > worst.0 || worst.1.is_nan() {
                worst = (r.max(worst.0), if r >= worst.0 { x } else { worst.1 });
            }
            points += 1;
        }
    }
    let max_violation = worst.0.max(0.0);
    Verification { max_violation, worst_x: worst.1, tolerance, points, passed: max_violation <= tolerance }
}

pub fn verify_subsolution(spec: &SubsolutionSpec) -> Verification {
    verify_function(&spec.problem, spec.tau, &spec.glued)
}

impl SubsolutionSpec {
    /// Columns `x,u,Lu,rhs` on `n + 1` equispaced points.
    pub fn write_csv(&self, n: usize, w: &mut impl Write) -> Result<()> {
        let io = |e: std::io::Error| Error::Config(e.to_string());
        writeln!(w, "x,u,Lu,rhs").map_err(io)?;
        let pr = &self.problem;
        for (x, _) in self.glued.sample(n) {
            let (v, d1, d2) = self.glued.jet(x);
            let lu = -d2 + pr.b.eval(x) * d1 + pr.c.eval(x) * v;
            let rhs = self.tau * pr.m.eval(x) * pow0(v, pr.p);
            writeln!(w, "{x:.12e},{v:.12e},{lu:.12e},{rhs:.12e}").map_err(io)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupersolutionSpec {
    pub k_super: f64,
    pub phi_sup: f64,
    pub weight_scale: f64,
    /// Largest violation of the discrete supersolution inequality.
    pub discrete_defect: f64,
    #[serde(skip)]
    pub phi: PiecewiseFunction,
    /// `k (phi + 1)`.
    #[serde(skip)]
    pub function: PiecewiseFunction,
}

/// `k (phi + 1)` with `L phi = tau m^+`, `k = (||phi|| + 1)^{p/(1-p)}`,
/// raised to `floor` when given.
pub fn build_supersolution(an: &Analysis, tau: f64, n: usize, floor: f64) -> Result<SupersolutionSpec> {
    if an.plus_is_zero() {
        return Err(Error::NoPositivity);
    }
    let pr = &an.problem;
    let grid = Grid::new(pr, n);
    let mp = an.decomp.m_plus.clone();
    let phi = solve_linear(pr, grid, |x| tau * mp.eval(x))?;
    let phi_sup = phi.iter().copied().fold(0.0, f64::max);
    let p = pr.p;
    let k = (phi_sup + 1.0).powf(p / (1.0 - p)).max(floor);
    let mut full = vec![0.0];
    full.extend_from_slice(&phi);
    full.push(0.0);
    let sup_vals: Vec<f64> = full.iter().map(|v| k * (v + 1.0)).collect();
    let op = crate::solve::Operator::new(pr, grid);
    let inner = &sup_vals[1..sup_vals.len() - 1];
    // boundary values k enter the first and last rows
    let mut au = op.apply(inner);
    let h2 = grid.h * grid.h;
    let (b0, b1) = (pr.b.eval(grid.node(1)), pr.b.eval(grid.node(grid.n)));
    au[0] += (-1.0 / h2 - b0 / (2.0 * grid.h)) * k;
    let last = grid.n - 1;
    au[last] += (-1.0 / h2 + b1 / (2.0 * grid.h)) * k;
    let defect = au
        .iter()
        .zip(inner)
        .zip(&op.m)
        .map(|((a, &v), m)| tau * m * v.powf(p) - a)
        .fold(0.0f64, f64::max);
    let phi_fn = PiecewiseFunction::single(pr.alpha, pr.beta, Shape::Grid(Arc::new(GridSamples::new(pr.alpha, pr.beta, full))));
    let function = PiecewiseFunction::single(pr.alpha, pr.beta, Shape::Grid(Arc::new(GridSamples::new(pr.alpha, pr.beta, sup_vals))));
    Ok(SupersolutionSpec { k_super: k, phi_sup, weight_scale: tau, discrete_defect: defect, phi: phi_fn, function })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{certify_analysis, ConditionName, Verdict};
    use crate::coefficient::Coefficient;
    use crate::piecewise::QuinticSamples;

    fn step(eta: f64, c: f64, p: f64) -> Problem {
        Problem::simple(0.0, 1.0, c, Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-eta, 1.0, -eta]).unwrap(), p).unwrap()
    }

    #[test]
    fn sinh_identity() {
        let an = Analysis::with_defaults(&step(0.1, 1.0, 0.5)).unwrap();
        let iv = Interval::new(0.4, 0.6);
        let tau = 250.0;
        let out = build_outer_pieces(&an, iv, tau, Method::Sinh, 1.0).unwrap();
        let Shape::Power { base, .. } = &out.u1 else { panic!() };
        for i in 0..1000 {
            let x = 0.6 * i as f64 / 999.0;
            let (f, f1, _) = base.jet(x);
            let lhs = 12.0 * f1 * f1 - f * f;
            assert!((lhs - tau * 0.1).abs() < 1e-10 * tau * 0.1);
        }
    }

    #[test]
    fn cosh_identity() {
        let an = Analysis::with_defaults(&step(0.01, 1.0, 0.5)).unwrap();
        let iv = Interval::new(0.4, 0.6);
        let tau = 250.0;
        let out = build_outer_pieces(&an, iv, tau, Method::Cosh, 1.0).unwrap();
        let Shape::Power { base, k } = &out.u1 else { panic!() };
        for i in 0..1000 {
            let x = 0.6 * i as f64 / 999.0;
            let (f, _, f2) = base.jet(x);
            assert!((k * f2 - f - tau * 0.01).abs() < 1e-10 * tau * 0.01);
        }
    }

    #[test]
    fn i1_matches_lap_construction() {
        let an = Analysis::with_defaults(&step(0.05, 0.0, 0.5)).unwrap();
        let tau = 250.0;
        let out = build_outer_pieces(&an, Interval::new(0.4, 0.6), tau, Method::I1, 0.0).unwrap();
        let sigma = (tau * 0.05 / 12.0f64).sqrt();
        assert!((out.sigma - sigma).abs() < 1e-14);
        let x = 0.3;
        assert!((out.u1.jet(x, Side::Right).0 - (sigma * x).powi(4)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_glue_and_verify() {
        let an = Analysis::with_defaults(&step(0.1, 1.0, 0.5)).unwrap();
        let cert = certify_analysis(&an);
        assert_eq!(cert.verdict, Verdict::Exists);
        let w = cert.witness.unwrap();
        assert_eq!(w.condition, ConditionName::Seno);
        let spec = construct_subsolution(&an, &w).unwrap();
        assert!(spec.x_under0 > 0.4 && spec.x_under0 < 0.5, "{}", spec.x_under0);
        assert!((spec.x_under0 + spec.x_over1 - 1.0).abs() < 1e-8);
        let v = verify_subsolution(&spec);
        assert!(v.passed, "{v:?}");
        assert_eq!(v.points, 3 * VERIFY_POINTS);
    }

    #[test]
    fn degenerate_and_constant_cases() {
        // m >= 0: u1, u3 vanish and the eigenfunction is extended by zero
        let m = Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[0.0, 1.0, 0.0]).unwrap();
        let pr = Problem::simple(0.0, 1.0, 1.0, m, 0.5).unwrap();
        let an = Analysis::with_defaults(&pr).unwrap();
        let iv = an.candidates[0].interval;
        let w = Witness { condition: ConditionName::Seno, method: Method::Sinh, interval: iv, tau: 300.0, c_norm: 1.0, modified: false };
        let spec = construct_subsolution(&an, &w).unwrap();
        assert_eq!((spec.x_under0, spec.x_over1), (iv.lo, iv.hi));
        assert!(verify_subsolution(&spec).passed);

        // u = 1 with c = 0 fails exactly where m < 0
        let pr = Problem::simple(0.0, 1.0, 0.0, Coefficient::step(&[0.0, 0.5, 1.0], &[1.0, -1.0]).unwrap(), 0.5).unwrap();
        let one = QuinticSamples::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]);
        let u = PiecewiseFunction::single(0.0, 1.0, Shape::Quintic(Arc::new(one)));
        let v = verify_function(&pr, 1.0, &u);
        assert!(!v.passed);
        assert!(v.worst_x > 0.5);
        let zero = verify_function(&pr, 1.0, &PiecewiseFunction::zero(0.0, 1.0));
        assert!(zero.passed && zero.max_violation == 0.0);
    }

    #[test]
    fn boundary_interval_has_two_pieces() {
        let m = Coefficient::step(&[0.0, 0.3, 1.0], &[1.0, -0.05]).unwrap();
        let an = Analysis::with_defaults(&Problem::simple(0.0, 1.0, 1.0, m, 0.5).unwrap()).unwrap();
        let cert = certify_analysis(&an);
        assert_eq!(cert.verdict, Verdict::Exists);
        let spec = construct_subsolution(&an, cert.witness.as_ref().unwrap()).unwrap();
        assert_eq!(spec.glued.segments().len(), 2);
        assert_eq!(spec.x_under0, 0.0);
        assert!(verify_subsolution(&spec).passed);
    }

    #[test]
    fn supersolution_constant_weight() {
        let pr = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, 1.0), 0.5).unwrap();
        let an = Analysis::with_defaults(&pr).unwrap();
        let s = build_supersolution(&an, 1.0, 999, 0.0).unwrap();
        assert!((s.phi_sup - 0.125).abs() < 1e-6);
        assert!((s.k_super - 1.125).abs() < 1e-6);
        assert!(s.discrete_defect <= 1e-9);
        let neg = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, -1.0), 0.5).unwrap();
        assert!(build_supersolution(&Analysis::with_defaults(&neg).unwrap(), 1.0, 99, 0.0).is_err());
    }
}
