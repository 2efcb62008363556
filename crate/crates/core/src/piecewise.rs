//! Piecewise functions with first and second derivatives: the building
//! blocks of explicit subsolutions, sampled eigenfunctions and grid
//! solutions.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::coefficient::Side;
use crate::factors::{CumulativeTable, ScalarField};

/// Quintic Hermite interpolant through `(u, u', u'')` at each node. Second
/// derivatives may jump at nodes, so both one-sided values are stored.
#[derive(Clone, Debug)]
pub struct QuinticSamples {
    xs: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    d2_left: Vec<f64>,
    d2_right: Vec<f64>,
}

impl QuinticSamples {
    pub fn new(xs: Vec<f64>, u: Vec<f64>, du: Vec<f64>, d2_left: Vec<f64>, d2_right: Vec<f64>) -> Self {
        let n = xs.len();
        assert!(n >= 2 && u.len() == n && du.len() == n && d2_left.len() == n && d2_right.len() == n);
        Self { xs, u, du, d2_left, d2_right }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn slopes(&self) -> &[f64] {
        &self.du
    }

    fn cell(&self, x: f64, side: Side) -> usize {
        let n = self.xs.len();
        let i = match side {
            Side::Right => self.xs.partition_point(|&v| v <= x),
            Side::Left => self.xs.partition_point(|&v| v < x),
        };
        i.saturating_sub(1).min(n - 2)
    }

    fn coeffs(&self, i: usize) -> (f64, [f64; 6]) {
        let h = self.xs[i + 1] - self.xs[i];
        let (p0, p1) = (self.u[i], self.u[i + 1]);
        let (m0, m1) = (h * self.du[i], h * self.du[i + 1]);
        let (a0, a1) = (h * h * self.d2_right[i], h * h * self.d2_left[i + 1]);
        let c3 = -10.0 * p0 - 6.0 * m0 - 1.5 * a0 + 10.0 * p1 - 4.0 * m1 + 0.5 * a1;
        let c4 = 15.0 * p0 + 8.0 * m0 + 1.5 * a0 - 15.0 * p1 + 7.0 * m1 - a1;
        let c5 = -6.0 * p0 - 3.0 * m0 - 0.5 * a0 + 6.0 * p1 - 3.0 * m1 + 0.5 * a1;
        (h, [p0, m0, 0.5 * a0, c3, c4, c5])
    }

    /// `(u, u', u'')` at `x`, using the cell on the given side of a node.
    pub fn jet(&self, x: f64, side: Side) -> (f64, f64, f64) {
        let i = self.cell(x, side);
        if x == self.xs[i] {
            return (self.u[i], self.du[i], self.d2_right[i]);
        }
        if x == self.xs[i + 1] {
            return (self.u[i + 1], self.du[i + 1], self.d2_left[i + 1]);
        }
        let (h, c) = self.coeffs(i);
        let t = (x - self.xs[i]) / h;
        let v = c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))));
        let d = c[1] + t * (2.0 * c[2] + t * (3.0 * c[3] + t * (4.0 * c[4] + t * 5.0 * c[5])));
        let dd = 2.0 * c[2] + t * (6.0 * c[3] + t * (12.0 * c[4] + t * 20.0 * c[5]));
        (v, d / h, dd / (h * h))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let sc = |v: &Vec<f64>| v.iter().map(|x| x * s).collect();
        Self { xs: self.xs.clone(), u: sc(&self.u), du: sc(&self.du), d2_left: sc(&self.d2_left), d2_right: sc(&self.d2_right) }
    }
}

/// Values on a uniform grid. Interpolation is cubic; derivatives come from
/// the quartic through the five nearest nodes.
#[derive(Clone, Debug)]
pub struct GridSamples {
    lo: f64,
    h: f64,
    values: Vec<f64>,
}

impl GridSamples {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 5, "grid samples need at least five nodes");
        let h = (hi - lo) / (values.len() - 1) as f64;
        Self { lo, h, values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }

    fn stencil(&self, x: f64, width: usize) -> usize {
        let n = self.values.len();
        let i = ((x - self.lo) / self.h).floor() as isize - (width as isize - 1) / 2;
        i.clamp(0, (n - width) as isize) as usize
    }

    fn lagrange(&self, x: f64, width: usize, order: usize) -> f64 {
        let s = self.stencil(x, width);
        let t = (x - self.lo) / self.h - s as f64;
        let mut acc = 0.0;
        for j in 0..width {
            let w = match order {
                0 => basis(t, j, width),
                1 => basis_d1(t, j, width),
                _ => basis_d2(t, j, width),
            };
            acc += w * self.values[s + j];
        }
        acc / self.h.powi(order as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.lagrange(x, 4, 0)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.lagrange(x, 5, 1)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.lagrange(x, 5, 2)
    }
}

fn basis(t: f64, j: usize, n: usize) -> f64 {
    let mut v = 1.0;
    for k in 0..n {
        if k != j {
            v *= (t - k as f64) / (j as f64 - k as f64);
        }
    }
    v
}

fn basis_d1(t: f64, j: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for skip in 0..n {
        if skip == j {
            continue;
        }
        let mut v = 1.0 / (j as f64 - skip as f64);
        for k in 0..n {
            if k != j && k != skip {
                v *= (t - k as f64) / (j as f64 - k as f64);
            }
        }
        acc += v;
    }
    acc
}

fn basis_d2(t: f64, j: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for s1 in 0..n {
        for s2 in 0..n {
            if s1 == j || s2 == j || s1 == s2 {
                continue;
            }
            let mut v = 1.0 / ((j as f64 - s1 as f64) * (j as f64 - s2 as f64));
            for k in 0..n {
                if k != j && k != s1 && k != s2 {
                    v *= (t - k as f64) / (j as f64 - k as f64);
                }
            }
            acc += v;
        }
    }
    acc
}

/// Orientation of a one-sided construction: `Left` grows from `alpha`,
/// `Right` is mirrored and grows from `beta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Left,
    Right,
}

impl Orientation {
    /// Distance from the anchor and its derivative sign.
    fn dist(self, anchor: f64, x: f64) -> (f64, f64) {
        match self {
            Orientation::Left => (x - anchor, 1.0),
            Orientation::Right => (anchor - x, -1.0),
        }
    }
}

/// One term `coef * int g` of an integral base.
#[derive(Clone)]
pub struct IntegralTerm {
    pub coef: f64,
    pub table: Arc<CumulativeTable>,
    /// Derivative of the table's integrand.
    pub dintegrand: ScalarField,
}

impl fmt::Debug for IntegralTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralTerm").field("coef", &self.coef).field("table", &self.table).finish()
    }
}

/// Functions `f` whose power `f^k` forms a construction piece.
#[derive(Clone, Debug)]
pub enum Base {
    /// `amp * sinh(rate * d(x))`.
    Sinh { amp: f64, rate: f64, anchor: f64, orientation: Orientation },
    /// `amp * (cosh(rate * d(x)) - 1)`.
    CoshMinusOne { amp: f64, rate: f64, anchor: f64, orientation: Orientation },
    /// `sigma * sum coef_j int g_j`, integrated from `alpha` (left) or up to
    /// `beta` (right).
    Integral { sigma: f64, terms: Vec<IntegralTerm>, orientation: Orientation },
}

impl Base {
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        match self {
            Base::Sinh { amp, rate, anchor, orientation } => {
                let (d, s) = orientation.dist(*anchor, x);
                let z = rate * d;
                (amp * z.sinh(), s * amp * rate * z.cosh(), amp * rate * rate * z.sinh())
            }
            Base::CoshMinusOne { amp, rate, anchor, orientation } => {
                let (d, s) = orientation.dist(*anchor, x);
                let z = rate * d;
                // cosh z - 1 = 2 sinh^2(z/2) avoids cancellation near the anchor
                let half = (0.5 * z).sinh();
                (amp * 2.0 * half * half, s * amp * rate * z.sinh(), amp * rate * rate * z.cosh())
            }
            Base::Integral { sigma, terms, orientation } => {
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for t in terms {
                    let g = t.table.integrand(x);
                    let dg = (t.dintegrand)(x);
                    match orientation {
                        Orientation::Left => {
                            v += t.coef * t.table.eval(x);
                            d1 += t.coef * g;
                            d2 += t.coef * dg;
                        }
                        Orientation::Right => {
                            v += t.coef * (t.table.total() - t.table.eval(x));
                            d1 -= t.coef * g;
                            d2 -= t.coef * dg;
                        }
                    }
                }
                (sigma * v, sigma * d1, sigma * d2)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Shape {
    Zero,
    Quintic(Arc<QuinticSamples>),
    Grid(Arc<GridSamples>),
    Power { base: Base, k: f64 },
}

impl Shape {
    pub fn jet(&self, x: f64, side: Side) -> (f64, f64, f64) {
        match self {
            Shape::Zero => (0.0, 0.0, 0.0),
            Shape::Quintic(q) => q.jet(x, side),
            Shape::Grid(g) => (g.eval(x), g.d1(x), g.d2(x)),
            Shape::Power { base, k } => {
                let (f, f1, f2) = base.jet(x);
                if f <= 0.0 {
                    let d2 = if *k == 2.0 { 2.0 * f1 * f1 } else { 0.0 };
                    return (0.0, 0.0, d2);
                }
                let fk2 = f.powf(k - 2.0);
                let fk1 = fk2 * f;
                (fk1 * f, k * fk1 * f1, k * (k - 1.0) * fk2 * f1 * f1 + k * fk1 * f2)
            }
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Zero => "zero",
            Shape::Quintic(_) => "eigenfunction",
            Shape::Grid(_) => "grid",
            Shape::Power { base: Base::Sinh { .. }, .. } => "sinh-power",
            Shape::Power { base: Base::CoshMinusOne { .. }, .. } => "cosh-power",
            Shape::Power { base: Base::Integral { .. }, .. } => "integral-power",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub shape: Shape,
}

/// Functions defined segment by segment on `[lo, hi]`; zero outside.
#[derive(Clone, Debug)]
pub struct PiecewiseFunction {
    segments: Vec<Segment>,
}

impl PiecewiseFunction {
    pub fn new(segments: Vec<Segment>) -> Self {
        assert!(!segments.is_empty());
        for w in segments.windows(2) {
            assert!(w[0].hi == w[1].lo, "segments must tile the domain");
        }
        Self { segments }
    }

    pub fn single(lo: f64, hi: f64, shape: Shape) -> Self {
        Self::new(vec![Segment { lo, hi, shape }])
    }

    pub fn zero(lo: f64, hi: f64) -> Self {
        Self::single(lo, hi, Shape::Zero)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.segments[0].lo, self.segments.last().unwrap().hi)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.lo).collect();
        v.push(self.domain().1);
        v
    }

    fn segment(&self, x: f64, side: Side) -> Option<&Segment> {
        let (lo, hi) = self.domain();
        if x < lo || x > hi {
            return None;
        }
        let i = match side {
            Side::Right => self.segments.partition_point(|s| s.lo <= x),
            Side::Left => self.segments.partition_point(|s| s.lo < x),
        };
        Some(&self.segments[i.saturating_sub(1).min(self.segments.len() - 1)])
    }

    pub fn jet_side(&self, x: f64, side: Side) -> (f64, f64, f64) {
        self.segment(x, side).map_or((0.0, 0.0, 0.0), |s| s.shape.jet(x, side))
    }

    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        self.jet_side(x, Side::Right)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x).0
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.jet(x).1
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.jet(x).2
    }

    /// Sup norm over `[lo, hi]`, by dense sampling refined near the best node.
    pub fn sup_on(&self, lo: f64, hi: f64) -> f64 {
        let (_, v) = crate::numeric::maximize_on(|x| self.eval(x), lo, hi, 4096);
        v
    }

    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.domain();
        self.segments.iter().map(|s| self.sup_on(s.lo.max(lo), s.hi.min(hi))).fold(0.0, f64::max)
    }

    /// `n + 1` equally spaced samples of `(x, u(x))`.
    pub fn sample(&self, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain();
        (0..=n)
            .map(|i| {
                let x = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
                (x, self.eval(x))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_reproduces_quintics() {
        let f = |x: f64| x.powi(5) - 2.0 * x.powi(3) + x;
        let d1 = |x: f64| 5.0 * x.powi(4) - 6.0 * x * x + 1.0;
        let d2 = |x: f64| 20.0 * x.powi(3) - 12.0 * x;
        let xs = vec![0.0, 0.3, 1.0, 1.7];
        let q = QuinticSamples::new(
            xs.clone(),
            xs.iter().map(|&x| f(x)).collect(),
            xs.iter().map(|&x| d1(x)).collect(),
            xs.iter().map(|&x| d2(x)).collect(),
            xs.iter().map(|&x| d2(x)).collect(),
        );
        for x in [0.1, 0.3, 0.77, 1.5] {
            let (v, a, b) = q.jet(x, Side::Right);
            assert!((v - f(x)).abs() < 1e-13);
            assert!((a - d1(x)).abs() < 1e-12);
            assert!((b - d2(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_samples_derivatives() {
        let n = 2001;
        let vals: Vec<f64> = (0..n).map(|i| (i as f64 / (n - 1) as f64 * 3.0).sin()).collect();
        let g = GridSamples::new(0.0, 3.0, vals);
        for x in [0.0, 0.4, 1.234, 3.0] {
            assert!((g.eval(x) - x.sin()).abs() < 1e-11);
            assert!((g.d1(x) - x.cos()).abs() < 1e-9);
            assert!((g.d2(x) + x.sin()).abs() < 1e-5);
        }
    }

    #[test]
    fn sinh_power_derivatives() {
        let s = Shape::Power { base: Base::Sinh { amp: 0.7, rate: 1.3, anchor: 0.0, orientation: Orientation::Left }, k: 4.0 };
        let h = 1e-5;
        for x in [0.2, 0.5] {
            let (v, d1, d2) = s.jet(x, Side::Right);
            let (vp, d1p, _) = s.jet(x + h, Side::Right);
            let (vm, d1m, _) = s.jet(x - h, Side::Right);
            assert!((v - (0.7 * (1.3 * x).sinh()).powi(4)).abs() < 1e-15);
            assert!(((vp - vm) / (2.0 * h) - d1).abs() < 1e-8);
            assert!(((d1p - d1m) / (2.0 * h) - d2).abs() < 1e-7);
        }
    }

    #[test]
    fn mirrored_cosh_vanishes_at_anchor() {
        let s = Shape::Power { base: Base::CoshMinusOne { amp: 2.0, rate: 1.0, anchor: 1.0, orientation: Orientation::Right }, k: 2.0 };
        assert_eq!(s.jet(1.0, Side::Left).0, 0.0);
        let (_, d1, _) = s.jet(0.5, Side::Right);
        assert!(d1 < 0.0);
    }

    #[test]
    fn piecewise_selects_side_and_zero_outside() {
        let f = PiecewiseFunction::new(vec![
            Segment { lo: 0.0, hi: 0.5, shape: Shape::Zero },
            Segment {
                lo: 0.5,
                hi: 1.0,
                shape: Shape::Power { base: Base::Sinh { amp: 1.0, rate: 1.0, anchor: 0.5, orientation: Orientation::Left }, k: 2.0 },
            },
        ]);
        assert_eq!(f.eval(-1.0), 0.0);
        assert_eq!(f.jet_side(0.5, Side::Left).2, 0.0);
        assert!((f.jet_side(0.5, Side::Right).2 - 2.0).abs() < 1e-15);
        assert!((f.sup_norm() - 0.5f64.sinh().powi(2)).abs() < 1e-12);
    }
}
