//! Piecewise closed-form scalar coefficients.
//!
//! A [`Coefficient`] tiles `[alpha, beta]` with pieces. Each piece is either a
//! closed form (a polynomial of degree at most five plus sine, cosine or
//! exponential terms), a cubic Hermite sample table carrying exact nodal
//! slopes, or an arbitrary evaluable function with finite-difference
//! derivatives. The value at an interior breakpoint is taken from the piece on
//! the right unless a [`Side`] is requested explicitly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{bisect, maximize_on, minimize_on};

/// Which one-sided limit to use at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    Sin,
    Cos,
    Exp,
}

/// `amplitude * sin(frequency x)`, `amplitude * cos(frequency x)` or
/// `amplitude * exp(frequency x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub kind: TermKind,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Term {
    fn eval(&self, x: f64) -> f64 {
        let (a, w) = (self.amplitude, self.frequency);
        match self.kind {
            TermKind::Sin => a * (w * x).sin(),
            TermKind::Cos => a * (w * x).cos(),
            TermKind::Exp => a * (w * x).exp(),
        }
    }

    fn d1(&self, x: f64) -> f64 {
        let (a, w) = (self.amplitude, self.frequency);
        match self.kind {
            TermKind::Sin => a * w * (w * x).cos(),
            TermKind::Cos => -a * w * (w * x).sin(),
            TermKind::Exp => a * w * (w * x).exp(),
        }
    }

    fn d2(&self, x: f64) -> f64 {
        let (a, w) = (self.amplitude, self.frequency);
        match self.kind {
            TermKind::Sin => -a * w * w * (w * x).sin(),
            TermKind::Cos => -a * w * w * (w * x).cos(),
            TermKind::Exp => a * w * w * (w * x).exp(),
        }
    }

    fn is_zero(&self) -> bool {
        self.amplitude == 0.0 || (self.kind == TermKind::Sin && self.frequency == 0.0)
    }

    fn is_constant(&self) -> bool {
        self.is_zero() || self.frequency == 0.0
    }
}

/// Polynomial in the global coordinate `x` plus a list of transcendental terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedForm {
    pub poly: [f64; 6],
    pub terms: Vec<Term>,
}

impl ClosedForm {
    pub fn constant(v: f64) -> Self {
        let mut poly = [0.0; 6];
        poly[0] = v;
        Self { poly, terms: Vec::new() }
    }

    pub fn polynomial(coeffs: &[f64]) -> Result<Self> {
        if coeffs.len() > 6 {
            return Err(Error::InvalidCoefficient(format!(
                "polynomial degree {} exceeds 5",
                coeffs.len() - 1
            )));
        }
        let mut poly = [0.0; 6];
        poly[..coeffs.len()].copy_from_slice(coeffs);
        Ok(Self { poly, terms: Vec::new() })
    }

    pub fn with_term(mut self, term: Term) -> Self {
        self.terms.push(term);
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        p + self.terms.iter().map(|t| t.eval(x)).sum::<f64>()
    }

    pub fn d1(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (1..6).rev() {
            acc = acc * x + k as f64 * self.poly[k];
        }
        acc + self.terms.iter().map(|t| t.d1(x)).sum::<f64>()
    }

    pub fn d2(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for k in (2..6).rev() {
            acc = acc * x + (k * (k - 1)) as f64 * self.poly[k];
        }
        acc + self.terms.iter().map(|t| t.d2(x)).sum::<f64>()
    }

    fn scaled(&self, s: f64) -> Self {
        let mut poly = self.poly;
        poly.iter_mut().for_each(|c| *c *= s);
        let terms = self
            .terms
            .iter()
            .map(|t| Term { amplitude: t.amplitude * s, ..*t })
            .collect();
        Self { poly, terms }
    }

    fn sum(&self, other: &Self) -> Self {
        let mut poly = self.poly;
        for (c, o) in poly.iter_mut().zip(other.poly) {
            *c += o;
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        Self { poly, terms }
    }

    pub fn is_constant(&self) -> bool {
        self.poly[1..].iter().all(|&c| c == 0.0) && self.terms.iter().all(Term::is_constant)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|&c| c == 0.0) && self.terms.iter().all(Term::is_zero)
    }
}

/// Cubic Hermite interpolant through nodal values and exact nodal slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteSamples {
    xs: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl HermiteSamples {
    pub fn new(xs: Vec<f64>, values: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != values.len() || xs.len() != slopes.len() {
            return Err(Error::InvalidCoefficient(
                "Hermite samples need at least two nodes with matching value/slope arrays".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCoefficient("Hermite nodes must increase".into()));
        }
        Ok(Self { xs, values, slopes })
    }

    /// Samples `f` with slope `df` at `n` uniform nodes on `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Self {
        let n = n.max(2);
        let xs: Vec<f64> = (0..n)
            .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        let values = xs.iter().map(|&x| f(x)).collect();
        let slopes = xs.iter().map(|&x| df(x)).collect();
        Self { xs, values, slopes }
    }

    fn cell(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn basis(&self, x: f64) -> (usize, f64, f64) {
        let i = self.cell(x);
        let h = self.xs[i + 1] - self.xs[i];
        (i, (x - self.xs[i]) / h, h)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, t, h) = self.basis(x);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn d1(&self, x: f64) -> f64 {
        let (i, t, h) = self.basis(x);
        let t2 = t * t;
        let h00 = 6.0 * t2 - 6.0 * t;
        let h10 = 3.0 * t2 - 4.0 * t + 1.0;
        let h01 = -6.0 * t2 + 6.0 * t;
        let h11 = 3.0 * t2 - 2.0 * t;
        (h00 * self.values[i] + h01 * self.values[i + 1]) / h + h10 * self.slopes[i] + h11 * self.slopes[i + 1]
    }

    pub fn d2(&self, x: f64) -> f64 {
        let (i, t, h) = self.basis(x);
        let h00 = 12.0 * t - 6.0;
        let h10 = 6.0 * t - 4.0;
        let h01 = -12.0 * t + 6.0;
        let h11 = 6.0 * t - 2.0;
        (h00 * self.values[i] + h01 * self.values[i + 1]) / (h * h)
            + (h10 * self.slopes[i] + h11 * self.slopes[i + 1]) / h
    }

    fn scaled(&self, s: f64) -> Self {
        Self {
            xs: self.xs.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
            slopes: self.slopes.iter().map(|v| v * s).collect(),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }
}

/// Evaluable function with derivatives taken by central differences.
#[derive(Clone)]
pub struct FnForm {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl FnForm {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    fn step(x: f64) -> f64 {
        1e-5 * (1.0 + x.abs())
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        let h = Self::step(x);
        ((self.f)(x + h) - (self.f)(x - h)) / (2.0 * h)
    }

    pub fn d2(&self, x: f64) -> f64 {
        let h = 10.0 * Self::step(x);
        ((self.f)(x + h) - 2.0 * (self.f)(x) + (self.f)(x - h)) / (h * h)
    }
}

impl fmt::Debug for FnForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnForm(..)")
    }
}

#[derive(Clone, Debug)]
pub enum PieceForm {
    Closed(ClosedForm),
    Sampled(Arc<HermiteSamples>),
    Function(FnForm),
    /// `scale * inner(x)` for a function-backed piece.
    ScaledFunction(f64, FnForm),
}

impl PieceForm {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            PieceForm::Closed(c) => c.eval(x),
            PieceForm::Sampled(s) => s.eval(x),
            PieceForm::Function(f) => f.eval(x),
            PieceForm::ScaledFunction(s, f) => s * f.eval(x),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match self {
            PieceForm::Closed(c) => c.d1(x),
            PieceForm::Sampled(s) => s.d1(x),
            PieceForm::Function(f) => f.d1(x),
            PieceForm::ScaledFunction(s, f) => s * f.d1(x),
        }
    }

    pub fn d2(&self, x: f64) -> f64 {
        match self {
            PieceForm::Closed(c) => c.d2(x),
            PieceForm::Sampled(s) => s.d2(x),
            PieceForm::Function(f) => f.d2(x),
            PieceForm::ScaledFunction(s, f) => s * f.d2(x),
        }
    }

    pub fn scaled(&self, s: f64) -> PieceForm {
        match self {
            PieceForm::Closed(c) => PieceForm::Closed(c.scaled(s)),
            PieceForm::Sampled(h) => PieceForm::Sampled(Arc::new(h.scaled(s))),
            PieceForm::Function(f) => PieceForm::ScaledFunction(s, f.clone()),
            PieceForm::ScaledFunction(t, f) => PieceForm::ScaledFunction(s * t, f.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            PieceForm::Closed(c) => c.is_zero(),
            PieceForm::Sampled(h) => h.values.iter().chain(&h.slopes).all(|&v| v == 0.0),
            PieceForm::ScaledFunction(s, _) if *s == 0.0 => true,
            _ => false,
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            PieceForm::Closed(c) => c.is_constant(),
            _ => self.is_zero(),
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, PieceForm::Sampled(_))
    }

    pub fn is_function(&self) -> bool {
        matches!(self, PieceForm::Function(_) | PieceForm::ScaledFunction(..))
    }
}

#[derive(Clone, Debug)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub form: PieceForm,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, form: PieceForm) -> Self {
        Self { lo, hi, form }
    }
}

/// Number of Hermite nodes used when a piece has to be resampled.
pub const RESAMPLE_NODES: usize = 4096;

/// Sampling density used for per-piece sign and extremum searches.
const SCAN_SAMPLES: usize = 1024;

#[derive(Clone, Debug)]
pub struct Coefficient {
    pieces: Vec<Piece>,
}

impl Coefficient {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidCoefficient("no pieces".into()));
        }
        for p in &pieces {
            if !(p.lo < p.hi) || !p.lo.is_finite() || !p.hi.is_finite() {
                return Err(Error::InvalidCoefficient(format!("bad piece range [{}, {}]", p.lo, p.hi)));
            }
        }
        for w in pieces.windows(2) {
            if (w[0].hi - w[1].lo).abs() > 1e-12 * (1.0 + w[0].hi.abs()) {
                return Err(Error::InvalidCoefficient(format!(
                    "pieces do not tile: gap between {} and {}",
                    w[0].hi, w[1].lo
                )));
            }
        }
        let mut pieces = pieces;
        for i in 1..pieces.len() {
            pieces[i].lo = pieces[i - 1].hi;
        }
        let c = Self { pieces };
        for p in &c.pieces {
            for x in [p.lo, 0.5 * (p.lo + p.hi), p.hi] {
                if !p.form.eval(x).is_finite() {
                    return Err(Error::InvalidCoefficient(format!("non-finite value at x = {x}")));
                }
            }
        }
        Ok(c)
    }

    pub fn constant(lo: f64, hi: f64, v: f64) -> Self {
        Self { pieces: vec![Piece::new(lo, hi, PieceForm::Closed(ClosedForm::constant(v)))] }
    }

    pub fn zero(lo: f64, hi: f64) -> Self {
        Self::constant(lo, hi, 0.0)
    }

    pub fn closed(lo: f64, hi: f64, form: ClosedForm) -> Self {
        Self { pieces: vec![Piece::new(lo, hi, PieceForm::Closed(form))] }
    }

    /// Piecewise constant function: `values[i]` on `[breaks[i], breaks[i+1]]`.
    pub fn step(breaks: &[f64], values: &[f64]) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::InvalidCoefficient("step needs len(breaks) = len(values) + 1".into()));
        }
        Self::new(
            values
                .iter()
                .enumerate()
                .map(|(i, &v)| Piece::new(breaks[i], breaks[i + 1], PieceForm::Closed(ClosedForm::constant(v))))
                .collect(),
        )
    }

    pub fn from_fn(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        Self::new(vec![Piece::new(lo, hi, PieceForm::Function(FnForm::new(f)))])
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.pieces[0].lo, self.pieces[self.pieces.len() - 1].hi)
    }

    /// All piece endpoints including the domain ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.pieces.iter().map(|p| p.lo).collect();
        out.push(self.domain().1);
        out
    }

    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.pieces[1..].iter().map(|p| p.lo).collect()
    }

    pub fn piece_index(&self, x: f64, side: Side) -> usize {
        let n = self.pieces.len();
        let idx = self.pieces.partition_point(|p| match side {
            Side::Right => p.hi <= x,
            Side::Left => p.hi < x,
        });
        idx.min(n - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_side(x, Side::Right)
    }

    pub fn eval_side(&self, x: f64, side: Side) -> f64 {
        self.pieces[self.piece_index(x, side)].form.eval(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x, Side::Right)].form.d1(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x, Side::Right)].form.d2(x)
    }

    /// Average of the two one-sided values; equals `eval` away from jumps.
    pub fn eval_mid(&self, x: f64) -> f64 {
        0.5 * (self.eval_side(x, Side::Left) + self.eval_side(x, Side::Right))
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(|p| {
            p.form.is_zero() || {
                // function-backed pieces: sample
                !matches!(p.form, PieceForm::Closed(_))
                    && (0..=64).all(|i| p.form.eval(p.lo + (p.hi - p.lo) * i as f64 / 64.0) == 0.0)
            }
        })
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.pieces.iter().all(|p| p.form.is_constant())
    }

    /// The common value if the coefficient is a single constant.
    pub fn constant_value(&self) -> Option<f64> {
        if !self.is_piecewise_constant() {
            return None;
        }
        let v = self.pieces[0].form.eval(self.pieces[0].lo);
        self.pieces.iter().all(|p| p.form.eval(p.lo) == v).then_some(v)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            pieces: self.pieces.iter().map(|p| Piece::new(p.lo, p.hi, p.form.scaled(s))).collect(),
        }
    }

    /// Splits pieces at the given points (points outside or on existing
    /// breakpoints are ignored).
    pub fn refined(&self, cuts: &[f64]) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len() + cuts.len());
        for p in &self.pieces {
            let tol = 1e-14 * (1.0 + p.hi.abs().max(p.lo.abs()));
            let mut inner: Vec<f64> = cuts.iter().copied().filter(|&c| c > p.lo + tol && c < p.hi - tol).collect();
            inner.sort_by(|a, b| a.partial_cmp(b).unwrap());
            inner.dedup();
            let mut lo = p.lo;
            for c in inner {
                pieces.push(Piece::new(lo, c, p.form.clone()));
                lo = c;
            }
            pieces.push(Piece::new(lo, p.hi, p.form.clone()));
        }
        Self { pieces }
    }

    /// `s * self + t * other`, on the common refinement of both partitions.
    /// Closed forms combine symbolically; anything else is resampled.
    pub fn lin_comb(s: f64, f: &Coefficient, t: f64, g: &Coefficient) -> Result<Coefficient> {
        let fr = f.refined(&g.breakpoints());
        let gr = g.refined(&f.breakpoints());
        if fr.pieces.len() != gr.pieces.len() {
            return Err(Error::InvalidCoefficient("coefficient domains differ".into()));
        }
        let mut pieces = Vec::with_capacity(fr.pieces.len());
        for (a, b) in fr.pieces.iter().zip(&gr.pieces) {
            let form = match (&a.form, &b.form) {
                (PieceForm::Closed(x), PieceForm::Closed(y)) => PieceForm::Closed(x.scaled(s).sum(&y.scaled(t))),
                (x, y) if y.is_zero() || t == 0.0 => x.scaled(s),
                (x, y) if x.is_zero() || s == 0.0 => y.scaled(t),
                (x, y) if x.is_function() || y.is_function() => {
                    let (x, y) = (x.clone(), y.clone());
                    PieceForm::Function(FnForm::new(move |z| s * x.eval(z) + t * y.eval(z)))
                }
                (x, y) => {
                    let (x, y) = (x.clone(), y.clone());
                    let (x1, y1) = (x.clone(), y.clone());
                    PieceForm::Sampled(Arc::new(HermiteSamples::from_fn(
                        a.lo,
                        a.hi,
                        RESAMPLE_NODES,
                        move |z| s * x.eval(z) + t * y.eval(z),
                        move |z| s * x1.d1(z) + t * y1.d1(z),
                    )))
                }
            };
            pieces.push(Piece::new(a.lo, a.hi, form));
        }
        Coefficient::new(pieces)
    }

    /// Minimum and maximum over the closure of each piece meeting `(lo, hi)`.
    /// One-sided limits at the ends of the window are not included, so this
    /// computes inf/sup over the open window.
    pub fn min_max_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for p in &self.pieces {
            let a = p.lo.max(lo);
            let b = p.hi.min(hi);
            if b <= a {
                continue;
            }
            let (pmn, pmx) = if p.form.is_constant() {
                let v = p.form.eval(0.5 * (a + b));
                (v, v)
            } else {
                let n = ((SCAN_SAMPLES as f64) * (b - a) / (p.hi - p.lo)).ceil() as usize;
                let n = n.clamp(16, SCAN_SAMPLES);
                (minimize_on(|x| p.form.eval(x), a, b, n).1, maximize_on(|x| p.form.eval(x), a, b, n).1)
            };
            mn = mn.min(pmn);
            mx = mx.max(pmx);
        }
        (mn, mx)
    }

    pub fn min_max(&self) -> (f64, f64) {
        let (a, b) = self.domain();
        self.min_max_on(a, b)
    }

    /// `sup |f|` over the domain.
    pub fn sup_abs(&self) -> f64 {
        let (mn, mx) = self.min_max();
        mn.abs().max(mx.abs())
    }

    pub fn sup_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let (mn, mx) = self.min_max_on(lo, hi);
        if mn > mx {
            return 0.0;
        }
        mn.abs().max(mx.abs())
    }

    /// Interior sign changes of each piece, located by scanning and bisection
    /// to `xtol`. Zeros of even multiplicity are not reported.
    pub fn sign_changes(&self, xtol: f64) -> Vec<f64> {
        let mut roots = Vec::new();
        for p in &self.pieces {
            if p.form.is_constant() {
                continue;
            }
            let n = SCAN_SAMPLES;
            let h = (p.hi - p.lo) / n as f64;
            let sign = |v: f64| v >= 0.0;
            let mut xa = p.lo;
            let mut fa = p.form.eval(xa);
            for i in 1..=n {
                let xb = if i == n { p.hi } else { p.lo + i as f64 * h };
                let fb = p.form.eval(xb);
                if sign(fa) != sign(fb) {
                    // bracket on the sign classification (>= 0 vs < 0)
                    let r = bisect(
                        |x| {
                            let v = p.form.eval(x);
                            if v >= 0.0 {
                                1.0
                            } else {
                                -1.0
                            }
                        },
                        xa,
                        xb,
                        xtol,
                    );
                    let r = refine_root(&p.form, r, xa, xb);
                    if r > p.lo && r < p.hi {
                        roots.push(r);
                    }
                }
                xa = xb;
                fa = fb;
            }
        }
        roots
    }

    /// Deterministic digest of the coefficient's values, used to tag derived
    /// quantities with the problem they came from.
    pub fn fingerprint(&self, state: &mut impl std::hash::Hasher) {
        for p in &self.pieces {
            state.write_u64(p.lo.to_bits());
            state.write_u64(p.hi.to_bits());
            for i in 0..=8 {
                let x = p.lo + (p.hi - p.lo) * i as f64 / 8.0;
                state.write_u64(p.form.eval(x).to_bits());
            }
        }
    }
}

fn refine_root(form: &PieceForm, r: f64, a: f64, b: f64) -> f64 {
    // A couple of Newton steps polish the bisection estimate when the
    // derivative is informative; fall back to the bracket otherwise.
    let mut x = r;
    for _ in 0..3 {
        let d = form.d1(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let nx = x - form.eval(x) / d;
        if !(nx > a && nx < b) {
            break;
        }
        x = nx;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine_weight() -> Coefficient {
        Coefficient::closed(
            0.0,
            1.0,
            ClosedForm::constant(0.0).with_term(Term { kind: TermKind::Sin, amplitude: 1.0, frequency: 3.0 * PI }),
        )
    }

    #[test]
    fn evaluates_polynomial_and_terms() {
        let f = ClosedForm::polynomial(&[1.0, 2.0, 3.0])
            .unwrap()
            .with_term(Term { kind: TermKind::Exp, amplitude: 2.0, frequency: 0.5 });
        let x: f64 = 0.7;
        assert!((f.eval(x) - (1.0 + 2.0 * x + 3.0 * x * x + 2.0 * (0.5 * x).exp())).abs() < 1e-14);
        assert!((f.d1(x) - (2.0 + 6.0 * x + (0.5 * x).exp())).abs() < 1e-14);
        assert!((f.d2(x) - (6.0 + 0.5 * (0.5 * x).exp())).abs() < 1e-14);
    }

    #[test]
    fn rejects_degree_six() {
        assert!(ClosedForm::polynomial(&[0.0; 7]).is_err());
    }

    #[test]
    fn breakpoint_sides() {
        let m = Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-1.0, 1.0, -1.0]).unwrap();
        assert_eq!(m.eval(0.4), 1.0);
        assert_eq!(m.eval_side(0.4, Side::Left), -1.0);
        assert_eq!(m.eval(1.0), -1.0);
        assert_eq!(m.eval(0.0), -1.0);
        assert_eq!(m.eval_mid(0.4), 0.0);
    }

    #[test]
    fn open_window_extrema_ignore_neighbouring_pieces() {
        let m = Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-3.0, 1.0, -3.0]).unwrap();
        let (mn, mx) = m.min_max_on(0.0, 0.4);
        assert_eq!((mn, mx), (-3.0, -3.0));
    }

    #[test]
    fn sine_sign_changes() {
        let r = sine_weight().sign_changes(1e-13);
        assert_eq!(r.len(), 2);
        assert!((r[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lin_comb_symbolic_and_sampled() {
        let a = Coefficient::step(&[0.0, 0.5, 1.0], &[1.0, 2.0]).unwrap();
        let b = sine_weight();
        let c = Coefficient::lin_comb(2.0, &a, -1.0, &b).unwrap();
        for x in [0.1, 0.49, 0.5, 0.77] {
            assert!((c.eval(x) - (2.0 * a.eval(x) - b.eval(x))).abs() < 1e-14);
        }
        let f = Coefficient::from_fn(0.0, 1.0, |x| x.sqrt()).unwrap();
        let d = Coefficient::lin_comb(1.0, &f, 1.0, &b).unwrap();
        assert!((d.eval(0.3) - (0.3f64.sqrt() + b.eval(0.3))).abs() < 1e-9);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let h = HermiteSamples::from_fn(0.0, 2.0, 5, |x| x * x * x - x, |x| 3.0 * x * x - 1.0);
        for x in [0.0, 0.3, 1.1, 2.0] {
            assert!((h.eval(x) - (x * x * x - x)).abs() < 1e-13);
            assert!((h.d1(x) - (3.0 * x * x - 1.0)).abs() < 1e-12);
            assert!((h.d2(x) - 6.0 * x).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_detection() {
        assert_eq!(Coefficient::constant(0.0, 1.0, 2.0).constant_value(), Some(2.0));
        assert!(Coefficient::zero(0.0, 1.0).is_zero());
        assert!(!sine_weight().is_piecewise_constant());
    }
}
