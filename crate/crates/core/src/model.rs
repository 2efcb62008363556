//! Problem data for `-a u'' + b u' + c u = m u^p` on `(alpha, beta)` with zero
//! Dirichlet data, and normalization to unit leading coefficient.

use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coefficient::{Coefficient, HermiteSamples, Piece, PieceForm, RESAMPLE_NODES};
use crate::error::{Error, Result};

/// Open interval `(lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub alpha: f64,
    pub beta: f64,
    pub a: Coefficient,
    pub b: Coefficient,
    pub c: Coefficient,
    pub m: Coefficient,
    pub p: f64,
    /// Sampled lower bound of `a`.
    pub ellipticity: f64,
}

impl Problem {
    pub fn new(alpha: f64, beta: f64, a: Coefficient, b: Coefficient, c: Coefficient, m: Coefficient, p: f64) -> Result<Self> {
        if !(alpha < beta) {
            return Err(Error::InvalidProblem(format!("alpha = {alpha} must be below beta = {beta}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ExponentOutOfRange(p));
        }
        for (name, coef) in [("a", &a), ("b", &b), ("c", &c), ("m", &m)] {
            let (lo, hi) = coef.domain();
            let tol = 1e-12 * (1.0 + alpha.abs().max(beta.abs()));
            if (lo - alpha).abs() > tol || (hi - beta).abs() > tol {
                return Err(Error::InvalidProblem(format!(
                    "coefficient {name} is defined on [{lo}, {hi}], expected [{alpha}, {beta}]"
                )));
            }
        }
        let ellipticity = a.min_max().0;
        if !(ellipticity > 0.0) {
            return Err(Error::NotElliptic { floor: ellipticity });
        }
        let cmin = c.min_max().0;
        if cmin < 0.0 {
            return Err(Error::InvalidProblem(format!("c must be nonnegative (min {cmin})")));
        }
        Ok(Self { alpha, beta, a, b, c, m, p, ellipticity })
    }

    /// `-u'' + b u' + c u = m u^p`.
    pub fn with_unit_leading(alpha: f64, beta: f64, b: Coefficient, c: Coefficient, m: Coefficient, p: f64) -> Result<Self> {
        Self::new(alpha, beta, Coefficient::constant(alpha, beta, 1.0), b, c, m, p)
    }

    /// Laplacian plus zero-order term: `b = 0`, `c` constant.
    pub fn simple(alpha: f64, beta: f64, c: f64, m: Coefficient, p: f64) -> Result<Self> {
        Self::with_unit_leading(
            alpha,
            beta,
            Coefficient::zero(alpha, beta),
            Coefficient::constant(alpha, beta, c),
            m,
            p,
        )
    }

    pub fn domain(&self) -> Interval {
        Interval::new(self.alpha, self.beta)
    }

    pub fn with_weight(&self, m: Coefficient) -> Self {
        Self { m, ..self.clone() }
    }

    pub fn with_c(&self, c: Coefficient) -> Self {
        Self { c, ..self.clone() }
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::ExponentOutOfRange(p));
        }
        Ok(Self { p, ..self.clone() })
    }

    /// Same problem with weight `tau * m`.
    pub fn scaled_weight(&self, tau: f64) -> Self {
        self.with_weight(self.m.scaled(tau))
    }

    pub fn has_unit_leading(&self) -> bool {
        self.a.constant_value() == Some(1.0)
    }

    /// Hash of all problem data.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        h.write_u64(self.alpha.to_bits());
        h.write_u64(self.beta.to_bits());
        h.write_u64(self.p.to_bits());
        for c in [&self.a, &self.b, &self.c, &self.m] {
            c.fingerprint(&mut h);
        }
        h.finish()
    }
}

/// Divides the equation by `a`, producing an equivalent problem with unit
/// leading coefficient. Piecewise-constant `a` is divided out symbolically;
/// otherwise each quotient is resampled onto cubic Hermite pieces with exact
/// quotient-rule slopes.
pub fn normalize(problem: &Problem) -> Result<Problem> {
    if !(problem.ellipticity > 0.0) {
        return Err(Error::NotElliptic { floor: problem.ellipticity });
    }
    if problem.has_unit_leading() {
        return Ok(problem.clone());
    }
    let a = &problem.a;
    let divide = |coef: &Coefficient| -> Result<Coefficient> {
        let refined = coef.refined(&a.breakpoints());
        let mut pieces = Vec::with_capacity(refined.pieces().len());
        for piece in refined.pieces() {
            let mid = 0.5 * (piece.lo + piece.hi);
            let apiece = &a.pieces()[a.piece_index(mid, crate::coefficient::Side::Right)].form;
            let form = if apiece.is_constant() {
                piece.form.scaled(1.0 / apiece.eval(mid))
            } else if piece.form.is_zero() {
                piece.form.clone()
            } else {
                let (f, fa) = (piece.form.clone(), apiece.clone());
                let (g, ga) = (piece.form.clone(), apiece.clone());
                PieceForm::Sampled(Arc::new(HermiteSamples::from_fn(
                    piece.lo,
                    piece.hi,
                    RESAMPLE_NODES,
                    move |x| f.eval(x) / fa.eval(x),
                    move |x| {
                        let av = ga.eval(x);
                        (g.d1(x) * av - g.eval(x) * ga.d1(x)) / (av * av)
                    },
                )))
            };
            pieces.push(Piece::new(piece.lo, piece.hi, form));
        }
        Coefficient::new(pieces)
    };
    Problem::new(
        problem.alpha,
        problem.beta,
        Coefficient::constant(problem.alpha, problem.beta, 1.0),
        divide(&problem.b)?,
        divide(&problem.c)?,
        divide(&problem.m)?,
        problem.p,
    )
}
