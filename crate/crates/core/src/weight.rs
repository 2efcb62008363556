//! Splitting the weight into positive and negative parts.

use crate::coefficient::{ClosedForm, Coefficient, Piece, PieceForm};
use crate::error::{Error, Result};
use crate::model::Interval;

/// Sign changes are located to this absolute tolerance.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct WeightDecomposition {
    pub m_plus: Coefficient,
    pub m_minus: Coefficient,
    /// Maximal intervals where `m >= 0` (zeros belong here).
    pub plus_region: Vec<Interval>,
    /// Maximal intervals where `m < 0`.
    pub minus_region: Vec<Interval>,
    /// Parts of `plus_region` on which `m` is not identically zero.
    positive_parts: Vec<bool>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Class {
    Plus,
    Minus,
}

pub fn decompose_weight(m: &Coefficient) -> WeightDecomposition {
    let mut cuts = m.interior_breakpoints();
    cuts.extend(m.sign_changes(SIGN_TOL / 4.0));
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < SIGN_TOL / 8.0);
    let refined = m.refined(&cuts);

    let mut plus = Vec::with_capacity(refined.pieces().len());
    let mut minus = Vec::with_capacity(refined.pieces().len());
    let mut segments: Vec<(Interval, Class, bool)> = Vec::new();
    for piece in refined.pieces() {
        let mid = 0.5 * (piece.lo + piece.hi);
        let v = piece.form.eval(mid);
        let class = if v >= 0.0 { Class::Plus } else { Class::Minus };
        let zero = PieceForm::Closed(ClosedForm::constant(0.0));
        let positive = class == Class::Plus && !piece.form.is_zero() && {
            let (_, mx) = refined_max(&piece.form, piece.lo, piece.hi);
            mx > 0.0
        };
        match class {
            Class::Plus => {
                plus.push(Piece::new(piece.lo, piece.hi, piece.form.clone()));
                minus.push(Piece::new(piece.lo, piece.hi, zero));
            }
            Class::Minus => {
                plus.push(Piece::new(piece.lo, piece.hi, zero));
                minus.push(Piece::new(piece.lo, piece.hi, piece.form.scaled(-1.0)));
            }
        }
        match segments.last_mut() {
            Some((iv, c, pos)) if *c == class => {
                iv.hi = piece.hi;
                *pos |= positive;
            }
            _ => segments.push((Interval::new(piece.lo, piece.hi), class, positive)),
        }
    }

    let mut plus_region = Vec::new();
    let mut minus_region = Vec::new();
    let mut positive_parts = Vec::new();
    for (iv, class, pos) in segments {
        match class {
            Class::Plus => {
                plus_region.push(iv);
                positive_parts.push(pos);
            }
            Class::Minus => minus_region.push(iv),
        }
    }
    WeightDecomposition {
        m_plus: Coefficient::new(plus).expect("refinement of a valid coefficient"),
        m_minus: Coefficient::new(minus).expect("refinement of a valid coefficient"),
        plus_region,
        minus_region,
        positive_parts,
    }
}

fn refined_max(form: &PieceForm, lo: f64, hi: f64) -> (f64, f64) {
    crate::numeric::maximize_on(|x| form.eval(x), lo, hi, 64)
}

impl WeightDecomposition {
    pub fn plus_is_zero(&self) -> bool {
        !self.positive_parts.iter().any(|&p| p)
    }

    pub fn minus_is_zero(&self) -> bool {
        self.minus_region.is_empty()
    }

    /// True when `c > 0` on every plus interval (sampled minimum).
    pub fn positive_on_plus(&self, c: &Coefficient) -> bool {
        !self.plus_region.is_empty() && self.plus_region.iter().all(|iv| c.min_max_on(iv.lo, iv.hi).0 > 0.0)
    }
}

/// Maximal open intervals on which `m >= 0` and `m` is not identically zero.
pub fn candidate_intervals(decomp: &WeightDecomposition) -> Result<Vec<Interval>> {
    let out: Vec<Interval> = decomp
        .plus_region
        .iter()
        .zip(&decomp.positive_parts)
        .filter(|(_, &pos)| pos)
        .map(|(iv, _)| *iv)
        .collect();
    if out.is_empty() {
        return Err(Error::NoPositivity);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::{Term, TermKind};
    use std::f64::consts::PI;

    fn step(eta: f64) -> Coefficient {
        Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-eta, 1.0, -eta]).unwrap()
    }

    #[test]
    fn positive_weight_has_empty_minus_region() {
        let d = decompose_weight(&Coefficient::constant(0.0, 1.0, 1.0));
        assert!(d.minus_region.is_empty());
        assert!(d.m_minus.is_zero());
        assert_eq!(candidate_intervals(&d).unwrap(), vec![Interval::new(0.0, 1.0)]);
    }

    #[test]
    fn step_weight_regions() {
        let d = decompose_weight(&step(1.0));
        assert_eq!(d.plus_region, vec![Interval::new(0.4, 0.6)]);
        assert_eq!(d.minus_region, vec![Interval::new(0.0, 0.4), Interval::new(0.6, 1.0)]);
        assert_eq!(candidate_intervals(&d).unwrap(), vec![Interval::new(0.4, 0.6)]);
    }

    #[test]
    fn sine_weight_candidates() {
        let m = Coefficient::closed(
            0.0,
            1.0,
            ClosedForm::constant(0.0).with_term(Term { kind: TermKind::Sin, amplitude: 1.0, frequency: 3.0 * PI }),
        );
        let d = decompose_weight(&m);
        let c = candidate_intervals(&d).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].lo, 0.0);
        assert!((c[0].hi - 1.0 / 3.0).abs() < 1e-12);
        assert!((c[1].lo - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(c[1].hi, 1.0);
    }

    #[test]
    fn negative_weight_has_no_candidate() {
        let d = decompose_weight(&Coefficient::constant(0.0, 1.0, -1.0));
        assert!(matches!(candidate_intervals(&d), Err(Error::NoPositivity)));
        assert!(d.plus_is_zero());
    }

    #[test]
    fn zero_piece_between_negatives_is_not_a_candidate() {
        let m = Coefficient::step(&[0.0, 0.3, 0.5, 0.7, 1.0], &[-1.0, 0.0, -1.0, 2.0]).unwrap();
        let d = decompose_weight(&m);
        assert_eq!(candidate_intervals(&d).unwrap(), vec![Interval::new(0.7, 1.0)]);
    }
}
