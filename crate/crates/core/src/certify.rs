//! Sufficient and necessary conditions for a positive solution, and the
//! verdict built from them.

use std::fmt;

use serde::Serialize;

use crate::analysis::{Analysis, AnalysisOptions};
use crate::error::Result;
use crate::model::{Interval, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionName {
    TrivialMplus,
    Nec,
    NecC,
    Seno,
    Expo,
    Lap,
    Rem,
    I1,
    I2,
    Puf,
}

impl ConditionName {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionName::TrivialMplus => "trivial_mplus",
            ConditionName::Nec => "nec",
            ConditionName::NecC => "nec_c",
            ConditionName::Seno => "seno",
            ConditionName::Expo => "expo",
            ConditionName::Lap => "lap",
            ConditionName::Rem => "rem",
            ConditionName::I1 => "i1",
            ConditionName::I2 => "i2",
            ConditionName::Puf => "puf",
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, ConditionName::I2 | ConditionName::Puf)
    }

    pub fn is_necessary(self) -> bool {
        matches!(self, ConditionName::TrivialMplus | ConditionName::Nec | ConditionName::NecC)
    }

    /// Sufficient conditions on a fixed interval, in evaluation order.
    pub const INTERVAL_VARIANTS: [ConditionName; 6] =
        [ConditionName::Seno, ConditionName::Expo, ConditionName::Lap, ConditionName::Rem, ConditionName::I1, ConditionName::I2];
}

impl fmt::Display for ConditionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Applicability {
    Applied,
    Skipped(String),
}

/// One evaluated inequality `lhs <= rhs` (or `<` for strict conditions).
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub name: ConditionName,
    pub interval: Option<Interval>,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub margin: f64,
    /// Admissible `tau`; `f64::INFINITY` marks an unbounded window.
    pub tau_window: Option<(f64, f64)>,
    pub quadrature_error: f64,
    pub applicability: Applicability,
}

impl ConditionReport {
    pub fn skipped(name: ConditionName, interval: Option<Interval>, reason: impl Into<String>) -> Self {
        Self {
            name,
            interval,
            lhs: f64::NAN,
            rhs: f64::NAN,
            holds: false,
            margin: f64::NAN,
            tau_window: None,
            quadrature_error: 0.0,
            applicability: Applicability::Skipped(reason.into()),
        }
    }

    fn evaluated(name: ConditionName, interval: Option<Interval>, lhs: f64, rhs: f64, error: f64) -> Self {
        let margin = rhs - lhs;
        let holds = if name.is_strict() { lhs < rhs - error } else { lhs <= rhs };
        Self { name, interval, lhs, rhs, holds, margin, tau_window: None, quadrature_error: error, applicability: Applicability::Applied }
    }

    pub fn applied(&self) -> bool {
        self.applicability == Applicability::Applied
    }

    /// Holds with a margin larger than the numerical error.
    pub fn decisively_holds(&self) -> bool {
        self.applied() && self.holds && self.margin > self.quadrature_error
    }

    /// Fails with a margin larger than the numerical error.
    pub fn decisively_fails(&self) -> bool {
        self.applied() && !self.holds && -self.margin > self.quadrature_error
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Exists,
    NotExists,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Exists => "exists",
            Verdict::NotExists => "not_exists",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sinh,
    Cosh,
    I1,
    I2,
}

/// Everything the construction needs to rebuild the subsolution behind an
/// `Exists` verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub condition: ConditionName,
    pub method: Method,
    pub interval: Interval,
    pub tau: f64,
    /// The sup norm of `c` entering the sinh and cosh formulas.
    pub c_norm: f64,
    /// Built for the modified weight `m / (K_b ||m^+||_2) - c` with the
    /// zero-order term dropped.
    pub modified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    pub reason: String,
    pub reports: Vec<ConditionReport>,
    pub witness: Option<Witness>,
    pub interval: Option<Interval>,
}

impl Certificate {
    pub fn report(&self, name: ConditionName) -> Option<&ConditionReport> {
        self.reports.iter().find(|r| r.name == name)
    }
}

fn tau_choice(name: ConditionName, window: (f64, f64)) -> f64 {
    if name.is_strict() {
        if window.1.is_finite() {
            (window.0 * window.1).sqrt()
        } else {
            2.0 * window.0
        }
    } else {
        window.0
    }
}

fn method_of(name: ConditionName) -> Method {
    match name {
        ConditionName::Seno | ConditionName::Rem => Method::Sinh,
        ConditionName::Expo => Method::Cosh,
        ConditionName::Lap | ConditionName::I1 => Method::I1,
        _ => Method::I2,
    }
}

fn eigen_for(an: &Analysis, iv: Interval) -> std::result::Result<(f64, f64), String> {
    match an.candidate(iv) {
        Some(c) => c.eigen.as_ref().map(|e| (e.lambda1, e.error)).map_err(|e| e.clone()),
        None => Err(format!("({}, {}) is not a candidate interval", iv.lo, iv.hi)),
    }
}

fn upper(lhs: f64) -> f64 {
    if lhs > 0.0 {
        1.0 / lhs
    } else {
        f64::INFINITY
    }
}

/// Conditions of the sinh/cosh family, which require `b = 0`.
pub fn check_hyperbolic(an: &Analysis, iv: Interval, variant: ConditionName) -> ConditionReport {
    let name = variant;
    if !an.b_zero() {
        return ConditionReport::skipped(name, Some(iv), "requires b = 0");
    }
    let (lambda, lerr) = match eigen_for(an, iv) {
        Ok(v) => v,
        Err(e) => return ConditionReport::skipped(name, Some(iv), e),
    };
    let p = an.p();
    let cp = an.cp();
    let gamma = crate::constants::gamma(&an.problem, iv);
    let mm = an.norms.m_minus_sup;
    let c = an.norms.c_sup;
    let rhs_err = lerr / (lambda * lambda);
    let (lhs, floor) = match variant {
        ConditionName::Seno => {
            if c == 0.0 {
                return ConditionReport::skipped(name, Some(iv), "division by ||c||_inf; see lap");
            }
            (mm / c * (gamma * (c / cp).sqrt()).sinh().powi(2), lambda)
        }
        ConditionName::Expo => {
            if c == 0.0 {
                return ConditionReport::skipped(name, Some(iv), "division by ||c||_inf; see lap");
            }
            (mm / c * ((gamma * ((1.0 - p) * c).sqrt()).cosh() - 1.0), lambda)
        }
        ConditionName::Lap => {
            if c != 0.0 {
                return ConditionReport::skipped(name, Some(iv), "limit form valid only for c = 0; see seno");
            }
            (gamma * gamma * mm / cp, lambda)
        }
        ConditionName::Rem => {
            let cm = an.norms.c_sup_minus;
            if cm == 0.0 {
                return ConditionReport::skipped(name, Some(iv), "division by ||c||_inf(M-)");
            }
            // c <= tau m^+ on M^+ forces tau above sup c/m^+
            let floor = lambda.max(an.sup_c_over_plus());
            (mm / cm * (gamma * (cm / cp).sqrt()).sinh().powi(2), floor)
        }
        _ => unreachable!("not a sinh/cosh condition"),
    };
    let rhs = 1.0 / floor;
    let mut r = ConditionReport::evaluated(name, Some(iv), lhs, rhs, if floor == lambda { rhs_err } else { 0.0 });
    if r.holds {
        r.tau_window = Some((floor, upper(lhs)));
    }
    r
}

/// Conditions built on the integrating factors.
pub fn check_integral(an: &Analysis, iv: Interval, variant: ConditionName) -> ConditionReport {
    let name = variant;
    match variant {
        ConditionName::I1 => {
            let (lambda, lerr) = match eigen_for(an, iv) {
                Ok(v) => v,
                Err(e) => return ConditionReport::skipped(name, Some(iv), e),
            };
            let gb = an.tables.gamma_b(iv) * an.norms.bunder_sup;
            let g2 = gb * gb;
            let den = an.cp() - an.norms.c_sup * g2;
            if den <= 0.0 {
                return ConditionReport::skipped(name, Some(iv), "denominator nonpositive");
            }
            let lhs = g2 * an.norms.m_minus_sup / den;
            let rel = 2.0 * an.tables.int_bbar.quad_error() / an.tables.gamma_b(iv).max(f64::MIN_POSITIVE);
            let err = lerr / (lambda * lambda) + lhs * rel * (1.0 + an.norms.c_sup * g2 / den);
            let mut r = ConditionReport::evaluated(name, Some(iv), lhs, 1.0 / lambda, err);
            if r.holds {
                r.tau_window = Some((lambda, upper(lhs)));
            }
            r
        }
        ConditionName::I2 => {
            if !an.c_zero() {
                return ConditionReport::skipped(name, Some(iv), "requires c = 0");
            }
            i2_report(an, iv, ConditionName::I2)
        }
        ConditionName::Puf => check_puf(an),
        _ => unreachable!("not an integrating-factor condition"),
    }
}

fn i2_report(an: &Analysis, iv: Interval, name: ConditionName) -> ConditionReport {
    let (lambda, lerr) = match eigen_for(an, iv) {
        Ok(v) => v,
        Err(e) => return ConditionReport::skipped(name, Some(iv), e),
    };
    let (sm, sm_err) = match an.tables.script_m(iv, an.options.quad_tol) {
        Ok(v) => v,
        Err(e) => return ConditionReport::skipped(name, Some(iv), e.to_string()),
    };
    let q = 1.0 - an.p();
    let lhs = q * sm;
    let err = lerr / (lambda * lambda) + q * sm_err;
    let mut r = ConditionReport::evaluated(name, Some(iv), lhs, 1.0 / lambda, err);
    if r.holds {
        r.tau_window = Some((lambda, upper(lhs)));
    }
    r
}

/// The integrating-factor condition applied to `m / (K_b ||m^+||_2) - c`
/// with the zero-order term dropped; evaluated on the modified weight's
/// candidate intervals, first success by ascending eigenvalue.
pub fn check_puf(an: &Analysis) -> ConditionReport {
    let name = ConditionName::Puf;
    let sub = match an.modified_analysis() {
        Ok(s) => s,
        Err(e) => return ConditionReport::skipped(name, None, e),
    };
    if sub.candidates.is_empty() {
        return ConditionReport::skipped(name, None, "modified weight has no positivity interval");
    }
    let mut best: Option<ConditionReport> = None;
    for c in &sub.candidates {
        let r = i2_report(&sub, c.interval, name);
        if r.decisively_holds() {
            return r;
        }
        let better = match &best {
            None => true,
            Some(b) => !b.applied() || (r.applied() && r.margin > b.margin),
        };
        if better {
            best = Some(r);
        }
    }
    best.unwrap()
}

/// Necessary conditions: the ball barrier against the a priori integral,
/// and against `sup m^+/c` when `c > 0` on `M^+`.
pub fn check_necessary(an: &Analysis) -> Vec<ConditionReport> {
    let (lhs, lhs_err) = ball_supremum(an);
    let cp = an.cp();
    let mut out = Vec::with_capacity(2);
    let rhs = cp * an.j_plus.value;
    let err = cp * an.j_plus.error + lhs_err;
    out.push(ConditionReport::evaluated(ConditionName::Nec, None, lhs, rhs, err));
    if let Some(r) = an.sup_plus_over_c {
        out.push(ConditionReport::evaluated(ConditionName::NecC, None, lhs, cp * r, lhs_err));
    }
    out
}

/// Number of centres and radii scanned per negativity interval.
pub const BALL_CENTERS: usize = 256;
pub const BALL_RADII: usize = 128;

/// Lower bound for the supremum over balls inside `{m <= 0}` of
/// `[gamma_{b,R} / ||Bbar||_{L^inf(I_R)}]^2 inf_{I_R} m^-`.
fn ball_supremum(an: &Analysis) -> (f64, f64) {
    let t = &an.tables;
    let zero_drift = t.factor.zero_drift();
    let mut best = (0.0, None::<(f64, f64)>);
    for iv in &an.decomp.minus_region {
        let (l, r) = (iv.lo, iv.hi);
        for j in 1..BALL_CENTERS {
            let x0 = l + (r - l) * j as f64 / BALL_CENTERS as f64;
            let rmax = (x0 - l).min(r - x0);
            for i in 1..=BALL_RADII {
                let rad = rmax * i as f64 / BALL_RADII as f64;
                let (a, b) = (x0 - rad, x0 + rad);
                let inf_m = an.decomp.m_minus.min_max_on(a, b).0;
                if inf_m <= 0.0 {
                    continue;
                }
                let (gb, bsup) = if zero_drift {
                    (rad, 1.0)
                } else {
                    let right = t.int_bbar.between(x0, b);
                    let left = t.int_bbar.between(a, x0);
                    // endpoint values bound the sup from below; polished for the winner
                    let sup = t.bbar(a).max(t.bbar(b)).max(t.bbar(x0));
                    (right.min(left), sup)
                };
                let v = (gb / bsup).powi(2) * inf_m;
                if v > best.0 {
                    best = (v, Some((x0, rad)));
                }
            }
        }
    }
    let Some((x0, rad)) = best.1 else { return (0.0, 0.0) };
    if zero_drift {
        return best_value_exact(an, x0, rad, 1.0);
    }
    let bsup = t.factor.bbar_sup(x0 - rad, x0 + rad);
    best_value_exact(an, x0, rad, bsup)
}

fn best_value_exact(an: &Analysis, x0: f64, rad: f64, bsup: f64) -> (f64, f64) {
    let t = &an.tables;
    let inf_m = an.decomp.m_minus.min_max_on(x0 - rad, x0 + rad).0;
    let gb = if t.factor.zero_drift() { rad } else { t.int_bbar.between(x0, x0 + rad).min(t.int_bbar.between(x0 - rad, x0)) };
    let v = (gb / bsup).powi(2) * inf_m;
    let err = if t.factor.zero_drift() { 0.0 } else { 2.0 * v * t.int_bbar.quad_error() / gb };
    (v, err)
}

fn trivial_mplus(an: &Analysis) -> ConditionReport {
    let mut r = ConditionReport::evaluated(ConditionName::TrivialMplus, None, 0.0, an.norms.m_plus_sup, 0.0);
    r.holds = !an.plus_is_zero();
    if !r.holds {
        r.margin = 0.0;
    }
    r
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct CertifyOptions {
    pub analysis: AnalysisOptions,
}

pub fn certify(problem: &Problem) -> Result<Certificate> {
    certify_with(problem, &CertifyOptions::default())
}

pub fn certify_with(problem: &Problem, opts: &CertifyOptions) -> Result<Certificate> {
    let an = Analysis::new(problem, opts.analysis)?;
    Ok(certify_analysis(&an))
}

/// Verdict from precomputed analysis data.
pub fn certify_analysis(an: &Analysis) -> Certificate {
    let trivial = trivial_mplus(an);
    if !trivial.holds {
        return Certificate {
            verdict: Verdict::NotExists,
            reason: "trivial_mplus: m^+ vanishes identically; no solution by the maximum principle".into(),
            reports: vec![trivial],
            witness: None,
            interval: None,
        };
    }
    let mut reports = vec![trivial];
    reports.extend(check_necessary(an));
    for cand in &an.candidates {
        for v in ConditionName::INTERVAL_VARIANTS {
            let r = match v {
                ConditionName::I1 | ConditionName::I2 => check_integral(an, cand.interval, v),
                _ => check_hyperbolic(an, cand.interval, v),
            };
            reports.push(r);
        }
    }
    reports.push(check_puf(an));

    let proving = reports.iter().find(|r| !r.name.is_necessary() && r.decisively_holds());
    let refuting = reports.iter().find(|r| r.name.is_necessary() && r.decisively_fails());
    let (verdict, reason, witness, interval) = match (proving, refuting) {
        (Some(p), Some(n)) => (
            Verdict::Inconclusive,
            format!("{} holds but {} fails; numerical data are inconsistent", p.name, n.name),
            None,
            None,
        ),
        (Some(p), None) => {
            let window = p.tau_window.expect("holding report carries a window");
            let iv = p.interval.expect("sufficient conditions carry an interval");
            let c_norm = if p.name == ConditionName::Rem { an.norms.c_sup_minus } else { an.norms.c_sup };
            let w = Witness {
                condition: p.name,
                method: method_of(p.name),
                interval: iv,
                tau: tau_choice(p.name, window),
                c_norm,
                modified: p.name == ConditionName::Puf,
            };
            (Verdict::Exists, format!("{} holds on ({}, {})", p.name, iv.lo, iv.hi), Some(w), Some(iv))
        }
        (None, Some(n)) => (Verdict::NotExists, format!("necessary condition {} fails", n.name), None, None),
        (None, None) => (Verdict::Inconclusive, "no condition is decisive".into(), None, None),
    };
    Certificate { verdict, reason, reports, witness, interval }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;
    use std::f64::consts::PI;

    fn step(eta: f64, c: f64, p: f64) -> Problem {
        Problem::simple(0.0, 1.0, c, Coefficient::step(&[0.0, 0.4, 0.6, 1.0], &[-eta, 1.0, -eta]).unwrap(), p).unwrap()
    }

    fn report(eta: f64, c: f64, p: f64, name: ConditionName) -> ConditionReport {
        let an = Analysis::with_defaults(&step(eta, c, p)).unwrap();
        let iv = Interval::new(0.4, 0.6);
        match name {
            ConditionName::I1 | ConditionName::I2 | ConditionName::Puf => check_integral(&an, iv, name),
            _ => check_hyperbolic(&an, iv, name),
        }
    }

    #[test]
    fn seno_expo_slopes() {
        let s = report(1.0, 1.0, 0.5, ConditionName::Seno);
        assert!((s.lhs - 0.030301).abs() < 1e-6, "{}", s.lhs);
        assert!((s.rhs - 1.0 / (25.0 * PI * PI + 1.0)).abs() < 1e-12);
        let e = report(1.0, 1.0, 0.5, ConditionName::Expo);
        assert!((e.lhs - (0.18f64.sqrt().cosh() - 1.0)).abs() < 1e-14, "{}", e.lhs);
        let i = report(1.0, 1.0, 0.5, ConditionName::I1);
        assert!((i.lhs - 0.36 / 11.64).abs() < 1e-10);
    }

    #[test]
    fn lap_and_i2_need_zero_c() {
        let l = report(1.0, 0.0, 0.5, ConditionName::Lap);
        assert!((l.lhs - 0.03).abs() < 1e-14);
        let s = report(1.0, 0.0, 0.5, ConditionName::Seno);
        assert!(!s.applied());
        let i2 = report(1.0, 0.0, 0.5, ConditionName::I2);
        assert!((i2.lhs - 0.08).abs() < 1e-10);
        assert!(!report(1.0, 1.0, 0.5, ConditionName::I2).applied());
        assert!(!report(1.0, 1.0, 0.5, ConditionName::Lap).applied());
    }

    #[test]
    fn puf_matches_i2_for_zero_c() {
        for eta in [0.04, 0.06] {
            let a = report(eta, 0.0, 0.5, ConditionName::I2);
            let b = report(eta, 0.0, 0.5, ConditionName::Puf);
            assert_eq!(a.holds, b.holds);
            assert!((a.lhs / a.rhs - b.lhs / b.rhs).abs() < 1e-8);
        }
    }

    #[test]
    fn necessary_ball_value() {
        let an = Analysis::with_defaults(&step(100.0, 0.0, 0.3)).unwrap();
        let r = check_necessary(&an);
        assert!((r[0].lhs - 4.0).abs() < 1e-12);
        assert!((r[0].rhs - 0.1 * 2.6 / 0.49).abs() < 1e-9);
        assert!(r[0].decisively_fails());
    }

    #[test]
    fn certify_examples() {
        let c = certify(&step(0.1, 1.0, 0.5)).unwrap();
        assert_eq!(c.verdict, Verdict::Exists);
        let w = c.witness.unwrap();
        assert_eq!(w.condition, ConditionName::Seno);
        assert!((w.tau - (25.0 * PI * PI + 1.0)).abs() < 1e-6);
        let c = certify(&step(100.0, 0.0, 0.3)).unwrap();
        assert_eq!(c.verdict, Verdict::NotExists);
        let neg = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, -1.0), 0.5).unwrap();
        let c = certify(&neg).unwrap();
        assert_eq!(c.verdict, Verdict::NotExists);
        assert_eq!(c.reports[0].name, ConditionName::TrivialMplus);
    }

    #[test]
    fn positive_weight_exists() {
        let p = Problem::simple(0.0, 1.0, 0.0, Coefficient::constant(0.0, 1.0, 1.0), 0.5).unwrap();
        let c = certify(&p).unwrap();
        assert_eq!(c.verdict, Verdict::Exists);
        let nec = c.report(ConditionName::Nec).unwrap();
        assert_eq!(nec.lhs, 0.0);
        assert!(nec.holds);
    }
}
