//! Bracketing the critical exponent: the set of `p` with a positive
//! solution is an interval reaching up to 1, so certified verdicts at probe
//! exponents pin its left end between the largest `NotExists` and the
//! smallest `Exists`.

use serde::Serialize;

use crate::analysis::Analysis;
use crate::certify::{certify_analysis, ConditionName, Verdict};
use crate::error::Result;
use crate::model::Problem;

#[derive(Clone, Debug, Serialize)]
pub struct Probe {
    pub p: f64,
    pub verdict: Verdict,
    /// Deciding condition, if any.
    pub condition: Option<ConditionName>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PstarResult {
    /// Largest probe certified `NotExists`; `None` when no probe was.
    pub lower: Option<f64>,
    /// Smallest probe certified `Exists`; `None` leaves the bracket open.
    pub upper: Option<f64>,
    /// No probe admits a solution and every one is certified `NotExists`.
    pub empty: bool,
    pub probes: Vec<Probe>,
}

impl PstarResult {
    /// `upper - lower`, with a missing lower end read as 0.
    pub fn width(&self) -> Option<f64> {
        self.upper.map(|u| u - self.lower.unwrap_or(0.0))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PstarOptions {
    pub tol_p: f64,
    pub max_bisections: usize,
    /// Probes closest to 1 are `1 - 2^{-k}` up to this `k`.
    pub max_power: u32,
}

impl Default for PstarOptions {
    fn default() -> Self {
        Self { tol_p: 1e-3, max_bisections: 40, max_power: 10 }
    }
}

struct Prober<'a> {
    an: &'a Analysis,
    probes: Vec<Probe>,
}

impl Prober<'_> {
    fn probe(&mut self, p: f64) -> Result<Verdict> {
        if let Some(pr) = self.probes.iter().find(|x| x.p == p) {
            return Ok(pr.verdict);
        }
        let cert = certify_analysis(&self.an.with_p(p)?);
        let condition = match cert.verdict {
            Verdict::Exists => cert.witness.as_ref().map(|w| w.condition),
            Verdict::NotExists => cert.reports.iter().find(|r| r.name.is_necessary() && r.decisively_fails()).map(|r| r.name),
            Verdict::Inconclusive => None,
        };
        self.probes.push(Probe { p, verdict: cert.verdict, condition });
        Ok(cert.verdict)
    }

    /// Bisection keeping `good(hi)` and `!good(lo)`; returns the final pair.
    fn bisect(&mut self, mut lo: f64, mut hi: f64, good: impl Fn(Verdict) -> bool, tol: f64, steps: usize) -> Result<(f64, f64)> {
        for _ in 0..steps {
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if good(self.probe(mid)?) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((lo, hi))
    }
}

pub fn pstar_search(problem: &Problem, opts: &PstarOptions) -> Result<PstarResult> {
    let an = Analysis::with_defaults(problem)?;
    pstar_search_analysis(&an, opts)
}

pub fn pstar_search_analysis(an: &Analysis, opts: &PstarOptions) -> Result<PstarResult> {
    let mut pr = Prober { an, probes: Vec::new() };
    let mut grid: Vec<f64> = (1..16).map(|j| j as f64 / 16.0).collect();
    grid.extend((5..=opts.max_power).map(|k| 1.0 - 0.5f64.powi(k as i32)));
    for &p in &grid {
        pr.probe(p)?;
    }
    let sorted = |pr: &Prober| {
        let mut v = pr.probes.clone();
        v.sort_by(|a, b| a.p.total_cmp(&b.p));
        v
    };
    let v = sorted(&pr);
    if v.iter().all(|x| x.verdict == Verdict::NotExists) {
        return Ok(PstarResult { lower: None, upper: None, empty: true, probes: v });
    }

    // smallest Exists, refined downwards while a non-Exists probe sits below it
    let mut upper = v.iter().find(|x| x.verdict == Verdict::Exists).map(|x| x.p);
    if let Some(e) = upper {
        if let Some(below) = v.iter().filter(|x| x.p < e).map(|x| x.p).reduce(f64::max) {
            let (_, hi) = pr.bisect(below, e, |x| x == Verdict::Exists, opts.tol_p, opts.max_bisections)?;
            upper = Some(hi);
        }
    }

    // largest NotExists below the Exists edge, refined upwards
    let v = sorted(&pr);
    let cap = upper.unwrap_or(1.0);
    let mut lower = v.iter().filter(|x| x.p < cap && x.verdict == Verdict::NotExists).map(|x| x.p).reduce(f64::max);
    if let Some(n) = lower {
        let above = v.iter().filter(|x| x.p > n).map(|x| x.p).fold(cap, f64::min);
        let (lo, _) = pr.bisect(n, above, |x| x != Verdict::NotExists, opts.tol_p, opts.max_bisections)?;
        lower = Some(lo);
    }
    Ok(PstarResult { lower, upper, empty: false, probes: sorted(&pr) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::{negative_problem, positive_problem, step_problem};

    #[test]
    fn kappa_hundred_bracket() {
        let r = pstar_search(&step_problem(100.0, 0.0, 0.5).unwrap(), &PstarOptions::default()).unwrap();
        let lo = r.lower.unwrap();
        // nonexistence holds exactly below the root of 40 (1-p)^2 = 2 (1+p)
        let root = (82.0 - (82.0f64 * 82.0 - 4.0 * 40.0 * 38.0).sqrt()) / 80.0;
        assert!(lo >= 0.70 && lo <= root && root - lo < 2e-3, "{lo} {root}");
        let hi = r.upper.unwrap();
        assert!(hi > lo && hi < 1.0);
    }

    #[test]
    fn sign_definite_weights() {
        let r = pstar_search(&positive_problem(0.5).unwrap(), &PstarOptions::default()).unwrap();
        assert_eq!(r.lower, None);
        assert_eq!(r.upper, Some(1.0 / 16.0));
        assert!(r.probes.iter().all(|x| x.verdict == Verdict::Exists));
        let r = pstar_search(&negative_problem(0.5).unwrap(), &PstarOptions::default()).unwrap();
        assert!(r.empty && r.upper.is_none());
    }
}
