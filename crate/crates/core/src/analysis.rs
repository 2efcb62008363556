//! Per-problem data shared by the checkers and constructions: normalized
//! operator, weight split, cumulative tables, norms and principal
//! eigenvalues of every candidate interval.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::coefficient::{Coefficient, Side};
use crate::constants::{cp, sup_plus_over_c, Tables, DEFAULT_QUAD_TOL};
use crate::eigen::{principal_eigenpair_with, principal_eigenvalue_with, EigenOptions, EigenPair, EigenValue};
use crate::error::{Error, Result};
use crate::factors::DEFAULT_TABLE_NODES;
use crate::model::{normalize, Interval, Problem};
use crate::quadrature::{integrate, Quadrature};
use crate::weight::{candidate_intervals, decompose_weight, WeightDecomposition};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AnalysisOptions {
    pub quad_tol: f64,
    pub table_nodes: usize,
    pub eigen: EigenOptions,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self { quad_tol: DEFAULT_QUAD_TOL, table_nodes: DEFAULT_TABLE_NODES, eigen: EigenOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Norms {
    pub m_minus_sup: f64,
    pub m_plus_sup: f64,
    pub c_sup: f64,
    /// `||c||_{L^inf(M^-)}`.
    pub c_sup_minus: f64,
    pub bunder_sup: f64,
    pub m_plus_l2: f64,
}

#[derive(Clone, Debug)]
pub struct Candidate {
    pub interval: Interval,
    pub eigen: std::result::Result<EigenValue, String>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    /// Problem as given.
    pub original: Problem,
    /// Unit leading coefficient.
    pub problem: Problem,
    pub decomp: WeightDecomposition,
    pub tables: Tables,
    /// Candidate intervals ordered by ascending principal eigenvalue; failed
    /// eigensolves sort last.
    pub candidates: Vec<Candidate>,
    pub j_plus: Quadrature,
    pub sup_plus_over_c: Option<f64>,
    pub norms: Norms,
    pub options: AnalysisOptions,
    /// Analysis of the modified weight, built on first use and shared by
    /// clones; it does not depend on `p`.
    modified: Arc<OnceLock<std::result::Result<Arc<Analysis>, String>>>,
}

impl Analysis {
    pub fn new(problem: &Problem, options: AnalysisOptions) -> Result<Self> {
        let normalized = normalize(problem)?;
        let decomp = decompose_weight(&normalized.m);
        let tables = Tables::new(&normalized, &decomp, options.table_nodes);
        let j_plus = tables.apriori_integral(options.quad_tol)?;
        let sup_ratio = sup_plus_over_c(&normalized, &decomp);
        let mut breaks = decomp.m_plus.interior_breakpoints();
        breaks.extend(normalized.c.interior_breakpoints());
        let mp = decomp.m_plus.clone();
        let l2 = integrate(|x| mp.eval(x).powi(2), normalized.alpha, normalized.beta, &breaks, options.quad_tol)?;
        let c_sup_minus = decomp.minus_region.iter().map(|iv| normalized.c.sup_abs_on(iv.lo, iv.hi)).fold(0.0, f64::max);
        let norms = Norms {
            m_minus_sup: decomp.m_minus.sup_abs(),
            m_plus_sup: decomp.m_plus.sup_abs(),
            c_sup: normalized.c.sup_abs(),
            c_sup_minus,
            bunder_sup: tables.bunder_sup(),
            m_plus_l2: l2.value.max(0.0).sqrt(),
        };
        let mut candidates: Vec<Candidate> = match candidate_intervals(&decomp) {
            Ok(list) => list
                .into_iter()
                .map(|iv| Candidate {
                    interval: iv,
                    eigen: principal_eigenvalue_with(&normalized, &tables.factor, iv, &options.eigen).map_err(|e| e.to_string()),
                })
                .collect(),
            Err(Error::NoPositivity) => Vec::new(),
            Err(e) => return Err(e),
        };
        candidates.sort_by(|a, b| {
            let key = |c: &Candidate| c.eigen.as_ref().map_or(f64::INFINITY, |e| e.lambda1);
            key(a).total_cmp(&key(b)).then(a.interval.lo.total_cmp(&b.interval.lo))
        });
        Ok(Self {
            original: problem.clone(),
            problem: normalized,
            decomp,
            tables,
            candidates,
            j_plus,
            sup_plus_over_c: sup_ratio,
            norms,
            options,
            modified: Arc::new(OnceLock::new()),
        })
    }

    pub fn with_defaults(problem: &Problem) -> Result<Self> {
        Self::new(problem, AnalysisOptions::default())
    }

    /// Same data with a different exponent; nothing here depends on `p`.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        let mut out = self.clone();
        out.original = self.original.with_p(p)?;
        out.problem = self.problem.with_p(p)?;
        Ok(out)
    }

    pub fn p(&self) -> f64 {
        self.problem.p
    }

    pub fn cp(&self) -> f64 {
        cp(self.problem.p)
    }

    pub fn b_zero(&self) -> bool {
        self.problem.b.is_zero()
    }

    pub fn c_zero(&self) -> bool {
        self.problem.c.is_zero()
    }

    pub fn plus_is_zero(&self) -> bool {
        self.decomp.plus_is_zero()
    }

    pub fn candidate(&self, iv: Interval) -> Option<&Candidate> {
        self.candidates.iter().find(|c| c.interval == iv)
    }

    /// Principal eigenpair with eigenfunction on a candidate interval.
    pub fn eigenpair(&self, iv: Interval) -> Result<EigenPair> {
        principal_eigenpair_with(&self.problem, &self.tables.factor, iv, &self.options.eigen)
    }

    /// `sup_{M^+} c / m^+`; infinite when `c > 0` somewhere `m^+` vanishes.
    pub fn sup_c_over_plus(&self) -> f64 {
        let c = &self.problem.c;
        let mut best: f64 = 0.0;
        for iv in &self.decomp.plus_region {
            let mut cuts = vec![iv.lo];
            cuts.extend(self.decomp.m_plus.interior_breakpoints().into_iter().chain(c.interior_breakpoints()).filter(|&x| x > iv.lo && x < iv.hi));
            cuts.push(iv.hi);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            cuts.dedup();
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let mp = &self.decomp.m_plus.pieces()[self.decomp.m_plus.piece_index(mid, Side::Right)].form;
                let cc = &c.pieces()[c.piece_index(mid, Side::Right)].form;
                let ratio = |x: f64| {
                    let (cv, mv) = (cc.eval(x), mp.eval(x));
                    if cv <= 0.0 {
                        0.0
                    } else if mv <= 0.0 {
                        f64::INFINITY
                    } else {
                        cv / mv
                    }
                };
                let (_, v) = crate::numeric::maximize_on(ratio, w[0], w[1], 512);
                best = best.max(v);
            }
        }
        best
    }

    /// Weight `m / (K_b ||m^+||_2) - c`, its operator without the zero-order
    /// term, and the scale `1 / (K_b ||m^+||_2)`.
    pub fn modified_problem(&self) -> Result<(Problem, f64)> {
        if self.plus_is_zero() {
            return Err(Error::NoPositivity);
        }
        let kb = self.tables.k_b(self.options.quad_tol)?;
        let scale = 1.0 / (kb.value * self.norms.m_plus_l2);
        let m = Coefficient::lin_comb(scale, &self.problem.m, -1.0, &self.problem.c)?;
        let (alpha, beta) = (self.problem.alpha, self.problem.beta);
        let p = Problem::with_unit_leading(alpha, beta, self.problem.b.clone(), Coefficient::zero(alpha, beta), m, self.problem.p)?;
        Ok((p, scale))
    }

    /// Analysis of [`Analysis::modified_problem`] at the current exponent.
    pub fn modified_analysis(&self) -> std::result::Result<Analysis, String> {
        let cached = self.modified.get_or_init(|| {
            let (q, _) = self.modified_problem().map_err(|e| e.to_string())?;
            Analysis::new(&q, self.options).map(Arc::new).map_err(|e| e.to_string())
        });
        let sub = cached.as_ref().map_err(|e| e.clone())?;
        if sub.p() == self.p() {
            Ok((**sub).clone())
        } else {
            sub.with_p(self.p()).map_err(|e| e.to_string())
        }
    }
}
