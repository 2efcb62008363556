//! JSON problem description.
//!
//! ```json
//! {
//!   "interval": [0.0, 1.0],
//!   "c": {"pieces": [{"range": [0.0, 1.0], "poly": [1.0]}]},
//!   "m": {"pieces": [
//!     {"range": [0.0, 0.4], "poly": [-0.1]},
//!     {"range": [0.4, 0.6], "poly": [1.0]},
//!     {"range": [0.6, 1.0], "poly": [-0.1]}
//!   ]},
//!   "p": 0.5
//! }
//! ```
//!
//! `a` defaults to 1, `b` and `c` to 0. A piece is `poly` (up to six
//! coefficients, lowest degree first, in the global variable) plus optional
//! `trig` terms `{"kind": "sin" | "cos" | "exp", "amplitude", "frequency"}`.
//! Instead of `pieces` a coefficient may name a catalogued function with
//! `{"named": "manufactured_weight"}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::AnalysisOptions;
use crate::catalogue::manufactured_weight;
use crate::constants::DEFAULT_QUAD_TOL;
use crate::coefficient::{ClosedForm, Coefficient, Piece, PieceForm, Term, TermKind};
use crate::error::{Error, Result};
use crate::general::NonlinearitySpec;
use crate::model::Problem;
use crate::pstar::PstarOptions;
use crate::solve::{pow0, SolveOptions};

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub interval: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<CoefficientConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<CoefficientConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CoefficientConfig>,
    pub m: CoefficientConfig,
    pub p: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<NonlinearityConfig>,
    /// Default axis for the `sweep` command, in `FIELD:LO:HI:STEPS` form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
}

fn default_grid() -> usize {
    SolveOptions::default().n
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<PieceConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub named: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub range: [f64; 2],
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trig: Option<OneOrMany<TrigConfig>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TrigConfig {
    pub kind: TrigKind,
    pub amplitude: f64,
    pub frequency: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Sin,
    Cos,
    Exp,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub quadrature: f64,
    pub solver: f64,
    pub residual: f64,
    pub p_bracket: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let s = SolveOptions::default();
        Self { quadrature: DEFAULT_QUAD_TOL, solver: s.tol, residual: s.residual_tol, p_bracket: PstarOptions::default().tol_p }
    }
}

/// `f(xi) = xi^exponent (1 + amplitude sin(frequency xi))` together with its
/// envelope constants.
#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub exponent: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub frequency: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub q: f64,
    pub k_over: f64,
}

impl NonlinearityConfig {
    pub fn to_spec(&self) -> NonlinearitySpec {
        let (e, a, w) = (self.exponent, self.amplitude, self.frequency);
        NonlinearitySpec {
            f: Arc::new(move |x: f64| pow0(x, e) * (1.0 + a * (w * x).sin())),
            k1: self.k1,
            k2: self.k2,
            k3: self.k3,
            q: self.q,
            k_over: self.k_over,
        }
    }
}

fn field_err(field: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("field `{field}`: {e}"))
}

impl CoefficientConfig {
    fn build(&self, field: &str, lo: f64, hi: f64) -> Result<Coefficient> {
        match (&self.pieces, &self.named) {
            (Some(pieces), None) => {
                let mut out = Vec::with_capacity(pieces.len());
                for (i, pc) in pieces.iter().enumerate() {
                    let f = format!("{field}.pieces[{i}]");
                    let mut form = ClosedForm::polynomial(&pc.poly).map_err(|e| field_err(&format!("{f}.poly"), e))?;
                    let terms = match &pc.trig {
                        None => Vec::new(),
                        Some(OneOrMany::One(t)) => vec![*t],
                        Some(OneOrMany::Many(v)) => v.clone(),
                    };
                    for t in terms {
                        let kind = match t.kind {
                            TrigKind::Sin => TermKind::Sin,
                            TrigKind::Cos => TermKind::Cos,
                            TrigKind::Exp => TermKind::Exp,
                        };
                        form = form.with_term(Term { kind, amplitude: t.amplitude, frequency: t.frequency });
                    }
                    out.push(Piece::new(pc.range[0], pc.range[1], PieceForm::Closed(form)));
                }
                let c = Coefficient::new(out).map_err(|e| field_err(&format!("{field}.pieces"), e))?;
                let (a, b) = c.domain();
                if (a - lo).abs() > 1e-12 || (b - hi).abs() > 1e-12 {
                    return Err(field_err(&format!("{field}.pieces"), format!("pieces cover [{a}, {b}], interval is [{lo}, {hi}]")));
                }
                Ok(c)
            }
            (None, Some(name)) => match name.as_str() {
                "manufactured_weight" if lo == 0.0 && hi == 1.0 => Ok(manufactured_weight()),
                "manufactured_weight" => Err(field_err(&format!("{field}.named"), "manufactured_weight lives on [0, 1]")),
                other => Err(field_err(&format!("{field}.named"), format!("unknown function `{other}`"))),
            },
            _ => Err(field_err(field, "give exactly one of `pieces` and `named`")),
        }
    }
}

impl ProblemConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(s);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (line, col) = (inner.line(), inner.column());
            let msg = inner.to_string();
            let msg = msg.strip_suffix(&format!(" at line {line} column {col}")).unwrap_or(&msg).to_string();
            Error::Config(format!("line {line} column {col}, field `{path}`: {msg}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(v: Value) -> Result<Self> {
        let cfg: Self = serde_path_to_error::deserialize(v).map_err(|e| field_err(&e.path().to_string(), e.inner()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        for (name, v) in [("quadrature", t.quadrature), ("solver", t.solver), ("residual", t.residual), ("p_bracket", t.p_bracket)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_err(&format!("tolerances.{name}"), format!("must be positive, got {v}")));
            }
        }
        if self.grid < 4 {
            return Err(field_err("grid", format!("need at least 4 interior nodes, got {}", self.grid)));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        let [lo, hi] = self.interval;
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(field_err("interval", format!("need alpha < beta, got [{lo}, {hi}]")));
        }
        let coef = |c: &Option<CoefficientConfig>, name: &str, default: f64| match c {
            Some(c) => c.build(name, lo, hi),
            None => Ok(Coefficient::constant(lo, hi, default)),
        };
        let a = coef(&self.a, "a", 1.0)?;
        let b = coef(&self.b, "b", 0.0)?;
        let c = coef(&self.c, "c", 0.0)?;
        let m = self.m.build("m", lo, hi)?;
        Problem::new(lo, hi, a, b, c, m, self.p).map_err(|e| match e {
            Error::ExponentOutOfRange(_) => field_err("p", e),
            e => Error::Config(e.to_string()),
        })
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions { quad_tol: self.tolerances.quadrature, ..AnalysisOptions::default() }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { n: self.grid, tol: self.tolerances.solver, residual_tol: self.tolerances.residual, ..SolveOptions::default() }
    }

    pub fn pstar_options(&self) -> PstarOptions {
        PstarOptions { tol_p: self.tolerances.p_bracket, ..PstarOptions::default() }
    }
}

/// One sweep axis: every listed field is set to the axis value, negated
/// when the field carries a leading `-`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepAxis {
    pub fields: Vec<(String, bool)>,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepAxis {
    /// Parses `FIELD[,FIELD...]:LO:HI:STEPS`, fields in dotted form with
    /// bracketed indices, e.g. `-m.pieces[0].poly[0]`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.rsplitn(4, ':').collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!("sweep `{s}`: expected FIELD:LO:HI:STEPS")));
        }
        let num = |t: &str, what: &str| t.trim().parse::<f64>().map_err(|e| Error::Config(format!("sweep {what} `{t}`: {e}")));
        let steps: usize = parts[0].trim().parse().map_err(|e| Error::Config(format!("sweep steps `{}`: {e}", parts[0])))?;
        let (hi, lo) = (num(parts[1], "HI")?, num(parts[2], "LO")?);
        if steps == 0 {
            return Err(Error::Config("sweep needs at least one step".into()));
        }
        let fields = parts[3]
            .split(',')
            .map(|f| {
                let f = f.trim();
                match f.strip_prefix('-') {
                    Some(rest) => (rest.to_string(), true),
                    None => (f.to_string(), false),
                }
            })
            .collect::<Vec<_>>();
        if fields.iter().any(|(f, _)| f.is_empty()) {
            return Err(Error::Config(format!("sweep `{s}`: empty field name")));
        }
        Ok(Self { fields, lo, hi, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        (0..self.steps).map(|i| self.lo + (self.hi - self.lo) * i as f64 / (self.steps - 1) as f64).collect()
    }

    /// Copy of `base` with every field of the axis set from `x`.
    pub fn apply(&self, base: &Value, x: f64) -> Result<Value> {
        let mut v = base.clone();
        for (field, neg) in &self.fields {
            let slot = lookup(&mut v, field)?;
            if !slot.is_number() {
                return Err(Error::Config(format!("sweep field `{field}` is not a number")));
            }
            *slot = serde_json::json!(if *neg { -x } else { x });
        }
        Ok(v)
    }
}

fn lookup<'a>(v: &'a mut Value, path: &str) -> Result<&'a mut Value> {
    let missing = || Error::Config(format!("sweep field `{path}` does not exist in the config"));
    let mut cur = v;
    for seg in path.split('.') {
        let (key, rest) = match seg.find('[') {
            Some(i) => (&seg[..i], &seg[i..]),
            None => (seg, ""),
        };
        if !key.is_empty() {
            cur = cur.get_mut(key).ok_or_else(missing)?;
        }
        for idx in rest.split('[').skip(1) {
            let i: usize = idx.strip_suffix(']').and_then(|t| t.parse().ok()).ok_or_else(missing)?;
            cur = cur.get_mut(i).ok_or_else(missing)?;
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    const STEP: &str = r#"{
        "interval": [0, 1],
        "c": {"pieces": [{"range": [0, 1], "poly": [1]}]},
        "m": {"pieces": [
            {"range": [0, 0.4], "poly": [-0.1]},
            {"range": [0.4, 0.6], "poly": [1]},
            {"range": [0.6, 1], "poly": [-0.1]}
        ]},
        "p": 0.5
    }"#;

    #[test]
    fn parses_step_problem() {
        let cfg = ProblemConfig::from_json_str(STEP).unwrap();
        let pr = cfg.problem().unwrap();
        assert_eq!(pr.m.eval(0.5), 1.0);
        assert_eq!(pr.m.eval(0.1), -0.1);
        assert_eq!(pr.c.eval(0.3), 1.0);
        assert_eq!(pr.a.eval(0.3), 1.0);
        assert_eq!(cfg.grid, 2000);
    }

    #[test]
    fn trig_terms() {
        let s = r#"{"interval": [0, 1], "m": {"pieces": [{"range": [0, 1], "poly": [0.5],
            "trig": [{"kind": "cos", "amplitude": 1, "frequency": 3}, {"kind": "exp", "amplitude": 2, "frequency": 0}]}]}, "p": 0.5}"#;
        let pr = ProblemConfig::from_json_str(s).unwrap().problem().unwrap();
        assert!((pr.m.eval(0.2) - (2.5 + (0.6f64).cos())).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let bad = STEP.replace("\"poly\": [1]}]}", "\"poly\": \"x\"}]}");
        let e = ProblemConfig::from_json_str(&bad).unwrap_err().to_string();
        assert!(e.contains("line 3 column") && !e.ends_with("column 54") && e.contains("c.pieces[0].poly"), "{e}");
        let e = ProblemConfig::from_json_str(&STEP.replace("\"p\": 0.5", "\"p\": 1.5")).unwrap().problem().unwrap_err().to_string();
        assert!(e.contains("`p`"), "{e}");
        let e = ProblemConfig::from_json_str(&STEP.replace("[0.6, 1]", "[0.7, 1]")).unwrap().problem().unwrap_err().to_string();
        assert!(e.contains("m.pieces"), "{e}");
        let e = ProblemConfig::from_json_str(&STEP.replace("\"p\"", "\"q\"")).unwrap_err().to_string();
        assert!(e.contains("unknown field"), "{e}");
    }

    #[test]
    fn sweep_axis() {
        let ax = SweepAxis::parse("-m.pieces[0].poly[0],-m.pieces[2].poly[0]:0:1:3").unwrap();
        assert_eq!(ax.values(), vec![0.0, 0.5, 1.0]);
        let base: Value = serde_json::from_str(STEP).unwrap();
        let v = ax.apply(&base, 0.5).unwrap();
        let pr = ProblemConfig::from_value(v).unwrap().problem().unwrap();
        assert_eq!(pr.m.eval(0.1), -0.5);
        assert_eq!(pr.m.eval(0.9), -0.5);
        assert!(SweepAxis::parse("m.nope:0:1:3").unwrap().apply(&base, 1.0).is_err());
        assert!(SweepAxis::parse("p:0:1").is_err());
    }
}
