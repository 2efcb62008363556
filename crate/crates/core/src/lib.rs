//! Existence certificates, explicit subsolutions and monotone solvers for
//! `-a u'' + b u' + c u = m u^p` on a bounded interval with zero Dirichlet
//! data, `0 < p < 1`, and a weight `m` that may change sign.

pub mod analysis;
pub mod catalogue;
pub mod certify;
pub mod coefficient;
pub mod config;
pub mod constants;
pub mod construct;
pub mod eigen;
pub mod error;
pub mod factors;
pub mod general;
pub mod model;
pub mod numeric;
pub mod piecewise;
pub mod pipeline;
pub mod pstar;
pub mod quadrature;
pub mod solve;
pub mod weight;

pub use coefficient::{ClosedForm, Coefficient, Term, TermKind};
pub use error::{Error, Result};
pub use model::{normalize, Interval, Problem};
pub use weight::{candidate_intervals, decompose_weight, WeightDecomposition};
