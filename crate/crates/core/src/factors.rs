//! Cumulative integral tables and the integrating factors
//! `Bbar(x) = exp(int_alpha^x b)` and `Bunder(x) = exp(-int_alpha^x b)`.

use std::fmt;
use std::sync::Arc;

use crate::coefficient::Coefficient;
use crate::quadrature::{gauss7, gk15};

pub type ScalarField = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default number of cells in a cumulative table.
pub const DEFAULT_TABLE_NODES: usize = 1 << 14;

/// `F(x) = int_lo^x f` tabulated on a grid that contains every breakpoint of
/// `f`. Between nodes the increment is evaluated with a 7-point Gauss rule,
/// which is accurate to the integrand's smoothness inside a cell.
#[derive(Clone)]
pub struct CumulativeTable {
    nodes: Vec<f64>,
    values: Vec<f64>,
    integrand: ScalarField,
    quad_error: f64,
}

impl fmt::Debug for CumulativeTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CumulativeTable")
            .field("cells", &(self.nodes.len() - 1))
            .field("total", &self.total())
            .field("quad_error", &self.quad_error)
            .finish()
    }
}

/// Grid on `[lo, hi]` containing every break, with roughly `n` cells spread
/// proportionally to segment length.
pub fn table_grid(lo: f64, hi: f64, breaks: &[f64], n: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = std::iter::once(lo)
        .chain(breaks.iter().copied().filter(|&x| x > lo && x < hi))
        .chain(std::iter::once(hi))
        .collect();
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();
    let total = hi - lo;
    let mut nodes = vec![lo];
    for w in edges.windows(2) {
        let cells = ((n as f64) * (w[1] - w[0]) / total).round().max(4.0) as usize;
        for j in 1..=cells {
            nodes.push(if j == cells { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / cells as f64 });
        }
    }
    nodes
}

impl CumulativeTable {
    pub fn build(lo: f64, hi: f64, breaks: &[f64], n: usize, integrand: ScalarField) -> Self {
        let nodes = table_grid(lo, hi, breaks, n);
        Self::on_grid(nodes, integrand)
    }

    pub fn on_grid(nodes: Vec<f64>, integrand: ScalarField) -> Self {
        let mut values = Vec::with_capacity(nodes.len());
        values.push(0.0);
        let mut acc = 0.0;
        let mut err = 0.0;
        for w in nodes.windows(2) {
            let (v, e) = gk15(&*integrand, w[0], w[1]);
            acc += v;
            err += e;
            values.push(acc);
        }
        Self { nodes, values, integrand, quad_error: err }
    }

    fn cell(&self, x: f64) -> usize {
        let n = self.nodes.len();
        let i = self.nodes.partition_point(|&v| v <= x);
        i.saturating_sub(1).min(n - 2)
    }

    /// `int_lo^x f`, clamped to the table's range.
    pub fn eval(&self, x: f64) -> f64 {
        let lo = self.nodes[0];
        let hi = *self.nodes.last().unwrap();
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return *self.values.last().unwrap();
        }
        let i = self.cell(x);
        if x == self.nodes[i] {
            return self.values[i];
        }
        self.values[i] + gauss7(&*self.integrand, self.nodes[i], x)
    }

    /// `int_a^b f`.
    pub fn between(&self, a: f64, b: f64) -> f64 {
        self.eval(b) - self.eval(a)
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn integrand(&self, x: f64) -> f64 {
        (self.integrand)(x)
    }

    pub fn integrand_field(&self) -> ScalarField {
        self.integrand.clone()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    /// Sum of per-cell Kronrod error estimates.
    pub fn quad_error(&self) -> f64 {
        self.quad_error
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], *self.nodes.last().unwrap())
    }
}

/// Integrating factors anchored at `alpha`.
#[derive(Clone, Debug)]
pub struct CumulativeFactor {
    pub grid: Vec<f64>,
    pub bbar_values: Vec<f64>,
    pub bunder_values: Vec<f64>,
    cum_b: Option<CumulativeTable>,
    b: Coefficient,
}

impl CumulativeFactor {
    pub fn build(b: &Coefficient, n: usize) -> Self {
        let (lo, hi) = b.domain();
        if b.is_zero() {
            let grid = table_grid(lo, hi, &b.interior_breakpoints(), n);
            let ones = vec![1.0; grid.len()];
            return Self { grid, bbar_values: ones.clone(), bunder_values: ones, cum_b: None, b: b.clone() };
        }
        let bc = b.clone();
        let table = CumulativeTable::build(lo, hi, &b.interior_breakpoints(), n, Arc::new(move |x| bc.eval(x)));
        let grid = table.nodes().to_vec();
        let bbar_values = table.node_values().iter().map(|v| v.exp()).collect();
        let bunder_values = table.node_values().iter().map(|v| (-v).exp()).collect();
        Self { grid, bbar_values, bunder_values, cum_b: Some(table), b: b.clone() }
    }

    pub fn zero_drift(&self) -> bool {
        self.cum_b.is_none()
    }

    /// `int_alpha^x b`.
    pub fn cumulative_b(&self, x: f64) -> f64 {
        self.cum_b.as_ref().map_or(0.0, |t| t.eval(x))
    }

    pub fn bbar(&self, x: f64) -> f64 {
        self.cumulative_b(x).exp()
    }

    pub fn bunder(&self, x: f64) -> f64 {
        (-self.cumulative_b(x)).exp()
    }

    pub fn drift(&self) -> &Coefficient {
        &self.b
    }

    /// `(min, max)` of `int_alpha^x b` over `[lo, hi]`.
    pub fn cumulative_range(&self, lo: f64, hi: f64) -> (f64, f64) {
        let Some(t) = &self.cum_b else { return (0.0, 0.0) };
        let mut mn = t.eval(lo).min(t.eval(hi));
        let mut mx = t.eval(lo).max(t.eval(hi));
        let nodes = t.nodes();
        let vals = t.node_values();
        let mut best_lo = None;
        let mut best_hi = None;
        for (i, (&x, &v)) in nodes.iter().zip(vals).enumerate() {
            if x <= lo || x >= hi {
                continue;
            }
            if v < mn {
                mn = v;
                best_lo = Some(i);
            }
            if v > mx {
                mx = v;
                best_hi = Some(i);
            }
        }
        // polish extrema that sit between nodes
        let polish = |i: usize, sign: f64| {
            let a = nodes[i.saturating_sub(1)].max(lo);
            let b = nodes[(i + 1).min(nodes.len() - 1)].min(hi);
            crate::numeric::minimize_on(|x| sign * t.eval(x), a, b, 8).1 * sign
        };
        if let Some(i) = best_lo {
            mn = mn.min(polish(i, 1.0));
        }
        if let Some(i) = best_hi {
            mx = mx.max(polish(i, -1.0));
        }
        (mn, mx)
    }

    /// `||Bbar||_{L^inf(lo, hi)}`.
    pub fn bbar_sup(&self, lo: f64, hi: f64) -> f64 {
        self.cumulative_range(lo, hi).1.exp()
    }

    /// `||Bunder||_{L^inf(lo, hi)}`.
    pub fn bunder_sup(&self, lo: f64, hi: f64) -> f64 {
        (-self.cumulative_range(lo, hi).0).exp()
    }

    pub fn bbar_field(&self) -> ScalarField {
        let this = self.clone();
        if self.zero_drift() {
            Arc::new(|_| 1.0)
        } else {
            Arc::new(move |x| this.bbar(x))
        }
    }

    pub fn bunder_field(&self) -> ScalarField {
        let this = self.clone();
        if self.zero_drift() {
            Arc::new(|_| 1.0)
        } else {
            Arc::new(move |x| this.bunder(x))
        }
    }
}

/// `int_alpha^x f * Bunder` for a coefficient `f`.
pub fn weighted_cumulative(f: &Coefficient, factor: &CumulativeFactor, extra_breaks: &[f64], n: usize) -> CumulativeTable {
    let (lo, hi) = f.domain();
    let mut breaks = f.interior_breakpoints();
    breaks.extend(factor.drift().interior_breakpoints());
    breaks.extend_from_slice(extra_breaks);
    let fc = f.clone();
    let bunder = factor.bunder_field();
    CumulativeTable::build(lo, hi, &breaks, n, Arc::new(move |x| fc.eval(x) * bunder(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::ClosedForm;

    #[test]
    fn zero_drift_gives_unit_factors() {
        let f = CumulativeFactor::build(&Coefficient::zero(0.0, 1.0), 256);
        assert!(f.zero_drift());
        assert_eq!(f.bbar(0.3), 1.0);
        assert_eq!(f.bunder(0.9), 1.0);
    }

    #[test]
    fn constant_drift_closed_form() {
        let f = CumulativeFactor::build(&Coefficient::constant(0.0, 1.0, 2.0), DEFAULT_TABLE_NODES);
        assert!((f.bbar(1.0) - 2f64.exp()).abs() < 1e-12 * 2f64.exp());
        for x in [0.1, 0.37, 0.73] {
            assert!((f.bbar(x) - (2.0 * x).exp()).abs() < 1e-13 * (2.0 * x).exp());
            assert!((f.bunder(x) - (-2.0 * x).exp()).abs() < 1e-13);
        }
        assert_eq!(f.bbar_values[0], 1.0);
        assert_eq!(f.bunder_values[0], 1.0);
    }

    #[test]
    fn linear_drift() {
        let b = Coefficient::closed(0.0, 1.0, ClosedForm::polynomial(&[0.0, 2.0]).unwrap());
        let f = CumulativeFactor::build(&b, DEFAULT_TABLE_NODES);
        assert!((f.bbar(1.0) - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn table_between_and_clamp() {
        let t = CumulativeTable::build(0.0, 2.0, &[1.0], 64, Arc::new(|x| x));
        assert!((t.eval(1.5) - 1.125).abs() < 1e-14);
        assert!((t.between(0.5, 1.5) - 1.0).abs() < 1e-14);
        assert_eq!(t.eval(-1.0), 0.0);
        assert!((t.eval(3.0) - 2.0).abs() < 1e-14);
        assert!(t.nodes().contains(&1.0));
    }

    #[test]
    fn factor_sup_norms() {
        // b = -1 on (0,1): Bunder = e^x, sup = e at x = 1
        let f = CumulativeFactor::build(&Coefficient::constant(0.0, 1.0, -1.0), 1024);
        assert!((f.bunder_sup(0.0, 1.0) - std::f64::consts::E).abs() < 1e-12);
        assert!((f.bbar_sup(0.0, 1.0) - 1.0).abs() < 1e-12);
    }
}
