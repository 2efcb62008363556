//! Small scalar helpers: bracketing root search and bounded extremum search.

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Bisection on a sign-changing bracket. `fa` is `f(a)`; returns once the
/// bracket is narrower than `xtol`.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Minimum of `f` over the closed interval `[a, b]`: dense sampling followed by
/// golden-section refinement around the best sample. Endpoints are always
/// included.
pub(crate) fn minimize_on<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> (f64, f64) {
    if b <= a {
        return (a, f(a));
    }
    let n = samples.max(4);
    let h = (b - a) / n as f64;
    let mut best = (a, f(a));
    let mut best_i = 0;
    for i in 1..=n {
        let x = if i == n { b } else { a + i as f64 * h };
        let v = f(x);
        if v < best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let lo = a + (best_i.saturating_sub(1)) as f64 * h;
    let hi = (a + (best_i + 1) as f64 * h).min(b);
    let refined = golden_min(&f, lo, hi, 1e-13 * (1.0 + (b - a)));
    if refined.1 < best.1 {
        refined
    } else {
        best
    }
}

pub(crate) fn maximize_on<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, samples: usize) -> (f64, f64) {
    let (x, v) = minimize_on(|x| -f(x), a, b, samples);
    (x, -v)
}

/// Uniform points `lo + i (hi - lo) / (n + 1)` for `i = 1..=n`.
pub fn interior_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n + 1) as f64;
    (1..=n).map(|i| lo + i as f64 * h).collect()
}
