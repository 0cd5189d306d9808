//! Bracketed scalar root finding.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` down to a relative width of `1e-10`, followed by
/// Newton steps kept inside the bracket until `|f| < residual_tol` or no
/// further progress is possible.
///
/// `f` returns `(value, derivative)`.
pub fn bisect_newton<F>(mut f: F, lo: f64, hi: f64, residual_tol: f64) -> Result<Root>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let (mut fa, _) = f(a);
    let (fb, _) = f(b);
    if fa == 0.0 {
        return Ok(Root {
            x: a,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fb == 0.0 {
        return Ok(Root {
            x: b,
            residual: 0.0,
            iterations: 0,
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot { lo: a, hi: b });
    }
    let mut iterations = 0;
    while b - a > 1e-10 * a.abs().max(b.abs()) && iterations < 200 {
        let m = 0.5 * (a + b);
        let (fm, _) = f(m);
        iterations += 1;
        if fm == 0.0 {
            return Ok(Root {
                x: m,
                residual: 0.0,
                iterations,
            });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let (mut fx, mut dfx) = f(x);
    for _ in 0..50 {
        if fx.abs() < residual_tol || dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if !(next > a && next < b) {
            break;
        }
        let (fn_, dfn) = f(next);
        iterations += 1;
        if fn_.abs() >= fx.abs() {
            break;
        }
        x = next;
        fx = fn_;
        dfx = dfn;
    }
    Ok(Root {
        x,
        residual: fx,
        iterations,
    })
}

/// Intervals of a grid over which `f` changes sign.
pub fn sign_changes<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if let Some((xp, fp)) = prev {
            if fp != 0.0 && (fx == 0.0 || fx.signum() != fp.signum()) {
                out.push((xp, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}

/// `n` geometrically spaced points from `lo` to `hi` (both included).
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}
