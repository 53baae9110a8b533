//! Derivative-free bracketing root finders.
//!
//! Bisection narrows a sign-change bracket to [`BISECTION_HANDOFF`]; a
//! secant polish then runs inside the bracket, falling back to a bisection
//! step whenever the secant iterate leaves it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerances::{BISECTION_HANDOFF, SECANT_TOLERANCE};

const MAX_ITERATIONS: usize = 400;

/// Record of one bracketed solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootTrace {
    pub lo: f64,
    pub hi: f64,
    pub root: f64,
    pub residual: f64,
    pub bisection_steps: usize,
    pub secant_steps: usize,
}

/// Finds a root of `f` in `[lo, hi]`, which must bracket a sign change.
///
/// `what` names the equation in errors. Errors from `f` propagate.
pub fn bracketed_root<F>(what: &'static str, mut f: F, lo: f64, hi: f64) -> Result<RootTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(trace(lo, hi, a, fa, 0, 0));
    }
    if fb == 0.0 {
        return Ok(trace(lo, hi, b, fb, 0, 0));
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { what, lo, hi });
    }

    let mut bisection_steps = 0;
    while b - a > BISECTION_HANDOFF {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        bisection_steps += 1;
        if fm == 0.0 {
            return Ok(trace(lo, hi, mid, fm, bisection_steps, 0));
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
        if bisection_steps > MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                what,
                iterations: bisection_steps,
            });
        }
    }

    // Secant polish from the better endpoint, safeguarded by the bracket.
    let (mut x0, mut f0, mut x1, mut f1) = if fa.abs() < fb.abs() {
        (b, fb, a, fa)
    } else {
        (a, fa, b, fb)
    };
    let mut secant_steps = 0;
    loop {
        secant_steps += 1;
        if secant_steps > MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                what,
                iterations: bisection_steps + secant_steps,
            });
        }
        let denom = f1 - f0;
        let mut x2 = if denom != 0.0 {
            x1 - f1 * (x1 - x0) / denom
        } else {
            0.5 * (a + b)
        };
        if !(x2 > a && x2 < b) {
            x2 = 0.5 * (a + b);
        }
        let f2 = f(x2)?;
        if f2 == 0.0 {
            return Ok(trace(lo, hi, x2, f2, bisection_steps, secant_steps));
        }
        if f2.signum() == fa.signum() {
            a = x2;
            fa = f2;
        } else {
            b = x2;
        }
        let step = (x2 - x1).abs();
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if step < SECANT_TOLERANCE || b - a < SECANT_TOLERANCE || b - a <= f64::EPSILON * b.abs().max(a.abs()) {
            return Ok(trace(lo, hi, x1, f1, bisection_steps, secant_steps));
        }
    }
}

/// Full-precision bisection: halves until the bracket cannot shrink.
///
/// Used where the result feeds another root finder and must be a smooth,
/// deterministic function of its inputs.
pub fn bisect_to_precision<F>(what: &'static str, mut f: F, lo: f64, hi: f64) -> Result<RootTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(trace(lo, hi, a, fa, 0, 0));
    }
    if fb == 0.0 {
        return Ok(trace(lo, hi, b, fb, 0, 0));
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoBracket { what, lo, hi });
    }
    let mut steps = 0;
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || steps >= MAX_ITERATIONS {
            // pick the endpoint with the smaller residual
            let fa_abs = fa.abs();
            let fb_v = f(b)?;
            let (x, fx) = if fa_abs <= fb_v.abs() { (a, fa) } else { (b, fb_v) };
            return Ok(trace(lo, hi, x, fx, steps, 0));
        }
        let fm = f(mid)?;
        steps += 1;
        if fm == 0.0 {
            return Ok(trace(lo, hi, mid, fm, steps, 0));
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
}

/// Sign changes of `f` on a uniform grid of `steps` intervals over
/// `[lo, hi]`. Returns `(left, right)` pairs with their values; intervals
/// where `f` fails at an endpoint are skipped.
pub fn scan_sign_changes<F>(mut f: F, lo: f64, hi: f64, steps: usize) -> Vec<((f64, f64), (f64, f64))>
where
    F: FnMut(f64) -> Option<f64>,
{
    let h = (hi - lo) / steps as f64;
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=steps {
        let x = if i == steps { hi } else { lo + h * i as f64 };
        let cur = f(x).filter(|v| v.is_finite()).map(|v| (x, v));
        if let (Some(p), Some(c)) = (prev, cur) {
            if p.1.signum() != c.1.signum() {
                out.push(((p.0, c.0), (p.1, c.1)));
            }
        }
        prev = cur;
    }
    out
}

fn trace(lo: f64, hi: f64, root: f64, residual: f64, b: usize, s: usize) -> RootTrace {
    RootTrace {
        lo,
        hi,
        root,
        residual: residual.abs(),
        bisection_steps: b,
        secant_steps: s,
    }
}
