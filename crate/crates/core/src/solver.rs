//! Nested solve of the moduli conditions
//!
//! ```text
//! (C1)  m + c1 z1 - z1 R'(z1) = -z2 R'(z2)
//! (C2)  c1 z1 - c2 z2 - 2 = 0
//! (C3)  z1 z2 r^{2(m+2)} = 1
//! ```
//!
//! for `(m, z0, z1, z2)` at given `(r, s)`. With `x = r^{-2(m+2)}` the
//! conditions reduce to
//!
//! ```text
//! m = 2 h(x) - 1 - s,     f₀(z2) = s,     f₀(z1) = s - 2,     z1 z2 = x
//! ```
//!
//! so `m` comes from a scalar equation, `z2` from an inner solve at fixed
//! `z0`, and `z0` from the outer equation `f̃(z0) = s - 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::annulus::{fit_r_coefficients, slit_map, slit_map_deriv, CanonicalModuli, CanonicalSurface};
use crate::error::{Error, Result};
use crate::roots::{bisect_to_precision, bracketed_root, scan_sign_changes, RootTrace};
use crate::theta::ThetaContext;
use crate::tolerances::{master_tolerance, OUTER_SCAN_DELTA, OUTER_SCAN_STEPS, SCALAR_RESIDUAL};

/// Distance kept from the poles of `h` at the ends of the `m` bracket.
const M_BRACKET_EPS: f64 = 1e-9;

/// Samples per circle in the boundary-range check of `R`.
const RANGE_SAMPLES: usize = 256;

/// Solver diagnostics, written as the sidecar of `flatfront solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub m_solve: RootTrace,
    pub outer_scan: ScanSummary,
    pub outer_solve: RootTrace,
    pub inner_solve: RootTrace,
    pub residuals: [f64; 3],
    pub boundary_ranges: BoundaryRanges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    /// Admissible `+ → -` sign changes of `f̃(z0) - (s - 2)`.
    pub sign_changes: usize,
    /// Bracket of the sign change closest to `-1`.
    pub chosen: (f64, f64),
}

/// Extremes of `R` on the boundary circles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRanges {
    pub outer_min: f64,
    pub outer_max: f64,
    pub inner_min: f64,
    pub inner_max: f64,
    /// Largest imaginary part of `R` seen on either circle.
    pub max_imag: f64,
    pub r_at_one: f64,
    pub r_at_r: f64,
}

impl BoundaryRanges {
    /// `R(S₁) ⊂ (0,1)`, `R(S_r) ⊂ (0,1)` and `R(1) < R(r)`.
    pub fn ok(&self) -> bool {
        self.outer_min > 0.0
            && self.outer_max < 1.0
            && self.inner_min > 0.0
            && self.inner_max < 1.0
            && self.r_at_one < self.r_at_r
            && self.max_imag < 1e-8
    }
}

/// Solution of the inner equation at fixed `z0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolution {
    pub z2: f64,
    /// `z10 = r^{-2(m+2)} / z2`.
    pub z1: f64,
    pub trace: RootTrace,
}

/// Failure modes of [`solve_canonical`], kept apart so the CLI can map them
/// to distinct exit codes.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid input: {0}")]
    Input(Error),
    #[error("bracketing failed: {0}")]
    Bracket(Error),
    #[error("boundary normalization failed: {0}")]
    Normalization(Error, Box<CanonicalModuli>),
    #[error("residual check failed: (C1) {0:e}, (C2) {1:e}, (C3) {2:e}")]
    Residual(f64, f64, f64),
}

/// Solves `m = 2 h(r^{-2(m+2)}) - 1 - s` on `(-3, -2)`.
pub fn solve_m(ctx: &ThetaContext, s: f64) -> Result<f64> {
    Ok(solve_m_traced(ctx, s)?.root)
}

fn solve_m_traced(ctx: &ThetaContext, s: f64) -> Result<RootTrace> {
    check_s(s)?;
    let r = ctx.r();
    let eq = |m: f64| -> Result<f64> {
        let x = r.powf(-2.0 * (m + 2.0));
        Ok(m - 2.0 * ctx.h(Complex64::new(x, 0.0))?.re + 1.0 + s)
    };
    let lo = -3.0 + M_BRACKET_EPS;
    let hi = -2.0 - M_BRACKET_EPS;
    let t = bracketed_root("m", eq, lo, hi).map_err(|e| match e {
        Error::NoBracket { lo, hi, .. } => Error::NoBracket {
            what: "m (existence violated)",
            lo,
            hi,
        },
        other => other,
    })?;
    if t.residual > SCALAR_RESIDUAL {
        return Err(Error::NoConvergence {
            what: "m",
            iterations: t.bisection_steps + t.secant_steps,
        });
    }
    Ok(t)
}

/// Solves `f₀(z2) = s` for `z2 ∈ (-1, z0)` and returns `z2` with the matching
/// `z1 = r^{-2(m+2)} / z2`.
///
/// `f₀(-1) = -1 < s` always; `f₀ → +∞` as `z2 → z0⁻`.
pub fn solve_inner_z2(ctx: &ThetaContext, z0: f64, s: f64, m: f64) -> Result<InnerSolution> {
    check_s(s)?;
    let r = ctx.r();
    if !(z0 > -1.0 && z0 < -r) {
        return Err(Error::OutOfRange {
            name: "z0",
            value: z0,
            range: "(-1, -r)",
        });
    }
    let zc0 = Complex64::new(z0, 0.0);
    let eq = |z: f64| -> Result<f64> { Ok(ctx.f0(zc0, Complex64::new(z, 0.0))?.re - s) };
    // back off from the pole at z0 until f0 exceeds s
    let mut hi = None;
    let mut offset = 1e-12 * z0.abs().max(1e-300);
    while offset < 0.5 * (z0 + 1.0) {
        let z = z0 - offset;
        if let Ok(v) = eq(z) {
            if v > 0.0 && v.is_finite() {
                hi = Some(z);
                break;
            }
        }
        offset *= 10.0;
    }
    let hi = hi.ok_or(Error::NoBracket {
        what: "z2 (inner)",
        lo: -1.0,
        hi: z0,
    })?;
    let trace = bisect_to_precision("z2 (inner)", eq, -1.0, hi)?;
    if trace.residual > SCALAR_RESIDUAL {
        return Err(Error::NoConvergence {
            what: "z2 (inner)",
            iterations: trace.bisection_steps,
        });
    }
    let z2 = trace.root;
    let x = r.powf(-2.0 * (m + 2.0));
    Ok(InnerSolution {
        z2,
        z1: x / z2,
        trace,
    })
}

/// Solves for the full moduli at `(r, s)`.
pub fn solve_canonical(r: f64, s: f64) -> std::result::Result<(CanonicalModuli, SolveTrace), SolveError> {
    let ctx = ThetaContext::new(r).map_err(SolveError::Input)?;
    check_s(s).map_err(SolveError::Input)?;

    let m_trace = solve_m_traced(&ctx, s).map_err(SolveError::Bracket)?;
    let m = m_trace.root;
    let target = s - 2.0;

    let lo = -1.0 + OUTER_SCAN_DELTA;
    let hi = -r - OUTER_SCAN_DELTA;
    let changes = outer_scan(&ctx, s, m);
    let ((a, b), _) = *changes.first().ok_or(SolveError::Bracket(Error::NoBracket {
        what: "z0 (outer)",
        lo,
        hi,
    }))?;
    let scan = ScanSummary {
        lo,
        hi,
        steps: OUTER_SCAN_STEPS,
        sign_changes: changes.len(),
        chosen: (a, b),
    };

    let outer_eq = |z0: f64| -> Result<f64> {
        let inner = solve_inner_z2(&ctx, z0, s, m)?;
        Ok(ctx
            .ftilde(Complex64::new(z0, 0.0), Complex64::new(inner.z2, 0.0), m)?
            .re
            - target)
    };
    let outer_trace = bracketed_root("z0 (outer)", outer_eq, a, b).map_err(SolveError::Bracket)?;
    let z0 = outer_trace.root;
    let inner = solve_inner_z2(&ctx, z0, s, m).map_err(SolveError::Bracket)?;
    let (z1, z2) = (inner.z1, inner.z2);

    let moduli = assemble(&ctx, s, m, z0, z1, z2).map_err(SolveError::Bracket)?;
    let res = residuals(&moduli, &ctx);
    let ranges = boundary_ranges(&moduli).map_err(SolveError::Bracket)?;
    let trace = SolveTrace {
        m_solve: m_trace,
        outer_scan: scan,
        outer_solve: outer_trace,
        inner_solve: inner.trace,
        residuals: res,
        boundary_ranges: ranges,
    };

    let tol = master_tolerance();
    if res.iter().any(|v| !(*v < tol)) {
        return Err(SolveError::Residual(res[0], res[1], res[2]));
    }
    if !ranges.ok() {
        return Err(SolveError::Normalization(
            Error::Normalization(format!("{ranges:?}")),
            Box::new(moduli),
        ));
    }
    Ok((moduli, trace))
}

/// Admissible sign changes of `f̃(z0) - (s - 2)` over the outer scan,
/// ordered from `-1` towards `-r`.
///
/// Only `+ → -` changes count, and both scan points must keep the ordering
/// `z2 < z0 < z1 < -r`; the pole of `f̃` where `z1` crosses `z0` produces a
/// spurious `- → +` change.
pub fn outer_scan(ctx: &ThetaContext, s: f64, m: f64) -> Vec<((f64, f64), (f64, f64))> {
    let r = ctx.r();
    let target = s - 2.0;
    let outer = |z0: f64| -> Option<f64> {
        let inner = solve_inner_z2(ctx, z0, s, m).ok()?;
        if !(inner.z2 < z0 && z0 < inner.z1 && inner.z1 < -r) {
            return None;
        }
        let v = ctx
            .ftilde(Complex64::new(z0, 0.0), Complex64::new(inner.z2, 0.0), m)
            .ok()?;
        Some(v.re - target)
    };
    let lo = -1.0 + OUTER_SCAN_DELTA;
    let hi = -r - OUTER_SCAN_DELTA;
    scan_sign_changes(outer, lo, hi, OUTER_SCAN_STEPS)
        .into_iter()
        .filter(|(_, (fa, fb))| *fa > 0.0 && *fb < 0.0)
        .collect()
}

/// Number of admissible outer sign changes for `(r, s)`.
pub fn outer_sign_changes(r: f64, s: f64) -> Result<usize> {
    let ctx = ThetaContext::new(r)?;
    let m = solve_m(&ctx, s)?;
    Ok(outer_scan(&ctx, s, m).len())
}

/// Fills in `c1, c2, a_R, b_R, c_height` for given `(m, z0, z1, z2)`.
pub fn assemble(ctx: &ThetaContext, s: f64, m: f64, z0: f64, z1: f64, z2: f64) -> Result<CanonicalModuli> {
    let r = ctx.r();
    let (a_r, b_r) = fit_r_coefficients(ctx, z0, z1, z2)?;
    let c1 = slit_map(ctx, z1, Complex64::new(z0, 0.0))?.re;
    let c2 = slit_map(ctx, z2, Complex64::new(z0, 0.0))?.re;
    Ok(CanonicalModuli {
        r,
        s,
        m,
        z0,
        z1,
        z2,
        c1,
        c2,
        a_r,
        b_r,
        c_height: z1.abs() * r.powf(m + 1.0),
    })
}

/// Absolute residuals of (C1), (C2), (C3), recomputed from the stored
/// moduli only. Never fails: evaluation problems show up as `NaN`/`∞`.
pub fn residuals(moduli: &CanonicalModuli, ctx: &ThetaContext) -> [f64; 3] {
    let m = moduli;
    let dr = |z: f64| -> f64 {
        slit_map_deriv(ctx, m.z0, Complex64::new(z, 0.0))
            .map(|d| m.a_r * d.re)
            .unwrap_or(f64::NAN)
    };
    let c1 = m.m + m.c1 * m.z1 - m.z1 * dr(m.z1) + m.z2 * dr(m.z2);
    let c2 = m.c1 * m.z1 - m.c2 * m.z2 - 2.0;
    let c3 = m.z1 * m.z2 * m.r.powf(2.0 * (m.m + 2.0)) - 1.0;
    [abs_or_inf(c1), abs_or_inf(c2), abs_or_inf(c3)]
}

fn abs_or_inf(v: f64) -> f64 {
    if v.is_finite() {
        v.abs()
    } else {
        f64::INFINITY
    }
}

/// Samples `R` on both boundary circles.
pub fn boundary_ranges(moduli: &CanonicalModuli) -> Result<BoundaryRanges> {
    let surface = CanonicalSurface::new_unchecked(*moduli)?;
    let mut out = BoundaryRanges {
        outer_min: f64::INFINITY,
        outer_max: f64::NEG_INFINITY,
        inner_min: f64::INFINITY,
        inner_max: f64::NEG_INFINITY,
        max_imag: 0.0,
        r_at_one: surface.r_map(Complex64::new(1.0, 0.0))?.re,
        r_at_r: surface.r_map(Complex64::new(moduli.r, 0.0))?.re,
    };
    for k in 0..=RANGE_SAMPLES {
        // half circle suffices: R(conj z) = conj R(z)
        let t = std::f64::consts::PI * k as f64 / RANGE_SAMPLES as f64;
        let a = surface.r_map(Complex64::from_polar(1.0, t))?;
        let b = surface.r_map(Complex64::from_polar(moduli.r, t))?;
        out.outer_min = out.outer_min.min(a.re);
        out.outer_max = out.outer_max.max(a.re);
        out.inner_min = out.inner_min.min(b.re);
        out.inner_max = out.inner_max.max(b.re);
        out.max_imag = out.max_imag.max(a.im.abs()).max(b.im.abs());
    }
    Ok(out)
}

fn check_s(s: f64) -> Result<()> {
    if s.is_finite() && s > -1.0 && s < 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "s",
            value: s,
            range: "(-1, 0)",
        })
    }
}
