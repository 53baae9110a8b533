//! Holomorphic data of the two-singularity surfaces on `A_r = {r < |z| < 1}`.
//!
//! For a real point `z_j ∈ (-1, -r)` the slit map
//!
//! ```text
//! q_j(z) = -θ₁'(z_j/z) / (z θ₁(z_j/z)) - z θ₁'(z_j z) / θ₁(z_j z) = -(h(z_j/z) + h(z_j z)) / z_j
//! ```
//!
//! has a simple pole of residue one at `z_j` and is real on both boundary
//! circles. From it:
//!
//! ```text
//! R   = a_R q₀ + b_R                     R(z1) = 1, R(z2) = 0
//! Q_j = θ₁(z_j/z) / θ₁(z_j z)
//! W   = R/(1-R) · Q₁/Q₂                  g = √W / z
//! u   = ½ log |Q₁ z^m / (1-R)|           F = R / g,   g* = g - 1/F
//! ```
//!
//! `W` has no zeros or poles in the closed annulus (the zeros of `R`,
//! `1 - R` cancel against those of `Q₂`, `Q₁`), so `g` is a single-valued
//! branch once `W` has zero winding around the core. The branch is fixed by
//! taking the positive root of `W` on the segment `(r, 1)` and continuing
//! along circular arcs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::ThetaContext;
use crate::tolerances::DOMAIN_SLACK;

/// Points closer than this to `z0`, `z1`, `z2` are evaluated through the
/// circle mean of the (removable-singularity) expression.
const REMOVABLE_RADIUS: f64 = 1e-6;
const MEAN_RADIUS: f64 = 1e-3;
const MEAN_POINTS: usize = 8;

/// Samples on `|z| = √r` for the winding audit of `W`.
const WINDING_SAMPLES: usize = 2048;

/// Base angular step when continuing the square-root branch along an arc.
const ARC_STEP: f64 = 0.1;
/// Largest accepted argument change of `W` between consecutive arc samples.
const ARC_MAX_TURN: f64 = 0.5;

/// The solved tuple describing a two-singularity surface.
///
/// Serialized field names are fixed: `r, s, m, z0, z1, z2, c1, c2, a_R, b_R,
/// c_height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalModuli {
    pub r: f64,
    pub s: f64,
    pub m: f64,
    pub z0: f64,
    pub z1: f64,
    pub z2: f64,
    pub c1: f64,
    pub c2: f64,
    #[serde(rename = "a_R")]
    pub a_r: f64,
    #[serde(rename = "b_R")]
    pub b_r: f64,
    pub c_height: f64,
}

impl CanonicalModuli {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("moduli serialize")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            SpherePoint::Finite(z) => Some(z),
            SpherePoint::Infinity => None,
        }
    }
}

/// `q_j(z) = -(h(z_j/z) + h(z_j z)) / z_j`.
pub fn slit_map(ctx: &ThetaContext, zj: f64, z: Complex64) -> Result<Complex64> {
    let hz = ctx.h(zj / z).map_err(|e| relocate(e, z))?;
    let hw = ctx.h(zj * z).map_err(|e| relocate(e, z))?;
    Ok(-(hz + hw) / zj)
}

/// `q_j'(z) = h'(z_j/z)/z² - h'(z_j z)`.
pub fn slit_map_deriv(ctx: &ThetaContext, zj: f64, z: Complex64) -> Result<Complex64> {
    let a = ctx.h_deriv(zj / z).map_err(|e| relocate(e, z))?;
    let b = ctx.h_deriv(zj * z).map_err(|e| relocate(e, z))?;
    Ok(a / (z * z) - b)
}

/// `Q_j(z) = θ₁(z_j/z) / θ₁(z_j z)`; vanishes at `z = z_j`.
pub fn theta_quotient(ctx: &ThetaContext, zj: f64, z: Complex64) -> Result<Complex64> {
    let num = ctx.theta(zj / z)?;
    let den = ctx.theta(zj * z)?;
    if den.norm() == 0.0 || !den.norm().is_finite() {
        return Err(Error::Pole { at: z });
    }
    Ok(num / den)
}

/// Real coefficients `(a_R, b_R)` of `R = a_R q₀ + b_R` with `R(z1) = 1`
/// and `R(z2) = 0`.
pub fn fit_r_coefficients(ctx: &ThetaContext, z0: f64, z1: f64, z2: f64) -> Result<(f64, f64)> {
    let r = ctx.r();
    for (name, v) in [("z0", z0), ("z1", z1), ("z2", z2)] {
        if !(v > -1.0 && v < -r) {
            return Err(Error::OutOfRange {
                name,
                value: v,
                range: "(-1, -r)",
            });
        }
    }
    if z0 == z1 || z0 == z2 || z1 == z2 {
        return Err(Error::Degenerate("z0, z1, z2 must be distinct".into()));
    }
    let q1 = slit_map(ctx, z0, Complex64::new(z1, 0.0))?.re;
    let q2 = slit_map(ctx, z0, Complex64::new(z2, 0.0))?.re;
    let diff = q1 - q2;
    if !(diff.abs() > 1e-14 * (1.0 + q1.abs().max(q2.abs()))) {
        return Err(Error::Degenerate(format!("q0(z1) = q0(z2) = {q1}")));
    }
    let a = 1.0 / diff;
    Ok((a, -a * q2))
}

/// Moduli together with their theta context; evaluates every holomorphic
/// quantity of the surface.
#[derive(Debug, Clone)]
pub struct CanonicalSurface {
    moduli: CanonicalModuli,
    ctx: ThetaContext,
}

impl CanonicalSurface {
    /// Builds the surface data and audits the winding of `W`.
    pub fn new(moduli: CanonicalModuli) -> Result<Self> {
        let surface = Self::new_unchecked(moduli)?;
        let winding = surface.w_winding()?;
        if winding != 0 {
            return Err(Error::Winding(winding));
        }
        Ok(surface)
    }

    /// Builds the surface data without the winding audit. Used for residual
    /// evaluation of arbitrary (possibly invalid) moduli.
    pub fn new_unchecked(moduli: CanonicalModuli) -> Result<Self> {
        let ctx = ThetaContext::new(moduli.r)?;
        let all = [
            moduli.s, moduli.m, moduli.z0, moduli.z1, moduli.z2, moduli.c1, moduli.c2, moduli.a_r,
            moduli.b_r, moduli.c_height,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("non-finite modulus".into()));
        }
        for (name, v) in [("z0", moduli.z0), ("z1", moduli.z1), ("z2", moduli.z2)] {
            if !(v > -1.0 && v < -moduli.r) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "(-1, -r)",
                });
            }
        }
        Ok(Self { moduli, ctx })
    }

    pub fn moduli(&self) -> &CanonicalModuli {
        &self.moduli
    }

    pub fn ctx(&self) -> &ThetaContext {
        &self.ctx
    }

    pub fn end(&self) -> Complex64 {
        Complex64::new(self.moduli.z0, 0.0)
    }

    /// Rejects points outside the closed annulus.
    pub fn check_domain(&self, z: Complex64) -> Result<()> {
        let n = z.norm();
        if !n.is_finite() || n < self.moduli.r - DOMAIN_SLACK || n > 1.0 + DOMAIN_SLACK {
            return Err(Error::Domain(z));
        }
        Ok(())
    }

    pub fn q(&self, zj: f64, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        slit_map(&self.ctx, zj, z)
    }

    pub fn q_deriv(&self, zj: f64, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        slit_map_deriv(&self.ctx, zj, z)
    }

    pub fn theta_quotient(&self, zj: f64, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        theta_quotient(&self.ctx, zj, z)
    }

    /// `R(z) = a_R q₀(z) + b_R`; simple pole at `z0`.
    pub fn r_map(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.moduli.a_r * self.q(self.moduli.z0, z)? + self.moduli.b_r)
    }

    /// `R'(z)`.
    pub fn r_map_deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.moduli.a_r * self.q_deriv(self.moduli.z0, z)?)
    }

    /// `1/R(z)`, exactly zero at the end.
    fn r_recip(&self, z: Complex64) -> Result<Complex64> {
        match self.r_map(z) {
            Ok(r) => Ok(1.0 / r),
            Err(Error::Pole { .. }) => Ok(Complex64::new(0.0, 0.0)),
            Err(e) => Err(e),
        }
    }

    /// `W = R/(1-R) · Q₁/Q₂ = g² z²`.
    pub fn w_value(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        self.removable(z, |w| self.w_raw(w))
    }

    fn w_raw(&self, z: Complex64) -> Result<Complex64> {
        let ratio = 1.0 / (self.r_recip(z)? - 1.0);
        let q1 = theta_quotient(&self.ctx, self.moduli.z1, z)?;
        let q2 = theta_quotient(&self.ctx, self.moduli.z2, z)?;
        if q2.norm() == 0.0 {
            return Err(Error::Pole { at: z });
        }
        Ok(ratio * q1 / q2)
    }

    /// `W'/W = R'/(R(1-R)) + (z1/z) q₁ - (z2/z) q₂`.
    pub fn w_log_deriv(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        self.removable(z, |w| self.w_log_deriv_raw(w))
    }

    fn w_log_deriv_raw(&self, z: Complex64) -> Result<Complex64> {
        let m = &self.moduli;
        let r = self.r_map(z)?;
        let dr = self.r_map_deriv(z)?;
        let q1 = slit_map(&self.ctx, m.z1, z)?;
        let q2 = slit_map(&self.ctx, m.z2, z)?;
        Ok(dr / (r * (1.0 - r)) + m.z1 / z * q1 - m.z2 / z * q2)
    }

    /// `g'/g = -1/z + ½ W'/W`; independent of the branch of `g`.
    pub fn g_log_deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(-1.0 / z + 0.5 * self.w_log_deriv(z)?)
    }

    /// Evaluates `f` at `z`, or, near `z0`, `z1`, `z2`, as the mean over a
    /// small circle (exact for the removable singularities there).
    fn removable<F>(&self, z: Complex64, f: F) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let m = &self.moduli;
        let near = [m.z0, m.z1, m.z2]
            .iter()
            .any(|&p| (z - p).norm() < REMOVABLE_RADIUS);
        if !near {
            return f(z);
        }
        let n = z.norm();
        let room = (n - m.r).min(1.0 - n).max(0.0);
        let radius = MEAN_RADIUS.min(0.5 * room).max(1e-5);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..MEAN_POINTS {
            let phase = std::f64::consts::PI * (2.0 * k as f64 + 1.0) / MEAN_POINTS as f64;
            acc += f(z + Complex64::from_polar(radius, phase))?;
        }
        Ok(acc / MEAN_POINTS as f64)
    }

    /// Winding number of `W` around `|z| = √r`.
    pub fn w_winding(&self) -> Result<i64> {
        let rho = self.moduli.r.sqrt();
        let n = WINDING_SAMPLES;
        let at = |k: usize| {
            let phase = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
            self.w_value(Complex64::from_polar(rho, phase))
        };
        let first = at(0)?;
        let mut prev = first;
        let mut turn = 0.0;
        for k in 1..=n {
            let cur = if k == n { first } else { at(k)? };
            turn += (cur / prev).arg();
            prev = cur;
        }
        Ok((turn / std::f64::consts::TAU).round() as i64)
    }

    /// `√W` on the positive real axis at radius `|z|`, continued along the
    /// arc to `z`.
    fn sqrt_w_tracked(&self, z: Complex64) -> Result<Complex64> {
        let rho = z.norm();
        let start = Complex64::new(rho, 0.0);
        let w0 = self.w_value(start)?;
        self.continue_sqrt(start, w0.sqrt(), z)
    }

    /// Continues a branch of `√W` from `from` (value `root`) along the
    /// circular arc of radius `|from|` to the argument of `to`.
    pub(crate) fn continue_sqrt(
        &self,
        from: Complex64,
        root: Complex64,
        to: Complex64,
    ) -> Result<Complex64> {
        let rho = from.norm();
        let a0 = from.arg();
        let mut a1 = to.arg();
        // shortest way round
        let mut delta = a1 - a0;
        if delta > std::f64::consts::PI {
            delta -= std::f64::consts::TAU;
        } else if delta < -std::f64::consts::PI {
            delta += std::f64::consts::TAU;
        }
        a1 = a0 + delta;
        let steps = (delta.abs() / ARC_STEP).ceil().max(1.0) as usize;
        let mut root = root;
        let mut w_prev = root * root;
        let mut angle = a0;
        for k in 1..=steps {
            let target = a0 + delta * k as f64 / steps as f64;
            let end = if k == steps { a1 } else { target };
            let (r, w) = self.arc_segment(rho, angle, end, root, w_prev, 0)?;
            root = r;
            w_prev = w;
            angle = end;
        }
        // land exactly on `to` (its radius may differ by rounding)
        let w_to = self.w_value(to)?;
        Ok(pick_branch(w_to.sqrt(), root))
    }

    fn arc_segment(
        &self,
        rho: f64,
        from: f64,
        to: f64,
        root: Complex64,
        w_prev: Complex64,
        depth: usize,
    ) -> Result<(Complex64, Complex64)> {
        let w = self.w_value(Complex64::from_polar(rho, to))?;
        if (w / w_prev).arg().abs() <= ARC_MAX_TURN || depth >= 24 {
            return Ok((pick_branch(w.sqrt(), root), w));
        }
        let mid = 0.5 * (from + to);
        let (r_mid, w_mid) = self.arc_segment(rho, from, mid, root, w_prev, depth + 1)?;
        self.arc_segment(rho, mid, to, r_mid, w_mid, depth + 1)
    }

    /// Hyperbolic Gauss map `g(z) = √W(z) / z` on the globally continuous
    /// branch (positive `√W` on `(r, 1)`).
    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok(self.sqrt_w_tracked(z)? / z)
    }

    /// `g` with the principal root of `W`. Agrees with [`g`](Self::g) up to
    /// sign; sufficient for every quantity invariant under `g ↦ -g`.
    pub fn g_principal(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.w_value(z)?.sqrt() / z)
    }

    /// `g'(z)` on the tracked branch.
    pub fn g_deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.g(z)? * self.g_log_deriv(z)?)
    }

    /// `u(z) = ½ log |Q₁(z) z^m / (1 - R(z))|`.
    pub fn u(&self, z: Complex64) -> Result<f64> {
        self.check_domain(z)?;
        let m = &self.moduli;
        if (z - m.z0).norm() < 1e-14 {
            return Err(Error::LogSingularity(z));
        }
        let phi = match self.removable(z, |w| self.u_modulus_raw(w)) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => return Err(Error::LogSingularity(z)),
            Err(e) => return Err(e),
        };
        Ok(0.5 * (phi.norm().ln() + m.m * z.norm().ln()))
    }

    /// `Q₁/(1 - R)`; removable at `z1`.
    fn u_modulus_raw(&self, z: Complex64) -> Result<Complex64> {
        let q1 = theta_quotient(&self.ctx, self.moduli.z1, z)?;
        let r = self.r_map(z)?;
        Ok(q1 / (1.0 - r))
    }

    /// `Q₁/(1 - R)` evaluated with the removable singularity at `z1` filled in.
    pub fn q1_over_one_minus_r(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        self.removable(z, |w| self.u_modulus_raw(w))
    }

    /// `F = R / g` on the tracked branch.
    pub fn f(&self, z: Complex64) -> Result<Complex64> {
        let r = self.r_map(z)?;
        Ok(r / self.g(z)?)
    }

    /// `g* = g - 1/F = g (1 - 1/R)`; the point at infinity where `F = 0`.
    pub fn gstar(&self, z: Complex64) -> Result<SpherePoint> {
        let g = self.g(z)?;
        let r = self.r_map(z)?;
        if r.norm() <= 1e-14 * (1.0 + self.moduli.b_r.abs()) {
            return Ok(SpherePoint::Infinity);
        }
        Ok(SpherePoint::Finite(g * (1.0 - 1.0 / r)))
    }

    /// Max-modulus witness
    /// `p = (Q₁ z^m / (1-R))² (F'/g' + F²) = Q₁ Q₂ z^{2m+2} (R'/γ + R² - R) / (R (1-R))`
    /// with `γ = g'/g`. Uses the principal branch of `z^{2m}`; `|p|` is
    /// branch independent.
    pub fn p(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        self.removable(z, |w| self.p_raw(w))
    }

    fn p_raw(&self, z: Complex64) -> Result<Complex64> {
        let m = &self.moduli;
        let gamma = self.g_log_deriv(z)?;
        if gamma.norm() == 0.0 {
            return Err(Error::Degenerate(format!("g' vanishes at {z}")));
        }
        let r = self.r_map(z)?;
        let dr = self.r_map_deriv(z)?;
        let q1 = theta_quotient(&self.ctx, m.z1, z)?;
        let q2 = theta_quotient(&self.ctx, m.z2, z)?;
        let power = (Complex64::new(2.0 * m.m + 2.0, 0.0) * z.ln()).exp();
        Ok(q1 * q2 * power * (dr / gamma + r * r - r) / (r * (1.0 - r)))
    }
}

/// The sign of `candidate` closest to `reference`.
fn pick_branch(candidate: Complex64, reference: Complex64) -> Complex64 {
    if (candidate * reference.conj()).re >= 0.0 {
        candidate
    } else {
        -candidate
    }
}

fn relocate(e: Error, z: Complex64) -> Error {
    match e {
        Error::Pole { .. } => Error::Pole { at: z },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn slit_map_pole_error_at_marker() {
        let ctx = ThetaContext::new(0.25).unwrap();
        assert!(matches!(slit_map(&ctx, -0.5, c(-0.5, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn slit_map_matches_theta_combination() {
        let ctx = ThetaContext::new(0.3).unwrap();
        let zj = -0.6;
        for z in [c(0.5, 0.4), c(-0.4, -0.2), c(0.95, 0.1)] {
            let a = zj / z;
            let b = zj * z;
            let direct = -ctx.theta_deriv(a).unwrap() / (z * ctx.theta(a).unwrap())
                - z * ctx.theta_deriv(b).unwrap() / ctx.theta(b).unwrap();
            let q = slit_map(&ctx, zj, z).unwrap();
            assert!((q - direct).norm() < 1e-11 * (1.0 + q.norm()));
        }
    }

    #[test]
    fn slit_map_residue_is_one() {
        let ctx = ThetaContext::new(0.25).unwrap();
        let zj = -0.55;
        let res = |d: f64| {
            let z = c(zj + d, 0.0);
            (z - zj) * slit_map(&ctx, zj, z).unwrap()
        };
        let r4 = res(1e-4);
        let r5 = res(1e-5);
        // residual is linear in the offset; extrapolate
        let rich = (10.0 * r5 - r4) / 9.0;
        assert!((rich - 1.0).norm() < 1e-8, "{rich}");
        assert!((r5 - 1.0).norm() < 1e-4);
    }

    #[test]
    fn slit_map_real_on_boundary_circles() {
        let r = 0.35;
        let ctx = ThetaContext::new(r).unwrap();
        for k in 0..24 {
            let t = 0.1 + k as f64 * 0.26;
            let a = slit_map(&ctx, -0.7, Complex64::from_polar(1.0, t)).unwrap();
            let b = slit_map(&ctx, -0.7, Complex64::from_polar(r, t)).unwrap();
            assert!(a.im.abs() < 1e-10 && b.im.abs() < 1e-10, "{a} {b}");
        }
    }

    #[test]
    fn slit_map_derivative_matches_differences() {
        let ctx = ThetaContext::new(0.3).unwrap();
        let z = c(0.2, 0.6);
        let h = 1e-6;
        let fd = (slit_map(&ctx, -0.5, z + h).unwrap() - slit_map(&ctx, -0.5, z - h).unwrap()) / (2.0 * h);
        let d = slit_map_deriv(&ctx, -0.5, z).unwrap();
        assert!((fd - d).norm() < 1e-7 * (1.0 + d.norm()));
    }

    #[test]
    fn theta_quotient_zero_and_unit_modulus() {
        let ctx = ThetaContext::new(0.25).unwrap();
        assert!(theta_quotient(&ctx, -0.6, c(-0.6, 0.0)).unwrap().norm() < 1e-12);
        for k in 0..16 {
            let z = Complex64::from_polar(1.0, 0.05 + 0.39 * k as f64);
            let q = theta_quotient(&ctx, -0.6, z).unwrap();
            assert!((q.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fit_rejects_bad_points() {
        let ctx = ThetaContext::new(0.25).unwrap();
        assert!(matches!(
            fit_r_coefficients(&ctx, -0.5, -0.5, -0.9),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            fit_r_coefficients(&ctx, -0.5, -0.1, -0.9),
            Err(Error::OutOfRange { .. })
        ));
        let (a, b) = fit_r_coefficients(&ctx, -0.5, -0.3, -0.9).unwrap();
        assert!(a.is_finite() && b.is_finite());
    }

    #[test]
    fn moduli_json_field_names() {
        let m = CanonicalModuli {
            r: 0.25,
            s: -0.5,
            m: -2.5,
            z0: -0.5,
            z1: -0.3,
            z2: -0.8,
            c1: 1.0,
            c2: 2.0,
            a_r: 0.1,
            b_r: 0.8,
            c_height: 2.2,
        };
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["r", "s", "m", "z0", "z1", "z2", "c1", "c2", "a_R", "b_R", "c_height"] {
            assert!(keys.contains(&k.to_string()), "{k}");
        }
        assert_eq!(keys.len(), 11);
        assert_eq!(CanonicalModuli::from_json(&m.to_json()).unwrap(), m);
    }
}
