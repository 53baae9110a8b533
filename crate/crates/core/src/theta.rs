//! Annular Jacobi theta function.
//!
//! ```text
//! θ₁(z) = C (1 - 1/z) ∏_{k≥1} (1 - r^{2k} z)(1 - r^{2k}/z),   C = ∏_{k≥1} (1 - r^{2k})
//! ```
//!
//! The zeros of θ₁ are exactly the powers `r^{2k}`, `k ∈ ℤ`, all simple. The
//! product converges for every `z ≠ 0`, but it is only evaluated directly on
//! the fundamental annulus `r ≤ |z| ≤ 1/r`; other arguments are reduced with
//!
//! ```text
//! θ₁(z) = -r² z θ₁(r² z),        θ₁(z) = -θ₁(z / r²) / z
//! ```
//!
//! and the matching relations for θ₁' and `h(z) = z θ₁'(z)/θ₁(z)`:
//! `h(z) = 1 + h(r² z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::{POLE_THRESHOLD, THETA_TRUNCATION};

/// Guard on the number of argument-reduction steps.
const MAX_REDUCTIONS: usize = 4096;

/// Precomputed state for θ₁ at a fixed annulus modulus.
///
/// Immutable once built; every evaluation is a pure function of the context
/// and its argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaContext {
    r: f64,
    n_terms: usize,
    c_const: f64,
    /// `r^{2k}` for `k = 1..=n_terms`.
    powers: Vec<f64>,
}

impl ThetaContext {
    /// Context with the default truncation `r^{2n} < 1e-18`.
    pub fn new(r: f64) -> Result<Self> {
        check_modulus(r)?;
        let n = (THETA_TRUNCATION.ln() / (2.0 * r.ln())).ceil().max(1.0) as usize;
        Self::with_terms(r, n)
    }

    /// Context with an explicit product truncation order.
    pub fn with_terms(r: f64, n_terms: usize) -> Result<Self> {
        check_modulus(r)?;
        if n_terms == 0 {
            return Err(Error::Degenerate("theta product needs at least one term".into()));
        }
        let r2 = r * r;
        let mut powers = Vec::with_capacity(n_terms);
        let mut a = 1.0;
        for _ in 0..n_terms {
            a *= r2;
            powers.push(a);
        }
        let c_const = powers.iter().map(|a| 1.0 - a).product();
        Ok(Self {
            r,
            n_terms,
            c_const,
            powers,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// The constant `C = ∏ (1 - r^{2k})`.
    pub fn c_const(&self) -> f64 {
        self.c_const
    }

    /// θ₁(z).
    pub fn theta(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.theta_with_deriv(z)?.0)
    }

    /// θ₁'(z).
    pub fn theta_deriv(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.theta_with_deriv(z)?.1)
    }

    /// `(θ₁(z), θ₁'(z))` in one pass.
    ///
    /// Each reduction step is linear in `(θ₁, θ₁')` at the reduced argument,
    /// so the steps are accumulated as a 2×2 matrix and applied once to the
    /// product evaluated on the fundamental annulus.
    pub fn theta_with_deriv(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        check_argument(z)?;
        let r2 = self.r * self.r;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        // [θ(z), θ'(z)]ᵀ = m · [θ(w), θ'(w)]ᵀ
        let mut m = [[one, zero], [zero, one]];
        let mut w = z;
        let mut steps = 0;
        while w.norm() > 1.0 / self.r {
            // θ(w) = -r² w θ(r²w),  θ'(w) = -r² θ(r²w) - r⁴ w θ'(r²w)
            let step = [[-r2 * w, zero], [-r2 * one, -r2 * r2 * w]];
            m = mat_mul(m, step);
            w *= r2;
            steps += 1;
            if steps > MAX_REDUCTIONS {
                return Err(Error::Domain(z));
            }
        }
        while w.norm() < self.r {
            // θ(w) = -θ(w/r²)/w,  θ'(w) = θ(w/r²)/w² - θ'(w/r²)/(r² w)
            let step = [[-1.0 / w, zero], [1.0 / (w * w), -1.0 / (r2 * w)]];
            m = mat_mul(m, step);
            w /= r2;
            steps += 1;
            if steps > MAX_REDUCTIONS {
                return Err(Error::Domain(z));
            }
        }
        let (t, dt) = self.theta_base(w);
        Ok((m[0][0] * t + m[0][1] * dt, m[1][0] * t + m[1][1] * dt))
    }

    /// Product form on the fundamental annulus. The vanishing factor
    /// `1 - 1/w` is kept out of the logarithmic derivative so the result is
    /// exact at the zero `w = 1`.
    fn theta_base(&self, w: Complex64) -> (Complex64, Complex64) {
        let mut prod = Complex64::new(1.0, 0.0);
        let mut log_deriv = Complex64::new(0.0, 0.0);
        let inv = 1.0 / w;
        for &a in &self.powers {
            let f1 = 1.0 - a * w;
            let f2 = 1.0 - a * inv;
            prod *= f1 * f2;
            log_deriv += -a / f1 + a * inv * inv / f2;
        }
        let lead = 1.0 - inv;
        let theta = self.c_const * lead * prod;
        let deriv = self.c_const * prod * (inv * inv + lead * log_deriv);
        (theta, deriv)
    }

    /// `h(z) = z θ₁'(z) / θ₁(z)`.
    ///
    /// Fails with [`Error::Pole`] at the zeros `r^{2k}` of θ₁.
    pub fn h(&self, z: Complex64) -> Result<Complex64> {
        let (w, shift, _) = self.reduce(z)?;
        let lead = 1.0 - 1.0 / w;
        if lead.norm() < POLE_THRESHOLD {
            return Err(Error::Pole { at: z });
        }
        let mut sum = 1.0 / (w - 1.0);
        for &a in &self.powers {
            sum += -a * w / (1.0 - a * w) + a / (w - a);
        }
        Ok(sum + shift as f64)
    }

    /// `h'(z)`.
    pub fn h_deriv(&self, z: Complex64) -> Result<Complex64> {
        let (w, _, scale) = self.reduce(z)?;
        let lead = 1.0 - 1.0 / w;
        if lead.norm() < POLE_THRESHOLD {
            return Err(Error::Pole { at: z });
        }
        let mut sum = -1.0 / ((w - 1.0) * (w - 1.0));
        for &a in &self.powers {
            let d1 = 1.0 - a * w;
            let d2 = w - a;
            sum -= a / (d1 * d1) + a / (d2 * d2);
        }
        Ok(sum * scale)
    }

    /// `f₀(z) = h(z/z₀) + h(z z₀)`.
    pub fn f0(&self, z0: Complex64, z: Complex64) -> Result<Complex64> {
        check_argument(z0)?;
        Ok(self.h(z / z0)? + self.h(z * z0)?)
    }

    /// `f̃(z₀) = h(z₁₀/z₀) + h(z₁₀ z₀)` with `z₁₀ = r^{-2(m+2)} / z₂`, where
    /// `z₂` is the inner solution belonging to `z₀`.
    pub fn ftilde(&self, z0: Complex64, z2: Complex64, m: f64) -> Result<Complex64> {
        check_argument(z2)?;
        let z10 = self.r.powf(-2.0 * (m + 2.0)) / z2;
        self.f0(z0, z10)
    }

    /// Maps `z` into `r ≤ |w| ≤ 1/r`. Returns the reduced argument, the
    /// additive shift of `h` and the multiplicative factor of `h'`.
    fn reduce(&self, z: Complex64) -> Result<(Complex64, i64, f64)> {
        check_argument(z)?;
        let r2 = self.r * self.r;
        let mut w = z;
        let mut shift = 0i64;
        let mut scale = 1.0;
        while w.norm() > 1.0 / self.r {
            w *= r2;
            shift += 1;
            scale *= r2;
            if shift as usize > MAX_REDUCTIONS {
                return Err(Error::Domain(z));
            }
        }
        while w.norm() < self.r {
            w /= r2;
            shift -= 1;
            scale /= r2;
            if (-shift) as usize > MAX_REDUCTIONS {
                return Err(Error::Domain(z));
            }
        }
        Ok((w, shift, scale))
    }
}

fn check_modulus(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidModulus(r))
    }
}

fn check_argument(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() || z.norm() == 0.0 {
        Err(Error::Domain(z))
    } else {
        Ok(())
    }
}

fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Plain truncated product, no argument reduction, many terms.
    fn naive_theta(r: f64, z: Complex64, terms: usize) -> Complex64 {
        let mut p = 1.0 - 1.0 / z;
        let mut cc = 1.0;
        for k in 1..=terms {
            let a = r.powi(2 * k as i32);
            p *= (1.0 - a * z) * (1.0 - a / z);
            cc *= 1.0 - a;
        }
        cc * p
    }

    #[test]
    fn truncation_order_meets_tolerance() {
        for r in [0.1, 0.25, 0.5, 0.7, 0.9] {
            let ctx = ThetaContext::new(r).unwrap();
            assert!(r.powi(2 * ctx.n_terms() as i32) < 1e-18 * (1.0 + 1e-12));
            assert!(ctx.c_const() > 0.0 && ctx.c_const() < 1.0);
        }
    }

    #[test]
    fn rejects_bad_modulus_and_zero_argument() {
        assert!(matches!(ThetaContext::new(0.0), Err(Error::InvalidModulus(_))));
        assert!(matches!(ThetaContext::new(1.0), Err(Error::InvalidModulus(_))));
        assert!(ThetaContext::new(f64::NAN).is_err());
        let ctx = ThetaContext::new(0.5).unwrap();
        assert!(matches!(ctx.theta(c(0.0, 0.0)), Err(Error::Domain(_))));
        assert!(matches!(ctx.theta_deriv(c(0.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_vanishes_at_one_and_r_squared() {
        let ctx = ThetaContext::new(0.5).unwrap();
        assert_eq!(ctx.theta(c(1.0, 0.0)).unwrap().norm(), 0.0);
        assert!(ctx.theta(c(0.25, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn theta_matches_high_precision_product() {
        // 200-term product evaluated at 50 significant digits.
        let ctx = ThetaContext::new(0.25).unwrap();
        let v = ctx.theta(c(-0.5, 0.0)).unwrap();
        let expected = 3.283_265_121_310_307_7;
        assert!((v.re - expected).abs() < 1e-15 * expected);
        assert!(v.im.abs() < 1e-15);

        let v = ctx.theta(c(0.3, 0.4)).unwrap();
        let expected = c(-0.286_939_762_006_030_8, 1.335_746_603_793_657_6);
        assert!((v - expected).norm() < 1e-14);

        let ctx = ThetaContext::new(0.7).unwrap();
        let v = ctx.theta(c(-0.9, 0.2)).unwrap();
        let expected = c(3.253_410_431_513_84, 0.439_392_177_498_178_5);
        assert!((v - expected).norm() < 1e-13);
    }

    #[test]
    fn theta_agrees_with_unreduced_product() {
        let ctx = ThetaContext::new(0.25).unwrap();
        for z in [c(-0.5, 0.0), c(0.02, 0.01), c(7.0, -3.0), c(-0.05, 0.0)] {
            let direct = naive_theta(0.25, z, 200);
            let v = ctx.theta(z).unwrap();
            assert!((v - direct).norm() < 1e-13 * (1.0 + direct.norm()), "z = {z}");
        }
    }

    #[test]
    fn derivative_matches_high_precision_values() {
        let ctx = ThetaContext::new(0.5).unwrap();
        let d = ctx.theta_deriv(c(1.0, 0.0)).unwrap();
        assert!((d.re - 0.326_424_588_452_254_98).abs() < 1e-15);
        assert!(d.im.abs() < 1e-16);
        // simple zero: θ'(1) = C³
        assert!((d.re - ctx.c_const().powi(3)).abs() < 1e-15);

        let ctx = ThetaContext::new(0.25).unwrap();
        let d = ctx.theta_deriv(c(0.3, 0.4)).unwrap();
        let expected = c(-0.256_234_174_276_252_96, -3.481_512_337_645_281);
        assert!((d - expected).norm() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_differences_at_zero() {
        let ctx = ThetaContext::new(0.5).unwrap();
        let step = 1e-5;
        let fd = (ctx.theta(c(1.0 + step, 0.0)).unwrap() - ctx.theta(c(1.0 - step, 0.0)).unwrap())
            / (2.0 * step);
        let d = ctx.theta_deriv(c(1.0, 0.0)).unwrap();
        assert!(d.re != 0.0);
        assert!((d - fd).norm() < 1e-9);
    }

    #[test]
    fn derivative_reduction_identity() {
        let r = 0.25;
        let ctx = ThetaContext::new(r).unwrap();
        let z = c(-0.6, 0.0);
        let r2 = r * r;
        let lhs = ctx.theta_deriv(z).unwrap()
            + r2 * ctx.theta(r2 * z).unwrap()
            + r2 * r2 * z * ctx.theta_deriv(r2 * z).unwrap();
        assert!(lhs.norm() < 1e-12);
    }

    #[test]
    fn derivative_conjugation() {
        let ctx = ThetaContext::new(0.4).unwrap();
        let z = c(0.55, -0.3);
        let a = ctx.theta_deriv(z.conj()).unwrap();
        let b = ctx.theta_deriv(z).unwrap().conj();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn h_at_r_is_minus_one() {
        for r in [0.1, 0.25, 0.5, 0.7] {
            let ctx = ThetaContext::new(r).unwrap();
            let h = ctx.h(c(r, 0.0)).unwrap();
            assert!((h + 1.0).norm() < 1e-10, "r = {r}: {h}");
        }
    }

    #[test]
    fn h_functional_equations() {
        let ctx = ThetaContext::new(0.25).unwrap();
        let z = c(0.7, 0.0);
        assert!((ctx.h(z).unwrap() + ctx.h(1.0 / z).unwrap() + 1.0).norm() < 1e-12);
        let z = c(-0.8, 0.0);
        let d = ctx.h(z).unwrap() - 1.0 - ctx.h(0.0625 * z).unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn h_pole_reports_location() {
        let ctx = ThetaContext::new(0.25).unwrap();
        match ctx.h(c(0.0625, 0.0)) {
            Err(Error::Pole { at }) => assert_eq!(at, c(0.0625, 0.0)),
            other => panic!("expected pole, got {other:?}"),
        }
        assert!(ctx.h(c(1.0, 0.0)).is_err());
        assert!(ctx.h(c(16.0, 0.0)).is_err());
    }

    #[test]
    fn h_deriv_matches_finite_differences() {
        let ctx = ThetaContext::new(0.3).unwrap();
        let step = 1e-6;
        for z in [c(0.5, 0.2), c(-0.7, 0.1), c(2.5, -1.0), c(0.05, 0.03)] {
            let fd = (ctx.h(z + step).unwrap() - ctx.h(z - step).unwrap()) / (2.0 * step);
            let d = ctx.h_deriv(z).unwrap();
            assert!((d - fd).norm() < 1e-6 * (1.0 + d.norm()), "z = {z}");
        }
    }

    #[test]
    fn f0_real_on_real_axis_and_ranges() {
        let ctx = ThetaContext::new(0.25).unwrap();
        let z0 = c(-0.5, 0.0);
        let v = ctx.f0(z0, c(-0.7, 0.0)).unwrap();
        assert!(v.im.abs() < 1e-12);
        assert!(ctx.f0(z0, c(-0.99, 0.0)).unwrap().re > -1.0);
        assert!(ctx.f0(z0, c(-0.45, 0.0)).unwrap().re < -2.0);
        // f0(-1) = h(1/|z0|) + h(|z0|) = -1
        assert!((ctx.f0(z0, c(-1.0, 0.0)).unwrap().re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn f0_propagates_pole() {
        let ctx = ThetaContext::new(0.25).unwrap();
        assert!(matches!(ctx.f0(c(-0.5, 0.0), c(-0.5, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn ftilde_limits() {
        let r = 0.25;
        let ctx = ThetaContext::new(r).unwrap();
        let m = -2.3;
        let x = r.powf(-2.0 * (m + 2.0));
        // z2 -> -1 as z0 -> -1, so z10 -> -x and f̃ -> 2 h(x)
        let z0 = c(-1.0 + 1e-9, 0.0);
        let lim = ctx.ftilde(z0, c(-1.0, 0.0), m).unwrap();
        let expected = 2.0 * ctx.h(c(x, 0.0)).unwrap();
        assert!((lim - expected).norm() < 1e-6);
        // z10 -> z0 from the right drives f̃ to -∞
        let z0 = -0.6;
        let z2 = x / (z0 + 1e-9);
        let v = ctx.ftilde(c(z0, 0.0), c(z2, 0.0), m).unwrap();
        assert!(v.re < -1e6, "{v}");
    }
}
