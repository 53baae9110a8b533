//! The flat immersion into the half-space model and its fundamental forms.
//!
//! Given a Gauss map `g`, a harmonic `u` and `F` with `2 ∂u/∂z = F g'`,
//!
//! ```text
//! ψ₃ = e^{2u} / (1 + e^{4u} |F|²),      ψ₁ + iψ₂ = g - ψ₃ e^{2u} conj(F)
//! ds² = e^{-4u} |e^{4u}(dF + F² dg) - conj(dg)|²
//! dσ² = e^{-4u} |dg|² - e^{4u} |dF + F² dg|²
//! ```
//!
//! The same point follows from the two hyperbolic Gauss maps `g`,
//! `g* = g - 1/F` and `|ξ|² = e^{2u}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::annulus::{CanonicalSurface, SpherePoint};
use crate::error::{Error, Result};

/// Radial offset of the inner Richardson sample at the boundary circles;
/// the outer one sits at half this distance.
pub const BOUNDARY_OFFSET: f64 = 1e-6;

/// Points this close to the end are returned as the ideal end point.
const END_RADIUS: f64 = 1e-14;

/// A point of the upper half-space model. `x3 = 0` only for ideal points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub ideal: bool,
}

impl HalfSpacePoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self {
            x1,
            x2,
            x3,
            ideal: false,
        }
    }

    /// The ideal boundary point `(w, 0)`.
    pub fn ideal(w: Complex64) -> Self {
        Self {
            x1: w.re,
            x2: w.im,
            x3: 0.0,
            ideal: true,
        }
    }

    pub fn horizontal(&self) -> Complex64 {
        Complex64::new(self.x1, self.x2)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    /// Euclidean distance in the model.
    pub fn distance(&self, other: &HalfSpacePoint) -> f64 {
        let d = [self.x1 - other.x1, self.x2 - other.x2, self.x3 - other.x3];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// A point of the Klein (projective) ball model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KleinPoint {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub ideal: bool,
}

impl KleinPoint {
    pub fn to_array(self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }

    pub fn norm(&self) -> f64 {
        (self.k1 * self.k1 + self.k2 * self.k2 + self.k3 * self.k3).sqrt()
    }
}

/// `y ↦ (2y₁, 2y₂, ‖y‖² - 1) / (‖y‖² + 1)`; ideal points land on the unit
/// sphere.
pub fn klein_map(p: HalfSpacePoint) -> KleinPoint {
    let n2 = p.x1 * p.x1 + p.x2 * p.x2 + p.x3 * p.x3;
    let d = n2 + 1.0;
    KleinPoint {
        k1: 2.0 * p.x1 / d,
        k2: 2.0 * p.x2 / d,
        k3: (n2 - 1.0) / d,
        ideal: p.ideal,
    }
}

/// First fundamental form in the real coordinates `z = x + iy`, with the
/// conformal factor of the second form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "F_m")]
    pub f_m: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub lambda2: f64,
}

impl MetricSample {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f_m * self.f_m
    }

    /// Smallest eigenvalue of `ds² - dσ²` as a quadratic form.
    pub fn min_excess_eigenvalue(&self) -> f64 {
        let a = self.e - self.lambda2;
        let c = self.g - self.lambda2;
        let mean = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + self.f_m * self.f_m).sqrt();
        mean - rad
    }
}

/// Local holomorphic data `(g, g', u, F, F')` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub g: Complex64,
    pub dg: Complex64,
    pub u: f64,
    pub f: Complex64,
    pub df: Complex64,
}

impl Frame {
    /// The immersion from the frame.
    pub fn psi(&self) -> HalfSpacePoint {
        let e2u = (2.0 * self.u).exp();
        let x3 = e2u / (1.0 + e2u * e2u * self.f.norm_sqr());
        let w = self.g - x3 * e2u * self.f.conj();
        HalfSpacePoint::new(w.re, w.im, x3)
    }

    /// `ds²` and `dσ²`. Invariant under `g ↦ -g` (which flips `F` too).
    pub fn metric(&self) -> MetricSample {
        let e4u = (4.0 * self.u).exp();
        let inv = 1.0 / e4u;
        let shape = self.df + self.f * self.f * self.dg;
        let a = e4u * shape;
        let b = self.dg;
        let p = a - b.conj();
        let q = Complex64::i() * (a + b.conj());
        MetricSample {
            e: inv * p.norm_sqr(),
            f_m: inv * (p * q.conj()).re,
            g: inv * q.norm_sqr(),
            lambda2: inv * b.norm_sqr() - e4u * shape.norm_sqr(),
        }
    }
}

/// A flat surface given by holomorphic data on a planar domain.
pub trait FlatSurface {
    /// Frame on the globally continuous branch of `g`.
    fn frame(&self, z: Complex64) -> Result<Frame>;

    /// Frame on any local branch; enough for the metric.
    fn metric_frame(&self, z: Complex64) -> Result<Frame> {
        self.frame(z)
    }

    /// First form at `z`; errors unless it is Riemannian.
    fn first_form(&self, z: Complex64) -> Result<MetricSample> {
        let m = self.metric_frame(z)?.metric();
        let det = m.det();
        if !(m.e > 0.0 && det > 0.0) {
            return Err(Error::NonRiemannian { at: z, det });
        }
        Ok(m)
    }
}

impl CanonicalSurface {
    /// Frame for a given value of `g` at `z` (either sign).
    pub fn frame_with_g(&self, z: Complex64, g: Complex64) -> Result<Frame> {
        let gamma = self.g_log_deriv(z)?;
        let r = self.r_map(z)?;
        let dr = self.r_map_deriv(z)?;
        let u = self.u(z)?;
        Ok(Frame {
            g,
            dg: g * gamma,
            u,
            f: r / g,
            df: dr / g - r * gamma / g,
        })
    }
}

impl FlatSurface for CanonicalSurface {
    fn frame(&self, z: Complex64) -> Result<Frame> {
        let g = self.g(z)?;
        self.frame_with_g(z, g)
    }

    fn metric_frame(&self, z: Complex64) -> Result<Frame> {
        let g = self.g_principal(z)?;
        self.frame_with_g(z, g)
    }
}

/// `ψ(z)` on the closed annulus.
///
/// The end `z0` maps to the ideal point `(g(z0), 0)`. On (and within
/// [`BOUNDARY_OFFSET`]/2 of) the boundary circles the value is the linear
/// radial extrapolation from offsets [`BOUNDARY_OFFSET`] and half of it.
pub fn eval_psi(surface: &CanonicalSurface, z: Complex64) -> Result<HalfSpacePoint> {
    surface.check_domain(z)?;
    let end = surface.end();
    if (z - end).norm() < END_RADIUS {
        return Ok(HalfSpacePoint::ideal(surface.g(end)?));
    }
    let r = surface.moduli().r;
    let rho = z.norm();
    let (edge, inward) = if 1.0 - rho < rho - r {
        (1.0, -1.0)
    } else {
        (r, 1.0)
    };
    let t = (rho - edge).abs();
    if t >= 0.5 * BOUNDARY_OFFSET {
        return match surface.frame(z) {
            Ok(fr) => Ok(fr.psi()),
            Err(Error::LogSingularity(_)) | Err(Error::Pole { .. }) => {
                Ok(HalfSpacePoint::ideal(surface.g(end)?))
            }
            Err(e) => Err(e),
        };
    }
    let dir = z / rho;
    let t1 = BOUNDARY_OFFSET;
    let t2 = 0.5 * BOUNDARY_OFFSET;
    let p1 = surface.frame(dir * (edge + inward * t1))?.psi();
    let p2 = surface.frame(dir * (edge + inward * t2))?.psi();
    let w = (t - t2) / (t1 - t2);
    Ok(HalfSpacePoint::new(
        p2.x1 + w * (p1.x1 - p2.x1),
        p2.x2 + w * (p1.x2 - p2.x2),
        (p2.x3 + w * (p1.x3 - p2.x3)).max(0.0),
    ))
}

/// `ψ` from the hyperbolic Gauss maps and `|ξ|`:
///
/// ```text
/// ψ₁ + iψ₂ = g - |ξ|⁴ (g - g*) / (|ξ|⁴ + |g - g*|²)
/// ψ₃       = |ξ|² |g - g*|² / (|ξ|⁴ + |g - g*|²)
/// ```
pub fn eval_psi_from_gauss_maps(g: Complex64, gstar: SpherePoint, xi_abs: f64) -> Result<HalfSpacePoint> {
    if !(xi_abs >= 0.0 && xi_abs.is_finite()) {
        return Err(Error::OutOfRange {
            name: "|xi|",
            value: xi_abs,
            range: "[0, inf)",
        });
    }
    let xi2 = xi_abs * xi_abs;
    let gs = match gstar {
        // g* = ∞: the fraction in ψ₁ + iψ₂ vanishes and ψ₃ = |ξ|²
        SpherePoint::Infinity => {
            return Ok(if xi2 == 0.0 {
                HalfSpacePoint::ideal(g)
            } else {
                HalfSpacePoint::new(g.re, g.im, xi2)
            })
        }
        SpherePoint::Finite(w) => w,
    };
    let d = g - gs;
    let d2 = d.norm_sqr();
    if d2 == 0.0 {
        return Err(Error::Degenerate(format!("g = g* = {g}")));
    }
    if xi2 == 0.0 {
        return Ok(HalfSpacePoint::ideal(g));
    }
    let xi4 = xi2 * xi2;
    let den = xi4 + d2;
    let w = g - xi4 * d / den;
    Ok(HalfSpacePoint::new(w.re, w.im, xi2 * d2 / den))
}

/// Same point as [`eval_psi`] at an interior point, computed through
/// [`eval_psi_from_gauss_maps`] with `|ξ|² = e^{2u}`.
pub fn eval_psi_via_gauss_maps(surface: &CanonicalSurface, z: Complex64) -> Result<HalfSpacePoint> {
    let g = surface.g(z)?;
    let gstar = surface.gstar(z)?;
    let xi = surface.u(z)?.exp();
    eval_psi_from_gauss_maps(g, gstar, xi)
}

/// The max-modulus witness `p`; `|p| = 1` on the boundary, `< 1` inside.
pub fn eval_p(surface: &CanonicalSurface, z: Complex64) -> Result<Complex64> {
    surface.p(z)
}

/// The first form of a two-singularity surface at an interior point.
pub fn first_form(surface: &CanonicalSurface, z: Complex64) -> Result<MetricSample> {
    FlatSurface::first_form(surface, z)
}

/// The one-singularity rotational family, parametrized by the constant
/// value `b_rot ∈ (0, 1)` of `R = F g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationalModuli {
    pub b_rot: f64,
    /// `(1-b)^{b-1} b^{-b}`.
    pub a_rot: f64,
    /// Radius `√(b/(1-b))` of the disc in the `g`-plane.
    pub s_rot: f64,
    /// `1 - 2b`, the exponent parameter of the disc parametrization.
    pub a_sec: f64,
    /// Radius with `4 r^{2 a_sec} = 1 - a_sec²`; defined for `b < 1/2`.
    pub r_disc: Option<f64>,
}

impl RotationalModuli {
    pub fn new(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::OutOfRange {
                name: "b",
                value: b,
                range: "(0, 1)",
            });
        }
        let a_sec = 1.0 - 2.0 * b;
        let r_disc = if a_sec > 0.0 {
            Some(((1.0 - a_sec * a_sec) / 4.0).powf(1.0 / (2.0 * a_sec)))
        } else {
            None
        };
        Ok(Self {
            b_rot: b,
            a_rot: (1.0 - b).powf(b - 1.0) * b.powf(-b),
            s_rot: (b / (1.0 - b)).sqrt(),
            a_sec,
            r_disc,
        })
    }

    /// Height of the singular point, `ψ₃` at `|g| = s_rot`.
    pub fn apex_height(&self) -> f64 {
        let (a, b, s) = (self.a_rot, self.b_rot, self.s_rot);
        a * s.powf(2.0 * b) / (1.0 + a * a * b * b * s.powf(4.0 * b - 2.0))
    }

    fn check_disc(&self, g: Complex64) -> Result<()> {
        let n = g.norm();
        if !n.is_finite() || n > self.s_rot * (1.0 + 1e-12) {
            return Err(Error::Domain(g));
        }
        Ok(())
    }
}

/// Frame in the coordinate `g`: `e^{2u} = a|g|^{2b}`, `F = b/g`.
impl FlatSurface for RotationalModuli {
    fn frame(&self, g: Complex64) -> Result<Frame> {
        self.check_disc(g)?;
        if g.norm() == 0.0 {
            return Err(Error::LogSingularity(g));
        }
        let b = self.b_rot;
        Ok(Frame {
            g,
            dg: Complex64::new(1.0, 0.0),
            u: 0.5 * (self.a_rot.ln() + 2.0 * b * g.norm().ln()),
            f: b / g,
            df: -b / (g * g),
        })
    }
}

/// Closed form of the rotational surface over `0 < |g| ≤ s_rot`:
///
/// ```text
/// ψ̃(g) = ( g (1 - a²(b-b²)|g|^{4b-2}), a|g|^{2b} ) / (1 + a²b²|g|^{4b-2})
/// ```
pub fn eval_psi_rotational(rot: &RotationalModuli, g: Complex64) -> Result<HalfSpacePoint> {
    rot.check_disc(g)?;
    let n = g.norm();
    if n == 0.0 {
        return Ok(HalfSpacePoint::ideal(Complex64::new(0.0, 0.0)));
    }
    let (a, b) = (rot.a_rot, rot.b_rot);
    let t = n.powf(4.0 * b - 2.0);
    let den = 1.0 + a * a * b * b * t;
    let w = g * (1.0 - a * a * (b - b * b) * t) / den;
    Ok(HalfSpacePoint::new(w.re, w.im, a * n.powf(2.0 * b) / den))
}

/// The rotational surface from the disc data `g = z`,
/// `g* = (a+1)/(a-1) z` on `|z| < r_disc`, rescaled so the singular point
/// sits at height one.
///
/// Here `|ξ|² = C |z|^{1-a}`, and `C` is fixed by requiring the second form
/// to degenerate on `|z| = r_disc`. The result matches
/// [`eval_psi_rotational`] at `g = z s_rot / r_disc`.
pub fn eval_psi_rotational_disc(rot: &RotationalModuli, z: Complex64) -> Result<HalfSpacePoint> {
    let r_disc = rot.r_disc.ok_or(Error::OutOfRange {
        name: "b",
        value: rot.b_rot,
        range: "(0, 1/2) for the disc parametrization",
    })?;
    let n = z.norm();
    if !n.is_finite() || n > r_disc * (1.0 + 1e-12) {
        return Err(Error::Domain(z));
    }
    let a = rot.a_sec;
    let b = rot.b_rot;
    let scale = r_disc.powf(1.0 - 2.0 * b) / (b * (1.0 - b)).sqrt();
    let at = |w: Complex64| {
        let gstar = SpherePoint::Finite((a + 1.0) / (a - 1.0) * w);
        let xi = (scale * w.norm().powf(2.0 * b)).sqrt();
        eval_psi_from_gauss_maps(w, gstar, xi)
    };
    let apex = at(Complex64::new(r_disc, 0.0))?.x3;
    let p = at(z)?;
    Ok(HalfSpacePoint {
        x1: p.x1 / apex,
        x2: p.x2 / apex,
        x3: p.x3 / apex,
        ideal: p.ideal,
    })
}
