//! The validation battery behind `flatfront validate`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::annulus::{CanonicalModuli, CanonicalSurface};
use crate::curvature::numerical_gauss_curvature;
use crate::error::Result;
use crate::immersion::{eval_psi, HalfSpacePoint};
use crate::solver::{boundary_ranges, outer_sign_changes, residuals};
use crate::theta::ThetaContext;
use crate::tolerances::{
    master_tolerance, BOUNDARY_P, CURVATURE, CURVATURE_STEP, END_POINT, END_PROBE, SINGULAR_POINT,
};

/// Samples of `|p|` per boundary circle.
const BOUNDARY_SAMPLES: usize = 256;
/// Samples per singular-circle image.
const CIRCLE_SAMPLES: usize = 64;
/// Interior points are kept this far from the end for curvature samples.
const CURVATURE_END_GAP: f64 = 0.05;

/// Value recorded for a quantity that could not be evaluated; keeps every
/// field finite.
pub const FAILED: f64 = f64::MAX;

/// Aggregated checks; serialized with these exact field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub c1_res: f64,
    pub c2_res: f64,
    pub c3_res: f64,
    pub max_abs_p_interior: f64,
    pub boundary_p_deviation: f64,
    pub max_abs_curvature: f64,
    pub sing1_error: f64,
    pub sing2_error: f64,
    pub end_error: f64,
    pub rs_ok: bool,
    pub outer_sign_changes: usize,
}

impl ValidationReport {
    /// Runs the battery on an `grid × grid` interior sample.
    pub fn run(moduli: &CanonicalModuli, grid: usize) -> Result<Self> {
        let ctx = ThetaContext::new(moduli.r)?;
        let [c1, c2, c3] = residuals(moduli, &ctx);
        let rs_ok = boundary_ranges(moduli).map(|b| b.ok()).unwrap_or(false);
        let outer = outer_sign_changes(moduli.r, moduli.s).unwrap_or(0);
        // geometry of invalid moduli is still sampled where it evaluates
        let surface = match CanonicalSurface::new(*moduli) {
            Ok(s) => s,
            Err(_) => CanonicalSurface::new_unchecked(*moduli)?,
        };
        Ok(Self {
            c1_res: finite(c1),
            c2_res: finite(c2),
            c3_res: finite(c3),
            max_abs_p_interior: finite(max_interior_p(&surface, grid.max(1))),
            boundary_p_deviation: finite(boundary_p_deviation(&surface)),
            max_abs_curvature: finite(max_curvature(&surface)),
            sing1_error: finite(circle_error(&surface, 1.0, 1.0)),
            sing2_error: finite(circle_error(&surface, moduli.r, apex_height(moduli))),
            end_error: finite(end_error(&surface)),
            rs_ok,
            outer_sign_changes: outer,
        })
    }

    /// Names of the checks that miss their tolerance.
    pub fn failures(&self) -> Vec<&'static str> {
        let tol = master_tolerance();
        let mut out = Vec::new();
        for (name, value, bound) in [
            ("c1_res", self.c1_res, tol),
            ("c2_res", self.c2_res, tol),
            ("c3_res", self.c3_res, tol),
            ("max_abs_p_interior", self.max_abs_p_interior, 1.0),
            ("boundary_p_deviation", self.boundary_p_deviation, BOUNDARY_P),
            ("max_abs_curvature", self.max_abs_curvature, CURVATURE),
            ("sing1_error", self.sing1_error, SINGULAR_POINT),
            ("sing2_error", self.sing2_error, SINGULAR_POINT),
            ("end_error", self.end_error, END_POINT),
        ] {
            if !(value < bound) {
                out.push(name);
            }
        }
        if !self.rs_ok {
            out.push("rs_ok");
        }
        if self.outer_sign_changes == 0 {
            out.push("outer_sign_changes");
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn finite(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        FAILED
    }
}

/// `|z1| r^{m+1}`, the height of the inner singular point.
pub fn apex_height(m: &CanonicalModuli) -> f64 {
    m.z1.abs() * m.r.powf(m.m + 1.0)
}

/// Max of `|p|` over a log-radial × angular grid of cell midpoints.
pub fn max_interior_p(surface: &CanonicalSurface, grid: usize) -> f64 {
    let r = surface.moduli().r;
    let mut max: f64 = 0.0;
    for i in 0..grid {
        let rho = (r.ln() * (1.0 - (i as f64 + 0.5) / grid as f64)).exp();
        for j in 0..grid {
            let z = Complex64::from_polar(rho, std::f64::consts::TAU * (j as f64 + 0.5) / grid as f64);
            match surface.p(z) {
                Ok(p) if p.norm().is_finite() => max = max.max(p.norm()),
                _ => return f64::INFINITY,
            }
        }
    }
    max
}

/// Max of `||p| - 1|` over both boundary circles.
pub fn boundary_p_deviation(surface: &CanonicalSurface) -> f64 {
    let r = surface.moduli().r;
    let mut max: f64 = 0.0;
    for rho in [1.0, r] {
        for k in 0..BOUNDARY_SAMPLES {
            let z = Complex64::from_polar(rho, std::f64::consts::TAU * (k as f64 + 0.5) / BOUNDARY_SAMPLES as f64);
            match surface.p(z) {
                Ok(p) => max = max.max((p.norm() - 1.0).abs()),
                Err(_) => return f64::INFINITY,
            }
        }
    }
    max
}

/// Interior points used for the curvature samples: four radii by four
/// angles, skipping points near the end.
pub fn curvature_points(surface: &CanonicalSurface) -> Vec<Complex64> {
    let m = surface.moduli();
    let mut out = Vec::new();
    for i in 0..4 {
        let rho = (m.r.ln() * (1.0 - (i as f64 + 0.5) / 4.0)).exp();
        for j in 0..4 {
            let z = Complex64::from_polar(rho, std::f64::consts::TAU * (j as f64 + 0.3) / 4.0);
            if (z - surface.end()).norm() > CURVATURE_END_GAP {
                out.push(z);
            }
        }
    }
    out
}

fn max_curvature(surface: &CanonicalSurface) -> f64 {
    let mut max: f64 = 0.0;
    for z in curvature_points(surface) {
        match numerical_gauss_curvature(surface, z, CURVATURE_STEP) {
            Ok(k) => max = max.max(k.abs()),
            Err(_) => return f64::INFINITY,
        }
    }
    max
}

/// Max distance of the image of the circle `|z| = rho` from `(0, 0, height)`.
pub fn circle_error(surface: &CanonicalSurface, rho: f64, height: f64) -> f64 {
    let target = HalfSpacePoint::new(0.0, 0.0, height);
    let mut max: f64 = 0.0;
    for k in 0..CIRCLE_SAMPLES {
        let z = Complex64::from_polar(rho, std::f64::consts::TAU * k as f64 / CIRCLE_SAMPLES as f64);
        match eval_psi(surface, z) {
            Ok(p) => max = max.max(p.distance(&target)),
            Err(_) => return f64::INFINITY,
        }
    }
    max
}

/// Max distance of `ψ(z0 ± δ)`, `ψ(z0 ± iδ)` from the ideal end point, with
/// `δ =` [`END_PROBE`].
pub fn end_error(surface: &CanonicalSurface) -> f64 {
    let end = surface.end();
    let ideal = match surface.g(end) {
        Ok(g) => HalfSpacePoint::ideal(g),
        Err(_) => return f64::INFINITY,
    };
    let mut max: f64 = 0.0;
    for dir in [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0), Complex64::i(), -Complex64::i()] {
        match eval_psi(surface, end + END_PROBE * dir) {
            Ok(p) => max = max.max(p.distance(&ideal)),
            Err(_) => return f64::INFINITY,
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_names_are_fixed() {
        let r = ValidationReport {
            c1_res: 0.0,
            c2_res: 0.0,
            c3_res: 0.0,
            max_abs_p_interior: 0.5,
            boundary_p_deviation: 0.0,
            max_abs_curvature: 0.0,
            sing1_error: 0.0,
            sing2_error: 0.0,
            end_error: 0.0,
            rs_ok: true,
            outer_sign_changes: 1,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 11);
        assert!(r.passed());
        let bad = ValidationReport {
            c3_res: 1e-3,
            rs_ok: false,
            ..r
        };
        assert_eq!(bad.failures(), vec!["c3_res", "rs_ok"]);
    }

    #[test]
    fn non_finite_values_become_sentinel() {
        assert_eq!(finite(f64::NAN), FAILED);
        assert_eq!(finite(f64::INFINITY), FAILED);
        assert_eq!(finite(2.0), 2.0);
    }
}
