//! Numerical thresholds shared by the solver, the validator and the tests.

/// Truncation target for the theta product: `r^(2 n_terms)` falls below this.
pub const THETA_TRUNCATION: f64 = 1e-18;

/// A factor `1 - 1/w` smaller than this (after argument reduction) is
/// treated as an exact zero of θ₁.
pub const POLE_THRESHOLD: f64 = 1e-13;

/// Slack on the closed annulus `r <= |z| <= 1`.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Master residual tolerance for (C1)-(C3); `FLATFRONT_TOL` overrides it.
pub const RESIDUAL: f64 = 1e-10;

/// Residual of the scalar equations solved for `m` and `z2`.
pub const SCALAR_RESIDUAL: f64 = 1e-12;

/// Bisection hands over to the secant polish below this bracket width.
pub const BISECTION_HANDOFF: f64 = 1e-6;

/// Secant polish stops once steps fall below this.
pub const SECANT_TOLERANCE: f64 = 1e-13;

/// Offset of the outer scan from `z0 = -1`.
pub const OUTER_SCAN_DELTA: f64 = 1e-6;

/// Number of intervals in the outer scan over `z0`.
pub const OUTER_SCAN_STEPS: usize = 256;

/// Allowed deviation of `|p|` from one on the boundary circles.
pub const BOUNDARY_P: f64 = 1e-8;

/// Bound on the Brioschi curvature of the (flat) first form.
pub const CURVATURE: f64 = 1e-4;

/// Default step of the Brioschi stencil. The order-6 stencil is roundoff
/// limited below about 1e-3 where the metric is strongly anisotropic.
pub const CURVATURE_STEP: f64 = 1e-3;

/// Allowed distance of extrapolated boundary-circle images from the apexes.
pub const SINGULAR_POINT: f64 = 1e-6;

/// Allowed distance of `ψ(z0 + δ)` from the ideal end point, with δ = [`END_PROBE`].
pub const END_POINT: f64 = 1e-5;

/// Radial probe distance used to measure convergence to the end.
pub const END_PROBE: f64 = 1e-6;

/// Default radius of the disc excised around the end in meshes.
pub const RHO_END: f64 = 1e-2;

/// Reads the master residual tolerance, honouring `FLATFRONT_TOL`.
pub fn master_tolerance() -> f64 {
    std::env::var("FLATFRONT_TOL")
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
        .unwrap_or(RESIDUAL)
}
