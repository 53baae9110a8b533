//! Construction and numerical certification of complete flat surfaces in
//! hyperbolic 3-space with one or two isolated (cone-like) singularities.
//!
//! The crate is layered bottom-up:
//!
//! - [`theta`]: the annular Jacobi theta function and the logarithmic
//!   derivative `h(z) = z θ₁'(z) / θ₁(z)` built from it.
//! - [`annulus`]: the holomorphic data of a two-singularity surface on the
//!   annulus `r < |z| < 1` (slit maps, `R`, `Q_j`, the Gauss maps `g`, `g*`,
//!   the harmonic function `u` and `F`).
//! - [`roots`] and [`solver`]: bracketing root finders and the nested solve
//!   for the moduli `(m, z0, z1, z2)` given `(r, s)`.
//! - [`immersion`] and [`curvature`]: the immersion into the half-space
//!   model, the rotational family, fundamental forms, the max-modulus witness
//!   `p`, the Klein-model map and a Brioschi curvature stencil.
//! - [`mesh`] and [`validate`]: sampled meshes (OBJ / PLY) and the
//!   validation battery that backs the `flatfront validate` command.

// `!(x < tol)` is used on purpose so that NaN fails a check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annulus;
pub mod curvature;
pub mod error;
pub mod immersion;
pub mod mesh;
pub mod roots;
pub mod solver;
pub mod theta;
pub mod tolerances;
pub mod validate;

pub use num_complex::Complex64;

pub use annulus::{CanonicalModuli, CanonicalSurface, SpherePoint};
pub use error::{Error, Result};
pub use immersion::{HalfSpacePoint, KleinPoint, MetricSample, RotationalModuli};
pub use solver::{solve_canonical, SolveTrace};
pub use theta::ThetaContext;
pub use validate::ValidationReport;
