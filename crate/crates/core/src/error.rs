use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("annulus modulus r = {0} is outside (0, 1)")]
    InvalidModulus(f64),

    #[error("parameter {name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("argument {0} is outside the domain of evaluation")]
    Domain(Complex64),

    /// Evaluation hit a zero of θ₁ (or a pole of a derived function).
    #[error("pole at {at}")]
    Pole { at: Complex64 },

    #[error("logarithmic singularity of u at the end {0}")]
    LogSingularity(Complex64),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("W winds {0} times around the annulus core; no single-valued square root")]
    Winding(i64),

    #[error("no sign change for {what} on [{lo}, {hi}]")]
    NoBracket {
        what: &'static str,
        lo: f64,
        hi: f64,
    },

    #[error("root finder for {what} did not converge in {iterations} iterations")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("boundary normalization of R violated: {0}")]
    Normalization(String),

    #[error("first fundamental form is not Riemannian at {at} (det = {det:e})")]
    NonRiemannian { at: Complex64, det: f64 },

    #[error("stencil at {at} with step {step} leaves the domain")]
    Stencil { at: Complex64, step: f64 },
}
