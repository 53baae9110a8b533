//! `flatfront`: solve, mesh and validate flat surfaces with isolated
//! singularities in hyperbolic 3-space.
//!
//! Exit codes: 0 success, 1 validation failed, 2 usage or range error,
//! 3 unreadable or unusable moduli file, 4 no bracket / no convergence in the
//! solver, 5 boundary normalization of `R` failed, 6 residual check failed,
//! 7 evaluation or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use flatfront::curvature::numerical_gauss_curvature;
use flatfront::mesh::{Model, SurfaceMesh};
use flatfront::solver::SolveError;
use flatfront::tolerances::{CURVATURE_STEP, RHO_END};
use flatfront::{solve_canonical, CanonicalModuli, CanonicalSurface, Complex64, RotationalModuli, ValidationReport};

#[derive(Parser)]
#[command(name = "flatfront", version, about = "Flat surfaces with isolated singularities in hyperbolic 3-space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the moduli of the two-singularity surface at (r, s).
    Solve {
        #[arg(long)]
        r: f64,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        /// Moduli JSON; the solver trace goes to `<stem>.trace.json`.
        /// Without it the moduli are printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh a solved surface.
    Mesh {
        moduli: PathBuf,
        /// Radial samples (log-uniform).
        #[arg(long, default_value_t = 32)]
        nu: usize,
        /// Angular samples.
        #[arg(long, default_value_t = 64)]
        nv: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Halfspace)]
        model: ModelArg,
        /// Radius of the disc removed around the end.
        #[arg(long, default_value_t = RHO_END)]
        rho_end: f64,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the validation battery on a moduli file.
    Validate {
        moduli: PathBuf,
        /// Interior grid size for the bound on |p|.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Report JSON; printed when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh the rotational one-singularity surface with constant R = b.
    Rotational {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 32)]
        nu: usize,
        #[arg(long, default_value_t = 64)]
        nv: usize,
        #[arg(long, value_enum, default_value_t = ModelArg::Halfspace)]
        model: ModelArg,
        /// Inner sampling radius as a fraction of the disc radius.
        #[arg(long, default_value_t = RHO_END)]
        rho_end: f64,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        /// Mesh file; a report goes to `<stem>.report.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Halfspace,
    Klein,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Halfspace => Model::HalfSpace,
            ModelArg::Klein => Model::Klein,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Obj,
    Ply,
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn fail(code: u8, error: anyhow::Error) -> Failure {
    Failure { code, error }
}

const VALIDATION: u8 = 1;
const USAGE: u8 = 2;
const MODULI: u8 = 3;
const BRACKET: u8 = 4;
const NORMALIZATION: u8 = 5;
const RESIDUAL: u8 = 6;
const RUNTIME: u8 = 7;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { r, s, out } => solve(r, s, out.as_deref()),
        Command::Mesh {
            moduli,
            nu,
            nv,
            model,
            rho_end,
            format,
            out,
        } => {
            check_grid(nu, nv)?;
            if !(rho_end > 0.0 && rho_end.is_finite()) {
                return Err(fail(USAGE, anyhow!("--rho-end must be positive, got {rho_end}")));
            }
            let surface = load_surface(&moduli)?;
            let mesh = SurfaceMesh::canonical(&surface, nu, nv, model.into(), rho_end)
                .map_err(|e| fail(RUNTIME, e.into()))?;
            for w in &mesh.warnings {
                eprintln!("warning: {w}");
            }
            write_mesh(&mesh, format, &out)
        }
        Command::Validate { moduli, grid, out } => {
            if grid == 0 {
                return Err(fail(USAGE, anyhow!("--grid must be positive")));
            }
            let m = load_moduli(&moduli)?;
            let report = ValidationReport::run(&m, grid).map_err(|e| fail(MODULI, e.into()))?;
            emit(&report.to_json(), out.as_deref())?;
            let failures = report.failures();
            if failures.is_empty() {
                Ok(())
            } else {
                Err(fail(VALIDATION, anyhow!("checks failed: {}", failures.join(", "))))
            }
        }
        Command::Rotational {
            b,
            nu,
            nv,
            model,
            rho_end,
            format,
            out,
        } => rotational(b, nu, nv, model.into(), rho_end, format, &out),
    }
}

fn solve(r: f64, s: f64, out: Option<&Path>) -> Result<(), Failure> {
    if !(r > 0.0 && r < 1.0) {
        return Err(fail(USAGE, anyhow!("--r must lie in (0, 1), got {r}")));
    }
    if !(s > -1.0 && s < 0.0) {
        return Err(fail(USAGE, anyhow!("--s must lie in (-1, 0), got {s}")));
    }
    match solve_canonical(r, s) {
        Ok((moduli, trace)) => {
            emit(&moduli.to_json(), out)?;
            if let Some(path) = out {
                let text = serde_json::to_string_pretty(&trace).map_err(|e| fail(RUNTIME, e.into()))?;
                write_text(&sidecar(path, "trace"), &text)?;
            }
            Ok(())
        }
        Err(SolveError::Input(e)) => Err(fail(USAGE, e.into())),
        Err(SolveError::Bracket(e)) => Err(fail(BRACKET, e.into())),
        Err(SolveError::Normalization(e, moduli)) => {
            emit(&moduli.to_json(), out)?;
            Err(fail(NORMALIZATION, e.into()))
        }
        Err(e @ SolveError::Residual(..)) => Err(fail(RESIDUAL, e.into())),
    }
}

#[derive(serde::Serialize)]
struct RotationalReport {
    b_rot: f64,
    a_rot: f64,
    s_rot: f64,
    a_sec: f64,
    r_disc: Option<f64>,
    /// Closed-form height of the singular point.
    apex_height: f64,
    /// Half-space heights over the sampled vertices.
    min_x3: f64,
    max_x3: f64,
    /// Diameter of the image of the outer sample circle.
    outer_ring_diameter: f64,
    /// Brioschi curvature at `|g| = s_rot/2`, four angles; `null` where the
    /// first form degenerates (the surface at `b = 1/2` is a geodesic).
    curvature_samples: Vec<Option<f64>>,
    euler_characteristic: i64,
}

fn rotational(
    b: f64,
    nu: usize,
    nv: usize,
    model: Model,
    rho_end: f64,
    format: Format,
    out: &Path,
) -> Result<(), Failure> {
    if !(b > 0.0 && b < 1.0) {
        return Err(fail(USAGE, anyhow!("--b must lie in (0, 1), got {b}")));
    }
    check_grid(nu, nv)?;
    if !(rho_end > 0.0 && rho_end < 1.0) {
        return Err(fail(USAGE, anyhow!("--rho-end must lie in (0, 1), got {rho_end}")));
    }
    let rot = RotationalModuli::new(b).map_err(|e| fail(USAGE, e.into()))?;
    let mesh = SurfaceMesh::rotational(&rot, nu, nv, model, rho_end).map_err(|e| fail(RUNTIME, e.into()))?;
    // heights are reported in the half-space model whatever the output model
    let half = if model == Model::HalfSpace {
        mesh.clone()
    } else {
        SurfaceMesh::rotational(&rot, nu, nv, Model::HalfSpace, rho_end).map_err(|e| fail(RUNTIME, e.into()))?
    };
    let mut curvature_samples = Vec::new();
    for k in 0..4 {
        let g = Complex64::from_polar(0.5 * rot.s_rot, 0.25 + std::f64::consts::FRAC_PI_2 * k as f64);
        let step = CURVATURE_STEP * rot.s_rot;
        match numerical_gauss_curvature(&rot, g, step) {
            Ok(k) => curvature_samples.push(Some(k)),
            Err(e) => {
                eprintln!("warning: curvature at {g}: {e}");
                curvature_samples.push(None);
            }
        }
    }
    let report = RotationalReport {
        b_rot: rot.b_rot,
        a_rot: rot.a_rot,
        s_rot: rot.s_rot,
        a_sec: rot.a_sec,
        r_disc: rot.r_disc,
        apex_height: rot.apex_height(),
        min_x3: half.vertices.iter().map(|v| v[2]).fold(f64::INFINITY, f64::min),
        max_x3: half.vertices.iter().map(|v| v[2]).fold(f64::NEG_INFINITY, f64::max),
        outer_ring_diameter: half.ring_diameter(0),
        curvature_samples,
        euler_characteristic: mesh.euler_characteristic(),
    };
    write_mesh(&mesh, format, out)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| fail(RUNTIME, e.into()))?;
    write_text(&sidecar(out, "report"), &text)
}

fn check_grid(nu: usize, nv: usize) -> Result<(), Failure> {
    if nu < flatfront::mesh::MIN_GRID || nv < flatfront::mesh::MIN_GRID {
        return Err(fail(USAGE, anyhow!("--nu and --nv must be at least 8, got {nu} and {nv}")));
    }
    Ok(())
}

fn load_moduli(path: &Path) -> Result<CanonicalModuli, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(|e| fail(MODULI, e))?;
    CanonicalModuli::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(|e| fail(MODULI, e))
}

fn load_surface(path: &Path) -> Result<CanonicalSurface, Failure> {
    let m = load_moduli(path)?;
    CanonicalSurface::new(m)
        .with_context(|| format!("moduli in {} are unusable", path.display()))
        .map_err(|e| fail(MODULI, e))
}

fn write_mesh(mesh: &SurfaceMesh, format: Format, out: &Path) -> Result<(), Failure> {
    match format {
        Format::Obj => write_text(out, &mesh.to_obj()),
        Format::Ply => {
            let mut buf = Vec::new();
            mesh.write_ply(&mut buf).map_err(|e| fail(RUNTIME, e.into()))?;
            fs::write(out, buf)
                .with_context(|| format!("writing {}", out.display()))
                .map_err(|e| fail(RUNTIME, e))
        }
    }
}

/// `dir/name.ext` becomes `dir/name.<tag>.json`.
fn sidecar(path: &Path, tag: &str) -> PathBuf {
    path.with_extension(format!("{tag}.json"))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    let mut body = text.to_owned();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    fs::write(path, body)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(|e| fail(RUNTIME, e))
}
