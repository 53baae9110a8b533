//! Sampled triangle meshes of the surfaces, with OBJ and binary PLY output.

use std::fmt::Write as _;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::annulus::CanonicalSurface;
use crate::error::{Error, Result};
use crate::immersion::{eval_psi, eval_psi_rotational, klein_map, HalfSpacePoint, RotationalModuli};

/// Coordinates of the written vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    HalfSpace,
    Klein,
}

impl std::str::FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "halfspace" => Ok(Model::HalfSpace),
            "klein" => Ok(Model::Klein),
            other => Err(format!("unknown model {other:?} (expected halfspace or klein)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub model: Model,
    /// Vertex indices of the sampled singular circles, outer circle first.
    pub boundary_rings: Vec<Vec<usize>>,
    /// Sample points whose first form failed to be Riemannian or whose
    /// evaluation failed; the mesh is still written.
    pub warnings: Vec<String>,
}

/// Grid sizes below this are rejected.
pub const MIN_GRID: usize = 8;

fn check_grid(n_rho: usize, n_theta: usize) -> Result<()> {
    for (name, n) in [("n_rho", n_rho), ("n_theta", n_theta)] {
        if n < MIN_GRID {
            return Err(Error::OutOfRange {
                name,
                value: n as f64,
                range: "[8, inf)",
            });
        }
    }
    Ok(())
}

fn place(p: HalfSpacePoint, model: Model) -> [f64; 3] {
    match model {
        Model::HalfSpace => p.to_array(),
        Model::Klein => klein_map(p).to_array(),
    }
}

impl SurfaceMesh {
    /// Samples `ψ` on a grid uniform in `log ρ ∈ [log r, 0]` and in angle,
    /// dropping every cell that meets the disc of radius `rho_end` around the
    /// end (and the cell containing it).
    ///
    /// The branch of `g` is carried around each ring from the positive real
    /// axis, so every vertex costs one arc step.
    pub fn canonical(
        surface: &CanonicalSurface,
        n_rho: usize,
        n_theta: usize,
        model: Model,
        rho_end: f64,
    ) -> Result<Self> {
        check_grid(n_rho, n_theta)?;
        if !(rho_end > 0.0 && rho_end.is_finite()) {
            return Err(Error::OutOfRange {
                name: "rho_end",
                value: rho_end,
                range: "(0, inf)",
            });
        }
        let r = surface.moduli().r;
        let end = surface.end();
        let log_r = r.ln();
        let radius = |i: usize| {
            if i == 0 {
                r
            } else if i == n_rho {
                1.0
            } else {
                (log_r * (1.0 - i as f64 / n_rho as f64)).exp()
            }
        };
        let angle = |j: usize| std::f64::consts::TAU * j as f64 / n_theta as f64;
        let index = |i: usize, j: usize| i * n_theta + (j % n_theta);

        let mut warnings = Vec::new();
        let mut points = Vec::with_capacity((n_rho + 1) * n_theta);
        for i in 0..=n_rho {
            let rho = radius(i);
            if i == 0 || i == n_rho {
                for j in 0..n_theta {
                    points.push(eval_psi(surface, Complex64::from_polar(rho, angle(j)))?);
                }
                continue;
            }
            let mut z = Complex64::new(rho, 0.0);
            let mut root = surface.g(z)? * z;
            for j in 0..n_theta {
                let next = Complex64::from_polar(rho, angle(j));
                if j > 0 {
                    root = surface.continue_sqrt(z, root, next)?;
                    z = next;
                }
                let p = if (z - end).norm() < 1e-14 {
                    HalfSpacePoint::ideal(surface.g(end)?)
                } else {
                    match surface.frame_with_g(z, root / z) {
                        Ok(fr) => {
                            let m = fr.metric();
                            if !(m.e > 0.0 && m.det() > 0.0) {
                                warnings.push(format!("non-Riemannian sample at {z} (det {:e})", m.det()));
                            }
                            fr.psi()
                        }
                        Err(Error::LogSingularity(_)) | Err(Error::Pole { .. }) => {
                            HalfSpacePoint::ideal(surface.g(end)?)
                        }
                        Err(e) => return Err(e),
                    }
                };
                points.push(p);
            }
        }

        // cells to drop around the end
        let near = |i: usize, j: usize| (Complex64::from_polar(radius(i), angle(j)) - end).norm() < rho_end;
        let end_arg = end.arg().rem_euclid(std::f64::consts::TAU);
        let end_rho = end.norm();
        let mut faces = Vec::with_capacity(2 * n_rho * n_theta);
        for i in 0..n_rho {
            for j in 0..n_theta {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let touches = corners.iter().any(|&(a, b)| near(a, b));
                let contains = end_rho >= radius(i)
                    && end_rho <= radius(i + 1)
                    && end_arg >= angle(j)
                    && end_arg <= angle(j + 1);
                if touches || contains {
                    continue;
                }
                let [a, b, c, d] = corners.map(|(x, y)| index(x, y));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }

        let outer: Vec<usize> = (0..n_theta).map(|j| index(n_rho, j)).collect();
        let inner: Vec<usize> = (0..n_theta).map(|j| index(0, j)).collect();
        let mut mesh = SurfaceMesh {
            vertices: points.iter().map(|p| place(*p, model)).collect(),
            faces,
            model,
            boundary_rings: vec![outer, inner],
            warnings,
        };
        mesh.compact();
        Ok(mesh)
    }

    /// Samples the rotational closed form over `ρ_min ≤ |g| ≤ s_rot`, with
    /// `ρ_min = rho_end · s_rot`, uniform in `log |g|` and in angle.
    pub fn rotational(rot: &RotationalModuli, n_rho: usize, n_theta: usize, model: Model, rho_end: f64) -> Result<Self> {
        check_grid(n_rho, n_theta)?;
        if !(rho_end > 0.0 && rho_end < 1.0) {
            return Err(Error::OutOfRange {
                name: "rho_end",
                value: rho_end,
                range: "(0, 1)",
            });
        }
        let log_min = rho_end.ln();
        let mut vertices = Vec::with_capacity((n_rho + 1) * n_theta);
        for i in 0..=n_rho {
            let t = if i == n_rho {
                1.0
            } else {
                (log_min * (1.0 - i as f64 / n_rho as f64)).exp()
            };
            for j in 0..n_theta {
                let g = Complex64::from_polar(t * rot.s_rot, std::f64::consts::TAU * j as f64 / n_theta as f64);
                vertices.push(place(eval_psi_rotational(rot, g)?, model));
            }
        }
        let index = |i: usize, j: usize| i * n_theta + (j % n_theta);
        let mut faces = Vec::with_capacity(2 * n_rho * n_theta);
        for i in 0..n_rho {
            for j in 0..n_theta {
                let (a, b, c, d) = (index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        Ok(SurfaceMesh {
            vertices,
            faces,
            model,
            boundary_rings: vec![(0..n_theta).map(|j| index(n_rho, j)).collect()],
            warnings: Vec::new(),
        })
    }

    /// Drops unreferenced vertices and renumbers faces and rings.
    fn compact(&mut self) {
        let mut used = vec![false; self.vertices.len()];
        for f in &self.faces {
            for &v in f {
                used[v] = true;
            }
        }
        for ring in &self.boundary_rings {
            for &v in ring {
                used[v] = true;
            }
        }
        let mut map = vec![usize::MAX; self.vertices.len()];
        let mut kept = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if used[i] {
                map[i] = kept.len();
                kept.push(*v);
            }
        }
        self.vertices = kept;
        for f in &mut self.faces {
            for v in f.iter_mut() {
                *v = map[*v];
            }
        }
        for ring in &mut self.boundary_rings {
            for v in ring.iter_mut() {
                *v = map[*v];
            }
        }
    }

    /// `V - E + F` of the triangulation.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::BTreeSet::new();
        for f in &self.faces {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }

    /// Largest Euclidean distance between two vertices of a ring.
    pub fn ring_diameter(&self, ring: usize) -> f64 {
        let idx = &self.boundary_rings[ring];
        let mut d: f64 = 0.0;
        for (k, &a) in idx.iter().enumerate() {
            for &b in &idx[k + 1..] {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt());
            }
        }
        d
    }

    /// OBJ text: `v` lines at 17 significant digits, 1-based `f` triangles.
    pub fn to_obj(&self) -> String {
        let mut out = String::with_capacity(64 * (self.vertices.len() + self.faces.len()));
        let _ = writeln!(out, "# flatfront mesh ({})", self.model_name());
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v[0], v[1], v[2]);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    /// Binary little-endian PLY with double-precision vertices.
    pub fn write_ply<W: Write>(&self, mut w: W) -> io::Result<()> {
        write!(
            w,
            "ply\nformat binary_little_endian 1.0\ncomment flatfront mesh ({})\nelement vertex {}\n\
             property double x\nproperty double y\nproperty double z\nelement face {}\n\
             property list uchar uint vertex_indices\nend_header\n",
            self.model_name(),
            self.vertices.len(),
            self.faces.len()
        )?;
        for v in &self.vertices {
            for c in v {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        for f in &self.faces {
            w.write_all(&[3u8])?;
            for &i in f {
                w.write_all(&(i as u32).to_le_bytes())?;
            }
        }
        Ok(())
    }

    fn model_name(&self) -> &'static str {
        match self.model {
            Model::HalfSpace => "halfspace",
            Model::Klein => "klein",
        }
    }
}
