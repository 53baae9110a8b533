//! Gaussian curvature of a sampled first fundamental form (Brioschi).
//!
//! Derivatives of `E, F, G` come from order-6 centred stencils on a
//! 7×7 tensor grid of half-width `3·step`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::immersion::FlatSurface;

const D1: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
const D1_SCALE: f64 = 60.0;
const D2: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
const D2_SCALE: f64 = 180.0;

/// Brioschi curvature of the metric `(E, F, G)(x, y)` at `(x, y)`.
///
/// `metric` errors propagate, except domain-type failures at stencil
/// points, which become [`Error::Stencil`].
pub fn brioschi<M>(metric: M, x: f64, y: f64, step: f64) -> Result<f64>
where
    M: Fn(f64, f64) -> Result<[f64; 3]>,
{
    let at = Complex64::new(x, y);
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Stencil { at, step });
    }
    let mut grid = [[[0.0; 3]; 7]; 7];
    for (i, row) in grid.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let px = x + (i as f64 - 3.0) * step;
            let py = y + (j as f64 - 3.0) * step;
            *cell = metric(px, py).map_err(|e| match e {
                Error::Domain(_) | Error::LogSingularity(_) | Error::Pole { .. } => Error::Stencil { at, step },
                other => other,
            })?;
        }
    }
    let d_x = |k: usize| -> f64 { (0..7).map(|i| D1[i] * grid[i][3][k]).sum::<f64>() / (D1_SCALE * step) };
    let d_y = |k: usize| -> f64 { (0..7).map(|j| D1[j] * grid[3][j][k]).sum::<f64>() / (D1_SCALE * step) };
    let d_xx = |k: usize| -> f64 { (0..7).map(|i| D2[i] * grid[i][3][k]).sum::<f64>() / (D2_SCALE * step * step) };
    let d_yy = |k: usize| -> f64 { (0..7).map(|j| D2[j] * grid[3][j][k]).sum::<f64>() / (D2_SCALE * step * step) };
    let d_xy = |k: usize| -> f64 {
        let mut acc = 0.0;
        for i in 0..7 {
            for j in 0..7 {
                acc += D1[i] * D1[j] * grid[i][j][k];
            }
        }
        acc / (D1_SCALE * D1_SCALE * step * step)
    };

    let [e, f, g] = grid[3][3];
    let (e_u, e_v, e_vv) = (d_x(0), d_y(0), d_yy(0));
    let (f_u, f_v, f_uv) = (d_x(1), d_y(1), d_xy(1));
    let (g_u, g_v, g_uu) = (d_x(2), d_y(2), d_xx(2));

    let m1 = [
        [-0.5 * e_vv + f_uv - 0.5 * g_uu, 0.5 * e_u, f_u - 0.5 * e_v],
        [f_v - 0.5 * g_u, e, f],
        [0.5 * g_v, f, g],
    ];
    let m2 = [[0.0, 0.5 * e_v, 0.5 * g_u], [0.5 * e_v, e, f], [0.5 * g_u, f, g]];
    let det = e * g - f * f;
    // a determinant at roundoff level of E G means a degenerate form
    if !(det > 1e-12 * (e * g).abs()) {
        return Err(Error::NonRiemannian { at, det });
    }
    Ok((det3(&m1) - det3(&m2)) / (det * det))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Brioschi curvature of a flat surface's analytic first form at `z`.
pub fn numerical_gauss_curvature<S: FlatSurface + ?Sized>(surface: &S, z: Complex64, step: f64) -> Result<f64> {
    brioschi(
        |x, y| {
            let m = surface.metric_frame(Complex64::new(x, y))?.metric();
            Ok([m.e, m.f_m, m.g])
        },
        z.re,
        z.im,
        step,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_sphere_has_unit_curvature() {
        // colatitude x, longitude y
        let sphere = |x: f64, _y: f64| Ok([1.0, 0.0, x.sin().powi(2)]);
        for x in [0.4, 1.0, 2.2] {
            let k = brioschi(sphere, x, 0.3, 1e-3).unwrap();
            assert!((k - 1.0).abs() < 1e-7, "{k}");
        }
    }

    #[test]
    fn radius_two_sphere_in_non_orthogonal_chart() {
        // sphere of radius 2 in coordinates (x, y) -> (x + y, y)
        let metric = |x: f64, y: f64| {
            let t = x - y;
            let s = 4.0 * t.sin().powi(2);
            Ok([4.0, -4.0, 4.0 + s])
        };
        let k = brioschi(metric, 1.1, 0.2, 1e-3).unwrap();
        assert!((k - 0.25).abs() < 1e-7, "{k}");
    }

    #[test]
    fn flat_plane_in_polar_coordinates() {
        let polar = |x: f64, _y: f64| Ok([1.0, 0.0, x * x]);
        let k = brioschi(polar, 0.7, 0.0, 1e-3).unwrap();
        assert!(k.abs() < 1e-8);
    }

    #[test]
    fn stencil_outside_domain_is_reported() {
        let m = |x: f64, _y: f64| {
            if x < 0.0 {
                Err(Error::Domain(Complex64::new(x, 0.0)))
            } else {
                Ok([1.0, 0.0, 1.0])
            }
        };
        assert!(matches!(brioschi(m, 0.001, 0.0, 1e-3), Err(Error::Stencil { .. })));
        assert!(matches!(brioschi(m, 1.0, 0.0, 0.0), Err(Error::Stencil { .. })));
    }
}
