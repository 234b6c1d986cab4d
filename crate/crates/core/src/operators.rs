//! Difference operators, the scalar/vector lift, symmetry projections and Haar averaging.

use crate::error::{Error, Result};
use crate::form::XForm;
use crate::grid::{integrate3, Grid2, Grid3, ScalarField, ScalarField3, VectorField3};
use crate::interp::{cubic2, trilinear, Parity};
use crate::par;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Cylindrical components of an SO-equivariant field sampled on the (r, z) half-plane.
#[derive(Clone, Debug, PartialEq)]
pub struct CylVectorField {
    pub grid: Grid2,
    pub comp_r: Vec<f64>,
    pub comp_theta: Vec<f64>,
    pub comp_z: Vec<f64>,
}

/// (∂u/∂r, ∂u/∂z): central differences inside, one-sided second order at the edges.
pub fn grad2(u: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let g = &u.grid;
    let (nr, nz) = (g.nr, g.nz);
    let mut ur = vec![0.0; g.len()];
    let mut uz = vec![0.0; g.len()];
    let v = |i: usize, j: usize| u.values[i * nz + j];
    for i in 0..nr {
        for j in 0..nz {
            let k = g.idx(i, j);
            ur[k] = if i == 0 {
                (-3.0 * v(0, j) + 4.0 * v(1, j) - v(2.min(nr - 1), j)) / (2.0 * g.dr)
            } else if i == nr - 1 {
                (3.0 * v(i, j) - 4.0 * v(i - 1, j) + v(i.saturating_sub(2), j)) / (2.0 * g.dr)
            } else {
                (v(i + 1, j) - v(i - 1, j)) / (2.0 * g.dr)
            };
            uz[k] = if j == 0 {
                (-3.0 * v(i, 0) + 4.0 * v(i, 1) - v(i, 2)) / (2.0 * g.dz)
            } else if j == nz - 1 {
                (3.0 * v(i, j) - 4.0 * v(i, j - 1) + v(i, j - 2)) / (2.0 * g.dz)
            } else {
                (v(i, j + 1) - v(i, j - 1)) / (2.0 * g.dz)
            };
        }
    }
    (ur, uz)
}

/// ∫ |∇u|² + (a/r²) u² with the summation-by-parts form.
pub fn x_norm_sq(u: &ScalarField, a: f64) -> Result<f64> {
    Ok(XForm::new(&u.grid, a)?.norm_sq(&u.values))
}

/// U(x) = (u(ρ, x₃)/ρ)(−x₂, x₁, 0).
///
/// The profile g = u/r is even in r, so it is interpolated (4x4 cubic
/// Lagrange with even reflection across the axis) instead of u itself; the
/// axis value U = 0 then follows from the factor (−x₂, x₁, 0).
pub fn lift(u: &ScalarField, grid3: &Grid3) -> VectorField3 {
    let g2 = &u.grid;
    let prof: Vec<f64> = (0..g2.len())
        .map(|k| u.values[k] / g2.r(k / g2.nz))
        .collect();
    let values = (0..grid3.len())
        .into_par_iter()
        .map(|m| {
            let (i, j, k) = grid3.unflatten(m);
            if grid3.is_boundary(i, j, k) {
                return [0.0; 3];
            }
            let [x, y, z] = grid3.point(i, j, k);
            let rho = (x * x + y * y).sqrt();
            if rho == 0.0 {
                return [0.0; 3];
            }
            let gv = cubic2(g2, &prof, rho, z, Parity::Even);
            [-y * gv, x * gv, 0.0]
        })
        .collect();
    VectorField3 {
        grid: grid3.clone(),
        values,
    }
}

/// Cylindrical components sampled on the half-plane y = 0, x = r.
pub fn to_cylindrical(field: &VectorField3, grid2: &Grid2) -> CylVectorField {
    let n = grid2.len();
    let mut comp_r = vec![0.0; n];
    let mut comp_theta = vec![0.0; n];
    let mut comp_z = vec![0.0; n];
    for i in 0..grid2.nr {
        for j in 0..grid2.nz {
            if grid2.is_boundary(i, j) {
                continue;
            }
            let v = trilinear(field, [grid2.r(i), 0.0, grid2.z(j)]);
            let k = grid2.idx(i, j);
            comp_r[k] = v[0];
            comp_theta[k] = v[1];
            comp_z[k] = v[2];
        }
    }
    CylVectorField {
        grid: grid2.clone(),
        comp_r,
        comp_theta,
        comp_z,
    }
}

/// Rebuilds the SO-equivariant 3D field from its cylindrical components.
pub fn from_cylindrical(cyl: &CylVectorField, grid3: &Grid3) -> VectorField3 {
    let g2 = &cyl.grid;
    let values = (0..grid3.len())
        .into_par_iter()
        .map(|m| {
            let (i, j, k) = grid3.unflatten(m);
            if grid3.is_boundary(i, j, k) {
                return [0.0; 3];
            }
            let [x, y, z] = grid3.point(i, j, k);
            let rho = (x * x + y * y).sqrt();
            if rho == 0.0 {
                return [0.0, 0.0, cubic2(g2, &cyl.comp_z, 0.0, z, Parity::Even)];
            }
            let ur = cubic2(g2, &cyl.comp_r, rho, z, Parity::Odd);
            let ut = cubic2(g2, &cyl.comp_theta, rho, z, Parity::Odd);
            let uz = cubic2(g2, &cyl.comp_z, rho, z, Parity::Even);
            let (c, s) = (x / rho, y / rho);
            [ur * c - ut * s, ur * s + ut * c, uz]
        })
        .collect();
    VectorField3 {
        grid: grid3.clone(),
        values,
    }
}

/// Default tolerance on the ρ/ζ energy fraction accepted by `restrict`.
pub const AZIMUTHAL_TOL: f64 = 1e-8;

/// u(r, z) = ⟨U(r, 0, z), (0, 1, 0)⟩ after checking that U is azimuthal.
pub fn restrict(field: &VectorField3, grid2: &Grid2) -> Result<ScalarField> {
    restrict_with_tol(field, grid2, AZIMUTHAL_TOL)
}

pub fn restrict_with_tol(field: &VectorField3, grid2: &Grid2, tol: f64) -> Result<ScalarField> {
    let (u_rho, _u_tau, u_zeta) = decompose(field);
    let total = integrate3(&field.grid, &field.norm_sq());
    if total > 0.0 {
        let off = integrate3(&field.grid, &u_rho.norm_sq()) + integrate3(&field.grid, &u_zeta.norm_sq());
        let fraction = off / total;
        if fraction > tol {
            return Err(Error::NotAzimuthal { fraction, tol });
        }
    }
    let cyl = to_cylindrical(field, grid2);
    ScalarField::from_values(grid2, cyl.comp_theta)
}

#[inline]
fn interior_index(g: &Grid3, m: usize) -> Option<(usize, usize, usize)> {
    let (i, j, k) = g.unflatten(m);
    if g.is_boundary(i, j, k) {
        None
    } else {
        Some((i, j, k))
    }
}

/// Central difference ∂_d of component c at interior node (i, j, k).
#[inline]
fn dcen(f: &VectorField3, i: usize, j: usize, k: usize, d: usize, c: usize) -> f64 {
    let g = &f.grid;
    let (p, q) = match d {
        0 => (g.idx(i + 1, j, k), g.idx(i - 1, j, k)),
        1 => (g.idx(i, j + 1, k), g.idx(i, j - 1, k)),
        _ => (g.idx(i, j, k + 1), g.idx(i, j, k - 1)),
    };
    (f.values[p][c] - f.values[q][c]) / (2.0 * g.h)
}

/// Jacobian J[c][d] = ∂_d U_c at an interior node.
#[inline]
pub fn jacobian(f: &VectorField3, i: usize, j: usize, k: usize) -> [[f64; 3]; 3] {
    let mut jac = [[0.0; 3]; 3];
    for (c, row) in jac.iter_mut().enumerate() {
        for (d, e) in row.iter_mut().enumerate() {
            *e = dcen(f, i, j, k, d, c);
        }
    }
    jac
}

pub type CurlFn = fn(&VectorField3) -> VectorField3;

/// Central-difference curl on interior nodes, zero on the boundary shell.
pub fn curl3(f: &VectorField3) -> VectorField3 {
    let g = &f.grid;
    let values = (0..g.len())
        .into_par_iter()
        .map(|m| match interior_index(g, m) {
            None => [0.0; 3],
            Some((i, j, k)) => {
                let jac = jacobian(f, i, j, k);
                [
                    jac[2][1] - jac[1][2],
                    jac[0][2] - jac[2][0],
                    jac[1][0] - jac[0][1],
                ]
            }
        })
        .collect();
    VectorField3 {
        grid: g.clone(),
        values,
    }
}

/// Central-difference divergence on interior nodes.
pub fn div3(f: &VectorField3) -> ScalarField3 {
    let g = &f.grid;
    let values = (0..g.len())
        .into_par_iter()
        .map(|m| match interior_index(g, m) {
            None => 0.0,
            Some((i, j, k)) => dcen(f, i, j, k, 0, 0) + dcen(f, i, j, k, 1, 1) + dcen(f, i, j, k, 2, 2),
        })
        .collect();
    ScalarField3 {
        grid: g.clone(),
        values,
    }
}

/// Pointwise Σ_{c,d} (∂_d U_c)² with central differences.
pub fn grad3_sq(f: &VectorField3) -> Vec<f64> {
    let g = &f.grid;
    (0..g.len())
        .into_par_iter()
        .map(|m| match interior_index(g, m) {
            None => 0.0,
            Some((i, j, k)) => {
                let jac = jacobian(f, i, j, k);
                jac.iter().flatten().map(|e| e * e).sum()
            }
        })
        .collect()
}

/// Compact 7-point vector Laplacian on interior nodes.
pub fn laplacian3(f: &VectorField3) -> VectorField3 {
    let g = &f.grid;
    let h2 = g.h * g.h;
    let values = (0..g.len())
        .into_par_iter()
        .map(|m| match interior_index(g, m) {
            None => [0.0; 3],
            Some((i, j, k)) => {
                let c = f.values[m];
                let nb = [
                    g.idx(i + 1, j, k),
                    g.idx(i - 1, j, k),
                    g.idx(i, j + 1, k),
                    g.idx(i, j - 1, k),
                    g.idx(i, j, k + 1),
                    g.idx(i, j, k - 1),
                ];
                let mut out = [0.0; 3];
                for (cc, o) in out.iter_mut().enumerate() {
                    let s: f64 = nb.iter().map(|&q| f.values[q][cc]).sum();
                    *o = (s - 6.0 * c[cc]) / h2;
                }
                out
            }
        })
        .collect();
    VectorField3 {
        grid: g.clone(),
        values,
    }
}

/// max |∇×(∇×U) + ΔU| over nodes at least two cells from the boundary.
pub fn curlcurl_minus_laplacian_defect(f: &VectorField3) -> f64 {
    curlcurl_defect_with(f, curl3)
}

pub fn curlcurl_defect_with(f: &VectorField3, curl: CurlFn) -> f64 {
    let g = &f.grid;
    let cc = curl(&curl(f));
    let lap = laplacian3(f);
    let n = g.n;
    par::max_map(g.len(), |m| {
        let (i, j, k) = g.unflatten(m);
        let inner = |t: usize| t >= 2 && t + 3 <= n;
        if !(inner(i) && inner(j) && inner(k)) {
            return 0.0;
        }
        let a = cc.values[m];
        let b = lap.values[m];
        ((a[0] + b[0]).powi(2) + (a[1] + b[1]).powi(2) + (a[2] + b[2]).powi(2)).sqrt()
    })
}

/// Pointwise split into radial-horizontal, azimuthal and vertical parts.
///
/// On the axis the horizontal part has no preferred direction; it is kept in
/// U_ρ so the sum stays exact (for SO-equivariant fields it vanishes there).
pub fn decompose(f: &VectorField3) -> (VectorField3, VectorField3, VectorField3) {
    let g = &f.grid;
    let parts: Vec<([f64; 3], [f64; 3], [f64; 3])> = (0..g.len())
        .into_par_iter()
        .map(|m| {
            let (i, j, k) = g.unflatten(m);
            let [x, y, _] = g.point(i, j, k);
            let u = f.values[m];
            let rho2 = x * x + y * y;
            let zeta = [0.0, 0.0, u[2]];
            if rho2 == 0.0 {
                return ([u[0], u[1], 0.0], [0.0; 3], zeta);
            }
            let cr = (u[0] * x + u[1] * y) / rho2;
            let ct = (-u[0] * y + u[1] * x) / rho2;
            ([cr * x, cr * y, 0.0], [-ct * y, ct * x, 0.0], zeta)
        })
        .collect();
    let mut a = VectorField3::zeros(g);
    let mut b = VectorField3::zeros(g);
    let mut c = VectorField3::zeros(g);
    for (m, (p, q, r)) in parts.into_iter().enumerate() {
        a.values[m] = p;
        b.values[m] = q;
        c.values[m] = r;
    }
    (a, b, c)
}

#[inline]
fn rot_z(alpha: f64, v: [f64; 3]) -> [f64; 3] {
    let (s, c) = alpha.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// (1/m) Σ_k g_kᵀ V(g_k x) over rotations about the x₃ axis by 2πk/m.
pub fn haar_average(f: &VectorField3, m: usize) -> VectorField3 {
    assert!(m >= 1, "need at least one angle");
    let g = &f.grid;
    let angles: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
    let values = (0..g.len())
        .into_par_iter()
        .map(|idx| match interior_index(g, idx) {
            None => [0.0; 3],
            Some((i, j, k)) => {
                let x = g.point(i, j, k);
                let mut acc = [0.0; 3];
                for &a in &angles {
                    let v = trilinear(f, rot_z(a, x));
                    let w = rot_z(-a, v);
                    acc[0] += w[0];
                    acc[1] += w[1];
                    acc[2] += w[2];
                }
                [acc[0] / m as f64, acc[1] / m as f64, acc[2] / m as f64]
            }
        })
        .collect();
    VectorField3 {
        grid: g.clone(),
        values,
    }
}

/// max over the angles 2πk/m (k = 1..m−1) and interior nodes of |g U(x) − U(g x)|.
///
/// Only nodes with ρ ≤ L − 2h and at least one cell from the z faces enter,
/// so every rotated point stays inside the box.
pub fn equivariance_defect(f: &VectorField3, m: usize) -> f64 {
    let g = &f.grid;
    let lim = g.half_width - 2.0 * g.h;
    let angles: Vec<f64> = (1..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
    par::max_map(g.len(), |idx| match interior_index(g, idx) {
        None => 0.0,
        Some((i, j, k)) => {
            let x = g.point(i, j, k);
            if x[0] * x[0] + x[1] * x[1] > lim * lim {
                return 0.0;
            }
            let u = f.values[idx];
            angles.iter().fold(0.0f64, |acc, &a| {
                let gu = rot_z(a, u);
                let ug = trilinear(f, rot_z(a, x));
                let d = ((gu[0] - ug[0]).powi(2) + (gu[1] - ug[1]).powi(2) + (gu[2] - ug[2]).powi(2)).sqrt();
                acc.max(d)
            })
        }
    })
}
