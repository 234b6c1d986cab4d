//! Stereographic projection, the weighted SO(2)×SO(2) action on vector fields
//! and Monte Carlo checks of the L⁶ change of variables.
//!
//! The action is (T_g U)(x) = φ(x)/φ(y) · g̃₁ᵀ U(y) with y = π(g π⁻¹(x)), so a
//! field is symmetric exactly when T_g U = U for all g. Values needed outside
//! the box are taken as zero.

use crate::error::{Error, Result};
use crate::grid::{integrate3, Grid2, Grid3, ScalarField, VectorField3};
use crate::interp::{tricubic, trilinear};
use crate::par;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl GroupElement {
    pub fn new(alpha1: f64, alpha2: f64) -> Self {
        GroupElement {
            alpha1: alpha1.rem_euclid(TAU),
            alpha2: alpha2.rem_euclid(TAU),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        Self::new(self.alpha1 + other.alpha1, self.alpha2 + other.alpha2)
    }

    pub fn is_identity(&self) -> bool {
        self.alpha1 == 0.0 && self.alpha2 == 0.0
    }

    fn apply(&self, xi: [f64; 4]) -> [f64; 4] {
        let (s1, c1) = self.alpha1.sin_cos();
        let (s2, c2) = self.alpha2.sin_cos();
        [
            c1 * xi[0] - s1 * xi[1],
            s1 * xi[0] + c1 * xi[1],
            c2 * xi[2] - s2 * xi[3],
            s2 * xi[2] + c2 * xi[3],
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub xi: [f64; 4],
}

impl SpherePoint {
    /// Normalizes a nonzero 4-vector onto S³.
    pub fn new(v: [f64; 4]) -> Result<Self> {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidArgument("cannot normalize a zero vector onto the sphere".into()));
        }
        Ok(SpherePoint { xi: v.map(|c| c / n) })
    }
}

/// Distance below which a point counts as the north pole.
pub const POLE_TOL: f64 = 1e-12;

/// π(ξ) = (ξ₁, ξ₂, ξ₃)/(1 − ξ₄).
pub fn stereo(p: &SpherePoint) -> Result<[f64; 3]> {
    let xi = p.xi;
    let d2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2] + (xi[3] - 1.0) * (xi[3] - 1.0);
    if d2.sqrt() < POLE_TOL {
        return Err(Error::NorthPole);
    }
    // 1 − ξ₄ = (ξ₁² + ξ₂² + ξ₃²)/(1 + ξ₄) avoids cancellation near the pole.
    let h = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let den = if xi[3] > 0.0 { h / (1.0 + xi[3]) } else { 1.0 - xi[3] };
    Ok([xi[0] / den, xi[1] / den, xi[2] / den])
}

/// π⁻¹(x) = (2x, |x|² − 1)/(|x|² + 1).
pub fn stereo_inv(x: [f64; 3]) -> SpherePoint {
    let n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let d = n2 + 1.0;
    SpherePoint {
        xi: [2.0 * x[0] / d, 2.0 * x[1] / d, 2.0 * x[2] / d, (n2 - 1.0) / d],
    }
}

/// φ(x) = √(2/(1+|x|²)).
pub fn conformal_factor(x: [f64; 3]) -> f64 {
    (2.0 / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).sqrt()
}

/// |(ξ₁, ξ₂)| = 2ρ/(1+|x|²), the invariant of the second rotation factor.
pub fn hopf_s(x: [f64; 3]) -> f64 {
    2.0 * (x[0] * x[0] + x[1] * x[1]).sqrt() / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
}

/// y = π(g π⁻¹(x)), or None when it is the point at infinity.
pub fn act_point(g: &GroupElement, x: [f64; 3]) -> Option<[f64; 3]> {
    let xi = g.apply(stereo_inv(x).xi);
    stereo(&SpherePoint { xi }).ok()
}

/// Scalar profile u = φ·v(s) whose lift is SO(2)×SO(2)-symmetric.
pub fn symmetric_profile<F: Fn(f64) -> f64>(grid: &Grid2, v: F) -> Result<ScalarField> {
    crate::grid::sample_scalar(grid, |r, z| {
        let x = [r, 0.0, z];
        conformal_factor(x) * v(hopf_s(x))
    })
}

fn rotate_back(alpha1: f64, v: [f64; 3]) -> [f64; 3] {
    let (s, c) = alpha1.sin_cos();
    [c * v[0] + s * v[1], -s * v[0] + c * v[1], v[2]]
}

/// T_g U on the interior nodes (zero on the boundary shell).
pub fn group_act(field: &VectorField3, g: &GroupElement) -> VectorField3 {
    if g.is_identity() {
        return field.clone();
    }
    let grid = &field.grid;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|m| {
            let (i, j, k) = grid.unflatten(m);
            if grid.is_boundary(i, j, k) {
                return [0.0; 3];
            }
            let x = grid.point(i, j, k);
            match act_point(g, x) {
                Some(y) => {
                    let v = trilinear(field, y);
                    let s = conformal_factor(x) / conformal_factor(y);
                    rotate_back(g.alpha1, v).map(|c| s * c)
                }
                None => [0.0; 3],
            }
        })
        .collect();
    VectorField3 {
        grid: grid.clone(),
        values,
    }
}

/// Nodes x inside the ball of radius `radius` whose image y lies inside the box
/// by at least one cell.
fn defect_mask(grid: &Grid3, g: &GroupElement, radius: f64) -> Vec<bool> {
    let lim = grid.half_width - grid.h;
    (0..grid.len())
        .map(|m| {
            let (i, j, k) = grid.unflatten(m);
            if grid.is_boundary(i, j, k) {
                return false;
            }
            let x = grid.point(i, j, k);
            if x[0] * x[0] + x[1] * x[1] + x[2] * x[2] > radius * radius {
                return false;
            }
            match act_point(g, x) {
                Some(y) => y.iter().all(|c| c.abs() <= lim),
                None => false,
            }
        })
        .collect()
}

/// Relative L² defect ‖T_g U − U‖/‖U‖ over the nodes of `defect_mask`.
pub fn defect_for(field: &VectorField3, g: &GroupElement, radius: f64) -> f64 {
    let grid = &field.grid;
    let t = group_act(field, g);
    let mask = defect_mask(grid, g, radius);
    let num = par::sum_map(grid.len(), |m| {
        if !mask[m] {
            return 0.0;
        }
        let (a, b) = (t.values[m], field.values[m]);
        (0..3).map(|c| (a[c] - b[c]) * (a[c] - b[c])).sum()
    });
    let den = par::sum_map(grid.len(), |m| {
        if !mask[m] {
            return 0.0;
        }
        let b = field.values[m];
        b[0] * b[0] + b[1] * b[1] + b[2] * b[2]
    });
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

/// Half of the box: the default region where defects are measured.
pub fn default_defect_radius(grid: &Grid3) -> f64 {
    0.5 * grid.half_width
}

/// Max over the sampled elements of the relative defect on the inner half ball.
pub fn symmetry_defect(field: &VectorField3, gs: &[GroupElement]) -> f64 {
    let radius = default_defect_radius(&field.grid);
    gs.iter().map(|g| defect_for(field, g, radius)).fold(0.0, f64::max)
}

/// Angle grid {(2πa/m1, 2πb/m2)}.
pub fn angle_grid(m1: usize, m2: usize) -> Vec<GroupElement> {
    let mut out = Vec::with_capacity(m1 * m2);
    for a in 0..m1 {
        for b in 0..m2 {
            out.push(GroupElement::new(TAU * a as f64 / m1 as f64, TAU * b as f64 / m2 as f64));
        }
    }
    out
}

/// Average of T_g U over the m1 × m2 angle grid.
pub fn symmetrize(field: &VectorField3, m1: usize, m2: usize) -> Result<VectorField3> {
    if m1 < 4 || m2 < 4 {
        return Err(Error::InvalidArgument(format!("symmetrize needs m1, m2 >= 4 (got {m1}, {m2})")));
    }
    let gs = angle_grid(m1, m2);
    let mut acc = VectorField3::zeros(&field.grid);
    for g in &gs {
        let t = group_act(field, g);
        for (a, b) in acc.values.iter_mut().zip(&t.values) {
            for c in 0..3 {
                a[c] += b[c];
            }
        }
    }
    let s = 1.0 / gs.len() as f64;
    acc.values.iter_mut().for_each(|a| a.iter_mut().for_each(|c| *c *= s));
    Ok(acc)
}

/// Samples per deterministic Monte Carlo chunk.
pub const MC_CHUNK: usize = 4096;

/// Monte Carlo mean and standard error of `f` over `n` draws, chunked so the
/// result is independent of the thread count.
fn mc_mean<F>(n: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(MC_CHUNK);
    let parts: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(n - c * MC_CHUNK);
            let vals: Vec<f64> = (0..len).map(|_| f(&mut rng)).collect();
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            (par::pairwise(&vals), par::pairwise(&sq))
        })
        .collect();
    let s1 = par::pairwise(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
    let s2 = par::pairwise(&parts.iter().map(|p| p.1).collect::<Vec<_>>());
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

fn uniform_s3(rng: &mut ChaCha8Rng) -> [f64; 4] {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.map(|c| c / n);
        }
    }
}

/// Volume of S³.
pub const S3_VOLUME: f64 = 2.0 * PI * PI;

/// ∫_{ℝ³} φ⁶ dx by importance sampling from the multivariate Cauchy density
/// q(x) = π⁻²(1+|x|²)⁻², for which φ⁶/q = 8π²/(1+|x|²).
pub fn phi6_volume_mc(n: usize, seed: u64) -> (f64, f64) {
    mc_mean(n, seed, |rng| {
        let w: f64 = StandardNormal.sample(rng);
        let z: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
        let s = 1.0 / w.abs().max(1e-300);
        let n2 = (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) * s * s;
        8.0 * PI * PI / (1.0 + n2)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L6Check {
    /// |U|₆⁶ on the box by nodal quadrature.
    pub flat: f64,
    /// Monte Carlo estimate of ∫_{S³} |V|⁶ with V(ξ) = U(π(ξ))/φ(π(ξ)).
    pub sphere: f64,
    pub sphere_stderr: f64,
}

pub fn l6_isometry_check(field: &VectorField3, n_sphere_samples: usize, seed: u64) -> L6Check {
    let grid = &field.grid;
    let six: Vec<f64> = field
        .values
        .iter()
        .map(|v| {
            let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            n2 * n2 * n2
        })
        .collect();
    let flat = integrate3(grid, &six);
    let (mean, se) = mc_mean(n_sphere_samples, seed, |rng| {
        let xi = uniform_s3(rng);
        match stereo(&SpherePoint { xi }) {
            Ok(x) => {
                let u = tricubic(field, x);
                let n2 = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) / (conformal_factor(x).powi(2));
                n2 * n2 * n2
            }
            Err(_) => 0.0,
        }
    });
    L6Check {
        flat,
        sphere: S3_VOLUME * mean,
        sphere_stderr: S3_VOLUME * se,
    }
}
