//! Half-plane grid for O-invariant scalars and Cartesian box grid for 3D fields.
//!
//! `Grid2` is cell-centered in r (so 1/r is finite everywhere) and
//! node-centered in z. Quadrature is midpoint in r and trapezoid in z with the
//! cylindrical measure 2πr dr dz. `Grid3` is a uniform node grid on [-L, L]^3
//! whose boundary shell carries zero weight.

use crate::error::{Error, Result};
use crate::par;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid2 {
    pub nr: usize,
    pub nz: usize,
    pub r_max: f64,
    pub z_max: f64,
    pub dr: f64,
    pub dz: f64,
}

impl Grid2 {
    pub fn new(nr: usize, nz: usize, r_max: f64, z_max: f64) -> Result<Self> {
        if nr < 2 || nz < 3 {
            return Err(Error::GridTooSmall(format!("nr={nr}, nz={nz}")));
        }
        if !(r_max > 0.0 && z_max > 0.0 && r_max.is_finite() && z_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "domain extents must be positive (rmax={r_max}, zmax={z_max})"
            )));
        }
        Ok(Grid2 {
            nr,
            nz,
            r_max,
            z_max,
            dr: r_max / nr as f64,
            dz: 2.0 * z_max / (nz - 1) as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.nr * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nz + j
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dr
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        -self.z_max + j as f64 * self.dz
    }

    /// Trapezoid weight in z.
    #[inline]
    pub fn wz(&self, j: usize) -> f64 {
        if j == 0 || j == self.nz - 1 {
            0.5 * self.dz
        } else {
            self.dz
        }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        2.0 * PI * self.r(i) * self.dr * self.wz(j)
    }

    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.len()];
        for i in 0..self.nr {
            for j in 0..self.nz {
                w[self.idx(i, j)] = self.weight(i, j);
            }
        }
        w
    }

    /// Nodes forced to zero: the outer r cell and the two z end rows.
    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == self.nr - 1 || j == 0 || j == self.nz - 1
    }

    /// Mask with 1.0 on free nodes and 0.0 on the boundary ring.
    pub fn free_mask(&self) -> Vec<f64> {
        let mut m = vec![1.0; self.len()];
        for i in 0..self.nr {
            for j in 0..self.nz {
                if self.is_boundary(i, j) {
                    m[self.idx(i, j)] = 0.0;
                }
            }
        }
        m
    }

    /// Same domain with dr and dz halved.
    pub fn refine(&self) -> Grid2 {
        Grid2::new(2 * self.nr, 2 * (self.nz - 1) + 1, self.r_max, self.z_max)
            .expect("refining a valid grid")
    }

    /// Index of the z node mirrored through z = 0.
    #[inline]
    pub fn mirror_j(&self, j: usize) -> usize {
        self.nz - 1 - j
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: Grid2,
    /// Row-major, i (r) outer and j (z) inner.
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Grid2) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    /// Wraps raw values, rejecting non-finite entries and zeroing the boundary ring.
    pub fn from_values(grid: &Grid2, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        for i in 0..grid.nr {
            for j in 0..grid.nz {
                if grid.is_boundary(i, j) {
                    values[grid.idx(i, j)] = 0.0;
                }
            }
        }
        Ok(ScalarField {
            grid: grid.clone(),
            values,
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn scaled(&self, t: f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| t * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Flat index of the node with the largest |u| (first one on ties).
    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (k, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = k;
            }
        }
        best
    }
}

/// Samples a closed-form expression on the grid and forces the boundary ring to 0.
pub fn sample_scalar<F>(grid: &Grid2, expr: F) -> Result<ScalarField>
where
    F: Fn(f64, f64) -> f64,
{
    let mut values = vec![0.0; grid.len()];
    for i in 0..grid.nr {
        let r = grid.r(i);
        for j in 0..grid.nz {
            let z = grid.z(j);
            let v = expr(r, z);
            if !v.is_finite() {
                return Err(Error::NonFiniteSample { r, z, value: v });
            }
            if !grid.is_boundary(i, j) {
                values[grid.idx(i, j)] = v;
            }
        }
    }
    Ok(ScalarField {
        grid: grid.clone(),
        values,
    })
}

/// Σ w_ij v_ij with the cylindrical weights of `grid`.
pub fn integrate2(grid: &Grid2, values: &[f64]) -> f64 {
    assert_eq!(values.len(), grid.len(), "value count does not match grid");
    let nz = grid.nz;
    par::sum_map(values.len(), |k| grid.weight(k / nz, k % nz) * values[k])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid3 {
    pub n: usize,
    pub half_width: f64,
    pub h: f64,
}

impl Grid3 {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 5 {
            return Err(Error::GridTooSmall(format!("n={n} (need n >= 5)")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
        }
        Ok(Grid3 {
            n,
            half_width,
            h: 2.0 * half_width / (n - 1) as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, k: usize) -> f64 {
        -self.half_width + k as f64 * self.h
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unflatten(&self, m: usize) -> (usize, usize, usize) {
        let n = self.n;
        (m / (n * n), (m / n) % n, m % n)
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize, k: usize) -> bool {
        let e = self.n - 1;
        i == 0 || j == 0 || k == 0 || i == e || j == e || k == e
    }

    pub fn refine(&self) -> Grid3 {
        Grid3::new(2 * (self.n - 1) + 1, self.half_width).expect("refining a valid grid")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField3 {
    pub grid: Grid3,
    pub values: Vec<[f64; 3]>,
}

impl VectorField3 {
    pub fn zeros(grid: &Grid3) -> Self {
        VectorField3 {
            grid: grid.clone(),
            values: vec![[0.0; 3]; grid.len()],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        self.values[self.grid.idx(i, j, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .fold(0.0f64, |m, v| m.max((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()))
    }

    /// Pointwise |U|^2.
    pub fn norm_sq(&self) -> Vec<f64> {
        self.values
            .par_iter()
            .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
            .collect()
    }

    pub fn sub(&self, other: &VectorField3) -> VectorField3 {
        assert_eq!(self.grid, other.grid);
        VectorField3 {
            grid: self.grid.clone(),
            values: self
                .values
                .par_iter()
                .zip(other.values.par_iter())
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
                .collect(),
        }
    }
}

/// Builds a field from a closed form; the boundary shell is set to zero.
pub fn sample_vector<F>(grid: &Grid3, expr: F) -> VectorField3
where
    F: Fn([f64; 3]) -> [f64; 3] + Sync,
{
    let values = (0..grid.len())
        .into_par_iter()
        .map(|m| {
            let (i, j, k) = grid.unflatten(m);
            if grid.is_boundary(i, j, k) {
                [0.0; 3]
            } else {
                expr(grid.point(i, j, k))
            }
        })
        .collect();
    VectorField3 {
        grid: grid.clone(),
        values,
    }
}

/// Scalar values on a `Grid3`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField3 {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl ScalarField3 {
    pub fn max_abs_interior(&self) -> f64 {
        let g = &self.grid;
        par::max_map(g.len(), |m| {
            let (i, j, k) = g.unflatten(m);
            if g.is_boundary(i, j, k) {
                0.0
            } else {
                self.values[m].abs()
            }
        })
    }
}

/// Midpoint sum h^3 Σ over interior nodes; the boundary shell has weight 0.
pub fn integrate3(grid: &Grid3, values: &[f64]) -> f64 {
    assert_eq!(values.len(), grid.len(), "value count does not match grid");
    let h3 = grid.h * grid.h * grid.h;
    h3 * par::sum_map(values.len(), |m| {
        let (i, j, k) = grid.unflatten(m);
        if grid.is_boundary(i, j, k) {
            0.0
        } else {
            values[m]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_and_weights() {
        let g = Grid2::new(4, 5, 2.0, 1.0).unwrap();
        assert_eq!(g.dr, 0.5);
        assert_eq!(g.dz, 0.5);
        assert_eq!(g.r(0), 0.25);
        assert_eq!(g.z(0), -1.0);
        assert_eq!(g.z(4), 1.0);
        assert!((g.weight(0, 0) - 2.0 * PI * 0.25 * 0.5 * 0.25).abs() < 1e-15);
        assert!((g.weight(1, 2) - 2.0 * PI * 0.75 * 0.5 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn refine_doubles_resolution() {
        let g = Grid2::new(32, 33, 6.0, 6.0).unwrap().refine();
        assert_eq!((g.nr, g.nz), (64, 65));
        assert_eq!(Grid3::new(33, 3.0).unwrap().refine().n, 65);
    }

    #[test]
    fn zero_integrates_to_zero() {
        let g = Grid2::new(16, 33, 6.0, 6.0).unwrap();
        let u = sample_scalar(&g, |_, _| 0.0).unwrap();
        assert_eq!(integrate2(&g, &u.values), 0.0);
        let g3 = Grid3::new(9, 1.0).unwrap();
        assert_eq!(integrate3(&g3, &vec![0.0; g3.len()]), 0.0);
    }

    #[test]
    fn inverse_r_is_finite() {
        let g = Grid2::new(16, 17, 1.0, 1.0).unwrap();
        let u = sample_scalar(&g, |r, _| 1.0 / r).unwrap();
        assert!(u.values.iter().all(|v| v.is_finite()));
        assert_eq!(u.get(0, 5), 1.0 / g.r(0));
    }

    #[test]
    fn non_finite_sample_names_point() {
        let g = Grid2::new(8, 9, 1.0, 1.0).unwrap();
        let err = sample_scalar(&g, |r, z| if r > 0.5 && z > 0.0 { f64::NAN } else { 0.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { .. }));
    }

    #[test]
    fn unit_box_volume() {
        for n in [9, 17, 33] {
            let g = Grid3::new(n, 1.0).unwrap();
            let v = integrate3(&g, &vec![1.0; g.len()]);
            assert!((v - 8.0).abs() <= 12.0 * g.h * 2.0, "n={n} v={v}");
        }
    }
}
