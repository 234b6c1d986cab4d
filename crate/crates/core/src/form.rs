//! Summation-by-parts quadratic form of the X norm and its operator.
//!
//! Q(u,v) = Σ_faces c_r Δ_r u Δ_r v + Σ_edges c_z Δ_z u Δ_z v + Σ w (a/r²) u v,
//! where r differences sit on faces r_{i+1/2} = (i+1)dr with coefficient
//! 2π r_{i+1/2} dr wz_j / dr² and z differences carry 2π r_i dr / dz.
//! `apply` returns K u with K symmetric, Q(u,v) = vᵀ K u and A = W⁻¹ K.

use crate::band::BandCholesky;
use crate::error::{check_a, Error, Result};
use crate::grid::Grid2;
use crate::par;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub struct XForm {
    pub grid: Grid2,
    pub a: f64,
    weights: Vec<f64>,
    mask: Vec<f64>,
    diag: Vec<f64>,
}

/// Parts of Q(u,u): radial gradient, axial gradient, singular potential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QSplit {
    pub q_r: f64,
    pub q_z: f64,
    pub q_pot: f64,
}

impl QSplit {
    pub fn total(&self) -> f64 {
        self.q_r + self.q_z + self.q_pot
    }
}

impl XForm {
    pub fn new(grid: &Grid2, a: f64) -> Result<Self> {
        check_a(a)?;
        let weights = grid.weights();
        let mask = grid.free_mask();
        let mut form = XForm {
            grid: grid.clone(),
            a,
            weights,
            mask,
            diag: Vec::new(),
        };
        form.diag = form.assemble_diag();
        Ok(form)
    }

    #[inline]
    fn cr(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        2.0 * PI * (i as f64 + 1.0) * g.wz(j)
    }

    #[inline]
    fn cz(&self, i: usize) -> f64 {
        let g = &self.grid;
        2.0 * PI * g.r(i) * g.dr / g.dz
    }

    #[inline]
    fn cp(&self, i: usize, j: usize) -> f64 {
        let r = self.grid.r(i);
        self.weights[self.grid.idx(i, j)] * self.a / (r * r)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    fn assemble_diag(&self) -> Vec<f64> {
        let g = &self.grid;
        let mut d = vec![0.0; g.len()];
        for i in 0..g.nr {
            for j in 0..g.nz {
                let k = g.idx(i, j);
                if self.mask[k] == 0.0 {
                    d[k] = 1.0;
                    continue;
                }
                let mut s = self.cp(i, j);
                if i + 1 < g.nr {
                    s += self.cr(i, j);
                }
                if i > 0 {
                    s += self.cr(i - 1, j);
                }
                if j + 1 < g.nz {
                    s += self.cz(i);
                }
                if j > 0 {
                    s += self.cz(i);
                }
                d[k] = s;
            }
        }
        d
    }

    /// out = K u on free nodes, 0 on the boundary ring. Boundary values of `u`
    /// are treated as 0.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let g = &self.grid;
        let nz = g.nz;
        let val = |i: usize, j: usize| u[i * nz + j] * self.mask[i * nz + j];
        out.par_chunks_mut(nz).enumerate().for_each(|(i, row)| {
            for (j, o) in row.iter_mut().enumerate() {
                let k = i * nz + j;
                if self.mask[k] == 0.0 {
                    *o = 0.0;
                    continue;
                }
                let c = val(i, j);
                let mut s = self.cp(i, j) * c;
                if i + 1 < g.nr {
                    s += self.cr(i, j) * (c - val(i + 1, j));
                }
                if i > 0 {
                    s += self.cr(i - 1, j) * (c - val(i - 1, j));
                }
                let czi = self.cz(i);
                s += czi * (c - val(i, j + 1));
                s += czi * (c - val(i, j - 1));
                *o = s;
            }
        });
    }

    pub fn apply_vec(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply(u, &mut out);
        out
    }

    /// The three parts of Q(u,u), each a sum of nonnegative terms.
    pub fn split(&self, u: &[f64]) -> QSplit {
        let g = &self.grid;
        let nz = g.nz;
        let val = |i: usize, j: usize| u[i * nz + j] * self.mask[i * nz + j];
        let q_r = par::sum_map(g.len(), |k| {
            let (i, j) = (k / nz, k % nz);
            if i + 1 < g.nr {
                let d = val(i + 1, j) - val(i, j);
                self.cr(i, j) * d * d
            } else {
                0.0
            }
        });
        let q_z = par::sum_map(g.len(), |k| {
            let (i, j) = (k / nz, k % nz);
            if j + 1 < nz {
                let d = val(i, j + 1) - val(i, j);
                self.cz(i) * d * d
            } else {
                0.0
            }
        });
        let q_pot = par::sum_map(g.len(), |k| {
            let (i, j) = (k / nz, k % nz);
            let v = val(i, j);
            self.cp(i, j) * v * v
        });
        QSplit { q_r, q_z, q_pot }
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.split(u).total()
    }

    /// Bilinear form Q(u,v) = vᵀ K u.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let ku = self.apply_vec(u);
        par::sum_map(v.len(), |k| ku[k] * v[k] * self.mask[k])
    }

    /// Solves K x = b on free nodes by Jacobi-preconditioned conjugate
    /// gradients, stopping when the preconditioned residual norm drops below
    /// `rel_tol` times its initial value.
    pub fn solve(&self, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
        let n = b.len();
        let mask = &self.mask;
        let rhs: Vec<f64> = (0..n).map(|k| b[k] * mask[k]).collect();
        let mut x = vec![0.0; n];
        let mut r = rhs.clone();
        let mut z: Vec<f64> = (0..n).map(|k| r[k] / self.diag[k]).collect();
        let mut p = z.clone();
        let mut rz = par::dot(&r, &z);
        if rz == 0.0 {
            return Ok((x, 0));
        }
        let target = rel_tol * rel_tol * rz;
        let mut kp = vec![0.0; n];
        for it in 1..=max_iter {
            self.apply(&p, &mut kp);
            let pkp = par::dot(&p, &kp);
            if pkp <= 0.0 {
                return Err(Error::CgNotConverged {
                    iterations: it,
                    residual: (rz / (target / (rel_tol * rel_tol))).sqrt(),
                });
            }
            let alpha = rz / pkp;
            x.par_iter_mut().zip(p.par_iter()).for_each(|(xi, pi)| *xi += alpha * pi);
            r.par_iter_mut().zip(kp.par_iter()).for_each(|(ri, ki)| *ri -= alpha * ki);
            z.par_iter_mut()
                .zip(r.par_iter().zip(self.diag.par_iter()))
                .for_each(|(zi, (ri, di))| *zi = ri / di);
            let rz_new = par::dot(&r, &z);
            if rz_new <= target {
                return Ok((x, it));
            }
            let beta = rz_new / rz;
            rz = rz_new;
            p.par_iter_mut().zip(z.par_iter()).for_each(|(pi, zi)| *pi = zi + beta * *pi);
        }
        Err(Error::CgNotConverged {
            iterations: max_iter,
            residual: (rz / (target / (rel_tol * rel_tol))).sqrt(),
        })
    }

    /// Banded Cholesky factor of K (identity rows on the boundary ring).
    /// The bandwidth is nz, so memory is (nr·nz)·(nz+1) doubles.
    pub fn factor(&self) -> Result<BandCholesky> {
        let g = &self.grid;
        let nz = g.nz;
        BandCholesky::factor(g.len(), nz, |k, d| {
            if d == 0 {
                return self.diag[k];
            }
            let (i, j) = (k / nz, k % nz);
            let free = |m: usize| self.mask[m] != 0.0;
            if d == 1 && j >= 1 && free(k) && free(k - 1) {
                -self.cz(i)
            } else if d == nz && i >= 1 && free(k) && free(k - nz) {
                -self.cr(i - 1, j)
            } else {
                0.0
            }
        })
    }

    /// CG iteration budget used by the Riesz solves.
    pub fn default_max_iter(&self) -> usize {
        20 * (self.grid.nr + self.grid.nz) + 200
    }
}
