//! Energies J and E, first variations, fiber maps, the ring test function and
//! the anisotropic scaling path.

use crate::error::{Error, Result};
use crate::form::XForm;
use crate::grid::{integrate3, Grid2, ScalarField, VectorField3};
use crate::nonlinearity::Nonlinearity;
use crate::operators::curl3;
use crate::par;

/// Relative CG tolerance of the Riesz solve in `gradient_scalar`.
pub const RIESZ_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub quad: f64,
    pub nonlinear: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(quad: f64, nonlinear: f64) -> Self {
        EnergyBreakdown {
            quad,
            nonlinear,
            total: quad - nonlinear,
        }
    }
}

/// A discretized scalar problem: the X form on a grid plus the nonlinearity.
#[derive(Clone, Debug)]
pub struct Problem {
    pub form: XForm,
    pub nl: Nonlinearity,
}

impl Problem {
    pub fn new(grid: &Grid2, a: f64, nl: &Nonlinearity) -> Result<Self> {
        Ok(Problem {
            form: XForm::new(grid, a)?,
            nl: nl.clone(),
        })
    }

    pub fn grid(&self) -> &Grid2 {
        &self.form.grid
    }

    /// ∫ F(x, u).
    pub fn nonlinear(&self, u: &[f64]) -> f64 {
        let g = &self.form.grid;
        let w = self.form.weights();
        let m = self.form.mask();
        par::sum_map(u.len(), |k| {
            if m[k] == 0.0 {
                return 0.0;
            }
            let (i, j) = (k / g.nz, k % g.nz);
            w[k] * self.nl.big_f(g.r(i), g.z(j), u[k])
        })
    }

    /// ∫ f(x, t u) u.
    pub fn f_dot(&self, u: &[f64], t: f64) -> f64 {
        let g = &self.form.grid;
        let w = self.form.weights();
        let m = self.form.mask();
        par::sum_map(u.len(), |k| {
            if m[k] == 0.0 {
                return 0.0;
            }
            let (i, j) = (k / g.nz, k % g.nz);
            w[k] * self.nl.f(g.r(i), g.z(j), t * u[k]) * u[k]
        })
    }

    pub fn energy(&self, u: &[f64]) -> EnergyBreakdown {
        EnergyBreakdown::new(0.5 * self.form.norm_sq(u), self.nonlinear(u))
    }

    /// W f(·, u) on free nodes.
    pub fn weighted_f(&self, u: &[f64]) -> Vec<f64> {
        let g = &self.form.grid;
        let w = self.form.weights();
        let m = self.form.mask();
        (0..u.len())
            .map(|k| {
                let (i, j) = (k / g.nz, k % g.nz);
                m[k] * w[k] * self.nl.f(g.r(i), g.z(j), u[k])
            })
            .collect()
    }

    /// K u − W f(u): the first variation as a covector, ⟨R, v⟩_measure = vᵀ r_w.
    pub fn weighted_residual(&self, u: &[f64]) -> Vec<f64> {
        let mut r = self.form.apply_vec(u);
        let wf = self.weighted_f(u);
        for (a, b) in r.iter_mut().zip(wf) {
            *a -= b;
        }
        r
    }

    /// Positive t with J'(tu)(tu) = 0, or None when the fiber has no interior
    /// maximum (t·u never reaches the Nehari set).
    pub fn fiber_root(&self, u: &[f64]) -> Option<f64> {
        let q = self.form.norm_sq(u);
        if q == 0.0 {
            return None;
        }
        // h(t) = Q − ∫ f(tu) u / t is nonincreasing under F4, positive near 0.
        let h = |t: f64| q - self.f_dot(u, t) / t;
        let mut hi = 1.0;
        let mut steps = 0;
        while h(hi) > 0.0 {
            hi *= 2.0;
            steps += 1;
            if steps > 200 || !hi.is_finite() {
                return None;
            }
        }
        let mut lo = 1.0;
        steps = 0;
        while h(lo) <= 0.0 {
            lo *= 0.5;
            steps += 1;
            if steps > 1000 {
                return None;
            }
        }
        if lo > hi {
            std::mem::swap(&mut lo, &mut hi);
        }
        Some(bisect(h, lo, hi))
    }
}

/// Bisection on a decreasing sign change until the bracket stops shrinking.
fn bisect<F: Fn(f64) -> f64>(g: F, mut lo: f64, mut hi: f64) -> f64 {
    let pos_lo = g(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > 0.0) == pos_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn nonlinear_integral(u: &ScalarField, nl: &Nonlinearity) -> f64 {
    let g = &u.grid;
    par::sum_map(g.len(), |k| {
        let (i, j) = (k / g.nz, k % g.nz);
        if g.is_boundary(i, j) {
            0.0
        } else {
            g.weight(i, j) * nl.big_f(g.r(i), g.z(j), u.values[k])
        }
    })
}

/// J(u) split into ½‖u‖² and ∫F.
pub fn energy_scalar(u: &ScalarField, a: f64, nl: &Nonlinearity) -> Result<EnergyBreakdown> {
    let form = XForm::new(&u.grid, a)?;
    Ok(EnergyBreakdown::new(
        0.5 * form.norm_sq(&u.values),
        nonlinear_integral(u, nl),
    ))
}

/// E(U) = ½∫|∇×U|² − ∫H(x,U) with H(x,U) = F(x,|U|).
pub fn energy_vector(field: &VectorField3, nl: &Nonlinearity) -> EnergyBreakdown {
    let g = &field.grid;
    let c = curl3(field);
    let quad = 0.5 * integrate3(g, &c.norm_sq());
    let h: Vec<f64> = (0..g.len())
        .map(|m| {
            let (i, j, k) = g.unflatten(m);
            nl.big_h(g.point(i, j, k), field.values[m])
        })
        .collect();
    EnergyBreakdown::new(quad, integrate3(g, &h))
}

#[derive(Clone, Debug)]
pub struct Gradient {
    /// Raw Euler–Lagrange residual A u − f(·,u) (zero on the boundary ring).
    pub residual: ScalarField,
    /// Riesz representative ψ with A ψ = R.
    pub riesz: Vec<f64>,
    /// √⟨Aψ, ψ⟩_measure.
    pub dual_norm: f64,
    pub cg_iterations: usize,
}

pub fn gradient_scalar(u: &ScalarField, a: f64, nl: &Nonlinearity) -> Result<Gradient> {
    let p = Problem::new(&u.grid, a, nl)?;
    let rw = p.weighted_residual(&u.values);
    let w = p.form.weights();
    let m = p.form.mask();
    let raw: Vec<f64> = (0..rw.len()).map(|k| if m[k] == 0.0 { 0.0 } else { rw[k] / w[k] }).collect();
    let (psi, it) = p.form.solve(&rw, RIESZ_TOL, p.form.default_max_iter())?;
    let dual = par::dot(&psi, &rw).max(0.0).sqrt();
    Ok(Gradient {
        residual: ScalarField {
            grid: u.grid.clone(),
            values: raw,
        },
        riesz: psi,
        dual_norm: dual,
        cg_iterations: it,
    })
}

#[derive(Clone, Debug)]
pub struct FiberProfile {
    pub ts: Vec<f64>,
    pub js: Vec<f64>,
    pub root: Option<f64>,
}

/// Number of log-spaced samples of the fiber on (0, t_max].
pub const FIBER_SAMPLES: usize = 256;

/// Samples t ↦ J(tu) and locates the root of g(t) = t²‖u‖² − ∫f(tu)tu.
pub fn fiber_profile(u: &ScalarField, a: f64, nl: &Nonlinearity, t_max: f64) -> Result<FiberProfile> {
    if u.max_abs() == 0.0 {
        return Err(Error::InvalidArgument("fiber of the zero field".into()));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    let p = Problem::new(&u.grid, a, nl)?;
    let q = p.form.norm_sq(&u.values);
    let v = &u.values;
    // g(t)/t² has the sign of g and is monotone under F4.
    let gs = |t: f64| q - p.f_dot(v, t) / t;
    let t_min = t_max * 1e-4;
    let ratio = (t_max / t_min).powf(1.0 / (FIBER_SAMPLES - 1) as f64);
    let ts: Vec<f64> = (0..FIBER_SAMPLES).map(|k| t_min * ratio.powi(k as i32)).collect();
    let signs: Vec<f64> = ts.iter().map(|&t| gs(t)).collect();
    let js: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let tu: Vec<f64> = v.iter().map(|x| t * x).collect();
            0.5 * t * t * q - p.nonlinear(&tu)
        })
        .collect();
    let nonzero: Vec<(usize, f64)> = signs.iter().copied().enumerate().filter(|(_, s)| *s != 0.0).collect();
    let changes = nonzero.windows(2).filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0)).count();
    if changes > 1 {
        return Err(Error::FiberSignPattern { changes });
    }
    let root = if changes == 1 {
        let k = nonzero.windows(2).find(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0)).unwrap();
        Some(bisect(gs, ts[k[0].0], ts[k[1].0]))
    } else if signs.iter().all(|&s| s > 0.0) {
        None
    } else {
        // Root below the sampled window.
        let mut lo = t_min;
        let mut n = 0;
        while gs(lo) <= 0.0 && n < 2000 {
            lo *= 0.5;
            n += 1;
        }
        if gs(lo) <= 0.0 {
            None
        } else {
            Some(bisect(gs, lo, t_min))
        }
    };
    Ok(FiberProfile { ts, js, root })
}

/// Piecewise-linear plateau profile: 0 on |t| < 1, rising to u0 on [1, 2],
/// flat to R, falling to 0 on [R, R+1].
pub fn ring_phi(t: f64, u0: f64, r_big: f64) -> f64 {
    let a = t.abs();
    if a < 1.0 || a > r_big + 1.0 {
        0.0
    } else if a < 2.0 {
        u0 * (a - 1.0)
    } else if a <= r_big {
        u0
    } else {
        u0 * (r_big + 1.0 - a)
    }
}

/// Ring function w(r, z) = φ_R(r)φ_R(|z|)/u0, which takes the value u0 on its plateau.
pub fn ring_function(grid: &Grid2, u0: f64, r_big: f64, lambda: f64) -> ScalarField {
    let mut w = ScalarField::zeros(grid);
    if u0 == 0.0 {
        return w;
    }
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            if grid.is_boundary(i, j) {
                continue;
            }
            let k = grid.idx(i, j);
            w.values[k] = ring_phi(lambda * grid.r(i), u0, r_big) * ring_phi(grid.z(j), u0, r_big) / u0;
        }
    }
    w
}

#[derive(Clone, Debug)]
pub struct RingReport {
    pub r_big: f64,
    pub w: ScalarField,
    /// ∫ F(z, w).
    pub nonlinear: f64,
    /// ½∫ |∂_z w|².
    pub half_grad_z: f64,
    /// Strict inequality ∫F > ½∫|∂_z w|².
    pub holds: bool,
}

pub fn mountain_pass_ring(u0: f64, r_big: f64, grid: &Grid2, nl: &Nonlinearity) -> Result<RingReport> {
    if r_big < 3.0 {
        return Err(Error::InvalidArgument(format!("ring radius must be at least 3, got {r_big}")));
    }
    let outer = grid.r(grid.nr - 1);
    if outer < r_big + 1.0 || grid.z_max < r_big + 1.0 {
        return Err(Error::GridTooSmall(format!(
            "ring with R={r_big} needs [0,{0}]x[-{0},{0}] inside the free region (r up to {outer}, |z| up to {1})",
            r_big + 1.0,
            grid.z_max
        )));
    }
    let w = ring_function(grid, u0, r_big, 1.0);
    let form = XForm::new(grid, 1.0)?;
    let half_grad_z = 0.5 * form.split(&w.values).q_z;
    let nonlinear = nonlinear_integral(&w, nl);
    Ok(RingReport {
        r_big,
        w,
        nonlinear,
        half_grad_z,
        holds: nonlinear > half_grad_z,
    })
}

/// Smallest integer R ≥ 3 that fits the grid and satisfies the ring inequality.
pub fn find_ring_radius(u0: f64, grid: &Grid2, nl: &Nonlinearity) -> Result<Option<RingReport>> {
    let outer = grid.r(grid.nr - 1).min(grid.z_max);
    let mut r_big = 3.0;
    while r_big + 1.0 <= outer {
        let rep = mountain_pass_ring(u0, r_big, grid, nl)?;
        if rep.holds {
            return Ok(Some(rep));
        }
        r_big += 1.0;
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct ScalingPath {
    /// ∫ |∂_r w|² + (a/r²) w².
    pub a_term: f64,
    /// ∫ ½|∂_z w|² − F(z, w).
    pub b_term: f64,
    /// (λ, J(w(λ·,·))).
    pub rows: Vec<(f64, f64)>,
}

impl ScalingPath {
    pub fn value(&self, lambda: f64) -> f64 {
        0.5 * self.a_term + self.b_term / (lambda * lambda)
    }

    /// λ below which the path value is negative, when B < 0.
    pub fn negative_below(&self) -> Option<f64> {
        if self.b_term < 0.0 {
            Some((-2.0 * self.b_term / self.a_term).sqrt())
        } else {
            None
        }
    }
}

/// J(w(λ·,·)) = ½A + λ⁻²B with A and B computed once on the grid.
pub fn scaling_path(w: &ScalarField, a: f64, nl: &Nonlinearity, lambdas: &[f64]) -> Result<ScalingPath> {
    let form = XForm::new(&w.grid, a)?;
    let s = form.split(&w.values);
    let a_term = s.q_r + s.q_pot;
    let b_term = 0.5 * s.q_z - nonlinear_integral(w, nl);
    let mut path = ScalingPath {
        a_term,
        b_term,
        rows: Vec::with_capacity(lambdas.len()),
    };
    for &l in lambdas {
        if !(l > 0.0) {
            return Err(Error::InvalidArgument(format!("scaling factor must be positive, got {l}")));
        }
        let v = path.value(l);
        path.rows.push((l, v));
    }
    Ok(path)
}
