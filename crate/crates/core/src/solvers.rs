//! Ground states on the Nehari set, the critical Sobolev-type quotient, an
//! odd-in-z excited surrogate and a string-method mountain-pass bound.

use crate::band::BandCholesky;
use crate::error::{Error, Result};
use crate::functionals::{mountain_pass_ring, ring_function, EnergyBreakdown, Problem, RIESZ_TOL};
use crate::grid::{Grid2, ScalarField};
use crate::nonlinearity::{check_assumptions, Nonlinearity};
use crate::par;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalizeMode {
    Nehari,
    L6Sphere,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub tol_residual: f64,
    pub step0: f64,
    pub seed: u64,
    pub normalize_mode: NormalizeMode,
    pub positivity: bool,
    pub k_nodes: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iter: 500,
            tol_residual: 1e-8,
            step0: 1.0,
            seed: 0,
            normalize_mode: NormalizeMode::Nehari,
            positivity: false,
            k_nodes: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.tol_residual > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol_residual)));
        }
        if !(self.step0 > 0.0 && self.step0.is_finite()) {
            return Err(Error::InvalidArgument(format!("step0 must be positive, got {}", self.step0)));
        }
        if self.k_nodes > 1 {
            return Err(Error::InvalidArgument(format!("k_nodes must be 0 or 1, got {}", self.k_nodes)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub j: f64,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub u: ScalarField,
    pub breakdown: EnergyBreakdown,
    /// Dual norm of the Euler–Lagrange residual in the class the solve ran in.
    pub dual_residual: f64,
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub converged: bool,
    /// min ‖u‖²/|u|₆² for the critical solve.
    pub rayleigh: Option<f64>,
    /// Dual residual against all of X on the grid, when it differs from `dual_residual`.
    pub full_dual_residual: Option<f64>,
    pub label: String,
}

/// Armijo constant.
pub const ARMIJO_C: f64 = 1e-4;
/// Relative energy slack tolerated in the line search once J differences hit rounding.
pub const LINE_SEARCH_SLACK: f64 = 1e-13;
const MIN_STEP: f64 = 1e-12;
/// Above this many stored band entries the Riesz solves fall back to CG.
const BAND_BUDGET: usize = 40_000_000;

/// Solves K x = b, by a banded factorization when it fits in memory.
pub(crate) enum Riesz {
    Band(BandCholesky),
    Cg,
}

impl Riesz {
    pub(crate) fn new(p: &Problem) -> Result<Self> {
        let g = p.grid();
        if g.len() * (g.nz + 1) <= BAND_BUDGET {
            Ok(Riesz::Band(p.form.factor()?))
        } else {
            Ok(Riesz::Cg)
        }
    }

    pub(crate) fn solve(&self, p: &Problem, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Riesz::Band(f) => {
                let m = p.form.mask();
                let rhs: Vec<f64> = b.iter().zip(m).map(|(x, m)| x * m).collect();
                Ok(f.solve(&rhs))
            }
            Riesz::Cg => Ok(p.form.solve(b, RIESZ_TOL, p.form.default_max_iter())?.0),
        }
    }
}

/// u₀ = r e^{−r²−z²} for seed 0; other seeds draw amplitude and widths.
pub fn initial_guess(grid: &Grid2, seed: u64) -> ScalarField {
    let (amp, sr, sz) = if seed == 0 {
        (1.0, 1.0, 1.0)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (rng.gen_range(0.5..2.0), rng.gen_range(0.75..1.33), rng.gen_range(0.75..1.33))
    };
    sample(grid, |r, z| amp * r * (-(r * r) / (sr * sr) - z * z / (sz * sz)).exp())
}

/// Odd-in-z counterpart r z e^{−r²−z²} with the same seeded widths.
pub fn initial_guess_odd(grid: &Grid2, seed: u64) -> ScalarField {
    let base = initial_guess(grid, seed);
    let mut u = base.clone();
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            let k = grid.idx(i, j);
            u.values[k] = base.values[k] * grid.z(j);
        }
    }
    antisymmetrize(&mut u);
    u
}

fn sample<F: Fn(f64, f64) -> f64>(grid: &Grid2, f: F) -> ScalarField {
    let mut u = ScalarField::zeros(grid);
    for i in 0..grid.nr {
        for j in 0..grid.nz {
            if !grid.is_boundary(i, j) {
                u.values[grid.idx(i, j)] = f(grid.r(i), grid.z(j));
            }
        }
    }
    u
}

/// u(r, z) ← ½(u(r, z) − u(r, −z)).
pub fn antisymmetrize(u: &mut ScalarField) {
    let g = u.grid.clone();
    for i in 0..g.nr {
        for j in 0..g.nz / 2 + 1 {
            let jm = g.mirror_j(j);
            let (a, b) = (g.idx(i, j), g.idx(i, jm));
            let v = 0.5 * (u.values[a] - u.values[b]);
            u.values[a] = v;
            u.values[b] = -v;
        }
    }
}

/// Reports the representative with a nonnegative value at the max-|u| node.
fn fix_sign(u: &mut [f64]) {
    let mut best = 0usize;
    for k in 0..u.len() {
        if u[k].abs() > u[best].abs() {
            best = k;
        }
    }
    if u[best] < 0.0 {
        u.iter_mut().for_each(|x| *x = -*x);
    }
}

fn check_norm(p: &Problem, u: &[f64]) -> Result<()> {
    let n = p.form.norm_sq(u).sqrt();
    if n < 1e-12 {
        Err(Error::Collapse(n))
    } else {
        Ok(())
    }
}

fn nehari_project(p: &Problem, u: &mut [f64]) -> Result<()> {
    check_norm(p, u)?;
    match p.fiber_root(u) {
        Some(t) => {
            u.iter_mut().for_each(|x| *x *= t);
            Ok(())
        }
        None => Err(Error::Assumption {
            assumption: "F3",
            detail: "the fiber t -> J(tu) has no maximum; the iterate cannot be projected on the Nehari set".into(),
        }),
    }
}

/// Riesz-gradient descent with Armijo backtracking, projecting onto the
/// Nehari set after every step. Without `init`, starts from `initial_guess`.
pub fn solve_ground_state(
    a: f64,
    nl: &Nonlinearity,
    grid: &Grid2,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    let init = initial_guess(grid, cfg.seed);
    solve_ground_state_from(a, nl, &init, cfg, false)
}

pub fn solve_ground_state_from(
    a: f64,
    nl: &Nonlinearity,
    init: &ScalarField,
    cfg: &SolverConfig,
    odd: bool,
) -> Result<SolveResult> {
    cfg.validate()?;
    let p = Problem::new(&init.grid, a, nl)?;
    let riesz = Riesz::new(&p)?;
    let mut u = init.clone();
    if odd {
        antisymmetrize(&mut u);
    }
    if cfg.positivity {
        u.values.iter_mut().for_each(|x| *x = x.abs());
    }
    nehari_project(&p, &mut u.values)?;
    let mut trace = Vec::new();
    let mut j = p.energy(&u.values).total;
    let mut alpha = cfg.step0;
    let mut dual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..cfg.max_iter {
        let rw = p.weighted_residual(&u.values);
        let psi = riesz.solve(&p, &rw)?;
        dual = par::dot(&psi, &rw).max(0.0).sqrt();
        trace.push(TraceEntry { j, residual: dual });
        iterations = it;
        if dual <= cfg.tol_residual {
            converged = true;
            break;
        }
        let slack = LINE_SEARCH_SLACK * j.abs();
        let mut accepted = None;
        let mut step = alpha;
        while step >= MIN_STEP {
            let mut v: Vec<f64> = u.values.iter().zip(&psi).map(|(x, d)| x - step * d).collect();
            if cfg.positivity {
                v.iter_mut().for_each(|x| *x = x.abs());
            }
            if nehari_project(&p, &mut v).is_ok() {
                let jv = p.energy(&v).total;
                if jv <= j - ARMIJO_C * step * dual * dual + slack {
                    accepted = Some((v, jv));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((v, jv)) => {
                u.values = v;
                j = jv;
                if odd {
                    antisymmetrize(&mut u);
                }
                alpha = (2.0 * step).min(cfg.step0);
            }
            None => break,
        }
        iterations = it + 1;
    }
    if !converged && iterations == cfg.max_iter {
        let rw = p.weighted_residual(&u.values);
        let psi = riesz.solve(&p, &rw)?;
        dual = par::dot(&psi, &rw).max(0.0).sqrt();
        converged = dual <= cfg.tol_residual;
    }
    fix_sign(&mut u.values);
    let breakdown = p.energy(&u.values);
    Ok(SolveResult {
        u,
        breakdown,
        dual_residual: dual,
        iterations,
        trace,
        converged,
        rayleigh: None,
        full_dual_residual: None,
        label: if odd {
            "odd-in-z surrogate excited state".into()
        } else {
            "ground state".into()
        },
    })
}

/// Linear map from hat coefficients on η = arcsin(2r/(1+r²+z²)) to grid values
/// u = √(2/(1+r²+z²)) v(η).
struct SymmetricBasis {
    /// Per node: two (column, weight) pairs; column usize::MAX marks absent.
    entries: Vec<[(usize, f64); 2]>,
    cols: usize,
}

impl SymmetricBasis {
    fn default_hats(grid: &Grid2) -> usize {
        ((2.0 * std::f64::consts::PI / grid.dr.min(grid.dz)).ceil() as usize).max(32)
    }

    fn new(grid: &Grid2, ns: usize) -> Self {
        let de = FRAC_PI_2 / ns as f64;
        let mut raw = vec![[(usize::MAX, 0.0); 2]; grid.len()];
        let mut used = vec![false; ns + 1];
        for i in 0..grid.nr {
            for j in 0..grid.nz {
                if grid.is_boundary(i, j) {
                    continue;
                }
                let (r, z) = (grid.r(i), grid.z(j));
                let q = 1.0 + r * r + z * z;
                let eta = (2.0 * r / q).min(1.0).asin();
                let phi = (2.0 / q).sqrt();
                let t = eta / de;
                let k0 = (t.floor() as usize).min(ns - 1);
                let th = t - k0 as f64;
                let k = grid.idx(i, j);
                // Hat 0 is dropped so that v(0) = 0.
                for (slot, (col, wt)) in [(k0, 1.0 - th), (k0 + 1, th)].into_iter().enumerate() {
                    if col >= 1 && wt != 0.0 {
                        raw[k][slot] = (col, wt * phi);
                        used[col] = true;
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; ns + 1];
        let mut cols = 0;
        for c in 1..=ns {
            if used[c] {
                remap[c] = cols;
                cols += 1;
            }
        }
        let entries = raw
            .into_iter()
            .map(|e| e.map(|(c, w)| if c == usize::MAX { (c, 0.0) } else { (remap[c], w) }))
            .collect();
        SymmetricBasis { entries, cols }
    }

    fn expand(&self, c: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| e.iter().filter(|(k, _)| *k != usize::MAX).map(|(k, w)| w * c[*k]).sum())
            .collect()
    }

    fn restrict(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (e, x) in self.entries.iter().zip(v) {
            for (k, w) in e {
                if *k != usize::MAX {
                    out[*k] += w * x;
                }
            }
        }
        out
    }
}

fn l6_sixth(p: &Problem, u: &[f64]) -> f64 {
    let w = p.form.weights();
    let m = p.form.mask();
    par::sum_map(u.len(), |k| {
        let x = u[k] * u[k];
        m[k] * w[k] * x * x * x
    })
}

/// Minimizes R(u) = ‖u‖²/|u|₆² over profiles u = √(2/(1+r²+z²)) v(2r/(1+r²+z²)),
/// the O(2)-invariant scalars whose lifts carry the conformal SO(2)×SO(2)
/// symmetry, by normalized inverse iteration on |u|₆ = 1.
fn reduced_form(p: &Problem, basis: &SymmetricBasis) -> DMatrix<f64> {
    let n = basis.cols;
    let mut kr = DMatrix::<f64>::zeros(n, n);
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let col = basis.restrict(&p.form.apply_vec(&basis.expand(&e)));
        for r in 0..n {
            kr[(r, c)] = col[r];
        }
    }
    (&kr + kr.transpose()) * 0.5
}

pub fn solve_critical(a: f64, grid: &Grid2, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let p = Problem::new(grid, a, &Nonlinearity::critical())?;
    // On coarse grids the hats near the torus core can share a single node,
    // which makes their columns dependent; fewer, wider hats fix that.
    let mut ns = SymmetricBasis::default_hats(grid);
    let (basis, kr, chol) = loop {
        let basis = SymmetricBasis::new(grid, ns);
        let kr = reduced_form(&p, &basis);
        if let Some(chol) = kr.clone().cholesky() {
            break (basis, kr, chol);
        }
        if ns <= 8 {
            return Err(Error::GridTooSmall("critical reduced form is singular on this grid".into()));
        }
        ns = ns * 3 / 4;
    };
    let n = basis.cols;
    let w = p.form.weights().to_vec();
    let m = p.form.mask().to_vec();
    let de = FRAC_PI_2 / n as f64;
    let mut c = DVector::from_fn(n, |k, _| ((k + 1) as f64 * de).sin());
    let mut trace = Vec::new();
    let mut converged = false;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut s = 0.0;
    let step = cfg.step0.min(1.0);
    for it in 0..=cfg.max_iter {
        let u = basis.expand(c.as_slice());
        let n6 = l6_sixth(&p, &u);
        if !(n6 > 0.0) {
            return Err(Error::Collapse(0.0));
        }
        c /= n6.powf(1.0 / 6.0);
        let u = basis.expand(c.as_slice());
        s = c.dot(&(&kr * &c));
        let g: Vec<f64> = (0..u.len()).map(|k| m[k] * w[k] * u[k].powi(5)).collect();
        let g = DVector::from_vec(basis.restrict(&g));
        // Residual of the Nehari-scaled state t·u, t = S^{1/4}.
        let t = s.powf(0.25);
        let res = &kr * &c * t - &g * t.powi(5);
        dual = res.dot(&chol.solve(&res)).max(0.0).sqrt();
        trace.push(TraceEntry {
            j: s.powf(1.5) / 3.0,
            residual: dual,
        });
        iterations = it;
        if dual <= cfg.tol_residual {
            converged = true;
            break;
        }
        if it == cfg.max_iter {
            break;
        }
        let next = chol.solve(&g);
        let next_scale = next.dot(&(&kr * &next)).sqrt();
        let cur_scale = s.sqrt();
        // Damped update on the ray; step0 = 1 is plain inverse iteration.
        c = &c * (1.0 - step) + next * (step * cur_scale / next_scale);
    }
    let t = s.powf(0.25);
    let mut vals = basis.expand(c.as_slice());
    vals.iter_mut().for_each(|x| *x *= t);
    fix_sign(&mut vals);
    let breakdown = p.energy(&vals);
    let full = full_dual(&p, &vals);
    let rayleigh = p.form.norm_sq(&vals) / l6_sixth(&p, &vals).powf(1.0 / 3.0);
    Ok(SolveResult {
        u: ScalarField {
            grid: grid.clone(),
            values: vals,
        },
        breakdown,
        dual_residual: dual,
        iterations,
        trace,
        converged,
        rayleigh: Some(rayleigh),
        full_dual_residual: full,
        label: "critical, conformally symmetric class".into(),
    })
}

/// Dual residual against all of X, or None if the CG diagnostic does not converge.
fn full_dual(p: &Problem, u: &[f64]) -> Option<f64> {
    let rw = p.weighted_residual(u);
    let (psi, _) = p.form.solve(&rw, 1e-8, p.form.default_max_iter()).ok()?;
    Some(par::dot(&psi, &rw).max(0.0).sqrt())
}

/// Higher critical level by odd symmetry in z (k_nodes = 1); k_nodes = 0 is
/// the ground state or the critical minimizer.
pub fn excited_symmetric_state(
    a: f64,
    nl: &Nonlinearity,
    grid: &Grid2,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    let critical = nl.kind() == crate::nonlinearity::Kind::Critical;
    if cfg.k_nodes == 0 {
        return if critical {
            solve_critical(a, grid, cfg)
        } else {
            solve_ground_state(a, nl, grid, cfg)
        };
    }
    let init = initial_guess_odd(grid, cfg.seed);
    if critical {
        odd_critical(a, &init, cfg)
    } else {
        solve_ground_state_from(a, nl, &init, cfg, true)
    }
}

/// Normalized inverse iteration for the critical quotient on odd-in-z fields.
fn odd_critical(a: f64, init: &ScalarField, cfg: &SolverConfig) -> Result<SolveResult> {
    let p = Problem::new(&init.grid, a, &Nonlinearity::critical())?;
    let riesz = Riesz::new(&p)?;
    let mut u = init.clone();
    let mut trace = Vec::new();
    let mut dual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut s = 0.0;
    for it in 0..=cfg.max_iter {
        antisymmetrize(&mut u);
        check_norm(&p, &u.values)?;
        let n6 = l6_sixth(&p, &u.values);
        u.values.iter_mut().for_each(|x| *x /= n6.powf(1.0 / 6.0));
        s = p.form.norm_sq(&u.values);
        let t = s.powf(0.25);
        let scaled: Vec<f64> = u.values.iter().map(|x| t * x).collect();
        let rw = p.weighted_residual(&scaled);
        let psi = riesz.solve(&p, &rw)?;
        dual = par::dot(&psi, &rw).max(0.0).sqrt();
        trace.push(TraceEntry {
            j: s.powf(1.5) / 3.0,
            residual: dual,
        });
        iterations = it;
        if dual <= cfg.tol_residual {
            converged = true;
            break;
        }
        if it == cfg.max_iter {
            break;
        }
        let g = p.weighted_f(&u.values);
        u.values = riesz.solve(&p, &g)?;
    }
    let t = s.powf(0.25);
    u.values.iter_mut().for_each(|x| *x *= t);
    fix_sign(&mut u.values);
    let breakdown = p.energy(&u.values);
    Ok(SolveResult {
        u,
        breakdown,
        dual_residual: dual,
        iterations,
        trace,
        converged,
        rayleigh: Some(s),
        full_dual_residual: None,
        label: "odd-in-z surrogate excited state".into(),
    })
}

/// Number of knots of the discretized path, endpoints included.
pub const PATH_KNOTS: usize = 33;
/// Relative decrease of the path level below which the string is settled.
pub const PATH_REL_TOL: f64 = 1e-9;
/// Samples per path segment when locating the path maximum.
pub const PATH_SUBSAMPLES: usize = 8;

#[derive(Clone, Debug)]
pub struct MountainPass {
    /// Upper bound for the mountain-pass level: max of J along the optimized path.
    pub c_mp: f64,
    /// Path parameter in [0, 1] of the maximum.
    pub max_at: f64,
    pub knot_energies: Vec<f64>,
    /// Highest-energy knot of the final path.
    pub peak: ScalarField,
    pub ring_radius: f64,
    pub lambda: f64,
    pub endpoint_energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Path level after each sweep.
    pub history: Vec<f64>,
}

fn x_dist(p: &Problem, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    p.form.norm_sq(&d).sqrt()
}

/// Max of J over the polyline, sampling each segment.
fn path_max(p: &Problem, knots: &[Vec<f64>]) -> (f64, f64) {
    let segs = knots.len() - 1;
    let energies: Vec<f64> = knots.iter().map(|u| p.energy(u).total).collect();
    let top = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best = (top, 0.0);
    for (k, e) in energies.iter().enumerate() {
        if *e == top {
            best = (top, k as f64 / segs as f64);
            break;
        }
    }
    for s in 0..segs {
        // Segments with both ends well below the top cannot hold the maximum
        // unless the path is badly resolved; those are still scanned coarsely.
        let fine = energies[s].max(energies[s + 1]) >= 0.5 * top;
        let n = if fine { PATH_SUBSAMPLES } else { 2 };
        for q in 1..n {
            let th = q as f64 / n as f64;
            let v: Vec<f64> = knots[s].iter().zip(&knots[s + 1]).map(|(a, b)| (1.0 - th) * a + th * b).collect();
            let j = p.energy(&v).total;
            if j > best.0 {
                best = (j, (s as f64 + th) / segs as f64);
            }
        }
    }
    best
}

/// Golden-section refinement of the maximum of J on the segments next to `at`.
fn refine_max(p: &Problem, knots: &[Vec<f64>], at: f64, level: f64) -> (f64, f64) {
    let segs = knots.len() - 1;
    let centre = ((at * segs as f64).round() as usize).min(segs);
    let mut best = (level, at);
    for s in centre.saturating_sub(1)..(centre + 1).min(segs) {
        let eval = |th: f64| {
            let v: Vec<f64> = knots[s].iter().zip(&knots[s + 1]).map(|(a, b)| (1.0 - th) * a + th * b).collect();
            p.energy(&v).total
        };
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        for _ in 0..60 {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = eval(x2);
            }
        }
        let th = 0.5 * (lo + hi);
        let j = eval(th);
        if j > best.0 {
            best = (j, (s as f64 + th) / segs as f64);
        }
    }
    best
}

/// Equal X-arclength redistribution of the interior knots.
fn reparametrize(p: &Problem, knots: &mut [Vec<f64>]) {
    let m = knots.len() - 1;
    let mut s = vec![0.0; m + 1];
    for k in 1..=m {
        s[k] = s[k - 1] + x_dist(p, &knots[k], &knots[k - 1]);
    }
    let total = s[m];
    if total == 0.0 {
        return;
    }
    let old = knots.to_vec();
    let mut seg = 0;
    for k in 1..m {
        let target = total * k as f64 / m as f64;
        while seg + 1 < m && s[seg + 1] < target {
            seg += 1;
        }
        let len = s[seg + 1] - s[seg];
        let th = if len > 0.0 { (target - s[seg]) / len } else { 0.0 };
        knots[k] = old[seg].iter().zip(&old[seg + 1]).map(|(a, b)| (1.0 - th) * a + th * b).collect();
    }
}

/// First ring radius R (increasing from 3) and largest sampled λ ≤ 1 with
/// J(w_R(λ·,·)) < 0 whose support still fits in the grid.
fn negative_endpoint(p: &Problem, grid: &Grid2, u0: f64, outer: f64) -> Result<(f64, f64, ScalarField, f64)> {
    let limit = outer.min(grid.z_max);
    let mut r_big = 3.0;
    let mut any_ring = false;
    while r_big + 1.0 <= limit {
        let ring = mountain_pass_ring(u0, r_big, grid, &p.nl)?;
        if ring.holds {
            any_ring = true;
            let lambda_min = (r_big + 1.0) / outer;
            let mut lambda = 1.0;
            while lambda >= lambda_min {
                let w = ring_function(grid, u0, r_big, lambda);
                let j = p.energy(&w.values).total;
                if j < 0.0 {
                    return Ok((r_big, lambda, w, j));
                }
                lambda *= 0.95;
            }
        }
        r_big += 1.0;
    }
    Err(Error::NoNegativeEndpoint(if any_ring {
        format!("rings with R+1 <= {limit:.3} satisfy the ring inequality but J(w(lambda r, z)) stays >= 0 for every admissible lambda")
    } else {
        format!("no ring with R+1 <= {limit:.3} satisfies int F > 1/2 int |d_z w|^2 for u0={u0}")
    }))
}

/// Upper bound for the mountain-pass level from 0 to a negative-energy ring
/// endpoint, by a string method on a fixed 33-knot path: knots in the upper
/// half of the energy profile take Armijo steps along the Riesz gradient
/// component normal to the path, then all knots are redistributed at equal
/// X-arclength.
pub fn mountain_pass_level_bound(
    a: f64,
    nl: &Nonlinearity,
    grid: &Grid2,
    cfg: &SolverConfig,
    u0: f64,
) -> Result<MountainPass> {
    cfg.validate()?;
    let rep = check_assumptions(nl, None);
    if !rep.f5.holds() {
        return Err(Error::Assumption {
            assumption: "F5",
            detail: rep.f5.note().to_string(),
        });
    }
    if rep.f2_infinity.violated() {
        return Err(Error::Assumption {
            assumption: "F2",
            detail: rep.f2_infinity.note().to_string(),
        });
    }
    let p = Problem::new(grid, a, nl)?;
    let riesz = Riesz::new(&p)?;
    let outer = grid.r(grid.nr - 1);
    let (ring_radius, lambda, end, end_j) = negative_endpoint(&p, grid, u0, outer)?;
    let m = PATH_KNOTS - 1;
    let mut knots: Vec<Vec<f64>> = (0..=m)
        .map(|k| end.values.iter().map(|x| x * k as f64 / m as f64).collect())
        .collect();
    let (mut c_mp, mut max_at) = path_max(&p, &knots);
    let mut converged = false;
    let mut iterations = 0;
    let mut history = Vec::new();
    // Largest knot move per sweep, as a fraction of the mean segment length.
    let mut reach = 0.5;
    for it in 0..cfg.max_iter {
        iterations = it + 1;
        let saved = knots.clone();
        let mut worst = 0.0f64;
        let energies: Vec<f64> = knots.iter().map(|u| p.energy(u).total).collect();
        let top = energies[1..m].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let spacing: f64 = (1..=m).map(|k| x_dist(&p, &knots[k], &knots[k - 1])).sum::<f64>() / m as f64;
        for k in 1..m {
            // Knots far below the top would descend without bound off the path.
            if energies[k] < 0.5 * top {
                continue;
            }
            let tau: Vec<f64> = knots[k + 1].iter().zip(&knots[k - 1]).map(|(a, b)| a - b).collect();
            let tn = p.form.norm_sq(&tau).sqrt();
            let rw = p.weighted_residual(&knots[k]);
            let mut d = riesz.solve(&p, &rw)?;
            if tn > 0.0 {
                let proj = par::dot(&tau, &rw) / (tn * tn);
                d.iter_mut().zip(&tau).for_each(|(x, t)| *x -= proj * t);
            }
            // ⟨ψ⊥, K ψ⊥⟩ = ⟨ψ⊥, r_w⟩ because ψ⊥ differs from ψ along τ only.
            let dn2 = par::dot(&d, &rw).max(0.0);
            worst = worst.max(dn2.sqrt());
            let cap = if dn2 > 0.0 { reach * spacing / dn2.sqrt() } else { cfg.step0 };
            let mut step = cfg.step0.min(cap);
            while step >= MIN_STEP {
                let v: Vec<f64> = knots[k].iter().zip(&d).map(|(x, y)| x - step * y).collect();
                if p.energy(&v).total <= energies[k] - ARMIJO_C * step * dn2 {
                    knots[k] = v;
                    break;
                }
                step *= 0.5;
            }
        }
        reparametrize(&p, &mut knots);
        let (c_new, at) = path_max(&p, &knots);
        if c_new > c_mp {
            // The sweep raised the path level: undo it and move less.
            knots = saved;
            reach *= 0.5;
        } else {
            let change = c_mp - c_new;
            c_mp = c_new;
            max_at = at;
            reach = (reach * 1.5).min(0.5);
            if worst <= cfg.tol_residual || change <= PATH_REL_TOL * c_mp.abs() {
                converged = true;
            }
        }
        history.push(c_mp);
        if converged {
            break;
        }
        if reach < 1e-6 {
            break;
        }
    }
    let (c_mp, max_at) = refine_max(&p, &knots, max_at, c_mp);
    let knot_energies: Vec<f64> = knots.iter().map(|u| p.energy(u).total).collect();
    let top = (0..knot_energies.len())
        .max_by(|&a, &b| knot_energies[a].total_cmp(&knot_energies[b]))
        .unwrap_or(0);
    Ok(MountainPass {
        c_mp,
        peak: ScalarField {
            grid: grid.clone(),
            values: knots[top].clone(),
        },
        max_at,
        knot_energies,
        ring_radius,
        lambda,
        endpoint_energy: end_j,
        iterations,
        converged,
        history,
    })
}
