//! `solve` and `sweep` pipelines: config in, field dumps and manifests out.

use crate::config::{Config, Mode};
use crate::dump::{fmt_f64, write_atomic, write_scalar, write_vector};
use crate::error::{Error, Result};
use crate::functionals::{energy_vector, gradient_scalar};
use crate::grid::{integrate3, Grid2, Grid3, ScalarField};
use crate::manifest::{self, num, opt, Obj, FORMAT_VERSION};
use crate::operators::{curl3, curlcurl_minus_laplacian_defect, div3, grad3_sq, lift, x_norm_sq};
use crate::par;
use crate::solvers::{excited_symmetric_state, mountain_pass_level_bound, solve_critical, solve_ground_state, MountainPass};
use rayon::prelude::*;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FIELD_FILE: &str = "field.csv";
pub const LIFT_FILE: &str = "lift.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub manifest: Value,
    pub converged: bool,
    pub j: f64,
    pub rayleigh: Option<f64>,
    pub dual_residual: f64,
    pub wall_time: f64,
}

struct Solved {
    u: ScalarField,
    quad: f64,
    nonlinear: f64,
    dual_residual: f64,
    full_dual_residual: Option<f64>,
    rayleigh: Option<f64>,
    converged: bool,
    iterations: usize,
    label: String,
    mountain_pass: Option<MountainPass>,
}

fn compute(cfg: &Config, grid: &Grid2) -> Result<Solved> {
    let nl = cfg.nonlinearity();
    let s = &cfg.solver;
    let res = match cfg.mode {
        Mode::MountainPass => {
            let mp = mountain_pass_level_bound(cfg.a, &nl, grid, s, cfg.u0)?;
            let b = crate::functionals::energy_scalar(&mp.peak, cfg.a, &nl)?;
            let g = gradient_scalar(&mp.peak, cfg.a, &nl)?;
            return Ok(Solved {
                u: mp.peak.clone(),
                quad: b.quad,
                nonlinear: b.nonlinear,
                dual_residual: g.dual_norm,
                full_dual_residual: None,
                rayleigh: None,
                converged: mp.converged,
                iterations: mp.iterations,
                label: "mountain_pass_peak".into(),
                mountain_pass: Some(mp),
            });
        }
        Mode::Critical if s.k_nodes == 0 => solve_critical(cfg.a, grid, s)?,
        _ if s.k_nodes > 0 => excited_symmetric_state(cfg.a, &nl, grid, s)?,
        _ => solve_ground_state(cfg.a, &nl, grid, s)?,
    };
    Ok(Solved {
        quad: res.breakdown.quad,
        nonlinear: res.breakdown.nonlinear,
        dual_residual: res.dual_residual,
        full_dual_residual: res.full_dual_residual,
        rayleigh: res.rayleigh,
        converged: res.converged,
        iterations: res.iterations,
        label: res.label,
        u: res.u,
        mountain_pass: None,
    })
}

/// Runs the configured problem and writes the scalar dump, its lift and the manifest into `out`.
pub fn solve(cfg: &Config, out: &Path) -> Result<SolveOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = Grid2::new(cfg.nr, cfg.nz, cfg.rmax, cfg.zmax)?;
    let grid3 = Grid3::new(cfg.n3, cfg.l3)?;
    let nl = cfg.nonlinearity();
    let s = compute(cfg, &grid)?;

    let field = lift(&s.u, &grid3);
    let e = energy_vector(&field, &nl);
    let j = s.quad - s.nonlinear;
    let identities = vec![
        Obj::new().put("name", "x_norm_sq").float("value", x_norm_sq(&s.u, cfg.a)?).build(),
        Obj::new().put("name", "grad_sq").float("value", integrate3(&grid3, &grad3_sq(&field))).build(),
        Obj::new().put("name", "curl_sq").float("value", integrate3(&grid3, &curl3(&field).norm_sq())).build(),
        Obj::new().put("name", "div_max").float("value", div3(&field).max_abs_interior()).build(),
        Obj::new()
            .put("name", "curlcurl_defect")
            .float("value", curlcurl_minus_laplacian_defect(&field))
            .build(),
        Obj::new().put("name", "energy_J_vs_E_rel").float("value", (j - e.total).abs() / j.abs()).build(),
    ];

    std::fs::create_dir_all(out)?;
    write_scalar(&out.join(FIELD_FILE), &s.u)?;
    write_vector(&out.join(LIFT_FILE), &field)?;
    let wall_time = start.elapsed().as_secs_f64();

    let echo = cfg.echo().into_iter().fold(Obj::new(), |o, (k, v)| o.put(k, v)).build();
    let mp = s.mountain_pass.as_ref().map(|mp| {
        Obj::new()
            .float("c_mp", mp.c_mp)
            .float("max_at", mp.max_at)
            .float("ring_radius", mp.ring_radius)
            .float("lambda", mp.lambda)
            .float("endpoint_energy", mp.endpoint_energy)
            .put("iterations", mp.iterations)
            .put("converged", mp.converged)
            .put("knot_energies", mp.knot_energies.iter().map(|&x| num(x)).collect::<Vec<_>>())
            .build()
    });
    let m = Obj::new()
        .put("format_version", FORMAT_VERSION)
        .put("mode", cfg.mode.name())
        .put("config", echo)
        .put(
            "grid",
            Obj::new()
                .put(
                    "scalar",
                    Obj::new()
                        .put("nr", grid.nr)
                        .put("nz", grid.nz)
                        .float("rmax", grid.r_max)
                        .float("zmax", grid.z_max)
                        .build(),
                )
                .put("vector", Obj::new().put("n", grid3.n).float("L", grid3.half_width).build())
                .build(),
        )
        .put(
            "nonlinearity",
            Obj::new()
                .put("descriptor", nl.descriptor())
                .put("kind", nl.kind().name())
                .float("p", nl.p())
                .float("eps_weight", nl.eps_weight())
                .put("one_sided", nl.is_one_sided())
                .build(),
        )
        .put(
            "energies",
            Obj::new()
                .float("J", j)
                .float("quad", s.quad)
                .float("nonlinear", s.nonlinear)
                .float("E", e.total)
                .float("E_quad", e.quad)
                .float("E_nonlinear", e.nonlinear)
                .build(),
        )
        .float("dual_residual", s.dual_residual)
        .put("full_dual_residual", opt(s.full_dual_residual))
        .put("rayleigh", opt(s.rayleigh))
        .put("converged", s.converged)
        .put("iterations", s.iterations)
        .put("label", s.label.clone())
        .put("mountain_pass", mp.unwrap_or(Value::Null))
        .put("identity_defects", identities)
        .put("seed", cfg.solver.seed)
        .put("wall_time", if par::deterministic() { Value::Null } else { num(wall_time) })
        .put("files", vec![FIELD_FILE, LIFT_FILE])
        .build();
    manifest::write(&out.join(MANIFEST_FILE), &m)?;
    Ok(SolveOutput {
        manifest: m,
        converged: s.converged,
        j,
        rayleigh: s.rayleigh,
        dual_residual: s.dual_residual,
        wall_time,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    A,
    P,
    /// nr, with nz = 2 nr + 1.
    Resolution,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::P => "p",
            SweepParam::Resolution => "resolution",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a" => Some(SweepParam::A),
            "p" => Some(SweepParam::P),
            "resolution" => Some(SweepParam::Resolution),
            _ => None,
        }
    }

    /// `base` with the swept value applied, validated.
    pub fn apply(self, base: &Config, v: f64) -> Result<Config> {
        let mut cfg = base.clone();
        match self {
            SweepParam::A => cfg.a = v,
            SweepParam::P => cfg.p = v,
            SweepParam::Resolution => {
                if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e6) {
                    return Err(Error::InvalidArgument(format!("resolution must be a positive integer, got {v}")));
                }
                cfg.nr = v as usize;
                cfg.nz = 2 * cfg.nr + 1;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug)]
pub struct SweepRow {
    pub value: f64,
    pub dir: PathBuf,
    /// `Err` carries the failure message of that value's solve.
    pub outcome: std::result::Result<SolveOutput, String>,
    /// Second-order extrapolated error of J against the previous value (resolution sweeps).
    pub richardson_err: Option<f64>,
}

impl SweepRow {
    pub fn ok(&self) -> bool {
        matches!(&self.outcome, Ok(o) if o.converged)
    }

    pub fn status(&self) -> &'static str {
        match &self.outcome {
            Ok(o) if o.converged => "ok",
            Ok(_) => "unconverged",
            Err(_) => "failed",
        }
    }
}

/// One solve per value into `out/<param>_<index>`, in parallel across values,
/// plus the aggregate `out/sweep.csv`. Every value is validated before any solve.
pub fn sweep(base: &Config, param: SweepParam, values: &[f64], out: &Path) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    let cfgs: Vec<Config> = values.iter().map(|&v| param.apply(base, v)).collect::<Result<_>>()?;
    std::fs::create_dir_all(out)?;
    let mut rows: Vec<SweepRow> = cfgs
        .par_iter()
        .zip(values.par_iter())
        .enumerate()
        .map(|(k, (cfg, &v))| {
            let dir = out.join(format!("{}_{k}", param.name()));
            SweepRow {
                value: v,
                outcome: solve(cfg, &dir).map_err(|e| e.to_string()),
                dir,
                richardson_err: None,
            }
        })
        .collect();
    if param == SweepParam::Resolution {
        for k in 1..rows.len() {
            if let (Ok(prev), Ok(cur)) = (&rows[k - 1].outcome, &rows[k].outcome) {
                let ratio = rows[k].value / rows[k - 1].value;
                if ratio > 1.0 {
                    rows[k].richardson_err = Some((cur.j - prev.j).abs() / (ratio * ratio - 1.0));
                }
            }
        }
    }
    write_atomic(&out.join(SWEEP_FILE), &sweep_csv(param, &rows))?;
    Ok(rows)
}

pub fn sweep_csv(param: SweepParam, rows: &[SweepRow]) -> String {
    let f = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let mut s = format!("{},J,rayleigh,residual,walltime,status,richardson_err\n", param.name());
    for r in rows {
        let (j, ray, res, wall) = match &r.outcome {
            Ok(o) => (Some(o.j), o.rayleigh, Some(o.dual_residual), Some(o.wall_time)),
            Err(_) => (None, None, None, None),
        };
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.value),
            f(j),
            f(ray),
            f(res),
            f(wall),
            r.status(),
            f(r.richardson_err)
        ));
    }
    s
}
