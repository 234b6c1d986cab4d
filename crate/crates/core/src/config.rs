//! Flat `section.key = value` run configuration with `#` comments.

use crate::error::{Error, Result};
use crate::nonlinearity::{Kind, Nonlinearity};
use crate::solvers::{NormalizeMode, SolverConfig};
use std::collections::HashMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Subcritical,
    Critical,
    MountainPass,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Subcritical => "subcritical",
            Mode::Critical => "critical",
            Mode::MountainPass => "mountain_pass",
        }
    }

    fn parse(s: &str) -> Option<Mode> {
        match s {
            "subcritical" => Some(Mode::Subcritical),
            "critical" => Some(Mode::Critical),
            "mountain_pass" => Some(Mode::MountainPass),
            _ => None,
        }
    }
}

/// Smallest accepted value of nr, nz and n3.
pub const MIN_GRID: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub a: f64,
    pub mode: Mode,
    /// Plateau value of the ring endpoint in mountain-pass mode.
    pub u0: f64,
    pub kind: Kind,
    pub p: f64,
    pub eps_weight: f64,
    pub one_sided: bool,
    pub nr: usize,
    pub nz: usize,
    pub rmax: f64,
    pub zmax: f64,
    pub n3: usize,
    pub l3: f64,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            a: 1.0,
            mode: Mode::Subcritical,
            u0: 1.0,
            kind: Kind::Power,
            p: 4.0,
            eps_weight: 0.0,
            one_sided: false,
            nr: 64,
            nz: 129,
            rmax: 8.0,
            zmax: 8.0,
            n3: 33,
            l3: 4.0,
            solver: SolverConfig::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Keys in echo order.
pub const KEYS: &[&str] = &[
    "problem.a",
    "problem.mode",
    "problem.u0",
    "nonlinearity.kind",
    "nonlinearity.p",
    "nonlinearity.eps_weight",
    "nonlinearity.one_sided",
    "grid.nr",
    "grid.nz",
    "grid.rmax",
    "grid.zmax",
    "grid.n3",
    "grid.L3",
    "solver.max_iter",
    "solver.tol",
    "solver.step0",
    "solver.seed",
    "solver.normalize_mode",
    "solver.positivity",
    "solver.k_nodes",
    "output.dir",
];

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Config { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| bad(line, format!("{key}: cannot parse '{v}'")))
}

fn boolean(key: &str, v: &str, line: usize) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(line, format!("{key}: expected true or false, got '{v}'"))),
    }
}

impl Config {
    pub fn from_path(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// Parses and validates; errors carry the 1-based line of the offending key
    /// (0 when a default value is at fault).
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut lines: HashMap<&'static str, usize> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected 'section.key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let known = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| bad(line, format!("unknown key '{key}'")))?;
            if let Some(prev) = lines.insert(known, line) {
                return Err(bad(line, format!("duplicate key '{key}' (first set on line {prev})")));
            }
            cfg.set(key, value, line)?;
        }
        cfg.validate_with(|k| lines.get(k).copied().unwrap_or(0))?;
        Ok(cfg)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, v: &str, line: usize) -> Result<()> {
        match key {
            "problem.a" => self.a = num(key, v, line)?,
            "problem.mode" => {
                self.mode = Mode::parse(v)
                    .ok_or_else(|| bad(line, format!("problem.mode must be subcritical, critical or mountain_pass, got '{v}'")))?
            }
            "problem.u0" => self.u0 = num(key, v, line)?,
            "nonlinearity.kind" => {
                self.kind = Kind::parse(v)
                    .ok_or_else(|| bad(line, format!("nonlinearity.kind must be power, critical, log_modified or zero, got '{v}'")))?
            }
            "nonlinearity.p" => self.p = num(key, v, line)?,
            "nonlinearity.eps_weight" => self.eps_weight = num(key, v, line)?,
            "nonlinearity.one_sided" => self.one_sided = boolean(key, v, line)?,
            "grid.nr" => self.nr = num(key, v, line)?,
            "grid.nz" => self.nz = num(key, v, line)?,
            "grid.rmax" => self.rmax = num(key, v, line)?,
            "grid.zmax" => self.zmax = num(key, v, line)?,
            "grid.n3" => self.n3 = num(key, v, line)?,
            "grid.L3" => self.l3 = num(key, v, line)?,
            "solver.max_iter" => self.solver.max_iter = num(key, v, line)?,
            "solver.tol" => self.solver.tol_residual = num(key, v, line)?,
            "solver.step0" => self.solver.step0 = num(key, v, line)?,
            "solver.seed" => self.solver.seed = num(key, v, line)?,
            "solver.normalize_mode" => {
                self.solver.normalize_mode = match v {
                    "nehari" => NormalizeMode::Nehari,
                    "l6_sphere" => NormalizeMode::L6Sphere,
                    _ => return Err(bad(line, format!("solver.normalize_mode must be nehari or l6_sphere, got '{v}'"))),
                }
            }
            "solver.positivity" => self.solver.positivity = boolean(key, v, line)?,
            "solver.k_nodes" => self.solver.k_nodes = num(key, v, line)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(bad(line, format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(|_| 0)
    }

    fn validate_with<F: Fn(&str) -> usize>(&self, at: F) -> Result<()> {
        let fail = |key: &str, msg: String| Err(bad(at(key), msg));
        if !(self.a > 0.0 && self.a.is_finite()) {
            return fail("problem.a", format!("a>0 required for K=2 (got a={})", self.a));
        }
        if !self.u0.is_finite() {
            return fail("problem.u0", format!("u0 must be finite, got {}", self.u0));
        }
        match self.kind {
            Kind::Power if !(self.p > 2.0 && self.p < 6.0) => {
                return fail("nonlinearity.p", format!("power kind needs 2<p<6, got {}", self.p))
            }
            Kind::LogModified if !(2.0..6.0).contains(&self.p) => {
                return fail("nonlinearity.p", format!("log_modified kind needs 2<=p<6, got {}", self.p))
            }
            _ => {}
        }
        if !(0.0..=0.5).contains(&self.eps_weight) {
            return fail("nonlinearity.eps_weight", format!("eps_weight must lie in [0, 0.5], got {}", self.eps_weight));
        }
        for (key, n) in [("grid.nr", self.nr), ("grid.nz", self.nz), ("grid.n3", self.n3)] {
            if n < MIN_GRID {
                return fail(key, format!("{key} must be at least {MIN_GRID}, got {n}"));
            }
        }
        for (key, x) in [("grid.rmax", self.rmax), ("grid.zmax", self.zmax), ("grid.L3", self.l3)] {
            if !(x > 0.0 && x.is_finite()) {
                return fail(key, format!("{key} must be positive, got {x}"));
            }
        }
        let s = &self.solver;
        if s.max_iter < 1 {
            return fail("solver.max_iter", "solver.max_iter must be at least 1".into());
        }
        if !(s.tol_residual > 0.0) {
            return fail("solver.tol", format!("solver.tol must be positive, got {}", s.tol_residual));
        }
        if !(s.step0 > 0.0 && s.step0.is_finite()) {
            return fail("solver.step0", format!("solver.step0 must be positive, got {}", s.step0));
        }
        if s.k_nodes > 1 {
            return fail("solver.k_nodes", format!("solver.k_nodes must be 0 or 1, got {}", s.k_nodes));
        }
        match (self.mode, self.kind) {
            (Mode::Critical, k) if k != Kind::Critical => {
                fail("nonlinearity.kind", "problem.mode = critical needs nonlinearity.kind = critical".into())
            }
            (Mode::Subcritical, Kind::Critical) => {
                fail("problem.mode", "critical kind needs problem.mode = critical".into())
            }
            (Mode::Subcritical, Kind::Zero) => {
                fail("nonlinearity.kind", "zero kind has no nontrivial ground state".into())
            }
            _ => Ok(()),
        }
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        let mut nl = Nonlinearity::from_kind(self.kind, self.p);
        if self.eps_weight > 0.0 {
            nl = nl.with_weight(self.eps_weight);
        }
        if self.one_sided {
            nl = nl.one_sided();
        }
        nl
    }

    pub fn get(&self, key: &str) -> Option<String> {
        let s = &self.solver;
        Some(match key {
            "problem.a" => self.a.to_string(),
            "problem.mode" => self.mode.name().to_string(),
            "problem.u0" => self.u0.to_string(),
            "nonlinearity.kind" => self.kind.name().to_string(),
            "nonlinearity.p" => self.p.to_string(),
            "nonlinearity.eps_weight" => self.eps_weight.to_string(),
            "nonlinearity.one_sided" => self.one_sided.to_string(),
            "grid.nr" => self.nr.to_string(),
            "grid.nz" => self.nz.to_string(),
            "grid.rmax" => self.rmax.to_string(),
            "grid.zmax" => self.zmax.to_string(),
            "grid.n3" => self.n3.to_string(),
            "grid.L3" => self.l3.to_string(),
            "solver.max_iter" => s.max_iter.to_string(),
            "solver.tol" => s.tol_residual.to_string(),
            "solver.step0" => s.step0.to_string(),
            "solver.seed" => s.seed.to_string(),
            "solver.normalize_mode" => match s.normalize_mode {
                NormalizeMode::Nehari => "nehari".to_string(),
                NormalizeMode::L6Sphere => "l6_sphere".to_string(),
            },
            "solver.positivity" => s.positivity.to_string(),
            "solver.k_nodes" => s.k_nodes.to_string(),
            "output.dir" => self.out_dir.display().to_string(),
            _ => return None,
        })
    }

    /// Every key with its effective value, in `KEYS` order.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|k| (*k, self.get(k).unwrap_or_default())).collect()
    }

    /// Config text that parses back to `self`.
    pub fn to_text(&self) -> String {
        self.echo().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
