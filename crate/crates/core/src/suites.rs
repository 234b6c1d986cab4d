//! Invariant suites behind `cylvar verify`: each row is a measured defect and its budget.

use crate::conformal::{
    angle_grid, conformal_factor, group_act, hopf_s, l6_isometry_check, phi6_volume_mc, stereo, stereo_inv,
    symmetric_profile, symmetrize, symmetry_defect, GroupElement, S3_VOLUME,
};
use crate::dump::fmt_f64;
use crate::error::{Error, Result};
use crate::functionals::{energy_scalar, energy_vector};
use crate::grid::{integrate3, sample_scalar, sample_vector, Grid2, Grid3, ScalarField, VectorField3};
use crate::nonlinearity::{check_assumptions, Nonlinearity};
use crate::operators::{
    curl3, curlcurl_defect_with, decompose, div3, equivariance_defect, grad3_sq, haar_average, lift, restrict,
    x_norm_sq, CurlFn,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Conformal,
    Symmetry,
    Nonlinearity,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Identities, Suite::Conformal, Suite::Symmetry, Suite::Nonlinearity];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Conformal => "conformal",
            Suite::Symmetry => "symmetry",
            Suite::Nonlinearity => "nonlinearity",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn default_resolution(self) -> usize {
        match self {
            Suite::Identities | Suite::Symmetry => 33,
            Suite::Conformal => 97,
            Suite::Nonlinearity => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteRow {
    pub name: String,
    pub value: f64,
    pub budget: f64,
    pub pass: bool,
    pub note: String,
}

impl SuiteRow {
    /// Passes when `value ≤ budget`.
    pub fn within(name: impl Into<String>, value: f64, budget: f64) -> Self {
        SuiteRow {
            name: name.into(),
            value,
            budget,
            pass: value <= budget,
            note: String::new(),
        }
    }

    /// Passes when `value ≥ budget`.
    pub fn at_least(name: impl Into<String>, value: f64, budget: f64) -> Self {
        SuiteRow {
            pass: value >= budget,
            note: "lower bound".into(),
            ..SuiteRow::within(name, value, budget)
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub resolution: usize,
    pub rows: Vec<SuiteRow>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&SuiteRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("suite,resolution,check,value,budget,status,note\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                self.suite.name(),
                self.resolution,
                r.name,
                fmt_f64(r.value),
                fmt_f64(r.budget),
                if r.pass { "pass" } else { "fail" },
                r.note.replace(',', ";")
            ));
        }
        s
    }
}

pub fn run(suite: Suite, resolution: Option<usize>) -> Result<SuiteReport> {
    let n = resolution.unwrap_or(suite.default_resolution());
    match suite {
        Suite::Identities => identities(n),
        Suite::Conformal => conformal(n),
        Suite::Symmetry => symmetry(n),
        Suite::Nonlinearity => Ok(nonlinearity()),
    }
}

fn need_odd(n: usize, min: usize) -> Result<()> {
    if n < min || n % 2 == 0 {
        return Err(Error::GridTooSmall(format!("resolution must be odd and at least {min}, got {n}")));
    }
    Ok(())
}

/// (5π/4)√(π/2): ‖u‖² for u = r e^{−r²−z²} with a = 1.
pub fn gaussian_norm_sq() -> f64 {
    1.25 * PI * (PI / 2.0).sqrt()
}

/// u = r e^{−r²−z²} on the (n−1) × (2n−1) half-plane grid of extent 12 and its
/// lift to the n³ cube of half-width 3.5.
pub fn gaussian_pair(n: usize) -> Result<(ScalarField, VectorField3)> {
    let nr = n - 1;
    let g2 = Grid2::new(nr, 2 * nr + 1, 12.0, 12.0)?;
    let g3 = Grid3::new(n, 3.5)?;
    let u = sample_scalar(&g2, |r, z| r * (-r * r - z * z).exp())?;
    let lifted = lift(&u, &g3);
    Ok((u, lifted))
}

pub fn identities(n: usize) -> Result<SuiteReport> {
    identities_with(n, curl3)
}

/// The identity suite with an injectable curl, so a broken operator can be shown to fail it.
pub fn identities_with(n: usize, curl: CurlFn) -> Result<SuiteReport> {
    need_odd(n, 17)?;
    let (u, field) = gaussian_pair(n)?;
    let g3 = &field.grid;
    let h2 = g3.h * g3.h;
    let exact = gaussian_norm_sq();
    let rel = |v: f64| (v - exact).abs() / exact;

    let xn = x_norm_sq(&u, 1.0)?;
    let gr = integrate3(g3, &grad3_sq(&field));
    let c = curl(&field);
    let cu = integrate3(g3, &c.norm_sq());
    let nl = Nonlinearity::critical();
    let j = energy_scalar(&u, 1.0, &nl)?.total;
    let e = energy_vector(&field, &nl).total;

    let rows = vec![
        SuiteRow::within("x_norm_rel_err", rel(xn), 2.0 * h2),
        SuiteRow::within("grad_rel_err", rel(gr), 2.0 * h2),
        SuiteRow::within("curl_rel_err", rel(cu), 2.0 * h2),
        SuiteRow::within("grad_vs_curl_rel", (gr - cu).abs() / exact, 0.5 * h2),
        SuiteRow::within("div_max", div3(&field).max_abs_interior(), 0.4 * h2),
        SuiteRow::within("div_curl_max", div3(&c).max_abs_interior(), 1e-12),
        SuiteRow::within("curlcurl_defect", curlcurl_defect_with(&field, curl), 12.0 * h2),
        SuiteRow::within("energy_J_vs_E_rel", (j - e).abs() / j.abs(), 2.5 * h2),
    ];
    Ok(SuiteReport {
        suite: Suite::Identities,
        resolution: n,
        rows,
    })
}

const SPHERE_S0: f64 = 0.5;

/// Radial bump in the torus invariant s, zero for s ≤ 1/2 so all group images
/// of its support stay inside |x| ≤ 2 + √3.
pub fn sphere_bump(s: f64) -> f64 {
    if s > SPHERE_S0 {
        ((s - SPHERE_S0) / (1.0 - SPHERE_S0)).powi(3)
    } else {
        0.0
    }
}

pub fn conformal(n: usize) -> Result<SuiteReport> {
    need_odd(n, 33)?;
    let g3 = Grid3::new(n, 4.0)?;
    let g2 = Grid2::new(2 * n, 4 * n + 1, 7.2, 7.2)?;
    let mut rows = Vec::new();

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let x: [f64; 3] = std::array::from_fn(|_| scale * rng.gen_range(-1.0..1.0));
        let y = stereo(&stereo_inv(x))?;
        let e = (0..3).map(|k| (y[k] - x[k]).abs()).fold(0.0, f64::max) / (1.0 + scale);
        worst = worst.max(e);
    }
    rows.push(SuiteRow::within("stereo_round_trip", worst, 1e-12));

    let (vol, se) = phi6_volume_mc(1 << 18, 3);
    rows.push(SuiteRow::within("phi6_volume_err", (vol - S3_VOLUME).abs(), 3.0 * se).note("budget 3 sigma"));

    let (_, gauss) = gaussian_pair(n)?;
    let l6 = l6_isometry_check(&gauss, 1 << 18, 9);
    rows.push(
        SuiteRow::within("l6_pair_err", (l6.flat - l6.sphere).abs(), 3.0 * l6.sphere_stderr + 0.01 * l6.flat)
            .note("budget 3 sigma + 1%"),
    );

    let gs: Vec<GroupElement> = angle_grid(4, 4).into_iter().skip(1).collect();
    let reference = lift(&symmetric_profile(&g2, sphere_bump)?, &g3);
    let floor = symmetry_defect(&reference, &gs);
    rows.push(SuiteRow::within("noise_floor", floor, 0.05).note("defect of a symmetric field"));

    let profile = sample_scalar(&g2, |r, z| {
        let x = [r, 0.0, z];
        let xi3 = 2.0 * z / (1.0 + r * r + z * z);
        conformal_factor(x) * sphere_bump(hopf_s(x)) * (1.0 + xi3)
    })?;
    let raw = lift(&profile, &g3);
    rows.push(SuiteRow::at_least("raw_defect", symmetry_defect(&raw, &gs), 10.0 * floor).note("input is not symmetric"));
    let sym = symmetrize(&raw, 4, 4)?;
    rows.push(SuiteRow::within("symmetrize_defect", symmetry_defect(&sym, &gs), 5.0 * floor).note("budget 5x floor"));

    let nl = Nonlinearity::critical();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sampled: Vec<GroupElement> =
        (0..8).map(|_| GroupElement::new(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI))).collect();
    for (label, field) in [("raw", &raw), ("symmetrized", &sym)] {
        let e0 = energy_vector(field, &nl).total;
        let worst = sampled
            .iter()
            .map(|g| (energy_vector(&group_act(field, g), &nl).total - e0).abs() / e0.abs())
            .fold(0.0, f64::max);
        rows.push(SuiteRow::within(format!("energy_invariance_{label}"), worst, 5.0 * floor).note("8 sampled elements"));
    }
    Ok(SuiteReport {
        suite: Suite::Conformal,
        resolution: n,
        rows,
    })
}

pub fn symmetry(n: usize) -> Result<SuiteReport> {
    need_odd(n, 17)?;
    let (u, field) = gaussian_pair(n)?;
    let g3 = &field.grid;
    let h2 = g3.h * g3.h;
    let scale = field.max_abs();
    let mut rows = Vec::new();

    let back = restrict(&field, &u.grid)?;
    let inside = |r: f64, z: f64| r <= 3.0 && z.abs() <= 3.0;
    let mut rt = 0.0f64;
    for i in 0..u.grid.nr {
        for j in 0..u.grid.nz {
            if inside(u.grid.r(i), u.grid.z(j)) {
                rt = rt.max((back.get(i, j) - u.get(i, j)).abs());
            }
        }
    }
    rows.push(SuiteRow::within("restrict_round_trip", rt / u.max_abs(), 2.0 * h2));

    let generic = sample_vector(g3, |x| {
        let e = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
        [e * (1.0 + x[1]), e * (x[2] - x[0]), e * x[0] * x[1]]
    });
    let (a, b, c) = decompose(&generic);
    let mut sum_err = 0.0f64;
    let mut orth = 0.0f64;
    for m in 0..g3.len() {
        let (p, q, r, v) = (a.values[m], b.values[m], c.values[m], generic.values[m]);
        for k in 0..3 {
            sum_err = sum_err.max((p[k] + q[k] + r[k] - v[k]).abs());
        }
        let dot = |x: [f64; 3], y: [f64; 3]| (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).abs();
        orth = orth.max(dot(p, q)).max(dot(p, r)).max(dot(q, r));
    }
    rows.push(SuiteRow::within("decompose_sum", sum_err, 1e-15));
    rows.push(SuiteRow::within("decompose_orthogonality", orth, 1e-15));

    let (rho, _, zeta) = decompose(&field);
    rows.push(SuiteRow::within("lift_is_azimuthal", rho.max_abs().max(zeta.max_abs()) / scale, 1e-12));

    let m = 16;
    let lift_defect = equivariance_defect(&field, m) / scale;
    rows.push(SuiteRow::within("lift_equivariance", lift_defect, 2.0 * h2));
    for (name, part) in [("rho", &rho), ("zeta", &zeta)] {
        let d = equivariance_defect(part, m) / scale;
        rows.push(SuiteRow::within(format!("decompose_{name}_equivariance"), d, lift_defect + 2.0 * h2));
    }

    let ones = sample_vector(g3, |_| [1.0, 0.0, 0.0]);
    let mean = haar_average(&ones, m);
    let mut interior = 0.0f64;
    for idx in 0..g3.len() {
        let (i, j, k) = g3.unflatten(idx);
        if !g3.is_boundary(i, j, k) {
            interior = interior.max(mean.values[idx].iter().fold(0.0, |s, c| s.max(c.abs())));
        }
    }
    rows.push(SuiteRow::within("haar_of_constant", interior, 1e-14));
    rows.push(
        SuiteRow::at_least("constant_equivariance", equivariance_defect(&ones, m), (2.0 * PI / m as f64).sin() * (1.0 - g3.h))
            .note("non-equivariant input is detected"),
    );
    let avg = haar_average(&field, m);
    rows.push(SuiteRow::within("haar_idempotent_on_lift", interior_diff(&avg, &field) / scale, 2.0 * h2));
    rows.push(SuiteRow::within("haar_output_equivariance", equivariance_defect(&haar_average(&generic, m), m) / generic.max_abs(), 2.0 * h2));

    Ok(SuiteReport {
        suite: Suite::Symmetry,
        resolution: n,
        rows,
    })
}

fn interior_diff(a: &VectorField3, b: &VectorField3) -> f64 {
    let g = &a.grid;
    let mut d = 0.0f64;
    for idx in 0..g.len() {
        let (i, j, k) = g.unflatten(idx);
        if !g.is_boundary(i, j, k) {
            for c in 0..3 {
                d = d.max((a.values[idx][c] - b.values[idx][c]).abs());
            }
        }
    }
    d
}

/// Expected verdict of one assumption for one nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expect {
    Holds,
    Violated,
}

/// The battery with expectations: a row passes when the sampled verdict is the
/// expected one, so a correctly detected violation is not a failure.
pub fn nonlinearity_expectations() -> Vec<(Nonlinearity, Option<f64>, Vec<(&'static str, Expect)>)> {
    use Expect::*;
    let mut out = vec![(
        Nonlinearity::critical(),
        Some(6.0),
        vec![("F1", Holds), ("F2", Violated), ("F2_zero", Violated), ("F2_infinity", Violated), ("F3", Holds), ("F4", Holds), ("F5", Holds)],
    )];
    for p in [3.0, 4.0, 5.0] {
        // A pure power has f/|u|⁵ = |u|^{p−6}, which blows up at 0.
        out.push((
            Nonlinearity::power(p),
            Some(p),
            vec![("F1", Holds), ("F2_zero", Violated), ("F2_infinity", Holds), ("F3", Holds), ("F4", Holds), ("F5", Holds)],
        ));
    }
    out.push((
        Nonlinearity::power(4.0).with_weight(0.5),
        Some(4.0),
        vec![("F1", Holds), ("F2_infinity", Holds), ("F3", Holds), ("F4", Holds), ("F5", Holds)],
    ));
    out.push((Nonlinearity::log_modified(2.0), None, vec![("F1", Holds), ("F2", Holds), ("F3", Holds), ("F4", Holds), ("F5", Violated)]));
    out.push((Nonlinearity::log_modified(3.0), None, vec![("F1", Holds), ("F2", Holds), ("F3", Holds), ("F4", Holds), ("F5", Holds)]));
    out.push((Nonlinearity::zero(), None, vec![("F3", Violated), ("F5", Violated)]));
    out
}

pub fn nonlinearity() -> SuiteReport {
    let mut rows = Vec::new();
    for (nl, gamma, expected) in nonlinearity_expectations() {
        let report = check_assumptions(&nl, gamma);
        let observed = report.rows();
        for (name, want) in expected {
            let got = &observed.iter().find(|(n, _)| *n == name).expect("known assumption").1;
            let pass = match want {
                Expect::Holds => got.holds(),
                Expect::Violated => got.violated(),
            };
            rows.push(SuiteRow {
                name: format!("{}:{name}", nl.descriptor()),
                value: if pass { 0.0 } else { 1.0 },
                budget: 0.0,
                pass,
                note: format!("expected {} observed {}", if want == Expect::Holds { "holds_on_samples" } else { "violated" }, got.label()),
            });
        }
    }
    SuiteReport {
        suite: Suite::Nonlinearity,
        resolution: 0,
        rows,
    }
}
