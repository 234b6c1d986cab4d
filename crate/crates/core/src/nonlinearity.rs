//! Nonlinearities f(x,u), primitives F, the radial extension h and the F1–F5 battery.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Power,
    Critical,
    LogModified,
    Zero,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Power => "power",
            Kind::Critical => "critical",
            Kind::LogModified => "log_modified",
            Kind::Zero => "zero",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "power" => Some(Kind::Power),
            "critical" => Some(Kind::Critical),
            "log_modified" => Some(Kind::LogModified),
            "zero" => Some(Kind::Zero),
            _ => None,
        }
    }
}

/// Tagged nonlinearity with optional weight Γ(z) = 1 + ε sin²(πz).
#[derive(Clone)]
pub struct Nonlinearity {
    kind: Kind,
    p: f64,
    eps_weight: f64,
    one_sided: bool,
    table: Option<Arc<LogTable>>,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nonlinearity({})", self.descriptor())
    }
}

impl Nonlinearity {
    /// Γ|u|^{p−2}u, 2 < p < 6.
    pub fn power(p: f64) -> Self {
        assert!(p > 2.0 && p < 6.0, "power kind needs 2 < p < 6, got {p}");
        Nonlinearity {
            kind: Kind::Power,
            p,
            eps_weight: 0.0,
            one_sided: false,
            table: None,
        }
    }

    /// |u|⁴u.
    pub fn critical() -> Self {
        Nonlinearity {
            kind: Kind::Critical,
            p: 6.0,
            eps_weight: 0.0,
            one_sided: false,
            table: None,
        }
    }

    /// |u|^{p−2}u ln(1+|u|) for |u| ≥ 1 and ln2 |u|⁴u/(1 − ln|u|) below, 2 ≤ p < 6.
    pub fn log_modified(p: f64) -> Self {
        assert!((2.0..6.0).contains(&p), "log_modified kind needs 2 <= p < 6, got {p}");
        Nonlinearity {
            kind: Kind::LogModified,
            p,
            eps_weight: 0.0,
            one_sided: false,
            table: Some(Arc::new(LogTable::build(p))),
        }
    }

    pub fn zero() -> Self {
        Nonlinearity {
            kind: Kind::Zero,
            p: 2.0,
            eps_weight: 0.0,
            one_sided: false,
            table: None,
        }
    }

    /// Builds a kind from its name; `p` is ignored for `critical` and `zero`.
    pub fn from_kind(kind: Kind, p: f64) -> Self {
        match kind {
            Kind::Power => Self::power(p),
            Kind::Critical => Self::critical(),
            Kind::LogModified => Self::log_modified(p),
            Kind::Zero => Self::zero(),
        }
    }

    pub fn with_weight(mut self, eps: f64) -> Self {
        assert!((0.0..=0.5).contains(&eps), "weight amplitude must lie in [0, 1/2], got {eps}");
        self.eps_weight = eps;
        self
    }

    /// f·χ_{[0,∞)}: the nonlinearity switched off for u < 0.
    pub fn one_sided(mut self) -> Self {
        self.one_sided = true;
        self
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn eps_weight(&self) -> f64 {
        self.eps_weight
    }

    pub fn is_one_sided(&self) -> bool {
        self.one_sided
    }

    /// True for the pure powers, whose fiber root has a closed form.
    pub fn homogeneous_exponent(&self) -> Option<f64> {
        match self.kind {
            Kind::Power | Kind::Critical if !self.one_sided => Some(self.p),
            _ => None,
        }
    }

    pub fn descriptor(&self) -> String {
        let mut s = match self.kind {
            Kind::Power | Kind::LogModified => format!("{}(p={})", self.kind.name(), self.p),
            _ => self.kind.name().to_string(),
        };
        if self.eps_weight != 0.0 {
            s.push_str(&format!(" weight=1+{}*sin^2(pi z)", self.eps_weight));
        }
        if self.one_sided {
            s.push_str(" one_sided");
        }
        s
    }

    #[inline]
    pub fn weight(&self, z: f64) -> f64 {
        if self.eps_weight == 0.0 {
            1.0
        } else {
            let s = (PI * z).sin();
            1.0 + self.eps_weight * s * s
        }
    }

    /// Unweighted f₀(u).
    #[inline]
    pub fn f0(&self, u: f64) -> f64 {
        if self.one_sided && u < 0.0 {
            return 0.0;
        }
        let a = u.abs();
        match self.kind {
            Kind::Zero => 0.0,
            Kind::Critical => {
                let a2 = a * a;
                a2 * a2 * u
            }
            Kind::Power => {
                if a == 0.0 {
                    0.0
                } else if self.p == 4.0 {
                    a * a * u
                } else {
                    a.powf(self.p - 2.0) * u
                }
            }
            Kind::LogModified => log_f(self.p, u),
        }
    }

    /// Unweighted primitive F₀(u) = ∫₀^u f₀.
    #[inline]
    pub fn big_f0(&self, u: f64) -> f64 {
        if self.one_sided && u < 0.0 {
            return 0.0;
        }
        let a = u.abs();
        match self.kind {
            Kind::Zero => 0.0,
            Kind::Critical => {
                let a2 = a * a;
                a2 * a2 * a2 / 6.0
            }
            Kind::Power => {
                if self.p == 4.0 {
                    let a2 = a * a;
                    a2 * a2 / 4.0
                } else {
                    a.powf(self.p) / self.p
                }
            }
            Kind::LogModified => self.table.as_ref().expect("log table").primitive(a),
        }
    }

    #[inline]
    pub fn f(&self, _r: f64, z: f64, u: f64) -> f64 {
        self.weight(z) * self.f0(u)
    }

    #[inline]
    pub fn big_f(&self, _r: f64, z: f64, u: f64) -> f64 {
        self.weight(z) * self.big_f0(u)
    }

    /// h(x, U) = f(x, |U|) U/|U|, h(x, 0) = 0.
    pub fn h(&self, x: [f64; 3], v: [f64; 3]) -> [f64; 3] {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 {
            return [0.0; 3];
        }
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let s = self.f(rho, x[2], n) / n;
        [s * v[0], s * v[1], s * v[2]]
    }

    /// H(x, U) = F(x, |U|).
    pub fn big_h(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
        self.big_f(rho, x[2], n)
    }
}

#[inline]
fn log_f(p: f64, u: f64) -> f64 {
    let a = u.abs();
    if a == 0.0 {
        0.0
    } else if a >= 1.0 {
        a.powf(p - 2.0) * u * a.ln_1p()
    } else {
        let a2 = a * a;
        LN_2 * a2 * a2 * u / (1.0 - a.ln())
    }
}

/// d f/du on u ≥ 1.
#[inline]
fn log_df(p: f64, a: f64) -> f64 {
    (p - 1.0) * a.powf(p - 2.0) * a.ln_1p() + a.powf(p - 1.0) / (1.0 + a)
}

/// e^x E₁(x) for x ≥ 1 by the continued fraction (modified Lentz).
pub fn scaled_exp_integral(x: f64) -> f64 {
    assert!(x >= 1.0, "continued fraction used only for x >= 1");
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

const GL5_X: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Primitive of the log-modified nonlinearity.
///
/// For 0 < u ≤ 1 the primitive is ln2·e⁶·E₁(6(1 − ln u)) = ln2·u⁶·e^xE₁(x),
/// x = 6(1 − ln u). For u ≥ 1 a table over s = ln u with spacing 2⁻¹⁰ stores
/// F; values in between come from quintic Hermite interpolation in u using
/// the exact f and f'. Past the table the integral is continued by Gauss–Legendre panels.
struct LogTable {
    p: f64,
    big: Vec<f64>,
}

const LOG_TABLE_STEP: f64 = 1.0 / 1024.0;
const LOG_TABLE_SMAX: f64 = 21.0;

impl LogTable {
    fn build(p: f64) -> Self {
        let f_one = LN_2 * scaled_exp_integral(6.0);
        let n = (LOG_TABLE_SMAX / LOG_TABLE_STEP).round() as usize;
        let mut big = Vec::with_capacity(n + 1);
        big.push(f_one);
        let mut acc = f_one;
        let mut comp = 0.0;
        for k in 0..n {
            let s0 = k as f64 * LOG_TABLE_STEP;
            let inc = Self::panel(p, s0, s0 + LOG_TABLE_STEP);
            // Neumaier summation keeps the running primitive accurate.
            let t = acc + inc;
            if acc.abs() >= inc.abs() {
                comp += (acc - t) + inc;
            } else {
                comp += (inc - t) + acc;
            }
            acc = t;
            big.push(acc + comp);
        }
        LogTable { p, big }
    }

    /// ∫ over s in [s0, s1] of e^{ps} ln(1 + e^s) ds, i.e. ∫ t^{p−1} ln(1+t) dt.
    fn panel(p: f64, s0: f64, s1: f64) -> f64 {
        let m = 0.5 * (s0 + s1);
        let hw = 0.5 * (s1 - s0);
        let mut acc = 0.0;
        for (x, w) in GL5_X.iter().zip(GL5_W.iter()) {
            let s = m + hw * x;
            acc += w * (p * s).exp() * s.exp().ln_1p();
        }
        acc * hw
    }

    fn primitive(&self, a: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        if a <= 1.0 {
            let x = 6.0 * (1.0 - a.ln());
            let a2 = a * a;
            return LN_2 * a2 * a2 * a2 * scaled_exp_integral(x);
        }
        let s = a.ln();
        let last = self.big.len() - 1;
        if s >= last as f64 * LOG_TABLE_STEP {
            let s_end = last as f64 * LOG_TABLE_STEP;
            let panels = ((s - s_end) / LOG_TABLE_STEP).ceil().max(1.0) as usize;
            let hs = (s - s_end) / panels as f64;
            let mut acc = self.big[last];
            for k in 0..panels {
                let lo = s_end + k as f64 * hs;
                acc += Self::panel(self.p, lo, lo + hs);
            }
            return acc;
        }
        let k = ((s / LOG_TABLE_STEP).floor() as usize).min(last - 1);
        let u0 = (k as f64 * LOG_TABLE_STEP).exp();
        let u1 = ((k + 1) as f64 * LOG_TABLE_STEP).exp();
        let (f0, f1) = (log_f(self.p, u0), log_f(self.p, u1));
        let (d0, d1) = (log_df(self.p, u0), log_df(self.p, u1));
        let hs = u1 - u0;
        let t = ((a - u0) / hs).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        // Quintic Hermite basis matching value, first and second derivative.
        let b0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let b1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let b2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let c0 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let c1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let c2 = 0.5 * (t3 - 2.0 * t4 + t5);
        b0 * self.big[k]
            + hs * (b1 * f0 + c1 * f1)
            + hs * hs * (b2 * d0 + c2 * d1)
            + c0 * self.big[k + 1]
    }

}

/// Outcome of one sampled assumption check.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    HoldsOnSamples { note: String },
    Violated { witness: Witness, note: String },
    Inconclusive { note: String },
    NotApplicable { note: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnSamples { .. })
    }

    pub fn violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::HoldsOnSamples { .. } => "holds_on_samples",
            Verdict::Violated { .. } => "violated",
            Verdict::Inconclusive { .. } => "inconclusive",
            Verdict::NotApplicable { .. } => "not_applicable",
        }
    }

    pub fn note(&self) -> &str {
        match self {
            Verdict::HoldsOnSamples { note }
            | Verdict::Violated { note, .. }
            | Verdict::Inconclusive { note }
            | Verdict::NotApplicable { note } => note,
        }
    }
}

/// Concrete sample at which an assumption fails: (z, u) and the offending value.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub z: f64,
    pub u: f64,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct AssumptionReport {
    pub f1: Verdict,
    /// Decay of f/|u|⁵ as u → 0.
    pub f2_zero: Verdict,
    /// Decay of f/|u|⁵ as |u| → ∞.
    pub f2_infinity: Verdict,
    pub f3: Verdict,
    pub f4: Verdict,
    pub f5: Verdict,
    /// Estimated sup of admissible γ in F5 (inf of f u / F with trend extrapolation).
    pub gamma_estimate: Option<f64>,
    pub ladder: Vec<f64>,
}

impl AssumptionReport {
    /// F2 as stated: both limits must vanish.
    pub fn f2(&self) -> Verdict {
        combine(&self.f2_zero, &self.f2_infinity)
    }

    pub fn rows(&self) -> Vec<(&'static str, Verdict)> {
        vec![
            ("F1", self.f1.clone()),
            ("F2", self.f2()),
            ("F2_zero", self.f2_zero.clone()),
            ("F2_infinity", self.f2_infinity.clone()),
            ("F3", self.f3.clone()),
            ("F4", self.f4.clone()),
            ("F5", self.f5.clone()),
        ]
    }
}

fn combine(a: &Verdict, b: &Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Violated { .. }, _) => a.clone(),
        (_, Verdict::Violated { .. }) => b.clone(),
        (Verdict::Inconclusive { .. }, _) => a.clone(),
        (_, Verdict::Inconclusive { .. }) => b.clone(),
        (Verdict::HoldsOnSamples { note: n1 }, Verdict::HoldsOnSamples { note: n2 }) => {
            Verdict::HoldsOnSamples {
                note: format!("{n1}; {n2}"),
            }
        }
        _ => a.clone(),
    }
}

fn fmt_list(q: &[f64]) -> String {
    let parts: Vec<String> = q.iter().map(|v| format!("{v:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Ladder exponents k = −8..8 for u = ±10^k.
pub const LADDER_MIN: i32 = -8;
pub const LADDER_MAX: i32 = 8;
/// Decay threshold for F2 over the last four rungs.
pub const F2_DECAY: f64 = 0.9;
/// Margin above 2 required of the F5 exponent estimate.
pub const F5_MARGIN: f64 = 0.05;

const Z_SAMPLES: [f64; 3] = [0.0, 0.25, 0.5];

/// Runs the sampled F1–F5 battery. With `gamma` given, F5 is checked for that
/// exponent; otherwise the best exponent is estimated from the ladder.
pub fn check_assumptions(nl: &Nonlinearity, gamma: Option<f64>) -> AssumptionReport {
    let ladder: Vec<f64> = (LADDER_MIN..=LADDER_MAX).map(|k| 10f64.powi(k)).collect();
    AssumptionReport {
        f1: check_f1(nl),
        f2_zero: check_f2(nl, &ladder, false),
        f2_infinity: check_f2(nl, &ladder, true),
        f3: check_f3(nl, &ladder),
        f4: check_f4(nl),
        f5: check_f5(nl, &ladder, gamma).0,
        gamma_estimate: check_f5(nl, &ladder, gamma).1,
        ladder,
    }
}

fn check_f1(nl: &Nonlinearity) -> Verdict {
    for &z in &Z_SAMPLES {
        for k in 0..=40 {
            let zz = z + 0.173 * k as f64;
            let w0 = nl.weight(zz);
            let w1 = nl.weight(zz + 1.0);
            if (w0 - w1).abs() > 1e-14 * w0 {
                return Verdict::Violated {
                    witness: Witness { z: zz, u: 1.0, value: w1 - w0 },
                    note: "weight not 1-periodic in z".into(),
                };
            }
        }
    }
    if nl.kind == Kind::LogModified {
        let below = log_f(nl.p, 1.0 - 1e-12);
        let above = log_f(nl.p, 1.0);
        if (below - above).abs() > 1e-10 {
            return Verdict::Violated {
                witness: Witness { z: 0.0, u: 1.0, value: above - below },
                note: "discontinuity at the |u| = 1 seam".into(),
            };
        }
    }
    Verdict::HoldsOnSamples {
        note: "continuous in u (seam checked), weight depends on z only and is 1-periodic on samples".into(),
    }
}

/// Ratios g(z, u) over the last four rungs towards the chosen end, both signs.
fn end_rungs(ladder: &[f64], infinity: bool) -> Vec<f64> {
    let n = ladder.len();
    if infinity {
        ladder[n - 4..].to_vec()
    } else {
        let mut v = ladder[..4].to_vec();
        v.reverse();
        v
    }
}

fn check_f2(nl: &Nonlinearity, ladder: &[f64], infinity: bool) -> Verdict {
    let where_ = if infinity { "|u|→∞" } else { "u→0" };
    let rungs = end_rungs(ladder, infinity);
    let mut inconclusive = None;
    for &z in &Z_SAMPLES {
        for sign in [1.0, -1.0] {
            let q: Vec<f64> = rungs
                .iter()
                .map(|&a| (nl.f(0.0, z, sign * a) / a.powi(5)).abs())
                .collect();
            if q.iter().all(|&v| v == 0.0) {
                continue;
            }
            let decreasing = q.windows(2).all(|w| w[1] < w[0]);
            if q[3] >= q[0] {
                let (kmax, vmax) = q
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |(bk, bv), (k, &v)| if v >= bv { (k, v) } else { (bk, bv) });
                return Verdict::Violated {
                    witness: Witness { z, u: sign * rungs[kmax], value: vmax },
                    note: format!("f/|u|^5 does not decay as {where_} (ratios {})", fmt_list(&q)),
                };
            }
            if !(decreasing && q[3] <= F2_DECAY * q[0]) {
                inconclusive = Some(format!(
                    "f/|u|^5 decays only slowly as {where_} (ratios {}, threshold {F2_DECAY})",
                    fmt_list(&q)
                ));
            }
        }
    }
    match inconclusive {
        Some(note) => Verdict::Inconclusive { note },
        None => Verdict::HoldsOnSamples {
            note: format!("f/|u|^5 strictly decreasing over the last 4 rungs as {where_}, drop below {F2_DECAY}x"),
        },
    }
}

fn check_f3(nl: &Nonlinearity, ladder: &[f64]) -> Verdict {
    let rungs = end_rungs(ladder, true);
    for &z in &Z_SAMPLES {
        for sign in [1.0, -1.0] {
            let q: Vec<f64> = rungs.iter().map(|&a| nl.big_f(0.0, z, sign * a) / (a * a)).collect();
            let increasing = q.windows(2).all(|w| w[1] > w[0]);
            if !increasing {
                return Verdict::Violated {
                    witness: Witness { z, u: sign * rungs[3], value: q[3] },
                    note: format!("F/u^2 not increasing as |u|→∞ (ratios {})", fmt_list(&q)),
                };
            }
            let d1 = q[1] - q[0];
            let d3 = q[3] - q[2];
            if d3 < 0.5 * d1 {
                return Verdict::Inconclusive {
                    note: format!("F/u^2 increments shrink geometrically (ratios {}); limit may be finite", fmt_list(&q)),
                };
            }
        }
    }
    Verdict::HoldsOnSamples {
        note: "F/u^2 strictly increasing over the last 4 rungs with non-shrinking increments".into(),
    }
}

fn check_f4(nl: &Nonlinearity) -> Verdict {
    let n = 4000;
    let mut us: Vec<f64> = (0..=n)
        .map(|k| 10f64.powf(LADDER_MIN as f64 + (LADDER_MAX - LADDER_MIN) as f64 * k as f64 / n as f64))
        .collect();
    us.extend((1..=10_000).map(|k| k as f64 * 1e-3));
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    us.dedup();
    for &z in &Z_SAMPLES {
        for sign in [1.0, -1.0] {
            // Walk in increasing u on each half line.
            let seq: Vec<f64> = if sign > 0.0 {
                us.clone()
            } else {
                us.iter().rev().map(|&a| -a).collect()
            };
            let ratio = |u: f64| nl.f(0.0, z, u) / u.abs();
            let mut prev = ratio(seq[0]);
            for w in seq.windows(2) {
                let cur = ratio(w[1]);
                if cur < prev - 1e-12 * prev.abs().max(1e-300) {
                    return Verdict::Violated {
                        witness: Witness { z, u: w[1], value: cur - prev },
                        note: "f/|u| decreases between consecutive samples".into(),
                    };
                }
                prev = cur;
            }
        }
    }
    Verdict::HoldsOnSamples {
        note: "f/|u| nondecreasing on 2x14001 samples per half line".into(),
    }
}

/// Least-squares limit of y against 1/|ln u| over the given rungs.
fn extrapolate_log(us: &[f64], ys: &[f64]) -> f64 {
    let xs: Vec<f64> = us.iter().map(|u| 1.0 / u.ln().abs()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    my - slope * mx
}

fn check_f5(nl: &Nonlinearity, ladder: &[f64], gamma: Option<f64>) -> (Verdict, Option<f64>) {
    if nl.kind == Kind::Zero {
        return (
            Verdict::Violated {
                witness: Witness { z: 0.0, u: 1.0, value: 0.0 },
                note: "F vanishes identically; no u0 with F(z,u0) > 0".into(),
            },
            None,
        );
    }
    // Existence of u0 with inf_z F(z, u0) > 0.
    let has_u0 = ladder
        .iter()
        .any(|&a| Z_SAMPLES.iter().all(|&z| nl.big_f(0.0, z, a) > 0.0));
    if !has_u0 {
        return (
            Verdict::Violated {
                witness: Witness { z: 0.0, u: 1.0, value: nl.big_f(0.0, 0.0, 1.0) },
                note: "no u0 on the ladder with inf_z F(z,u0) > 0".into(),
            },
            None,
        );
    }
    let mut dense: Vec<f64> = (0..=3200).map(|k| 10f64.powf(-8.0 + 16.0 * k as f64 / 3200.0)).collect();
    dense.extend(ladder.iter().copied());
    let mut samples = Vec::with_capacity(2 * dense.len());
    for &a in &dense {
        samples.push(a);
        samples.push(-a);
    }
    // Empirical infimum of f u / F over samples with F > 0.
    let mut emp = f64::INFINITY;
    let mut emp_at = (0.0, 1.0);
    for &z in &Z_SAMPLES {
        for &u in &samples {
            let big = nl.big_f(0.0, z, u);
            if big > 0.0 {
                let r = nl.f(0.0, z, u) * u / big;
                if r < emp {
                    emp = r;
                    emp_at = (z, u);
                }
            }
        }
    }
    if let Some(g) = gamma {
        for &z in &Z_SAMPLES {
            for &u in &samples {
                let fu = nl.f(0.0, z, u) * u;
                let big = nl.big_f(0.0, z, u);
                if fu - g * big < -1e-12 * fu.abs().max(g * big.abs()) {
                    return (
                        Verdict::Violated {
                            witness: Witness { z, u, value: fu - g * big },
                            note: format!("f u < {g} F at the witness"),
                        },
                        Some(emp),
                    );
                }
            }
        }
        if g <= 2.0 {
            return (
                Verdict::Violated {
                    witness: Witness { z: emp_at.0, u: emp_at.1, value: emp },
                    note: format!("gamma = {g} is not > 2"),
                },
                Some(emp),
            );
        }
        return (
            Verdict::HoldsOnSamples {
                note: format!("f u >= {g} F on all samples (empirical inf of fu/F = {emp:.6})"),
            },
            Some(emp),
        );
    }
    // Trend extrapolation at both ends of the ladder where the ratio is still falling.
    let mut estimate = emp;
    let mut est_at = (emp_at.0, emp_at.1, emp);
    for &z in &Z_SAMPLES {
        for infinity in [true, false] {
            for sign in [1.0, -1.0] {
                let rungs = end_rungs(ladder, infinity);
                let ys: Vec<f64> = rungs
                    .iter()
                    .map(|&a| {
                        let u = sign * a;
                        let big = nl.big_f(0.0, z, u);
                        if big > 0.0 {
                            nl.f(0.0, z, u) * u / big
                        } else {
                            f64::NAN
                        }
                    })
                    .collect();
                if ys.iter().any(|y| !y.is_finite()) {
                    continue;
                }
                let falling = ys.windows(2).all(|w| w[1] < w[0]);
                if falling {
                    let lim = extrapolate_log(&rungs, &ys);
                    if lim < estimate {
                        estimate = lim;
                        est_at = (z, sign * rungs[3], ys[3]);
                    }
                }
            }
        }
    }
    if estimate > 2.0 + F5_MARGIN {
        (
            Verdict::HoldsOnSamples {
                note: format!("inf f u / F estimated at {estimate:.4} > 2 + {F5_MARGIN}"),
            },
            Some(estimate),
        )
    } else {
        (
            Verdict::Violated {
                witness: Witness { z: est_at.0, u: est_at.1, value: est_at.2 },
                note: format!("f u / F tends to {estimate:.4}, not above 2 + {F5_MARGIN}; no gamma > 2 works"),
            },
            Some(estimate),
        )
    }
}
