use cylvar_core::functionals::*;
use cylvar_core::grid::{sample_scalar, Grid2, Grid3, ScalarField};
use cylvar_core::nonlinearity::Nonlinearity;
use cylvar_core::operators::{lift, x_norm_sq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn gaussian(grid: &Grid2) -> ScalarField {
    sample_scalar(grid, |r, z| r * (-r * r - z * z).exp()).unwrap()
}

/// ½∫|∇u|² + u²/r² for u = r e^{−r²−z²}.
fn gaussian_half_x_norm() -> f64 {
    0.5 * 1.25 * PI * (PI / 2.0).sqrt()
}

/// ∫ u⁶ for the same u.
fn gaussian_l6() -> f64 {
    2.0 * PI * (3.0 / 6f64.powi(4)) * (PI / 6.0).sqrt()
}

/// Random smooth fields that vanish on the axis and well before the box edge.
fn random_field(grid: &Grid2, rng: &mut ChaCha8Rng) -> ScalarField {
    let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let w = rng.gen_range(0.6..1.4);
    let z0 = rng.gen_range(-1.0..1.0);
    sample_scalar(grid, move |r, z| {
        let zz = z - z0;
        let poly = 1.0 + 0.5 * (c[0] * r + c[1] * zz + c[2] * r * zz + c[3] * r * r + c[4] * zz * zz) + 0.2 * c[5] * (3.0 * zz).sin();
        r * poly * (-(r * r + zz * zz) / (w * w)).exp()
    })
    .unwrap()
}

fn grid() -> Grid2 {
    Grid2::new(48, 97, 6.0, 6.0).unwrap()
}

fn kinds() -> Vec<Nonlinearity> {
    vec![
        Nonlinearity::power(3.0),
        Nonlinearity::power(4.0).with_weight(0.5),
        Nonlinearity::critical(),
        Nonlinearity::log_modified(3.0).with_weight(0.25),
    ]
}

#[test]
fn zero_field_energy_and_residual_vanish() {
    let g = grid();
    let z = ScalarField::zeros(&g);
    let e = energy_scalar(&z, 1.0, &Nonlinearity::critical()).unwrap();
    assert_eq!((e.quad, e.nonlinear, e.total), (0.0, 0.0, 0.0));
    let gr = gradient_scalar(&z, 1.0, &Nonlinearity::power(4.0)).unwrap();
    assert!(gr.residual.values.iter().all(|&v| v == 0.0));
    assert_eq!(gr.dual_norm, 0.0);
    let v = energy_vector(&lift(&z, &Grid3::new(9, 2.0).unwrap()), &Nonlinearity::critical());
    assert_eq!((v.quad, v.nonlinear, v.total), (0.0, 0.0, 0.0));
}

#[test]
fn nonpositive_potential_rejected() {
    let g = grid();
    let u = gaussian(&g);
    assert!(energy_scalar(&u, 0.0, &Nonlinearity::zero()).is_err());
    assert!(gradient_scalar(&u, -1.0, &Nonlinearity::zero()).is_err());
}

#[test]
fn gaussian_energy_matches_closed_forms() {
    let g = Grid2::new(96, 193, 12.0, 12.0).unwrap();
    let u = gaussian(&g);
    let e = energy_scalar(&u, 1.0, &Nonlinearity::zero()).unwrap();
    assert!((e.quad - gaussian_half_x_norm()).abs() < 0.01 * gaussian_half_x_norm(), "{}", e.quad);
    assert_eq!(e.total, e.quad - e.nonlinear);
    let c = energy_scalar(&u, 1.0, &Nonlinearity::critical()).unwrap();
    let want = gaussian_l6() / 6.0;
    assert!((c.nonlinear - want).abs() < 0.01 * want, "{} vs {want}", c.nonlinear);
}

#[test]
fn vector_energy_approaches_scalar_energy() {
    let nl = Nonlinearity::critical();
    let mut gaps = Vec::new();
    for &(n3, nr) in &[(25usize, 24usize), (49, 48)] {
        let g2 = Grid2::new(nr, 2 * nr + 1, 12.0, 12.0).unwrap();
        let u = gaussian(&g2);
        let js = energy_scalar(&u, 1.0, &nl).unwrap().total;
        let ev = energy_vector(&lift(&u, &Grid3::new(n3, 3.5).unwrap()), &nl).total;
        gaps.push((js - ev).abs());
    }
    assert!(gaps[1] < gaps[0], "{gaps:?}");
}

#[test]
fn vector_primitive_matches_parameter_integral() {
    // H(x,U) = ∫₀¹ ⟨h(x,tU), U⟩ dt by composite Simpson.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for nl in kinds() {
        for _ in 0..20 {
            let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let u: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let integrand = |t: f64| {
                let h = nl.h(x, [t * u[0], t * u[1], t * u[2]]);
                h[0] * u[0] + h[1] * u[1] + h[2] * u[2]
            };
            let simpson = |a: f64, b: f64| {
                let n = 2000;
                let h = (b - a) / n as f64;
                let mut s = integrand(a) + integrand(b);
                for k in 1..n {
                    s += if k % 2 == 1 { 4.0 } else { 2.0 } * integrand(a + k as f64 * h);
                }
                s * h / 3.0
            };
            // The log kind switches formula at |tU| = 1.
            let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            let s = if norm > 1.0 { simpson(0.0, 1.0 / norm) + simpson(1.0 / norm, 1.0) } else { simpson(0.0, 1.0) };
            let want = nl.big_h(x, u);
            assert!((s - want).abs() <= 1e-9 * want.abs().max(1e-12), "{s} vs {want}");
        }
    }
}

#[test]
fn residual_pairs_with_u_to_the_x_norm() {
    let g = grid();
    let u = gaussian(&g);
    let gr = gradient_scalar(&u, 1.0, &Nonlinearity::zero()).unwrap();
    let w = g.weights();
    let pair: f64 = (0..g.len()).map(|k| w[k] * gr.residual.values[k] * u.values[k]).sum();
    let q = x_norm_sq(&u, 1.0).unwrap();
    assert!((pair - q).abs() <= 1e-12 * q, "{pair} vs {q}");
    // With f = 0, ψ = u and the dual norm is ‖u‖.
    assert!((gr.dual_norm - q.sqrt()).abs() <= 1e-8 * q.sqrt());
}

#[test]
fn first_variation_matches_central_differences() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let eps = 1e-5;
    for nl in kinds() {
        let u = random_field(&g, &mut rng);
        let gr = gradient_scalar(&u, 1.0, &nl).unwrap();
        let w = g.weights();
        for _ in 0..5 {
            let v = random_field(&g, &mut rng);
            let shift = |s: f64| {
                let vals: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a + s * b).collect();
                energy_scalar(&ScalarField::from_values(&g, vals).unwrap(), 1.0, &nl).unwrap().total
            };
            let fd = (shift(eps) - shift(-eps)) / (2.0 * eps);
            let an: f64 = (0..g.len()).map(|k| w[k] * gr.residual.values[k] * v.values[k]).sum();
            assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{nl:?}: {fd} vs {an}");
        }
    }
}

#[test]
fn fiber_roots_match_closed_forms() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let w = g.weights();
    for _ in 0..10 {
        let u = random_field(&g, &mut rng);
        let q = x_norm_sq(&u, 1.0).unwrap();
        let moment = |p: i32| -> f64 {
            (0..g.len())
                .filter(|&k| !g.is_boundary(k / g.nz, k % g.nz))
                .map(|k| w[k] * u.values[k].abs().powi(p))
                .sum()
        };
        let t4 = (q / moment(4)).sqrt();
        let t6 = (q / moment(6)).powf(0.25);
        for (nl, want) in [(Nonlinearity::power(4.0), t4), (Nonlinearity::critical(), t6)] {
            let prof = fiber_profile(&u, 1.0, &nl, 10.0 * want).unwrap();
            let got = prof.root.unwrap();
            assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
            // Homogeneity: t*(cu)·c = t*(u).
            let u3 = u.scaled(3.0);
            let got3 = fiber_profile(&u3, 1.0, &nl, 10.0 * want).unwrap().root.unwrap();
            assert!((3.0 * got3 - got).abs() <= 1e-8 * got);
        }
    }
}

#[test]
fn fiber_without_nonlinearity_has_no_root() {
    let g = grid();
    let prof = fiber_profile(&gaussian(&g), 1.0, &Nonlinearity::zero(), 100.0).unwrap();
    assert!(prof.root.is_none());
    assert_eq!(prof.ts.len(), FIBER_SAMPLES);
    assert!(prof.ts.windows(2).all(|p| p[0] < p[1]));
    assert!(fiber_profile(&ScalarField::zeros(&g), 1.0, &Nonlinearity::zero(), 1.0).is_err());
}

#[test]
fn projection_lands_on_nehari_set() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for nl in kinds() {
        let u = random_field(&g, &mut rng);
        let p = Problem::new(&g, 1.0, &nl).unwrap();
        let t = p.fiber_root(&u.values).unwrap();
        let tu: Vec<f64> = u.values.iter().map(|x| t * x).collect();
        let q = p.form.norm_sq(&tu);
        let gval = q - p.f_dot(&tu, 1.0);
        assert!(gval.abs() <= 1e-8 * q, "{nl:?}: {gval} vs {q}");
    }
}

#[test]
fn rim_is_positive_for_power_kinds() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let fields: Vec<ScalarField> = (0..200).map(|_| random_field(&g, &mut rng)).collect();
    for p in [3.0, 4.0, 5.0] {
        let nl = Nonlinearity::power(p);
        // Discrete Sobolev-type constant ∫|u|^p ≤ C‖u‖^p measured on the sample.
        let ratio = |u: &ScalarField| {
            let q = x_norm_sq(u, 1.0).unwrap();
            p * nonlinear_integral(u, &nl) / q.powf(p / 2.0)
        };
        let c = fields.iter().map(ratio).fold(0.0, f64::max);
        // ½ρ² − (C/p)ρ^p > 0 for ρ < (p/(2C))^{1/(p−2)}.
        let rho = 0.5 * (p / (2.0 * c)).powf(1.0 / (p - 2.0));
        for u in &fields {
            let q = x_norm_sq(u, 1.0).unwrap();
            let scaled = u.scaled(rho / q.sqrt());
            assert!(energy_scalar(&scaled, 1.0, &nl).unwrap().total > 0.0);
        }
    }
}

#[test]
fn periodic_weight_gives_translation_invariance() {
    // dz = 1/8, so an 8-node shift is one period.
    let g = Grid2::new(64, 129, 8.0, 8.0).unwrap();
    let nl = Nonlinearity::power(4.0).with_weight(0.5);
    let a = sample_scalar(&g, |r, z| r * (-r * r - (z + 0.5) * (z + 0.5)).exp()).unwrap();
    let b = sample_scalar(&g, |r, z| r * (-r * r - (z - 0.5) * (z - 0.5)).exp()).unwrap();
    let ja = energy_scalar(&a, 1.0, &nl).unwrap().total;
    let jb = energy_scalar(&b, 1.0, &nl).unwrap().total;
    assert!((ja - jb).abs() <= 1e-12 * ja.abs(), "{ja} vs {jb}");
    // A half-period shift does see the weight.
    let c = sample_scalar(&g, |r, z| r * (-r * r - z * z).exp()).unwrap();
    let jc = energy_scalar(&c, 1.0, &nl).unwrap().total;
    assert!((ja - jc).abs() > 1e-6);
}

#[test]
fn ring_inequality_for_cubic_power() {
    let g = Grid2::new(64, 129, 16.0, 16.0).unwrap();
    let nl = Nonlinearity::power(3.0);
    let rep = find_ring_radius(1.0, &g, &nl).unwrap().expect("some R fits");
    assert!(rep.holds && rep.nonlinear > rep.half_grad_z);
    let smaller = mountain_pass_ring(1.0, rep.r_big - 1.0, &g, &nl);
    if let Ok(s) = smaller {
        assert!(!s.holds);
    }
    let zero = mountain_pass_ring(0.0, 5.0, &g, &nl).unwrap();
    assert_eq!(zero.nonlinear, 0.0);
    assert!(!zero.holds);
    assert!(mountain_pass_ring(1.0, 2.0, &g, &nl).is_err());
    assert!(mountain_pass_ring(1.0, 15.5, &g, &nl).is_err());
}

#[test]
fn scaling_path_signs() {
    let g = Grid2::new(64, 129, 16.0, 16.0).unwrap();
    let nl = Nonlinearity::power(3.0);
    let rep = find_ring_radius(1.0, &g, &nl).unwrap().unwrap();
    let lambdas: Vec<f64> = (0..20).map(|k| 0.9f64.powi(k)).collect();
    let path = scaling_path(&rep.w, 1.0, &nl, &lambdas).unwrap();
    let j = energy_scalar(&rep.w, 1.0, &nl).unwrap().total;
    assert!((path.value(1.0) - j).abs() <= 1e-12 * j.abs().max(1.0));
    assert!(path.b_term < 0.0);
    let lam = path.negative_below().unwrap();
    assert!(path.value(0.99 * lam) < 0.0 && path.value(1.01 * lam) > 0.0);
    assert!(path.rows.windows(2).all(|w| w[1].1 < w[0].1));

    let free = scaling_path(&rep.w, 1.0, &Nonlinearity::zero(), &lambdas).unwrap();
    assert!(free.b_term > 0.0 && free.negative_below().is_none());
    assert!(free.rows.windows(2).all(|w| w[1].1 > w[0].1));
    assert!(scaling_path(&rep.w, 1.0, &nl, &[0.0]).is_err());
}
