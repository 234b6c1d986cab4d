use cylvar_core::conformal::*;
use cylvar_core::grid::{sample_scalar, sample_vector, Grid2, Grid3, VectorField3};
use cylvar_core::interp::trilinear;
use cylvar_core::operators::{decompose, equivariance_defect, lift};
use cylvar_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const S0: f64 = 0.5;

/// Radial bump on the sphere that vanishes for s ≤ S0, so every image under
/// the group stays inside |x| ≤ 2 + √3.
fn bump(s: f64) -> f64 {
    if s > S0 {
        ((s - S0) / (1.0 - S0)).powi(3)
    } else {
        0.0
    }
}

fn xi3(x: [f64; 3]) -> f64 {
    2.0 * x[2] / (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2])
}

/// A field with no SO(2)×SO(2) symmetry and all three components present.
fn generic(x: [f64; 3]) -> [f64; 3] {
    let a = conformal_factor(x) * bump(hopf_s(x)) * (1.0 + xi3(x));
    [a * (x[0] + 0.3 - 0.7 * x[1]), a * (x[1] - 0.2 * x[2] + 0.7 * x[0]), a * (1.0 - 0.5 * x[0])]
}

fn grid() -> Grid3 {
    Grid3::new(49, 4.0).unwrap()
}

fn grid2_for(g: &Grid3) -> Grid2 {
    Grid2::new(2 * g.n, 4 * g.n + 1, 1.8 * g.half_width, 1.8 * g.half_width).unwrap()
}

fn max_diff(a: &VectorField3, b: &VectorField3) -> f64 {
    a.sub(b).max_abs()
}

fn exact_act(f: fn([f64; 3]) -> [f64; 3], grid: &Grid3, g: &GroupElement) -> VectorField3 {
    sample_vector(grid, |x| match act_point(g, x) {
        Some(y) => {
            let v = f(y);
            let s = conformal_factor(x) / conformal_factor(y);
            let (sn, cs) = g.alpha1.sin_cos();
            [s * (cs * v[0] + sn * v[1]), s * (-sn * v[0] + cs * v[1]), s * v[2]]
        }
        None => [0.0; 3],
    })
}

#[test]
fn stereo_round_trip_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let x: [f64; 3] = std::array::from_fn(|_| scale * rng.gen_range(-1.0..1.0));
        let xi = stereo_inv(x);
        let n = xi.xi.iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() <= 1e-14);
        let y = stereo(&xi).unwrap();
        let e = (0..3).map(|k| (y[k] - x[k]).abs()).fold(0.0, f64::max) / (1.0 + scale);
        worst = worst.max(e);
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn sphere_point_normalizes_and_rejects_zero() {
    let p = SpherePoint::new([3.0, 0.0, 4.0, 0.0]).unwrap();
    assert_eq!(p.xi, [0.6, 0.0, 0.8, 0.0]);
    assert!(SpherePoint::new([0.0; 4]).is_err());
    let near = SpherePoint::new([1e-13, 0.0, 0.0, 1.0]).unwrap();
    assert!(matches!(stereo(&near), Err(Error::NorthPole)));
}

#[test]
fn identity_action_is_exact_and_action_is_linear() {
    let g3 = grid();
    let u = sample_vector(&g3, generic);
    assert_eq!(group_act(&u, &GroupElement::identity()).values, u.values);
    let v = sample_vector(&g3, |x| [x[2] * bump(hopf_s(x)), 0.0, x[0]]);
    let g = GroupElement::new(0.4, 1.3);
    let mut comb = u.clone();
    for (c, w) in comb.values.iter_mut().zip(&v.values) {
        for d in 0..3 {
            c[d] = 2.0 * c[d] - 3.0 * w[d];
        }
    }
    let lhs = group_act(&comb, &g);
    let (tu, tv) = (group_act(&u, &g), group_act(&v, &g));
    for m in 0..g3.len() {
        for d in 0..3 {
            let want = 2.0 * tu.values[m][d] - 3.0 * tv.values[m][d];
            assert!((lhs.values[m][d] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn first_factor_alone_is_rotation_conjugacy() {
    let g3 = grid();
    let u = sample_vector(&g3, generic);
    let a = 0.9f64;
    let t = group_act(&u, &GroupElement::new(a, 0.0));
    let (s, c) = a.sin_cos();
    let direct = sample_vector(&g3, |x| {
        let v = trilinear(&u, [c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]]);
        [c * v[0] + s * v[1], -s * v[0] + c * v[1], v[2]]
    });
    assert!(max_diff(&t, &direct) < 1e-12 * u.max_abs());
}

#[test]
fn action_composes_within_interpolation_error() {
    let g3 = grid();
    let u = sample_vector(&g3, generic);
    let g = GroupElement::new(0.7, 0.5);
    let h = GroupElement::new(2.1, 4.0);
    let gh = g.compose(&h);
    let interp = [g, h, gh]
        .iter()
        .map(|k| max_diff(&group_act(&u, k), &exact_act(generic, &g3, k)))
        .fold(0.0, f64::max);
    let two_step = group_act(&group_act(&u, &h), &g);
    let one_step = group_act(&u, &gh);
    let d = max_diff(&two_step, &one_step);
    assert!(d <= 2.0 * interp, "composition {d} vs interpolation {interp}");
    assert!(interp < 0.1 * u.max_abs(), "{interp} vs {}", u.max_abs());
}

#[test]
fn zero_field_has_zero_defect_and_l6_pair() {
    let g3 = Grid3::new(17, 2.0).unwrap();
    let z = VectorField3::zeros(&g3);
    assert_eq!(symmetry_defect(&z, &angle_grid(4, 4)), 0.0);
    let c = l6_isometry_check(&z, 1000, 0);
    assert_eq!((c.flat, c.sphere), (0.0, 0.0));
}

#[test]
fn pullback_volume_of_phi6_is_sphere_volume() {
    let (mean, se) = phi6_volume_mc(1 << 18, 3);
    assert!((mean - 2.0 * PI * PI).abs() <= 3.0 * se, "{mean} ± {se}");
    assert!(se < 0.01 * mean);
}

#[test]
fn l6_pair_agrees_on_gaussian_lift() {
    let g3 = Grid3::new(65, 3.5).unwrap();
    let g2 = grid2_for(&g3);
    let u = sample_scalar(&g2, |r, z| r * (-r * r - z * z).exp()).unwrap();
    let c = l6_isometry_check(&lift(&u, &g3), 1 << 18, 9);
    // 2π ∫ r⁷ e^{−6r²} dr ∫ e^{−6z²} dz with ∫ r⁷ e^{−6r²} dr = 3/6⁴.
    let oracle = 2.0 * PI * (3.0 / (6f64.powi(4))) * (PI / 6.0).sqrt();
    assert!((c.flat - oracle).abs() < 1e-3 * oracle, "{} vs {oracle}", c.flat);
    assert!((c.flat - c.sphere).abs() <= 3.0 * c.sphere_stderr + 0.01 * c.flat, "{c:?}");
}

#[test]
fn mc_is_reproducible_per_seed() {
    assert_eq!(phi6_volume_mc(10_000, 4), phi6_volume_mc(10_000, 4));
    assert_ne!(phi6_volume_mc(10_000, 4), phi6_volume_mc(10_000, 5));
}

#[test]
fn symmetrize_rejects_coarse_angle_grids() {
    let z = VectorField3::zeros(&Grid3::new(9, 1.0).unwrap());
    assert!(symmetrize(&z, 3, 4).is_err());
    assert!(symmetrize(&z, 4, 2).is_err());
}

#[test]
fn symmetrize_is_a_projector_and_matches_the_averaged_profile() {
    let g3 = grid();
    let g2 = grid2_for(&g3);
    let gs: Vec<_> = angle_grid(4, 4).into_iter().skip(1).collect();
    let reference = lift(&symmetric_profile(&g2, bump).unwrap(), &g3);
    let floor = symmetry_defect(&reference, &gs);

    // Averaging the ξ₃ factor over the second circle leaves φ·bump(s).
    let scalar = sample_scalar(&g2, |r, z| {
        let x = [r, 0.0, z];
        conformal_factor(x) * bump(hopf_s(x)) * (1.0 + xi3(x))
    })
    .unwrap();
    let u = lift(&scalar, &g3);
    assert!(symmetry_defect(&u, &gs) > 10.0 * floor);
    let s = symmetrize(&u, 4, 4).unwrap();
    assert!(symmetry_defect(&s, &gs) <= 5.0 * floor);
    let single = max_diff(&s, &reference);
    assert!(single < 0.05 * reference.max_abs());
    let s2 = symmetrize(&s, 4, 4).unwrap();
    assert!(max_diff(&s2, &s) <= 2.0 * single);

    // A field that is already symmetric barely moves.
    let r2 = symmetrize(&reference, 4, 4).unwrap();
    assert!(max_diff(&r2, &reference) <= 2.0 * single);
}

#[test]
fn gaussian_lift_is_not_conformally_symmetric() {
    let g3 = grid();
    let g2 = grid2_for(&g3);
    let u = sample_scalar(&g2, |r, z| r * (-r * r - z * z).exp()).unwrap();
    let d = symmetry_defect(&lift(&u, &g3), &angle_grid(4, 4));
    assert!(d > 0.3, "{d}");
}

#[test]
fn decomposition_of_symmetrized_field_stays_symmetric() {
    let g3 = grid();
    let g2 = grid2_for(&g3);
    let gs: Vec<_> = angle_grid(8, 4).into_iter().skip(1).collect();
    let floor = symmetry_defect(&lift(&symmetric_profile(&g2, bump).unwrap(), &g3), &gs);
    let s = symmetrize(&sample_vector(&g3, generic), 8, 4).unwrap();
    let (rho, tau, zeta) = decompose(&s);
    for (name, part) in [("rho", &rho), ("tau", &tau), ("zeta", &zeta)] {
        let d = symmetry_defect(part, &gs);
        assert!(d <= 5.0 * floor, "{name}: {d} vs floor {floor}");
    }
    // Averaging the azimuthal part keeps it azimuthal up to interpolation.
    let st = symmetrize(&tau, 8, 4).unwrap();
    let (r2, _, z2) = decompose(&st);
    let leak = r2.max_abs().max(z2.max_abs());
    assert!(leak <= floor * st.max_abs(), "{leak} vs {}", st.max_abs());
    // Symmetric fields are equivariant under rotations about the axis.
    let e = equivariance_defect(&s, 8);
    assert!(e <= 5.0 * floor * s.max_abs(), "{e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn act_point_preserves_the_torus_invariant(
        x in prop::array::uniform3(-5.0f64..5.0), a1 in 0.0f64..6.3, a2 in 0.0f64..6.3,
    ) {
        let g = GroupElement::new(a1, a2);
        if let Some(y) = act_point(&g, x) {
            prop_assert!((hopf_s(y) - hopf_s(x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn act_point_composes(x in prop::array::uniform3(-3.0f64..3.0), a in 0.0f64..6.3, b in 0.0f64..6.3, c in 0.0f64..6.3, d in 0.0f64..6.3) {
        let g = GroupElement::new(a, b);
        let h = GroupElement::new(c, d);
        if let (Some(y), Some(w)) = (act_point(&h, x), act_point(&g.compose(&h), x)) {
            if let Some(v) = act_point(&g, y) {
                let scale = 1.0 + w.iter().map(|t| t * t).sum::<f64>();
                for k in 0..3 {
                    prop_assert!((v[k] - w[k]).abs() <= 1e-9 * scale);
                }
            }
        }
    }
}
