use cylvar_core::grid::{sample_scalar, sample_vector, Grid2, Grid3, ScalarField};
use cylvar_core::operators::*;
use cylvar_core::suites::{gaussian_norm_sq, gaussian_pair, identities};
use proptest::prelude::*;

#[test]
fn identity_errors_shrink_under_refinement() {
    let coarse = identities(17).unwrap();
    let fine = identities(33).unwrap();
    for name in ["x_norm_rel_err", "grad_rel_err", "curl_rel_err", "div_max", "curlcurl_defect", "energy_J_vs_E_rel"] {
        let (a, b) = (coarse.row(name).unwrap().value, fine.row(name).unwrap().value);
        assert!(b < a, "{name}: {a} -> {b}");
    }
    assert!(fine.all_pass(), "{fine:?}");
}

#[test]
fn norm_is_invariant_under_critical_scaling() {
    // u_λ(r, z) = λ^{1/2} u(λr, λz) keeps ∫|∇u|² + u²/r² over ℝ³ fixed.
    let g = Grid2::new(192, 385, 6.0, 6.0).unwrap();
    let base = |r: f64, z: f64| r * (-r * r - z * z).exp();
    let u = sample_scalar(&g, base).unwrap();
    let u2 = sample_scalar(&g, |r, z| 2f64.sqrt() * base(2.0 * r, 2.0 * z)).unwrap();
    let (n1, n2) = (x_norm_sq(&u, 1.0).unwrap(), x_norm_sq(&u2, 1.0).unwrap());
    assert!((n1 - gaussian_norm_sq()).abs() < 0.01 * n1);
    assert!((n2 - n1).abs() < 0.02 * n1, "{n1} vs {n2}");
}

#[test]
fn x_norm_rejects_nonpositive_a() {
    let u = ScalarField::zeros(&Grid2::new(8, 17, 1.0, 1.0).unwrap());
    assert!(x_norm_sq(&u, 0.0).is_err());
    assert!(x_norm_sq(&u, -1.0).unwrap_err().to_string().contains("a>0 required for K=2"));
}

fn round_trip_error(n: usize) -> f64 {
    let (u, field) = gaussian_pair(n).unwrap();
    let back = restrict(&field, &u.grid).unwrap();
    let mut worst = 0.0f64;
    for i in 0..u.grid.nr {
        for j in 0..u.grid.nz {
            if u.grid.r(i) <= 3.0 && u.grid.z(j).abs() <= 3.0 {
                worst = worst.max((back.get(i, j) - u.get(i, j)).abs());
            }
        }
    }
    worst
}

#[test]
fn restrict_inverts_lift_to_second_order() {
    let (e1, e2) = (round_trip_error(33), round_trip_error(65));
    assert!(e2 < e1 / 3.0, "{e1} -> {e2}");
}

#[test]
fn restrict_of_zero_is_zero() {
    let g3 = Grid3::new(9, 2.0).unwrap();
    let g2 = Grid2::new(8, 17, 2.0, 2.0).unwrap();
    let u = restrict(&sample_vector(&g3, |_| [0.0; 3]), &g2).unwrap();
    assert!(u.values.iter().all(|&v| v == 0.0));
}

#[test]
fn gradient_field_has_small_curl() {
    let g = Grid3::new(49, 3.0).unwrap();
    let f = sample_vector(&g, |x| {
        let e = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
        [-2.0 * x[0] * e, -2.0 * x[1] * e, -2.0 * x[2] * e]
    });
    // A sampled gradient is not a discrete gradient, so its discrete curl is O(h²) rather than zero.
    assert!(curl3(&f).max_abs() < 0.05, "{}", curl3(&f).max_abs());
}

fn generic(x: [f64; 3]) -> [f64; 3] {
    let e = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
    [e * (1.0 + x[1]), e * (x[2] - x[0]), e * x[0] * x[1]]
}

#[test]
fn haar_average_is_idempotent_and_equivariant() {
    let g = Grid3::new(33, 3.0).unwrap();
    let v = sample_vector(&g, generic);
    let once = haar_average(&v, 16);
    let twice = haar_average(&once, 16);
    assert!(twice.sub(&once).max_abs() < 0.02 * once.max_abs());
    assert!(equivariance_defect(&once, 16) < 0.1 * equivariance_defect(&v, 16));
}

#[test]
fn decompose_keeps_equivariance() {
    let (_, field) = gaussian_pair(33).unwrap();
    let v = haar_average(&sample_vector(&field.grid, generic), 16);
    let d = equivariance_defect(&v, 16);
    let (a, b, c) = decompose(&v);
    for part in [&a, &b, &c] {
        assert!(equivariance_defect(part, 16) <= d + 0.05 * v.max_abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn decompose_is_exact_and_orthogonal(c in prop::array::uniform9(-2.0f64..2.0)) {
        let g = Grid3::new(9, 1.5).unwrap();
        let f = sample_vector(&g, |x| [
            c[0] + c[1] * x[1] + c[2] * x[2] * x[0],
            c[3] * x[0] + c[4] - c[5] * x[2],
            c[6] * x[1] * x[1] + c[7] + c[8] * x[0],
        ]);
        let (a, b, z) = decompose(&f);
        for m in 0..g.len() {
            let (p, q, r, v) = (a.values[m], b.values[m], z.values[m], f.values[m]);
            for k in 0..3 {
                prop_assert!((p[k] + q[k] + r[k] - v[k]).abs() <= 1e-14 * (1.0 + v[k].abs()));
            }
            let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            let scale = 1.0 + dot(v, v);
            prop_assert!(dot(p, q).abs() <= 1e-13 * scale);
            prop_assert!(dot(p, r).abs() <= 1e-13 * scale);
            prop_assert!(dot(q, r).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn lifts_are_azimuthal(c in prop::array::uniform3(0.2f64..2.0)) {
        let g2 = Grid2::new(16, 33, 3.0, 3.0).unwrap();
        let u = sample_scalar(&g2, |r, z| c[0] * r * (-c[1] * r * r - c[2] * z * z).exp()).unwrap();
        let f = lift(&u, &Grid3::new(13, 2.0).unwrap());
        let (rho, _, zeta) = decompose(&f);
        prop_assert!(rho.max_abs().max(zeta.max_abs()) <= 1e-12 * f.max_abs());
        prop_assert!(div3(&curl3(&f)).max_abs_interior() <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn div_of_linear_field_is_its_trace(m in prop::array::uniform9(-3.0f64..3.0)) {
        let g = Grid3::new(9, 1.0).unwrap();
        let f = sample_vector(&g, |x| [
            m[0] * x[0] + m[1] * x[1] + m[2] * x[2],
            m[3] * x[0] + m[4] * x[1] + m[5] * x[2],
            m[6] * x[0] + m[7] * x[1] + m[8] * x[2],
        ]);
        let d = div3(&f);
        let tr = m[0] + m[4] + m[8];
        // The boundary shell is zero, so only nodes whose stencil avoids it see the linear field.
        let inner = |t: usize| (2..g.n - 2).contains(&t);
        for idx in 0..g.len() {
            let (i, j, k) = g.unflatten(idx);
            if inner(i) && inner(j) && inner(k) {
                prop_assert!((d.values[idx] - tr).abs() <= 1e-12 * (1.0 + tr.abs()));
            }
        }
    }

    #[test]
    fn haar_average_keeps_only_the_axial_part_of_constants(c in prop::array::uniform3(-2.0f64..2.0), m in 4usize..20) {
        let g = Grid3::new(7, 1.0).unwrap();
        let avg = haar_average(&sample_vector(&g, |_| c), m);
        let mid = g.idx(3, 3, 3);
        let v = avg.values[mid];
        prop_assert!(v[0].abs() <= 1e-13 && v[1].abs() <= 1e-13);
        prop_assert!((v[2] - c[2]).abs() <= 1e-13);
    }
}
