use cylvar_core::functionals::{energy_scalar, energy_vector, gradient_scalar, Problem};
use cylvar_core::grid::{Grid2, Grid3, ScalarField};
use cylvar_core::nonlinearity::Nonlinearity;
use cylvar_core::operators::{lift, x_norm_sq};
use cylvar_core::solvers::*;
use cylvar_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Grid2 {
    Grid2::new(48, 97, 8.0, 8.0).unwrap()
}

fn quartic() -> SolveResult {
    solve_ground_state(1.0, &Nonlinearity::power(4.0), &grid(), &SolverConfig::default()).unwrap()
}

#[test]
fn config_validation() {
    let ok = SolverConfig::default();
    assert!(ok.validate().is_ok());
    for bad in [
        SolverConfig { max_iter: 0, ..ok.clone() },
        SolverConfig { tol_residual: 0.0, ..ok.clone() },
        SolverConfig { step0: -1.0, ..ok.clone() },
        SolverConfig { k_nodes: 2, ..ok.clone() },
    ] {
        assert!(matches!(bad.validate(), Err(Error::InvalidArgument(_))));
    }
}

#[test]
fn quartic_ground_state_is_a_critical_point_on_the_nehari_set() {
    let res = quartic();
    assert!(res.converged && res.dual_residual <= 1e-8, "{} after {}", res.dual_residual, res.iterations);
    assert!(res.breakdown.total > 0.0);
    let nl = Nonlinearity::power(4.0);
    let p = Problem::new(&res.u.grid, 1.0, &nl).unwrap();
    let q = p.form.norm_sq(&res.u.values);
    assert!((q - p.f_dot(&res.u.values, 1.0)).abs() <= 1e-8 * q);

    // Post-projection descent is monotone up to the line-search slack.
    for w in res.trace.windows(2) {
        assert!(w[1].j <= w[0].j + 1e-12 * w[0].j.abs(), "{} -> {}", w[0].j, w[1].j);
    }

    // |⟨R, v⟩| ≤ ‖ψ‖·‖v‖ on random directions.
    let gr = gradient_scalar(&res.u, 1.0, &nl).unwrap();
    let g = &res.u.grid;
    let w = g.weights();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let vals: Vec<f64> = (0..g.len())
            .map(|k| if g.is_boundary(k / g.nz, k % g.nz) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect();
        let v = ScalarField::from_values(g, vals).unwrap();
        let pair: f64 = (0..g.len()).map(|k| w[k] * gr.residual.values[k] * v.values[k]).sum();
        let vn = x_norm_sq(&v, 1.0).unwrap().sqrt();
        assert!(pair.abs() <= 1.01 * res.dual_residual.max(gr.dual_norm) * vn, "{pair} vs {}", gr.dual_norm * vn);
    }
}

#[test]
fn sign_flip_and_positivity() {
    let g = grid();
    let nl = Nonlinearity::power(4.0);
    let cfg = SolverConfig::default();
    let base = quartic();
    let flipped = solve_ground_state_from(1.0, &nl, &initial_guess(&g, 0).scaled(-1.0), &cfg, false).unwrap();
    assert!((flipped.breakdown.total - base.breakdown.total).abs() <= 1e-10 * base.breakdown.total);
    // Both runs report the representative with a nonnegative maximum.
    let k = base.u.argmax_abs();
    assert!(base.u.values[k] >= 0.0 && flipped.u.values[flipped.u.argmax_abs()] >= 0.0);

    let pos = solve_ground_state(1.0, &nl, &g, &SolverConfig { positivity: true, ..cfg }).unwrap();
    assert!(pos.converged);
    assert!(pos.u.values.iter().all(|&v| v >= 0.0));
    assert!((pos.breakdown.total - base.breakdown.total).abs() <= 1e-6 * base.breakdown.total);
}

#[test]
fn hyperparameters_do_not_change_the_level() {
    let g = grid();
    let nl = Nonlinearity::power(4.0);
    let base = quartic();
    let other = solve_ground_state(1.0, &nl, &g, &SolverConfig { seed: 3, step0: 0.7, ..Default::default() }).unwrap();
    assert!(other.converged);
    assert!((other.breakdown.total - base.breakdown.total).abs() <= 1e-6 * base.breakdown.total);
}

#[test]
fn repeated_solves_are_bit_identical() {
    let a = quartic();
    let b = quartic();
    assert_eq!(a.u.values, b.u.values);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.breakdown, b.breakdown);
}

#[test]
fn zero_start_collapses() {
    let g = grid();
    let err = solve_ground_state_from(1.0, &Nonlinearity::power(4.0), &ScalarField::zeros(&g), &SolverConfig::default(), false);
    assert!(matches!(err, Err(Error::Collapse(_))), "{err:?}");
}

#[test]
fn iteration_cap_returns_unconverged_result() {
    let cfg = SolverConfig { max_iter: 2, ..Default::default() };
    let res = solve_ground_state(1.0, &Nonlinearity::power(3.0), &grid(), &cfg).unwrap();
    assert!(!res.converged && res.iterations <= 2);
}

#[test]
fn log_modified_ground_state_converges() {
    let res = solve_ground_state(1.0, &Nonlinearity::log_modified(3.0), &grid(), &SolverConfig::default()).unwrap();
    assert!(res.converged && res.breakdown.total > 0.0);
}

#[test]
fn vector_energy_of_ground_state_approaches_scalar_energy() {
    let res = quartic();
    let nl = Nonlinearity::power(4.0);
    let j = res.breakdown.total;
    let gaps: Vec<f64> = [33usize, 65]
        .iter()
        .map(|&n| (energy_vector(&lift(&res.u, &Grid3::new(n, 8.0).unwrap()), &nl).total - j).abs())
        .collect();
    assert!(gaps[1] < gaps[0], "{gaps:?}");
}

#[test]
fn critical_level_identity() {
    let g = Grid2::new(48, 97, 12.0, 12.0).unwrap();
    let res = solve_critical(1.0, &g, &SolverConfig::default()).unwrap();
    let s = res.rayleigh.unwrap();
    let j = res.breakdown.total;
    assert!((j - s.powf(1.5) / 3.0).abs() <= 1e-10 * j, "{j} vs {}", s.powf(1.5) / 3.0);
    assert!(res.converged && res.dual_residual <= 1e-8);
    let direct = energy_scalar(&res.u, 1.0, &Nonlinearity::critical()).unwrap().total;
    assert!((direct - j).abs() <= 1e-12 * j);
}

#[test]
fn odd_state_lies_above_ground_state() {
    let g = grid();
    let nl = Nonlinearity::power(4.0);
    let ground = excited_symmetric_state(1.0, &nl, &g, &SolverConfig::default()).unwrap();
    assert_eq!(ground.breakdown, quartic().breakdown);
    let odd = excited_symmetric_state(1.0, &nl, &g, &SolverConfig { k_nodes: 1, ..Default::default() }).unwrap();
    assert!(odd.converged);
    for i in 0..g.nr {
        for j in 0..g.nz {
            assert_eq!(odd.u.get(i, j), -odd.u.get(i, g.mirror_j(j)));
        }
    }
    assert!(odd.breakdown.total > ground.breakdown.total);
}

#[test]
#[ignore = "on a bounded grid the odd critical minimizer splits into two bubbles below the symmetric-class level"]
fn critical_odd_state_lies_above_symmetric_minimizer() {
    let g = Grid2::new(96, 193, 12.0, 12.0).unwrap();
    let cfg = SolverConfig { k_nodes: 1, ..Default::default() };
    let odd = excited_symmetric_state(1.0, &Nonlinearity::critical(), &g, &cfg).unwrap();
    let ground = solve_critical(1.0, &g, &SolverConfig::default()).unwrap();
    assert!(odd.breakdown.total > ground.breakdown.total);
}

#[test]
fn mountain_pass_level_matches_ground_state() {
    let g = Grid2::new(64, 129, 16.0, 16.0).unwrap();
    let nl = Nonlinearity::power(4.0);
    let cfg = SolverConfig::default();
    let mp = mountain_pass_level_bound(1.0, &nl, &g, &cfg, 1.0).unwrap();
    let gs = solve_ground_state(1.0, &nl, &g, &cfg).unwrap().breakdown.total;
    assert!(mp.c_mp > 0.0 && mp.endpoint_energy < 0.0);
    assert!((mp.c_mp - gs).abs() <= 0.05 * gs, "{} vs {gs}", mp.c_mp);
    assert_eq!(mp.knot_energies.len(), PATH_KNOTS);
    assert!(mp.history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn one_sided_variant_has_finite_level() {
    let g = Grid2::new(64, 129, 16.0, 16.0).unwrap();
    let mp = mountain_pass_level_bound(1.0, &Nonlinearity::power(4.0).one_sided(), &g, &SolverConfig::default(), 1.0).unwrap();
    assert!(mp.c_mp.is_finite() && mp.c_mp > 0.0);
}

#[test]
fn mountain_pass_requires_superquadratic_growth() {
    let g = Grid2::new(32, 65, 16.0, 16.0).unwrap();
    let err = mountain_pass_level_bound(1.0, &Nonlinearity::zero(), &g, &SolverConfig::default(), 1.0);
    assert!(matches!(err, Err(Error::Assumption { .. })));
}
