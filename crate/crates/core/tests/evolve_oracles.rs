//! Oracle and property tests for the explicit stepping layer: closed-form
//! heat evolution, contraction/ordering/positivity structure, Duhamel
//! agreement with direct stepping, blow-up monotonicity, and the
//! exponential rescaling cross-check.

mod common;

use common::*;
use fnparab::evolve::{
    choose_dt, comparison_check, duhamel_fixed_point, exponential_rescale_check, run_semigroup,
    run_system, semigroup_nonexpansion_check, semigroup_step, steps_for, Coupling, StepControl,
    SystemState,
};
use fnparab::grid::{sup_distance, Boundary, Grid, GridField};
use fnparab::operators::EllipticOperator;
use rand::Rng;

fn heat_error(points: usize, radius: f64, t0: f64, t: f64) -> f64 {
    let grid = Grid::new(1, points, radius).unwrap();
    let initial = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        heat_gaussian(x, 1.0, t0, 0.0)
    });
    let op = EllipticOperator::laplacian(1);
    let evolved = run_semigroup(&initial, &op, t, &StepControl::default()).unwrap();
    let exact = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        heat_gaussian(x, 1.0, t0, t)
    });
    sup_distance(&evolved, &exact).unwrap()
}

#[test]
fn heat_evolution_matches_closed_form() {
    let err = heat_error(161, 8.0, 0.5, 0.5);
    assert!(err <= 5e-3, "heat kernel sup error {err}");
}

#[test]
fn heat_error_shrinks_at_second_order() {
    let coarse = heat_error(81, 8.0, 0.5, 0.5);
    let fine = heat_error(161, 8.0, 0.5, 0.5);
    let order = (coarse / fine).log2();
    assert!(
        order >= 1.8,
        "observed refinement order {order} (errors {coarse} -> {fine})"
    );
}

#[test]
fn semigroup_contracts_sup_distance() {
    let grid = Grid::new(1, 161, 8.0).unwrap();
    let mut r = rng(02_1001);
    let op = EllipticOperator::pucci_plus_op(1, 1.0, 2.0).unwrap();
    for _ in 0..5 {
        let (a1, w1, a2, w2) = (
            r.random_range(0.2..1.0),
            r.random_range(0.8..2.0),
            r.random_range(0.2..1.0),
            r.random_range(0.8..2.0),
        );
        let phi = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
            a1 * (-x[0] * x[0] / (w1 * w1)).exp()
        });
        let psi = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
            a2 * (-(x[0] - 1.0) * (x[0] - 1.0) / (w2 * w2)).exp()
        });
        let ratio =
            semigroup_nonexpansion_check(&phi, &psi, &op, 0.05, &StepControl::default()).unwrap();
        assert!(ratio <= 1.0 + 1e-8, "nonexpansion ratio {ratio}");
    }
}

#[test]
fn source_free_flow_preserves_order() {
    let grid = Grid::new(1, 161, 8.0).unwrap();
    let op = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
    let lower = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        0.6 * (-x[0] * x[0]).exp() - 0.1 * (-(x[0] - 2.0).powi(2)).exp()
    });
    let upper = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        0.6 * (-x[0] * x[0]).exp() + 0.3 * (-(x[0] + 1.0).powi(2) / 4.0).exp()
    });
    let (k, dt) = steps_for(0.1, choose_dt(&grid, 2.0, &StepControl::default()));
    let mut a = lower;
    let mut b = upper;
    let mut violation = 0.0f64;
    for _ in 0..k {
        a = semigroup_step(&a, &op, dt).unwrap();
        b = semigroup_step(&b, &op, dt).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            violation = violation.max(x - y);
        }
    }
    assert!(violation <= 1e-10, "order violation {violation}");
}

#[test]
fn coupled_system_preserves_order_between_trajectories() {
    let grid = Grid::new(1, 161, 8.0).unwrap();
    let op = EllipticOperator::pucci_plus_op(1, 1.0, 2.0).unwrap();
    let coupling = Coupling::Powers { p: 2.0, q: 2.0 };
    let ctl = StepControl::default();
    let sub1 = gaussian(grid, 0.4, 1.0);
    let sub2 = gaussian(grid, 0.3, 1.5);
    let sup1 = gaussian(grid, 0.6, 1.2);
    let sup2 = gaussian(grid, 0.5, 1.5);
    let sub = run_system(
        SystemState::new(sub1, sub2).unwrap(),
        (&op, &op),
        &coupling,
        &ctl,
        0.1,
        5,
    )
    .unwrap();
    let sup = run_system(
        SystemState::new(sup1, sup2).unwrap(),
        (&op, &op),
        &coupling,
        &ctl,
        0.1,
        5,
    )
    .unwrap();
    let violation = comparison_check(&sub, &sup).unwrap();
    assert!(violation <= 1e-10, "system order violation {violation}");
}

#[test]
fn positivity_in_one_dimension() {
    let grid = Grid::new(1, 161, 8.0).unwrap();
    let op = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
    let initial = gaussian(grid, 1.0, 1.0);
    let (k, dt) = steps_for(0.2, choose_dt(&grid, 2.0, &StepControl::default()));
    let mut f = initial;
    let mut min_seen = f64::INFINITY;
    for _ in 0..k {
        f = semigroup_step(&f, &op, dt).unwrap();
        min_seen = min_seen.min(f.min_value());
    }
    assert!(min_seen >= -1e-8, "1d positivity violated: {min_seen}");
}

#[test]
fn positivity_in_two_dimensions_with_cross_stencil() {
    // The 4-point cross Hessian is not a monotone discretization of the
    // eigenvalue-based Pucci operators, so the slack is wider here.
    let grid = Grid::new(2, 61, 4.0).unwrap();
    let op = EllipticOperator::pucci_plus_op(2, 1.0, 2.0).unwrap();
    let initial = gaussian(grid, 1.0, 1.0);
    let (k, dt) = steps_for(0.05, choose_dt(&grid, 2.0, &StepControl::default()));
    let mut f = initial;
    let mut min_seen = f64::INFINITY;
    for _ in 0..k {
        f = semigroup_step(&f, &op, dt).unwrap();
        min_seen = min_seen.min(f.min_value());
    }
    assert!(min_seen >= -1e-6, "2d positivity violated: {min_seen}");
}

#[test]
fn constant_shift_equivariance() {
    let grid = Grid::new(1, 161, 8.0).unwrap();
    let op = EllipticOperator::barenblatt(1, 0.5).unwrap();
    let base = GridField::from_fn(grid, Boundary::Frozen, |x| 0.5 * (-x[0] * x[0]).exp());
    let shift = 3.0;
    let shifted = GridField::from_fn(grid, Boundary::Frozen, |x| {
        0.5 * (-x[0] * x[0]).exp() + shift
    });
    let (k, dt) = steps_for(0.05, choose_dt(&grid, op.big_lambda(), &StepControl::default()));
    let mut a = base;
    let mut b = shifted;
    for _ in 0..k {
        a = semigroup_step(&a, &op, dt).unwrap();
        b = semigroup_step(&b, &op, dt).unwrap();
    }
    let mut gap = 0.0f64;
    for (x, y) in a.values().iter().zip(b.values()) {
        gap = gap.max(((y - x) - shift).abs());
    }
    assert!(gap <= 1e-12, "constant shift gap {gap}");
}

#[test]
fn blowup_is_monotone_in_initial_amplitude() {
    let grid = Grid::new(1, 121, 6.0).unwrap();
    let ops = (
        &EllipticOperator::laplacian(1),
        &EllipticOperator::laplacian(1),
    );
    let coupling = Coupling::Powers { p: 2.0, q: 2.0 };
    let ctl = StepControl::default();
    let run = |amp: f64| {
        run_system(
            SystemState::new(gaussian(grid, amp, 1.0), gaussian(grid, amp, 1.0)).unwrap(),
            ops,
            &coupling,
            &ctl,
            5.0,
            50,
        )
        .unwrap()
    };
    let smaller = run(5.0);
    let larger = run(6.0);
    assert!(smaller.blown_up(), "amplitude 5 should blow up");
    assert!(larger.blown_up(), "amplitude 6 must blow up if 5 does");
    let t_small = smaller.last().blowup_time.unwrap();
    let t_large = larger.last().blowup_time.unwrap();
    assert!(
        t_large <= t_small + smaller.dt,
        "larger data blew up later: {t_large} vs {t_small}"
    );
    let tiny = run(0.05);
    assert!(!tiny.blown_up(), "small data should reach the horizon");
}

#[test]
fn duhamel_tracks_direct_stepping() {
    let grid = Grid::new(1, 161, 8.0).unwrap();
    let op = EllipticOperator::laplacian(1);
    let coupling = Coupling::Powers { p: 2.0, q: 2.0 };
    let u1 = gaussian(grid, 0.5, 1.0);
    let u2 = gaussian(grid, 0.25, 1.4);
    let ctl = StepControl::default();
    let fixed = duhamel_fixed_point(&u1, &u2, (&op, &op), &coupling, 0.05, 1e-8, 20, &ctl)
        .unwrap();
    assert!(fixed.converged);
    assert!(fixed.contraction_factor < 1.0);
    let direct = run_system(
        SystemState::new(u1, u2).unwrap(),
        (&op, &op),
        &coupling,
        &ctl,
        0.05,
        1,
    )
    .unwrap();
    assert_eq!(direct.states.len(), fixed.v1.len());
    let mut gap = 0.0f64;
    for (state, (v1, v2)) in direct.states.iter().zip(fixed.v1.iter().zip(&fixed.v2)) {
        gap = gap.max(sup_distance(&state.u1, v1).unwrap());
        gap = gap.max(sup_distance(&state.u2, v2).unwrap());
    }
    assert!(gap <= 5e-3, "duhamel vs direct gap {gap}");
}

#[test]
fn duhamel_direct_gap_is_first_order_in_dt() {
    let grid = Grid::new(1, 121, 6.0).unwrap();
    let op = EllipticOperator::laplacian(1);
    let coupling = Coupling::Powers { p: 2.0, q: 2.0 };
    let u1 = gaussian(grid, 0.5, 1.0);
    let u2 = gaussian(grid, 0.25, 1.4);
    let gap_at = |cap: Option<f64>| {
        let ctl = StepControl {
            dt_cap: cap,
            ..StepControl::default()
        };
        let fixed =
            duhamel_fixed_point(&u1, &u2, (&op, &op), &coupling, 0.05, 1e-10, 30, &ctl)
                .unwrap();
        let direct = run_system(
            SystemState::new(u1.clone(), u2.clone()).unwrap(),
            (&op, &op),
            &coupling,
            &ctl,
            0.05,
            1,
        )
        .unwrap();
        let mut gap = 0.0f64;
        for (state, (v1, v2)) in direct.states.iter().zip(fixed.v1.iter().zip(&fixed.v2)) {
            gap = gap.max(sup_distance(&state.u1, v1).unwrap());
            gap = gap.max(sup_distance(&state.u2, v2).unwrap());
        }
        (gap, fixed.dt)
    };
    let (gap_coarse, dt_coarse) = gap_at(None);
    let (gap_fine, dt_fine) = gap_at(Some(0.5 * dt_coarse));
    assert!(dt_fine <= 0.5 * dt_coarse * (1.0 + 1e-12));
    let order = (gap_coarse / gap_fine).log2() / (dt_coarse / dt_fine).log2();
    assert!(
        order >= 0.9,
        "observed order {order} (gaps {gap_coarse} -> {gap_fine})"
    );
}

#[test]
fn exponential_rescale_agrees_with_direct_flow() {
    let grid = Grid::new(1, 241, 6.0).unwrap();
    let op1 = EllipticOperator::pucci_plus_op(1, 1.0, 2.0).unwrap();
    let op2 = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
    let u1 = gaussian(grid, 0.3, 1.0);
    let u2 = gaussian(grid, 0.2, 1.2);
    let coupling = Coupling::Powers { p: 2.0, q: 3.0 };
    let ctl = StepControl::default();
    let gap_nu1 =
        exponential_rescale_check(&u1, &u2, (&op1, &op2), &coupling, &ctl, 1.0, 0.2).unwrap();
    assert!(gap_nu1 <= 1e-3, "rescale gap at nu=1: {gap_nu1}");
    let gap_nu0 =
        exponential_rescale_check(&u1, &u2, (&op1, &op2), &coupling, &ctl, 0.0, 0.2).unwrap();
    assert_eq!(gap_nu0, 0.0, "nu=0 must be bitwise identical");
}
