//! Oracle tests for the rescaled-flow eigenvalue solver: the heat case has a
//! closed-form profile and decay rate, the Pucci bracket pins the ordering,
//! and the Gaussian envelope fit is exercised with positive and negative
//! control profiles.

mod common;

use fnparab::grid::{Boundary, Grid, GridField};
use fnparab::operators::EllipticOperator;
use fnparab::selfsim::{
    envelope_check, fit_gaussian_envelope, power_iterate, self_similar_field,
    self_similar_residual, EigenPair, PowerOpts,
};

fn eigen_grid() -> Grid {
    Grid::new(1, 241, 6.0).unwrap()
}

fn synthetic_pair(psi: GridField, lambda: f64, big_lambda: f64) -> EigenPair {
    let envelope = fit_gaussian_envelope(&psi, lambda, big_lambda).unwrap();
    EigenPair {
        alpha: 0.5,
        psi,
        alpha_history: vec![0.5],
        converged: true,
        envelope,
        tol: 1e-4,
        tau_total: 0.0,
    }
}

#[test]
fn heat_eigenpair_matches_exact_gaussian_profile() {
    let op = EllipticOperator::laplacian(1);
    let pair = power_iterate(&op, eigen_grid(), &PowerOpts::default()).unwrap();
    assert!(pair.converged);
    assert!(
        (0.475..=0.525).contains(&pair.alpha),
        "heat decay rate {}",
        pair.alpha
    );
    let mut profile_err = 0.0f64;
    for flat in 0..pair.psi.grid().node_count() {
        let y = pair.psi.grid().coords(flat)[0];
        profile_err = profile_err.max((pair.psi.value(flat) - (-y * y / 4.0).exp()).abs());
    }
    assert!(profile_err <= 2e-2, "profile sup error {profile_err}");
    let report = envelope_check(&pair, 1.0, 1.0).unwrap();
    assert!(report.pass, "heat envelope: {report:?}");

    // u(x, t) = t^(-alpha) psi(x / sqrt t) should track the heat kernel shape.
    let t = 2.0;
    let field = self_similar_field(&pair, t).unwrap();
    let scale = t.powf(-pair.alpha);
    let mut field_err = 0.0f64;
    for flat in 0..field.grid().node_count() {
        let x = field.grid().coords(flat)[0];
        if x.abs() <= 3.0 {
            let exact = scale * (-x * x / (4.0 * t)).exp();
            field_err = field_err.max((field.value(flat) - exact).abs());
        }
    }
    assert!(
        field_err <= 2.5e-2 * scale,
        "self-similar field error {field_err}"
    );

    for t in [1.0, 1.5, 2.0] {
        let resid = self_similar_residual(&pair, &op, t, 1e-3).unwrap();
        assert!(resid <= 5e-2, "residual {resid} at t = {t}");
    }
}

#[test]
fn pucci_bracket_orders_decay_rates() {
    let grid = eigen_grid();
    let minus = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
    let plus = EllipticOperator::pucci_plus_op(1, 1.0, 2.0).unwrap();
    let lap = EllipticOperator::laplacian(1);
    let pair_minus = power_iterate(&minus, grid, &PowerOpts::default()).unwrap();
    let pair_plus = power_iterate(&plus, grid, &PowerOpts::default()).unwrap();
    let pair_lap = power_iterate(&lap, grid, &PowerOpts::default()).unwrap();
    assert!(pair_minus.converged && pair_plus.converged && pair_lap.converged);
    assert!(
        pair_minus.alpha + 0.05 <= pair_lap.alpha,
        "minus {} vs heat {}",
        pair_minus.alpha,
        pair_lap.alpha
    );
    assert!(
        pair_lap.alpha + 0.05 <= pair_plus.alpha,
        "heat {} vs plus {}",
        pair_lap.alpha,
        pair_plus.alpha
    );
    assert!((0.24..=0.5).contains(&pair_minus.alpha));
    assert!(pair_plus.alpha <= 1.01);
    assert!(envelope_check(&pair_minus, 1.0, 2.0).unwrap().pass);
    assert!(envelope_check(&pair_plus, 1.0, 2.0).unwrap().pass);
}

#[test]
fn convex_operator_rate_dominates_heat() {
    // Maximal operators are convex, so their rate sits at or above N/2.
    let op = EllipticOperator::barenblatt(1, 0.5).unwrap();
    let pair = power_iterate(&op, eigen_grid(), &PowerOpts::default()).unwrap();
    assert!(pair.converged);
    assert!(pair.alpha >= 0.5 - 0.05, "barenblatt rate {}", pair.alpha);
    assert!(envelope_check(&pair, op.lambda(), op.big_lambda()).unwrap().pass);
}

#[test]
fn alpha_history_ignores_guess_amplitude() {
    let grid = eigen_grid();
    let op = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
    let opts_short = PowerOpts {
        max_tau: 10.0,
        ..PowerOpts::default()
    };
    let reference = power_iterate(&op, grid, &opts_short).unwrap();
    let scaled_guess = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        3.7 * (-x[0] * x[0] / 4.0).exp()
    });
    let opts_scaled = PowerOpts {
        guess: Some(scaled_guess),
        ..opts_short
    };
    let rerun = power_iterate(&op, grid, &opts_scaled).unwrap();
    assert_eq!(reference.alpha_history.len(), rerun.alpha_history.len());
    for (a, b) in reference.alpha_history.iter().zip(&rerun.alpha_history) {
        assert!((a - b).abs() <= 1e-10, "history drift {} vs {}", a, b);
    }
}

#[test]
fn profiles_are_positive_and_radially_monotone() {
    let pair = power_iterate(
        &EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap(),
        eigen_grid(),
        &PowerOpts::default(),
    )
    .unwrap();
    assert!(pair.psi.min_interior() >= -1e-12, "negative profile value");
    let n = pair.psi.grid().points();
    let mid = n / 2;
    for i in mid..n - 1 {
        assert!(
            pair.psi.value(i + 1) <= pair.psi.value(i) + 1e-8,
            "profile rises at node {i}"
        );
    }
    for i in (1..=mid).rev() {
        assert!(
            pair.psi.value(i - 1) <= pair.psi.value(i) + 1e-8,
            "profile rises at node {i}"
        );
    }
}

#[test]
fn envelope_fit_recovers_an_exact_gaussian() {
    let grid = eigen_grid();
    let psi = GridField::from_fn(grid, Boundary::DirichletZero, |x| {
        (-0.25 * x[0] * x[0]).exp()
    });
    let pair = synthetic_pair(psi, 1.0, 1.0);
    assert!(
        (pair.envelope.delta_fit - 0.25).abs() <= 1e-3,
        "fit slope {}",
        pair.envelope.delta_fit
    );
    let report = envelope_check(&pair, 1.0, 1.0).unwrap();
    assert!(report.upper_ok && report.lower_ok && report.pass);
}

#[test]
fn exponential_tail_fails_the_upper_envelope() {
    let grid = eigen_grid();
    let psi = GridField::from_fn(grid, Boundary::DirichletZero, |x| (-x[0].abs()).exp());
    let pair = synthetic_pair(psi, 1.0, 1.0);
    let report = envelope_check(&pair, 1.0, 1.0).unwrap();
    assert!(
        !report.upper_ok,
        "slowly decaying tail must fail the upper envelope: {report:?}"
    );
    assert!(!report.pass);
}
