//! Explicit Euler stepping for single equations and weakly coupled systems.
//!
//! The scheme is monotone in one dimension under the CFL bound
//! dt <= h^2 / (2 N Lambda); step choosers apply a safety factor on top.
//! Coupled systems carry blow-up flags: once the sup-norm passes the
//! configured threshold (or leaves the finite range) the state is frozen and
//! further stepping is an error.

use crate::error::{Error, Result};
use crate::grid::{sup_distance, Boundary, Grid, GridField};
use crate::operators::EllipticOperator;

/// Step-size policy and blow-up threshold.
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    /// Fraction of the hard CFL limit used when choosing dt. Values above 1
    /// are accepted (the selfcheck stability probe uses them) but stepping
    /// through the checked entry points will reject the resulting dt.
    pub cfl_safety: f64,
    /// Optional upper bound on dt regardless of the CFL limit.
    pub dt_cap: Option<f64>,
    /// Sup-norm threshold beyond which a system run is flagged blown up.
    pub blowup_threshold: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl_safety: 0.9,
            dt_cap: None,
            blowup_threshold: 1e6,
        }
    }
}

/// Hard parabolic stability limit h^2 / (2 N Lambda).
pub fn cfl_limit(grid: &Grid, big_lambda: f64) -> f64 {
    let h = grid.h();
    h * h / (2.0 * grid.dim() as f64 * big_lambda)
}

/// dt selected by the control: cfl_safety times the hard limit, capped.
pub fn choose_dt(grid: &Grid, big_lambda: f64, ctl: &StepControl) -> f64 {
    let dt = ctl.cfl_safety * cfl_limit(grid, big_lambda);
    match ctl.dt_cap {
        Some(cap) => dt.min(cap),
        None => dt,
    }
}

/// Splits a time interval into equal steps no longer than dt_max.
/// Returns (step count, dt) with count*dt == t_total.
pub fn steps_for(t_total: f64, dt_max: f64) -> (usize, f64) {
    assert!(t_total > 0.0 && dt_max > 0.0);
    let k = (t_total / dt_max).ceil().max(1.0) as usize;
    (k, t_total / k as f64)
}

/// One explicit step of d/dt u + F(x, D^2 u) = 0 on interior nodes; boundary
/// values are left untouched (zero for dirichlet-zero fields, initial data
/// for frozen ones). Rejects dt beyond the hard CFL limit.
pub fn semigroup_step(f: &GridField, op: &EllipticOperator, dt: f64) -> Result<GridField> {
    let limit = cfl_limit(f.grid(), op.big_lambda());
    if dt > limit * (1.0 + 1e-9) {
        return Err(Error::StepRejected { dt, limit });
    }
    semigroup_step_unchecked(f, op, dt)
}

/// [`semigroup_step`] without the CFL guard. Exists so stability experiments
/// (the selfcheck CFL probe) can demonstrate what an oversized step does.
pub fn semigroup_step_unchecked(
    f: &GridField,
    op: &EllipticOperator,
    dt: f64,
) -> Result<GridField> {
    if f.grid().dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: f.grid().dim(),
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let mut out = f.clone();
    let grid = *f.grid();
    for flat in grid.interior_nodes() {
        let hess = f.hessian_unchecked(flat);
        out.values_mut()[flat] = f.value(flat) - dt * op.eval_unchecked(&hess);
    }
    Ok(out)
}

/// Evolves the semigroup for exactly t_total, choosing dt from the control.
pub fn run_semigroup(
    f0: &GridField,
    op: &EllipticOperator,
    t_total: f64,
    ctl: &StepControl,
) -> Result<GridField> {
    let (k, dt) = steps_for(t_total, choose_dt(f0.grid(), op.big_lambda(), ctl));
    let mut f = f0.clone();
    for _ in 0..k {
        f = semigroup_step(&f, op, dt)?;
    }
    Ok(f)
}

/// Evolves k steps of size dt, returning all k+1 mesh snapshots (initial
/// data first). This is the stepping mesh the Duhamel iteration quadrature
/// lives on.
pub fn run_semigroup_mesh(
    f0: &GridField,
    op: &EllipticOperator,
    k: usize,
    dt: f64,
) -> Result<Vec<GridField>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(f0.clone());
    for m in 0..k {
        let next = semigroup_step(&out[m], op, dt)?;
        out.push(next);
    }
    Ok(out)
}

/// Coupling law for the two-component system.
#[derive(Clone, Copy, Debug)]
pub enum Coupling {
    /// Sources |u2|^(p-1) u2 and |u1|^(q-1) u1.
    Powers { p: f64, q: f64 },
    /// Sources disabled; the components evolve independently.
    Off,
}

impl Coupling {
    pub fn validate(&self) -> Result<()> {
        if let Coupling::Powers { p, q } = self {
            if !(p.is_finite() && q.is_finite() && *p >= 1.0 && *q >= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "coupling exponents must be finite and >= 1, got p={p} q={q}"
                )));
            }
        }
        Ok(())
    }
}

/// sign(v) |v|^p, the odd power law. p == 1 returns v unchanged.
#[inline]
pub fn sgn_pow(v: f64, p: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if p == 1.0 {
        v
    } else {
        v.signum() * v.abs().powf(p)
    }
}

/// State of the coupled system at one time.
#[derive(Clone, Debug)]
pub struct SystemState {
    pub u1: GridField,
    pub u2: GridField,
    pub t: f64,
    pub blown_up: bool,
    pub blowup_time: Option<f64>,
}

impl SystemState {
    pub fn new(u1: GridField, u2: GridField) -> Result<Self> {
        if u1.grid() != u2.grid() {
            return Err(Error::MeshMismatch(
                "system components must share a grid".into(),
            ));
        }
        Ok(SystemState {
            u1,
            u2,
            t: 0.0,
            blown_up: false,
            blowup_time: None,
        })
    }

    pub fn sup_norms(&self) -> (f64, f64) {
        (self.u1.sup_norm(), self.u2.sup_norm())
    }
}

fn check_system_inputs(
    state: &SystemState,
    ops: (&EllipticOperator, &EllipticOperator),
) -> Result<()> {
    let dim = state.u1.grid().dim();
    for op in [ops.0, ops.1] {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: op.dim(),
            });
        }
    }
    Ok(())
}

/// One explicit step of the coupled system.
pub fn system_step(
    state: &SystemState,
    ops: (&EllipticOperator, &EllipticOperator),
    coupling: &Coupling,
    dt: f64,
    ctl: &StepControl,
) -> Result<SystemState> {
    system_step_transformed(state, ops, coupling, 0.0, dt, ctl)
}

/// One explicit step of the exponentially rescaled system
///
///   d/dt w1 + F1(x, D^2 w1) + nu w1 - e^((p-1) nu t) |w2|^(p-1) w2 = 0
///
/// (and symmetrically for w2 with exponent q). nu == 0 runs the exact same
/// arithmetic as the untransformed system.
pub fn system_step_transformed(
    state: &SystemState,
    ops: (&EllipticOperator, &EllipticOperator),
    coupling: &Coupling,
    nu: f64,
    dt: f64,
    ctl: &StepControl,
) -> Result<SystemState> {
    if state.blown_up {
        return Err(Error::InvalidState(
            "cannot step a state already flagged blown up".into(),
        ));
    }
    check_system_inputs(state, ops)?;
    coupling.validate()?;
    let limit = cfl_limit(state.u1.grid(), ops.0.big_lambda().max(ops.1.big_lambda()));
    if dt > limit * (1.0 + 1e-9) {
        return Err(Error::StepRejected { dt, limit });
    }

    let (scale1, scale2) = match coupling {
        Coupling::Powers { p, q } => {
            if nu == 0.0 {
                (1.0, 1.0)
            } else {
                (((p - 1.0) * nu * state.t).exp(), ((q - 1.0) * nu * state.t).exp())
            }
        }
        Coupling::Off => (0.0, 0.0),
    };

    let grid = *state.u1.grid();
    let mut next1 = state.u1.clone();
    let mut next2 = state.u2.clone();
    for flat in grid.interior_nodes() {
        let h1 = state.u1.hessian_unchecked(flat);
        let h2 = state.u2.hessian_unchecked(flat);
        let (src1, src2) = match coupling {
            Coupling::Powers { p, q } => (
                scale1 * sgn_pow(state.u2.value(flat), *p),
                scale2 * sgn_pow(state.u1.value(flat), *q),
            ),
            Coupling::Off => (0.0, 0.0),
        };
        let mut rhs1 = -ops.0.eval_unchecked(&h1) + src1;
        let mut rhs2 = -ops.1.eval_unchecked(&h2) + src2;
        if nu != 0.0 {
            rhs1 -= nu * state.u1.value(flat);
            rhs2 -= nu * state.u2.value(flat);
        }
        next1.values_mut()[flat] = state.u1.value(flat) + dt * rhs1;
        next2.values_mut()[flat] = state.u2.value(flat) + dt * rhs2;
    }

    let t = state.t + dt;
    let s1 = next1.sup_norm();
    let s2 = next2.sup_norm();
    let blown = !s1.is_finite() || !s2.is_finite() || s1.max(s2) > ctl.blowup_threshold;
    Ok(SystemState {
        u1: next1,
        u2: next2,
        t,
        blown_up: blown,
        blowup_time: if blown { Some(t) } else { None },
    })
}

/// Snapshotted system run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Snapshots at stride intervals; always contains the initial state and
    /// the final (or blow-up) state.
    pub states: Vec<SystemState>,
    pub dt: f64,
    pub stride: usize,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn last(&self) -> &SystemState {
        self.states.last().expect("trajectory never empty")
    }

    pub fn blown_up(&self) -> bool {
        self.last().blown_up
    }
}

/// Runs the coupled system to t_end (or blow-up), keeping every stride-th
/// state. dt is chosen from the control against the larger Lambda.
pub fn run_system(
    initial: SystemState,
    ops: (&EllipticOperator, &EllipticOperator),
    coupling: &Coupling,
    ctl: &StepControl,
    t_end: f64,
    stride: usize,
) -> Result<Trajectory> {
    run_system_transformed(initial, ops, coupling, 0.0, ctl, t_end, stride)
}

/// [`run_system`] for the exponentially rescaled flow.
pub fn run_system_transformed(
    initial: SystemState,
    ops: (&EllipticOperator, &EllipticOperator),
    coupling: &Coupling,
    nu: f64,
    ctl: &StepControl,
    t_end: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_end must be positive and finite, got {t_end}"
        )));
    }
    let stride = stride.max(1);
    let big = ops.0.big_lambda().max(ops.1.big_lambda());
    let (k, dt) = steps_for(t_end, choose_dt(initial.u1.grid(), big, ctl));
    let mut states = Vec::with_capacity(k / stride + 2);
    let mut current = initial;
    states.push(current.clone());
    let mut steps = 0usize;
    for m in 1..=k {
        current = system_step_transformed(&current, ops, coupling, nu, dt, ctl)?;
        steps = m;
        if current.blown_up || m == k || m % stride == 0 {
            states.push(current.clone());
        }
        if current.blown_up {
            break;
        }
    }
    Ok(Trajectory {
        states,
        dt,
        stride,
        steps_taken: steps,
    })
}

/// Max positive violation of the ordering sub <= sup across two trajectories
/// on the same mesh (both components, all snapshots, all nodes).
pub fn comparison_check(sub: &Trajectory, sup: &Trajectory) -> Result<f64> {
    if sub.states.len() != sup.states.len()
        || (sub.dt - sup.dt).abs() > 1e-15 * sub.dt.max(sup.dt)
        || sub.stride != sup.stride
    {
        return Err(Error::MeshMismatch(
            "comparison requires identical stepping meshes".into(),
        ));
    }
    let mut worst = 0.0f64;
    for (a, b) in sub.states.iter().zip(&sup.states) {
        if (a.t - b.t).abs() > 1e-12 * (1.0 + a.t.abs()) {
            return Err(Error::MeshMismatch(
                "comparison snapshots at different times".into(),
            ));
        }
        if a.u1.grid() != b.u1.grid() {
            return Err(Error::MeshMismatch("comparison grids differ".into()));
        }
        for (x, y) in a.u1.values().iter().zip(b.u1.values()) {
            worst = worst.max(x - y);
        }
        for (x, y) in a.u2.values().iter().zip(b.u2.values()) {
            worst = worst.max(x - y);
        }
    }
    Ok(worst.max(0.0))
}

/// Ratio ||S(t)phi - S(t)psi|| / ||phi - psi|| after evolving both inputs
/// with the same steps. Identical inputs return 0.
pub fn semigroup_nonexpansion_check(
    phi: &GridField,
    psi: &GridField,
    op: &EllipticOperator,
    t_total: f64,
    ctl: &StepControl,
) -> Result<f64> {
    let d0 = sup_distance(phi, psi)?;
    if d0 == 0.0 {
        return Ok(0.0);
    }
    let (k, dt) = steps_for(t_total, choose_dt(phi.grid(), op.big_lambda(), ctl));
    let mut a = phi.clone();
    let mut b = psi.clone();
    for _ in 0..k {
        a = semigroup_step(&a, op, dt)?;
        b = semigroup_step(&b, op, dt)?;
    }
    Ok(sup_distance(&a, &b)? / d0)
}

/// Result of the Duhamel fixed-point iteration on the stepping mesh.
#[derive(Clone, Debug)]
pub struct DuhamelResult {
    /// Component iterates at every mesh time 0, dt, ..., k dt.
    pub v1: Vec<GridField>,
    pub v2: Vec<GridField>,
    pub dt: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest observed ratio of consecutive iterate gaps (0 when fewer than
    /// two gaps were measured).
    pub contraction_factor: f64,
    /// Sup-norm gap between consecutive iterates, one entry per iteration.
    pub gaps: Vec<f64>,
}

fn source_fields(fields: &[GridField], exponent: f64) -> Vec<GridField> {
    fields
        .iter()
        .map(|f| {
            let mut g = f.clone();
            for v in g.values_mut() {
                *v = sgn_pow(*v, exponent);
            }
            g
        })
        .collect()
}

fn axpy(dst: &mut GridField, alpha: f64, src: &GridField) {
    for (d, s) in dst.values_mut().iter_mut().zip(src.values()) {
        *d += alpha * s;
    }
}

/// hom[m] + trapezoid_{s in mesh} S(t_m - s) g(s) ds, propagating each
/// source snapshot forward with the semigroup of `op`.
fn propagate_integral(
    hom: &[GridField],
    g: &[GridField],
    op: &EllipticOperator,
    dt: f64,
) -> Result<Vec<GridField>> {
    let k = hom.len() - 1;
    let mut out: Vec<GridField> = hom.to_vec();
    if k == 0 {
        return Ok(out);
    }
    for j in 0..=k {
        // Trapezoid weight of node j inside the integral over [0, t_m]:
        // one half at the endpoints (j == 0 or j == m), one otherwise.
        if j >= 1 {
            axpy(&mut out[j], 0.5 * dt, &g[j]);
        }
        if j == k {
            break;
        }
        let weight = if j == 0 { 0.5 * dt } else { dt };
        let mut w = g[j].clone();
        for m in (j + 1)..=k {
            w = semigroup_step(&w, op, dt)?;
            axpy(&mut out[m], weight, &w);
        }
    }
    Ok(out)
}

/// Picard iteration for the mild formulation
///
///   v1(t) = S1(t) u10 + int_0^t S1(t-s) |v2(s)|^(p-1) v2(s) ds
///   v2(t) = S2(t) u20 + int_0^t S2(t-s) |v1(s)|^(q-1) v1(s) ds
///
/// on the stepping mesh with trapezoid quadrature. Starts from the
/// homogeneous pair (S1 u10, S2 u20). Errors with fixed-point-diverged when
/// max_iter is exhausted and the measured contraction factor is >= 1.
/// The control's dt_cap refines the stepping mesh (and the quadrature with
/// it), which is how convergence-order studies shrink dt.
#[allow(clippy::too_many_arguments)]
pub fn duhamel_fixed_point(
    u10: &GridField,
    u20: &GridField,
    ops: (&EllipticOperator, &EllipticOperator),
    coupling: &Coupling,
    t_total: f64,
    tol: f64,
    max_iter: usize,
    ctl: &StepControl,
) -> Result<DuhamelResult> {
    if u10.grid() != u20.grid() {
        return Err(Error::MeshMismatch(
            "components must share a grid".into(),
        ));
    }
    if !(t_total > 0.0 && t_total.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_total must be positive and finite, got {t_total}"
        )));
    }
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "tolerance must be positive and max_iter nonzero".into(),
        ));
    }
    coupling.validate()?;
    let big = ops.0.big_lambda().max(ops.1.big_lambda());
    let (k, dt) = steps_for(t_total, choose_dt(u10.grid(), big, ctl));
    let hom1 = run_semigroup_mesh(u10, ops.0, k, dt)?;
    let hom2 = run_semigroup_mesh(u20, ops.1, k, dt)?;

    let mut v1 = hom1.clone();
    let mut v2 = hom2.clone();
    let mut gaps: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        let (new_v1, new_v2) = match coupling {
            Coupling::Powers { p, q } => {
                let g1 = source_fields(&v2, *p);
                let g2 = source_fields(&v1, *q);
                (
                    propagate_integral(&hom1, &g1, ops.0, dt)?,
                    propagate_integral(&hom2, &g2, ops.1, dt)?,
                )
            }
            Coupling::Off => (hom1.clone(), hom2.clone()),
        };
        let mut gap = 0.0f64;
        for m in 0..=k {
            gap = gap.max(sup_distance(&new_v1[m], &v1[m])?);
            gap = gap.max(sup_distance(&new_v2[m], &v2[m])?);
        }
        v1 = new_v1;
        v2 = new_v2;
        gaps.push(gap);
        if gap < tol {
            converged = true;
            break;
        }
    }

    let mut factor = 0.0f64;
    for w in gaps.windows(2) {
        if w[0] > 0.0 {
            factor = factor.max(w[1] / w[0]);
        }
    }
    if !converged && factor >= 1.0 {
        return Err(Error::FixedPointDiverged {
            factor,
            iterations,
        });
    }
    Ok(DuhamelResult {
        v1,
        v2,
        dt,
        iterations,
        converged,
        contraction_factor: factor,
        gaps,
    })
}

/// Runs the direct system and the exponentially rescaled system from the
/// same data and returns the largest gap max_t || e^(-nu t) u_i(t) - w_i(t) ||.
/// nu == 0 compares bitwise-identical runs, so the gap is exactly zero.
pub fn exponential_rescale_check(
    u10: &GridField,
    u20: &GridField,
    ops: (&EllipticOperator, &EllipticOperator),
    coupling: &Coupling,
    ctl: &StepControl,
    nu: f64,
    t_total: f64,
) -> Result<f64> {
    let direct = run_system(
        SystemState::new(u10.clone(), u20.clone())?,
        ops,
        coupling,
        ctl,
        t_total,
        1,
    )?;
    let rescaled = run_system_transformed(
        SystemState::new(u10.clone(), u20.clone())?,
        ops,
        coupling,
        nu,
        ctl,
        t_total,
        1,
    )?;
    if direct.blown_up() || rescaled.blown_up() {
        return Err(Error::InvalidState(
            "blow-up during exponential rescale check".into(),
        ));
    }
    let mut gap = 0.0f64;
    for (a, b) in direct.states.iter().zip(&rescaled.states) {
        let decay = (-nu * a.t).exp();
        for (x, y) in a.u1.values().iter().zip(b.u1.values()) {
            gap = gap.max((decay * x - y).abs());
        }
        for (x, y) in a.u2.values().iter().zip(b.u2.values()) {
            gap = gap.max((decay * x - y).abs());
        }
    }
    Ok(gap)
}

/// Convenience Gaussian amplitude * exp(-|x|^2 / width^2) as initial data.
pub fn gaussian_field(
    grid: Grid,
    boundary: Boundary,
    amplitude: f64,
    width: f64,
) -> GridField {
    GridField::from_fn(grid, boundary, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        amplitude * (-r2 / (width * width)).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn grid1d() -> Grid {
        Grid::new(1, 81, 4.0).unwrap()
    }

    #[test]
    fn cfl_limits() {
        let g = Grid::new(1, 201, 10.0).unwrap();
        let h = g.h();
        assert!((cfl_limit(&g, 2.0) - h * h / 4.0).abs() < 1e-15);
        let ctl = StepControl::default();
        assert!((choose_dt(&g, 2.0, &ctl) - 0.9 * h * h / 4.0).abs() < 1e-15);
        let capped = StepControl {
            dt_cap: Some(1e-6),
            ..StepControl::default()
        };
        assert_eq!(choose_dt(&g, 2.0, &capped), 1e-6);
    }

    #[test]
    fn oversized_step_rejected() {
        let g = grid1d();
        let f = gaussian_field(g, Boundary::DirichletZero, 1.0, 1.0);
        let op = EllipticOperator::laplacian(1);
        let bad = 1.01 * cfl_limit(&g, 1.0);
        assert!(matches!(
            semigroup_step(&f, &op, bad),
            Err(Error::StepRejected { .. })
        ));
        assert!(semigroup_step_unchecked(&f, &op, bad).is_ok());
    }

    #[test]
    fn constant_field_is_stationary() {
        let g = grid1d();
        let f = GridField::from_fn(g, Boundary::Frozen, |_| 2.5);
        let op = EllipticOperator::pucci_plus_op(1, 1.0, 2.0).unwrap();
        let dt = choose_dt(&g, 2.0, &StepControl::default());
        let next = semigroup_step(&f, &op, dt).unwrap();
        assert_eq!(sup_distance(&f, &next).unwrap(), 0.0);
    }

    #[test]
    fn steps_cover_interval_exactly() {
        let (k, dt) = steps_for(0.5, 1.125e-3);
        assert_eq!(k, 445);
        assert!(dt <= 1.125e-3);
        assert!((k as f64 * dt - 0.5).abs() < 1e-15);
    }

    #[test]
    fn system_blowup_flagging_and_freeze() {
        let g = grid1d();
        let u1 = gaussian_field(g, Boundary::DirichletZero, 5.0, 1.0);
        let u2 = u1.clone();
        let ops = (
            &EllipticOperator::laplacian(1),
            &EllipticOperator::laplacian(1),
        );
        let ctl = StepControl::default();
        let coupling = Coupling::Powers { p: 2.0, q: 2.0 };
        let traj = run_system(
            SystemState::new(u1, u2).unwrap(),
            ops,
            &coupling,
            &ctl,
            10.0,
            1000,
        )
        .unwrap();
        assert!(traj.blown_up());
        let last = traj.last();
        assert!(last.blowup_time.is_some());
        assert!(last.blowup_time.unwrap() <= 10.0);
        assert!(matches!(
            system_step(last, ops, &coupling, traj.dt, &ctl),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn coupling_off_matches_semigroup_composition() {
        let g = grid1d();
        let u1 = gaussian_field(g, Boundary::DirichletZero, 0.8, 1.0);
        let u2 = gaussian_field(g, Boundary::DirichletZero, 0.4, 1.5);
        let op1 = EllipticOperator::laplacian(1);
        let op2 = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
        let ctl = StepControl::default();
        let state = SystemState::new(u1.clone(), u2.clone()).unwrap();
        let dt = choose_dt(&g, 2.0, &ctl);
        let next = system_step(&state, (&op1, &op2), &Coupling::Off, dt, &ctl).unwrap();
        let expect1 = semigroup_step(&u1, &op1, dt).unwrap();
        let expect2 = semigroup_step(&u2, &op2, dt).unwrap();
        assert_eq!(sup_distance(&next.u1, &expect1).unwrap(), 0.0);
        assert_eq!(sup_distance(&next.u2, &expect2).unwrap(), 0.0);
    }

    #[test]
    fn duhamel_zero_data_converges_immediately() {
        let g = grid1d();
        let zero = GridField::zeros(g, Boundary::DirichletZero);
        let op = EllipticOperator::laplacian(1);
        let r = duhamel_fixed_point(
            &zero,
            &zero,
            (&op, &op),
            &Coupling::Powers { p: 2.0, q: 2.0 },
            0.02,
            1e-10,
            5,
            &StepControl::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert!(r.v1.iter().all(|f| f.sup_norm() == 0.0));
    }

    #[test]
    fn duhamel_coupling_off_equals_semigroup_exactly() {
        let g = grid1d();
        let u1 = gaussian_field(g, Boundary::DirichletZero, 0.5, 1.0);
        let u2 = gaussian_field(g, Boundary::DirichletZero, 0.25, 0.8);
        let op = EllipticOperator::laplacian(1);
        let r = duhamel_fixed_point(
            &u1,
            &u2,
            (&op, &op),
            &Coupling::Off,
            0.02,
            1e-12,
            3,
            &StepControl::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        let (k, dt) = steps_for(0.02, choose_dt(&g, 1.0, &StepControl::default()));
        let hom = run_semigroup_mesh(&u1, &op, k, dt).unwrap();
        for (a, b) in r.v1.iter().zip(&hom) {
            assert_eq!(sup_distance(a, b).unwrap(), 0.0);
        }
    }

    #[test]
    fn rescale_check_zero_nu_is_exact() {
        let g = grid1d();
        let u1 = gaussian_field(g, Boundary::DirichletZero, 0.3, 1.0);
        let u2 = gaussian_field(g, Boundary::DirichletZero, 0.2, 1.0);
        let op = EllipticOperator::pucci_minus_op(1, 1.0, 2.0).unwrap();
        let gap = exponential_rescale_check(
            &u1,
            &u2,
            (&op, &op),
            &Coupling::Powers { p: 2.0, q: 2.0 },
            &StepControl::default(),
            0.0,
            0.05,
        )
        .unwrap();
        assert_eq!(gap, 0.0);
    }

    #[test]
    fn sgn_pow_odd_and_identity() {
        assert_eq!(sgn_pow(2.0, 3.0), 8.0);
        assert_eq!(sgn_pow(-2.0, 3.0), -8.0);
        assert_eq!(sgn_pow(0.0, 2.0), 0.0);
        let v = 0.37;
        assert_eq!(sgn_pow(v, 1.0), v);
        assert_eq!(sgn_pow(-v, 2.0), -(v * v));
    }
}
