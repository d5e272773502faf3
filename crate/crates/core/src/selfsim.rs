//! Self-similar profiles via the rescaled flow.
//!
//! Substituting u(x, t) = t^(-alpha) psi(x / sqrt(t)) into d/dt u + F(D^2 u) = 0
//! and passing to logarithmic time turns decay rates into eigenvalues:
//! the pair (alpha, psi) satisfies
//!
//!   F(D^2 psi) - (1/2) y . D psi = alpha psi,   psi > 0, psi -> 0 at infinity,
//!
//! and the rescaled evolution d/dtau w + F(D^2 w) - (1/2) y . D w = 0 damps any
//! positive initial profile like e^(-alpha tau) psi. [`power_iterate`] runs
//! that flow with periodic sup-norm renormalization and reads alpha off the
//! per-block decay. Positive 1-homogeneous operators keep the iteration
//! scale-free, so the alpha history is insensitive to the guess amplitude.
//!
//! Profiles are expected to sit between Gaussian envelopes: fitted decay rate
//! delta_fit (from regressing ln psi against |y|^2) should land in
//! [0.9/(4 Lambda), 1.1/(4 lambda)]. [`fit_gaussian_envelope`] measures it,
//! [`envelope_check`] renders the verdict.

use crate::error::{Error, Result};
use crate::evolve::cfl_limit;
use crate::grid::{Boundary, Grid, GridField};
use crate::operators::EllipticOperator;

/// Gaussian envelope data for a decaying profile.
///
/// The fitted pair (delta_fit, c_fit) comes from a least-squares fit of
/// ln psi against |y|^2 over the annulus 0.2 R <= |y| <= 0.8 R. The upper
/// constant is extremal over all interior nodes, the lower constant over the
/// ball |y| <= 0.8 R (boundary clipping makes the outermost shell decay
/// faster than any Gaussian).
#[derive(Clone, Copy, Debug)]
pub struct GaussianEnvelope {
    /// Required decay rate for the upper bound, 0.9 / (4 Lambda).
    pub delta_upper: f64,
    /// sup of psi(y) e^(delta_upper |y|^2) over interior nodes.
    pub c_upper: f64,
    /// Fastest admissible decay rate, 1.1 / (4 lambda).
    pub delta_lower: f64,
    /// inf of psi(y) e^(delta_lower |y|^2) over |y| <= 0.8 R.
    pub c_lower: f64,
    /// Fitted decay rate of the profile itself.
    pub delta_fit: f64,
    /// Fitted amplitude of the profile itself.
    pub c_fit: f64,
}

/// Converged (or best-effort) eigenvalue/profile pair of the rescaled flow.
#[derive(Clone, Debug)]
pub struct EigenPair {
    /// Decay rate estimate from the final renormalization block.
    pub alpha: f64,
    /// Profile, sup-normalized to 1.
    pub psi: GridField,
    /// Per-block decay estimates, in order.
    pub alpha_history: Vec<f64>,
    /// Whether consecutive estimates settled within the tolerance.
    pub converged: bool,
    /// Envelope fitted with the operator's own ellipticity constants.
    pub envelope: GaussianEnvelope,
    /// Convergence tolerance that was applied.
    pub tol: f64,
    /// Total rescaled time integrated.
    pub tau_total: f64,
}

/// Options for [`power_iterate`].
#[derive(Clone, Debug)]
pub struct PowerOpts {
    /// Stop once consecutive block estimates differ by less than this.
    pub tol: f64,
    /// Give up (converged = false) past this much rescaled time.
    pub max_tau: f64,
    /// Renormalize and record an estimate every this much rescaled time.
    pub renorm_interval: f64,
    /// Never declare convergence before this much rescaled time; filters the
    /// initial transient while the guess sheds non-principal modes.
    pub min_tau: f64,
    /// Fraction of the stability limit used for dtau.
    pub cfl_safety: f64,
    /// Initial profile; default is exp(-|y|^2 / 4) with zero boundary.
    pub guess: Option<GridField>,
}

impl Default for PowerOpts {
    fn default() -> Self {
        PowerOpts {
            tol: 1e-4,
            max_tau: 60.0,
            renorm_interval: 0.5,
            min_tau: 4.0,
            cfl_safety: 0.9,
            guess: None,
        }
    }
}

/// Stability precondition of the rescaled step:
/// dtau <= 0.9 min(h^2 / (2 N Lambda), 2h / R), covering diffusion and the
/// upwind drift whose speed reaches R/2 at the corners.
pub fn rescaled_limit(grid: &Grid, big_lambda: f64) -> f64 {
    let h = grid.h();
    0.9 * cfl_limit(grid, big_lambda).min(2.0 * h / grid.radius())
}

/// dtau from the combined bound safety / (2 N Lambda / h^2 + N R / (2h)).
/// The sum in the denominator makes this stricter than [`rescaled_limit`]
/// at safety 0.9 and keeps every stencil coefficient of the update
/// nonnegative (monotone scheme).
pub fn rescaled_dtau(grid: &Grid, big_lambda: f64, safety: f64) -> f64 {
    let h = grid.h();
    let n = grid.dim() as f64;
    safety / (2.0 * n * big_lambda / (h * h) + n * grid.radius() / (2.0 * h))
}

/// One explicit step of d/dtau w + F(D^2 w) - (1/2) y . D w = 0.
/// The drift term is discretized upwind (one-sided toward the side the
/// characteristic comes from), the diffusion term centered.
pub fn rescaled_step(w: &GridField, op: &EllipticOperator, dtau: f64) -> Result<GridField> {
    let grid = *w.grid();
    if grid.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: grid.dim(),
        });
    }
    let limit = rescaled_limit(&grid, op.big_lambda());
    if dtau > limit * (1.0 + 1e-9) {
        return Err(Error::StepRejected { dt: dtau, limit });
    }
    let dim = grid.dim();
    let mut out = w.clone();
    let mut drift = [0.0f64; 3];
    for flat in grid.interior_nodes() {
        let xs = grid.coords(flat);
        for a in 0..dim {
            drift[a] = 0.5 * xs[a];
        }
        let advect = w.gradient_upwind_unchecked(flat, &drift[..dim]);
        let hess = w.hessian_unchecked(flat);
        out.values_mut()[flat] = w.value(flat) + dtau * (advect - op.eval_unchecked(&hess));
    }
    Ok(out)
}

/// Runs the renormalized rescaled flow until the per-block decay estimate
/// settles. Returns the eigenpair with converged = false (rather than an
/// error) when max_tau runs out first; degenerate profiles (sign change,
/// vanishing, non-finite) are errors.
pub fn power_iterate(
    op: &EllipticOperator,
    grid: Grid,
    opts: &PowerOpts,
) -> Result<EigenPair> {
    if grid.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: grid.dim(),
        });
    }
    if !(opts.tol > 0.0 && opts.renorm_interval > 0.0 && opts.max_tau > opts.renorm_interval) {
        return Err(Error::InvalidArgument(
            "power iteration needs tol > 0 and max_tau > renorm_interval > 0".into(),
        ));
    }
    let mut w = match &opts.guess {
        Some(g) => {
            if g.grid() != &grid {
                return Err(Error::MeshMismatch(
                    "guess grid differs from requested grid".into(),
                ));
            }
            g.clone()
        }
        None => GridField::from_fn(grid, Boundary::DirichletZero, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (-r2 / 4.0).exp()
        }),
    };
    let sup0 = w.sup_norm();
    if !(sup0.is_finite() && sup0 > 0.0) {
        return Err(Error::DegenerateProfile(
            "initial guess has no positive part".into(),
        ));
    }
    w.scale_in_place(1.0 / sup0);

    let dtau = rescaled_dtau(&grid, op.big_lambda(), opts.cfl_safety);
    let steps_per_block = (opts.renorm_interval / dtau).ceil().max(1.0) as usize;
    let block_tau = steps_per_block as f64 * dtau;

    let mut alpha_history = Vec::new();
    let mut tau_total = 0.0;
    let mut converged = false;
    let mut prev_alpha: Option<f64> = None;

    while tau_total < opts.max_tau {
        for _ in 0..steps_per_block {
            w = rescaled_step(&w, op, dtau)?;
        }
        tau_total += block_tau;
        let sup = w.sup_norm();
        if !sup.is_finite() || sup <= 0.0 {
            return Err(Error::DegenerateProfile(format!(
                "profile sup-norm became {sup} at tau = {tau_total}"
            )));
        }
        if w.min_interior() < -1e-6 * sup {
            return Err(Error::DegenerateProfile(format!(
                "profile changed sign at tau = {tau_total}"
            )));
        }
        let alpha = -sup.ln() / block_tau;
        alpha_history.push(alpha);
        w.scale_in_place(1.0 / sup);
        if let Some(pa) = prev_alpha {
            if (alpha - pa).abs() < opts.tol && tau_total >= opts.min_tau {
                converged = true;
                break;
            }
        }
        prev_alpha = Some(alpha);
    }

    let alpha = *alpha_history
        .last()
        .ok_or_else(|| Error::InvalidArgument("max_tau shorter than one block".into()))?;
    let envelope = fit_gaussian_envelope(&w, op.lambda(), op.big_lambda())?;
    Ok(EigenPair {
        alpha,
        psi: w,
        alpha_history,
        converged,
        envelope,
        tol: opts.tol,
        tau_total,
    })
}

/// Fits Gaussian envelope data to a decaying positive profile; see
/// [`GaussianEnvelope`] for the conventions.
pub fn fit_gaussian_envelope(
    psi: &GridField,
    lambda: f64,
    big_lambda: f64,
) -> Result<GaussianEnvelope> {
    if !(lambda > 0.0 && big_lambda >= lambda && big_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda <= Lambda, got lambda={lambda} Lambda={big_lambda}"
        )));
    }
    let grid = psi.grid();
    let r = grid.radius();
    let (lo2, hi2) = ((0.2 * r) * (0.2 * r), (0.8 * r) * (0.8 * r));
    let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0usize, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for flat in grid.interior_nodes() {
        let r2 = grid.radius_sq(flat);
        if r2 < lo2 || r2 > hi2 {
            continue;
        }
        let v = psi.value(flat);
        if v < 1e-290 {
            continue;
        }
        let y = v.ln();
        n += 1;
        sx += r2;
        sy += y;
        sxx += r2 * r2;
        sxy += r2 * y;
    }
    if n < 8 {
        return Err(Error::DegenerateProfile(
            "too few positive samples in the envelope fit window".into(),
        ));
    }
    let nf = n as f64;
    let denom = nf * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::DegenerateProfile(
            "degenerate regression in envelope fit".into(),
        ));
    }
    let slope = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / nf;
    let delta_fit = -slope;
    let c_fit = intercept.exp();

    let delta_upper = 0.9 / (4.0 * big_lambda);
    let delta_lower = 1.1 / (4.0 * lambda);
    let mut c_upper = f64::NEG_INFINITY;
    let mut c_lower = f64::INFINITY;
    let mut lower_seen = false;
    for flat in grid.interior_nodes() {
        let r2 = grid.radius_sq(flat);
        let v = psi.value(flat);
        c_upper = c_upper.max(v * (delta_upper * r2).exp());
        if r2 <= hi2 && v > 0.0 {
            c_lower = c_lower.min(v * (delta_lower * r2).exp());
            lower_seen = true;
        }
    }
    if !lower_seen {
        return Err(Error::DegenerateProfile(
            "no positive values inside the lower-envelope window".into(),
        ));
    }
    Ok(GaussianEnvelope {
        delta_upper,
        c_upper,
        delta_lower,
        c_lower,
        delta_fit,
        c_fit,
    })
}

/// Verdict of the envelope test for a profile against given ellipticity
/// constants.
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeReport {
    pub delta_upper: f64,
    pub delta_lower: f64,
    pub delta_fit: f64,
    /// Profile decays at least as fast as the upper envelope requires.
    pub upper_ok: bool,
    /// Profile decays no faster than the lower envelope allows.
    pub lower_ok: bool,
    pub pass: bool,
}

/// Checks delta_upper <= delta_fit <= delta_lower for the pair's profile,
/// with thresholds derived from the supplied constants.
pub fn envelope_check(pair: &EigenPair, lambda: f64, big_lambda: f64) -> Result<EnvelopeReport> {
    if !(lambda > 0.0 && big_lambda >= lambda && big_lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lambda <= Lambda, got lambda={lambda} Lambda={big_lambda}"
        )));
    }
    let delta_upper = 0.9 / (4.0 * big_lambda);
    let delta_lower = 1.1 / (4.0 * lambda);
    let delta_fit = pair.envelope.delta_fit;
    let upper_ok = delta_fit >= delta_upper;
    let lower_ok = delta_fit <= delta_lower;
    Ok(EnvelopeReport {
        delta_upper,
        delta_lower,
        delta_fit,
        upper_ok,
        lower_ok,
        pass: upper_ok && lower_ok,
    })
}

/// Samples u(x, t) = t^(-alpha) psi(x / sqrt(t)) on the profile's own grid.
/// Points that rescale outside the grid use the fitted envelope
/// c_fit e^(-delta_fit |y|^2). At t = 1 this returns psi bitwise.
pub fn self_similar_field(pair: &EigenPair, t: f64) -> Result<GridField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "self-similar sample time must be positive, got {t}"
        )));
    }
    let grid = *pair.psi.grid();
    let dim = grid.dim();
    let scale = t.powf(-pair.alpha);
    let sqrt_t = t.sqrt();
    let env = &pair.envelope;
    let mut values = Vec::with_capacity(grid.node_count());
    let mut y = [0.0f64; 3];
    for flat in 0..grid.node_count() {
        let xs = grid.coords(flat);
        let mut r2 = 0.0;
        for a in 0..dim {
            y[a] = xs[a] / sqrt_t;
            r2 += y[a] * y[a];
        }
        let v = match pair.psi.value_at(&y[..dim]) {
            Some(v) => v,
            None => env.c_fit * (-env.delta_fit * r2).exp(),
        };
        values.push(scale * v);
    }
    GridField::from_values(grid, Boundary::Frozen, values)
}

/// Sup of |d/dt u + F(D^2 u)| for the self-similar extension of the pair,
/// measured at time t over the window |x| <= 0.6 R min(sqrt(t), 1). The time
/// derivative is a centered difference with step dt_t.
pub fn self_similar_residual(
    pair: &EigenPair,
    op: &EllipticOperator,
    t: f64,
    dt_t: f64,
) -> Result<f64> {
    if !(dt_t > 0.0 && t > 2.0 * dt_t) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dt_t < t/2, got t={t} dt_t={dt_t}"
        )));
    }
    let u_mid = self_similar_field(pair, t)?;
    let u_plus = self_similar_field(pair, t + dt_t)?;
    let u_minus = self_similar_field(pair, t - dt_t)?;
    let grid = u_mid.grid();
    let window = 0.6 * grid.radius() * t.sqrt().min(1.0);
    let window2 = window * window;
    let mut worst = 0.0f64;
    let mut seen = false;
    for flat in grid.interior_nodes() {
        if grid.radius_sq(flat) > window2 {
            continue;
        }
        seen = true;
        let ut = (u_plus.value(flat) - u_minus.value(flat)) / (2.0 * dt_t);
        let hess = u_mid.hessian_unchecked(flat);
        worst = worst.max((ut + op.eval_unchecked(&hess)).abs());
    }
    if !seen {
        return Err(Error::InvalidArgument(
            "residual window contains no interior nodes".into(),
        ));
    }
    Ok(worst)
}
