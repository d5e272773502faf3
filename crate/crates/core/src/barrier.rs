//! Self-similar barrier construction and global-existence certificates.
//!
//! For the coupled system with power sources (exponents p and q) and
//! eigenpairs (alpha1, psi1), (alpha2, psi2) of the component operators,
//! the candidate supersolution pair is
//!
//!   ubar1(x, t) = eps  (t+1)^a phi1(x, t+1),
//!   ubar2(x, t) = eps~ (t+1)^b phi2(x, t+1),
//!
//! with phi_i(x, s) = s^(-alpha_i) psi_i(x / sqrt(s)) and growth corrections
//!
//!   a = alpha1 - (p+1)/(pq-1),   b = alpha2 - (q+1)/(pq-1).
//!
//! The time exponents then cancel exactly:
//!
//!   a - 1 - alpha1 - p b + p alpha2 = 0,
//!   b - 1 - alpha2 - q a + q alpha1 = 0,
//!
//! so ubar1 is a supersolution once eps^(p-1) r1 <= a and eps^(q-1) r2 <= b,
//! where r1 = sup psi2^p / psi1 and r2 = sup psi1^q / psi2. Admissibility
//! asks for a, b > 0 (supercritical exponents), coupling powers beyond the
//! ellipticity mismatch, and envelope decay rates that keep r1, r2 finite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{run_system, sgn_pow, Coupling, StepControl, SystemState};
use crate::field_io::fingerprint;
use crate::grid::{sup_ratio_within, GridField};
use crate::operators::EllipticOperator;
use crate::selfsim::{self_similar_field, EigenPair};

/// Times at which supersolution residuals are probed by default.
pub const DEFAULT_T_SAMPLES: [f64; 6] = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0];

/// Minimum value of min(a, b) before a certificate attempt is made. Keeps
/// near-critical cells (where the sign of a or b is inside the eigenvalue
/// tolerance) out of the certified set.
pub const CERT_MARGIN: f64 = 0.01;

/// Growth corrections (a, b) for exponents (p, q) and decay rates
/// (alpha1, alpha2). Requires pq > 1.
pub fn growth_exponents(p: f64, q: f64, alpha1: f64, alpha2: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0 && q >= 1.0 && p.is_finite() && q.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "exponents must be finite and >= 1, got p={p} q={q}"
        )));
    }
    if p * q <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "need pq > 1 for the growth exponents, got pq={}",
            p * q
        )));
    }
    let denom = p * q - 1.0;
    Ok((alpha1 - (p + 1.0) / denom, alpha2 - (q + 1.0) / denom))
}

/// Exact-in-theory cancellations of the barrier time exponents; returns the
/// two absolute residuals, which should vanish to rounding.
pub fn exponent_identity_residuals(
    p: f64,
    q: f64,
    alpha1: f64,
    alpha2: f64,
    a: f64,
    b: f64,
) -> (f64, f64) {
    let first = a - 1.0 - alpha1 - p * b + p * alpha2;
    let second = b - 1.0 - alpha2 - q * a + q * alpha1;
    (first.abs(), second.abs())
}

/// Outcome of the structural admissibility checks.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub p: f64,
    pub q: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a: f64,
    pub b: f64,
    /// Required lower bound on p: Lambda2 / lambda1.
    pub p_threshold: f64,
    /// Required lower bound on q: Lambda1 / lambda2.
    pub q_threshold: f64,
    /// p and q clear the ellipticity-mismatch thresholds.
    pub coupling_strong: bool,
    /// Both growth corrections are strictly positive.
    pub supercritical: bool,
    /// Envelope decay keeps both profile ratios bounded:
    /// p delta_upper(psi2) >= delta_lower(psi1) and symmetrically.
    pub ratio_bounded: bool,
    /// min(a, b), the distance to criticality.
    pub margin: f64,
    /// All conditions hold with margin above [`CERT_MARGIN`].
    pub certifiable: bool,
}

/// Runs the structural admissibility checks for a candidate barrier pair.
/// Both eigenpairs must have converged.
pub fn check_admissibility(
    pair1: &EigenPair,
    pair2: &EigenPair,
    op1: &EllipticOperator,
    op2: &EllipticOperator,
    p: f64,
    q: f64,
) -> Result<AdmissibilityReport> {
    if !pair1.converged || !pair2.converged {
        return Err(Error::InvalidState(
            "admissibility needs converged eigenpairs".into(),
        ));
    }
    let (a, b) = growth_exponents(p, q, pair1.alpha, pair2.alpha)?;
    let p_threshold = op2.big_lambda() / op1.lambda();
    let q_threshold = op1.big_lambda() / op2.lambda();
    let coupling_strong = p > p_threshold && q > q_threshold;
    let supercritical = a > 0.0 && b > 0.0;
    let ratio_bounded = p * pair2.envelope.delta_upper >= pair1.envelope.delta_lower
        && q * pair1.envelope.delta_upper >= pair2.envelope.delta_lower;
    let margin = a.min(b);
    Ok(AdmissibilityReport {
        p,
        q,
        alpha1: pair1.alpha,
        alpha2: pair2.alpha,
        a,
        b,
        p_threshold,
        q_threshold,
        coupling_strong,
        supercritical,
        ratio_bounded,
        margin,
        certifiable: coupling_strong && supercritical && ratio_bounded && margin > CERT_MARGIN,
    })
}

/// Barrier amplitudes and the profile ratio bounds they came from.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    /// sup psi2^p / psi1 over |y| <= 0.8 R.
    pub r1: f64,
    /// sup psi1^q / psi2 over the same window.
    pub r2: f64,
}

/// Floor under the ratio denominators; profiles are sup-normalized to 1, so
/// anything below this is boundary-clipping noise.
const RATIO_FLOOR: f64 = 1e-12;

/// Picks the barrier amplitudes: the symmetric choice eps~ = eps with
/// eps = 0.9 min((a/r1)^(1/(p-1)), (b/r2)^(1/(q-1))), which satisfies both
/// smallness conditions with a 10 percent margin.
pub fn select_epsilon(
    pair1: &EigenPair,
    pair2: &EigenPair,
    p: f64,
    q: f64,
    a: f64,
    b: f64,
) -> Result<EpsilonChoice> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidState(format!(
            "barrier amplitudes need positive growth corrections, got a={a} b={b}"
        )));
    }
    let window = 0.8 * pair1.psi.grid().radius();
    let num1 = powered_field(&pair2.psi, p);
    let num2 = powered_field(&pair1.psi, q);
    let r1 = sup_ratio_within(&num1, &pair1.psi, RATIO_FLOOR, window)?;
    let r2 = sup_ratio_within(&num2, &pair2.psi, RATIO_FLOOR, window)?;
    if !(r1 > 0.0 && r1.is_finite() && r2 > 0.0 && r2.is_finite()) {
        return Err(Error::DegenerateRatio(format!(
            "profile ratio bounds r1={r1} r2={r2}"
        )));
    }
    let factor1 = amplitude_bound(a, r1, p)?;
    let factor2 = amplitude_bound(b, r2, q)?;
    let bound = factor1.min(factor2);
    let epsilon = if bound.is_finite() { 0.9 * bound } else { 1.0 };
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::DegenerateRatio(format!(
            "selected amplitude {epsilon} from bounds {factor1}, {factor2}"
        )));
    }
    Ok(EpsilonChoice {
        epsilon,
        epsilon_tilde: epsilon,
        r1,
        r2,
    })
}

fn powered_field(f: &GridField, exponent: f64) -> GridField {
    let mut g = f.clone();
    for v in g.values_mut() {
        *v = sgn_pow(*v, exponent);
    }
    g
}

/// Largest eps with eps^(e-1) ratio <= margin; infinite when e == 1 and the
/// condition holds outright.
fn amplitude_bound(margin: f64, ratio: f64, e: f64) -> Result<f64> {
    if e > 1.0 {
        Ok((margin / ratio).powf(1.0 / (e - 1.0)))
    } else if ratio <= margin {
        Ok(f64::INFINITY)
    } else {
        Err(Error::InvalidState(format!(
            "exponent 1 requires the ratio bound {ratio} <= margin {margin}"
        )))
    }
}

/// Samples the barrier component eps (t+1)^exponent phi(x, t+1) on the
/// profile grid.
pub fn barrier_field(
    pair: &EigenPair,
    epsilon: f64,
    exponent: f64,
    t: f64,
) -> Result<GridField> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "barrier sample time must be nonnegative, got {t}"
        )));
    }
    let s = t + 1.0;
    let mut f = self_similar_field(pair, s)?;
    f.scale_in_place(epsilon * s.powf(exponent));
    Ok(f)
}

/// Supersolution residuals of the barrier pair at one probe time.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub min1: f64,
    pub min2: f64,
}

/// Residual minima over all probe times; nonnegative (up to discretization
/// tolerance) means the pair acts as a supersolution.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub min1: f64,
    pub min2: f64,
    pub samples: Vec<ResidualSample>,
}

/// Evaluates min over the window |x| <= 0.6 R of
///
///   d/dt ubar_i + F_i(D^2 ubar_i) - |ubar_j|^(e-1) ubar_j
///
/// at each probe time. The time derivative uses the product rule: the power
/// prefactor is differentiated analytically, the self-similar profile by a
/// centered difference with step dt_t.
#[allow(clippy::too_many_arguments)]
pub fn barrier_residual(
    pair1: &EigenPair,
    pair2: &EigenPair,
    op1: &EllipticOperator,
    op2: &EllipticOperator,
    p: f64,
    q: f64,
    eps: &EpsilonChoice,
    a: f64,
    b: f64,
    t_samples: &[f64],
    dt_t: f64,
) -> Result<ResidualReport> {
    if t_samples.is_empty() {
        return Err(Error::InvalidArgument("no residual probe times".into()));
    }
    if !(dt_t > 0.0 && dt_t < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < dt_t < 0.5, got {dt_t}"
        )));
    }
    let grid = pair1.psi.grid();
    if pair2.psi.grid() != grid {
        return Err(Error::MeshMismatch("eigenpair grids differ".into()));
    }
    let window2 = {
        let w = 0.6 * grid.radius();
        w * w
    };
    let mut samples = Vec::with_capacity(t_samples.len());
    let (mut min1, mut min2) = (f64::INFINITY, f64::INFINITY);
    for &t in t_samples {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "probe times must be nonnegative, got {t}"
            )));
        }
        let s = t + 1.0;
        let sample = residual_at(
            ResidualParts {
                pair: pair1,
                op: op1,
                eps_own: eps.epsilon,
                exp_own: a,
                other: &barrier_field(pair2, eps.epsilon_tilde, b, t)?,
                src_exp: p,
            },
            s,
            dt_t,
            window2,
        )?;
        let sample_other = residual_at(
            ResidualParts {
                pair: pair2,
                op: op2,
                eps_own: eps.epsilon_tilde,
                exp_own: b,
                other: &barrier_field(pair1, eps.epsilon, a, t)?,
                src_exp: q,
            },
            s,
            dt_t,
            window2,
        )?;
        min1 = min1.min(sample);
        min2 = min2.min(sample_other);
        samples.push(ResidualSample {
            t,
            min1: sample,
            min2: sample_other,
        });
    }
    Ok(ResidualReport {
        min1,
        min2,
        samples,
    })
}

struct ResidualParts<'a> {
    pair: &'a EigenPair,
    op: &'a EllipticOperator,
    eps_own: f64,
    exp_own: f64,
    other: &'a GridField,
    src_exp: f64,
}

fn residual_at(parts: ResidualParts<'_>, s: f64, dt_t: f64, window2: f64) -> Result<f64> {
    let ResidualParts {
        pair,
        op,
        eps_own,
        exp_own,
        other,
        src_exp,
    } = parts;
    let phi_mid = self_similar_field(pair, s)?;
    let phi_plus = self_similar_field(pair, s + dt_t)?;
    let phi_minus = self_similar_field(pair, s - dt_t)?;
    let grid = phi_mid.grid();
    let power = s.powf(exp_own);
    let power_dt = exp_own * s.powf(exp_own - 1.0);
    let mut own = phi_mid.clone();
    own.scale_in_place(eps_own * power);
    let mut worst = f64::INFINITY;
    for flat in grid.interior_nodes() {
        if grid.radius_sq(flat) > window2 {
            continue;
        }
        let phi = phi_mid.value(flat);
        let dphi = (phi_plus.value(flat) - phi_minus.value(flat)) / (2.0 * dt_t);
        let du_dt = eps_own * (power_dt * phi + power * dphi);
        let hess = own.hessian_unchecked(flat);
        let res = du_dt + op.eval_unchecked(&hess) - sgn_pow(other.value(flat), src_exp);
        worst = worst.min(res);
    }
    if !worst.is_finite() {
        return Err(Error::DegenerateProfile(
            "residual window empty or non-finite".into(),
        ));
    }
    Ok(worst)
}

/// Options for the long-run ordering check behind a certificate.
#[derive(Clone, Copy, Debug)]
pub struct CertifyOpts {
    /// Horizon to integrate the actual system to.
    pub t_long: f64,
    /// Allowed nodewise excess of the solution over the barrier.
    pub order_tol: f64,
    /// Keep every stride-th step for the ordering checks.
    pub stride: usize,
    pub ctl: StepControl,
}

impl Default for CertifyOpts {
    fn default() -> Self {
        CertifyOpts {
            t_long: 50.0,
            order_tol: 1e-3,
            stride: 2000,
            ctl: StepControl::default(),
        }
    }
}

/// Result of integrating the system below its barrier.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CertifyOutcome {
    /// Time actually reached without blow-up.
    pub horizon: f64,
    /// max over snapshots and nodes of (u_i - ubar_i), clamped at 0.
    pub ordering_violation: f64,
    /// Fitted slope of ln sup u1 against ln (t+1) over the late half.
    pub decay_slope: f64,
    /// Theoretical slope a - alpha1 of the barrier's own sup-norm.
    pub expected_slope: f64,
    pub snapshots: usize,
}

/// Integrates the coupled system from the barrier's own initial data
/// (eps psi1, eps~ psi2) to the horizon, verifying it stays below the
/// barrier at every kept snapshot. Blow-up is a certificate contradiction.
#[allow(clippy::too_many_arguments)]
pub fn certify_global(
    pair1: &EigenPair,
    pair2: &EigenPair,
    op1: &EllipticOperator,
    op2: &EllipticOperator,
    p: f64,
    q: f64,
    eps: &EpsilonChoice,
    a: f64,
    b: f64,
    opts: &CertifyOpts,
) -> Result<CertifyOutcome> {
    let mut u10 = pair1.psi.clone();
    u10.scale_in_place(eps.epsilon);
    let mut u20 = pair2.psi.clone();
    u20.scale_in_place(eps.epsilon_tilde);
    let grid = *u10.grid();
    let traj = run_system(
        SystemState::new(u10, u20)?,
        (op1, op2),
        &Coupling::Powers { p, q },
        &opts.ctl,
        opts.t_long,
        opts.stride,
    )?;
    if traj.blown_up() {
        let t = traj.last().blowup_time.unwrap_or(traj.last().t);
        return Err(Error::CertificateContradiction {
            t,
            h: grid.h(),
            dt: traj.dt,
            radius: grid.radius(),
        });
    }

    let mut violation = 0.0f64;
    let mut fit_n = 0usize;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for state in &traj.states {
        let ubar1 = barrier_field(pair1, eps.epsilon, a, state.t)?;
        let ubar2 = barrier_field(pair2, eps.epsilon_tilde, b, state.t)?;
        for (u, ub) in state.u1.values().iter().zip(ubar1.values()) {
            violation = violation.max(u - ub);
        }
        for (u, ub) in state.u2.values().iter().zip(ubar2.values()) {
            violation = violation.max(u - ub);
        }
        let sup = state.u1.sup_norm();
        if state.t >= 0.5 * opts.t_long && sup > 0.0 {
            let x = (state.t + 1.0).ln();
            let y = sup.ln();
            fit_n += 1;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        if violation > opts.order_tol {
            return Err(Error::CertificateContradiction {
                t: state.t,
                h: grid.h(),
                dt: traj.dt,
                radius: grid.radius(),
            });
        }
    }
    let decay_slope = if fit_n >= 2 {
        let nf = fit_n as f64;
        (nf * sxy - sx * sy) / (nf * sxx - sx * sx)
    } else {
        f64::NAN
    };
    Ok(CertifyOutcome {
        horizon: traj.last().t,
        ordering_violation: violation.max(0.0),
        decay_slope,
        expected_slope: a - pair1.alpha,
        snapshots: traj.states.len(),
    })
}

/// Everything needed to audit a global-existence certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BarrierCertificate {
    pub p: f64,
    pub q: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub epsilon_tilde: f64,
    pub r1: f64,
    pub r2: f64,
    pub admissibility: AdmissibilityReport,
    pub t_samples: Vec<f64>,
    pub residual_min1: f64,
    pub residual_min2: f64,
    /// Most negative residual tolerated before the certificate is refused.
    pub residual_tol: f64,
    pub horizon: f64,
    pub ordering_violation: f64,
    pub decay_slope: f64,
    pub expected_slope: f64,
    pub grid_dim: usize,
    pub grid_points: usize,
    pub grid_radius: f64,
    pub operator1: String,
    pub operator2: String,
    pub psi1_fingerprint: u64,
    pub psi2_fingerprint: u64,
}

/// Runs the full pipeline: admissibility, amplitude selection, exponent
/// identities, residual probes, and the long-run ordering check. Errors if
/// any stage disqualifies the pair.
#[allow(clippy::too_many_arguments)]
pub fn build_certificate(
    pair1: &EigenPair,
    pair2: &EigenPair,
    op1: &EllipticOperator,
    op2: &EllipticOperator,
    p: f64,
    q: f64,
    residual_tol: f64,
    opts: &CertifyOpts,
) -> Result<BarrierCertificate> {
    let report = check_admissibility(pair1, pair2, op1, op2, p, q)?;
    if !report.certifiable {
        return Err(Error::InvalidState(format!(
            "pair not certifiable: coupling_strong={} supercritical={} ratio_bounded={} margin={:.4}",
            report.coupling_strong, report.supercritical, report.ratio_bounded, report.margin
        )));
    }
    let (a, b) = (report.a, report.b);
    let (id1, id2) = exponent_identity_residuals(p, q, pair1.alpha, pair2.alpha, a, b);
    if id1 > 1e-12 || id2 > 1e-12 {
        return Err(Error::InvalidState(format!(
            "exponent identities violated: {id1:.3e}, {id2:.3e}"
        )));
    }
    let eps = select_epsilon(pair1, pair2, p, q, a, b)?;
    let residuals = barrier_residual(
        pair1,
        pair2,
        op1,
        op2,
        p,
        q,
        &eps,
        a,
        b,
        &DEFAULT_T_SAMPLES,
        1e-3,
    )?;
    if residuals.min1 < -residual_tol || residuals.min2 < -residual_tol {
        return Err(Error::InvalidState(format!(
            "supersolution residuals too negative: {:.3e}, {:.3e}",
            residuals.min1, residuals.min2
        )));
    }
    let outcome = certify_global(pair1, pair2, op1, op2, p, q, &eps, a, b, opts)?;
    let grid = pair1.psi.grid();
    Ok(BarrierCertificate {
        p,
        q,
        alpha1: pair1.alpha,
        alpha2: pair2.alpha,
        a,
        b,
        epsilon: eps.epsilon,
        epsilon_tilde: eps.epsilon_tilde,
        r1: eps.r1,
        r2: eps.r2,
        admissibility: report,
        t_samples: DEFAULT_T_SAMPLES.to_vec(),
        residual_min1: residuals.min1,
        residual_min2: residuals.min2,
        residual_tol,
        horizon: outcome.horizon,
        ordering_violation: outcome.ordering_violation,
        decay_slope: outcome.decay_slope,
        expected_slope: outcome.expected_slope,
        grid_dim: grid.dim(),
        grid_points: grid.points(),
        grid_radius: grid.radius(),
        operator1: op1.describe(),
        operator2: op2.describe(),
        psi1_fingerprint: fingerprint(pair1.psi.values()),
        psi2_fingerprint: fingerprint(pair2.psi.values()),
    })
}
