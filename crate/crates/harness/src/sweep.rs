//! The (p, q) sweep engine: classifies every exponent cell independently
//! (blow-up, global to the horizon, or certified global via a barrier), and
//! renders the records as a versioned CSV. Cells run in parallel over a
//! bounded worker pool; the output order is the cell order, so the CSV is
//! byte-identical for any worker count.

use crate::config::{InitialData, RunConfig};
use crate::{HarnessError, Result};
use fnparab::barrier::{self, CertifyOpts};
use fnparab::evolve::{self, Coupling, StepControl, SystemState};
use fnparab::grid::{Boundary, GridField};
use fnparab::selfsim::EigenPair;
use serde::{Deserialize, Serialize};

pub const CSV_HEADER: &str = "# fnparab sweep records v1";
pub const CSV_COLUMNS: &str = "p,q,outcome,t_star,alpha1,alpha2,threshold1,threshold2,\
thr1_sign,thr2_sign,eh_value,eh_sign,a,b,epsilon,residual_min1,residual_min2,error";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Sup-norm crossed the blow-up threshold at a finite time.
    BlownUp,
    /// Reached the horizon without blow-up; says nothing beyond t_end.
    GlobalToT,
    /// A supersolution barrier was built and verified for this cell.
    CertifiedGlobal,
    /// The cell could not be classified; see the error column.
    Error,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::BlownUp => "blown-up",
            Outcome::GlobalToT => "global-to-T",
            Outcome::CertifiedGlobal => "certified-global",
            Outcome::Error => "error",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub p: f64,
    pub q: f64,
    pub outcome: Outcome,
    pub t_star: Option<f64>,
    pub alpha1: f64,
    pub alpha2: f64,
    /// (p + 1) / (pq - 1), compared against alpha1.
    pub threshold1: f64,
    /// (q + 1) / (pq - 1), compared against alpha2.
    pub threshold2: f64,
    pub thr1_sign: i8,
    pub thr2_sign: i8,
    /// (max{p, q} + 1) / (pq - 1); the dichotomy curve sits at N/2.
    pub eh_value: f64,
    /// Sign of eh_value - N/2: negative is the supercritical (global) side.
    pub eh_sign: i8,
    pub a: f64,
    pub b: f64,
    pub epsilon: Option<f64>,
    pub residual_min1: Option<f64>,
    pub residual_min2: Option<f64>,
    pub error: String,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl SweepRecord {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.p,
            self.q,
            self.outcome.as_str(),
            opt(self.t_star),
            self.alpha1,
            self.alpha2,
            self.threshold1,
            self.threshold2,
            self.thr1_sign,
            self.thr2_sign,
            self.eh_value,
            self.eh_sign,
            self.a,
            self.b,
            opt(self.epsilon),
            opt(self.residual_min1),
            opt(self.residual_min2),
            csv_escape(&self.error),
        )
    }
}

pub fn render_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 2));
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str(CSV_COLUMNS);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Everything shared by all cells of one sweep.
pub struct SweepPlan {
    pub pair1: EigenPair,
    pub pair2: EigenPair,
    pub cells: Vec<(f64, f64)>,
    initial1: GridField,
    initial2: GridField,
    ctl: StepControl,
    t_end: f64,
    certify: CertifyOpts,
    residual_tol: f64,
    dim: usize,
}

impl SweepPlan {
    /// Computes the shared eigenpairs and initial data. Errors here abort
    /// the sweep; per-cell problems only mark their row.
    pub fn prepare(cfg: &RunConfig, pair1: EigenPair, pair2: EigenPair) -> Result<SweepPlan> {
        let coupling = cfg
            .coupling
            .as_ref()
            .ok_or_else(|| HarnessError::Config("[coupling]: missing".into()))?;
        let (pr, qr) = coupling.ranges();
        let mut cells = Vec::with_capacity(pr.steps * qr.steps);
        for p in pr.values() {
            for q in qr.values() {
                cells.push((p, q));
            }
        }
        let (initial1, initial2) = match &cfg.initial {
            InitialData::Gaussian { amplitude, width } => (
                evolve::gaussian_field(cfg.grid, Boundary::DirichletZero, *amplitude, *width),
                evolve::gaussian_field(cfg.grid, Boundary::DirichletZero, *amplitude, *width),
            ),
            InitialData::File { path } => {
                let f = crate::runner::load_field(path)?;
                if *f.grid() != cfg.grid {
                    return Err(HarnessError::Config(format!(
                        "[initial] path: field grid {}x{} R={} does not match the configured grid",
                        f.grid().dim(),
                        f.grid().points(),
                        f.grid().radius()
                    )));
                }
                (f.clone(), f)
            }
            InitialData::BarrierSeeded => {
                return Err(HarnessError::Config(
                    "[initial] kind: sweep cells classify configured data".into(),
                ))
            }
        };
        let ctl = cfg.step_control();
        Ok(SweepPlan {
            pair1,
            pair2,
            cells,
            initial1,
            initial2,
            ctl,
            t_end: cfg.step.t_end,
            certify: CertifyOpts {
                t_long: cfg.certify.t_long,
                order_tol: cfg.certify.order_tol,
                stride: cfg.certify.stride,
                ctl: cfg.step_control(),
            },
            residual_tol: cfg.certify.residual_tol,
            dim: cfg.grid.dim(),
        })
    }

    fn classify(
        &self,
        p: f64,
        q: f64,
        op1: &fnparab::operators::EllipticOperator,
        op2: &fnparab::operators::EllipticOperator,
    ) -> SweepRecord {
        let alpha1 = self.pair1.alpha;
        let alpha2 = self.pair2.alpha;
        let denom = p * q - 1.0;
        let threshold1 = (p + 1.0) / denom;
        let threshold2 = (q + 1.0) / denom;
        let eh_value = (p.max(q) + 1.0) / denom;
        let n_half = self.dim as f64 / 2.0;
        let (a, b) = (alpha1 - threshold1, alpha2 - threshold2);
        let mut rec = SweepRecord {
            p,
            q,
            outcome: Outcome::Error,
            t_star: None,
            alpha1,
            alpha2,
            threshold1,
            threshold2,
            thr1_sign: sign_of(alpha1 - threshold1),
            thr2_sign: sign_of(alpha2 - threshold2),
            eh_value,
            eh_sign: sign_of(eh_value - n_half),
            a,
            b,
            epsilon: None,
            residual_min1: None,
            residual_min2: None,
            error: String::new(),
        };

        // Try a certificate only where the structural conditions hold.
        match barrier::check_admissibility(&self.pair1, &self.pair2, op1, op2, p, q) {
            Ok(report) if report.certifiable => {
                match barrier::build_certificate(
                    &self.pair1,
                    &self.pair2,
                    op1,
                    op2,
                    p,
                    q,
                    self.residual_tol,
                    &self.certify,
                ) {
                    Ok(cert) => {
                        rec.outcome = Outcome::CertifiedGlobal;
                        rec.epsilon = Some(cert.epsilon);
                        rec.residual_min1 = Some(cert.residual_min1);
                        rec.residual_min2 = Some(cert.residual_min2);
                        return rec;
                    }
                    Err(e) => {
                        // Fall back to plain classification; keep the reason.
                        rec.error = format!("certificate attempt: {e}");
                    }
                }
            }
            Ok(_) => {}
            Err(e) => {
                rec.error = format!("admissibility: {e}");
            }
        }

        let state = match SystemState::new(self.initial1.clone(), self.initial2.clone()) {
            Ok(s) => s,
            Err(e) => {
                rec.error = format!("{e}");
                return rec;
            }
        };
        let coupling = Coupling::Powers { p, q };
        match evolve::run_system(state, (op1, op2), &coupling, &self.ctl, self.t_end, usize::MAX) {
            Ok(traj) => {
                if traj.blown_up() {
                    rec.outcome = Outcome::BlownUp;
                    rec.t_star = traj.last().blowup_time;
                } else {
                    rec.outcome = Outcome::GlobalToT;
                }
            }
            Err(e) => {
                let note = format!("evolve: {e}");
                rec.error = if rec.error.is_empty() {
                    note
                } else {
                    format!("{}; {note}", rec.error)
                };
            }
        }
        rec
    }
}

/// Runs every cell on a pool of `workers` threads. The record order matches
/// the cell order regardless of scheduling.
pub fn run_sweep(
    plan: &SweepPlan,
    op1: &fnparab::operators::EllipticOperator,
    op2: &fnparab::operators::EllipticOperator,
    workers: usize,
) -> Result<Vec<SweepRecord>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Run(format!("worker pool: {e}")))?;
    let records = pool.install(|| {
        plan.cells
            .par_iter()
            .map(|(p, q)| plan.classify(*p, *q, op1, op2))
            .collect::<Vec<_>>()
    });
    Ok(records)
}

/// Sanity counters reported in the run log.
#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub cells: usize,
    pub blown_up: usize,
    pub global_to_t: usize,
    pub certified: usize,
    pub errors: usize,
    /// Every certified cell sits strictly on the supercritical side.
    pub certified_all_supercritical: bool,
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count();
    SweepSummary {
        cells: records.len(),
        blown_up: count(Outcome::BlownUp),
        global_to_t: count(Outcome::GlobalToT),
        certified: count(Outcome::CertifiedGlobal),
        errors: records.iter().filter(|r| !r.error.is_empty()).count(),
        certified_all_supercritical: records
            .iter()
            .filter(|r| r.outcome == Outcome::CertifiedGlobal)
            .all(|r| r.eh_sign < 0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(p: f64, q: f64, outcome: Outcome) -> SweepRecord {
        SweepRecord {
            p,
            q,
            outcome,
            t_star: (outcome == Outcome::BlownUp).then_some(0.25),
            alpha1: 0.5,
            alpha2: 0.5,
            threshold1: 0.4,
            threshold2: 0.4,
            thr1_sign: 1,
            thr2_sign: 1,
            eh_value: 0.4,
            eh_sign: -1,
            a: 0.1,
            b: 0.1,
            epsilon: None,
            residual_min1: None,
            residual_min2: None,
            error: String::new(),
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let rows = vec![
            record(2.0, 2.0, Outcome::BlownUp),
            record(4.0, 4.0, Outcome::CertifiedGlobal),
        ];
        let csv = render_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some(CSV_COLUMNS));
        let first = lines.next().unwrap();
        assert!(first.starts_with("2,2,blown-up,0.25,"), "{first}");
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn error_text_is_csv_escaped() {
        let mut r = record(2.0, 2.0, Outcome::Error);
        r.error = "bad, \"thing\"".into();
        let row = r.csv_row();
        assert!(row.ends_with("\"bad, \"\"thing\"\"\""), "{row}");
    }
}
