//! Mode dispatch: executes one configured run, writes its artifacts through
//! [`OutputSet`], and finishes with a manifest that checksums every file.

use crate::config::{InitialData, Mode, RunConfig};
use crate::manifest::{self, Manifest, OutputSet};
use crate::selfcheck::run_selfcheck;
use crate::sweep::{self, SweepPlan};
use crate::{HarnessError, Result};
use fnparab::barrier::{self, CertifyOpts, EpsilonChoice};
use fnparab::evolve::{self, SystemState};
use fnparab::field_io;
use fnparab::grid::{Boundary, GridField};
use fnparab::operators::EllipticOperator;
use fnparab::selfsim::{power_iterate, EigenPair};
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

/// Fully resolved invocation: config plus the settled out dir, workers, and
/// seed after flag/env/config precedence.
pub struct Invocation<'a> {
    pub config: &'a RunConfig,
    pub config_text: &'a str,
    pub mode: Mode,
    pub out_dir: &'a Path,
    pub workers: usize,
    pub seed: u64,
}

/// What the process should report: `failed` selects a nonzero exit while
/// still having written all artifacts.
pub struct RunStatus {
    pub failed: bool,
    pub summary: String,
}

/// Reads a field in either serialization, sniffing the binary magic.
pub fn load_field(path: &Path) -> Result<GridField> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"FNPB") {
        Ok(field_io::decode_binary(&bytes)?)
    } else {
        let text = std::str::from_utf8(&bytes).map_err(|_| {
            HarnessError::Run(format!(
                "{}: neither the binary field format nor UTF-8 text",
                path.display()
            ))
        })?;
        Ok(field_io::decode_csv(text)?)
    }
}

#[derive(Serialize)]
struct EigenArtifact {
    operator: String,
    grid_dim: usize,
    grid_points: usize,
    grid_radius: f64,
    alpha: f64,
    converged: bool,
    tol: f64,
    tau_total: f64,
    alpha_history: Vec<f64>,
    delta_upper: f64,
    c_upper: f64,
    delta_lower: f64,
    c_lower: f64,
    delta_fit: f64,
    c_fit: f64,
    psi_file: String,
    psi_sha256: String,
    psi_fingerprint: u64,
}

struct Logger {
    events: Vec<serde_json::Value>,
}

impl Logger {
    fn new() -> Logger {
        Logger { events: Vec::new() }
    }

    fn log(&mut self, event: serde_json::Value) {
        self.events.push(event);
    }

    fn render(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for e in &self.events {
            out.extend_from_slice(e.to_string().as_bytes());
            out.push(b'\n');
        }
        out
    }
}

pub fn execute(inv: &Invocation) -> Result<RunStatus> {
    inv.config.validate_for(inv.mode)?;
    let started = Instant::now();
    let mut set = OutputSet::create(inv.out_dir)?;
    let mut log = Logger::new();
    log.log(json!({
        "event": "start",
        "mode": inv.mode.as_str(),
        "seed": inv.seed,
        "workers": inv.workers,
        "grid": {
            "dim": inv.config.grid.dim(),
            "points": inv.config.grid.points(),
            "radius": inv.config.grid.radius(),
        },
    }));

    let status = match inv.mode {
        Mode::Selfcheck => run_selfcheck_mode(inv, &mut set, &mut log)?,
        Mode::Eigen => run_eigen_mode(inv, &mut set, &mut log)?,
        Mode::Evolve => run_evolve_mode(inv, &mut set, &mut log)?,
        Mode::Certify => run_certify_mode(inv, &mut set, &mut log)?,
        Mode::Sweep => run_sweep_mode(inv, &mut set, &mut log)?,
    };

    log.log(json!({"event": "done", "failed": status.failed}));
    set.write("logs.jsonl", &log.render())?;
    let manifest = Manifest {
        tool: "fnparab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        mode: inv.mode.as_str().into(),
        seed: inv.seed,
        workers: inv.workers,
        wall_seconds: started.elapsed().as_secs_f64(),
        config: inv.config_text.to_string(),
        outputs: set.files().to_vec(),
    };
    manifest::write_manifest(&set, &manifest)?;
    Ok(status)
}

fn run_selfcheck_mode(
    inv: &Invocation,
    set: &mut OutputSet,
    log: &mut Logger,
) -> Result<RunStatus> {
    let report = run_selfcheck(inv.seed, inv.config.step.cfl_safety);
    let text = report.render();
    set.write("selfcheck.txt", text.as_bytes())?;
    for c in &report.checks {
        log.log(json!({
            "event": "check",
            "name": c.name,
            "pass": c.pass,
            "margin": c.margin,
        }));
    }
    Ok(RunStatus {
        failed: !report.passed(),
        summary: text,
    })
}

fn write_field(set: &mut OutputSet, stem: &str, f: &GridField) -> Result<(String, String)> {
    let bin = field_io::encode_binary(f);
    let sha = manifest::sha256_hex(&bin);
    let bin_path = format!("fields/{stem}.bin");
    set.write(&bin_path, &bin)?;
    set.write(
        &format!("fields/{stem}.csv"),
        field_io::encode_csv(f).as_bytes(),
    )?;
    Ok((bin_path, sha))
}

fn compute_pair(
    cfg: &RunConfig,
    op: &EllipticOperator,
    label: &str,
    log: &mut Logger,
) -> Result<EigenPair> {
    let opts = cfg.eigen.power_opts(cfg.step.cfl_safety);
    let pair = power_iterate(op, cfg.grid, &opts)?;
    log.log(json!({
        "event": "eigen",
        "operator": label,
        "spec": op.describe(),
        "alpha": pair.alpha,
        "converged": pair.converged,
        "tau_total": pair.tau_total,
        "blocks": pair.alpha_history.len(),
    }));
    if !pair.converged {
        return Err(HarnessError::Run(format!(
            "power iteration for {label} ({}) did not settle within tau = {}; last alpha = {}",
            op.describe(),
            cfg.eigen.max_tau,
            pair.alpha
        )));
    }
    Ok(pair)
}

fn run_eigen_mode(inv: &Invocation, set: &mut OutputSet, log: &mut Logger) -> Result<RunStatus> {
    let cfg = inv.config;
    let mut ops: Vec<(&EllipticOperator, &str)> = Vec::new();
    if let Some(op) = &cfg.operator1 {
        ops.push((op, "operator1"));
    }
    if let Some(op) = &cfg.operator2 {
        ops.push((op, "operator2"));
    }
    let mut records = String::from("# fnparab eigen records v1\noperator,block,alpha\n");
    let mut summary = String::new();
    for (idx, (op, label)) in ops.iter().enumerate() {
        let pair = compute_pair(cfg, op, label, log)?;
        let stem = format!("psi{}", idx + 1);
        let (psi_file, psi_sha256) = write_field(set, &stem, &pair.psi)?;
        let artifact = EigenArtifact {
            operator: op.describe(),
            grid_dim: cfg.grid.dim(),
            grid_points: cfg.grid.points(),
            grid_radius: cfg.grid.radius(),
            alpha: pair.alpha,
            converged: pair.converged,
            tol: pair.tol,
            tau_total: pair.tau_total,
            alpha_history: pair.alpha_history.clone(),
            delta_upper: pair.envelope.delta_upper,
            c_upper: pair.envelope.c_upper,
            delta_lower: pair.envelope.delta_lower,
            c_lower: pair.envelope.c_lower,
            delta_fit: pair.envelope.delta_fit,
            c_fit: pair.envelope.c_fit,
            psi_file,
            psi_sha256,
            psi_fingerprint: field_io::fingerprint(pair.psi.values()),
        };
        let mut text = serde_json::to_string_pretty(&artifact)?;
        text.push('\n');
        set.write(&format!("eigen{}.json", idx + 1), text.as_bytes())?;
        for (block, alpha) in pair.alpha_history.iter().enumerate() {
            let _ = writeln!(records, "{},{},{}", idx + 1, block, alpha);
        }
        let _ = writeln!(
            summary,
            "{label}: {} alpha={:.4} blocks={} tau={:.1}",
            op.describe(),
            pair.alpha,
            pair.alpha_history.len(),
            pair.tau_total
        );
    }
    set.write("records.csv", records.as_bytes())?;
    Ok(RunStatus {
        failed: false,
        summary,
    })
}

/// Builds the two components of the initial data for evolve runs.
fn initial_fields(
    cfg: &RunConfig,
    ops: (&EllipticOperator, &EllipticOperator),
    log: &mut Logger,
) -> Result<(GridField, GridField)> {
    match &cfg.initial {
        InitialData::Gaussian { amplitude, width } => Ok((
            evolve::gaussian_field(cfg.grid, Boundary::DirichletZero, *amplitude, *width),
            evolve::gaussian_field(cfg.grid, Boundary::DirichletZero, *amplitude, *width),
        )),
        InitialData::File { path } => {
            let f = load_field(path)?;
            if *f.grid() != cfg.grid {
                return Err(HarnessError::Config(format!(
                    "[initial] path: field grid {}x{} R={} does not match the configured grid",
                    f.grid().dim(),
                    f.grid().points(),
                    f.grid().radius()
                )));
            }
            Ok((f.clone(), f))
        }
        InitialData::BarrierSeeded => {
            let (p, q) = cfg
                .coupling
                .as_ref()
                .and_then(|c| c.fixed())
                .ok_or_else(|| {
                    HarnessError::Config(
                        "[coupling]: barrier-seeded data needs fixed exponents".into(),
                    )
                })?;
            let pair1 = compute_pair(cfg, ops.0, "operator1", log)?;
            let pair2 = compute_pair(cfg, ops.1, "operator2", log)?;
            let report = barrier::check_admissibility(&pair1, &pair2, ops.0, ops.1, p, q)?;
            if !report.certifiable {
                return Err(HarnessError::Run(format!(
                    "barrier-seeded data needs a certifiable pair; margin = {:.4}",
                    report.margin
                )));
            }
            let eps = barrier::select_epsilon(&pair1, &pair2, p, q, report.a, report.b)?;
            let mut u1 = pair1.psi;
            u1.scale_in_place(eps.epsilon);
            let mut u2 = pair2.psi;
            u2.scale_in_place(eps.epsilon_tilde);
            log.log(json!({
                "event": "barrier-seed",
                "epsilon": eps.epsilon,
                "a": report.a,
                "b": report.b,
            }));
            Ok((u1, u2))
        }
    }
}

fn run_evolve_mode(inv: &Invocation, set: &mut OutputSet, log: &mut Logger) -> Result<RunStatus> {
    let cfg = inv.config;
    let op1 = cfg.operator1.as_ref().expect("validated");
    let op2 = cfg.operator2.as_ref().expect("validated");
    let (p, q) = cfg
        .coupling
        .as_ref()
        .and_then(|c| c.fixed())
        .expect("validated");
    let (u1, u2) = initial_fields(cfg, (op1, op2), log)?;
    let ctl = cfg.step_control();
    let dt = evolve::choose_dt(
        &cfg.grid,
        op1.big_lambda().max(op2.big_lambda()),
        &ctl,
    );
    let (steps, _) = evolve::steps_for(cfg.step.t_end, dt);
    let stride = (steps / cfg.step.snapshots).max(1);
    let coupling = evolve::Coupling::Powers { p, q };
    let traj = evolve::run_system(
        SystemState::new(u1, u2)?,
        (op1, op2),
        &coupling,
        &ctl,
        cfg.step.t_end,
        stride,
    )?;

    let mut records = String::from("# fnparab evolve records v1\nstep,t,sup1,sup2,min1,min2,blown_up\n");
    for (i, s) in traj.states.iter().enumerate() {
        let step = if i + 1 == traj.states.len() {
            traj.steps_taken
        } else {
            i * traj.stride
        };
        let _ = writeln!(
            records,
            "{},{},{},{},{},{},{}",
            step,
            s.t,
            s.u1.sup_norm(),
            s.u2.sup_norm(),
            s.u1.min_value(),
            s.u2.min_value(),
            s.blown_up
        );
    }
    set.write("records.csv", records.as_bytes())?;
    let last = traj.last();
    write_field(set, "u1_final", &last.u1)?;
    write_field(set, "u2_final", &last.u2)?;
    log.log(json!({
        "event": "evolve-done",
        "steps": traj.steps_taken,
        "dt": traj.dt,
        "t_reached": last.t,
        "blown_up": last.blown_up,
        "t_star": last.blowup_time,
        "sup1": last.u1.sup_norm(),
        "sup2": last.u2.sup_norm(),
    }));
    let summary = if last.blown_up {
        format!(
            "evolve: blow-up detected at t* = {:.6} (threshold {})\n",
            last.blowup_time.unwrap_or(last.t),
            ctl.blowup_threshold
        )
    } else {
        format!(
            "evolve: reached t = {} in {} steps; sup norms {:.6e} / {:.6e}\n",
            last.t,
            traj.steps_taken,
            last.u1.sup_norm(),
            last.u2.sup_norm()
        )
    };
    Ok(RunStatus {
        failed: false,
        summary,
    })
}

fn run_certify_mode(inv: &Invocation, set: &mut OutputSet, log: &mut Logger) -> Result<RunStatus> {
    let cfg = inv.config;
    let op1 = cfg.operator1.as_ref().expect("validated");
    let op2 = cfg.operator2.as_ref().expect("validated");
    let (p, q) = cfg
        .coupling
        .as_ref()
        .and_then(|c| c.fixed())
        .expect("validated");
    let pair1 = compute_pair(cfg, op1, "operator1", log)?;
    let pair2 = compute_pair(cfg, op2, "operator2", log)?;
    let opts = CertifyOpts {
        t_long: cfg.certify.t_long,
        order_tol: cfg.certify.order_tol,
        stride: cfg.certify.stride,
        ctl: cfg.step_control(),
    };
    let cert = barrier::build_certificate(
        &pair1,
        &pair2,
        op1,
        op2,
        p,
        q,
        cfg.certify.residual_tol,
        &opts,
    )?;
    let mut text = serde_json::to_string_pretty(&cert)?;
    text.push('\n');
    set.write("certificate.json", text.as_bytes())?;
    write_field(set, "psi1", &pair1.psi)?;
    write_field(set, "psi2", &pair2.psi)?;

    let eps = EpsilonChoice {
        epsilon: cert.epsilon,
        epsilon_tilde: cert.epsilon_tilde,
        r1: cert.r1,
        r2: cert.r2,
    };
    let resid = barrier::barrier_residual(
        &pair1,
        &pair2,
        op1,
        op2,
        p,
        q,
        &eps,
        cert.a,
        cert.b,
        &cert.t_samples,
        1e-3,
    )?;
    let mut records = String::from("# fnparab certify records v1\nt,min1,min2\n");
    for s in &resid.samples {
        let _ = writeln!(records, "{},{},{}", s.t, s.min1, s.min2);
    }
    set.write("records.csv", records.as_bytes())?;
    log.log(json!({
        "event": "certificate",
        "epsilon": cert.epsilon,
        "horizon": cert.horizon,
        "ordering_violation": cert.ordering_violation,
        "residual_min1": cert.residual_min1,
        "residual_min2": cert.residual_min2,
    }));
    let summary = format!(
        "certificate: global to T = {} (ordering violation {:.3e}, eps = {:.6})\n",
        cert.horizon, cert.ordering_violation, cert.epsilon
    );
    Ok(RunStatus {
        failed: false,
        summary,
    })
}

fn run_sweep_mode(inv: &Invocation, set: &mut OutputSet, log: &mut Logger) -> Result<RunStatus> {
    let cfg = inv.config;
    let op1 = cfg.operator1.as_ref().expect("validated");
    let op2 = cfg.operator2.as_ref().expect("validated");
    let pair1 = compute_pair(cfg, op1, "operator1", log)?;
    let pair2 = compute_pair(cfg, op2, "operator2", log)?;
    let plan = SweepPlan::prepare(cfg, pair1, pair2)?;
    let records = sweep::run_sweep(&plan, op1, op2, inv.workers)?;
    let csv = sweep::render_csv(&records);
    set.write("records.csv", csv.as_bytes())?;
    let summary = sweep::summarize(&records);
    log.log(json!({"event": "sweep-summary", "summary": summary}));
    let text = format!(
        "sweep: {} cells; {} certified-global, {} blown-up, {} global-to-T, {} with errors\n",
        summary.cells, summary.certified, summary.blown_up, summary.global_to_t, summary.errors
    );
    Ok(RunStatus {
        failed: false,
        summary: text,
    })
}
