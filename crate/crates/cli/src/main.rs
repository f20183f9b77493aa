//! `capfilm`: solve, sweep and verify small-volume soap films from the
//! command line.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use capfilm::axisym::solve_axisym_with;
use capfilm::cap::{cap_for_volume, caps_to_csv};
use capfilm::foliation::{sweep, SolverKind, SweepOptions};
use capfilm::geometry::Tube;
use capfilm::mesh::{init_mesh, minimize, plateau_domain};
use capfilm::par::{with_threads, Execution};
use capfilm::report::{envelope, to_json, write_atomic};
use capfilm::verify::{run_criterion, verify, VerifyOptions, VerifyReport, CRITERIA};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use config::{parse_grid, parse_wire, Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "capfilm", version, about = "Small-volume soap-film minimizers and their verification")]
struct Cli {
    /// JSON config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides CAPFILM_OUT and the config file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for solving independent volumes in parallel.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Problem {
    /// Tube radius around the wire.
    #[arg(long)]
    delta: Option<f64>,
    /// Enclosed volume.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact spherical-cap solution for the unit circle.
    Cap(Problem),
    /// Axisymmetric meridian by shooting.
    Ode(Problem),
    /// Constrained mesh minimization for any planar wire.
    Mesh {
        #[command(flatten)]
        problem: Problem,
        /// circle, circle:R or ellipse:A,B
        #[arg(long, value_parser = parse_wire)]
        wire: Option<capfilm::geometry::WireSpec>,
        /// Target mesh edge length.
        #[arg(long)]
        target_edge: Option<f64>,
        /// Relative gradient tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sweep over volumes and validate the foliation.
    Foliate {
        /// Tube radius around the wire.
        #[arg(long)]
        delta: Option<f64>,
        /// lo:hi:n, geometric.
        #[arg(long)]
        eps_grid: Option<String>,
        /// cap, ode or mesh.
        #[arg(long, value_parser = parse_solver)]
        solver: Option<SolverKind>,
        /// circle, circle:R or ellipse:A,B
        #[arg(long, value_parser = parse_wire)]
        wire: Option<capfilm::geometry::WireSpec>,
        /// Target mesh edge length.
        #[arg(long)]
        target_edge: Option<f64>,
        /// Skip the two-sheet symmetry solve of mesh sweeps.
        #[arg(long)]
        no_symmetry: bool,
    },
    /// Run the acceptance suite and write a pass/fail report.
    Verify {
        /// Cap/ode cross-check, the curvature bound on 4 points and the
        /// discrepancy records.
        #[arg(long)]
        quick: bool,
        /// Run only these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    match s {
        "cap" => Ok(SolverKind::Cap),
        "ode" => Ok(SolverKind::Ode),
        "mesh" => Ok(SolverKind::Mesh),
        _ => Err(format!("unknown solver '{s}' (cap, ode, mesh)")),
    }
}

enum Failure {
    Config(String),
    Solver(capfilm::Error),
    Io(String),
    Check,
}

impl From<capfilm::Error> for Failure {
    fn from(e: capfilm::Error) -> Self {
        Failure::Solver(e)
    }
}

impl Failure {
    fn exit(&self) -> u8 {
        match self {
            Failure::Check => 1,
            Failure::Config(_) | Failure::Io(_) => 2,
            Failure::Solver(_) => 3,
        }
    }
}

fn write(cfg: &RunConfig, name: &str, contents: &str) -> Result<(), Failure> {
    let p = cfg.out.join(name);
    write_atomic(&p, contents).map_err(|e| Failure::Io(format!("writing {}: {e}", p.display())))?;
    println!("wrote {}", p.display());
    Ok(())
}

fn write_report<R: Serialize>(cfg: &RunConfig, command: &str, name: &str, result: &R) -> Result<(), Failure> {
    let v = envelope(command, cfg, result).map_err(|e| Failure::Io(e.to_string()))?;
    let text = to_json(&v).map_err(|e| Failure::Io(e.to_string()))?;
    write(cfg, name, &text)
}

#[derive(Serialize)]
struct CapOut {
    cap: capfilm::cap::CapSolution,
    volume_residual: f64,
}

fn run_cap(cfg: &RunConfig) -> Result<(), Failure> {
    let cap = cap_for_volume(cfg.delta, cfg.eps)?;
    let out = CapOut {
        volume_residual: (cap.volume - cfg.eps).abs() / cfg.eps,
        cap,
    };
    println!(
        "lambda = {:.12e}, theta = {:.12e}, z_C = {:.12e}, R = {:.12e}",
        cap.lambda, cap.theta, cap.z_c, cap.r
    );
    write_report(cfg, "cap", "cap.json", &out)?;
    write(cfg, "cap.csv", &caps_to_csv(&[cap]))
}

#[derive(Serialize)]
struct OdeOut {
    lambda: f64,
    theta: f64,
    residuals: [f64; 2],
    n_steps: usize,
    contact_radius: f64,
    volume: f64,
    pole_residual: f64,
    first_integral_drift: f64,
}

fn run_ode(cfg: &RunConfig) -> Result<(), Failure> {
    let (p, rep) = solve_axisym_with(cfg.delta, cfg.eps, &Default::default())?;
    println!("lambda = {:.12e}, theta = {:.12e}, steps = {}", rep.lambda, rep.theta, rep.n_steps);
    let out = OdeOut {
        lambda: rep.lambda,
        theta: rep.theta,
        residuals: rep.residuals,
        n_steps: rep.n_steps,
        contact_radius: p.contact_radius,
        volume: p.volume,
        pole_residual: p.pole_residual,
        first_integral_drift: p.first_integral_drift,
    };
    write_report(cfg, "ode", "ode.json", &out)?;
    write(cfg, "ode_profile.csv", &p.to_csv())
}

fn tube(cfg: &RunConfig) -> Result<Tube, Failure> {
    Ok(Tube::new(cfg.wire.build()?, cfg.delta)?)
}

fn run_mesh(cfg: &RunConfig) -> Result<(), Failure> {
    let tube = tube(cfg)?;
    let h = cfg.mesh.target_edge;
    let dom = plateau_domain(&tube, h)?;
    let m = init_mesh(&dom, &tube, h)?;
    let (m, rep) = minimize(m, &tube, 0.5 * cfg.eps, &cfg.mesh)?;
    println!(
        "lambda_hat = {:.10e}, area = {:.10e}, contact angle max dev = {:.3e}, {} iterations",
        rep.lambda_hat, rep.area, rep.contact_angle_stats.max_dev, rep.iterations
    );
    write_report(cfg, "mesh", "mesh.json", &rep)?;
    write(cfg, "mesh_upper.obj", &m.to_obj())?;
    write(cfg, "mesh_lower.obj", &m.mirrored().to_obj())
}

fn run_foliate(cfg: &RunConfig, symmetry_solve: bool) -> Result<(), Failure> {
    let tube = tube(cfg)?;
    let opts = SweepOptions {
        mesh: cfg.mesh.clone(),
        exec: if cfg.parallel() { Execution::Parallel } else { Execution::Sequential },
        symmetry_solve,
    };
    let rep = with_threads(cfg.jobs, || sweep(&tube, &cfg.eps_grid, cfg.solver, &opts))?;
    let show = |c: &capfilm::foliation::CheckOutcome| match c.ok {
        Some(true) => "true".to_string(),
        Some(false) => format!("false {:?}", c.offenders),
        None => format!("skipped ({})", c.note.as_deref().unwrap_or("")),
    };
    println!("ordering_ok: {}", show(&rep.ordering_ok));
    println!("symmetry_ok: {}", show(&rep.symmetry_ok));
    println!("curvature_bound_ok: {}", show(&rep.curvature_bound_ok));
    println!("convergence_ok: {}", show(&rep.convergence_ok));
    for (eps, code) in &rep.failures {
        println!("eps = {eps:e}: {code}");
    }
    write_report(cfg, "foliate", "sweep.json", &rep)?;
    write(cfg, "leaves.csv", &rep.leaves_csv())?;
    if !rep.failures.is_empty() && rep.records.is_empty() {
        return Err(Failure::Solver(capfilm::Error::NoConvergence {
            what: "every record of the sweep",
            iterations: 0,
            residuals: vec![],
        }));
    }
    if rep.all_passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run_verify(cfg: &RunConfig, quick: bool, only: &[u32]) -> Result<(), Failure> {
    let opts = VerifyOptions {
        quick,
        exec: if cfg.parallel() { Execution::Parallel } else { Execution::Sequential },
    };
    let rep = with_threads(cfg.jobs, || -> Result<VerifyReport, Failure> {
        if only.is_empty() {
            return Ok(verify(&opts)?);
        }
        let mut criteria = Vec::new();
        for &id in only {
            criteria.push(
                run_criterion(id, &opts)
                    .ok_or_else(|| Failure::Config(format!("unknown criterion {id} (1..={})", CRITERIA.len())))?,
            );
        }
        Ok(VerifyReport {
            quick,
            passed: criteria.iter().all(|c| c.passed),
            criteria,
            discrepancies: capfilm::cap::discrepancy_records()?,
            within_time_budget: None,
        })
    })?;
    for c in &rep.criteria {
        println!("{}", c.line());
    }
    write_report(cfg, "verify", "verify.json", &rep)?;
    if rep.passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut flags = Overrides {
        out: cli.out,
        jobs: cli.jobs,
        ..Default::default()
    };
    let mut symmetry_solve = true;
    match &cli.command {
        Command::Cap(p) | Command::Ode(p) => {
            flags.delta = p.delta;
            flags.eps = p.eps;
        }
        Command::Mesh {
            problem,
            wire,
            target_edge,
            tol,
        } => {
            flags.delta = problem.delta;
            flags.eps = problem.eps;
            flags.wire = wire.clone();
            flags.target_edge = *target_edge;
            flags.tol = *tol;
        }
        Command::Foliate {
            delta,
            eps_grid,
            solver,
            wire,
            target_edge,
            no_symmetry,
        } => {
            flags.delta = *delta;
            flags.eps_grid = eps_grid.as_deref().map(parse_grid).transpose().map_err(Failure::Config)?;
            flags.solver = *solver;
            flags.wire = wire.clone();
            flags.target_edge = *target_edge;
            symmetry_solve = !no_symmetry;
        }
        Command::Verify { .. } => {}
    }
    let env_out = std::env::var_os("CAPFILM_OUT").filter(|v| !v.is_empty()).map(PathBuf::from);
    let cfg = RunConfig::resolve(cli.config.as_deref(), flags, env_out).map_err(Failure::Config)?;
    cfg.prepare_out().map_err(Failure::Config)?;
    match &cli.command {
        Command::Cap(_) => run_cap(&cfg),
        Command::Ode(_) => run_ode(&cfg),
        Command::Mesh { .. } => run_mesh(&cfg),
        Command::Foliate { .. } => run_foliate(&cfg, symmetry_solve),
        Command::Verify { quick, only } => run_verify(&cfg, *quick, only),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("CONFIG_INVALID: {m}"),
                Failure::Io(m) => eprintln!("CONFIG_INVALID: {m}"),
                Failure::Solver(e) => eprintln!("SOLVER_FAILED: {} {e}", e.code()),
                Failure::Check => eprintln!("CHECK_FAILED"),
            }
            ExitCode::from(f.exit())
        }
    }
}
