//! Command implementations. Each returns a report whose `exit_code` depends
//! only on the verdict.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use ribc_core::certify::{check_ibc as core_check_ibc, check_ribc as core_check_ribc, Candidates, IbcVerdict, RibcCertificate, RibcVerdict};
use ribc_core::construct::WitnessSet;
use ribc_core::fixtures;
use ribc_core::sim::{integrate, verify_plan, Monitor, MonitorAction, MonitorMode, MonitorSet, PhaseRun, PlanReport, Stop, DEFAULT_DT};
use ribc_core::steer::{raw_gramian_plan, ribc_steering_plan};
use ribc_core::Error as CoreError;
use serde::Serialize;

use crate::artifacts::{write_csv, write_svg, PhaseTrace, PlotSets};
use crate::problem::{Problem, ProblemFile};
use crate::report::{Report, SteerReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CERTIFIED: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

pub fn ibc_exit(v: IbcVerdict) -> i32 {
    match v {
        IbcVerdict::Certified => EXIT_OK,
        IbcVerdict::NotIbc => EXIT_NOT_CERTIFIED,
        IbcVerdict::NecessaryConditionsHold => EXIT_INCONCLUSIVE,
    }
}

pub fn ribc_exit(v: RibcVerdict) -> i32 {
    match v {
        RibcVerdict::Certified => EXIT_OK,
        RibcVerdict::NotRibc => EXIT_NOT_CERTIFIED,
        RibcVerdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

/// Which polytope `check-ibc` runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbcSet {
    X,
    Xprime,
}

pub fn check_ibc(problem: &Problem, set: IbcSet) -> Result<Report> {
    let p = match set {
        IbcSet::X => &problem.x,
        IbcSet::Xprime => problem.x_outer.as_ref().ok_or_else(|| anyhow!("problem has no Xprime"))?,
    };
    let r = core_check_ibc(&problem.system, p, &problem.opts)?;
    Ok(Report::from_ibc(&r, ibc_exit(r.verdict)))
}

fn outer(problem: &Problem) -> Result<&ribc_core::geometry::Polytope> {
    problem.x_outer.as_ref().ok_or_else(|| anyhow!("Xprime: required for this command"))
}

pub fn ribc_certificate(problem: &Problem) -> Result<RibcCertificate> {
    let cands = Candidates { x1: problem.x1.clone(), x2: problem.x2.clone() };
    Ok(core_check_ribc(&problem.system, &problem.x, outer(problem)?, &cands, &problem.opts)?)
}

pub fn check_ribc(problem: &Problem) -> Result<Report> {
    let cert = ribc_certificate(problem)?;
    Ok(Report::from_ribc(&cert, ribc_exit(cert.verdict)))
}

#[derive(Debug, Clone)]
pub struct SteerOptions {
    /// Zero-based projection coordinates.
    pub proj: (usize, usize),
    pub raw_gramian: bool,
    pub out_dir: PathBuf,
}

fn write_artifacts(problem: &Problem, run: &PlanReport, sets: &[Option<&WitnessSet>], opts: &SteerOptions, report: &mut Report) -> Result<()> {
    std::fs::create_dir_all(&opts.out_dir).with_context(|| format!("cannot create {}", opts.out_dir.display()))?;
    let traces: Vec<PhaseTrace> = run.phases.iter().map(|p| PhaseTrace { label: &p.label, start: p.start, trajectory: &p.trajectory }).collect();
    let csv = opts.out_dir.join("trajectory.csv");
    write_csv(&csv, &traces)?;
    let mut plot = PlotSets { polytopes: vec![("Xprime", outer(problem)?), ("X", &problem.x)], ellipsoids: Vec::new() };
    for (name, set) in ["X1", "X2"].iter().zip(sets) {
        match set {
            Some(WitnessSet::Polytope(p)) => plot.polytopes.push((name, p)),
            Some(WitnessSet::Ellipsoid(e)) => plot.ellipsoids.push((name, e)),
            None => {}
        }
    }
    let svg = opts.out_dir.join("plot.svg");
    write_svg(&svg, &plot, &traces, opts.proj)?;
    report.artifacts = vec![csv.display().to_string(), svg.display().to_string()];
    Ok(())
}

pub fn steer(problem: &Problem, opts: &SteerOptions) -> Result<Report> {
    let req = problem.steer.as_ref().ok_or_else(|| anyhow!("steer: problem has no steering request"))?;
    let n = problem.system.n();
    if opts.proj.0 >= n || opts.proj.1 >= n || opts.proj.0 == opts.proj.1 {
        bail!("--proj: need two distinct coordinates in 1..={n}");
    }
    let x_outer = outer(problem)?.clone();
    let dt = DEFAULT_DT;
    if opts.raw_gramian {
        let plan = raw_gramian_plan(&problem.system, &x_outer, &req.x, &req.y, req.t_f, dt)?;
        // record the whole run (no abort) so the artifacts show the excursion
        let mon = Monitor::new("X'", MonitorSet::Polytope(x_outer.clone()), MonitorMode::Open, MonitorAction::Record);
        let traj = integrate(&problem.system, &plan.phases[0].law, &req.x, &Stop::at(req.t_f), dt, &[mon])?;
        let violation = traj.events.first().cloned().map(|e| (0, e));
        let run = PlanReport {
            contained: violation.is_none(),
            violation,
            endpoint: traj.endpoint().clone(),
            endpoint_error: (traj.endpoint() - &req.y).norm(),
            max_control_norm: traj.max_control_norm(),
            phases: vec![PhaseRun { label: "gramian".into(), start: 0.0, duration: traj.duration(), trajectory: traj }],
        };
        let exit_code = if run.contained { EXIT_OK } else { EXIT_INCONCLUSIVE };
        let mut report = Report {
            command: "steer".into(),
            verdict: if run.contained { "raw-gramian-contained".into() } else { "plan-failed".into() },
            exit_code,
            case: None,
            controllability_rank: problem.system.controllability_rank(),
            equilibrium: None,
            witnesses: Default::default(),
            gates: Vec::new(),
            bound_estimate: None,
            trace: vec![format!("open-loop Gramian transfer over t_f = {}", req.t_f)],
            warnings: Vec::new(),
            steer: Some(SteerReport::new("raw-gramian", &plan, &run)),
            artifacts: Vec::new(),
        };
        if let Some((_, ev)) = &run.violation {
            report.trace.push(format!("trajectory leaves the interior of X' at t = {:.6}", ev.time));
        }
        write_artifacts(problem, &run, &[None, None], opts, &mut report)?;
        return Ok(report);
    }

    let cert = ribc_certificate(problem)?;
    let mut report = Report::from_ribc(&cert, ribc_exit(cert.verdict));
    report.command = "steer".into();
    if cert.verdict != RibcVerdict::Certified {
        report.trace.push("steering needs an RIBC certificate".into());
        return Ok(report);
    }
    let (x1, x2) = (cert.x1.as_ref().expect("certified"), cert.x2.as_ref().expect("certified"));
    let origin = cert.equilibrium.clone().expect("certified");
    match ribc_steering_plan(&problem.system, &problem.x, &x_outer, x1, x2, &origin, &req.x, &req.y, req.rho, &problem.opts) {
        Ok(plan) => {
            let run = verify_plan(&plan, &x_outer, plan.dt)?;
            report.verdict = if run.contained { "plan-contained".into() } else { "plan-failed".into() };
            report.exit_code = if run.contained { EXIT_OK } else { EXIT_INCONCLUSIVE };
            report.steer = Some(SteerReport::new("composite", &plan, &run));
            write_artifacts(problem, &run, &[Some(&x1.set), Some(&x2.set)], opts, &mut report)?;
        }
        Err(CoreError::PlanFailed { phase, message }) => {
            report.verdict = "plan-failed".into();
            report.exit_code = EXIT_INCONCLUSIVE;
            report.trace.push(format!("plan failed in phase {phase}: {message}"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub expected: &'static str,
}

pub fn fixtures_list() -> Vec<FixtureInfo> {
    fixtures::all().iter().map(|f| FixtureInfo { name: f.name, summary: f.summary, expected: f.expected }).collect()
}

/// Write every built-in fixture as `<name>.json` into `dir`.
pub fn write_fixtures(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fixtures::all()
        .iter()
        .map(|fx| {
            let path = dir.join(format!("{}.json", fx.name));
            let text = serde_json::to_string_pretty(&ProblemFile::from_fixture(fx))?;
            std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
            Ok(path)
        })
        .collect()
}
