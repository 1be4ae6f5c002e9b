use serde::Serialize;
use std::path::{Path, PathBuf};

use super::config::ExperimentConfig;
use super::golden::{compare, load_golden, snapshot};
use super::report::{Provenance, ReportEnvelope};
use crate::dynamics::{
    estimate_hitting, ks_exponential, simulate_kmc, simulate_naive, Method, SimConfig, StopCondition, Target,
    TrajectoryEvent,
};
use crate::error::{Error, Result};
use crate::landscape::{landscape_report, EnumeratedSpace, StateSpace};
use crate::potential::{
    asymptotic_report, capacity, equilibrium_potential, gibbs_log_measure, mean_hitting_exact, theta_variational,
    SolverOptions,
};
use crate::spin::{star_table, PottsModel, SpinConfiguration, PAIRS};
use crate::verify::{run_all, VerifyOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Landscape,
    Simulate,
    Solve,
    Reduce,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Landscape => "landscape",
            Command::Simulate => "simulate",
            Command::Solve => "solve",
            Command::Reduce => "reduce",
            Command::Verify => "verify",
        }
    }
}

pub struct RunOutcome {
    pub report: ReportEnvelope,
    /// `false` only when `verify` found a failing check.
    pub passed: bool,
    /// CSV files written next to the report.
    pub artifacts: Vec<PathBuf>,
}

fn enumerate(config: &ExperimentConfig) -> Result<EnumeratedSpace> {
    EnumeratedSpace::with_budget(config.model()?, config.budget)
}

fn solver_options(config: &ExperimentConfig) -> SolverOptions {
    SolverOptions { backend: config.solve.backend, use_symmetry: config.solve.symmetry, ..Default::default() }
}

#[derive(Serialize)]
struct TrajectoryRow {
    time: f64,
    site: usize,
    spin: usize,
    energy: String,
}

/// `time,site,spin,energy` with spins as 1..3 and exact decimal energies.
pub fn write_trajectory_csv(path: &Path, model: &PottsModel, events: &[TrajectoryEvent]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for e in events {
        w.serialize(TrajectoryRow {
            time: e.time,
            site: e.site,
            spin: e.spin.index() + 1,
            energy: model.params.format(e.energy),
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

#[derive(Serialize)]
struct PotentialRow {
    state: u64,
    energy: String,
    potential: f64,
}

fn simulate(config: &ExperimentConfig, out: Option<&Path>, report: &mut ReportEnvelope) -> Result<Vec<PathBuf>> {
    let model = config.model()?;
    let s = &config.simulate;
    if s.trajectory && out.is_none() {
        return Err(Error::Config(vec!["simulate.trajectory needs an output directory (--out)".into()]));
    }
    let mut files = Vec::new();
    for &beta in &config.betas {
        let sim = SimConfig::new(
            beta,
            SpinConfiguration::uniform(model.sites(), s.start),
            StopCondition { target: Some(Target::Uniform(s.target.clone())), max_events: s.max_events, max_time: s.max_time },
            config.seed,
            config.replicas,
        );
        let stats = estimate_hitting(&model, &sim, s.method)?;
        let ks = if stats.hits >= 2 { Some(ks_exponential(&stats.scaled())?) } else { None };
        report.push(
            format!("hitting@{beta}"),
            Provenance::MonteCarlo,
            &serde_json::json!({ "statistics": stats, "ks_exponential": ks }),
        )?;
        if let (true, Some(dir)) = (s.trajectory, out) {
            let run = match s.method {
                Method::Kmc => simulate_kmc(&model, &sim, 0)?,
                Method::Naive => simulate_naive(&model, &sim, 0)?,
            };
            let path = dir.join(format!("trajectory_beta_{beta}.csv"));
            write_trajectory_csv(&path, &model, &run.events)?;
            files.push(path);
        }
    }
    Ok(files)
}

fn solve(config: &ExperimentConfig, out: Option<&Path>, report: &mut ReportEnvelope) -> Result<Vec<PathBuf>> {
    let space = enumerate(config)?;
    let opts = solver_options(config);
    let s = &config.solve;
    let start = space.uniform(s.start);
    let target: Vec<u64> = s.target.iter().map(|&t| space.uniform(t)).collect();
    let mut files = Vec::new();
    for &beta in &config.betas {
        let mean = mean_hitting_exact(&space, start, &target, beta, &opts)?;
        let cap = capacity(&space, &[start], &target, beta, &opts)?;
        let gibbs = gibbs_log_measure(&space, beta)?;
        report.push(
            format!("solve@{beta}"),
            Provenance::Solver,
            &serde_json::json!({
                "mean_hitting": mean,
                "capacity": cap,
                "ln_partition": gibbs.log_z,
                "ln_mu_start": gibbs.log_mu(start),
            }),
        )?;
        if let Some(dir) = out {
            let field = equilibrium_potential(&space, &[start], &target, beta, &opts)?;
            let path = dir.join(format!("potential_beta_{beta}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(csv_error)?;
            for st in 0..space.len() as u64 {
                w.serialize(PotentialRow {
                    state: st,
                    energy: space.model().params.format(space.energy(st)),
                    potential: field.at(st),
                })
                .map_err(csv_error)?;
            }
            w.flush()?;
            files.push(path);
        }
    }
    Ok(files)
}

fn reduce(config: &ExperimentConfig, report: &mut ReportEnvelope) -> Result<()> {
    let space = enumerate(config)?;
    let r = asymptotic_report(&space, &config.betas, config.solve.normalization, &solver_options(config))?;
    report.push("barriers", Provenance::ExactInteger, &r.barriers)?;
    let rows: Vec<_> = r.rows.iter().map(|row| &row.trace).collect();
    report.push("trace_rates", Provenance::Solver, &rows)?;
    report.push("scaling", Provenance::Solver, &r.scaling)?;
    let stars = star_table(space.model());
    let mut theta = Vec::new();
    for &(i, j) in &PAIRS {
        let ell = stars.pair(i, j).ell_c as usize;
        if ell >= 2 {
            theta.push(theta_variational(ell, 1.0)?);
        }
    }
    report.push("theta_per_unit_count", Provenance::Solver, &theta)?;
    Ok(())
}

/// Runs `command` on `config`. With `out`, the report goes to
/// `out/<command>.json` and CSV dumps are written beside it.
pub fn run(command: Command, config: &ExperimentConfig, out: Option<&Path>) -> Result<RunOutcome> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
    }
    let mut report = ReportEnvelope::new(command.name(), config)?;
    let mut passed = true;
    let mut artifacts = Vec::new();
    match command {
        Command::Landscape => {
            let space = enumerate(config)?;
            report.push("landscape", Provenance::ExactInteger, &landscape_report(&space)?)?;
        }
        Command::Simulate => artifacts = simulate(config, out, &mut report)?,
        Command::Solve => artifacts = solve(config, out, &mut report)?,
        Command::Reduce => reduce(config, &mut report)?,
        Command::Verify => {
            let outcomes = run_all(&VerifyOptions { seed: config.seed }, |o| eprintln!("{}", o.line()));
            passed = outcomes.iter().all(|o| o.passed);
            report.push("acceptance", Provenance::Solver, &outcomes)?;
            if let Some(path) = &config.golden {
                let golden = load_golden(Path::new(path))?;
                let mismatches = compare(&golden, &snapshot(config)?);
                passed &= mismatches.is_empty();
                report.push("golden", Provenance::ExactInteger, &mismatches)?;
            }
        }
    }
    if let Some(dir) = out {
        let path = dir.join(format!("{}.json", command.name()));
        std::fs::write(&path, report.to_canonical_json()?)?;
        artifacts.insert(0, path);
    }
    Ok(RunOutcome { report, passed, artifacts })
}
