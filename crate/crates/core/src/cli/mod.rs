//! Command-line driver.

mod config;
pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Parser;

pub use config::{Command, ConceptArg, ConfigError, ProblemSpec, RunConfig};

use crate::checkers::{
    check_differential, check_local, check_normalized_pbv, check_relaxed, CheckReport, DEFAULT_TOL,
};
use crate::construction::{construct_relaxed_from_local, ConstructionError};
use crate::experiments::{
    counterexample1, counterexample1_limit, counterexample2, counterexample2_limit,
    is_monotone_within, stability_experiment, viscous_crosscheck, write_crosscheck_csv,
    ExactTupleFamily, LoadFamily, Reference, DEFAULT_NS,
};
use crate::model::RISProblem;
use crate::paths::{io, PiecewisePath};
use crate::tuple::ParametrizedTuple;
use crate::viscous::{default_step, reparametrize, solve_viscous};

const DEFAULT_EPSILON: f64 = 1e-3;
const DEFAULT_SWEEP: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];

#[derive(Debug, Parser)]
#[command(
    name = "rislab",
    version,
    about = "Rate-independent systems with BV loads"
)]
pub struct Args {
    /// Subcommand; may instead be given as `command` in the config file.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checker tolerance (default 1e-8).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Family index of the built-in examples.
    #[arg(long)]
    pub n: Option<u32>,
    /// Viscosity of the approximating problem.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Time step of the viscous solver (default epsilon / 10).
    #[arg(long)]
    pub step: Option<f64>,
    /// Solution concept for `check`.
    #[arg(long, value_enum)]
    pub concept: Option<ConceptArg>,
    /// Candidate: a path CSV, a tuple JSON or a directory with
    /// `t_hat.csv`, `z_hat.csv` and `ell_hat.csv`.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// `zero`, `step` or a path CSV; replaces the problem's load.
    #[arg(long)]
    pub load: Option<String>,
    /// Built-in problem: ce1, ce2 or asymmetric.
    #[arg(long)]
    pub problem: Option<String>,
}

impl Args {
    /// Merges the config file (if any) with the flags; flags win.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, self.command) {
            (Some(path), _) => RunConfig::from_file(path)?,
            (None, Some(command)) => RunConfig::empty(command),
            (None, None) => bail!("no command given; pass a subcommand or --config"),
        };
        if let Some(c) = self.command {
            cfg.command = c;
        }
        cfg.out = self.out.clone().or(cfg.out);
        cfg.tol = self.tol.or(cfg.tol);
        cfg.concept = self.concept.or(cfg.concept);
        cfg.solution = self.solution.clone().or(cfg.solution);
        cfg.problem.n = self.n.or(cfg.problem.n);
        cfg.problem.load = self.load.clone().or(cfg.problem.load);
        cfg.problem.builtin = self.problem.clone().or(cfg.problem.builtin);
        cfg.solver.epsilon = self.epsilon.or(cfg.solver.epsilon);
        cfg.solver.step = self.step.or(cfg.solver.step);
        if let Some(tol) = cfg.tol {
            if !tol.is_finite() || tol <= 0.0 {
                bail!("tolerance must be positive, got {tol}");
            }
        }
        Ok(cfg)
    }
}

/// Result of a run: whether every requested verdict passed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub passed: bool,
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_tuple(dir: &Path, stem: &str, tuple: &ParametrizedTuple) -> Result<()> {
    io::save_path(tuple.t_hat(), dir.join(format!("{stem}t_hat.csv")))?;
    io::save_path(tuple.z_hat(), dir.join(format!("{stem}z_hat.csv")))?;
    io::save_path(tuple.ell_hat(), dir.join(format!("{stem}ell_hat.csv")))?;
    write_text(
        &dir.join(format!("{stem}tuple.json")),
        &serde_json::to_string_pretty(tuple)?,
    )?;
    let svg = svg::render(
        &format!("{stem}tuple, S = {}", tuple.s_end()),
        &[
            ("t_hat", tuple.t_hat()),
            ("z_hat", tuple.z_hat()),
            ("ell_hat", tuple.ell_hat()),
        ],
    );
    write_text(&dir.join(format!("{stem}profile.svg")), &svg)
}

fn write_report(dir: &Path, report: &CheckReport) -> Result<()> {
    print!("{report}");
    write_text(
        &dir.join(format!("report_{}.json", report.concept)),
        &report.to_json(),
    )
}

fn load_tuple(path: &Path) -> Result<ParametrizedTuple> {
    if path.is_dir() {
        let read =
            |name: &str| io::load_path(path.join(name)).with_context(|| format!("reading {name}"));
        let t_hat = crate::paths::LipschitzPath::new(read("t_hat.csv")?)?;
        let z_hat = crate::paths::LipschitzPath::new(read("z_hat.csv")?)?;
        return Ok(ParametrizedTuple::new(t_hat, z_hat, read("ell_hat.csv")?)?);
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_solution(cfg: &RunConfig) -> Result<&Path> {
    cfg.solution
        .as_deref()
        .context("--solution is required for this command")
}

fn problem(cfg: &RunConfig) -> Result<RISProblem> {
    Ok(cfg.problem.build("ce1")?)
}

fn solve(cfg: &RunConfig) -> Result<Outcome> {
    let problem = problem(cfg)?;
    let epsilon = cfg.solver.epsilon.unwrap_or(DEFAULT_EPSILON);
    let step = cfg.solver.step.unwrap_or_else(|| default_step(epsilon));
    let traj = solve_viscous(&problem, epsilon, step)?;
    let tuple = reparametrize(&traj, &problem)?;
    let dir = out_dir(cfg)?;
    let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=problem.dim()).map(|i| format!("z_{i}")));
    w.write_record(&header)?;
    for (t, z) in traj.time_grid.iter().zip(&traj.states) {
        let mut rec = vec![t.to_string()];
        rec.extend(z.iter().map(|x| x.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    write_tuple(&dir, "", &tuple)?;
    println!(
        "steps {}  S = {:.6}  max step residual {:.2e}  max energy excess {:.2e}",
        traj.rates.len(),
        tuple.s_end(),
        traj.max_step_residual(),
        traj.max_energy_excess()
    );
    Ok(Outcome { passed: true })
}

fn check(cfg: &RunConfig) -> Result<Outcome> {
    let problem = problem(cfg)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let concept = cfg.concept.context("--concept is required for check")?;
    let solution = load_solution(cfg)?;
    let report = match concept {
        ConceptArg::Local | ConceptArg::Differential => {
            let z: PiecewisePath = io::load_path(solution)?;
            if concept == ConceptArg::Local {
                check_local(&z, &problem, tol, &[])?
            } else {
                check_differential(&z, &problem, tol)?
            }
        }
        ConceptArg::Pbv => check_normalized_pbv(&load_tuple(solution)?, &problem, tol)?,
        ConceptArg::Relaxed => check_relaxed(&load_tuple(solution)?, &problem, tol)?,
    };
    write_report(&out_dir(cfg)?, &report)?;
    Ok(Outcome {
        passed: report.passed,
    })
}

fn construct(cfg: &RunConfig) -> Result<Outcome> {
    let problem = problem(cfg)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let z = io::load_path(load_solution(cfg)?)?;
    let dir = out_dir(cfg)?;
    match construct_relaxed_from_local(&z, &problem, tol) {
        Ok(result) => {
            write_tuple(&dir, "", &result.tuple)?;
            write_report(&dir, &result.report)?;
            write_text(
                &dir.join("projection_witness.json"),
                &serde_json::to_string_pretty(&result.projection_witness)?,
            )?;
            Ok(Outcome { passed: true })
        }
        Err(ConstructionError::NotLocal(report)) | Err(ConstructionError::NotRelaxed(report)) => {
            eprintln!("construction rejected");
            write_report(&dir, &report)?;
            Ok(Outcome { passed: false })
        }
        Err(e) => Err(e.into()),
    }
}

fn counterexample(cfg: &RunConfig, first: bool) -> Result<Outcome> {
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let ns: Vec<u32> = cfg.problem.n.map_or(DEFAULT_NS.to_vec(), |n| vec![n]);
    let (loads, tuples) = if first {
        (
            LoadFamily::counterexample1()?,
            ExactTupleFamily::counterexample1()?,
        )
    } else {
        (
            LoadFamily::counterexample2()?,
            ExactTupleFamily::counterexample2()?,
        )
    };
    let table = stability_experiment(&loads, &tuples, &ns, tol)?;
    print!("{table}");
    let dir = out_dir(cfg)?;
    table.write_csv(fs::File::create(dir.join("stability.csv"))?)?;
    write_text(
        &dir.join("stability.json"),
        &serde_json::to_string_pretty(&table)?,
    )?;
    let last = *ns.last().expect("nonempty");
    let case = if first {
        counterexample1(last)?
    } else {
        counterexample2(last)?
    };
    let limit = if first {
        counterexample1_limit()?
    } else {
        counterexample2_limit()?
    };
    write_tuple(&dir, &format!("n{last}_"), &case.tuple)?;
    write_tuple(&dir, "limit_", &limit.tuple)?;
    Ok(Outcome { passed: true })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let n = cfg.problem.n.unwrap_or(4);
    let reference = match cfg
        .sweep
        .reference
        .as_deref()
        .or(cfg.problem.builtin.as_deref())
    {
        None | Some("first") | Some("ce1") => Reference::First,
        Some("second") | Some("ce2") => Reference::Second,
        Some(other) => bail!("unknown sweep reference '{other}' (expected first or second)"),
    };
    let epsilons = cfg
        .sweep
        .epsilons
        .clone()
        .unwrap_or_else(|| match cfg.solver.epsilon {
            Some(e) => vec![e],
            None => DEFAULT_SWEEP.to_vec(),
        });
    let fixed = cfg.solver.step;
    let rows = viscous_crosscheck(reference, n, &epsilons, |e| {
        fixed.unwrap_or(default_step(e))
    })?;
    let dir = out_dir(cfg)?;
    write_crosscheck_csv(&rows, fs::File::create(dir.join("sweep.csv"))?)?;
    write_crosscheck_csv(&rows, std::io::stdout())?;
    let errors: Vec<f64> = rows.iter().map(|r| r.sup_err_z).collect();
    let monotone = is_monotone_within(&errors, 0.1);
    if !monotone {
        eprintln!("errors are not monotone under refinement: {errors:?}");
    }
    Ok(Outcome { passed: monotone })
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    log::info!("running {:?}", cfg.command);
    match cfg.command {
        Command::Solve => solve(cfg),
        Command::Check => check(cfg),
        Command::Construct => construct(cfg),
        Command::Counterexample1 => counterexample(cfg, true),
        Command::Counterexample2 => counterexample(cfg, false),
        Command::Sweep => sweep(cfg),
    }
}
