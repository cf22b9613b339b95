use rayon::prelude::*;
use serde::Serialize;

use super::counterexamples::{self, ExampleCase, ExampleError};
use crate::checkers::{
    check_differential, check_local, check_normalized_pbv, check_relaxed, CheckError, CheckReport,
    Concept,
};
use crate::paths::{
    convergence_diagnostics, ConvergenceDiagnostics, ConvergenceMode, ConvergenceTolerances,
    PathError, PiecewisePath,
};

type LoadGenerator = Box<dyn Fn(u32) -> Result<PiecewisePath, ExampleError> + Send + Sync>;
type CaseGenerator = Box<dyn Fn(u32) -> Result<ExampleCase, ExampleError> + Send + Sync>;

/// A sequence of loads `n -> ell_n` with its limit and the declared type of
/// convergence.
pub struct LoadFamily {
    pub name: String,
    generator: LoadGenerator,
    pub limit: PiecewisePath,
    pub declared: ConvergenceMode,
}

impl LoadFamily {
    pub fn new(
        name: impl Into<String>,
        generator: impl Fn(u32) -> Result<PiecewisePath, ExampleError> + Send + Sync + 'static,
        limit: PiecewisePath,
        declared: ConvergenceMode,
    ) -> Self {
        LoadFamily {
            name: name.into(),
            generator: Box::new(generator),
            limit,
            declared,
        }
    }

    pub fn load(&self, n: u32) -> Result<PiecewisePath, ExampleError> {
        (self.generator)(n)
    }

    pub fn counterexample1() -> Result<Self, ExampleError> {
        Ok(LoadFamily::new(
            "ce1",
            |n| counterexamples::ramp_loads(n, false),
            counterexamples::step_load()?,
            ConvergenceMode::Intermediate,
        ))
    }

    pub fn counterexample2() -> Result<Self, ExampleError> {
        Ok(LoadFamily::new(
            "ce2",
            |n| counterexamples::ramp_loads(n, true),
            PiecewisePath::zero(0.0, 2.0, 1)?,
            ConvergenceMode::WeakStarOnly,
        ))
    }
}

/// Exact candidates `n -> (problem_n, tuple_n)` and the limit candidate.
pub struct ExactTupleFamily {
    generator: CaseGenerator,
    pub limit: ExampleCase,
}

impl ExactTupleFamily {
    pub fn new(
        generator: impl Fn(u32) -> Result<ExampleCase, ExampleError> + Send + Sync + 'static,
        limit: ExampleCase,
    ) -> Self {
        ExactTupleFamily {
            generator: Box::new(generator),
            limit,
        }
    }

    pub fn case(&self, n: u32) -> Result<ExampleCase, ExampleError> {
        (self.generator)(n)
    }

    pub fn counterexample1() -> Result<Self, ExampleError> {
        Ok(ExactTupleFamily::new(
            counterexamples::counterexample1,
            counterexamples::counterexample1_limit()?,
        ))
    }

    pub fn counterexample2() -> Result<Self, ExampleError> {
        Ok(ExactTupleFamily::new(
            counterexamples::counterexample2,
            counterexamples::counterexample2_limit()?,
        ))
    }
}

/// Which member of a family a table row refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    Index(u32),
    Limit,
}

impl std::fmt::Display for Member {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Member::Index(n) => write!(f, "{n}"),
            Member::Limit => f.write_str("limit"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityRow {
    pub member: Member,
    pub concept: Concept,
    pub passed: bool,
    pub worst_residual: f64,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityTable {
    pub family: String,
    pub rows: Vec<StabilityRow>,
    pub loads: ConvergenceDiagnostics,
    pub loads_hat: ConvergenceDiagnostics,
    pub t_hat: ConvergenceDiagnostics,
    pub z_hat: ConvergenceDiagnostics,
    /// Whether the classification of the loads matches the declared mode.
    pub declared_mode_confirmed: bool,
}

impl StabilityTable {
    pub fn row(&self, member: Member, concept: Concept) -> Option<&StabilityRow> {
        self.rows
            .iter()
            .find(|r| r.member == member && r.concept == concept)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "concept", "verdict", "worst_residual", "witness"])?;
        for r in &self.rows {
            w.write_record([
                r.member.to_string(),
                r.concept.to_string(),
                if r.passed { "PASS" } else { "FAIL" }.to_string(),
                format!("{:e}", r.worst_residual),
                r.witness.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl std::fmt::Display for StabilityTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "family {}", self.family)?;
        writeln!(
            f,
            "{:<6} {:<15} {:<7} {:>12}  witness",
            "n", "concept", "verdict", "residual"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<6} {:<15} {:<7} {:>12.4e}  {}",
                r.member.to_string(),
                r.concept.as_str(),
                if r.passed { "PASS" } else { "FAIL" },
                r.worst_residual,
                r.witness
            )?;
        }
        writeln!(
            f,
            "loads: {:?}, parametrized loads: {:?}, t_hat: {:?}, z_hat: {:?}",
            self.loads.mode, self.loads_hat.mode, self.t_hat.mode, self.z_hat.mode
        )
    }
}

fn row(member: Member, concept: Concept, result: Result<CheckReport, CheckError>) -> StabilityRow {
    match result {
        Ok(report) => {
            let witness = report
                .failed()
                .map(|c| {
                    let at = c
                        .witness
                        .as_ref()
                        .map(|w| w.location.to_string())
                        .unwrap_or_default();
                    format!("{}: {:.4e} at {}", c.id, c.residual, at)
                })
                .collect::<Vec<_>>()
                .join("; ");
            StabilityRow {
                member,
                concept,
                passed: report.passed,
                worst_residual: report.worst_residual(),
                witness,
            }
        }
        Err(e) => StabilityRow {
            member,
            concept,
            passed: false,
            worst_residual: f64::INFINITY,
            witness: e.to_string(),
        },
    }
}

fn case_rows(
    member: Member,
    case: &ExampleCase,
    tol: f64,
    all_concepts: bool,
) -> Vec<StabilityRow> {
    let mut rows = vec![
        row(
            member,
            Concept::NormalizedPbv,
            check_normalized_pbv(&case.tuple, &case.problem, tol),
        ),
        row(
            member,
            Concept::Relaxed,
            check_relaxed(&case.tuple, &case.problem, tol),
        ),
    ];
    if let Some(z) = &case.physical {
        rows.push(row(
            member,
            Concept::Local,
            check_local(z, &case.problem, tol, &[]),
        ));
        if all_concepts || z.is_continuous() {
            rows.push(row(
                member,
                Concept::Differential,
                check_differential(z, &case.problem, tol),
            ));
        }
    }
    rows
}

/// Checks every member of the family against its own load and the limit
/// candidate against the limit load under all concepts, and classifies the
/// convergence of loads and tuples.
pub fn stability_experiment(
    loads: &LoadFamily,
    tuples: &ExactTupleFamily,
    ns: &[u32],
    tol: f64,
) -> Result<StabilityTable, ExampleError> {
    if ns.is_empty() {
        return Err(ExampleError::Path(PathError::Precondition(
            "no family members requested".into(),
        )));
    }
    let cases: Vec<ExampleCase> = ns
        .iter()
        .map(|&n| tuples.case(n))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<StabilityRow> = ns
        .par_iter()
        .zip(cases.par_iter())
        .flat_map_iter(|(&n, case)| case_rows(Member::Index(n), case, tol, false))
        .collect();
    rows.extend(case_rows(Member::Limit, &tuples.limit, tol, true));

    let seq_loads: Vec<PiecewisePath> = ns
        .iter()
        .map(|&n| loads.load(n))
        .collect::<Result<_, _>>()?;
    let conv_tol = ConvergenceTolerances::default();
    let grid = |a: f64, b: f64| -> Vec<f64> {
        (0..=200).map(|i| a + (b - a) * i as f64 / 200.0).collect()
    };
    let load_grid = grid(loads.limit.start(), loads.limit.end());
    let loads_diag = convergence_diagnostics(&seq_loads, &loads.limit, &load_grid, &conv_tol)?;

    let limit_tuple = &tuples.limit.tuple;
    let s_end = cases
        .iter()
        .map(|c| c.tuple.s_end())
        .fold(limit_tuple.s_end(), f64::max);
    let s_grid = grid(0.0, s_end);
    let extended: Vec<_> = cases.iter().map(|c| c.tuple.extended_to(s_end)).collect();
    let limit_ext = limit_tuple.extended_to(s_end);
    let diag = |pick: &dyn Fn(&crate::tuple::ParametrizedTuple) -> PiecewisePath| {
        let seq: Vec<PiecewisePath> = extended.iter().map(pick).collect();
        convergence_diagnostics(&seq, &pick(&limit_ext), &s_grid, &conv_tol)
    };
    let loads_hat = diag(&|t| t.ell_hat().clone())?;
    let t_hat = diag(&|t| t.t_hat().as_path().clone())?;
    let z_hat = diag(&|t| t.z_hat().as_path().clone())?;
    Ok(StabilityTable {
        family: loads.name.clone(),
        rows,
        declared_mode_confirmed: loads_diag.mode == loads.declared,
        loads: loads_diag,
        loads_hat,
        t_hat,
        z_hat,
    })
}

/// Default family indices.
pub const DEFAULT_NS: [u32; 6] = [1, 2, 4, 8, 16, 32];
