//! Full runs: iterate a [`Solver`] and record one trace row per
//! communication step.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{greedy_coloring, is_connected, Coloring, Graph};
use crate::linalg::{dist2, norm2, DenseMatrix, PartitionSpec};
use crate::scalar::Real;
use crate::solvers::{Solver, SolverConfig, SolverKind};

/// When to stop a run.
#[derive(Debug, Clone, PartialEq)]
pub struct StopRule<T> {
    /// Relative-error thresholds, strictly decreasing.
    pub targets: Vec<T>,
    pub max_comm_steps: usize,
}

impl<T: Real> StopRule<T> {
    pub fn new(targets: Vec<T>, max_comm_steps: usize) -> Result<Self> {
        if targets.is_empty() || targets.iter().any(|&t| !(t > T::zero())) {
            return Err(Error::InvalidInput("targets must be positive".into()));
        }
        if targets.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidInput(
                "targets must be strictly decreasing".into(),
            ));
        }
        Ok(Self {
            targets,
            max_comm_steps,
        })
    }

    pub fn finest(&self) -> T {
        *self.targets.last().expect("nonempty targets")
    }
}

impl<T: Real> Default for StopRule<T> {
    fn default() -> Self {
        Self::new(vec![T::lit(1e-2), T::lit(1e-5)], 10_000).expect("valid defaults")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<T> {
    pub step: usize,
    /// Worst relative error over the nodes.
    pub max_rel_err: T,
    pub node0_rel_err: T,
    pub consensus_residual: T,
    pub objective: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    pub algorithm: String,
    pub rho: Option<T>,
    pub delta: Option<T>,
    pub seed: Option<u64>,
    pub comm_steps: usize,
    /// Row 0 is the initial point; row `k` follows communication step `k`.
    pub records: Vec<TraceRecord<T>>,
    /// First step whose worst-node error is at or below each target.
    pub steps_to_accuracy: Vec<(T, Option<usize>)>,
    /// The finest target was reached.
    pub converged: bool,
    pub inner_failures: usize,
    pub outer_iterations: usize,
}

impl<T: Real> RunTrace<T> {
    pub fn steps_to(&self, target: T) -> Option<usize> {
        self.steps_to_accuracy
            .iter()
            .find(|(t, _)| *t == target)
            .and_then(|(_, s)| *s)
    }

    /// Finest target reached and the step it was reached at.
    pub fn finest_reached(&self) -> Option<(T, usize)> {
        self.steps_to_accuracy
            .iter()
            .rev()
            .find_map(|&(t, s)| s.map(|s| (t, s)))
    }

    pub fn final_error(&self) -> T {
        self.records.last().map_or(T::nan(), |r| r.max_rel_err)
    }

    /// CSV with 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,max_rel_err,node0_rel_err,consensus_residual,objective\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.step,
                r.max_rel_err.as_f64(),
                r.node0_rel_err.as_f64(),
                r.consensus_residual.as_f64(),
                r.objective.as_f64()
            );
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// `‖x - x_ref‖₂ / ‖x_ref‖₂`.
pub fn relative_error<T: Real>(x: &[T], x_ref: &[T]) -> Result<T> {
    if x.len() != x_ref.len() {
        return Err(Error::Dimension(format!(
            "estimate has {} entries, reference {}",
            x.len(),
            x_ref.len()
        )));
    }
    let scale = norm2(x_ref);
    if !(scale > T::zero()) {
        return Err(Error::InvalidInput("reference solution is zero".into()));
    }
    Ok(dist2(x, x_ref) / scale)
}

/// Network-wide estimate of the solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub x: Vec<T>,
    /// Relative error per node (row partitions) or of the concatenation
    /// (column partitions); empty without a reference.
    pub errors: Vec<T>,
}

/// Row partitions: the copy `x_p` with the largest error (node 0 without a
/// reference). Column partitions: the fragments concatenated in node order.
pub fn global_estimate<T: Real>(solver: &Solver<T>, x_ref: Option<&[T]>) -> Result<Estimate<T>> {
    let parts = solver.node_estimates();
    match solver.kind().partition_kind() {
        crate::linalg::PartitionKind::Row => {
            let Some(r) = x_ref else {
                return Ok(Estimate {
                    x: parts[0].to_vec(),
                    errors: Vec::new(),
                });
            };
            let errors = parts
                .iter()
                .map(|x| relative_error(x, r))
                .collect::<Result<Vec<_>>>()?;
            let worst = (0..errors.len()).fold(0, |w, p| if errors[p] > errors[w] { p } else { w });
            Ok(Estimate {
                x: parts[worst].to_vec(),
                errors,
            })
        }
        crate::linalg::PartitionKind::Column => {
            let x: Vec<T> = parts.concat();
            let errors = match x_ref {
                Some(r) => vec![relative_error(&x, r)?],
                None => Vec::new(),
            };
            Ok(Estimate { x, errors })
        }
    }
}

fn record<T: Real>(solver: &Solver<T>, x_ref: &[T]) -> Result<TraceRecord<T>> {
    let est = global_estimate(solver, Some(x_ref))?;
    let max = est.errors.iter().copied().fold(T::zero(), T::max);
    Ok(TraceRecord {
        step: solver.steps(),
        max_rel_err: max,
        node0_rel_err: est.errors[0],
        consensus_residual: solver.consensus_residual(),
        objective: solver.objective(),
    })
}

/// Everything a run needs besides the algorithm.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a, T> {
    pub a: &'a DenseMatrix<T>,
    pub b: &'a [T],
    pub spec: &'a PartitionSpec,
    pub graph: &'a Graph,
    /// Greedy coloring when absent.
    pub coloring: Option<&'a Coloring>,
}

/// Runs `kind` from zero until the finest target is reached or the step
/// budget is spent.
pub fn run<T: Real>(
    kind: SolverKind<T>,
    problem: Problem<'_, T>,
    rule: &StopRule<T>,
    x_ref: &[T],
    cfg: SolverConfig<T>,
) -> Result<RunTrace<T>> {
    if !is_connected(problem.graph) {
        return Err(Error::Disconnected);
    }
    if !(norm2(x_ref) > T::zero()) {
        return Err(Error::InvalidInput("reference solution is zero".into()));
    }
    if x_ref.len() != problem.a.cols() {
        return Err(Error::Dimension(
            "reference length differs from the number of columns".into(),
        ));
    }
    let greedy;
    let coloring = match problem.coloring {
        Some(c) => c,
        None => {
            greedy = greedy_coloring(problem.graph);
            &greedy
        }
    };
    let mut solver = Solver::new(
        kind,
        problem.a,
        problem.b,
        problem.spec,
        problem.graph,
        coloring,
        cfg,
    )?;
    run_solver(&mut solver, rule, x_ref)
}

/// Drives an already constructed solver.
pub fn run_solver<T: Real>(
    solver: &mut Solver<T>,
    rule: &StopRule<T>,
    x_ref: &[T],
) -> Result<RunTrace<T>> {
    let kind = *solver.kind();
    let mut steps_to: Vec<(T, Option<usize>)> = rule.targets.iter().map(|&t| (t, None)).collect();
    let mut records = Vec::with_capacity(rule.max_comm_steps.min(1 << 16) + 1);
    let mut rec = record(solver, x_ref)?;
    loop {
        for entry in steps_to.iter_mut() {
            if entry.1.is_none() && rec.max_rel_err <= entry.0 {
                entry.1 = Some(rec.step);
            }
        }
        records.push(rec);
        if steps_to.last().is_some_and(|e| e.1.is_some()) || solver.steps() >= rule.max_comm_steps {
            break;
        }
        solver.step()?;
        rec = record(solver, x_ref)?;
    }
    let converged = steps_to.last().is_some_and(|e| e.1.is_some());
    Ok(RunTrace {
        algorithm: kind.name().to_string(),
        rho: kind.rho(),
        delta: kind.delta(),
        seed: None,
        comm_steps: solver.steps(),
        records,
        steps_to_accuracy: steps_to,
        converged,
        inner_failures: solver.inner_failures(),
        outer_iterations: solver.outer_iterations(),
    })
}
