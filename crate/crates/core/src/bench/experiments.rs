use rayon::prelude::*;

use crate::engine::{run, Problem, RunTrace, StopRule};
use crate::error::{Error, Result};
use crate::graph::{generate_network, greedy_coloring, is_connected, Graph, NetworkModel};
use crate::scalar::Real;
use crate::solvers::{SolverConfig, SolverKind};

use super::instance::{gen_instance, InstanceSpec};
use super::oracle::solve_bp_centralized;

/// Candidate `ρ` values of a type II experiment.
pub const TYPE_TWO_GRID: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];

/// Fixed `ρ` of a type I experiment: 1 for D-ADMM and D-Lasso, 10 for the
/// double-looped methods.
pub fn type_one_rho<T: Real>(kind: &SolverKind<T>) -> Option<T> {
    match kind {
        SolverKind::Subgradient => None,
        k if k.is_double_looped() => Some(T::lit(10.0)),
        _ => Some(T::one()),
    }
}

/// First connected graph among seeds `seed, seed + 1, ...`; returns it with
/// the seed used.
pub fn connected_network(
    model: NetworkModel,
    nodes: usize,
    seed: u64,
    tries: usize,
) -> Result<(Graph, u64)> {
    for s in seed..seed + tries as u64 {
        let g = generate_network(model, nodes, s)?;
        if is_connected(&g) {
            return Ok((g, s));
        }
    }
    Err(Error::Disconnected)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T> {
    pub best_rho: T,
    pub best: RunTrace<T>,
    /// Every run, in grid order.
    pub traces: Vec<(T, RunTrace<T>)>,
}

/// Ranking key: index of the finest target reached (higher is better), then
/// steps to it (lower is better).
fn rank<T: Real>(t: &RunTrace<T>) -> Option<(usize, usize)> {
    t.steps_to_accuracy
        .iter()
        .enumerate()
        .rev()
        .find_map(|(i, (_, s))| s.map(|s| (i, s)))
}

fn better<T: Real>(a: &RunTrace<T>, b: &RunTrace<T>) -> bool {
    match (rank(a), rank(b)) {
        (Some(_), None) => true,
        (Some((ia, sa)), Some((ib, sb))) => ia > ib || (ia == ib && sa < sb),
        _ => false,
    }
}

/// Runs `kind` for every `ρ` in `grid` and keeps the one reaching the finest
/// target in the fewest steps; ties go to the smaller `ρ`.
///
/// Values are tried from the middle of the sorted grid outwards. Once some
/// run has reached the finest target in `s` steps, later runs are capped at
/// `s` steps: a capped run could not have won, so the selection equals that
/// of full-length runs. Capped traces are kept as they are.
pub fn rho_sweep<T: Real>(
    grid: &[T],
    kind: SolverKind<T>,
    problem: Problem<'_, T>,
    rule: &StopRule<T>,
    x_ref: &[T],
    cfg: SolverConfig<T>,
) -> Result<SweepResult<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty rho grid".into()));
    }
    let mut sorted: Vec<T> = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite rho"));
    let mid = (sorted.len() - 1) / 2;
    let mut order: Vec<usize> = (0..sorted.len()).collect();
    order.sort_by_key(|&i| (i.abs_diff(mid), i));

    let mut traces: Vec<Option<RunTrace<T>>> = vec![None; sorted.len()];
    let mut best: Option<usize> = None;
    for i in order {
        let mut capped = rule.clone();
        if let Some(b) = best.and_then(|b| traces[b].as_ref().expect("ran").steps_to(rule.finest()))
        {
            capped.max_comm_steps = capped.max_comm_steps.min(b);
        }
        let trace = run(kind.with_rho(sorted[i]), problem, &capped, x_ref, cfg)?;
        let wins = match best {
            None => true,
            Some(b) => {
                let cur = traces[b].as_ref().expect("ran");
                better(&trace, cur) || (i < b && !better(cur, &trace) && rank(&trace) == rank(cur))
            }
        };
        traces[i] = Some(trace);
        if wins {
            best = Some(i);
        }
    }
    let best = best.expect("nonempty grid");
    let traces: Vec<(T, RunTrace<T>)> = sorted
        .into_iter()
        .zip(traces.into_iter().map(|t| t.expect("ran")))
        .collect();
    Ok(SweepResult {
        best_rho: traces[best].0,
        best: traces[best].1.clone(),
        traces,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleConfig<T> {
    /// Instance shared by every network size; `parts` is overridden.
    pub instance: InstanceSpec,
    pub sizes: Vec<usize>,
    /// Watts–Strogatz neighbor count and rewiring probability.
    pub neighbors: usize,
    pub rewire: f64,
    pub network_seed: u64,
    pub target: T,
    pub max_comm_steps: usize,
    pub grid: Vec<T>,
}

impl<T: Real> ScaleConfig<T> {
    /// `m = 128, n = 512` with `k = m/4`. Sparser instances converge in a
    /// handful of steps at small `P`, which steepens the fitted curve.
    pub fn desk(sizes: Vec<usize>) -> Self {
        let mut instance = InstanceSpec::new(128, 512, 2, 7);
        instance.k = 32;
        Self {
            instance,
            sizes,
            neighbors: 4,
            rewire: 0.6,
            network_seed: 1,
            target: T::lit(1e-3),
            max_comm_steps: 10_000,
            grid: TYPE_TWO_GRID.iter().map(|&r| T::lit(r)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRow<T> {
    pub nodes: usize,
    pub d_admm: Option<usize>,
    pub d_admm_rho: T,
    pub d_lasso: Option<usize>,
    pub d_lasso_rho: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleTable<T> {
    pub rows: Vec<ScaleRow<T>>,
    /// Fitted `(c, e)` of `steps ≈ c P^e`; `None` with fewer than two
    /// converged sizes.
    pub d_admm_fit: Option<(f64, f64)>,
    pub d_lasso_fit: Option<(f64, f64)>,
}

impl<T: Real> ScaleTable<T> {
    pub fn to_csv(&self) -> String {
        let cell = |s: Option<usize>| s.map_or_else(|| "NA".to_string(), |s| s.to_string());
        let mut out = String::from("P,d_admm_steps,d_admm_rho,d_lasso_steps,d_lasso_rho\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.nodes,
                cell(r.d_admm),
                r.d_admm_rho,
                cell(r.d_lasso),
                r.d_lasso_rho
            ));
        }
        out
    }

    /// Sizes where some algorithm did not reach the target.
    pub fn nonconvergent(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.d_admm.is_none() || r.d_lasso.is_none())
            .map(|r| r.nodes)
            .collect()
    }
}

/// Least-squares fit of `log y = log c + e log x`; returns `(c, e)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let e = sxy / sxx;
    Some(((my - e * mx).exp(), e))
}

/// Communication steps of D-ADMM and D-Lasso (best `ρ` per cell) versus
/// network size on Watts–Strogatz graphs, with a fixed instance.
///
/// Sizes too small for the requested neighbor count use `P - 1`
/// neighbors.
pub fn scale_experiment<T: Real>(cfg: &ScaleConfig<T>) -> Result<ScaleTable<T>> {
    let mut base = cfg.instance;
    base.parts = 1;
    let inst = gen_instance::<T>(&base)?;
    let cert = solve_bp_centralized(&inst.a, &inst.b, T::lit(1e-10))?;
    let rule = StopRule::new(vec![cfg.target], cfg.max_comm_steps)?;
    let solver_cfg = SolverConfig::default();

    let rows = cfg
        .sizes
        .par_iter()
        .map(|&p| -> Result<ScaleRow<T>> {
            let mut spec = base;
            spec.parts = p;
            let part = spec.partition_spec()?;
            let neighbors = cfg.neighbors.min(p - 1);
            // odd neighbor counts add the opposite node, which needs even P
            let neighbors = if neighbors % 2 == 1 && p % 2 == 1 {
                neighbors - 1
            } else {
                neighbors
            };
            let model = NetworkModel::WattsStrogatz {
                neighbors,
                p: cfg.rewire,
            };
            let (graph, _) = connected_network(model, p, cfg.network_seed, 100)?;
            let coloring = greedy_coloring(&graph);
            let problem = Problem {
                a: &inst.a,
                b: &inst.b,
                spec: &part,
                graph: &graph,
                coloring: Some(&coloring),
            };
            let admm = rho_sweep(
                &cfg.grid,
                SolverKind::DAdmmRow { rho: T::one() },
                problem,
                &rule,
                &cert.x,
                solver_cfg,
            )?;
            let lasso = rho_sweep(
                &cfg.grid,
                SolverKind::DLasso { rho: T::one() },
                problem,
                &rule,
                &cert.x,
                solver_cfg,
            )?;
            Ok(ScaleRow {
                nodes: p,
                d_admm: admm.best.steps_to(cfg.target),
                d_admm_rho: admm.best_rho,
                d_lasso: lasso.best.steps_to(cfg.target),
                d_lasso_rho: lasso.best_rho,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let fit = |f: fn(&ScaleRow<T>) -> Option<usize>| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| f(r).map(|s| (r.nodes as f64, s.max(1) as f64)))
            .collect();
        fit_power_law(&pts)
    };
    let d_admm_fit = fit(|r| r.d_admm);
    let d_lasso_fit = fit(|r| r.d_lasso);
    Ok(ScaleTable {
        rows,
        d_admm_fit,
        d_lasso_fit,
    })
}
