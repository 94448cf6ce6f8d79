//! Distributed solvers as one-communication-step state machines.
//!
//! A [`Solver`] owns per-node data and state for one algorithm. Each call to
//! [`Solver::step`] performs exactly one communication step: one round for
//! the single-looped methods (D-ADMM, D-Lasso, subgradient) and one inner
//! iteration for the double-looped ones (MM/NGS, MM/DQA, DN). Outer dual
//! updates of the double-looped methods reuse the last exchanged iterates
//! and cost no step.
//!
//! Node solves that may run concurrently (one color class, or all nodes of a
//! synchronous method) are executed on a rayon pool; results are committed
//! in node order, so iterates do not depend on the thread count.

mod duals;

pub use duals::{gamma_from_duals, mm_outer_update, nesterov_outer_update, EdgeDuals};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{is_connected, Coloring, Graph};
use crate::linalg::{
    affine_projection, dist2, norm1, norm_inf, partition, DenseMatrix, PartitionKind, PartitionSpec,
};
use crate::scalar::{sign_nonneg, Real};
use crate::subproblem::{BbConfig, ColSubproblem, RowSubproblem};

/// Inner-loop stopping rule of the double-looped methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerLoop<T> {
    /// Fixed-point residual threshold; `None` means `1e-6 (1 + ‖b‖∞)`.
    pub tol: Option<T>,
    pub cap: usize,
}

impl<T> Default for InnerLoop<T> {
    fn default() -> Self {
        Self { tol: None, cap: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind<T> {
    DAdmmRow { rho: T },
    DAdmmCol { rho: T, delta: T },
    DLasso { rho: T },
    Subgradient,
    MmNgs { rho: T, inner: InnerLoop<T> },
    MmDqa { rho: T, inner: InnerLoop<T> },
    Dn { rho: T, inner: InnerLoop<T> },
}

impl<T: Real> SolverKind<T> {
    pub const NAMES: [&'static str; 7] = [
        "d-admm",
        "d-admm-col",
        "d-lasso",
        "subgradient",
        "mm-ngs",
        "mm-dqa",
        "dn",
    ];

    /// Builds a kind from its name with default inner-loop settings.
    pub fn from_name(name: &str, rho: T, delta: T) -> Result<Self> {
        let inner = InnerLoop::default();
        Ok(match name {
            "d-admm" => Self::DAdmmRow { rho },
            "d-admm-col" => Self::DAdmmCol { rho, delta },
            "d-lasso" => Self::DLasso { rho },
            "subgradient" => Self::Subgradient,
            "mm-ngs" => Self::MmNgs { rho, inner },
            "mm-dqa" => Self::MmDqa { rho, inner },
            "dn" => Self::Dn { rho, inner },
            other => return Err(Error::InvalidInput(format!("unknown algorithm {other:?}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::DAdmmRow { .. } => "d-admm",
            Self::DAdmmCol { .. } => "d-admm-col",
            Self::DLasso { .. } => "d-lasso",
            Self::Subgradient => "subgradient",
            Self::MmNgs { .. } => "mm-ngs",
            Self::MmDqa { .. } => "mm-dqa",
            Self::Dn { .. } => "dn",
        }
    }

    pub fn rho(&self) -> Option<T> {
        match *self {
            Self::DAdmmRow { rho }
            | Self::DAdmmCol { rho, .. }
            | Self::DLasso { rho }
            | Self::MmNgs { rho, .. }
            | Self::MmDqa { rho, .. }
            | Self::Dn { rho, .. } => Some(rho),
            Self::Subgradient => None,
        }
    }

    /// Same algorithm with a different `ρ` (no-op for the subgradient method).
    pub fn with_rho(self, new: T) -> Self {
        match self {
            Self::DAdmmRow { .. } => Self::DAdmmRow { rho: new },
            Self::DAdmmCol { delta, .. } => Self::DAdmmCol { rho: new, delta },
            Self::DLasso { .. } => Self::DLasso { rho: new },
            Self::Subgradient => Self::Subgradient,
            Self::MmNgs { inner, .. } => Self::MmNgs { rho: new, inner },
            Self::MmDqa { inner, .. } => Self::MmDqa { rho: new, inner },
            Self::Dn { inner, .. } => Self::Dn { rho: new, inner },
        }
    }

    pub fn delta(&self) -> Option<T> {
        match *self {
            Self::DAdmmCol { delta, .. } => Some(delta),
            _ => None,
        }
    }

    pub fn partition_kind(&self) -> PartitionKind {
        match self {
            Self::DAdmmCol { .. } => PartitionKind::Column,
            _ => PartitionKind::Row,
        }
    }

    pub fn is_double_looped(&self) -> bool {
        matches!(
            self,
            Self::MmNgs { .. } | Self::MmDqa { .. } | Self::Dn { .. }
        )
    }

    fn inner(&self) -> Option<InnerLoop<T>> {
        match *self {
            Self::MmNgs { inner, .. } | Self::MmDqa { inner, .. } | Self::Dn { inner, .. } => {
                Some(inner)
            }
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(rho) = self.rho() {
            if !(rho > T::zero() && rho.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "rho must be positive, got {rho}"
                )));
            }
        }
        if let Some(delta) = self.delta() {
            if !(delta > T::zero() && delta.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "delta must be positive, got {delta}"
                )));
            }
        }
        if let Some(inner) = self.inner() {
            if inner.cap == 0 || inner.tol.is_some_and(|t| !(t > T::zero())) {
                return Err(Error::InvalidInput(
                    "inner loop needs a positive tolerance and cap".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-node iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState<T> {
    /// `x_p` (row algorithms) or `y_p` (column D-ADMM).
    pub primal: Vec<T>,
    /// Dual accumulator `γ_p`.
    pub gamma: Vec<T>,
    /// FISTA extrapolated point `y_p` (DN only).
    pub momentum: Vec<T>,
    /// `x_p(y_p)`, the node's block of the solution (column D-ADMM only).
    pub fragment: Vec<T>,
}

impl<T: Real> NodeState<T> {
    pub fn zeros(len: usize) -> Self {
        Self {
            primal: vec![T::zero(); len],
            gamma: vec![T::zero(); len],
            momentum: Vec::new(),
            fragment: Vec::new(),
        }
    }

    pub fn is_finite(&self) -> bool {
        [&self.primal, &self.gamma, &self.momentum, &self.fragment]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub bb: BbConfig<T>,
    /// Worker threads for node solves; `1` runs everything on the caller.
    pub threads: usize,
    /// Record every neighbor read in [`Solver::read_log`].
    pub log_reads: bool,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            bb: BbConfig::distributed(),
            threads: 1,
            log_reads: false,
        }
    }
}

/// One neighbor read: `reader` used version `version` of `sender`'s
/// published vector during communication step `step` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadRecord {
    pub step: usize,
    pub reader: usize,
    pub sender: usize,
    pub version: u64,
}

/// What happened during one communication step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    /// Node solves that hit the BB iteration cap.
    pub inner_failures: usize,
    /// An outer dual update ran at the end of this step.
    pub outer_update: bool,
}

enum NodeData<T> {
    Row(Vec<RowSubproblem<T>>),
    Col {
        nodes: Vec<ColSubproblem<T>>,
        b: Vec<T>,
    },
}

#[derive(Clone, Copy)]
enum Published {
    Primal,
    Momentum,
}

/// Coefficient `c` of `‖x‖²` in a D-ADMM node problem: `D_p ρ / 2`.
pub fn admm_curvature<T: Real>(degree: usize, rho: T) -> T {
    T::from_usize_lossy(degree) * rho / (T::one() + T::one())
}

/// Coefficient `c` of `‖x‖²` in a D-Lasso node problem: `ρ D_p`.
pub fn lasso_curvature<T: Real>(degree: usize, rho: T) -> T {
    T::from_usize_lossy(degree) * rho
}

/// State machine for one distributed run.
pub struct Solver<T: Real> {
    kind: SolverKind<T>,
    graph: Graph,
    coloring: Coloring,
    cfg: SolverConfig<T>,
    data: NodeData<T>,
    states: Vec<NodeState<T>>,
    versions: Vec<u64>,
    read_log: Vec<ReadRecord>,
    duals: Option<EdgeDuals<T>>,
    /// DN: Nesterov extrapolation point of the edge duals.
    eta: Option<EdgeDuals<T>>,
    b_inf: T,
    /// DN inner step `1 / (ρ λmax(L))`.
    alpha: Option<T>,
    steps: usize,
    inner_iter: usize,
    outer_iter: usize,
    inner_failures: usize,
    pool: Option<rayon::ThreadPool>,
}

impl<T: Real> Solver<T> {
    /// Splits `(A, b)` per `spec` and initializes every node at zero.
    ///
    /// Rejects graphs with fewer than two nodes, isolated or disconnected
    /// nodes, a partition that does not match the graph or the algorithm,
    /// and row blocks without full row rank.
    pub fn new(
        kind: SolverKind<T>,
        a: &DenseMatrix<T>,
        b: &[T],
        spec: &PartitionSpec,
        graph: &Graph,
        coloring: &Coloring,
        cfg: SolverConfig<T>,
    ) -> Result<Self> {
        kind.validate()?;
        cfg.bb.validate()?;
        let p_count = graph.node_count();
        if p_count < 2 {
            return Err(Error::InvalidInput(
                "distributed solvers need at least two nodes".into(),
            ));
        }
        if let Some(p) = (0..p_count).find(|&p| graph.degree(p) == 0) {
            return Err(Error::IsolatedNode { node: p });
        }
        if !is_connected(graph) {
            return Err(Error::Disconnected);
        }
        if spec.parts() != p_count {
            return Err(Error::Dimension(format!(
                "partition has {} blocks for {p_count} nodes",
                spec.parts()
            )));
        }
        if spec.kind != kind.partition_kind() {
            return Err(Error::InvalidInput(format!(
                "{} needs a {:?} partition",
                kind.name(),
                kind.partition_kind()
            )));
        }
        if coloring.colors().len() != p_count
            || graph
                .edges()
                .iter()
                .any(|&(i, j)| coloring.color(i) == coloring.color(j))
        {
            return Err(Error::InvalidInput(
                "coloring is not proper for this graph".into(),
            ));
        }
        let blocks = partition(a, b, spec)?;
        let n = a.cols();
        let m = a.rows();
        let (data, states) = match spec.kind {
            PartitionKind::Row => {
                let nodes = blocks
                    .into_iter()
                    .map(|blk| RowSubproblem::new(blk.a, blk.b.expect("row block carries b")))
                    .collect::<Result<Vec<_>>>()?;
                let mut states = vec![NodeState::zeros(n); p_count];
                if matches!(kind, SolverKind::Dn { .. }) {
                    states
                        .iter_mut()
                        .for_each(|s| s.momentum = vec![T::zero(); n]);
                }
                (NodeData::Row(nodes), states)
            }
            PartitionKind::Column => {
                let delta = kind.delta().expect("column kind has delta");
                let mut states = Vec::with_capacity(p_count);
                let mut nodes = Vec::with_capacity(p_count);
                for blk in blocks {
                    let mut s = NodeState::zeros(m);
                    s.fragment = vec![T::zero(); blk.a.cols()];
                    states.push(s);
                    nodes.push(ColSubproblem::new(blk.a, delta)?);
                }
                (
                    NodeData::Col {
                        nodes,
                        b: b.to_vec(),
                    },
                    states,
                )
            }
        };
        let edges = graph.edge_count();
        let (duals, eta) = match kind {
            SolverKind::MmNgs { .. } | SolverKind::MmDqa { .. } => {
                (Some(EdgeDuals::zeros(edges, n)), None)
            }
            SolverKind::Dn { .. } => (
                Some(EdgeDuals::zeros(edges, n)),
                Some(EdgeDuals::zeros(edges, n)),
            ),
            _ => (None, None),
        };
        let alpha = match kind {
            SolverKind::Dn { rho, .. } => {
                let l = crate::graph::laplacian::<T>(graph);
                let lmax = crate::linalg::lambda_max(&l, T::lit(1e-10), 100_000)?;
                Some(T::one() / (rho * lmax))
            }
            _ => None,
        };
        let pool = if cfg.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.threads)
                    .build()
                    .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            kind,
            graph: graph.clone(),
            coloring: coloring.clone(),
            cfg,
            data,
            states,
            versions: vec![0; p_count],
            read_log: Vec::new(),
            duals,
            eta,
            b_inf: norm_inf(b),
            alpha,
            steps: 0,
            inner_iter: 0,
            outer_iter: 0,
            inner_failures: 0,
            pool,
        })
    }

    pub fn kind(&self) -> &SolverKind<T> {
        &self.kind
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn states(&self) -> &[NodeState<T>] {
        &self.states
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    /// Communication steps performed so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Outer dual updates performed so far (double-looped methods).
    pub fn outer_iterations(&self) -> usize {
        self.outer_iter
    }

    pub fn inner_failures(&self) -> usize {
        self.inner_failures
    }

    pub fn read_log(&self) -> &[ReadRecord] {
        &self.read_log
    }

    pub fn edge_duals(&self) -> Option<&EdgeDuals<T>> {
        self.duals.as_ref()
    }

    /// DN inner step size.
    pub fn fista_step(&self) -> Option<T> {
        self.alpha
    }

    /// Current solution estimate held by each node: `x_p` for row
    /// algorithms, `x_p(y_p)` fragments for column D-ADMM.
    pub fn node_estimates(&self) -> Vec<&[T]> {
        match self.data {
            NodeData::Row(_) => self.states.iter().map(|s| s.primal.as_slice()).collect(),
            NodeData::Col { .. } => self.states.iter().map(|s| s.fragment.as_slice()).collect(),
        }
    }

    /// Largest `‖primal_i - primal_j‖₂` over the edges.
    pub fn consensus_residual(&self) -> T {
        self.graph
            .edges()
            .iter()
            .map(|&(i, j)| dist2(&self.states[i].primal, &self.states[j].primal))
            .fold(T::zero(), T::max)
    }

    /// `(1/P) Σ ‖x_p‖₁` for row algorithms; `‖x‖₁` of the concatenated
    /// fragments for column D-ADMM.
    pub fn objective(&self) -> T {
        match self.data {
            NodeData::Row(_) => {
                let p = T::from_usize_lossy(self.states.len());
                self.states.iter().map(|s| norm1(&s.primal)).sum::<T>() / p
            }
            NodeData::Col { .. } => self.states.iter().map(|s| norm1(&s.fragment)).sum(),
        }
    }

    /// Performs one communication step.
    pub fn step(&mut self) -> Result<StepReport> {
        self.steps += 1;
        let report = match self.kind {
            SolverKind::DAdmmRow { rho } => self.d_admm_round(rho)?,
            SolverKind::DAdmmCol { rho, .. } => self.d_admm_col_round(rho)?,
            SolverKind::DLasso { rho } => self.d_lasso_round(rho)?,
            SolverKind::Subgradient => self.subgradient_round()?,
            SolverKind::MmNgs { rho, inner } => {
                let res = self.ngs_inner_round(rho)?;
                self.finish_inner(rho, inner, res)
            }
            SolverKind::MmDqa { rho, inner } => {
                let res = self.dqa_inner_round(rho)?;
                self.finish_inner(rho, inner, res)
            }
            SolverKind::Dn { rho, inner } => {
                let res = self.fista_inner_round(rho)?;
                self.finish_inner(rho, inner, res)
            }
        };
        self.inner_failures += report.0;
        if let Some(p) = self.states.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "node {p} iterate became non-finite"
            )));
        }
        Ok(StepReport {
            inner_failures: report.0,
            outer_update: report.1,
        })
    }

    fn inner_threshold(&self, inner: InnerLoop<T>) -> T {
        inner
            .tol
            .unwrap_or_else(|| T::lit(1e-6) * (T::one() + self.b_inf))
    }

    /// Runs the outer update when the inner loop has converged or hit its cap.
    fn finish_inner(
        &mut self,
        rho: T,
        inner: InnerLoop<T>,
        (failures, residual): (usize, T),
    ) -> (usize, bool) {
        self.inner_iter += 1;
        let done = residual <= self.inner_threshold(inner) || self.inner_iter >= inner.cap;
        if !done {
            return (failures, false);
        }
        self.outer_iter += 1;
        self.inner_iter = 0;
        let duals = self.duals.as_mut().expect("double-looped kind has duals");
        match self.eta.as_mut() {
            None => {
                mm_outer_update(duals, &self.graph, &self.states, rho);
                gamma_from_duals(duals, &self.graph, &mut self.states);
            }
            Some(eta) => {
                nesterov_outer_update(duals, eta, &self.graph, &self.states, rho, self.outer_iter);
                gamma_from_duals(eta, &self.graph, &mut self.states);
                // restart the inner momentum from the current point
                for s in &mut self.states {
                    s.momentum.copy_from_slice(&s.primal);
                }
            }
        }
        (failures, true)
    }

    /// `Σ_{j ∈ N_p} published_j`, logging each read.
    fn neighbor_sum(&mut self, p: usize, which: Published) -> Vec<T> {
        let len = self.states[p].primal.len();
        let mut sum = vec![T::zero(); len];
        for &j in self.graph.neighbors(p) {
            let src = match which {
                Published::Primal => &self.states[j].primal,
                Published::Momentum => &self.states[j].momentum,
            };
            for (s, &x) in sum.iter_mut().zip(src) {
                *s += x;
            }
            if self.cfg.log_reads {
                self.read_log.push(ReadRecord {
                    step: self.steps,
                    reader: p,
                    sender: j,
                    version: self.versions[j],
                });
            }
        }
        sum
    }

    fn in_pool<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        match &self.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    /// Solves `min (1/P)‖x‖₁ + vᵀx + c‖x‖²  s.t.  A_p x = b_p` for every
    /// node with a job, in parallel; returns `(node, x, converged)` in node
    /// order.
    fn solve_rows(&mut self, jobs: Vec<Option<(Vec<T>, T)>>) -> Result<Vec<(usize, Vec<T>, bool)>> {
        let weight = T::one() / T::from_usize_lossy(self.states.len());
        let bb = self.cfg.bb;
        let NodeData::Row(nodes) = &mut self.data else {
            unreachable!("row solve on column data")
        };
        let mut run = || {
            nodes
                .par_iter_mut()
                .zip(jobs.par_iter())
                .enumerate()
                .filter_map(|(p, (sp, job))| {
                    job.as_ref().map(|(v, c)| {
                        sp.solve_weighted(weight, v, *c, &bb)
                            .map(|s| (p, s.x, s.outcome.converged))
                    })
                })
                .collect::<Result<Vec<_>>>()
        };
        let mut out = match &self.pool {
            Some(pool) => pool.install(run)?,
            None => run()?,
        };
        out.sort_by_key(|r| r.0);
        Ok(out)
    }

    fn commit(&mut self, p: usize, x: Vec<T>) {
        self.states[p].primal = x;
        self.versions[p] += 1;
    }

    /// `γ_p += ρ Σ_{j ∈ N_p} (primal_p - primal_j)`, accumulated edge-wise so
    /// that the update is exactly antisymmetric per edge.
    fn accumulate_gamma(&mut self, rho: T) {
        for &(i, j) in self.graph.edges() {
            let (lo, hi) = self.states.split_at_mut(j);
            let (si, sj) = (&mut lo[i], &mut hi[0]);
            for k in 0..si.primal.len() {
                let d = rho * (si.primal[k] - sj.primal[k]);
                si.gamma[k] += d;
                sj.gamma[k] -= d;
            }
        }
    }

    /// `v_p = γ_p - ρ Σ_j x_j` with the neighbor values currently published.
    fn admm_linear_term(&mut self, p: usize, rho: T, which: Published) -> Vec<T> {
        let mut v = self.neighbor_sum(p, which);
        for (vi, &g) in v.iter_mut().zip(&self.states[p].gamma) {
            *vi = g - rho * *vi;
        }
        v
    }

    fn d_admm_round(&mut self, rho: T) -> Result<(usize, bool)> {
        let mut failures = 0;
        let classes = self.coloring.classes().to_vec();
        for class in &classes {
            let mut jobs = vec![None; self.states.len()];
            for &p in class {
                let v = self.admm_linear_term(p, rho, Published::Primal);
                jobs[p] = Some((v, admm_curvature(self.graph.degree(p), rho)));
            }
            for (p, x, ok) in self.solve_rows(jobs)? {
                failures += usize::from(!ok);
                self.commit(p, x);
            }
        }
        self.accumulate_gamma(rho);
        Ok((failures, false))
    }

    fn d_admm_col_round(&mut self, rho: T) -> Result<(usize, bool)> {
        let mut failures = 0;
        let classes = self.coloring.classes().to_vec();
        let p_count = self.states.len();
        let bb = self.cfg.bb;
        for class in &classes {
            let mut jobs: Vec<Option<(Vec<T>, T)>> = vec![None; p_count];
            for &p in class {
                let v = self.admm_linear_term(p, rho, Published::Primal);
                jobs[p] = Some((v, admm_curvature(self.graph.degree(p), rho)));
            }
            let NodeData::Col { nodes, b } = &mut self.data else {
                unreachable!("column round on row data")
            };
            let b = &*b;
            let mut run = || {
                nodes
                    .par_iter_mut()
                    .zip(jobs.par_iter())
                    .enumerate()
                    .filter_map(|(p, (sp, job))| {
                        job.as_ref()
                            .map(|(v, q)| sp.solve(v, b, p_count, *q, &bb).map(|s| (p, s)))
                    })
                    .collect::<Result<Vec<_>>>()
            };
            let mut out = match &self.pool {
                Some(pool) => pool.install(run)?,
                None => run()?,
            };
            out.sort_by_key(|r| r.0);
            for (p, sol) in out {
                failures += usize::from(!sol.outcome.converged);
                self.states[p].fragment = sol.x;
                self.commit(p, sol.y);
            }
        }
        self.accumulate_gamma(rho);
        Ok((failures, false))
    }

    fn d_lasso_round(&mut self, rho: T) -> Result<(usize, bool)> {
        let p_count = self.states.len();
        let mut jobs = vec![None; p_count];
        for p in 0..p_count {
            let d = T::from_usize_lossy(self.graph.degree(p));
            let mut v = self.admm_linear_term(p, rho, Published::Primal);
            for (vi, &x) in v.iter_mut().zip(&self.states[p].primal) {
                *vi -= rho * d * x;
            }
            jobs[p] = Some((v, lasso_curvature(self.graph.degree(p), rho)));
        }
        let mut failures = 0;
        for (p, x, ok) in self.solve_rows(jobs)? {
            failures += usize::from(!ok);
            self.commit(p, x);
        }
        self.accumulate_gamma(rho);
        Ok((failures, false))
    }

    fn subgradient_round(&mut self) -> Result<(usize, bool)> {
        let p_count = self.states.len();
        let k = T::from_usize_lossy(self.steps);
        let step = T::one() / (k + T::one());
        let inv_p = T::one() / T::from_usize_lossy(p_count);
        let mut points = Vec::with_capacity(p_count);
        for p in 0..p_count {
            let mut avg = self.neighbor_sum(p, Published::Primal);
            let w = T::one() / T::from_usize_lossy(self.graph.degree(p) + 1);
            for (a, &x) in avg.iter_mut().zip(&self.states[p].primal) {
                *a = (*a + x) * w;
            }
            for a in avg.iter_mut() {
                *a -= step * inv_p * sign_nonneg(*a);
            }
            points.push(avg);
        }
        let NodeData::Row(nodes) = &self.data else {
            unreachable!("subgradient on column data")
        };
        let projected = self.in_pool(|| {
            nodes
                .par_iter()
                .zip(points.par_iter())
                .map(|(sp, z)| affine_projection(sp.matrix(), sp.rhs(), sp.gram(), z))
                .collect::<Result<Vec<_>>>()
        })?;
        for (p, x) in projected.into_iter().enumerate() {
            self.commit(p, x);
        }
        Ok((0, false))
    }

    /// One Gauss–Seidel sweep in node order; returns the largest
    /// `ρ D_p ‖Δx_p‖∞`.
    fn ngs_inner_round(&mut self, rho: T) -> Result<(usize, T)> {
        let mut failures = 0;
        let mut residual = T::zero();
        for p in 0..self.states.len() {
            let v = self.admm_linear_term(p, rho, Published::Primal);
            let c = admm_curvature(self.graph.degree(p), rho);
            let mut jobs = vec![None; self.states.len()];
            jobs[p] = Some((v, c));
            for (q, x, ok) in self.solve_rows(jobs)? {
                failures += usize::from(!ok);
                let change = self.states[q]
                    .primal
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (*a - *b).abs())
                    .fold(T::zero(), T::max);
                residual = residual.max(rho * T::from_usize_lossy(self.graph.degree(q)) * change);
                self.commit(q, x);
            }
        }
        Ok((failures, residual))
    }

    /// One synchronous DQA iteration; returns the largest `ρ D_p ‖u_p - x_p‖∞`.
    fn dqa_inner_round(&mut self, rho: T) -> Result<(usize, T)> {
        let p_count = self.states.len();
        let tau = T::one() / T::from_usize_lossy(p_count);
        let mut jobs = vec![None; p_count];
        for p in 0..p_count {
            let v = self.admm_linear_term(p, rho, Published::Primal);
            jobs[p] = Some((v, admm_curvature(self.graph.degree(p), rho)));
        }
        let mut failures = 0;
        let mut residual = T::zero();
        for (p, u, ok) in self.solve_rows(jobs)? {
            failures += usize::from(!ok);
            let x = &self.states[p].primal;
            let gap = u
                .iter()
                .zip(x)
                .map(|(a, b)| (*a - *b).abs())
                .fold(T::zero(), T::max);
            residual = residual.max(rho * T::from_usize_lossy(self.graph.degree(p)) * gap);
            let next = u
                .iter()
                .zip(x)
                .map(|(&ui, &xi)| tau * ui + (T::one() - tau) * xi)
                .collect();
            self.commit(p, next);
        }
        Ok((failures, residual))
    }

    /// One FISTA iteration on the augmented Lagrangian at the current `η`;
    /// returns the largest `‖x_p - y_p‖∞ / α`.
    fn fista_inner_round(&mut self, rho: T) -> Result<(usize, T)> {
        let alpha = self.alpha.expect("DN step size");
        let p_count = self.states.len();
        let mut jobs = vec![None; p_count];
        for p in 0..p_count {
            let grad = self.consensus_gradient_at(p, rho, Published::Momentum);
            let s = &self.states[p];
            // prox of (1/P)‖·‖₁ on {A_p x = b_p} at u = y - α∇: v = -u/α, c = 1/(2α)
            let v = s
                .momentum
                .iter()
                .zip(&grad)
                .map(|(&y, &g)| -(y - alpha * g) / alpha)
                .collect();
            jobs[p] = Some((v, T::one() / (alpha + alpha)));
        }
        let k = T::from_usize_lossy(self.inner_iter + 1);
        let beta = (k - T::one()) / (k + T::one() + T::one());
        let mut failures = 0;
        let mut residual = T::zero();
        for (p, x, ok) in self.solve_rows(jobs)? {
            failures += usize::from(!ok);
            let s = &mut self.states[p];
            let gap = x
                .iter()
                .zip(&s.momentum)
                .map(|(a, b)| (*a - *b).abs())
                .fold(T::zero(), T::max);
            residual = residual.max(gap / alpha);
            for i in 0..x.len() {
                s.momentum[i] = x[i] + beta * (x[i] - s.primal[i]);
            }
            s.primal = x;
            self.versions[p] += 1;
        }
        Ok((failures, residual))
    }

    /// `∇_{x_p} g = γ_p + ρ D_p z_p - ρ Σ_{j ∈ N_p} z_j` at the published
    /// vectors `z`.
    fn consensus_gradient_at(&mut self, p: usize, rho: T, which: Published) -> Vec<T> {
        let mut grad = self.admm_linear_term(p, rho, which);
        let d = T::from_usize_lossy(self.graph.degree(p));
        let own = match which {
            Published::Primal => &self.states[p].primal,
            Published::Momentum => &self.states[p].momentum,
        };
        for (g, &z) in grad.iter_mut().zip(own) {
            *g += rho * d * z;
        }
        grad
    }

    /// `∇_{x_p} g(x̄)` at the current primal iterates, one block per node.
    pub fn consensus_gradient(&mut self) -> Vec<Vec<T>> {
        let rho = self.kind.rho().unwrap_or_else(T::one);
        let log = std::mem::replace(&mut self.cfg.log_reads, false);
        let out = (0..self.states.len())
            .map(|p| self.consensus_gradient_at(p, rho, Published::Primal))
            .collect();
        self.cfg.log_reads = log;
        out
    }

    /// Overwrites node states, e.g. to start from a given point in tests.
    /// Lengths must match the current states.
    pub fn set_states(&mut self, states: Vec<NodeState<T>>) -> Result<()> {
        if states.len() != self.states.len()
            || states.iter().zip(&self.states).any(|(a, b)| {
                a.primal.len() != b.primal.len()
                    || a.gamma.len() != b.gamma.len()
                    || a.momentum.len() != b.momentum.len()
                    || a.fragment.len() != b.fragment.len()
            })
        {
            return Err(Error::Dimension(
                "replacement states do not match the solver".into(),
            ));
        }
        self.states = states;
        Ok(())
    }
}
