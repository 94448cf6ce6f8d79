//! Per-edge multipliers of the double-looped methods.

use crate::graph::Graph;
use crate::scalar::Real;

use super::NodeState;

/// One vector `λ_{ij}` per edge `(i, j)`, `i < j`, in graph edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDuals<T> {
    pub lambda: Vec<Vec<T>>,
}

impl<T: Real> EdgeDuals<T> {
    pub fn zeros(edges: usize, len: usize) -> Self {
        Self {
            lambda: vec![vec![T::zero(); len]; edges],
        }
    }
}

/// Method-of-multipliers dual ascent: `λ_{ij} += ρ (x_i - x_j)`.
pub fn mm_outer_update<T: Real>(
    duals: &mut EdgeDuals<T>,
    graph: &Graph,
    states: &[NodeState<T>],
    rho: T,
) {
    for (lam, &(i, j)) in duals.lambda.iter_mut().zip(graph.edges()) {
        for ((l, &xi), &xj) in lam.iter_mut().zip(&states[i].primal).zip(&states[j].primal) {
            *l += rho * (xi - xj);
        }
    }
}

/// Nesterov dual ascent: `λ⁺ = η + ρ (x_i - x_j)`, then
/// `η⁺ = λ⁺ + (k-1)/(k+2) (λ⁺ - λ)` with outer counter `k >= 1`.
pub fn nesterov_outer_update<T: Real>(
    lambda: &mut EdgeDuals<T>,
    eta: &mut EdgeDuals<T>,
    graph: &Graph,
    states: &[NodeState<T>],
    rho: T,
    k: usize,
) {
    let k = T::from_usize_lossy(k);
    let beta = (k - T::one()) / (k + T::one() + T::one());
    for ((lam, et), &(i, j)) in lambda
        .lambda
        .iter_mut()
        .zip(eta.lambda.iter_mut())
        .zip(graph.edges())
    {
        for idx in 0..lam.len() {
            let next = et[idx] + rho * (states[i].primal[idx] - states[j].primal[idx]);
            et[idx] = next + beta * (next - lam[idx]);
            lam[idx] = next;
        }
    }
}

/// `γ_p = Σ_{j ∈ N_p} sign(j - p) λ_{pj}` with `sign(0) = +1`: the lower
/// endpoint of each edge adds `λ`, the upper one subtracts it.
pub fn gamma_from_duals<T: Real>(duals: &EdgeDuals<T>, graph: &Graph, states: &mut [NodeState<T>]) {
    for s in states.iter_mut() {
        s.gamma.iter_mut().for_each(|g| *g = T::zero());
    }
    for (lam, &(i, j)) in duals.lambda.iter().zip(graph.edges()) {
        for (idx, &l) in lam.iter().enumerate() {
            states[i].gamma[idx] += l;
            states[j].gamma[idx] -= l;
        }
    }
}
