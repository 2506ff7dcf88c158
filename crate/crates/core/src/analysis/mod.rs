//! Certification of runs: consensus-set membership, the convergence-time
//! bound, Persistency-of-Communication and per-trace invariants.

mod invariants;
mod necessity;

use serde::Serialize;
use thiserror::Error;

use crate::sim::{Outcome, SimError, Trace};
use crate::topology::{Edge, Graph, TopologyError};
use crate::Scalar;

pub use invariants::{verify_trace_invariants, CheckResult, InvariantReport};
pub use necessity::{necessity_experiment, run_with_link_jammed, JammedLinkRun, NecessityReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("edge {edge} has jammed attempts but no PoC delay (alpha >= 1)")]
    MissingPhi { edge: Edge },
    #[error("expected {expected} per-edge PoC delays, got {got}")]
    PhiLength { expected: usize, got: usize },
    #[error("edge {0} is not a cut edge")]
    NotABridge(Edge),
    #[error("initial disagreement across {bridge} is {gap}, below delta = {delta}")]
    InsufficientDisagreement { bridge: Edge, gap: f64, delta: f64 },
    #[error("no second edge can be added across {0}: both sides are single nodes")]
    NoAugmentation(Edge),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// `V(x) = x^T x / 2`.
pub fn lyapunov<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>() / T::lit(2.0)
}

/// `delta = eps (n - 1)`.
pub fn consensus_delta<T: Scalar>(epsilon: T, n: usize) -> T {
    epsilon * T::from_count(n.saturating_sub(1))
}

/// Largest pairwise gap `max_i x^i - min_i x^i` and whether it is strictly
/// below `delta = eps (n - 1)`.
pub fn in_consensus_set<T: Scalar>(x: &[T], epsilon: T, n: usize) -> (bool, T) {
    let gap = max_pairwise_gap(x);
    (gap < consensus_delta(epsilon, n), gap)
}

pub fn max_pairwise_gap<T: Scalar>(x: &[T]) -> T {
    let hi = x.iter().copied().fold(T::neg_infinity(), T::max);
    let lo = x.iter().copied().fold(T::infinity(), T::min);
    if x.is_empty() {
        T::zero()
    } else {
        hi - lo
    }
}

/// Largest `|x^j - x^i|` over the edges of `g`.
pub fn max_neighbor_gap<T: Scalar>(x: &[T], g: &Graph) -> T {
    g.edges()
        .iter()
        .map(|e| (x[e.hi()] - x[e.lo()]).abs())
        .fold(T::zero(), T::max)
}

/// Upper bound on the settling time:
/// `[1/eps + d_max/(eps d_min) + 4 d_max Phi / eps^2] * sum_i x_i(0)^2`.
pub fn convergence_bound<T: Scalar>(epsilon: T, d_max: usize, d_min: usize, phi: T, x0: &[T]) -> T {
    let (dmax, dmin) = (T::from_count(d_max), T::from_count(d_min));
    let squares: T = x0.iter().map(|&v| v * v).sum();
    (epsilon.recip() + dmax / (epsilon * dmin) + T::lit(4.0) * dmax * phi / (epsilon * epsilon)) * squares
}

/// The same bound written through the Lyapunov decrement
/// `eps_* = eps^2 / (8 d_max)`:
/// `[eps/(4 d_max) + eps/(4 d_min) + Phi] * V(0) / eps_*`.
pub fn convergence_bound_lyapunov_form<T: Scalar>(epsilon: T, d_max: usize, d_min: usize, phi: T, x0: &[T]) -> T {
    let (dmax, dmin) = (T::from_count(d_max), T::from_count(d_min));
    let four = T::lit(4.0);
    let decrement = epsilon * epsilon / (T::lit(8.0) * dmax);
    (epsilon / (four * dmax) + epsilon / (four * dmin) + phi) * lyapunov(x0) / decrement
}

/// Consensus outcome of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct ConsensusReport<T> {
    pub delta: T,
    pub max_pairwise_gap: T,
    pub in_set: bool,
    pub max_neighbor_gap: T,
    /// Every neighbouring pair is closer than `eps`.
    pub neighbors_within_eps: bool,
    pub t_star_measured: Option<T>,
    /// `None` when some link has no finite PoC delay.
    pub t_star_bound: Option<T>,
    pub bound_holds: Option<bool>,
}

/// Summarises the final state of `trace`. `phi` is the largest per-edge PoC
/// delay (zero without jamming), or `None` when some edge is uncertified.
pub fn consensus_report<T: Scalar>(trace: &Trace<T>, g: &Graph, phi: Option<T>) -> ConsensusReport<T> {
    let n = g.node_count();
    let (in_set, gap) = in_consensus_set(&trace.final_x, trace.epsilon, n);
    let neighbor = max_neighbor_gap(&trace.final_x, g);
    let stats = g.degree_stats();
    let bound = phi.map(|p| convergence_bound(trace.epsilon, stats.max, stats.min, p, &trace.x0));
    let measured = trace.quiescence.time;
    let bound_holds = match (measured, bound) {
        (Some(m), Some(b)) => Some(m <= b),
        _ => None,
    };
    ConsensusReport {
        delta: consensus_delta(trace.epsilon, n),
        max_pairwise_gap: gap,
        in_set,
        max_neighbor_gap: neighbor,
        neighbors_within_eps: neighbor < trace.epsilon,
        t_star_measured: measured,
        t_star_bound: bound,
        bound_holds,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PocVerdict<T> {
    Pass {
        /// Jammed attempts whose window `[t, t + Phi]` fits inside the run.
        checked: usize,
        /// Jammed attempts too close to the end of the run to be judged.
        censored: usize,
    },
    Violation {
        edge: Edge,
        attempt_time: T,
        deadline: T,
    },
}

impl<T> PocVerdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, PocVerdict::Pass { .. })
    }
}

/// Checks that every jammed attempt on edge `e` at time `t` is followed by a
/// successful attempt on `e` within `[t, t + phi[e]]`. Comparisons are exact.
/// Attempts with `t + phi[e]` beyond the end of the run and no success in
/// between are censored rather than failed.
pub fn verify_poc<T: Scalar>(trace: &Trace<T>, phi: &[Option<T>]) -> Result<PocVerdict<T>, AnalysisError> {
    if phi.len() != trace.edges.len() {
        return Err(AnalysisError::PhiLength { expected: trace.edges.len(), got: phi.len() });
    }
    let mut per_edge: Vec<Vec<(T, Outcome)>> = vec![Vec::new(); trace.edges.len()];
    for a in &trace.attempts {
        per_edge[a.edge].push((a.time, a.outcome));
    }
    let (mut checked, mut censored) = (0, 0);
    for (e, attempts) in per_edge.iter().enumerate() {
        if attempts.iter().all(|a| a.1 == Outcome::Success) {
            continue;
        }
        let window = phi[e].ok_or(AnalysisError::MissingPhi { edge: trace.edges[e] })?;
        // walk backwards tracking the earliest success at or after each attempt
        let mut next_success: Option<T> = None;
        for &(t, outcome) in attempts.iter().rev() {
            match outcome {
                Outcome::Success => next_success = Some(t),
                Outcome::Jammed => {
                    let deadline = t + window;
                    match next_success {
                        Some(s) if s <= deadline => checked += 1,
                        _ if deadline > trace.end_time => censored += 1,
                        _ => {
                            return Ok(PocVerdict::Violation { edge: trace.edges[e], attempt_time: t, deadline });
                        }
                    }
                }
            }
        }
    }
    Ok(PocVerdict::Pass { checked, censored })
}
