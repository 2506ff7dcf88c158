//! Counterexamples for links whose jamming rate reaches one.
//!
//! A pulse train placed on every attempt instant of a link denies all of its
//! transmissions (each jammed attempt retries exactly `Delta*` later, and the
//! pulses sit on those instants). If the link is a cut edge, the two sides
//! settle separately and the final state stays outside the consensus set.
//! Adding one more link across the cut makes the same attack harmless.

use serde::Serialize;

use super::{consensus_delta, in_consensus_set, AnalysisError};
use crate::dos::{delta_star, gen_pulse_train_at, jammed_attempt_times, DosSignal};
use crate::sim::{run, Mode, SimConfig, Trace};
use crate::topology::{Edge, Graph, TopologyError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct JammedLinkRun<T> {
    pub graph: Graph,
    pub jammed: Option<Edge>,
    pub trace: Trace<T>,
    pub in_set: bool,
    pub max_gap: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct NecessityReport<T> {
    pub bridge: Edge,
    /// Link added across the cut for the second run.
    pub added: Edge,
    pub delta: T,
    pub cut_in_set: bool,
    pub cut_max_gap: T,
    pub cut_jammed_attempts: usize,
    pub redundant_in_set: bool,
    pub redundant_max_gap: T,
    pub redundant_jammed_attempts: usize,
}

impl<T> NecessityReport<T> {
    /// The cut run misses consensus and the augmented run reaches it.
    pub fn demonstrates_necessity(&self) -> bool {
        !self.cut_in_set && self.redundant_in_set
    }
}

/// Resilient run in which every attempt on `jammed` (if any) is denied.
pub fn run_with_link_jammed<T: Scalar>(
    g: &Graph,
    jammed: Option<Edge>,
    x0: &[T],
    epsilon: T,
    horizon: T,
) -> Result<JammedLinkRun<T>, AnalysisError> {
    let mut cfg = SimConfig::new(epsilon, Mode::Resilient, horizon);
    if let Some(e) = jammed {
        let id = g.edge_id(e).ok_or(TopologyError::NotAnEdge(e))?;
        let dstar = delta_star(epsilon, g.degree(e.lo()), g.degree(e.hi()));
        let train = gen_pulse_train_at(&jammed_attempt_times(dstar, horizon))
            .expect("accumulated attempt times are increasing");
        let mut dos = vec![DosSignal::empty(); g.edge_count()];
        dos[id] = train;
        cfg = cfg.with_dos(dos);
    }
    let trace = run(g, x0, &[], &cfg)?;
    let (in_set, max_gap) = in_consensus_set(&trace.final_x, epsilon, g.node_count());
    Ok(JammedLinkRun { graph: g.clone(), jammed, trace, in_set, max_gap })
}

/// Jams `bridge` in `g`, then jams the same link in `g` plus one extra link
/// across the cut, and reports both outcomes.
pub fn necessity_experiment<T: Scalar>(
    g: &Graph,
    bridge: Edge,
    x0: &[T],
    epsilon: T,
    horizon: T,
) -> Result<NecessityReport<T>, AnalysisError> {
    if !g.is_bridge(bridge)? {
        return Err(AnalysisError::NotABridge(bridge));
    }
    let (side_a, side_b) = g.bridge_sides(bridge)?;
    let n = g.node_count();
    let delta = consensus_delta(epsilon, n);
    let mean = |side: &[usize]| side.iter().map(|&v| x0[v]).sum::<T>() / T::from_count(side.len());
    let gap = (mean(&side_a) - mean(&side_b)).abs();
    if gap < delta {
        return Err(AnalysisError::InsufficientDisagreement { bridge, gap: gap.as_f64(), delta: delta.as_f64() });
    }
    let added = side_a
        .iter()
        .flat_map(|&a| side_b.iter().map(move |&b| Edge::new(a, b).expect("sides are disjoint")))
        .find(|&e| e != bridge)
        .ok_or(AnalysisError::NoAugmentation(bridge))?;

    let cut = run_with_link_jammed(g, Some(bridge), x0, epsilon, horizon)?;
    let augmented = g.with_link(added)?;
    let redundant = run_with_link_jammed(&augmented, Some(bridge), x0, epsilon, horizon)?;
    Ok(NecessityReport {
        bridge,
        added,
        delta,
        cut_in_set: cut.in_set,
        cut_max_gap: cut.max_gap,
        cut_jammed_attempts: cut.trace.jammed_count(),
        redundant_in_set: redundant.in_set,
        redundant_max_gap: redundant.max_gap,
        redundant_jammed_attempts: redundant.trace.jammed_count(),
    })
}
