//! JSON experiment configurations, their deterministic resolution, per-link
//! certificate fitting and run summaries.

mod config;
mod fit;

use std::io::Write;

use serde::Serialize;

use crate::analysis::consensus_report;
use crate::sim::{Mode, Outcome};
use crate::{Real, Trace};

pub use config::{
    ConfigError, DosConfig, DosGenerator, EdgeBeta, EdgeDos, Experiment, ExperimentConfig, GenuineConfig, GraphConfig,
    InitialControls, InitialState, SCHEMA_VERSION,
};
pub use fit::{bound_phi, fit_edge, fit_edges, poc_delays, tau_d_grid, tau_f_grid, write_fit_csv, FitRow};

/// Headline numbers of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub nodes: usize,
    pub edges: usize,
    pub epsilon: Real,
    pub horizon: Real,
    pub mode: Mode,
    pub delta: Real,
    pub in_set: bool,
    pub max_pairwise_gap: Real,
    pub max_neighbor_gap: Real,
    pub neighbors_within_eps: bool,
    pub t_star: Option<Real>,
    pub quiescence_verified: bool,
    pub end_time: Real,
    pub events: usize,
    pub jammed: usize,
    pub all_alpha_lt_1: bool,
    pub all_certified: bool,
    pub phi: Option<Real>,
    pub t_star_bound: Option<Real>,
    pub bound_holds: Option<bool>,
}

pub fn summarize(exp: &Experiment, trace: &Trace, fits: &[FitRow]) -> RunSummary {
    let phi = bound_phi(exp, fits);
    let report = consensus_report(trace, &exp.graph, phi);
    RunSummary {
        nodes: exp.graph.node_count(),
        edges: exp.graph.edge_count(),
        epsilon: exp.config.epsilon,
        horizon: exp.config.horizon,
        mode: exp.config.mode,
        delta: report.delta,
        in_set: report.in_set,
        max_pairwise_gap: report.max_pairwise_gap,
        max_neighbor_gap: report.max_neighbor_gap,
        neighbors_within_eps: report.neighbors_within_eps,
        t_star: report.t_star_measured,
        quiescence_verified: trace.quiescence.verified,
        end_time: trace.end_time,
        events: trace.attempts.len(),
        jammed: trace.jammed_count(),
        all_alpha_lt_1: fits.iter().all(|r| r.alpha < 1.0),
        all_certified: fits.iter().all(|r| r.certified),
        phi,
        t_star_bound: report.t_star_bound,
        bound_holds: report.bound_holds,
    }
}

/// Jamming intervals of every link: `edge_i,edge_j,start,duration`.
pub fn write_dos_csv<W: Write>(exp: &Experiment, w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["edge_i", "edge_j", "start", "duration"])?;
    for (id, signal) in exp.signals.iter().enumerate() {
        let e = exp.graph.edge(id);
        for iv in signal.truncated(exp.config.horizon).intervals() {
            out.write_record([e.lo().to_string(), e.hi().to_string(), iv.start.to_string(), iv.duration.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Rebuilds the settling instant from an attempt log: the last batch after
/// which every control is zero, if they are all zero at the end.
pub fn settling_time(edge_count: usize, attempts: &[crate::sim::Attempt<Real>]) -> Option<Real> {
    let mut control = vec![0i8; edge_count];
    let mut nonzero = 0usize;
    let mut quiet_since = Some(0.0);
    let mut k = 0;
    while k < attempts.len() {
        let t = attempts[k].time;
        while k < attempts.len() && attempts[k].time == t {
            let a = &attempts[k];
            nonzero = nonzero + usize::from(a.control != 0) - usize::from(control[a.edge] != 0);
            control[a.edge] = a.control;
            k += 1;
        }
        if nonzero == 0 {
            quiet_since.get_or_insert(t);
        } else {
            quiet_since = None;
        }
    }
    quiet_since
}

/// Number of successful attempts per link.
pub fn successes_per_edge(trace: &Trace) -> Vec<usize> {
    let mut out = vec![0; trace.edges.len()];
    for a in trace.attempts.iter().filter(|a| a.outcome == Outcome::Success) {
        out[a.edge] += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_summary() {
        let text = r#"{"schema": 1, "graph": {"kind": "path", "n": 2}, "epsilon": 0.1, "horizon": 5.0,
            "x0": {"kind": "explicit", "values": [0.0, 1.0]}}"#;
        let exp = ExperimentConfig::from_json(text).unwrap().resolve().unwrap();
        let trace = exp.run().unwrap();
        let fits = fit_edges(&exp);
        let s = summarize(&exp, &trace, &fits);
        assert_eq!(s.t_star, Some(0.46875));
        assert_eq!(s.t_star_bound, Some(20.0));
        assert_eq!(s.bound_holds, Some(true));
        assert!(s.in_set);
        assert_eq!(s.events, 5);
        assert_eq!(settling_time(1, &trace.attempts), trace.quiescence.time);
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["mode"], "resilient");
    }
}
