//! Exact event-driven execution of the self-triggered ternary protocol.
//!
//! Between clock expiries every control is constant, so each node moves with
//! an integer slope `sum_j u^ij` and the flow is integrated in closed form.
//! At an expiry instant all expiring links are processed as one batch: every
//! disagreement `D^ij = x^j - x^i` is read first, then controls and clocks
//! are written.
//!
//! In [`Mode::Resilient`] an attempt that falls inside the link's jammed set
//! resets the control to zero and retries after `Delta* = eps / (2 (d^i + d^j))`;
//! in [`Mode::Nominal`] every attempt succeeds.

mod calendar;
mod engine;
pub mod export;
mod oracle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dos::DosSignal;
use crate::topology::{Edge, EdgeId};
use crate::Scalar;

pub use engine::{run, run_with_oracle, SimState};
pub use oracle::{ClearChannel, ConfiguredLinks, LinkOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Nominal,
    Resilient,
}

/// Random per-attempt transmission failures: an attempt on edge `e` fails
/// when an independent uniform draw is below `beta[e]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenuineFailures<T> {
    pub beta: Vec<T>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    /// Sensitivity of the ternary quantiser.
    pub epsilon: T,
    pub mode: Mode,
    pub horizon: T,
    /// Jamming signal per edge id. Empty means no malicious jamming anywhere.
    pub dos: Vec<DosSignal<T>>,
    pub genuine: Option<GenuineFailures<T>>,
    /// State sampling period for the trace; `None` records only the initial
    /// and final state.
    pub record_dt: Option<T>,
    /// End the run once the state is provably absorbing.
    pub stop_at_quiescence: bool,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(epsilon: T, mode: Mode, horizon: T) -> Self {
        SimConfig {
            epsilon,
            mode,
            horizon,
            dos: Vec::new(),
            genuine: None,
            record_dt: None,
            stop_at_quiescence: true,
        }
    }

    pub fn with_dos(mut self, dos: Vec<DosSignal<T>>) -> Self {
        self.dos = dos;
        self
    }

    pub fn with_genuine(mut self, genuine: GenuineFailures<T>) -> Self {
        self.genuine = Some(genuine);
        self
    }

    pub fn with_record_dt(mut self, dt: T) -> Self {
        self.record_dt = Some(dt);
        self
    }

    pub fn running_to_horizon(mut self) -> Self {
        self.stop_at_quiescence = false;
        self
    }

    pub(crate) fn validate(&self, edge_count: usize) -> Result<(), SimError> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(SimError::Config("epsilon must be positive and finite"));
        }
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(SimError::Config("horizon must be positive and finite"));
        }
        if !self.dos.is_empty() && self.dos.len() != edge_count {
            return Err(SimError::Config("dos must be empty or hold one signal per edge"));
        }
        if let Some(g) = &self.genuine {
            if g.beta.len() != edge_count {
                return Err(SimError::Config("genuine beta must hold one value per edge"));
            }
            if g.beta.iter().any(|&b| !(b >= T::zero() && b < T::one())) {
                return Err(SimError::Config("genuine beta entries must lie in [0, 1)"));
            }
        }
        if let Some(dt) = self.record_dt {
            if !(dt > T::zero()) {
                return Err(SimError::Config("record_dt must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(&'static str),
    #[error("expected {expected} initial node values, got {got}")]
    StateLength { expected: usize, got: usize },
    #[error("expected {expected} initial edge controls, got {got}")]
    ControlLength { expected: usize, got: usize },
    #[error("initial controls on edge {edge} are not antisymmetric ternary values: {pair:?}")]
    NotAntisymmetric { edge: Edge, pair: [i8; 2] },
    #[error("initial node value {0} is not finite")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Success,
    Jammed,
}

/// One transmission attempt on an edge `{i, j}` with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attempt<T> {
    pub time: T,
    pub edge: EdgeId,
    pub i: usize,
    pub j: usize,
    pub outcome: Outcome,
    /// `D^ij = x^j - x^i` at the attempt.
    pub disagreement: T,
    /// New `u^ij`; `u^ji` is its negation.
    pub control: i8,
    /// Duration until the next attempt on this edge.
    pub clock: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub time: T,
    pub x: Vec<T>,
}

/// When all controls became zero for good.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quiescence<T> {
    /// `T*`: last instant at which the control vector turned all-zero, if it
    /// is all-zero at the end of the run.
    pub time: Option<T>,
    /// Every edge has had a successful attempt since `time`, with the state
    /// frozen, so no later event can change anything.
    pub verified: bool,
}

/// Complete record of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub epsilon: T,
    pub mode: Mode,
    pub horizon: T,
    pub x0: Vec<T>,
    pub attempts: Vec<Attempt<T>>,
    pub samples: Vec<Sample<T>>,
    pub final_x: Vec<T>,
    pub end_time: T,
    pub quiescence: Quiescence<T>,
}

impl<T: Scalar> Trace<T> {
    pub fn jammed_count(&self) -> usize {
        self.attempts.iter().filter(|a| a.outcome == Outcome::Jammed).count()
    }

    /// Attempts on one edge, in time order.
    pub fn attempts_on(&self, edge: EdgeId) -> impl Iterator<Item = &Attempt<T>> + '_ {
        self.attempts.iter().filter(move |a| a.edge == edge)
    }

    /// Copy keeping only the attempts on edges accepted by `keep`.
    pub fn retain_edges(&self, mut keep: impl FnMut(EdgeId) -> bool) -> Self {
        let mut out = self.clone();
        out.attempts.retain(|a| keep(a.edge));
        out
    }
}

/// `sign_eps(z)`: the sign of `z` when `|z| >= eps`, zero otherwise.
pub fn quantize_sign<T: Scalar>(z: T, epsilon: T) -> i8 {
    if z.abs() >= epsilon {
        if z > T::zero() {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

/// Clock map: `|D| / (2 (d_i + d_j))` when `|D| >= eps`, else
/// `eps / (2 (d_i + d_j))`.
pub fn clock_map<T: Scalar>(disagreement: T, d_i: usize, d_j: usize, epsilon: T) -> T {
    let scale = T::lit(2.0) * T::from_count(d_i + d_j);
    let magnitude = disagreement.abs();
    if magnitude >= epsilon {
        magnitude / scale
    } else {
        epsilon / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantizer() {
        assert_eq!(quantize_sign(0.01, 0.005), 1);
        assert_eq!(quantize_sign(0.005, 0.005), 1);
        assert_eq!(quantize_sign(-0.005, 0.005), -1);
        assert_eq!(quantize_sign(0.0, 0.005), 0);
        assert_eq!(quantize_sign(-0.004, 0.005), 0);
    }

    #[test]
    fn clock_examples() {
        assert_eq!(clock_map(1.0, 1, 1, 0.1), 0.25);
        assert_eq!(clock_map(-1.0, 1, 1, 0.1), 0.25);
        assert_eq!(clock_map(0.05, 1, 1, 0.1), 0.025);
        assert_eq!(clock_map(0.05, 1, 1, 0.1), crate::dos::delta_star(0.1, 1, 1));
    }

    #[test]
    fn clock_respects_dwell_bound() {
        let eps = 0.005;
        for d_max in 1..6usize {
            let floor = eps / (4.0 * d_max as f64);
            for di in 1..=d_max {
                for dj in 1..=d_max {
                    for &d in &[0.0, 1e-4, 0.004, 0.005, 0.3, -2.0] {
                        assert!(clock_map(d, di, dj, eps) >= floor);
                    }
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let ok = SimConfig::new(0.1, Mode::Resilient, 1.0);
        assert!(ok.validate(2).is_ok());
        assert!(SimConfig::new(0.0, Mode::Resilient, 1.0).validate(2).is_err());
        assert!(SimConfig::new(0.1, Mode::Resilient, -1.0).validate(2).is_err());
        assert!(ok.clone().with_dos(vec![DosSignal::empty()]).validate(2).is_err());
        let bad_beta = ok.clone().with_genuine(GenuineFailures { beta: vec![0.2, 1.0], seed: 0 });
        assert!(bad_beta.validate(2).is_err());
    }
}
