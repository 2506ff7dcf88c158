//! Exact event-driven simulation of self-triggered ternary consensus networks
//! whose links are subject to independent Denial-of-Service (jamming), plus
//! the checks that certify resilience of a run.
//!
//! The crate is organised bottom-up:
//!
//! * [`topology`] - the undirected nominal graph and its degree bookkeeping.
//! * [`dos`] - per-link jamming signals as closed interval trains, frequency and
//!   duration fitting, Persistency-of-Communication certificates and attack
//!   generators.
//! * [`sim`] - the hybrid system (piecewise-linear flow plus clock-driven jumps)
//!   integrated in closed form, producing a complete [`sim::Trace`].
//! * [`analysis`] - consensus-set membership, convergence-time bound, PoC and
//!   trace invariant verification, necessity experiments.
//! * [`experiment`] - JSON experiment configuration, deterministic resolution
//!   from seeds, per-edge certificate fitting and run summaries.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment layer
//! uses.

pub mod analysis;
pub mod dos;
pub mod experiment;
mod scalar;
pub mod sim;
pub mod topology;

pub use scalar::Scalar;
pub use topology::{Edge, Graph, TopologyError};

/// Default scalar for experiments and the CLI.
pub type Real = f64;

pub type DosSignal = dos::DosSignal<Real>;
pub type DosParams = dos::DosParams<Real>;
pub type PocCertificate = dos::PocCertificate<Real>;
pub type SimConfig = sim::SimConfig<Real>;
pub type SimState = sim::SimState<Real>;
pub type Trace = sim::Trace<Real>;
pub type ConsensusReport = analysis::ConsensusReport<Real>;
