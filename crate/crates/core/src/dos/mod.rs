//! Per-link Denial-of-Service model.
//!
//! A link's jamming is a [`DosSignal`]: a train of closed intervals. Its
//! frequency and duration are summarised by [`DosParams`]
//! `(eta, kappa, tau_f, tau_d)`, which can be fitted exactly from the signal
//! ([`fit_params`]) and turned into a Persistency-of-Communication
//! certificate ([`poc_certificate`]).

mod generators;
mod params;
mod signal;

use thiserror::Error;

pub use generators::{gen_periodic, gen_pulse_train_at, gen_pwm, gen_pwm_seeded, jammed_attempt_times};
pub use params::{
    check_assumptions, delta_star, fit_params, genuine_params, poc_certificate, AssumptionVerdict, Bound, DosParams,
    PocCertificate, WindowProfile,
};
pub use signal::{DosSignal, Interval};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DosError {
    #[error("interval {index}: {reason}")]
    BadInterval { index: usize, reason: &'static str },
    #[error("pulse times must be strictly increasing (violated at index {index})")]
    NotIncreasing { index: usize },
    #[error("invalid DoS parameters: {0}")]
    BadParams(&'static str),
    #[error("invalid generator settings: {0}")]
    BadGenerator(&'static str),
}
