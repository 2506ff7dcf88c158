use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimConfig;
use crate::topology::EdgeId;
use crate::Scalar;

/// Decides whether a transmission attempt on an edge at time `t` is denied.
/// Consulted only in resilient mode, once per attempt, in time order.
pub trait LinkOracle<T> {
    fn denied(&mut self, edge: EdgeId, t: T) -> bool;
}

/// Never denies.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClearChannel;

impl<T> LinkOracle<T> for ClearChannel {
    fn denied(&mut self, _edge: EdgeId, _t: T) -> bool {
        false
    }
}

/// Jamming signals and genuine failures taken from a [`SimConfig`].
///
/// Genuine failures use one ChaCha stream per edge, so the draws seen by an
/// edge do not depend on how attempts of other edges interleave.
#[derive(Debug, Clone)]
pub struct ConfiguredLinks<'a, T> {
    cfg: &'a SimConfig<T>,
    streams: Vec<ChaCha8Rng>,
}

impl<'a, T: Scalar> ConfiguredLinks<'a, T> {
    pub fn new(cfg: &'a SimConfig<T>) -> Self {
        let streams = match &cfg.genuine {
            Some(g) => (0..g.beta.len())
                .map(|e| {
                    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                    rng.set_stream(e as u64);
                    rng
                })
                .collect(),
            None => Vec::new(),
        };
        ConfiguredLinks { cfg, streams }
    }
}

impl<T: Scalar> LinkOracle<T> for ConfiguredLinks<'_, T> {
    fn denied(&mut self, edge: EdgeId, t: T) -> bool {
        let malicious = self.cfg.dos.get(edge).is_some_and(|s| s.is_active(t));
        let genuine = match &self.cfg.genuine {
            Some(g) if g.beta[edge] > T::zero() => T::lit(self.streams[edge].gen::<f64>()) < g.beta[edge],
            _ => false,
        };
        malicious || genuine
    }
}
