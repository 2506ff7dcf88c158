use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dos::{delta_star, gen_periodic, gen_pulse_train_at, gen_pwm_seeded, jammed_attempt_times, DosError};
use crate::sim::{GenuineFailures, Mode, SimConfig, SimError};
use crate::topology::{Edge, Graph, TopologyError};
use crate::{DosSignal, Real};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("field `schema`: unsupported version {found}, expected {SCHEMA_VERSION}")]
    Schema { found: u32 },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("field `graph`: {0}")]
    Topology(TopologyError),
    #[error("field `{field}`: {error}")]
    Dos { field: String, error: DosError },
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl From<TopologyError> for ConfigError {
    fn from(e: TopologyError) -> Self {
        ConfigError::Topology(e)
    }
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphConfig {
    Explicit { n: usize, edges: Vec<Edge> },
    /// Connected `deg`-regular graph drawn with `graph_seed`.
    RandomRegular { n: usize, deg: usize },
    /// `0 - 1 - ... - (n-1)`.
    Path { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Explicit { values: Vec<Real> },
    /// Independent uniform draws in `[lo, hi)` from `x0_seed`.
    Uniform { lo: Real, hi: Real },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Uniform { lo: 0.0, hi: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialControls {
    #[default]
    Zeros,
    /// Uniform over `{-1, 0, 1}` per link, from `u0_seed`.
    Random,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DosGenerator {
    #[default]
    None,
    Periodic {
        period: Real,
        duty: Real,
        #[serde(default)]
        offset: Real,
    },
    /// Random PWM, one independent stream per link drawn from `dos_seed`.
    Pwm { max_period: Real, max_duty: Real },
    /// Singleton pulses on every instant at which the link would retry if
    /// every attempt failed.
    PulseTrainAtAttempts,
    Explicit { intervals: DosSignal },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDos {
    pub edge: Edge,
    pub generator: DosGenerator,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DosConfig {
    /// Applied to every link without an override.
    #[serde(default)]
    pub default: DosGenerator,
    #[serde(default)]
    pub edges: Vec<EdgeDos>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeBeta {
    pub edge: Edge,
    pub beta: Real,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenuineConfig {
    #[serde(default)]
    pub beta: Real,
    #[serde(default)]
    pub edges: Vec<EdgeBeta>,
}

fn default_mode() -> Mode {
    Mode::Resilient
}

fn default_true() -> bool {
    true
}

/// JSON experiment description. Every random choice is derived from one of
/// the named seeds, so a config resolves to the same run every time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub graph: GraphConfig,
    pub epsilon: Real,
    pub horizon: Real,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub x0: InitialState,
    #[serde(default)]
    pub u0: InitialControls,
    #[serde(default)]
    pub dos: DosConfig,
    #[serde(default)]
    pub genuine: GenuineConfig,
    #[serde(default)]
    pub graph_seed: u64,
    #[serde(default)]
    pub x0_seed: u64,
    #[serde(default)]
    pub u0_seed: u64,
    #[serde(default)]
    pub dos_seed: u64,
    #[serde(default)]
    pub beta_seed: u64,
    #[serde(default)]
    pub record_dt: Option<Real>,
    #[serde(default = "default_true")]
    pub stop_at_quiescence: bool,
}

/// A config with everything drawn: graph, initial condition and per-link
/// signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub graph: Graph,
    pub x0: Vec<Real>,
    pub u0: Vec<[i8; 2]>,
    /// One signal per edge id, possibly empty.
    pub signals: Vec<DosSignal>,
    /// One failure probability per edge id.
    pub beta: Vec<Real>,
    pub sim: SimConfig<Real>,
}

impl Experiment {
    pub fn run(&self) -> Result<crate::Trace, SimError> {
        crate::sim::run(&self.graph, &self.x0, &self.u0, &self.sim)
    }

    pub fn delta_star(&self, edge: usize) -> Real {
        let e = self.graph.edge(edge);
        delta_star(self.config.epsilon, self.graph.degree(e.lo()), self.graph.degree(e.hi()))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema { found: cfg.schema });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    fn validate_scalars(&self) -> Result<(), ConfigError> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be positive and finite"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(invalid("horizon", "must be positive and finite"));
        }
        if let Some(dt) = self.record_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("record_dt", "must be positive and finite"));
            }
        }
        Ok(())
    }

    fn build_graph(&self) -> Result<Graph, ConfigError> {
        let g = match &self.graph {
            GraphConfig::Explicit { n, edges } => Graph::new(*n, edges.iter().map(|e| (e.lo(), e.hi())))?,
            GraphConfig::RandomRegular { n, deg } => Graph::random_regular_connected(*n, *deg, self.graph_seed)?,
            GraphConfig::Path { n } => Graph::new(*n, (1..*n).map(|v| (v - 1, v)))?,
        };
        if g.node_count() == 0 {
            return Err(invalid("graph", "needs at least one node"));
        }
        if !g.is_connected() {
            return Err(invalid("graph", "is not connected"));
        }
        Ok(g)
    }

    fn initial_state(&self, n: usize) -> Result<Vec<Real>, ConfigError> {
        match &self.x0 {
            InitialState::Explicit { values } => {
                if values.len() != n {
                    return Err(invalid("x0.values", format!("has {} entries for {n} nodes", values.len())));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(invalid("x0.values", "entries must be finite"));
                }
                Ok(values.clone())
            }
            InitialState::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid("x0", "needs finite lo <= hi"));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(self.x0_seed);
                Ok((0..n).map(|_| lo + (hi - lo) * rng.gen::<Real>()).collect())
            }
        }
    }

    fn initial_controls(&self, m: usize) -> Vec<[i8; 2]> {
        match self.u0 {
            InitialControls::Zeros => Vec::new(),
            InitialControls::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.u0_seed);
                (0..m)
                    .map(|_| {
                        let u: i8 = rng.gen_range(-1..=1);
                        [u, -u]
                    })
                    .collect()
            }
        }
    }

    fn signal(&self, g: &Graph, id: usize, generator: &DosGenerator, field: &str) -> Result<DosSignal, ConfigError> {
        let dos_err = |error| ConfigError::Dos { field: field.to_string(), error };
        let h = self.horizon;
        match generator {
            DosGenerator::None => Ok(DosSignal::empty()),
            DosGenerator::Periodic { period, duty, offset } => gen_periodic(*period, *duty, *offset, h).map_err(dos_err),
            DosGenerator::Pwm { max_period, max_duty } => {
                gen_pwm_seeded(self.dos_seed, id as u64, *max_period, *max_duty, h).map_err(dos_err)
            }
            DosGenerator::PulseTrainAtAttempts => {
                let e = g.edge(id);
                let dstar = delta_star(self.epsilon, g.degree(e.lo()), g.degree(e.hi()));
                gen_pulse_train_at(&jammed_attempt_times(dstar, h)).map_err(dos_err)
            }
            DosGenerator::Explicit { intervals } => Ok(intervals.clone()),
        }
    }

    fn signals(&self, g: &Graph) -> Result<Vec<DosSignal>, ConfigError> {
        let mut generators: Vec<(&DosGenerator, String)> =
            vec![(&self.dos.default, "dos.default".to_string()); g.edge_count()];
        for (k, over) in self.dos.edges.iter().enumerate() {
            let field = format!("dos.edges[{k}]");
            let id = g
                .edge_id(over.edge)
                .ok_or_else(|| invalid(format!("{field}.edge"), format!("{} is not an edge of the graph", over.edge)))?;
            generators[id] = (&over.generator, format!("{field}.generator"));
        }
        generators
            .iter()
            .enumerate()
            .map(|(id, (generator, field))| self.signal(g, id, generator, field))
            .collect()
    }

    fn betas(&self, g: &Graph) -> Result<Vec<Real>, ConfigError> {
        let check = |beta: Real, field: &str| {
            if (0.0..1.0).contains(&beta) {
                Ok(beta)
            } else {
                Err(invalid(field, "beta must lie in [0, 1)"))
            }
        };
        let mut beta = vec![check(self.genuine.beta, "genuine.beta")?; g.edge_count()];
        for (k, over) in self.genuine.edges.iter().enumerate() {
            let id = g.edge_id(over.edge).ok_or_else(|| {
                invalid(format!("genuine.edges[{k}].edge"), format!("{} is not an edge of the graph", over.edge))
            })?;
            beta[id] = check(over.beta, &format!("genuine.edges[{k}].beta"))?;
        }
        Ok(beta)
    }

    /// Draws the graph, initial condition and signals from the seeds.
    pub fn resolve(&self) -> Result<Experiment, ConfigError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ConfigError::Schema { found: self.schema });
        }
        self.validate_scalars()?;
        let graph = self.build_graph()?;
        let x0 = self.initial_state(graph.node_count())?;
        let u0 = self.initial_controls(graph.edge_count());
        let signals = self.signals(&graph)?;
        let beta = self.betas(&graph)?;

        let mut sim = SimConfig::new(self.epsilon, self.mode, self.horizon);
        if signals.iter().any(|s| !s.is_empty()) {
            sim = sim.with_dos(signals.clone());
        }
        if beta.iter().any(|&b| b > 0.0) {
            sim = sim.with_genuine(GenuineFailures { beta: beta.clone(), seed: self.beta_seed });
        }
        if let Some(dt) = self.record_dt {
            sim = sim.with_record_dt(dt);
        }
        if !self.stop_at_quiescence {
            sim = sim.running_to_horizon();
        }
        sim.validate(graph.edge_count())?;
        Ok(Experiment { config: self.clone(), graph, x0, u0, signals, beta, sim })
    }

    /// Names accepted by [`Self::set_axis`].
    pub const AXES: [&'static str; 13] = [
        "epsilon", "horizon", "beta", "max_duty", "max_period", "duty", "period", "graph_seed", "x0_seed", "u0_seed",
        "dos_seed", "beta_seed", "seed",
    ];

    /// Sets one sweepable parameter. Generator parameters (`max_duty`,
    /// `max_period`, `duty`, `period`) apply to every generator of the
    /// matching kind; `beta` applies to the default and every override;
    /// `seed` sets all five seeds.
    pub fn set_axis(&mut self, name: &str, value: Real) -> Result<(), ConfigError> {
        let seed = || {
            if value >= 0.0 && value.fract() == 0.0 && value <= u64::MAX as Real {
                Ok(value as u64)
            } else {
                Err(invalid(name, format!("seed value {value} is not a non-negative integer")))
            }
        };
        let mut touched = false;
        let mut each_generator = |f: &mut dyn FnMut(&mut DosGenerator) -> bool| {
            touched |= f(&mut self.dos.default);
            for over in &mut self.dos.edges {
                touched |= f(&mut over.generator);
            }
        };
        match name {
            "epsilon" => self.epsilon = value,
            "horizon" => self.horizon = value,
            "beta" => {
                self.genuine.beta = value;
                self.genuine.edges.iter_mut().for_each(|e| e.beta = value);
            }
            "max_duty" | "max_period" => {
                each_generator(&mut |g| match g {
                    DosGenerator::Pwm { max_period, max_duty } => {
                        *if name == "max_duty" { max_duty } else { max_period } = value;
                        true
                    }
                    _ => false,
                });
                if !touched {
                    return Err(invalid(name, "no pwm generator in the config"));
                }
            }
            "duty" | "period" => {
                each_generator(&mut |g| match g {
                    DosGenerator::Periodic { period, duty, .. } => {
                        *if name == "duty" { duty } else { period } = value;
                        true
                    }
                    _ => false,
                });
                if !touched {
                    return Err(invalid(name, "no periodic generator in the config"));
                }
            }
            "graph_seed" => self.graph_seed = seed()?,
            "x0_seed" => self.x0_seed = seed()?,
            "u0_seed" => self.u0_seed = seed()?,
            "dos_seed" => self.dos_seed = seed()?,
            "beta_seed" => self.beta_seed = seed()?,
            "seed" => {
                let s = seed()?;
                self.graph_seed = s;
                self.x0_seed = s;
                self.u0_seed = s;
                self.dos_seed = s;
                self.beta_seed = s;
            }
            other => {
                return Err(invalid("axis", format!("unknown axis {other:?}; expected one of {}", Self::AXES.join(", "))))
            }
        }
        Ok(())
    }
}
