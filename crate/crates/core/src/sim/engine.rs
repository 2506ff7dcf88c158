use super::calendar::Calendar;
use super::oracle::{ConfiguredLinks, LinkOracle};
use super::{clock_map, quantize_sign, Attempt, Mode, Outcome, Quiescence, Sample, SimConfig, SimError, Trace};
use crate::dos::delta_star;
use crate::topology::{EdgeId, Graph};
use crate::Scalar;

/// Hybrid state `(x, u, theta)` plus the event calendar.
///
/// Node values are stored lazily as `(value, anchor)` and advanced with their
/// integer slope only when read or when the slope changes. Clocks are kept as
/// absolute deadlines.
#[derive(Debug, Clone)]
pub struct SimState<T> {
    t: T,
    value: Vec<T>,
    anchor: Vec<T>,
    rate: Vec<i32>,
    /// `u^ij` for each edge `{i, j}`, `i < j`.
    control: Vec<i8>,
    next_attempt: Vec<T>,
    calendar: Calendar<T>,
    ends: Vec<(usize, usize)>,
    degree_sum: Vec<(usize, usize)>,
    dstar: Vec<T>,
    epsilon: T,
    active: usize,
    quiet_since: Option<T>,
    confirmed: Vec<bool>,
    confirmed_count: usize,
    batch: Vec<EdgeId>,
    reads: Vec<(T, bool)>,
}

impl<T: Scalar> SimState<T> {
    /// Sets up the state at `t = 0^-`: every clock is zero, so every edge
    /// attempts at `t = 0`.
    ///
    /// `u0[e] = [u^ij, u^ji]` for edge `e = {i, j}`, `i < j`; the pair must be
    /// antisymmetric and ternary.
    pub fn init(g: &Graph, x0: &[T], u0: &[[i8; 2]], cfg: &SimConfig<T>) -> Result<Self, SimError> {
        cfg.validate(g.edge_count())?;
        if x0.len() != g.node_count() {
            return Err(SimError::StateLength { expected: g.node_count(), got: x0.len() });
        }
        if let Some(bad) = x0.iter().position(|v| !v.is_finite()) {
            return Err(SimError::NonFinite(bad));
        }
        let m = g.edge_count();
        let control: Vec<i8> = if u0.is_empty() {
            vec![0; m]
        } else {
            if u0.len() != m {
                return Err(SimError::ControlLength { expected: m, got: u0.len() });
            }
            for (e, pair) in u0.iter().enumerate() {
                if pair[0] != -pair[1] || !(-1..=1).contains(&pair[0]) {
                    return Err(SimError::NotAntisymmetric { edge: g.edge(e), pair: *pair });
                }
            }
            u0.iter().map(|p| p[0]).collect()
        };

        let ends: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.lo(), e.hi())).collect();
        let degree_sum: Vec<(usize, usize)> = ends.iter().map(|&(i, j)| (g.degree(i), g.degree(j))).collect();
        let dstar = degree_sum.iter().map(|&(di, dj)| delta_star(cfg.epsilon, di, dj)).collect();

        let mut rate = vec![0i32; g.node_count()];
        for (e, &(i, j)) in ends.iter().enumerate() {
            rate[i] += i32::from(control[e]);
            rate[j] -= i32::from(control[e]);
        }
        let mut calendar = Calendar::new();
        for e in 0..m {
            calendar.schedule(e, T::zero());
        }
        let active = control.iter().filter(|&&u| u != 0).count();
        Ok(SimState {
            t: T::zero(),
            value: x0.to_vec(),
            anchor: vec![T::zero(); g.node_count()],
            rate,
            control,
            next_attempt: vec![T::zero(); m],
            calendar,
            ends,
            degree_sum,
            dstar,
            epsilon: cfg.epsilon,
            active,
            quiet_since: (active == 0).then(T::zero),
            confirmed: vec![false; m],
            confirmed_count: 0,
            batch: Vec::new(),
            reads: Vec::new(),
        })
    }

    pub fn time(&self) -> T {
        self.t
    }

    /// `x^i` at time `t >= anchor`.
    pub fn value_at(&self, node: usize, t: T) -> T {
        self.value[node] + T::from_rate(self.rate[node]) * (t - self.anchor[node])
    }

    pub fn positions_at(&self, t: T) -> Vec<T> {
        (0..self.value.len()).map(|v| self.value_at(v, t)).collect()
    }

    pub fn positions(&self) -> Vec<T> {
        self.positions_at(self.t)
    }

    /// Current slope of node `v`: `sum_{j in N_v} u^vj`.
    pub fn rate(&self, node: usize) -> i32 {
        self.rate[node]
    }

    /// `u^ij` of edge `{i, j}` with `i < j`.
    pub fn control(&self, edge: EdgeId) -> i8 {
        self.control[edge]
    }

    pub fn next_attempt(&self, edge: EdgeId) -> T {
        self.next_attempt[edge]
    }

    pub fn pending_events(&self) -> usize {
        self.calendar.len()
    }

    pub fn next_event_time(&self) -> Option<T> {
        self.calendar.next_time()
    }

    pub fn all_controls_zero(&self) -> bool {
        self.active == 0
    }

    pub fn quiet_since(&self) -> Option<T> {
        self.quiet_since
    }

    /// All controls are zero, the state has not moved since they became zero
    /// and every edge has since had a successful attempt (which therefore saw
    /// `|D| < eps`). From here on every attempt leaves the controls at zero.
    pub fn is_absorbing(&self) -> bool {
        self.active == 0 && self.confirmed_count == self.confirmed.len()
    }

    fn set_control(&mut self, e: EdgeId, new: i8, t: T) {
        let old = self.control[e];
        if old == new {
            return;
        }
        let (i, j) = self.ends[e];
        for v in [i, j] {
            self.value[v] = self.value_at(v, t);
            self.anchor[v] = t;
        }
        let delta = i32::from(new) - i32::from(old);
        self.rate[i] += delta;
        self.rate[j] -= delta;
        self.control[e] = new;
        match (old, new) {
            (0, _) => self.active += 1,
            (_, 0) => self.active -= 1,
            _ => {}
        }
    }

    /// Processes the next batch of simultaneous clock expiries, appending one
    /// [`Attempt`] per expiring edge to `out`. Returns the batch time, or
    /// `None` when the next expiry lies beyond the horizon.
    pub fn advance_into<O>(&mut self, cfg: &SimConfig<T>, oracle: &mut O, out: &mut Vec<Attempt<T>>) -> Option<T>
    where
        O: LinkOracle<T> + ?Sized,
    {
        let te = self.calendar.next_time()?;
        if te > cfg.horizon {
            return None;
        }
        let mut batch = std::mem::take(&mut self.batch);
        batch.clear();
        self.calendar.pop_batch(&mut batch);
        self.t = te;

        // read every disagreement before any control changes
        let mut reads = std::mem::take(&mut self.reads);
        reads.clear();
        for &e in &batch {
            let (i, j) = self.ends[e];
            let d = self.value_at(j, te) - self.value_at(i, te);
            let denied = cfg.mode == Mode::Resilient && oracle.denied(e, te);
            reads.push((d, denied));
        }

        let mut zero_successes = 0usize;
        for (&e, &(d, denied)) in batch.iter().zip(&reads) {
            let (i, j) = self.ends[e];
            let (control, clock, outcome) = if denied {
                (0, self.dstar[e], Outcome::Jammed)
            } else {
                let (di, dj) = self.degree_sum[e];
                (quantize_sign(d, self.epsilon), clock_map(d, di, dj, self.epsilon), Outcome::Success)
            };
            self.set_control(e, control, te);
            let next = te + clock;
            self.next_attempt[e] = next;
            self.calendar.schedule(e, next);
            if outcome == Outcome::Success && control == 0 {
                zero_successes += 1;
            }
            out.push(Attempt { time: te, edge: e, i, j, outcome, disagreement: d, control, clock });
        }

        if self.active == 0 {
            if self.quiet_since.is_none() {
                self.quiet_since = Some(te);
                self.confirmed.iter_mut().for_each(|c| *c = false);
                self.confirmed_count = 0;
            }
            if zero_successes > 0 {
                let first = out.len() - batch.len();
                for a in &out[first..] {
                    if a.outcome == Outcome::Success && !self.confirmed[a.edge] {
                        self.confirmed[a.edge] = true;
                        self.confirmed_count += 1;
                    }
                }
            }
        } else {
            self.quiet_since = None;
        }

        self.batch = batch;
        self.reads = reads;
        Some(te)
    }

    pub fn advance<O>(&mut self, cfg: &SimConfig<T>, oracle: &mut O) -> Option<Vec<Attempt<T>>>
    where
        O: LinkOracle<T> + ?Sized,
    {
        let mut out = Vec::new();
        self.advance_into(cfg, oracle, &mut out).map(|_| out)
    }
}

/// Runs the configured system from `(x0, u0)` with jamming and genuine
/// failures taken from `cfg`.
pub fn run<T: Scalar>(g: &Graph, x0: &[T], u0: &[[i8; 2]], cfg: &SimConfig<T>) -> Result<Trace<T>, SimError> {
    let mut oracle = ConfiguredLinks::new(cfg);
    run_with_oracle(g, x0, u0, cfg, &mut oracle)
}

/// Runs until the horizon or, when `cfg.stop_at_quiescence`, until the state
/// is absorbing.
pub fn run_with_oracle<T, O>(g: &Graph, x0: &[T], u0: &[[i8; 2]], cfg: &SimConfig<T>, oracle: &mut O) -> Result<Trace<T>, SimError>
where
    T: Scalar,
    O: LinkOracle<T> + ?Sized,
{
    let mut state = SimState::init(g, x0, u0, cfg)?;
    let mut attempts = Vec::new();
    let mut samples = vec![Sample { time: T::zero(), x: x0.to_vec() }];
    let mut sampler = Sampler { dt: cfg.record_dt, k: 1 };

    let mut end_time = cfg.horizon;
    let mut verified = false;
    loop {
        if cfg.stop_at_quiescence && state.is_absorbing() {
            end_time = state.time();
            verified = true;
            break;
        }
        let Some(next) = state.next_event_time().filter(|&t| t <= cfg.horizon) else {
            break;
        };
        sampler.emit_until(next, &state, &mut samples);
        state.advance_into(cfg, oracle, &mut attempts);
    }
    sampler.emit_until(end_time, &state, &mut samples);
    let final_x = state.positions_at(end_time);
    if samples.last().map_or(true, |s| s.time < end_time) {
        samples.push(Sample { time: end_time, x: final_x.clone() });
    }

    Ok(Trace {
        node_count: g.node_count(),
        edges: g.edges().to_vec(),
        epsilon: cfg.epsilon,
        mode: cfg.mode,
        horizon: cfg.horizon,
        x0: x0.to_vec(),
        attempts,
        samples,
        final_x,
        end_time,
        quiescence: Quiescence { time: state.quiet_since(), verified },
    })
}

struct Sampler<T> {
    dt: Option<T>,
    k: usize,
}

impl<T: Scalar> Sampler<T> {
    /// Records the state at every grid instant `k * dt <= until`.
    fn emit_until(&mut self, until: T, state: &SimState<T>, samples: &mut Vec<Sample<T>>) {
        let Some(dt) = self.dt else { return };
        loop {
            let t = T::from_count(self.k) * dt;
            if t > until {
                return;
            }
            samples.push(Sample { time: t, x: state.positions_at(t) });
            self.k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::ClearChannel;
    use super::*;
    use crate::dos::DosSignal;

    fn two_nodes() -> Graph {
        Graph::new(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn init_schedules_every_edge_at_zero() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let cfg = SimConfig::new(0.1, Mode::Resilient, 1.0);
        let s = SimState::init(&g, &[0.0, 0.5, 1.0], &[], &cfg).unwrap();
        assert_eq!(s.pending_events(), 3);
        assert_eq!(s.next_event_time(), Some(0.0));
        assert!((0..3).all(|e| s.next_attempt(e) == 0.0));
    }

    #[test]
    fn init_rejects_bad_controls() {
        let g = two_nodes();
        let cfg = SimConfig::new(0.1, Mode::Resilient, 1.0);
        assert!(matches!(
            SimState::init(&g, &[0.0, 1.0], &[[1, 1]], &cfg),
            Err(SimError::NotAntisymmetric { .. })
        ));
        assert!(SimState::init(&g, &[0.0, 1.0], &[[2, -2]], &cfg).is_err());
        assert!(SimState::init(&g, &[0.0, 1.0], &[[0, 0]], &cfg).is_ok());
        assert!(SimState::init(&g, &[0.0], &[], &cfg).is_err());
    }

    #[test]
    fn initial_controls_set_initial_slope() {
        let g = two_nodes();
        let cfg = SimConfig::new(0.1, Mode::Resilient, 1.0);
        let s = SimState::init(&g, &[0.0, 1.0], &[[-1, 1]], &cfg).unwrap();
        assert_eq!((s.rate(0), s.rate(1)), (-1, 1));
    }

    #[test]
    fn first_attempt_success_and_jammed() {
        let g = two_nodes();
        let cfg = SimConfig::new(0.1, Mode::Resilient, 1.0);
        let mut s = SimState::init(&g, &[0.0, 1.0], &[], &cfg).unwrap();
        let batch = s.advance(&cfg, &mut ClearChannel).unwrap();
        assert_eq!(batch.len(), 1);
        assert_eq!(batch[0].control, 1);
        assert_eq!(s.next_attempt(0), 0.25);

        let jammed = cfg.clone().with_dos(vec![DosSignal::new([(0.0, 0.0)]).unwrap()]);
        let mut s = SimState::init(&g, &[0.0, 1.0], &[], &jammed).unwrap();
        let mut links = ConfiguredLinks::new(&jammed);
        let batch = s.advance(&jammed, &mut links).unwrap();
        assert_eq!(batch[0].outcome, Outcome::Jammed);
        assert_eq!(batch[0].control, 0);
        assert_eq!(s.next_attempt(0), 0.025);
    }

    #[test]
    fn two_node_hand_calculus() {
        let g = two_nodes();
        let cfg = SimConfig::new(0.1, Mode::Nominal, 10.0);
        let trace = run(&g, &[0.0, 1.0], &[], &cfg).unwrap();
        let times: Vec<f64> = trace.attempts.iter().map(|a| a.time).collect();
        // attempts continue until every edge confirms |D| < eps after T*
        assert_eq!(&times[..5], &[0.0, 0.25, 0.375, 0.4375, 0.46875]);
        let controls: Vec<i8> = trace.attempts.iter().map(|a| a.control).collect();
        assert_eq!(&controls[..5], &[1, 1, 1, 1, 0]);
        assert_eq!(trace.final_x, vec![0.46875, 0.53125]);
        assert_eq!(trace.quiescence.time, Some(0.46875));
        assert!(trace.quiescence.verified);
        assert_eq!(trace.end_time, 0.46875);
    }

    #[test]
    fn equal_start_is_immediately_quiescent() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let cfg = SimConfig::new(0.1, Mode::Resilient, 5.0);
        let trace = run(&g, &[0.3, 0.3, 0.3], &[[1, -1], [-1, 1]], &cfg).unwrap();
        assert_eq!(trace.attempts.len(), 2);
        assert!(trace.attempts.iter().all(|a| a.control == 0));
        assert_eq!(trace.quiescence.time, Some(0.0));
        assert_eq!(trace.final_x, vec![0.3, 0.3, 0.3]);
    }

    #[test]
    fn simultaneous_batch_reads_unjumped_state() {
        // both edges of the path expire together at t = 0 and must see x(0)
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let cfg = SimConfig::new(0.1, Mode::Nominal, 1.0);
        let mut s = SimState::init(&g, &[0.0, 1.0, 0.0], &[], &cfg).unwrap();
        let batch = s.advance(&cfg, &mut ClearChannel).unwrap();
        assert_eq!(batch.iter().map(|a| a.disagreement).collect::<Vec<_>>(), vec![1.0, -1.0]);
        assert_eq!(batch.iter().map(|a| a.control).collect::<Vec<_>>(), vec![1, -1]);
        assert_eq!(s.rate(1), -2);
    }

    #[test]
    fn samples_follow_grid() {
        let g = two_nodes();
        let cfg = SimConfig::new(0.1, Mode::Nominal, 1.0).with_record_dt(0.125).running_to_horizon();
        let trace = run(&g, &[0.0, 1.0], &[], &cfg).unwrap();
        let times: Vec<f64> = trace.samples.iter().map(|s| s.time).collect();
        assert_eq!(times, vec![0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0]);
        assert_eq!(trace.samples[1].x, vec![0.125, 0.875]);
        assert_eq!(trace.end_time, 1.0);
        assert!(!trace.quiescence.verified);
        assert_eq!(trace.quiescence.time, Some(0.46875));
    }

    #[test]
    fn generic_over_f32() {
        let g = two_nodes();
        let cfg = SimConfig::<f32>::new(0.1, Mode::Nominal, 10.0);
        let trace = run(&g, &[0.0f32, 1.0], &[], &cfg).unwrap();
        assert_eq!(trace.final_x, vec![0.46875f32, 0.53125]);
        assert_eq!(trace.quiescence.time, Some(0.46875f32));
    }
}
