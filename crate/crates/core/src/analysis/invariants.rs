//! Trace invariants, checked by replaying the attempt log.
//!
//! The replay rebuilds `x(t)` from `x(0)` and the recorded controls with a
//! plain full-vector update at every batch, independently of the simulator's
//! lazy integration, and then checks:
//!
//! * consistency: replayed disagreements and states match the recorded ones;
//! * conservation: `sum_i x^i` is constant;
//! * Lyapunov: `V = |x|^2 / 2` never increases between consecutive events or
//!   samples;
//! * dwell: consecutive attempts on a link are `clock` apart, with
//!   `clock >= eps / (4 d_max)`;
//! * half-gap and sign: after a successful attempt with `|D_k| >= eps`,
//!   `|D(t)| >= |D_k| / 2` and `sign D(t) = sign D_k` until the next attempt.
//!   `D` is piecewise linear, so it is checked at every instant its slope can
//!   change and at the end of the interval;
//! * Zeno bound on the total number of attempts.

use serde::Serialize;

use super::lyapunov;
use crate::sim::{Outcome, Trace};
use crate::topology::Graph;
use crate::Scalar;

/// Relative drift allowed on `sum_i x^i`.
pub const CONSERVATION_REL_TOL: f64 = 1e-9;
/// Accumulated rounding allowed on V and on the half-gap bound, relative to
/// the problem scale.
pub const ACCUMULATION_SLACK: f64 = 1e-12;
/// Agreement required between replayed and recorded values.
pub const REPLAY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub checked: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        CheckResult { name, checked: 0, violations: 0, first_violation: None }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantReport {
    pub consistency: CheckResult,
    pub conservation: CheckResult,
    pub lyapunov: CheckResult,
    pub dwell: CheckResult,
    pub half_gap: CheckResult,
    pub sign: CheckResult,
    pub zeno: CheckResult,
}

impl InvariantReport {
    pub fn checks(&self) -> [&CheckResult; 7] {
        [&self.consistency, &self.conservation, &self.lyapunov, &self.dwell, &self.half_gap, &self.sign, &self.zeno]
    }

    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed())
    }
}

#[derive(Clone, Copy)]
struct Watch<T> {
    start: T,
    d: T,
}

pub fn verify_trace_invariants<T: Scalar>(trace: &Trace<T>, g: &Graph, epsilon: T) -> InvariantReport {
    let n = g.node_count();
    let m = g.edge_count();
    let mut report = InvariantReport {
        consistency: CheckResult::new("consistency"),
        conservation: CheckResult::new("conservation"),
        lyapunov: CheckResult::new("lyapunov"),
        dwell: CheckResult::new("dwell"),
        half_gap: CheckResult::new("half_gap"),
        sign: CheckResult::new("sign"),
        zeno: CheckResult::new("zeno"),
    };
    if trace.x0.len() != n || trace.edges.as_slice() != g.edges() {
        report.consistency.record(false, || "trace does not belong to this graph".into());
        return report;
    }

    let scale = trace.x0.iter().fold(T::one(), |acc, v| acc.max(v.abs()));
    let replay_tol = T::lit(REPLAY_TOL) * scale;
    let gap_slack = T::lit(ACCUMULATION_SLACK) * scale;
    let v0 = lyapunov(&trace.x0);
    let v_slack = T::lit(ACCUMULATION_SLACK) * v0.max(T::one());

    check_conservation(trace, &mut report.conservation);
    check_dwell(trace, g, epsilon, &mut report.dwell);

    let events_bound = T::from_count(m) * trace.end_time * T::lit(4.0) * T::from_count(g.degree_stats().max) / epsilon
        + T::from_count(m);
    let total = trace.attempts.len();
    report.zeno.record(T::from_count(total) <= events_bound, || format!("{total} attempts exceed {events_bound}"));

    // replay
    let mut x = trace.x0.clone();
    let mut rate = vec![0i32; n];
    let mut control = vec![0i8; m];
    let mut watch: Vec<Option<Watch<T>>> = vec![None; m];
    let mut stamp = vec![usize::MAX; m];
    let mut t_prev = T::zero();
    let mut v_prev = v0;
    let mut next_sample = 0usize;
    let attempts = &trace.attempts;

    let check_sample = |x: &[T], rate: &[i32], t_prev: T, k: usize, report: &mut InvariantReport| {
        let s = &trace.samples[k];
        let worst = s
            .x
            .iter()
            .enumerate()
            .map(|(v, &xv)| (xv - (x[v] + T::from_rate(rate[v]) * (s.time - t_prev))).abs())
            .fold(T::zero(), T::max);
        report
            .consistency
            .record(worst <= replay_tol, || format!("sample at t={} deviates from replay by {worst}", s.time));
    };

    let mut start = 0usize;
    let mut batch_no = 0usize;
    while start < attempts.len() {
        let tb = attempts[start].time;
        let end = start + attempts[start..].iter().take_while(|a| a.time == tb).count();
        let batch = &attempts[start..end];

        while next_sample < trace.samples.len() && trace.samples[next_sample].time <= tb {
            check_sample(&x, &rate, t_prev, next_sample, &mut report);
            next_sample += 1;
        }

        let dt = tb - t_prev;
        for v in 0..n {
            x[v] = x[v] + T::from_rate(rate[v]) * dt;
        }
        t_prev = tb;
        let v_now = lyapunov(&x);
        report
            .lyapunov
            .record(v_now <= v_prev + v_slack, || format!("V rose from {v_prev} to {v_now} at t={tb}"));
        v_prev = v_now;

        for a in batch {
            let d = x[a.j] - x[a.i];
            report.consistency.record((d - a.disagreement).abs() <= replay_tol, || {
                format!("edge {{{}, {}}} at t={tb}: recorded D={} but replay gives {d}", a.i, a.j, a.disagreement)
            });
        }

        // breakpoints of D on watched edges: own attempt, or a slope change at
        // either endpoint
        let mut to_check: Vec<usize> = Vec::new();
        for a in batch {
            if stamp[a.edge] != batch_no {
                stamp[a.edge] = batch_no;
                to_check.push(a.edge);
            }
            if a.control != control[a.edge] {
                for node in [a.i, a.j] {
                    for &e in g.incident(node) {
                        if stamp[e] != batch_no {
                            stamp[e] = batch_no;
                            to_check.push(e);
                        }
                    }
                }
            }
        }
        for &e in &to_check {
            if let Some(w) = watch[e] {
                check_half_gap(&x, g, e, w, tb, gap_slack, &mut report);
            }
        }

        for a in batch {
            watch[a.edge] = None;
            let delta = i32::from(a.control) - i32::from(control[a.edge]);
            rate[a.i] += delta;
            rate[a.j] -= delta;
            control[a.edge] = a.control;
            let d = x[a.j] - x[a.i];
            if a.outcome == Outcome::Success && d.abs() >= epsilon {
                watch[a.edge] = Some(Watch { start: tb, d });
            }
        }
        start = end;
        batch_no += 1;
    }

    while next_sample < trace.samples.len() {
        check_sample(&x, &rate, t_prev, next_sample, &mut report);
        next_sample += 1;
    }

    // close open intervals at the end of the run
    let dt = trace.end_time - t_prev;
    for v in 0..n {
        x[v] = x[v] + T::from_rate(rate[v]) * dt;
    }
    for e in 0..m {
        if let Some(w) = watch[e] {
            check_half_gap(&x, g, e, w, trace.end_time, gap_slack, &mut report);
        }
    }
    let v_end = lyapunov(&x);
    report
        .lyapunov
        .record(v_end <= v_prev + v_slack, || format!("V rose from {v_prev} to {v_end} at the end of the run"));
    let worst = x
        .iter()
        .zip(&trace.final_x)
        .map(|(&a, &b)| (a - b).abs())
        .fold(T::zero(), T::max);
    report
        .consistency
        .record(worst <= replay_tol, || format!("final state deviates from replay by {worst}"));

    // V over the recorded samples as well
    for w in trace.samples.windows(2) {
        let (a, b) = (lyapunov(&w[0].x), lyapunov(&w[1].x));
        report
            .lyapunov
            .record(b <= a + v_slack, || format!("sampled V rose from {a} to {b} at t={}", w[1].time));
    }

    report
}

fn check_half_gap<T: Scalar>(x: &[T], g: &Graph, e: usize, w: Watch<T>, t: T, slack: T, report: &mut InvariantReport) {
    let edge = g.edge(e);
    let d = x[edge.hi()] - x[edge.lo()];
    let half = w.d.abs() / T::lit(2.0);
    report.half_gap.record(d.abs() >= half - slack, || {
        format!("edge {edge}: |D|={} at t={t} below half of |D|={} set at t={}", d.abs(), w.d.abs(), w.start)
    });
    report.sign.record(d * w.d > T::zero(), || {
        format!("edge {edge}: D changed sign from {} (t={}) to {d} (t={t})", w.d, w.start)
    });
}

fn check_conservation<T: Scalar>(trace: &Trace<T>, check: &mut CheckResult) {
    let total0: T = trace.x0.iter().copied().sum();
    let mass: T = trace.x0.iter().map(|v| v.abs()).sum();
    let tol = T::lit(CONSERVATION_REL_TOL) * mass.max(T::one());
    for s in trace.samples.iter().map(|s| (s.time, &s.x)).chain(std::iter::once((trace.end_time, &trace.final_x))) {
        let total: T = s.1.iter().copied().sum();
        check.record((total - total0).abs() <= tol, || format!("sum x = {total} at t={} vs {total0} initially", s.0));
    }
}

fn check_dwell<T: Scalar>(trace: &Trace<T>, g: &Graph, epsilon: T, check: &mut CheckResult) {
    let floor = epsilon / (T::lit(4.0) * T::from_count(g.degree_stats().max));
    let mut last: Vec<Option<(T, T)>> = vec![None; g.edge_count()];
    for a in &trace.attempts {
        check.record(a.clock >= floor, || {
            format!("edge {{{}, {}}} at t={}: clock {} below eps/(4 d_max) = {floor}", a.i, a.j, a.time, a.clock)
        });
        if let Some((t, clock)) = last[a.edge] {
            check.record(a.time == t + clock && a.time > t, || {
                format!("edge {{{}, {}}}: attempt at t={} but previous at {t} scheduled +{clock}", a.i, a.j, a.time)
            });
        }
        last[a.edge] = Some((a.time, a.clock));
    }
}
