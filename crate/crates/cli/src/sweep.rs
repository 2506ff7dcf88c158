use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use jamsim_core::experiment::{summarize, ExperimentConfig, RunSummary};
use rayon::prelude::*;
use serde::Serialize;

use crate::run::fit_parallel;

/// `NAME=START:STOP:STEP`; points are `START + k * STEP` up to `STOP`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, range) = s.split_once('=').ok_or("expected NAME=START:STOP:STEP")?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err("expected NAME=START:STOP:STEP".into());
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let axis = Axis { name: name.trim().to_string(), start: num(start)?, stop: num(stop)?, step: num(step)? };
        if !ExperimentConfig::AXES.contains(&axis.name.as_str()) {
            return Err(format!("unknown axis {:?}; expected one of {}", axis.name, ExperimentConfig::AXES.join(", ")));
        }
        if !(axis.start.is_finite() && axis.stop.is_finite() && axis.step.is_finite()) {
            return Err("range must be finite".into());
        }
        if axis.stop < axis.start {
            return Err("STOP must not be below START".into());
        }
        if axis.stop > axis.start && !(axis.step > 0.0) {
            return Err("STEP must be positive".into());
        }
        Ok(axis)
    }
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        if self.stop == self.start {
            return vec![self.start];
        }
        let slack = 1e-9 * self.step;
        (0..)
            .map(|k| self.start + k as f64 * self.step)
            .take_while(|&v| v <= self.stop + slack)
            .map(|v| tidy(v.min(self.stop)))
            .collect()
    }
}

// 0.1 + 2 * 0.1 prints as 0.30000000000000004; keep 12 significant digits
fn tidy(v: f64) -> f64 {
    format!("{v:.11e}").parse().unwrap_or(v)
}

#[derive(Debug, Serialize)]
struct Row {
    parameter: String,
    value: f64,
    t_star: Option<f64>,
    bound: Option<f64>,
    in_set: bool,
    max_gap: f64,
    delta: f64,
    neighbors_within_eps: bool,
    events: usize,
    jammed: usize,
    max_alpha: f64,
    all_certified: bool,
}

fn point(base: &ExperimentConfig, axis: &Axis, value: f64) -> Result<Row> {
    let mut cfg = base.clone();
    cfg.set_axis(&axis.name, value)?;
    let exp = cfg.resolve().with_context(|| format!("{} = {value}", axis.name))?;
    let trace = exp.run()?;
    let fits = fit_parallel(&exp);
    let s: RunSummary = summarize(&exp, &trace, &fits);
    Ok(Row {
        parameter: axis.name.clone(),
        value,
        t_star: s.t_star,
        bound: s.t_star_bound,
        in_set: s.in_set,
        max_gap: s.max_pairwise_gap,
        delta: s.delta,
        neighbors_within_eps: s.neighbors_within_eps,
        events: s.events,
        jammed: s.jammed,
        max_alpha: fits.iter().map(|r| r.alpha).fold(0.0, f64::max),
        all_certified: s.all_certified,
    })
}

pub fn cmd_sweep(config: &Path, axis: &Axis, out: &Path) -> Result<bool> {
    let base = ExperimentConfig::load(config).with_context(|| format!("config {}", config.display()))?;
    let points = axis.points();
    if points.is_empty() {
        bail!("axis {} has no points", axis.name);
    }
    let rows: Vec<Row> = points.par_iter().map(|&v| point(&base, axis, v)).collect::<Result<_>>()?;

    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    let path = out.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    println!("{:>12} {:>12} {:>14} {:>7} {:>12}", axis.name, "T*", "bound", "in_set", "max_alpha");
    for r in &rows {
        let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.6}"));
        println!("{:>12} {:>12} {:>14} {:>7} {:>12.6}", r.value, opt(r.t_star), opt(r.bound), r.in_set, r.max_alpha);
    }
    Ok(true)
}
