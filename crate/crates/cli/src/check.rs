use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jamsim_core::analysis::{consensus_report, verify_poc, verify_trace_invariants, PocVerdict};
use jamsim_core::experiment::{bound_phi, poc_delays, settling_time};
use jamsim_core::sim::export::{read_attempts, read_samples};
use jamsim_core::sim::Quiescence;
use jamsim_core::Trace;

use crate::run::{fit_parallel, load};

struct Table {
    all_passed: bool,
}

impl Table {
    fn row(&mut self, passed: Option<bool>, name: &str, detail: String) {
        let tag = match passed {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "SKIP",
        };
        self.all_passed &= passed != Some(false);
        println!("{tag}  {name:<22} {detail}");
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

pub fn cmd_check(dir: &Path, config: Option<&Path>) -> Result<bool> {
    let config: PathBuf = config.map_or_else(|| dir.join("config.json"), Path::to_path_buf);
    let exp = load(&config)?;
    let g = &exp.graph;
    let attempts_path = dir.join("attempts.csv");
    let samples_path = dir.join("samples.csv");
    let attempts = read_attempts(open(&attempts_path)?, g).with_context(|| attempts_path.display().to_string())?;
    let samples = read_samples(open(&samples_path)?, g.node_count())
        .with_context(|| format!("{} (expected {} node columns)", samples_path.display(), g.node_count()))?;

    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        bail!("{}: no samples", samples_path.display());
    };
    if first.time != 0.0 || first.x != exp.x0 {
        bail!("trace/config mismatch: the first sample is not the configured initial state");
    }
    if attempts.iter().any(|a| a.time > exp.config.horizon) || last.time > exp.config.horizon {
        bail!("trace/config mismatch: the trace runs past the configured horizon");
    }
    let trace = Trace {
        node_count: g.node_count(),
        edges: g.edges().to_vec(),
        epsilon: exp.config.epsilon,
        mode: exp.config.mode,
        horizon: exp.config.horizon,
        x0: exp.x0.clone(),
        final_x: last.x.clone(),
        end_time: last.time,
        quiescence: Quiescence { time: settling_time(g.edge_count(), &attempts), verified: false },
        attempts,
        samples,
    };

    let mut table = Table { all_passed: true };
    let invariants = verify_trace_invariants(&trace, g, exp.config.epsilon);
    for c in invariants.checks() {
        let detail = match &c.first_violation {
            None => format!("{} checked", c.checked),
            Some(v) => format!("{} of {} violated; first: {v}", c.violations, c.checked),
        };
        table.row(Some(c.passed()), c.name, detail);
    }

    let fits = fit_parallel(&exp);
    let phi = poc_delays(&exp, &fits);
    let skipped = phi.iter().filter(|p| p.is_none()).count();
    let certified = trace.retain_edges(|e| phi[e].is_some());
    match verify_poc(&certified, &phi)? {
        PocVerdict::Pass { checked, censored } => {
            let mut detail = format!("{checked} jammed attempts checked, {censored} censored at the end of the run");
            if skipped > 0 {
                detail += &format!(", {skipped} uncertified links skipped");
            }
            table.row(Some(true), "persistency", detail);
        }
        PocVerdict::Violation { edge, attempt_time, deadline } => table.row(
            Some(false),
            "persistency",
            format!("edge {edge}: attempt jammed at t={attempt_time} has no success by t={deadline}"),
        ),
    }

    let report = consensus_report(&trace, g, bound_phi(&exp, &fits));
    let gap = format!("max gap {} vs delta {}", report.max_pairwise_gap, report.delta);
    if report.in_set {
        table.row(Some(true), "consensus set", gap);
    } else {
        table.row(Some(false), "consensus set", format!("not in consensus set: {gap}"));
    }
    table.row(
        Some(report.neighbors_within_eps),
        "neighbours within eps",
        format!("max neighbour gap {} vs eps {}", report.max_neighbor_gap, exp.config.epsilon),
    );
    match (report.t_star_measured, report.t_star_bound) {
        (Some(t), Some(b)) => table.row(Some(t <= b), "settling-time bound", format!("T* = {t} vs bound {b}")),
        (None, _) => table.row(None, "settling-time bound", "controls not settled by the end of the trace".into()),
        (Some(t), None) => table.row(None, "settling-time bound", format!("T* = {t}; no bound without certificates")),
    }
    Ok(table.all_passed)
}
