//! Per-link certificates fitted on the realised jamming signals.
//!
//! For every `(tau_f, tau_d)` on a fixed grid the smallest admissible
//! `(eta, kappa)` is fitted over `[0, horizon]`. Among pairs with `alpha < 1`
//! and `Phi <= horizon` the one with the smallest `Phi` is reported. If no pair
//! qualifies, the row falls back to the smallest `eta`, then smallest `kappa`,
//! then smallest `alpha`, and is flagged as uncertified.

use std::io::Write;

use serde::Serialize;

use super::config::Experiment;
use crate::dos::{DosParams, WindowProfile};
use crate::Real;

/// Rate multiples of `Delta*` tried for `tau_f` (plus `+inf`).
pub const TAU_F_MULTIPLES: u32 = 17;
/// `tau_d` grid (plus `+inf`).
pub const TAU_D_GRID: [Real; 12] = [1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 32.0, 64.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub edge_i: usize,
    pub edge_j: usize,
    pub pulses: usize,
    pub duty_cycle: Real,
    pub delta_star: Real,
    pub tau_f: Real,
    pub tau_d: Real,
    pub eta: Real,
    pub kappa: Real,
    pub alpha: Real,
    /// `None` when `alpha >= 1`.
    pub phi: Option<Real>,
    /// `alpha < 1` and `Phi <= horizon`.
    pub certified: bool,
    pub beta: Real,
    /// `alpha + beta < 1`.
    pub combined_ok: bool,
}

impl FitRow {
    pub fn params(&self) -> DosParams<Real> {
        DosParams::new_unchecked(self.eta, self.kappa, self.tau_f, self.tau_d)
    }
}

pub fn tau_f_grid(dstar: Real) -> Vec<Real> {
    (0..TAU_F_MULTIPLES).map(|k| dstar * Real::from(2u32.pow(k))).chain([Real::INFINITY]).collect()
}

pub fn tau_d_grid() -> Vec<Real> {
    TAU_D_GRID.iter().copied().chain([Real::INFINITY]).collect()
}

struct Candidate {
    tau_f: Real,
    tau_d: Real,
    eta: Real,
    kappa: Real,
    alpha: Real,
    phi: Option<Real>,
}

/// Fits one link.
pub fn fit_edge(exp: &Experiment, edge: usize) -> FitRow {
    let horizon = exp.config.horizon;
    let signal = &exp.signals[edge];
    let dstar = exp.delta_star(edge);
    let profile = WindowProfile::new(signal, horizon);
    let etas: Vec<(Real, Real)> = tau_f_grid(dstar).into_iter().map(|tf| (tf, profile.fit_eta(tf))).collect();
    let kappas: Vec<(Real, Real)> = tau_d_grid().into_iter().map(|td| (td, profile.fit_kappa(td))).collect();

    let mut candidates = Vec::with_capacity(etas.len() * kappas.len());
    for &(tau_f, eta) in &etas {
        for &(tau_d, kappa) in &kappas {
            let cert = DosParams::new_unchecked(eta, kappa, tau_f, tau_d).certificate(dstar);
            candidates.push(Candidate { tau_f, tau_d, eta, kappa, alpha: cert.alpha, phi: cert.phi });
        }
    }
    let certified = |c: &Candidate| c.phi.is_some_and(|p| p <= horizon);
    let best = candidates
        .iter()
        .filter(|c| certified(c))
        .min_by(|a, b| (a.phi, a.alpha).partial_cmp(&(b.phi, b.alpha)).expect("finite"))
        .or_else(|| {
            candidates
                .iter()
                .min_by(|a, b| (a.eta, a.kappa, a.alpha).partial_cmp(&(b.eta, b.kappa, b.alpha)).expect("finite"))
        })
        .expect("grid is non-empty");

    let e = exp.graph.edge(edge);
    let beta = exp.beta[edge];
    FitRow {
        edge_i: e.lo(),
        edge_j: e.hi(),
        pulses: signal.truncated(horizon).len(),
        duty_cycle: signal.duty_cycle(horizon),
        delta_star: dstar,
        tau_f: best.tau_f,
        tau_d: best.tau_d,
        eta: best.eta,
        kappa: best.kappa,
        alpha: best.alpha,
        phi: best.phi,
        certified: certified(best),
        beta,
        combined_ok: best.alpha + beta < 1.0,
    }
}

pub fn fit_edges(exp: &Experiment) -> Vec<FitRow> {
    (0..exp.graph.edge_count()).map(|e| fit_edge(exp, e)).collect()
}

/// Per-link `Phi` for PoC checking: `None` for uncertified links and for
/// links with genuine failures, whose denials are not known in advance.
pub fn poc_delays(exp: &Experiment, rows: &[FitRow]) -> Vec<Option<Real>> {
    rows.iter()
        .zip(&exp.beta)
        .map(|(r, &beta)| if r.certified && beta == 0.0 { r.phi } else { None })
        .collect()
}

/// `Phi` entering the settling-time bound: the largest delay over links that
/// are jammed at all, zero when nothing is jammed, `None` when some link
/// cannot be certified.
pub fn bound_phi(exp: &Experiment, rows: &[FitRow]) -> Option<Real> {
    if exp.sim.mode == crate::sim::Mode::Nominal {
        return Some(0.0);
    }
    let mut phi: Real = 0.0;
    for (e, row) in rows.iter().enumerate() {
        if exp.beta[e] > 0.0 {
            return None;
        }
        if exp.signals[e].is_empty() {
            continue;
        }
        phi = phi.max(row.phi.filter(|_| row.certified)?);
    }
    Some(phi)
}

pub fn write_fit_csv<W: Write>(rows: &[FitRow], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "edge_i", "edge_j", "pulses", "duty_cycle", "delta_star", "tau_f", "tau_d", "eta", "kappa", "alpha", "phi",
        "alpha_lt_1", "certified", "beta", "alpha_plus_beta_lt_1",
    ])?;
    for r in rows {
        out.write_record([
            r.edge_i.to_string(),
            r.edge_j.to_string(),
            r.pulses.to_string(),
            r.duty_cycle.to_string(),
            r.delta_star.to_string(),
            r.tau_f.to_string(),
            r.tau_d.to_string(),
            r.eta.to_string(),
            r.kappa.to_string(),
            r.alpha.to_string(),
            r.phi.map_or(String::new(), |p| p.to_string()),
            (r.alpha < 1.0).to_string(),
            r.certified.to_string(),
            r.beta.to_string(),
            r.combined_ok.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ExperimentConfig;

    fn path3(dos: &str) -> Experiment {
        let text = format!(
            r#"{{"schema": 1, "graph": {{"kind": "path", "n": 3}}, "epsilon": 0.1, "horizon": 4.0,
                "x0": {{"kind": "explicit", "values": [0.0, 0.0, 1.0]}}, "dos": {dos}}}"#
        );
        ExperimentConfig::from_json(&text).unwrap().resolve().unwrap()
    }

    #[test]
    fn clear_edge_has_alpha_zero() {
        let exp = path3("{}");
        let rows = fit_edges(&exp);
        for r in &rows {
            assert_eq!((r.eta, r.kappa, r.alpha), (1.0, 0.0, 0.0));
            assert_eq!(r.phi, Some(2.0 * r.delta_star));
            assert!(r.certified);
        }
        assert_eq!(bound_phi(&exp, &rows), Some(0.0));
    }

    #[test]
    fn pulse_train_at_attempts_gives_alpha_one() {
        let exp = path3(r#"{"edges": [{"edge": [1, 2], "generator": {"kind": "pulse_train_at_attempts"}}]}"#);
        let row = fit_edge(&exp, 1);
        assert_eq!(row.alpha, 1.0);
        assert_eq!(row.tau_f, row.delta_star);
        assert_eq!(row.phi, None);
        assert!(!row.certified);
        assert_eq!(bound_phi(&exp, &fit_edges(&exp)), None);
    }

    #[test]
    fn periodic_edge_is_certified() {
        let exp = path3(r#"{"default": {"kind": "periodic", "period": 0.5, "duty": 0.3}}"#);
        for r in fit_edges(&exp) {
            assert!(r.certified, "{r:?}");
            assert!(r.alpha < 1.0);
            assert!((r.duty_cycle - 0.3).abs() < 0.05);
            let sig = &exp.signals[exp.graph.edge_id(crate::Edge::new(r.edge_i, r.edge_j).unwrap()).unwrap()];
            assert!(crate::dos::check_assumptions(sig, &r.params(), 4.0).passed());
        }
    }

    #[test]
    fn csv_has_one_row_per_edge() {
        let exp = path3("{}");
        let mut buf = Vec::new();
        write_fit_csv(&fit_edges(&exp), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("edge_i,edge_j,pulses,duty_cycle"));
    }
}
