use super::{DosError, DosSignal};
use crate::Scalar;

/// Frequency/duration bounds of a jamming signal:
///
/// * onsets: `n(tau, t) <= eta + (t - tau) / tau_f`
/// * jammed time: `|Xi(tau, t)| <= kappa + (t - tau) / tau_d`
///
/// `tau_f` and `tau_d` may be `+inf`, which removes the corresponding
/// rate term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DosParams<T> {
    pub eta: T,
    pub kappa: T,
    pub tau_f: T,
    pub tau_d: T,
}

impl<T: Scalar> DosParams<T> {
    pub fn new(eta: T, kappa: T, tau_f: T, tau_d: T) -> Result<Self, DosError> {
        if !(eta >= T::one()) || eta.is_infinite() {
            return Err(DosError::BadParams("eta must be finite and >= 1"));
        }
        if !(kappa >= T::zero()) || kappa.is_infinite() {
            return Err(DosError::BadParams("kappa must be finite and >= 0"));
        }
        if !(tau_f > T::zero()) {
            return Err(DosError::BadParams("tau_f must be > 0"));
        }
        if !(tau_d > T::one()) {
            return Err(DosError::BadParams("tau_d must be > 1"));
        }
        Ok(DosParams { eta, kappa, tau_f, tau_d })
    }

    /// Constructs parameters without range checks. Used for the boundary
    /// examples that sit exactly on `tau_d = 1`.
    pub fn new_unchecked(eta: T, kappa: T, tau_f: T, tau_d: T) -> Self {
        DosParams { eta, kappa, tau_f, tau_d }
    }

    /// `alpha = 1/tau_d + dstar/tau_f`.
    pub fn alpha(&self, dstar: T) -> T {
        self.tau_d.recip() + dstar / self.tau_f
    }

    pub fn certificate(&self, dstar: T) -> PocCertificate<T> {
        poc_certificate(self, dstar)
    }
}

/// Persistency-of-Communication quantities for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PocCertificate<T> {
    pub delta_star: T,
    pub alpha: T,
    /// Worst-case delay from a jammed attempt to the next successful one.
    /// `None` when `alpha >= 1`.
    pub phi: Option<T>,
    pub satisfied: bool,
}

/// Fallback retry period `eps / (2 (d_i + d_j))` of a link.
pub fn delta_star<T: Scalar>(epsilon: T, d_i: usize, d_j: usize) -> T {
    epsilon / (T::lit(2.0) * T::from_count(d_i + d_j))
}

pub fn poc_certificate<T: Scalar>(p: &DosParams<T>, dstar: T) -> PocCertificate<T> {
    let alpha = p.alpha(dstar);
    let satisfied = alpha < T::one();
    let phi = satisfied.then(|| (p.kappa + (p.eta + T::one()) * dstar) / (T::one() - alpha));
    PocCertificate { delta_star: dstar, alpha, phi, satisfied }
}

/// Genuine (non-malicious) losses bounded by an average failure fraction
/// `beta` are equivalent to a pulse train with parameters
/// `(b, 0, dstar / beta, inf)`, whose `alpha` is `beta`.
pub fn genuine_params<T: Scalar>(beta: T, b: T, dstar: T) -> Result<DosParams<T>, DosError> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(DosError::BadParams("beta must lie in (0, 1)"));
    }
    if !(b >= T::one()) {
        return Err(DosError::BadParams("b must be >= 1"));
    }
    if !(dstar > T::zero()) {
        return Err(DosError::BadParams("dstar must be > 0"));
    }
    Ok(DosParams { eta: b, kappa: T::zero(), tau_f: dstar / beta, tau_d: T::infinity() })
}

/// Which inequality a window violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Frequency,
    Duration,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AssumptionVerdict<T> {
    Pass,
    Violation {
        bound: Bound,
        window: (T, T),
        /// Right-hand side minus left-hand side; negative.
        slack: T,
    },
}

impl<T> AssumptionVerdict<T> {
    pub fn passed(&self) -> bool {
        matches!(self, AssumptionVerdict::Pass)
    }
}

/// Window statistics of a signal over every window whose endpoints lie in
/// `{0, horizon} ∪ {h_n} ∪ {h_n + tau_n}`.
///
/// `n(tau, t)` is piecewise constant and `|Xi(tau, t)|` piecewise linear with
/// breakpoints only at these points, so the suprema in the frequency and
/// duration bounds are attained on this finite set.
#[derive(Debug, Clone)]
pub struct WindowProfile<T> {
    points: Vec<T>,
    /// `|Xi(0, p)|` at each point.
    cum_measure: Vec<T>,
    /// Onsets in `[0, p]` and in `[0, p)`.
    onsets_le: Vec<usize>,
    onsets_lt: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct WindowStat<T> {
    a: T,
    b: T,
    len: T,
    count: T,
    measure: T,
}

impl<T: Scalar> WindowProfile<T> {
    /// Profiles `signal` truncated to `[0, horizon]`.
    pub fn new(signal: &DosSignal<T>, horizon: T) -> Self {
        let s = signal.truncated(horizon);
        let mut points: Vec<T> = Vec::with_capacity(2 * s.len() + 2);
        points.push(T::zero());
        points.push(horizon);
        for iv in s.intervals() {
            points.push(iv.start);
            points.push(iv.end().min(horizon));
        }
        points.sort_by(|a, b| a.partial_cmp(b).expect("finite window points"));
        points.dedup();

        let cum_measure = points.iter().map(|&p| s.xi_measure(T::zero(), p)).collect();
        let onsets_le = points.iter().map(|&p| s.transition_count(T::zero(), p)).collect();
        let onsets_lt = points.iter().map(|&p| s.intervals().partition_point(|iv| iv.start < p)).collect();
        WindowProfile { points, cum_measure, onsets_le, onsets_lt }
    }

    /// Number of candidate windows `[a, b]`, `a <= b`.
    pub fn window_count(&self) -> usize {
        let m = self.points.len();
        m * (m + 1) / 2
    }

    fn windows(&self) -> impl Iterator<Item = WindowStat<T>> + '_ {
        let m = self.points.len();
        (0..m).flat_map(move |i| {
            (i..m).map(move |j| WindowStat {
                a: self.points[i],
                b: self.points[j],
                len: self.points[j] - self.points[i],
                count: T::from_count(self.onsets_le[j] - self.onsets_lt[i]),
                measure: self.cum_measure[j] - self.cum_measure[i],
            })
        })
    }

    /// Smallest `eta >= 1` satisfying the frequency bound for `tau_f`.
    pub fn fit_eta(&self, tau_f: T) -> T {
        self.windows().map(|w| frequency_excess(w.count, w.len, tau_f)).fold(T::one(), T::max)
    }

    /// Smallest `kappa >= 0` satisfying the duration bound for `tau_d`.
    pub fn fit_kappa(&self, tau_d: T) -> T {
        self.windows().map(|w| duration_excess(w.measure, w.len, tau_d)).fold(T::zero(), T::max)
    }

    /// First window (ordered by left then right endpoint) breaking either
    /// bound; the frequency bound is checked first.
    pub fn check(&self, p: &DosParams<T>) -> AssumptionVerdict<T> {
        for w in self.windows() {
            let f = frequency_excess(w.count, w.len, p.tau_f);
            if f > p.eta {
                return AssumptionVerdict::Violation { bound: Bound::Frequency, window: (w.a, w.b), slack: p.eta - f };
            }
            let d = duration_excess(w.measure, w.len, p.tau_d);
            if d > p.kappa {
                return AssumptionVerdict::Violation { bound: Bound::Duration, window: (w.a, w.b), slack: p.kappa - d };
            }
        }
        AssumptionVerdict::Pass
    }
}

// Fitting and checking compare the same expressions, so a fitted value
// always passes its own check without rounding slack.
fn frequency_excess<T: Scalar>(count: T, len: T, tau_f: T) -> T {
    count - len / tau_f
}

fn duration_excess<T: Scalar>(measure: T, len: T, tau_d: T) -> T {
    measure - len / tau_d
}

/// Minimal `(eta, kappa)` for the given rates over `[0, horizon]`.
pub fn fit_params<T: Scalar>(signal: &DosSignal<T>, tau_f: T, tau_d: T, horizon: T) -> (T, T) {
    let profile = WindowProfile::new(signal, horizon);
    (profile.fit_eta(tau_f), profile.fit_kappa(tau_d))
}

/// Checks both bounds for every window of the signal truncated to
/// `[0, horizon]`.
pub fn check_assumptions<T: Scalar>(signal: &DosSignal<T>, p: &DosParams<T>, horizon: T) -> AssumptionVerdict<T> {
    WindowProfile::new(signal, horizon).check(p)
}
