use serde::{Deserialize, Serialize};

use super::DosError;
use crate::Scalar;

/// One jamming interval `H_n = [start, start + duration]`, closed at both ends.
/// A zero duration is a singleton pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(T, T)", into = "(T, T)")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Interval<T> {
    pub start: T,
    pub duration: T,
}

impl<T: Scalar> Interval<T> {
    pub fn end(&self) -> T {
        self.start + self.duration
    }
}

impl<T> From<(T, T)> for Interval<T> {
    fn from((start, duration): (T, T)) -> Self {
        Interval { start, duration }
    }
}

impl<T> From<Interval<T>> for (T, T) {
    fn from(iv: Interval<T>) -> Self {
        (iv.start, iv.duration)
    }
}

/// Jamming signal of a single link: a train of closed, strictly separated
/// intervals `{(h_n, tau_n)}` ordered by start time.
///
/// Serialises as a JSON array of `[h, tau]` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct DosSignal<T> {
    intervals: Vec<Interval<T>>,
}

impl<'de, T: Scalar> Deserialize<'de> for DosSignal<T> {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let raw: Vec<(T, T)> = Vec::deserialize(de)?;
        DosSignal::new(raw).map_err(serde::de::Error::custom)
    }
}

impl<T: Scalar> DosSignal<T> {
    pub fn empty() -> Self {
        DosSignal { intervals: Vec::new() }
    }

    /// Validates an already-normalised train: `h_0 >= 0`, `tau_n >= 0`,
    /// `h_{n+1} > h_n + tau_n`. Only the last interval may be unbounded.
    pub fn new<I>(pairs: I) -> Result<Self, DosError>
    where
        I: IntoIterator<Item = (T, T)>,
    {
        let intervals: Vec<Interval<T>> = pairs.into_iter().map(Interval::from).collect();
        for (n, iv) in intervals.iter().enumerate() {
            if !iv.start.is_finite() || iv.start < T::zero() {
                return Err(DosError::BadInterval { index: n, reason: "start must be finite and >= 0" });
            }
            if iv.duration.is_nan() || iv.duration < T::zero() {
                return Err(DosError::BadInterval { index: n, reason: "duration must be >= 0" });
            }
            if n > 0 && iv.start <= intervals[n - 1].end() {
                return Err(DosError::BadInterval {
                    index: n,
                    reason: "intervals must be strictly increasing and disjoint",
                });
            }
        }
        Ok(DosSignal { intervals })
    }

    /// Sorts arbitrary intervals and merges overlapping or abutting ones.
    pub fn merged<I>(pairs: I) -> Result<Self, DosError>
    where
        I: IntoIterator<Item = (T, T)>,
    {
        let mut raw: Vec<Interval<T>> = pairs.into_iter().map(Interval::from).collect();
        for (n, iv) in raw.iter().enumerate() {
            if !iv.start.is_finite() || iv.start < T::zero() || iv.duration.is_nan() || iv.duration < T::zero() {
                return Err(DosError::BadInterval { index: n, reason: "start must be finite >= 0, duration >= 0" });
            }
        }
        raw.sort_by(|a, b| a.start.partial_cmp(&b.start).expect("finite starts"));
        let mut out: Vec<Interval<T>> = Vec::with_capacity(raw.len());
        for iv in raw {
            match out.last_mut() {
                Some(last) if iv.start <= last.end() => {
                    let end = last.end().max(iv.end());
                    last.duration = end - last.start;
                }
                _ => out.push(iv),
            }
        }
        Ok(DosSignal { intervals: out })
    }

    pub fn intervals(&self) -> &[Interval<T>] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Whether `t` lies in some closed interval `[h_n, h_n + tau_n]`.
    pub fn is_active(&self, t: T) -> bool {
        let k = self.intervals.partition_point(|iv| iv.start <= t);
        k > 0 && t <= self.intervals[k - 1].end()
    }

    /// `|Xi(a, b)|`: Lebesgue measure of the jammed set within `[a, b]`.
    pub fn xi_measure(&self, a: T, b: T) -> T {
        let first = self.intervals.partition_point(|iv| iv.end() < a);
        self.intervals[first..]
            .iter()
            .take_while(|iv| iv.start <= b)
            .map(|iv| (iv.end().min(b) - iv.start.max(a)).max(T::zero()))
            .fold(T::zero(), |acc, m| acc + m)
    }

    /// `|Theta(a, b)|`, the complement of [`Self::xi_measure`] in `[a, b]`.
    pub fn theta_measure(&self, a: T, b: T) -> T {
        (b - a) - self.xi_measure(a, b)
    }

    /// Number of off/on transitions `h_n` in the closed window `[a, b]`.
    pub fn transition_count(&self, a: T, b: T) -> usize {
        let upto_b = self.intervals.partition_point(|iv| iv.start <= b);
        let before_a = self.intervals.partition_point(|iv| iv.start < a);
        upto_b.saturating_sub(before_a)
    }

    /// Restriction to `[0, horizon]`: later onsets are dropped and the last
    /// interval is clipped.
    pub fn truncated(&self, horizon: T) -> Self {
        let keep = self.intervals.partition_point(|iv| iv.start <= horizon);
        let intervals = self.intervals[..keep]
            .iter()
            .map(|iv| Interval { start: iv.start, duration: iv.duration.min(horizon - iv.start) })
            .collect();
        DosSignal { intervals }
    }

    /// Every interval stretched by `dstar` on the right, merged where they
    /// now overlap.
    pub fn prolonged(&self, dstar: T) -> Self {
        Self::merged(self.intervals.iter().map(|iv| (iv.start, iv.duration + dstar)))
            .expect("prolonging a valid signal keeps it valid")
    }

    /// `|Theta_bar(a, b)|`: the part of `[a, b]` not covered by intervals
    /// prolonged by `dstar`.
    pub fn prolonged_theta_measure(&self, dstar: T, a: T, b: T) -> T {
        self.prolonged(dstar).theta_measure(a, b)
    }

    /// Fraction of `[0, horizon]` under jamming.
    pub fn duty_cycle(&self, horizon: T) -> T {
        self.xi_measure(T::zero(), horizon) / horizon
    }

    /// Onset times `h_n`.
    pub fn onsets(&self) -> impl Iterator<Item = T> + '_ {
        self.intervals.iter().map(|iv| iv.start)
    }
}
