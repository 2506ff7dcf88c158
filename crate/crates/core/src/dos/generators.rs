//! Attack pattern generators. Every generator runs its output through the
//! merge normaliser, so overlapping or abutting bursts become one interval.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DosError, DosSignal};
use crate::Scalar;

/// Pulse-width modulated jamming with a random period and duty cycle per
/// cycle. Each cycle draws `period ∈ (0, max_period]` and
/// `duty ∈ [0, max_duty]` uniformly and jams `[c, c + duty * period]` at the
/// cycle start `c`.
pub fn gen_pwm<T: Scalar, R: Rng>(rng: &mut R, max_period: T, max_duty: T, horizon: T) -> Result<DosSignal<T>, DosError> {
    if !(max_period > T::zero()) || !max_period.is_finite() {
        return Err(DosError::BadGenerator("max_period must be positive and finite"));
    }
    if !(max_duty >= T::zero() && max_duty <= T::one()) {
        return Err(DosError::BadGenerator("max_duty must lie in [0, 1]"));
    }
    let mut pulses = Vec::new();
    let mut cycle = T::zero();
    while cycle < horizon {
        let period = max_period * T::lit(1.0 - rng.gen::<f64>());
        let duty = max_duty * T::lit(rng.gen::<f64>());
        let on = (duty * period).min(horizon - cycle);
        if on > T::zero() {
            pulses.push((cycle, on));
        }
        cycle = cycle + period;
    }
    DosSignal::merged(pulses)
}

/// [`gen_pwm`] driven by a ChaCha stream; `stream` separates links that share
/// a seed.
pub fn gen_pwm_seeded<T: Scalar>(seed: u64, stream: u64, max_period: T, max_duty: T, horizon: T) -> Result<DosSignal<T>, DosError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    gen_pwm(&mut rng, max_period, max_duty, horizon)
}

/// Periodic jamming `[offset + k p, offset + k p + duty p]` for every cycle
/// starting before `horizon`. A duty of one jams `[offset, horizon]`.
pub fn gen_periodic<T: Scalar>(period: T, duty: T, offset: T, horizon: T) -> Result<DosSignal<T>, DosError> {
    if !(period > T::zero()) || !period.is_finite() {
        return Err(DosError::BadGenerator("period must be positive and finite"));
    }
    if !(duty >= T::zero() && duty <= T::one()) {
        return Err(DosError::BadGenerator("duty must lie in [0, 1]"));
    }
    if !(offset >= T::zero()) {
        return Err(DosError::BadGenerator("offset must be >= 0"));
    }
    if duty == T::zero() || offset >= horizon {
        return Ok(DosSignal::empty());
    }
    if duty == T::one() {
        return DosSignal::new([(offset, horizon - offset)]);
    }
    let on = duty * period;
    let mut pulses = Vec::new();
    let mut k = 0usize;
    loop {
        let start = offset + T::from_count(k) * period;
        if start >= horizon {
            break;
        }
        pulses.push((start, on));
        k += 1;
    }
    DosSignal::merged(pulses)
}

/// Singleton pulses at exactly the given instants.
pub fn gen_pulse_train_at<T: Scalar>(times: &[T]) -> Result<DosSignal<T>, DosError> {
    for (k, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(DosError::NotIncreasing { index: k + 1 });
        }
    }
    DosSignal::new(times.iter().map(|&t| (t, T::zero())))
}

/// Attempt instants of a link whose every attempt is jammed: starting at 0,
/// each jammed attempt reschedules `dstar` later. Accumulated with the same
/// floating-point additions the simulator performs, so a pulse train built
/// from these instants hits every attempt exactly.
pub fn jammed_attempt_times<T: Scalar>(dstar: T, horizon: T) -> Vec<T> {
    let mut times = Vec::new();
    let mut t = T::zero();
    while t <= horizon {
        times.push(t);
        t = t + dstar;
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pwm_zero_duty_is_empty() {
        let s: DosSignal<f64> = gen_pwm_seeded(3, 0, 0.15, 0.0, 10.0).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn pwm_is_deterministic_and_stream_separated() {
        let a: DosSignal<f64> = gen_pwm_seeded(11, 4, 0.15, 1.0, 5.0).unwrap();
        let b: DosSignal<f64> = gen_pwm_seeded(11, 4, 0.15, 1.0, 5.0).unwrap();
        let c: DosSignal<f64> = gen_pwm_seeded(11, 5, 0.15, 1.0, 5.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.intervals().iter().all(|iv| iv.end() <= 5.0));
    }

    #[test]
    fn pwm_duty_cycle_tracks_mean_duty() {
        // E[duty] = max_duty / 2; the time-weighted average converges to it.
        for seed in 0..5 {
            let s: DosSignal<f64> = gen_pwm_seeded(seed, 0, 0.15, 1.0, 300.0).unwrap();
            let dc = s.duty_cycle(300.0);
            assert!((dc - 0.5).abs() < 0.05, "seed {seed}: duty {dc}");
            let s: DosSignal<f64> = gen_pwm_seeded(seed, 1, 0.15, 0.6, 300.0).unwrap();
            assert!((s.duty_cycle(300.0) - 0.3).abs() < 0.05);
        }
    }

    #[test]
    fn periodic_examples() {
        let s: DosSignal<f64> = gen_periodic(1.0, 0.5, 0.0, 2.0).unwrap();
        assert_eq!(s, DosSignal::new([(0.0, 0.5), (1.0, 0.5)]).unwrap());
        assert!(gen_periodic::<f64>(1.0, 0.0, 0.0, 2.0).unwrap().is_empty());
        let full: DosSignal<f64> = gen_periodic(1.0, 1.0, 0.5, 2.0).unwrap();
        assert_eq!(full, DosSignal::new([(0.5, 1.5)]).unwrap());
    }

    #[test]
    fn pulse_train_examples() {
        let s: DosSignal<f64> = gen_pulse_train_at(&[0.25, 0.5]).unwrap();
        assert_eq!(s, DosSignal::new([(0.25, 0.0), (0.5, 0.0)]).unwrap());
        assert!(matches!(gen_pulse_train_at(&[0.5, 0.25]), Err(DosError::NotIncreasing { index: 1 })));
        assert!(gen_pulse_train_at(&[0.5, 0.5]).is_err());
        assert!(gen_pulse_train_at(&[-0.5]).is_err());
    }

    #[test]
    fn jammed_attempts_accumulate() {
        let t: Vec<f64> = jammed_attempt_times(0.25, 1.0);
        assert_eq!(t, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
