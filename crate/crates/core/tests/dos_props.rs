use jamsim_core::dos::{
    delta_star, fit_params, gen_periodic, gen_pwm_seeded, genuine_params, DosParams, DosSignal, WindowProfile,
};
use proptest::prelude::*;

fn signal() -> impl Strategy<Value = DosSignal<f64>> {
    prop::collection::vec((0.01f64..1.0, 0.0f64..1.0, prop::bool::weighted(0.2)), 0..20).prop_map(|parts| {
        let mut t = 0.0;
        let mut pairs = Vec::new();
        for (k, (gap, dur, pulse)) in parts.into_iter().enumerate() {
            let start = if k == 0 { gap - 0.01 } else { t + gap };
            let dur = if pulse { 0.0 } else { dur };
            pairs.push((start, dur));
            t = start + dur;
        }
        DosSignal::new(pairs).unwrap()
    })
}

fn window(h: f64) -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0..=h, 0.0..=h, 0.0..=h).prop_map(|(a, b, c)| {
        let mut v = [a, b, c];
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        (v[0], v[1], v[2])
    })
}

const H: f64 = 25.0;

proptest! {
    #[test]
    fn measures_are_additive_and_complementary(s in signal(), (a, m, b) in window(H)) {
        let whole = s.xi_measure(a, b);
        let split = s.xi_measure(a, m) + s.xi_measure(m, b);
        prop_assert!((whole - split).abs() <= 1e-12 * (1.0 + whole));
        prop_assert!((s.xi_measure(a, b) + s.theta_measure(a, b) - (b - a)).abs() <= 1e-12 * (1.0 + b));
        prop_assert!(whole >= 0.0 && whole <= b - a + 1e-12);
        // onsets in [a, b] split into [a, m) and [m, b]
        let left = s.intervals().iter().filter(|iv| iv.start >= a && iv.start < m).count();
        prop_assert_eq!(s.transition_count(a, b), left + s.transition_count(m, b));
    }

    #[test]
    fn activity_agrees_with_measure(s in signal(), t in 0.0..H) {
        let inside = s.intervals().iter().any(|iv| iv.start <= t && t <= iv.end());
        prop_assert_eq!(s.is_active(t), inside);
    }

    #[test]
    fn fitted_parameters_pass_and_are_tight(
        s in signal(),
        tau_f in prop_oneof![0.2f64..5.0, Just(f64::INFINITY)],
        tau_d in prop_oneof![1.05f64..10.0, Just(f64::INFINITY)],
    ) {
        let profile = WindowProfile::new(&s, H);
        let (eta, kappa) = (profile.fit_eta(tau_f), profile.fit_kappa(tau_d));
        prop_assert_eq!((eta, kappa), fit_params(&s, tau_f, tau_d, H));
        let p = DosParams::new(eta, kappa, tau_f, tau_d).unwrap();
        prop_assert!(profile.check(&p).passed());
        if eta > 1.0 {
            let lower = f64::from_bits(eta.to_bits() - 1);
            let tighter = DosParams { eta: lower, ..p };
            prop_assert!(!profile.check(&tighter).passed());
        }
        if kappa > 0.0 {
            let lower = f64::from_bits(kappa.to_bits() - 1);
            let tighter = DosParams { kappa: lower, ..p };
            prop_assert!(!profile.check(&tighter).passed());
        }
    }

    #[test]
    fn prolonged_availability_bound(
        s in signal(),
        tau_f in 0.5f64..5.0,
        tau_d in 1.5f64..10.0,
        dstar in 0.0005f64..0.05,
        (a, _, b) in window(H),
    ) {
        let (eta, kappa) = fit_params(&s, tau_f, tau_d, H);
        let p = DosParams::new(eta, kappa, tau_f, tau_d).unwrap();
        let alpha = p.alpha(dstar);
        prop_assume!(alpha < 1.0);
        let truncated = s.truncated(H);
        let available = truncated.prolonged_theta_measure(dstar, a, b);
        let floor = (b - a) * (1.0 - alpha) - kappa - (eta + 1.0) * dstar;
        prop_assert!(available >= floor - 1e-9, "{available} < {floor}");
    }

    #[test]
    fn genuine_failures_have_alpha_beta(beta in 0.001f64..0.999, d_i in 1usize..8, d_j in 1usize..8) {
        let dstar = delta_star(0.01, d_i, d_j);
        let p = genuine_params(beta, 1.0, dstar).unwrap();
        prop_assert!((p.alpha(dstar) - beta).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn pwm_signals_are_valid(seed in any::<u64>(), max_period in 0.01f64..1.0, max_duty in 0.0f64..=1.0) {
        let s = gen_pwm_seeded(seed, 0, max_period, max_duty, 10.0).unwrap();
        for w in s.intervals().windows(2) {
            prop_assert!(w[1].start > w[0].end());
        }
        prop_assert!(s.intervals().iter().all(|iv| iv.end() <= 10.0));
    }
}

#[test]
fn pwm_duty_cycle_follows_the_law_of_large_numbers() {
    for seed in 0..20 {
        for max_duty in [0.2f64, 0.6, 1.0] {
            let s = gen_pwm_seeded(seed, 3, 0.15, max_duty, 300.0).unwrap();
            let duty = s.duty_cycle(300.0);
            assert!((duty - max_duty / 2.0).abs() < 0.05, "seed {seed}, max_duty {max_duty}: {duty}");
        }
    }
}

#[test]
fn periodic_signal_parameters() {
    let s = gen_periodic(0.5f64, 0.4, 0.1, 10.0).unwrap();
    assert_eq!(s.len(), 20);
    assert!((s.duty_cycle(10.0) - 0.4).abs() < 1e-12);
    // one onset per period: eta = 1 at tau_f = period
    let (eta, _) = fit_params(&s, 0.5, f64::INFINITY, 10.0);
    assert!(eta <= 1.0 + 1e-12, "{eta}");
}
