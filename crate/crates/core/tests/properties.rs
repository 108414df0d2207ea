use decifuse::analysis::{aggregate_direct, aggregate_dp, d_factor, error_floor, pair_model};
use decifuse::channel::{demod_error_prob, NetworkConfig};
use decifuse::rng::trial_rng;
use decifuse::schemes::{decode_state, encode_state, pair_amplitudes, SchemeKind};
use decifuse::sensing::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::RngCore;

fn scheme() -> impl Strategy<Value = SchemeKind> {
    prop::sample::select(SchemeKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_beats_false_alarm(snr in -5.0f64..20.0, pi0 in 0.05f64..0.95) {
        let s = sigma_from_snr_db(snr);
        let (pd, pf) = detection_probs(s, local_threshold(s, pi0).unwrap()).unwrap();
        prop_assert!(0.0 < pf && pf < pd && pd < 1.0);
    }

    #[test]
    fn four_regions_are_ordered(snr in -3.0f64..15.0, pi0 in 0.1f64..0.9, rho in 0.0f64..0.9) {
        let m = SensingModel::homogeneous(2, snr, pi0, rho).unwrap();
        let r = threshold_regions(&m, 0).unwrap();
        prop_assert!(r.breakpoints.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.labels.windows(2).all(|w| w[0] < w[1]));
        for mean in [0.0, 1.0] {
            let p = r.probabilities(mean, m.sigma(0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
        }
    }

    #[test]
    fn fused_statistic_grows_with_own_measurement(
        x in -2.0f64..3.0, dx in 0.01f64..1.0, re in -2.0f64..2.0, im in -2.0f64..2.0, alpha in 0.05f64..0.95
    ) {
        let m = SensingModel::homogeneous(2, 4.0, 0.6, 0.0).unwrap();
        let (r, g) = (Complex64::new(re, im), Complex64::new(0.8, -0.3));
        let a = log_lambda_tilde(x, r, g, &m, (0, 1), alpha, 0.5).unwrap();
        let b = log_lambda_tilde(x + dx, r, g, &m, (0, 1), alpha, 0.5).unwrap();
        prop_assert!(b > a);
    }

    #[test]
    fn states_round_trip(st in 0usize..16) {
        prop_assert_eq!(encode_state(&decode_state(st, 4)), st);
        prop_assert_eq!(encode_state(&decode_state(st & 3, 2)), st & 3);
    }

    #[test]
    fn more_sensors_never_raise_the_floor(pd in 0.55f64..0.99, gap in 0.05f64..0.5, pi0 in 0.1f64..0.9, k in 1usize..10) {
        let pf = (pd - gap).max(0.01);
        let k = 2 * k;
        let a = error_floor(pd, pf, pi0, k);
        let b = error_floor(pd, pf, pi0, k + 2);
        prop_assert!(b <= a + 1e-14);
        prop_assert!(a <= pi0.min(1.0 - pi0) + 1e-14 && a >= 0.0);
    }

    #[test]
    fn fading_factor_is_a_probability_weight(c in 0.0f64..0.25, g in 0.0f64..100.0, s in 0usize..16, t in 0usize..16, sc in scheme()) {
        let (s, t) = (s % sc.signal_states(), t % sc.signal_states());
        let (a, b) = (pair_amplitudes(sc, s, 0.6), pair_amplitudes(sc, t, 0.6));
        let d = d_factor(c, g, &a, &b);
        prop_assert!(d > 0.0 && d <= 1.0);
        prop_assert!(d_factor(c + 0.01, g, &a, &b) <= d);
        prop_assert_eq!(d_factor(c, g, &a, &a), 1.0);
        prop_assert_eq!(d, d_factor(c, g, &b, &a));
    }

    #[test]
    fn bpsk_flip_rate_falls_with_snr(g in 0.0f64..1e4, dg in 0.0f64..10.0) {
        let p = demod_error_prob(g);
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!(demod_error_prob(g + dg) <= p);
    }

    #[test]
    fn streams_are_keyed(seed in any::<u64>(), cell in 0u64..1000, trial in 0u64..1_000_000) {
        let a = trial_rng(seed, cell, trial).next_u64();
        prop_assert_eq!(a, trial_rng(seed, cell, trial).next_u64());
        prop_assert_ne!(a, trial_rng(seed, cell, trial + 1).next_u64());
        prop_assert_ne!(a, trial_rng(seed, cell + 1, trial).next_u64());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lattice_matches_enumeration(
        sc in scheme(), snr_c in 0.0f64..10.0, snr_h in 0.0f64..15.0, pi0 in 0.3f64..0.7,
        alpha in 0.2f64..0.9, t in 0.05f64..0.95, k in prop::sample::select(vec![2usize, 4])
    ) {
        let s = SensingModel::homogeneous(k, snr_c, pi0, 0.0).unwrap();
        let n = NetworkConfig::homogeneous(k, snr_h, alpha).unwrap();
        let m = pair_model(sc, &s, &n).unwrap();
        let (a, b) = (aggregate_dp(&m, t).unwrap(), aggregate_direct(&m, t).unwrap());
        for (x, y) in [(a.pe11, b.pe11), (a.pe12, b.pe12), (a.pe21, b.pe21), (a.pe22, b.pe22)] {
            prop_assert!((x - y).abs() <= 1e-11 * y.abs().max(1e-300));
        }
    }
}
