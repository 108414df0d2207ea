use approx::assert_relative_eq;
use decifuse::channel::{demod_error_prob, internode_snr, FcSignals, NetworkConfig};
use decifuse::rng::trial_rng;
use decifuse::schemes::*;
use decifuse::sensing::{threshold_decide_direct, Hypothesis, SensingModel};
use num_complex::Complex64;

fn setup(k: usize, rho: f64) -> (SensingModel, NetworkConfig) {
    (SensingModel::homogeneous(k, 6.0, 0.6, rho).unwrap(), NetworkConfig::homogeneous(k, 10.0, 0.7).unwrap())
}

#[test]
fn state_encoding_round_trips() {
    for n in [2, 4] {
        for st in 0..1usize << n {
            let syms = decode_state(st, n);
            assert!(syms.iter().all(|&u| u == 1 || u == -1));
            assert_eq!(encode_state(&syms), st);
        }
    }
    assert_eq!(encode_state(&[1, -1]), 0b10);
    assert_eq!(encode_state(&[-1, -1, 1, 1]), 0b0011);
}

#[test]
fn scheme_names_round_trip() {
    for s in SchemeKind::ALL {
        assert_eq!(s.to_string().parse::<SchemeKind>().unwrap(), s);
    }
    assert!("bogus".parse::<SchemeKind>().is_err());
    assert!(SchemeKind::Stc.uses_alpha() && SchemeKind::Fusion.uses_alpha());
    assert!(!SchemeKind::Parallel.uses_alpha() && !SchemeKind::Threshold.uses_alpha());
}

#[test]
fn slot_energy_per_pair() {
    // total transmitted energy of a pair over both slots
    let alpha = 0.64;
    let want = |s: SchemeKind| match s {
        SchemeKind::Parallel | SchemeKind::Threshold => 2.0,
        SchemeKind::Fusion | SchemeKind::Stc => 2.0 * alpha,
    };
    for s in SchemeKind::ALL {
        for st in 0..s.signal_states() {
            let (a, b) = pair_amplitudes(s, st, alpha);
            let e: f64 = a.iter().chain(&b).map(|x| x * x).sum();
            assert_relative_eq!(e, want(s), max_relative = 1e-12);
        }
    }
    // Alamouti slots for the threshold rule carry (u_i, ū_j) then (−ū_i, u_j)
    let (a, b) = pair_amplitudes(SchemeKind::Threshold, encode_state(&[1, -1, -1, 1]), 1.0);
    let c = 0.5f64.sqrt();
    assert_eq!(a, [c, c]);
    assert_eq!(b, [c, -c]);
}

#[test]
fn trials_are_reproducible() {
    for s in SchemeKind::ALL {
        let (sen, net) = setup(4, 0.2);
        let p = Pipeline::new(s, &sen, &net).unwrap();
        let a = p.run_trial(Hypothesis::H1, &mut trial_rng(5, 2, 17));
        let b = p.run_trial(Hypothesis::H1, &mut trial_rng(5, 2, 17));
        let c = p.run_trial(Hypothesis::H1, &mut trial_rng(5, 2, 18));
        assert_eq!(a, b);
        assert_ne!(a, c);
        let d = run_trial(s, &sen, &net, Hypothesis::H1, &mut trial_rng(5, 2, 17)).unwrap();
        assert_eq!(a, d);
    }
}

#[test]
fn mismatched_sizes_rejected() {
    let sen = SensingModel::homogeneous(4, 6.0, 0.6, 0.0).unwrap();
    let net = NetworkConfig::homogeneous(6, 10.0, 0.7).unwrap();
    assert!(Pipeline::new(SchemeKind::Parallel, &sen, &net).is_err());
    let (sen, net) = setup(4, 0.0);
    let p = Pipeline::new(SchemeKind::Stc, &sen, &net).unwrap();
    let h = vec![Complex64::new(1.0, 0.0); 3];
    assert!(p.run_trial_with_fc_channels(Hypothesis::H0, &h, &mut trial_rng(1, 0, 0)).is_err());
}

#[test]
fn records_carry_the_scheme_decisions() {
    let (sen, net) = setup(4, 0.0);
    for s in SchemeKind::ALL {
        let p = Pipeline::new(s, &sen, &net).unwrap();
        let r = p.run_trial(Hypothesis::H0, &mut trial_rng(2, 0, 0));
        let d = &r.decisions;
        assert_eq!(d.u.len(), 4);
        assert_eq!(d.u_hat.is_some(), s.uses_alpha());
        assert_eq!(d.u_tilde.is_some(), s == SchemeKind::Fusion);
        assert_eq!(d.u_bar.is_some(), s == SchemeKind::Threshold);
        assert_eq!(matches!(r.fc_signals, FcSignals::Alamouti { .. }), s.is_alamouti());
        for pair in 0..2 {
            assert!(r.pair_signal_state(s, pair) < s.signal_states());
        }
        if s == SchemeKind::Threshold {
            for k in 0..4 {
                let (u, ub) = threshold_decide_direct(r.observations.x[k], &sen, k);
                assert_eq!((d.u[k], d.u_bar.as_ref().unwrap()[k]), (u, ub));
            }
        }
    }
}

#[test]
fn parallel_signal_noise_has_configured_power() {
    let (sen, net) = setup(2, 0.0);
    let p = Pipeline::new(SchemeKind::Parallel, &sen, &net).unwrap();
    let n = 20_000;
    let mut acc = 0.0;
    for t in 0..n {
        let r = p.run_trial(Hypothesis::H1, &mut trial_rng(4, 0, t));
        let FcSignals::Orthogonal { y } = &r.fc_signals else { panic!() };
        for k in 0..2 {
            acc += (y[k] - r.channels.h[k] * f64::from(r.decisions.u[k])).norm_sqr();
        }
    }
    let ratio = acc / (2 * n) as f64 / net.sigma_v2;
    assert!((ratio - 1.0).abs() < 4.0 / ((2 * n) as f64).sqrt(), "{ratio}");
}

#[test]
fn internode_flips_match_rayleigh_bpsk() {
    let (sen, net) = setup(2, 0.0);
    let net = net.with_alpha(0.99).unwrap(); // weak link so flips are common
    let p = Pipeline::new(SchemeKind::Stc, &sen, &net).unwrap();
    let want = demod_error_prob(internode_snr(&net, 0));
    let n = 50_000;
    let mut flips = 0;
    for t in 0..n {
        let r = p.run_trial(Hypothesis::H0, &mut trial_rng(6, 0, t));
        let uh = r.decisions.u_hat.unwrap();
        // both directions may share one link coefficient, so count one
        flips += usize::from(uh[0] != r.decisions.u[0]);
    }
    let rate = flips as f64 / n as f64;
    let se = (want * (1.0 - want) / n as f64).sqrt();
    assert!((rate - want).abs() < 4.0 * se, "{rate} vs {want}");
}
