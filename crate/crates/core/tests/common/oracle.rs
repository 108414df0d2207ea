//! Semi-analytic conditional error of the FC LRT for a single pair (K = 2)
//! with the FC channel coefficients held fixed.
//!
//! The pair's received signal reduces to two real statistics with
//! independent N(m, σ_v²/2) noise: the projections of y_k on h_k for the
//! orthogonal schemes, and Re(y_n), Re(y_{n+1}) for the two-slot schemes
//! when both coefficients are real. The decision region is located by a
//! scan plus bisection in the second coordinate, whose Gaussian mass is
//! exact; the first coordinate is integrated with Simpson's rule.

#![allow(dead_code)]

use decifuse::channel::NetworkConfig;
use decifuse::fusion::{build_decision_prior, fusion_pair_table, PriorMethod};
use decifuse::rng::trial_rng;
use decifuse::schemes::{Pipeline, SchemeKind};
use decifuse::sensing::{threshold_regions, Hypothesis, SensingModel};
use num_complex::Complex64;
use statrs::distribution::{ContinuousCDF, Normal};

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

fn upper(x: f64) -> f64 {
    std_normal().cdf(-x)
}

fn mass(lo: f64, hi: f64, m: f64, sd: f64) -> f64 {
    let n = std_normal();
    let a = if lo == f64::NEG_INFINITY { 0.0 } else { n.cdf((lo - m) / sd) };
    let b = if hi == f64::INFINITY { 1.0 } else { n.cdf((hi - m) / sd) };
    (b - a).max(0.0)
}

fn bitsym(state: usize, b: usize) -> f64 {
    if state >> b & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// P(signal state | H) for pair 0 of a two-sensor network.
pub fn state_probs(scheme: SchemeKind, sensing: &SensingModel, net: &NetworkConfig, h: Hypothesis) -> Vec<f64> {
    let ell = h.ell();
    let sig = sensing.sigma(0);
    let tau = 0.5 + sig * sig * (sensing.pi0() / (1.0 - sensing.pi0())).ln();
    let p_plus = upper((tau - ell) / sig);
    let pu = |b: usize| if b == 1 { p_plus } else { 1.0 - p_plus };
    match scheme {
        SchemeKind::Parallel => (0..4).map(|s| pu(s >> 1 & 1) * pu(s & 1)).collect(),
        SchemeKind::Stc => {
            let g = (1.0 - net.alpha) * net.power_mw * net.gain / net.d0[0].powf(net.epsilon) / net.sigma_eta2;
            let flip = 0.5 * (1.0 - (g / (1.0 + g)).sqrt());
            (0..16)
                .map(|s| {
                    let (us, uh) = (s >> 2, s & 3);
                    let mut p = pu(us >> 1 & 1) * pu(us & 1);
                    for b in 0..2 {
                        p *= if (us >> b & 1) == (uh >> b & 1) { 1.0 - flip } else { flip };
                    }
                    p
                })
                .collect()
        }
        SchemeKind::Fusion => fusion_pair_table(sensing, net, 0, h).to_vec(),
        SchemeKind::Threshold => {
            let r = threshold_regions(sensing, 0).unwrap();
            let mut edges = vec![f64::NEG_INFINITY];
            edges.extend(&r.breakpoints);
            edges.push(f64::INFINITY);
            let mut reg = [0.0; 4];
            for (k, &lab) in r.labels.iter().enumerate() {
                reg[lab] += mass(edges[k], edges[k + 1], ell, sig);
            }
            (0..16).map(|s| reg[s >> 2] * reg[s & 3]).collect()
        }
    }
}

/// Means of the two real statistics for every signal state.
pub fn state_means(scheme: SchemeKind, alpha: f64, h: [Complex64; 2]) -> Vec<(f64, f64)> {
    match scheme {
        SchemeKind::Parallel | SchemeKind::Fusion => {
            let a = if scheme == SchemeKind::Fusion { alpha.sqrt() } else { 1.0 };
            (0..4).map(|s| (a * bitsym(s, 1) * h[0].norm(), a * bitsym(s, 0) * h[1].norm())).collect()
        }
        SchemeKind::Stc | SchemeKind::Threshold => {
            assert!(h[0].im == 0.0 && h[1].im == 0.0, "two-slot oracle needs real coefficients");
            let (hi, hj) = (h[0].re, h[1].re);
            (0..16)
                .map(|s| {
                    let (b3, b2, b1, b0) = (bitsym(s, 3), bitsym(s, 2), bitsym(s, 1), bitsym(s, 0));
                    if scheme == SchemeKind::Stc {
                        // (u_i, u_j, û_i, û_j): slot n sends (u_i, u_j), slot n+1 (−û_j, û_i)
                        let c = (alpha / 2.0).sqrt();
                        (c * (b3 * hi + b2 * hj), c * (-b0 * hi + b1 * hj))
                    } else {
                        // (u_i, ū_i, u_j, ū_j): slot n sends (u_i, ū_j), slot n+1 (−ū_i, u_j)
                        let c = 0.5f64.sqrt();
                        (c * (b3 * hi + b0 * hj), c * (-b2 * hi + b1 * hj))
                    }
                })
                .collect()
        }
    }
}

fn lse(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// P(FC decides wrongly | H) for fixed FC coefficients.
pub fn conditional_error(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    h: [Complex64; 2],
    hyp: Hypothesis,
) -> f64 {
    conditional_error_with(scheme, sensing, net, h, hyp, 2000, 400)
}

/// [`conditional_error`] with `outer` Simpson intervals and `scan` steps
/// for locating the decision boundary.
pub fn conditional_error_with(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    h: [Complex64; 2],
    hyp: Hypothesis,
    outer: usize,
    scan: usize,
) -> f64 {
    let p = [Hypothesis::H0, Hypothesis::H1].map(|hh| state_probs(scheme, sensing, net, hh));
    let lp = p.clone().map(|v| v.iter().map(|x| x.ln()).collect::<Vec<_>>());
    let means = state_means(scheme, net.alpha, h);
    let s2 = net.sigma_v2;
    let sd = (s2 / 2.0).sqrt();
    let thr = (sensing.pi0() / (1.0 - sensing.pi0())).ln();
    let llr = |a: f64, b: f64| {
        let ev = |k: usize| {
            lse(means.iter().zip(&lp[k]).map(|(m, l)| l - ((a - m.0).powi(2) + (b - m.1).powi(2)) / s2))
        };
        ev(1) - ev(0) - thr
    };
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = means.iter().map(f).fold(f64::INFINITY, f64::min) - 9.0 * sd;
        let hi = means.iter().map(f).fold(f64::NEG_INFINITY, f64::max) + 9.0 * sd;
        (lo, hi)
    };
    let (lo1, hi1) = span(|m| m.0);
    let (lo2, hi2) = span(|m| m.1);
    // Intervals of the second coordinate where H1 is decided.
    let region = |a: f64| -> Vec<(f64, f64)> {
        let n = scan;
        let dx = (hi2 - lo2) / n as f64;
        let mut out = Vec::new();
        let mut start = if llr(a, lo2) > 0.0 { Some(f64::NEG_INFINITY) } else { None };
        let mut prev = (lo2, llr(a, lo2) > 0.0);
        for k in 1..=n {
            let b = lo2 + k as f64 * dx;
            let inside = llr(a, b) > 0.0;
            if inside != prev.1 {
                let (mut l, mut r) = (prev.0, b);
                for _ in 0..60 {
                    let m = 0.5 * (l + r);
                    if (llr(a, m) > 0.0) == prev.1 {
                        l = m;
                    } else {
                        r = m;
                    }
                }
                let x = 0.5 * (l + r);
                if inside {
                    start = Some(x);
                } else {
                    out.push((start.take().unwrap(), x));
                }
            }
            prev = (b, inside);
        }
        if let Some(s) = start {
            out.push((s, f64::INFINITY));
        }
        out
    };
    let n = outer;
    let dx = (hi1 - lo1) / n as f64;
    let mut decide_h1 = vec![0.0; means.len()];
    for k in 0..=n {
        let a = lo1 + k as f64 * dx;
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 } * dx / 3.0;
        let reg = region(a);
        for (s, m) in means.iter().enumerate() {
            let dens = (-(a - m.0).powi(2) / s2).exp() / (std::f64::consts::PI * s2).sqrt();
            let inner: f64 = reg.iter().map(|&(l, r)| mass(l, r, m.1, sd)).sum();
            decide_h1[s] += w * dens * inner;
        }
    }
    let ph = &p[hyp.index()];
    let p_h1: f64 = ph.iter().zip(&decide_h1).map(|(a, b)| a * b).sum();
    match hyp {
        Hypothesis::H0 => p_h1,
        Hypothesis::H1 => 1.0 - p_h1,
    }
}

/// Monte Carlo conditional error with the same fixed FC coefficients:
/// (error rate, trials).
pub fn mc_conditional_error(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    h: [Complex64; 2],
    hyp: Hypothesis,
    trials: u64,
    seed: u64,
) -> f64 {
    let pipe = Pipeline::new(scheme, sensing, net).unwrap();
    let prior = build_decision_prior(scheme, sensing, net, PriorMethod::ClosedForm, &mut trial_rng(seed, 1 << 62, 0)).unwrap();
    let mut errors = 0u64;
    for t in 0..trials {
        let mut rng = trial_rng(seed, hyp.index() as u64, t);
        let rec = pipe.run_trial_with_fc_channels(hyp, &h, &mut rng).unwrap();
        let d = decifuse::fusion::lrt_decide(scheme, &prior, &rec.fc_signals, &rec.channels, net, sensing.pi0()).unwrap();
        errors += u64::from(d.decided != hyp);
    }
    errors as f64 / trials as f64
}

/// Five fixed FC coefficient pairs, in units of the channel standard
/// deviation; real-valued for the two-slot schemes.
pub fn fixed_channels(scheme: SchemeKind, sigma_h: f64) -> Vec<[Complex64; 2]> {
    let mags = [(0.4, 1.3), (1.0, 1.0), (1.8, 0.5), (0.7, 0.3), (2.1, 1.6)];
    let phases: [(f64, f64); 5] = [(0.3, -2.0), (1.1, 2.5), (-0.7, 0.2), (2.9, -1.4), (0.0, 1.7)];
    mags.iter()
        .zip(phases)
        .map(|(&(a, b), (pa, pb))| {
            if scheme.is_alamouti() {
                let sa = if pa.cos() >= 0.0 { 1.0 } else { -1.0 };
                let sb = if pb.cos() >= 0.0 { 1.0 } else { -1.0 };
                [Complex64::new(sa * a * sigma_h, 0.0), Complex64::new(sb * b * sigma_h, 0.0)]
            } else {
                [Complex64::from_polar(a * sigma_h, pa), Complex64::from_polar(b * sigma_h, pb)]
            }
        })
        .collect()
}
