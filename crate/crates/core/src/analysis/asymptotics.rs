//! Large-S behaviour of the bound: each of its four terms decays like
//! κ·e^{−S·rate}, with the per-pair log statistics' moments computed by
//! exact enumeration over the finite pair alphabet.

use super::bounds::{d_factor, pair_model, BoundEvaluator, PairModel};
use crate::channel::NetworkConfig;
use crate::error::{Error, Result};
use crate::schemes::SchemeKind;
use crate::sensing::{Hypothesis, SensingModel};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTerm {
    pub mu: f64,
    pub sigma2: f64,
    pub kappa: f64,
    /// Decay rate per pair.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeExponents {
    pub scheme: SchemeKind,
    /// Terms of P̄_{e11}, P̄_{e12}, P̄_{e21}, P̄_{e22}, in that order.
    pub terms: [ExponentTerm; 4],
    /// Smallest of the four rates.
    pub gamma: f64,
    /// Index into `terms` of the dominant term.
    pub dominant: usize,
    pub t0: f64,
    /// μ + σ²/2 < 0 for the two lognormal-type terms.
    pub lognormal_terms_negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub schemes: Vec<SchemeExponents>,
    /// (a, b, γ_b − γ_a) for every ordered pair a < b in `schemes`.
    pub differences: Vec<(SchemeKind, SchemeKind, f64)>,
}

fn moments(samples: impl Iterator<Item = (f64, f64)>) -> Result<(f64, f64)> {
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (p, x) in samples {
        if p == 0.0 {
            continue;
        }
        if !x.is_finite() {
            return Err(Error::DegenerateOperatingPoint(
                "log statistic is infinite on a state of positive probability".into(),
            ));
        }
        w += p;
        m1 += p * x;
        m2 += p * x * x;
    }
    let mu = m1 / w;
    Ok((mu, (m2 / w - mu * mu).max(0.0)))
}

/// Exponent terms of one scheme from its pair model.
pub fn asymptotic_terms(model: &PairModel) -> Result<SchemeExponents> {
    let ev = BoundEvaluator::new(model.clone())?;
    let (s0, s1) = (ev.s0_size(), ev.s1_size());
    if s0 == 0.0 || s1 == 0.0 {
        return Err(Error::DegenerateOperatingPoint("empty decision set".into()));
    }
    let (lrt_max, lrt_max_rev) = ev.lrt_extremes();
    let (lrt_max, lrt_max_rev) = match (lrt_max, lrt_max_rev) {
        (Some(a), Some(b)) if a < 1.0 && b < 1.0 => (a, b),
        _ => {
            return Err(Error::DegenerateOperatingPoint(
                "likelihood-ratio extreme is undefined or not below one".into(),
            ))
        }
    };
    let (t0, _) = super::minimize_t(|t| ev.pe21(t));
    let n = model.states.len();
    let p0: Vec<f64> = (0..n).map(|s| model.state_prob(Hypothesis::H0, s)).collect();
    let p1: Vec<f64> = (0..n).map(|s| model.state_prob(Hypothesis::H1, s)).collect();
    let amps = |s: usize| &model.states[s].amps;
    let g = model.gamma_h;
    let pairs = || (0..n).flat_map(move |a| (0..n).map(move |b| (a, b)));

    let (mu11, v11) = moments(pairs().map(|(d, e)| {
        let l = d_factor(0.25, g, amps(d), amps(e)).ln() - 0.5 * p0[d].ln() - 0.5 * p1[e].ln();
        (p0[d] * p1[e], l)
    }))?;
    let (mu12, v12) = moments((0..n).map(|d| (p0[d], (p1[d] / p0[d]).ln())))?;
    let c2 = t0 - t0 * t0;
    let (mu21, v21) = moments(pairs().map(|(d, e)| {
        let l = d_factor(c2, g, amps(d), amps(e)).ln() - t0 * p1[d].ln() - (1.0 - t0) * p0[e].ln();
        (p1[d] * p0[e], l)
    }))?;
    let (mu22, v22) = moments((0..n).map(|d| (p1[d], (p1[d] / p0[d]).ln())))?;

    let (pi0, pi1) = (model.pi0, 1.0 - model.pi0);
    let kappa11 = (pi0 * pi1).sqrt() / (2.0 * s1.sqrt()) / (1.0 - lrt_max).sqrt();
    let kappa21 = s0.powf(t0 - 1.0) * pi0.powf(t0) * pi1.powf(1.0 - t0) / (1.0 - lrt_max_rev).powf(t0);
    let lognormal = |mu: f64, v: f64, kappa: f64| ExponentTerm { mu, sigma2: v, kappa, rate: -(mu + 0.5 * v) };
    let gaussian = |mu: f64, v: f64| ExponentTerm { mu, sigma2: v, kappa: 0.5, rate: mu * mu / (2.0 * v) };
    let terms = [
        lognormal(mu11, v11, kappa11),
        gaussian(mu12, v12),
        lognormal(mu21, v21, kappa21),
        gaussian(mu22, v22),
    ];
    let dominant = (0..4).fold(0, |b, i| if terms[i].rate < terms[b].rate { i } else { b });
    Ok(SchemeExponents {
        scheme: model.scheme,
        terms,
        gamma: terms[dominant].rate,
        dominant,
        t0,
        lognormal_terms_negative: terms[0].rate > 0.0 && terms[2].rate > 0.0,
    })
}

/// Exponent terms of `scheme` at a homogeneous, uncorrelated point.
pub fn asymptotics(scheme: SchemeKind, sensing: &SensingModel, net: &NetworkConfig) -> Result<SchemeExponents> {
    asymptotic_terms(&pair_model(scheme, sensing, net)?)
}

/// Collect per-scheme exponents and their pairwise rate differences.
pub fn exponent_report(schemes: Vec<SchemeExponents>) -> ExponentReport {
    let mut differences = Vec::new();
    for a in 0..schemes.len() {
        for b in a + 1..schemes.len() {
            differences.push((schemes[a].scheme, schemes[b].scheme, schemes[b].gamma - schemes[a].gamma));
        }
    }
    ExponentReport { schemes, differences }
}
