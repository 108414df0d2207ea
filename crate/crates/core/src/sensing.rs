//! Sensing model and local decision rules at the sensors.

use crate::error::{domain, Result};
use crate::special::{log_add_exp, log_phi, log_q, normal_interval, q};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// A local decision, always `+1` or `-1`.
pub type Decision = i8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H0,
    H1,
}

impl Hypothesis {
    /// Mean of the observations under this hypothesis.
    pub fn ell(self) -> f64 {
        match self {
            Hypothesis::H0 => 0.0,
            Hypothesis::H1 => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Hypothesis::H0 => 0,
            Hypothesis::H1 => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 0 {
            Hypothesis::H0
        } else {
            Hypothesis::H1
        }
    }

    pub const BOTH: [Hypothesis; 2] = [Hypothesis::H0, Hypothesis::H1];
}

/// SNR_c in dB ↔ sensing-noise standard deviation.
pub fn sigma_from_snr_db(snr_c_db: f64) -> f64 {
    10f64.powf(-snr_c_db / 20.0)
}

pub fn snr_db_from_sigma(sigma_w: f64) -> f64 {
    -20.0 * sigma_w.log10()
}

/// Priors, per-sensor noise levels and the common noise correlation.
///
/// Sensors `2s` and `2s+1` (zero-based) form pair `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensingModel {
    pi0: f64,
    sigma_w: Vec<f64>,
    rho: f64,
}

impl SensingModel {
    pub fn new(pi0: f64, sigma_w: Vec<f64>, rho: f64) -> Result<Self> {
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return domain(format!("pi0 must lie in (0,1), got {pi0}"));
        }
        if sigma_w.len() < 2 || sigma_w.len() % 2 != 0 {
            return domain(format!("K must be even and >= 2, got {}", sigma_w.len()));
        }
        if let Some(s) = sigma_w.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return domain(format!("sigma_w must be positive and finite, got {s}"));
        }
        if !(0.0..1.0).contains(&rho) {
            return domain(format!("rho must lie in [0,1), got {rho}"));
        }
        Ok(Self { pi0, sigma_w, rho })
    }

    /// K identical sensors at the given SNR_c.
    pub fn homogeneous(k: usize, snr_c_db: f64, pi0: f64, rho: f64) -> Result<Self> {
        Self::new(pi0, vec![sigma_from_snr_db(snr_c_db); k], rho)
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }
    pub fn pi1(&self) -> f64 {
        1.0 - self.pi0
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn k(&self) -> usize {
        self.sigma_w.len()
    }
    pub fn num_pairs(&self) -> usize {
        self.sigma_w.len() / 2
    }
    pub fn sigma_w(&self) -> &[f64] {
        &self.sigma_w
    }
    pub fn sigma(&self, k: usize) -> f64 {
        self.sigma_w[k]
    }
    /// ln(π0/π1), the LRT decision threshold in log domain.
    pub fn log_prior_ratio(&self) -> f64 {
        (self.pi0 / (1.0 - self.pi0)).ln()
    }
    pub fn tau(&self, k: usize) -> f64 {
        0.5 + self.sigma_w[k].powi(2) * self.log_prior_ratio()
    }
    pub fn pd_pf(&self, k: usize) -> (f64, f64) {
        let s = self.sigma_w[k];
        let tau = self.tau(k);
        (q((tau - 1.0) / s), q(tau / s))
    }
    pub fn is_homogeneous(&self) -> bool {
        self.sigma_w.iter().all(|s| *s == self.sigma_w[0])
    }
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.pi0, self.sigma_w.clone(), rho)
    }
}

/// Index of the other sensor in the same pair.
pub fn partner(k: usize) -> usize {
    k ^ 1
}

/// τ = 0.5 + σ² ln(π0/π1).
pub fn local_threshold(sigma_w: f64, pi0: f64) -> Result<f64> {
    if !(sigma_w > 0.0) {
        return domain(format!("sigma_w must be positive, got {sigma_w}"));
    }
    if !(pi0 > 0.0 && pi0 < 1.0) {
        return domain(format!("pi0 must lie in (0,1), got {pi0}"));
    }
    Ok(0.5 + sigma_w * sigma_w * (pi0 / (1.0 - pi0)).ln())
}

/// (P_d, P_f) of a threshold test on x ~ N(ℓ, σ²).
pub fn detection_probs(sigma_w: f64, tau: f64) -> Result<(f64, f64)> {
    if !(sigma_w > 0.0) {
        return domain(format!("sigma_w must be positive, got {sigma_w}"));
    }
    Ok((q((tau - 1.0) / sigma_w), q(tau / sigma_w)))
}

/// Local decisions of one trial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalDecisions {
    pub u: Vec<Decision>,
    /// `u_hat[k]`: the partner's demodulated copy of `u[k]` (STC).
    pub u_hat: Option<Vec<Decision>>,
    /// Updated decisions (fusion at sensors).
    pub u_tilde: Option<Vec<Decision>>,
    /// Second decisions (threshold changing).
    pub u_bar: Option<Vec<Decision>>,
}


#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub x: Vec<f64>,
    pub hypothesis: Hypothesis,
}

/// One-factor equicorrelated draw: x_k = ℓ + σ_k(√ρ z₀ + √(1−ρ) z_k).
pub fn draw_observations<R: Rng + ?Sized>(
    model: &SensingModel,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> ObservationVector {
    let mut x = Vec::with_capacity(model.k());
    fill_observations(model, hypothesis, rng, &mut x);
    ObservationVector { x, hypothesis }
}

pub(crate) fn fill_observations<R: Rng + ?Sized>(
    model: &SensingModel,
    hypothesis: Hypothesis,
    rng: &mut R,
    x: &mut Vec<f64>,
) {
    let ell = hypothesis.ell();
    let z0: f64 = rng.sample(StandardNormal);
    let (a, b) = (model.rho.sqrt(), (1.0 - model.rho).sqrt());
    x.clear();
    for &s in &model.sigma_w {
        let zk: f64 = rng.sample(StandardNormal);
        x.push(ell + s * (a * z0 + b * zk));
    }
}

/// +1 iff x > τ; ties go to −1.
pub fn local_decide(x: f64, tau: f64) -> Decision {
    if x > tau {
        1
    } else {
        -1
    }
}

/// ln P(u_i = u | x_j, H_ℓ) for sensors i, j of the same correlated model.
///
/// Conditional on x_j, x_i is Gaussian with mean ℓ(1−ρσ_i/σ_j) + ρ x_j σ_i/σ_j
/// and variance (1−ρ²)σ_i². With ρ = 0 this is just ln P(u_i = u | H_ℓ).
pub fn log_prob_decision_given(
    model: &SensingModel,
    i: usize,
    j: usize,
    x_j: f64,
    u: Decision,
    h: Hypothesis,
) -> f64 {
    let (si, sj, rho) = (model.sigma(i), model.sigma(j), model.rho);
    let ell = h.ell();
    let r = rho * si / sj;
    let mean = ell * (1.0 - r) + r * x_j;
    let sd = (1.0 - rho * rho).sqrt() * si;
    let z = (model.tau(i) - mean) / sd;
    if u > 0 {
        log_q(z)
    } else {
        log_phi(z)
    }
}

fn log_gauss_kernel(x: f64, mean: f64, sigma: f64) -> f64 {
    let d = (x - mean) / sigma;
    -0.5 * d * d
}

/// ln λ̃_j: sensor j's statistic fusing its measurement with the signal
/// received from partner i over the inter-node link.
#[allow(clippy::too_many_arguments)]
pub fn log_lambda_tilde(
    x_j: f64,
    r_ij: Complex64,
    g_ij: Complex64,
    model: &SensingModel,
    pair: (usize, usize),
    alpha: f64,
    sigma_eta2: f64,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(sigma_eta2 > 0.0) {
        return domain(format!("noise power must be positive, got {sigma_eta2}"));
    }
    let (i, j) = pair;
    let amp = (1.0 - alpha).sqrt();
    let log_fr = |u: f64| -(r_ij - g_ij * (amp * u)).norm_sqr() / sigma_eta2;
    let (lp, lm) = (log_fr(1.0), log_fr(-1.0));
    let sj = model.sigma(j);
    let num = |h: Hypothesis| {
        log_add_exp(
            lp + log_prob_decision_given(model, i, j, x_j, 1, h),
            lm + log_prob_decision_given(model, i, j, x_j, -1, h),
        ) + log_gauss_kernel(x_j, h.ell(), sj)
    };
    Ok(num(Hypothesis::H1) - num(Hypothesis::H0))
}

/// λ̃_j itself (may overflow to +∞ for extreme inputs; prefer the log form).
#[allow(clippy::too_many_arguments)]
pub fn lambda_tilde(
    x_j: f64,
    r_ij: Complex64,
    g_ij: Complex64,
    model: &SensingModel,
    pair: (usize, usize),
    alpha: f64,
    sigma_eta2: f64,
) -> Result<f64> {
    log_lambda_tilde(x_j, r_ij, g_ij, model, pair, alpha, sigma_eta2).map(f64::exp)
}

/// +1 iff λ̃ > π0/π1; ties go to −1.
pub fn fused_decide(lambda_tilde_value: f64, pi0: f64) -> Decision {
    fused_decide_log(lambda_tilde_value.ln(), pi0)
}

pub fn fused_decide_log(log_lambda: f64, pi0: f64) -> Decision {
    if log_lambda > (pi0 / (1.0 - pi0)).ln() {
        1
    } else {
        -1
    }
}

/// (τ₁, τ₂) of the threshold-changing rule for uncorrelated sensing noise.
pub fn threshold_pair_uncorrelated(
    sigma_w: f64,
    pi0: f64,
    partner_pd: f64,
    partner_pf: f64,
) -> Result<(f64, f64)> {
    if !(partner_pf > 0.0 && partner_pd < 1.0 && partner_pd > partner_pf) {
        return domain(format!(
            "need 0 < Pf < Pd < 1, got Pd={partner_pd}, Pf={partner_pf}"
        ));
    }
    let tau = local_threshold(sigma_w, pi0)?;
    let s2 = sigma_w * sigma_w;
    let tau1 = tau + s2 * ((1.0 - partner_pf) / (1.0 - partner_pd)).ln();
    let tau2 = tau + s2 * (partner_pf / partner_pd).ln();
    Ok((tau1, tau2))
}

/// Four-region rule: (u, ū) from x and the three thresholds.
pub fn threshold_change_decide(x: f64, tau: f64, tau1: f64, tau2: f64) -> (Decision, Decision) {
    debug_assert!(tau2 < tau && tau < tau1);
    if x > tau1 {
        (1, 1)
    } else if x > tau {
        (1, -1)
    } else if x > tau2 {
        (-1, 1)
    } else {
        (-1, -1)
    }
}

/// ln λ̄_i: sensor i assumes its partner decided −u_i.
pub fn log_lambda_bar(x_i: f64, model: &SensingModel, i: usize) -> f64 {
    let j = partner(i);
    let u_i = local_decide(x_i, model.tau(i));
    let s = model.sigma(i);
    let term = |h: Hypothesis| {
        log_prob_decision_given(model, j, i, x_i, -u_i, h) + log_gauss_kernel(x_i, h.ell(), s)
    };
    term(Hypothesis::H1) - term(Hypothesis::H0)
}

/// (u, ū) by direct evaluation of λ̄; valid for any ρ.
pub fn threshold_decide_direct(x_i: f64, model: &SensingModel, i: usize) -> (Decision, Decision) {
    let u = local_decide(x_i, model.tau(i));
    let ubar = if log_lambda_bar(x_i, model, i) > model.log_prior_ratio() { 1 } else { -1 };
    (u, ubar)
}

/// Region code of a (u, ū) pair, ascending in x: 0 = (−,−), 1 = (−,+),
/// 2 = (+,−), 3 = (+,+).
pub fn region_code(u: Decision, ubar: Decision) -> usize {
    2 * usize::from(u > 0) + usize::from(ubar > 0)
}

pub fn region_decisions(code: usize) -> (Decision, Decision) {
    (if code & 2 != 0 { 1 } else { -1 }, if code & 1 != 0 { 1 } else { -1 })
}

/// Partition of the real line into intervals (b_{k−1}, b_k] labelled by
/// region code; the first interval starts at −∞ and the last ends at +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRegions {
    pub breakpoints: Vec<f64>,
    pub labels: Vec<usize>,
}

impl ThresholdRegions {
    pub fn label_of(&self, x: f64) -> usize {
        let idx = self.breakpoints.partition_point(|b| *b < x);
        self.labels[idx]
    }

    /// P(region | x ~ N(mean, sd²)) for each of the four codes.
    pub fn probabilities(&self, mean: f64, sd: f64) -> [f64; 4] {
        let mut p = [0.0; 4];
        let n = self.labels.len();
        for (k, &lab) in self.labels.iter().enumerate() {
            let lo = if k == 0 { f64::NEG_INFINITY } else { self.breakpoints[k - 1] };
            let hi = if k == n - 1 { f64::INFINITY } else { self.breakpoints[k] };
            p[lab] += normal_interval(lo, hi, mean, sd);
        }
        p
    }
}

/// Decision regions of sensor `i` under the threshold-changing rule.
///
/// For ρ = 0 these are the closed-form thresholds; otherwise the direct λ̄
/// rule is scanned on a fine grid and each label change is bisected.
pub fn threshold_regions(model: &SensingModel, i: usize) -> Result<ThresholdRegions> {
    let tau = model.tau(i);
    if model.rho() == 0.0 {
        let (pd, pf) = model.pd_pf(partner(i));
        let (t1, t2) = threshold_pair_uncorrelated(model.sigma(i), model.pi0(), pd, pf)?;
        return Ok(ThresholdRegions { breakpoints: vec![t2, tau, t1], labels: vec![0, 1, 2, 3] });
    }
    let s = model.sigma(i);
    let label = |x: f64| {
        let (u, ub) = threshold_decide_direct(x, model, i);
        region_code(u, ub)
    };
    let (lo, hi) = (tau - 30.0 * s, tau + 30.0 * s);
    let steps = 6000;
    let dx = (hi - lo) / steps as f64;
    let mut breakpoints = Vec::new();
    let mut labels = vec![label(lo)];
    let mut prev_x = lo;
    for k in 1..=steps {
        let x = lo + k as f64 * dx;
        let lab = label(x);
        if lab != *labels.last().unwrap() {
            let (mut a, mut b) = (prev_x, x);
            let la = *labels.last().unwrap();
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if label(m) == la {
                    a = m;
                } else {
                    b = m;
                }
            }
            breakpoints.push(a);
            labels.push(lab);
        }
        prev_x = x;
    }
    Ok(ThresholdRegions { breakpoints, labels })
}
