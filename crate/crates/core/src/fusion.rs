//! Fusion-center rules and the decision-prior tables that feed the LRT.

use crate::channel::{internode_snr, demod_error_prob, FcSignals, ChannelRealization, NetworkConfig};
use crate::error::{Error, Result};
use crate::quadrature::{standard_normal_grid, CompositeLegendre};
use crate::rng::TrialRng;
use crate::schemes::{decode_state, pair_amplitudes, sym, Pipeline, SchemeKind};
use crate::sensing::{partner, Hypothesis, SensingModel};
use crate::special::{log_add_exp, log_sum_exp, normal_interval, q};
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default Gauss–Hermite order for the shared correlation factor.
pub const DEFAULT_GH_NODES: usize = 33;
/// Smallest accepted Monte Carlo prior sample count.
pub const MIN_PRIOR_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMethod {
    ClosedForm,
    /// Empirical tables from `samples` simulated pair realizations per
    /// hypothesis and grid node.
    MonteCarlo { samples: usize },
}

impl PriorMethod {
    /// Closed form wherever it exists, Monte Carlo otherwise.
    pub fn default_for(scheme: SchemeKind, sensing: &SensingModel) -> Self {
        if scheme == SchemeKind::Fusion && sensing.rho() > 0.0 {
            PriorMethod::MonteCarlo { samples: 100_000 }
        } else {
            PriorMethod::ClosedForm
        }
    }
}

/// Per-hypothesis probability tables over per-pair decision states,
/// conditioned on the nodes of a quadrature grid over the shared
/// correlation factor.
#[derive(Debug, Clone)]
pub struct DecisionPrior {
    pub scheme: SchemeKind,
    /// (z₀ abscissa, weight); a single (0, 1) node when ρ = 0.
    pub grid: Vec<(f64, f64)>,
    /// `tables[h][pair][node][state]` over the prior alphabet.
    pub tables: [Vec<Vec<Vec<f64>>>; 2],
    /// Inter-node bit-flip probability per pair (STC only).
    pub internode_flip: Option<Vec<f64>>,
    /// `log_signal[h][node][pair][state]` over the FC signal alphabet.
    log_signal: [Vec<Vec<Vec<f64>>>; 2],
}

impl DecisionPrior {
    pub fn num_pairs(&self) -> usize {
        self.tables[0].len()
    }

    /// Table of pair `s` at grid node `g` under `h`.
    pub fn table(&self, h: Hypothesis, s: usize, g: usize) -> &[f64] {
        &self.tables[h.index()][s][g]
    }

    /// ln P(signal state | h, node) for pair `s`.
    pub fn log_signal_table(&self, h: Hypothesis, g: usize, s: usize) -> &[f64] {
        &self.log_signal[h.index()][g][s]
    }

    fn assemble(
        scheme: SchemeKind,
        grid: Vec<(f64, f64)>,
        tables: [Vec<Vec<Vec<f64>>>; 2],
        internode_flip: Option<Vec<f64>>,
    ) -> Self {
        let pairs = tables[0].len();
        let log_signal = [0, 1].map(|hi| {
            (0..grid.len())
                .map(|g| {
                    (0..pairs)
                        .map(|s| {
                            let t = &tables[hi][s][g];
                            match (scheme, &internode_flip) {
                                (SchemeKind::Stc, Some(flip)) => {
                                    let p = flip[s];
                                    (0..16)
                                        .map(|st| {
                                            let (us, uh) = (st >> 2, st & 3);
                                            let mut pr = t[us];
                                            for b in 0..2 {
                                                let same = (us >> b & 1) == (uh >> b & 1);
                                                pr *= if same { 1.0 - p } else { p };
                                            }
                                            pr.ln()
                                        })
                                        .collect()
                                }
                                _ => t.iter().map(|p| p.ln()).collect(),
                            }
                        })
                        .collect()
                })
                .collect()
        });
        Self { scheme, grid, tables, internode_flip, log_signal }
    }
}

/// Build the prior with the default Gauss–Hermite order.
pub fn build_decision_prior(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    method: PriorMethod,
    rng: &mut dyn RngCore,
) -> Result<DecisionPrior> {
    build_decision_prior_with(scheme, sensing, net, method, DEFAULT_GH_NODES, rng)
}

pub fn build_decision_prior_with(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    method: PriorMethod,
    gh_nodes: usize,
    rng: &mut dyn RngCore,
) -> Result<DecisionPrior> {
    let pipeline = Pipeline::new(scheme, sensing, net)?;
    let rho = sensing.rho();
    let grid = if rho == 0.0 { vec![(0.0, 1.0)] } else { standard_normal_grid(gh_nodes) };
    let pairs = sensing.num_pairs();
    let mut tables: [Vec<Vec<Vec<f64>>>; 2] = [Vec::new(), Vec::new()];
    match method {
        PriorMethod::ClosedForm => {
            if scheme == SchemeKind::Fusion && rho > 0.0 {
                return Err(Error::Mismatch(
                    "closed-form fusion prior requires uncorrelated sensing; use Monte Carlo".into(),
                ));
            }
            for h in Hypothesis::BOTH {
                let mut per_pair = Vec::with_capacity(pairs);
                for s in 0..pairs {
                    let per_node = grid
                        .iter()
                        .map(|&(z0, _)| closed_form_pair_table(&pipeline, s, h, z0))
                        .collect();
                    per_pair.push(per_node);
                }
                tables[h.index()] = per_pair;
            }
        }
        PriorMethod::MonteCarlo { samples } => {
            if samples < MIN_PRIOR_SAMPLES {
                return Err(Error::InsufficientSamples { got: samples, min: MIN_PRIOR_SAMPLES });
            }
            // One independent seed per (pair, node, hypothesis) cell, drawn
            // up front so the parallel fill is order-independent.
            let mut seeds = vec![0u64; 2 * pairs * grid.len()];
            for s in &mut seeds {
                *s = rng.next_u64();
            }
            let n_states = scheme.prior_states();
            let cells: Vec<Vec<f64>> = seeds
                .par_iter()
                .enumerate()
                .map(|(idx, &seed)| {
                    let hi = idx / (pairs * grid.len());
                    let s = (idx / grid.len()) % pairs;
                    let g = idx % grid.len();
                    let mut r = TrialRng::seed_from_u64(seed);
                    monte_carlo_pair_table(
                        &pipeline,
                        s,
                        Hypothesis::from_index(hi),
                        grid[g].0,
                        samples,
                        n_states,
                        &mut r,
                    )
                })
                .collect();
            for hi in 0..2 {
                tables[hi] = (0..pairs)
                    .map(|s| {
                        (0..grid.len())
                            .map(|g| cells[(hi * pairs + s) * grid.len() + g].clone())
                            .collect()
                    })
                    .collect();
            }
        }
    }
    let internode_flip = (scheme == SchemeKind::Stc)
        .then(|| (0..pairs).map(|s| demod_error_prob(internode_snr(net, s))).collect());
    Ok(DecisionPrior::assemble(scheme, grid, tables, internode_flip))
}

/// Conditional law of sensor k's measurement given the shared factor.
fn conditional_moments(sensing: &SensingModel, k: usize, h: Hypothesis, z0: f64) -> (f64, f64) {
    let (s, rho) = (sensing.sigma(k), sensing.rho());
    (h.ell() + s * rho.sqrt() * z0, s * (1.0 - rho).sqrt())
}

fn closed_form_pair_table(p: &Pipeline, s: usize, h: Hypothesis, z0: f64) -> Vec<f64> {
    let sensing = &p.sensing;
    let (i, j) = (2 * s, 2 * s + 1);
    match p.scheme {
        SchemeKind::Parallel | SchemeKind::Stc => {
            let pu = |k: usize| {
                let (m, sd) = conditional_moments(sensing, k, h, z0);
                q((p.tau(k) - m) / sd)
            };
            let (pi, pj) = (pu(i), pu(j));
            // state = 2·bit(u_i) + bit(u_j)
            vec![(1.0 - pi) * (1.0 - pj), (1.0 - pi) * pj, pi * (1.0 - pj), pi * pj]
        }
        SchemeKind::Threshold => {
            let reg = |k: usize| {
                let (m, sd) = conditional_moments(sensing, k, h, z0);
                p.regions(k).probabilities(m, sd)
            };
            let (ri, rj) = (reg(i), reg(j));
            (0..16).map(|st| ri[st >> 2] * rj[st & 3]).collect()
        }
        SchemeKind::Fusion => fusion_pair_table(sensing, &p.net, s, h).to_vec(),
    }
}

fn monte_carlo_pair_table(
    p: &Pipeline,
    s: usize,
    h: Hypothesis,
    z0: f64,
    samples: usize,
    n_states: usize,
    rng: &mut TrialRng,
) -> Vec<f64> {
    let (i, j) = (2 * s, 2 * s + 1);
    let (mi, si) = conditional_moments(&p.sensing, i, h, z0);
    let (mj, sj) = conditional_moments(&p.sensing, j, h, z0);
    let mut counts = vec![0u64; n_states];
    for _ in 0..samples {
        let zi: f64 = rng.sample(StandardNormal);
        let zj: f64 = rng.sample(StandardNormal);
        counts[p.pair_prior_state(s, mi + si * zi, mj + sj * zj, rng)] += 1;
    }
    counts.iter().map(|&c| c as f64 / samples as f64).collect()
}

/// Asymmetric-Laplace law of the inter-node channel LLR t given the sent
/// bit: density ∝ e^{−a t} on t > 0 and e^{b t} on t < 0 for u = +1
/// (mirrored for u = −1), with b = a + 1 and a·b = 1/(4γ̄).
fn llr_law(gamma: f64) -> (f64, f64) {
    let r = (1.0 + 1.0 / gamma).sqrt();
    (0.5 * (r - 1.0), 0.5 * (r + 1.0))
}

/// ∫₀^∞ e^{−c t} g(t) dt for g that saturates well before t = 60.
fn half_line(rule: &CompositeLegendre, c: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    let l = (50.0 / c).min(60.0);
    let body = rule.integrate(0.0, l, 60, |t| (-c * t).exp() * g(t));
    body + g(l) * (-c * l).exp() / c
}

/// E[g(t)] for the channel LLR of a bit `u` sent at average SNR γ̄.
fn expect_llr(rule: &CompositeLegendre, gamma: f64, u: i8, g: &dyn Fn(f64) -> f64) -> f64 {
    if gamma < 1e-12 {
        return g(0.0);
    }
    let (a, b) = llr_law(gamma);
    let norm = a * b / (a + b);
    let neg = |t: f64| g(-t);
    // For u = +1 the heavy side is t > 0 with rate a.
    let (c_pos, c_neg) = if u > 0 { (a, b) } else { (b, a) };
    norm * (half_line(rule, c_pos, g) + half_line(rule, c_neg, &neg))
}

/// Exact per-pair law of the updated decisions (ũ_i, ũ_j) for uncorrelated
/// sensing: index 2·bit(ũ_i) + bit(ũ_j).
///
/// Sensor k updates to +1 iff x_k > τ_k − σ_k²φ_k(t), where t is the LLR of
/// its partner's bit on the inter-node link. Given the two initial bits the
/// sensors' events are independent, so the pair law is a four-term mixture
/// of products of one-dimensional integrals over t.
pub fn fusion_pair_table(
    sensing: &SensingModel,
    net: &NetworkConfig,
    s: usize,
    h: Hypothesis,
) -> [f64; 4] {
    let rule = CompositeLegendre::new(10);
    let gamma = internode_snr(net, s);
    let (i, j) = (2 * s, 2 * s + 1);
    // joint[k][b][u_k][u_partner] = P(u_k, ũ_k = b | u_partner)
    let joint = |k: usize| {
        let p = partner(k);
        let (pd, pf) = sensing.pd_pf(p);
        let (sig, tau, ell) = (sensing.sigma(k), sensing.tau(k), h.ell());
        let phi = move |t: f64| {
            log_add_exp(pd.ln() + 0.5 * t, (1.0 - pd).ln() - 0.5 * t)
                - log_add_exp(pf.ln() + 0.5 * t, (1.0 - pf).ln() - 0.5 * t)
        };
        let mut out = [[[0.0; 2]; 2]; 2];
        for (up_idx, up) in [-1i8, 1].into_iter().enumerate() {
            for (uk_idx, uk) in [-1i8, 1].into_iter().enumerate() {
                let (lo, hi) = if uk > 0 { (tau, f64::INFINITY) } else { (f64::NEG_INFINITY, tau) };
                let p_plus = |t: f64| {
                    let theta = tau - sig * sig * phi(t);
                    normal_interval(lo.max(theta), hi, ell, sig)
                };
                let total = normal_interval(lo, hi, ell, sig);
                let plus = expect_llr(&rule, gamma, up, &p_plus);
                out[1][uk_idx][up_idx] = plus;
                out[0][uk_idx][up_idx] = (total - plus).max(0.0);
            }
        }
        out
    };
    let (ji, jj) = (joint(i), joint(j));
    let mut table = [0.0; 4];
    for bi in 0..2 {
        for bj in 0..2 {
            let mut acc = 0.0;
            for ui in 0..2 {
                for uj in 0..2 {
                    acc += ji[bi][ui][uj] * jj[bj][uj][ui];
                }
            }
            table[2 * bi + bj] = acc;
        }
    }
    let total: f64 = table.iter().sum();
    table.map(|p| p / total)
}

/// Outcome of an FC rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcDecision {
    pub decided: Hypothesis,
    /// ln Λ (LRT path only).
    pub log_lrt: Option<f64>,
    /// Sum of demodulated symbols (majority path only).
    pub vote_sum: Option<i64>,
}

fn check_signals(scheme: SchemeKind, signals: &FcSignals) -> Result<()> {
    let ok = match signals {
        FcSignals::Orthogonal { .. } => !scheme.is_alamouti(),
        FcSignals::Alamouti { .. } => scheme.is_alamouti(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Mismatch(format!("signals do not belong to scheme {scheme}")))
    }
}

/// ln f(pair signals | state) up to a state-independent constant, for
/// every signal state of every pair. Rows have length 4 or 16.
pub fn pair_log_likelihoods(
    scheme: SchemeKind,
    signals: &FcSignals,
    channels: &ChannelRealization,
    net: &NetworkConfig,
) -> Result<Vec<Vec<f64>>> {
    check_signals(scheme, signals)?;
    let n = scheme.signal_states();
    let h = &channels.h;
    let amps: Vec<_> = (0..n).map(|st| pair_amplitudes(scheme, st, net.alpha)).collect();
    let out = match signals {
        FcSignals::Orthogonal { y } => (0..y.len() / 2)
            .map(|s| {
                let (hi, hj) = (h[2 * s], h[2 * s + 1]);
                let (yi, yj) = (y[2 * s], y[2 * s + 1]);
                amps.iter()
                    .map(|(a, b)| {
                        let mi = hi * a[0] + hj * a[1];
                        let mj = hi * b[0] + hj * b[1];
                        -((yi - mi).norm_sqr() + (yj - mj).norm_sqr()) / net.sigma_v2
                    })
                    .collect()
            })
            .collect(),
        FcSignals::Alamouti { pairs } => pairs
            .iter()
            .enumerate()
            .map(|(s, p)| {
                let (hi, hj) = (h[2 * s], h[2 * s + 1]);
                amps.iter()
                    .map(|(a, b)| {
                        let (mi, mj) = combined_mean(a, b, hi, hj);
                        -((p.z_i - mi).norm_sqr() + (p.z_j - mj).norm_sqr()) / p.sigma2_eff
                    })
                    .collect()
            })
            .collect(),
    };
    Ok(out)
}

/// Noise-free combiner outputs for slot amplitudes `a`, `b`.
pub fn combined_mean(a: &[f64; 2], b: &[f64; 2], hi: Complex64, hj: Complex64) -> (Complex64, Complex64) {
    let m_n = hi * a[0] + hj * a[1];
    let m_n1 = hi * b[0] + hj * b[1];
    (hi.conj() * m_n + hj * m_n1.conj(), hj.conj() * m_n - hi * m_n1.conj())
}

/// ln f(signals | h) from per-pair log-likelihood rows.
pub fn log_evidence(prior: &DecisionPrior, loglik: &[Vec<f64>], h: Hypothesis) -> f64 {
    let mut per_node = Vec::with_capacity(prior.grid.len());
    let mut buf = Vec::with_capacity(16);
    for (g, &(_, w)) in prior.grid.iter().enumerate() {
        let mut acc = w.ln();
        for (s, row) in loglik.iter().enumerate() {
            let lt = prior.log_signal_table(h, g, s);
            buf.clear();
            buf.extend(row.iter().zip(lt).map(|(a, b)| a + b));
            acc += log_sum_exp(&buf);
        }
        per_node.push(acc);
    }
    log_sum_exp(&per_node)
}

/// ln Λ from per-pair log-likelihood rows.
pub fn log_lrt_from_loglik(prior: &DecisionPrior, loglik: &[Vec<f64>]) -> f64 {
    log_evidence(prior, loglik, Hypothesis::H1) - log_evidence(prior, loglik, Hypothesis::H0)
}

/// Optimal FC rule: decide H1 iff ln Λ > ln(π0/π1), ties to H0.
pub fn lrt_decide(
    scheme: SchemeKind,
    prior: &DecisionPrior,
    signals: &FcSignals,
    channels: &ChannelRealization,
    net: &NetworkConfig,
    pi0: f64,
) -> Result<FcDecision> {
    if prior.scheme != scheme {
        return Err(Error::Mismatch(format!(
            "prior built for {} used with {}",
            prior.scheme, scheme
        )));
    }
    let ll = pair_log_likelihoods(scheme, signals, channels, net)?;
    if ll.len() != prior.num_pairs() {
        return Err(Error::Mismatch("pair count differs between prior and signals".into()));
    }
    let l = log_lrt_from_loglik(prior, &ll);
    let decided = if l > (pi0 / (1.0 - pi0)).ln() { Hypothesis::H1 } else { Hypothesis::H0 };
    Ok(FcDecision { decided, log_lrt: Some(l), vote_sum: None })
}

/// Demodulate-and-vote FC rule; ties decide H0.
pub fn majority_decide(
    scheme: SchemeKind,
    signals: &FcSignals,
    channels: &ChannelRealization,
    net: &NetworkConfig,
) -> Result<FcDecision> {
    check_signals(scheme, signals)?;
    let votes: i64 = match signals {
        FcSignals::Orthogonal { y } => {
            let mut v = 0;
            for (yk, hk) in y.iter().zip(&channels.h) {
                if hk.norm_sqr() == 0.0 {
                    return Err(Error::DegenerateChannel("zero FC channel coefficient".into()));
                }
                v += if (yk * hk.conj()).re > 0.0 { 1 } else { -1 };
            }
            v
        }
        FcSignals::Alamouti { .. } => {
            let ll = pair_log_likelihoods(scheme, signals, channels, net)?;
            ll.iter()
                .map(|row| {
                    let best = ml_state(row);
                    (0..4).map(|b| i64::from(sym(best, b))).sum::<i64>()
                })
                .sum()
        }
    };
    let decided = if votes > 0 { Hypothesis::H1 } else { Hypothesis::H0 };
    Ok(FcDecision { decided, log_lrt: None, vote_sum: Some(votes) })
}

/// Index of the most likely state; the lowest index wins ties.
pub fn ml_state(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = k;
        }
    }
    best
}

/// The 4 demodulated symbols of the ML state of an Alamouti pair.
pub fn ml_symbols(row: &[f64]) -> Vec<i8> {
    decode_state(ml_state(row), 4)
}
