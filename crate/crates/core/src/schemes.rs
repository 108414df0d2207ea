//! Per-trial pipelines for the four fusion architectures.
//!
//! Every scheme delivers, per sensor pair, two complex observations to the
//! FC whose means are real-amplitude combinations of the pair's channel
//! coefficients: slot A carries `a·(h_i, h_j)` and slot B `b·(h_i, h_j)`.
//! For the orthogonal schemes the "slots" are simply the two sensors' own
//! channels. [`pair_amplitudes`] is the single source of truth for these
//! amplitudes; the FC rules and the analytical bounds both read it.

use crate::channel::{
    alamouti_combine, alamouti_receive, cn, draw_fc_channels, draw_internode_channels,
    internode_demod, internode_receive, parallel_receive, AlamoutiPair, ChannelRealization,
    FcSignals, NetworkConfig,
};
use crate::error::{domain, Error, Result};
use crate::sensing::{
    draw_observations, fused_decide_log, local_decide, log_lambda_tilde, partner,
    region_code, threshold_decide_direct, threshold_regions, Decision, Hypothesis,
    LocalDecisions, ObservationVector, SensingModel, ThresholdRegions,
};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Parallel,
    Stc,
    Fusion,
    Threshold,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] =
        [SchemeKind::Parallel, SchemeKind::Stc, SchemeKind::Fusion, SchemeKind::Threshold];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Parallel => "parallel",
            SchemeKind::Stc => "stc",
            SchemeKind::Fusion => "fusion",
            SchemeKind::Threshold => "threshold",
        }
    }

    /// Whether the scheme splits power between FC and inter-node links.
    pub fn uses_alpha(self) -> bool {
        matches!(self, SchemeKind::Stc | SchemeKind::Fusion)
    }

    /// Size of the per-pair alphabet of FC channel inputs.
    pub fn signal_states(self) -> usize {
        match self {
            SchemeKind::Parallel | SchemeKind::Fusion => 4,
            SchemeKind::Stc | SchemeKind::Threshold => 16,
        }
    }

    /// Size of the per-pair alphabet of the decision prior tables.
    pub fn prior_states(self) -> usize {
        match self {
            SchemeKind::Threshold => 16,
            _ => 4,
        }
    }

    pub fn is_alamouti(self) -> bool {
        matches!(self, SchemeKind::Stc | SchemeKind::Threshold)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" => Ok(SchemeKind::Parallel),
            "stc" => Ok(SchemeKind::Stc),
            "fusion" => Ok(SchemeKind::Fusion),
            "threshold" => Ok(SchemeKind::Threshold),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

pub(crate) fn bit(u: Decision) -> usize {
    usize::from(u > 0)
}

pub(crate) fn sym(state: usize, b: usize) -> Decision {
    if state >> b & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Per-pair state index from the symbols, most significant first.
///
/// * parallel/fusion: `(d_i, d_j)`
/// * stc: `(u_i, u_j, û_i, û_j)` where û_i is S_j's estimate of u_i
/// * threshold: `(u_i, ū_i, u_j, ū_j)`
pub fn encode_state(symbols: &[Decision]) -> usize {
    symbols.iter().fold(0, |acc, &u| acc << 1 | bit(u))
}

/// Inverse of [`encode_state`] for an alphabet of `n` symbols.
pub fn decode_state(state: usize, n: usize) -> Vec<Decision> {
    (0..n).rev().map(|b| sym(state, b)).collect()
}

/// Slot-A and slot-B amplitude vectors (multiplying `(h_i, h_j)`) of a
/// per-pair signal state.
pub fn pair_amplitudes(scheme: SchemeKind, state: usize, alpha: f64) -> ([f64; 2], [f64; 2]) {
    let f = |b| f64::from(sym(state, b));
    match scheme {
        SchemeKind::Parallel => ([f(1), 0.0], [0.0, f(0)]),
        SchemeKind::Fusion => {
            let c = alpha.sqrt();
            ([c * f(1), 0.0], [0.0, c * f(0)])
        }
        SchemeKind::Stc => {
            let c = (alpha / 2.0).sqrt();
            let (ui, uj, uhi, uhj) = (f(3), f(2), f(1), f(0));
            ([c * ui, c * uj], [-c * uhj, c * uhi])
        }
        SchemeKind::Threshold => {
            let c = std::f64::consts::FRAC_1_SQRT_2;
            let (ui, ubi, uj, ubj) = (f(3), f(2), f(1), f(0));
            ([c * ui, c * ubj], [-c * ubi, c * uj])
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub hypothesis: Hypothesis,
    pub observations: ObservationVector,
    pub decisions: LocalDecisions,
    pub channels: ChannelRealization,
    pub fc_signals: FcSignals,
}

impl TrialRecord {
    /// Signal state of pair `s` as seen by the FC decoder.
    pub fn pair_signal_state(&self, scheme: SchemeKind, s: usize) -> usize {
        let (i, j) = (2 * s, 2 * s + 1);
        let d = &self.decisions;
        match scheme {
            SchemeKind::Parallel => encode_state(&[d.u[i], d.u[j]]),
            SchemeKind::Fusion => {
                let ut = d.u_tilde.as_ref().expect("fusion trial has updated decisions");
                encode_state(&[ut[i], ut[j]])
            }
            SchemeKind::Stc => {
                let uh = d.u_hat.as_ref().expect("stc trial has demodulated decisions");
                encode_state(&[d.u[i], d.u[j], uh[i], uh[j]])
            }
            SchemeKind::Threshold => {
                let ub = d.u_bar.as_ref().expect("threshold trial has second decisions");
                encode_state(&[d.u[i], ub[i], d.u[j], ub[j]])
            }
        }
    }
}

/// Precomputed per-sensor quantities for repeated trials of one scheme.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub scheme: SchemeKind,
    pub sensing: SensingModel,
    pub net: NetworkConfig,
    tau: Vec<f64>,
    regions: Vec<ThresholdRegions>,
}

impl Pipeline {
    pub fn new(scheme: SchemeKind, sensing: &SensingModel, net: &NetworkConfig) -> Result<Self> {
        net.validate()?;
        if sensing.k() != net.k() {
            return domain(format!(
                "sensing model has {} sensors but network has {}",
                sensing.k(),
                net.k()
            ));
        }
        let k = sensing.k();
        let tau = (0..k).map(|i| sensing.tau(i)).collect();
        let regions = if scheme == SchemeKind::Threshold {
            (0..k).map(|i| threshold_regions(sensing, i)).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        Ok(Self { scheme, sensing: sensing.clone(), net: net.clone(), tau, regions })
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.tau[k]
    }

    /// Decision regions of sensor k (threshold scheme only).
    pub fn regions(&self, k: usize) -> &ThresholdRegions {
        &self.regions[k]
    }

    /// (u, ū) of sensor k for the threshold-changing rule.
    pub fn threshold_decision(&self, k: usize, x: f64) -> (Decision, Decision) {
        if self.sensing.rho() == 0.0 {
            let lab = self.regions[k].label_of(x);
            crate::sensing::region_decisions(lab)
        } else {
            threshold_decide_direct(x, &self.sensing, k)
        }
    }

    /// Inter-node exchange of pair s: returns (û_i at S_j, û_j at S_i) and
    /// the two received signals (r_ij at S_j, r_ji at S_i).
    #[allow(clippy::type_complexity)]
    pub(crate) fn exchange<R: Rng + ?Sized>(
        &self,
        u_i: Decision,
        u_j: Decision,
        g_ij: num_complex::Complex64,
        g_ji: num_complex::Complex64,
        rng: &mut R,
    ) -> ((Decision, Decision), (num_complex::Complex64, num_complex::Complex64)) {
        let (a, e) = (self.net.alpha, self.net.sigma_eta2);
        let r_ij = internode_receive(u_i, a, g_ij, e, rng);
        let r_ji = internode_receive(u_j, a, g_ji, e, rng);
        let uh_i = internode_demod(r_ij, g_ij).unwrap_or(-1);
        let uh_j = internode_demod(r_ji, g_ji).unwrap_or(-1);
        ((uh_i, uh_j), (r_ij, r_ji))
    }

    /// Updated fusion decision of sensor `k` from its measurement and the
    /// signal `r` received from its partner over link `g`.
    pub(crate) fn fused_decision(&self, k: usize, x_k: f64, r: num_complex::Complex64, g: num_complex::Complex64) -> Decision {
        let p = partner(k);
        let l = log_lambda_tilde(x_k, r, g, &self.sensing, (p, k), self.net.alpha, self.net.sigma_eta2)
            .expect("validated configuration");
        fused_decide_log(l, self.sensing.pi0())
    }

    pub fn run_trial<R: Rng + ?Sized>(&self, hypothesis: Hypothesis, rng: &mut R) -> TrialRecord {
        let obs = draw_observations(&self.sensing, hypothesis, rng);
        let mut h = Vec::with_capacity(obs.x.len());
        draw_fc_channels(&self.net, rng, &mut h);
        self.complete_trial(hypothesis, obs, h, rng)
    }

    /// Like [`Pipeline::run_trial`] but with the sensor→FC coefficients
    /// held fixed; everything else is drawn afresh.
    pub fn run_trial_with_fc_channels<R: Rng + ?Sized>(
        &self,
        hypothesis: Hypothesis,
        h: &[num_complex::Complex64],
        rng: &mut R,
    ) -> Result<TrialRecord> {
        if h.len() != self.sensing.k() {
            return domain(format!("need {} FC coefficients, got {}", self.sensing.k(), h.len()));
        }
        let obs = draw_observations(&self.sensing, hypothesis, rng);
        Ok(self.complete_trial(hypothesis, obs, h.to_vec(), rng))
    }

    fn complete_trial<R: Rng + ?Sized>(
        &self,
        hypothesis: Hypothesis,
        obs: ObservationVector,
        h: Vec<num_complex::Complex64>,
        rng: &mut R,
    ) -> TrialRecord {
        let x = &obs.x;
        let k = x.len();
        let net = &self.net;
        let mut g = Vec::new();
        let mut dec = LocalDecisions::default();
        let signals = match self.scheme {
            SchemeKind::Parallel => {
                dec.u = (0..k).map(|i| local_decide(x[i], self.tau[i])).collect();
                let y = (0..k)
                    .map(|i| parallel_receive(f64::from(dec.u[i]), h[i], net.sigma_v2, rng))
                    .collect();
                FcSignals::Orthogonal { y }
            }
            SchemeKind::Threshold => {
                let (u, ub): (Vec<_>, Vec<_>) =
                    (0..k).map(|i| self.threshold_decision(i, x[i])).unzip();
                dec.u = u;
                dec.u_bar = Some(ub);
                let pairs = (0..k / 2)
                    .map(|s| self.alamouti_pair(&dec, s, &h, rng))
                    .collect();
                FcSignals::Alamouti { pairs }
            }
            SchemeKind::Stc | SchemeKind::Fusion => {
                dec.u = (0..k).map(|i| local_decide(x[i], self.tau[i])).collect();
                draw_internode_channels(net, rng, &mut g);
                let mut uh = vec![0; k];
                let mut ut = vec![0; k];
                for s in 0..k / 2 {
                    let (i, j) = (2 * s, 2 * s + 1);
                    let ((uh_i, uh_j), (r_ij, r_ji)) =
                        self.exchange(dec.u[i], dec.u[j], g[i], g[j], rng);
                    uh[i] = uh_i;
                    uh[j] = uh_j;
                    if self.scheme == SchemeKind::Fusion {
                        ut[j] = self.fused_decision(j, x[j], r_ij, g[i]);
                        ut[i] = self.fused_decision(i, x[i], r_ji, g[j]);
                    }
                }
                dec.u_hat = Some(uh);
                if self.scheme == SchemeKind::Fusion {
                    let amp = net.alpha.sqrt();
                    let y = (0..k)
                        .map(|i| parallel_receive(amp * f64::from(ut[i]), h[i], net.sigma_v2, rng))
                        .collect();
                    dec.u_tilde = Some(ut);
                    FcSignals::Orthogonal { y }
                } else {
                    let pairs = (0..k / 2)
                        .map(|s| self.alamouti_pair(&dec, s, &h, rng))
                        .collect();
                    FcSignals::Alamouti { pairs }
                }
            }
        };
        TrialRecord {
            hypothesis,
            observations: obs,
            decisions: dec,
            channels: ChannelRealization { h, g },
            fc_signals: signals,
        }
    }

    fn alamouti_pair<R: Rng + ?Sized>(
        &self,
        dec: &LocalDecisions,
        s: usize,
        h: &[num_complex::Complex64],
        rng: &mut R,
    ) -> AlamoutiPair {
        let (i, j) = (2 * s, 2 * s + 1);
        let state = match self.scheme {
            SchemeKind::Stc => {
                let uh = dec.u_hat.as_ref().unwrap();
                encode_state(&[dec.u[i], dec.u[j], uh[i], uh[j]])
            }
            _ => {
                let ub = dec.u_bar.as_ref().unwrap();
                encode_state(&[dec.u[i], ub[i], dec.u[j], ub[j]])
            }
        };
        let (a, b) = pair_amplitudes(self.scheme, state, self.net.alpha);
        let (y_n, y_n1) = alamouti_receive(a, b, h[i], h[j], self.net.sigma_v2, rng);
        let (z_i, z_j, sigma2_eff) = alamouti_combine(y_n, y_n1, h[i], h[j], self.net.sigma_v2);
        AlamoutiPair { y_n, y_n1, z_i, z_j, sigma2_eff }
    }

    /// Prior-alphabet state of pair s for given measurements, simulating the
    /// inter-node exchange when the scheme has one. Used by Monte Carlo priors.
    pub(crate) fn pair_prior_state<R: Rng + ?Sized>(
        &self,
        s: usize,
        x_i: f64,
        x_j: f64,
        rng: &mut R,
    ) -> usize {
        let (i, j) = (2 * s, 2 * s + 1);
        match self.scheme {
            SchemeKind::Parallel | SchemeKind::Stc => {
                encode_state(&[local_decide(x_i, self.tau[i]), local_decide(x_j, self.tau[j])])
            }
            SchemeKind::Threshold => {
                let (ui, ubi) = self.threshold_decision(i, x_i);
                let (uj, ubj) = self.threshold_decision(j, x_j);
                4 * region_code(ui, ubi) + region_code(uj, ubj)
            }
            SchemeKind::Fusion => {
                let v = self.net.sigma_hs2(s);
                let g_ij = cn(v, rng);
                let g_ji = cn(v, rng);
                let (u_i, u_j) = (local_decide(x_i, self.tau[i]), local_decide(x_j, self.tau[j]));
                let (_, (r_ij, r_ji)) = self.exchange(u_i, u_j, g_ij, g_ji, rng);
                let ut_j = self.fused_decision(j, x_j, r_ij, g_ij);
                let ut_i = self.fused_decision(i, x_i, r_ji, g_ji);
                encode_state(&[ut_i, ut_j])
            }
        }
    }
}

/// Run one trial of `scheme` (builds a throwaway [`Pipeline`]).
pub fn run_trial<R: Rng + ?Sized>(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    hypothesis: Hypothesis,
    rng: &mut R,
) -> Result<TrialRecord> {
    Ok(Pipeline::new(scheme, sensing, net)?.run_trial(hypothesis, rng))
}
