//! Wireless links: geometry-derived variances, Rayleigh draws, the
//! inter-node exchange and Alamouti transmission/combining at the FC.

use crate::error::{domain, Error, Result};
use crate::sensing::Decision;
use crate::special::{db_to_linear, linear_to_db};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// dBm → mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

/// Default geometry and radio parameters of the reference experiments.
pub mod defaults {
    pub const D: f64 = 10.0;
    pub const D0: f64 = 2.0;
    pub const EPSILON: f64 = 2.0;
    pub const GAIN_DB: f64 = -30.0;
    pub const NOISE_DBM: f64 = -50.0;
    pub const POWER_MW: f64 = 1.0;
}

/// Link budget of the network. All powers are linear mW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub power_mw: f64,
    pub gain: f64,
    pub epsilon: f64,
    /// Sensor → FC distances, one per sensor.
    pub d: Vec<f64>,
    /// Intra-pair distances, one per pair.
    pub d0: Vec<f64>,
    pub sigma_v2: f64,
    pub sigma_eta2: f64,
    pub alpha: f64,
}

impl NetworkConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        power_mw: f64,
        gain: f64,
        epsilon: f64,
        d: Vec<f64>,
        d0: Vec<f64>,
        sigma_v2: f64,
        sigma_eta2: f64,
        alpha: f64,
    ) -> Result<Self> {
        let cfg = Self { power_mw, gain, epsilon, d, d0, sigma_v2, sigma_eta2, alpha };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                domain(format!("{name} must be positive and finite, got {v}"))
            }
        };
        pos("power", self.power_mw)?;
        pos("gain", self.gain)?;
        pos("epsilon", self.epsilon)?;
        pos("sigma_v2", self.sigma_v2)?;
        pos("sigma_eta2", self.sigma_eta2)?;
        if self.d.is_empty() || self.d.len() % 2 != 0 {
            return domain(format!("need an even, non-zero number of sensors, got {}", self.d.len()));
        }
        if self.d0.len() != self.d.len() / 2 {
            return domain(format!(
                "need one intra-pair distance per pair ({}), got {}",
                self.d.len() / 2,
                self.d0.len()
            ));
        }
        for &x in self.d.iter().chain(&self.d0) {
            pos("distance", x)?;
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        Ok(())
    }

    /// Reference geometry with the transmit power chosen so every sensor
    /// sees the requested average FC SNR.
    pub fn homogeneous(k: usize, snr_h_db: f64, alpha: f64) -> Result<Self> {
        Self::homogeneous_with(k, snr_h_db, alpha, defaults::D, defaults::D0, defaults::EPSILON)
    }

    pub fn homogeneous_with(
        k: usize,
        snr_h_db: f64,
        alpha: f64,
        d: f64,
        d0: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let gain = db_to_linear(defaults::GAIN_DB);
        let noise = dbm_to_mw(defaults::NOISE_DBM);
        let power = db_to_linear(snr_h_db) * noise * d.powf(epsilon) / gain;
        Self::new(power, gain, epsilon, vec![d; k], vec![d0; k / 2], noise, noise, alpha)
    }

    pub fn k(&self) -> usize {
        self.d.len()
    }
    pub fn num_pairs(&self) -> usize {
        self.d0.len()
    }
    /// σ²_{h_k} = P·G/d_k^ε.
    pub fn sigma_h2(&self, k: usize) -> f64 {
        self.power_mw * self.gain / self.d[k].powf(self.epsilon)
    }
    /// σ²_{hs_s} = P·G/d0_s^ε.
    pub fn sigma_hs2(&self, s: usize) -> f64 {
        self.power_mw * self.gain / self.d0[s].powf(self.epsilon)
    }
    /// Linear average FC SNR of sensor k.
    pub fn gamma_h(&self, k: usize) -> f64 {
        self.sigma_h2(k) / self.sigma_v2
    }
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        let mut c = self.clone();
        c.alpha = alpha;
        c.validate()?;
        Ok(c)
    }
    pub fn is_homogeneous(&self) -> bool {
        self.d.iter().all(|x| *x == self.d[0]) && self.d0.iter().all(|x| *x == self.d0[0])
    }
}

/// Average FC SNR of sensor k in dB.
pub fn snr_h(config: &NetworkConfig, k: usize) -> f64 {
    linear_to_db(config.gamma_h(k))
}

/// Linear average inter-node SNR γ̄_hs = (1−α)σ²_hs/σ²_η of pair s.
pub fn internode_snr(config: &NetworkConfig, s: usize) -> f64 {
    (1.0 - config.alpha) * config.sigma_hs2(s) / config.sigma_eta2
}

/// One channel draw: `h[k]` sensor→FC, `g[2s]` = link i→j and `g[2s+1]` =
/// link j→i of pair s.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    pub g: Vec<Complex64>,
}

pub(crate) fn cn<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Circularly-symmetric complex Gaussian with the given total variance.
pub fn draw_complex_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Result<Complex64> {
    if !(variance > 0.0) {
        return domain(format!("variance must be positive, got {variance}"));
    }
    Ok(cn(variance, rng))
}

pub(crate) fn draw_fc_channels<R: Rng + ?Sized>(net: &NetworkConfig, rng: &mut R, h: &mut Vec<Complex64>) {
    h.clear();
    h.extend((0..net.k()).map(|k| cn(net.sigma_h2(k), rng)));
}

pub(crate) fn draw_internode_channels<R: Rng + ?Sized>(
    net: &NetworkConfig,
    rng: &mut R,
    g: &mut Vec<Complex64>,
) {
    g.clear();
    for s in 0..net.num_pairs() {
        let v = net.sigma_hs2(s);
        g.push(cn(v, rng));
        g.push(cn(v, rng));
    }
}

/// Draw all sensor→FC and inter-node coefficients.
pub fn draw_channels<R: Rng + ?Sized>(net: &NetworkConfig, rng: &mut R) -> ChannelRealization {
    let mut h = Vec::new();
    let mut g = Vec::new();
    draw_fc_channels(net, rng, &mut h);
    draw_internode_channels(net, rng, &mut g);
    ChannelRealization { h, g }
}

/// r_ij = √(1−α)·u_i·g_ij + η.
pub fn internode_receive<R: Rng + ?Sized>(
    u_i: Decision,
    alpha: f64,
    g_ij: Complex64,
    sigma_eta2: f64,
    rng: &mut R,
) -> Complex64 {
    g_ij * ((1.0 - alpha).sqrt() * f64::from(u_i)) + cn(sigma_eta2, rng)
}

/// sign(Re(r/g)) with ties to −1.
pub fn internode_demod(r_ij: Complex64, g_ij: Complex64) -> Result<Decision> {
    if g_ij.norm_sqr() == 0.0 {
        return Err(Error::DegenerateChannel("inter-node coefficient is zero".into()));
    }
    // Re(r/g) has the sign of Re(r·g*).
    Ok(if (r_ij * g_ij.conj()).re > 0.0 { 1 } else { -1 })
}

/// Average bit-flip probability of BPSK over Rayleigh fading.
pub fn demod_error_prob(gamma_hs: f64) -> f64 {
    if gamma_hs.is_infinite() {
        return 0.0;
    }
    let g = gamma_hs.max(0.0);
    // ½(1 − √(γ/(1+γ))) rewritten to avoid cancellation at high SNR.
    0.5 / ((1.0 + g) * (1.0 + (g / (1.0 + g)).sqrt()))
}

/// y = symbol·h + v.
pub fn parallel_receive<R: Rng + ?Sized>(
    symbol: f64,
    h_k: Complex64,
    sigma_v2: f64,
    rng: &mut R,
) -> Complex64 {
    h_k * symbol + cn(sigma_v2, rng)
}

/// Two Alamouti slots: `slot_a`/`slot_b` hold the amplitudes sent by
/// (S_i, S_j) in slots n and n+1.
pub fn alamouti_receive<R: Rng + ?Sized>(
    slot_a: [f64; 2],
    slot_b: [f64; 2],
    h_i: Complex64,
    h_j: Complex64,
    sigma_v2: f64,
    rng: &mut R,
) -> (Complex64, Complex64) {
    let y_n = h_i * slot_a[0] + h_j * slot_a[1] + cn(sigma_v2, rng);
    let y_n1 = h_i * slot_b[0] + h_j * slot_b[1] + cn(sigma_v2, rng);
    (y_n, y_n1)
}

/// Alamouti combining; returns (z_i, z_j, effective noise power).
pub fn alamouti_combine(
    y_n: Complex64,
    y_n1: Complex64,
    h_i: Complex64,
    h_j: Complex64,
    sigma_v2: f64,
) -> (Complex64, Complex64, f64) {
    let z_i = h_i.conj() * y_n + h_j * y_n1.conj();
    let z_j = h_j.conj() * y_n - h_i * y_n1.conj();
    (z_i, z_j, (h_i.norm_sqr() + h_j.norm_sqr()) * sigma_v2)
}

/// Per-pair signals at the FC after Alamouti combining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlamoutiPair {
    pub y_n: Complex64,
    pub y_n1: Complex64,
    pub z_i: Complex64,
    pub z_j: Complex64,
    pub sigma2_eff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FcSignals {
    /// One orthogonal-channel observation per sensor (parallel and fusion).
    Orthogonal { y: Vec<Complex64> },
    /// Two-slot Alamouti observations per pair (STC and threshold).
    Alamouti { pairs: Vec<AlamoutiPair> },
}
