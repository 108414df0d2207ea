//! Analytical performance: error floor, upper bounds on the average error
//! probability, and large-network error exponents. Homogeneous,
//! uncorrelated sensing only.

mod asymptotics;
mod bounds;

pub use asymptotics::{asymptotic_terms, asymptotics, exponent_report, ExponentReport, ExponentTerm, SchemeExponents};
pub use bounds::{
    aggregate_direct, aggregate_dp, bound, bound_fusion, bound_parallel, bound_stc,
    bound_threshold, d_factor, pair_model, BoundEvaluator, BoundResult, BoundTerms, FourStateProbs,
    PairModel, PairState,
};

use crate::channel::{internode_snr, NetworkConfig};
use crate::error::{domain, Error, Result};
use crate::sensing::SensingModel;
use crate::special::{binomial_pmf, db_to_linear, ln_bernoulli_product};
use serde::Serialize;

fn check_pd_pf(pd: f64, pf: f64) -> Result<()> {
    if !(pf > 0.0 && pd < 1.0 && pf < pd) {
        return domain(format!("need 0 < Pf < Pd < 1, got Pd={pd}, Pf={pf}"));
    }
    Ok(())
}

/// Smallest number of +1 votes for which the error-free LRT decides H1.
pub fn find_m(pd: f64, pf: f64, pi0: f64, k: usize) -> Result<usize> {
    check_pd_pf(pd, pf)?;
    if !(pi0 > 0.0 && pi0 < 1.0) {
        return domain(format!("pi0 must lie in (0,1), got {pi0}"));
    }
    let thr = (pi0 / (1.0 - pi0)).ln();
    (0..=k)
        .find(|&m| {
            ln_bernoulli_product(pd, m, k - m) - ln_bernoulli_product(pf, m, k - m) > thr
        })
        .ok_or_else(|| {
            Error::DegenerateOperatingPoint(format!(
                "no vote count in [0, {k}] makes the error-free LRT decide H1"
            ))
        })
}

/// Error probability of the LRT on K error-free local decisions.
///
/// When no vote count favours H1 the FC always decides H0 and the floor
/// is π1. Boundary cases Pd = 1 or Pf = 0 are accepted.
pub fn error_floor(pd: f64, pf: f64, pi0: f64, k: usize) -> f64 {
    let pi1 = 1.0 - pi0;
    let thr = (pi0 / pi1).ln();
    let m = (0..=k)
        .find(|&m| ln_bernoulli_product(pd, m, k - m) - ln_bernoulli_product(pf, m, k - m) > thr)
        .unwrap_or(k + 1);
    let k64 = k as u64;
    let miss: f64 = (0..m.min(k + 1)).map(|n| binomial_pmf(k64, n as u64, pd)).sum();
    let fa: f64 = (m..=k).map(|n| binomial_pmf(k64, n as u64, pf)).sum();
    pi1 * miss + pi0 * fa
}

/// Identical sensors, identical links, no sensing-noise correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomogeneousOperatingPoint {
    pub pd: f64,
    pub pf: f64,
    pub pi0: f64,
    pub k: usize,
    /// σ_h²/σ_v² (linear).
    pub gamma_h: f64,
    /// (1−α)σ_hs²/σ_η² (linear).
    pub gamma_hs: f64,
    pub alpha: f64,
}

impl HomogeneousOperatingPoint {
    pub fn from_models(sensing: &SensingModel, net: &NetworkConfig) -> Result<Self> {
        if sensing.rho() != 0.0 {
            return Err(Error::Config(
                "analytical bounds are defined only for uncorrelated sensing (rho = 0)".into(),
            ));
        }
        if !sensing.is_homogeneous() || !net.is_homogeneous() {
            return Err(Error::Config("analytical bounds require identical sensors and links".into()));
        }
        if sensing.k() != net.k() {
            return domain(format!("sensing has {} sensors, network {}", sensing.k(), net.k()));
        }
        let (pd, pf) = sensing.pd_pf(0);
        let op = Self {
            pd,
            pf,
            pi0: sensing.pi0(),
            k: sensing.k(),
            gamma_h: net.gamma_h(0),
            gamma_hs: internode_snr(net, 0),
            alpha: net.alpha,
        };
        op.validate()?;
        Ok(op)
    }

    /// Operating point of the reference geometry at the given SNRs (dB).
    pub fn reference(k: usize, snr_c_db: f64, snr_h_db: f64, pi0: f64, alpha: f64) -> Result<Self> {
        let sensing = SensingModel::homogeneous(k, snr_c_db, pi0, 0.0)?;
        let net = NetworkConfig::homogeneous(k, snr_h_db, alpha)?;
        let op = Self::from_models(&sensing, &net)?;
        debug_assert!((op.gamma_h - db_to_linear(snr_h_db)).abs() < 1e-9 * op.gamma_h);
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        check_pd_pf(self.pd, self.pf)?;
        if !(self.pi0 > 0.0 && self.pi0 < 1.0) {
            return domain(format!("pi0 must lie in (0,1), got {}", self.pi0));
        }
        if self.k < 2 || self.k % 2 != 0 {
            return domain(format!("K must be even and >= 2, got {}", self.k));
        }
        if !(self.gamma_h >= 0.0) || !(self.gamma_hs >= 0.0) {
            return domain("SNRs must be non-negative");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return domain(format!("alpha must lie in (0,1], got {}", self.alpha));
        }
        Ok(())
    }

    pub fn num_pairs(&self) -> usize {
        self.k / 2
    }
}

/// Grid step of [`minimize_t`].
pub const T_GRID_STEP: f64 = 0.01;

/// Grid minimiser over t ∈ {0.01, …, 0.99}; ties go to the smaller t.
pub fn minimize_t(f: impl FnMut(f64) -> f64) -> (f64, f64) {
    minimize_t_with_step(T_GRID_STEP, f)
}

/// [`minimize_t`] on the grid {step, 2·step, …} ∩ (0, 1).
pub fn minimize_t_with_step(step: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let n = (1.0 / step).round() as usize;
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 1..n {
        let t = i as f64 / n as f64;
        let v = f(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    best
}
