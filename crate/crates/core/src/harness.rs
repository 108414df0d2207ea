//! Monte Carlo engine, α sweeps and grid experiments with CSV output.

use crate::analysis::{bound, error_floor};
use crate::channel::{defaults, NetworkConfig};
use crate::error::{Error, Result};
use crate::fusion::{
    build_decision_prior_with, lrt_decide, majority_decide, DecisionPrior, PriorMethod,
    DEFAULT_GH_NODES,
};
use crate::rng::{trial_rng, AUX_STREAM_BASE};
use crate::schemes::{Pipeline, SchemeKind};
use crate::sensing::{Hypothesis, SensingModel};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    #[default]
    Lrt,
    Majority,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Lrt => "lrt",
            Rule::Majority => "majority",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lrt" => Ok(Rule::Lrt),
            "majority" => Ok(Rule::Majority),
            other => Err(Error::Config(format!("unknown rule '{other}'"))),
        }
    }
}

/// Smallest trial count accepted by the estimators.
pub const MIN_TRIALS: u64 = 10_000;

/// Stream offset of the α sweep of a cell, so the reported estimate at α*
/// is not evaluated on the draws that selected it.
pub const SWEEP_STREAM_BASE: u64 = 1 << 61;
/// Trials per work unit; the reduction only sums integers, so the result
/// does not depend on how units are scheduled.
const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorEstimate {
    pub pe_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub n_h0: u64,
    pub n_h1: u64,
    pub errors_h0: u64,
    pub errors_h1: u64,
    /// P̂(error | H0) and P̂(error | H1).
    pub p_err_h0: f64,
    pub p_err_h1: f64,
}

impl ErrorEstimate {
    fn from_counts(pi0: f64, n0: u64, e0: u64, n1: u64, e1: u64) -> Self {
        let pi1 = 1.0 - pi0;
        let rate = |e: u64, n: u64| if n == 0 { 0.0 } else { e as f64 / n as f64 };
        let (p0, p1) = (rate(e0, n0), rate(e1, n1));
        let var = |p: f64, n: u64| if n == 0 { 0.0 } else { p * (1.0 - p) / n as f64 };
        Self {
            pe_hat: pi0 * p0 + pi1 * p1,
            stderr: (pi0 * pi0 * var(p0, n0) + pi1 * pi1 * var(p1, n1)).sqrt(),
            trials: n0 + n1,
            n_h0: n0,
            n_h1: n1,
            errors_h0: e0,
            errors_h1: e1,
            p_err_h0: p0,
            p_err_h1: p1,
        }
    }
}

/// Knobs of [`estimate_pe_with`] beyond the required arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    /// Decision-prior method; `None` picks [`PriorMethod::default_for`].
    pub prior_method: Option<PriorMethod>,
    pub gh_nodes: usize,
    /// Random-stream cell of this estimate.
    pub cell: u64,
    pub min_trials: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self { prior_method: None, gh_nodes: DEFAULT_GH_NODES, cell: 0, min_trials: MIN_TRIALS }
    }
}

/// Monte Carlo estimate of the average error probability.
pub fn estimate_pe(
    scheme: SchemeKind,
    rule: Rule,
    sensing: &SensingModel,
    net: &NetworkConfig,
    trials: u64,
    master_seed: u64,
) -> Result<ErrorEstimate> {
    estimate_pe_with(scheme, rule, sensing, net, trials, master_seed, &EstimateOptions::default())
}

/// The decision prior an LRT estimate in `cell` uses.
pub fn prior_for_cell(
    scheme: SchemeKind,
    sensing: &SensingModel,
    net: &NetworkConfig,
    master_seed: u64,
    opts: &EstimateOptions,
) -> Result<DecisionPrior> {
    let method = opts.prior_method.unwrap_or_else(|| PriorMethod::default_for(scheme, sensing));
    let mut rng = trial_rng(master_seed, AUX_STREAM_BASE + opts.cell, 0);
    build_decision_prior_with(scheme, sensing, net, method, opts.gh_nodes, &mut rng)
}

pub fn estimate_pe_with(
    scheme: SchemeKind,
    rule: Rule,
    sensing: &SensingModel,
    net: &NetworkConfig,
    trials: u64,
    master_seed: u64,
    opts: &EstimateOptions,
) -> Result<ErrorEstimate> {
    if trials < opts.min_trials {
        return Err(Error::InsufficientSamples { got: trials as usize, min: opts.min_trials as usize });
    }
    let pipeline = Pipeline::new(scheme, sensing, net)?;
    let prior = match rule {
        Rule::Lrt => Some(prior_for_cell(scheme, sensing, net, master_seed, opts)?),
        Rule::Majority => None,
    };
    let pi0 = sensing.pi0();
    let chunks = trials.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<[u64; 4]> {
            let mut acc = [0u64; 4];
            for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(master_seed, opts.cell, i);
                let h = if rng.random::<f64>() < pi0 { Hypothesis::H0 } else { Hypothesis::H1 };
                let rec = pipeline.run_trial(h, &mut rng);
                let d = match &prior {
                    Some(p) => lrt_decide(scheme, p, &rec.fc_signals, &rec.channels, net, pi0)?,
                    None => majority_decide(scheme, &rec.fc_signals, &rec.channels, net)?,
                };
                let err = u64::from(d.decided != h);
                acc[2 * h.index()] += 1;
                acc[2 * h.index() + 1] += err;
            }
            Ok(acc)
        })
        .try_reduce(|| [0u64; 4], |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]))?;
    Ok(ErrorEstimate::from_counts(pi0, counts[0], counts[1], counts[2], counts[3]))
}

/// 0.05, 0.10, …, 0.95.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 * 0.05).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSweep {
    pub points: Vec<(f64, ErrorEstimate)>,
    pub alpha_star: f64,
}

/// P̂e over a grid of power splits; every α reuses the same random streams.
#[allow(clippy::too_many_arguments)]
pub fn sweep_alpha(
    scheme: SchemeKind,
    rule: Rule,
    sensing: &SensingModel,
    net: &NetworkConfig,
    alpha_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<AlphaSweep> {
    sweep_alpha_with(scheme, rule, sensing, net, alpha_grid, trials, master_seed, &EstimateOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn sweep_alpha_with(
    scheme: SchemeKind,
    rule: Rule,
    sensing: &SensingModel,
    net: &NetworkConfig,
    alpha_grid: &[f64],
    trials: u64,
    master_seed: u64,
    opts: &EstimateOptions,
) -> Result<AlphaSweep> {
    if !scheme.uses_alpha() {
        return Err(Error::Config(format!("scheme {scheme} has no power split to sweep")));
    }
    if alpha_grid.is_empty() {
        return Err(Error::Config("empty alpha grid".into()));
    }
    let mut points = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid {
        let n = net.with_alpha(a)?;
        points.push((a, estimate_pe_with(scheme, rule, sensing, &n, trials, master_seed, opts)?));
    }
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.1.pe_hat < points[best].1.pe_hat {
            best = i;
        }
    }
    Ok(AlphaSweep { alpha_star: points[best].0, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaAuto {
    Auto,
}

/// A list of α values, or `"auto"` for the sweep minimiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Auto(AlphaAuto),
    Values(Vec<f64>),
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Auto(AlphaAuto::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Geometry {
    pub d: f64,
    pub d0: f64,
    pub epsilon: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self { d: defaults::D, d0: defaults::D0, epsilon: defaults::EPSILON }
    }
}

fn default_rho() -> Vec<f64> {
    vec![0.0]
}
fn default_gh() -> usize {
    DEFAULT_GH_NODES
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schemes: Vec<SchemeKind>,
    #[serde(default)]
    pub rule: Rule,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    #[serde(default = "default_rho")]
    pub rho: Vec<f64>,
    pub pi0: Vec<f64>,
    pub snr_c_db: Vec<f64>,
    pub snr_h_db: Vec<f64>,
    #[serde(default)]
    pub alpha: AlphaSpec,
    /// Trials per α point when `alpha` is `"auto"`; defaults to `trials`.
    #[serde(default)]
    pub alpha_sweep_trials: Option<u64>,
    pub trials: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub prior_method: Option<PriorMethod>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_gh")]
    pub gh_nodes: usize,
    /// Fill the bound column where it is defined.
    #[serde(default = "default_true")]
    pub bounds: bool,
    #[serde(default)]
    pub geometry: Geometry,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.schemes.is_empty() || self.k.is_empty() || self.rho.is_empty() || self.pi0.is_empty() {
            return bad("schemes, K, rho and pi0 grids must be non-empty");
        }
        if self.snr_c_db.is_empty() || self.snr_h_db.is_empty() {
            return bad("SNR grids must be non-empty");
        }
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!("trials must be at least {MIN_TRIALS}")));
        }
        if let Some(t) = self.alpha_sweep_trials {
            if t < MIN_TRIALS {
                return Err(Error::Config(format!("alpha_sweep_trials must be at least {MIN_TRIALS}")));
            }
        }
        if let AlphaSpec::Values(v) = &self.alpha {
            if v.is_empty() || v.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
                return bad("alpha values must be a non-empty list in (0,1)");
            }
        }
        if self.k.iter().any(|k| *k < 2 || k % 2 != 0) {
            return bad("K must be even and >= 2");
        }
        if self.rho.iter().any(|r| !(0.0..1.0).contains(r)) {
            return bad("rho must lie in [0,1)");
        }
        if self.pi0.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return bad("pi0 must lie in (0,1)");
        }
        if self.snr_c_db.iter().chain(&self.snr_h_db).any(|x| !x.is_finite()) {
            return bad("SNR values must be finite");
        }
        let g = &self.geometry;
        if !(g.d > 0.0 && g.d0 > 0.0 && g.epsilon > 0.0) {
            return bad("geometry values must be positive");
        }
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scheme: SchemeKind,
    pub rule: Rule,
    pub k: usize,
    pub rho: f64,
    pub pi0: f64,
    pub snr_c_db: f64,
    pub snr_h_db: f64,
    pub alpha: Option<f64>,
    pub estimate: ErrorEstimate,
    pub pe_bound: Option<f64>,
    pub error_floor: Option<f64>,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 14] = [
    "scheme", "rule", "K", "rho", "pi0", "snr_c_db", "snr_h_db", "alpha", "trials", "pe_hat",
    "stderr", "pe_bound", "error_floor", "seed",
];

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

impl ResultRow {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.scheme.to_string(),
            self.rule.to_string(),
            self.k.to_string(),
            self.rho.to_string(),
            self.pi0.to_string(),
            self.snr_c_db.to_string(),
            self.snr_h_db.to_string(),
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.estimate.trials.to_string(),
            sci(self.estimate.pe_hat),
            sci(self.estimate.stderr),
            self.pe_bound.map(sci).unwrap_or_default(),
            self.error_floor.map(sci).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record(r.csv_record())?;
    }
    out.flush()?;
    Ok(())
}

/// Run every cell of the grid; writes the CSV when `output` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    let mut cell: u64 = 0;
    let g = &config.geometry;
    for &scheme in &config.schemes {
        for &k in &config.k {
            for &rho in &config.rho {
                for &pi0 in &config.pi0 {
                    for &snr_c in &config.snr_c_db {
                        for &snr_h in &config.snr_h_db {
                            let sensing = SensingModel::homogeneous(k, snr_c, pi0, rho)?;
                            let base = NetworkConfig::homogeneous_with(k, snr_h, 0.5, g.d, g.d0, g.epsilon)?;
                            let opts = EstimateOptions {
                                prior_method: config.prior_method,
                                gh_nodes: config.gh_nodes,
                                cell,
                                ..EstimateOptions::default()
                            };
                            let alphas: Vec<Option<f64>> = if !scheme.uses_alpha() {
                                vec![None]
                            } else {
                                match &config.alpha {
                                    AlphaSpec::Values(v) => v.iter().map(|a| Some(*a)).collect(),
                                    AlphaSpec::Auto(_) => {
                                        let sweep_opts =
                                            EstimateOptions { cell: SWEEP_STREAM_BASE + cell, ..opts };
                                        let sweep = sweep_alpha_with(
                                            scheme,
                                            config.rule,
                                            &sensing,
                                            &base,
                                            &default_alpha_grid(),
                                            config.alpha_sweep_trials.unwrap_or(config.trials),
                                            config.master_seed,
                                            &sweep_opts,
                                        )?;
                                        vec![Some(sweep.alpha_star)]
                                    }
                                }
                            };
                            for alpha in alphas {
                                let net = match alpha {
                                    Some(a) => base.with_alpha(a)?,
                                    None => base.clone(),
                                };
                                let estimate = estimate_pe_with(
                                    scheme,
                                    config.rule,
                                    &sensing,
                                    &net,
                                    config.trials,
                                    config.master_seed,
                                    &opts,
                                )?;
                                let (pe_bound, floor) = if rho == 0.0 {
                                    let (pd, pf) = sensing.pd_pf(0);
                                    let b = if config.bounds && config.rule == Rule::Lrt {
                                        bound(scheme, &sensing, &net).ok().map(|b| b.pe_bar)
                                    } else {
                                        None
                                    };
                                    (b, Some(error_floor(pd, pf, pi0, k)))
                                } else {
                                    (None, None)
                                };
                                rows.push(ResultRow {
                                    scheme,
                                    rule: config.rule,
                                    k,
                                    rho,
                                    pi0,
                                    snr_c_db: snr_c,
                                    snr_h_db: snr_h,
                                    alpha,
                                    estimate,
                                    pe_bound,
                                    error_floor: floor,
                                    seed: config.master_seed,
                                });
                            }
                            cell += 1;
                        }
                    }
                }
            }
        }
    }
    if let Some(path) = &config.output {
        let f = std::fs::File::create(path)?;
        write_csv(&rows, std::io::BufWriter::new(f))?;
    }
    Ok(rows)
}
