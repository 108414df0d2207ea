//! Upper bounds on the fading-averaged error probability.
//!
//! Every scheme is described by a [`PairModel`]: a finite alphabet of
//! per-pair states, each carrying the slot amplitudes it puts on the air,
//! the categories it adds to the sufficient-statistic count vector, and a
//! hypothesis-independent weight (the inter-node flip product for STC).
//! The probability of a full configuration under H_ℓ is
//! `Π_pairs T(s) · Π_c θ_ℓ[c]^count[c]`, so the decision coefficient
//! `π1 P1 − π0 P0` factors into `T(x) · C(count)`.
//!
//! With `S1 = {C > 0}` and `S0 = {C < 0}`:
//!
//! * `Pe11 = π0/(2√|S1|) Σ_{x∈S0, x1∈S1} P0(x) √G(x,x1) Π D1`
//! * `Pe21 = π1/|S0| Σ_{x∈S1, x1∈S0} P1(x) (|S0| G(x,x1))^t Π D2(t)`
//! * `Pe12 = π0 P0(S1 ∪ Z)`, `Pe22 = π1 P1(S0 ∪ Z)`
//!
//! where `G = |C(x1)T(x1)| / |C(x)T(x)|` and Z holds the (rare) exact ties.
//! The double sums are aggregated by dynamic programming over pairs, keyed
//! by the two count vectors, or by brute force for small networks.

use super::{minimize_t, HomogeneousOperatingPoint};
use crate::channel::demod_error_prob;
use crate::error::{domain, Error, Result};
use crate::fusion::{fusion_pair_table, DecisionPrior};
use crate::schemes::{pair_amplitudes, SchemeKind};
use crate::sensing::{threshold_regions, Hypothesis, SensingModel};
use crate::channel::NetworkConfig;
use crate::special::xlny;
use serde::Serialize;
use std::collections::HashMap;

/// E_h[exp(−c·I)] for a pair whose slot amplitudes change from `s` to `s1`:
/// `1/det(I + cγ̄ M)` with `M = ΔaΔaᵀ + ΔbΔbᵀ`.
pub fn d_factor(c: f64, gamma_h: f64, s: &([f64; 2], [f64; 2]), s1: &([f64; 2], [f64; 2])) -> f64 {
    let da = [s.0[0] - s1.0[0], s.0[1] - s1.0[1]];
    let db = [s.1[0] - s1.1[0], s.1[1] - s1.1[1]];
    let tr = da[0] * da[0] + da[1] * da[1] + db[0] * db[0] + db[1] * db[1];
    let cross = da[0] * db[1] - da[1] * db[0];
    let g = c * gamma_h;
    1.0 / (1.0 + g * tr + g * g * cross * cross)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairState {
    /// Contribution to the category count vector.
    pub inc: Vec<u8>,
    pub amps: ([f64; 2], [f64; 2]),
    /// Hypothesis-independent weight.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairModel {
    pub scheme: SchemeKind,
    pub pi0: f64,
    pub pairs: usize,
    pub gamma_h: f64,
    /// Per-category probabilities under H0 and H1.
    pub theta: [Vec<f64>; 2],
    pub states: Vec<PairState>,
}

/// Per-region probabilities of the four-region rule, indexed by region code
/// (0 = (−,−), 1 = (−,+), 2 = (+,−), 3 = (+,+)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourStateProbs {
    pub pf: [f64; 4],
    pub pd: [f64; 4],
}

impl FourStateProbs {
    pub fn from_models(sensing: &SensingModel) -> Result<Self> {
        let r = threshold_regions(sensing, 0)?;
        let s = sensing.sigma(0);
        Ok(Self { pf: r.probabilities(0.0, s), pd: r.probabilities(1.0, s) })
    }

    pub fn validate(&self) -> Result<()> {
        for p in [&self.pf, &self.pd] {
            if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return domain(format!("four-state probabilities must be a distribution, got {p:?}"));
            }
        }
        Ok(())
    }
}

impl PairModel {
    fn binary_theta(op: &HomogeneousOperatingPoint) -> [Vec<f64>; 2] {
        // category 0: u = +1, category 1: u = −1
        [vec![op.pf, 1.0 - op.pf], vec![op.pd, 1.0 - op.pd]]
    }

    fn ustate_inc(us: usize) -> Vec<u8> {
        let ones = (us >> 1 & 1) + (us & 1);
        vec![ones as u8, (2 - ones) as u8]
    }

    pub fn parallel(op: &HomogeneousOperatingPoint) -> Result<Self> {
        op.validate()?;
        let states = (0..4)
            .map(|st| PairState {
                inc: Self::ustate_inc(st),
                amps: pair_amplitudes(SchemeKind::Parallel, st, 1.0),
                weight: 1.0,
            })
            .collect();
        Ok(Self {
            scheme: SchemeKind::Parallel,
            pi0: op.pi0,
            pairs: op.num_pairs(),
            gamma_h: op.gamma_h,
            theta: Self::binary_theta(op),
            states,
        })
    }

    pub fn stc(op: &HomogeneousOperatingPoint) -> Result<Self> {
        op.validate()?;
        let p = demod_error_prob(op.gamma_hs);
        let states = (0..16)
            .map(|st| {
                let (us, uh) = (st >> 2, st & 3);
                let same = (!(us ^ uh)) & 3;
                let agree = (same >> 1 & 1) + (same & 1);
                PairState {
                    inc: Self::ustate_inc(us),
                    amps: pair_amplitudes(SchemeKind::Stc, st, op.alpha),
                    weight: (1.0 - p).powi(agree as i32) * p.powi(2 - agree as i32),
                }
            })
            .collect();
        Ok(Self {
            scheme: SchemeKind::Stc,
            pi0: op.pi0,
            pairs: op.num_pairs(),
            gamma_h: op.gamma_h,
            theta: Self::binary_theta(op),
            states,
        })
    }

    /// `tables[ℓ][state]`: per-pair law of (ũ_i, ũ_j) under H_ℓ.
    pub fn fusion(op: &HomogeneousOperatingPoint, tables: [[f64; 4]; 2]) -> Result<Self> {
        op.validate()?;
        for t in &tables {
            if t.iter().any(|x| !(*x >= 0.0)) || (t.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return domain(format!("pair table must be a distribution, got {t:?}"));
            }
        }
        let states = (0..4)
            .map(|st| {
                let mut inc = vec![0u8; 4];
                inc[st] = 1;
                PairState { inc, amps: pair_amplitudes(SchemeKind::Fusion, st, op.alpha), weight: 1.0 }
            })
            .collect();
        Ok(Self {
            scheme: SchemeKind::Fusion,
            pi0: op.pi0,
            pairs: op.num_pairs(),
            gamma_h: op.gamma_h,
            theta: [tables[0].to_vec(), tables[1].to_vec()],
            states,
        })
    }

    pub fn threshold(op: &HomogeneousOperatingPoint, probs: &FourStateProbs) -> Result<Self> {
        op.validate()?;
        probs.validate()?;
        let states = (0..16)
            .map(|st| {
                let mut inc = vec![0u8; 4];
                inc[st >> 2] += 1;
                inc[st & 3] += 1;
                PairState { inc, amps: pair_amplitudes(SchemeKind::Threshold, st, 1.0), weight: 1.0 }
            })
            .collect();
        Ok(Self {
            scheme: SchemeKind::Threshold,
            pi0: op.pi0,
            pairs: op.num_pairs(),
            gamma_h: op.gamma_h,
            theta: [probs.pf.to_vec(), probs.pd.to_vec()],
            states,
        })
    }

    pub fn num_categories(&self) -> usize {
        self.theta[0].len()
    }

    /// Probability of one pair state under `h`.
    pub fn state_prob(&self, h: Hypothesis, s: usize) -> f64 {
        let st = &self.states[s];
        let th = &self.theta[h.index()];
        st.weight * st.inc.iter().zip(th).map(|(&n, &p)| p.powi(n as i32)).product::<f64>()
    }

    fn ln_theta(&self, h: Hypothesis, counts: &[u8]) -> f64 {
        counts.iter().zip(&self.theta[h.index()]).map(|(&n, &p)| xlny(n as f64, p)).sum()
    }

    /// C(count) = π1 Θ1 − π0 Θ0 and the scale π1 Θ1 + π0 Θ0.
    fn coefficient(&self, counts: &[u8]) -> (f64, f64) {
        let a = (1.0 - self.pi0) * self.ln_theta(Hypothesis::H1, counts).exp();
        let b = self.pi0 * self.ln_theta(Hypothesis::H0, counts).exp();
        (a - b, a + b)
    }
}

/// Sign class of a count vector: −1 (S0), +1 (S1) or 0 (tie).
fn class_of(c: f64, scale: f64) -> i8 {
    if c.abs() <= 1e-12 * scale {
        0
    } else if c > 0.0 {
        1
    } else {
        -1
    }
}

/// Ingredients of the bound before t is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerms {
    pub pe11: f64,
    pub pe12: f64,
    pub pe21: f64,
    pub pe22: f64,
    pub s0_size: f64,
    pub s1_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    pub scheme: SchemeKind,
    /// π0-normalised average of the T̄_{e1} bound over P(·|H0).
    pub te1_bar: f64,
    /// π1-normalised average of the T̄_{e2} bound over P(·|H1).
    pub te2_bar: f64,
    pub pe11: f64,
    pub pe12: f64,
    pub pe21: f64,
    pub pe22: f64,
    pub pe1_bar: f64,
    pub pe2_bar: f64,
    pub pe_bar: f64,
    pub t_star: f64,
    /// Vote threshold of the error-free LRT (Parallel and STC only).
    pub m: Option<usize>,
    pub s0_size: f64,
    pub s1_size: f64,
}

type Key = u64;

fn pack(counts: &[u8]) -> Key {
    counts.iter().enumerate().fold(0, |k, (i, &c)| k | (c as u64) << (8 * i))
}

fn unpack(key: Key, n: usize) -> Vec<u8> {
    (0..n).map(|i| (key >> (8 * i) & 0xff) as u8).collect()
}

/// Reachable count vectors after each pair, with transition tables.
#[derive(Debug, Clone)]
struct Lattice {
    /// Distinct increments and the increment id of every state.
    state_inc: Vec<usize>,
    n_inc: usize,
    layers: Vec<Vec<Key>>,
    /// `next[k][i][a]`: index in layer k+1 of key i of layer k plus inc a.
    next: Vec<Vec<Vec<usize>>>,
}

impl Lattice {
    fn new(model: &PairModel) -> Result<Self> {
        let n_cat = model.num_categories();
        let max_inc: usize = model.states.iter().map(|s| s.inc.iter().map(|&x| x as usize).sum()).max().unwrap_or(0);
        if n_cat > 8 || model.pairs * max_inc > 255 {
            return domain("network too large for the count-vector encoding");
        }
        let mut incs: Vec<Key> = Vec::new();
        let mut state_inc = Vec::with_capacity(model.states.len());
        for s in &model.states {
            let k = pack(&s.inc);
            let id = incs.iter().position(|x| *x == k).unwrap_or_else(|| {
                incs.push(k);
                incs.len() - 1
            });
            state_inc.push(id);
        }
        let mut layers = vec![vec![0 as Key]];
        let mut next = Vec::with_capacity(model.pairs);
        for _ in 0..model.pairs {
            let cur = layers.last().unwrap();
            let mut keys: Vec<Key> = cur.iter().flat_map(|k| incs.iter().map(move |a| k + a)).collect();
            keys.sort_unstable();
            keys.dedup();
            let index: HashMap<Key, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
            next.push(cur.iter().map(|k| incs.iter().map(|a| index[&(k + a)]).collect()).collect());
            layers.push(keys);
        }
        Ok(Self { state_inc, n_inc: incs.len(), layers, next })
    }

    fn last(&self) -> &[Key] {
        self.layers.last().unwrap()
    }

    /// Σ over sequences with each final key of Π per-pair weights.
    fn single(&self, w: &[f64]) -> Vec<f64> {
        let mut agg = vec![0.0; self.n_inc];
        for (s, &a) in self.state_inc.iter().enumerate() {
            agg[a] += w[s];
        }
        let mut cur = vec![1.0];
        for k in 0..self.next.len() {
            let mut nxt = vec![0.0; self.layers[k + 1].len()];
            for (i, &v) in cur.iter().enumerate() {
                if v != 0.0 {
                    for a in 0..self.n_inc {
                        nxt[self.next[k][i][a]] += v * agg[a];
                    }
                }
            }
            cur = nxt;
        }
        cur
    }

    /// Σ over sequence pairs with each final key pair of Π per-pair
    /// weights `w[s][s1]`; returned row-major over the last layer.
    fn pair(&self, w: &[Vec<f64>]) -> Vec<f64> {
        let n = self.n_inc;
        let mut agg = vec![0.0; n * n];
        for (s, &a) in self.state_inc.iter().enumerate() {
            for (s1, &b) in self.state_inc.iter().enumerate() {
                agg[a * n + b] += w[s][s1];
            }
        }
        let mut cur = vec![1.0];
        for k in 0..self.next.len() {
            let (w_cur, w_nxt) = (self.layers[k].len(), self.layers[k + 1].len());
            let nk = &self.next[k];
            let mut nxt = vec![0.0; w_nxt * w_nxt];
            for i in 0..w_cur {
                for j in 0..w_cur {
                    let v = cur[i * w_cur + j];
                    if v == 0.0 {
                        continue;
                    }
                    for a in 0..n {
                        let row = nk[i][a] * w_nxt;
                        for b in 0..n {
                            nxt[row + nk[j][b]] += v * agg[a * n + b];
                        }
                    }
                }
            }
            cur = nxt;
        }
        cur
    }
}

/// Pre-aggregated bound machinery for one model; `pe21(t)` is cheap to
/// re-evaluate across the t grid.
#[derive(Debug, Clone)]
pub struct BoundEvaluator {
    model: PairModel,
    lattice: Lattice,
    /// Per final key: C, class, Θ0, Θ1, #sequences, Σ T.
    coef: Vec<f64>,
    class: Vec<i8>,
    theta0: Vec<f64>,
    theta1: Vec<f64>,
    s0: f64,
    s1: f64,
    pe11: f64,
    pe12: f64,
    pe22: f64,
}

impl BoundEvaluator {
    pub fn new(model: PairModel) -> Result<Self> {
        let lattice = Lattice::new(&model)?;
        let n_cat = model.num_categories();
        let keys = lattice.last().to_vec();
        let (mut coef, mut class, mut theta0, mut theta1) = (vec![], vec![], vec![], vec![]);
        for &k in &keys {
            let c = unpack(k, n_cat);
            let (v, scale) = model.coefficient(&c);
            coef.push(v);
            class.push(class_of(v, scale));
            theta0.push(model.ln_theta(Hypothesis::H0, &c).exp());
            theta1.push(model.ln_theta(Hypothesis::H1, &c).exp());
        }
        let ones = vec![1.0; model.states.len()];
        let weights: Vec<f64> = model.states.iter().map(|s| s.weight).collect();
        let count = lattice.single(&ones);
        let wsum = lattice.single(&weights);
        let (mut s0, mut s1, mut pe12, mut pe22) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..keys.len() {
            match class[i] {
                1 => s1 += count[i],
                -1 => s0 += count[i],
                _ => {}
            }
            if class[i] >= 0 {
                pe12 += model.pi0 * theta0[i] * wsum[i];
            }
            if class[i] <= 0 {
                pe22 += (1.0 - model.pi0) * theta1[i] * wsum[i];
            }
        }
        let mut ev = Self { model, lattice, coef, class, theta0, theta1, s0, s1, pe11: 0.0, pe12, pe22 };
        ev.pe11 = ev.compute_pe11();
        Ok(ev)
    }

    pub fn model(&self) -> &PairModel {
        &self.model
    }

    fn compute_pe11(&self) -> f64 {
        if self.s1 == 0.0 || self.s0 == 0.0 {
            return 0.0;
        }
        let m = &self.model;
        let w: Vec<Vec<f64>> = m
            .states
            .iter()
            .map(|a| {
                m.states
                    .iter()
                    .map(|b| (a.weight * b.weight).sqrt() * d_factor(0.25, m.gamma_h, &a.amps, &b.amps))
                    .collect()
            })
            .collect();
        let agg = self.lattice.pair(&w);
        let n = self.coef.len();
        let mut acc = 0.0;
        for i in 0..n {
            if self.class[i] != -1 {
                continue;
            }
            let fi = self.theta0[i] / self.coef[i].abs().sqrt();
            for j in 0..n {
                if self.class[j] == 1 {
                    acc += agg[i * n + j] * fi * self.coef[j].abs().sqrt();
                }
            }
        }
        m.pi0 / (2.0 * self.s1.sqrt()) * acc
    }

    /// The P̄_{e21} term at a given t.
    pub fn pe21(&self, t: f64) -> f64 {
        if self.s1 == 0.0 || self.s0 == 0.0 {
            return 0.0;
        }
        let m = &self.model;
        let c = t - t * t;
        let w: Vec<Vec<f64>> = m
            .states
            .iter()
            .map(|a| {
                m.states
                    .iter()
                    .map(|b| {
                        a.weight.powf(1.0 - t) * b.weight.powf(t) * d_factor(c, m.gamma_h, &a.amps, &b.amps)
                    })
                    .collect()
            })
            .collect();
        let agg = self.lattice.pair(&w);
        let n = self.coef.len();
        let mut acc = 0.0;
        for i in 0..n {
            if self.class[i] != 1 {
                continue;
            }
            let fi = self.theta1[i] * self.coef[i].abs().powf(-t);
            for j in 0..n {
                if self.class[j] == -1 {
                    acc += agg[i * n + j] * fi * self.coef[j].abs().powf(t);
                }
            }
        }
        (1.0 - m.pi0) * self.s0.powf(t - 1.0) * acc
    }

    pub fn terms(&self, t: f64) -> BoundTerms {
        BoundTerms {
            pe11: self.pe11,
            pe12: self.pe12,
            pe21: self.pe21(t),
            pe22: self.pe22,
            s0_size: self.s0,
            s1_size: self.s1,
        }
    }

    pub fn s0_size(&self) -> f64 {
        self.s0
    }
    pub fn s1_size(&self) -> f64 {
        self.s1
    }

    /// max over S0 of π1P1/(π0P0) and max over S1 of π0P0/(π1P1).
    pub fn lrt_extremes(&self) -> (Option<f64>, Option<f64>) {
        let pi0 = self.model.pi0;
        let (mut a, mut b): (Option<f64>, Option<f64>) = (None, None);
        for i in 0..self.coef.len() {
            let r = (1.0 - pi0) * self.theta1[i] / (pi0 * self.theta0[i]);
            match self.class[i] {
                -1 => a = Some(a.map_or(r, |x| x.max(r))),
                1 => b = Some(b.map_or(1.0 / r, |x| x.max(1.0 / r))),
                _ => {}
            }
        }
        (a, b)
    }

    /// Minimise over the t grid and assemble the result.
    pub fn result(&self, m: Option<usize>) -> Result<BoundResult> {
        if self.s0 == 0.0 || self.s1 == 0.0 {
            return Err(Error::DegenerateOperatingPoint(
                "one of the decision sets is empty; the bound is undefined".into(),
            ));
        }
        let (t_star, pe21) = minimize_t(|t| self.pe21(t));
        let pi0 = self.model.pi0;
        let pe1 = self.pe11 + self.pe12;
        let pe2 = pe21 + self.pe22;
        Ok(BoundResult {
            scheme: self.model.scheme,
            te1_bar: pe1 / pi0,
            te2_bar: pe2 / (1.0 - pi0),
            pe11: self.pe11,
            pe12: self.pe12,
            pe21,
            pe22: self.pe22,
            pe1_bar: pe1,
            pe2_bar: pe2,
            pe_bar: pe1 + pe2,
            t_star,
            m,
            s0_size: self.s0,
            s1_size: self.s1,
        })
    }
}

/// Bound terms at a given t through the count-vector recursion.
pub fn aggregate_dp(model: &PairModel, t: f64) -> Result<BoundTerms> {
    Ok(BoundEvaluator::new(model.clone())?.terms(t))
}

/// Largest configuration count accepted by [`aggregate_direct`].
pub const DIRECT_LIMIT: usize = 1024;

/// Bound terms at a given t by brute force over every pair of full
/// configurations. Only for small networks.
pub fn aggregate_direct(model: &PairModel, t: f64) -> Result<BoundTerms> {
    let a = model.states.len();
    let total = (a as u128).pow(model.pairs as u32);
    if total > DIRECT_LIMIT as u128 {
        return domain(format!("{total} configurations exceed the enumeration limit"));
    }
    let total = total as usize;
    let pi0 = model.pi0;
    let pi1 = 1.0 - pi0;
    let decode = |mut x: usize| {
        let mut v = Vec::with_capacity(model.pairs);
        for _ in 0..model.pairs {
            v.push(x % a);
            x /= a;
        }
        v
    };
    let configs: Vec<Vec<usize>> = (0..total).map(decode).collect();
    let prob = |h: Hypothesis, x: &[usize]| x.iter().map(|&s| model.state_prob(h, s)).product::<f64>();
    let p0: Vec<f64> = configs.iter().map(|x| prob(Hypothesis::H0, x)).collect();
    let p1: Vec<f64> = configs.iter().map(|x| prob(Hypothesis::H1, x)).collect();
    let d: Vec<f64> = (0..total).map(|i| pi1 * p1[i] - pi0 * p0[i]).collect();
    let class: Vec<i8> = (0..total).map(|i| class_of(d[i], pi1 * p1[i] + pi0 * p0[i])).collect();
    let s0 = class.iter().filter(|c| **c == -1).count() as f64;
    let s1 = class.iter().filter(|c| **c == 1).count() as f64;
    let dprod = |c: f64, x: &[usize], y: &[usize]| {
        x.iter()
            .zip(y)
            .map(|(&s, &s1)| d_factor(c, model.gamma_h, &model.states[s].amps, &model.states[s1].amps))
            .product::<f64>()
    };
    let (mut pe11, mut pe21, mut pe12, mut pe22) = (0.0, 0.0, 0.0, 0.0);
    for x in 0..total {
        match class[x] {
            -1 => {
                pe22 += pi1 * p1[x];
                if s1 > 0.0 {
                    let inner: f64 = (0..total)
                        .filter(|&y| class[y] == 1)
                        .map(|y| (d[y] / -d[x]).sqrt() * dprod(0.25, &configs[x], &configs[y]))
                        .sum();
                    pe11 += pi0 * p0[x] * inner / (2.0 * s1.sqrt());
                }
            }
            1 => {
                pe12 += pi0 * p0[x];
                if s0 > 0.0 {
                    let inner: f64 = (0..total)
                        .filter(|&y| class[y] == -1)
                        .map(|y| (s0 * (-d[y]) / d[x]).powf(t) * dprod(t - t * t, &configs[x], &configs[y]))
                        .sum();
                    pe21 += pi1 * p1[x] * inner / s0;
                }
            }
            _ => {
                pe12 += pi0 * p0[x];
                pe22 += pi1 * p1[x];
            }
        }
    }
    Ok(BoundTerms { pe11, pe12, pe21, pe22, s0_size: s0, s1_size: s1 })
}

pub fn bound_parallel(op: &HomogeneousOperatingPoint) -> Result<BoundResult> {
    let m = super::find_m(op.pd, op.pf, op.pi0, op.k)?;
    BoundEvaluator::new(PairModel::parallel(op)?)?.result(Some(m))
}

pub fn bound_stc(op: &HomogeneousOperatingPoint) -> Result<BoundResult> {
    let m = super::find_m(op.pd, op.pf, op.pi0, op.k)?;
    BoundEvaluator::new(PairModel::stc(op)?)?.result(Some(m))
}

/// Fusion bound from an uncorrelated decision prior.
pub fn bound_fusion(op: &HomogeneousOperatingPoint, prior: &DecisionPrior) -> Result<BoundResult> {
    if prior.scheme != SchemeKind::Fusion {
        return Err(Error::Mismatch(format!("expected a fusion prior, got {}", prior.scheme)));
    }
    if prior.grid.len() != 1 {
        return Err(Error::Mismatch("fusion bound needs an uncorrelated prior".into()));
    }
    if prior.num_pairs() != op.num_pairs() {
        return Err(Error::Mismatch("prior and operating point differ in pair count".into()));
    }
    let tab = |h: Hypothesis| {
        let t = prior.table(h, 0, 0);
        [t[0], t[1], t[2], t[3]]
    };
    let tables = [tab(Hypothesis::H0), tab(Hypothesis::H1)];
    BoundEvaluator::new(PairModel::fusion(op, tables)?)?.result(None)
}

pub fn bound_threshold(op: &HomogeneousOperatingPoint, probs: &FourStateProbs) -> Result<BoundResult> {
    BoundEvaluator::new(PairModel::threshold(op, probs)?)?.result(None)
}

/// Pair model of any scheme at a homogeneous, uncorrelated point.
pub fn pair_model(scheme: SchemeKind, sensing: &SensingModel, net: &NetworkConfig) -> Result<PairModel> {
    let op = HomogeneousOperatingPoint::from_models(sensing, net)?;
    match scheme {
        SchemeKind::Parallel => PairModel::parallel(&op),
        SchemeKind::Stc => PairModel::stc(&op),
        SchemeKind::Fusion => {
            let tables = [Hypothesis::H0, Hypothesis::H1].map(|h| fusion_pair_table(sensing, net, 0, h));
            PairModel::fusion(&op, tables)
        }
        SchemeKind::Threshold => PairModel::threshold(&op, &FourStateProbs::from_models(sensing)?),
    }
}

/// Bound for any scheme, building the scheme-specific inputs in closed form.
pub fn bound(scheme: SchemeKind, sensing: &SensingModel, net: &NetworkConfig) -> Result<BoundResult> {
    let op = HomogeneousOperatingPoint::from_models(sensing, net)?;
    let m = match scheme {
        SchemeKind::Parallel | SchemeKind::Stc => Some(super::find_m(op.pd, op.pf, op.pi0, op.k)?),
        _ => None,
    };
    BoundEvaluator::new(pair_model(scheme, sensing, net)?)?.result(m)
}
