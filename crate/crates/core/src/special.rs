//! Scalar special functions used throughout: Gaussian tails, log-domain
//! accumulation and binomial terms.

use statrs::function::erf::erfc;
use statrs::function::factorial::ln_binomial;
use std::f64::consts::{PI, SQRT_2};

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
pub fn q(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    q(-x)
}

/// ln Q(x), accurate far into the upper tail where Q underflows.
pub fn log_q(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 25.0 {
        return q(x).ln();
    }
    // Asymptotic series; truncation error ~ 945/x^10 at the switch point.
    let x2 = x * x;
    let inv = 1.0 / x2;
    let series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv.powi(3) + 105.0 * inv.powi(4);
    -0.5 * x2 - (x * (2.0 * PI).sqrt()).ln() + series.ln()
}

/// ln Φ(x).
pub fn log_phi(x: f64) -> f64 {
    log_q(-x)
}

/// P(a < N(m, s²) ≤ b), evaluated on the tail that keeps precision.
pub fn normal_interval(a: f64, b: f64, m: f64, s: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let za = (a - m) / s;
    let zb = (b - m) / s;
    let p = if za > 0.0 { q(za) - q(zb) } else { phi(zb) - phi(za) };
    p.max(0.0)
}

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln Σ e^{v_i}; −∞ for an empty slice.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m.is_nan() {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ln(π₁ a − π₀ b)-style magnitude: ln|e^x − e^y|, −∞ when equal.
pub fn log_abs_diff_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x > y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (-(lo - hi).exp()).ln_1p()
}

/// Binomial probability C(n,k) p^k (1-p)^(n-k), in log domain internally.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    (ln_binomial(n, k) + k as f64 * p.ln() + (n - k) as f64 * (-p).ln_1p()).exp()
}

/// ln of p^k (1-p)^(n-k) with the 0·ln 0 = 0 convention.
pub fn ln_bernoulli_product(p: f64, ones: usize, zeros: usize) -> f64 {
    xlny(ones as f64, p) + xlny(zeros as f64, 1.0 - p)
}

/// x·ln y with 0·ln 0 = 0.
pub fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
