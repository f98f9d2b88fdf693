//! Degree laws, connectivity thresholds and the component-size bound.
//!
//! Exact quantities are generic over [`Scalar`]; the fair negative binomial
//! `X_k` (blue draws before the `k`-th red, `p = 1/2`) drives all of them.
//! Logarithms are natural.

use num_traits::{Float, FloatConst};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{ensure_param, Result};
use crate::scalar::{binomial, falling, inv_pow, Scalar};
use crate::Exact;

/// Largest `k` for which the real-valued evaluators go through exact rationals.
pub const EXACT_K_MAX: u64 = 64;

/// Largest preference budget the Erlang quadrature accepts.
pub const ERLANG_K_MAX: u64 = 30;

/// `P{X_k = j} = C(k+j-1, j) 2^-(k+j)`.
pub fn negbin_pmf<T: Scalar>(k: u64, j: u64) -> Result<T> {
    ensure_param!(k >= 1, "k must be positive");
    Ok(binomial::<T>(k + j - 1, j) * inv_pow::<T>(2, k + j))
}

/// `P{X_k < k}`, which is exactly one half.
pub fn negbin_half_sum<T: Scalar>(k: u64) -> Result<T> {
    (0..k).try_fold(T::zero(), |acc, j| Ok(acc + negbin_pmf::<T>(k, j)?))
}

// (2k-1) C(2k-2, k-1) 2^-(2k-1)
fn central_term<T: Scalar>(k: u64) -> T {
    T::from_count(2 * k - 1) * binomial::<T>(2 * k - 2, k - 1) * inv_pow::<T>(2, 2 * k - 1)
}

/// `E{X_k 1[X_k < k]}` in closed form: `k/2 - (2k-1) C(2k-2,k-1) 2^-(2k-1)`.
pub fn negbin_partial_mean<T: Scalar>(k: u64) -> Result<T> {
    ensure_param!(k >= 1, "k must be positive");
    Ok(T::from_count(k) / T::from_count(2) - central_term::<T>(k))
}

/// Limiting mean degree `k - (2k-1) C(2k-2,k-1) 2^-(2k-1)` in any scalar.
pub fn mean_degree_limit_as<T: Scalar>(k: u64) -> Result<T> {
    ensure_param!(k >= 1, "k must be positive");
    Ok(T::from_count(k) - central_term::<T>(k))
}

/// Exact limiting mean degree.
pub fn mean_degree_limit_exact(k: u64) -> Result<Exact> {
    mean_degree_limit_as::<Exact>(k)
}

/// Limiting mean degree as a float; exact arithmetic up to [`EXACT_K_MAX`],
/// log-gamma above.
pub fn mean_degree_limit(k: u64) -> Result<f64> {
    ensure_param!(k >= 1, "k must be positive");
    if k <= EXACT_K_MAX {
        return Ok(mean_degree_limit_exact(k)?.to_real());
    }
    let kf = k as f64;
    let ln_central = ln_gamma(2.0 * kf - 1.0) - 2.0 * ln_gamma(kf);
    let ln_term = (2.0 * kf - 1.0).ln() + ln_central - (2.0 * kf - 1.0) * std::f64::consts::LN_2;
    Ok(kf - ln_term.exp())
}

/// Limiting probability that a vertex is joined to its `i`-th favourite:
/// `1 - sum_{j<i} P{X_k = j}`; zero for ranks beyond `k`.
pub fn conn_prob_by_rank<T: Scalar>(i: u64, k: u64) -> Result<T> {
    ensure_param!(k >= 1, "k must be positive");
    ensure_param!(i >= 1, "ranks start at 1");
    if i > k {
        return Ok(T::zero());
    }
    (0..i).try_fold(T::one(), |acc, j| Ok(acc - negbin_pmf::<T>(k, j)?))
}

/// Probability that a vertex is joined to its `r`-th favourite in `G(n, k)`
/// at finite `n`. The shared score is the `r`-th largest of `n - 1`
/// uniforms and the favourite reciprocates iff fewer than `k` of its other
/// `n - 2` scores beat it, giving
/// `sum_{j<k} C(n-2, j) B(r+j, 2n-r-2-j) / B(r, n-r)`.
pub fn conn_prob_by_rank_finite<T: Scalar>(n: u64, r: u64, k: u64) -> Result<T> {
    ensure_param!(
        n >= 2 && k >= 1 && k < n,
        "need 1 <= k < n (n = {n}, k = {k})"
    );
    ensure_param!(r >= 1, "ranks start at 1");
    if r > k {
        return Ok(T::zero());
    }
    let norm = falling::<T>(2 * n - 3, n - 2);
    Ok((0..k).fold(T::zero(), |acc, j| {
        let rising = falling::<T>(r + j - 1, j);
        let rest = falling::<T>(2 * n - r - 3 - j, n - 2 - j);
        acc + binomial::<T>(n - 2, j) * rising * rest / norm.clone()
    }))
}

/// Expected degree of a vertex of `G(n, k)` at finite `n`, exactly.
pub fn mean_degree_finite_as<T: Scalar>(n: u64, k: u64) -> Result<T> {
    (1..=k).try_fold(T::zero(), |acc, r| {
        Ok(acc + conn_prob_by_rank_finite::<T>(n, r, k)?)
    })
}

/// Finite-`n` counterpart of [`mean_degree_limit`]; exact rationals for small
/// `n`, log-gamma terms otherwise.
pub fn mean_degree_finite(n: u64, k: u64) -> Result<f64> {
    ensure_param!(
        n >= 2 && k >= 1 && k < n,
        "need 1 <= k < n (n = {n}, k = {k})"
    );
    if n <= 300 && k <= EXACT_K_MAX {
        return Ok(mean_degree_finite_as::<Exact>(n, k)?.to_real());
    }
    let lg = |x: u64| ln_gamma(x as f64);
    let ln_norm = lg(2 * n - 2) - lg(n);
    let mut total = 0.0;
    for r in 1..=k {
        for j in 0..k {
            let ln_binom = lg(n - 1) - lg(j + 1) - lg(n - 1 - j);
            let ln_rising = lg(r + j) - lg(r);
            let ln_rest = lg(2 * n - r - 2 - j) - lg(n - r);
            total += (ln_binom + ln_rising + ln_rest - ln_norm).exp();
        }
    }
    Ok(total)
}

/// Large-`k` expansion `k - sqrt(k/pi) + 1/(8 sqrt(pi k))`; poor for small `k`.
pub fn mean_degree_asymptotic<F: Float + FloatConst>(k: u64) -> F {
    let k = F::from(k).expect("k as float");
    let eight = F::from(8.0).unwrap();
    k - (k / F::PI()).sqrt() + F::one() / (eight * (F::PI() * k).sqrt())
}

/// Erlang(k, 1) survival function `e^-x sum_{i<k} x^i / i!`.
pub fn erlang_ccdf(k: u64, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut acc = 0.0;
    for i in 0..k {
        acc += term;
        term *= x / (i + 1) as f64;
    }
    acc
}

/// `∫_0^∞ F̄_k(x)^2 dx` by double-exponential quadrature, truncated where the
/// integrand drops below 1e-16.
pub fn erlang_integral_mean_degree(k: u64) -> Result<f64> {
    ensure_param!(
        (1..=ERLANG_K_MAX).contains(&k),
        "k must lie in 1..={ERLANG_K_MAX} for the quadrature"
    );
    let integrand = |x: f64| erlang_ccdf(k, x).powi(2);
    let mut upper = k as f64;
    while integrand(upper) >= 1e-16 {
        upper += 1.0;
    }
    // split at the mode of the Erlang density, where the integrand bends
    let mid = (k - 1) as f64;
    let mut total = 0.0;
    let mut lo = 0.0;
    for hi in [mid, upper] {
        if hi > lo {
            total += quadrature::integrate(integrand, lo, hi, 1e-13).integral;
            lo = hi;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdParams {
    /// Multiplier in `k = t log n`.
    pub t: f64,
    /// Multiplier in `k = log n + t' loglog n sqrt(log n)`.
    pub t_prime: f64,
    pub delta: f64,
}

impl ThresholdParams {
    pub fn new(t: f64, t_prime: f64, delta: f64) -> Result<Self> {
        ensure_param!(t > 0.0, "t must be positive");
        ensure_param!(t_prime.is_finite(), "t' must be finite");
        ensure_param!(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
        Ok(ThresholdParams { t, t_prime, delta })
    }

    pub fn with_t(t: f64) -> Result<Self> {
        Self::new(t, 0.0, 0.5)
    }

    pub fn with_t_prime(t_prime: f64) -> Result<Self> {
        Self::new(1.0, t_prime, 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ThresholdForm {
    /// `⌊t log n⌋`
    T,
    /// `⌊log n + t' loglog n sqrt(log n)⌋`
    TPrime,
    /// `⌊log n - 3 sqrt(log n loglog n)⌋`
    Disconnection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThresholdK {
    pub k: u64,
    /// The raw floor was below 1 and has been raised to 1.
    pub clamped: bool,
}

pub fn threshold_k(n: u64, params: &ThresholdParams, form: ThresholdForm) -> Result<ThresholdK> {
    ensure_param!(n >= 16, "threshold curves need n >= 16 (got {n})");
    let ln = (n as f64).ln();
    let lnln = ln.ln();
    let raw = match form {
        ThresholdForm::T => params.t * ln,
        ThresholdForm::TPrime => ln + params.t_prime * lnln * ln.sqrt(),
        ThresholdForm::Disconnection => ln - 3.0 * (ln * lnln).sqrt(),
    }
    .floor();
    if raw < 1.0 {
        log::warn!("threshold k = {raw} for n = {n} clamped to 1");
        return Ok(ThresholdK {
            k: 1,
            clamped: true,
        });
    }
    Ok(ThresholdK {
        k: raw as u64,
        clamped: false,
    })
}

/// `ln e^{-k(1+δ)}`; see [`isolated_prob_lower_bound`].
pub fn ln_isolated_prob_lower_bound(k: u64, delta: f64) -> Result<f64> {
    ensure_param!(k >= 2, "k must be at least 2");
    let kf = k as f64;
    let lo = (6.0 * kf.ln() / kf).sqrt();
    ensure_param!(
        delta >= lo && delta < 1.0,
        "delta must lie in [{lo}, 1) for k = {k}"
    );
    Ok(-kf * (1.0 + delta))
}

/// Exponential factor `e^{-k(1+δ)}` of the isolation lower bound. The bound
/// holds only up to an unspecified constant; use for diagnostics.
pub fn isolated_prob_lower_bound(k: u64, delta: f64) -> Result<f64> {
    Ok(ln_isolated_prob_lower_bound(k, delta)?.exp())
}

/// Concentration window for the `k`-th largest Exponential(1) score with
/// `k = t log n`, and the edge probabilities at its two ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnWindow<F> {
    pub lower: F,
    pub upper: F,
    /// `P{V > upper}`
    pub p_bar: F,
    /// `P{V > lower}`
    pub p_underbar: F,
}

pub fn an_window<F: Float + FloatConst>(n: u64, t: F) -> Result<AnWindow<F>> {
    ensure_param!(n >= 3, "n must be at least 3");
    ensure_param!(t > F::zero(), "t must be positive");
    let n1 = F::from(n - 1).unwrap();
    let tl = t * F::from(n).unwrap().ln();
    ensure_param!(tl < n1, "need t log n < n - 1");
    let sqrt2 = F::SQRT_2();
    let center = (n1 / tl).ln();
    Ok(AnWindow {
        lower: center - sqrt2,
        upper: center + sqrt2,
        p_bar: tl / n1 * (-sqrt2).exp(),
        p_underbar: tl / n1 * sqrt2.exp(),
    })
}

/// Smallest component size covered by the bound.
pub fn component_bound_start(t: f64) -> u64 {
    (8.24 / t).ceil() as u64
}

fn ln_binomial(n: u64, r: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(r as f64 + 1.0) - ln_gamma((n - r) as f64 + 1.0)
}

/// Log of each term `C(n,r) r^(r-2) p̲^(r-1) (1-p̄)^(r(n-r))` for
/// `⌈8.24/t⌉ <= r <= ⌊n/2⌋`.
pub fn component_bound_terms_ln(n: u64, t: f64) -> Result<Vec<(u64, f64)>> {
    ensure_param!(n >= 100, "n must be at least 100");
    let w = an_window::<f64>(n, t)?;
    let ln_pu = w.p_underbar.ln();
    let ln_q = (-w.p_bar).ln_1p();
    Ok((component_bound_start(t).max(1)..=n / 2)
        .map(|r| {
            let rf = r as f64;
            let ln_tree = if r >= 2 { (rf - 2.0) * rf.ln() } else { 0.0 };
            let lt = ln_binomial(n, r) + ln_tree + (rf - 1.0) * ln_pu + rf * (n - r) as f64 * ln_q;
            (r, lt)
        })
        .collect())
}

/// Log of the component-size bound, summed by log-sum-exp.
pub fn component_bound_pi_ln(n: u64, t: f64) -> Result<f64> {
    let terms = component_bound_terms_ln(n, t)?;
    let max = terms
        .iter()
        .map(|&(_, l)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(max);
    }
    let sum: f64 = terms.iter().map(|&(_, l)| (l - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Component-size bound `Π`; `+∞` when any term's log exceeds 700.
pub fn component_bound_pi(n: u64, t: f64) -> Result<f64> {
    let terms = component_bound_terms_ln(n, t)?;
    if terms.iter().any(|&(_, l)| l > 700.0) {
        return Ok(f64::INFINITY);
    }
    Ok(component_bound_pi_ln(n, t)?.exp())
}
