//! Per-pattern redundancy and worst-case bound evaluators.
//!
//! The redundancy of an estimator `q` on a pattern is `sup_p ln p(ψ)/q(ψ)`.
//! The supremum over all discrete sources is intractable in general, so
//! reports use the multinomial envelope of [`crate::oracle`] as an upper
//! proxy for `sup_p ln p(ψ)`: reported redundancies are conservative, never
//! understated. All bounds are evaluated in nats.

use core::fmt;

use crate::estimators::{py_log_prob, Estimator, PyParams};
use crate::math;
use crate::oracle::envelope_log_bound;
use crate::pattern::{Pattern, PrevalenceProfile};

/// Errors from bound evaluators with restricted domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedundancyError {
    Domain { reason: &'static str },
}

impl fmt::Display for RedundancyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RedundancyError::Domain { reason } => write!(f, "domain error: {reason}"),
        }
    }
}

impl core::error::Error for RedundancyError {}

/// Redundancy of one estimator on one pattern, with the matching theorem
/// bound when one applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RedundancyReport {
    pub n: u64,
    pub m: u64,
    /// Envelope upper proxy for `sup_p ln p(ψ)`.
    pub ln_p_upper: f64,
    /// Estimator log-probability `ln q(ψ)`.
    pub ln_q: f64,
    /// `ln_p_upper − ln_q`, in nats.
    pub redundancy_nats: f64,
    /// Worst-case theorem bound for this estimator family, when defined
    /// (CRP: the staircase bound for `n ≥ 16`; Pitman–Yor: the five-term
    /// upper bound; mixtures: none).
    pub bound_nats: Option<f64>,
    /// `redundancy_nats / n` (zero for the empty pattern).
    pub per_symbol: f64,
}

/// Compute the redundancy report for `estimator` on `pattern`.
pub fn pattern_redundancy(estimator: &Estimator, pattern: &Pattern) -> RedundancyReport {
    let profile = pattern.profile();
    pattern_redundancy_profile(estimator, &profile)
}

/// [`pattern_redundancy`] from a prevalence profile.
pub fn pattern_redundancy_profile(
    estimator: &Estimator,
    profile: &PrevalenceProfile,
) -> RedundancyReport {
    let n = profile.n();
    let m = profile.m();
    let ln_p_upper = envelope_log_bound(profile).log_bound;
    let ln_q = estimator.log_prob_profile(profile);
    let redundancy_nats = ln_p_upper - ln_q;
    let bound_nats = match estimator {
        Estimator::Crp(_) => crp_bound_partialred(n, m).ok(),
        Estimator::Py(p) => py_bound_upper(n, m, p.alpha(), p.theta()).ok(),
        Estimator::Mixture(_) => None,
    };
    RedundancyReport {
        n,
        m,
        ln_p_upper,
        ln_q,
        redundancy_nats,
        bound_nats,
        per_symbol: if n == 0 {
            0.0
        } else {
            redundancy_nats / n as f64
        },
    }
}

/// Three-term worst-case redundancy bound for the CRP estimator with
/// `θ = m / ln n`:
///
/// `m·ln(n/m) + m·ln ln n + (m/ln n)·ln(2 + n·ln n/m)` nats.
///
/// The bound is monotone in `m` only from `n = 16` on, so smaller lengths
/// are a domain error.
pub fn crp_bound_partialred(n: u64, m: u64) -> Result<f64, RedundancyError> {
    if n < 16 {
        return Err(RedundancyError::Domain { reason: "bound requires n >= 16" });
    }
    if m < 1 || m > n {
        return Err(RedundancyError::Domain { reason: "requires 1 <= m <= n" });
    }
    let nf = n as f64;
    let mf = m as f64;
    let ln_n = math::ln(nf);
    Ok(mf * math::ln(nf / mf)
        + mf * math::ln(ln_n)
        + (mf / ln_n) * math::ln(2.0 + nf * ln_n / mf))
}

/// Five-term worst-case redundancy bound for the Pitman–Yor estimator:
///
/// `2m·ln(n/m) + (m−2)·ln(1/((1−α)α)) + θ̄·ln((θ̄+n)e/θ̄)
///  + ln(m²/(θ+α)) + ln(1/(1−α)²)` nats, with `θ̄ = max(1, ⌈θ⌉)`.
///
/// (`θ̄` is floored at one so the Stirling term stays finite for the
/// admissible strengths `θ ∈ (−α, 1)`; the intended choice `θ = m/ln n` is
/// positive anyway.)
pub fn py_bound_upper(n: u64, m: u64, alpha: f64, theta: f64) -> Result<f64, RedundancyError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RedundancyError::Domain { reason: "requires 0 < alpha < 1" });
    }
    if theta + alpha <= 0.0 {
        return Err(RedundancyError::Domain { reason: "requires theta + alpha > 0" });
    }
    if m < 1 || m > n {
        return Err(RedundancyError::Domain { reason: "requires 1 <= m <= n" });
    }
    let nf = n as f64;
    let mf = m as f64;
    let tb = libm::ceil(theta).max(1.0);
    Ok(2.0 * mf * math::ln(nf / mf)
        + (mf - 2.0) * math::ln(1.0 / ((1.0 - alpha) * alpha))
        + tb * math::ln((tb + nf) * core::f64::consts::E / tb)
        + math::ln(mf * mf / (theta + alpha))
        + math::ln(1.0 / ((1.0 - alpha) * (1.0 - alpha))))
}

/// Code lengths (nats) the Pitman–Yor estimator assigns to the two linear
/// lower-bound witness patterns: `(−ln q(11⋯1), −ln q(12⋯n))`.
///
/// Their sum is at least `(n−1)·ln(1/max{1/2, α})`, which is the mechanism
/// behind the Θ(n) redundancy of the family.
pub fn py_linear_witnesses(params: &PyParams, n: u64) -> (f64, f64) {
    let ones = PrevalenceProfile::from_counts([(n, 1)]);
    let distinct = PrevalenceProfile::from_counts([(1, n)]);
    (
        -py_log_prob(params, &ones),
        -py_log_prob(params, &distinct),
    )
}

/// Check the per-term product inequality
/// `(j−α)(θ+jα)/(θ+j)² ≤ max{1/2, α}` (with `1e−12` slack) for `j ≥ 1`,
/// `0 < α < 1`, `α + θ > 0`.
pub fn claim_inequality_check(j: u64, alpha: f64, theta: f64) -> Result<bool, RedundancyError> {
    if j < 1 {
        return Err(RedundancyError::Domain { reason: "requires j >= 1" });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RedundancyError::Domain { reason: "requires 0 < alpha < 1" });
    }
    if alpha + theta <= 0.0 {
        return Err(RedundancyError::Domain { reason: "requires alpha + theta > 0" });
    }
    let jf = j as f64;
    let lhs = (jf - alpha) * (theta + jf * alpha) / ((theta + jf) * (theta + jf));
    Ok(lhs <= alpha.max(0.5) + 1e-12)
}

/// Bound on the expected number of distinct symbols in a length-`n` i.i.d.
/// sample from a source with entropy `H` nats: `E[M_n] ≤ nH/ln n + 1`.
pub fn expected_distinct_bound(entropy_nats: f64, n: u64) -> f64 {
    debug_assert!(entropy_nats >= 0.0 && n >= 2);
    n as f64 * entropy_nats / math::ln(n as f64) + 1.0
}

/// Markov-inequality tail bound on the distinct-symbol count:
/// `P(M_n > n(ln ln n)²/ln n) ≤ H/(ln ln n)² + ln n/(n (ln ln n)²)`.
///
/// Meaningful for `n ≥ 16` (where `ln ln n ≥ 1`).
pub fn markov_distinct_tail(entropy_nats: f64, n: u64) -> f64 {
    debug_assert!(entropy_nats >= 0.0 && n >= 16);
    let ln_n = math::ln(n as f64);
    let lll2 = math::ln(ln_n) * math::ln(ln_n);
    entropy_nats / lll2 + ln_n / (n as f64 * lll2)
}

/// The sorted-sequence mean inequality: for two sequences sorted in the same
/// (non-increasing) direction, `(1/n)Σ x_l y_l ≥ (mean x)(mean y)`, checked
/// with `1e−12` slack.
pub fn chebyshev_sum_check(x: &[f64], y: &[f64]) -> Result<bool, RedundancyError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(RedundancyError::Domain { reason: "requires equal non-empty lengths" });
    }
    for seq in [x, y] {
        for w in seq.windows(2) {
            if w[1] > w[0] {
                return Err(RedundancyError::Domain { reason: "sequences must be non-increasing" });
            }
        }
        if seq[seq.len() - 1] < 0.0 {
            return Err(RedundancyError::Domain { reason: "entries must be non-negative" });
        }
    }
    let n = x.len() as f64;
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let mx: f64 = x.iter().sum::<f64>() / n;
    let my: f64 = y.iter().sum::<f64>() / n;
    Ok(dot / n >= mx * my - 1e-12)
}
