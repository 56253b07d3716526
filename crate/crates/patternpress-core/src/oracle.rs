//! Exact reference computations for patterns under known sources.
//!
//! [`pattern_log_prob_exact`] sums `Π_s p_{σ(s)}^{μ_s}` over all injective
//! assignments `σ` of pattern symbols to support atoms. Symbols with equal
//! multiplicity are interchangeable, so the sum is organized as a dynamic
//! program over support atoms whose state tracks only how many symbols of
//! each multiplicity class remain unassigned; the `k!/(k−m)!` raw terms
//! collapse to `k · Π_μ (φ_μ + 1)` DP cells.
//!
//! [`envelope_log_bound`] evaluates the multinomial upper bound
//! `p(ψ) ≤ Π_μ [μ!]^{φ_μ} φ_μ! / n!` — the reciprocal of the number of
//! patterns sharing a prevalence profile — which is the only handle on
//! `sup_p p(ψ)` that stays computable at scale.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::pattern::Pattern;
use crate::pattern::PrevalenceProfile;

/// Work guard for the exact-probability DP (cells × atoms × classes).
///
/// One DP cell update is an order of magnitude cheaper than one raw
/// falling-factorial product term, so this admits at least everything a
/// 10^7-term brute force would.
pub const MAX_ORACLE_WORK: u128 = 100_000_000;

/// Errors from oracle computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleError {
    /// The probability vector is not a distribution.
    InvalidDistribution { reason: &'static str },
    /// The exact computation exceeds the feasibility guard.
    TooLarge { work: u128, max: u128 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::InvalidDistribution { reason } => {
                write!(f, "invalid distribution: {reason}")
            }
            OracleError::TooLarge { work, max } => {
                write!(f, "exact computation needs ~{work} operations (guard {max})")
            }
        }
    }
}

impl core::error::Error for OracleError {}

/// A finite probability vector with support labeled `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    probs: Vec<f64>,
}

impl DiscreteDistribution {
    /// Validate a probability vector: entries finite and non-negative,
    /// summing to one within `1e-12`.
    pub fn new(probs: Vec<f64>) -> Result<Self, OracleError> {
        if probs.is_empty() {
            return Err(OracleError::InvalidDistribution { reason: "empty support" });
        }
        let mut total = 0.0;
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(OracleError::InvalidDistribution {
                    reason: "entries must be finite and non-negative",
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(OracleError::InvalidDistribution {
                reason: "entries must sum to 1",
            });
        }
        Ok(Self { probs })
    }

    /// Uniform distribution on `k` atoms.
    pub fn uniform(k: usize) -> Result<Self, OracleError> {
        if k == 0 {
            return Err(OracleError::InvalidDistribution { reason: "empty support" });
        }
        Ok(Self {
            probs: vec![1.0 / k as f64; k],
        })
    }

    /// Zipf law on `k` atoms: `p_i ∝ i^{-s}`.
    pub fn zipf(s: f64, k: usize) -> Result<Self, OracleError> {
        if k == 0 {
            return Err(OracleError::InvalidDistribution { reason: "empty support" });
        }
        if !s.is_finite() || s < 0.0 {
            return Err(OracleError::InvalidDistribution {
                reason: "zipf exponent must be finite and >= 0",
            });
        }
        let mut probs: Vec<f64> = (1..=k).map(|i| libm::pow(i as f64, -s)).collect();
        let z: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= z;
        }
        Ok(Self { probs })
    }

    /// Geometric law `p_i = (1−r)·r^{i−1}` truncated where the tail drops
    /// below `1e-13`.
    pub fn geometric_truncated(r: f64) -> Result<Self, OracleError> {
        if !r.is_finite() || !(0.0..1.0).contains(&r) || r == 0.0 {
            return Err(OracleError::InvalidDistribution {
                reason: "geometric ratio must lie in (0, 1)",
            });
        }
        let k = libm::ceil(math::ln(1e-13) / math::ln(r)) as usize;
        if k > 100_000 {
            return Err(OracleError::InvalidDistribution {
                reason: "geometric ratio too close to 1 for truncation",
            });
        }
        let probs: Vec<f64> = (0..k.max(1)).map(|i| (1.0 - r) * libm::pow(r, i as f64)).collect();
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Support size `k`.
    pub fn support(&self) -> usize {
        self.probs.len()
    }

    /// Shannon entropy in nats.
    pub fn entropy_nats(&self) -> f64 {
        let mut h = 0.0;
        for &p in &self.probs {
            if p > 0.0 {
                h -= p * math::ln(p);
            }
        }
        h
    }
}

/// Natural log of the probability that an i.i.d. sample from `dist` has the
/// given pattern; `NEG_INFINITY` when the pattern needs more distinct atoms
/// than the support offers.
pub fn pattern_log_prob_exact(
    dist: &DiscreteDistribution,
    pattern: &Pattern,
) -> Result<f64, OracleError> {
    pattern_log_prob_exact_profile(dist, &pattern.profile())
}

/// [`pattern_log_prob_exact`] taking the prevalence profile directly
/// (patterns with equal profiles have equal probabilities).
pub fn pattern_log_prob_exact_profile(
    dist: &DiscreteDistribution,
    profile: &PrevalenceProfile,
) -> Result<f64, OracleError> {
    let k = dist.support();
    let m = profile.m();
    if m == 0 {
        return Ok(0.0);
    }
    if m > k as u64 {
        return Ok(f64::NEG_INFINITY);
    }

    // Multiplicity classes: (μ, φ_μ) plus a mixed-radix layout of the
    // remaining-count state space.
    let classes: Vec<(u64, u64)> = profile.iter().collect();
    let mut strides: Vec<usize> = Vec::with_capacity(classes.len());
    let mut cells: u128 = 1;
    for &(_, phi) in &classes {
        strides.push(cells as usize);
        cells = cells.saturating_mul(phi as u128 + 1);
        if cells > MAX_ORACLE_WORK {
            return Err(OracleError::TooLarge {
                work: cells,
                max: MAX_ORACLE_WORK,
            });
        }
    }
    let work = cells * k as u128 * (classes.len() as u128 + 1);
    if work > MAX_ORACLE_WORK {
        return Err(OracleError::TooLarge {
            work,
            max: MAX_ORACLE_WORK,
        });
    }

    let cells = cells as usize;
    let full = cells - 1; // all remaining counts at φ_v
    let mut dp = vec![f64::NEG_INFINITY; cells];
    let mut next = vec![f64::NEG_INFINITY; cells];
    dp[full] = 0.0;
    for &p in dist.probs() {
        let ln_p = math::ln(p);
        for cell in next.iter_mut() {
            *cell = f64::NEG_INFINITY;
        }
        for s in 0..cells {
            let v = dp[s];
            if v == f64::NEG_INFINITY {
                continue;
            }
            // Atom left unused.
            next[s] = math::log_sum_exp_pair(next[s], v);
            if ln_p == f64::NEG_INFINITY {
                continue;
            }
            // Atom assigned to one remaining symbol of some class.
            for (c, &(mu, phi)) in classes.iter().enumerate() {
                let remaining = (s / strides[c]) % (phi as usize + 1);
                if remaining > 0 {
                    let t = s - strides[c];
                    next[t] = math::log_sum_exp_pair(next[t], v + mu as f64 * ln_p);
                }
            }
        }
        core::mem::swap(&mut dp, &mut next);
    }

    // Symbols within a class are distinct, so each unordered atom set
    // counted by the DP corresponds to φ_v! injective assignments.
    let orderings: f64 = classes
        .iter()
        .map(|&(_, phi)| math::ln_factorial(phi))
        .sum();
    Ok(dp[0] + orderings)
}

/// Probability (linear scale) that an i.i.d. sample from `dist` has the
/// given pattern. Underflows to `0.0` for long patterns; use
/// [`pattern_log_prob_exact`] when the magnitude matters.
pub fn pattern_prob_exact(
    dist: &DiscreteDistribution,
    pattern: &Pattern,
) -> Result<f64, OracleError> {
    pattern_log_prob_exact(dist, pattern).map(math::exp)
}

/// The multinomial envelope bound on a pattern's probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeBound {
    /// `ln ( Π_μ [μ!]^{φ_μ} φ_μ! / n! ) ≤ 0`.
    pub log_bound: f64,
}

/// Evaluate the envelope bound for a prevalence profile.
///
/// No distribution can give any pattern with this profile more probability
/// than `exp(log_bound)`, since all such patterns are equiprobable and there
/// are `n! / (Π_μ [μ!]^{φ_μ} φ_μ!)` of them.
pub fn envelope_log_bound(profile: &PrevalenceProfile) -> EnvelopeBound {
    let mut lb = -math::ln_factorial(profile.n());
    for (mu, phi) in profile.iter() {
        lb += phi as f64 * math::ln_factorial(mu) + math::ln_factorial(phi);
    }
    EnvelopeBound {
        log_bound: lb.min(0.0),
    }
}
