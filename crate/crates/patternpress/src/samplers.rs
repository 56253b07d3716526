//! Synthetic data sources: i.i.d. samples from finite and structured
//! distributions, GEM / Pitman–Yor stick-breaking weights, and sequentially
//! sampled CRP / Pitman–Yor patterns.
//!
//! Everything is deterministic given a seed. Parallel drivers derive one
//! seed per trial index with [`derive_seed`], so results are independent of
//! thread count.

use patternpress_core::estimators::{CrpParams, Estimator, PyParams};
use patternpress_core::oracle::DiscreteDistribution;
use patternpress_core::pattern::{extract_pattern, Pattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use std::fmt;
use std::str::FromStr;

use crate::Error;

/// Mix a base seed with a trial index (splitmix64 finalizer). Distinct
/// trials get statistically independent streams.
pub fn derive_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(trial.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A truncated stick-breaking draw: the first `T` stick masses plus the
/// unbroken residual, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct StickBreakingWeights {
    pub weights: Vec<f64>,
    pub residual: f64,
}

impl StickBreakingWeights {
    /// `Σ weights + residual` (should be 1 up to rounding).
    pub fn total(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.residual
    }
}

/// GEM(θ) stick-breaking: break off a `Beta(1, θ)` fraction of the
/// remaining stick, `T` times.
pub fn gem_weights(theta: f64, t: usize, seed: u64) -> Result<StickBreakingWeights, Error> {
    let params = CrpParams::new(theta)?;
    let mut rng = rng_for(seed);
    Ok(stick_break(&mut rng, t, |_| {
        Beta::new(1.0, params.theta()).expect("valid Beta parameters")
    }))
}

/// Pitman–Yor stick-breaking: the `i`-th stick fraction is drawn from
/// `Beta(1−α, θ+iα)`.
pub fn py_weights(
    alpha: f64,
    theta: f64,
    t: usize,
    seed: u64,
) -> Result<StickBreakingWeights, Error> {
    let params = PyParams::new(alpha, theta)?;
    let mut rng = rng_for(seed);
    Ok(stick_break(&mut rng, t, |i| {
        Beta::new(
            1.0 - params.alpha(),
            params.theta() + i as f64 * params.alpha(),
        )
        .expect("valid Beta parameters")
    }))
}

fn stick_break<F>(rng: &mut ChaCha8Rng, t: usize, beta_for: F) -> StickBreakingWeights
where
    F: Fn(usize) -> Beta<f64>,
{
    let mut weights = Vec::with_capacity(t);
    let mut remaining = 1.0f64;
    for i in 1..=t {
        let w: f64 = beta_for(i).sample(rng);
        weights.push(w * remaining);
        remaining *= 1.0 - w;
    }
    StickBreakingWeights {
        weights,
        residual: remaining.max(0.0),
    }
}

/// Draw `n` i.i.d. tokens (labels `1..=k`) from a finite distribution.
pub fn sample_iid(dist: &DiscreteDistribution, n: usize, seed: u64) -> Vec<u32> {
    let mut rng = rng_for(seed);
    let cum = cumulative(dist.probs());
    (0..n).map(|_| draw_from_cum(&cum, &mut rng) as u32 + 1).collect()
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut cum = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cum.push(acc);
    }
    cum
}

fn draw_from_cum(cum: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

/// Sample a pattern directly from a CRP or Pitman–Yor predictive chain.
///
/// Mixtures have no generative chain (the truncated weights are a
/// sub-probability) and are rejected.
pub fn sample_partition(estimator: &Estimator, n: usize, seed: u64) -> Result<Pattern, Error> {
    let (alpha, theta) = match estimator {
        Estimator::Crp(p) => (0.0, p.theta()),
        Estimator::Py(p) => (p.alpha(), p.theta()),
        Estimator::Mixture(_) => {
            return Err(Error::Unsupported("cannot sample from a mixture estimator"))
        }
    };
    let mut rng = rng_for(seed);
    Ok(sample_partition_with(&mut rng, alpha, theta, n))
}

fn sample_partition_with(rng: &mut ChaCha8Rng, alpha: f64, theta: f64, n: usize) -> Pattern {
    let mut symbols: Vec<u32> = Vec::with_capacity(n);
    let mut counts: Vec<u64> = Vec::new();
    for t in 0..n {
        let m = counts.len() as f64;
        let new = if t == 0 {
            true
        } else {
            let x = rng.random::<f64>() * (t as f64 + theta);
            if x < theta + m * alpha {
                true
            } else {
                // Walk the seen symbols, each with mass μ_s − α.
                let mut target = x - (theta + m * alpha);
                let mut chosen = counts.len() - 1;
                for (i, &c) in counts.iter().enumerate() {
                    target -= c as f64 - alpha;
                    if target < 0.0 {
                        chosen = i;
                        break;
                    }
                }
                counts[chosen] += 1;
                symbols.push(chosen as u32 + 1);
                false
            }
        };
        if new {
            counts.push(1);
            symbols.push(counts.len() as u32);
        }
    }
    Pattern::from_symbols(symbols).expect("sampled sequence is a valid pattern")
}

/// A data source for simulation and redundancy experiments.
///
/// Text forms: `uniform:k`, `zipf:s:k`, `geometric:r`,
/// `dirichlet-stick:theta:T`, `py-stick:alpha:theta:T`, `crp:theta`,
/// `py:alpha:theta`.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Uniform { k: usize },
    Zipf { s: f64, k: usize },
    Geometric { r: f64 },
    DirichletStick { theta: f64, t: usize },
    PyStick { alpha: f64, theta: f64, t: usize },
    Crp { theta: f64 },
    Py { alpha: f64, theta: f64 },
}

impl Source {
    /// Sample one pattern of length `n`.
    pub fn sample_pattern(&self, n: usize, seed: u64) -> Result<Pattern, Error> {
        match self {
            Source::Crp { theta } => {
                CrpParams::new(*theta)?;
                let mut rng = rng_for(seed);
                Ok(sample_partition_with(&mut rng, 0.0, *theta, n))
            }
            Source::Py { alpha, theta } => {
                PyParams::new(*alpha, *theta)?;
                let mut rng = rng_for(seed);
                Ok(sample_partition_with(&mut rng, *alpha, *theta, n))
            }
            _ => Ok(extract_pattern(self.sample_tokens(n, seed)?)),
        }
    }

    /// Sample `n` i.i.d. tokens. Only defined for i.i.d.-style sources
    /// (everything except `crp:`/`py:`, whose output is a pattern).
    pub fn sample_tokens(&self, n: usize, seed: u64) -> Result<Vec<u64>, Error> {
        let mut rng = rng_for(seed);
        match self {
            Source::Uniform { k } => {
                check_support(*k)?;
                let k = *k as u64;
                Ok((0..n).map(|_| rng.random_range(0..k) + 1).collect())
            }
            Source::Zipf { s, k } => {
                let dist = DiscreteDistribution::zipf(*s, *k)?;
                let cum = cumulative(dist.probs());
                Ok((0..n)
                    .map(|_| draw_from_cum(&cum, &mut rng) as u64 + 1)
                    .collect())
            }
            Source::Geometric { r } => {
                if !(0.0..1.0).contains(r) || *r == 0.0 {
                    return Err(Error::SourceSpec(format!(
                        "geometric ratio must lie in (0,1), got {r}"
                    )));
                }
                let ln_r = r.ln();
                Ok((0..n)
                    .map(|_| {
                        let u: f64 = rng.random();
                        1 + ((1.0 - u).ln() / ln_r).floor() as u64
                    })
                    .collect())
            }
            Source::DirichletStick { theta, t } => {
                let sticks = gem_weights(*theta, *t, derive_seed(seed, 0x57))?;
                Ok(paintbox_tokens(&sticks, n, &mut rng))
            }
            Source::PyStick { alpha, theta, t } => {
                let sticks = py_weights(*alpha, *theta, *t, derive_seed(seed, 0x57))?;
                Ok(paintbox_tokens(&sticks, n, &mut rng))
            }
            Source::Crp { .. } | Source::Py { .. } => Err(Error::Unsupported(
                "partition sources produce patterns, not token sequences",
            )),
        }
    }

    /// Marginal entropy in nats, for sources where it has a closed form.
    pub fn entropy_nats(&self) -> Option<f64> {
        match self {
            Source::Uniform { k } => Some((*k as f64).ln()),
            Source::Zipf { s, k } => DiscreteDistribution::zipf(*s, *k)
                .ok()
                .map(|d| d.entropy_nats()),
            // H = −ln(1−r) − r·ln r/(1−r) for p_i = (1−r)r^{i−1}.
            Source::Geometric { r } => Some(-(1.0 - r).ln() - r * r.ln() / (1.0 - r)),
            _ => None,
        }
    }

    /// Finite representation of the marginal distribution, where one exists
    /// (geometric is truncated at negligible tail mass).
    pub fn finite_dist(&self) -> Option<DiscreteDistribution> {
        match self {
            Source::Uniform { k } => DiscreteDistribution::uniform(*k).ok(),
            Source::Zipf { s, k } => DiscreteDistribution::zipf(*s, *k).ok(),
            Source::Geometric { r } => DiscreteDistribution::geometric_truncated(*r).ok(),
            _ => None,
        }
    }

    /// Support size for label-exchangeable (uniform) sources.
    pub fn uniform_support(&self) -> Option<usize> {
        match self {
            Source::Uniform { k } => Some(*k),
            _ => None,
        }
    }
}

fn check_support(k: usize) -> Result<(), Error> {
    if k == 0 {
        Err(Error::SourceSpec("support size must be positive".into()))
    } else {
        Ok(())
    }
}

/// Paintbox sampling from truncated sticks: draws beyond the truncated
/// prefix fall in the residual and are emitted as fresh distinct tokens
/// (the residual of a long prefix is a diffuse remainder).
fn paintbox_tokens(sticks: &StickBreakingWeights, n: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let cum = cumulative(&sticks.weights);
    let t = sticks.weights.len() as u64;
    let mut fresh = 0u64;
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let idx = cum.partition_point(|&c| c <= u);
            if idx < cum.len() {
                idx as u64 + 1
            } else {
                fresh += 1;
                t + fresh
            }
        })
        .collect()
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::SourceSpec(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let f = |x: &str| x.parse::<f64>().map_err(|_| bad());
        let u = |x: &str| x.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["uniform", k] => Ok(Source::Uniform { k: u(k)? }),
            ["zipf", s, k] => Ok(Source::Zipf { s: f(s)?, k: u(k)? }),
            ["geometric", r] => Ok(Source::Geometric { r: f(r)? }),
            ["dirichlet-stick", theta, t] => Ok(Source::DirichletStick {
                theta: f(theta)?,
                t: u(t)?,
            }),
            ["py-stick", alpha, theta, t] => Ok(Source::PyStick {
                alpha: f(alpha)?,
                theta: f(theta)?,
                t: u(t)?,
            }),
            ["crp", theta] => Ok(Source::Crp { theta: f(theta)? }),
            ["py", alpha, theta] => Ok(Source::Py {
                alpha: f(alpha)?,
                theta: f(theta)?,
            }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Uniform { k } => write!(f, "uniform:{k}"),
            Source::Zipf { s, k } => write!(f, "zipf:{s}:{k}"),
            Source::Geometric { r } => write!(f, "geometric:{r}"),
            Source::DirichletStick { theta, t } => write!(f, "dirichlet-stick:{theta}:{t}"),
            Source::PyStick { alpha, theta, t } => write!(f, "py-stick:{alpha}:{theta}:{t}"),
            Source::Crp { theta } => write!(f, "crp:{theta}"),
            Source::Py { alpha, theta } => write!(f, "py:{alpha}:{theta}"),
        }
    }
}
