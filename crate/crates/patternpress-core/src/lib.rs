//! Pattern probability estimation for large-alphabet sources.
//!
//! A *pattern* records the order of first appearance of the symbols in a
//! sequence while discarding their identities: `FEDERER` has pattern
//! `1 2 3 2 4 2 4`. Patterns are in one-to-one correspondence with
//! exchangeable random partitions, so the classical partition priors of
//! Bayesian nonparametrics double as sequential pattern compressors. This
//! crate implements those compressors and the machinery needed to measure
//! how good they are:
//!
//! - [`pattern`] — pattern extraction, validation, exhaustive enumeration,
//!   and prevalence profiles (the counts-of-counts sufficient statistic).
//! - [`estimators`] — closed-form and sequential pattern probabilities under
//!   the Ewens/CRP family, the two-parameter Pitman–Yor family, and a weakly
//!   universal mixture of CRP estimators.
//! - [`oracle`] — exact small-scale reference computations: the probability
//!   that an i.i.d. source emits a given pattern, and the multinomial
//!   envelope bound on any pattern's probability.
//! - [`redundancy`] — per-pattern redundancy reports and evaluators for the
//!   worst-case redundancy bounds and related inequalities.
//! - [`coder`] — a deterministic 64-bit range coder that turns the
//!   sequential predictive distributions into bit-exact `.ptnc` artifacts.
//!
//! All probability arithmetic is carried out in natural-log domain via
//! [`libm`], which keeps the crate `no_std`-compatible (`alloc` required)
//! and makes results independent of the platform's libc.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod coder;
pub mod estimators;
pub mod math;
pub mod oracle;
pub mod pattern;
pub mod redundancy;

pub use coder::{decode, decode_with, encode, peek_header, CodedPattern, CoderError, ParsedHeader};
pub use estimators::{
    crp_log_prob, crp_predictive, mixture_log_prob, py_log_prob, py_predictive, select_crp_theta,
    sequential_log_prob, CrpParams, Estimator, MixtureConfig, ParamError, PredictiveDistribution,
    PyParams,
};
pub use oracle::{
    envelope_log_bound, pattern_log_prob_exact, pattern_prob_exact, DiscreteDistribution,
    EnvelopeBound, OracleError,
};
pub use pattern::{
    enumerate_patterns, extract_pattern, Pattern, PatternError, PrevalenceProfile,
};
pub use redundancy::{
    chebyshev_sum_check, claim_inequality_check, crp_bound_partialred, expected_distinct_bound,
    markov_distinct_tail, pattern_redundancy, py_bound_upper, py_linear_witnesses,
    RedundancyError, RedundancyReport,
};
