//! Patterns, prevalence profiles, and exhaustive pattern enumeration.
//!
//! A pattern is a restricted-growth string: the first symbol is `1`, and
//! every later symbol is either one already seen or the smallest unused
//! positive integer. Equivalently, a pattern of length `n` is a set
//! partition of `{1..n}` written down by first appearance, so there are
//! exactly `Bell(n)` patterns of length `n`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::hash::Hash;

/// Errors from pattern construction and enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternError {
    /// The symbol sequence violates the restricted-growth property; the
    /// position (0-based) of the first offending symbol is reported.
    InvalidPattern { position: usize },
    /// Exhaustive enumeration was requested beyond the feasibility guard.
    TooLarge { n: usize, max: usize },
}

impl fmt::Display for PatternError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternError::InvalidPattern { position } => {
                write!(f, "not a valid pattern: restricted-growth violation at position {position}")
            }
            PatternError::TooLarge { n, max } => {
                write!(f, "enumeration of length-{n} patterns exceeds the guard (max {max})")
            }
        }
    }
}

impl core::error::Error for PatternError {}

/// A valid restricted-growth string.
///
/// Invariants (enforced by every constructor): the first symbol is `1`,
/// each symbol is at most one larger than the running maximum, and hence
/// every integer in `1..=m` occurs at least once, where `m` is the number
/// of distinct symbols. The empty pattern (`n = 0`, `m = 0`) is valid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    symbols: Vec<u32>,
    distinct: u32,
}

impl Pattern {
    /// The empty pattern.
    pub fn empty() -> Self {
        Self {
            symbols: Vec::new(),
            distinct: 0,
        }
    }

    /// Validate a symbol sequence as a pattern.
    ///
    /// Accepts exactly the restricted-growth strings, reporting the first
    /// violating index otherwise.
    pub fn from_symbols(symbols: Vec<u32>) -> Result<Self, PatternError> {
        let mut max = 0u32;
        for (i, &s) in symbols.iter().enumerate() {
            if s == 0 || s > max + 1 {
                return Err(PatternError::InvalidPattern { position: i });
            }
            if s == max + 1 {
                max = s;
            }
        }
        Ok(Self {
            symbols,
            distinct: max,
        })
    }

    /// Internal constructor for callers that produce valid patterns by
    /// construction (extraction, enumeration, decoding).
    pub(crate) fn from_raw(symbols: Vec<u32>, distinct: u32) -> Self {
        debug_assert!(Pattern::from_symbols(symbols.clone()).is_ok());
        Self { symbols, distinct }
    }

    /// The pattern symbols `ψ₁..ψₙ`.
    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    /// Pattern length `n`.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Number of distinct symbols `m` (the maximum symbol).
    pub fn distinct(&self) -> u32 {
        self.distinct
    }

    /// Multiplicity of each symbol, indexed by `symbol - 1`.
    pub fn multiplicities(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.distinct as usize];
        for &s in &self.symbols {
            counts[(s - 1) as usize] += 1;
        }
        counts
    }

    /// The prevalence profile `{φ_μ}` of this pattern.
    pub fn profile(&self) -> PrevalenceProfile {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for mult in self.multiplicities() {
            *counts.entry(mult).or_insert(0) += 1;
        }
        PrevalenceProfile {
            counts,
            n: self.symbols.len() as u64,
            m: self.distinct as u64,
        }
    }
}

/// Extract the pattern of a token sequence.
///
/// Tokens are opaque: they are only compared for equality. The first
/// occurrence of a token is assigned the next unused index; repeats reuse
/// the index of the first occurrence.
///
/// ```
/// use patternpress_core::extract_pattern;
///
/// let p = extract_pattern("federer".chars());
/// assert_eq!(p.symbols(), &[1, 2, 3, 2, 4, 2, 4]);
/// ```
pub fn extract_pattern<I, T>(tokens: I) -> Pattern
where
    I: IntoIterator<Item = T>,
    T: Eq + Hash,
{
    let iter = tokens.into_iter();
    let mut symbols = Vec::with_capacity(iter.size_hint().0);
    let mut index: hashbrown::HashMap<T, u32> = hashbrown::HashMap::new();
    let mut next = 1u32;
    for tok in iter {
        let s = *index.entry(tok).or_insert_with(|| {
            let s = next;
            next += 1;
            s
        });
        symbols.push(s);
    }
    Pattern::from_raw(symbols, next - 1)
}

/// The prevalence profile of a pattern: `counts[μ] = φ_μ`, the number of
/// distinct symbols occurring exactly `μ` times, together with the length
/// `n = Σ μ·φ_μ` and the distinct-symbol count `m = Σ φ_μ`.
///
/// Zero prevalences are never stored, so two patterns have equal profiles
/// iff they are relabelings of one another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrevalenceProfile {
    counts: BTreeMap<u64, u64>,
    n: u64,
    m: u64,
}

impl PrevalenceProfile {
    /// Build a profile from `(multiplicity, prevalence)` pairs. Zero
    /// prevalences are dropped; `n` and `m` are derived.
    pub fn from_counts<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (u64, u64)>,
    {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for (mu, phi) in pairs {
            if phi == 0 {
                continue;
            }
            debug_assert!(mu > 0, "multiplicity must be positive");
            *counts.entry(mu).or_insert(0) += phi;
        }
        let n = counts.iter().map(|(mu, phi)| mu * phi).sum();
        let m = counts.values().sum();
        Self { counts, n, m }
    }

    /// Iterate `(μ, φ_μ)` in increasing `μ` order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&mu, &phi)| (mu, phi))
    }

    /// Prevalence of a given multiplicity (0 if absent).
    pub fn prevalence(&self, mu: u64) -> u64 {
        self.counts.get(&mu).copied().unwrap_or(0)
    }

    /// Total pattern length `n`.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of distinct symbols `m`.
    pub fn m(&self) -> u64 {
        self.m
    }
}

/// Maximum length accepted by [`enumerate_patterns`]. `Bell(14) ≈ 1.9×10⁸`
/// keeps exhaustive runs within desk-scale time.
pub const MAX_ENUMERATION_LEN: usize = 14;

/// Enumerate every valid pattern of length `n` in lexicographic order.
///
/// The stream yields exactly `Bell(n)` patterns. For `n = 0` the single
/// empty pattern is produced.
pub fn enumerate_patterns(n: usize) -> Result<PatternEnumerator, PatternError> {
    if n > MAX_ENUMERATION_LEN {
        return Err(PatternError::TooLarge {
            n,
            max: MAX_ENUMERATION_LEN,
        });
    }
    Ok(PatternEnumerator {
        current: vec![1; n],
        prefix_max: vec![1; n],
        n,
        state: if n == 0 {
            EnumState::EmptyPending
        } else {
            EnumState::Ready
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EnumState {
    EmptyPending,
    Ready,
    Done,
}

/// Iterator over all length-`n` patterns; see [`enumerate_patterns`].
#[derive(Debug, Clone)]
pub struct PatternEnumerator {
    current: Vec<u32>,
    prefix_max: Vec<u32>,
    n: usize,
    state: EnumState,
}

impl Iterator for PatternEnumerator {
    type Item = Pattern;

    fn next(&mut self) -> Option<Pattern> {
        match self.state {
            EnumState::EmptyPending => {
                self.state = EnumState::Done;
                return Some(Pattern::empty());
            }
            EnumState::Done => return None,
            EnumState::Ready => {}
        }
        let out = Pattern::from_raw(self.current.clone(), self.prefix_max[self.n - 1]);
        // Advance to the successor: bump the rightmost symbol that may grow,
        // reset the tail to all-ones.
        let mut i = self.n;
        loop {
            if i <= 1 {
                self.state = EnumState::Done;
                break;
            }
            i -= 1;
            if self.current[i] <= self.prefix_max[i - 1] {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..self.n {
                    self.current[j] = 1;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent count oracle: the Bell triangle recurrence.
    fn bell_numbers(up_to: usize) -> Vec<u64> {
        let mut bells = vec![1u64];
        let mut row = vec![1u64];
        for _ in 0..up_to {
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(*row.last().unwrap());
            for &v in &row {
                let last = *next.last().unwrap();
                next.push(last + v);
            }
            bells.push(next[0]);
            row = next;
        }
        bells
    }

    #[test]
    fn extracts_federer_and_pattern() {
        let p = extract_pattern("FEDERER".chars());
        assert_eq!(p.symbols(), &[1, 2, 3, 2, 4, 2, 4]);
        let p = extract_pattern("PATTERN".chars());
        assert_eq!(p.symbols(), &[1, 2, 3, 3, 4, 5, 6]);
        let empty: [u8; 0] = [];
        assert_eq!(extract_pattern(empty), Pattern::empty());
    }

    #[test]
    fn federer_profile() {
        let p = extract_pattern("FEDERER".chars());
        let prof = p.profile();
        assert_eq!(prof.n(), 7);
        assert_eq!(prof.m(), 4);
        assert_eq!(prof.prevalence(1), 2);
        assert_eq!(prof.prevalence(2), 1);
        assert_eq!(prof.prevalence(3), 1);
        assert_eq!(prof.prevalence(4), 0);
    }

    #[test]
    fn trivial_profiles() {
        let p = Pattern::from_symbols(vec![1, 1, 1]).unwrap();
        let prof = p.profile();
        assert_eq!((prof.n(), prof.m()), (3, 1));
        assert_eq!(prof.prevalence(3), 1);

        let p = Pattern::from_symbols(vec![1, 2, 3]).unwrap();
        let prof = p.profile();
        assert_eq!((prof.n(), prof.m()), (3, 3));
        assert_eq!(prof.prevalence(1), 3);
    }

    #[test]
    fn validation_rejects_bad_growth() {
        assert!(Pattern::from_symbols(vec![1, 2, 2, 3]).is_ok());
        assert_eq!(
            Pattern::from_symbols(vec![2, 1]),
            Err(PatternError::InvalidPattern { position: 0 })
        );
        assert_eq!(
            Pattern::from_symbols(vec![1, 3]),
            Err(PatternError::InvalidPattern { position: 1 })
        );
        assert_eq!(
            Pattern::from_symbols(vec![1, 0]),
            Err(PatternError::InvalidPattern { position: 1 })
        );
    }

    #[test]
    fn enumerates_length_three_in_lex_order() {
        let pats: Vec<Vec<u32>> = enumerate_patterns(3)
            .unwrap()
            .map(|p| p.symbols().to_vec())
            .collect();
        assert_eq!(
            pats,
            vec![
                vec![1, 1, 1],
                vec![1, 1, 2],
                vec![1, 2, 1],
                vec![1, 2, 2],
                vec![1, 2, 3],
            ]
        );
    }

    #[test]
    fn enumeration_counts_match_bell_triangle() {
        let bells = bell_numbers(10);
        for n in 0..=10usize {
            let count = enumerate_patterns(n).unwrap().count() as u64;
            assert_eq!(count, bells[n], "Bell({n})");
        }
        assert_eq!(bells[10], 115_975);
    }

    #[test]
    fn enumeration_guard() {
        assert!(enumerate_patterns(14).is_ok());
        assert_eq!(
            enumerate_patterns(15).unwrap_err(),
            PatternError::TooLarge { n: 15, max: 14 }
        );
    }

    #[test]
    fn enumerated_patterns_are_distinct_and_valid() {
        let mut seen = alloc::collections::BTreeSet::new();
        for p in enumerate_patterns(7).unwrap() {
            assert!(Pattern::from_symbols(p.symbols().to_vec()).is_ok());
            assert!(seen.insert(p.symbols().to_vec()), "duplicate {:?}", p);
        }
    }

    #[test]
    fn profile_from_counts_strips_zeros() {
        let prof = PrevalenceProfile::from_counts([(1, 2), (2, 0), (3, 1)]);
        assert_eq!(prof.n(), 5);
        assert_eq!(prof.m(), 3);
        assert_eq!(prof.prevalence(2), 0);
        assert_eq!(prof.iter().count(), 2);
    }

    proptest! {
        #[test]
        fn extraction_is_relabeling_invariant(tokens in prop::collection::vec(0u8..6, 0..60)) {
            // Injective relabeling: any strictly monotone map on token values.
            let relabeled: Vec<u32> = tokens.iter().map(|&t| (t as u32) * 17 + 3).collect();
            prop_assert_eq!(extract_pattern(tokens), extract_pattern(relabeled));
        }

        #[test]
        fn profile_identities(tokens in prop::collection::vec(0u8..8, 0..80)) {
            let p = extract_pattern(tokens.iter());
            let prof = p.profile();
            let n: u64 = prof.iter().map(|(mu, phi)| mu * phi).sum();
            let m: u64 = prof.iter().map(|(_, phi)| phi).sum();
            prop_assert_eq!(n, tokens.len() as u64);
            prop_assert_eq!(n, prof.n());
            prop_assert_eq!(m, prof.m());
            prop_assert_eq!(m, p.distinct() as u64);
        }

        #[test]
        fn extraction_output_validates(tokens in prop::collection::vec(any::<u16>(), 0..100)) {
            let p = extract_pattern(tokens);
            prop_assert!(Pattern::from_symbols(p.symbols().to_vec()).is_ok());
        }
    }
}
