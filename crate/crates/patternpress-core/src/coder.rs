//! Lossless pattern coding driven by the sequential predictive models.
//!
//! At step `i` the coding alphabet is `{1..m_i} ∪ {new}`; the estimator's
//! predictive probabilities are quantized to 32-bit frequencies (total
//! `2^32`, round-half-even, every alphabet symbol floored at one count,
//! rounding deficit assigned to the most probable symbol) and fed to a
//! 64-bit range coder. The coder core is integer-only, so identical inputs
//! produce bit-identical artifacts.
//!
//! A coded pattern is a self-describing artifact:
//!
//! ```text
//! "PTNC" | version u8 | estimator id u8 | params f64×k LE | n u64 LE
//!        | crc32(payload) u32 LE | payload bytes
//! ```
//!
//! with estimator ids 1 = CRP (`θ`), 2 = Pitman–Yor (`α`, `θ`),
//! 3 = mixture (`i_max`, `j_max`). The empty pattern is a header-only
//! artifact with zero payload bits.

use alloc::vec::Vec;
use core::fmt;

use crate::estimators::{Estimator, MixtureConfig, CrpParams, PyParams, StepSymbol};
use crate::pattern::Pattern;

/// File magic for `.ptnc` artifacts.
pub const MAGIC: [u8; 4] = *b"PTNC";
/// Current artifact version.
pub const VERSION: u8 = 1;

const TOTAL_BITS: u32 = 32;
const TOTAL: u64 = 1 << TOTAL_BITS;
/// Renormalization bound: the coder keeps `range ≥ 2^56`, so frequency
/// truncation wastes at most `2^-24` of the range per step.
const NORM_BOUND: u64 = 1 << 56;
const WINDOW_MASK: u128 = (1u128 << 64) - 1;

/// Errors from encoding and decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoderError {
    /// A realized step symbol received zero quantized mass. The one-count
    /// floor makes this unreachable; seeing it signals an internal
    /// inconsistency between encoder and model.
    ZeroProbability { step: u64 },
    /// Malformed artifact: bad magic, bad parameters, checksum mismatch, or
    /// a range-coder value outside the live alphabet.
    CorruptStream { reason: &'static str },
    /// Artifact written by an unknown format version.
    UnknownVersion { version: u8 },
    /// Coding alphabets are capped at `2^31` symbols.
    AlphabetTooLarge { size: u64 },
}

impl fmt::Display for CoderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoderError::ZeroProbability { step } => {
                write!(f, "zero quantized probability for realized symbol at step {step}")
            }
            CoderError::CorruptStream { reason } => write!(f, "corrupt stream: {reason}"),
            CoderError::UnknownVersion { version } => write!(f, "unknown artifact version {version}"),
            CoderError::AlphabetTooLarge { size } => {
                write!(f, "coding alphabet of {size} symbols exceeds 2^31")
            }
        }
    }
}

impl core::error::Error for CoderError {}

/// A coded pattern: estimator identity, pattern length, and range-coder
/// payload. `decode(encode(ψ)) = ψ` for every valid pattern and parameter
/// set.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedPattern {
    pub estimator: Estimator,
    pub n: u64,
    pub payload: Vec<u8>,
}

impl CodedPattern {
    /// Payload length in bits (header excluded).
    pub fn payload_bits(&self) -> u64 {
        self.payload.len() as u64 * 8
    }

    /// Serialize to the on-disk artifact layout (little-endian).
    pub fn to_bytes(&self) -> Vec<u8> {
        let (id, params) = estimator_id_params(&self.estimator);
        let mut out = Vec::with_capacity(4 + 2 + params.len() * 8 + 12 + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(id);
        for p in params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&crc32(&self.payload).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    /// Parse and validate an artifact, verifying the payload checksum.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CoderError> {
        let header = peek_header(bytes)?;
        let payload = bytes[header.header_len..].to_vec();
        if crc32(&payload) != header.payload_crc32 {
            return Err(CoderError::CorruptStream { reason: "payload checksum mismatch" });
        }
        Ok(Self {
            estimator: header.estimator,
            n: header.n,
            payload,
        })
    }
}

/// Validated artifact header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsedHeader {
    pub estimator: Estimator,
    pub n: u64,
    pub payload_crc32: u32,
    /// Offset of the first payload byte.
    pub header_len: usize,
}

/// Parse an artifact header from the front of a byte stream without
/// touching the payload. Used for concatenated-record streams, where the
/// payload length is only known after decoding.
pub fn peek_header(bytes: &[u8]) -> Result<ParsedHeader, CoderError> {
    let corrupt = |reason| CoderError::CorruptStream { reason };
    if bytes.len() < 6 {
        return Err(corrupt("truncated header"));
    }
    if bytes[0..4] != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = bytes[4];
    if version != VERSION {
        return Err(CoderError::UnknownVersion { version });
    }
    let id = bytes[5];
    let param_count = match id {
        1 => 1,
        2 | 3 => 2,
        _ => return Err(corrupt("unknown estimator id")),
    };
    let header_len = 6 + param_count * 8 + 8 + 4;
    if bytes.len() < header_len {
        return Err(corrupt("truncated header"));
    }
    let mut at = 6;
    let mut params = [0.0f64; 2];
    for p in params.iter_mut().take(param_count) {
        *p = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        at += 8;
    }
    let n = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    at += 8;
    let payload_crc32 = u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let estimator = match id {
        1 => Estimator::Crp(
            CrpParams::new(params[0]).map_err(|_| corrupt("invalid CRP parameters"))?,
        ),
        2 => Estimator::Py(
            PyParams::new(params[0], params[1])
                .map_err(|_| corrupt("invalid Pitman-Yor parameters"))?,
        ),
        3 => {
            let i_max = integral_u32(params[0]).ok_or(corrupt("invalid mixture truncation"))?;
            let j_max = integral_u32(params[1]).ok_or(corrupt("invalid mixture truncation"))?;
            Estimator::Mixture(
                MixtureConfig::new(i_max, j_max)
                    .map_err(|_| corrupt("invalid mixture truncation"))?,
            )
        }
        _ => unreachable!(),
    };
    Ok(ParsedHeader {
        estimator,
        n,
        payload_crc32,
        header_len,
    })
}

fn estimator_id_params(estimator: &Estimator) -> (u8, Vec<f64>) {
    match estimator {
        Estimator::Crp(p) => (1, [p.theta()].to_vec()),
        Estimator::Py(p) => (2, [p.alpha(), p.theta()].to_vec()),
        Estimator::Mixture(c) => (3, [c.i_max() as f64, c.j_max() as f64].to_vec()),
    }
}

fn integral_u32(x: f64) -> Option<u32> {
    if x.is_finite() && x >= 0.0 && x <= u32::MAX as f64 && libm::floor(x) == x {
        Some(x as u32)
    } else {
        None
    }
}

/// CRC-32 (IEEE, reflected). Bitwise implementation; validated against the
/// standard check value `crc32(b"123456789") = 0xCBF43926`.
pub(crate) fn crc32(data: &[u8]) -> u32 {
    let mut c = !0u32;
    for &b in data {
        c ^= b as u32;
        for _ in 0..8 {
            let mask = 0u32.wrapping_sub(c & 1);
            c = (c >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !c
}

/// Encode a pattern under an estimator's sequential predictive model.
pub fn encode(estimator: &Estimator, pattern: &Pattern) -> Result<CodedPattern, CoderError> {
    let mut pred = estimator.predictor();
    let mut enc = RangeEncoder::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut table = FreqTable::new();
    for (step, &s) in pattern.symbols().iter().enumerate() {
        let sym = StepSymbol::classify(s, pred.distinct());
        pred.fill_step_probs(&mut probs);
        table.quantize(&probs)?;
        let idx = match sym {
            StepSymbol::Seen(s) => (s - 1) as usize,
            StepSymbol::New => probs.len() - 1,
        };
        let (cum, freq) = table.slot(idx);
        if freq == 0 {
            return Err(CoderError::ZeroProbability { step: step as u64 });
        }
        enc.encode(cum, freq);
        pred.push(sym);
    }
    let payload = if pattern.is_empty() {
        Vec::new()
    } else {
        enc.finish()
    };
    Ok(CodedPattern {
        estimator: *estimator,
        n: pattern.len() as u64,
        payload,
    })
}

/// Decode a coded pattern back to the original pattern.
///
/// The predictive model is reconstructed from the artifact's estimator
/// parameters; the decode is the exact inverse of [`encode`].
pub fn decode(coded: &CodedPattern) -> Result<Pattern, CoderError> {
    decode_with(&coded.estimator, coded.n, &coded.payload)
}

/// Decode `n` symbols from a payload slice under a known estimator.
///
/// The slice may extend past the record's actual payload (e.g. into a
/// following record of a concatenated stream); the flush discipline
/// guarantees the extra bytes are never misread.
pub fn decode_with(
    estimator: &Estimator,
    n: u64,
    payload: &[u8],
) -> Result<Pattern, CoderError> {
    let n = n as usize;
    if n == 0 {
        return Ok(Pattern::empty());
    }
    let mut pred = estimator.predictor();
    let mut dec = RangeDecoder::new(payload);
    let mut probs: Vec<f64> = Vec::new();
    let mut table = FreqTable::new();
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        pred.fill_step_probs(&mut probs);
        table.quantize(&probs)?;
        let val = dec.target()?;
        let idx = table
            .find(val)
            .ok_or(CoderError::CorruptStream { reason: "value in dead zone" })?;
        let (cum, freq) = table.slot(idx);
        dec.consume(cum, freq);
        let sym = if idx == probs.len() - 1 {
            StepSymbol::New
        } else {
            StepSymbol::Seen(idx as u32 + 1)
        };
        symbols.push(match sym {
            StepSymbol::New => pred.distinct() + 1,
            StepSymbol::Seen(s) => s,
        });
        pred.push(sym);
    }
    let distinct = pred.distinct();
    Ok(Pattern::from_raw(symbols, distinct))
}

/// Quantized per-step frequency table. Slot `i` covers
/// `[cum[i], cum[i+1])`; anything at or beyond `cum[len]` is dead mass
/// (possible only on the truncated mixture's first step).
struct FreqTable {
    freqs: Vec<u64>,
    cums: Vec<u64>,
}

impl FreqTable {
    fn new() -> Self {
        Self {
            freqs: Vec::new(),
            cums: Vec::new(),
        }
    }

    fn quantize(&mut self, probs: &[f64]) -> Result<(), CoderError> {
        let len = probs.len();
        if len as u64 >= (1 << 31) {
            return Err(CoderError::AlphabetTooLarge { size: len as u64 });
        }
        let t = TOTAL as f64;
        self.freqs.clear();
        let mut live_mass = 0.0;
        for &p in probs {
            let p = p.max(0.0);
            live_mass += p;
            let f = libm::rint(p * t) as u64;
            self.freqs.push(f.max(1));
        }
        // Mass deliberately left unassigned by the model stays out of the
        // live alphabet entirely.
        let dead = (1.0 - live_mass).max(0.0);
        let dead_f = if dead > 1e-12 {
            (libm::rint(dead * t) as u64).min(TOTAL - len as u64)
        } else {
            0
        };
        let target = TOTAL - dead_f;
        let sum: u64 = self.freqs.iter().sum();
        let mut deficit = target as i128 - sum as i128;
        if deficit != 0 {
            // Fast path: the most probable symbol absorbs the rounding
            // deficit.
            let amax = (0..len).max_by_key(|&i| self.freqs[i]).unwrap();
            let adjusted = self.freqs[amax] as i128 + deficit;
            if adjusted >= 1 {
                self.freqs[amax] = adjusted as u64;
                deficit = 0;
            } else {
                let mut order: Vec<usize> = (0..len).collect();
                order.sort_by_key(|&i| core::cmp::Reverse(self.freqs[i]));
                for &i in &order {
                    if deficit == 0 {
                        break;
                    }
                    debug_assert!(deficit < 0);
                    let can = self.freqs[i] as i128 - 1;
                    let take = (-deficit).min(can);
                    self.freqs[i] -= take as u64;
                    deficit += take;
                }
            }
        }
        if deficit != 0 {
            return Err(CoderError::ZeroProbability { step: 0 });
        }
        self.cums.clear();
        let mut acc = 0u64;
        self.cums.push(0);
        for &f in &self.freqs {
            acc += f;
            self.cums.push(acc);
        }
        debug_assert_eq!(acc, target);
        Ok(())
    }

    fn slot(&self, idx: usize) -> (u64, u64) {
        (self.cums[idx], self.freqs[idx])
    }

    /// Index of the slot containing `val`, or `None` for the dead zone.
    fn find(&self, val: u64) -> Option<usize> {
        let live = *self.cums.last().unwrap();
        if val >= live {
            return None;
        }
        let idx = self.cums.partition_point(|&c| c <= val) - 1;
        Some(idx)
    }
}

/// Byte-oriented 64-bit range encoder with explicit carry propagation into
/// the output buffer.
struct RangeEncoder {
    low: u128,
    range: u64,
    out: Vec<u8>,
}

impl RangeEncoder {
    fn new() -> Self {
        Self {
            low: 0,
            range: u64::MAX,
            out: Vec::new(),
        }
    }

    fn encode(&mut self, cum: u64, freq: u64) {
        debug_assert!(freq >= 1 && cum.checked_add(freq).is_some_and(|e| e <= TOTAL));
        let r = self.range >> TOTAL_BITS;
        self.low += r as u128 * cum as u128;
        self.range = r * freq;
        while self.range < NORM_BOUND {
            self.shift_low();
            self.range <<= 8;
        }
    }

    fn shift_low(&mut self) {
        if self.low >> 64 != 0 {
            // Carry: increment the emitted prefix. It cannot run off the
            // front of the buffer (the coded value stays below one).
            let mut resolved = false;
            for b in self.out.iter_mut().rev() {
                if *b == 0xFF {
                    *b = 0;
                } else {
                    *b += 1;
                    resolved = true;
                    break;
                }
            }
            debug_assert!(resolved, "carry ran past the stream start");
        }
        self.out.push((self.low >> 56) as u8);
        self.low = (self.low << 8) & WINDOW_MASK;
    }

    /// Flush: emit two bytes pinning a value with 48 trailing zero bits
    /// inside the final interval. Since `range ≥ 2^56` at finish, any bytes
    /// a decoder reads past the payload (zero padding or a following
    /// record) stay inside the interval and cannot disturb the decode.
    fn finish(mut self) -> Vec<u8> {
        let rem = self.low & ((1u128 << 48) - 1);
        if rem != 0 {
            self.low += (1u128 << 48) - rem;
        }
        self.shift_low();
        self.shift_low();
        self.out
    }
}

/// Decoder mirror of [`RangeEncoder`]; tracks the code value relative to
/// the interval base, so no carries arise.
struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u64,
    range: u64,
}

impl<'a> RangeDecoder<'a> {
    fn new(data: &'a [u8]) -> Self {
        let mut dec = Self {
            data,
            pos: 0,
            code: 0,
            range: u64::MAX,
        };
        for _ in 0..8 {
            dec.code = (dec.code << 8) | dec.next_byte();
        }
        dec
    }

    fn next_byte(&mut self) -> u64 {
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b as u64
    }

    fn target(&mut self) -> Result<u64, CoderError> {
        let r = self.range >> TOTAL_BITS;
        let val = self.code / r;
        if val >= TOTAL {
            return Err(CoderError::CorruptStream { reason: "value outside coding range" });
        }
        Ok(val)
    }

    fn consume(&mut self, cum: u64, freq: u64) {
        let r = self.range >> TOTAL_BITS;
        self.code -= r * cum;
        self.range = r * freq;
        while self.range < NORM_BOUND {
            self.code = (self.code << 8) | self.next_byte();
            self.range <<= 8;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{mixture_log_prob, sequential_log_prob};
    use crate::pattern::{enumerate_patterns, extract_pattern};
    use alloc::vec;

    const LN_2: f64 = core::f64::consts::LN_2;

    fn pat(symbols: &[u32]) -> Pattern {
        Pattern::from_symbols(symbols.to_vec()).unwrap()
    }

    fn estimators() -> Vec<Estimator> {
        vec![
            Estimator::Crp(CrpParams::new(1.0).unwrap()),
            Estimator::Crp(CrpParams::new(0.05).unwrap()),
            Estimator::Py(PyParams::new(0.5, 0.5).unwrap()),
            Estimator::Py(PyParams::new(0.9, -0.5).unwrap()),
            Estimator::Mixture(MixtureConfig::new(4, 6).unwrap()),
        ]
    }

    #[test]
    fn crc32_check_value() {
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32(b""), 0);
    }

    #[test]
    fn empty_pattern_is_header_only() {
        for est in estimators() {
            let coded = encode(&est, &Pattern::empty()).unwrap();
            assert_eq!(coded.payload_bits(), 0);
            assert_eq!(decode(&coded).unwrap(), Pattern::empty());
            let bytes = coded.to_bytes();
            assert_eq!(CodedPattern::from_bytes(&bytes).unwrap(), coded);
        }
    }

    #[test]
    fn round_trips_exhaustively_at_small_lengths() {
        for est in estimators() {
            for n in 0..=6usize {
                for p in enumerate_patterns(n).unwrap() {
                    let coded = encode(&est, &p).unwrap();
                    assert_eq!(decode(&coded).unwrap(), p, "{est:?} {:?}", p.symbols());
                }
            }
        }
    }

    #[test]
    fn code_length_tracks_log_prob() {
        // Constant pattern, n = 1000: measured bits within the
        // [-log2 q - 1, -log2 q + 32 + n·2^-20] window.
        let est = Estimator::Crp(CrpParams::new(1.0).unwrap());
        let p = pat(&vec![1u32; 1000]);
        let coded = encode(&est, &p).unwrap();
        let ideal = -est.log_prob(&p) / LN_2;
        let bits = coded.payload_bits() as f64;
        assert!(bits >= ideal - 1.0, "bits={bits} ideal={ideal}");
        assert!(bits <= ideal + 32.0 + 1000.0 / (1u64 << 20) as f64);

        // Witness pattern 1 2 ⋯ n stresses low-probability steps.
        let est = Estimator::Py(PyParams::new(0.5, 1.0).unwrap());
        let symbols: Vec<u32> = (1..=2000).collect();
        let p = pat(&symbols);
        let coded = encode(&est, &p).unwrap();
        let ideal = -est.log_prob(&p) / LN_2;
        let bits = coded.payload_bits() as f64;
        assert!(bits >= ideal - 1.0);
        assert!(bits <= ideal + 32.0 + 2000.0 / (1u64 << 20) as f64);
    }

    #[test]
    fn deterministic_artifacts() {
        let est = Estimator::Py(PyParams::new(0.3, 0.7).unwrap());
        let p = extract_pattern("mississippi".chars());
        let a = encode(&est, &p).unwrap().to_bytes();
        let b = encode(&est, &p).unwrap().to_bytes();
        assert_eq!(a, b);
    }

    #[test]
    fn mixture_sequential_joint_matches_closed_form() {
        let config = MixtureConfig::new(8, 12).unwrap();
        let est = Estimator::Mixture(config);
        for symbols in [
            vec![1u32],
            vec![1, 1, 2, 1, 3, 2, 2],
            (1..=40).collect::<Vec<u32>>(),
            vec![1; 64],
        ] {
            let p = pat(&symbols);
            let seq = sequential_log_prob(&est, &p);
            let closed = mixture_log_prob(&config, &p.profile());
            assert!(
                (seq - closed).abs() < 1e-6,
                "seq={seq} closed={closed} on {symbols:?}"
            );
        }
    }

    #[test]
    fn header_round_trip_and_fault_injection() {
        let est = Estimator::Mixture(MixtureConfig::new(3, 7).unwrap());
        let p = pat(&[1, 2, 1, 3, 3, 2, 4]);
        let coded = encode(&est, &p).unwrap();
        let bytes = coded.to_bytes();
        assert_eq!(CodedPattern::from_bytes(&bytes).unwrap(), coded);

        // Truncated payload: checksum mismatch.
        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(
            CodedPattern::from_bytes(truncated),
            Err(CoderError::CorruptStream { .. })
        ));

        // Tampered estimator id.
        let mut tampered = bytes.clone();
        tampered[5] = 9;
        assert!(matches!(
            CodedPattern::from_bytes(&tampered),
            Err(CoderError::CorruptStream { .. })
        ));
        let mut tampered = bytes.clone();
        tampered[5] = 1; // wrong family: header length no longer parses
        assert!(matches!(
            CodedPattern::from_bytes(&tampered),
            Err(CoderError::CorruptStream { .. })
        ));

        // Unknown version.
        let mut tampered = bytes.clone();
        tampered[4] = 2;
        assert!(matches!(
            CodedPattern::from_bytes(&tampered),
            Err(CoderError::UnknownVersion { version: 2 })
        ));

        // Bad magic.
        let mut tampered = bytes;
        tampered[0] = b'X';
        assert!(matches!(
            CodedPattern::from_bytes(&tampered),
            Err(CoderError::CorruptStream { .. })
        ));
    }

    #[test]
    fn decode_ignores_trailing_bytes() {
        // A record followed by arbitrary bytes (e.g. the next record of a
        // concatenated stream) must decode identically.
        for est in estimators() {
            let p = pat(&[1, 2, 1, 1, 3, 2, 4, 1, 5, 5]);
            let coded = encode(&est, &p).unwrap();
            let mut padded = coded.payload.clone();
            padded.extend_from_slice(&[0xFF, 0x00, 0xAB, 0x13, 0xFF, 0xFF, 0x7F, 0x80, 0x01]);
            let decoded = decode_with(&est, coded.n, &padded).unwrap();
            assert_eq!(decoded, p, "{est:?}");
        }
    }

    #[test]
    fn flipped_payload_byte_is_detected() {
        let est = Estimator::Crp(CrpParams::new(2.0).unwrap());
        let p = pat(&[1, 2, 3, 1, 2, 3, 4, 4, 4, 1]);
        let coded = encode(&est, &p).unwrap();
        let mut bytes = coded.to_bytes();
        let last = bytes.len() - 1;
        bytes[last] ^= 0x40;
        assert!(matches!(
            CodedPattern::from_bytes(&bytes),
            Err(CoderError::CorruptStream { .. })
        ));
    }
}
