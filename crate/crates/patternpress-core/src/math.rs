//! Log-domain numeric helpers.
//!
//! Everything routes through [`libm`] so the same code path is used with and
//! without `std`, and results are bit-reproducible across platforms.

/// Natural logarithm.
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// Exponential.
#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln n!`.
#[inline]
pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// `ln Σ ln(θ + i)` for `i = lo..hi`, i.e. the log of a shifted rising
/// factorial, computed as a log-gamma difference.
#[inline]
pub fn ln_rising(theta: f64, lo: u64, hi: u64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    ln_gamma(theta + hi as f64) - ln_gamma(theta + lo as f64)
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn log_sum_exp_pair(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + libm::log1p(exp(b - a))
    } else {
        b + libm::log1p(exp(a - b))
    }
}

/// Streaming log-sum-exp accumulator.
///
/// Keeps a running maximum and a rescaled linear sum so that an arbitrary
/// number of log-domain terms can be folded in a single pass.
#[derive(Debug, Clone)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    /// Add a term given as its natural log. `NEG_INFINITY` is a no-op.
    pub fn push(&mut self, ln_term: f64) {
        if ln_term == f64::NEG_INFINITY {
            return;
        }
        if ln_term <= self.max {
            self.sum += exp(ln_term - self.max);
        } else {
            self.sum = self.sum * exp(self.max - ln_term) + 1.0;
            self.max = ln_term;
        }
    }

    /// Natural log of the accumulated sum; `NEG_INFINITY` if nothing was added.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + ln(self.sum)
        }
    }
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_small() {
        let terms = [0.5f64, 2.0, -1.0, 0.0];
        let naive: f64 = terms.iter().map(|&t| t.exp()).sum::<f64>().ln();
        let mut lse = LogSumExp::new();
        for &t in &terms {
            lse.push(t);
        }
        assert!((lse.value() - naive).abs() < 1e-14);
    }

    #[test]
    fn lse_handles_large_offsets() {
        let mut lse = LogSumExp::new();
        lse.push(-1234.0);
        lse.push(-1232.0);
        // ln(e^-1234 + e^-1232) = -1232 + ln(1 + e^-2)
        let expected = -1232.0 + (1.0 + (-2.0f64).exp()).ln();
        assert!((lse.value() - expected).abs() < 1e-12);
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
    }

    #[test]
    fn lse_pair_agrees_with_accumulator() {
        let mut lse = LogSumExp::new();
        lse.push(3.0);
        lse.push(-7.0);
        assert!((lse.value() - log_sum_exp_pair(3.0, -7.0)).abs() < 1e-14);
        assert_eq!(log_sum_exp_pair(f64::NEG_INFINITY, -2.0), -2.0);
    }

    #[test]
    fn ln_rising_is_a_product_of_logs() {
        let theta = 0.7;
        let direct: f64 = (2..9).map(|i| (theta + i as f64).ln()).sum();
        assert!((ln_rising(theta, 2, 9) - direct).abs() < 1e-11);
        assert_eq!(ln_rising(1.0, 3, 3), 0.0);
    }

    #[test]
    fn ln_factorial_small_values() {
        assert!((ln_factorial(0) - 0.0).abs() < 1e-15);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-12);
    }
}
