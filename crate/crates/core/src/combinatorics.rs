//! Log-space combinatorics.
//!
//! Every factorial goes through `ln Γ`; callers assemble probabilities as sums
//! of logs and exponentiate once at the end. Out-of-range binomials evaluate
//! to `ln 0 = -inf`.

use statrs::function::factorial::ln_factorial as statrs_ln_factorial;

/// `ln(k!)`.
#[inline]
pub fn ln_factorial(k: usize) -> f64 {
    statrs_ln_factorial(k as u64)
}

/// `ln C(n, k)`, or `-inf` when `k > n`.
#[inline]
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(n, k)` as a float; zero when `k > n`.
#[inline]
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        // exact in u128 for this range, and exactly representable after rounding
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        return acc as f64;
    }
    ln_binomial(n, k).exp()
}

/// `exponent * ln(p)` with the convention `0 * ln 0 = 0`.
#[inline]
pub fn pow_ln(p: f64, exponent: usize) -> f64 {
    if exponent == 0 {
        0.0
    } else if p <= 0.0 {
        f64::NEG_INFINITY
    } else {
        exponent as f64 * p.ln()
    }
}

/// Streaming log-sum-exp accumulator.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    scaled: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, term: f64) {
        if term == f64::NEG_INFINITY {
            return;
        }
        if term <= self.max {
            self.scaled += (term - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - term).exp() + 1.0;
            self.max = term;
        }
    }

    /// `ln Σ exp(term)`, `-inf` for an empty sum.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}
