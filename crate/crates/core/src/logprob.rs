//! Erasure probabilities carried as a pair of natural logarithms.
//!
//! Polarized erasure probabilities run down to far below `f64::MIN_POSITIVE`
//! and up to within `1e-300` of one, so both `ln ε` and `ln(1 − ε)` are
//! stored. Whichever leg is closer to zero in linear terms is the accurate
//! one; the other is derived from it with [`log1mexp`].

use std::cmp::Ordering;
use std::fmt;

/// `ln(1 − eˣ)` for `x ≤ 0`, accurate across the whole range.
///
/// `log1mexp(0) = −∞` and `log1mexp(−∞) = 0`.
pub fn log1mexp(x: f64) -> f64 {
    debug_assert!(x <= 0.0 || x.is_nan(), "log1mexp domain is x <= 0, got {x}");
    if x == 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// An erasure probability `ε ∈ [0, 1]` held as `(ln ε, ln(1 − ε))`.
///
/// The extremes are exact: `ε = 0` is `(−∞, 0)` and `ε = 1` is `(0, −∞)`.
#[derive(Clone, Copy, PartialEq)]
pub struct LogProb {
    log_eps: f64,
    log_one_minus_eps: f64,
}

impl LogProb {
    /// The noiseless channel, `ε = 0`.
    pub const ZERO: LogProb = LogProb {
        log_eps: f64::NEG_INFINITY,
        log_one_minus_eps: 0.0,
    };

    /// The full-noise channel, `ε = 1`.
    pub const ONE: LogProb = LogProb {
        log_eps: 0.0,
        log_one_minus_eps: f64::NEG_INFINITY,
    };

    /// Builds from a linear probability. Returns `None` outside `[0, 1]` or for NaN.
    pub fn from_prob(eps: f64) -> Option<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return None;
        }
        Some(if eps == 0.0 {
            Self::ZERO
        } else if eps == 1.0 {
            Self::ONE
        } else {
            LogProb {
                log_eps: eps.ln(),
                log_one_minus_eps: (-eps).ln_1p(),
            }
        })
    }

    /// Builds from `ln ε`; the complementary leg is derived.
    pub fn from_log_eps(log_eps: f64) -> Option<Self> {
        if log_eps.is_nan() || log_eps > 0.0 {
            return None;
        }
        Some(LogProb {
            log_eps,
            log_one_minus_eps: log1mexp(log_eps),
        })
    }

    /// Builds from `ln(1 − ε)`; the complementary leg is derived.
    pub fn from_log_one_minus_eps(log_one_minus_eps: f64) -> Option<Self> {
        if log_one_minus_eps.is_nan() || log_one_minus_eps > 0.0 {
            return None;
        }
        Some(LogProb {
            log_eps: log1mexp(log_one_minus_eps),
            log_one_minus_eps,
        })
    }

    pub fn from_bool(full_noise: bool) -> Self {
        if full_noise {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    pub fn log_eps(self) -> f64 {
        self.log_eps
    }

    pub fn log_one_minus_eps(self) -> f64 {
        self.log_one_minus_eps
    }

    pub fn log2_eps(self) -> f64 {
        self.log_eps / std::f64::consts::LN_2
    }

    pub fn log2_one_minus_eps(self) -> f64 {
        self.log_one_minus_eps / std::f64::consts::LN_2
    }

    /// Linear-domain `ε`. Underflows to zero for very reliable channels.
    pub fn prob(self) -> f64 {
        self.log_eps.exp()
    }

    /// Linear-domain `1 − ε`, taken from the accurate leg.
    pub fn complement_prob(self) -> f64 {
        self.log_one_minus_eps.exp()
    }

    /// `1 − ε` as a `LogProb`, i.e. the legs swapped.
    pub fn complement(self) -> Self {
        LogProb {
            log_eps: self.log_one_minus_eps,
            log_one_minus_eps: self.log_eps,
        }
    }

    pub fn is_zero(self) -> bool {
        self.log_eps == f64::NEG_INFINITY
    }

    pub fn is_one(self) -> bool {
        self.log_one_minus_eps == f64::NEG_INFINITY
    }

    /// Total order on `ε`, resolved on whichever leg is more precise.
    pub fn cmp_prob(self, other: Self) -> Ordering {
        if self.log_eps <= -std::f64::consts::LN_2 || other.log_eps <= -std::f64::consts::LN_2 {
            self.log_eps.total_cmp(&other.log_eps)
        } else {
            other.log_one_minus_eps.total_cmp(&self.log_one_minus_eps)
        }
    }
}

impl fmt::Debug for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LogProb(eps={:e}, ln_eps={}, ln_1m_eps={})",
            self.prob(),
            self.log_eps,
            self.log_one_minus_eps
        )
    }
}
