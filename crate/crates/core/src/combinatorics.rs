//! Exact big-integer helpers for binomials and bit widths.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// C(n, k) exactly.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// C(n, k) as a saturating `u128`, for cost estimates.
pub fn binomial_u128(n: u64, k: u64) -> u128 {
    binomial(n, k).to_u128().unwrap_or(u128::MAX)
}

/// `⌈log₂ x⌉` for `x ≥ 1`; zero for `x ≤ 1`.
pub fn ceil_log2(x: &BigUint) -> u64 {
    if x <= &BigUint::one() {
        0
    } else {
        (x - 1u32).bits()
    }
}

pub fn ceil_log2_u64(x: u64) -> u32 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros()
    }
}

/// Smallest `e` with `base^e ≥ x`.
pub fn ceil_log_base(base: u64, x: &BigUint) -> u64 {
    assert!(base >= 2);
    let mut e = 0;
    let mut p = BigUint::one();
    while &p < x {
        p *= base;
        e += 1;
    }
    e
}

/// `log₂ x` in double precision, valid for arbitrarily large `x > 0`.
pub fn log2_big(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "log2 of zero");
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).log2() + shift as f64
}

/// `log₂ C(n, k)`.
pub fn log2_binomial(n: u64, k: u64) -> f64 {
    log2_big(&binomial(n, k))
}
