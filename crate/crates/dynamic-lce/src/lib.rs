//! Dynamic longest-common-extension queries over a string under insertions
//! and deletions.
//!
//! The string is covered by a hierarchy of decompositions and string
//! synchronizing sets. Each level of the hierarchy lags a fixed number of
//! updates behind the current string; queries combine the lagged levels with
//! a short record of recent edits. Brute-force oracles for every query live in
//! [`oracles`] and are used throughout the test suites.
//!
//! All positions are 1-based and intervals `[i, i+m)` are half-open.

pub mod coin_flip;
pub mod dyck;
pub mod error;
pub mod hierarchy;
pub mod lce;
pub mod marked_string;
pub mod names;
pub mod neighbor;
pub mod oracles;
pub mod prepare;
pub mod primitives;
pub mod squares;
pub mod trace;

pub use error::{Error, Result};

pub use hierarchy::{Edit, Hierarchy, Mode};
pub use marked_string::MarkedString;

/// Iterated logarithm: how often `log2` must be applied until the value is at most 1.
pub fn log_star(x: f64) -> u32 {
    let mut v = x;
    let mut k = 0;
    while v > 1.0 {
        v = v.log2();
        k += 1;
    }
    k
}

/// `log*` of `2^e`, for exponents too large to hold in a float.
pub fn log_star_pow2(e: f64) -> u32 {
    if e <= 0.0 {
        return 0;
    }
    1 + log_star(e)
}

/// `⌈log2 n⌉` for `n ≥ 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `⌈n^ε⌉`, at least 2.
pub fn fanout(n: usize, epsilon: f64) -> usize {
    let f = (n as f64).powf(epsilon);
    // guard against 27^(1/3) = 3.0000000000000004
    let r = f.round();
    let c = if (f - r).abs() < 1e-9 { r } else { f.ceil() };
    (c as usize).max(2)
}
