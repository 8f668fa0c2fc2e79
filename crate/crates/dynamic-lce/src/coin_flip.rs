//! Deterministic merge selection by coin tossing on a path.
//!
//! The input is a sequence of factor names over `[−1, N−1]`, where `−1` marks
//! a deactivated factor. The output has a 1 wherever a merge group starts.
//! Names are treated as an `N`-coloring of a path, reduced to six colors by
//! repeated bit comparison with the right neighbor, then to three colors, and
//! local minima of the three-coloring become the group starts.

use crate::error::{Error, Result};
use crate::primitives::round;

/// Name sequence over `[−1, N−1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeInput {
    pub names: Vec<i64>,
    pub domain: u64,
}

impl MergeInput {
    pub fn new(names: Vec<i64>, domain: u64) -> Self {
        MergeInput { names, domain }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &x) in self.names.iter().enumerate() {
            if x < -1 || x >= self.domain as i64 {
                return Err(Error::InvalidArgument(format!(
                    "name {x} at {} outside [-1, {}]",
                    i + 1,
                    self.domain as i64 - 1
                )));
            }
            if i > 0 && x != -1 && self.names[i - 1] == x {
                return Err(Error::InvalidArgument(format!(
                    "equal neighbors {x} at {} and {}",
                    i,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

pub type MergeBits = Vec<u8>;

fn bitlen(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// Number of reduction rounds for domain size `domain`; depends only on the
/// domain so that every position runs the same schedule.
pub fn reduction_rounds(domain: u64) -> u32 {
    let mut maxval = domain.saturating_sub(1);
    let mut r = 0;
    while maxval > 5 {
        let b = bitlen(maxval) as u64;
        maxval = 2 * (b - 1) + 1;
        r += 1;
    }
    r
}

/// Coloring after the bit-comparison rounds; every active position carries a
/// color in `[0, 5]` and neighbors never share one.
pub fn six_coloring(input: &MergeInput) -> Result<Vec<i64>> {
    input.validate()?;
    let mut c = input.names.clone();
    let n = c.len();
    for _ in 0..reduction_rounds(input.domain) {
        round(n as u64);
        let next: Vec<i64> = (0..n)
            .map(|i| {
                if c[i] < 0 {
                    return -1;
                }
                let me = c[i] as u64;
                // −1 or the end differs from everything at bit 0
                let k = match c.get(i + 1) {
                    Some(&r) if r >= 0 => (me ^ r as u64).trailing_zeros() as u64,
                    _ => 0,
                };
                (2 * k + ((me >> k) & 1)) as i64
            })
            .collect();
        c = next;
    }
    Ok(c)
}

fn active_neighbors(c: &[i64], i: usize) -> impl Iterator<Item = i64> + '_ {
    let l = if i > 0 { Some(c[i - 1]) } else { None };
    let r = c.get(i + 1).copied();
    l.into_iter().chain(r).filter(|&x| x >= 0)
}

/// Six-coloring reduced to `{0, 1, 2}` by recoloring 3, then 4, then 5.
pub fn three_coloring(input: &MergeInput) -> Result<Vec<i64>> {
    let mut c = six_coloring(input)?;
    let n = c.len();
    for col in 3..=5 {
        round(n as u64);
        // positions sharing a color are never adjacent, so one pass suffices
        let next: Vec<i64> = (0..n)
            .map(|i| {
                if c[i] != col {
                    return c[i];
                }
                (0..3)
                    .find(|&x| active_neighbors(&c, i).all(|y| y != x))
                    .expect("two neighbors block at most two colors")
            })
            .collect();
        c = next;
    }
    Ok(c)
}

/// The merge bit-string: a 1 starts a merge group.
pub fn choose_merges(input: &MergeInput) -> Result<MergeBits> {
    let c = three_coloring(input)?;
    let s = &input.names;
    let n = s.len();
    round(n as u64);
    let mut bits: Vec<u8> = (0..n)
        .map(|i| {
            let forced = s[i] == -1 || i == 0 || s[i - 1] == -1;
            let min = c[i] == 0 || (c[i] == 1 && active_neighbors(&c, i).all(|y| y != 0));
            u8::from(forced || min)
        })
        .collect();
    cleanup(s, &mut bits);
    Ok(bits)
}

/// Removes the `11` pairs next to deactivated positions and the string ends.
///
/// A forced 1 at the start of an active stretch may meet a local minimum
/// right after it, and a local minimum may sit right before a `−1`.
fn cleanup(s: &[i64], bits: &mut [u8]) {
    let n = s.len();
    round(n as u64);
    let mut p = 0;
    while p < n {
        if s[p] == -1 {
            p += 1;
            continue;
        }
        let mut q = p;
        while q + 1 < n && s[q + 1] != -1 {
            q += 1;
        }
        // active stretch p..=q
        let len = q - p + 1;
        let b = &mut bits[p..=q];
        match len {
            1 => {}
            2 => b[1] = 0,
            3 => {
                b[1] = 0;
                b[2] = 0;
            }
            _ => {
                match (b[1], b[2], b[3]) {
                    (1, 0, 0) => b[1..4].copy_from_slice(&[0, 1, 0]),
                    (1, 0, 1) => b[1..4].copy_from_slice(&[0, 0, 1]),
                    _ => {}
                }
                let e = len - 1;
                if b[e] == 1 {
                    match (b[e - 2], b[e - 1]) {
                        (0, 0) => b[e - 2..=e].copy_from_slice(&[0, 1, 0]),
                        (1, 0) => b[e - 2..=e].copy_from_slice(&[1, 0, 0]),
                        _ => {}
                    }
                }
            }
        }
        p = q + 1;
    }
}

/// Input positions bit `i` may depend on: `[i − 4, i + log*N + 5]`.
pub fn locality_window(i: usize, domain: u64) -> (i64, i64) {
    let ls = crate::log_star(domain as f64) as i64;
    (i as i64 - 4, i as i64 + ls + 5)
}

/// Violations of the structural merge-bit properties, as 1-based positions
/// with a short reason.
///
/// Checks: a `−1` at `i` forces `11` at `i, i+1`; a 1 at an active position is
/// followed by a 0 unless the position is a lone active one between barriers;
/// no `0000`.
pub fn check_merge_bits(names: &[i64], bits: &[u8]) -> Vec<(usize, &'static str)> {
    let n = names.len();
    let mut out = Vec::new();
    if bits.len() != n {
        out.push((0, "length mismatch"));
        return out;
    }
    let barrier = |i: isize| i < 0 || i as usize >= n || names[i as usize] == -1;
    for i in 0..n {
        if names[i] == -1 && (bits[i] != 1 || (i + 1 < n && bits[i + 1] != 1)) {
            out.push((i + 1, "deactivated position not followed by 11"));
        }
        if names[i] != -1 && bits[i] == 1 && i + 1 < n && bits[i + 1] == 1 {
            let lone = barrier(i as isize - 1) && barrier(i as isize + 1);
            if !lone {
                out.push((i + 1, "unforced 11"));
            }
        }
        if i + 4 <= n && bits[i..i + 4] == [0, 0, 0, 0] {
            out.push((i + 1, "0000"));
        }
    }
    out
}
