//! Brute-force reference implementations.
//!
//! Nothing in here calls into the rest of the crate; every answer is computed
//! from the definitions by direct scanning so the oracles can judge the fast
//! structures independently.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Which checked property a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Consistency,
    Density,
    Sparseness,
    Names,
    FactorSize,
    Tiling,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Property::Consistency => "consistency",
            Property::Density => "density",
            Property::Sparseness => "sparseness",
            Property::Names => "names",
            Property::FactorSize => "factor-size",
            Property::Tiling => "tiling",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub property: Property,
    pub location: usize,
    pub details: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.property, self.location, self.details)
    }
}

/// List of violations; empty means every check passed.
pub type ViolationReport = Vec<Violation>;

fn bounds(s: &[u32], i: usize, m: usize) -> Result<()> {
    if i == 0 || i + m > s.len() + 1 {
        return Err(Error::OutOfRange { index: i, len: s.len() });
    }
    Ok(())
}

/// Whether `S[i, i+m) = S[j, j+m)`.
pub fn naive_eq(s: &[u32], i: usize, j: usize, m: usize) -> Result<bool> {
    bounds(s, i, m)?;
    bounds(s, j, m)?;
    Ok((0..m).all(|t| s[i - 1 + t] == s[j - 1 + t]))
}

/// Longest common prefix of the suffixes starting at `i` and `j`.
pub fn naive_lcp(s: &[u32], i: usize, j: usize) -> Result<usize> {
    bounds(s, i, 1)?;
    bounds(s, j, 1)?;
    let mut m = 0;
    while i + m <= s.len() && j + m <= s.len() && s[i - 1 + m] == s[j - 1 + m] {
        m += 1;
    }
    Ok(m)
}

/// Longest common suffix of the prefixes ending at `i` and `j`.
pub fn naive_lcs(s: &[u32], i: usize, j: usize) -> Result<usize> {
    bounds(s, i, 1)?;
    bounds(s, j, 1)?;
    let mut m = 0;
    while m < i && m < j && s[i - 1 - m] == s[j - 1 - m] {
        m += 1;
    }
    Ok(m)
}

fn log_star(x: f64) -> u32 {
    let mut v = x;
    let mut k = 0;
    while v > 1.0 {
        v = v.log2();
        k += 1;
    }
    k
}

/// Largest `|B ∩ [i, i+m)| / ((m/τ)·(log*(m/τ)+1))` over windows with `m ≥ τ`.
pub fn sparseness_ratio(len: usize, tau: usize, occ: &[usize]) -> f64 {
    let mut pre = vec![0usize; len + 2];
    for &b in occ {
        if b >= 1 && b <= len {
            pre[b] += 1;
        }
    }
    for x in 1..pre.len() {
        pre[x] += pre[x - 1];
    }
    let mut worst: f64 = 0.0;
    for i in 1..=len {
        for m in tau..=len + 1 - i {
            let c = pre[i + m - 1] - pre[i - 1];
            if c == 0 {
                continue;
            }
            let r = m as f64 / tau as f64;
            let bound = r * (log_star(r) as f64 + 1.0);
            worst = worst.max(c as f64 / bound);
        }
    }
    worst
}

/// Maximal segments `[a, e)` of length at least `seg` that have a period
/// `p ≤ pmax`, found by direct period testing.
fn periodic_segments(s: &[u32], seg: usize, pmax: usize) -> Vec<(usize, usize)> {
    let n = s.len();
    let mut out = vec![];
    for p in 1..=pmax.max(1) {
        if seg < p || seg > n {
            continue;
        }
        // runs of x with S[x] = S[x+p]; a segment [a, a+seg) has period p
        // iff every x in [a, a+seg-p) is in a run
        let need = seg - p;
        let mut x = 1;
        while x + p <= n {
            if s[x - 1] != s[x + p - 1] {
                x += 1;
                continue;
            }
            let r0 = x;
            while x + p <= n && s[x - 1] == s[x + p - 1] {
                x += 1;
            }
            if x - r0 >= need {
                out.push((r0, x + p));
            }
        }
    }
    out
}

/// Windows `[i, i+τ/2)` allowed to hold no occurrence: `i` lies in a segment
/// of length `3τ/2` with period `≤ τ/2`, or `S[i, i+τ)` contains a segment
/// of length `τ/2` with period `≤ τ/4`. The second case covers runs that a
/// single power factor spans.
fn density_exempt(s: &[u32], tau: usize) -> Vec<bool> {
    let n = s.len();
    let mut ex = vec![false; n + 2];
    for (a, e) in periodic_segments(s, 3 * tau / 2, tau / 2) {
        for c in ex.iter_mut().take(e.min(n + 1)).skip(a) {
            *c = true;
        }
    }
    let half = (tau / 2).max(1);
    for (a, e) in periodic_segments(s, half, tau / 4) {
        // i with max(a, i) + τ/2 ≤ min(e, i + τ)
        let lo = (a + half).saturating_sub(tau).max(1);
        let hi = e - half;
        for c in ex.iter_mut().take((hi + 1).min(n + 1)).skip(lo) {
            *c = true;
        }
    }
    ex
}

/// Checks a string synchronizing set `(B, f)` for `S` and `τ` property by property.
///
/// `b` lists `(position, name)` pairs. Positions must lie in `[1, |S|−τ]`.
/// Density is required for every window `[i, i+τ/2)` inside that range that
/// is not exempt for periodicity, and sparseness is checked against
/// `c_sparse` on windows of length at least `τ`.
pub fn check_sync_set(s: &[u32], tau: usize, b: &[(usize, u64)], c_sparse: f64) -> ViolationReport {
    let mut out = Vec::new();
    let n = s.len();
    if tau == 0 || tau > n {
        for &(p, _) in b {
            out.push(Violation {
                property: Property::Consistency,
                location: p,
                details: format!("occurrence in a set with tau {tau} > |S| {n}"),
            });
        }
        return out;
    }
    let top = n - tau;
    let mut name_at: HashMap<usize, u64> = HashMap::new();
    for &(p, f) in b {
        if p == 0 || p > top {
            out.push(Violation {
                property: Property::Consistency,
                location: p,
                details: format!("position outside [1, {top}]"),
            });
        }
        name_at.insert(p, f);
    }

    // consistency: group equal substrings
    let mut groups: HashMap<&[u32], Vec<usize>> = HashMap::new();
    for i in 1..=top {
        groups.entry(&s[i - 1..i - 1 + tau]).or_default().push(i);
    }
    for members in groups.values() {
        let inside: Vec<bool> = members.iter().map(|p| name_at.contains_key(p)).collect();
        if inside.iter().any(|&x| x) && inside.iter().any(|&x| !x) {
            let a = members[inside.iter().position(|&x| x).unwrap()];
            let z = members[inside.iter().position(|&x| !x).unwrap()];
            out.push(Violation {
                property: Property::Consistency,
                location: z,
                details: format!("equal to occurrence {a} but not in B"),
            });
        }
    }

    // density
    let half = (tau / 2).max(1);
    let mut occ: Vec<usize> = b.iter().map(|&(p, _)| p).collect();
    occ.sort_unstable();
    let mut cover: Option<Vec<bool>> = None;
    if top + 1 >= half {
        for i in 1..=(top + 1 - half) {
            let k = occ.partition_point(|&x| x < i);
            if k < occ.len() && occ[k] < i + half {
                continue;
            }
            let c = cover.get_or_insert_with(|| density_exempt(s, tau));
            if !c[i] {
                out.push(Violation {
                    property: Property::Density,
                    location: i,
                    details: format!("no occurrence in [{i}, {}) and no periodic exemption", i + half),
                });
            }
        }
    }

    // sparseness
    let r = sparseness_ratio(n, tau, &occ);
    if r > c_sparse {
        out.push(Violation {
            property: Property::Sparseness,
            location: 0,
            details: format!("ratio {r:.3} exceeds constant {c_sparse}"),
        });
    }

    // names
    let mut by_name: HashMap<u64, &[u32]> = HashMap::new();
    let mut by_text: HashMap<&[u32], u64> = HashMap::new();
    for &(p, f) in b {
        if p == 0 || p > top {
            continue;
        }
        let t = &s[p - 1..p - 1 + tau];
        if let Some(&prev) = by_name.get(&f) {
            if prev != t {
                out.push(Violation {
                    property: Property::Names,
                    location: p,
                    details: format!("name {f} shared by different substrings"),
                });
            }
        }
        if let Some(&g) = by_text.get(t) {
            if g != f {
                out.push(Violation {
                    property: Property::Names,
                    location: p,
                    details: format!("equal substrings named {g} and {f}"),
                });
            }
        }
        by_name.insert(f, t);
        by_text.insert(t, f);
    }
    out
}

/// Whether `u = w^z` for some `w` and `z ≥ 2`.
pub fn is_power(u: &[u32]) -> bool {
    let n = u.len();
    (1..n).any(|p| n % p == 0 && (p..n).all(|x| u[x] == u[x - p]))
}

/// Checks that `starts` tiles `S` and that the level-`ℓ` factor size bounds hold:
/// a factor that is not a proper power has length at most `2^{ℓ+1}`, and two
/// adjacent factors have total length at least `2^{ℓ+1}`.
pub fn check_decomposition(s: &[u32], level: u32, starts: &[usize]) -> ViolationReport {
    let mut out = Vec::new();
    let n = s.len();
    if n == 0 {
        if !starts.is_empty() {
            out.push(Violation {
                property: Property::Tiling,
                location: 0,
                details: "factors on an empty string".into(),
            });
        }
        return out;
    }
    if starts.first() != Some(&1) {
        out.push(Violation {
            property: Property::Tiling,
            location: 1,
            details: "first factor does not start at 1".into(),
        });
        return out;
    }
    if starts.windows(2).any(|w| w[0] >= w[1]) || *starts.last().unwrap() > n {
        out.push(Violation {
            property: Property::Tiling,
            location: 0,
            details: "factor starts not strictly ascending within the string".into(),
        });
        return out;
    }
    let cap = 1usize << (level + 1);
    let ends: Vec<usize> = starts.iter().skip(1).copied().chain(std::iter::once(n + 1)).collect();
    let lens: Vec<usize> = starts.iter().zip(&ends).map(|(a, b)| b - a).collect();
    for (k, (&a, &len)) in starts.iter().zip(&lens).enumerate() {
        if len > cap && !is_power(&s[a - 1..a - 1 + len]) {
            out.push(Violation {
                property: Property::FactorSize,
                location: a,
                details: format!("non-power factor of length {len} > {cap}"),
            });
        }
        if k + 1 < lens.len() && len + lens[k + 1] < cap {
            out.push(Violation {
                property: Property::FactorSize,
                location: a,
                details: format!("adjacent factors {len}+{} < {cap}", lens[k + 1]),
            });
        }
    }
    out
}

/// All squares `S[a, a+len) = vv` as `(a, len)` pairs.
pub fn naive_squares(s: &[u32]) -> BTreeSet<(usize, usize)> {
    let n = s.len();
    let mut out = BTreeSet::new();
    for a in 0..n {
        for half in 1..=(n - a) / 2 {
            if (0..half).all(|t| s[a + t] == s[a + half + t]) {
                out.insert((a + 1, 2 * half));
            }
        }
    }
    out
}

/// Whether the string contains no square.
pub fn naive_square_free(s: &[u32]) -> bool {
    let n = s.len();
    for a in 0..n {
        for half in 1..=(n - a) / 2 {
            if (0..half).all(|t| s[a + t] == s[a + half + t]) {
                return false;
            }
        }
    }
    true
}

/// Membership of `erase⊥(S)` in the one-bracket Dyck language.
///
/// `<`/`⟨` open, `>`/`⟩` close, every other character is void.
pub fn naive_dyck1(s: &str) -> bool {
    let mut depth: i64 = 0;
    for c in s.chars() {
        match c {
            '<' | '⟨' => depth += 1,
            '>' | '⟩' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

/// All `i ∈ [1, |P|]` with `P[1, i] = S[|S|−i+1, |S|]`.
pub fn naive_prefix_suffix(p: &[u32], s: &[u32]) -> BTreeSet<usize> {
    (1..=p.len().min(s.len()))
        .filter(|&i| p[..i] == s[s.len() - i..])
        .collect()
}

/// All starting positions of `P` in `T`.
pub fn naive_occurrences(t: &[u32], p: &[u32]) -> BTreeSet<usize> {
    if p.is_empty() || p.len() > t.len() {
        return BTreeSet::new();
    }
    (1..=t.len() - p.len() + 1)
        .filter(|&i| t[i - 1..i - 1 + p.len()] == *p)
        .collect()
}

/// Whether the two strings are equal once void symbols (`0`) are removed.
pub fn naive_erase_equal(s1: &[u32], s2: &[u32]) -> bool {
    let a: Vec<u32> = s1.iter().copied().filter(|&c| c != 0).collect();
    let b: Vec<u32> = s2.iter().copied().filter(|&c| c != 0).collect();
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<u32> {
        "ababcaabbabcaabbabcb".bytes().map(|b| (b - b'a' + 1) as u32).collect()
    }

    #[test]
    fn lce_examples() {
        let s = sample();
        assert_eq!(naive_lcp(&s, 2, 9), Ok(11));
        assert_eq!(naive_lcs(&s, 12, 19), Ok(11));
        assert_eq!(naive_eq(&s, 2, 9, 11), Ok(true));
        assert_eq!(naive_eq(&s, 2, 9, 12), Ok(false));
        assert_eq!(naive_lcs(&s, 1, 1), Ok(1));
        assert_eq!(naive_eq(&s, 5, 5, 3), Ok(true));
        assert!(naive_eq(&s, 15, 1, 7).is_err());
        assert!(naive_lcp(&[], 1, 1).is_err());
    }

    #[test]
    fn lcp_matches_reverse_lcs() {
        // the two scan directions agree on the reversed string
        let s = sample();
        let r: Vec<u32> = s.iter().rev().copied().collect();
        let n = s.len();
        for i in 1..=n {
            for j in 1..=n {
                assert_eq!(naive_lcp(&s, i, j), naive_lcs(&r, n + 1 - i, n + 1 - j));
            }
        }
    }

    #[test]
    fn squares_examples() {
        let s = [1, 2, 3, 1, 2, 3];
        assert!(naive_squares(&s).contains(&(1, 6)));
        assert!(!naive_square_free(&s));
        assert!(naive_square_free(&[1, 2, 3]));
        assert!(naive_squares(&[1, 2, 1]).is_empty());
    }

    #[test]
    fn dyck_examples() {
        assert!(naive_dyck1("⟨⊥⟨⟩⊥⟨⟩⟩"));
        assert!(!naive_dyck1("⟨⊥⟨⟩⊥⟨⟩⊥"));
        assert!(naive_dyck1("___"));
        assert!(!naive_dyck1("<"));
        assert!(!naive_dyck1("><"));
    }

    #[test]
    fn prefix_suffix_and_occurrences() {
        let enc = |t: &str| t.bytes().map(|b| b as u32).collect::<Vec<_>>();
        assert_eq!(naive_prefix_suffix(&enc("abab"), &enc("ccab")), BTreeSet::from([2]));
        assert_eq!(naive_prefix_suffix(&enc("aaaa"), &enc("aaaa")), BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(naive_occurrences(&enc("abab"), &enc("ab")), BTreeSet::from([1, 3]));
        assert_eq!(naive_occurrences(&enc("acbc"), &enc("cb")), BTreeSet::from([2]));
        assert!(naive_occurrences(&enc("acbc"), &enc("dd")).is_empty());
    }

    #[test]
    fn erase_equal() {
        assert!(naive_erase_equal(&[1, 0, 2], &[0, 1, 2]));
        assert!(!naive_erase_equal(&[1], &[0, 0]));
    }

    #[test]
    fn maximal_set_is_consistent_and_named() {
        let s = sample();
        let tau = 4;
        let mut ids: HashMap<Vec<u32>, u64> = HashMap::new();
        let b: Vec<(usize, u64)> = (1..=s.len() - tau)
            .map(|i| {
                let k = ids.len() as u64;
                (i, *ids.entry(s[i - 1..i - 1 + tau].to_vec()).or_insert(k))
            })
            .collect();
        let r = check_sync_set(&s, tau, &b, 1e9);
        assert!(r.is_empty(), "{r:?}");
    }

    #[test]
    fn fault_injection_detected() {
        let s = sample();
        let tau = 4;
        // S[2,6) = S[9,13) = "babc"; keep only one of them
        let b = vec![(2usize, 7u64)];
        let r = check_sync_set(&s, tau, &b, 1e9);
        assert!(r.iter().any(|v| v.property == Property::Consistency));
        assert!(r.iter().any(|v| v.property == Property::Density));
        let b = vec![(2usize, 7u64), (9, 8)];
        let r = check_sync_set(&s, tau, &b, 1e9);
        assert!(r.iter().any(|v| v.property == Property::Names));
    }

    #[test]
    fn periodic_exemption() {
        // a^20: no occurrence needed anywhere
        let s = vec![1u32; 20];
        assert!(check_sync_set(&s, 4, &[], 1e9).is_empty());
        let s: Vec<u32> = (1..=20).collect();
        assert!(!check_sync_set(&s, 4, &[], 1e9).is_empty());
        // a run shorter than 3τ/2 still exempts the windows that contain half of it
        let mut s: Vec<u32> = (1..=40).collect();
        s[10..18].fill(7);
        let r = check_sync_set(&s, 16, &[], 1e9);
        let at: Vec<usize> = r.iter().map(|v| v.location).collect();
        assert!(!at.contains(&3) && !at.contains(&11));
        assert!(at.contains(&2) && at.contains(&12));
    }

    #[test]
    fn decomposition_checks() {
        let s = sample();
        assert!(check_decomposition(&s, 1, &[1, 3, 5, 7, 9, 11, 13, 15, 17, 19]).is_empty());
        let r = check_decomposition(&s, 1, &[1, 2]);
        assert!(r.iter().any(|v| v.property == Property::FactorSize));
        let r = check_decomposition(&s, 1, &[2]);
        assert!(r.iter().any(|v| v.property == Property::Tiling));
        assert!(is_power(&[1, 2, 1, 2]));
        assert!(!is_power(&[1, 2, 1]));
        // a long power factor is allowed
        assert!(check_decomposition(&[3; 30], 1, &[1]).is_empty());
    }
}
