//! Substring equality and longest common extensions.
//!
//! A query is cut at every recent edit inside either substring. Recently
//! inserted characters are compared directly; every remaining piece is free
//! of recent edits, so it appears unchanged in each delayed level and is
//! compared there by covering it with synchronizing-set occurrences, one pair
//! of checks per `τ = 2, 4, 8, …`.

use crate::error::{check_range, Error, Result};
use crate::hierarchy::{Hierarchy, RecordKind};
use crate::marked_string::MarkedString;
use crate::primitives::tick;
use crate::fanout;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    /// Covers `[i+τ/2+off, i+τ+off)`.
    Prefix(usize),
    /// Covers `[e−τ−off, e−τ/2−off)` for the end `e = i+m`.
    Suffix(usize),
}

/// Where the checks for one `τ` run.
#[derive(Debug, Clone, Copy)]
enum Source {
    /// Compare characters of the current string.
    Direct,
    /// Synchronizing set `sync` of level `level` (0-based).
    Sync { level: usize, sync: usize },
}

/// Candidate ranges `[lo, hi]` of one LCE search, one per round.
pub type SearchTrace = Vec<(usize, usize)>;

fn mark_in(b: &MarkedString, i: usize) -> Option<u64> {
    if i == 0 || i > b.len() {
        None
    } else {
        b.mark_at(i)
    }
}

impl Hierarchy {
    fn source(&self, tau: usize) -> Source {
        if self.virtual_taus.contains(&tau) {
            return Source::Direct;
        }
        for (li, lv) in self.levels.iter().enumerate() {
            if let Some(si) = lv.sync.iter().position(|s| s.tau == tau) {
                return Source::Sync { level: li, sync: si };
            }
        }
        Source::Direct
    }

    fn check_query(&self, i: usize, j: usize, m: usize) -> Result<()> {
        let len = self.len();
        if m == 0 {
            check_range(i, len + 1)?;
            return check_range(j, len + 1);
        }
        check_range(i, len)?;
        check_range(j, len)?;
        check_range(i + m - 1, len)?;
        check_range(j + m - 1, len)
    }

    /// `S[i, i+m) = S[j, j+m)` on a settled hierarchy.
    pub fn eq_settled(&self, i: usize, j: usize, m: usize) -> Result<bool> {
        if !self.is_settled() {
            return Err(Error::InvalidArgument(format!("{} updates still in flight", self.in_flight())));
        }
        self.eq_live(i, j, m)
    }

    /// `S[i, i+m) = S[j, j+m)` on the current string, whatever the state of
    /// the pipeline.
    pub fn eq_live(&self, i: usize, j: usize, m: usize) -> Result<bool> {
        self.check_query(i, j, m)?;
        if m == 0 || i == j {
            return Ok(true);
        }
        let c = |x: usize| self.base.char(x).unwrap();
        if c(i) != c(j) || c(i + m - 1) != c(j + m - 1) {
            return Ok(false);
        }
        let (naive, pieces) = self.cut(i, j, m);
        for t in naive {
            tick(1);
            if c(i + t) != c(j + t) {
                return Ok(false);
            }
        }
        for (a, b) in pieces {
            if !self.eq_piece(i + a, j + a, b - a) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Offsets of recently inserted characters in either substring, and the
    /// pieces `[a, b)` of offsets between them and the recent deletions.
    fn cut(&self, i: usize, j: usize, m: usize) -> (Vec<usize>, Vec<(usize, usize)>) {
        let mut naive = Vec::new();
        let mut cuts = vec![0, m];
        for f in &self.pending {
            tick(1);
            for s in [i, j] {
                match f.entry {
                    RecordKind::Inserted(p) if p >= s && p < s + m => {
                        naive.push(p - s);
                        cuts.push(p - s);
                        cuts.push(p - s + 1);
                    }
                    RecordKind::Gap(g) if g > s && g < s + m => cuts.push(g - s),
                    _ => {}
                }
            }
        }
        naive.sort_unstable();
        naive.dedup();
        cuts.sort_unstable();
        cuts.dedup();
        let pieces = cuts
            .windows(2)
            .map(|w| (w[0], w[1]))
            .filter(|&(a, _)| naive.binary_search(&a).is_err())
            .collect();
        (naive, pieces)
    }

    /// Equality of two pieces without recent edits.
    fn eq_piece(&self, x: usize, y: usize, m: usize) -> bool {
        if x == y {
            return true;
        }
        let c = |p: usize| self.base.char(p).unwrap();
        tick(2);
        if c(x) != c(y) || c(x + m - 1) != c(y + m - 1) {
            return false;
        }
        let mut taus = Vec::new();
        let mut tau = 2;
        while 3 * tau / 2 <= m {
            taus.push(tau);
            tau *= 2;
        }
        let Some(&top) = taus.last() else {
            return true;
        };
        let checks = |tau: usize| {
            let mut v = vec![Check::Prefix(0), Check::Suffix(0)];
            if tau == top && 2 * tau < m {
                v.push(Check::Prefix(tau / 2));
                v.push(Check::Suffix(tau / 2));
            }
            v
        };
        // the direct levels are cheap, so they run first
        let (direct, synced): (Vec<usize>, Vec<usize>) =
            taus.iter().partition(|&&t| matches!(self.source(t), Source::Direct));
        for &tau in &direct {
            for ch in checks(tau) {
                let (a, b) = match ch {
                    Check::Prefix(off) => (tau / 2 + off, tau + off),
                    Check::Suffix(off) => (m - tau - off, m - tau / 2 - off),
                };
                tick((b - a) as u64);
                if (a..b).any(|t| c(x + t) != c(y + t)) {
                    return false;
                }
            }
        }
        if synced.is_empty() {
            return true;
        }
        let xs = self.level_positions(x);
        let ys = self.level_positions(y);
        for &tau in &synced {
            let Source::Sync { level, sync } = self.source(tau) else { unreachable!() };
            let b = &self.levels[level].sync[sync].b;
            for ch in checks(tau) {
                if !sync_check(b, tau, xs[level], ys[level], m, ch) {
                    return false;
                }
            }
        }
        true
    }

    /// Length of the longest common prefix of the suffixes at `i` and `j`.
    pub fn lcp(&self, i: usize, j: usize) -> Result<usize> {
        self.lcp_traced(i, j).map(|x| x.0)
    }

    /// [`Hierarchy::lcp`] together with the candidate range of every round.
    pub fn lcp_traced(&self, i: usize, j: usize) -> Result<(usize, SearchTrace)> {
        let len = self.len();
        check_range(i, len)?;
        check_range(j, len)?;
        if i == j {
            return Ok((len - i + 1, vec![(len - i + 1, len - i + 1)]));
        }
        let hi = len + 1 - i.max(j);
        self.search(hi, |m| self.eq_live(i, j, m).unwrap())
    }

    /// Length of the longest common suffix of the prefixes ending at `i` and `j`.
    pub fn lcs(&self, i: usize, j: usize) -> Result<usize> {
        self.lcs_traced(i, j).map(|x| x.0)
    }

    pub fn lcs_traced(&self, i: usize, j: usize) -> Result<(usize, SearchTrace)> {
        let len = self.len();
        check_range(i, len)?;
        check_range(j, len)?;
        if i == j {
            return Ok((i, vec![(i, i)]));
        }
        let hi = i.min(j);
        self.search(hi, |m| self.eq_live(i + 1 - m, j + 1 - m, m).unwrap())
    }

    /// [`Hierarchy::lcp`], but never larger than `cap`.
    pub fn lcp_bounded(&self, i: usize, j: usize, cap: usize) -> Result<usize> {
        let len = self.len();
        check_range(i, len)?;
        check_range(j, len)?;
        let hi = (len + 1 - i.max(j)).min(cap);
        if i == j {
            return Ok(hi);
        }
        self.search(hi, |m| self.eq_live(i, j, m).unwrap()).map(|x| x.0)
    }

    /// [`Hierarchy::lcs`], but never larger than `cap`.
    pub fn lcs_bounded(&self, i: usize, j: usize, cap: usize) -> Result<usize> {
        let len = self.len();
        check_range(i, len)?;
        check_range(j, len)?;
        let hi = i.min(j).min(cap);
        if i == j {
            return Ok(hi);
        }
        self.search(hi, |m| self.eq_live(i + 1 - m, j + 1 - m, m).unwrap()).map(|x| x.0)
    }

    /// Largest `m ∈ [0, hi]` with `pred(m)`, for a predicate that holds for a
    /// prefix of the range. Every round probes up to `⌈n^ε⌉` lengths.
    fn search(&self, hi: usize, pred: impl Fn(usize) -> bool) -> Result<(usize, SearchTrace)> {
        let k = fanout(self.capacity(), self.epsilon());
        let (mut lo, mut hi) = (0usize, hi);
        let mut trace = vec![(lo, hi)];
        while lo < hi {
            let width = hi - lo;
            let mut probes: Vec<usize> = (1..=k).map(|t| lo + (width * t).div_ceil(k)).collect();
            probes.dedup();
            // the round's probes are independent; the first failing one bounds the answer
            let results: Vec<bool> = probes.iter().map(|&p| pred(p)).collect();
            match results.iter().position(|&r| !r) {
                Some(0) => hi = probes[0] - 1,
                Some(q) => {
                    lo = probes[q - 1];
                    hi = probes[q] - 1;
                }
                None => lo = hi,
            }
            trace.push((lo, hi));
        }
        Ok((lo, trace))
    }

    /// Rounds an LCE search needs at most: `⌈log_k(n+1)⌉` for `k = ⌈n^ε⌉`.
    pub fn search_rounds(&self) -> u32 {
        let k = fanout(self.capacity(), self.epsilon()) as f64;
        let r = ((self.capacity() + 1) as f64).ln() / k.ln();
        r.ceil() as u32
    }
}

/// One check of the covering on the synchronizing set `b` of `τ`, for the
/// pieces starting at `x` and `y` (positions in `b`) with length `m`.
fn sync_check(b: &MarkedString, tau: usize, x: usize, y: usize, m: usize, check: Check) -> bool {
    let half = tau / 2;
    tick(4);
    match check {
        Check::Prefix(off) => {
            let (x0, y0) = (x + off, y + off);
            match b.mark_at_or_after(x0) {
                Some((p, name)) if p < x0 + half => {
                    if p + tau <= x + m {
                        mark_in(b, y + (p - x)) == Some(name)
                    } else {
                        // too short for this τ; lower levels decide
                        true
                    }
                }
                // periodic start: the other side must not have an occurrence either
                _ => !matches!(b.mark_at_or_after(y0), Some((q, _)) if q < y0 + half && q + tau <= y + m),
            }
        }
        Check::Suffix(off) => {
            let (ex, ey) = (x + m - off, y + m - off);
            let last = |e: usize| if e > tau + 1 { b.mark_at_or_before(e - tau - 1) } else { None };
            match last(ex) {
                Some((p, name)) if p + tau + half >= ex => {
                    if p >= x {
                        mark_in(b, y + (p - x)) == Some(name)
                    } else {
                        true
                    }
                }
                _ => !matches!(last(ey), Some((q, _)) if q + tau + half >= ey && q >= y),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{naive_eq, naive_lcp, naive_lcs};
    use crate::{Edit, Mode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SAMPLE: &str = "ababcaabbabcaabbabcb";

    fn sym(s: &str) -> Vec<u32> {
        s.bytes().map(u32::from).collect()
    }

    #[test]
    fn sample_queries() {
        let h = Hierarchy::from_symbols(64, 0.5, &sym(SAMPLE)).unwrap();
        assert!(h.eq_settled(2, 9, 11).unwrap());
        assert!(!h.eq_settled(2, 9, 12).unwrap());
        assert_eq!(h.lcp(2, 9).unwrap(), 11);
        assert_eq!(h.lcs(12, 19).unwrap(), 11);
        assert_eq!(h.lcp(5, 5).unwrap(), 16);
        assert!(h.eq_settled(3, 3, 10).unwrap());
        assert!(h.eq_settled(20, 1, 0).unwrap());
    }

    #[test]
    fn bad_queries() {
        let h = Hierarchy::new(16, 0.5).unwrap();
        assert!(h.lcp(1, 1).is_err());
        let h = Hierarchy::from_symbols(16, 0.5, &[1, 2, 3]).unwrap();
        assert!(h.eq_live(2, 1, 3).is_err());
        assert!(h.lcs(0, 1).is_err());
        let mut h = h;
        h.insert(1, 4).unwrap();
        assert!(h.eq_settled(1, 2, 1).is_err());
    }

    #[test]
    fn exhaustive_small_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in 0..12 {
            let len = [20, 40, 64][t % 3];
            let sigma = [2, 3, 5][t % 3];
            let s: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=sigma)).collect();
            let h = Hierarchy::from_symbols(128, 0.5, &s).unwrap();
            for i in 1..=len {
                for j in 1..=len {
                    for m in 0..=len + 1 - i.max(j) {
                        assert_eq!(h.eq_settled(i, j, m).unwrap(), naive_eq(&s, i, j, m).unwrap(), "{s:?} {i} {j} {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn periodic_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for t in 0..30 {
            let p = 1 + t % 7;
            let unit: Vec<u32> = (0..p).map(|_| rng.gen_range(1..3)).collect();
            let mut s: Vec<u32> = (0..300).map(|x| unit[x % p]).collect();
            for _ in 0..t % 4 {
                let x = rng.gen_range(0..s.len());
                s[x] = 3;
            }
            let h = Hierarchy::from_symbols(512, 0.5, &s).unwrap();
            for _ in 0..300 {
                let i = rng.gen_range(1..=s.len());
                let j = rng.gen_range(1..=s.len());
                assert_eq!(h.lcp(i, j).unwrap(), naive_lcp(&s, i, j).unwrap(), "p {p} {i} {j}");
                assert_eq!(h.lcs(i, j).unwrap(), naive_lcs(&s, i, j).unwrap(), "p {p} {i} {j}");
                let cap = rng.gen_range(0..40);
                assert_eq!(h.lcp_bounded(i, j, cap).unwrap(), naive_lcp(&s, i, j).unwrap().min(cap));
                assert_eq!(h.lcs_bounded(i, j, cap).unwrap(), naive_lcs(&s, i, j).unwrap().min(cap));
            }
        }
    }

    #[test]
    fn live_queries_during_updates() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for mode in [Mode::Pipelined, Mode::Eager] {
            let mut h = Hierarchy::with_mode(400, 0.5, mode).unwrap();
            for step in 0..1500 {
                let len = h.len();
                if len < 350 && (len == 0 || rng.gen_bool(0.6)) {
                    let ch = if len > 4 && rng.gen_bool(0.5) { h.char_at(len - 3).unwrap() } else { rng.gen_range(1..4) };
                    h.apply(Edit::Insert { pos: rng.gen_range(1..=len + 1), ch }).unwrap();
                } else {
                    h.apply(Edit::Delete { pos: rng.gen_range(1..=len) }).unwrap();
                }
                let s = h.to_vec();
                if s.is_empty() {
                    continue;
                }
                for _ in 0..3 {
                    let i = rng.gen_range(1..=s.len());
                    let j = rng.gen_range(1..=s.len());
                    assert_eq!(h.lcp(i, j).unwrap(), naive_lcp(&s, i, j).unwrap(), "step {step}");
                    assert_eq!(h.lcs(i, j).unwrap(), naive_lcs(&s, i, j).unwrap(), "step {step}");
                }
            }
        }
    }

    #[test]
    fn search_shrinks_every_round() {
        let s: Vec<u32> = std::iter::repeat_n(1, 200).collect();
        let h = Hierarchy::from_symbols(256, 0.5, &s).unwrap();
        let k = fanout(256, 0.5);
        let (v, trace) = h.lcp_traced(1, 2).unwrap();
        assert_eq!(v, 199);
        for w in trace.windows(2) {
            let (a, b) = (w[0].1 - w[0].0 + 1, w[1].1 - w[1].0 + 1);
            assert!(b == 1 || b * k <= a + k, "{trace:?}");
        }
        assert!(trace.len() as u32 <= h.search_rounds() + 1);
    }
}
