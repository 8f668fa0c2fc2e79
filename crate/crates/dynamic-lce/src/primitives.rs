//! Static building blocks (first occurrence, maximum, prefix sums) and the
//! operation ledger that stands in for processor counts.
//!
//! The parallel algorithms are simulated round by round. Every round charges
//! its logical tasks to a thread-local counter, so the work of a phase is the
//! number of primitive operations it performed and its width is the largest
//! number of tasks a single round used.

use std::cell::Cell;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
    static WIDTH: Cell<u64> = const { Cell::new(0) };
}

/// Charge `k` primitive operations to the current thread.
#[inline]
pub fn tick(k: u64) {
    OPS.with(|c| c.set(c.get() + k));
}

/// Record a round that ran `w` logically parallel tasks.
#[inline]
pub fn round(w: u64) {
    tick(w);
    WIDTH.with(|c| c.set(c.get().max(w)));
}

fn counters() -> (u64, u64) {
    (OPS.with(|c| c.get()), WIDTH.with(|c| c.get()))
}

fn reset_width() {
    WIDTH.with(|c| c.set(0));
}

/// Cost of one named phase.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCost {
    pub phase_name: String,
    pub primitive_ops: u64,
    pub peak_parallel_width: u64,
    /// How many times the phase was entered.
    pub calls: u64,
}

/// Per-phase operation counts.
///
/// Phases are measured with [`WorkLedger::measure`], which reads the
/// thread-local counters before and after the closure.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorkLedger {
    phases: BTreeMap<String, PhaseCost>,
}

impl WorkLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Run `f` and charge everything it counts to `phase`.
    pub fn measure<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let (before, outer_width) = counters();
        reset_width();
        let out = f();
        let (after, width) = counters();
        WIDTH.with(|c| c.set(outer_width.max(width)));
        self.add(phase, after - before, width);
        out
    }

    /// Add `ops` operations with peak width `width` to `phase` directly.
    pub fn add(&mut self, phase: &str, ops: u64, width: u64) {
        let e = self.phases.entry(phase.to_string()).or_insert_with(|| PhaseCost {
            phase_name: phase.to_string(),
            ..PhaseCost::default()
        });
        e.primitive_ops += ops;
        e.peak_parallel_width = e.peak_parallel_width.max(width);
        e.calls += 1;
    }

    /// Adds every phase of `other` to this ledger.
    pub fn absorb(&mut self, other: &WorkLedger) {
        for p in other.phases.values() {
            let e = self.phases.entry(p.phase_name.clone()).or_insert_with(|| PhaseCost {
                phase_name: p.phase_name.clone(),
                ..PhaseCost::default()
            });
            e.primitive_ops += p.primitive_ops;
            e.peak_parallel_width = e.peak_parallel_width.max(p.peak_parallel_width);
            e.calls += p.calls;
        }
    }

    pub fn phase(&self, name: &str) -> PhaseCost {
        self.phases.get(name).cloned().unwrap_or_else(|| PhaseCost {
            phase_name: name.to_string(),
            ..PhaseCost::default()
        })
    }

    /// Immutable snapshot of all phases, ordered by name.
    pub fn report(&self) -> Vec<PhaseCost> {
        self.phases.values().cloned().collect()
    }

    /// Line-oriented form: `phase <name> ops <k> width <w>`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in self.phases.values() {
            s.push_str(&format!(
                "phase {} ops {} width {}\n",
                p.phase_name, p.primitive_ops, p.peak_parallel_width
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.report()).expect("ledger serializes")
    }
}

/// Smallest 1-based `i` with `xs[i] = e`.
///
/// Splits the input into `⌈√n⌉` segments, finds the first segment holding
/// `e`, then the first position inside that segment.
pub fn first_index_of<T: PartialEq>(xs: &[T], e: &T) -> Option<usize> {
    let n = xs.len();
    if n == 0 {
        return None;
    }
    let seg = ((n as f64).sqrt().ceil() as usize).max(1);
    round(n as u64);
    let nseg = n.div_ceil(seg);
    let hit: Vec<bool> = (0..nseg)
        .map(|s| xs[s * seg..((s + 1) * seg).min(n)].iter().any(|x| x == e))
        .collect();
    // minimum over the segment flags, one comparison per pair of segments
    round((nseg * nseg) as u64);
    let s = (0..nseg).find(|&s| hit[s] && (0..s).all(|t| !hit[t]))?;
    let lo = s * seg;
    let hi = ((s + 1) * seg).min(n);
    round(((hi - lo) * (hi - lo)) as u64);
    (lo..hi).find(|&i| xs[i] == *e).map(|i| i + 1)
}

/// 1-based index of a maximum of `xs`, leftmost among ties.
///
/// Runs rounds of `⌈n^ε⌉`-sized groups; each group picks its maximum by
/// comparing all pairs, so the candidate list shrinks by that factor per round.
pub fn max_position<T: PartialOrd>(xs: &[T], epsilon: f64) -> Result<usize> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("max_position of empty sequence".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0,1]")));
    }
    let g = crate::fanout(xs.len(), epsilon);
    let mut cand: Vec<usize> = (0..xs.len()).collect();
    while cand.len() > 1 {
        let mut next = Vec::with_capacity(cand.len().div_ceil(g));
        round((cand.len() * g) as u64);
        for grp in cand.chunks(g) {
            // the winner is the element no other element beats; earlier wins ties
            let w = grp
                .iter()
                .copied()
                .find(|&a| {
                    grp.iter()
                        .all(|&b| !(xs[b] > xs[a]) && (b >= a || !(xs[b] >= xs[a])))
                })
                .expect("a total preorder has a leftmost maximum");
            next.push(w);
        }
        cand = next;
    }
    Ok(cand[0] + 1)
}

/// Prefix sums satisfying `z_i ≤ Y[i] ≤ (1+ε)·z_i` and `Y[i] − Y[i−1] ≥ X[i]`.
///
/// Exact sums meet both bounds for every ε ≥ 0.
pub fn consistent_prefix_sums(xs: &[i64]) -> Result<Vec<i64>> {
    if let Some(x) = xs.iter().find(|&&x| x < 0) {
        return Err(Error::InvalidArgument(format!("negative input {x}")));
    }
    round(xs.len() as u64);
    let mut acc = 0i64;
    Ok(xs
        .iter()
        .map(|&x| {
            acc += x;
            acc
        })
        .collect())
}

/// Checks the two prefix-sum bounds for a candidate output.
pub fn prefix_sums_valid(xs: &[i64], ys: &[i64], eps: f64) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    let mut z = 0i64;
    let mut prev = 0i64;
    for (&x, &y) in xs.iter().zip(ys) {
        z += x;
        if y < z || (y as f64) > (1.0 + eps) * z as f64 || y - prev < x {
            return false;
        }
        prev = y;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scan_first(xs: &[u8], e: u8) -> Option<usize> {
        xs.iter().position(|&x| x == e).map(|i| i + 1)
    }

    #[test]
    fn first_index_examples() {
        assert_eq!(first_index_of(&[4, 7, 7, 2], &7), Some(2));
        assert_eq!(first_index_of::<i32>(&[], &5), None);
        assert_eq!(first_index_of(&[3], &3), Some(1));
    }

    #[test]
    fn first_index_exhaustive_small() {
        for len in 0..=8u32 {
            for code in 0..3u32.pow(len) {
                let mut c = code;
                let xs: Vec<u8> = (0..len)
                    .map(|_| {
                        let d = (c % 3) as u8;
                        c /= 3;
                        d
                    })
                    .collect();
                for e in 0..3 {
                    assert_eq!(first_index_of(&xs, &e), scan_first(&xs, e), "{xs:?} {e}");
                }
            }
        }
    }

    #[test]
    fn max_examples() {
        assert_eq!(max_position(&[1, 9, 3], 0.5), Ok(2));
        assert_eq!(max_position(&[5], 0.5), Ok(1));
        assert_eq!(max_position(&[2, 2], 0.5), Ok(1));
        assert!(matches!(max_position::<i32>(&[], 0.5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn prefix_sum_examples() {
        assert_eq!(consistent_prefix_sums(&[1, 2, 3]).unwrap(), vec![1, 3, 6]);
        assert_eq!(consistent_prefix_sums(&[0, 0, 0]).unwrap(), vec![0, 0, 0]);
        assert!(consistent_prefix_sums(&[1, -1]).is_err());
        assert!(!prefix_sums_valid(&[1, 2], &[1, 2], 0.0));
    }

    #[test]
    fn ledger_basics() {
        let l = WorkLedger::new();
        assert!(l.report().is_empty());
        assert_eq!(l.phase("x").primitive_ops, 0);
        let mut l = WorkLedger::new();
        l.measure("one", || tick(1));
        assert_eq!(l.phase("one").primitive_ops, 1);
        assert_eq!(l.to_text(), "phase one ops 1 width 0\n");
        let run = || {
            let mut l = WorkLedger::new();
            l.measure("scan", || first_index_of(&[5, 1, 2, 1, 9], &1));
            let _ = l.measure("max", || max_position(&[5, 1, 2, 1, 9], 0.5));
            l.to_text()
        };
        assert_eq!(run(), run());
        assert!(run().contains("phase max ops"));
    }

    proptest! {
        #[test]
        fn first_index_matches_scan(xs in proptest::collection::vec(0u8..6, 0..200), e in 0u8..6) {
            prop_assert_eq!(first_index_of(&xs, &e), scan_first(&xs, e));
        }

        #[test]
        fn max_is_leftmost_maximum(xs in proptest::collection::vec(0i32..20, 1..300), eps in 0.1f64..1.0) {
            let p = max_position(&xs, eps).unwrap() - 1;
            prop_assert!(xs.iter().all(|&x| x <= xs[p]));
            prop_assert!(xs[..p].iter().all(|&x| x < xs[p]));
        }

        #[test]
        fn prefix_sums_pass_both_checks(xs in proptest::collection::vec(0i64..1000, 0..100)) {
            let ys = consistent_prefix_sums(&xs).unwrap();
            prop_assert!(prefix_sums_valid(&xs, &ys, 0.0));
        }
    }
}
