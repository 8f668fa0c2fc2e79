//! Fixed-universe successor/predecessor set over `[1, u]`.
//!
//! A 64-ary tree of bit words: each level summarizes which words of the level
//! below are non-zero, so a neighbor query touches one word per level.

use crate::primitives::tick;

#[derive(Debug, Clone)]
pub struct NeighborSet {
    universe: usize,
    levels: Vec<Vec<u64>>,
    len: usize,
}

impl NeighborSet {
    /// Empty set over `[1, universe]`.
    pub fn new(universe: usize) -> Self {
        let mut levels = Vec::new();
        let mut width = universe + 1;
        loop {
            let words = width.div_ceil(64);
            levels.push(vec![0u64; words]);
            if words == 1 {
                break;
            }
            width = words;
        }
        NeighborSet { universe, levels, len: 0 }
    }

    /// Set holding every element of `[1, universe]`.
    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        let mut width = universe + 1;
        for lvl in s.levels.iter_mut() {
            for (w, word) in lvl.iter_mut().enumerate() {
                let lo = w * 64;
                let hi = (lo + 64).min(width);
                if hi > lo {
                    *word = if hi - lo == 64 { !0 } else { (1u64 << (hi - lo)) - 1 };
                }
            }
            width = width.div_ceil(64);
        }
        s.levels[0][0] &= !1;
        s.len = universe;
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, x: usize) -> bool {
        x <= self.universe && self.levels[0][x / 64] >> (x % 64) & 1 == 1
    }

    pub fn insert(&mut self, x: usize) -> bool {
        assert!(x >= 1 && x <= self.universe, "{x} outside [1, {}]", self.universe);
        if self.contains(x) {
            return false;
        }
        self.len += 1;
        let mut i = x;
        for lvl in self.levels.iter_mut() {
            tick(1);
            let was_zero = lvl[i / 64] == 0;
            lvl[i / 64] |= 1 << (i % 64);
            if !was_zero {
                break;
            }
            i /= 64;
        }
        true
    }

    pub fn remove(&mut self, x: usize) -> bool {
        if x == 0 || !self.contains(x) {
            return false;
        }
        self.len -= 1;
        let mut i = x;
        for lvl in self.levels.iter_mut() {
            tick(1);
            lvl[i / 64] &= !(1 << (i % 64));
            if lvl[i / 64] != 0 {
                break;
            }
            i /= 64;
        }
        true
    }

    /// Smallest element `≥ x`.
    pub fn succ_eq(&self, x: usize) -> Option<usize> {
        if x > self.universe {
            return None;
        }
        let x = x.max(1);
        // climb until a word holds something at or after the current index
        let mut i = x;
        let mut depth = 0;
        loop {
            tick(1);
            let w = self.levels[depth][i / 64] & (!0u64 << (i % 64));
            if w != 0 {
                i = (i / 64) * 64 + w.trailing_zeros() as usize;
                break;
            }
            if depth + 1 == self.levels.len() {
                return None;
            }
            i = i / 64 + 1;
            depth += 1;
            if i / 64 >= self.levels[depth].len() {
                return None;
            }
        }
        while depth > 0 {
            tick(1);
            depth -= 1;
            let w = self.levels[depth][i];
            i = i * 64 + w.trailing_zeros() as usize;
        }
        Some(i)
    }

    /// Largest element `≤ x`.
    pub fn pred_eq(&self, x: usize) -> Option<usize> {
        if x == 0 {
            return None;
        }
        let x = x.min(self.universe);
        let mut i = x;
        let mut depth = 0;
        loop {
            tick(1);
            let shift = 63 - (i % 64);
            let w = self.levels[depth][i / 64] & (!0u64 >> shift);
            if w != 0 {
                i = (i / 64) * 64 + 63 - w.leading_zeros() as usize;
                break;
            }
            if depth + 1 == self.levels.len() || i / 64 == 0 {
                return None;
            }
            i = i / 64 - 1;
            depth += 1;
        }
        while depth > 0 {
            tick(1);
            depth -= 1;
            let w = self.levels[depth][i];
            i = i * 64 + 63 - w.leading_zeros() as usize;
        }
        (i >= 1).then_some(i)
    }
}
