//! Ordered key map over padded child blocks, and the reference-counted name
//! registry built on it.
//!
//! Keys are symbol sequences of length at most `m`. A shorter key is treated
//! as padded with the void symbol 0, which sorts below every real symbol, so
//! the plain lexicographic order on the unpadded vectors is the padded order.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::neighbor::NeighborSet;
use crate::primitives::{consistent_prefix_sums, round, tick};

pub type Key = Vec<u64>;

#[derive(Debug, Clone)]
enum Slot<V> {
    Void,
    Entry(Key, V),
    Child(Box<Block<V>>),
}

#[derive(Debug, Clone)]
struct Block<V> {
    slots: Vec<Slot<V>>,
    leaf: bool,
    live: usize,
    min: Option<Key>,
    max: Option<Key>,
}

impl<V: Clone> Block<V> {
    fn empty(cap: usize, leaf: bool) -> Self {
        Block { slots: vec![Slot::Void; cap], leaf, live: 0, min: None, max: None }
    }

    fn items(&self) -> impl Iterator<Item = &Slot<V>> {
        self.slots.iter().filter(|s| !matches!(s, Slot::Void))
    }

    fn slot_min(s: &Slot<V>) -> Option<&Key> {
        match s {
            Slot::Void => None,
            Slot::Entry(k, _) => Some(k),
            Slot::Child(b) => b.min.as_ref(),
        }
    }

    fn slot_max(s: &Slot<V>) -> Option<&Key> {
        match s {
            Slot::Void => None,
            Slot::Entry(k, _) => Some(k),
            Slot::Child(b) => b.max.as_ref(),
        }
    }

    /// Spread `items` evenly over `cap` slots, voids interleaved.
    fn layout(items: Vec<Slot<V>>, cap: usize, leaf: bool) -> Self {
        let k = items.len();
        debug_assert!(k <= cap);
        let mut b = Block::empty(cap, leaf);
        if k > 0 {
            // item t takes one cell plus its share of the voids before the next item
            let widths: Vec<i64> = (0..k)
                .map(|t| (((t + 1) * cap) / k - (t * cap) / k) as i64)
                .collect();
            let ends = consistent_prefix_sums(&widths).expect("widths are positive");
            for (t, it) in items.into_iter().enumerate() {
                let start = if t == 0 { 0 } else { ends[t - 1] as usize };
                b.slots[start] = it;
            }
        }
        b.refresh();
        b
    }

    fn refresh(&mut self) {
        round(self.slots.len() as u64);
        self.live = self.items().count();
        let min = self.items().next().and_then(|s| Self::slot_min(s).cloned());
        let max = self.items().last().and_then(|s| Self::slot_max(s).cloned());
        self.min = min;
        self.max = max;
    }

    fn take_items(&mut self) -> Vec<Slot<V>> {
        std::mem::take(&mut self.slots)
            .into_iter()
            .filter(|s| !matches!(s, Slot::Void))
            .collect()
    }

    /// Index of the child whose range should hold `key`.
    fn route(&self, key: &Key) -> Option<usize> {
        tick(self.slots.len() as u64);
        let mut best = None;
        for (i, s) in self.slots.iter().enumerate() {
            if matches!(s, Slot::Void) {
                continue;
            }
            if best.is_none() || Self::slot_min(s).is_some_and(|m| m <= key) {
                best = Some(i);
            }
        }
        best
    }

    fn get(&self, key: &Key) -> Option<&V> {
        if self.leaf {
            tick(self.slots.len() as u64);
            return self.slots.iter().find_map(|s| match s {
                Slot::Entry(k, v) if k == key => Some(v),
                _ => None,
            });
        }
        match &self.slots[self.route(key)?] {
            Slot::Child(c) => c.get(key),
            _ => unreachable!("inner block holds children"),
        }
    }

    fn get_mut(&mut self, key: &Key) -> Option<&mut V> {
        if self.leaf {
            tick(self.slots.len() as u64);
            return self.slots.iter_mut().find_map(|s| match s {
                Slot::Entry(k, v) if k == key => Some(v),
                _ => None,
            });
        }
        let i = self.route(key)?;
        match &mut self.slots[i] {
            Slot::Child(c) => c.get_mut(key),
            _ => unreachable!("inner block holds children"),
        }
    }

    /// Inserts the sorted batch; returns extra blocks split off to the right.
    fn insert_sorted(&mut self, batch: Vec<(Key, V)>, cap: usize) -> Vec<Block<V>> {
        let leaf = self.leaf;
        let mut items = self.take_items();
        if leaf {
            let mut merged = Vec::with_capacity(items.len() + batch.len());
            let mut it = batch.into_iter().peekable();
            for s in items {
                let Slot::Entry(k, _) = &s else { unreachable!() };
                while it.peek().is_some_and(|(bk, _)| bk < k) {
                    let (bk, bv) = it.next().unwrap();
                    merged.push(Slot::Entry(bk, bv));
                }
                if it.peek().is_some_and(|(bk, _)| bk == k) {
                    // already present: keep the stored value
                    it.next();
                }
                merged.push(s);
            }
            merged.extend(it.map(|(k, v)| Slot::Entry(k, v)));
            items = merged;
        } else {
            // hand each key to the child routing would choose
            let mins: Vec<Option<Key>> = items.iter().map(|s| Self::slot_min(s).cloned()).collect();
            let mut parts: Vec<Vec<(Key, V)>> = vec![Vec::new(); items.len()];
            for (k, v) in batch {
                let mut c = 0;
                for (i, m) in mins.iter().enumerate() {
                    if m.as_ref().is_some_and(|m| *m <= k) {
                        c = i;
                    }
                }
                parts[c].push((k, v));
            }
            let mut out = Vec::with_capacity(items.len());
            for (s, part) in items.into_iter().zip(parts) {
                let Slot::Child(mut c) = s else { unreachable!() };
                if part.is_empty() {
                    out.push(Slot::Child(c));
                    continue;
                }
                let extra = c.insert_sorted(part, cap);
                out.push(Slot::Child(c));
                out.extend(extra.into_iter().map(|b| Slot::Child(Box::new(b))));
            }
            items = out;
        }
        // at most half full after a split so later batches have room
        let per = (cap / 2).max(1);
        if items.len() <= cap {
            *self = Block::layout(items, cap, leaf);
            return Vec::new();
        }
        let mut blocks: Vec<Block<V>> = Vec::new();
        let mut rest = items.into_iter().peekable();
        while rest.peek().is_some() {
            let part: Vec<Slot<V>> = rest.by_ref().take(per).collect();
            blocks.push(Block::layout(part, cap, leaf));
        }
        *self = blocks.remove(0);
        blocks
    }

    fn remove_sorted(&mut self, batch: &[Key], cap: usize) -> usize {
        let mut removed = 0;
        if self.leaf {
            for s in self.slots.iter_mut() {
                if let Slot::Entry(k, _) = s {
                    if batch.binary_search(k).is_ok() {
                        *s = Slot::Void;
                        removed += 1;
                    }
                }
            }
            tick(self.slots.len() as u64);
        } else {
            for s in self.slots.iter_mut() {
                let Slot::Child(c) = s else { continue };
                let (Some(lo), Some(hi)) = (c.min.clone(), c.max.clone()) else { continue };
                let a = batch.partition_point(|k| *k < lo);
                let b = batch.partition_point(|k| *k <= hi);
                if a < b {
                    removed += c.remove_sorted(&batch[a..b], cap);
                    if c.live == 0 {
                        *s = Slot::Void;
                    }
                }
            }
        }
        let leaf = self.leaf;
        let items = self.take_items();
        *self = Block::layout(items, cap, leaf);
        removed
    }

    fn check(&self, cap: usize, out: &mut Vec<String>) {
        if self.slots.len() > cap {
            out.push(format!("block with {} slots over capacity {cap}", self.slots.len()));
        }
        let mut prev: Option<&Key> = None;
        for s in self.items() {
            if let (Some(p), Some(m)) = (prev, Self::slot_min(s)) {
                if p >= m {
                    out.push(format!("keys out of order: {p:?} before {m:?}"));
                }
            }
            prev = Self::slot_max(s);
            if let Slot::Child(c) = s {
                if self.leaf {
                    out.push("leaf holds a child block".into());
                }
                c.check(cap, out);
            }
        }
        let min = self.items().next().and_then(|s| Self::slot_min(s));
        let max = self.items().last().and_then(|s| Self::slot_max(s));
        if min != self.min.as_ref() || max != self.max.as_ref() {
            out.push(format!("stale min/max {:?}/{:?} vs {:?}/{:?}", self.min, self.max, min, max));
        }
    }

    fn collect<'a>(&'a self, out: &mut Vec<(&'a Key, &'a V)>) {
        for s in self.items() {
            match s {
                Slot::Entry(k, v) => out.push((k, v)),
                Slot::Child(c) => c.collect(out),
                Slot::Void => {}
            }
        }
    }
}

/// Ordered map from fixed-length keys to values, stored as a search tree
/// whose blocks are padded arrays of capacity `2·⌈n^ε⌉·⌈log n⌉`.
#[derive(Debug, Clone)]
pub struct OrderedKeyMap<V> {
    m: usize,
    cap: usize,
    root: Block<V>,
    len: usize,
}

impl<V: Clone> OrderedKeyMap<V> {
    /// Map for keys of length `m`, sized for about `n` keys.
    pub fn new(m: usize, n: usize, epsilon: f64) -> Self {
        let cap = (2 * crate::fanout(n.max(2), epsilon) * crate::ceil_log2(n.max(2)) as usize).max(4);
        OrderedKeyMap { m, cap, root: Block::empty(cap, true), len: 0 }
    }

    pub fn key_len(&self) -> usize {
        self.m
    }

    pub fn block_capacity(&self) -> usize {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn check_key(&self, k: &Key) -> Result<()> {
        if k.len() > self.m || k.last() == Some(&0) {
            return Err(Error::WrongKeyLength { got: k.len(), expected: self.m });
        }
        Ok(())
    }

    /// Adds every key in `xs` that is not yet present, each with value `init`.
    pub fn add(&mut self, xs: &[Key], init: V) -> Result<()> {
        for k in xs {
            self.check_key(k)?;
        }
        let mut batch: Vec<Key> = xs.iter().filter(|k| self.root.get(k).is_none()).cloned().collect();
        batch.sort();
        batch.dedup();
        if batch.is_empty() {
            return Ok(());
        }
        self.len += batch.len();
        let cap = self.cap;
        let extra = self.root.insert_sorted(batch.into_iter().map(|k| (k, init.clone())).collect(), cap);
        if !extra.is_empty() {
            // grow a new root above the split blocks
            let old = std::mem::replace(&mut self.root, Block::empty(cap, false));
            let mut kids = vec![Slot::Child(Box::new(old))];
            kids.extend(extra.into_iter().map(|b| Slot::Child(Box::new(b))));
            self.root = Block::over_children(kids, cap);
        }
        Ok(())
    }

    pub fn remove(&mut self, xs: &[Key]) -> Result<()> {
        for k in xs {
            self.check_key(k)?;
        }
        let mut batch = xs.to_vec();
        batch.sort();
        batch.dedup();
        let cap = self.cap;
        self.len -= self.root.remove_sorted(&batch, cap);
        // collapse a root with a single child
        while !self.root.leaf && self.root.live <= 1 {
            let items = self.root.take_items();
            self.root = match items.into_iter().next() {
                Some(Slot::Child(c)) => *c,
                _ => Block::empty(cap, true),
            };
        }
        Ok(())
    }

    pub fn get(&self, x: &Key) -> Option<&V> {
        self.root.get(x)
    }

    pub fn get_mut(&mut self, x: &Key) -> Option<&mut V> {
        self.root.get_mut(x)
    }

    /// Overwrites the value of a present key; returns false if absent.
    pub fn set_value(&mut self, x: &Key, v: V) -> Result<bool> {
        self.check_key(x)?;
        Ok(match self.root.get_mut(x) {
            Some(slot) => {
                *slot = v;
                true
            }
            None => false,
        })
    }

    /// All entries in key order.
    pub fn entries(&self) -> Vec<(&Key, &V)> {
        let mut out = Vec::with_capacity(self.len);
        self.root.collect(&mut out);
        out
    }

    /// Structural problems found; empty when all invariants hold.
    pub fn audit(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.check(self.cap, &mut out);
        if self.entries().len() != self.len {
            out.push(format!("len {} but {} entries", self.len, self.entries().len()));
        }
        out
    }
}

impl<V: Clone> Block<V> {
    /// Builds an inner block over `kids`, adding levels until it fits.
    fn over_children(kids: Vec<Slot<V>>, cap: usize) -> Block<V> {
        if kids.len() <= cap {
            return Block::layout(kids, cap, false);
        }
        let per = (cap / 2).max(1);
        let mut level: Vec<Slot<V>> = kids
            .chunks(per)
            .map(|c| Slot::Child(Box::new(Block::layout(c.to_vec(), cap, false))))
            .collect();
        while level.len() > cap {
            level = level
                .chunks(per)
                .map(|c| Slot::Child(Box::new(Block::layout(c.to_vec(), cap, false))))
                .collect();
        }
        Block::layout(level, cap, false)
    }
}

/// Reference-counted injective naming over the domain `[1, n·k]`.
///
/// At most `n` keys are live at once and each batch holds at most `k`
/// distinct keys. The `i`-th new key of a batch, in sorted order, receives the
/// first free name at or after `(i−1)·n + 1`.
#[derive(Debug, Clone)]
pub struct NameRegistry {
    n: usize,
    k: usize,
    map: OrderedKeyMap<(u64, i64)>,
    free: NeighborSet,
    by_name: HashMap<u64, Key>,
}

impl NameRegistry {
    pub fn new(n: usize, k: usize, m: usize, epsilon: f64) -> Self {
        let n = n.max(1);
        let k = k.max(1);
        NameRegistry {
            n,
            k,
            map: OrderedKeyMap::new(m, n, epsilon),
            free: NeighborSet::full(n * k),
            by_name: HashMap::new(),
        }
    }

    pub fn max_live(&self) -> usize {
        self.n
    }

    pub fn max_batch(&self) -> usize {
        self.k
    }

    /// Size of the name domain `[1, n·k]`.
    pub fn domain(&self) -> usize {
        self.n * self.k
    }

    pub fn live(&self) -> usize {
        self.map.len()
    }

    fn count(xs: &[(Key, i64)]) -> BTreeMap<Key, i64> {
        let mut c = BTreeMap::new();
        for (x, m) in xs {
            *c.entry(x.clone()).or_insert(0) += m;
        }
        c
    }

    /// Adds each key with its multiplicity and returns the names of all keys
    /// in the batch.
    pub fn add(&mut self, xs: &[(Key, i64)]) -> Result<Vec<(Key, u64)>> {
        let counts = Self::count(xs);
        if counts.len() > self.k {
            return Err(Error::InvalidArgument(format!(
                "batch of {} distinct keys exceeds {}",
                counts.len(),
                self.k
            )));
        }
        let new: Vec<Key> = counts.keys().filter(|x| self.map.get(x).is_none()).cloned().collect();
        let mut assigned = Vec::with_capacity(new.len());
        for (i, x) in new.iter().enumerate() {
            let g = self.free.succ_eq(i * self.n + 1).ok_or(Error::RegistryFull)?;
            self.free.remove(g);
            assigned.push((x.clone(), g));
        }
        if let Err(e) = self.map.add(&new, (0, 0)) {
            for (_, g) in assigned {
                self.free.insert(g);
            }
            return Err(e);
        }
        for (x, g) in assigned {
            self.map.set_value(&x, (g as u64, 0))?;
            self.by_name.insert(g as u64, x);
        }
        let mut out = Vec::with_capacity(counts.len());
        for (x, c) in counts {
            let e = self.map.get_mut(&x).expect("just added");
            e.1 += c;
            out.push((x, e.0));
        }
        Ok(out)
    }

    /// Like [`NameRegistry::add`] with multiplicity 1 per listed key.
    pub fn add_keys(&mut self, xs: &[Key]) -> Result<Vec<(Key, u64)>> {
        let v: Vec<(Key, i64)> = xs.iter().map(|x| (x.clone(), 1)).collect();
        self.add(&v)
    }

    /// Decreases refcounts; keys reaching zero are forgotten and their names
    /// freed. Unknown keys are ignored.
    pub fn sub(&mut self, xs: &[(Key, i64)]) -> Result<()> {
        let counts = Self::count(xs);
        let mut gone = Vec::new();
        for (x, c) in counts {
            if let Some(e) = self.map.get_mut(&x) {
                e.1 -= c;
                if e.1 <= 0 {
                    self.free.insert(e.0 as usize);
                    self.by_name.remove(&e.0);
                    gone.push(x);
                }
            }
        }
        self.map.remove(&gone)
    }

    pub fn sub_keys(&mut self, xs: &[Key]) -> Result<()> {
        let v: Vec<(Key, i64)> = xs.iter().map(|x| (x.clone(), 1)).collect();
        self.sub(&v)
    }

    /// Decreases the refcount of the key currently holding each name.
    pub fn sub_names(&mut self, names: &[u64]) -> Result<()> {
        let xs: Vec<(Key, i64)> = names
            .iter()
            .filter_map(|g| self.by_name.get(g).map(|k| (k.clone(), 1)))
            .collect();
        self.sub(&xs)
    }

    pub fn key_of(&self, name: u64) -> Option<&Key> {
        self.by_name.get(&name)
    }

    pub fn name_of(&self, x: &Key) -> Option<u64> {
        self.map.get(x).map(|e| e.0)
    }

    pub fn refcount(&self, x: &Key) -> i64 {
        self.map.get(x).map_or(0, |e| e.1)
    }

    pub fn is_free(&self, name: u64) -> bool {
        self.free.contains(name as usize)
    }

    /// Problems with injectivity, refcounts or the free set.
    pub fn audit(&self) -> Vec<String> {
        let mut out = self.map.audit();
        let mut seen = std::collections::HashSet::new();
        for (k, &(g, f)) in self.map.entries() {
            if !seen.insert(g) {
                out.push(format!("name {g} used twice"));
            }
            if f <= 0 {
                out.push(format!("live key {k:?} with count {f}"));
            }
            if self.free.contains(g as usize) {
                out.push(format!("name {g} live and free"));
            }
            if self.by_name.get(&g) != Some(k) {
                out.push(format!("reverse entry for {g} is stale"));
            }
        }
        if self.by_name.len() != seen.len() {
            out.push(format!("{} reverse entries for {} names", self.by_name.len(), seen.len()));
        }
        if self.free.len() + seen.len() != self.domain() {
            out.push(format!("{} free + {} used != {}", self.free.len(), seen.len(), self.domain()));
        }
        out
    }

    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        for (k, (g, f)) in self.map.entries() {
            let _ = writeln!(s, "{k:?} -> {g} x{f}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn key(s: &str) -> Key {
        s.bytes().map(u64::from).collect()
    }

    #[test]
    fn map_basics() {
        let mut m: OrderedKeyMap<i32> = OrderedKeyMap::new(2, 100, 0.5);
        m.add(&[key("ab")], 0).unwrap();
        assert!(m.set_value(&key("ab"), 9).unwrap());
        assert_eq!(m.get(&key("ab")), Some(&9));
        assert_eq!(m.get(&key("ba")), None);
        assert!(matches!(m.add(&[key("abc")], 0), Err(Error::WrongKeyLength { got: 3, expected: 2 })));
    }

    #[test]
    fn map_grows_and_shrinks() {
        let mut m: OrderedKeyMap<usize> = OrderedKeyMap::new(4, 16, 0.25);
        let keys: Vec<Key> = (0..500u64).map(|i| vec![1 + i / 100, 1 + (i * 37) % 100]).collect();
        for c in keys.chunks(7) {
            m.add(c, 1).unwrap();
            assert!(m.audit().is_empty(), "{:?}", m.audit());
        }
        assert_eq!(m.len(), 500);
        for c in keys.chunks(11) {
            m.remove(c).unwrap();
            assert!(m.audit().is_empty(), "{:?}", m.audit());
        }
        assert!(m.is_empty());
    }

    #[test]
    fn first_name_in_first_stripe() {
        let mut r = NameRegistry::new(10, 4, 3, 0.5);
        let out = r.add(&[(key("a"), 1)]).unwrap();
        assert_eq!(out, vec![(key("a"), 1)]);
        let out = r.add(&[(key("b"), 1), (key("c"), 1)]).unwrap();
        // b is new key #1 → Succ(0) = 2; c is #2 → Succ(10) = 11
        assert_eq!(out, vec![(key("b"), 2), (key("c"), 11)]);
    }

    #[test]
    fn refcounts() {
        let mut r = NameRegistry::new(10, 4, 3, 0.5);
        let a1 = r.add(&[(key("a"), 2)]).unwrap();
        let a2 = r.add(&[(key("a"), 2)]).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(r.refcount(&key("a")), 4);
        r.sub(&[(key("zz"), 1)]).unwrap();
        assert_eq!(r.live(), 1);
        r.sub(&[(key("a"), 4)]).unwrap();
        assert_eq!(r.name_of(&key("a")), None);
        assert!(r.is_free(a1[0].1));
        r.add(&[(key("a"), 1)]).unwrap();
        assert!(r.name_of(&key("a")).is_some());
        assert!(r.audit().is_empty());
    }

    #[test]
    fn full_registry_errors() {
        let mut r = NameRegistry::new(1, 1, 1, 0.5);
        r.add_keys(&[vec![1]]).unwrap();
        assert_eq!(r.add_keys(&[vec![2]]), Err(Error::RegistryFull));
        assert!(matches!(r.add_keys(&[vec![3], vec![4]]), Err(Error::InvalidArgument(_))));
    }

    proptest! {
        #[test]
        fn map_matches_hashmap(batches in proptest::collection::vec(
            (any::<bool>(), proptest::collection::vec(proptest::collection::vec(1u64..4, 1..4), 1..8)), 1..60)) {
            let mut m: OrderedKeyMap<u32> = OrderedKeyMap::new(3, 8, 0.5);
            let mut h: HashMap<Key, u32> = HashMap::new();
            for (i, (add, ks)) in batches.into_iter().enumerate() {
                if add {
                    m.add(&ks, i as u32).unwrap();
                    for k in &ks { h.entry(k.clone()).or_insert(i as u32); }
                } else {
                    m.remove(&ks).unwrap();
                    for k in &ks { h.remove(k); }
                }
                prop_assert!(m.audit().is_empty());
                prop_assert_eq!(m.len(), h.len());
                for (k, v) in &h { prop_assert_eq!(m.get(k), Some(v)); }
            }
        }

        #[test]
        fn registry_invariants(ops in proptest::collection::vec((any::<bool>(), 1u64..12, 1i64..3), 1..200)) {
            let mut r = NameRegistry::new(12, 2, 1, 0.5);
            let mut f: HashMap<u64, i64> = HashMap::new();
            let mut names: HashMap<u64, u64> = HashMap::new();
            for (add, x, c) in ops {
                if add {
                    let out = r.add(&[(vec![x], c)]).unwrap();
                    *f.entry(x).or_insert(0) += c;
                    if let Some(&g) = names.get(&x) { prop_assert_eq!(out[0].1, g); }
                    names.insert(x, out[0].1);
                } else {
                    r.sub(&[(vec![x], c)]).unwrap();
                    if let Some(v) = f.get_mut(&x) {
                        *v -= c;
                        if *v <= 0 { f.remove(&x); names.remove(&x); }
                    }
                }
                prop_assert!(r.audit().is_empty(), "{:?}", r.audit());
                for (x, &c) in &f { prop_assert_eq!(r.refcount(&vec![*x]), c); }
                prop_assert_eq!(r.live(), f.len());
            }
        }
    }
}
