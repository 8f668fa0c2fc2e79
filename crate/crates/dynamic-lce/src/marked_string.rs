//! Dynamic string with marked, annotated positions.
//!
//! The string lives in the leaves of a tree whose leaves all sit at depth
//! `2·⌈1/ε⌉`. Inner nodes hold between a handful and `2·⌈n^ε⌉` children; an
//! over-full node is split in half and two adjacent siblings whose child
//! counts add up to less than `⌈n^ε⌉` are merged. Every node keeps its leaf
//! count, its number of marked leaves, and the offsets of its first and last
//! marked leaf, which is enough to resolve a position, a rank, or the nearest
//! mark on either side in one root-to-leaf walk.
//!
//! Annotations are stored on the leaves and travel with their character when
//! the string shifts.

use std::fmt::Write as _;

use crate::error::{check_range, Error, Result};
use crate::primitives::{round, tick};

#[derive(Debug, Clone, Default)]
struct Node {
    children: Vec<u32>,
    size: u32,
    mcount: u32,
    /// 1-based offset of the first marked leaf in the subtree, 0 if none.
    mmin: u32,
    /// 1-based offset of the last marked leaf in the subtree, 0 if none.
    mmax: u32,
    ch: u32,
    ann: u64,
}

/// Search direction for [`MarkedString::neighbor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    Forward,
    Backward,
}

#[derive(Debug, Clone)]
pub struct MarkedString {
    max_size: usize,
    base: usize,
    depth: usize,
    nodes: Vec<Node>,
    free: Vec<u32>,
    root: u32,
}

impl MarkedString {
    /// Empty string with capacity `n` and fanout base `⌈n^ε⌉`.
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 || !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("n = {n}, epsilon = {epsilon}")));
        }
        let base = crate::fanout(n, epsilon);
        let depth = 2 * (1.0 / epsilon - 1e-9).ceil() as usize;
        let mut s = MarkedString {
            max_size: n,
            base,
            depth: depth.max(1),
            nodes: Vec::new(),
            free: Vec::new(),
            root: 0,
        };
        s.root = s.alloc(Node::default());
        Ok(s)
    }

    /// String holding `xs`, no marks.
    pub fn from_symbols(n: usize, epsilon: f64, xs: &[u32]) -> Result<Self> {
        let mut s = Self::new(n, epsilon)?;
        for (k, &c) in xs.iter().enumerate() {
            s.insert(k + 1, c)?;
        }
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.nodes[self.root as usize].size as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.max_size
    }

    pub fn fanout_base(&self) -> usize {
        self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of marked positions.
    pub fn mark_count(&self) -> usize {
        self.nodes[self.root as usize].mcount as usize
    }

    fn alloc(&mut self, node: Node) -> u32 {
        if let Some(id) = self.free.pop() {
            self.nodes[id as usize] = node;
            id
        } else {
            self.nodes.push(node);
            (self.nodes.len() - 1) as u32
        }
    }

    fn release(&mut self, id: u32) {
        self.nodes[id as usize] = Node::default();
        self.free.push(id);
    }

    fn pull(&mut self, id: u32) {
        let node = &self.nodes[id as usize];
        let mut size = 0u32;
        let mut mcount = 0u32;
        let mut mmin = 0u32;
        let mut mmax = 0u32;
        round(node.children.len() as u64);
        for &c in &node.children {
            let ch = &self.nodes[c as usize];
            if ch.mcount > 0 {
                if mmin == 0 {
                    mmin = size + ch.mmin;
                }
                mmax = size + ch.mmax;
            }
            mcount += ch.mcount;
            size += ch.size;
        }
        let node = &mut self.nodes[id as usize];
        node.size = size;
        node.mcount = mcount;
        node.mmin = mmin;
        node.mmax = mmax;
    }

    /// Index of the child of `id` holding 1-based position `pos`, plus the
    /// number of leaves left of that child.
    fn locate(&self, id: u32, pos: u32) -> (usize, u32) {
        let node = &self.nodes[id as usize];
        round(node.children.len() as u64);
        let mut off = 0;
        for (k, &c) in node.children.iter().enumerate() {
            let sz = self.nodes[c as usize].size;
            if pos <= off + sz {
                return (k, off);
            }
            off += sz;
        }
        (node.children.len() - 1, off - self.nodes[*node.children.last().unwrap() as usize].size)
    }

    /// Root-to-leaf path for position `pos`, as node ids (root first, leaf last).
    fn path(&self, pos: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.depth + 1);
        let mut id = self.root;
        let mut p = pos as u32;
        out.push(id);
        for _ in 0..self.depth {
            let (k, off) = self.locate(id, p);
            id = self.nodes[id as usize].children[k];
            p -= off;
            out.push(id);
        }
        out
    }

    fn leaf(&self, pos: usize) -> &Node {
        let id = *self.path(pos).last().unwrap();
        &self.nodes[id as usize]
    }

    /// Insert `sigma` so that it becomes position `i`.
    pub fn insert(&mut self, i: usize, sigma: u32) -> Result<()> {
        let n = self.len();
        if n >= self.max_size {
            return Err(Error::CapacityExceeded(self.max_size));
        }
        check_range(i, n + 1)?;
        let leaf = self.alloc(Node {
            size: 1,
            ch: sigma,
            ..Node::default()
        });
        let root = self.root;
        self.insert_rec(root, 0, i as u32, leaf);
        Ok(())
    }

    /// Inserts `leaf` before subtree position `pos` (1-based; `size+1` appends).
    /// Returns a new right sibling if `id` had to be split.
    fn insert_rec(&mut self, id: u32, level: usize, pos: u32, leaf: u32) -> Option<u32> {
        tick(1);
        if level + 1 == self.depth {
            let k = (pos - 1) as usize;
            self.nodes[id as usize].children.insert(k, leaf);
        } else {
            if self.nodes[id as usize].children.is_empty() {
                let c = self.alloc(Node::default());
                self.nodes[id as usize].children.push(c);
            }
            let size = self.nodes[id as usize].size;
            let (k, off) = if pos > size {
                let last = self.nodes[id as usize].children.len() - 1;
                let lsz = self.nodes[self.nodes[id as usize].children[last] as usize].size;
                (last, size - lsz)
            } else {
                self.locate(id, pos)
            };
            let child = self.nodes[id as usize].children[k];
            if let Some(sib) = self.insert_rec(child, level + 1, pos - off, leaf) {
                self.nodes[id as usize].children.insert(k + 1, sib);
            }
        }
        let split = if id != self.root && self.nodes[id as usize].children.len() > 2 * self.base {
            let half = self.nodes[id as usize].children.len() / 2;
            let right: Vec<u32> = self.nodes[id as usize].children.split_off(half);
            let sib = self.alloc(Node {
                children: right,
                ..Node::default()
            });
            self.pull(sib);
            Some(sib)
        } else {
            None
        };
        self.pull(id);
        split
    }

    /// Remove position `i`; a mark on it disappears with it.
    pub fn delete(&mut self, i: usize) -> Result<()> {
        check_range(i, self.len())?;
        let root = self.root;
        self.delete_rec(root, 0, i as u32);
        Ok(())
    }

    fn delete_rec(&mut self, id: u32, level: usize, pos: u32) {
        tick(1);
        let (k, off) = self.locate(id, pos);
        let child = self.nodes[id as usize].children[k];
        if level + 1 == self.depth {
            self.nodes[id as usize].children.remove(k);
            self.release(child);
        } else {
            self.delete_rec(child, level + 1, pos - off);
            if self.nodes[child as usize].children.is_empty() {
                self.nodes[id as usize].children.remove(k);
                self.release(child);
            } else {
                self.repair_pair(id, k);
            }
        }
        self.pull(id);
    }

    /// Merge child `k` of `id` with a neighbor if their child counts fall below the base.
    fn repair_pair(&mut self, id: u32, k: usize) {
        let kids = &self.nodes[id as usize].children;
        let cnt = |s: &Self, c: u32| s.nodes[c as usize].children.len();
        let pair = if k > 0 && cnt(self, kids[k - 1]) + cnt(self, kids[k]) < self.base {
            Some(k - 1)
        } else if k + 1 < kids.len() && cnt(self, kids[k]) + cnt(self, kids[k + 1]) < self.base {
            Some(k)
        } else {
            None
        };
        if let Some(a) = pair {
            let left = self.nodes[id as usize].children[a];
            let right = self.nodes[id as usize].children.remove(a + 1);
            let moved = std::mem::take(&mut self.nodes[right as usize].children);
            self.nodes[left as usize].children.extend(moved);
            self.release(right);
            self.pull(left);
        }
    }

    /// Replace the symbol at position `i`, keeping its mark and annotation.
    pub fn set_char(&mut self, i: usize, sigma: u32) -> Result<()> {
        check_range(i, self.len())?;
        let leaf = *self.path(i).last().unwrap();
        self.nodes[leaf as usize].ch = sigma;
        Ok(())
    }

    /// Mark every `(index, annotation)`; re-marking replaces the annotation.
    pub fn mark(&mut self, xs: &[(usize, u64)]) -> Result<()> {
        let n = self.len();
        for &(i, _) in xs {
            check_range(i, n)?;
        }
        for &(i, a) in xs {
            self.set_mark(i, Some(a));
        }
        Ok(())
    }

    /// Remove marks at every given index; unmarked indices are ignored.
    pub fn unmark(&mut self, xs: &[usize]) -> Result<()> {
        let n = self.len();
        for &i in xs {
            check_range(i, n)?;
        }
        for &i in xs {
            self.set_mark(i, None);
        }
        Ok(())
    }

    fn set_mark(&mut self, i: usize, ann: Option<u64>) {
        let path = self.path(i);
        let leaf = *path.last().unwrap() as usize;
        match ann {
            Some(a) => {
                self.nodes[leaf].mcount = 1;
                self.nodes[leaf].mmin = 1;
                self.nodes[leaf].mmax = 1;
                self.nodes[leaf].ann = a;
            }
            None => {
                self.nodes[leaf].mcount = 0;
                self.nodes[leaf].mmin = 0;
                self.nodes[leaf].mmax = 0;
                self.nodes[leaf].ann = 0;
            }
        }
        for &id in path.iter().rev().skip(1) {
            self.pull(id);
        }
    }

    /// Symbol at position `i`.
    pub fn char(&self, i: usize) -> Result<u32> {
        check_range(i, self.len())?;
        Ok(self.leaf(i).ch)
    }

    /// `S[i, i+m)`.
    pub fn substr(&self, i: usize, m: usize) -> Result<Vec<u32>> {
        if i == 0 || i + m > self.len() + 1 {
            return Err(Error::OutOfRange { index: i, len: self.len() });
        }
        let mut out = Vec::with_capacity(m);
        if m > 0 {
            self.collect(self.root, 0, i as u32, (i + m - 1) as u32, &mut out);
        }
        Ok(out)
    }

    fn collect(&self, id: u32, level: usize, lo: u32, hi: u32, out: &mut Vec<u32>) {
        let node = &self.nodes[id as usize];
        if level == self.depth {
            tick(1);
            out.push(node.ch);
            return;
        }
        round(node.children.len() as u64);
        let mut off = 0;
        for &c in &node.children {
            let sz = self.nodes[c as usize].size;
            if off + sz >= lo && off < hi {
                self.collect(c, level + 1, lo.saturating_sub(off).max(1), (hi - off).min(sz), out);
            }
            off += sz;
            if off >= hi {
                break;
            }
        }
    }

    /// The whole string.
    pub fn to_vec(&self) -> Vec<u32> {
        self.substr(1, self.len()).expect("full range is valid")
    }

    /// Annotation at `i` if `i` is marked.
    pub fn mark_at(&self, i: usize) -> Option<u64> {
        if i == 0 || i > self.len() {
            return None;
        }
        let l = self.leaf(i);
        (l.mcount > 0).then_some(l.ann)
    }

    /// Nearest marked index strictly after (forward) or before (backward) `i`.
    ///
    /// `i` may be `0` or `|S|+1` to search from either end.
    pub fn neighbor(&self, i: usize, dir: Dir) -> Option<(usize, u64)> {
        let i = i.min(self.len() + 1) as u32;
        let pos = match dir {
            Dir::Forward => self.succ_rec(self.root, 0, i),
            Dir::Backward => self.pred_rec(self.root, 0, i),
        }?;
        Some((pos as usize, self.leaf(pos as usize).ann))
    }

    /// Smallest marked index `≥ i`.
    pub fn mark_at_or_after(&self, i: usize) -> Option<(usize, u64)> {
        self.neighbor(i.saturating_sub(1), Dir::Forward)
    }

    /// Largest marked index `≤ i`.
    pub fn mark_at_or_before(&self, i: usize) -> Option<(usize, u64)> {
        self.neighbor(i + 1, Dir::Backward)
    }

    fn succ_rec(&self, id: u32, level: usize, i: u32) -> Option<u32> {
        let node = &self.nodes[id as usize];
        if node.mcount == 0 || node.mmax <= i {
            return None;
        }
        if level == self.depth {
            return Some(1);
        }
        round(node.children.len() as u64);
        let mut off = 0;
        for &c in &node.children {
            let ch = &self.nodes[c as usize];
            if ch.mcount > 0 && off + ch.mmax > i {
                return self.succ_rec(c, level + 1, i.saturating_sub(off)).map(|p| p + off);
            }
            off += ch.size;
        }
        None
    }

    fn pred_rec(&self, id: u32, level: usize, i: u32) -> Option<u32> {
        let node = &self.nodes[id as usize];
        if node.mcount == 0 || node.mmin >= i {
            return None;
        }
        if level == self.depth {
            return Some(1);
        }
        round(node.children.len() as u64);
        let mut offs = Vec::with_capacity(node.children.len());
        let mut off = 0;
        for &c in &node.children {
            offs.push(off);
            off += self.nodes[c as usize].size;
        }
        for (k, &c) in node.children.iter().enumerate().rev() {
            let ch = &self.nodes[c as usize];
            let o = offs[k];
            if ch.mcount > 0 && o + ch.mmin < i {
                let local = if i > o + ch.size { ch.size + 1 } else { i - o };
                return self.pred_rec(c, level + 1, local).map(|p| p + o);
            }
        }
        None
    }

    /// Number of marked indices `≤ i`.
    pub fn rank(&self, i: usize) -> usize {
        let i = i.min(self.len()) as u32;
        let mut id = self.root;
        let mut p = i;
        let mut acc = 0u32;
        for _ in 0..self.depth {
            if p == 0 {
                break;
            }
            let node = &self.nodes[id as usize];
            round(node.children.len() as u64);
            let mut next = None;
            for &c in &node.children {
                let ch = &self.nodes[c as usize];
                if p <= ch.size {
                    next = Some(c);
                    break;
                }
                p -= ch.size;
                acc += ch.mcount;
            }
            match next {
                Some(c) => id = c,
                None => return acc as usize,
            }
        }
        if p > 0 {
            acc += self.nodes[id as usize].mcount;
        }
        acc as usize
    }

    /// Position and annotation of the `k`-th mark (1-based).
    pub fn select(&self, k: usize) -> Option<(usize, u64)> {
        if k == 0 || k > self.mark_count() {
            return None;
        }
        let mut id = self.root;
        let mut k = k as u32;
        let mut pos = 0u32;
        for _ in 0..self.depth {
            let node = &self.nodes[id as usize];
            round(node.children.len() as u64);
            for &c in &node.children {
                let ch = &self.nodes[c as usize];
                if k <= ch.mcount {
                    id = c;
                    break;
                }
                k -= ch.mcount;
                pos += ch.size;
            }
        }
        Some((pos as usize + 1, self.nodes[id as usize].ann))
    }

    /// All marks in ascending order.
    pub fn marks(&self) -> Vec<(usize, u64)> {
        let mut out = Vec::with_capacity(self.mark_count());
        self.marks_rec(self.root, 0, 0, &mut out);
        out
    }

    fn marks_rec(&self, id: u32, level: usize, off: u32, out: &mut Vec<(usize, u64)>) {
        let node = &self.nodes[id as usize];
        if node.mcount == 0 {
            return;
        }
        if level == self.depth {
            out.push((off as usize + 1, node.ann));
            return;
        }
        let mut o = off;
        for &c in &node.children {
            self.marks_rec(c, level + 1, o, out);
            o += self.nodes[c as usize].size;
        }
    }

    /// Checks the structural invariants; returns a description of the first failure.
    pub fn audit(&self) -> std::result::Result<(), String> {
        self.audit_rec(self.root, 0).map(|_| ())
    }

    fn audit_rec(&self, id: u32, level: usize) -> std::result::Result<(u32, u32, u32, u32), String> {
        let node = &self.nodes[id as usize];
        if level == self.depth {
            if !node.children.is_empty() || node.size != 1 {
                return Err(format!("leaf {id} malformed"));
            }
            return Ok((1, node.mcount, node.mmin, node.mmax));
        }
        if node.children.is_empty() && !(id == self.root && node.size == 0) {
            return Err(format!("inner node {id} at level {level} has no children"));
        }
        if node.children.len() > 2 * self.base && id != self.root {
            return Err(format!("node {id} has {} > {} children", node.children.len(), 2 * self.base));
        }
        for w in node.children.windows(2) {
            let a = self.nodes[w[0] as usize].children.len();
            let b = self.nodes[w[1] as usize].children.len();
            if level + 1 < self.depth && a + b < self.base {
                return Err(format!("siblings under {id} have {a}+{b} < {} children", self.base));
            }
        }
        let (mut size, mut mc, mut mn, mut mx) = (0, 0, 0, 0);
        for &c in &node.children {
            let (s, m, lo, hi) = self.audit_rec(c, level + 1)?;
            if m > 0 {
                if mn == 0 {
                    mn = size + lo;
                }
                mx = size + hi;
            }
            mc += m;
            size += s;
        }
        if (size, mc, mn, mx) != (node.size, node.mcount, node.mmin, node.mmax) {
            return Err(format!("node {id} summary stale"));
        }
        Ok((size, mc, mn, mx))
    }

    /// Largest child count of the root.
    pub fn root_fanout(&self) -> usize {
        self.nodes[self.root as usize].children.len()
    }

    /// Preorder listing: one line per inner node with child count, leaf count
    /// and first/last marked offset.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        self.dump_rec(self.root, 0, &mut s);
        s
    }

    fn dump_rec(&self, id: u32, level: usize, out: &mut String) {
        let node = &self.nodes[id as usize];
        if level == self.depth {
            return;
        }
        let opt = |v: u32| if v == 0 { "-".to_string() } else { v.to_string() };
        let _ = writeln!(
            out,
            "{:indent$}node children={} leaves={} min={} max={}",
            "",
            node.children.len(),
            node.size,
            opt(node.mmin),
            opt(node.mmax),
            indent = 2 * level
        );
        for &c in &node.children {
            self.dump_rec(c, level + 1, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn enc(s: &str) -> Vec<u32> {
        s.bytes().map(|b| (b - b'a' + 1) as u32).collect()
    }

    #[test]
    fn config_example() {
        let m = MarkedString::new(27, 1.0 / 3.0).unwrap();
        assert_eq!(m.fanout_base(), 3);
        assert_eq!(m.depth(), 6);
    }

    #[test]
    fn insert_shifts_marks() {
        let mut m = MarkedString::from_symbols(10, 0.5, &enc("ab")).unwrap();
        m.mark(&[(2, 9)]).unwrap();
        m.insert(2, 3).unwrap();
        assert_eq!(m.to_vec(), enc("acb"));
        assert_eq!(m.marks(), vec![(3, 9)]);
        m.delete(2).unwrap();
        assert_eq!(m.to_vec(), enc("ab"));
        assert_eq!(m.marks(), vec![(2, 9)]);
        let mut e = MarkedString::new(4, 0.5).unwrap();
        e.insert(1, 1).unwrap();
        assert_eq!(e.to_vec(), vec![1]);
        e.delete(1).unwrap();
        assert!(e.is_empty());
    }

    #[test]
    fn errors() {
        let mut m = MarkedString::new(2, 0.5).unwrap();
        assert!(matches!(m.insert(2, 1), Err(Error::OutOfRange { .. })));
        m.insert(1, 1).unwrap();
        m.insert(1, 1).unwrap();
        assert_eq!(m.insert(1, 1), Err(Error::CapacityExceeded(2)));
        assert!(m.delete(3).is_err());
        assert!(m.mark(&[(3, 0)]).is_err());
        assert!(m.substr(2, 2).is_err());
    }

    #[test]
    fn substr_example() {
        let m = MarkedString::from_symbols(64, 0.5, &enc("ababcaabbabcaabbabcb")).unwrap();
        assert_eq!(m.substr(2, 11).unwrap(), enc("babcaabbabc"));
        assert!(m.substr(5, 0).unwrap().is_empty());
        assert_eq!(m.char(5), Ok(3));
    }

    #[test]
    fn mark_examples() {
        let mut m = MarkedString::from_symbols(16, 0.5, &[1; 8]).unwrap();
        m.mark(&[(2, 0), (5, 0)]).unwrap();
        m.unmark(&[5]).unwrap();
        assert_eq!(m.marks(), vec![(2, 0)]);
        m.mark(&[(2, 0)]).unwrap();
        assert_eq!(m.mark_count(), 1);
        m.mark(&[(7, 4)]).unwrap();
        assert_eq!(m.neighbor(2, Dir::Forward), Some((7, 4)));
        assert_eq!(m.neighbor(7, Dir::Backward), Some((2, 0)));
        assert_eq!(m.neighbor(7, Dir::Forward), None);
        m.unmark(&[2, 7]).unwrap();
        assert_eq!(m.neighbor(5, Dir::Backward), None);
    }

    /// Flat-buffer model replaying the same operations.
    #[derive(Default)]
    struct Flat {
        s: Vec<u32>,
        marks: Vec<Option<u64>>,
    }

    fn run_random(n: usize, eps: f64, steps: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = MarkedString::new(n, eps).unwrap();
        let mut f = Flat::default();
        for step in 0..steps {
            let len = f.s.len();
            match rng.gen_range(0..10) {
                0..=3 if len < n => {
                    let i = rng.gen_range(1..=len + 1);
                    let c = rng.gen_range(1..=5);
                    m.insert(i, c).unwrap();
                    f.s.insert(i - 1, c);
                    f.marks.insert(i - 1, None);
                }
                4..=5 if len > 0 => {
                    let i = rng.gen_range(1..=len);
                    m.delete(i).unwrap();
                    f.s.remove(i - 1);
                    f.marks.remove(i - 1);
                }
                6..=7 if len > 0 => {
                    let k = rng.gen_range(1..=8);
                    let xs: Vec<(usize, u64)> =
                        (0..k).map(|_| (rng.gen_range(1..=len), rng.gen_range(0..100))).collect();
                    m.mark(&xs).unwrap();
                    for (i, a) in xs {
                        f.marks[i - 1] = Some(a);
                    }
                }
                8 if len > 0 => {
                    let k = rng.gen_range(1..=8);
                    let xs: Vec<usize> = (0..k).map(|_| rng.gen_range(1..=len)).collect();
                    m.unmark(&xs).unwrap();
                    for i in xs {
                        f.marks[i - 1] = None;
                    }
                }
                _ => {}
            }
            m.audit().unwrap_or_else(|e| panic!("step {step}: {e}"));
            assert!(m.root_fanout() <= 2 * m.fanout_base() || m.len() < 4);
            if step % 7 == 0 {
                assert_eq!(m.to_vec(), f.s);
                let want: Vec<(usize, u64)> = f
                    .marks
                    .iter()
                    .enumerate()
                    .filter_map(|(k, a)| a.map(|a| (k + 1, a)))
                    .collect();
                assert_eq!(m.marks(), want);
                let set: BTreeMap<usize, u64> = want.iter().copied().collect();
                let len = f.s.len();
                for i in 0..=len + 1 {
                    let succ = set.range(i + 1..).next().map(|(&a, &b)| (a, b));
                    let pred = set.range(..i).next_back().map(|(&a, &b)| (a, b));
                    assert_eq!(m.neighbor(i, Dir::Forward), succ, "succ {i}");
                    assert_eq!(m.neighbor(i, Dir::Backward), pred, "pred {i}");
                    assert_eq!(m.rank(i), set.range(..=i).count());
                }
                for (k, w) in want.iter().enumerate() {
                    assert_eq!(m.select(k + 1), Some(*w));
                }
                if len > 0 {
                    let i = rng.gen_range(1..=len);
                    let l = rng.gen_range(0..=len + 1 - i);
                    assert_eq!(m.substr(i, l).unwrap(), f.s[i - 1..i - 1 + l]);
                }
            }
        }
    }

    #[test]
    fn random_trace_matches_flat_buffer() {
        run_random(64, 0.5, 4000, 1);
        run_random(27, 1.0 / 3.0, 3000, 2);
        run_random(200, 0.25, 3000, 3);
        run_random(1000, 0.5, 10_000, 4);
    }

    #[test]
    fn all_substrings_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let len = rng.gen_range(0..=64);
            let xs: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=3)).collect();
            let m = MarkedString::from_symbols(64, 0.5, &xs).unwrap();
            for i in 1..=len + 1 {
                for l in 0..=len + 1 - i {
                    assert_eq!(m.substr(i, l).unwrap(), xs[i - 1..i - 1 + l]);
                }
            }
        }
    }

    #[test]
    fn dump_lists_nodes() {
        let m = MarkedString::from_symbols(27, 1.0 / 3.0, &[1; 10]).unwrap();
        let d = m.debug_dump();
        assert!(d.starts_with("node children="));
        assert!(d.contains("leaves=10"));
    }
}
