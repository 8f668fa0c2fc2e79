//! Void-string applications: one-bracket Dyck membership, range folds over a
//! monoid, and equality of two void strings backed by an LCE hierarchy.

use std::fmt;

use crate::error::{check_range, Error, Result};
use crate::hierarchy::{Hierarchy, Mode};
use crate::primitives::{round, tick, WorkLedger};

/// One position of a D1 string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Paren {
    Void,
    Open,
    Close,
}

impl Paren {
    pub fn from_char(c: char) -> Option<Paren> {
        match c {
            '<' | '⟨' => Some(Paren::Open),
            '>' | '⟩' => Some(Paren::Close),
            '_' | '⊥' | '.' => Some(Paren::Void),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Paren::Void => '⊥',
            Paren::Open => '⟨',
            Paren::Close => '⟩',
        }
    }
}

/// Change of one node's `(l, r)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Effect {
    LInc,
    LDec,
    RInc,
    RDec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Update {
    SetOpen,
    SetClose,
    ResetOpen,
    ResetClose,
}

impl Update {
    fn leaf_effect(self) -> Effect {
        match self {
            Update::SetOpen => Effect::RInc,
            Update::SetClose => Effect::LInc,
            Update::ResetOpen => Effect::RDec,
            Update::ResetClose => Effect::LDec,
        }
    }

    /// The effect a node induces itself, or `None` when it copies the effect
    /// of its child on the path. `rl` and `lr` are `r` of the left child and
    /// `l` of the right child before the update.
    fn node_effect(self, in_left: bool, rl: u32, lr: u32) -> Option<Effect> {
        match self {
            Update::SetOpen | Update::ResetClose => {
                let top = rl < lr;
                match (in_left, top) {
                    (true, true) => Some(Effect::LDec),
                    (false, false) => Some(Effect::RInc),
                    _ => None,
                }
            }
            Update::SetClose | Update::ResetOpen => {
                let top = rl <= lr;
                match (in_left, top) {
                    (true, true) => Some(Effect::LInc),
                    (false, false) => Some(Effect::RDec),
                    _ => None,
                }
            }
        }
    }
}

/// `(l, r)` of `a` followed by `b`.
fn join(a: (u32, u32), b: (u32, u32)) -> (u32, u32) {
    let l = a.0 + b.0.saturating_sub(a.1);
    let r = b.1 + a.1.saturating_sub(b.0);
    (l, r)
}

/// For every index, the smallest index at or after it whose bit is set.
///
/// A static binary tree of minima is built over `a` and each index is
/// answered by one walk up and down the tree.
pub fn successor_links(a: &[bool]) -> Vec<Option<usize>> {
    let n = a.len();
    if n == 0 {
        return vec![];
    }
    let size = n.next_power_of_two();
    let mut min = vec![usize::MAX; 2 * size];
    for (i, &b) in a.iter().enumerate() {
        if b {
            min[size + i] = i;
        }
    }
    let mut width = size / 2;
    while width >= 1 {
        for v in width..2 * width {
            min[v] = min[2 * v].min(min[2 * v + 1]);
        }
        round(width as u64);
        width /= 2;
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = size + i;
        let mut found = min[v];
        // climb while the answer is not in the current subtree's right part
        while found == usize::MAX && v > 1 {
            tick(1);
            if v % 2 == 0 {
                found = min[v + 1];
            }
            v /= 2;
        }
        out.push((found != usize::MAX).then_some(found));
    }
    round(n as u64);
    out
}

/// Binary tree of unmatched-parenthesis counts over a fixed-length string.
///
/// Node `v` of the heap layout covers a substring and stores `l`, the number
/// of unmatched closing brackets, and `r`, the number of unmatched opening
/// brackets. The string is in D1 when the root holds `(0, 0)`.
#[derive(Debug, Clone)]
pub struct D1Tree {
    n: usize,
    size: usize,
    sym: Vec<Paren>,
    node: Vec<(u32, u32)>,
    writes: Vec<usize>,
    ledger: WorkLedger,
}

impl D1Tree {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("D1 string needs n ≥ 1".into()));
        }
        let size = n.next_power_of_two();
        Ok(D1Tree {
            n,
            size,
            sym: vec![Paren::Void; n],
            node: vec![(0, 0); 2 * size],
            writes: vec![],
            ledger: WorkLedger::new(),
        })
    }

    /// Builds the tree by setting every non-void character of `s` in order.
    pub fn from_str(s: &str) -> Result<Self> {
        let cs: Vec<char> = s.chars().collect();
        let mut t = D1Tree::new(cs.len().max(1))?;
        for (k, c) in cs.iter().enumerate() {
            match Paren::from_char(*c) {
                Some(Paren::Void) => {}
                Some(p) => t.set(k + 1, p)?,
                None => return Err(Error::InvalidArgument(format!("not a D1 symbol: {c:?}"))),
            }
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> Result<Paren> {
        check_range(i, self.n)?;
        Ok(self.sym[i - 1])
    }

    /// Writes `σ` at a void position.
    pub fn set(&mut self, i: usize, sigma: Paren) -> Result<()> {
        check_range(i, self.n)?;
        if self.sym[i - 1] != Paren::Void {
            return Err(Error::NotVoid(i));
        }
        let u = match sigma {
            Paren::Open => Update::SetOpen,
            Paren::Close => Update::SetClose,
            Paren::Void => return Err(Error::InvalidArgument("set needs a bracket".into())),
        };
        self.update(i, u, sigma);
        Ok(())
    }

    /// Makes position `i` void.
    pub fn reset(&mut self, i: usize) -> Result<()> {
        check_range(i, self.n)?;
        let u = match self.sym[i - 1] {
            Paren::Void => {
                self.writes.clear();
                return Ok(());
            }
            Paren::Open => Update::ResetOpen,
            Paren::Close => Update::ResetClose,
        };
        self.update(i, u, Paren::Void);
        Ok(())
    }

    fn update(&mut self, i: usize, u: Update, sigma: Paren) {
        let leaf = self.size + i - 1;
        let mut path = vec![];
        let mut v = leaf;
        while v >= 1 {
            path.push(v);
            v /= 2;
        }
        path.reverse();
        let h = path.len();
        let mut ledger = std::mem::take(&mut self.ledger);

        // every node on the path decides from the old counts of its children
        let own: Vec<Option<Effect>> = ledger.measure("d1.inducing", || {
            round(h as u64);
            path.iter()
                .enumerate()
                .map(|(t, &v)| {
                    if t + 1 == h {
                        return Some(u.leaf_effect());
                    }
                    let in_left = path[t + 1] == 2 * v;
                    u.node_effect(in_left, self.node[2 * v].1, self.node[2 * v + 1].0)
                })
                .collect()
        });
        let a: Vec<bool> = own.iter().map(|e| e.is_some()).collect();
        let links = ledger.measure("d1.successor", || successor_links(&a));
        self.writes.clear();
        ledger.measure("d1.apply", || {
            round(h as u64);
            for (t, &v) in path.iter().enumerate() {
                let src = links[t].expect("the leaf always induces an effect");
                let (l, r) = &mut self.node[v];
                match own[src].unwrap() {
                    Effect::LInc => *l += 1,
                    Effect::LDec => *l -= 1,
                    Effect::RInc => *r += 1,
                    Effect::RDec => *r -= 1,
                }
                self.writes.push(v);
            }
        });
        self.ledger = ledger;
        self.sym[i - 1] = sigma;
    }

    pub fn member(&self) -> bool {
        self.node[1] == (0, 0)
    }

    /// `(l, r)` of the whole string.
    pub fn root(&self) -> (u32, u32) {
        self.node[1]
    }

    /// `(l, r)` of heap node `v` (root is 1, leaves start at the padded size).
    pub fn node(&self, v: usize) -> Option<(u32, u32)> {
        (1..2 * self.size).contains(&v).then(|| self.node[v])
    }

    pub fn node_count(&self) -> usize {
        2 * self.size - 1
    }

    /// Heap nodes written by the last update, root first.
    pub fn last_writes(&self) -> &[usize] {
        &self.writes
    }

    pub fn ledger(&self) -> &WorkLedger {
        &self.ledger
    }

    /// Heap nodes whose counts differ from a bottom-up recomputation.
    pub fn recompute_mismatches(&self) -> Vec<usize> {
        let mut fresh = vec![(0u32, 0u32); 2 * self.size];
        for (k, p) in self.sym.iter().enumerate() {
            fresh[self.size + k] = match p {
                Paren::Void => (0, 0),
                Paren::Open => (0, 1),
                Paren::Close => (1, 0),
            };
        }
        for v in (1..self.size).rev() {
            fresh[v] = join(fresh[2 * v], fresh[2 * v + 1]);
        }
        (1..2 * self.size).filter(|&v| fresh[v] != self.node[v]).collect()
    }
}

impl fmt::Display for D1Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.sym {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

/// An associative operation with a neutral element.
pub trait Monoid {
    type Elem: Copy + PartialEq + fmt::Debug;
    fn neutral(&self) -> Self::Elem;
    fn combine(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
}

/// `[0, m)` under addition modulo `m`.
#[derive(Debug, Clone, Copy)]
pub struct ModAdd {
    pub modulus: u64,
}

impl Monoid for ModAdd {
    type Elem = u64;
    fn neutral(&self) -> u64 {
        0
    }
    fn combine(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.modulus
    }
}

/// Fixed-length sequence with fold queries over any range.
///
/// Aggregates sit in a tree of fanout `⌈n^ε⌉`; an update refolds one node
/// per level and a query folds at most two partial blocks per level.
#[derive(Debug, Clone)]
pub struct RangeEvalTree<M: Monoid> {
    monoid: M,
    k: usize,
    levels: Vec<Vec<M::Elem>>,
}

impl<M: Monoid> RangeEvalTree<M> {
    pub fn new(monoid: M, n: usize, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("sequence needs n ≥ 1".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside (0, 1]")));
        }
        let k = crate::fanout(n, epsilon);
        let mut levels = vec![vec![monoid.neutral(); n]];
        while levels.last().unwrap().len() > 1 {
            let len = levels.last().unwrap().len().div_ceil(k);
            levels.push(vec![monoid.neutral(); len]);
        }
        Ok(RangeEvalTree { monoid, k, levels })
    }

    pub fn len(&self) -> usize {
        self.levels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fanout(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize) -> Result<M::Elem> {
        check_range(i, self.len())?;
        Ok(self.levels[0][i - 1])
    }

    fn fold(&self, xs: &[M::Elem]) -> M::Elem {
        tick(xs.len() as u64);
        xs.iter().fold(self.monoid.neutral(), |a, &b| self.monoid.combine(a, b))
    }

    pub fn set(&mut self, i: usize, m: M::Elem) -> Result<()> {
        check_range(i, self.len())?;
        let mut p = i - 1;
        self.levels[0][p] = m;
        for t in 1..self.levels.len() {
            p /= self.k;
            let lo = p * self.k;
            let hi = (lo + self.k).min(self.levels[t - 1].len());
            let v = self.fold(&self.levels[t - 1][lo..hi]);
            self.levels[t][p] = v;
            round(self.k as u64);
        }
        Ok(())
    }

    /// `m_l ∘ … ∘ m_r`, inclusive.
    pub fn query(&self, l: usize, r: usize) -> Result<M::Elem> {
        check_range(l, self.len())?;
        check_range(r, self.len())?;
        if l > r {
            return Err(Error::InvalidArgument(format!("empty range [{l}, {r}]")));
        }
        let k = self.k;
        let (mut lo, mut hi) = (l - 1, r);
        let mut left = self.monoid.neutral();
        let mut right = self.monoid.neutral();
        for lv in &self.levels {
            if lo >= hi {
                break;
            }
            if lo / k == (hi - 1) / k {
                left = self.monoid.combine(left, self.fold(&lv[lo..hi]));
                break;
            }
            let lb = lo.div_ceil(k) * k;
            let hb = hi / k * k;
            left = self.monoid.combine(left, self.fold(&lv[lo..lb]));
            right = self.monoid.combine(self.fold(&lv[hb..hi]), right);
            lo = lb / k;
            hi = hb / k;
        }
        Ok(self.monoid.combine(left, right))
    }

    /// Fold of the first `i` elements; `0` gives the neutral element.
    pub fn prefix(&self, i: usize) -> Result<M::Elem> {
        if i == 0 {
            Ok(self.monoid.neutral())
        } else {
            self.query(1, i)
        }
    }

    /// Whether every inner aggregate equals the fold of its children.
    pub fn aggregates_consistent(&self) -> bool {
        (1..self.levels.len()).all(|t| {
            self.levels[t].iter().enumerate().all(|(p, &v)| {
                let lo = p * self.k;
                let hi = (lo + self.k).min(self.levels[t - 1].len());
                v == self.fold(&self.levels[t - 1][lo..hi])
            })
        })
    }
}

/// Which of the two void strings an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl Side {
    fn ix(self) -> usize {
        match self {
            Side::First => 0,
            Side::Second => 1,
        }
    }
}

/// Equality of `erase⊥(S₁)` and `erase⊥(S₂)` under substitutions.
///
/// Symbol `0` is void. The erased concatenation `erase⊥(S₁ ∘ S₂)` lives in
/// one LCE hierarchy; bit trees translate a position of `Sᵢ` into its
/// coordinate in the erased string.
#[derive(Debug, Clone)]
pub struct StringEquality {
    n: usize,
    s: [Vec<u32>; 2],
    bits: [RangeEvalTree<ModAdd>; 2],
    erased: [usize; 2],
    lce: Hierarchy,
}

impl StringEquality {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        Self::with_mode(n, epsilon, Mode::Pipelined)
    }

    pub fn with_mode(n: usize, epsilon: f64, mode: Mode) -> Result<Self> {
        let m = ModAdd { modulus: n as u64 + 1 };
        Ok(StringEquality {
            n,
            s: [vec![0; n], vec![0; n]],
            bits: [RangeEvalTree::new(m, n, epsilon)?, RangeEvalTree::new(m, n, epsilon)?],
            erased: [0, 0],
            lce: Hierarchy::with_mode(2 * n, epsilon, mode)?,
        })
    }

    pub fn capacity(&self) -> usize {
        self.n
    }

    pub fn side(&self, side: Side) -> &[u32] {
        &self.s[side.ix()]
    }

    pub fn erased_len(&self, side: Side) -> usize {
        self.erased[side.ix()]
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.lce
    }

    /// Coordinate in the erased concatenation of the first non-void
    /// position at or after `i` on `side`.
    fn coordinate(&self, side: Side, i: usize) -> usize {
        let before = self.bits[side.ix()].prefix(i - 1).unwrap() as usize;
        let offset = if side == Side::Second { self.erased[0] } else { 0 };
        offset + before + 1
    }

    pub fn set(&mut self, side: Side, i: usize, sigma: u32) -> Result<()> {
        check_range(i, self.n)?;
        if sigma == 0 {
            return Err(Error::BadSymbol(0));
        }
        let x = side.ix();
        if self.s[x][i - 1] != 0 {
            return Err(Error::NotVoid(i));
        }
        let j = self.coordinate(side, i);
        self.lce.insert(j, sigma)?;
        self.s[x][i - 1] = sigma;
        self.bits[x].set(i, 1)?;
        self.erased[x] += 1;
        Ok(())
    }

    pub fn reset(&mut self, side: Side, i: usize) -> Result<()> {
        check_range(i, self.n)?;
        let x = side.ix();
        if self.s[x][i - 1] == 0 {
            return Ok(());
        }
        let j = self.coordinate(side, i);
        self.lce.delete(j)?;
        self.s[x][i - 1] = 0;
        self.bits[x].set(i, 0)?;
        self.erased[x] -= 1;
        Ok(())
    }

    /// `erase⊥(S₁) = erase⊥(S₂)`.
    pub fn equal(&self) -> bool {
        let (a, b) = (self.erased[0], self.erased[1]);
        if a != b {
            return false;
        }
        a == 0 || self.lce.lcp(1, a + 1).unwrap() == a
    }
}
