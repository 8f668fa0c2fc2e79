//! Square-freeness under character substitutions.
//!
//! Four stages sit on top of each other: prefix-suffix matching (recursive,
//! with results stored as one arithmetic progression per segment of doubling
//! length), string matching of a pattern in a text twice its length, range
//! instances that look for squares of one length band and start window, and
//! the grid of range instances that covers every square. Any stage that sees
//! two candidates where one is expected has found a periodic substring and
//! reports a square instead of its regular result.
//!
//! Every comparison goes through one LCE hierarchy over the current string.

use std::fmt;

use crate::error::{check_range, Error, Result};
use crate::hierarchy::{Hierarchy, Mode};
use crate::neighbor::NeighborSet;
use crate::oracles::{naive_prefix_suffix, naive_square_free};
use crate::primitives::tick;

/// `{a, a+d, …, a+(count−1)·d}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ArithmeticProgression {
    pub a: usize,
    pub d: usize,
    pub count: usize,
}

impl ArithmeticProgression {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(a: usize) -> Self {
        ArithmeticProgression { a, d: 0, count: 1 }
    }

    /// The progression through sorted distinct `xs`, if they are one.
    pub fn from_sorted(xs: &[usize]) -> Option<Self> {
        match xs {
            [] => Some(Self::empty()),
            [a] => Some(Self::single(*a)),
            [a, b, ..] => {
                let d = b - a;
                xs.windows(2)
                    .all(|w| w[1] - w[0] == d)
                    .then_some(ArithmeticProgression { a: *a, d, count: xs.len() })
            }
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        match self.count {
            0 => false,
            1 => x == self.a,
            _ => x >= self.a && (x - self.a) % self.d == 0 && (x - self.a) / self.d < self.count,
        }
    }

    pub fn values(&self) -> Vec<usize> {
        (0..self.count).map(|t| self.a + t * self.d).collect()
    }
}

/// Matches of one result segment, or evidence of a square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMatch {
    Square,
    Progression(ArithmeticProgression),
}

/// Occurrence of a pattern in a text of twice its length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occurrence {
    Absent,
    /// 1-based start in the text.
    At(usize),
    Square,
}

/// Segment `t` (0-based) holds the values `[2^t, 2^{t+1})`.
fn segment_of(a: usize) -> usize {
    (usize::BITS - 1 - a.leading_zeros()) as usize
}

fn segment_count(m: usize) -> usize {
    if m == 0 {
        0
    } else {
        segment_of(m) + 1
    }
}

/// The current string, padded, with its LCE hierarchy.
#[derive(Debug, Clone)]
struct Text {
    s: Vec<u32>,
    lce: Hierarchy,
}

impl Text {
    fn new(s: Vec<u32>, epsilon: f64, mode: Mode) -> Result<Self> {
        let mut lce = Hierarchy::with_mode(s.len().max(1), epsilon, mode)?;
        for (k, &c) in s.iter().enumerate() {
            lce.insert(k + 1, c)?;
        }
        lce.settle();
        Ok(Text { s, lce })
    }

    fn len(&self) -> usize {
        self.s.len()
    }

    fn eq(&self, i: usize, j: usize, m: usize) -> bool {
        tick(1);
        self.lce.eq_live(i, j, m).unwrap()
    }

    fn set(&mut self, x: usize, sigma: u32) -> Result<()> {
        if self.s[x - 1] == sigma {
            return Ok(());
        }
        self.lce.delete(x)?;
        self.lce.insert(x, sigma)?;
        self.s[x - 1] = sigma;
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Child {
    node: usize,
    /// A match `a'` of the child is the candidate `a' + shift` of the parent.
    shift: usize,
}

/// Prefix-suffix instance: the `a ∈ [1, m]` with `P[1, a] = S[m−a+1, m]`,
/// where `P` starts at `p` and `S` at `s` in the text.
#[derive(Debug, Clone)]
struct PsNode {
    p: usize,
    s: usize,
    m: usize,
    children: Vec<Child>,
    square: bool,
    segs: Vec<ArithmeticProgression>,
}

impl PsNode {
    fn touches(&self, x: usize) -> bool {
        (self.p..self.p + self.m).contains(&x) || (self.s..self.s + self.m).contains(&x)
    }

    fn has_match(&self, a: usize) -> bool {
        a >= 1 && a <= self.m && self.segs[segment_of(a)].contains(a)
    }
}

/// Arena of prefix-suffix instances. Instances with `m ≤ k` compare every
/// candidate directly; larger ones split into blocks of length `⌈m/k⌉`.
#[derive(Debug, Clone)]
struct Forest {
    k: usize,
    nodes: Vec<PsNode>,
}

impl Forest {
    fn build(&mut self, text: &Text, p: usize, s: usize, m: usize) -> usize {
        let mut children = vec![];
        if m > self.k {
            let b = m.div_ceil(self.k);
            let mut i = 1;
            while 2 * (i - 1) * b < m {
                let lp = p + (i - 1) * b;
                // (P_i, S_i)
                let len1 = b.min(m - (i - 1) * b);
                let rs1 = s + m - 1 - (i - 1) * b;
                let c = self.build(text, lp, rs1 + 1 - len1, len1);
                children.push(Child { node: c, shift: 2 * (i - 1) * b });
                // (P_i, S_{i+1})
                if (2 * i - 1) * b < m && m > i * b {
                    let len2 = b.min(m - i * b);
                    let rs2 = s + m - 1 - i * b;
                    let c = self.build(text, lp, rs2 + 1 - len2, len2);
                    children.push(Child { node: c, shift: (2 * i - 1) * b });
                }
                i += 1;
            }
        }
        self.nodes.push(PsNode { p, s, m, children, square: false, segs: vec![] });
        let v = self.nodes.len() - 1;
        self.recompute(text, v);
        v
    }

    fn depth(&self, v: usize) -> usize {
        1 + self.nodes[v].children.iter().map(|c| self.depth(c.node)).max().unwrap_or(0)
    }

    /// Passes a change at text position `x` down to the affected instances
    /// and recomputes them bottom-up. Returns whether `v` was affected.
    fn refresh(&mut self, text: &Text, v: usize, x: usize) -> bool {
        if !self.nodes[v].touches(x) {
            return false;
        }
        let kids: Vec<usize> = self.nodes[v].children.iter().map(|c| c.node).collect();
        for c in kids {
            self.refresh(text, c, x);
        }
        self.recompute(text, v);
        true
    }

    fn recompute(&mut self, text: &Text, v: usize) {
        let node = &self.nodes[v];
        let (p, s, m) = (node.p, node.s, node.m);
        let mut cands = vec![];
        let mut square = false;
        if node.children.is_empty() {
            cands.extend(1..=m);
        } else {
            'outer: for c in &node.children {
                let child = &self.nodes[c.node];
                if child.square {
                    square = true;
                    break;
                }
                for ap in &child.segs {
                    tick(1);
                    match ap.count {
                        0 => {}
                        1 => cands.push(ap.a + c.shift),
                        _ => {
                            square = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let mut segs = vec![ArithmeticProgression::empty(); segment_count(m)];
        if !square {
            cands.retain(|&a| a <= m && text.eq(p, s + m - a, a));
            cands.sort_unstable();
            cands.dedup();
            let mut lo = 0;
            for (t, seg) in segs.iter_mut().enumerate() {
                let hi = lo + cands[lo..].iter().take_while(|&&a| segment_of(a) == t).count();
                let run = &cands[lo..hi];
                // first, second and last match fix the progression
                if let Some(&first) = run.first() {
                    let d = if run.len() > 1 { run[1] - first } else { 0 };
                    *seg = ArithmeticProgression { a: first, d, count: run.len() };
                    debug_assert!(ArithmeticProgression::from_sorted(run).is_some());
                }
                lo = hi;
            }
        }
        let node = &mut self.nodes[v];
        node.square = square;
        node.segs = segs;
    }

    fn segment(&self, v: usize, t: usize) -> SegmentMatch {
        let node = &self.nodes[v];
        if node.square {
            SegmentMatch::Square
        } else {
            SegmentMatch::Progression(node.segs[t])
        }
    }

    /// Problems found by comparing every instance below `v` with brute force.
    fn audit(&self, text: &[u32], v: usize, out: &mut Vec<String>) {
        let node = &self.nodes[v];
        let ps = &text[node.p - 1..node.p - 1 + node.m];
        let ss = &text[node.s - 1..node.s - 1 + node.m];
        if node.square {
            if naive_square_free(ps) && naive_square_free(ss) {
                out.push(format!("instance ({}, {}, {}) reports a square that is not there", node.p, node.s, node.m));
            }
        } else {
            let want: Vec<usize> = naive_prefix_suffix(ps, ss).into_iter().collect();
            let got: Vec<usize> = node.segs.iter().flat_map(|ap| ap.values()).collect();
            if want != got {
                out.push(format!("instance ({}, {}, {}) has {got:?}, expected {want:?}", node.p, node.s, node.m));
            }
        }
        for c in &node.children {
            self.audit(text, c.node, out);
        }
    }
}

/// Pattern `P` of length `m` against text `T = T₁T₂` of length `2m`.
#[derive(Debug, Clone)]
struct Matcher {
    m: usize,
    /// `(P, T₁)`
    first: usize,
    /// `(T₂, P)`
    second: usize,
}

impl Matcher {
    fn build(forest: &mut Forest, text: &Text, t: usize, p: usize, m: usize) -> Self {
        let first = forest.build(text, p, t, m);
        let second = forest.build(text, t + m, p, m);
        Matcher { m, first, second }
    }

    fn refresh(&self, forest: &mut Forest, text: &Text, x: usize) -> bool {
        let a = forest.refresh(text, self.first, x);
        let b = forest.refresh(text, self.second, x);
        a || b
    }

    /// `T[i, i+m) = P` iff `P[1, m−i+1]` is a suffix of `T₁` and `T₂[1, i−1]`
    /// is a suffix of `P`.
    fn occ(&self, forest: &Forest) -> Occurrence {
        let (f, g) = (&forest.nodes[self.first], &forest.nodes[self.second]);
        if f.square || g.square {
            return Occurrence::Square;
        }
        let mut cands = vec![0];
        for ap in &f.segs {
            match ap.count {
                0 => {}
                1 => cands.push(ap.a),
                _ => return Occurrence::Square,
            }
        }
        let mut found = None;
        for a in cands {
            tick(1);
            let rest = self.m - a;
            if rest == 0 || g.has_match(rest) {
                if found.is_some() {
                    // two occurrences in a text of length 2m touch or overlap
                    return Occurrence::Square;
                }
                found = Some(self.m - a + 1);
            }
        }
        found.map_or(Occurrence::Absent, Occurrence::At)
    }
}

/// Looks for squares `S[x, x+m)` with `m ∈ [4ℓ, 6ℓ]` and
/// `x ∈ [ℓ(i−2)+2, ℓ(i−1)+1]`.
///
/// Such a square holds block `B_i = S[ℓ(i−1)+1, ℓi]` in its left half and a
/// copy of it in `B_{i+2}B_{i+3}`, which the matcher locates.
#[derive(Debug, Clone)]
struct RangeInst {
    l: usize,
    i: usize,
    matcher: Matcher,
    bit: bool,
}

impl RangeInst {
    fn build(forest: &mut Forest, text: &Text, l: usize, i: usize) -> Self {
        let matcher = Matcher::build(forest, text, l * (i + 1) + 1, l * (i - 1) + 1, l);
        let mut r = RangeInst { l, i, matcher, bit: false };
        r.bit = r.evaluate(forest, text);
        r
    }

    /// Text positions the result depends on: blocks `B_{i−1}` to `B_{i+5}`.
    fn watches(&self, x: usize) -> bool {
        let lo = (self.l * (self.i - 1)).saturating_sub(self.l) + 1;
        let hi = self.l * (self.i + 5);
        (lo..=hi).contains(&x)
    }

    fn window(&self) -> (usize, usize) {
        let lo = (self.l * self.i + 2).saturating_sub(2 * self.l).max(1);
        (lo, self.l * (self.i - 1) + 1)
    }

    fn evaluate(&self, forest: &Forest, text: &Text) -> bool {
        let l = self.l;
        let s = match self.matcher.occ(forest) {
            Occurrence::Square => return true,
            Occurrence::Absent => return false,
            Occurrence::At(s) => s,
        };
        let p = 2 * l + s - 1;
        let b = l * (self.i - 1) + 1;
        // S[y] = S[y+p] holds for y ∈ [b − el, b + ℓ + er)
        let el = if b > 1 { text.lce.lcs_bounded(b - 1, b - 1 + p, l).unwrap() } else { 0 };
        let er = if b + l + p <= text.len() { text.lce.lcp_bounded(b + l, b + l + p, 2 * l).unwrap() } else { 0 };
        let (wlo, whi) = self.window();
        let lo = wlo.max(b - el);
        let hi = whi.min((b + l + er).saturating_sub(p));
        lo <= hi
    }
}

/// `ℓ` values of the instance grid: `ℓ₁ = 1`, `ℓ_{k+1} = ⌊(3ℓ_k + 1)/2⌋`,
/// so the bands `[4ℓ, 6ℓ]` cover every even length from 4 on.
pub fn block_lengths(n: usize) -> Vec<usize> {
    let mut out = vec![];
    let mut l = 1;
    while 4 * l <= n {
        out.push(l);
        l = (3 * l + 1) / 2;
    }
    out
}

/// Largest block index `i` whose start window can hold a square of length
/// at least `4ℓ` in a string of length `n`.
fn last_block(n: usize, l: usize) -> usize {
    // ℓ(i−2)+2 ≤ n−4ℓ+1
    (n + 1 - 4 * l + 2 * l - 2) / l
}

fn pad_symbol(t: usize) -> u32 {
    u32::MAX - t as u32
}

/// Largest symbol callers may use; larger ones pad the text.
pub const MAX_SYMBOL: u32 = u32::MAX - (1 << 24);

fn check_symbol(sigma: u32) -> Result<()> {
    if sigma == 0 || sigma > MAX_SYMBOL {
        Err(Error::BadSymbol(sigma))
    } else {
        Ok(())
    }
}

/// Which input string of a prefix-suffix instance an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsInput {
    P,
    S,
}

/// Prefix-suffix matching of two equal-length strings.
#[derive(Debug, Clone)]
pub struct PrefixSuffix {
    text: Text,
    forest: Forest,
    root: usize,
    m: usize,
}

impl PrefixSuffix {
    pub fn new(p: &[u32], s: &[u32], epsilon: f64) -> Result<Self> {
        if p.len() != s.len() || p.is_empty() {
            return Err(Error::InvalidArgument("P and S need the same positive length".into()));
        }
        for &c in p.iter().chain(s) {
            check_symbol(c)?;
        }
        let m = p.len();
        let text = Text::new([p, s].concat(), epsilon, Mode::Pipelined)?;
        let mut forest = Forest { k: crate::fanout(m, epsilon), nodes: vec![] };
        let root = forest.build(&text, 1, m + 1, m);
        Ok(PrefixSuffix { text, forest, root, m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn set(&mut self, which: PsInput, x: usize, sigma: u32) -> Result<()> {
        check_range(x, self.m)?;
        check_symbol(sigma)?;
        let y = if which == PsInput::P { x } else { self.m + x };
        self.text.set(y, sigma)?;
        self.forest.refresh(&self.text, self.root, y);
        Ok(())
    }

    pub fn segment_count(&self) -> usize {
        segment_count(self.m)
    }

    /// Matches in segment `I_t = [2^{t−1}, 2^t − 1]`, 1-based `t`.
    pub fn matches(&self, t: usize) -> Result<SegmentMatch> {
        check_range(t, self.segment_count())?;
        Ok(self.forest.segment(self.root, t - 1))
    }

    /// Levels of the instance tree, the root included.
    pub fn depth(&self) -> usize {
        self.forest.depth(self.root)
    }

    pub fn audit(&self) -> Vec<String> {
        let mut out = vec![];
        self.forest.audit(&self.text.s, self.root, &mut out);
        out
    }
}

/// Which input of a string matcher an update targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmInput {
    T,
    P,
}

/// The occurrence of `P` in a text `T` with `|T| = 2|P|`.
#[derive(Debug, Clone)]
pub struct StringMatcher {
    text: Text,
    forest: Forest,
    matcher: Matcher,
}

impl StringMatcher {
    pub fn new(t: &[u32], p: &[u32], epsilon: f64) -> Result<Self> {
        if t.len() != 2 * p.len() || p.is_empty() {
            return Err(Error::InvalidArgument("text must be twice as long as the pattern".into()));
        }
        for &c in t.iter().chain(p) {
            check_symbol(c)?;
        }
        let m = p.len();
        let text = Text::new([t, p].concat(), epsilon, Mode::Pipelined)?;
        let mut forest = Forest { k: crate::fanout(m, epsilon), nodes: vec![] };
        let matcher = Matcher::build(&mut forest, &text, 1, 2 * m + 1, m);
        Ok(StringMatcher { text, forest, matcher })
    }

    pub fn set(&mut self, which: SmInput, x: usize, sigma: u32) -> Result<()> {
        let m = self.matcher.m;
        check_range(x, if which == SmInput::T { 2 * m } else { m })?;
        check_symbol(sigma)?;
        let y = if which == SmInput::T { x } else { 2 * m + x };
        self.text.set(y, sigma)?;
        self.matcher.refresh(&mut self.forest, &self.text, y);
        Ok(())
    }

    pub fn occ(&self) -> Occurrence {
        self.matcher.occ(&self.forest)
    }

    pub fn audit(&self) -> Vec<String> {
        let mut out = vec![];
        self.forest.audit(&self.text.s, self.matcher.first, &mut out);
        self.forest.audit(&self.text.s, self.matcher.second, &mut out);
        out
    }
}

/// One range instance `(ℓ, i)` over a string of its own.
#[derive(Debug, Clone)]
pub struct RangeSquare {
    n: usize,
    text: Text,
    forest: Forest,
    inst: RangeInst,
}

impl RangeSquare {
    pub fn new(s: &[u32], l: usize, i: usize, epsilon: f64) -> Result<Self> {
        if l == 0 || i == 0 {
            return Err(Error::InvalidArgument("ℓ and i start at 1".into()));
        }
        for &c in s {
            check_symbol(c)?;
        }
        let n = s.len();
        let mut padded = s.to_vec();
        let need = l * (i + 5);
        padded.extend((0..need.saturating_sub(n)).map(pad_symbol));
        let text = Text::new(padded, epsilon, Mode::Pipelined)?;
        let mut forest = Forest { k: crate::fanout(l, epsilon), nodes: vec![] };
        let inst = RangeInst::build(&mut forest, &text, l, i);
        Ok(RangeSquare { n, text, forest, inst })
    }

    /// Substitutes `S[x]`; positions outside the seven watched blocks only
    /// change the string.
    pub fn set(&mut self, x: usize, sigma: u32) -> Result<()> {
        check_range(x, self.n)?;
        check_symbol(sigma)?;
        self.text.set(x, sigma)?;
        if self.inst.watches(x) {
            self.inst.matcher.refresh(&mut self.forest, &self.text, x);
            self.inst.bit = self.inst.evaluate(&self.forest, &self.text);
        }
        Ok(())
    }

    pub fn query(&self) -> bool {
        self.inst.bit
    }

    /// The start window `[lo, hi]` and length band `[4ℓ, 6ℓ]` of the instance.
    pub fn window(&self) -> ((usize, usize), (usize, usize)) {
        (self.inst.window(), (4 * self.inst.l, 6 * self.inst.l))
    }
}

/// Square-freeness of a string under substitutions.
///
/// Level `k` holds one range instance per block index `i` with block
/// length `ℓ_k` from [`block_lengths`]. Squares of length 2 are tracked
/// directly through adjacent equal pairs. A neighbor set holds the positive
/// bits, so the query is an emptiness test.
#[derive(Debug, Clone)]
pub struct SquareFree {
    n: usize,
    text: Text,
    forest: Forest,
    levels: Vec<Vec<RangeInst>>,
    /// Bit `base[k] + i` belongs to instance `(k, i)`; bit `pair_base + y`
    /// to the pair `(y, y+1)`.
    base: Vec<usize>,
    pair_base: usize,
    bits: NeighborSet,
    touched: Vec<(usize, usize)>,
}

impl SquareFree {
    /// The string `1^n`.
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        Self::from_symbols(&vec![1; n], epsilon)
    }

    pub fn from_symbols(s: &[u32], epsilon: f64) -> Result<Self> {
        Self::with_mode(s, epsilon, Mode::Pipelined)
    }

    pub fn with_mode(s: &[u32], epsilon: f64, mode: Mode) -> Result<Self> {
        let n = s.len();
        if n == 0 {
            return Err(Error::InvalidArgument("string needs n ≥ 1".into()));
        }
        for &c in s {
            check_symbol(c)?;
        }
        let ls = block_lengths(n);
        let pad = ls.last().copied().unwrap_or(0) + 1;
        let mut padded = s.to_vec();
        padded.extend((0..pad).map(pad_symbol));
        let text = Text::new(padded, epsilon, mode)?;
        let mut forest = Forest { k: crate::fanout(n, epsilon), nodes: vec![] };
        let mut levels = vec![];
        let mut base = vec![];
        let mut next = 0;
        for &l in &ls {
            let count = last_block(n, l);
            base.push(next);
            next += count;
            levels.push((1..=count).map(|i| RangeInst::build(&mut forest, &text, l, i)).collect::<Vec<_>>());
        }
        let pair_base = next;
        let mut bits = NeighborSet::new(pair_base + n);
        for (k, lv) in levels.iter().enumerate() {
            for (t, r) in lv.iter().enumerate() {
                if r.bit {
                    bits.insert(base[k] + t + 1);
                }
            }
        }
        for y in 1..n {
            if s[y - 1] == s[y] {
                bits.insert(pair_base + y);
            }
        }
        Ok(SquareFree { n, text, forest, levels, base, pair_base, bits, touched: vec![] })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.text.s[..self.n].to_vec()
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.text.lce
    }

    /// Substitutes `S[x] = σ`.
    pub fn set(&mut self, x: usize, sigma: u32) -> Result<()> {
        check_range(x, self.n)?;
        check_symbol(sigma)?;
        self.touched.clear();
        self.text.set(x, sigma)?;
        for k in 0..self.levels.len() {
            let l = self.levels[k][0].l;
            let c = x.div_ceil(l);
            let lo = c.saturating_sub(5).max(1);
            let hi = (c + 1).min(self.levels[k].len());
            for i in lo..=hi {
                let r = &mut self.levels[k][i - 1];
                if !r.watches(x) {
                    continue;
                }
                r.matcher.refresh(&mut self.forest, &self.text, x);
                r.bit = r.evaluate(&self.forest, &self.text);
                let id = self.base[k] + i;
                if r.bit {
                    self.bits.insert(id);
                } else {
                    self.bits.remove(id);
                }
                self.touched.push((k, i));
            }
        }
        for y in [x.saturating_sub(1), x] {
            if y >= 1 && y < self.n {
                let id = self.pair_base + y;
                if self.text.s[y - 1] == self.text.s[y] {
                    self.bits.insert(id);
                } else {
                    self.bits.remove(id);
                }
            }
        }
        Ok(())
    }

    /// Whether the string contains no square `uu`.
    pub fn query(&self) -> bool {
        self.bits.is_empty()
    }

    /// `(level, i)` of the range instances the last update recomputed.
    pub fn last_touched(&self) -> &[(usize, usize)] {
        &self.touched
    }

    pub fn block_lengths(&self) -> Vec<usize> {
        self.levels.iter().map(|lv| lv[0].l).collect()
    }

    /// Result bit of every range instance, per level.
    pub fn level_bits(&self) -> Vec<(usize, Vec<bool>)> {
        self.levels.iter().map(|lv| (lv[0].l, lv.iter().map(|r| r.bit).collect())).collect()
    }

    /// `(level, i)` of every range instance whose length band and start
    /// window contain a square at `x` of length `m`.
    pub fn covering(&self, x: usize, m: usize) -> Vec<(usize, usize)> {
        let mut out = vec![];
        for (k, lv) in self.levels.iter().enumerate() {
            for r in lv {
                let (lo, hi) = r.window();
                if 4 * r.l <= m && m <= 6 * r.l && lo <= x && x <= hi {
                    out.push((k, r.i));
                }
            }
        }
        out
    }

    /// Result bit of instance `(level, i)`.
    pub fn bit(&self, level: usize, i: usize) -> Option<bool> {
        self.levels.get(level)?.get(i.checked_sub(1)?).map(|r| r.bit)
    }

    pub fn instance_count(&self) -> usize {
        self.pair_base
    }

    /// Checks every prefix-suffix instance against brute force and every
    /// positive bit against the presence of a square.
    pub fn audit(&self) -> Vec<String> {
        let mut out = vec![];
        for lv in &self.levels {
            for r in lv {
                self.forest.audit(&self.text.s, r.matcher.first, &mut out);
                self.forest.audit(&self.text.s, r.matcher.second, &mut out);
            }
        }
        let any_bit = self.levels.iter().flatten().any(|r| r.bit);
        if any_bit && naive_square_free(&self.to_vec()) {
            out.push("a range instance reports a square in a square-free string".into());
        }
        out
    }
}

impl fmt::Display for SquareFree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (l, bits) in self.level_bits() {
            let row: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(f, "ℓ={l:<4} {row}")?;
        }
        Ok(())
    }
}
