//! The maintained state: the current string, the record of recent edits, the
//! delayed decompositions with their synchronizing sets, and the pipeline that
//! moves every edit up one level per `⌈log* n⌉` updates.
//!
//! Level `ℓ` lags exactly `ℓ·⌈log* n⌉` updates behind the current string (or
//! fewer while the pipeline is filling). An update prepares level `ℓ` in its
//! first action slot for that level and commits it in the last; the slots in
//! between do nothing. Within one step every preparation runs before any
//! commit, so a preparation of level `ℓ+1` reads level `ℓ` before the same
//! step's commit to level `ℓ` lands.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::coin_flip::{choose_merges, MergeInput};
use crate::error::{Error, Result};
use crate::marked_string::{Dir, MarkedString};
use crate::names::{Key, NameRegistry};
use crate::oracles::{self, Property, Violation, ViolationReport};
use crate::prepare::{coin_domain, factor_flags, prepare_runs, PreparedItem, Run};
use crate::primitives::WorkLedger;
use crate::{ceil_log2, log_star};

/// Occurrences per `2^ℓ` characters allowed by the sparseness check; the
/// randomized suites stay below 1.
pub const SPARSENESS_C: f64 = 2.0;

/// Sparseness constant for a synchronizing set of `τ` served by level `level`.
pub fn sparseness_bound(tau: usize, level: u32) -> f64 {
    SPARSENESS_C * tau as f64 / (1u64 << level) as f64 + 1.0
}

/// Names of the level below for level 1: the characters themselves.
const CHAR_DOMAIN: u64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    Insert { pos: usize, ch: u32 },
    Delete { pos: usize },
}

impl Edit {
    pub fn pos(&self) -> usize {
        match *self {
            Edit::Insert { pos, .. } | Edit::Delete { pos } => pos,
        }
    }

    /// Position after the edit of the character at `x` before it.
    pub fn forward(&self, x: usize) -> Option<usize> {
        match *self {
            Edit::Insert { pos, .. } => Some(if x >= pos { x + 1 } else { x }),
            Edit::Delete { pos } => match x.cmp(&pos) {
                std::cmp::Ordering::Less => Some(x),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(x - 1),
            },
        }
    }

    /// Position before the edit of the character at `x` after it; `None` for
    /// the inserted character.
    pub fn backward(&self, x: usize) -> Option<usize> {
        match *self {
            Edit::Insert { pos, .. } => match x.cmp(&pos) {
                std::cmp::Ordering::Less => Some(x),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(x - 1),
            },
            Edit::Delete { pos } => Some(if x >= pos { x + 1 } else { x }),
        }
    }

    fn apply(&self, s: &mut MarkedString) -> Result<()> {
        match *self {
            Edit::Insert { pos, ch } => s.insert(pos, ch),
            Edit::Delete { pos } => s.delete(pos),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Each level trails the string by its delay; queries read the record.
    Pipelined,
    /// Every update is pushed through all levels before `apply` returns.
    Eager,
}

/// Where a recent edit sits in current coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    /// The character at this index was inserted.
    Inserted(usize),
    /// Something was deleted right before this index.
    Gap(usize),
    /// An inserted character that has since been deleted again.
    Void,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecordEntry {
    pub k: u64,
    pub kind: RecordKind,
    pub age: u64,
}

#[derive(Debug, Clone)]
enum Staged {
    Degenerate,
    Window {
        items: Vec<PreparedItem>,
        left_fake: bool,
        right_fake: bool,
        changed: (usize, usize),
        full: bool,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct InFlight {
    pub(crate) k: u64,
    edit: Edit,
    pub(crate) entry: RecordKind,
    /// For a delete: the pending insert that created the deleted character.
    pub(crate) born: Option<u64>,
    j: u32,
    /// Changed character span per level, inclusive; index 0 is the edit itself.
    spans: Vec<Option<(usize, usize)>>,
    staged: Option<Staged>,
}

#[derive(Debug, Clone)]
pub(crate) struct SyncLevel {
    pub(crate) tau: usize,
    pub(crate) b: MarkedString,
    pub(crate) reg: NameRegistry,
}

#[derive(Debug, Clone)]
pub(crate) struct Level {
    /// Delayed string, factor starts marked with the factor name.
    pub(crate) s: MarkedString,
    /// One symbol per factor, run starts marked.
    pub(crate) d: MarkedString,
    pub(crate) reg: NameRegistry,
    pub(crate) version: u64,
    pub(crate) sync: Vec<SyncLevel>,
}

/// Dynamic string with its hierarchy of decompositions and synchronizing sets.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    n: usize,
    epsilon: f64,
    big_l: u32,
    big_i: u32,
    /// `log*` of the largest merge-selection domain.
    pub(crate) lsn: u32,
    lstar_n: u32,
    batch: usize,
    mode: Mode,
    pub(crate) base: MarkedString,
    pub(crate) levels: Vec<Level>,
    pub(crate) virtual_taus: Vec<usize>,
    pub(crate) pending: VecDeque<InFlight>,
    pub(crate) version: u64,
    faults: u64,
    ledger: WorkLedger,
}

pub fn alpha(level: u32) -> usize {
    5 * ((1usize << (level + 1)) - 1)
}

pub fn beta(level: u32, lsn: u32) -> usize {
    (lsn as usize + 9) * ((1usize << (level + 1)) - 1)
}

fn chunked_add(reg: &mut NameRegistry, keys: &[Key]) -> Result<Vec<u64>> {
    let mut counts: BTreeMap<&Key, i64> = BTreeMap::new();
    for k in keys {
        *counts.entry(k).or_insert(0) += 1;
    }
    let distinct: Vec<(Key, i64)> = counts.into_iter().map(|(k, c)| (k.clone(), c)).collect();
    let mut names: HashMap<Key, u64> = HashMap::with_capacity(distinct.len());
    for chunk in distinct.chunks(reg.max_batch()) {
        for (k, g) in reg.add(chunk)? {
            names.insert(k, g);
        }
    }
    Ok(keys.iter().map(|k| names[k]).collect())
}

fn chunked_sub(reg: &mut NameRegistry, names: &[u64]) -> Result<()> {
    for chunk in names.chunks(reg.max_batch()) {
        reg.sub_names(chunk)?;
    }
    Ok(())
}

fn to_key(xs: Vec<u32>) -> Key {
    xs.into_iter().map(u64::from).collect()
}

/// All marks of `ms` with index in `[lo, hi]`.
fn marks_in(ms: &MarkedString, lo: usize, hi: usize) -> Vec<(usize, u64)> {
    let mut out = Vec::new();
    if lo > hi || ms.is_empty() {
        return out;
    }
    let mut cur = ms.mark_at_or_after(lo.max(1));
    while let Some((p, a)) = cur {
        if p > hi {
            break;
        }
        out.push((p, a));
        cur = ms.neighbor(p, Dir::Forward);
    }
    out
}

/// Factor boundaries from merge bits: a 1 starts a group.
fn groups(items: &[PreparedItem], bits: &[u8]) -> Vec<(usize, usize, usize)> {
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    for (q, it) in items.iter().enumerate() {
        if bits[q] == 1 || out.is_empty() {
            out.push((it.start, it.len, q));
        } else {
            out.last_mut().unwrap().1 += it.len;
        }
    }
    out
}

impl Hierarchy {
    /// Empty string with room for `n` characters; `ε` sets the tree fanout.
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        Self::with_mode(n, epsilon, Mode::Pipelined)
    }

    pub fn with_mode(n: usize, epsilon: f64, mode: Mode) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} < 2")));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} not in (0,1]")));
        }
        let big_l = ceil_log2(n);
        let lstar_n = log_star(n as f64);
        let big_i = lstar_n.max(1);
        let batch = 64 + 8 * lstar_n as usize;
        let reg_n = 2 * n + 64;
        let reg_domain = (reg_n * batch) as u64;
        let lsn = (1..=big_l)
            .map(|l| log_star(coin_domain(l, if l == 1 { CHAR_DOMAIN } else { reg_domain }) as f64))
            .max()
            .unwrap_or(1);
        let mut levels = Vec::with_capacity(big_l as usize);
        for l in 1..=big_l {
            let lo = alpha(l) + 1 + beta(l, lsn);
            let hi = alpha(l + 1) + 1 + beta(l + 1, lsn);
            let mut sync = Vec::new();
            let mut tau = 1usize;
            while tau <= n {
                if tau >= lo && tau < hi {
                    sync.push(SyncLevel {
                        tau,
                        b: MarkedString::new(n, epsilon)?,
                        reg: NameRegistry::new(reg_n, batch, tau, epsilon),
                    });
                }
                tau *= 2;
            }
            levels.push(Level {
                s: MarkedString::new(n, epsilon)?,
                d: MarkedString::new(n, epsilon)?,
                reg: NameRegistry::new(reg_n, batch, n, epsilon),
                version: 0,
                sync,
            });
        }
        let first = alpha(1) + 1 + beta(1, lsn);
        let mut virtual_taus = Vec::new();
        let mut tau = 2;
        while tau < first && tau <= n {
            virtual_taus.push(tau);
            tau *= 2;
        }
        Ok(Hierarchy {
            n,
            epsilon,
            big_l,
            big_i,
            lsn,
            lstar_n,
            batch,
            mode,
            base: MarkedString::new(n, epsilon)?,
            levels,
            virtual_taus,
            pending: VecDeque::new(),
            version: 0,
            faults: 0,
            ledger: WorkLedger::new(),
        })
    }

    /// Builds a hierarchy over `s` by inserting its characters and settling.
    pub fn from_symbols(n: usize, epsilon: f64, s: &[u32]) -> Result<Self> {
        let mut h = Self::with_mode(n, epsilon, Mode::Pipelined)?;
        for (i, &c) in s.iter().enumerate() {
            h.apply(Edit::Insert { pos: i + 1, ch: c })?;
        }
        h.settle();
        Ok(h)
    }

    pub fn capacity(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of decomposition levels `⌈log n⌉`.
    pub fn level_count(&self) -> u32 {
        self.big_l
    }

    /// Actions per level `⌈log* n⌉`.
    pub fn actions_per_level(&self) -> u32 {
        self.big_i
    }

    /// Updates needed to push one edit through every level.
    pub fn pipeline_depth(&self) -> u32 {
        self.big_l * self.big_i
    }

    pub fn lstar_n(&self) -> u32 {
        self.lstar_n
    }

    /// `log*` of the merge-selection domain, used for context sizes.
    pub fn lstar_domain(&self) -> u32 {
        self.lsn
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    /// Number of updates applied so far.
    pub fn updates(&self) -> u64 {
        self.version
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.base.to_vec()
    }

    pub fn char_at(&self, i: usize) -> Result<u32> {
        self.base.char(i)
    }

    pub fn in_flight(&self) -> usize {
        self.pending.len()
    }

    pub fn is_settled(&self) -> bool {
        self.pending.is_empty()
    }

    /// Finalizations whose replacement region could not be trusted.
    pub fn locality_faults(&self) -> u64 {
        self.faults
    }

    pub fn ledger(&self) -> &WorkLedger {
        &self.ledger
    }

    pub fn reset_ledger(&mut self) {
        self.ledger = WorkLedger::new();
    }

    /// Recent edits sorted by current index; inserted characters that were
    /// deleted again are left out.
    pub fn record(&self) -> Vec<RecordEntry> {
        let mut out: Vec<RecordEntry> = self
            .pending
            .iter()
            .filter(|f| f.entry != RecordKind::Void)
            .map(|f| RecordEntry { k: f.k, kind: f.entry, age: self.version - f.k })
            .collect();
        out.sort_by_key(|e| match e.kind {
            RecordKind::Inserted(x) => (x, 1),
            RecordKind::Gap(g) => (g, 0),
            RecordKind::Void => (usize::MAX, 2),
        });
        out
    }

    /// Update count the level reflects.
    pub fn level_version(&self, level: u32) -> u64 {
        self.levels[level as usize - 1].version
    }

    /// Delayed string of a level.
    pub fn level_string(&self, level: u32) -> Vec<u32> {
        self.levels[level as usize - 1].s.to_vec()
    }

    /// Factors of a level as `(start, len, name)`.
    pub fn factors(&self, level: u32) -> Vec<(usize, usize, u64)> {
        let lv = &self.levels[level as usize - 1];
        let marks = lv.s.marks();
        let end = lv.s.len() + 1;
        marks
            .iter()
            .enumerate()
            .map(|(t, &(p, a))| (p, marks.get(t + 1).map_or(end, |x| x.0) - p, a))
            .collect()
    }

    /// `τ` values served by a real synchronizing set, with their level.
    pub fn sync_taus(&self) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        for (li, lv) in self.levels.iter().enumerate() {
            for sl in &lv.sync {
                out.push((sl.tau, li as u32 + 1));
            }
        }
        out
    }

    /// `τ` values below the first real level, answered from the string itself.
    pub fn virtual_taus(&self) -> &[usize] {
        &self.virtual_taus
    }

    /// Occurrences and names of the synchronizing set for `τ`.
    pub fn sync_set(&self, tau: usize) -> Option<Vec<(usize, u64)>> {
        self.levels
            .iter()
            .flat_map(|lv| lv.sync.iter())
            .find(|sl| sl.tau == tau)
            .map(|sl| sl.b.marks())
    }

    fn check_edit(&self, e: &Edit) -> Result<()> {
        let len = self.len();
        match *e {
            Edit::Insert { pos, ch } => {
                if ch == 0 {
                    return Err(Error::BadSymbol(0));
                }
                if len >= self.n {
                    return Err(Error::CapacityExceeded(self.n));
                }
                crate::error::check_range(pos, len + 1)
            }
            Edit::Delete { pos } => crate::error::check_range(pos, len),
        }
    }

    /// Applies one edit to the current string and advances every in-flight
    /// update by one action.
    pub fn apply(&mut self, e: Edit) -> Result<()> {
        self.check_edit(&e)?;
        // step() charges its prepare/finalize sub-phases to self.ledger directly
        let mut outer = WorkLedger::new();
        outer.measure("update.pipeline", || self.step());
        outer.measure("update.record", || self.arrive(e));
        self.ledger.absorb(&outer);
        if self.mode == Mode::Eager {
            self.settle();
        }
        Ok(())
    }

    pub fn insert(&mut self, pos: usize, ch: u32) -> Result<()> {
        self.apply(Edit::Insert { pos, ch })
    }

    pub fn delete(&mut self, pos: usize) -> Result<()> {
        self.apply(Edit::Delete { pos })
    }

    /// Runs pipeline steps until every update has reached the top level.
    pub fn settle(&mut self) {
        let mut outer = WorkLedger::new();
        while !self.pending.is_empty() {
            outer.measure("settle", || self.step());
        }
        self.ledger.absorb(&outer);
    }

    fn arrive(&mut self, e: Edit) {
        e.apply(&mut self.base).expect("edit was checked");
        let p = e.pos();
        let len = self.base.len();
        for x in [p.saturating_sub(1), p, p + 1] {
            if x >= 1 && x <= len {
                let want = x == 1 || self.base.char(x).unwrap() != self.base.char(x - 1).unwrap();
                let has = self.base.mark_at(x).is_some();
                if want && !has {
                    self.base.mark(&[(x, 1)]).unwrap();
                } else if !want && has {
                    self.base.unmark(&[x]).unwrap();
                }
            }
        }
        let mut born = None;
        for f in self.pending.iter_mut() {
            if f.entry == RecordKind::Inserted(p) && matches!(e, Edit::Delete { .. }) {
                born = Some(f.k);
            }
            f.entry = match (f.entry, e) {
                (RecordKind::Inserted(x), Edit::Insert { pos, .. }) => RecordKind::Inserted(if pos <= x { x + 1 } else { x }),
                (RecordKind::Inserted(x), Edit::Delete { pos }) => match pos.cmp(&x) {
                    std::cmp::Ordering::Equal => RecordKind::Void,
                    std::cmp::Ordering::Less => RecordKind::Inserted(x - 1),
                    std::cmp::Ordering::Greater => RecordKind::Inserted(x),
                },
                (RecordKind::Gap(g), Edit::Insert { pos, .. }) => RecordKind::Gap(if pos < g { g + 1 } else { g }),
                (RecordKind::Gap(g), Edit::Delete { pos }) => RecordKind::Gap(if pos < g { g - 1 } else { g }),
                (RecordKind::Void, _) => RecordKind::Void,
            };
        }
        self.version += 1;
        let entry = match e {
            Edit::Insert { pos, .. } => RecordKind::Inserted(pos),
            Edit::Delete { pos } => RecordKind::Gap(pos),
        };
        let span = if len == 0 { None } else { Some((p.saturating_sub(1).max(1).min(len), p.min(len))) };
        let mut spans = vec![None; self.big_l as usize + 1];
        spans[0] = span;
        self.pending.push_back(InFlight { k: self.version, edit: e, entry, born, j: 0, spans, staged: None });
    }

    fn cursor(&self, j: u32) -> (u32, u32) {
        let l = j.div_ceil(self.big_i);
        let i = (j - 1) % self.big_i + 1;
        (l, i)
    }

    fn step(&mut self) {
        for f in self.pending.iter_mut() {
            f.j += 1;
        }
        let mut ledger = std::mem::take(&mut self.ledger);
        for idx in 0..self.pending.len() {
            let (l, i) = self.cursor(self.pending[idx].j);
            if i == 1 {
                let staged = ledger.measure("prepare", || self.prepare(l, idx));
                self.pending[idx].staged = Some(staged);
            }
        }
        for idx in 0..self.pending.len() {
            let (l, i) = self.cursor(self.pending[idx].j);
            if i == self.big_i {
                ledger.measure("finalize", || self.finalize(l, idx));
            }
        }
        self.ledger = ledger;
        let top = self.big_l * self.big_i;
        while self.pending.front().is_some_and(|f| f.j >= top) {
            self.pending.pop_front();
        }
    }

    fn below_len(&self, below: u32) -> usize {
        if below == 0 {
            self.base.len()
        } else {
            self.levels[below as usize - 1].s.len()
        }
    }

    fn below_version(&self, below: u32) -> u64 {
        if below == 0 {
            self.version
        } else {
            self.levels[below as usize - 1].version
        }
    }

    /// Upper bound on the names of level `below`.
    fn below_domain(&self, below: u32) -> u64 {
        if below == 0 {
            CHAR_DOMAIN
        } else {
            self.levels[below as usize - 1].reg.domain() as u64
        }
    }

    /// Run at unit ordinal `r` (a run start) of level `below`, ending before `next`.
    fn run_at(&self, below: u32, r: usize, next: usize) -> Run {
        if below == 0 {
            Run { start: r, flen: 1, count: next - r, name: self.base.char(r).unwrap() as u64 }
        } else {
            let lv = &self.levels[below as usize - 1];
            let start = lv.s.select(r).unwrap().0;
            let end = lv.s.select(r + 1).map_or(lv.s.len() + 1, |x| x.0);
            Run { start, flen: end - start, count: next - r, name: lv.d.char(r).unwrap() as u64 }
        }
    }

    /// Runs of the level below around the character span `[c1, c2]`, with
    /// `margin` extra runs on each side where available. Returns the runs,
    /// whether each end is cut short of the string end, and the indices of
    /// the runs covering the span.
    fn window_runs(&self, below: u32, c1: usize, c2: usize, margin: (usize, usize)) -> (Vec<Run>, bool, bool, (usize, usize)) {
        let (ms, units) = if below == 0 {
            (&self.base, self.base.len())
        } else {
            let lv = &self.levels[below as usize - 1];
            (&lv.d, lv.d.len())
        };
        let ord = |c: usize| if below == 0 { c } else { self.levels[below as usize - 1].s.rank(c) };
        let (t1, t2) = (ord(c1), ord(c2));
        let r1 = ms.mark_at_or_before(t1).expect("unit 1 starts a run").0;
        let mut starts = vec![r1];
        for _ in 0..margin.0 {
            match ms.neighbor(starts[0], Dir::Backward) {
                Some((p, _)) => starts.insert(0, p),
                None => break,
            }
        }
        let first_changed = starts.len() - 1;
        let r2 = ms.mark_at_or_before(t2).unwrap().0;
        let mut cur = r1;
        let mut next = ms.neighbor(cur, Dir::Forward).map(|x| x.0);
        while cur < r2 {
            cur = next.expect("r2 lies ahead");
            starts.push(cur);
            next = ms.neighbor(cur, Dir::Forward).map(|x| x.0);
        }
        let last_changed = starts.len() - 1;
        for _ in 0..margin.1 {
            match next {
                Some(p) => {
                    starts.push(p);
                    next = ms.neighbor(p, Dir::Forward).map(|x| x.0);
                }
                None => break,
            }
        }
        let end = next.unwrap_or(units + 1);
        let runs: Vec<Run> = starts
            .iter()
            .enumerate()
            .map(|(x, &r)| self.run_at(below, r, starts.get(x + 1).copied().unwrap_or(end)))
            .collect();
        (runs, starts[0] > 1, end <= units, (first_changed, last_changed))
    }

    fn all_runs(&self, below: u32) -> Vec<Run> {
        let ms = if below == 0 { &self.base } else { &self.levels[below as usize - 1].d };
        let marks = ms.marks();
        let end = ms.len() + 1;
        marks
            .iter()
            .enumerate()
            .map(|(x, &(r, _))| self.run_at(below, r, marks.get(x + 1).map_or(end, |y| y.0)))
            .collect()
    }

    fn margin(&self) -> usize {
        2 * (self.lsn as usize + 24)
    }

    fn prepare(&self, l: u32, idx: usize) -> Staged {
        let f = &self.pending[idx];
        let below = l - 1;
        debug_assert_eq!(self.below_version(below), f.k, "level {below} not at version {}", f.k);
        let len = self.below_len(below);
        let thr = 1usize << (l + 1);
        if len < thr {
            return Staged::Degenerate;
        }
        let prev_len = match f.edit {
            Edit::Insert { .. } => len - 1,
            Edit::Delete { .. } => len + 1,
        };
        let n0 = self.below_domain(below);
        let full = prev_len < thr;
        let Some((c1, c2)) = f.spans[below as usize].filter(|_| !full) else {
            let runs = self.all_runs(below);
            let items = prepare_runs(&runs, l, n0);
            let last = items.len() - 1;
            return Staged::Window { items, left_fake: false, right_fake: false, changed: (0, last), full: true };
        };
        // widen a side until it holds enough items; runs can collapse into
        // far fewer items inside periodic stretches
        let (need_left, need_right) = (self.lsn as usize + 32, self.lsn as usize + 36);
        let mut margin = (self.margin(), self.margin());
        let (items, left_fake, right_fake, a, b) = loop {
            let (runs, left_fake, right_fake, changed_runs) = self.window_runs(below, c1, c2, margin);
            let items = prepare_runs(&runs, l, n0);
            let a = items.iter().position(|it| it.last_run >= changed_runs.0).unwrap_or(0);
            let b = items.iter().rposition(|it| it.first_run <= changed_runs.1).unwrap_or(items.len() - 1).max(a);
            let short_left = left_fake && a < need_left;
            let short_right = right_fake && items.len() - 1 - b < need_right;
            if !short_left && !short_right {
                break (items, left_fake, right_fake, a, b);
            }
            if short_left {
                margin.0 *= 2;
            }
            if short_right {
                margin.1 *= 2;
            }
        };
        Staged::Window { items, left_fake, right_fake, changed: (a, b), full: false }
    }

    fn finalize(&mut self, l: u32, idx: usize) {
        let staged = self.pending[idx].staged.take().expect("prepared before finalize");
        let edit = self.pending[idx].edit;
        let k = self.pending[idx].k;
        let lv = &self.levels[l as usize - 1];
        debug_assert_eq!(lv.version + 1, k, "level {l} out of order");
        let new_len = match edit {
            Edit::Insert { .. } => lv.s.len() + 1,
            Edit::Delete { .. } => lv.s.len() - 1,
        };
        let (a, b, new) = match staged {
            Staged::Degenerate => {
                let new = if new_len > 0 { vec![(1, new_len)] } else { Vec::new() };
                (1, new_len + 1, new)
            }
            Staged::Window { items, left_fake, right_fake, changed, full } => {
                let n0 = self.below_domain(l - 1);
                let codes: Vec<i64> = items.iter().map(|it| it.code).collect();
                let bits = choose_merges(&MergeInput::new(codes, coin_domain(l, n0))).expect("prepared codes are valid");
                let bits = factor_flags(&items, &bits, l);
                let gs = groups(&items, &bits);
                if full {
                    (1, new_len + 1, gs.iter().map(|g| (g.0, g.1)).collect())
                } else {
                    self.region(&items, &bits, &gs, left_fake, right_fake, changed, new_len)
                }
            }
        };
        let span = self.splice(l, edit, a, b, &new);
        let f = &mut self.pending[idx];
        f.spans[l as usize] = span;
        self.levels[l as usize - 1].version = k;
    }

    /// Picks the replacement region inside the trusted part of the window.
    #[allow(clippy::too_many_arguments)]
    fn region(
        &mut self,
        items: &[PreparedItem],
        bits: &[u8],
        gs: &[(usize, usize, usize)],
        left_fake: bool,
        right_fake: bool,
        changed: (usize, usize),
        new_len: usize,
    ) -> (usize, usize, Vec<(usize, usize)>) {
        let w = items.len();
        let lsn = self.lsn as usize;
        let left_trust = if left_fake { 12 } else { 0 };
        let right_trust = if right_fake { w.saturating_sub(lsn + 19) } else { w };
        let mut qa = changed.0.saturating_sub(lsn + 16);
        if left_fake && changed.0 < lsn + 16 + left_trust {
            self.faults += 1;
        }
        while qa > 0 && bits[qa] == 0 {
            qa -= 1;
        }
        if qa < left_trust {
            self.faults += 1;
        }
        let mut qb = (changed.1 + 12).min(w);
        while qb < w && bits[qb] == 0 {
            qb += 1;
        }
        if qb >= w && right_fake || qb > right_trust {
            self.faults += 1;
        }
        let a = if qa == 0 && !left_fake { 1 } else { items[qa].start };
        let b = if qb >= w { if right_fake { items[w - 1].start + items[w - 1].len } else { new_len + 1 } } else { items[qb].start };
        let new: Vec<(usize, usize)> = gs.iter().filter(|g| g.0 >= a && g.0 < b).map(|g| (g.0, g.1)).collect();
        (a, b, new)
    }

    /// Replaces the factors of level `l` inside `[a, b)` (coordinates after
    /// `edit`) with `new`, applying `edit` to the level's strings on the way.
    /// Returns the span of characters whose factor changed.
    fn splice(&mut self, l: u32, edit: Edit, a: usize, b: usize, new: &[(usize, usize)]) -> Option<(usize, usize)> {
        let batch = self.batch;
        let _ = batch;
        let lv = &mut self.levels[l as usize - 1];
        let old_len = lv.s.len();
        let new_len = match edit {
            Edit::Insert { .. } => old_len + 1,
            Edit::Delete { .. } => old_len - 1,
        };
        let back = |x: usize| match edit {
            Edit::Insert { pos, .. } => if x > pos { x - 1 } else { x },
            Edit::Delete { pos } => if x >= pos { x + 1 } else { x },
        };
        let a_old = if a == 1 { 1 } else { back(a) };
        let b_old = if b == new_len + 1 { old_len + 1 } else { back(b) };
        if (a_old != 1 && lv.s.mark_at(a_old).is_none()) || (b_old != old_len + 1 && lv.s.mark_at(b_old).is_none()) {
            self.faults += 1;
        }
        let lv = &mut self.levels[l as usize - 1];
        let oa = lv.s.rank(a_old - 1) + 1;
        let ob = if b_old > 1 { lv.s.rank(b_old - 1) } else { 0 };
        let old: Vec<(usize, usize, u64)> = (oa..=ob)
            .map(|t| {
                let (st, name) = lv.s.select(t).unwrap();
                let en = lv.s.select(t + 1).map_or(old_len + 1, |x| x.0);
                (st, en - st, name)
            })
            .collect();

        // synchronizing sets: drop the occurrences that will be recomputed
        let alpha_l = alpha(l);
        let p = edit.pos();
        let mut sync_old: Vec<(Vec<(usize, usize)>, Vec<u64>)> = Vec::new();
        for sl in lv.sync.iter_mut() {
            let tau = sl.tau;
            let mut ranges = vec![
                (a.saturating_sub(alpha_l + 1), b.saturating_sub(alpha_l) + 1),
                (p.saturating_sub(tau + 1), p + 1),
                (new_len.saturating_sub(tau + 2), new_len),
            ];
            ranges.sort();
            let mut merged: Vec<(usize, usize)> = Vec::new();
            for (lo, hi) in ranges {
                let lo = lo.max(1);
                if lo > hi {
                    continue;
                }
                match merged.last_mut() {
                    Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                    _ => merged.push((lo, hi)),
                }
            }
            let mut drop = Vec::new();
            let mut names = Vec::new();
            for &(lo, hi) in &merged {
                let lo_old = back(lo).saturating_sub(1).max(1);
                let hi_old = back(hi) + 1;
                for (x, g) in marks_in(&sl.b, lo_old, hi_old) {
                    let keep_out = match edit.forward(x) {
                        None => false,
                        Some(y) => !(lo <= y && y <= hi),
                    };
                    if !keep_out && !drop.contains(&x) {
                        drop.push(x);
                        names.push(g);
                    }
                }
            }
            sl.b.unmark(&drop).unwrap();
            edit.apply(&mut sl.b).unwrap();
            sync_old.push((merged, names));
        }

        edit.apply(&mut lv.s).unwrap();
        let keys: Vec<Key> = new.iter().map(|&(st, len)| to_key(lv.s.substr(st, len).unwrap())).collect();
        let names = chunked_add(&mut lv.reg, &keys).expect("level registry has room");
        let stale: Vec<usize> = marks_in(&lv.s, a, b.saturating_sub(1)).into_iter().map(|x| x.0).collect();
        lv.s.unmark(&stale).unwrap();
        let marks: Vec<(usize, u64)> = new.iter().zip(&names).map(|(&(st, _), &g)| (st, g)).collect();
        lv.s.mark(&marks).unwrap();

        // factor-name string
        for _ in oa..=ob {
            lv.d.delete(oa).unwrap();
        }
        for (x, &g) in names.iter().enumerate() {
            lv.d.insert(oa + x, g as u32).unwrap();
        }
        let dlen = lv.d.len();
        let lo = oa.saturating_sub(1).max(1);
        let hi = (oa + names.len()).min(dlen);
        for x in lo..=hi {
            if x > dlen {
                break;
            }
            let want = x == 1 || lv.d.char(x).unwrap() != lv.d.char(x - 1).unwrap();
            let has = lv.d.mark_at(x).is_some();
            if want && !has {
                lv.d.mark(&[(x, lv.d.char(x).unwrap() as u64)]).unwrap();
            } else if !want && has {
                lv.d.unmark(&[x]).unwrap();
            }
        }
        let old_names: Vec<u64> = old.iter().map(|o| o.2).collect();
        chunked_sub(&mut lv.reg, &old_names).unwrap();

        // synchronizing sets: recompute the dropped ranges
        let starts_s = &lv.s;
        for (sl, (ranges, old_names)) in lv.sync.iter_mut().zip(sync_old) {
            let tau = sl.tau;
            let top = new_len.saturating_sub(tau);
            let mut occ: Vec<usize> = Vec::new();
            for (lo, hi) in ranges {
                let hi = hi.min(top);
                if lo > hi {
                    continue;
                }
                for (st, _) in marks_in(starts_s, lo + alpha_l, hi + alpha_l) {
                    occ.push(st - alpha_l);
                }
            }
            let keys: Vec<Key> = occ.iter().map(|&i| to_key(sl.b.substr(i, tau).unwrap())).collect();
            let names = chunked_add(&mut sl.reg, &keys).expect("sync registry has room");
            let marks: Vec<(usize, u64)> = occ.iter().copied().zip(names).collect();
            sl.b.mark(&marks).unwrap();
            chunked_sub(&mut sl.reg, &old_names).unwrap();
        }

        // changed span
        let fwd_b = |x: usize| match edit {
            Edit::Insert { pos, .. } => if x > pos { x + 1 } else { x },
            Edit::Delete { pos } => if x > pos { x - 1 } else { x },
        };
        let mut before: Vec<(usize, usize, u64)> = old
            .iter()
            .map(|&(st, len, g)| {
                let s2 = fwd_b(st);
                let e2 = if st + len == old_len + 1 { new_len + 1 } else { fwd_b(st + len) };
                (s2, e2.saturating_sub(s2), g)
            })
            .collect();
        let mut after: Vec<(usize, usize, u64)> = new.iter().zip(&names).map(|(&(st, len), &g)| (st, len, g)).collect();
        before.sort();
        after.sort();
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for x in before.iter().filter(|x| after.binary_search(x).is_err()).chain(after.iter().filter(|x| before.binary_search(x).is_err())) {
            lo = lo.min(x.0);
            hi = hi.max(x.0 + x.1.max(1) - 1);
        }
        if new_len == 0 {
            return None;
        }
        let pc = p.min(new_len);
        lo = lo.min(pc.saturating_sub(1).max(1));
        hi = hi.max(pc);
        Some((lo.max(1), hi.min(new_len)))
    }

    /// Factor starts of level `l` computed from scratch from the level below.
    pub fn global_factors(&self, l: u32) -> Vec<(usize, usize)> {
        let len = self.below_len(l - 1);
        if len == 0 {
            return Vec::new();
        }
        if len < (1usize << (l + 1)) {
            return vec![(1, len)];
        }
        let items = prepare_runs(&self.all_runs(l - 1), l, self.below_domain(l - 1));
        let codes: Vec<i64> = items.iter().map(|it| it.code).collect();
        let bits = choose_merges(&MergeInput::new(codes, coin_domain(l, self.below_domain(l - 1)))).unwrap();
        groups(&items, &factor_flags(&items, &bits, l)).into_iter().map(|g| (g.0, g.1)).collect()
    }

    /// Prepared items of level `l` over the whole level below.
    pub fn prepared(&self, l: u32) -> Vec<PreparedItem> {
        prepare_runs(&self.all_runs(l - 1), l, self.below_domain(l - 1))
    }

    fn clamp_range(&self, l: u32, i: usize, before: usize, after: usize) -> Result<(usize, usize)> {
        let lv = &self.levels[l as usize - 1];
        crate::error::check_range(i, lv.s.len())?;
        let j = lv.s.rank(i);
        let f = lv.s.mark_count();
        Ok((j.saturating_sub(before).max(1), (j + after).min(f)))
    }

    /// Factor ordinals an edit at `i` can change on the next level up.
    pub fn affected_range(&self, l: u32, i: usize) -> Result<(usize, usize)> {
        let ls = self.lstar_n as usize;
        self.clamp_range(l, i, ls + 9, 5)
    }

    /// Factor ordinals needed to recompute the affected range.
    pub fn relevant_range(&self, l: u32, i: usize) -> Result<(usize, usize)> {
        let ls = self.lstar_n as usize;
        self.clamp_range(l, i, ls + 14, ls + 14)
    }

    /// Checks the settled structure: tiling, names, agreement with a global
    /// recompute, factor sizes, and every synchronizing set against its
    /// definition.
    pub fn validate(&self) -> ViolationReport {
        let mut out = Vec::new();
        let v = |property, location, details: String| Violation { property, location, details };
        if !self.is_settled() {
            out.push(v(Property::Tiling, 0, "hierarchy not settled".into()));
            return out;
        }
        let s = self.to_vec();
        for (li, lv) in self.levels.iter().enumerate() {
            let l = li as u32 + 1;
            if lv.s.to_vec() != s {
                out.push(v(Property::Tiling, 0, format!("level {l} string differs from the current string")));
                continue;
            }
            let facs = self.factors(l);
            let starts: Vec<usize> = facs.iter().map(|f| f.0).collect();
            for &(st, len, g) in &facs {
                if lv.reg.name_of(&to_key(s[st - 1..st - 1 + len].to_vec())) != Some(g) {
                    out.push(v(Property::Names, st, format!("level {l} factor name {g} does not match its content")));
                }
            }
            let dn: Vec<u64> = lv.d.to_vec().into_iter().map(u64::from).collect();
            if dn != facs.iter().map(|f| f.2).collect::<Vec<_>>() {
                out.push(v(Property::Tiling, 0, format!("level {l} name string out of sync")));
            }
            let runs: Vec<usize> = lv.d.marks().iter().map(|m| m.0).collect();
            let want: Vec<usize> = (1..=dn.len()).filter(|&x| x == 1 || dn[x - 1] != dn[x - 2]).collect();
            if runs != want {
                out.push(v(Property::Tiling, 0, format!("level {l} run marks wrong")));
            }
            let global: Vec<usize> = self.global_factors(l).iter().map(|f| f.0).collect();
            if global != starts {
                let at = global.iter().zip(&starts).position(|(x, y)| x != y).unwrap_or(global.len().min(starts.len()));
                out.push(v(Property::Tiling, at, format!("level {l} differs from a global recompute")));
            }
            if s.len() >= (1usize << (l + 1)) {
                for mut x in oracles::check_decomposition(&s, l, &starts) {
                    x.details = format!("level {l}: {}", x.details);
                    out.push(x);
                }
            }
            for e in lv.reg.audit() {
                out.push(v(Property::Names, 0, format!("level {l} registry: {e}")));
            }
            for sl in &lv.sync {
                let marks = sl.b.marks();
                let a = alpha(l);
                let want: Vec<usize> = starts
                    .iter()
                    .filter(|&&p| p > a && p - a + sl.tau <= s.len())
                    .map(|&p| p - a)
                    .collect();
                if marks.iter().map(|m| m.0).collect::<Vec<_>>() != want {
                    out.push(v(Property::Tiling, 0, format!("tau {} occurrences differ from shifted factor starts", sl.tau)));
                }
                for &(i, g) in &marks {
                    if sl.reg.name_of(&to_key(s[i - 1..i - 1 + sl.tau].to_vec())) != Some(g) {
                        out.push(v(Property::Names, i, format!("tau {} name {g} does not match", sl.tau)));
                    }
                }
                for mut x in oracles::check_sync_set(&s, sl.tau, &marks, sparseness_bound(sl.tau, l)) {
                    x.details = format!("tau {}: {}", sl.tau, x.details);
                    out.push(x);
                }
                for e in sl.reg.audit() {
                    out.push(v(Property::Names, 0, format!("tau {} registry: {e}", sl.tau)));
                }
            }
        }
        out
    }

    /// Per level `(start, len, name)` lines, then per `τ` the occurrences.
    pub fn snapshot_dump(&self) -> String {
        let mut out = String::new();
        for l in 1..=self.big_l {
            let _ = writeln!(out, "level {l} version {}", self.level_version(l));
            for (st, len, g) in self.factors(l) {
                let _ = writeln!(out, "  factor {st} {len} {g}");
            }
        }
        for (tau, l) in self.sync_taus() {
            let _ = writeln!(out, "tau {tau} level {l}");
            for (i, g) in self.sync_set(tau).unwrap() {
                let _ = writeln!(out, "  occ {i} {g}");
            }
        }
        out
    }

    /// Corrupts one synchronizing-set name; for fault-injection tests.
    #[doc(hidden)]
    pub fn corrupt_sync_name(&mut self, tau: usize) -> bool {
        for lv in self.levels.iter_mut() {
            for sl in lv.sync.iter_mut() {
                if sl.tau == tau {
                    if let Some((i, g)) = sl.b.marks().first().copied() {
                        sl.b.mark(&[(i, g + 1)]).unwrap();
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Position of the current character `x` in the string of every level,
    /// for a character that is not a recent insertion. Counts the recent
    /// insertions before `x` and the recent deletions of older characters
    /// at or before it.
    pub(crate) fn level_positions(&self, x: usize) -> Vec<usize> {
        let big_l = self.big_l as usize;
        // shift[l]: change in position for levels whose version is below k
        let mut shift = vec![0i64; big_l + 2];
        for f in &self.pending {
            let d = match f.entry {
                RecordKind::Inserted(p) if p < x => -1,
                RecordKind::Gap(g) if g <= x => 1,
                _ => continue,
            };
            for (li, lv) in self.levels.iter().enumerate() {
                if lv.version >= f.k {
                    continue;
                }
                // a deleted character only counts if the level has it
                if d == 1 && f.born.is_some_and(|b| b > lv.version) {
                    continue;
                }
                shift[li] += d;
            }
        }
        (0..big_l).map(|li| (x as i64 + shift[li]) as usize).collect()
    }

    /// Position of current index `x` in the string of a level, or `None` if
    /// the character arrived after the level's version.
    pub fn to_level(&self, level: u32, x: usize) -> Option<usize> {
        let v = self.levels[level as usize - 1].version;
        let mut y = x;
        for f in self.pending.iter().rev() {
            if f.k <= v {
                break;
            }
            y = f.edit.backward(y)?;
        }
        Some(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SAMPLE: &str = "ababcaabbabcaabbabcb";

    fn sym(s: &str) -> Vec<u32> {
        s.bytes().map(u32::from).collect()
    }

    #[test]
    fn init_parameters() {
        let h = Hierarchy::new(16, 0.5).unwrap();
        assert_eq!((h.level_count(), h.actions_per_level()), (4, 3));
        let h = Hierarchy::new(1 << 16, 0.25).unwrap();
        assert_eq!(h.pipeline_depth(), 64);
        assert!(Hierarchy::new(1, 0.5).is_err());
        assert!(Hierarchy::new(8, 0.0).is_err());
    }

    #[test]
    fn context_sizes() {
        assert_eq!((alpha(1), beta(1, 5)), (15, 42));
    }

    #[test]
    fn first_edit() {
        let mut h = Hierarchy::new(64, 0.5).unwrap();
        h.insert(1, 'a' as u32).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.record().len(), 1);
        assert_eq!(h.record()[0].age, 0);
        assert_eq!(h.in_flight(), 1);
        h.settle();
        h.settle();
        assert!(h.validate().is_empty());
    }

    #[test]
    fn sample_string_validates() {
        let h = Hierarchy::from_symbols(64, 0.5, &sym(SAMPLE)).unwrap();
        let v = h.validate();
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn corrupted_name_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s: Vec<u32> = (0..400).map(|_| rng.gen_range(1..4)).collect();
        let mut h = Hierarchy::from_symbols(512, 0.5, &s).unwrap();
        assert!(h.corrupt_sync_name(64));
        assert!(h.validate().iter().any(|x| x.property == Property::Names));
    }

    #[test]
    fn affected_range_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s: Vec<u32> = (0..200).map(|_| rng.gen_range(1..3)).collect();
        let h = Hierarchy::from_symbols(256, 0.5, &s).unwrap();
        let ls = h.lstar_n() as usize;
        let f = h.factors(1);
        let st = f[29].0;
        assert_eq!(h.affected_range(1, st).unwrap(), (30 - ls - 9, 35));
        assert_eq!(h.relevant_range(1, st).unwrap(), (30 - ls - 14, (30 + ls + 14).min(f.len())));
        assert_eq!(h.affected_range(1, f[2].0).unwrap(), (1, 8));
        assert!(h.affected_range(1, 0).is_err());
    }

    #[test]
    fn random_edits_match_global_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for round in 0..6 {
            let mut h = Hierarchy::new(300, 0.5).unwrap();
            let sigma = [2, 3, 26][round % 3];
            for step in 0..400 {
                let len = h.len();
                if len < 250 && (len == 0 || rng.gen_bool(0.6)) {
                    let pos = rng.gen_range(1..=len + 1);
                    h.insert(pos, rng.gen_range(1..=sigma)).unwrap();
                } else {
                    h.delete(rng.gen_range(1..=len)).unwrap();
                }
                if step % 97 == 0 {
                    h.settle();
                    let v = h.validate();
                    assert!(v.is_empty(), "round {round} step {step}: {:?}", &v[..v.len().min(5)]);
                }
            }
            h.settle();
            assert_eq!(h.locality_faults(), 0);
        }
    }

    #[test]
    fn delay_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut h = Hierarchy::new(128, 0.5).unwrap();
        let mut hist: Vec<Vec<u32>> = vec![Vec::new()];
        for _ in 0..300 {
            let len = h.len();
            if len < 100 && (len == 0 || rng.gen_bool(0.6)) {
                h.insert(rng.gen_range(1..=len + 1), rng.gen_range(1..4)).unwrap();
            } else {
                h.delete(rng.gen_range(1..=len)).unwrap();
            }
            hist.push(h.to_vec());
            let k = h.updates() as usize;
            for l in 1..=h.level_count() {
                let delay = (l * h.actions_per_level()) as usize;
                let want = k.saturating_sub(delay);
                assert_eq!(h.level_version(l) as usize, want);
                assert_eq!(h.level_string(l), hist[want]);
            }
            assert!(h.record().len() <= h.pipeline_depth() as usize);
            let fresh: Vec<usize> =
                h.record().iter().filter_map(|e| if let RecordKind::Inserted(x) = e.kind { Some(x) } else { None }).collect();
            for x in (1..=h.len()).filter(|x| !fresh.contains(x)) {
                let fast = h.level_positions(x);
                for l in 1..=h.level_count() {
                    assert_eq!(Some(fast[l as usize - 1]), h.to_level(l, x), "x {x} level {l}");
                }
            }
        }
    }
}
