//! Preparation of a level: turns a window of the level below, given as runs
//! of equal factors, into the item sequence that merge selection runs on.
//!
//! Three passes: short factors (below `2^{ℓ−1}`) merge into a neighbor, runs
//! of identical items merge into one, and items longer than `2^ℓ` are
//! deactivated. Every item gets a coin value: its lower-level name for an
//! unmerged factor, a pair code for a merged pair, or `−1`.

use crate::primitives::round;

/// A maximal run of identical factors of the level below.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    /// String position of the first factor.
    pub start: usize,
    /// Length of each factor in the run.
    pub flen: usize,
    pub count: usize,
    /// Name of the factor (1-based).
    pub name: u64,
}

/// One entry of a prepared window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreparedItem {
    pub start: usize,
    pub len: usize,
    /// Value in `[−1, N−1]` handed to merge selection.
    pub code: i64,
    /// Indices of the first and last run this item draws factors from.
    pub first_run: usize,
    pub last_run: usize,
}

#[derive(Debug, Clone, Copy)]
struct Unit {
    start: usize,
    len: usize,
    nf: usize,
    name: u64,
    run: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ident {
    Single(u64),
    Pair(u64, u64),
    Dead,
}

/// Coin-value domain `N` for level `level` when the level below names its
/// factors within `[1, n0]`.
pub fn coin_domain(level: u32, n0: u64) -> u64 {
    if level == 1 {
        2 * n0
    } else {
        n0 + n0 * n0
    }
}

fn pair_code(level: u32, n0: u64, a: u64, b: u64) -> i64 {
    if level == 1 {
        // only runs of two equal characters pair up on the first level
        debug_assert_eq!(a, b);
        (n0 + a - 1) as i64
    } else {
        (n0 + (a - 1) * n0 + (b - 1)) as i64
    }
}

/// Prepares `runs` for level `level`. `n0` bounds the names of the level below.
pub fn prepare_runs(runs: &[Run], level: u32, n0: u64) -> Vec<PreparedItem> {
    let short_len = 1usize << (level - 1);
    let cap_merge = 1usize << (level + 1);
    let active_max = 1usize << level;

    let mut units: Vec<Unit> = Vec::with_capacity(runs.len() * 2);
    for (r, run) in runs.iter().enumerate() {
        let u = |start: usize, nf: usize| Unit { start, len: nf * run.flen, nf, name: run.name, run: r };
        match run.count {
            0 => {}
            1 => units.push(u(run.start, 1)),
            2 => {
                units.push(u(run.start, 1));
                units.push(u(run.start + run.flen, 1));
            }
            c => {
                units.push(u(run.start, 1));
                units.push(u(run.start + run.flen, c - 2));
                units.push(u(run.start + (c - 1) * run.flen, 1));
            }
        }
    }
    round(units.len() as u64);
    let m = units.len();
    let short = |t: usize| units[t].nf == 1 && units[t].len < short_len;

    // group[t]: index of the unit that starts t's merge group
    let mut group: Vec<usize> = (0..m).collect();
    let mut merged_a = vec![false; m];
    for t in 1..m {
        if short(t) && !short(t - 1) && units[t - 1].nf == 1 && units[t - 1].len + units[t].len <= cap_merge {
            group[t] = t - 1;
            merged_a[t] = true;
        }
    }
    round(m as u64);
    for t in 0..m.saturating_sub(1) {
        if short(t) && !merged_a[t] && !short(t + 1) {
            // the right neighbor is a single factor or the head of a pair
            let pair = t + 2 < m && group[t + 2] == t + 1;
            let right = units[t + 1].len + if pair { units[t + 2].len } else { 0 };
            if units[t].len + right <= cap_merge {
                group[t + 1] = t;
                if pair {
                    group[t + 2] = t;
                }
            }
        }
    }

    // collapse groups into items
    let mut items: Vec<(PreparedItem, Ident, usize)> = Vec::new();
    let mut t = 0;
    while t < m {
        let mut e = t + 1;
        while e < m && group[e] == t {
            e += 1;
        }
        let len: usize = units[t..e].iter().map(|u| u.len).sum();
        let ident = match e - t {
            1 => Ident::Single(units[t].name),
            2 => Ident::Pair(units[t].name, units[t + 1].name),
            _ => Ident::Dead,
        };
        let nf: usize = units[t..e].iter().map(|u| u.nf).sum();
        items.push((
            PreparedItem { start: units[t].start, len, code: 0, first_run: units[t].run, last_run: units[e - 1].run },
            ident,
            nf,
        ));
        t = e;
    }
    round(items.len() as u64);

    // merge adjacent identical items, then deactivate long ones
    let mut out: Vec<PreparedItem> = Vec::with_capacity(items.len());
    let mut q = 0;
    while q < items.len() {
        let (first, ident, _) = items[q];
        let mut e = q + 1;
        while ident != Ident::Dead && e < items.len() && items[e].1 == ident {
            e += 1;
        }
        let len: usize = items[q..e].iter().map(|x| x.0.len).sum();
        let nf: usize = items[q..e].iter().map(|x| x.2).sum();
        let code = match (e - q, ident) {
            (_, Ident::Dead) => -1,
            (1, Ident::Single(a)) if nf == 1 => (a - 1) as i64,
            (_, Ident::Single(a)) if nf == 2 => pair_code(level, n0, a, a),
            (1, Ident::Pair(a, b)) => pair_code(level, n0, a, b),
            _ => -1,
        };
        let code = if len > active_max { -1 } else { code };
        out.push(PreparedItem { start: first.start, len, code, first_run: first.first_run, last_run: items[e - 1].0.last_run });
        q = e;
    }
    out
}

/// Factor-start flags for `level` from the merge bits.
///
/// Groups from the bits can exceed `2^{ℓ+1}` when they hold three or four
/// active items, and a lone active item between deactivated ones can be too
/// short for its neighbors. Long groups of four split into two pairs, long
/// groups of three into a single and a pair. A single then joins its left
/// neighbor when both together stay below `2^{ℓ+1}`; a lone active item that
/// cannot do so joins its right neighbor under the same condition, unless
/// that neighbor already takes in the item after it.
pub fn factor_flags(items: &[PreparedItem], bits: &[u8], level: u32) -> Vec<u8> {
    let w = items.len();
    let cap = 1usize << (level + 1);
    round(w as u64);
    let mut flags = bits.to_vec();
    if w > 0 {
        flags[0] = 1;
    }
    let active = |q: usize| items[q].code != -1;
    let mut weak = vec![false; w];
    let mut lone = vec![false; w];
    let mut q = 0;
    while q < w {
        let mut e = q + 1;
        while e < w && flags[e] == 0 {
            e += 1;
        }
        if active(q) {
            let total: usize = items[q..e].iter().map(|it| it.len).sum();
            match e - q {
                4 if total > cap => flags[q + 2] = 1,
                3 if total > cap => {
                    flags[q + 1] = 1;
                    weak[q] = true;
                }
                1 => {
                    weak[q] = true;
                    lone[q] = true;
                }
                _ => {}
            }
        }
        q = e;
    }
    // block lengths after the splits, indexed by their first item
    let mut block_len = vec![0usize; w];
    let mut block_of = vec![0usize; w];
    let mut cur = 0;
    for q in 0..w {
        if flags[q] == 1 {
            cur = q;
        }
        block_of[q] = cur;
        block_len[cur] += items[q].len;
    }
    round(w as u64);
    let joins_left = |q: usize| weak[q] && q > 0 && items[q].len + block_len[block_of[q - 1]] < cap;
    let mut out = flags.clone();
    for q in 0..w {
        if joins_left(q) {
            out[q] = 0;
        } else if lone[q] && q + 1 < w && items[q].len + block_len[q + 1] < cap && !(q + 2 < w && joins_left(q + 2)) {
            out[q + 1] = 0;
        }
    }
    out
}

/// Problems with a prepared sequence: long items that stay active, short
/// active items next to an active neighbor, equal adjacent active codes.
pub fn check_prepared(items: &[PreparedItem], level: u32) -> Vec<(usize, &'static str)> {
    let short_len = 1usize << (level - 1);
    let active_max = 1usize << level;
    let mut out = Vec::new();
    for (q, it) in items.iter().enumerate() {
        if it.len > active_max && it.code != -1 {
            out.push((q, "long item stays active"));
        }
        if it.code != -1 && it.len < short_len {
            let act = |x: Option<&PreparedItem>| x.is_some_and(|y| y.code != -1);
            if act(q.checked_sub(1).and_then(|p| items.get(p))) && act(items.get(q + 1)) {
                out.push((q, "short item between active neighbors"));
            }
        }
        if q > 0 && it.code != -1 && items[q - 1].code == it.code {
            out.push((q, "equal adjacent codes"));
        }
    }
    out
}
