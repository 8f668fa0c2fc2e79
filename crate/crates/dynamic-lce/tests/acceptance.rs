//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! Criteria 1 to 10 are exact and fail the test when violated. Criterion 11
//! is a soft scaling report and only prints.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::Mutex;

use dynamic_lce::coin_flip::{check_merge_bits, choose_merges, locality_window, MergeInput};
use dynamic_lce::dyck::{D1Tree, Paren, Side, StringEquality};
use dynamic_lce::hierarchy::{sparseness_bound, SPARSENESS_C};
use dynamic_lce::oracles::{naive_dyck1, naive_erase_equal, naive_square_free, naive_squares, Property};
use dynamic_lce::squares::SquareFree;
use dynamic_lce::trace::{bench, random_lce_trace, replay_commands, Command, Config, Generator, Session};
use dynamic_lce::{Edit, Hierarchy, Mode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    id: u32,
    pass: bool,
    soft: bool,
    detail: String,
}

fn outcome(id: u32, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, soft: false, detail }
}

/// Criteria 1 and 7 share the traces: oracle answers, delay schedule and
/// record size are checked after every command.
fn lce_traces() -> (Outcome, Outcome) {
    let mut mismatches = 0;
    let mut errors = 0;
    let mut schedule = 0;
    let mut record = 0;
    let mut queries = 0;
    let mut max_record = 0;
    for (t, n) in [64usize, 256, 1024].into_iter().enumerate() {
        let cmds = random_lce_trace(n, 10_000, 100 + t as u64);
        let cfg = Config { n, epsilon: 0.5, mode: Mode::Pipelined, crosscheck: true };
        let mut sess = Session::new(cfg).unwrap();
        let h = sess.hierarchy();
        let (big_l, per) = (h.level_count(), h.actions_per_level());
        let keep = (big_l * per) as usize + 1;
        let mut hist: VecDeque<Vec<u32>> = VecDeque::from([vec![]]);
        for cmd in cmds {
            match sess.execute(cmd) {
                Ok(Some((got, Some(want)))) => {
                    queries += 1;
                    mismatches += (got != want) as usize;
                }
                Ok(_) => {}
                Err(_) => errors += 1,
            }
            let h = sess.hierarchy();
            if matches!(cmd, Command::Insert(..) | Command::Delete(..)) {
                hist.push_back(h.to_vec());
                if hist.len() > keep {
                    hist.pop_front();
                }
            }
            let k = h.updates() as usize;
            for l in 1..=big_l {
                let want = k.saturating_sub((l * per) as usize);
                let back = k - want;
                let ok = h.level_version(l) as usize == want
                    && back < hist.len()
                    && h.level_string(l) == hist[hist.len() - 1 - back];
                schedule += !ok as usize;
            }
            let r = h.record().len();
            max_record = max_record.max(r);
            record += (r > (big_l * per) as usize) as usize;
        }
    }
    (
        outcome(
            1,
            mismatches == 0 && errors == 0,
            format!("{queries} queries over n=64,256,1024: {mismatches} mismatches, {errors} errors"),
        ),
        outcome(
            7,
            schedule == 0 && record == 0,
            format!("{schedule} delayed-string mismatches, {record} record overflows, largest record {max_record}"),
        ),
    )
}

fn muddling() -> Outcome {
    let mut differ = 0;
    let mut lines = 0;
    for seed in 0..1000u64 {
        let n = [32, 64, 128][seed as usize % 3];
        let cmds: Vec<(usize, Command)> =
            random_lce_trace(n, 120, 5000 + seed).into_iter().enumerate().map(|(k, c)| (k + 1, c)).collect();
        let cfg = Config { n, epsilon: 0.5, mode: Mode::Pipelined, crosscheck: false };
        let a = replay_commands(&cmds, cfg).unwrap();
        let b = replay_commands(&cmds, Config { mode: Mode::Eager, ..cfg }).unwrap();
        lines += a.len();
        differ += (a != b) as usize;
    }
    outcome(2, differ == 0, format!("1000 traces, {lines} answers, {differ} traces differ"))
}

fn random_settled(rng: &mut ChaCha8Rng) -> Hierarchy {
    let target = rng.gen_range(1..=512usize);
    let sigma = [2u32, 3, 4, 26][rng.gen_range(0..4)];
    let period = rng.gen_range(1..=9usize);
    let periodic = rng.gen_bool(0.3);
    let mut h = Hierarchy::new(512, 0.5).unwrap();
    while h.len() < target {
        let len = h.len();
        let pos = rng.gen_range(1..=len + 1);
        let c = if periodic && pos > period && rng.gen_bool(0.95) {
            h.char_at(pos - period).unwrap()
        } else {
            rng.gen_range(1..=sigma)
        };
        h.insert(pos, c).unwrap();
        if len > 4 && rng.gen_bool(0.1) {
            h.delete(rng.gen_range(1..=h.len())).unwrap();
        }
    }
    h.settle();
    h
}

/// Criteria 3 and 4 over one corpus.
fn validator() -> (Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut sync_bad = vec![];
    let mut sparse_bad = 0;
    let mut size_bad = 0;
    let mut levels = 0;
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let h = random_settled(&mut rng);
        levels += h.level_count();
        for v in h.validate() {
            match v.property {
                Property::FactorSize => size_bad += 1,
                Property::Sparseness => sparse_bad += 1,
                _ => sync_bad.push(v.to_string()),
            }
        }
        let s = h.to_vec();
        for (tau, l) in h.sync_taus() {
            let occ: Vec<usize> = h.sync_set(tau).unwrap().iter().map(|o| o.0).collect();
            let r = dynamic_lce::oracles::sparseness_ratio(s.len(), tau, &occ);
            worst = worst.max(r / sparseness_bound(tau, l));
        }
    }
    let first = sync_bad.first().map(|v| format!(" (first: {v})")).unwrap_or_default();
    (
        outcome(
            3,
            sync_bad.is_empty() && sparse_bad == 0,
            format!(
                "200 hierarchies: {} consistency/density/names/tiling violations{first}, {sparse_bad} sparseness violations at C={SPARSENESS_C}, worst ratio/bound {worst:.2}",
                sync_bad.len()
            ),
        ),
        outcome(4, size_bad == 0, format!("{levels} settled levels, {size_bad} factor-size violations")),
    )
}

fn coin_input(rng: &mut ChaCha8Rng, len: usize, domain: u64, deact: f64) -> MergeInput {
    let mut v: Vec<i64> = Vec::with_capacity(len);
    while v.len() < len {
        if rng.gen_bool(deact) {
            v.push(-1);
            continue;
        }
        let x = rng.gen_range(0..domain) as i64;
        if v.last() != Some(&x) {
            v.push(x);
        }
    }
    MergeInput::new(v, domain)
}

fn coin_flip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let density = [0.0, 0.02, 0.1, 0.25, 0.5, 0.9];
    let mut structural = 0;
    for t in 0..10_000 {
        let (len, domain) = (rng.gen_range(1..=256), rng.gen_range(2..1_000_000));
        let inp = coin_input(&mut rng, len, domain, density[t % density.len()]);
        let bits = choose_merges(&inp).unwrap();
        structural += check_merge_bits(&inp.names, &bits).len();
    }
    let mut local = 0;
    for t in 0..1000 {
        let domain = rng.gen_range(3..1_000_000);
        let len = rng.gen_range(2..=256);
        let inp = coin_input(&mut rng, len, domain, density[t % density.len()]);
        let n = inp.names.len();
        let base = choose_merges(&inp).unwrap();
        let j = rng.gen_range(0..n);
        let mut pert = inp.clone();
        loop {
            let x = if rng.gen_bool(0.2) { -1 } else { rng.gen_range(0..domain) as i64 };
            if x == -1 || ((j == 0 || pert.names[j - 1] != x) && (j + 1 == n || pert.names[j + 1] != x)) {
                pert.names[j] = x;
                break;
            }
        }
        let after = choose_merges(&pert).unwrap();
        for i in 0..n {
            let (lo, hi) = locality_window(i + 1, domain);
            let jj = j as i64 + 1;
            let blocked = (i.min(j) + 1..i.max(j)).any(|k| inp.names[k] == -1);
            if (jj < lo || jj > hi || blocked) && base[i] != after[i] {
                local += 1;
            }
        }
    }
    outcome(
        5,
        structural == 0 && local == 0,
        format!("10^4 inputs: {structural} property violations; 10^3 perturbations: {local} bits changed outside their window"),
    )
}

/// Span `[lo, hi]` of positions covered by units `a..=b` of a tiling given by
/// its starts.
fn unit_span(starts: &[usize], len: usize, a: usize, b: usize) -> (usize, usize) {
    let end = starts.get(b).map_or(len, |&x| x - 1);
    (starts[a - 1], end)
}

fn unit_of(starts: &[usize], x: usize) -> usize {
    starts.partition_point(|&s| s <= x)
}

fn locality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut outside = 0;
    let mut changed = 0;
    let mut first = String::new();
    let mut h = random_settled(&mut rng);
    for trial in 0..1000 {
        if trial % 50 == 49 {
            h = random_settled(&mut rng);
        }
        let old_len = h.len();
        let big_l = h.level_count();
        let old: Vec<Vec<usize>> =
            (1..=big_l).map(|l| h.factors(l).iter().map(|f| f.0).collect()).collect();
        let edit = if old_len < 8 || (old_len < 500 && rng.gen_bool(0.5)) {
            let pos = rng.gen_range(1..=old_len + 1);
            let c = if old_len > 0 && rng.gen_bool(0.5) {
                h.char_at(rng.gen_range(1..=old_len)).unwrap()
            } else {
                rng.gen_range(1..=4)
            };
            Edit::Insert { pos, ch: c }
        } else {
            Edit::Delete { pos: rng.gen_range(1..=old_len) }
        };
        h.apply(edit).unwrap();
        h.settle();
        let len = h.len();
        if len == 0 {
            continue;
        }
        let s = h.to_vec();
        let p = edit.pos().min(len);
        // level 0 units are runs of equal characters
        let runs: Vec<usize> = (1..=len).filter(|&x| x == 1 || s[x - 1] != s[x - 2]).collect();
        let ls = h.lstar_n() as usize;
        let (mut a, mut b) = (p.saturating_sub(1).max(1), p);
        for l in 1..=big_l {
            let (lo, hi) = if l == 1 {
                let (ua, ub) = (unit_of(&runs, a), unit_of(&runs, b));
                unit_span(&runs, len, ua.saturating_sub(ls + 9).max(1), (ub + 5).min(runs.len()))
            } else {
                let below: Vec<usize> = h.factors(l - 1).iter().map(|f| f.0).collect();
                let fa = h.affected_range(l - 1, a).unwrap().0;
                let fb = h.affected_range(l - 1, b).unwrap().1;
                unit_span(&below, len, fa, fb)
            };
            let new: Vec<usize> = h.factors(l).iter().map(|f| f.0).collect();
            let moved: Vec<usize> = old[l as usize - 1].iter().filter_map(|&x| edit.forward(x)).collect();
            let diff: Vec<usize> = new
                .iter()
                .filter(|x| moved.binary_search(x).is_err())
                .chain(moved.iter().filter(|x| new.binary_search(x).is_err()))
                .copied()
                .collect();
            // a boundary right after the span is still inside it
            for &x in &diff {
                changed += 1;
                if x < lo || x > hi + 1 {
                    outside += 1;
                    if first.is_empty() {
                        first = format!(" (first: level {l} start {x} outside [{lo}, {}] after {edit:?})", hi + 1);
                    }
                }
            }
            if let (Some(&x), Some(&y)) = (diff.iter().min(), diff.iter().max()) {
                a = a.min(x);
                b = b.max(y.min(len));
            }
        }
    }
    outcome(6, outside == 0, format!("1000 edits, {changed} changed boundaries, {outside} outside the affected range{first}"))
}

fn dyck() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let n = 64;
    let mut t = D1Tree::new(n).unwrap();
    let (mut wrong, mut stale, mut members) = (0, 0, 0);
    for _ in 0..10_000 {
        let i = rng.gen_range(1..=n);
        let void = t.get(i).unwrap() == Paren::Void;
        match rng.gen_range(0..10) {
            // an opening bracket with a closing one somewhere after it
            0..=2 if void => {
                if let Some(j) = (i + 1..=n).find(|&j| t.get(j).unwrap() == Paren::Void) {
                    t.set(i, Paren::Open).unwrap();
                    t.set(j, Paren::Close).unwrap();
                }
            }
            3..=4 if void => {
                let p = if rng.gen_bool(0.5) { Paren::Open } else { Paren::Close };
                t.set(i, p).unwrap();
            }
            _ => t.reset(i).unwrap(),
        }
        let m = t.member();
        members += m as usize;
        wrong += (m != naive_dyck1(&t.to_string())) as usize;
        stale += t.recompute_mismatches().len();
    }
    outcome(
        8,
        wrong == 0 && stale == 0,
        format!("10^4 operations, {members} member states: {wrong} wrong answers, {stale} stale nodes"),
    )
}

/// Position of the `r`-th non-void symbol (1-based) of a side.
fn nth_symbol(side: &[u32], r: usize) -> Option<usize> {
    side.iter().enumerate().filter(|(_, &c)| c != 0).nth(r - 1).map(|(k, _)| k + 1)
}

fn string_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    let n = 40;
    let mut se = StringEquality::new(n, 0.5).unwrap();
    let (mut wrong, mut equal, mut ops) = (0, 0, 0);
    let mut check = |se: &StringEquality, ops: &mut usize| {
        *ops += 1;
        let want = naive_erase_equal(se.side(Side::First), se.side(Side::Second));
        equal += want as usize;
        wrong += (se.equal() != want) as usize;
    };
    while ops < 10_000 {
        let r = rng.gen_range(0..100);
        if r < 8 {
            let side = if rng.gen_bool(0.5) { Side::First } else { Side::Second };
            let i = rng.gen_range(1..=n);
            if se.side(side)[i - 1] == 0 {
                se.set(side, i, rng.gen_range(1..=3)).unwrap();
            } else {
                se.reset(side, i).unwrap();
            }
            check(&se, &mut ops);
        } else if r < 10 {
            // rebuild the second side as a copy of the first with new voids
            for j in 1..=n {
                if se.side(Side::Second)[j - 1] != 0 {
                    se.reset(Side::Second, j).unwrap();
                    check(&se, &mut ops);
                }
            }
            let word: Vec<u32> = se.side(Side::First).iter().copied().filter(|&c| c != 0).collect();
            let mut slots: Vec<usize> = (1..=n).collect();
            while slots.len() > word.len() {
                slots.remove(rng.gen_range(0..slots.len()));
            }
            for (&j, &c) in slots.iter().zip(&word) {
                se.set(Side::Second, j, c).unwrap();
                check(&se, &mut ops);
            }
        } else {
            // the same edit on both sides at the same rank of the erased strings
            let i = rng.gen_range(1..=n);
            let first = se.side(Side::First).to_vec();
            let rank = first[..i - 1].iter().filter(|&&c| c != 0).count();
            if first[i - 1] == 0 {
                let second = se.side(Side::Second);
                let gaps: Vec<usize> = (1..=n)
                    .filter(|&j| second[j - 1] == 0 && second[..j - 1].iter().filter(|&&c| c != 0).count() == rank)
                    .collect();
                let c = rng.gen_range(1..=3);
                se.set(Side::First, i, c).unwrap();
                check(&se, &mut ops);
                if !gaps.is_empty() {
                    se.set(Side::Second, gaps[rng.gen_range(0..gaps.len())], c).unwrap();
                    check(&se, &mut ops);
                }
            } else {
                se.reset(Side::First, i).unwrap();
                check(&se, &mut ops);
                if let Some(j) = nth_symbol(se.side(Side::Second), rank + 1) {
                    se.reset(Side::Second, j).unwrap();
                    check(&se, &mut ops);
                }
            }
        }
    }
    outcome(9, wrong == 0, format!("{ops} operations, {equal} equal states, {wrong} wrong answers"))
}

fn squares() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let n = 256;
    let fresh: Vec<u32> = (1..=n as u32).collect();
    let mut sf = SquareFree::from_symbols(&fresh, 0.5).unwrap();
    let (mut wrong, mut free) = (0, 0);
    for _ in 0..10_000 {
        let s = sf.to_vec();
        // copying a nearby symbol makes squares; a fresh symbol inside a
        // square tends to remove it
        let (x, c) = if rng.gen_bool(0.4) {
            let x = rng.gen_range(1..=n);
            (x, s[(x + rng.gen_range(1..=12)).min(n) - 1])
        } else {
            let sq: Vec<(usize, usize)> = naive_squares(&s).into_iter().collect();
            let x = match sq.get(rng.gen_range(0..sq.len().max(1))) {
                Some(&(a, len)) => a + rng.gen_range(0..len),
                None => rng.gen_range(1..=n),
            };
            (x, rng.gen_range(1..=16 * n as u32))
        };
        sf.set(x, c).unwrap();
        let want = naive_square_free(&sf.to_vec());
        free += want as usize;
        wrong += (sf.query() != want) as usize;
    }
    let audit = sf.audit().len();

    let mut sf = SquareFree::from_symbols(&fresh, 0.5).unwrap();
    let (mut missed, mut uncovered) = (0, 0);
    for _ in 0..500 {
        let half = rng.gen_range(1..=32usize);
        let x = rng.gen_range(1..=n - 2 * half + 1);
        for t in 0..half {
            sf.set(x + half + t, fresh[x + t - 1]).unwrap();
        }
        missed += sf.query() as usize;
        if half >= 2 {
            let cover = sf.covering(x, 2 * half);
            if !cover.iter().any(|&(k, i)| sf.bit(k, i) == Some(true)) {
                uncovered += 1;
            }
        }
        for t in 0..half {
            sf.set(x + half + t, fresh[x + half + t - 1]).unwrap();
        }
    }
    outcome(
        10,
        wrong == 0 && audit == 0 && missed == 0 && uncovered == 0,
        format!(
            "n={n}: 10^4 substitutions, {free} square-free states, {wrong} wrong answers, {audit} audit findings; 500 planted squares: {missed} missed, {uncovered} not flagged by a covering instance"
        ),
    )
}

fn scaling() -> Outcome {
    let sizes: Vec<usize> = (8..=14).map(|e| 1usize << e).collect();
    let eps = 0.5;
    let report = bench(&sizes, 40, eps, Generator::Random, 1).unwrap();
    let e = report.exponent.unwrap_or(f64::NAN);
    let mut detail = format!("fitted exponent {e:.3}, target ≤ {:.1};", eps + 0.3);
    for r in &report.rows {
        let _ = write!(detail, " n={} {:.0}", r.n, r.ops_per_update);
    }
    detail += " ops/update";
    Outcome { id: 11, pass: e <= eps + 0.3, soft: true, detail }
}

#[test]
fn acceptance() {
    let results = Mutex::new(Vec::new());
    std::thread::scope(|sc| {
        let r = &results;
        sc.spawn(move || {
            let (a, b) = lce_traces();
            r.lock().unwrap().extend([a, b]);
        });
        sc.spawn(move || r.lock().unwrap().push(muddling()));
        sc.spawn(move || {
            let (a, b) = validator();
            r.lock().unwrap().extend([a, b]);
        });
        sc.spawn(move || r.lock().unwrap().push(coin_flip()));
        sc.spawn(move || r.lock().unwrap().push(locality()));
        sc.spawn(move || {
            let a = dyck();
            let b = string_equality();
            r.lock().unwrap().extend([a, b]);
        });
        sc.spawn(move || r.lock().unwrap().push(squares()));
        sc.spawn(move || r.lock().unwrap().push(scaling()));
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|o| o.id);
    let mut hard_fail = vec![];
    for o in &results {
        let tag = match (o.pass, o.soft) {
            (true, _) => "PASS",
            (false, true) => "SOFT-FAIL",
            (false, false) => "FAIL",
        };
        println!("criterion {:>2}: {tag:<9} {}", o.id, o.detail);
        if !o.pass && !o.soft {
            hard_fail.push(o.id);
        }
    }
    assert_eq!(results.len(), 11);
    assert!(hard_fail.is_empty(), "failed criteria: {hard_fail:?}");
}
