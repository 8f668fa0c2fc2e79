use dynamic_lce::dyck::{D1Tree, Paren};
use dynamic_lce::hierarchy::{alpha, beta};
use dynamic_lce::oracles::{naive_dyck1, naive_lcp, naive_lcs, naive_square_free};
use dynamic_lce::squares::SquareFree;
use dynamic_lce::trace::{replay_commands, Command, Config};
use dynamic_lce::{Edit, Hierarchy, Mode};
use proptest::prelude::*;

fn edits() -> impl Strategy<Value = Vec<(bool, usize, u32)>> {
    prop::collection::vec((prop::bool::weighted(0.7), any::<usize>(), 1u32..4), 1..160)
}

/// Applies raw edit draws, turning each into a valid insert or delete.
fn build(h: &mut Hierarchy, raw: &[(bool, usize, u32)]) {
    for &(ins, r, c) in raw {
        let len = h.len();
        if len == 0 || (ins && len < h.capacity()) {
            h.apply(Edit::Insert { pos: r % (len + 1) + 1, ch: c }).unwrap();
        } else {
            h.apply(Edit::Delete { pos: r % len + 1 }).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Equal contexts around two positions carry the same factor.
    #[test]
    fn context_transports_factors(raw in edits()) {
        let mut h = Hierarchy::new(160, 0.5).unwrap();
        build(&mut h, &raw);
        h.settle();
        let s = h.to_vec();
        let n = s.len();
        for l in 1..=h.level_count() {
            let (a, b) = (alpha(l), beta(l, h.lstar_n()));
            let facs = h.factors(l);
            let at: std::collections::HashMap<usize, (usize, u64)> =
                facs.iter().map(|&(st, len, g)| (st, (len, g))).collect();
            for &(i, len, g) in &facs {
                if i <= a || i + b > n + 1 {
                    continue;
                }
                let ctx = &s[i - 1 - a..i - 1 + b];
                for j in a + 1..=n + 1 - b {
                    if &s[j - 1 - a..j - 1 + b] == ctx {
                        prop_assert_eq!(at.get(&j), Some(&(len, g)), "level {} factor at {} not at {}", l, i, j);
                    }
                }
            }
        }
    }

    /// Live queries agree with a scan of the current string while updates
    /// are still in flight.
    #[test]
    fn live_lce_matches_scan(raw in edits(), qs in prop::collection::vec((any::<usize>(), any::<usize>()), 1..20)) {
        let mut h = Hierarchy::new(160, 0.5).unwrap();
        build(&mut h, &raw);
        let s = h.to_vec();
        if s.is_empty() {
            return Ok(());
        }
        for (x, y) in qs {
            let (i, j) = (x % s.len() + 1, y % s.len() + 1);
            prop_assert_eq!(h.lcp(i, j).unwrap(), naive_lcp(&s, i, j).unwrap());
            prop_assert_eq!(h.lcs(i, j).unwrap(), naive_lcs(&s, i, j).unwrap());
        }
    }

    /// Pipelined and eager processing give the same answers.
    #[test]
    fn modes_answer_alike(raw in edits(), qs in prop::collection::vec((any::<usize>(), any::<usize>()), 1..40)) {
        let mut len = 0usize;
        let mut cmds = vec![];
        for (k, &(ins, r, c)) in raw.iter().enumerate() {
            if len == 0 || ins {
                cmds.push(Command::Insert(r % (len + 1) + 1, c));
                len += 1;
            } else {
                cmds.push(Command::Delete(r % len + 1));
                len -= 1;
            }
            if let Some(&(x, y)) = qs.get(k) {
                if len > 0 {
                    cmds.push(Command::Lcp(x % len + 1, y % len + 1));
                }
            }
        }
        let cmds: Vec<(usize, Command)> = cmds.into_iter().enumerate().map(|(k, c)| (k + 1, c)).collect();
        let cfg = Config { n: 200, epsilon: 0.5, mode: Mode::Pipelined, crosscheck: true };
        let a = replay_commands(&cmds, cfg).unwrap();
        let b = replay_commands(&cmds, Config { mode: Mode::Eager, ..cfg }).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn d1_matches_scan(ops in prop::collection::vec((any::<usize>(), 0u8..3), 1..200)) {
        let n = 24;
        let mut t = D1Tree::new(n).unwrap();
        for (r, k) in ops {
            let i = r % n + 1;
            let _ = match k {
                0 => t.set(i, Paren::Open),
                1 => t.set(i, Paren::Close),
                _ => t.reset(i),
            };
            prop_assert_eq!(t.member(), naive_dyck1(&t.to_string()));
            prop_assert!(t.recompute_mismatches().is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn square_freeness_matches_scan(ops in prop::collection::vec((any::<usize>(), 1u32..6), 1..60)) {
        let n = 40;
        let start: Vec<u32> = (1..=n as u32).map(|x| x + 10).collect();
        let mut sf = SquareFree::from_symbols(&start, 0.5).unwrap();
        for (r, c) in ops {
            sf.set(r % n + 1, c).unwrap();
            prop_assert_eq!(sf.query(), naive_square_free(&sf.to_vec()));
        }
    }
}
