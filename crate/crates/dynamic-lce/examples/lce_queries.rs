//! lcp, lcs and substring equality on a small string, checked against a scan.

use dynamic_lce::oracles::{naive_lcp, naive_lcs};
use dynamic_lce::Hierarchy;

fn main() -> dynamic_lce::Result<()> {
    let text = "ababcaabbabcaabbabcb";
    let s: Vec<u32> = text.bytes().map(u32::from).collect();
    let h = Hierarchy::from_symbols(64, 0.5, &s)?;
    println!("S = {text} ({} levels, {} actions per level)", h.level_count(), h.actions_per_level());

    for (i, j) in [(2, 9), (1, 3), (5, 13), (4, 4)] {
        let got = h.lcp(i, j)?;
        assert_eq!(got, naive_lcp(&s, i, j)?);
        println!("lcp({i}, {j}) = {got}");
    }
    for (i, j) in [(12, 19), (8, 16)] {
        let got = h.lcs(i, j)?;
        assert_eq!(got, naive_lcs(&s, i, j)?);
        println!("lcs({i}, {j}) = {got}");
    }
    println!("S[2,8) = S[9,15): {}", h.eq_live(2, 9, 6)?);
    println!("S[2,14) = S[9,21): {}", h.eq_live(2, 9, 12)?);

    let (v, rounds) = h.lcp_traced(2, 9)?;
    println!("lcp(2, 9) = {v} after {} rounds of the n^ε-ary search:", rounds.len());
    for (lo, hi) in rounds {
        println!("  candidates [{lo}, {hi}]");
    }
    Ok(())
}
