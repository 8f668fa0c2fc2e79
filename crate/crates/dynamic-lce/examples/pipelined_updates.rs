//! Levels lag behind the string; queries stay exact while updates are in flight.

use dynamic_lce::oracles::naive_lcp;
use dynamic_lce::{Hierarchy, Mode};

fn main() -> dynamic_lce::Result<()> {
    let mut h = Hierarchy::with_mode(256, 0.5, Mode::Pipelined)?;
    let mut eager = Hierarchy::with_mode(256, 0.5, Mode::Eager)?;
    for (k, c) in "abaababaabaababaabab".bytes().enumerate() {
        h.insert(k + 1, u32::from(c))?;
        eager.insert(k + 1, u32::from(c))?;
    }
    h.delete(3)?;
    eager.delete(3)?;
    h.insert(7, u32::from(b'b'))?;
    eager.insert(7, u32::from(b'b'))?;

    println!("after {} updates, {} still in flight", h.updates(), h.in_flight());
    for l in 1..=h.level_count() {
        println!("  level {l} reflects update {}", h.level_version(l));
    }
    println!("change record:");
    for e in h.record() {
        println!("  update {} {:?} age {}", e.k, e.kind, e.age);
    }

    let s = h.to_vec();
    for (i, j) in [(1, 4), (2, 7), (6, 9)] {
        let a = h.lcp(i, j)?;
        assert_eq!(a, eager.lcp(i, j)?);
        assert_eq!(a, naive_lcp(&s, i, j)?);
        println!("lcp({i}, {j}) = {a} in both modes");
    }

    h.settle();
    println!("settled: {}, in flight {}", h.is_settled(), h.in_flight());
    Ok(())
}
