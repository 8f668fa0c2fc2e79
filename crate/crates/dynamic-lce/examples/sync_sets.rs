//! Synchronizing sets of a settled hierarchy, checked property by property.

use dynamic_lce::hierarchy::sparseness_bound;
use dynamic_lce::oracles::check_sync_set;
use dynamic_lce::Hierarchy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> dynamic_lce::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s: Vec<u32> = (0..400).map(|_| rng.gen_range(1..=3)).collect();
    let mut h = Hierarchy::from_symbols(512, 0.5, &s)?;

    println!("virtual τ (compared directly): {:?}", h.virtual_taus());
    for (tau, l) in h.sync_taus() {
        let b = h.sync_set(tau).unwrap();
        let report = check_sync_set(&s, tau, &b, sparseness_bound(tau, l));
        println!("τ = {tau:<4} level {l}: {:>3} occurrences, {} violations", b.len(), report.len());
    }
    let report = h.validate();
    println!("full validation: {} violations", report.len());

    // a wrong name is caught by the names check
    h.corrupt_sync_name(64);
    for v in h.validate().iter().take(3) {
        println!("after corruption: {v}");
    }
    Ok(())
}
