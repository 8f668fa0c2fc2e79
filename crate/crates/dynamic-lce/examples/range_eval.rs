//! Range folds over a fixed-length sequence under point updates.

use dynamic_lce::dyck::{ModAdd, Monoid, RangeEvalTree};

/// Function composition on `x ↦ a·x + b` modulo 97; not commutative.
#[derive(Clone, Copy)]
struct Affine;

impl Monoid for Affine {
    type Elem = (u64, u64);
    fn neutral(&self) -> (u64, u64) {
        (1, 0)
    }
    fn combine(&self, f: (u64, u64), g: (u64, u64)) -> (u64, u64) {
        // apply f, then g
        (g.0 * f.0 % 97, (g.0 * f.1 + g.1) % 97)
    }
}

fn main() -> dynamic_lce::Result<()> {
    let mut bits = RangeEvalTree::new(ModAdd { modulus: 1000 }, 16, 0.5)?;
    for i in [1, 3, 4, 9, 16] {
        bits.set(i, 1)?;
    }
    println!("fanout {}; ones in [1,4] = {}, in [5,16] = {}", bits.fanout(), bits.query(1, 4)?, bits.query(5, 16)?);
    bits.set(3, 0)?;
    println!("after clearing 3: prefix(8) = {}", bits.prefix(8)?);

    let mut maps = RangeEvalTree::new(Affine, 10, 0.5)?;
    for i in 1..=10 {
        maps.set(i, (i as u64 + 1, i as u64))?;
    }
    let (a, b) = maps.query(2, 5)?;
    println!("maps 2..=5 composed: x ↦ {a}·x + {b} (mod 97)");
    assert!(maps.aggregates_consistent());
    Ok(())
}
