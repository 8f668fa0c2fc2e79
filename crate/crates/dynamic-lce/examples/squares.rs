//! Square-freeness under substitutions.

use dynamic_lce::oracles::naive_squares;
use dynamic_lce::squares::SquareFree;

fn main() -> dynamic_lce::Result<()> {
    // a square-free ternary word
    let word = "abcacbabcbacabcacbacabcb";
    let s: Vec<u32> = word.bytes().map(|c| u32::from(c - b'a' + 1)).collect();
    let mut sf = SquareFree::from_symbols(&s, 0.5)?;
    println!("{word}: square-free {} ({} range instances, block lengths {:?})", sf.query(), sf.instance_count(), sf.block_lengths());

    // copy S[7,11) = "abcb" onto S[11,15)
    for (x, c) in [(11, 1), (12, 2), (13, 3), (14, 2)] {
        sf.set(x, c)?;
    }
    let squares = naive_squares(&sf.to_vec());
    println!("after 4 substitutions: square-free {}, squares {:?}", sf.query(), squares);
    let &(x, m) = squares.iter().find(|q| q.1 >= 4).unwrap();
    for (k, i) in sf.covering(x, m) {
        println!("  square ({x}, {m}) lies in instance level {k} block {i}, bit {:?}", sf.bit(k, i));
    }
    print!("{sf}");
    Ok(())
}
