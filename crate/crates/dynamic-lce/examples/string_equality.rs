//! Equality of two strings with void positions, under substitutions.

use dynamic_lce::dyck::{Side, StringEquality};

fn main() -> dynamic_lce::Result<()> {
    let mut se = StringEquality::new(8, 0.5)?;
    // "ab" on both sides, at different positions
    se.set(Side::First, 2, 1)?;
    se.set(Side::First, 5, 2)?;
    println!("{:?} vs {:?}: {}", se.side(Side::First), se.side(Side::Second), se.equal());
    se.set(Side::Second, 1, 1)?;
    se.set(Side::Second, 8, 2)?;
    println!("{:?} vs {:?}: {}", se.side(Side::First), se.side(Side::Second), se.equal());
    se.set(Side::Second, 4, 3)?;
    println!("{:?} vs {:?}: {}", se.side(Side::First), se.side(Side::Second), se.equal());
    se.reset(Side::Second, 4)?;
    println!("after voiding 4 again: {}", se.equal());
    Ok(())
}
