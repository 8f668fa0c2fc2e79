//! Membership in the one-bracket Dyck language under substitutions.

use dynamic_lce::dyck::{D1Tree, Paren};

fn main() -> dynamic_lce::Result<()> {
    let mut t = D1Tree::from_str("⟨⊥⟨⟩⊥⟨⟩⟩")?;
    println!("{t}: member {}, root (l, r) = {:?}", t.member(), t.root());

    t.reset(8)?;
    println!("{t}: member {}, root {:?}", t.member(), t.root());
    t.set(2, Paren::Close)?;
    println!("{t}: member {}, root {:?}", t.member(), t.root());
    println!("nodes written on the last update: {:?}", t.last_writes());
    t.reset(2)?;
    t.set(5, Paren::Close)?;
    println!("{t}: member {}", t.member());
    assert!(t.recompute_mismatches().is_empty());
    Ok(())
}
