//! The dynamic structures underneath the hierarchy.

use dynamic_lce::marked_string::Dir;
use dynamic_lce::names::NameRegistry;
use dynamic_lce::neighbor::NeighborSet;
use dynamic_lce::primitives::{consistent_prefix_sums, max_position, WorkLedger};
use dynamic_lce::MarkedString;

fn main() -> dynamic_lce::Result<()> {
    let mut ledger = WorkLedger::new();

    let mut ms = MarkedString::new(64, 0.5)?;
    ledger.measure("marked string", || -> dynamic_lce::Result<()> {
        for (k, c) in "mississippi".bytes().enumerate() {
            ms.insert(k + 1, u32::from(c))?;
        }
        ms.mark(&[(1, 10), (5, 11), (9, 12)])?;
        Ok(())
    })?;
    println!("marks {:?}, next after 2: {:?}, rank(6) = {}", ms.marks(), ms.neighbor(2, Dir::Forward), ms.rank(6));
    ms.delete(3)?;
    println!("after deleting 3: marks {:?}", ms.marks());

    let mut set = NeighborSet::new(1000);
    for x in [5, 300, 999] {
        set.insert(x);
    }
    println!("successor of 6: {:?}, predecessor of 299: {:?}", set.succ_eq(6), set.pred_eq(299));

    let mut reg = NameRegistry::new(16, 8, 4, 0.5);
    let named = reg.add_keys(&[vec![1, 2], vec![3], vec![1, 2]])?;
    println!("names {named:?}");
    reg.sub_keys(&[vec![3]])?;
    println!("[3] still named: {:?}", reg.name_of(&vec![3]));

    let xs = [3, 1, 4, 1, 5, 9, 2, 6];
    let sums = ledger.measure("prefix sums", || consistent_prefix_sums(&xs))?;
    println!("prefix sums {sums:?}, max at {}", max_position(&xs, 0.5)?);
    print!("{}", ledger.to_text());
    Ok(())
}
