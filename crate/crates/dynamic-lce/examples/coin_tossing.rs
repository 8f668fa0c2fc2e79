//! Deterministic merge selection on a sequence of names.

use dynamic_lce::coin_flip::{check_merge_bits, choose_merges, reduction_rounds, six_coloring, three_coloring, MergeInput};

fn main() -> dynamic_lce::Result<()> {
    // −1 marks a deactivated (long) factor
    let names = vec![17, 4, 9, 4, -1, 12, 30, 2, 7, 19, 3, -1, 8, 1];
    let inp = MergeInput::new(names.clone(), 32);
    println!("names   {names:?}");
    println!("6-color {:?}", six_coloring(&inp)?);
    println!("3-color {:?}", three_coloring(&inp)?);
    let bits = choose_merges(&inp)?;
    println!("bits    {bits:?}");
    assert!(check_merge_bits(&names, &bits).is_empty());

    let mut groups = vec![];
    for (k, &b) in bits.iter().enumerate() {
        if b == 1 || groups.is_empty() {
            groups.push(vec![]);
        }
        groups.last_mut().unwrap().push(names[k]);
    }
    println!("groups  {groups:?}");
    for d in [32u64, 1 << 16, 1 << 40] {
        println!("domain {d}: {} reduction rounds", reduction_rounds(d));
    }
    Ok(())
}
