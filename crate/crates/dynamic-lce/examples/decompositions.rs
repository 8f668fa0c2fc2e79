//! The factor hierarchy of a string and how one edit changes it.

use dynamic_lce::Hierarchy;

fn show(h: &Hierarchy, s: &[u8]) {
    for l in 1..=h.level_count().min(4) {
        let row: Vec<String> = h
            .factors(l)
            .iter()
            .map(|&(st, len, _)| String::from_utf8_lossy(&s[st - 1..st - 1 + len]).into_owned())
            .collect();
        println!("  level {l}: {}", row.join("|"));
    }
}

fn main() -> dynamic_lce::Result<()> {
    let text = b"abaabbabbbaabababaabbbabaabbaaabababbbaab".to_vec();
    let mut h = Hierarchy::from_symbols(128, 0.5, &text.iter().map(|&c| u32::from(c)).collect::<Vec<_>>())?;
    println!("{}", String::from_utf8_lossy(&text));
    show(&h, &text);

    let pos = 20;
    h.insert(pos, u32::from(b'a'))?;
    h.settle();
    let mut edited = text.clone();
    edited.insert(pos - 1, b'a');
    println!("after inserting 'a' at {pos}:");
    show(&h, &edited);
    for l in 1..=3 {
        let (a, b) = h.affected_range(l, pos)?;
        println!("  an edit at {pos} can regroup level-{l} factors {a}..={b} on level {}", l + 1);
    }
    let items = h.prepared(2);
    println!("level 2 is prepared from {} items of level 1", items.len());
    Ok(())
}
