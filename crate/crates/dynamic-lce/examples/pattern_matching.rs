//! Prefix-suffix matches, occurrences of a pattern in a text of twice its
//! length, and a single square-detection range instance.

use dynamic_lce::squares::{Occurrence, PrefixSuffix, PsInput, RangeSquare, SegmentMatch, SmInput, StringMatcher};

fn sym(s: &str) -> Vec<u32> {
    s.bytes().map(|c| u32::from(c - b'a' + 1)).collect()
}

fn main() -> dynamic_lce::Result<()> {
    let mut ps = PrefixSuffix::new(&sym("abcdab"), &sym("xyzdab"), 0.5)?;
    let show = |ps: &PrefixSuffix| -> dynamic_lce::Result<()> {
        for t in 1..=ps.segment_count() {
            match ps.matches(t)? {
                SegmentMatch::Progression(ap) => println!("  segment {t}: {:?}", ap.values()),
                SegmentMatch::Square => println!("  segment {t}: square"),
            }
        }
        Ok(())
    };
    println!("prefix-suffix matches of abcdab / xyzdab:");
    show(&ps)?;
    for (x, c) in [(3, 1), (4, 2), (5, 3), (6, 4)] {
        ps.set(PsInput::S, x, c)?;
    }
    println!("after S becomes xyabcd:");
    show(&ps)?;

    let mut sm = StringMatcher::new(&sym("xxabcdxx"), &sym("abcd"), 0.5)?;
    println!("abcd in xxabcdxx: {:?}", sm.occ());
    sm.set(SmInput::T, 4, 5)?;
    println!("abcd in xxaecdxx: {:?}", sm.occ());
    assert_eq!(sm.occ(), Occurrence::Absent);

    let s = sym("abcdefghijklmnopqrstuvwxyzabcdefghijklmnop");
    let mut rs = RangeSquare::new(&s, 2, 3, 0.5)?;
    println!("range instance ℓ=2, i=3: window {:?}, square {}", rs.window(), rs.query());
    for x in 8..=11 {
        rs.set(x, s[x - 5])?;
    }
    println!("after copying S[4,8) onto S[8,12): square {}", rs.query());
    Ok(())
}
