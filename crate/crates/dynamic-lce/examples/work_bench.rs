//! Operation counts per update for a few string sizes.

use dynamic_lce::trace::{bench, Generator};

fn main() -> dynamic_lce::Result<()> {
    for g in [Generator::Random, Generator::Periodic] {
        let report = bench(&[128, 256, 512, 1024], 40, 0.5, g, 3)?;
        println!("{g:?}");
        print!("{}", report.to_text());
    }
    Ok(())
}
