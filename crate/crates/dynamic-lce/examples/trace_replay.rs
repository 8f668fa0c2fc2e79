//! Replaying a command trace with every answer cross-checked.

use dynamic_lce::trace::{parse_trace, random_lce_trace, replay, replay_commands, Config};
use dynamic_lce::Mode;

const TRACE: &str = "\
# build abab, query, then edit
insert 1 1
insert 2 2
insert 3 1
insert 4 2
lcp 1 3
eq 1 3 2
delete 2
lcs 2 3
settle
validate
d1set 1 <
d1set 3 >
d1member
";

fn main() {
    let cfg = Config { n: 32, epsilon: 0.5, mode: Mode::Pipelined, crosscheck: true };
    match replay(TRACE, cfg) {
        Ok(lines) => println!("answers: {}", lines.join(" ")),
        Err(e) => println!("error: {e}"),
    }

    let e = replay("insert 1 1\nlcp 1 3\n", cfg).unwrap_err();
    println!("bad query: {e} (exit code {})", e.exit_code());

    let cmds: Vec<_> = random_lce_trace(128, 2000, 7).into_iter().enumerate().map(|(k, c)| (k + 1, c)).collect();
    let a = replay_commands(&cmds, Config { n: 128, ..cfg }).unwrap();
    let b = replay_commands(&cmds, Config { n: 128, mode: Mode::Eager, ..cfg }).unwrap();
    println!("random trace: {} answers, modes agree: {}", a.len(), a == b);
    println!("parsed {} commands from the sample", parse_trace(TRACE).unwrap().len());
}
