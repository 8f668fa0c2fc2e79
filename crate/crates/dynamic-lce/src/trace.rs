//! Line-oriented command traces: parsing, replay with optional oracle
//! cross-checking, and the per-update cost benchmark.
//!
//! A trace has one command per line, whitespace-separated, 1-based:
//!
//! ```text
//! insert 1 5
//! lcp 1 2
//! d1set 3 <
//! seset 2 4 7
//! sqquery
//! ```
//!
//! Empty lines and lines starting with `#` are skipped.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dyck::{D1Tree, Paren, Side, StringEquality};
use crate::hierarchy::{Edit, Hierarchy, Mode};
use crate::oracles::{naive_dyck1, naive_eq, naive_erase_equal, naive_lcp, naive_lcs, naive_squares};
use crate::primitives::PhaseCost;
use crate::squares::SquareFree;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Insert(usize, u32),
    Delete(usize),
    Lcp(usize, usize),
    Lcs(usize, usize),
    Eq(usize, usize, usize),
    Settle,
    Validate,
    D1Set(usize, Paren),
    D1Reset(usize),
    D1Member,
    SeSet(Side, usize, u32),
    SeReset(Side, usize),
    SeEqual,
    SqSet(usize, u32),
    SqQuery,
}

impl Command {
    /// Whether the command prints an answer.
    pub fn is_query(&self) -> bool {
        matches!(
            self,
            Command::Lcp(..)
                | Command::Lcs(..)
                | Command::Eq(..)
                | Command::Validate
                | Command::D1Member
                | Command::SeEqual
                | Command::SqQuery
        )
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |s: &Side| if *s == Side::First { 1 } else { 2 };
        let paren = |p: &Paren| match p {
            Paren::Open => '<',
            Paren::Close => '>',
            Paren::Void => '_',
        };
        match self {
            Command::Insert(i, c) => write!(f, "insert {i} {c}"),
            Command::Delete(i) => write!(f, "delete {i}"),
            Command::Lcp(i, j) => write!(f, "lcp {i} {j}"),
            Command::Lcs(i, j) => write!(f, "lcs {i} {j}"),
            Command::Eq(i, j, m) => write!(f, "eq {i} {j} {m}"),
            Command::Settle => write!(f, "settle"),
            Command::Validate => write!(f, "validate"),
            Command::D1Set(i, p) => write!(f, "d1set {i} {}", paren(p)),
            Command::D1Reset(i) => write!(f, "d1reset {i}"),
            Command::D1Member => write!(f, "d1member"),
            Command::SeSet(s, i, c) => write!(f, "seset {} {i} {c}", side(s)),
            Command::SeReset(s, i) => write!(f, "sereset {} {i}", side(s)),
            Command::SeEqual => write!(f, "seequal"),
            Command::SqSet(i, c) => write!(f, "sqset {i} {c}"),
            Command::SqQuery => write!(f, "sqquery"),
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let (&op, args) = words.split_first().ok_or("empty command")?;
        let want = |k: usize| {
            if args.len() == k {
                Ok(())
            } else {
                Err(format!("{op} takes {k} argument(s), got {}", args.len()))
            }
        };
        let num = |k: usize| args[k].parse::<usize>().map_err(|_| format!("not an index: {:?}", args[k]));
        let sym = |k: usize| args[k].parse::<u32>().map_err(|_| format!("not a symbol: {:?}", args[k]));
        let side = |k: usize| match args[k] {
            "1" => Ok(Side::First),
            "2" => Ok(Side::Second),
            w => Err(format!("side must be 1 or 2, got {w:?}")),
        };
        let cmd = match op {
            "insert" => {
                want(2)?;
                Command::Insert(num(0)?, sym(1)?)
            }
            "delete" => {
                want(1)?;
                Command::Delete(num(0)?)
            }
            "lcp" => {
                want(2)?;
                Command::Lcp(num(0)?, num(1)?)
            }
            "lcs" => {
                want(2)?;
                Command::Lcs(num(0)?, num(1)?)
            }
            "eq" => {
                want(3)?;
                Command::Eq(num(0)?, num(1)?, num(2)?)
            }
            "settle" => {
                want(0)?;
                Command::Settle
            }
            "validate" => {
                want(0)?;
                Command::Validate
            }
            "d1set" => {
                want(2)?;
                let p = match args[1] {
                    "<" => Paren::Open,
                    ">" => Paren::Close,
                    w => return Err(format!("d1set needs < or >, got {w:?}")),
                };
                Command::D1Set(num(0)?, p)
            }
            "d1reset" => {
                want(1)?;
                Command::D1Reset(num(0)?)
            }
            "d1member" => {
                want(0)?;
                Command::D1Member
            }
            "seset" => {
                want(3)?;
                Command::SeSet(side(0)?, num(1)?, sym(2)?)
            }
            "sereset" => {
                want(2)?;
                Command::SeReset(side(0)?, num(1)?)
            }
            "seequal" => {
                want(0)?;
                Command::SeEqual
            }
            "sqset" => {
                want(2)?;
                Command::SqSet(num(0)?, sym(1)?)
            }
            "sqquery" => {
                want(0)?;
                Command::SqQuery
            }
            _ => return Err(format!("unknown command {op:?}")),
        };
        Ok(cmd)
    }
}

/// Commands of a trace with their 1-based line numbers.
pub fn parse_trace(text: &str) -> std::result::Result<Vec<(usize, Command)>, TraceError> {
    let mut out = vec![];
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let cmd = t.parse().map_err(|msg| TraceError::Parse { line: k + 1, msg })?;
        out.push((k + 1, cmd));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    Parse {
        line: usize,
        msg: String,
    },
    Command {
        line: usize,
        command: String,
        msg: String,
    },
    Mismatch {
        line: usize,
        command: String,
        expected: String,
        got: String,
        /// The trace up to and including the failing command.
        reproduction: Vec<String>,
    },
}

impl TraceError {
    /// 1 for a cross-check mismatch, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            TraceError::Mismatch { .. } => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::Parse { line, msg } => write!(f, "line {line}: parse error: {msg}"),
            TraceError::Command { line, command, msg } => write!(f, "line {line}: `{command}` failed: {msg}"),
            TraceError::Mismatch { line, command, expected, got, reproduction } => {
                writeln!(f, "line {line}: `{command}` answered {got}, oracle says {expected}")?;
                writeln!(f, "reproduction ({} commands):", reproduction.len())?;
                for r in reproduction {
                    writeln!(f, "{r}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for TraceError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub n: usize,
    pub epsilon: f64,
    pub mode: Mode,
    pub crosscheck: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { n: 1024, epsilon: 0.5, mode: Mode::Pipelined, crosscheck: false }
    }
}

/// State of one replay. The applications are created on first use.
pub struct Session {
    cfg: Config,
    lce: Hierarchy,
    d1: Option<D1Tree>,
    se: Option<StringEquality>,
    sq: Option<SquareFree>,
    shadow: Vec<u32>,
    sq_shadow: Vec<u32>,
}

impl Session {
    pub fn new(cfg: Config) -> crate::Result<Self> {
        Ok(Session {
            cfg,
            lce: Hierarchy::with_mode(cfg.n, cfg.epsilon, cfg.mode)?,
            d1: None,
            se: None,
            sq: None,
            shadow: vec![],
            sq_shadow: vec![1; cfg.n],
        })
    }

    pub fn hierarchy(&self) -> &Hierarchy {
        &self.lce
    }

    /// Runs one command; queries return `(answer, oracle answer)`, the
    /// oracle only when cross-checking.
    pub fn execute(&mut self, cmd: Command) -> crate::Result<Option<(String, Option<String>)>> {
        let check = self.cfg.crosscheck;
        let pair = |a: String, o: Option<String>| Ok(Some((a, o)));
        match cmd {
            Command::Insert(i, c) => {
                self.lce.apply(Edit::Insert { pos: i, ch: c })?;
                self.shadow.insert(i - 1, c);
            }
            Command::Delete(i) => {
                self.lce.apply(Edit::Delete { pos: i })?;
                self.shadow.remove(i - 1);
            }
            Command::Lcp(i, j) => {
                let a = self.lce.lcp(i, j)?;
                return pair(a.to_string(), check.then(|| naive_lcp(&self.shadow, i, j).unwrap().to_string()));
            }
            Command::Lcs(i, j) => {
                let a = self.lce.lcs(i, j)?;
                return pair(a.to_string(), check.then(|| naive_lcs(&self.shadow, i, j).unwrap().to_string()));
            }
            Command::Eq(i, j, m) => {
                let a = self.lce.eq_live(i, j, m)?;
                return pair(a.to_string(), check.then(|| naive_eq(&self.shadow, i, j, m).unwrap().to_string()));
            }
            Command::Settle => self.lce.settle(),
            Command::Validate => {
                let v = self.lce.validate();
                let a = if v.is_empty() { "valid".to_string() } else { format!("invalid {}", v.len()) };
                return pair(a, check.then(|| "valid".to_string()));
            }
            Command::D1Set(i, p) => self.d1()?.set(i, p)?,
            Command::D1Reset(i) => self.d1()?.reset(i)?,
            Command::D1Member => {
                let t = self.d1()?;
                let a = t.member();
                let o = check.then(|| naive_dyck1(&t.to_string()).to_string());
                return pair(a.to_string(), o);
            }
            Command::SeSet(s, i, c) => self.se()?.set(s, i, c)?,
            Command::SeReset(s, i) => self.se()?.reset(s, i)?,
            Command::SeEqual => {
                let se = self.se()?;
                let a = se.equal();
                let o = check.then(|| naive_erase_equal(se.side(Side::First), se.side(Side::Second)).to_string());
                return pair(a.to_string(), o);
            }
            Command::SqSet(i, c) => {
                self.sq()?.set(i, c)?;
                self.sq_shadow[i - 1] = c;
            }
            Command::SqQuery => {
                let a = self.sq()?.query();
                let o = check.then(|| naive_squares(&self.sq_shadow).is_empty().to_string());
                return pair(a.to_string(), o);
            }
        }
        Ok(None)
    }

    fn d1(&mut self) -> crate::Result<&mut D1Tree> {
        if self.d1.is_none() {
            self.d1 = Some(D1Tree::new(self.cfg.n)?);
        }
        Ok(self.d1.as_mut().unwrap())
    }

    fn se(&mut self) -> crate::Result<&mut StringEquality> {
        if self.se.is_none() {
            self.se = Some(StringEquality::with_mode(self.cfg.n, self.cfg.epsilon, self.cfg.mode)?);
        }
        Ok(self.se.as_mut().unwrap())
    }

    fn sq(&mut self) -> crate::Result<&mut SquareFree> {
        if self.sq.is_none() {
            self.sq = Some(SquareFree::with_mode(&vec![1; self.cfg.n], self.cfg.epsilon, self.cfg.mode)?);
        }
        Ok(self.sq.as_mut().unwrap())
    }
}

/// Replays a trace and returns one line per query command.
pub fn replay(text: &str, cfg: Config) -> std::result::Result<Vec<String>, TraceError> {
    let cmds = parse_trace(text)?;
    replay_commands(&cmds, cfg)
}

pub fn replay_commands(cmds: &[(usize, Command)], cfg: Config) -> std::result::Result<Vec<String>, TraceError> {
    let mut session = Session::new(cfg).map_err(|e| TraceError::Command {
        line: 0,
        command: "init".into(),
        msg: e.to_string(),
    })?;
    let mut out = vec![];
    for (k, &(line, cmd)) in cmds.iter().enumerate() {
        let res = session.execute(cmd).map_err(|e| TraceError::Command {
            line,
            command: cmd.to_string(),
            msg: e.to_string(),
        })?;
        if let Some((got, oracle)) = res {
            if let Some(expected) = oracle {
                if expected != got {
                    return Err(TraceError::Mismatch {
                        line,
                        command: cmd.to_string(),
                        expected,
                        got,
                        reproduction: cmds[..=k].iter().map(|(_, c)| c.to_string()).collect(),
                    });
                }
            }
            out.push(got);
        }
    }
    Ok(out)
}

/// Random LCE trace over a string that stays below `n`: mixed inserts,
/// deletes and queries. Inserted symbols often copy a nearby symbol so
/// long common extensions occur.
pub fn random_lce_trace(n: usize, len: usize, seed: u64) -> Vec<Command> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s: Vec<u32> = vec![];
    let mut out = Vec::with_capacity(len);
    let sigma = rng.gen_range(2..=4u32);
    while out.len() < len {
        let m = s.len();
        let r: f64 = rng.gen();
        if m == 0 || (r < 0.35 && m < n) {
            let pos = rng.gen_range(1..=m + 1);
            let ch = if m > 8 && rng.gen_bool(0.6) {
                s[rng.gen_range(0..m)]
            } else {
                rng.gen_range(1..=sigma)
            };
            s.insert(pos - 1, ch);
            out.push(Command::Insert(pos, ch));
        } else if r < 0.5 {
            let pos = rng.gen_range(1..=m);
            s.remove(pos - 1);
            out.push(Command::Delete(pos));
        } else {
            let i = rng.gen_range(1..=m);
            let j = rng.gen_range(1..=m);
            out.push(match rng.gen_range(0..3) {
                0 => Command::Lcp(i, j),
                1 => Command::Lcs(i, j),
                _ => {
                    let top = m + 1 - i.max(j);
                    Command::Eq(i, j, rng.gen_range(0..=top))
                }
            });
        }
    }
    out
}

/// How the bench generates edits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    /// Uniform positions and a small alphabet.
    Random,
    /// Inserts copy the symbol a fixed period back, so the string stays
    /// periodic with occasional breaks.
    Periodic,
}

impl FromStr for Generator {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(Generator::Random),
            "periodic" => Ok(Generator::Periodic),
            _ => Err(format!("unknown generator {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub updates: usize,
    /// Primitive operations per update, all phases.
    pub ops_per_update: f64,
    pub phases: Vec<PhaseCost>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub generator: Generator,
    pub epsilon: f64,
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log(ops per update)` against `log n`.
    pub exponent: Option<f64>,
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("{:>7} {:>8} {:>14}  phases (ops/update)\n", "n", "updates", "ops/update");
        for r in &self.rows {
            let phases: Vec<String> = r
                .phases
                .iter()
                .map(|p| format!("{}={:.0}", p.phase_name, p.primitive_ops as f64 / r.updates as f64))
                .collect();
            out += &format!("{:>7} {:>8} {:>14.1}  {}\n", r.n, r.updates, r.ops_per_update, phases.join(" "));
        }
        match self.exponent {
            Some(e) => out += &format!("fitted exponent {e:.3} (epsilon {})\n", self.epsilon),
            None => out += "fitted exponent n/a\n",
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Per-update cost for every size: the string is built with `n/2` symbols, then
/// `updates` edits keep its length near `n/2` and are measured.
pub fn bench(sizes: &[usize], updates: usize, epsilon: f64, generator: Generator, seed: u64) -> crate::Result<BenchReport> {
    let mut rows = vec![];
    for &n in sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let period = 7;
        // symbol for position `pos`, given the string that will precede it
        let pick = |rng: &mut ChaCha8Rng, back: Option<u32>| -> u32 {
            match (generator, back) {
                (Generator::Periodic, Some(c)) if rng.gen_bool(0.97) => c,
                _ => rng.gen_range(1..=4),
            }
        };
        let mut s: Vec<u32> = Vec::with_capacity(n / 2);
        while s.len() < n / 2 {
            let back = s.len().checked_sub(period).map(|k| s[k]);
            let c = pick(&mut rng, back);
            s.push(c);
        }
        let mut h = Hierarchy::from_symbols(n, epsilon, &s)?;
        h.settle();
        h.reset_ledger();
        for _ in 0..updates {
            let m = h.len();
            if m < n / 2 || m == 0 {
                let pos = rng.gen_range(1..=m + 1);
                let back = (pos > period).then(|| h.char_at(pos - period).unwrap());
                let c = pick(&mut rng, back);
                h.insert(pos, c)?;
            } else {
                h.delete(rng.gen_range(1..=m))?;
            }
        }
        let phases = h.ledger().report();
        // prepare and finalize are nested inside update.pipeline
        let total = h.ledger().phase("update.pipeline").primitive_ops + h.ledger().phase("update.record").primitive_ops;
        rows.push(BenchRow { n, updates, ops_per_update: total as f64 / updates.max(1) as f64, phases });
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.updates > 0).map(|r| (r.n as f64, r.ops_per_update)).collect();
    Ok(BenchReport { generator, epsilon, rows, exponent: fit_exponent(&pts) })
}
