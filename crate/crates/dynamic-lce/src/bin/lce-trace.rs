use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dynamic_lce::trace::{bench, replay, Config, Generator};
use dynamic_lce::Mode;

#[derive(Parser)]
#[command(name = "lce-trace", about = "Replay command traces against the dynamic LCE structures, or benchmark them")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pipelined,
    Eager,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenArg {
    Random,
    Periodic,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a trace file (`-` for stdin) and print one line per query.
    Replay {
        file: String,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "pipelined")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "off")]
        crosscheck: Switch,
    },
    /// Measure primitive operations per update for several string sizes.
    Bench {
        /// Comma-separated capacities.
        #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048,4096")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        updates: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "random")]
        generator: GenArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the report as JSON to this file.
        #[arg(long)]
        json: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Replay { file, n, epsilon, mode, crosscheck } => {
            let text = if file == "-" {
                std::io::read_to_string(std::io::stdin())
            } else {
                std::fs::read_to_string(&file)
            };
            let text = match text {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read {file}: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = Config {
                n,
                epsilon,
                mode: match mode {
                    ModeArg::Pipelined => Mode::Pipelined,
                    ModeArg::Eager => Mode::Eager,
                },
                crosscheck: matches!(crosscheck, Switch::On),
            };
            match replay(&text, cfg) {
                Ok(lines) => {
                    for l in lines {
                        println!("{l}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Cmd::Bench { sizes, updates, epsilon, generator, seed, json } => {
            let g = match generator {
                GenArg::Random => Generator::Random,
                GenArg::Periodic => Generator::Periodic,
            };
            let report = match bench(&sizes, updates, epsilon, g, seed) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            print!("{}", report.to_text());
            if let Some(path) = json {
                if let Err(e) = std::fs::write(&path, report.to_json()) {
                    eprintln!("cannot write {path}: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
    }
}
