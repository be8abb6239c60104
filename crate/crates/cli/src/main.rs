mod commands;
mod demos;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use dcgame::games::NODE_CAP;

use report::{Inputs, Outcome};

#[derive(Parser, Debug)]
#[command(name = "dcgame", version, about = "Pricing cones, information capacity and coding games")]
struct Cli {
    /// Absolute tolerance for membership and LP decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true, value_name = "OUT")]
    json: Option<PathBuf>,
    /// Bound on game-tree nodes visited by exhaustive verification.
    #[arg(long, global = true, default_value_t = NODE_CAP)]
    node_cap: usize,
    /// Seed for randomized searches.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print elapsed time to stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cone algebra and order queries.
    Cone {
        #[command(subcommand)]
        cmd: ConeCmd,
    },
    /// Information capacity of a cone.
    Capacity {
        cone: PathBuf,
        #[arg(long, default_value = "auto")]
        method: String,
        /// Also cross-check the hull reduction on this many sampled portfolios per cell.
        #[arg(long, default_value_t = 0)]
        validate_samples: usize,
    },
    /// Entropy of a cone.
    Entropy {
        /// Cone JSON (closed form or search methods).
        cone: Option<PathBuf>,
        /// JSON list of generator portfolios (generator form).
        #[arg(long, conflicts_with = "cone")]
        generators: Option<PathBuf>,
        #[arg(long)]
        method: Option<String>,
    },
    /// Channel construction.
    Channel {
        #[command(subcommand)]
        cmd: ChannelCmd,
    },
    /// Channel coding games.
    Game {
        #[command(subcommand)]
        cmd: GameCmd,
    },
    /// Lossless source coding games.
    Source {
        #[command(subcommand)]
        cmd: SourceCmd,
    },
    /// Worked scenarios.
    Demo {
        #[command(subcommand)]
        cmd: DemoCmd,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ConeOp {
    Union,
    Intersection,
    DisjointSum,
    Minplus,
    Robustify,
    Pushforward,
    Semidirect,
}

#[derive(Subcommand, Debug)]
pub enum ConeCmd {
    /// Combine cones; prints the resulting cone.
    Op {
        #[arg(value_enum)]
        op: ConeOp,
        first: PathBuf,
        second: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// Target label of each source symbol, in alphabet order (pushforward).
        #[arg(long, value_delimiter = ',')]
        map: Vec<String>,
    },
    Dual { cone: PathBuf },
    /// Is INNER contained in OUTER?
    Contains { outer: PathBuf, inner: PathBuf },
    Member {
        cone: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        portfolio: Vec<f64>,
    },
    Informative { cone: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum ChannelCmd {
    /// Build a game channel from a channel description.
    Build {
        spec: PathBuf,
        /// Also write the channel JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GameCmd {
    /// Turn a classical scheme into a game strategy.
    Synth {
        /// JSON {"model": ..., "scheme": ...}.
        scheme: PathBuf,
        #[arg(long, default_value = "martingale")]
        kind: String,
        /// Verify the strategy at this loss.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        strategy_out: Option<PathBuf>,
        #[arg(long)]
        channel_out: Option<PathBuf>,
    },
    /// Exhaustively check a strategy.
    Verify {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        messages: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        prefix_rule: bool,
    },
    /// Decide coding feasibility through deterministic degradedness.
    Feasible {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        messages: usize,
        #[arg(long)]
        eps: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum SourceCmd {
    /// Best L-codeword code and its martingale strategy for an i.i.d. source.
    Synth {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long)]
        n: usize,
        #[arg(long = "L")]
        messages: usize,
        #[arg(long)]
        strategy_out: Option<PathBuf>,
    },
    Verify {
        #[arg(long)]
        cone: PathBuf,
        /// JSON {"code": ..., "policy": ...}.
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long = "L")]
        messages: Option<usize>,
    },
    /// Typical-set scheme for a portfolio `a`.
    Sanov {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        n: usize,
        /// Also verify the scheme on the cone generated by `a`.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum DemoCmd {
    /// k-of-n mail delivery insurance.
    Mail {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        p: f64,
    },
    /// Capacity of the binary symmetric channel used with feedback.
    BscFeedback {
        #[arg(long, default_value_t = 0.11)]
        beta: f64,
    },
    /// Zero-error code and strategy on the pentagon channel.
    Pentagon,
    /// Capacity of the loss-requirement cone against its closed form.
    Fano {
        #[arg(long = "L", default_value_t = 4)]
        messages: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Duality of union and intersection of random state families.
    AvcfDual {
        #[arg(long, default_value_t = 20)]
        families: usize,
        #[arg(long, default_value_t = 3)]
        outputs: usize,
        #[arg(long, default_value_t = 3)]
        states: usize,
    },
}

/// Shared run state: global flags plus the digest of everything read.
pub struct Ctx {
    pub tol: f64,
    pub node_cap: usize,
    pub seed: u64,
    pub inputs: Inputs,
}

impl Ctx {
    pub fn read_json(&mut self, path: &Path) -> dcgame::Result<serde_json::Value> {
        let bytes = std::fs::read(path)
            .map_err(|e| dcgame::Error::Input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.add_file(&bytes);
        serde_json::from_slice(&bytes)
            .map_err(|e| dcgame::Error::Input(format!("{} is not valid JSON: {e}", path.display())))
    }

    pub fn write_json(&self, path: &Path, value: &serde_json::Value) -> dcgame::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("plain JSON");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| dcgame::Error::Input(format!("cannot write {}: {e}", path.display())))
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        eprintln!("error: --tol must be a nonnegative number");
        return ExitCode::from(2);
    }
    let start = Instant::now();
    let mut ctx = Ctx { tol: cli.tol, node_cap: cli.node_cap, seed: cli.seed, inputs: Inputs::new(&argv) };
    let outcome: dcgame::Result<Outcome> = match cli.command {
        Command::Cone { cmd } => commands::cone(&mut ctx, cmd),
        Command::Capacity { cone, method, validate_samples } => {
            commands::capacity(&mut ctx, &cone, &method, validate_samples)
        }
        Command::Entropy { cone, generators, method } => {
            commands::entropy_of(&mut ctx, cone.as_deref(), generators.as_deref(), method.as_deref())
        }
        Command::Channel { cmd } => commands::channel(&mut ctx, cmd),
        Command::Game { cmd } => commands::game(&mut ctx, cmd),
        Command::Source { cmd } => commands::source(&mut ctx, cmd),
        Command::Demo { cmd } => demos::run(&mut ctx, cmd),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let text = report::render(&argv, &ctx.inputs, &outcome, ctx.tol);
    match &cli.json {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if cli.timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    ExitCode::from(outcome.status as u8)
}
