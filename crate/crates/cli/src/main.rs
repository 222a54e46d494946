use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vericov::explorer::{NondetDomain, StrategyKind};
use vericov_cli::{run, Command, ReportFormat, RunConfig, HARD_LIMIT_MARGIN};

#[derive(Parser)]
#[command(name = "vericov", version, about = "Verification coverage of interrupted program analyses")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Print the control flow automaton of a program.
    CfaDump(Common),
    /// Check the program's assertions and store the explored region.
    Verify(Common),
    /// Exact coverage of the region stored in --aa-in.
    CoverExact(Common),
    /// Coverage from generated executions inside the region stored in --aa-in.
    CoverUnder(Common),
    /// Heuristic score of each automaton state, highest first.
    Score(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    Bfs,
    DfsPostorder,
    #[value(name = "dfs-postorder+score")]
    DfsPostorderScore,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    #[value(alias = "json")]
    Structured,
}

#[derive(Args)]
struct Common {
    /// Program source file.
    program: PathBuf,
    /// Soft time limit in seconds; the run is killed 100 s later.
    #[arg(long, default_value_t = 900)]
    time_limit: u64,
    /// Maximum ART nodes per exploration, summed over restarts.
    #[arg(long)]
    max_nodes: Option<usize>,
    /// Maximum counterexamples (verify) or executions (cover-under).
    #[arg(long, default_value_t = 10)]
    max_cex: usize,
    #[arg(long, value_enum, default_value = "dfs-postorder")]
    strategy: Strategy,
    /// Smallest value `nondet()` may return during replay.
    #[arg(long, default_value_t = -8, allow_negative_numbers = true)]
    nondet_min: i64,
    /// Largest value `nondet()` may return during replay.
    #[arg(long, default_value_t = 8, allow_negative_numbers = true)]
    nondet_max: i64,
    /// Assumption automaton to measure against.
    #[arg(long)]
    aa_in: Option<PathBuf>,
    /// Where verify writes the assumption automaton.
    #[arg(long)]
    aa_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn config(command: Command, c: Common) -> Result<RunConfig, String> {
    let domain = NondetDomain::new(c.nondet_min, c.nondet_max).map_err(|e| e.to_string())?;
    Ok(RunConfig {
        program: c.program,
        command,
        time_limit: Duration::from_secs(c.time_limit),
        max_nodes: c.max_nodes,
        max_cex: c.max_cex,
        strategy: match c.strategy {
            Strategy::Bfs => StrategyKind::Bfs,
            Strategy::DfsPostorder => StrategyKind::DfsPostorder,
            Strategy::DfsPostorderScore => StrategyKind::DfsPostorderScore,
        },
        domain,
        aa_in: c.aa_in,
        aa_out: c.aa_out,
        format: match c.format {
            Format::Text => ReportFormat::Text,
            Format::Structured => ReportFormat::Structured,
        },
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::CfaDump(c) => (Command::CfaDump, c),
        Sub::Verify(c) => (Command::Verify, c),
        Sub::CoverExact(c) => (Command::CoverExact, c),
        Sub::CoverUnder(c) => (Command::CoverUnder, c),
        Sub::Score(c) => (Command::Score, c),
    };
    let config = match config(command, common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let hard = config.time_limit.saturating_add(HARD_LIMIT_MARGIN);
    std::thread::spawn(move || {
        std::thread::sleep(hard);
        eprintln!("error: hard time limit of {}s exceeded", hard.as_secs());
        std::process::exit(3);
    });

    std::panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    let result = std::panic::catch_unwind(|| run(&config, &mut std::io::stdout().lock()));
    match result {
        Ok(Ok(outcome)) => ExitCode::from(outcome.code()),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
        Err(_) => ExitCode::from(3),
    }
}
