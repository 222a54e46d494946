//! Two-phase driver: `verify` leaves an assumption automaton behind, the
//! `cover-*` commands measure coverage against it.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde_json::json;
use thiserror::Error;
use vericov::coverage::{exact_coverage, under_approx_coverage};
use vericov::explorer::{explore, make_strategy, Budget, ExploreOptions, NondetDomain, Spec, StrategyKind, Verdict};
use vericov::report::{to_json, to_text};
use vericov::{compile, parse_aa, score, serialize_aa, AssumptionAutomaton, Cfa, SourceProgram};

/// Soft limit plus this margin bounds the whole run.
pub const HARD_LIMIT_MARGIN: Duration = Duration::from_secs(100);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CfaDump,
    Verify,
    CoverExact,
    CoverUnder,
    Score,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Text,
    Structured,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub program: PathBuf,
    pub command: Command,
    pub time_limit: Duration,
    pub max_nodes: Option<usize>,
    pub max_cex: usize,
    pub strategy: StrategyKind,
    pub domain: NondetDomain,
    pub aa_in: Option<PathBuf>,
    pub aa_out: Option<PathBuf>,
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn new(command: Command, program: impl Into<PathBuf>) -> Self {
        let budget = Budget::default();
        RunConfig {
            program: program.into(),
            command,
            time_limit: budget.time_limit,
            max_nodes: budget.max_nodes,
            max_cex: budget.max_cex,
            strategy: StrategyKind::DfsPostorder,
            domain: NondetDomain::default(),
            aa_in: None,
            aa_out: None,
            format: ReportFormat::Text,
        }
    }

    fn options(&self) -> ExploreOptions {
        ExploreOptions {
            budget: Budget {
                time_limit: self.time_limit,
                max_nodes: self.max_nodes,
                max_cex: self.max_cex,
            },
            domain: self.domain,
            ..ExploreOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Completed,
    BugFound,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Completed => 0,
            Outcome::BugFound => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn input_error(path: &Path, message: impl ToString) -> CliError {
    CliError::Input {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input_error(path, e))
}

fn load_program(path: &Path) -> Result<Cfa, CliError> {
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "program".into());
    compile(&SourceProgram::new(name, read(path)?)).map_err(|e| input_error(path, e))
}

fn load_aa(config: &RunConfig, cfa: &Cfa) -> Result<AssumptionAutomaton, CliError> {
    let path = config
        .aa_in
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --aa-in".into()))?;
    let aa = parse_aa(&read(path)?).map_err(|e| input_error(path, e))?;
    aa.check_compatible(cfa).map_err(|e| input_error(path, e))?;
    Ok(aa)
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfa = load_program(&config.program)?;
    match config.command {
        Command::CfaDump => {
            emit(out, &cfa.dump())?;
            Ok(Outcome::Completed)
        }
        Command::Verify => verify(config, &cfa, out),
        Command::CoverExact => {
            let aa = load_aa(config, &cfa)?;
            let report = exact_coverage(&cfa, &aa, &config.options()).map_err(|e| CliError::Internal(e.to_string()))?;
            emit(out, &render(config, &report, &cfa))?;
            Ok(Outcome::Completed)
        }
        Command::CoverUnder => {
            let aa = load_aa(config, &cfa)?;
            let scores = match config.strategy {
                StrategyKind::DfsPostorderScore => Some(score(&aa, &cfa).map_err(|e| CliError::Internal(e.to_string()))?),
                _ => None,
            };
            let strategy = make_strategy(config.strategy, scores).map_err(|e| CliError::Internal(e.to_string()))?;
            let report = under_approx_coverage(&cfa, &aa, &config.options(), &strategy)
                .map_err(|e| CliError::Internal(e.to_string()))?;
            emit(out, &render(config, &report, &cfa))?;
            Ok(if report.bug_found {
                Outcome::BugFound
            } else {
                Outcome::Completed
            })
        }
        Command::Score => {
            let aa = load_aa(config, &cfa)?;
            let scores = score(&aa, &cfa).map_err(|e| CliError::Internal(e.to_string()))?;
            let ranked = scores.ranked();
            let text = match config.format {
                ReportFormat::Text => ranked.iter().fold(String::new(), |mut s, &(q, v)| {
                    let _ = writeln!(s, "{} {v}", aa.state_name(q));
                    s
                }),
                ReportFormat::Structured => {
                    let rows: Vec<_> = ranked
                        .iter()
                        .map(|&(q, v)| json!({ "state": aa.state_name(q), "score": v }))
                        .collect();
                    pretty(&json!({ "program": cfa.name(), "scores": rows }))
                }
            };
            emit(out, &text)?;
            Ok(Outcome::Completed)
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn render(config: &RunConfig, report: &vericov::CoverageReport, cfa: &Cfa) -> String {
    match config.format {
        ReportFormat::Text => to_text(report, Some(cfa)),
        ReportFormat::Structured => to_json(report, Some(cfa)),
    }
}

fn verify(config: &RunConfig, cfa: &Cfa, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let strategy = make_strategy(config.strategy, None).map_err(|e| CliError::Usage(e.to_string()))?;
    let result = explore(cfa, Spec::Assertions, &config.options(), &strategy);
    let interrupted = result.verdict == Verdict::Unknown;
    if interrupted && config.aa_out.is_none() {
        return Err(CliError::Usage(
            "verification was interrupted; pass --aa-out to keep the explored region".into(),
        ));
    }
    if let Some(path) = &config.aa_out {
        let aa = result.assumption_automaton(cfa);
        std::fs::write(path, serialize_aa(&aa))
            .map_err(|e| CliError::Internal(format!("writing {}: {e}", path.display())))?;
    }
    let s = &result.stats;
    let text = match config.format {
        ReportFormat::Text => {
            let mut t = String::new();
            let _ = writeln!(t, "program: {}", cfa.name());
            let _ = writeln!(t, "verdict: {}", result.verdict.label());
            let _ = writeln!(t, "bug found: {}", if result.bug_found { "yes" } else { "no" });
            let _ = writeln!(
                t,
                "art: {} nodes, {} expanded, {} frontier, {} covered, {} pruned, {} refinements",
                s.nodes, s.expanded, s.frontier, s.covered, s.pruned, s.refinements
            );
            let _ = writeln!(t, "lines touched: {}", s.lines);
            for (i, c) in result.verdict.counterexamples().iter().enumerate() {
                let path: Vec<String> = c.execution.statements.iter().map(|x| x.to_string()).collect();
                let vals: Vec<String> = c.execution.witness.values().map(|x| x.to_string()).collect();
                let _ = writeln!(
                    t,
                    "counterexample {i}: {:?} path [{}] nondet [{}]",
                    c.kind,
                    path.join(" "),
                    vals.join(" ")
                );
            }
            if let Some(p) = &config.aa_out {
                let _ = writeln!(t, "automaton: {}", p.display());
            }
            t
        }
        ReportFormat::Structured => pretty(&json!({
            "program": cfa.name(),
            "verdict": result.verdict.label(),
            "bug_found": result.bug_found,
            "stats": s,
            "counterexamples": result.verdict.counterexamples(),
            "automaton": config.aa_out.as_ref().map(|p| p.display().to_string()),
        })),
    };
    emit(out, &text)?;
    Ok(if result.bug_found {
        Outcome::BugFound
    } else {
        Outcome::Completed
    })
}
