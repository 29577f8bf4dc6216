use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use flowpds::algebra::{check_laws, FlowAlgebra};
use flowpds::automaton::{query, AutomatonError};
use flowpds::encode::{analysis_report, encode_icfg, parse_icfg, render_report, EncodeError, LOCATION};
use flowpds::oracle::{check_completeness, check_soundness, Bounds, OracleError};
use flowpds::saturation::{saturate, SaturationError, SaturationResult};
use flowpds::solver::{solve_least, SolverConfig, SolverError, TraceLevel};
use flowpds::text::{
    parse_automaton, parse_config, parse_pds, write_automaton, write_constraints, write_solution, FormatError,
};
use flowpds::{with_loaded, Configuration, Direction, PAutomaton, PushdownSystem, Solution, StateId, Transition};

#[derive(Parser)]
#[command(name = "flowpds", version, about = "Weighted pushdown reachability over flow algebras")]
struct Cli {
    /// Log saturation and solver summaries to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dir {
    Pre,
    Post,
}

impl From<Dir> for Direction {
    fn from(d: Dir) -> Self {
        match d {
            Dir::Pre => Direction::Pre,
            Dir::Post => Direction::Post,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Soundness,
    Completeness,
}

#[derive(clap::Args)]
struct Inputs {
    #[arg(long)]
    pds: PathBuf,
    #[arg(long)]
    automaton: PathBuf,
}

#[derive(clap::Args)]
struct Solving {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum)]
    direction: Dir,
    /// Cap on constraint applications.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Saturate into A_pre* and emit its constraints.
    Prestar {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Saturate into A_post* and emit its constraints.
    Poststar {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Saturate and compute the least solution.
    Solve {
        #[command(flatten)]
        solving: Solving,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the weight of one configuration, or UNREACHABLE.
    Query {
        #[command(flatten)]
        solving: Solving,
        /// Configuration literal such as "<p: a b>".
        #[arg(long)]
        config: String,
    },
    /// Compare readouts against bounded path enumeration.
    Oracle {
        #[command(flatten)]
        solving: Solving,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Largest stack of the checked configurations.
        #[arg(long, default_value_t = 4)]
        max_stack: usize,
    },
    /// Print the law table of the algebra named in a system file.
    CheckAlgebra {
        #[arg(long)]
        pds: PathBuf,
    },
    /// Run a kill/gen analysis over an ICFG and print one row per node.
    Analyze {
        #[arg(long)]
        icfg: PathBuf,
        #[arg(long, value_enum, default_value = "post")]
        direction: Dir,
        /// Initial configuration, e.g. "<p: main_entry>".
        #[arg(long)]
        init_config: String,
        /// Extra per-stack queries printed after the table.
        #[arg(long)]
        config: Vec<String>,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{file}: {err}")]
    Format { file: String, err: FormatError },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Limit(String),
    #[error("UNREACHABLE")]
    Unreachable,
    #[error("oracle found violations")]
    Violations,
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Unreachable => 1,
            CliError::Format { .. } | CliError::Input(_) => 2,
            CliError::Limit(_) => 3,
            CliError::Violations => 4,
        }
    }
}

fn format_error(file: &Path, err: FormatError) -> CliError {
    CliError::Format {
        file: file.display().to_string(),
        err,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str, out: &mut String) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            out.push_str(text);
            Ok(())
        }
    }
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::IterationLimitExceeded(_) => CliError::Limit(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn saturation_error(file: &Path, e: SaturationError) -> CliError {
    CliError::Input(format!("{}: {e}", file.display()))
}

fn automaton_error(e: AutomatonError) -> CliError {
    CliError::Input(e.to_string())
}

fn solver_config(max_steps: u64, verbose: bool) -> SolverConfig {
    SolverConfig {
        max_applications: usize::try_from(max_steps).unwrap_or(usize::MAX),
        trace_level: if verbose { TraceLevel::Summary } else { TraceLevel::Off },
    }
}

/// Checks that a configuration only uses known locations and symbols.
fn check_config(c: &Configuration, aut: &PAutomaton, symbols: &BTreeSet<flowpds::Symbol>) -> Result<(), CliError> {
    if !aut.initials().contains(&c.loc) {
        return Err(CliError::Input(format!("configuration {c}: unknown control location {}", c.loc)));
    }
    if let Some(s) = c.stack.iter().find(|s| !symbols.contains(*s)) {
        return Err(CliError::Input(format!("configuration {c}: unknown stack symbol {s}")));
    }
    Ok(())
}

fn parse_config_arg(text: &str) -> Result<Configuration, CliError> {
    parse_config(text).map_err(|e| CliError::Input(format!("--config: {e}")))
}

struct Loaded<'a, A: FlowAlgebra> {
    alg: &'a A,
    pds: &'a PushdownSystem<A::Elem>,
    input: PAutomaton,
    automaton_path: &'a Path,
}

impl<A: FlowAlgebra> Loaded<'_, A> {
    fn saturate(&self) -> Result<SaturationResult<A::Elem>, CliError> {
        let res = saturate(self.alg, self.pds, &self.input).map_err(|e| saturation_error(self.automaton_path, e))?;
        log::info!(
            "saturated: {} states, {} transitions, {} constraints",
            res.automaton.states().len(),
            res.automaton.transitions().len(),
            res.constraints.len()
        );
        Ok(res)
    }

    fn solve(&self, config: SolverConfig) -> Result<(SaturationResult<A::Elem>, Solution<A::Elem>), CliError> {
        let res = self.saturate()?;
        let sol = solve_least(self.alg, &res.constraints, config).map_err(solver_error)?;
        Ok((res, sol))
    }

    fn symbols(&self) -> BTreeSet<flowpds::Symbol> {
        let mut s = self.pds.alphabet().clone();
        s.extend(self.input.labels());
        s
    }
}

fn run_loaded<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    command: &Command,
    verbose: bool,
    out: &mut String,
) -> Result<(), CliError> {
    let (inputs, direction) = match command {
        Command::Prestar { inputs, .. } => (inputs, Direction::Pre),
        Command::Poststar { inputs, .. } => (inputs, Direction::Post),
        Command::Solve { solving, .. } | Command::Query { solving, .. } | Command::Oracle { solving, .. } => {
            (&solving.inputs, solving.direction.into())
        }
        Command::CheckAlgebra { .. } | Command::Analyze { .. } => unreachable!("handled without an automaton"),
    };
    let text = read(&inputs.automaton)?;
    let input =
        parse_automaton(&text, direction, pds.locations()).map_err(|e| format_error(&inputs.automaton, e))?;
    let ctx = Loaded {
        alg,
        pds,
        input,
        automaton_path: &inputs.automaton,
    };
    match command {
        Command::Prestar { out: path, constraints, .. } | Command::Poststar { out: path, constraints, .. } => {
            let res = ctx.saturate()?;
            write_or_print(path.as_deref(), &write_automaton(&res.automaton), out)?;
            let cs = write_constraints(alg, &res.constraints);
            match constraints {
                Some(p) => write_or_print(Some(p), &cs, out)?,
                None => {
                    out.push_str("# constraints\n");
                    out.push_str(&cs);
                }
            }
        }
        Command::Solve { solving, out: path } => {
            let (_, sol) = ctx.solve(solver_config(solving.max_steps, verbose))?;
            write_or_print(path.as_deref(), &write_solution(alg, &sol), out)?;
        }
        Command::Query { solving, config } => {
            let c = parse_config_arg(config)?;
            check_config(&c, &ctx.input, &ctx.symbols())?;
            let (res, sol) = ctx.solve(solver_config(solving.max_steps, verbose))?;
            if !res.automaton.accepts(&c).map_err(automaton_error)? {
                out.push_str("UNREACHABLE\n");
                return Err(CliError::Unreachable);
            }
            let w = query(alg, &res.automaton, &sol, &c).map_err(automaton_error)?;
            out.push_str(&format!("{}\n", alg.render(&w)));
        }
        Command::Oracle {
            solving,
            mode,
            depth,
            max_stack,
        } => {
            if *depth == 0 {
                return Err(CliError::Input("--depth must be at least 1".into()));
            }
            let (res, sol) = ctx.solve(solver_config(solving.max_steps, verbose))?;
            let bounds = Bounds {
                depth: *depth,
                max_stack: *max_stack,
            };
            let report = match mode {
                Mode::Soundness => check_soundness(alg, pds, &ctx.input, &res.automaton, &sol, bounds),
                Mode::Completeness => check_completeness(alg, pds, &ctx.input, &res.automaton, &sol, bounds),
            }
            .map_err(|e: OracleError| CliError::Input(e.to_string()))?;
            out.push_str(&report.render());
            if !report.passed() {
                return Err(CliError::Violations);
            }
        }
        Command::CheckAlgebra { .. } | Command::Analyze { .. } => unreachable!(),
    }
    Ok(())
}

fn check_algebra<A: FlowAlgebra>(alg: &A, pds: &PushdownSystem<A::Elem>, out: &mut String) -> Result<(), CliError> {
    let samples: Vec<A::Elem> = pds
        .rules()
        .iter()
        .map(|r| r.weight.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let report = check_laws(alg, Some(&samples)).map_err(|e| CliError::Input(e.to_string()))?;
    out.push_str(&report.render());
    Ok(())
}

fn analyze(
    icfg: &Path,
    direction: Direction,
    init: &str,
    configs: &[String],
    config: SolverConfig,
    out: &mut String,
) -> Result<(), CliError> {
    let g = parse_icfg(&read(icfg)?).map_err(|e| format_error(icfg, e))?;
    let (alg, pds) = encode_icfg(&g).map_err(|e| match e {
        EncodeError::Format(err) => format_error(icfg, err),
        other => CliError::Input(format!("{}: {other}", icfg.display())),
    })?;
    let start = parse_config(init).map_err(|e| CliError::Input(format!("--init-config: {e}")))?;
    let [top] = start.stack.as_slice() else {
        return Err(CliError::Input(format!("--init-config {start}: expected exactly one stack symbol")));
    };
    if start.loc.as_str() != LOCATION || !pds.alphabet().contains(top) {
        return Err(CliError::Input(format!("--init-config {start}: unknown location or node")));
    }
    let input = PAutomaton::new(
        direction,
        [StateId::new(LOCATION)],
        [],
        [StateId::new("accept")],
        [Transition::new(LOCATION, Some(top.as_str()), "accept")],
    )
    .map_err(automaton_error)?;
    let res = saturate(&alg, &pds, &input).map_err(|e| CliError::Input(e.to_string()))?;
    let sol = solve_least(&alg, &res.constraints, config).map_err(solver_error)?;
    let report = analysis_report(&alg, &g, &res.automaton, &sol);
    out.push_str(&render_report(&alg, &report));
    for text in configs {
        let c = parse_config_arg(text)?;
        check_config(&c, &input, pds.alphabet())?;
        let value = if res.automaton.accepts(&c).map_err(automaton_error)? {
            alg.render(&query(&alg, &res.automaton, &sol, &c).map_err(automaton_error)?)
        } else {
            "unreachable".to_string()
        };
        out.push_str(&format!("{c} {value}\n"));
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut String) -> Result<(), CliError> {
    match &cli.command {
        Command::Analyze {
            icfg,
            direction,
            init_config,
            config,
            max_steps,
        } => analyze(
            icfg,
            (*direction).into(),
            init_config,
            config,
            solver_config(*max_steps, cli.verbose),
            out,
        ),
        Command::CheckAlgebra { pds } => {
            let loaded = parse_pds(&read(pds)?).map_err(|e| format_error(pds, e))?;
            with_loaded!(&loaded, |alg, sys| check_algebra(alg, sys, out))
        }
        other => {
            let path = match other {
                Command::Prestar { inputs, .. } | Command::Poststar { inputs, .. } => &inputs.pds,
                Command::Solve { solving, .. } | Command::Query { solving, .. } | Command::Oracle { solving, .. } => {
                    &solving.inputs.pds
                }
                _ => unreachable!(),
            };
            let loaded = parse_pds(&read(path)?).map_err(|e| format_error(path, e))?;
            with_loaded!(&loaded, |alg, sys| run_loaded(alg, sys, other, cli.verbose, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let summary: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.is_empty() && !l.starts_with("Usage:"))
                .collect();
            eprintln!("error: {}", summary.join(" ").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn })
        .parse_default_env()
        .init();
    let mut out = String::new();
    let result = run(&cli, &mut out);
    print!("{out}");
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Unreachable | CliError::Violations) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
