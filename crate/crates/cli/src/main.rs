//! `sevleague`: rank optimizers from a run-results CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use severity_league::benchgen::{generate_matrix, HeuristicSpec, ProblemKind, ProblemSpec};
use severity_league::report::{self, emit, Format, NamedCurve, ReportBundle};
use severity_league::sensitivity::{sweep_tournament, DEFAULT_DELTA_PS, DEFAULT_SEVERITIES};
use severity_league::{
    load_runs, validate, BhScope, Error, ErrorKind, LeagueTable, RankingConfig, RunMatrix,
    Tournament,
};

const EXIT_CODES: &str = "\
Exit status:
  0  success
  1  configuration error (bad or missing flag, value out of range)
  2  data error (malformed input, incomplete design, unknown comparison)
  3  I/O error
Failures print one line to stderr: `error: <config|data|io>: <reason>`.";

#[derive(Parser)]
#[command(name = "sevleague", version, about = "Severity-based league ranking of stochastic optimizers")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true, env = "SEVLEAGUE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tournament and write the league reports.
    #[command(after_help = EXIT_CODES)]
    Rank(RankArgs),
    /// Re-score one tournament over grids of severity and δ_p.
    #[command(after_help = EXIT_CODES)]
    Sensitivity(SensitivityArgs),
    /// Generate a run CSV from textbook heuristics on OneMax / LeadingOnes.
    #[command(after_help = EXIT_CODES)]
    Generate(GenerateArgs),
    /// Write the severity curve of one comparison.
    #[command(after_help = EXIT_CODES)]
    Curves(CurvesArgs),
    /// Print the tool version.
    Version,
}

#[derive(Args)]
struct Common {
    /// Run CSV with header `algorithm,problem,run,value` (lower is better).
    #[arg(long)]
    input: PathBuf,
    /// Significance level of each one-sided test.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Desired severity S.
    #[arg(long, default_value_t = 0.8)]
    severity: f64,
    /// Bootstrap replicates per comparison.
    #[arg(long, default_value_t = 10_000)]
    resamples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// BH family: `global` or `per-problem`.
    #[arg(long, default_value = "global")]
    bh_scope: BhScope,
    /// Evaluation budget; empty values are read as the budget.
    #[arg(long)]
    budget: Option<f64>,
    /// Reject values above --budget instead of capping them.
    #[arg(long)]
    no_cap: bool,
}

impl Common {
    fn config(&self, delta_p: f64) -> RankingConfig {
        RankingConfig {
            alpha: self.alpha,
            severity: self.severity,
            delta_p,
            resamples: self.resamples,
            seed: self.seed,
            bh_scope: self.bh_scope,
            budget: self.budget,
            cap_to_budget: !self.no_cap,
        }
    }
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    common: Common,
    /// Practical relevance threshold δ_p, in the units of the run values.
    #[arg(long)]
    delta_p: Option<f64>,
    #[arg(long, default_value = "sevleague-report")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv,markdown")]
    formats: Vec<Format>,
    /// Also write the severity curve of CANDIDATE,OPPONENT,PROBLEM.
    #[arg(long, value_name = "CANDIDATE,OPPONENT,PROBLEM")]
    curve: Vec<String>,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
}

#[derive(Args)]
struct SensitivityArgs {
    #[command(flatten)]
    common: Common,
    /// δ_p of the reference table that rank changes are measured against.
    #[arg(long)]
    delta_p: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEVERITIES)]
    severity_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_DELTA_PS)]
    delta_p_list: Vec<f64>,
    #[arg(long, default_value = "sevleague-sensitivity")]
    out: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    formats: Vec<Format>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Problems, comma separated: onemax, leadingones.
    #[arg(long, value_delimiter = ',', required = true)]
    problem: Vec<ProblemKind>,
    #[arg(long)]
    dimension: usize,
    /// Fitness to reach; defaults to the optimum.
    #[arg(long)]
    target: Option<usize>,
    /// Heuristics, comma separated; `one_plus_one_ea:RATE` sets the mutation rate.
    #[arg(long, value_delimiter = ',', default_value = "rls,one_plus_one_ea,random_search")]
    algorithms: Vec<HeuristicSpec>,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, default_value_t = 50_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurvesArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "CANDIDATE,OPPONENT")]
    pair: String,
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 101)]
    grid_points: usize,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    kind: ErrorKind,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        kind: ErrorKind::Config,
        message: message.into(),
    }
}

fn require_delta_p(delta_p: Option<f64>) -> Result<f64, Failure> {
    delta_p.ok_or_else(|| config_error("missing required flag --delta-p"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(config_error(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, class) = match f.kind {
                ErrorKind::Config => (1, "config"),
                ErrorKind::Data => (2, "data"),
                ErrorKind::Io => (3, "io"),
            };
            eprintln!("error: {class}: {}", f.message.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Rank(args) => rank(args),
        Command::Sensitivity(args) => sensitivity(args),
        Command::Generate(args) => generate(args),
        Command::Curves(args) => curves(args),
        Command::Version => {
            println!("sevleague {}", report::TOOL_VERSION);
            Ok(())
        }
    }
}

/// Validates the config before touching the input, so that flag errors win
/// over data errors.
fn load(common: &Common, config: &RankingConfig) -> Result<RunMatrix, Failure> {
    config.validate()?;
    let matrix = load_runs(&common.input, config).map_err(|e| {
        let mut f = Failure::from(e);
        if f.kind == ErrorKind::Io {
            f.message = format!("{}: {}", common.input.display(), f.message);
        }
        f
    })?;
    for d in validate(&matrix) {
        eprintln!("{d}");
    }
    Ok(matrix)
}

fn split_list(raw: &str, n: usize, what: &str) -> Result<Vec<String>, Failure> {
    let parts: Vec<String> = raw.split(',').map(|p| p.trim().to_string()).collect();
    if parts.len() != n || parts.iter().any(|p| p.is_empty()) {
        return Err(config_error(format!("{what}: expected {n} comma-separated names, got '{raw}'")));
    }
    Ok(parts)
}

fn rank(args: RankArgs) -> Result<(), Failure> {
    let config = args.common.config(require_delta_p(args.delta_p)?);
    let curve_specs = args
        .curve
        .iter()
        .map(|c| split_list(c, 3, "--curve"))
        .collect::<Result<Vec<_>, _>>()?;
    let matrix = load(&args.common, &config)?;

    let tournament = Tournament::evaluate(&matrix, &config)?;
    let mut bundle = ReportBundle::new(&matrix, &config, tournament.outcomes()?)?;
    for spec in &curve_specs {
        bundle.curves.push(NamedCurve::from_tournament(
            &tournament,
            &spec[0],
            &spec[1],
            &spec[2],
            args.grid_points,
        )?);
    }
    emit(&bundle, &args.out, &args.formats)?;
    print_table(&bundle.league)?;
    Ok(())
}

/// The league on standard output, with the fields of `league.csv` aligned
/// in columns.
fn print_table(table: &LeagueTable) -> std::io::Result<()> {
    let header = ["rank", "algorithm", "points", "gd", "points_mean", "points_sd"].map(String::from);
    let rows: Vec<[String; 6]> = std::iter::once(header)
        .chain(table.rows.iter().map(report::league_fields))
        .collect();
    let mut widths = [0usize; 6];
    for row in &rows {
        for (w, f) in widths.iter_mut().zip(row) {
            *w = (*w).max(f.chars().count());
        }
    }
    let mut out = std::io::stdout().lock();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (f, w))| if i == 1 { format!("{f:<w$}") } else { format!("{f:>w$}") })
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end())?;
    }
    Ok(())
}

fn sensitivity(args: SensitivityArgs) -> Result<(), Failure> {
    let config = args.common.config(require_delta_p(args.delta_p)?);
    if args.formats.is_empty() {
        return Err(config_error("no output format selected"));
    }
    let matrix = load(&args.common, &config)?;

    let tournament = Tournament::evaluate(&matrix, &config)?;
    let grid = sweep_tournament(&tournament, &args.severity_list, &args.delta_p_list)?;

    std::fs::create_dir_all(args.out.join("tables"))?;
    std::fs::write(args.out.join("sensitivity.csv"), grid.to_csv_string())?;
    for cell in &grid.cells {
        let stem = format!("league_s{}_dp{}", cell.severity, cell.delta_p);
        if args.formats.contains(&Format::Csv) {
            write_file(&args.out.join("tables").join(format!("{stem}.csv")), &report::league_csv(&cell.table))?;
        }
        if args.formats.contains(&Format::Markdown) {
            let cell_config = RankingConfig {
                severity: cell.severity,
                delta_p: cell.delta_p,
                ..config.clone()
            };
            let bundle = ReportBundle::new(&matrix, &cell_config, cell.outcomes.clone())?;
            write_file(&args.out.join("tables").join(format!("{stem}.md")), &bundle.league_markdown())?;
        }
    }

    let mut base = ReportBundle::new(&matrix, &config, tournament.outcomes()?)?;
    let notes = &mut base.metadata.notes;
    notes.push(format!("severity grid: {:?}", grid.severities));
    notes.push(format!("delta_p grid: {:?}", grid.delta_ps));
    if grid.reordered_input {
        notes.push("grid lists were sorted ascending and deduplicated".into());
    }
    write_file(&args.out.join("metadata.json"), &base.metadata_json())?;
    Ok(())
}

fn write_file(path: &Path, body: &str) -> Result<(), Failure> {
    std::fs::write(path, body)?;
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let target = args.target.unwrap_or(args.dimension);
    let problems = args
        .problem
        .iter()
        .map(|&kind| ProblemSpec::new(kind, args.dimension, target))
        .collect::<Result<Vec<_>, _>>()?;
    if args.budget == 0 {
        return Err(config_error("--budget must be >= 1"));
    }
    let matrix = generate_matrix(&problems, &args.algorithms, args.runs, args.budget, args.seed)?;
    let csv = matrix.to_csv_string();
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn curves(args: CurvesArgs) -> Result<(), Failure> {
    let pair = split_list(&args.pair, 2, "--pair")?;
    // δ_p does not enter the curve; any valid value will do
    let config = args.common.config(RankingConfig::default().delta_p);
    let matrix = load(&args.common, &config)?;

    let tournament = Tournament::evaluate(&matrix, &config)?;
    let named = NamedCurve::from_tournament(&tournament, &pair[0], &pair[1], &args.problem, args.grid_points)?;
    let mut body = String::new();
    for c in named.header_comments() {
        body.push_str(&format!("# {c}\n"));
    }
    body.push_str(&named.curve.to_csv_string());
    match &args.out {
        Some(path) => write_file(path, &body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}
