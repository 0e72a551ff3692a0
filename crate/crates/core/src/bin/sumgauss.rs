use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use sumgauss::analysis::{
    bench, convergence_table, max_deviation, ScanGrid, TDistribution, T0,
};
use sumgauss::approx::{envelope_range, shenton_bounds, LEADING_K};
use sumgauss::continuum::{p_sq_continuum, p_sq_series};
use sumgauss::fit::{fit_nodes, fit_random, half_step_table, FitConfig};
use sumgauss::paramfile::{parse_inline, ParamFile, ParamMeta};
use sumgauss::{bounds, p_exact, BoundTable, Error, ParameterSet, Scheme};

#[derive(Parser, Debug)]
#[command(name = "sumgauss", version, about = "Sum-of-Gaussians approximation of P(t) = erf(t/sqrt(2))")]
struct Cli {
    /// Output format (default json; `table` defaults to csv)
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for fit/scan/table; never changes results
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the approximation and/or the exact value
    Eval(EvalArgs),
    /// Interval bounds for a binary or ternary scheme
    Bounds(BoundsArgs),
    /// Fit width parameters
    Fit(FitArgs),
    /// Sup-norm error of a parameter set
    Scan(ScanArgs),
    /// Upper-boundary deviations at t0 for a range of depths
    Table(TableArgs),
    /// Time the approximation against the exact evaluation
    Bench(BenchArgs),
    /// Continuum-limit integral and truncated series
    Continuum(ContinuumArgs),
    /// Side-by-side comparison of all approximations on a t-grid
    Compare(CompareArgs),
}

#[derive(Args, Debug, Clone, Copy)]
struct GridArgs {
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 8.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1.0 / 512.0)]
    step: f64,
}

impl GridArgs {
    fn grid(&self) -> Result<ScanGrid, Error> {
        ScanGrid::new(self.t_min, self.t_max, self.step)
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Parameter file path, or inline `k=..[;w=..]`
    #[arg(long)]
    params: Option<String>,
    /// Evaluate the exact P(t)
    #[arg(long)]
    exact: bool,
    /// A value `t`, or a range `a..b` / `a..b:step` (default step 0.125)
    #[arg(long)]
    t: String,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long)]
    base: u32,
    #[arg(long)]
    depth: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Nodes,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TableKind {
    /// Uniform `base^depth` partition
    Scheme,
    /// Three intervals: lower binary interval kept, upper one split
    HalfStep,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long, default_value_t = 1)]
    depth: u32,
    #[arg(long, value_enum, default_value_t = TableKind::Scheme)]
    table: TableKind,
    /// `uniform` or comma-separated weights
    #[arg(long, default_value = "uniform")]
    weights: String,
    #[arg(long, value_enum, default_value_t = Method::Random)]
    method: Method,
    /// Comma-separated node abscissae (node method)
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long, default_value_t = 4096)]
    iters: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Local search budget after the random phase
    #[arg(long, default_value_t = 20_000)]
    refine_iters: u64,
    #[arg(long)]
    no_refine: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    params: String,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    base: u32,
    /// Inclusive depth range `a..b`
    #[arg(long)]
    p_range: String,
    #[arg(long, default_value_t = T0)]
    t0: f64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    params: String,
    /// Evaluations per function (accepts `1e7`)
    #[arg(long, default_value = "1e7")]
    n: String,
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 8.0)]
    t_max: f64,
}

#[derive(Args, Debug)]
struct ContinuumArgs {
    #[arg(long)]
    t: f64,
    /// Number of series terms
    #[arg(long)]
    series: Option<u32>,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Extra parameter set (file or inline) added as the last column
    #[arg(long)]
    params: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    t_min: f64,
    #[arg(long, default_value_t = 4.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.25)]
    step: f64,
}

/// Failures from a subcommand, mapped onto exit codes.
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| usage(format!("bad number '{v}': {e}"))))
        .collect()
}

fn load_params(spec: &str) -> Result<ParameterSet, Failure> {
    let path = Path::new(spec);
    if path.is_file() {
        Ok(ParamFile::read(path)?.to_params()?)
    } else if spec.contains('=') {
        Ok(parse_inline(spec)?)
    } else {
        Err(Failure::Domain(format!("'{spec}' is neither a parameter file nor inline k=...")))
    }
}

fn parse_t(spec: &str) -> Result<Vec<f64>, Failure> {
    let Some((a, rest)) = spec.split_once("..") else {
        return Ok(vec![spec.trim().parse().map_err(|e| usage(format!("bad t '{spec}': {e}")))?]);
    };
    let (b, step) = match rest.split_once(':') {
        Some((b, s)) => (b, s.parse::<f64>().map_err(|e| usage(format!("bad step: {e}")))?),
        None => (rest, 0.125),
    };
    let a: f64 = a.trim().parse().map_err(|e| usage(format!("bad range start: {e}")))?;
    let b: f64 = b.trim().parse().map_err(|e| usage(format!("bad range end: {e}")))?;
    Ok(ScanGrid::new(a, b, step)?.points())
}

fn parse_depths(spec: &str) -> Result<std::ops::RangeInclusive<u32>, Failure> {
    let (a, b) = spec
        .split_once("..")
        .ok_or_else(|| usage(format!("expected a..b, got '{spec}'")))?;
    let a: u32 = a.trim().parse().map_err(|e| usage(format!("bad depth: {e}")))?;
    let b: u32 = b.trim().parse().map_err(|e| usage(format!("bad depth: {e}")))?;
    if b < a {
        return Err(usage(format!("empty depth range {a}..{b}")));
    }
    Ok(a..=b)
}

/// Writes one line to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}") {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: cannot write output: {e}");
        std::process::exit(1);
    }
}

fn print_json<T: Serialize>(value: &T) {
    emit(&serde_json::to_string_pretty(value).expect("serializable output"));
}

/// Rows of numbers as CSV (Display gives the shortest round-trip form).
fn print_csv(header: &[&str], rows: &[Vec<f64>]) {
    emit(&header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        emit(&cells.join(","));
    }
}

fn print_rows(format: Format, header: &[&str], rows: &[Vec<f64>]) {
    match format {
        Format::Csv => print_csv(header, rows),
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| header.iter().map(|h| h.to_string()).zip(r.iter().map(|v| json!(v))).collect())
                .collect();
            print_json(&objs);
        }
    }
}

fn cmd_eval(args: &EvalArgs, format: Format) -> CmdResult {
    if args.params.is_none() && !args.exact {
        return Err(usage("eval needs --params and/or --exact"));
    }
    let params = args.params.as_deref().map(load_params).transpose()?;
    let ts = parse_t(&args.t)?;
    let mut header = vec!["t"];
    if params.is_some() {
        header.push("p_approx");
    }
    if args.exact {
        header.push("p_exact");
    }
    if params.is_some() && args.exact {
        header.push("deviation");
    }
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let mut row = vec![t];
        let approx = match &params {
            Some(p) => Some(sumgauss::p_approx(p, t)?.value()),
            None => None,
        };
        row.extend(approx);
        if args.exact {
            let exact = p_exact(t)?.value();
            row.push(exact);
            if let Some(a) = approx {
                row.push(a - exact);
            }
        }
        rows.push(row);
    }
    print_rows(format, &header, &rows);
    Ok(())
}

fn cmd_bounds(args: &BoundsArgs, format: Format) -> CmdResult {
    let scheme = Scheme::new(args.base, args.depth)?;
    let table = bounds(scheme);
    match format {
        Format::Json => {
            let intervals: Vec<_> = table
                .intervals()
                .iter()
                .enumerate()
                .map(|(i, iv)| json!({ "n": i + 1, "k_min": iv.lo, "k_max": iv.hi }))
                .collect();
            print_json(&json!({
                "base": args.base,
                "depth": args.depth,
                "n": table.len(),
                "endpoints": table.endpoints(),
                "intervals": intervals,
            }));
        }
        Format::Csv => {
            let rows: Vec<Vec<f64>> = table
                .intervals()
                .iter()
                .enumerate()
                .map(|(i, iv)| vec![(i + 1) as f64, iv.lo, iv.hi])
                .collect();
            print_csv(&["n", "k_min", "k_max"], &rows);
        }
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs, format: Format) -> CmdResult {
    let (table, scheme): (BoundTable, Option<Scheme>) = match args.table {
        TableKind::Scheme => {
            let s = Scheme::new(args.base, args.depth)?;
            (bounds(s), Some(s))
        }
        TableKind::HalfStep => (half_step_table(), None),
    };
    let weights = if args.weights == "uniform" {
        vec![1.0 / table.len() as f64; table.len()]
    } else {
        parse_list(&args.weights)?
    };
    let grid = args.grid.grid()?;
    let (params, report) = match args.method {
        Method::Nodes => {
            let nodes = args
                .nodes
                .as_deref()
                .ok_or_else(|| usage("--method nodes requires --nodes"))?;
            let params = fit_nodes(&table, &weights, &parse_list(nodes)?)?;
            let report = max_deviation(&params, &grid)?;
            (params, report)
        }
        Method::Random => {
            let config = FitConfig {
                nodes: None,
                grid,
                iterations: args.iters,
                seed: args.seed,
                refine: !args.no_refine,
                refine_iterations: args.refine_iters,
            };
            fit_random(&table, &weights, &config)?
        }
    };
    let mut file = ParamFile::from_params(&params);
    file.meta = Some(ParamMeta {
        scheme,
        method: Some(format!("{:?}", args.method).to_lowercase()),
        seed: (args.method == Method::Random).then_some(args.seed),
        iterations: (args.method == Method::Random).then_some(args.iters),
    });
    file.report = Some(report);
    match format {
        Format::Json => emit(&file.to_json()),
        Format::Csv => {
            let rows: Vec<Vec<f64>> = params
                .widths()
                .iter()
                .zip(params.weights())
                .enumerate()
                .map(|(i, (k, w))| vec![(i + 1) as f64, *k, *w])
                .collect();
            print_csv(&["n", "k", "w"], &rows);
        }
    }
    Ok(())
}

fn cmd_scan(args: &ScanArgs, format: Format) -> CmdResult {
    let params = load_params(&args.params)?;
    let report = max_deviation(&params, &args.grid.grid()?)?;
    match format {
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["max_abs_dev", "argmax_t", "grid_max_abs_dev", "grid_argmax_t"],
            &[vec![report.max_abs_dev, report.argmax_t, report.grid_max_abs_dev, report.grid_argmax_t]],
        ),
    }
    Ok(())
}

fn cmd_table(args: &TableArgs, format: Format) -> CmdResult {
    let rows = convergence_table(args.base, parse_depths(&args.p_range)?, args.t0)?;
    match format {
        Format::Json => print_json(&rows),
        Format::Csv => {
            let rows: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![r.p as f64, r.n as f64, r.abs_deviation, r.deviation])
                .collect();
            print_csv(&["p", "N", "abs_deviation", "deviation"], &rows);
        }
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs, format: Format) -> CmdResult {
    let params = load_params(&args.params)?;
    let n: f64 = args.n.parse().map_err(|e| usage(format!("bad --n: {e}")))?;
    if !(n.is_finite() && n >= 0.0 && n.fract() == 0.0) {
        return Err(usage(format!("--n must be a whole number, got {}", args.n)));
    }
    let report = bench(&params, n as u64, TDistribution::Uniform { lo: args.t_min, hi: args.t_max })?;
    if report.unstable {
        eprintln!("warning: fewer than 1e5 evaluations; timings are not stable");
    }
    match format {
        Format::Json => print_json(&report),
        Format::Csv => print_csv(
            &["n_terms", "n_evals", "ns_per_eval_approx", "ns_per_eval_exact", "speedup"],
            &[vec![
                report.n_terms as f64,
                report.n_evals as f64,
                report.ns_per_eval_approx,
                report.ns_per_eval_exact,
                report.speedup,
            ]],
        ),
    }
    Ok(())
}

fn cmd_continuum(args: &ContinuumArgs, format: Format) -> CmdResult {
    let integral = p_sq_continuum(args.t)?;
    let exact = p_exact(args.t)?.value();
    let series = args.series.map(|n| p_sq_series(args.t, n)).transpose()?;
    match format {
        Format::Json => print_json(&json!({
            "t": args.t,
            "integral": integral,
            "p_exact_sq": exact * exact,
            "series_terms": args.series,
            "series": series,
        })),
        Format::Csv => {
            let mut header = vec!["t", "integral", "p_exact_sq"];
            let mut row = vec![args.t, integral, exact * exact];
            if let Some(s) = series {
                header.extend(["series", "bound"]);
                row.extend([s.value, s.bound]);
            }
            print_csv(&header, &[row]);
        }
    }
    Ok(())
}

fn cmd_compare(args: &CompareArgs, format: Format) -> CmdResult {
    let extra = args.params.as_deref().map(load_params).transpose()?;
    let grid = ScanGrid::new(args.t_min, args.t_max, args.step)?;
    let mut header = vec![
        "t",
        "p_exact",
        "leading_1116",
        "envelope_lower",
        "envelope_upper",
        "shenton_lower",
        "shenton_upper",
    ];
    if extra.is_some() {
        header.push("params");
    }
    let mut rows = Vec::with_capacity(grid.len());
    for t in grid.points() {
        let env = envelope_range(t)?;
        let (sl, su) = shenton_bounds(t)?;
        let mut row = vec![
            t,
            p_exact(t)?.value(),
            sumgauss::p_leading(LEADING_K, t)?.value(),
            env.lower,
            env.upper,
            sl,
            su,
        ];
        if let Some(p) = &extra {
            row.push(sumgauss::p_approx(p, t)?.value());
        }
        rows.push(row);
    }
    print_rows(format, &header, &rows);
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    let json = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Eval(a) => cmd_eval(a, json),
        Command::Bounds(a) => cmd_bounds(a, json),
        Command::Fit(a) => cmd_fit(a, json),
        Command::Scan(a) => cmd_scan(a, json),
        Command::Table(a) => cmd_table(a, cli.format.unwrap_or(Format::Csv)),
        Command::Bench(a) => cmd_bench(a, json),
        Command::Continuum(a) => cmd_continuum(a, json),
        Command::Compare(a) => cmd_compare(a, json),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli)),
            Err(e) => Err(usage(format!("cannot build thread pool: {e}"))),
        },
        None => run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
