//! Command-line definitions and dispatch.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rrmcv_core::design::{design_limits, DesignSpec, DesignedChart, Side, DEFAULT_ARL0};
use rrmcv_core::monitor::{gamma_hat, run_signal, SignalReport};
use rrmcv_core::perf::{
    delta_index_with, earl_with, perf_at_shift, shewhart_baseline, side_for_shift, DeltaBase, EarlMethod,
};
use rrmcv_core::simulate::{mc_accumulate, McAccumulator, SimConfig, SimMethod};
use rrmcv_core::{moments, ChartParams, RunRule};
use serde_json::{json, Value};

use crate::error::{exit, CliError};
use crate::ingest::{read_gamma_column, read_subgroups};
use crate::report::{Cell, Format, Table};
use crate::tables::{build_table, parse_range, parse_rule, Subset, TableOptions};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "RRMCV_THREADS";

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  2  invalid arguments or input files
  3  numerical failure (non-convergence, degenerate data, overflow)
  4  an expectation flag was not met (e.g. --expect-signal without a signal)

Set RRMCV_THREADS to limit the worker threads used by `tables` and `simulate`.";

#[derive(Debug, Parser)]
#[command(name = "rrmcv", version, about = "Run-rules control charts for the multivariate coefficient of variation")]
#[command(after_help = EXIT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Control limit(s) for a target in-control ARL.
    Design(DesignArgs),
    /// ARL and SDRL after a shift of the MCV.
    Perf(PerfArgs),
    /// ARL and SDRL averaged over a range of shifts.
    Earl(EarlArgs),
    /// Reproduce the published table grids as CSV or JSON.
    Tables(TablesArgs),
    /// Apply run-rules charts to Phase II data.
    Monitor(MonitorArgs),
    /// Monte Carlo run lengths for a rule and in-control probability.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChartArgs {
    /// Subgroup size.
    #[arg(long)]
    pub n: u32,
    /// Number of quality variables.
    #[arg(long = "p")]
    pub p: u32,
    /// In-control MCV.
    #[arg(long)]
    pub gamma0: f64,
    /// Run rule as r/s, e.g. 2/3; 1/1 is the Shewhart chart.
    #[arg(long)]
    pub rule: String,
    /// Target in-control ARL.
    #[arg(long, default_value_t = DEFAULT_ARL0)]
    pub arl0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Lower,
    Upper,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Lower => Side::Lower,
            SideArg::Upper => Side::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeltaBaseArg {
    /// 100 (baseline - candidate) / candidate
    Candidate,
    /// 100 (baseline - candidate) / baseline
    Baseline,
}

impl From<DeltaBaseArg> for DeltaBase {
    fn from(d: DeltaBaseArg) -> DeltaBase {
        match d {
            DeltaBaseArg::Candidate => DeltaBase::Candidate,
            DeltaBaseArg::Baseline => DeltaBase::Baseline,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Equally weighted shifts a, a + step, ..., b, skipping tau = 1.
    Grid,
    /// Gauss-Legendre quadrature.
    Gl,
}

#[derive(Debug, Clone, Args)]
pub struct EarlMethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Grid)]
    pub method: MethodArg,
    /// Grid spacing for --method grid.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// Node count for --method gl.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
}

impl EarlMethodArgs {
    fn method(&self) -> Result<EarlMethod, CliError> {
        match self.method {
            MethodArg::Grid if self.step > 0.0 && self.step.is_finite() => Ok(EarlMethod::ShiftGrid { step: self.step }),
            MethodArg::Grid => Err(CliError::Args("--step must be positive".into())),
            MethodArg::Gl if self.nodes > 0 => Ok(EarlMethod::GaussLegendre { nodes: self.nodes }),
            MethodArg::Gl => Err(CliError::Args("--nodes must be at least 1".into())),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    #[arg(long, value_enum, conflicts_with = "both_sides", required_unless_present = "both_sides")]
    pub side: Option<SideArg>,
    /// Print the (LCL, UCL) pair.
    #[arg(long)]
    pub both_sides: bool,
    /// Round limits to three decimals, as printed in the published tables.
    #[arg(long)]
    pub paper_rounding: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct PerfArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    /// Shift multiplier(s); the lower chart is used below 1, the upper one otherwise.
    #[arg(long, value_delimiter = ',', required = true)]
    pub tau: Vec<f64>,
    #[arg(long, value_enum, default_value_t = DeltaBaseArg::Candidate)]
    pub delta_base: DeltaBaseArg,
    /// Round ARL and SDRL to one decimal.
    #[arg(long)]
    pub paper_rounding: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct EarlArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    /// D for [0.5,1), I for (1,2], or a,b. Repeatable; defaults to both.
    #[arg(long)]
    pub range: Vec<String>,
    #[command(flatten)]
    pub method: EarlMethodArgs,
    #[arg(long, value_enum, default_value_t = DeltaBaseArg::Candidate)]
    pub delta_base: DeltaBaseArg,
    #[arg(long)]
    pub paper_rounding: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    /// 1 limits; 2-4 ARL/SDRL for p = 2, 3, 4; 5 Delta_A; 6 Delta_E; 7 EARL/ESDRL.
    #[arg(long)]
    pub table: u8,
    /// Restrict the grid, e.g. "p=2,gamma0=0.1,rule=2/3".
    #[arg(long)]
    pub subset: Option<String>,
    /// Write here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ARL0)]
    pub arl0: f64,
    #[command(flatten)]
    pub method: EarlMethodArgs,
    #[arg(long, value_enum, default_value_t = DeltaBaseArg::Baseline)]
    pub delta_base: DeltaBaseArg,
    #[arg(long)]
    pub paper_rounding: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct MonitorArgs {
    /// Phase II CSV (summary or raw layout).
    #[arg(long)]
    pub input: PathBuf,
    /// Read plotted values from this column instead of computing them.
    #[arg(long, conflicts_with = "recompute")]
    pub gamma_col: Option<String>,
    /// Compute the sample MCVs even when a gamma_hat column is present.
    #[arg(long)]
    pub recompute: bool,
    /// Run rule(s) as r/s. Repeatable.
    #[arg(long, required = true)]
    pub rule: Vec<String>,
    /// Control limit, once for all rules or once per rule.
    #[arg(long)]
    pub limit: Vec<f64>,
    /// Design the limits for this in-control MCV instead of passing --limit.
    #[arg(long, conflicts_with = "limit")]
    pub gamma0: Option<f64>,
    /// Subgroup size for designed limits.
    #[arg(long)]
    pub n: Option<u32>,
    /// Number of variables for designed limits; taken from the data if absent.
    #[arg(long = "p")]
    pub p: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_ARL0)]
    pub arl0: f64,
    #[arg(long, value_enum, default_value_t = SideArg::Upper)]
    pub side: SideArg,
    /// Exit with code 4 unless every rule signals.
    #[arg(long)]
    pub expect_signal: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    /// Write plot data (t,gamma_hat,limit,flagged). With several rules the
    /// rule is appended to the file stem.
    #[arg(long)]
    pub plot_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimMethodArg {
    Batched,
    Step,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub rule: String,
    /// Probability that a point stays inside the limit.
    #[arg(long)]
    pub p_in: f64,
    #[arg(long, default_value_t = 100_000)]
    pub replications: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SimMethodArg::Batched)]
    pub method: SimMethodArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Runs the CLI on `args`, writing to `out` and `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::ARGS } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = dispatch(&cli.command, out);
    match result {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs `f` on a pool sized by `RRMCV_THREADS`, or the global pool.
fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        _ => f(),
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Design(a) => cmd_design(a, out),
        Command::Perf(a) => cmd_perf(a, out),
        Command::Earl(a) => cmd_earl(a, out),
        Command::Tables(a) => cmd_tables(a, out),
        Command::Monitor(a) => cmd_monitor(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
    }
}

#[derive(Clone, Copy)]
struct Chart {
    params: ChartParams,
    rule: RunRule,
    arl0: f64,
}

impl ChartArgs {
    fn resolve(&self) -> Result<Chart, CliError> {
        let rule = parse_rule(&self.rule)?;
        let params = ChartParams::new(self.n, self.p, self.gamma0)
            .map_err(|e| CliError::core(format!("--n {} --p {} --gamma0 {}", self.n, self.p, self.gamma0), e))?;
        if !(self.arl0 > 1.0 && self.arl0.is_finite()) {
            return Err(CliError::Args(format!("--arl0 must be finite and above 1, got {}", self.arl0)));
        }
        Ok(Chart { params, rule, arl0: self.arl0 })
    }
}

impl Chart {
    fn design(&self, side: Side) -> Result<DesignedChart, CliError> {
        let spec = DesignSpec::new(self.params, self.rule, self.arl0).map_err(|e| CliError::core("--arl0", e))?;
        design_limits(&spec, side).map_err(|e| CliError::core(format!("designing the {side} chart"), e))
    }

    fn key_cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.params.n().into()),
            Cell::Int(self.params.p_dim().into()),
            Cell::Num(self.params.gamma0(), 6),
            Cell::text(self.rule),
            Cell::Num(self.arl0, 1),
        ]
    }
}

fn cmd_design(a: &DesignArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let chart = a.chart.resolve()?;
    if a.both_sides {
        let lo = chart.design(Side::Lower)?;
        let hi = chart.design(Side::Upper)?;
        let mut t = Table::new(vec!["n", "p", "gamma0", "rule", "arl0", "lcl", "ucl", "p_in_star"]);
        let mut row = chart.key_cells();
        row.extend([Cell::Num(lo.limit, 3), Cell::Num(hi.limit, 3), Cell::Num(lo.p_in_star, 12)]);
        t.push(row);
        return t.write(out, a.format, a.paper_rounding, &["lcl", "ucl"]);
    }
    let side: Side = a.side.expect("clap requires --side without --both-sides").into();
    let d = chart.design(side)?;
    let mut t = Table::new(vec!["n", "p", "gamma0", "rule", "arl0", "side", "limit", "p_in_star"]);
    let mut row = chart.key_cells();
    row.extend([Cell::text(side), Cell::Num(d.limit, 3), Cell::Num(d.p_in_star, 12)]);
    t.push(row);
    t.write(out, a.format, a.paper_rounding, &["limit"])
}

fn cmd_perf(a: &PerfArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let chart = a.chart.resolve()?;
    let mut designed: [Option<DesignedChart>; 2] = [None, None];
    let mut t = Table::new(vec![
        "n", "p", "gamma0", "rule", "arl0", "tau", "side", "limit", "arl1", "sdrl1", "arl_shewhart", "delta_a",
    ]);
    for &tau in &a.tau {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(CliError::Args(format!("--tau must be positive, got {tau}")));
        }
        let side = side_for_shift(tau);
        let slot = &mut designed[side as usize];
        if slot.is_none() {
            *slot = Some(chart.design(side)?);
        }
        let d = slot.as_ref().expect("designed above");
        let rep = perf_at_shift(d, tau).map_err(|e| CliError::core(format!("--tau {tau}"), e))?;
        let arl = rep.arl1.expect("point report has ARL");
        let base = shewhart_baseline(&chart.params, side, chart.arl0, tau)
            .map_err(|e| CliError::core(format!("Shewhart baseline at --tau {tau}"), e))?;
        let delta = delta_index_with(base, arl, a.delta_base.into()).map_err(|e| CliError::core("delta index", e))?;
        let mut row = chart.key_cells();
        row.extend([
            Cell::Num(tau, 2),
            Cell::text(side),
            Cell::Num(d.limit, 4),
            Cell::Num(arl, 1),
            Cell::Num(rep.sdrl1.expect("point report has SDRL"), 1),
            Cell::Num(base, 1),
            Cell::Num(delta, 0),
        ]);
        t.push(row);
    }
    t.write(out, a.format, a.paper_rounding, &["tau", "arl1", "sdrl1"])
}

fn cmd_earl(a: &EarlArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let chart = a.chart.resolve()?;
    let method = a.method.method()?;
    let ranges = if a.range.is_empty() {
        vec![rrmcv_core::perf::ShiftRange::decreasing(), rrmcv_core::perf::ShiftRange::increasing()]
    } else {
        a.range.iter().map(|r| parse_range(r)).collect::<Result<_, _>>()?
    };
    let mut t = Table::new(vec![
        "n", "p", "gamma0", "rule", "arl0", "range", "side", "limit", "earl", "esdrl", "esdrl_rms", "earl_shewhart",
        "delta_e",
    ]);
    for range in &ranges {
        let side = range.side();
        let d = chart.design(side)?;
        let rep = earl_with(&d, range, method).map_err(|e| CliError::core(format!("--range {range}"), e))?;
        let base_chart = Chart { rule: RunRule::SHEWHART, ..chart }.design(side)?;
        let base = earl_with(&base_chart, range, method)
            .map_err(|e| CliError::core(format!("Shewhart EARL over {range}"), e))?
            .earl
            .expect("range report has EARL");
        let earl = rep.earl.expect("range report has EARL");
        let delta = delta_index_with(base, earl, a.delta_base.into()).map_err(|e| CliError::core("delta index", e))?;
        let mut row = chart.key_cells();
        row.extend([
            Cell::text(range),
            Cell::text(side),
            Cell::Num(d.limit, 4),
            Cell::Num(earl, 1),
            Cell::Num(rep.esdrl.expect("range report has ESDRL"), 1),
            Cell::Num(rep.esdrl_rms.expect("range report has ESDRL"), 1),
            Cell::Num(base, 1),
            Cell::Num(delta, 0),
        ]);
        t.push(row);
    }
    t.write(out, a.format, a.paper_rounding, &["range", "earl", "esdrl"])
}

fn cmd_tables(a: &TablesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let subset = match &a.subset {
        Some(s) => Subset::parse(s)?,
        None => Subset::default(),
    };
    if !(a.arl0 > 1.0 && a.arl0.is_finite()) {
        return Err(CliError::Args(format!("--arl0 must be finite and above 1, got {}", a.arl0)));
    }
    let opts = TableOptions { arl0: a.arl0, earl_method: a.method.method()?, delta_base: a.delta_base.into() };
    let table = with_pool(|| build_table(a.table, &subset, &opts))?;
    let format = if a.format == Format::Text { Format::Csv } else { a.format };
    match &a.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(File::create(path)?);
            table.write(&mut f, format, a.paper_rounding, &[])?;
            f.flush()?;
        }
        None => table.write(out, format, a.paper_rounding, &[])?,
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Plotted values for `monitor`, plus the variable count when known.
fn monitor_values(a: &MonitorArgs) -> Result<(Vec<f64>, Option<u32>), CliError> {
    if let Some(col) = &a.gamma_col {
        return Ok((read_gamma_column(open(&a.input)?, col)?, None));
    }
    if !a.recompute {
        let mut rdr = csv::Reader::from_reader(open(&a.input)?);
        let has_gamma = rdr.headers().map(|h| h.iter().any(|c| c.trim() == "gamma_hat")).unwrap_or(false);
        if has_gamma {
            let p = read_subgroups(open(&a.input)?)
                .ok()
                .and_then(|s| s.first().map(|s| s.subgroup.p_dim() as u32));
            return Ok((read_gamma_column(open(&a.input)?, "gamma_hat")?, p));
        }
    }
    let samples = read_subgroups(open(&a.input)?)?;
    let p = samples.first().map(|s| s.subgroup.p_dim() as u32);
    let values = samples
        .iter()
        .map(|s| gamma_hat(&s.subgroup).map_err(|e| CliError::core(format!("sample {}", s.t), e)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((values, p))
}

pub fn report_json(r: &SignalReport) -> Value {
    json!({
        "gamma_hats": r.gamma_hats,
        "flagged": r.flagged,
        "signal_at": r.signal_at,
        "rule": r.rule.to_string(),
        "limit": r.limit,
        "side": r.side.to_string(),
    })
}

pub fn write_plot_csv<W: Write>(r: &SignalReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e.to_string()));
    w.write_record(["t", "gamma_hat", "limit", "flagged"]).map_err(io)?;
    for (i, g) in r.gamma_hats.iter().enumerate() {
        let t = i as u64 + 1;
        let flagged = u8::from(r.flagged.binary_search(&t).is_ok());
        w.write_record([t.to_string(), g.to_string(), r.limit.to_string(), flagged.to_string()]).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn plot_path(base: &Path, rule: RunRule, many: bool) -> PathBuf {
    if !many {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    base.with_file_name(format!("{stem}_{}of{}{ext}", rule.r(), rule.s()))
}

fn cmd_monitor(a: &MonitorArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rules = a.rule.iter().map(|r| parse_rule(r)).collect::<Result<Vec<_>, _>>()?;
    let side: Side = a.side.into();
    let (values, data_p) = monitor_values(a)?;
    let limits: Vec<f64> = if let Some(gamma0) = a.gamma0 {
        let n = a.n.ok_or_else(|| CliError::Args("--gamma0 needs --n".into()))?;
        let p = a.p.or(data_p).ok_or_else(|| CliError::Args("--gamma0 needs --p with a gamma column".into()))?;
        let params = ChartParams::new(n, p, gamma0).map_err(|e| CliError::core("--n/--p/--gamma0", e))?;
        rules
            .iter()
            .map(|&rule| {
                let spec = DesignSpec::new(params, rule, a.arl0).map_err(|e| CliError::core("--arl0", e))?;
                design_limits(&spec, side).map(|d| d.limit).map_err(|e| CliError::core(format!("designing {rule}"), e))
            })
            .collect::<Result<_, _>>()?
    } else {
        match a.limit.len() {
            0 => return Err(CliError::Args("pass --limit or --gamma0".into())),
            1 => vec![a.limit[0]; rules.len()],
            k if k == rules.len() => a.limit.clone(),
            k => return Err(CliError::Args(format!("{k} --limit values for {} rules", rules.len()))),
        }
    };
    let reports = rules
        .iter()
        .zip(&limits)
        .map(|(&rule, &limit)| run_signal(&values, rule, limit, side).map_err(|e| CliError::core(format!("--limit {limit}"), e)))
        .collect::<Result<Vec<_>, _>>()?;

    let json = if reports.len() == 1 {
        report_json(&reports[0])
    } else {
        Value::Array(reports.iter().map(report_json).collect())
    };
    if let Some(path) = &a.json_out {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, &json).map_err(|e| CliError::Io(e.into()))?;
        writeln!(f)?;
    }
    if let Some(path) = &a.plot_csv {
        for r in &reports {
            write_plot_csv(r, File::create(plot_path(path, r.rule, reports.len() > 1))?)?;
        }
    }
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &json).map_err(|e| CliError::Io(e.into()))?;
            writeln!(out)?;
        }
        Format::Csv | Format::Text => {
            let mut t = Table::new(vec!["rule", "side", "limit", "signal_at", "flagged"]);
            for r in &reports {
                let flagged: Vec<String> = r.flagged.iter().map(u64::to_string).collect();
                t.push(vec![
                    Cell::text(r.rule),
                    Cell::text(r.side),
                    Cell::Num(r.limit, 4),
                    r.signal_at.map_or(Cell::Missing, |s| Cell::Int(s as i64)),
                    Cell::Text(flagged.join(" ")),
                ]);
            }
            t.write(out, a.format, false, &["rule", "signal_at"])?;
        }
    }
    if a.expect_signal {
        if let Some(r) = reports.iter().find(|r| r.signal_at.is_none()) {
            return Err(CliError::Expectation(format!("rule {} did not signal", r.rule)));
        }
    }
    Ok(())
}

/// Replications per parallel work item.
const SIM_CHUNK: u64 = 1024;

fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let rule = parse_rule(&a.rule)?;
    let method = match a.method {
        SimMethodArg::Batched => SimMethod::Batched,
        SimMethodArg::Step => SimMethod::Step,
    };
    let cfg = SimConfig::new(rule, a.p_in, a.replications, a.seed)
        .map_err(|e| CliError::core("--p-in/--replications", e))?
        .with_method(method);
    let chunks: Vec<u64> = (0..a.replications.div_ceil(SIM_CHUNK)).collect();
    let parts = with_pool(|| {
        chunks
            .par_iter()
            .map(|&c| mc_accumulate(&cfg, c * SIM_CHUNK, ((c + 1) * SIM_CHUNK).min(a.replications)))
            .collect::<Result<Vec<_>, _>>()
    })
    .map_err(|e| CliError::core("simulation", e))?;
    let mut acc = McAccumulator::default();
    for p in &parts {
        acc.merge(p).map_err(|e| CliError::core("simulation", e))?;
    }
    let est = acc.estimate().map_err(|e| CliError::core("simulation", e))?;
    let exact = moments(rule, a.p_in).ok();
    let mut t = Table::new(vec![
        "rule", "p_in", "replications", "seed", "arl", "arl_se", "sdrl", "min", "max", "markov_arl", "markov_sdrl",
    ]);
    t.push(vec![
        Cell::text(rule),
        Cell::Num(a.p_in, 6),
        Cell::Int(a.replications as i64),
        Cell::text(a.seed),
        Cell::Num(est.arl, 2),
        Cell::Num(est.arl_se, 2),
        Cell::Num(est.sdrl, 2),
        Cell::text(est.min),
        Cell::text(est.max),
        exact.map_or(Cell::Missing, |m| Cell::Num(m.arl, 2)),
        exact.map_or(Cell::Missing, |m| Cell::Num(m.sdrl, 2)),
    ]);
    t.write(out, a.format, false, &["arl", "arl_se", "sdrl", "markov_arl"])
}
