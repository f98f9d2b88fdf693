//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation
//! error, 3 resource guard.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::analyze;
use crate::error::{Error, Result};
use crate::experiments::{an_concentration_detail, run_cells, RunOptions, DEFAULT_MEMORY_BUDGET};
use crate::formulas::{
    an_window, component_bound_pi, component_bound_pi_ln, component_bound_start, conn_prob_by_rank,
    erlang_integral_mean_degree, isolated_prob_lower_bound, ln_isolated_prob_lower_bound,
    mean_degree_asymptotic, mean_degree_finite, mean_degree_limit, mean_degree_limit_exact,
    negbin_half_sum, negbin_pmf, threshold_k, ThresholdForm, ThresholdParams, EXACT_K_MAX,
};
use crate::gen;
use crate::model::{ModelKind, ModelParams, SeedSpec, UndirectedGraph};
use crate::verify::{run_all, VerifyConfig};
use crate::Exact;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "bagraph",
    version,
    about = "Bilateral agreement random graph laboratory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one graph and write its edge list as CSV.
    Generate(GenerateArgs),
    /// Analyze an edge-list CSV and print a JSON report.
    Analyze(AnalyzeArgs),
    /// Run a Monte Carlo sweep over (n, k) cells.
    Sweep(SweepArgs),
    /// Evaluate closed-form quantities.
    Formulas {
        #[command(subcommand)]
        mode: FormulaMode,
    },
    /// Run the enumeration-oracle and identity suites.
    Verify(VerifyArgs),
    /// Check how often every k-th largest score lands in the concentration
    /// window, with per-vertex exit counts.
    Concentration(ConcentrationArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelArg {
    Bilateral,
    Unilateral,
    Er,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Bilateral => ModelKind::Bilateral,
            ModelArg::Unilateral => ModelKind::Unilateral,
            ModelArg::Er => ModelKind::ErdosRenyi,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: Option<usize>,
    /// Edge probability; implies `--model er` when no model is given.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        conflicts_with = "t_list",
        required_unless_present = "t_list"
    )]
    pub k_list: Vec<usize>,
    /// Multipliers t, resolved to k = ⌊t log n⌋ per n.
    #[arg(long, value_delimiter = ',')]
    pub t_list: Vec<f64>,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "bilateral")]
    pub model: ModelArg,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = "BAGRAPH_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MEMORY_BUDGET >> 20)]
    pub memory_budget_mib: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(2..=9))]
    pub max_m: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub max_k: u64,
}

#[derive(Debug, Subcommand)]
pub enum FormulaMode {
    /// Limiting mean degree, float and exact; with --n also the finite-n value.
    MeanDegree {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Large-k expansion of the mean degree.
    Asymptotic {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
    },
    /// Probability of joining the i-th favourite, for one rank or all.
    ConnProb {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        i: Option<u64>,
    },
    /// Concentration window and edge probabilities.
    Window {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        t: f64,
    },
    /// Component-size bound.
    PiBound {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        t: f64,
    },
    /// Fair negative binomial masses, or their sum below k with --sum.
    Negbin {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        j: Option<u64>,
        #[arg(long)]
        sum: bool,
    },
    /// Erlang integral form of the mean degree.
    Erlang {
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<u64>,
    },
    /// Threshold k for a given n.
    Threshold {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.0)]
        t_prime: f64,
        #[arg(long, value_enum, default_value = "t")]
        form: FormArg,
    },
    /// Exponential factor of the isolation lower bound.
    IsolationBound {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        delta: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormArg {
    T,
    TPrime,
    Disc,
}

impl From<FormArg> for ThresholdForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::T => ThresholdForm::T,
            FormArg::TPrime => ThresholdForm::TPrime,
            FormArg::Disc => ThresholdForm::Disconnection,
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Resource(_) => EXIT_RESOURCE,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Analyze(a) => cmd_analyze(&a, &mut out),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Formulas { mode } => cmd_formulas(&mode, &mut out),
        Command::Verify(a) => return cmd_verify(&a, &mut out),
        Command::Concentration(a) => cmd_concentration(&a, &mut out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    master_seed: u64,
    config: &'a C,
    resolved: R,
    output: String,
    started_unix_seconds: u64,
    wall_clock_seconds: f64,
}

/// `<out>.manifest.json` next to an output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest<C: Serialize, R: Serialize>(
    command: &'static str,
    seed: u64,
    config: &C,
    resolved: R,
    out: &Path,
    started: (SystemTime, Instant),
) -> Result<()> {
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        master_seed: seed,
        config,
        resolved,
        output: out.display().to_string(),
        started_unix_seconds: started
            .0
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        wall_clock_seconds: started.1.elapsed().as_secs_f64(),
    };
    let file = File::create(manifest_path(out))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &manifest)?;
    Ok(())
}

fn resolve_generate(a: &GenerateArgs) -> Result<ModelParams> {
    let model = a.model.unwrap_or(if a.p.is_some() {
        ModelArg::Er
    } else {
        ModelArg::Bilateral
    });
    match model {
        ModelArg::Er => {
            let p = a.p.ok_or_else(|| Error::param("--model er needs --p"))?;
            if a.k.is_some() {
                return Err(Error::param("--k does not apply to --model er"));
            }
            ModelParams::erdos_renyi(a.n, p)
        }
        kind => {
            if a.p.is_some() {
                return Err(Error::param("--p only applies to --model er"));
            }
            let k =
                a.k.ok_or_else(|| Error::param("--k is required for preference models"))?;
            ModelParams::new(kind.into(), a.n, k, 0.0)
        }
    }
}

/// Writes an edge list: header `u,v`, one canonical edge per line.
pub fn write_edge_list<W: Write>(graph: &UndirectedGraph, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["u", "v"])?;
    for &(u, v) in graph.edges() {
        wtr.write_record([u.to_string(), v.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads an edge list for a graph on `n` vertices, naming the offending line
/// on any malformed row.
pub fn read_edge_list<R: io::Read>(r: R, n: usize) -> Result<UndirectedGraph> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut edges = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::EdgeList {
                line,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if first {
            first = false;
            if rec.iter().eq(["u", "v"]) {
                continue;
            }
        }
        let bad = |msg: String| Error::EdgeList { line, msg };
        if rec.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", rec.len())));
        }
        let parse = |s: &str| {
            s.parse::<u32>()
                .map_err(|_| bad(format!("invalid vertex id {s:?}")))
        };
        let (u, v) = (parse(&rec[0])?, parse(&rec[1])?);
        if u == v {
            return Err(bad(format!("self-loop {u},{v}")));
        }
        if u as usize >= n || v as usize >= n {
            return Err(bad(format!("vertex out of range for n = {n}: {u},{v}")));
        }
        edges.push((u, v));
    }
    UndirectedGraph::from_edges(n, edges)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let started = (SystemTime::now(), Instant::now());
    let params = resolve_generate(a)?;
    let graph = gen::generate(&params, SeedSpec::new(a.seed, a.stream))?;
    write_edge_list(&graph, BufWriter::new(File::create(&a.out)?))?;
    write_manifest("generate", a.seed, a, params, &a.out, started)
}

pub fn cmd_analyze<W: Write>(a: &AnalyzeArgs, out: &mut W) -> Result<()> {
    if a.n == 0 {
        return Err(Error::param("--n must be positive"));
    }
    let graph = read_edge_list(File::open(&a.input)?, a.n)?;
    serde_json::to_writer_pretty(&mut *out, &analyze(&graph))?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct ResolvedCell {
    n: usize,
    k: usize,
    t: Option<f64>,
}

fn resolve_cells(a: &SweepArgs) -> Result<Vec<ResolvedCell>> {
    let mut cells = Vec::new();
    for &n in &a.n_list {
        if a.t_list.is_empty() {
            cells.extend(a.k_list.iter().map(|&k| ResolvedCell { n, k, t: None }));
            continue;
        }
        for &t in &a.t_list {
            let resolved = threshold_k(n as u64, &ThresholdParams::with_t(t)?, ThresholdForm::T)?;
            eprintln!("n = {n}, t = {t}: k = {}", resolved.k);
            cells.push(ResolvedCell {
                n,
                k: resolved.k as usize,
                t: Some(t),
            });
        }
    }
    Ok(cells)
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let started = (SystemTime::now(), Instant::now());
    let cells = resolve_cells(a)?;
    let pairs: Vec<(usize, usize)> = cells.iter().map(|c| (c.n, c.k)).collect();
    let opts = RunOptions {
        threads: a.threads,
        memory_budget: a.memory_budget_mib.saturating_mul(1 << 20),
    };
    let results = run_cells(
        &pairs,
        a.trials,
        SeedSpec::new(a.seed, 0),
        a.model.into(),
        &opts,
    )?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(File::create(&a.out)?));
    for cell in &results {
        wtr.serialize(cell)?;
    }
    wtr.flush()?;
    write_manifest("sweep", a.seed, a, cells, &a.out, started)
}

fn exact_or_dash(k: u64, f: impl FnOnce() -> Result<Exact>) -> Result<String> {
    if k <= EXACT_K_MAX {
        Ok(f()?.to_string())
    } else {
        Ok("-".into())
    }
}

pub fn cmd_formulas<W: Write>(mode: &FormulaMode, out: &mut W) -> Result<()> {
    match mode {
        FormulaMode::MeanDegree { k, n } => {
            write!(out, "k,mean_degree,exact")?;
            if let Some(n) = n {
                write!(out, ",finite_n_{n}")?;
            }
            writeln!(out)?;
            for &k in k {
                let exact = exact_or_dash(k, || mean_degree_limit_exact(k))?;
                write!(out, "{k},{},{exact}", mean_degree_limit(k)?)?;
                if let Some(n) = n {
                    write!(out, ",{}", mean_degree_finite(*n, k)?)?;
                }
                writeln!(out)?;
            }
        }
        FormulaMode::Asymptotic { k } => {
            writeln!(out, "k,asymptotic,mean_degree,gap")?;
            for &k in k {
                let asym: f64 = mean_degree_asymptotic(k);
                let limit = mean_degree_limit(k)?;
                writeln!(out, "{k},{asym},{limit},{}", (asym - limit).abs())?;
            }
        }
        FormulaMode::ConnProb { k, i } => {
            writeln!(out, "i,prob,exact")?;
            let ranks: Vec<u64> = match i {
                Some(i) => vec![*i],
                None => (1..=*k).collect(),
            };
            for i in ranks {
                let p: f64 = conn_prob_by_rank(i, *k)?;
                let exact = exact_or_dash(*k, || conn_prob_by_rank::<Exact>(i, *k))?;
                writeln!(out, "{i},{p},{exact}")?;
            }
        }
        FormulaMode::Window { n, t } => {
            let w = an_window::<f64>(*n, *t)?;
            writeln!(out, "n,t,lower,upper,p_bar,p_underbar")?;
            writeln!(
                out,
                "{n},{t},{},{},{},{}",
                w.lower, w.upper, w.p_bar, w.p_underbar
            )?;
        }
        FormulaMode::PiBound { n, t } => {
            let ln_pi = component_bound_pi_ln(*n, *t)?;
            let pi = component_bound_pi(*n, *t)?;
            writeln!(out, "n,t,r_start,ln_pi,pi")?;
            writeln!(out, "{n},{t},{},{ln_pi},{pi}", component_bound_start(*t))?;
        }
        FormulaMode::Negbin { k, j, sum } => {
            if *sum {
                writeln!(out, "k,sum_below_k")?;
                let exact = exact_or_dash(*k, || negbin_half_sum::<Exact>(*k))?;
                writeln!(out, "{k},{exact}")?;
            } else {
                writeln!(out, "j,pmf,exact")?;
                let js: Vec<u64> = match j {
                    Some(j) => vec![*j],
                    None => (0..*k).collect(),
                };
                for j in js {
                    let p: f64 = negbin_pmf(*k, j)?;
                    let exact = exact_or_dash(k + j, || negbin_pmf::<Exact>(*k, j))?;
                    writeln!(out, "{j},{p},{exact}")?;
                }
            }
        }
        FormulaMode::Erlang { k } => {
            writeln!(out, "k,erlang_integral,mean_degree,gap")?;
            for &k in k {
                let e = erlang_integral_mean_degree(k)?;
                let limit = mean_degree_limit(k)?;
                writeln!(out, "{k},{e},{limit},{}", (e - limit).abs())?;
            }
        }
        FormulaMode::Threshold {
            n,
            t,
            t_prime,
            form,
        } => {
            let params = ThresholdParams::new(*t, *t_prime, 0.5)?;
            let r = threshold_k(*n, &params, (*form).into())?;
            writeln!(out, "n,k,clamped")?;
            writeln!(out, "{n},{},{}", r.k, r.clamped)?;
        }
        FormulaMode::IsolationBound { k, delta } => {
            writeln!(out, "k,delta,ln_bound,bound")?;
            let ln = ln_isolated_prob_lower_bound(*k, *delta)?;
            writeln!(
                out,
                "{k},{delta},{ln},{}",
                isolated_prob_lower_bound(*k, *delta)?
            )?;
        }
    }
    Ok(())
}

pub fn cmd_concentration<W: Write>(a: &ConcentrationArgs, out: &mut W) -> Result<()> {
    writeln!(out, "n,k,trials,fraction,mean_below,mean_above")?;
    for &n in &a.n_list {
        let d = an_concentration_detail(n, a.t, a.trials, SeedSpec::new(a.seed, 0))?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            d.n, d.k, d.trials, d.fraction, d.mean_below, d.mean_above
        )?;
    }
    Ok(())
}

pub fn cmd_verify<W: Write>(a: &VerifyArgs, out: &mut W) -> i32 {
    let reports = run_all(&VerifyConfig {
        max_m: a.max_m,
        max_k: a.max_k,
    });
    for r in &reports {
        let _ = writeln!(out, "{r}");
    }
    match reports.iter().find(|r| !r.passed()) {
        None => EXIT_OK,
        Some(r) => {
            eprintln!(
                "verification failed in {}: {}",
                r.name,
                r.failure.as_deref().unwrap_or("")
            );
            EXIT_VERIFY
        }
    }
}
