//! `ramlab`: experiment runner over the ramlab core library.

mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use ramlab_core::covers::{
    sample_cover, sample_matching_model, sample_perm_plus_matching, sample_permutation_model, seeded_rng,
    trial_seed, BaseGraph, CoverGraph, MultiGraph,
};
use ramlab_core::expansion::inequality_suite;
use ramlab_core::growth::{
    bound_evaluator, classify_cycles, classify_words, general_bound_evaluator, optimize_bound, optimize_general_bound,
    RankHistogram,
};
use ramlab_core::moebius::{moebius_table, verify_r_support, MoebiusTable};
use ramlab_core::primitivity::{cyclic_graph, primitivity_rank};
use ramlab_core::spectral::{lambda_new, lambda_nontrivial, multigraph_spectrum, new_spectrum, rho_universal_cover, Operator};
use ramlab_core::words::{RawWord, ReducedWord, WordMode};
use ramlab_core::{Error, Guards};

use output::{float, rational, render};

#[derive(Parser)]
#[command(name = "ramlab", version, about = "Random covers, core graphs and primitivity rank experiments")]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph and print it.
    Sample(SampleArgs),
    /// Full and new spectra of a sampled cover or a graph file.
    Spectrum(SpectrumArgs),
    /// Primitivity rank and critical subgroups of a word.
    PrimRank(WordArgs),
    /// Critical subgroups of a word with a basis of each.
    Crit(WordArgs),
    /// Exact Φ, L, R, C tables over the quotients of a word's core graph.
    Moebius(MoebiusArgs),
    /// Histogram of primitivity ranks over all words or closed paths of length t.
    Classify(ClassifyArgs),
    /// Evaluate or optimise the trace-method bound.
    VerifyBound(BoundArgs),
    /// Spectral radius of the universal cover of a base graph.
    Rho(RhoArgs),
    /// Cheeger constant, conductance and inequality checks for a graph.
    Expansion(ExpansionArgs),
    /// Seeded trials of new-eigenvalue maxima, one JSON line per trial.
    TrialSweep(SweepArgs),
    /// Summarise a trial-sweep file as CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// d/2 uniform permutations (even d).
    Perm,
    /// Configuration model: a uniform perfect matching of d·n points.
    Matching,
    /// (d-1)/2 permutations plus a perfect matching (odd d, even n).
    PermMatching,
    /// Random n-cover of a base graph (default base: two vertices, d parallel edges).
    Cover,
}

#[derive(Clone, Copy, ValueEnum)]
enum OperatorArg {
    Adjacency,
    Markov,
}

impl From<OperatorArg> for Operator {
    fn from(o: OperatorArg) -> Self {
        match o {
            OperatorArg::Adjacency => Operator::Adjacency,
            OperatorArg::Markov => Operator::Markov,
        }
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "perm")]
    model: Model,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long)]
    seed: u64,
    /// Base graph JSON for the cover model.
    #[arg(long)]
    base: Option<PathBuf>,
    /// Resample until the graph has no loops or multi-edges.
    #[arg(long)]
    simple: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: GraphFormat,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long, value_enum, default_value = "perm")]
    model: Model,
    #[arg(long, required_unless_present = "graph")]
    n: Option<usize>,
    #[arg(long, default_value_t = 4)]
    d: usize,
    #[arg(long, required_unless_present = "graph")]
    seed: Option<u64>,
    #[arg(long)]
    base: Option<PathBuf>,
    /// Graph JSON ({"vertices", "adjacency"} or {"vertices", "edges"}) instead of sampling.
    #[arg(long, conflicts_with_all = ["n", "seed", "base"])]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "adjacency")]
    operator: OperatorArg,
    /// Only report the new eigenvalues, skipping the full spectrum.
    #[arg(long)]
    new_only: bool,
}

#[derive(Args)]
struct WordArgs {
    /// Word in a/A/b/B... notation (uppercase = inverse, "1" = identity).
    word: String,
    /// Alphabet size; defaults to the largest letter used.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct MoebiusArgs {
    word: String,
    #[arg(long)]
    k: Option<usize>,
    /// Values of n (repeat or comma-separate).
    #[arg(long, required = true, value_delimiter = ',')]
    n: Vec<usize>,
    /// Also check that R vanishes off algebraic extensions.
    #[arg(long)]
    r_support: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Reduced,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, required_unless_present = "base")]
    k: Option<usize>,
    #[arg(long)]
    t: usize,
    #[arg(long, value_enum, default_value = "raw")]
    mode: ModeArg,
    /// Classify closed paths of this base graph instead of words.
    #[arg(long, conflicts_with_all = ["k", "mode"])]
    base: Option<PathBuf>,
    /// Skip Σ|Crit| per rank.
    #[arg(long)]
    no_crit: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, conflicts_with_all = ["rho", "rank"], required_unless_present_all = ["rho", "rank"])]
    d: Option<u64>,
    #[arg(long, requires = "rank")]
    rho: Option<f64>,
    #[arg(long, requires = "rho")]
    rank: Option<usize>,
    /// Evaluate at this c = n^{1/t} instead of optimising.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Args)]
struct RhoArgs {
    #[arg(long, required_unless_present = "bouquet")]
    base: Option<PathBuf>,
    /// Use the bouquet of this many loops as base.
    #[arg(long, conflicts_with = "base")]
    bouquet: Option<usize>,
    #[arg(long, default_value_t = 100)]
    depth: usize,
    #[arg(long, value_enum, default_value = "adjacency")]
    operator: OperatorArg,
}

#[derive(Args)]
struct ExpansionArgs {
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    trials: u64,
    /// Report runtime_ms as 0 so that output is byte-identical across runs.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON-lines file written by trial-sweep.
    path: PathBuf,
    /// Pass when the value is below this.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "lambda_A_new")]
    fields: Vec<String>,
}

enum Failure {
    Invalid(String),
    Guard(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_guard() {
            Failure::Guard(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

type Out = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_base(path: &Path) -> Result<BaseGraph, Failure> {
    Ok(BaseGraph::from_json(&read(path)?)?)
}

fn load_graph(path: &Path) -> Result<MultiGraph, Failure> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    if v.get("adjacency").is_some() {
        serde_json::from_value(v).map_err(|e| invalid(format!("{}: {e}", path.display())))
    } else {
        Ok(BaseGraph::from_json(&text)?.multigraph())
    }
}

fn parse_word(s: &str, k: Option<usize>) -> Result<ReducedWord, Failure> {
    Ok(RawWord::parse(s, k)?.reduce())
}

enum Sampled {
    Cover(CoverGraph),
    Graph(MultiGraph),
}

impl Sampled {
    fn multigraph(&self) -> MultiGraph {
        match self {
            Sampled::Cover(c) => c.multigraph(),
            Sampled::Graph(g) => g.clone(),
        }
    }
}

fn sample(model: Model, n: usize, d: usize, base: Option<&BaseGraph>, seed: u64, simple: bool) -> Result<Sampled, Failure> {
    let mut rng = seeded_rng(seed);
    let dipole = BaseGraph::dipole(d.max(1));
    let base = base.unwrap_or(&dipole);
    let mut once = || -> ramlab_core::Result<Sampled> {
        Ok(match model {
            Model::Perm => Sampled::Cover(sample_permutation_model(n, d, &mut rng)?),
            Model::Matching => Sampled::Graph(sample_matching_model(n, d, &mut rng)?),
            Model::PermMatching => Sampled::Graph(sample_perm_plus_matching(n, d, &mut rng)?),
            Model::Cover => Sampled::Cover(sample_cover(base, n, &mut rng)?),
        })
    };
    if !simple {
        return Ok(once()?);
    }
    for _ in 0..SIMPLE_ATTEMPTS {
        let s = once()?;
        if s.multigraph().is_simple() {
            return Ok(s);
        }
    }
    Err(invalid(format!("no simple graph in {SIMPLE_ATTEMPTS} attempts")))
}

const SIMPLE_ATTEMPTS: usize = 10_000;

fn load_model_base(args: &ModelArgs) -> Result<Option<BaseGraph>, Failure> {
    if args.base.is_some() && args.model != Model::Cover {
        return Err(invalid("--base only applies to --model cover"));
    }
    args.base.as_deref().map(load_base).transpose()
}

fn cmd_sample(args: &SampleArgs) -> Out {
    let m = &args.model;
    let base = load_model_base(m)?;
    let s = sample(m.model, m.n, m.d, base.as_ref(), m.seed, m.simple)?;
    Ok(match args.format {
        GraphFormat::Csv => s.multigraph().to_csv(),
        GraphFormat::Json => match &s {
            Sampled::Cover(c) => {
                let mut v = c.to_json();
                v["graph"] = serde_json::to_value(c.multigraph()).expect("graph json");
                render(&v)
            }
            Sampled::Graph(g) => render(g),
        },
    })
}

fn cmd_spectrum(args: &SpectrumArgs) -> Out {
    let op = Operator::from(args.operator);
    if let Some(path) = &args.graph {
        return Ok(render(&multigraph_spectrum(&load_graph(path)?, op)));
    }
    let (n, seed) = (args.n.expect("required by clap"), args.seed.expect("required by clap"));
    if args.base.is_some() && args.model != Model::Cover {
        return Err(invalid("--base only applies to --model cover"));
    }
    let base = args.base.as_deref().map(load_base).transpose()?;
    match sample(args.model, n, args.d, base.as_ref(), seed, false)? {
        Sampled::Cover(c) => Ok(render(&new_spectrum(&c, op, !args.new_only))),
        Sampled::Graph(g) => Ok(render(&multigraph_spectrum(&g, op))),
    }
}

fn cmd_prim_rank(args: &WordArgs, guards: &Guards) -> Out {
    let w = parse_word(&args.word, args.k)?;
    let r = primitivity_rank(&w, guards)?;
    Ok(render(&json!({"word": w.to_string(), "pi": r.pi, "crit": r.crit})))
}

fn cmd_crit(args: &WordArgs, guards: &Guards) -> Out {
    let w = parse_word(&args.word, args.k)?;
    let r = primitivity_rank(&w, guards)?;
    let crit: Vec<Value> = r
        .crit
        .iter()
        .map(|g| {
            let basis: Vec<String> = g.basis().iter().map(|b| b.to_string()).collect();
            json!({"rank": g.rank(), "basis": basis, "graph": g})
        })
        .collect();
    Ok(render(&json!({"word": w.to_string(), "pi": r.pi, "count": crit.len(), "crit": crit})))
}

fn table_json(t: &MoebiusTable) -> Value {
    let iv = &t.interval;
    let layers: Vec<Value> = t
        .layers
        .iter()
        .map(|layer| {
            let mut pairs = Vec::new();
            for m in 0..iv.len() {
                for n in 0..iv.len() {
                    if !iv.covers(m, n) {
                        continue;
                    }
                    let get = |tab: &Vec<Vec<Option<num_rational::BigRational>>>| {
                        tab[m][n].as_ref().map(rational).unwrap_or_default()
                    };
                    pairs.push(json!({
                        "source": m,
                        "target": n,
                        "phi": get(&layer.phi),
                        "left": get(&layer.left),
                        "right": get(&layer.right),
                        "two_sided": get(&layer.two_sided),
                    }));
                }
            }
            json!({"n": layer.n, "pairs": pairs})
        })
        .collect();
    json!({
        "nodes": iv.nodes,
        "order": iv.order,
        "root_distance": iv.root_distance,
        "layers": layers,
    })
}

fn cmd_moebius(args: &MoebiusArgs, guards: &Guards) -> Out {
    let w = parse_word(&args.word, args.k)?;
    let mut v = if args.r_support {
        let (table, report) = verify_r_support(&w, &args.n, guards)?;
        let mut v = table_json(&table);
        v["r_support"] = serde_json::to_value(&report).expect("report json");
        v
    } else {
        table_json(&moebius_table(&cyclic_graph(&w), &args.n, guards)?)
    };
    v["word"] = json!(w.to_string());
    Ok(render(&v))
}

fn histogram_csv(h: &RankHistogram) -> String {
    let mut s = String::from("t,m,count,crit_sum\n");
    for row in h.csv_rows() {
        s.push_str(&row);
        s.push('\n');
    }
    s
}

fn cmd_classify(args: &ClassifyArgs, guards: &Guards) -> Out {
    if let Some(path) = &args.base {
        let report = classify_cycles(&load_base(path)?, args.t, guards)?;
        return Ok(if args.json {
            render(&report)
        } else {
            histogram_csv(&report.histogram)
        });
    }
    let mode = match args.mode {
        ModeArg::Raw => WordMode::Raw,
        ModeArg::Reduced => WordMode::Reduced,
    };
    let k = args.k.expect("required by clap");
    let h = classify_words(k, args.t, mode, !args.no_crit, guards)?;
    Ok(if args.json { render(&h) } else { histogram_csv(&h) })
}

fn cmd_verify_bound(args: &BoundArgs) -> Out {
    let spec = match (args.d, args.rho, args.rank, args.c) {
        (Some(d), _, _, Some(c)) => bound_evaluator(d, c)?,
        (Some(d), _, _, None) => optimize_bound(d)?,
        (None, Some(rho), Some(rank), Some(c)) => general_bound_evaluator(rank, rho, c)?,
        (None, Some(rho), Some(rank), None) => optimize_general_bound(rank, rho)?,
        _ => return Err(invalid("give --d, or both --rho and --rank")),
    };
    Ok(render(&spec))
}

fn cmd_rho(args: &RhoArgs) -> Out {
    let base = match (&args.base, args.bouquet) {
        (Some(p), _) => load_base(p)?,
        (None, Some(k)) if k >= 1 => BaseGraph::bouquet(k),
        _ => return Err(invalid("--bouquet needs at least one loop")),
    };
    Ok(render(&rho_universal_cover(&base, args.depth, args.operator.into())?))
}

fn cmd_expansion(args: &ExpansionArgs, guards: &Guards) -> Out {
    let g = load_graph(&args.graph)?;
    if !g.is_connected() {
        return Err(invalid("graph is not connected"));
    }
    Ok(render(&inequality_suite(&g, guards)?))
}

#[derive(Serialize)]
struct TrialLine {
    trial: u64,
    seed: u64,
    #[serde(rename = "lambda_A_new")]
    lambda_a_new: Option<f64>,
    #[serde(rename = "lambda_M_new")]
    lambda_m_new: Option<f64>,
    runtime_ms: u64,
}

fn run_trial(args: &SweepArgs, base: Option<&BaseGraph>, trial: u64) -> Result<TrialLine, Failure> {
    let m = &args.model;
    let seed = trial_seed(m.seed, trial);
    let start = Instant::now();
    let (a, mk) = match sample(m.model, m.n, m.d, base, seed, m.simple)? {
        Sampled::Cover(c) => lambda_new(&c),
        Sampled::Graph(g) => {
            let a = lambda_nontrivial(&g)?;
            (a, a.map(|x| x / m.d as f64))
        }
    };
    let runtime_ms = if args.deterministic {
        0
    } else {
        start.elapsed().as_millis() as u64
    };
    Ok(TrialLine {
        trial,
        seed,
        lambda_a_new: a,
        lambda_m_new: mk,
        runtime_ms,
    })
}

fn cmd_trial_sweep(args: &SweepArgs) -> Out {
    let base = load_model_base(&args.model)?;
    if args.model.model == Model::Perm && args.model.d % 2 == 1 {
        return Err(invalid("the perm model needs even d; use --model perm-matching or matching"));
    }
    let lines = (0..args.trials)
        .into_par_iter()
        .map(|i| run_trial(args, base.as_ref(), i).map(|l| render(&l)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut s = String::new();
    for l in lines {
        s.push_str(&l);
        s.push('\n');
    }
    Ok(s)
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn cmd_report(args: &ReportArgs) -> Out {
    let text = read(&args.path)?;
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); args.fields.len()];
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| invalid(format!("line {}: {e}", i + 1)))?;
        for (f, col) in args.fields.iter().zip(columns.iter_mut()) {
            match v.get(f) {
                Some(Value::Number(x)) => col.push(x.as_f64().unwrap_or(f64::NAN)),
                Some(Value::Null) => {}
                _ => return Err(invalid(format!("line {}: missing numeric field {f:?}", i + 1))),
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| invalid(e.to_string());
    w.write_record(["field", "count", "min", "median", "max", "threshold", "pass_rate"])
        .map_err(csv_err)?;
    let threshold = args.threshold.map(float).unwrap_or_default();
    for (f, mut col) in args.fields.iter().cloned().zip(columns) {
        if col.is_empty() {
            continue;
        }
        col.sort_by(f64::total_cmp);
        let pass = args
            .threshold
            .map(|t| float(col.iter().filter(|&&x| x < t).count() as f64 / col.len() as f64))
            .unwrap_or_default();
        w.write_record([
            f,
            col.len().to_string(),
            float(col[0]),
            float(median(&col)),
            float(col[col.len() - 1]),
            threshold.clone(),
            pass,
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn run(cli: &Cli) -> Out {
    let guards = Guards::from_env()?;
    let mut out = match &cli.command {
        Command::Sample(a) => cmd_sample(a)?,
        Command::Spectrum(a) => cmd_spectrum(a)?,
        Command::PrimRank(a) => cmd_prim_rank(a, &guards)?,
        Command::Crit(a) => cmd_crit(a, &guards)?,
        Command::Moebius(a) => cmd_moebius(a, &guards)?,
        Command::Classify(a) => cmd_classify(a, &guards)?,
        Command::VerifyBound(a) => cmd_verify_bound(a)?,
        Command::Rho(a) => cmd_rho(a)?,
        Command::Expansion(a) => cmd_expansion(a, &guards)?,
        Command::TrialSweep(a) => cmd_trial_sweep(a)?,
        Command::Report(a) => cmd_report(a)?,
    };
    if !out.is_empty() && !out.ends_with('\n') {
        out.push('\n');
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(text) => {
            let written = match &cli.output {
                Some(p) => fs::write(p, text),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
