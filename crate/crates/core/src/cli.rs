//! The `jacres` command-line surface.
//!
//! Data outputs are bit-reproducible for a fixed command line and seed:
//! anything that varies run to run (wall time) goes to stderr or to the
//! JSON `meta` field, never into the data.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{
    pigeonhole_lower_bound, sigma1_bound, sigma2_bound, sigma3_bound, BoundReport, LogProb,
    RhoMode, SIGMA2_EXACT_LIMIT,
};
use crate::construct::{Construction, ConstructionKind, ConstructionSpec, Epsilon};
use crate::dimension::{dimension_bracket, exact_metric_dimension, ich_greedy, TABLE1_SIZES};
use crate::error::{Error, Result};
use crate::resolve::{signature, verify_resolving, ResolutionReport, Scope};
use crate::setcore::{GroundSet, SubsetMask};
use crate::Limits;

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
pub enum ScopeArg {
    AllPairs,
    EqualSize,
    DifferentSize,
    SizeAtMost,
}

fn parse_epsilon(s: &str) -> std::result::Result<Epsilon, String> {
    s.parse::<Epsilon>().map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<ConstructionKind, String> {
    s.parse::<ConstructionKind>().map_err(|e| e.to_string())
}

/// Landmark constructions, verification, dimension experiments, bound
/// tables, and exact bag-of-words embeddings over Jaccard spaces.
#[derive(Parser, Debug)]
#[command(name = "jacres", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Ground-set size |X|.
    #[arg(long, global = true)]
    pub n: Option<u32>,

    /// Base seed; trial t uses seed XOR t.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of independent trials.
    #[arg(long, global = true)]
    pub trials: Option<u64>,

    /// Strength parameter as an exact rational p/q (e.g. 1/10).
    #[arg(long, global = true, value_parser = parse_epsilon)]
    pub epsilon: Option<Epsilon>,

    /// Verification scope.
    #[arg(long, global = true, value_enum)]
    pub scope: Option<ScopeArg>,

    /// Cardinality cap for the size-at-most scope.
    #[arg(long = "W", global = true)]
    pub w: Option<u32>,

    /// Replace the computed sample count.
    #[arg(long, global = true)]
    pub k_override: Option<u32>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    pub format: OutFormat,

    /// Write data output to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Raise the built-in enumeration ceilings (costs are exponential;
    /// you asked for it).
    #[arg(long, global = true)]
    pub unsafe_limits: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Certified exact metric dimension at small n, with the counting
    /// lower bound and the asymptotic bracket for context.
    Dimension,
    /// Run the greedy entropy heuristic and report the landmark set found.
    Ich {
        /// Emit the per-round entropy trace instead of the summary row
        /// (CSV mode; JSON always carries both).
        #[arg(long)]
        trace: bool,
    },
    /// Build a landmark construction; prints its JSON wire form.
    Construct {
        #[arg(value_parser = parse_kind)]
        kind: ConstructionKind,
        /// Pivot element for the triple-based kinds.
        #[arg(long, default_value_t = 0)]
        x_pivot: u32,
    },
    /// Re-verify a construction from its JSON wire form.
    Verify {
        input: PathBuf,
        /// Exit with status 4 if a non-resolving witness is found.
        #[arg(long)]
        expect_resolving: bool,
    },
    /// Evaluate the failure-probability bounds at (n, k).
    Bounds {
        #[arg(long)]
        k: Option<u32>,
        /// Include the per-cell collision probability table (JSON only).
        #[arg(long)]
        rho_table: bool,
    },
    /// Embed documents (one per line) as exact distance vectors against a
    /// construction over the lexicon (one token per line).
    Embed {
        lexicon: PathBuf,
        docs: PathBuf,
        #[arg(value_parser = parse_kind)]
        kind: ConstructionKind,
        /// Emit 17-significant-digit decimals instead of num/den.
        #[arg(long)]
        decimal: bool,
    },
    /// Repeated construction + verification rounds with derived seeds.
    Experiment {
        #[arg(value_parser = parse_kind)]
        kind: ConstructionKind,
    },
    /// Heuristic dimension table for n = 1..=max-n against the published
    /// reference values, with exact dimensions and lower bounds where
    /// available.
    Table1 {
        #[arg(long, default_value_t = 12)]
        max_n: u32,
    },
}

impl Cli {
    fn limits(&self) -> Limits {
        if self.unsafe_limits {
            Limits::unrestricted()
        } else {
            Limits::default()
        }
    }

    fn require_n(&self) -> Result<u32> {
        self.n
            .ok_or_else(|| Error::InvalidArgument("--n is required for this command".into()))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn scope_for(&self, kind: ConstructionKind, built_w: Option<u32>) -> Result<Scope> {
        let size_at_most = |hint: &str| -> Result<Scope> {
            Ok(Scope::SizeAtMost {
                w: self.w.or(built_w).ok_or_else(|| {
                    Error::InvalidArgument(format!("{hint} needs --W"))
                })?,
            })
        };
        match self.scope {
            Some(ScopeArg::AllPairs) => Ok(Scope::AllPairs),
            Some(ScopeArg::EqualSize) => Ok(Scope::EqualSizeOnly),
            Some(ScopeArg::DifferentSize) => Ok(Scope::DifferentSizeOnly),
            Some(ScopeArg::SizeAtMost) => size_at_most("--scope size-at-most"),
            None => match kind {
                ConstructionKind::Theorem1 => Ok(Scope::AllPairs),
                ConstructionKind::Triple | ConstructionKind::Theorem2 => {
                    Ok(Scope::DifferentSizeOnly)
                }
                ConstructionKind::Corollary3 => size_at_most("size-restricted default scope"),
            },
        }
    }

    fn construction_spec(&self, kind: ConstructionKind, x_pivot: u32, n: u32) -> ConstructionSpec {
        ConstructionSpec {
            kind,
            n,
            epsilon: self.epsilon,
            x_pivot,
            seed: self.seed(),
            k_override: self.k_override,
        }
    }
}

fn open_sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match output {
        Some(path) => Ok(Box::new(fs::File::create(path)?)),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

/// Exit code for an error: resource refusals get their own code so
/// scripted sweeps can tell them apart from bad arguments.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ResourceLimit(_) => 3,
        _ => 2,
    }
}

/// Parse argv, set up the worker pool, run. Returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    let mut sink = open_sink(&cli.output)?;
    match &cli.command {
        Command::Dimension => cmd_dimension(cli, &mut sink),
        Command::Ich { trace } => cmd_ich(cli, *trace, &mut sink),
        Command::Construct { kind, x_pivot } => cmd_construct(cli, *kind, *x_pivot, &mut sink),
        Command::Verify {
            input,
            expect_resolving,
        } => cmd_verify(cli, input, *expect_resolving, &mut sink),
        Command::Bounds { k, rho_table } => cmd_bounds(cli, *k, *rho_table, &mut sink),
        Command::Embed {
            lexicon,
            docs,
            kind,
            decimal,
        } => cmd_embed_cli(cli, lexicon, docs, *kind, *decimal, &mut sink),
        Command::Experiment { kind } => cmd_experiment_cli(cli, *kind, &mut sink),
        Command::Table1 { max_n } => cmd_table1(cli, *max_n, &mut sink),
    }
}

// ---------------------------------------------------------------------------
// dimension / ich / table1
// ---------------------------------------------------------------------------

fn blank_or<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cmd_dimension(cli: &Cli, sink: &mut dyn Write) -> Result<i32> {
    let n = cli.require_n()?;
    let limits = cli.limits();
    let gs = GroundSet::new(n)?;
    let exact = exact_metric_dimension(&gs, &limits)?;
    let lower = if n >= 2 {
        Some(pigeonhole_lower_bound(n)?)
    } else {
        None
    };
    let bracket = if n >= 3 {
        Some(dimension_bracket(n)?)
    } else {
        None
    };
    match cli.format {
        OutFormat::Csv => {
            writeln!(
                sink,
                "n,beta,sets_examined,lower_bound,bracket_lower,bracket_upper"
            )?;
            writeln!(
                sink,
                "{n},{},{},{},{},{}",
                exact.beta,
                exact.sets_examined,
                blank_or(lower),
                blank_or(bracket.map(|b| b.0)),
                blank_or(bracket.map(|b| b.1)),
            )?;
        }
        OutFormat::Json => {
            let data = json!({
                "n": n,
                "beta": exact.beta,
                "witness_set": exact.witness_set.iter().map(|m| m.to_hex()).collect::<Vec<_>>(),
                "sets_examined": exact.sets_examined,
                "lower_bound": lower,
                "bracket_lower": bracket.map(|b| b.0),
                "bracket_upper": bracket.map(|b| b.1),
            });
            writeln!(sink, "{}", json!({ "data": data }))?;
        }
    }
    Ok(0)
}

fn cmd_ich(cli: &Cli, trace: bool, sink: &mut dyn Write) -> Result<i32> {
    let n = cli.require_n()?;
    let limits = cli.limits();
    let result = ich_greedy(&GroundSet::new(n)?, &limits)?;
    match cli.format {
        OutFormat::Csv => {
            if trace {
                writeln!(sink, "iteration,landmark,cardinality,entropy")?;
                for step in &result.entropy_trace {
                    writeln!(
                        sink,
                        "{},{},{},{}",
                        step.iteration,
                        step.landmark.to_hex(),
                        step.landmark.cardinality(),
                        step.entropy
                    )?;
                }
            } else {
                writeln!(sink, "n,size,avg_cardinality")?;
                writeln!(
                    sink,
                    "{n},{},{}",
                    result.size,
                    result.avg_landmark_cardinality.to_f64()
                )?;
            }
        }
        OutFormat::Json => {
            let data = json!({
                "n": n,
                "size": result.size,
                "avg_cardinality": {
                    "num": result.avg_landmark_cardinality.num(),
                    "den": result.avg_landmark_cardinality.den(),
                },
                "landmarks": result.landmarks.iter().map(|m| m.to_hex()).collect::<Vec<_>>(),
                "trace": result.entropy_trace.iter().map(|s| json!({
                    "iteration": s.iteration,
                    "landmark": s.landmark.to_hex(),
                    "entropy": s.entropy,
                })).collect::<Vec<_>>(),
            });
            writeln!(sink, "{}", json!({ "data": data }))?;
        }
    }
    Ok(0)
}

fn cmd_table1(cli: &Cli, max_n: u32, sink: &mut dyn Write) -> Result<i32> {
    if !(1..=14).contains(&max_n) {
        return Err(Error::InvalidArgument(format!(
            "reference values cover n = 1..=14; got max_n = {max_n}"
        )));
    }
    let limits = cli.limits();
    writeln!(
        sink,
        "n,ich_size,table1_size,exact_beta,avg_cardinality,lower_bound"
    )?;
    for n in 1..=max_n {
        let gs = GroundSet::new(n)?;
        let ich = ich_greedy(&gs, &limits)?;
        let exact = if n <= limits.exact {
            Some(exact_metric_dimension(&gs, &limits)?.beta)
        } else {
            None
        };
        let lower = if n >= 2 {
            Some(pigeonhole_lower_bound(n)?)
        } else {
            None
        };
        writeln!(
            sink,
            "{n},{},{},{},{},{}",
            ich.size,
            TABLE1_SIZES[(n - 1) as usize],
            blank_or(exact),
            ich.avg_landmark_cardinality.to_f64(),
            blank_or(lower),
        )?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// construct / verify
// ---------------------------------------------------------------------------

fn cmd_construct(
    cli: &Cli,
    kind: ConstructionKind,
    x_pivot: u32,
    sink: &mut dyn Write,
) -> Result<i32> {
    let n = cli.require_n()?;
    let spec = cli.construction_spec(kind, x_pivot, n);
    let c = Construction::build(&spec)?;
    if c.duplicate_count > 0 {
        eprintln!(
            "warning: construction contains {} duplicated mask(s); kept as drawn",
            c.duplicate_count
        );
    }
    writeln!(sink, "{}", c.to_json())?;
    Ok(0)
}

fn report_to_csv(rep: &ResolutionReport, sink: &mut dyn Write) -> Result<()> {
    writeln!(sink, "resolving,scope,pairs_checked,witness_a,witness_b")?;
    let (wa, wb) = match &rep.witness {
        Some((a, b)) => (a.to_hex(), b.to_hex()),
        None => (String::new(), String::new()),
    };
    writeln!(
        sink,
        "{},{},{},{wa},{wb}",
        rep.resolving, rep.scope, rep.pairs_checked
    )?;
    Ok(())
}

fn report_to_json(rep: &ResolutionReport) -> serde_json::Value {
    json!({
        "resolving": rep.resolving,
        "scope": rep.scope.to_string(),
        "pairs_checked": rep.pairs_checked,
        "witness": rep.witness.as_ref().map(|(a, b)| json!({
            "a": a.to_hex(),
            "b": b.to_hex(),
            "card_a": a.cardinality(),
            "card_b": b.cardinality(),
        })),
    })
}

fn cmd_verify(
    cli: &Cli,
    input: &PathBuf,
    expect_resolving: bool,
    sink: &mut dyn Write,
) -> Result<i32> {
    let text = fs::read_to_string(input)?;
    let c = Construction::from_json(&text)?;
    let scope = cli.scope_for(c.kind, c.w)?;
    let limits = cli.limits();
    let rep = verify_resolving(&c.masks, scope, &limits)?;
    match cli.format {
        OutFormat::Csv => report_to_csv(&rep, sink)?,
        OutFormat::Json => writeln!(sink, "{}", json!({ "data": report_to_json(&rep) }))?,
    }
    if expect_resolving && !rep.resolving {
        eprintln!("verification found a non-resolving witness");
        return Ok(4);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

fn cmd_bounds(cli: &Cli, k: Option<u32>, rho_table: bool, sink: &mut dyn Write) -> Result<i32> {
    let n = cli.require_n()?;
    let k = k.ok_or_else(|| Error::InvalidArgument("--k is required for bounds".into()))?;
    if rho_table && cli.format == OutFormat::Csv {
        return Err(Error::InvalidArgument(
            "--rho-table is only emitted in --format json".into(),
        ));
    }
    let report = BoundReport::evaluate(n, k, cli.w, rho_table)?;

    match cli.format {
        OutFormat::Csv => {
            writeln!(
                sink,
                "n,k,log_sigma1,log_sigma2_exact,log_sigma2_hoeffding,W,log_sigma3"
            )?;
            writeln!(
                sink,
                "{n},{k},{},{},{},{},{}",
                report.sigma1.log(),
                blank_or(report.sigma2_exact.map(|v| v.log())),
                report.sigma2_hoeffding.log(),
                blank_or(report.w),
                blank_or(report.sigma3.map(|v| v.log())),
            )?;
        }
        OutFormat::Json => {
            let rho = report.rho_table.as_ref().map(|table| {
                table
                    .iter()
                    .map(|&(i, j, rho)| json!({ "i": i, "j": j, "rho": rho }))
                    .collect::<Vec<_>>()
            });
            let data = json!({
                "n": n,
                "k": k,
                "log_sigma1": report.sigma1.log(),
                "log_sigma2_exact": report.sigma2_exact.map(|v| v.log()),
                "log_sigma2_hoeffding": report.sigma2_hoeffding.log(),
                "W": report.w,
                "log_sigma3": report.sigma3.map(|v| v.log()),
                "rho_table": rho,
            });
            writeln!(sink, "{}", json!({ "data": data }))?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

/// A document reduced to its set of lexicon tokens.
#[derive(Clone, Debug)]
pub struct BagOfWords {
    pub doc_id: String,
    pub tokens: std::collections::BTreeSet<String>,
}

impl BagOfWords {
    /// Lowercase + whitespace tokenization; nothing fancier belongs here.
    pub fn tokenize(doc_id: String, line: &str) -> Self {
        let tokens = line
            .to_lowercase()
            .split_whitespace()
            .map(str::to_owned)
            .collect();
        BagOfWords { doc_id, tokens }
    }

    /// Project onto the lexicon: the subset mask plus how many distinct
    /// tokens were dropped as out-of-lexicon.
    pub fn project(&self, index: &HashMap<&str, u32>, n: u32) -> (SubsetMask, usize) {
        let mut indices = Vec::new();
        let mut dropped = 0usize;
        for t in &self.tokens {
            match index.get(t.as_str()) {
                Some(&i) => indices.push(i),
                None => dropped += 1,
            }
        }
        (
            SubsetMask::from_indices(n, &indices).expect("indices from lexicon"),
            dropped,
        )
    }
}

/// Lexicon file: one token per line, lowercased, must be distinct and
/// non-empty. Defines the ground set and the element order.
pub fn load_lexicon(path: &PathBuf) -> Result<GroundSet> {
    let text = fs::read_to_string(path)?;
    let labels: Vec<String> = text
        .lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect();
    if labels.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "lexicon {} is empty",
            path.display()
        )));
    }
    GroundSet::with_labels(labels)
}

fn cmd_embed_cli(
    cli: &Cli,
    lexicon: &PathBuf,
    docs: &PathBuf,
    kind: ConstructionKind,
    decimal: bool,
    sink: &mut dyn Write,
) -> Result<i32> {
    let gs = load_lexicon(lexicon)?;
    if let Some(n) = cli.n {
        if n != gs.n() {
            return Err(Error::InvalidArgument(format!(
                "--n {n} does not match lexicon size {}",
                gs.n()
            )));
        }
    }
    let spec = cli.construction_spec(kind, 0, gs.n());
    let docs_text = fs::read_to_string(docs)?;
    cmd_embed(&gs, &docs_text, &spec, decimal, cli.format, sink)
}

/// Build the construction over the lexicon ground set and write one row
/// per document: the doc index followed by the exact distances to every
/// landmark. A document with no in-lexicon tokens embeds as the empty
/// set (all-ones against non-empty landmarks) and triggers a warning.
pub fn cmd_embed(
    gs: &GroundSet,
    docs_text: &str,
    spec: &ConstructionSpec,
    decimal: bool,
    format: OutFormat,
    sink: &mut dyn Write,
) -> Result<i32> {
    let c = Construction::build(spec)?;
    let labels = gs.labels().expect("lexicon ground set has labels");
    let index: HashMap<&str, u32> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i as u32))
        .collect();

    let mut rows_json = Vec::new();
    if format == OutFormat::Csv {
        let cols: Vec<String> = (0..c.masks.len()).map(|i| format!("d{i}")).collect();
        writeln!(sink, "doc,{}", cols.join(","))?;
    }
    for (doc_idx, line) in docs_text.lines().enumerate() {
        let bag = BagOfWords::tokenize(doc_idx.to_string(), line);
        let (mask, dropped) = bag.project(&index, gs.n());
        if dropped > 0 {
            eprintln!("warning: doc {doc_idx}: dropped {dropped} out-of-lexicon token(s)");
        }
        if mask.is_empty() {
            eprintln!(
                "warning: doc {doc_idx}: no in-lexicon tokens; embedding the empty set"
            );
        }
        let sig = signature(&mask, &c.masks)?;
        match format {
            OutFormat::Csv => {
                let cells: Vec<String> = sig
                    .coords()
                    .iter()
                    .map(|d| {
                        if decimal {
                            format!("{:.16e}", d.to_f64())
                        } else {
                            d.to_string()
                        }
                    })
                    .collect();
                writeln!(sink, "{doc_idx},{}", cells.join(","))?;
            }
            OutFormat::Json => {
                let distances: Vec<serde_json::Value> = sig
                    .coords()
                    .iter()
                    .map(|d| {
                        if decimal {
                            json!(d.to_f64())
                        } else {
                            json!([d.num(), d.den()])
                        }
                    })
                    .collect();
                rows_json.push(json!({
                    "doc": doc_idx,
                    "dropped_tokens": dropped,
                    "empty": mask.is_empty(),
                    "distances": distances,
                }));
            }
        }
    }
    if format == OutFormat::Json {
        let data = json!({
            "n": gs.n(),
            "kind": c.kind.to_string(),
            "seed": c.seed,
            "k": c.k,
            "set_size": c.masks.len(),
            "rows": rows_json,
        });
        writeln!(sink, "{}", json!({ "data": data }))?;
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// experiment
// ---------------------------------------------------------------------------

/// Compute configuration for a repeated construction + verification run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ConstructionKind,
    pub n: u32,
    pub seed: u64,
    pub trials: u64,
    pub epsilon: Option<Epsilon>,
    pub scope: Option<Scope>,
    pub k_override: Option<u32>,
    pub limits: Limits,
}

#[derive(Clone, Debug)]
pub struct ExperimentSummary {
    pub kind: ConstructionKind,
    pub n: u32,
    pub k: u32,
    pub set_size: usize,
    pub scope: Scope,
    pub trials: u64,
    pub successes: u64,
    /// (trial index, witness pair) for every failed round.
    pub failures: Vec<(u64, (SubsetMask, SubsetMask))>,
    /// The matching union bound, where its formula applies.
    pub log_bound: Option<f64>,
    pub wall_ms: u128,
}

/// Run `trials` rounds: trial t builds the construction with seed
/// `base_seed XOR t` and verifies it in the configured scope. Reports the
/// success count, every witness, and the matching failure bound.
pub fn cmd_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    if config.trials < 1 {
        return Err(Error::InvalidArgument("--trials must be at least 1".into()));
    }
    let start = Instant::now();

    let mut spec = ConstructionSpec {
        kind: config.kind,
        n: config.n,
        epsilon: config.epsilon,
        x_pivot: 0,
        seed: config.seed,
        k_override: config.k_override,
    };

    // Build once up front to fix k, the set size, and the default scope.
    let first = Construction::build(&spec)?;
    let scope = match config.scope {
        Some(s) => s,
        None => match config.kind {
            ConstructionKind::Theorem1 => Scope::AllPairs,
            ConstructionKind::Triple | ConstructionKind::Theorem2 => Scope::DifferentSizeOnly,
            ConstructionKind::Corollary3 => Scope::SizeAtMost {
                w: first.w.expect("corollary3 carries W"),
            },
        },
    };

    let mut successes = 0u64;
    let mut failures = Vec::new();
    for t in 0..config.trials {
        spec.seed = config.seed ^ t;
        let c = Construction::build(&spec)?;
        let rep = verify_resolving(&c.masks, scope, &config.limits)?;
        if rep.resolving {
            successes += 1;
        } else {
            failures.push((t, rep.witness.expect("non-resolving report has witness")));
        }
    }

    let log_bound = experiment_bound(config.kind, config.n, first.k, first.w)
        .map(|b| b.log());

    Ok(ExperimentSummary {
        kind: config.kind,
        n: config.n,
        k: first.k,
        set_size: first.masks.len(),
        scope,
        trials: config.trials,
        successes,
        failures,
        log_bound,
        wall_ms: start.elapsed().as_millis(),
    })
}

fn experiment_bound(kind: ConstructionKind, n: u32, k: u32, w: Option<u32>) -> Option<LogProb> {
    match kind {
        ConstructionKind::Triple => None,
        ConstructionKind::Theorem1 => sigma1_bound(n, k).ok(),
        ConstructionKind::Theorem2 => {
            if n <= SIGMA2_EXACT_LIMIT {
                sigma2_bound(n, k, RhoMode::Exact).ok()
            } else {
                sigma2_bound(n, k, RhoMode::Hoeffding).ok()
            }
        }
        ConstructionKind::Corollary3 => w.and_then(|w| sigma3_bound(n, k, w).ok()),
    }
}

fn cmd_experiment_cli(cli: &Cli, kind: ConstructionKind, sink: &mut dyn Write) -> Result<i32> {
    let config = ExperimentConfig {
        kind,
        n: cli.require_n()?,
        seed: cli.seed(),
        trials: cli.trials.unwrap_or(1),
        epsilon: cli.epsilon,
        scope: match cli.scope {
            None => None,
            Some(_) => Some(cli.scope_for(kind, None).or_else(|_| {
                // Size-restricted override may need the built W; retry
                // after a probe build.
                let spec = cli.construction_spec(kind, 0, cli.require_n()?);
                let c = Construction::build(&spec)?;
                cli.scope_for(kind, c.w)
            })?),
        },
        k_override: cli.k_override,
        limits: cli.limits(),
    };
    let summary = cmd_experiment(&config)?;

    match cli.format {
        OutFormat::Csv => {
            writeln!(
                sink,
                "kind,n,k,set_size,scope,trials,successes,success_rate,log_bound"
            )?;
            writeln!(
                sink,
                "{},{},{},{},{},{},{},{},{}",
                summary.kind,
                summary.n,
                summary.k,
                summary.set_size,
                summary.scope,
                summary.trials,
                summary.successes,
                summary.successes as f64 / summary.trials as f64,
                blank_or(summary.log_bound),
            )?;
            eprintln!("wall time: {} ms", summary.wall_ms);
        }
        OutFormat::Json => {
            let data = json!({
                "kind": summary.kind.to_string(),
                "n": summary.n,
                "k": summary.k,
                "set_size": summary.set_size,
                "scope": summary.scope.to_string(),
                "trials": summary.trials,
                "successes": summary.successes,
                "success_rate": summary.successes as f64 / summary.trials as f64,
                "log_bound": summary.log_bound,
                "failures": summary.failures.iter().map(|(t, (a, b))| json!({
                    "trial": t,
                    "witness_a": a.to_hex(),
                    "witness_b": b.to_hex(),
                })).collect::<Vec<_>>(),
            });
            writeln!(
                sink,
                "{}",
                json!({ "data": data, "meta": { "wall_ms": summary.wall_ms } })
            )?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(args).unwrap()
    }

    #[test]
    fn cli_parses_global_flags() {
        let cli = parse(&[
            "jacres",
            "experiment",
            "theorem2",
            "--n",
            "24",
            "--epsilon",
            "1/10",
            "--trials",
            "5",
            "--seed",
            "7",
            "--format",
            "json",
        ]);
        assert_eq!(cli.n, Some(24));
        assert_eq!(cli.trials, Some(5));
        assert_eq!(cli.epsilon.unwrap().to_string(), "1/10");
        assert_eq!(cli.format, OutFormat::Json);
        match cli.command {
            Command::Experiment { kind } => assert_eq!(kind, ConstructionKind::Theorem2),
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn cli_rejects_bad_epsilon() {
        assert!(Cli::try_parse_from(["jacres", "construct", "theorem2", "--epsilon", "0/2"])
            .is_err());
    }

    #[test]
    fn experiment_triple_always_succeeds() {
        let config = ExperimentConfig {
            kind: ConstructionKind::Triple,
            n: 6,
            seed: 3,
            trials: 4,
            epsilon: None,
            scope: None,
            k_override: None,
            limits: Limits::default(),
        };
        let s = cmd_experiment(&config).unwrap();
        assert_eq!(s.successes, 4);
        assert_eq!(s.scope, Scope::DifferentSizeOnly);
        assert_eq!(s.set_size, 3);
        assert!(s.failures.is_empty());
        assert!(s.log_bound.is_none());
    }

    #[test]
    fn experiment_derived_seeds_differ() {
        // Two trials with XORed seeds build different sets (overwhelmingly),
        // and the run is reproducible.
        let config = ExperimentConfig {
            kind: ConstructionKind::Theorem1,
            n: 10,
            seed: 42,
            trials: 3,
            epsilon: None,
            scope: None,
            k_override: Some(8),
            limits: Limits::default(),
        };
        let a = cmd_experiment(&config).unwrap();
        let b = cmd_experiment(&config).unwrap();
        assert_eq!(a.successes, b.successes);
        assert_eq!(a.k, 8);
        assert_eq!(a.set_size, 11);
    }

    #[test]
    fn bag_of_words_tokenization() {
        let bag = BagOfWords::tokenize("0".into(), "The  cat SAT on the MAT");
        let tokens: Vec<&str> = bag.tokens.iter().map(|s| s.as_str()).collect();
        assert_eq!(tokens, vec!["cat", "mat", "on", "sat", "the"]);

        let labels = ["the", "cat", "dog"];
        let index: HashMap<&str, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (*l, i as u32))
            .collect();
        let (mask, dropped) = bag.project(&index, 3);
        assert_eq!(mask.elements().collect::<Vec<_>>(), vec![0, 1]);
        assert_eq!(dropped, 3); // sat, on, mat
    }
}
