//! Command line harness: generate corpora, build and serialize indexes,
//! answer query files, cross-check against the oracle, and benchmark.

mod formats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use treequery::counting::CountingIndex;
use treequery::dominance::{DominanceIndex, DominanceVariant};
use treequery::hierarchy::ViewMode;
use treequery::oracle::OracleTree;
use treequery::reporting::ReportingIndex;
use treequery::stats::QueryStats;
use treequery::successor::SuccessorIndex;
use treequery::weighted::{generate_parents, rank_space_reduce, DimMap, Shape, WeightedTree};
use treequery::OrdinalTree;

use formats::{
    parse_index, parse_queries, parse_tree, print_index, print_tree, usage, CliError, IndexFile,
    QueryLine, TreeFile,
};

#[derive(Parser)]
#[command(
    name = "treequery",
    version,
    about = "Multidimensional path queries on weighted trees"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a deterministic random tree file, optionally with a query file
    Generate(GenerateArgs),
    /// Parse a tree file, build every structure, write a flat index file
    Build(BuildArgs),
    /// Answer a query file, one result per line
    Query(QueryArgs),
    /// Cross-check every query against the brute-force oracle
    Verify(VerifyArgs),
    /// Time queries and dump instrumentation counters as CSV
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// random | path | star | caterpillar
    #[arg(long, default_value = "random")]
    shape: String,
    /// Tree file destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also generate this many random queries
    #[arg(long)]
    queries: Option<usize>,
    #[arg(long)]
    queries_out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Override the wide-stage branching factor
    #[arg(long)]
    branching: Option<u32>,
    /// theorem1 | theorem2
    #[arg(long, default_value = "theorem1")]
    variant: String,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, conflicts_with = "index")]
    tree: Option<PathBuf>,
    /// Index file written by `build`; carries its own parameters
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, conflicts_with = "index")]
    epsilon: Option<f64>,
    #[arg(long, conflicts_with = "index")]
    branching: Option<u32>,
    #[arg(long, conflicts_with = "index")]
    variant: Option<String>,
}

#[derive(Args)]
struct CorpusArgs {
    /// Verify this tree file instead of a generated corpus
    #[arg(long, requires = "queries_file")]
    tree: Option<PathBuf>,
    #[arg(long, requires = "tree")]
    queries_file: Option<PathBuf>,
    #[arg(long, conflicts_with = "tree")]
    n: Option<u32>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "random")]
    shape: String,
    /// Generated queries per corpus
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long)]
    branching: Option<u32>,
    #[arg(long, default_value = "theorem1")]
    variant: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, CliError> {
    match cmd {
        Cmd::Generate(a) => generate_cmd(a),
        Cmd::Build(a) => build_cmd(a),
        Cmd::Query(a) => query_cmd(a),
        Cmd::Verify(a) => verify_cmd(a.corpus),
        Cmd::Bench(a) => bench_cmd(a.corpus),
    }
}

fn parse_shape(s: &str) -> Result<Shape, CliError> {
    Shape::parse(s).ok_or_else(|| usage(format!("unknown shape `{s}` (random|path|star|caterpillar)")))
}

fn parse_variant(s: &str) -> Result<DominanceVariant, CliError> {
    DominanceVariant::parse(s)
        .ok_or_else(|| usage(format!("unknown variant `{s}` (theorem1|theorem2)")))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

// ---- corpus generation ---------------------------------------------------

fn gen_raw_tree(n: u32, d: usize, seed: u64, shape: Shape) -> TreeFile {
    let parents = generate_parents(n, seed, shape);
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x7ee5_0000);
    let span = 2 * n as i64 + 1;
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-span..=span)).collect())
        .collect();
    TreeFile { n, d, parents, rows }
}

fn gen_query_lines(n: u32, d: usize, seed: u64, count: usize) -> Vec<QueryLine> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x9e11_0000);
    let span = 2 * n as i64 + 3;
    let rval = |rng: &mut ChaCha20Rng| rng.gen_range(-span..=span);
    let rrange = |rng: &mut ChaCha20Rng| {
        let a = rng.gen_range(-span..=span);
        let b = rng.gen_range(-span..=span);
        (a.min(b), a.max(b))
    };
    let kinds = if d >= 2 { 4 } else { 3 };
    (0..count)
        .map(|i| {
            let x = rng.gen_range(1..=n);
            let y = rng.gen_range(1..=n);
            match i % kinds {
                0 => QueryLine::Count {
                    x,
                    y,
                    ranges: (0..d).map(|_| rrange(&mut rng)).collect(),
                },
                1 => QueryLine::Report {
                    x,
                    y,
                    ranges: (0..d).map(|_| rrange(&mut rng)).collect(),
                },
                2 => QueryLine::Succ {
                    x,
                    y,
                    q1: rval(&mut rng),
                    rest: (1..d).map(|_| rrange(&mut rng)).collect(),
                },
                _ => QueryLine::Dom {
                    x,
                    q: (0..d).map(|_| rval(&mut rng)).collect(),
                },
            }
        })
        .collect()
}

fn generate_cmd(a: GenerateArgs) -> Result<ExitCode, CliError> {
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    if a.d == 0 || a.d > 16 {
        return Err(usage("--d must be in 1..=16"));
    }
    let shape = parse_shape(&a.shape)?;
    let tree = gen_raw_tree(a.n, a.d, a.seed, shape);
    let text = print_tree(&tree);
    match &a.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if let Some(count) = a.queries {
        let out = a
            .queries_out
            .as_ref()
            .ok_or_else(|| usage("--queries needs --queries-out"))?;
        let lines: Vec<String> = gen_query_lines(a.n, a.d, a.seed, count)
            .iter()
            .map(QueryLine::print)
            .collect();
        std::fs::write(out, lines.join("\n") + "\n")?;
    }
    Ok(ExitCode::SUCCESS)
}

// ---- engines -------------------------------------------------------------

/// All four structures over one corpus, built on first use.
struct Engines {
    wt: WeightedTree,
    maps: Vec<DimMap>,
    epsilon: f64,
    branching: Option<u32>,
    variant: DominanceVariant,
    counting: Option<CountingIndex>,
    reporting: Option<ReportingIndex>,
    successor: Option<SuccessorIndex>,
    dominance: Option<DominanceIndex>,
}

enum Answer {
    Count(u64),
    Nodes(Vec<u32>),
    Node(Option<u32>),
}

impl Answer {
    fn print(&self) -> String {
        match self {
            Answer::Count(c) => c.to_string(),
            Answer::Nodes(vs) => vs
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" "),
            Answer::Node(Some(v)) => v.to_string(),
            Answer::Node(None) => "-".to_string(),
        }
    }

    fn cardinality(&self) -> u64 {
        match self {
            Answer::Count(c) => *c,
            Answer::Nodes(vs) => vs.len() as u64,
            Answer::Node(v) => v.is_some() as u64,
        }
    }
}

impl Engines {
    fn new(
        tree: &TreeFile,
        epsilon: f64,
        branching: Option<u32>,
        variant: DominanceVariant,
    ) -> Result<Engines, CliError> {
        let base = Arc::new(OrdinalTree::from_parents(&tree.parents)?);
        let (wt, maps) = rank_space_reduce(&base, &tree.rows)?;
        Ok(Engines {
            wt,
            maps,
            epsilon,
            branching,
            variant,
            counting: None,
            reporting: None,
            successor: None,
            dominance: None,
        })
    }

    fn snap(&self, ranges: &[(i64, i64)]) -> Vec<(u32, u32)> {
        ranges
            .iter()
            .enumerate()
            .map(|(dim, &(lo, hi))| self.maps[dim].rank_range(lo, hi))
            .collect()
    }

    fn answer(&mut self, q: &QueryLine, stats: &mut QueryStats) -> Result<Answer, CliError> {
        let (wt, eps, f, mode) = (&self.wt, self.epsilon, self.branching, ViewMode::Explicit);
        match q {
            QueryLine::Count { x, y, ranges } => {
                let rq = self.snap(ranges);
                if rq.iter().any(|&(lo, hi)| lo > hi) {
                    return Ok(Answer::Count(0));
                }
                let idx = match &self.counting {
                    Some(i) => i,
                    None => self
                        .counting
                        .insert(CountingIndex::build(wt, eps, f, mode)?),
                };
                Ok(Answer::Count(idx.query(*x, *y, &rq, stats)?))
            }
            QueryLine::Report { x, y, ranges } => {
                let rq = self.snap(ranges);
                let idx = match &self.reporting {
                    Some(i) => i,
                    None => self
                        .reporting
                        .insert(ReportingIndex::build(wt, eps, f, mode)?),
                };
                Ok(Answer::Nodes(idx.query(*x, *y, &rq, stats)?))
            }
            QueryLine::Succ { x, y, q1, rest } => {
                let q1r = self.maps[0].rank_at_least(*q1);
                let restr: Vec<(u32, u32)> = rest
                    .iter()
                    .enumerate()
                    .map(|(i, &(lo, hi))| self.maps[i + 1].rank_range(lo, hi))
                    .collect();
                let idx = match &self.successor {
                    Some(i) => i,
                    None => self.successor.insert(SuccessorIndex::build(wt, mode)?),
                };
                Ok(Answer::Node(idx.query(*x, *y, q1r, &restr, stats)?))
            }
            QueryLine::Dom { x, q } => {
                let rq: Vec<u32> = q
                    .iter()
                    .enumerate()
                    .map(|(dim, &qi)| self.maps[dim].rank_at_least(qi))
                    .collect();
                let idx = match &self.dominance {
                    Some(i) => i,
                    None => self
                        .dominance
                        .insert(DominanceIndex::build(wt, eps, f, self.variant, mode)?),
                };
                Ok(Answer::Nodes(idx.query(*x, &rq, stats)?))
            }
        }
    }
}

fn at_line(line: usize, e: CliError) -> CliError {
    match e {
        e @ (CliError::Parse { .. } | CliError::Dimension { .. }) => e,
        e => CliError::Parse {
            line,
            msg: e.to_string(),
        },
    }
}

// ---- build / query -------------------------------------------------------

fn build_cmd(a: BuildArgs) -> Result<ExitCode, CliError> {
    let tree = parse_tree(&read(&a.tree)?)?;
    let variant = parse_variant(&a.variant)?;
    let ix = IndexFile {
        tree,
        epsilon: a.epsilon,
        branching: a.branching,
        variant,
    };
    let mut eng = Engines::new(&ix.tree, ix.epsilon, ix.branching, ix.variant)?;
    let n = ix.tree.n;
    let d = ix.tree.d;
    let t0 = Instant::now();
    let counting = CountingIndex::build(&eng.wt, ix.epsilon, ix.branching, ViewMode::Explicit)?;
    let t1 = Instant::now();
    let reporting = ReportingIndex::build(&eng.wt, ix.epsilon, ix.branching, ViewMode::Explicit)?;
    let t2 = Instant::now();
    let successor = SuccessorIndex::build(&eng.wt, ViewMode::Explicit)?;
    let t3 = Instant::now();
    eprintln!(
        "n={n} d={d}: counting {} bytes ({:?}), reporting {} bytes ({:?}), successor {} bytes ({:?})",
        counting.heap_bytes(),
        t1 - t0,
        reporting.heap_bytes(),
        t2 - t1,
        successor.heap_bytes(),
        t3 - t2,
    );
    if d >= 2 {
        let t4 = Instant::now();
        let dominance =
            DominanceIndex::build(&eng.wt, ix.epsilon, ix.branching, ix.variant, ViewMode::Explicit)?;
        eprintln!(
            "dominance ({}) {} bytes ({:?})",
            a.variant,
            dominance.heap_bytes(),
            t4.elapsed()
        );
        eng.dominance = Some(dominance);
    } else {
        eprintln!("dominance skipped (needs d >= 2)");
    }
    std::fs::write(&a.out, print_index(&ix))?;
    eprintln!("index written to {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn query_cmd(a: QueryArgs) -> Result<ExitCode, CliError> {
    let ix = match (&a.tree, &a.index) {
        (Some(t), None) => IndexFile {
            tree: parse_tree(&read(t)?)?,
            epsilon: a.epsilon.unwrap_or(0.5),
            branching: a.branching,
            variant: parse_variant(a.variant.as_deref().unwrap_or("theorem1"))?,
        },
        (None, Some(i)) => parse_index(&read(i)?)?,
        _ => return Err(usage("give exactly one of --tree or --index")),
    };
    let queries = parse_queries(&read(&a.queries)?, ix.tree.n, ix.tree.d)?;
    let mut eng = Engines::new(&ix.tree, ix.epsilon, ix.branching, ix.variant)?;
    let mut stats = QueryStats::new();
    let mut out = String::new();
    for (line, q) in &queries {
        let ans = eng.answer(q, &mut stats).map_err(|e| at_line(*line, e))?;
        out.push_str(&ans.print());
        out.push('\n');
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

// ---- verify --------------------------------------------------------------

struct Corpus {
    tree: TreeFile,
    queries: Vec<(usize, QueryLine)>,
    /// regeneration note for reproducers; empty in file mode
    provenance: String,
}

fn load_corpus(a: &CorpusArgs) -> Result<Corpus, CliError> {
    match (&a.tree, a.n) {
        (Some(path), None) => {
            let tree = parse_tree(&read(path)?)?;
            let qf = a.queries_file.as_ref().unwrap();
            let queries = parse_queries(&read(qf)?, tree.n, tree.d)?;
            Ok(Corpus {
                tree,
                queries,
                provenance: format!("--tree {} --queries-file {}", path.display(), qf.display()),
            })
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            if a.d == 0 || a.d > 16 {
                return Err(usage("--d must be in 1..=16"));
            }
            let shape = parse_shape(&a.shape)?;
            let tree = gen_raw_tree(n, a.d, a.seed, shape);
            let queries = gen_query_lines(n, a.d, a.seed, a.queries)
                .into_iter()
                .enumerate()
                .map(|(i, q)| (i + 1, q))
                .collect();
            Ok(Corpus {
                tree,
                queries,
                provenance: format!(
                    "--n {n} --d {} --seed {} --shape {}",
                    a.d, a.seed, a.shape
                ),
            })
        }
        _ => Err(usage("give either --n (generated corpus) or --tree with --queries-file")),
    }
}

fn oracle_answer(oracle: &OracleTree, q: &QueryLine) -> Result<Answer, CliError> {
    Ok(match q {
        QueryLine::Count { x, y, ranges } => Answer::Count(oracle.count(*x, *y, ranges)?),
        QueryLine::Report { x, y, ranges } => Answer::Nodes(oracle.report(*x, *y, ranges)?),
        QueryLine::Succ { x, y, q1, rest } => Answer::Node(oracle.successor(*x, *y, *q1, rest)?),
        QueryLine::Dom { x, q } => Answer::Nodes(oracle.dominance(*x, q)?),
    })
}

fn answers_differ(a: &Answer, b: &Answer) -> bool {
    match (a, b) {
        (Answer::Count(x), Answer::Count(y)) => x != y,
        (Answer::Nodes(x), Answer::Nodes(y)) => x != y,
        (Answer::Node(x), Answer::Node(y)) => x != y,
        _ => true,
    }
}

fn mismatch_holds(q: &QueryLine, eng: &mut Engines, oracle: &OracleTree) -> bool {
    let mut stats = QueryStats::new();
    match (eng.answer(q, &mut stats), oracle_answer(oracle, q)) {
        (Ok(got), Ok(want)) => answers_differ(&got, &want),
        _ => false,
    }
}

/// Greedy shrink: pull the endpoints toward the root and halve the ranges
/// while the disagreement survives.
fn minimize(q: &QueryLine, eng: &mut Engines, oracle: &OracleTree) -> QueryLine {
    let tree = Arc::clone(eng.wt.tree());
    let parent = |v: u32| tree.parent(v).filter(|&p| p != 0);
    let mut cur = q.clone();
    for _ in 0..4096 {
        let mut cands: Vec<QueryLine> = Vec::new();
        let shrink_ranges = |rs: &[(i64, i64)], make: &dyn Fn(Vec<(i64, i64)>) -> QueryLine,
                             cands: &mut Vec<QueryLine>| {
            for i in 0..rs.len() {
                if rs[i].0 < rs[i].1 {
                    let (lo, hi) = rs[i];
                    let mid = lo + (hi - lo) / 2;
                    for nr in [(lo, mid), (mid + 1, hi)] {
                        let mut v = rs.to_vec();
                        v[i] = nr;
                        cands.push(make(v));
                    }
                }
            }
        };
        match &cur {
            QueryLine::Count { x, y, ranges } => {
                let (x, y) = (*x, *y);
                if let Some(p) = parent(x) {
                    cands.push(QueryLine::Count { x: p, y, ranges: ranges.clone() });
                }
                if let Some(p) = parent(y) {
                    cands.push(QueryLine::Count { x, y: p, ranges: ranges.clone() });
                }
                shrink_ranges(ranges, &|v| QueryLine::Count { x, y, ranges: v }, &mut cands);
            }
            QueryLine::Report { x, y, ranges } => {
                let (x, y) = (*x, *y);
                if let Some(p) = parent(x) {
                    cands.push(QueryLine::Report { x: p, y, ranges: ranges.clone() });
                }
                if let Some(p) = parent(y) {
                    cands.push(QueryLine::Report { x, y: p, ranges: ranges.clone() });
                }
                shrink_ranges(ranges, &|v| QueryLine::Report { x, y, ranges: v }, &mut cands);
            }
            QueryLine::Succ { x, y, q1, rest } => {
                let (x, y, q1) = (*x, *y, *q1);
                if let Some(p) = parent(x) {
                    cands.push(QueryLine::Succ { x: p, y, q1, rest: rest.clone() });
                }
                if let Some(p) = parent(y) {
                    cands.push(QueryLine::Succ { x, y: p, q1, rest: rest.clone() });
                }
                shrink_ranges(rest, &|v| QueryLine::Succ { x, y, q1, rest: v }, &mut cands);
            }
            QueryLine::Dom { x, q } => {
                if let Some(p) = parent(*x) {
                    cands.push(QueryLine::Dom { x: p, q: q.clone() });
                }
            }
        }
        match cands.into_iter().find(|c| mismatch_holds(c, eng, oracle)) {
            Some(better) => cur = better,
            None => return cur,
        }
    }
    cur
}

fn verify_cmd(a: CorpusArgs) -> Result<ExitCode, CliError> {
    let corpus = load_corpus(&a)?;
    let variant = parse_variant(&a.variant)?;
    let mut eng = Engines::new(&corpus.tree, a.epsilon, a.branching, variant)?;
    let oracle = OracleTree::new(&corpus.tree.parents, &corpus.tree.rows)?;
    let mut stats = QueryStats::new();
    for (line, q) in &corpus.queries {
        let got = eng.answer(q, &mut stats).map_err(|e| at_line(*line, e))?;
        let want = oracle_answer(&oracle, q).map_err(|e| at_line(*line, e))?;
        if answers_differ(&got, &want) {
            let small = minimize(q, &mut eng, &oracle);
            let mut s2 = QueryStats::new();
            let got2 = eng.answer(&small, &mut s2)?.print();
            let want2 = oracle_answer(&oracle, &small)?.print();
            eprintln!("mismatch at line {line}: `{}`", q.print());
            eprintln!("  structure: {}", got.print());
            eprintln!("  oracle:    {}", want.print());
            eprintln!("minimized reproducer ({}):", corpus.provenance);
            eprintln!("  {}", small.print());
            eprintln!("  structure: {got2}");
            eprintln!("  oracle:    {want2}");
            return Ok(ExitCode::FAILURE);
        }
    }
    if stats.violations() > 0 {
        eprintln!(
            "instrumentation: {} budget violations over {} queries",
            stats.violations(),
            corpus.queries.len()
        );
        return Ok(ExitCode::FAILURE);
    }
    println!(
        "ok: {} queries verified ({})",
        corpus.queries.len(),
        corpus.provenance
    );
    Ok(ExitCode::SUCCESS)
}

// ---- bench ---------------------------------------------------------------

fn bench_cmd(a: CorpusArgs) -> Result<ExitCode, CliError> {
    let corpus = load_corpus(&a)?;
    let variant = parse_variant(&a.variant)?;
    let mut eng = Engines::new(&corpus.tree, a.epsilon, a.branching, variant)?;
    let n = corpus.tree.n;
    let d = corpus.tree.d;
    let mut stats = QueryStats::new();
    // build each structure outside the timed region
    let mut seen = std::collections::HashSet::new();
    for (line, q) in &corpus.queries {
        if seen.insert(q.kind()) {
            eng.answer(q, &mut stats).map_err(|e| at_line(*line, e))?;
        }
    }
    stats.reset();
    let mut out = String::from("query_kind,n,d,variant,time_ns,child_queries,probes,k\n");
    for (line, q) in &corpus.queries {
        let (cq0, pr0) = (stats.child_queries, stats.probes);
        let t0 = Instant::now();
        let ans = eng.answer(q, &mut stats).map_err(|e| at_line(*line, e))?;
        let dt = t0.elapsed().as_nanos();
        let var = match q {
            QueryLine::Dom { .. } => &a.variant,
            _ => "-",
        };
        out.push_str(&format!(
            "{},{n},{d},{var},{dt},{},{},{}\n",
            q.kind(),
            stats.child_queries - cq0,
            stats.probes - pr0,
            ans.cardinality()
        ));
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}
