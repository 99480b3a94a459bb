//! Acceptance gate for the whole crate: oracle equivalence for all four
//! query families, the instrumented complexity budgets, structural
//! invariants of the covers and hierarchies, and space-growth sanity.
//!
//! Each criterion is one test that prints a single `criterion N (...): pass`
//! or `... FAIL` line (visible under --nocapture). Criteria 3-6 assert over
//! the very same runs criteria 1 and 2 executed, so the two query workloads
//! run once each behind a OnceLock and the budget tests read their counters.

use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use treequery::counting::{build_cover, wide_fanout, CountingBase, CountingIndex};
use treequery::dominance::{DominanceIndex, DominanceIndex2D, DominanceVariant};
use treequery::hierarchy::{child_range, RangeHierarchy, ViewMode};
use treequery::oracle::OracleTree;
use treequery::reporting::ReportingIndex;
use treequery::stats::QueryStats;
use treequery::successor::SuccessorIndex;
use treequery::weighted::{generate, generate_parents, Shape, WeightedTree};
use treequery::{OrdinalTree, NONE};

const NS: [u32; 6] = [1, 2, 17, 64, 256, 512];
const SHAPES: [Shape; 3] = [Shape::Random, Shape::Path, Shape::Caterpillar];
const QUERIES_PER_CONFIG: usize = 1000;

fn verdict(idx: u32, label: &str, ok: bool, detail: String) {
    let v = if ok { "pass" } else { "FAIL" };
    println!("criterion {idx} ({label}): {v} -- {detail}");
    assert!(ok, "criterion {idx} ({label}) failed: {detail}");
}

fn mode_for(k: usize) -> ViewMode {
    if k % 2 == 0 {
        ViewMode::Explicit
    } else {
        ViewMode::IndexOnly
    }
}

fn oracle_of(wt: &WeightedTree) -> OracleTree {
    let t = wt.tree();
    let n = wt.n();
    let parents: Vec<u32> = (2..=n).map(|v| t.parent(v).unwrap()).collect();
    let rows: Vec<Vec<i64>> = (1..=n)
        .map(|v| wt.vector(v).into_iter().map(|w| w as i64).collect())
        .collect();
    OracleTree::new(&parents, &rows).unwrap()
}

fn rank_range(rng: &mut ChaCha20Rng, n: u32) -> (u32, u32) {
    match rng.gen_range(0u32..10) {
        0 => (1, n),
        1 => (rng.gen_range(1..=n), n),
        2 => (1, rng.gen_range(1..=n)),
        3 => {
            let a = rng.gen_range(1..=n);
            (a, a)
        }
        _ => {
            let a = rng.gen_range(1..=n);
            let b = rng.gen_range(1..=n);
            (a.min(b), a.max(b))
        }
    }
}

/// Like rank_range but occasionally empty, for entry points that accept
/// empty intervals.
fn loose_range(rng: &mut ChaCha20Rng, n: u32) -> (u32, u32) {
    if rng.gen_range(0u32..12) == 0 {
        (n + 1, n)
    } else {
        rank_range(rng, n)
    }
}

fn as_i64(q: &[(u32, u32)]) -> Vec<(i64, i64)> {
    q.iter().map(|&(a, b)| (a as i64, b as i64)).collect()
}

struct Mismatches {
    count: u64,
    first: String,
}

impl Mismatches {
    fn new() -> Mismatches {
        Mismatches {
            count: 0,
            first: String::new(),
        }
    }
    fn note(&mut self, msg: impl FnOnce() -> String) {
        self.count += 1;
        if self.first.is_empty() {
            self.first = msg();
        }
    }
}

// ---- criterion 1 workload: counting -------------------------------------

struct CountingRun {
    configs: usize,
    queries: u64,
    stats: QueryStats,
    base_configs: usize,
    base_queries: u64,
    base_stats: QueryStats,
    mismatches: Mismatches,
    elapsed: Duration,
}

static COUNTING: OnceLock<CountingRun> = OnceLock::new();

fn counting_run() -> &'static CountingRun {
    COUNTING.get_or_init(run_counting_workload)
}

fn run_counting_workload() -> CountingRun {
    let start = Instant::now();
    let mut run = CountingRun {
        configs: 0,
        queries: 0,
        stats: QueryStats::new(),
        base_configs: 0,
        base_queries: 0,
        base_stats: QueryStats::new(),
        mismatches: Mismatches::new(),
        elapsed: Duration::ZERO,
    };

    // full index against the oracle, rank-space coordinates
    for d in [1usize, 2] {
        for (si, &shape) in SHAPES.iter().enumerate() {
            for &n in &NS {
                let seed = 0xc0 + n as u64 * 131 + d as u64 * 17 + si as u64;
                let wt = generate(n, d, seed, shape);
                let oracle = oracle_of(&wt);
                let idx = CountingIndex::build(&wt, 0.5, None, mode_for(run.configs)).unwrap();
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xabcd);
                for _ in 0..QUERIES_PER_CONFIG {
                    let x = rng.gen_range(1..=n);
                    let y = rng.gen_range(1..=n);
                    let q: Vec<(u32, u32)> = (0..d).map(|_| rank_range(&mut rng, n)).collect();
                    let got = idx.query(x, y, &q, &mut run.stats).unwrap();
                    let want = oracle.count(x, y, &as_i64(&q)).unwrap();
                    if got != want {
                        run.mismatches.note(|| {
                            format!("count n={n} d={d} shape={shape:?} x={x} y={y} q={q:?}: got {got}, want {want}")
                        });
                    }
                    run.queries += 1;
                }
                run.configs += 1;
            }
        }
    }

    // base case: every coordinate already lives in the small universe, the
    // table-driven structure answers alone
    for d in [1usize, 2] {
        for (si, &shape) in SHAPES.iter().enumerate() {
            for &n in &NS {
                let seed = 0xba5e + n as u64 * 131 + d as u64 * 17 + si as u64;
                let parents = generate_parents(n, seed, shape);
                let tree = Arc::new(OrdinalTree::from_parents(&parents).unwrap());
                let u = wide_fanout(n, 0.5);
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xdcba);
                let mut w = vec![vec![0u32; n as usize + 1]; d];
                for dim in 0..d {
                    for v in 1..=n as usize {
                        w[dim][v] = rng.gen_range(1..=u);
                    }
                }
                let rows: Vec<Vec<i64>> = (1..=n as usize)
                    .map(|v| (0..d).map(|dim| w[dim][v] as i64).collect())
                    .collect();
                let parents2: Vec<u32> = (2..=n).map(|v| tree.parent(v).unwrap()).collect();
                let oracle = OracleTree::new(&parents2, &rows).unwrap();
                let base = CountingBase::new(Arc::clone(&tree), w, vec![u; d]).unwrap();
                for _ in 0..QUERIES_PER_CONFIG {
                    let x = rng.gen_range(1..=n);
                    let y = rng.gen_range(1..=n);
                    let q: Vec<(u32, u32)> = (0..d).map(|_| loose_range(&mut rng, u)).collect();
                    let got = base.count_path(x, y, &q, &mut run.base_stats).unwrap();
                    let want = oracle.count(x, y, &as_i64(&q)).unwrap();
                    if got != want {
                        run.mismatches.note(|| {
                            format!("base count n={n} d={d} shape={shape:?} u={u} x={x} y={y} q={q:?}: got {got}, want {want}")
                        });
                    }
                    run.base_queries += 1;
                }
                run.base_configs += 1;
            }
        }
    }

    run.elapsed = start.elapsed();
    run
}

// ---- criterion 2 workload: reporting, dominance, successor ---------------

struct PathRun {
    dom_configs: usize,
    dom_queries: u64,
    dom_stats: QueryStats,
    rep_configs: usize,
    rep_queries: u64,
    rep_stats: QueryStats,
    suc_configs: usize,
    suc_queries: u64,
    suc_stats: QueryStats,
    mismatches: Mismatches,
    elapsed: Duration,
}

static PATHS: OnceLock<PathRun> = OnceLock::new();

fn path_run() -> &'static PathRun {
    PATHS.get_or_init(run_path_workload)
}

fn run_path_workload() -> PathRun {
    let start = Instant::now();
    let mut run = PathRun {
        dom_configs: 0,
        dom_queries: 0,
        dom_stats: QueryStats::new(),
        rep_configs: 0,
        rep_queries: 0,
        rep_stats: QueryStats::new(),
        suc_configs: 0,
        suc_queries: 0,
        suc_stats: QueryStats::new(),
        mismatches: Mismatches::new(),
        elapsed: Duration::ZERO,
    };

    for d in [2usize, 3] {
        for (si, &shape) in SHAPES.iter().enumerate() {
            for &n in &NS {
                let seed = 0xd0 + n as u64 * 131 + d as u64 * 17 + si as u64;
                let wt = generate(n, d, seed, shape);
                let oracle = oracle_of(&wt);
                for variant in [DominanceVariant::Theorem1, DominanceVariant::Theorem2] {
                    let idx =
                        DominanceIndex::build(&wt, 0.5, None, variant, mode_for(run.dom_configs))
                            .unwrap();
                    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xd033);
                    for _ in 0..QUERIES_PER_CONFIG {
                        let x = rng.gen_range(1..=n);
                        let q: Vec<u32> = (0..d).map(|_| rng.gen_range(0..=n + 1)).collect();
                        let got = idx.query(x, &q, &mut run.dom_stats).unwrap();
                        let qi: Vec<i64> = q.iter().map(|&v| v as i64).collect();
                        let want = oracle.dominance(x, &qi).unwrap();
                        if got != want {
                            run.mismatches.note(|| {
                                format!("dominance n={n} d={d} shape={shape:?} {variant:?} x={x} q={q:?}: got {got:?}, want {want:?}")
                            });
                        }
                        run.dom_queries += 1;
                    }
                    run.dom_configs += 1;
                }
            }
        }
    }

    for d in [2usize, 3] {
        for (si, &shape) in SHAPES.iter().enumerate() {
            for &n in &NS {
                let seed = 0x4e + n as u64 * 131 + d as u64 * 17 + si as u64;
                let wt = generate(n, d, seed, shape);
                let oracle = oracle_of(&wt);
                let idx =
                    ReportingIndex::build(&wt, 0.5, None, mode_for(run.rep_configs)).unwrap();
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x4e44);
                for _ in 0..QUERIES_PER_CONFIG {
                    let x = rng.gen_range(1..=n);
                    let y = rng.gen_range(1..=n);
                    let q: Vec<(u32, u32)> = (0..d).map(|_| loose_range(&mut rng, n)).collect();
                    let got = idx.query(x, y, &q, &mut run.rep_stats).unwrap();
                    let want = oracle.report(x, y, &as_i64(&q)).unwrap();
                    if got != want {
                        run.mismatches.note(|| {
                            format!("report n={n} d={d} shape={shape:?} x={x} y={y} q={q:?}: got {got:?}, want {want:?}")
                        });
                    }
                    run.rep_queries += 1;
                }
                run.rep_configs += 1;
            }
        }
    }

    for d in [1usize, 2, 3] {
        for (si, &shape) in SHAPES.iter().enumerate() {
            for &n in &NS {
                let seed = 0x5c + n as u64 * 131 + d as u64 * 17 + si as u64;
                let wt = generate(n, d, seed, shape);
                let oracle = oracle_of(&wt);
                let idx = SuccessorIndex::build(&wt, mode_for(run.suc_configs)).unwrap();
                let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5cc5);
                for _ in 0..QUERIES_PER_CONFIG {
                    let x = rng.gen_range(1..=n);
                    let y = rng.gen_range(1..=n);
                    let q1 = rng.gen_range(0..=n + 1);
                    let rest: Vec<(u32, u32)> =
                        (1..d).map(|_| loose_range(&mut rng, n)).collect();
                    let got = idx.query(x, y, q1, &rest, &mut run.suc_stats).unwrap();
                    let want = oracle.successor(x, y, q1 as i64, &as_i64(&rest)).unwrap();
                    if got != want {
                        run.mismatches.note(|| {
                            format!("successor n={n} d={d} shape={shape:?} x={x} y={y} q1={q1} rest={rest:?}: got {got:?}, want {want:?}")
                        });
                    }
                    run.suc_queries += 1;
                }
                run.suc_configs += 1;
            }
        }
    }

    run.elapsed = start.elapsed();
    run
}

// ---- criteria 1..6 -------------------------------------------------------

#[test]
fn c1_counting_matches_oracle() {
    let r = counting_run();
    let ok = r.mismatches.count == 0 && r.elapsed < Duration::from_secs(60);
    verdict(
        1,
        "counting oracle equivalence",
        ok,
        format!(
            "{} index configs ({} queries) + {} small-universe configs ({} queries), {} mismatches, {:.1}s{}{}",
            r.configs,
            r.queries,
            r.base_configs,
            r.base_queries,
            r.mismatches.count,
            r.elapsed.as_secs_f64(),
            if r.mismatches.first.is_empty() { "" } else { "; first: " },
            r.mismatches.first
        ),
    );
}

#[test]
fn c2_reporting_dominance_successor_match_oracle() {
    let r = path_run();
    let ok = r.mismatches.count == 0 && r.elapsed < Duration::from_secs(120);
    verdict(
        2,
        "reporting/dominance/successor oracle equivalence",
        ok,
        format!(
            "dominance {} configs ({} queries), reporting {} ({}), successor {} ({}), {} mismatches, {:.1}s{}{}",
            r.dom_configs,
            r.dom_queries,
            r.rep_configs,
            r.rep_queries,
            r.suc_configs,
            r.suc_queries,
            r.mismatches.count,
            r.elapsed.as_secs_f64(),
            if r.mismatches.first.is_empty() { "" } else { "; first: " },
            r.mismatches.first
        ),
    );
}

#[test]
fn c3_dominance_probe_budget() {
    let r = path_run();
    let ok = r.dom_stats.probe_bound_violations == 0 && r.dom_stats.probes > 0;
    verdict(
        3,
        "dominance base probe budget 2k+1",
        ok,
        format!(
            "{} probes across {} dominance queries, {} over budget",
            r.dom_stats.probes, r.dom_queries, r.dom_stats.probe_bound_violations
        ),
    );
}

#[test]
fn c4_framework_dispatch_budget() {
    let c = counting_run();
    let p = path_run();
    let all = [
        &c.stats,
        &p.dom_stats,
        &p.rep_stats,
        &p.suc_stats,
    ];
    let dispatches: u64 = all.iter().map(|s| s.child_queries).sum();
    let over: u64 = all.iter().map(|s| s.dispatch_bound_violations).sum();
    let worst = all
        .iter()
        .map(|s| s.max_subpath_child_queries)
        .max()
        .unwrap();
    let ok = over == 0 && dispatches > 0;
    verdict(
        4,
        "per-subpath dispatch budget 2(h-1)",
        ok,
        format!(
            "{dispatches} dispatches over both workloads, worst subpath used {worst}, {over} over budget"
        ),
    );
}

#[test]
fn c5_counting_base_lookup_budget() {
    let r = counting_run();
    // direct small-universe runs plus every base call the index issued
    let over = r.base_stats.lookup_bound_violations + r.stats.lookup_bound_violations;
    let worst = r.base_stats.max_base_lookups.max(r.stats.max_base_lookups);
    let ok = over == 0 && worst <= 12 && r.base_stats.base_lookups > 0;
    verdict(
        5,
        "counting base constant lookups",
        ok,
        format!(
            "worst call used {worst} lookups (budget 12), {} lookups total, {over} over budget",
            r.base_stats.base_lookups + r.stats.base_lookups
        ),
    );
}

#[test]
fn c6_successor_iteration_budget() {
    let r = path_run();
    // largest structure in the grid: n = 512, so h = 10 and the search may
    // use at most ceil(lg 10) + 2 = 6 iterations
    let ok = r.suc_stats.iter_bound_violations == 0
        && r.suc_stats.max_search_iters <= 6
        && r.suc_stats.search_iters > 0;
    verdict(
        6,
        "successor search iteration budget",
        ok,
        format!(
            "{} iterations across {} queries, worst search used {} (cap 6 at n=512), {} over budget",
            r.suc_stats.search_iters,
            r.suc_queries,
            r.suc_stats.max_search_iters,
            r.suc_stats.iter_bound_violations
        ),
    );
}

// ---- criterion 7: structural invariants ----------------------------------

fn check_cover(tree: &OrdinalTree, param: u32) {
    let cover = build_cover(tree, param);
    let l = cover.param as usize;
    let n = tree.len();
    let is_root = |v: u32| tree.parent(v).map_or(true, |p| p == 0);

    let mut covered = vec![false; n as usize + 1];
    let mut nonroot_seen = vec![0u32; n as usize + 1];
    for cl in &cover.clusters {
        assert!(!cl.nodes.is_empty() && cl.nodes.len() <= 2 * l - 2);
        assert!(cl.nodes.windows(2).all(|w| w[0] < w[1]), "nodes not ascending");
        assert!(cl.nodes.binary_search(&cl.root).is_ok(), "root missing");
        for &u in &cl.nodes {
            covered[u as usize] = true;
            if u != cl.root {
                nonroot_seen[u as usize] += 1;
                let p = tree.parent(u).unwrap();
                assert!(p != 0 && cl.nodes.binary_search(&p).is_ok(), "cluster disconnected");
            }
        }
    }
    let mut roots = 0u64;
    for v in 1..=n {
        assert!(covered[v as usize], "node {v} uncovered");
        let h = cover.home[v as usize];
        assert_ne!(h, NONE, "node {v} homeless");
        let hc = &cover.clusters[h as usize];
        if is_root(v) {
            roots += 1;
            assert_eq!(nonroot_seen[v as usize], 0);
            assert_eq!(hc.root, v);
        } else {
            assert_eq!(nonroot_seen[v as usize], 1, "node {v} in several clusters");
            assert!(hc.nodes.binary_search(&v).is_ok() && hc.root != v);
        }
    }
    // every closed cluster consumed at least param-1 fresh non-root nodes,
    // plus one leftover per tree root
    let cap = (n as u64 - roots) / (l as u64 - 1) + roots;
    assert!(cover.clusters.len() as u64 <= cap, "too many clusters");
}

fn check_hierarchy_blocks(tree: &Arc<OrdinalTree>, w: &[u32], f: u32, mode: ViewMode) -> usize {
    let n = tree.len();
    let hier = RangeHierarchy::build(tree, w, f, mode).unwrap();
    let mut blocks = vec![(1u32, n)];
    let mut checked = 0usize;
    for l in 1..=hier.built_levels() {
        for &(a, b) in &blocks {
            // the block's copies occupy exactly the local id range [a, b],
            // in source preorder, and carry exactly the weights a..=b
            let mut prev = 0u32;
            let mut ws = Vec::with_capacity((b - a + 1) as usize);
            for id in a..=b {
                let src = hier.source_of(l, id).unwrap();
                assert!(src > prev, "block slice out of preorder at level {l}");
                prev = src;
                ws.push(hier.weight(src));
            }
            ws.sort_unstable();
            assert!(
                ws.iter().zip(a..=b).all(|(&got, want)| got == want),
                "level {l} block [{a},{b}] does not hold its weight range"
            );
            checked += 1;
        }
        let mut next = Vec::new();
        for &(a, b) in &blocks {
            for j in 1..=f {
                let (ca, cb) = child_range(a, b, f, j);
                if ca <= cb {
                    next.push((ca, cb));
                }
            }
        }
        blocks = next;
    }
    checked
}

fn check_dominance_partition(
    tree: &Arc<OrdinalTree>,
    w1: Vec<u32>,
    w2: Vec<u32>,
    f: u32,
    mode: ViewMode,
) {
    let idx = DominanceIndex2D::new(Arc::clone(tree), w1, w2, f, mode).unwrap();
    let n = idx.n();
    let h = idx.height();
    let lam = idx.lambda();
    assert_eq!(lam[0], 0);
    let mut hist = vec![0u64; h as usize + 1];
    for v in 1..=n {
        let l = lam[v as usize];
        assert!(l >= 1 && l <= h, "lambda out of range");
        hist[l as usize] += 1;
    }
    assert_eq!(hist.iter().sum::<u64>(), n as u64, "home levels not a partition");
    assert_eq!(idx.levels_built() as u32, h - 1);
    for l in 1..=idx.levels_built() {
        let (mt, w) = idx.m_level(l);
        assert_eq!(mt.len() as u64, hist[l], "home tree size vs histogram");
        for v in 1..=mt.len() {
            if let Some(p) = mt.parent(v) {
                if p != 0 {
                    assert!(
                        w[p as usize] < w[v as usize],
                        "home tree not strictly decreasing upward"
                    );
                }
            }
        }
    }
}

#[test]
fn c7_structural_invariants() {
    let shapes = [Shape::Random, Shape::Path, Shape::Caterpillar, Shape::Star];
    let mut covers = 0usize;
    let mut blocks = 0usize;
    let mut partitions = 0usize;

    let mut check_one = |n: u32, seed: u64, shape: Shape, params: &[u32], fs: &[u32]| {
        let wt = generate(n, 2, seed, shape);
        let tree = wt.tree();
        for &p in params {
            check_cover(tree, p);
            covers += 1;
        }
        let mut w1 = vec![0u32];
        w1.extend_from_slice(wt.dim_weights(0));
        let mut w2 = vec![0u32];
        w2.extend_from_slice(wt.dim_weights(1));
        for &f in fs {
            blocks += check_hierarchy_blocks(tree, wt.dim_weights(0), f, mode_for(f as usize));
            check_dominance_partition(tree, w1.clone(), w2.clone(), f, mode_for(n as usize + f as usize));
            partitions += 1;
        }
    };

    // every size up to 128, rotating shapes
    for n in 1..=128u32 {
        let shape = shapes[n as usize % 4];
        check_one(n, 7000 + n as u64, shape, &[2, 3, 7], &[2, 3]);
    }
    // sampled larger sizes
    for (i, &(n, seed)) in [(392u32, 81u64), (1024, 82), (2048, 83), (4096, 84)]
        .iter()
        .enumerate()
    {
        check_one(n, seed, shapes[i % 4], &[17], &[2, 4]);
    }

    verdict(
        7,
        "structural invariants",
        true,
        format!("{covers} covers, {blocks} hierarchy blocks, {partitions} home-level partitions checked"),
    );
}

// ---- criterion 8: space growth -------------------------------------------

#[test]
fn c8_space_growth() {
    let sizes = [4096u32, 8192, 16384, 32768];
    let seeds = [101u64, 202, 303];

    let mut base_avg = Vec::new();
    let mut dom_avg = Vec::new();
    for &n in &sizes {
        let mut base_total = 0usize;
        let mut dom_total = 0usize;
        for &seed in &seeds {
            let parents = generate_parents(n, seed, Shape::Random);
            let tree = Arc::new(OrdinalTree::from_parents(&parents).unwrap());
            let u = wide_fanout(n, 0.5);
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ n as u64);
            let mut w = vec![vec![0u32; n as usize + 1]; 2];
            for dim in 0..2 {
                for v in 1..=n as usize {
                    w[dim][v] = rng.gen_range(1..=u);
                }
            }
            let base = CountingBase::new(Arc::clone(&tree), w, vec![u, u]).unwrap();
            base_total += base.heap_bytes();

            let wt = generate(n, 2, seed, Shape::Random);
            let dom = DominanceIndex::build(
                &wt,
                0.5,
                None,
                DominanceVariant::Theorem1,
                ViewMode::IndexOnly,
            )
            .unwrap();
            dom_total += dom.heap_bytes();
        }
        base_avg.push(base_total as f64 / seeds.len() as f64);
        dom_avg.push(dom_total as f64 / seeds.len() as f64);
    }

    let ratios = |avg: &[f64]| -> Vec<f64> {
        avg.windows(2).map(|w| w[1] / w[0]).collect()
    };
    let base_r = ratios(&base_avg);
    let dom_r = ratios(&dom_avg);
    let ok = base_r.iter().chain(dom_r.iter()).all(|&r| r <= 2.5);
    let fmt = |rs: &[f64]| {
        rs.iter()
            .map(|r| format!("{r:.2}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    verdict(
        8,
        "space growth per doubling",
        ok,
        format!(
            "counting base ratios [{}], dominance d=2 ratios [{}], cap 2.5 (n = 4096..32768, 3 seeds)",
            fmt(&base_r),
            fmt(&dom_r)
        ),
    );
}
