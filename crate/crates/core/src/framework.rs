//! Dimension-reduction engine shared by every query family.
//!
//! A d-dimensional path query is answered by descending a range hierarchy
//! over the last weight dimension: child ranges fully inside the query
//! interval dispatch one lower-dimensional query each, ranges straddling an
//! endpoint recurse. The binary flavor (f = 2) drops the reduced dimension
//! entirely and dispatches into the child level's structure; the wide flavor
//! keeps the reduced dimension as the auxiliary tree's label coordinate, so
//! a whole run of contained children becomes a single dispatch at the
//! current level with a label interval.
//!
//! Queries work on half paths: the stretch from a node x up to, but not
//! including, an ancestor `top` (0 meaning the walk runs through the root).
//! A full x-to-y path query is two half paths plus the lca singleton.
//!
//! Both descents count their dispatches and police the budget of 2(h-1)
//! child queries per subpath.

use crate::error::Error;
use crate::hierarchy::{child_of, child_range, RangeHierarchy, ViewMode};
use crate::stats::QueryStats;
use crate::tree::{NodeId, OrdinalTree};
use std::marker::PhantomData;
use std::sync::Arc;

/// Inclusive query interval; lo > hi is an allowed empty range.
pub type Range = (u32, u32);

/// One stage's input: a tree (dummy-rooted below the top stage), large
/// coordinates still in rank space, and small coordinates accumulated from
/// wide reductions, each with its universe size. All arrays are indexed by
/// node id with slot 0 holding the dummy sentinel 0.
pub struct StageData {
    pub tree: Arc<OrdinalTree>,
    pub large: Vec<Vec<u32>>,
    pub small: Vec<Vec<u32>>,
    pub small_universe: Vec<u32>,
}

impl StageData {
    pub fn from_weighted(wt: &crate::weighted::WeightedTree) -> StageData {
        let n = wt.n();
        let mut large = vec![vec![0u32; n as usize + 1]; wt.dims()];
        for d in 0..wt.dims() {
            for v in 1..=n {
                large[d][v as usize] = wt.weight(v, d);
            }
        }
        StageData {
            tree: Arc::clone(wt.tree()),
            large,
            small: Vec::new(),
            small_universe: Vec::new(),
        }
    }

    pub fn n(&self) -> u32 {
        self.tree.len()
    }

    /// True when node v's coordinates fall inside every given interval.
    pub fn node_in(&self, v: NodeId, lq: &[Range], sq: &[Range]) -> bool {
        lq.iter()
            .enumerate()
            .all(|(d, &(lo, hi))| (lo..=hi).contains(&self.large[d][v as usize]))
            && sq
                .iter()
                .enumerate()
                .all(|(k, &(lo, hi))| (lo..=hi).contains(&self.small[k][v as usize]))
    }

    pub fn heap_bytes(&self) -> usize {
        let per: usize = self
            .large
            .iter()
            .chain(self.small.iter())
            .map(|a| std::mem::size_of_val(&a[..]))
            .sum();
        self.tree.heap_bytes() + per
    }
}

/// Aggregate semantics of a query family: how per-node answers combine, and
/// how answers lift through a level's source map.
pub trait PathAggregate {
    type Elem: Clone + std::fmt::Debug;
    fn combine(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn lift(&self, e: Self::Elem, map: &dyn Fn(NodeId) -> NodeId) -> Self::Elem;
    fn single(&self, v: NodeId, data: &StageData) -> Self::Elem;
}

/// Path counting: how many nodes match.
pub struct CountAgg;

impl PathAggregate for CountAgg {
    type Elem = u64;
    fn combine(&self, a: u64, b: u64) -> u64 {
        a + b
    }
    fn lift(&self, e: u64, _map: &dyn Fn(NodeId) -> NodeId) -> u64 {
        e
    }
    fn single(&self, _v: NodeId, _data: &StageData) -> u64 {
        1
    }
}

/// Path reporting with materialized node sets.
pub struct CollectAgg;

impl PathAggregate for CollectAgg {
    type Elem = Vec<u32>;
    fn combine(&self, mut a: Vec<u32>, mut b: Vec<u32>) -> Vec<u32> {
        a.append(&mut b);
        a
    }
    fn lift(&self, e: Vec<u32>, map: &dyn Fn(NodeId) -> NodeId) -> Vec<u32> {
        e.into_iter().map(|v| map(v)).collect()
    }
    fn single(&self, v: NodeId, _data: &StageData) -> Vec<u32> {
        vec![v]
    }
}

/// Smallest first-dimension weight, ties to the smaller node id. First
/// coordinates pass through stages unchanged, so keys stay comparable
/// across levels.
pub struct MinFirstAgg;

impl PathAggregate for MinFirstAgg {
    type Elem = (u32, u32); // (first weight, node)
    fn combine(&self, a: (u32, u32), b: (u32, u32)) -> (u32, u32) {
        a.min(b)
    }
    fn lift(&self, e: (u32, u32), map: &dyn Fn(NodeId) -> NodeId) -> (u32, u32) {
        (e.0, map(e.1))
    }
    fn single(&self, v: NodeId, data: &StageData) -> (u32, u32) {
        (data.large[0][v as usize], v)
    }
}

/// A structure answering half-path queries against interval constraints.
pub trait HalfQuery<A: PathAggregate> {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        agg: &A,
        stats: &mut QueryStats,
    ) -> Option<A::Elem>;
}

/// Builds the structure terminating a reduction chain.
pub trait BaseFactory<A: PathAggregate> {
    type Base: HalfQuery<A>;
    /// Number of large dimensions the base consumes directly.
    fn target_large(&self) -> usize;
    fn build(&self, data: &StageData) -> Result<Self::Base, Error>;
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Reduction {
    Binary,
    Wide,
}

#[derive(Clone, Copy)]
pub struct StageConfig {
    pub kind: Reduction,
    pub f: u32,
    pub view_mode: ViewMode,
}

impl StageConfig {
    /// Binary reduction is fanout 2 by definition.
    pub fn binary(view_mode: ViewMode) -> StageConfig {
        StageConfig {
            kind: Reduction::Binary,
            f: 2,
            view_mode,
        }
    }

    pub fn wide(f: u32, view_mode: ViewMode) -> StageConfig {
        StageConfig {
            kind: Reduction::Wide,
            f: f.max(2),
            view_mode,
        }
    }
}

pub enum BinaryDispatch {
    /// The query interval covers the whole universe: the entire subpath goes
    /// to the level-1 child in one uncounted dispatch.
    Full,
    /// Contained child range: query level l's child structure.
    Level { l: u32, x_l: u32, top_l: u32 },
    /// Contained singleton at the leaf level; v is this stage's node.
    Leaf { v: u32 },
}

pub enum WideDispatch {
    /// Whole-universe query, label interval [1,f]; uncounted.
    FullRoot,
    /// Run of contained children dispatched at level l as one child query
    /// with a label interval.
    Run {
        l: u32,
        x_l: u32,
        top_l: u32,
        la: u32,
        lb: u32,
    },
}

/// Walks the binary decomposition of [lo,hi] over the hierarchy, emitting
/// one dispatch per contained child range that still intersects the
/// subpath from x up to (exclusive) top. Counts dispatches against the
/// 2(h-1) budget.
pub fn descend_binary(
    hier: &RangeHierarchy,
    x: NodeId,
    top: NodeId,
    lo: u32,
    hi: u32,
    stats: &mut QueryStats,
    emit: &mut dyn FnMut(BinaryDispatch, &mut QueryStats),
) {
    let n = hier.n();
    let lo = lo.max(1);
    let hi = hi.min(n);
    if lo > hi {
        return;
    }
    if lo == 1 && hi == n {
        emit(BinaryDispatch::Full, stats);
        return;
    }
    let mut count = 0u64;
    binary_rec(hier, 1, 1, n, x, top, lo, hi, &mut count, stats, emit);
    finish_subpath(hier, count, stats);
}

fn finish_subpath(hier: &RangeHierarchy, count: u64, stats: &mut QueryStats) {
    stats.child_queries += count;
    stats.max_subpath_child_queries = stats.max_subpath_child_queries.max(count);
    if count > 2 * (hier.h() as u64 - 1) {
        stats.dispatch_bound_violations += 1;
    }
}

#[allow(clippy::too_many_arguments)]
fn binary_rec(
    hier: &RangeHierarchy,
    l: u32,
    a: u32,
    b: u32,
    x_l: u32,
    top_l: u32,
    lo: u32,
    hi: u32,
    count: &mut u64,
    stats: &mut QueryStats,
    emit: &mut dyn FnMut(BinaryDispatch, &mut QueryStats),
) {
    for i in 1..=hier.f() {
        let (ca, cb) = child_range(a, b, hier.f(), i);
        if ca > cb || cb < lo || ca > hi {
            continue;
        }
        // x's view inside child i, if it still lies on the subpath; views
        // and the exclusive top are comparable on x's root path, so strict
        // descent is an id comparison
        let al = match hier.level_tree(l).lowest_anc_label(x_l, i) {
            Some(v) if v > top_l => v,
            _ => continue,
        };
        if l + 1 > hier.built_levels() {
            debug_assert_eq!(ca, cb);
            *count += 1;
            let v = hier.source_of(l, al).expect("real node");
            emit(BinaryDispatch::Leaf { v }, stats);
            continue;
        }
        let x_c = hier.copy_of(l + 1, hier.source_of(l, al).expect("real node"));
        let top_c = if top_l == 0 {
            0
        } else {
            match hier.level_tree(l).lowest_anc_label(top_l, i) {
                Some(t) => hier.copy_of(l + 1, hier.source_of(l, t).expect("real node")),
                None => 0,
            }
        };
        if lo <= ca && cb <= hi {
            *count += 1;
            emit(
                BinaryDispatch::Level {
                    l: l + 1,
                    x_l: x_c,
                    top_l: top_c,
                },
                stats,
            );
        } else {
            binary_rec(hier, l + 1, ca, cb, x_c, top_c, lo, hi, count, stats, emit);
        }
    }
}

/// Wide-flavor walk: contained children batch into one labeled dispatch per
/// straddling range, so each level costs at most two dispatches.
pub fn descend_wide(
    hier: &RangeHierarchy,
    x: NodeId,
    top: NodeId,
    lo: u32,
    hi: u32,
    stats: &mut QueryStats,
    emit: &mut dyn FnMut(WideDispatch, &mut QueryStats),
) {
    let n = hier.n();
    let lo = lo.max(1);
    let hi = hi.min(n);
    if lo > hi {
        return;
    }
    if lo == 1 && hi == n {
        emit(WideDispatch::FullRoot, stats);
        return;
    }
    let mut count = 0u64;
    wide_rec(hier, 1, 1, n, x, top, lo, hi, &mut count, stats, emit);
    finish_subpath(hier, count, stats);
}

#[allow(clippy::too_many_arguments)]
fn wide_rec(
    hier: &RangeHierarchy,
    l: u32,
    a: u32,
    b: u32,
    x_l: u32,
    top_l: u32,
    lo: u32,
    hi: u32,
    count: &mut u64,
    stats: &mut QueryStats,
    emit: &mut dyn FnMut(WideDispatch, &mut QueryStats),
) {
    let f = hier.f();
    let i_lo = child_of(lo.max(a), a, b, f);
    let i_hi = child_of(hi.min(b), a, b, f);
    let (la, _) = child_range(a, b, f, i_lo);
    let (_, rb) = child_range(a, b, f, i_hi);
    let left_straddles = la < lo;
    let right_straddles = rb > hi;

    let run_a = i_lo + left_straddles as u32;
    let run_b = i_hi - right_straddles as u32;
    if run_a <= run_b {
        *count += 1;
        emit(
            WideDispatch::Run {
                l,
                x_l,
                top_l,
                la: run_a,
                lb: run_b,
            },
            stats,
        );
    }

    let mut straddlers = Vec::new();
    if left_straddles {
        straddlers.push(i_lo);
    }
    if right_straddles && straddlers.last() != Some(&i_hi) {
        straddlers.push(i_hi);
    }
    for i in straddlers {
        let (ca, cb) = child_range(a, b, f, i);
        debug_assert!(ca < cb, "straddling child must span several values");
        let al = match hier.level_tree(l).lowest_anc_label(x_l, i) {
            Some(v) if v > top_l => v,
            _ => continue,
        };
        let x_c = hier.copy_of(l + 1, hier.source_of(l, al).expect("real node"));
        let top_c = if top_l == 0 {
            0
        } else {
            match hier.level_tree(l).lowest_anc_label(top_l, i) {
                Some(t) => hier.copy_of(l + 1, hier.source_of(l, t).expect("real node")),
                None => 0,
            }
        };
        wide_rec(hier, l + 1, ca, cb, x_c, top_c, lo, hi, count, stats, emit);
    }
}

pub enum Stage<A: PathAggregate, B: HalfQuery<A>> {
    Base(B),
    Layer(Layer<A, B>),
}

pub struct Layer<A: PathAggregate, B: HalfQuery<A>> {
    hier: RangeHierarchy,
    children: Vec<Stage<A, B>>,
    data: StageData,
    wide: bool,
    _marker: PhantomData<A>,
}

pub fn build_stage<A, B, F>(
    data: StageData,
    cfg: StageConfig,
    factory: &F,
) -> Result<Stage<A, B>, Error>
where
    A: PathAggregate,
    B: HalfQuery<A>,
    F: BaseFactory<A, Base = B>,
{
    if data.large.len() <= factory.target_large() {
        assert_eq!(data.large.len(), factory.target_large());
        return Ok(Stage::Base(factory.build(&data)?));
    }
    let n = data.n();
    let dim = data.large.len() - 1;
    let weights: Vec<u32> = (1..=n).map(|v| data.large[dim][v as usize]).collect();
    let hier = RangeHierarchy::build(&data.tree, &weights, cfg.f, cfg.view_mode)?;
    let wide = cfg.kind == Reduction::Wide;
    let mut children = Vec::with_capacity(hier.built_levels() as usize);
    for l in 1..=hier.built_levels() {
        let cd = child_stage_data(&data, &hier, l, wide);
        children.push(build_stage(cd, cfg, factory)?);
    }
    Ok(Stage::Layer(Layer {
        hier,
        children,
        data,
        wide,
        _marker: PhantomData,
    }))
}

pub(crate) fn child_stage_data(
    data: &StageData,
    hier: &RangeHierarchy,
    l: u32,
    wide: bool,
) -> StageData {
    let lt = hier.level_tree(l);
    let n = hier.n();
    let keep = data.large.len() - 1;
    let mut large = vec![vec![0u32; n as usize + 1]; keep];
    let mut small = Vec::new();
    let mut small_universe = Vec::new();
    if wide {
        let mut lab = vec![0u32; n as usize + 1];
        for id in 1..=n {
            lab[id as usize] = lt.label(id);
        }
        small.push(lab);
        small_universe.push(hier.f());
    }
    for _ in data.small.iter() {
        small.push(vec![0u32; n as usize + 1]);
    }
    small_universe.extend_from_slice(&data.small_universe);
    let off = if wide { 1 } else { 0 };
    for id in 1..=n {
        let v = hier.source_of(l, id).expect("real node") as usize;
        for d in 0..keep {
            large[d][id as usize] = data.large[d][v];
        }
        for (k, s) in data.small.iter().enumerate() {
            small[off + k][id as usize] = s[v];
        }
    }
    StageData {
        tree: Arc::clone(lt.base()),
        large,
        small,
        small_universe,
    }
}

impl<A: PathAggregate, B: HalfQuery<A>> Stage<A, B> {
    /// Total heap of the stage chain; `base` sizes the chain's terminal
    /// structures, everything else is accounted here.
    pub fn heap_bytes(&self, base: &dyn Fn(&B) -> usize) -> usize {
        match self {
            Stage::Base(b) => base(b),
            Stage::Layer(lay) => {
                lay.hier.heap_bytes()
                    + lay.data.heap_bytes()
                    + lay
                        .children
                        .iter()
                        .map(|c| c.heap_bytes(base))
                        .sum::<usize>()
            }
        }
    }
}

impl<A: PathAggregate, B: HalfQuery<A>> HalfQuery<A> for Stage<A, B> {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        agg: &A,
        stats: &mut QueryStats,
    ) -> Option<A::Elem> {
        match self {
            Stage::Base(b) => b.query_half(x, top, lq, sq, agg, stats),
            Stage::Layer(lay) => lay.query_half(x, top, lq, sq, agg, stats),
        }
    }
}

impl<A: PathAggregate, B: HalfQuery<A>> Layer<A, B> {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        agg: &A,
        stats: &mut QueryStats,
    ) -> Option<A::Elem> {
        let dim = lq.len() - 1;
        let (qlo, qhi) = lq[dim];
        let mut acc: Option<A::Elem> = None;
        if !self.wide {
            descend_binary(
                &self.hier,
                x,
                top,
                qlo,
                qhi,
                stats,
                &mut |disp, stats| {
                    let part = match disp {
                        BinaryDispatch::Full => {
                            self.children[0].query_half(x, top, &lq[..dim], sq, agg, stats)
                        }
                        BinaryDispatch::Level { l, x_l, top_l } => self.children
                            [l as usize - 1]
                            .query_half(x_l, top_l, &lq[..dim], sq, agg, stats)
                            .map(|e| {
                                agg.lift(e, &|v| self.hier.source_of(l, v).expect("real node"))
                            }),
                        BinaryDispatch::Leaf { v } => {
                            if self.data.node_in(v, &lq[..dim], sq) {
                                Some(agg.single(v, &self.data))
                            } else {
                                None
                            }
                        }
                    };
                    if let Some(p) = part {
                        acc = Some(match acc.take() {
                            None => p,
                            Some(q) => agg.combine(q, p),
                        });
                    }
                },
            );
        } else {
            descend_wide(&self.hier, x, top, qlo, qhi, stats, &mut |disp, stats| {
                let part = match disp {
                    WideDispatch::FullRoot => {
                        let mut sq2 = Vec::with_capacity(sq.len() + 1);
                        sq2.push((1, self.hier.f()));
                        sq2.extend_from_slice(sq);
                        self.children[0].query_half(x, top, &lq[..dim], &sq2, agg, stats)
                    }
                    WideDispatch::Run {
                        l,
                        x_l,
                        top_l,
                        la,
                        lb,
                    } => {
                        let mut sq2 = Vec::with_capacity(sq.len() + 1);
                        sq2.push((la, lb));
                        sq2.extend_from_slice(sq);
                        self.children[l as usize - 1]
                            .query_half(x_l, top_l, &lq[..dim], &sq2, agg, stats)
                            .map(|e| {
                                agg.lift(e, &|v| self.hier.source_of(l, v).expect("real node"))
                            })
                    }
                };
                if let Some(p) = part {
                    acc = Some(match acc.take() {
                        None => p,
                        Some(q) => agg.combine(q, p),
                    });
                }
            });
        }
        acc
    }
}

/// Brute-force base scanning the half path; terminates the reduction chain
/// in this module's own tests and serves as the referee for any base.
pub struct ScanBase {
    data: StageData,
}

impl<A: PathAggregate> HalfQuery<A> for ScanBase {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        agg: &A,
        _stats: &mut QueryStats,
    ) -> Option<A::Elem> {
        let mut acc: Option<A::Elem> = None;
        let mut cur = Some(x);
        while let Some(v) = cur {
            if v == top || v == 0 {
                break;
            }
            if self.data.node_in(v, lq, sq) {
                let s = agg.single(v, &self.data);
                acc = Some(match acc.take() {
                    None => s,
                    Some(q) => agg.combine(q, s),
                });
            }
            cur = self.data.tree.parent(v);
        }
        acc
    }
}

pub struct ScanFactory {
    pub target: usize,
}

impl<A: PathAggregate> BaseFactory<A> for ScanFactory {
    type Base = ScanBase;
    fn target_large(&self) -> usize {
        self.target
    }
    fn build(&self, data: &StageData) -> Result<ScanBase, Error> {
        Ok(ScanBase {
            data: StageData {
                tree: Arc::clone(&data.tree),
                large: data.large.clone(),
                small: data.small.clone(),
                small_universe: data.small_universe.clone(),
            },
        })
    }
}

/// Full path query engine: lca decomposition over a stage chain.
pub struct PathQueryEngine<A: PathAggregate, B: HalfQuery<A>> {
    agg: A,
    stage: Stage<A, B>,
    top: StageData,
}

impl<A: PathAggregate, B: HalfQuery<A>> PathQueryEngine<A, B> {
    pub fn build<F>(
        wt: &crate::weighted::WeightedTree,
        cfg: StageConfig,
        factory: &F,
        agg: A,
    ) -> Result<Self, Error>
    where
        F: BaseFactory<A, Base = B>,
    {
        let data = StageData::from_weighted(wt);
        let top = StageData {
            tree: Arc::clone(&data.tree),
            large: data.large.clone(),
            small: data.small.clone(),
            small_universe: data.small_universe.clone(),
        };
        let stage = build_stage(data, cfg, factory)?;
        Ok(PathQueryEngine { agg, stage, top })
    }

    pub fn aggregate(&self) -> &A {
        &self.agg
    }

    pub fn heap_bytes(&self, base: &dyn Fn(&B) -> usize) -> usize {
        self.top.heap_bytes() + self.stage.heap_bytes(base)
    }

    /// Combine over the nodes of P_{x,y} whose vectors fall in the query
    /// box; None when nothing matches.
    pub fn query(
        &self,
        x: NodeId,
        y: NodeId,
        lq: &[Range],
        sq: &[Range],
        stats: &mut QueryStats,
    ) -> Result<Option<A::Elem>, Error> {
        let tree = &self.top.tree;
        if !tree.is_node(x) || x == 0 {
            return Err(Error::InvalidNode(x));
        }
        if !tree.is_node(y) || y == 0 {
            return Err(Error::InvalidNode(y));
        }
        let z = tree.lca(x, y);
        let mut acc: Option<A::Elem> = None;
        let merge = |acc: &mut Option<A::Elem>, p: Option<A::Elem>| {
            if let Some(p) = p {
                *acc = Some(match acc.take() {
                    None => p,
                    Some(q) => self.agg.combine(q, p),
                });
            }
        };
        if x != z {
            merge(
                &mut acc,
                self.stage.query_half(x, z, lq, sq, &self.agg, stats),
            );
        }
        if y != z {
            merge(
                &mut acc,
                self.stage.query_half(y, z, lq, sq, &self.agg, stats),
            );
        }
        if self.top.node_in(z, lq, sq) {
            let s = self.agg.single(z, &self.top);
            merge(&mut acc, Some(s));
        }
        Ok(acc)
    }
}

/// Splits P_{x,y} into the two top-exclusive halves around the lca.
pub fn decompose_path(
    tree: &OrdinalTree,
    x: NodeId,
    y: NodeId,
) -> Result<(Vec<u32>, NodeId, Vec<u32>), Error> {
    if !tree.is_node(x) || x == 0 {
        return Err(Error::InvalidNode(x));
    }
    if !tree.is_node(y) || y == 0 {
        return Err(Error::InvalidNode(y));
    }
    let z = tree.lca(x, y);
    let climb = |from: NodeId| {
        let mut out = Vec::new();
        let mut cur = from;
        while cur != z {
            out.push(cur);
            cur = tree.parent(cur).expect("z is an ancestor");
        }
        out
    };
    Ok((climb(x), z, climb(y)))
}
