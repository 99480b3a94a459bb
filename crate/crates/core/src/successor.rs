//! Path successor: the smallest first weight at or above a threshold.
//!
//! The 1-D base binary-searches the root-to-leaf block path of the
//! threshold's rank in a fanout-2 range hierarchy. Each probe is one path
//! maximum inside a block, pinning the deepest block whose extraction still
//! holds an answer; the answer itself is a path minimum in that block's
//! off-path child. Higher dimensions wrap the base in binary reduction
//! stages combined by argmin over first weights.

use crate::aggregates::{Extremum, PathExtremumIndex};
use crate::error::Error;
use crate::framework::{
    BaseFactory, HalfQuery, MinFirstAgg, PathQueryEngine, Range, StageConfig, StageData,
};
use crate::hierarchy::{child_of, child_range, RangeHierarchy, ViewMode};
use crate::stats::QueryStats;
use crate::tree::{NodeId, OrdinalTree, NONE};
use crate::weighted::WeightedTree;
use std::sync::Arc;

/// Extremum probes one half search may spend: the root probe, the binary
/// search over levels, and the final minimum; ceil(lg h) + 2 in total.
pub fn search_probe_bound(h: u32) -> u64 {
    let lg = if h <= 1 {
        0
    } else {
        32 - (h - 1).leading_zeros()
    };
    lg as u64 + 2
}

pub struct SuccessorBase {
    tree: Arc<OrdinalTree>,
    hier: RangeHierarchy, // fanout 2 over first weights
    w1: Vec<u32>,         // by node, slot 0 = 0
    whole: PathExtremumIndex,
    per_level: Vec<PathExtremumIndex>, // over T_l, weighing each copy's source
}

impl SuccessorBase {
    /// `w1[v]` is node v's first weight, a permutation of 1..=n; slot 0 = 0.
    pub fn new(
        tree: &Arc<OrdinalTree>,
        w1: &[u32],
        mode: ViewMode,
    ) -> Result<SuccessorBase, Error> {
        let n = tree.len();
        assert_eq!(w1.len() as u32, n + 1);
        let hier = RangeHierarchy::build(tree, &w1[1..], 2, mode)?;
        let whole = PathExtremumIndex::new(tree, w1);
        let mut per_level = Vec::with_capacity(hier.built_levels() as usize);
        for l in 1..=hier.built_levels() {
            let lt = hier.level_tree(l).base();
            let mut lw = vec![0u32; lt.len() as usize + 1];
            for x_l in 1..=lt.len() {
                lw[x_l as usize] = w1[hier.source_of(l, x_l)? as usize];
            }
            per_level.push(PathExtremumIndex::new(lt, &lw));
        }
        Ok(SuccessorBase {
            tree: Arc::clone(tree),
            hier,
            w1: w1.to_vec(),
            whole,
            per_level,
        })
    }

    pub fn tree(&self) -> &Arc<OrdinalTree> {
        &self.tree
    }

    /// Views of x's segment inside the level-l block holding weight wv: x's
    /// view plus the exclusive upper bound for extremum scans (the dummy
    /// when the whole in-block chain is below the cut). None when no block
    /// member lies strictly below `top` on x's root path.
    fn seg_views(
        &self,
        l: u32,
        wv: u32,
        x: NodeId,
        top: NodeId,
        stats: &mut QueryStats,
    ) -> Option<(NodeId, NodeId)> {
        let x_l = self.hier.view_at(l, wv, x, stats)?;
        let sx = self.hier.source_of(l, x_l).ok()?;
        if top != 0 && sx <= top {
            return None; // lowest member ancestor already at or above the cut
        }
        let t_l = if top == 0 {
            0
        } else {
            self.hier.view_at(l, wv, top, stats).unwrap_or(0)
        };
        Some((x_l, t_l))
    }

    /// Smallest first weight ≥ q1 on the half-path from x up to, but
    /// excluding, `top` (NONE or 0 leaves it uncapped), as (weight, node).
    pub fn successor_half(
        &self,
        x: NodeId,
        top: NodeId,
        q1: u32,
        stats: &mut QueryStats,
    ) -> Option<(u32, NodeId)> {
        let top = if top == NONE { 0 } else { top };
        debug_assert!(q1 >= 1);
        if q1 > self.tree.len() || x == top {
            return None;
        }
        // weight q1 itself on the segment: done, no probes spent
        let own = self.hier.owner(q1);
        if own > top && self.tree.is_ancestor(own, x) {
            return Some((q1, own));
        }
        let before = stats.search_iters;
        let got = self.search(x, top, q1, stats);
        let spent = stats.search_iters - before;
        stats.max_search_iters = stats.max_search_iters.max(spent);
        if spent > search_probe_bound(self.hier.h()) {
            stats.iter_bound_violations += 1;
        }
        got
    }

    fn search(
        &self,
        x: NodeId,
        top: NodeId,
        q1: u32,
        stats: &mut QueryStats,
    ) -> Option<(u32, NodeId)> {
        // root probe: is any segment weight ≥ q1 at all
        let cap = if top != 0 {
            top
        } else if self.tree.has_dummy_root() {
            0
        } else {
            NONE
        };
        stats.search_iters += 1;
        let m = self.whole.anc_extremum(x, cap, Extremum::Max)?;
        if m == 0 || self.w1[m as usize] < q1 {
            return None;
        }
        let h = self.hier.h();
        if h < 2 {
            // a lone weight either hit exactly or failed the root probe
            return None;
        }
        // invariant: the level-`high` block of q1 still holds the answer,
        // the level-`low` block does not (the leaf was the exact-hit check)
        let (mut high, mut low) = (1u32, h);
        while low - high > 1 {
            stats.search_iters += 1;
            let mid = (low + high) / 2;
            let idx = &self.per_level[mid as usize - 1];
            let holds = self
                .seg_views(mid, q1, x, top, stats)
                .map_or(false, |(x_m, t_m)| {
                    match idx.anc_extremum(x_m, t_m, Extremum::Max) {
                        Some(p) if p != 0 => idx.weight(p) >= q1,
                        _ => false,
                    }
                });
            if holds {
                high = mid;
            } else {
                low = mid;
            }
        }
        // the answer's weight lies in the pinned block but not in its
        // on-path child, so it sits in the sibling, right of the threshold
        let (a, b) = self.hier.range_of(high, q1);
        let kappa = child_of(q1, a, b, 2);
        debug_assert_eq!(kappa, 1, "the on-path child of the pinned block is its left child");
        let (ca, cb) = child_range(a, b, 2, 3 - kappa);
        if low == h {
            // sibling is a leaf: a single rank, no probe needed
            debug_assert_eq!(ca, cb);
            let c = self.hier.owner(ca);
            if ca >= q1 && c > top && self.tree.is_ancestor(c, x) {
                return Some((ca, c));
            }
            debug_assert!(false, "pinned block promised an answer");
            return None;
        }
        stats.search_iters += 1;
        let (x_l, t_l) = self.seg_views(low, ca, x, top, stats)?;
        let idx = &self.per_level[low as usize - 1];
        let p = idx.anc_extremum(x_l, t_l, Extremum::Min)?;
        if p == 0 || idx.weight(p) < q1 {
            debug_assert!(false, "sibling block holds only larger weights");
            return None;
        }
        let src = self.hier.source_of(low, p).ok()?;
        debug_assert!(src > top && self.tree.is_ancestor(src, x));
        Some((idx.weight(p), src))
    }

    /// The node of P_{x,y} with minimum first weight ≥ q1, if any.
    pub fn successor_path(
        &self,
        x: NodeId,
        y: NodeId,
        q1: u32,
        stats: &mut QueryStats,
    ) -> Result<Option<NodeId>, Error> {
        if x == 0 || !self.tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if y == 0 || !self.tree.is_node(y) {
            return Err(Error::InvalidNode(y));
        }
        let q1 = q1.max(1);
        let z = self.tree.lca(x, y);
        let mut best: Option<(u32, NodeId)> = None;
        let mut push = |c: Option<(u32, NodeId)>| {
            if let Some(c) = c {
                best = Some(match best.take() {
                    None => c,
                    Some(b) => b.min(c),
                });
            }
        };
        if x != z {
            push(self.successor_half(x, z, q1, stats));
        }
        if y != z {
            push(self.successor_half(y, z, q1, stats));
        }
        if z != 0 && self.w1[z as usize] >= q1 {
            push(Some((self.w1[z as usize], z)));
        }
        Ok(best.map(|(_, v)| v))
    }

    pub fn heap_bytes(&self) -> usize {
        self.hier.heap_bytes()
            + std::mem::size_of_val(&self.w1[..])
            + self.whole.heap_bytes()
            + self.per_level.iter().map(|e| e.heap_bytes()).sum::<usize>()
    }
}

impl HalfQuery<MinFirstAgg> for SuccessorBase {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        _agg: &MinFirstAgg,
        stats: &mut QueryStats,
    ) -> Option<(u32, u32)> {
        debug_assert_eq!(lq.len(), 1);
        debug_assert!(sq.is_empty());
        let (lo, hi) = lq[0];
        let got = self.successor_half(x, top, lo.max(1), stats)?;
        if got.0 > hi {
            None
        } else {
            Some(got)
        }
    }
}

pub struct SuccessorFactory {
    pub mode: ViewMode,
}

impl BaseFactory<MinFirstAgg> for SuccessorFactory {
    type Base = SuccessorBase;
    fn target_large(&self) -> usize {
        1
    }
    fn build(&self, data: &StageData) -> Result<SuccessorBase, Error> {
        SuccessorBase::new(&data.tree, &data.large[0], self.mode)
    }
}

/// Path successor over d-dimensional vectors: among path nodes whose
/// coordinates 2..d fall in closed intervals, the one of minimum first
/// weight ≥ q1. Equal weights cannot arise in rank space, so results are
/// deterministic; the argmin combiner still breaks ties to the smaller
/// preorder rank.
pub struct SuccessorIndex {
    eng: PathQueryEngine<MinFirstAgg, SuccessorBase>,
    tree: Arc<OrdinalTree>,
    n: u32,
    dims: usize,
}

impl SuccessorIndex {
    pub fn build(wt: &WeightedTree, mode: ViewMode) -> Result<SuccessorIndex, Error> {
        let eng = PathQueryEngine::build(
            wt,
            StageConfig::binary(mode),
            &SuccessorFactory { mode },
            MinFirstAgg,
        )?;
        Ok(SuccessorIndex {
            eng,
            tree: Arc::clone(wt.tree()),
            n: wt.n(),
            dims: wt.dims(),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// `rest` constrains dimensions 2..d, in rank space.
    pub fn query(
        &self,
        x: NodeId,
        y: NodeId,
        q1: u32,
        rest: &[(u32, u32)],
        stats: &mut QueryStats,
    ) -> Result<Option<NodeId>, Error> {
        if rest.len() + 1 != self.dims {
            return Err(Error::VectorDimensionMismatch {
                expected: self.dims,
                got: rest.len() + 1,
            });
        }
        if x == 0 || !self.tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if y == 0 || !self.tree.is_node(y) {
            return Err(Error::InvalidNode(y));
        }
        if q1 > self.n {
            return Ok(None);
        }
        let mut lq = Vec::with_capacity(self.dims);
        lq.push((q1.max(1), self.n));
        for &(lo, hi) in rest {
            let (lo, hi) = (lo.max(1), hi.min(self.n));
            if lo > hi {
                return Ok(None);
            }
            lq.push((lo, hi));
        }
        Ok(self
            .eng
            .query(x, y, &lq, &[], stats)?
            .map(|(_, v)| v))
    }

    pub fn heap_bytes(&self) -> usize {
        self.eng.heap_bytes(&SuccessorBase::heap_bytes)
    }
}
