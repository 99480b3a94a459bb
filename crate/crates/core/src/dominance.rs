//! Ancestor dominance reporting.
//!
//! The path-dominance base keeps, for every threshold vector over the small
//! dimensions, a marked extraction and a path-maximum index; queries zoom
//! into the extraction and split paths at maxima, probing at most 2k+1
//! times for k reports. The 2-D ancestor structure partitions nodes into
//! per-range-tree-node 2-maximal sets and walks only the range-tree nodes
//! that can contribute. Higher dimensions stack the reduction frameworks on
//! top of these two bases.

use crate::aggregates::{Extremum, PathExtremumIndex, WeightedAncestorIndex};
use crate::error::Error;
use crate::extract::{extract, Extraction};
use crate::framework::{BaseFactory, CollectAgg, HalfQuery, PathQueryEngine, Range, StageConfig};
use crate::hierarchy::{child_of, child_range, RangeHierarchy, ViewMode};
use crate::stats::QueryStats;
use crate::tree::{NodeId, OrdinalTree, NONE};
use crate::weighted::WeightedTree;
use std::sync::Arc;

struct PdrEntry {
    ext: Extraction,
    maxi: PathExtremumIndex, // over ext.tree, weighing w1 of the sources
}

/// Path dominance reporting over one unrestricted weight plus small-universe
/// dimensions 2..d: all nodes of a path whose vector dominates the query.
pub struct PdrBase {
    tree: Arc<OrdinalTree>,
    w1: Vec<u32>,          // by node, slot 0 = 0
    smalls: Vec<Vec<u32>>, // by dim then node
    universes: Vec<u32>,
    entries: Vec<PdrEntry>, // mixed-radix over all small thresholds
}

impl PdrBase {
    pub fn new(
        tree: Arc<OrdinalTree>,
        w1: Vec<u32>,
        smalls: Vec<Vec<u32>>,
        universes: Vec<u32>,
    ) -> Result<PdrBase, Error> {
        let n = tree.len();
        assert_eq!(w1.len() as u32, n + 1);
        assert_eq!(smalls.len(), universes.len());
        for (dim, col) in smalls.iter().enumerate() {
            assert_eq!(col.len() as u32, n + 1);
            let u = universes[dim].max(1);
            for v in 1..=n {
                let w = col[v as usize];
                if w == 0 || w > u {
                    return Err(Error::WeightOutOfSmallUniverse { weight: w, c: u });
                }
            }
        }
        let total: usize = universes.iter().map(|&u| u.max(1) as usize).product();
        let mut entries = Vec::with_capacity(total);
        let mut g = vec![1u32; universes.len()];
        for idx in 0..total {
            let mut t = idx;
            for (dim, &u) in universes.iter().enumerate() {
                g[dim] = (t % u.max(1) as usize) as u32 + 1;
                t /= u.max(1) as usize;
            }
            let mut sel = vec![false; n as usize + 1];
            for v in 1..=n {
                sel[v as usize] = (0..g.len()).all(|dim| smalls[dim][v as usize] >= g[dim]);
            }
            let ext = extract(&tree, &sel, false);
            let m = ext.tree.len();
            let mut lw = vec![0u32; m as usize + 1];
            for v in 1..=m {
                lw[v as usize] = w1[ext.source_of(v).expect("real node") as usize];
            }
            let maxi = PathExtremumIndex::new(&ext.tree, &lw);
            entries.push(PdrEntry { ext, maxi });
        }
        Ok(PdrBase {
            tree,
            w1,
            smalls,
            universes,
            entries,
        })
    }

    fn entry_of(&self, g: &[u32]) -> Option<&PdrEntry> {
        debug_assert_eq!(g.len(), self.universes.len());
        let mut idx = 0usize;
        for dim in (0..g.len()).rev() {
            let u = self.universes[dim].max(1);
            let gi = g[dim].max(1);
            if gi > u {
                return None; // nothing can dominate beyond the universe
            }
            idx = idx * u as usize + (gi - 1) as usize;
        }
        Some(&self.entries[idx])
    }

    /// All nodes of A_{x,top} (top excluded, NONE or 0 for the whole root
    /// path) with w1 ≥ q1 and small weights ⪰ g. Returns base-tree ids in
    /// no particular order; probes at most 2k+1 path maxima.
    pub fn report_half(
        &self,
        x: NodeId,
        top: NodeId,
        q1: u32,
        g: &[u32],
        stats: &mut QueryStats,
    ) -> Vec<u32> {
        let mut out = Vec::new();
        let probes_before = stats.probes;
        let entry = match self.entry_of(g) {
            Some(e) => e,
            None => return out,
        };
        'done: {
            let xv = match entry.ext.view_of(x) {
                Some(v) => v,
                None => break 'done,
            };
            // the view must stay strictly below the exclusive top
            let top = if top == NONE { 0 } else { top };
            if top != 0 {
                if entry.ext.source_of(xv).expect("real view") <= top {
                    break 'done;
                }
            }
            let topv = if top == 0 {
                NONE
            } else {
                match entry.ext.view_of(top) {
                    // the view of top is the lowest marked node at or above
                    // it, which is exactly the first excluded one
                    Some(t) => t,
                    None => NONE,
                }
            };
            // segments are (bottom, exclusive top) pairs in extraction ids
            let mut segs = vec![(xv, topv)];
            while let Some((b, t)) = segs.pop() {
                stats.probes += 1;
                let m = match entry.maxi.anc_extremum(b, t, Extremum::Max) {
                    Some(m) => m,
                    None => continue,
                };
                if m == 0 || entry.maxi.weight(m) < q1 {
                    continue; // a dummy root or below threshold ends this segment
                }
                out.push(entry.ext.source_of(m).expect("real maximum"));
                if b != m {
                    segs.push((b, m));
                }
                match entry.ext.tree.parent(m) {
                    Some(p) if p != 0 => {
                        if t == NONE || p != t {
                            segs.push((p, t));
                        }
                    }
                    _ => {}
                }
            }
        }
        let probes = stats.probes - probes_before;
        if probes > 2 * out.len() as u64 + 1 {
            stats.probe_bound_violations += 1;
        }
        out
    }

    /// Dominance reporting over the full path P_{x,y}, ascending preorder.
    pub fn report_path(
        &self,
        x: NodeId,
        y: NodeId,
        q: &[u32],
        stats: &mut QueryStats,
    ) -> Result<Vec<u32>, Error> {
        if q.len() != self.smalls.len() + 1 {
            return Err(Error::VectorDimensionMismatch {
                expected: self.smalls.len() + 1,
                got: q.len(),
            });
        }
        if !self.tree.is_node(x) || x == 0 {
            return Err(Error::InvalidNode(x));
        }
        if !self.tree.is_node(y) || y == 0 {
            return Err(Error::InvalidNode(y));
        }
        let q1 = q[0].max(1);
        let g = &q[1..];
        let z = self.tree.lca(x, y);
        let mut out = Vec::new();
        if z == 0 {
            // forest path through the dummy: two full root paths
            out.extend(self.report_half(x, 0, q1, g, stats));
            out.extend(self.report_half(y, 0, q1, g, stats));
        } else {
            if x != z {
                out.extend(self.report_half(x, z, q1, g, stats));
            }
            if y != z {
                out.extend(self.report_half(y, z, q1, g, stats));
            }
            let z_in = self.w1[z as usize] >= q1
                && (0..g.len()).all(|d| self.smalls[d][z as usize] >= g[d].max(1));
            if z_in {
                out.push(z);
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn heap_bytes(&self) -> usize {
        let mut total = std::mem::size_of_val(&self.w1[..]);
        for col in &self.smalls {
            total += std::mem::size_of_val(&col[..]);
        }
        for e in &self.entries {
            total += e.ext.heap_bytes() + e.maxi.heap_bytes();
        }
        total
    }
}

/// Nodes with no strictly heavier-or-equal first weight on a proper
/// ancestor, in ascending preorder.
pub fn compute_2maximal(tree: &OrdinalTree, w1: &[u32]) -> Vec<u32> {
    let n = tree.len();
    assert_eq!(w1.len() as u32, n + 1);
    let mut best = vec![0u32; n as usize + 1]; // max weight strictly above
    let mut out = Vec::new();
    for v in 1..=n {
        let b = match tree.parent(v) {
            Some(p) => best[p as usize].max(w1[p as usize]),
            None => 0,
        };
        best[v as usize] = b;
        if w1[v as usize] > b {
            out.push(v);
        }
    }
    out
}

struct Level2D {
    m_ext: Extraction, // from T_l: nodes whose home level is l
    n_ext: Extraction, // from T_l: nodes homed strictly below l
    d_l: PdrBase,      // over m_ext, scalar second weights
    e_l: PdrBase,      // over m_ext, scalar first weights
    f_l: PdrBase,      // over n_ext, first weight plus child label
    a_l: WeightedAncestorIndex,
    p_m: Vec<u32>,  // m_ext local -> base node
    nlab: Vec<u32>, // n_ext local -> child label of its T_l copy
}

/// 2-dimensional ancestor dominance over rank-space weights.
pub struct DominanceIndex2D {
    tree: Arc<OrdinalTree>,
    n: u32,
    hier: RangeHierarchy, // over second weights
    w1: Vec<u32>,
    w2: Vec<u32>,
    lambda: Vec<u32>, // node -> the level whose block first sees it 2-maximal
    levels: Vec<Level2D>,
}

impl DominanceIndex2D {
    /// `w1`/`w2` are node-indexed with slot 0 = 0 and must each be a
    /// permutation of 1..=n.
    pub fn new(
        tree: Arc<OrdinalTree>,
        w1: Vec<u32>,
        w2: Vec<u32>,
        f: u32,
        mode: ViewMode,
    ) -> Result<DominanceIndex2D, Error> {
        let n = tree.len();
        assert!(n >= 1);
        assert_eq!(w1.len() as u32, n + 1);
        assert_eq!(w2.len() as u32, n + 1);
        let f = f.max(2);
        assert!(f <= 64, "child masks are machine words");
        let hier = RangeHierarchy::build(&tree, &w2[1..], f, mode)?;
        let h = hier.h();

        // first level at which each node is 2-maximal within its block;
        // singleton leaf blocks make level h the universal fallback
        let mut lambda = vec![NONE; n as usize + 1];
        for l in 1..h {
            let tl = hier.level_tree(l).base();
            let mut above = vec![0u32; n as usize + 1]; // max w1 strictly above, in-block
            for v in 1..=n {
                let src = hier.source_of(l, v)?;
                let b = match tl.parent(v) {
                    Some(p) if p != 0 => {
                        above[p as usize].max(w1[hier.source_of(l, p)? as usize])
                    }
                    _ => 0,
                };
                above[v as usize] = b;
                if lambda[src as usize] == NONE && w1[src as usize] > b {
                    lambda[src as usize] = l;
                }
            }
        }
        for v in 1..=n {
            if lambda[v as usize] == NONE {
                lambda[v as usize] = h;
            }
        }
        lambda[0] = 0;

        let mut levels = Vec::new();
        for l in 1..h {
            let tl = hier.level_tree(l).base();
            let tn = tl.len();
            let mut sel_m = vec![false; tn as usize + 1];
            let mut sel_n = vec![false; tn as usize + 1];
            for v in 1..=tn {
                let src = hier.source_of(l, v)? as usize;
                sel_m[v as usize] = lambda[src] == l;
                // descent guides: anything homed strictly below this level.
                // Guiding only by the next level's homes loses answers when
                // an intermediate block owns no home at all, so the guide
                // set keeps every deeper home alive.
                sel_n[v as usize] = lambda[src] > l;
            }
            let m_ext = extract(tl, &sel_m, false);
            let n_ext = extract(tl, &sel_n, false);
            let mk = m_ext.tree.len();
            let mut p_m = vec![NONE; mk as usize + 1];
            let mut mw1 = vec![0u32; mk as usize + 1];
            let mut mw2 = vec![0u32; mk as usize + 1];
            for v in 1..=mk {
                let tl_id = m_ext.source_of(v).expect("real node");
                let src = hier.source_of(l, tl_id)?;
                p_m[v as usize] = src;
                mw1[v as usize] = w1[src as usize];
                mw2[v as usize] = w2[src as usize];
            }
            let nk = n_ext.tree.len();
            let mut nw1 = vec![0u32; nk as usize + 1];
            let mut nlab = vec![0u32; nk as usize + 1];
            for v in 1..=nk {
                let tl_id = n_ext.source_of(v).expect("real node");
                nw1[v as usize] = w1[hier.source_of(l, tl_id)? as usize];
                nlab[v as usize] = hier.level_tree(l).label(tl_id);
            }
            let d_l = PdrBase::new(Arc::clone(&m_ext.tree), mw2, vec![], vec![])?;
            let e_l = PdrBase::new(Arc::clone(&m_ext.tree), mw1.clone(), vec![], vec![])?;
            let f_l = PdrBase::new(
                Arc::clone(&n_ext.tree),
                nw1,
                vec![nlab.clone()],
                vec![f],
            )?;
            let a_l = WeightedAncestorIndex::new(&m_ext.tree, mw1)?;
            levels.push(Level2D {
                m_ext,
                n_ext,
                d_l,
                e_l,
                f_l,
                a_l,
                p_m,
                nlab,
            });
        }

        Ok(DominanceIndex2D {
            tree,
            n,
            hier,
            w1,
            w2,
            lambda,
            levels,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn levels_built(&self) -> usize {
        self.levels.len()
    }

    /// Range-hierarchy level count including the leaf level.
    pub fn height(&self) -> u32 {
        self.hier.h()
    }

    /// Home level per node; the per-level sets partition the tree.
    pub fn lambda(&self) -> &[u32] {
        &self.lambda
    }

    /// The extracted home tree of level l (1-based) and the first weights of
    /// its nodes, for invariant checking.
    pub fn m_level(&self, l: usize) -> (&Arc<OrdinalTree>, Vec<u32>) {
        let lv = &self.levels[l - 1];
        let w = lv
            .p_m
            .iter()
            .map(|&s| if s == NONE { 0 } else { self.w1[s as usize] })
            .collect();
        (&lv.m_ext.tree, w)
    }

    /// All ancestors-or-self of x dominating (q1, q2), unordered.
    pub fn query(&self, x: NodeId, q1: u32, q2: u32, stats: &mut QueryStats) -> Vec<u32> {
        assert!(x >= 1 && x <= self.n);
        let (q1, q2) = (q1.max(1), q2.max(1));
        let mut out = Vec::new();
        if q1 > self.n || q2 > self.n {
            return out;
        }
        let h = self.hier.h();
        let f = self.hier.f();
        // (level, block range, copy of the view in T_l)
        let mut stack = vec![(1u32, 1u32, self.n, self.hier.copy_of(1, x))];
        while let Some((l, a, b, x_l)) = stack.pop() {
            if l == h {
                // leaf block: one weight, one candidate node
                debug_assert_eq!(a, b);
                let t = self.hier.owner(a);
                if self.lambda[t as usize] == h
                    && self.w1[t as usize] >= q1
                    && self.w2[t as usize] >= q2
                    && self.tree.is_ancestor(t, x)
                {
                    out.push(t);
                }
                continue;
            }
            let lv = &self.levels[l as usize - 1];
            let on_pi = a <= q2 && q2 <= b;
            if let Some(xp) = lv.m_ext.view_of(x_l) {
                if on_pi {
                    // the block straddles q2: second weights need checking,
                    // but first weights ≥ q1 form a lower segment
                    stats.weighted_anc_queries += 1;
                    if let Some(y) = lv.a_l.query(xp, q1) {
                        let top = match lv.m_ext.tree.parent(y) {
                            Some(p) if p != 0 => p,
                            _ => NONE,
                        };
                        for m in lv.d_l.report_half(xp, top, q2, &[], stats) {
                            out.push(lv.p_m[m as usize]);
                        }
                    }
                } else {
                    // whole block right of q2: second weights all qualify
                    stats.offpath_queries += 1;
                    let rep = lv.e_l.report_half(xp, NONE, q1, &[], stats);
                    if rep.is_empty() {
                        stats.offpath_empty_results += 1;
                    }
                    for m in rep {
                        out.push(lv.p_m[m as usize]);
                    }
                }
            }
            // children: always follow q2's block, plus any child whose home
            // set still holds a dominating ancestor
            let kappa = if on_pi { child_of(q2, a, b, f) } else { 0 };
            let mut mask: u64 = 0;
            if on_pi {
                mask |= 1 << (kappa - 1);
            }
            if let Some(xpp) = lv.n_ext.view_of(x_l) {
                for t in lv.f_l.report_half(xpp, NONE, q1, &[kappa + 1], stats) {
                    mask |= 1 << (lv.nlab[t as usize] - 1);
                }
            }
            for j in 1..=f {
                if mask & (1u64 << (j - 1)) == 0 {
                    continue;
                }
                let (ca, cb) = child_range(a, b, f, j);
                if ca > cb {
                    continue;
                }
                if l + 1 == h {
                    stack.push((l + 1, ca, cb, 0));
                } else if let Ok(xc) = self.hier.descend(l, x_l, j) {
                    stack.push((l + 1, ca, cb, xc));
                }
            }
        }
        out
    }

    pub fn heap_bytes(&self) -> usize {
        let mut total = self.hier.heap_bytes()
            + std::mem::size_of_val(&self.w1[..])
            + std::mem::size_of_val(&self.w2[..])
            + std::mem::size_of_val(&self.lambda[..]);
        for lv in &self.levels {
            total += lv.m_ext.heap_bytes()
                + lv.n_ext.heap_bytes()
                + lv.d_l.heap_bytes()
                + lv.e_l.heap_bytes()
                + lv.f_l.heap_bytes()
                + lv.a_l.heap_bytes()
                + std::mem::size_of_val(&lv.p_m[..])
                + std::mem::size_of_val(&lv.nlab[..]);
        }
        total
    }
}

pub struct Adr2dBase {
    core: DominanceIndex2D,
}

impl Adr2dBase {
    pub fn heap_bytes(&self) -> usize {
        self.core.heap_bytes()
    }
}

impl HalfQuery<CollectAgg> for Adr2dBase {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        _agg: &CollectAgg,
        stats: &mut QueryStats,
    ) -> Option<Vec<u32>> {
        debug_assert!(sq.is_empty());
        debug_assert_eq!(lq.len(), 2);
        let (lo1, hi1) = lq[0];
        let (lo2, hi2) = lq[1];
        let out: Vec<u32> = self
            .core
            .query(x, lo1, lo2, stats)
            .into_iter()
            .filter(|&t| {
                t > top
                    && self.core.w1[t as usize] <= hi1
                    && self.core.w2[t as usize] <= hi2
            })
            .collect();
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }
}

pub struct Adr2dFactory {
    pub f: u32,
    pub mode: ViewMode,
}

impl BaseFactory<CollectAgg> for Adr2dFactory {
    type Base = Adr2dBase;
    fn target_large(&self) -> usize {
        2
    }
    fn build(&self, data: &crate::framework::StageData) -> Result<Adr2dBase, Error> {
        let core = DominanceIndex2D::new(
            Arc::clone(&data.tree),
            data.large[0].clone(),
            data.large[1].clone(),
            self.f,
            self.mode,
        )?;
        Ok(Adr2dBase { core })
    }
}

struct Entry2de {
    ext: Extraction,
    v: DominanceIndex2D, // over the extraction, locally rank-reduced
    w1_sorted: Vec<u32>,
    w2_sorted: Vec<u32>,
}

/// Two rank-space dimensions plus small dimensions 3..d, one 2-D structure
/// per small threshold vector.
pub struct Adr2deBase {
    w1: Vec<u32>,
    w2: Vec<u32>,
    smalls: Vec<Vec<u32>>,
    universes: Vec<u32>,
    entries: Vec<Option<Entry2de>>,
}

impl Adr2deBase {
    pub fn new(
        tree: Arc<OrdinalTree>,
        w1: Vec<u32>,
        w2: Vec<u32>,
        smalls: Vec<Vec<u32>>,
        universes: Vec<u32>,
        f: u32,
        mode: ViewMode,
    ) -> Result<Adr2deBase, Error> {
        let n = tree.len();
        let total: usize = universes.iter().map(|&u| u.max(1) as usize).product();
        let mut entries = Vec::with_capacity(total);
        let mut g = vec![1u32; universes.len()];
        for idx in 0..total {
            let mut t = idx;
            for (dim, &u) in universes.iter().enumerate() {
                g[dim] = (t % u.max(1) as usize) as u32 + 1;
                t /= u.max(1) as usize;
            }
            let mut sel = vec![false; n as usize + 1];
            for v in 1..=n {
                sel[v as usize] = (0..g.len()).all(|dim| smalls[dim][v as usize] >= g[dim]);
            }
            let ext = extract(&tree, &sel, false);
            let m = ext.tree.len();
            if m == 0 {
                entries.push(None);
                continue;
            }
            let mut vals1 = Vec::with_capacity(m as usize);
            let mut vals2 = Vec::with_capacity(m as usize);
            for v in 1..=m {
                let s = ext.source_of(v).expect("real node") as usize;
                vals1.push(w1[s]);
                vals2.push(w2[s]);
            }
            let mut w1_sorted = vals1.clone();
            let mut w2_sorted = vals2.clone();
            w1_sorted.sort_unstable();
            w2_sorted.sort_unstable();
            let mut lw1 = vec![0u32; m as usize + 1];
            let mut lw2 = vec![0u32; m as usize + 1];
            for v in 1..=m as usize {
                lw1[v] = w1_sorted.partition_point(|&w| w < vals1[v - 1]) as u32 + 1;
                lw2[v] = w2_sorted.partition_point(|&w| w < vals2[v - 1]) as u32 + 1;
            }
            let v2d = DominanceIndex2D::new(Arc::clone(&ext.tree), lw1, lw2, f, mode)?;
            entries.push(Some(Entry2de {
                ext,
                v: v2d,
                w1_sorted,
                w2_sorted,
            }));
        }
        Ok(Adr2deBase {
            w1,
            w2,
            smalls,
            universes,
            entries,
        })
    }

    fn entry_of(&self, g: &[u32]) -> Option<&Entry2de> {
        let mut idx = 0usize;
        for dim in (0..g.len()).rev() {
            let u = self.universes[dim].max(1);
            let gi = g[dim].max(1);
            if gi > u {
                return None;
            }
            idx = idx * u as usize + (gi - 1) as usize;
        }
        self.entries[idx].as_ref()
    }

    pub fn heap_bytes(&self) -> usize {
        let mut total = std::mem::size_of_val(&self.w1[..]) + std::mem::size_of_val(&self.w2[..]);
        for col in &self.smalls {
            total += std::mem::size_of_val(&col[..]);
        }
        for e in self.entries.iter().flatten() {
            total += e.ext.heap_bytes()
                + e.v.heap_bytes()
                + std::mem::size_of_val(&e.w1_sorted[..])
                + std::mem::size_of_val(&e.w2_sorted[..]);
        }
        total
    }
}

impl HalfQuery<CollectAgg> for Adr2deBase {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        _agg: &CollectAgg,
        stats: &mut QueryStats,
    ) -> Option<Vec<u32>> {
        debug_assert_eq!(lq.len(), 2);
        debug_assert_eq!(sq.len(), self.smalls.len());
        let g: Vec<u32> = sq.iter().map(|&(lo, _)| lo.max(1)).collect();
        let entry = self.entry_of(&g)?;
        let xv = entry.ext.view_of(x)?;
        if entry.ext.source_of(xv).expect("real view") <= top {
            return None; // nothing of the half-path survives the extraction
        }
        let m = entry.v.n();
        let q1 = entry.w1_sorted.partition_point(|&w| w < lq[0].0) as u32 + 1;
        let q2 = entry.w2_sorted.partition_point(|&w| w < lq[1].0) as u32 + 1;
        if q1 > m || q2 > m {
            return None;
        }
        let out: Vec<u32> = entry
            .v
            .query(xv, q1, q2, stats)
            .into_iter()
            .map(|t| entry.ext.source_of(t).expect("real node"))
            .filter(|&t| {
                t > top
                    && self.w1[t as usize] <= lq[0].1
                    && self.w2[t as usize] <= lq[1].1
                    && (0..sq.len()).all(|d| self.smalls[d][t as usize] <= sq[d].1)
            })
            .collect();
        if out.is_empty() {
            None
        } else {
            Some(out)
        }
    }
}

pub struct Adr2deFactory {
    pub f: u32,
    pub mode: ViewMode,
}

impl BaseFactory<CollectAgg> for Adr2deFactory {
    type Base = Adr2deBase;
    fn target_large(&self) -> usize {
        2
    }
    fn build(&self, data: &crate::framework::StageData) -> Result<Adr2deBase, Error> {
        Adr2deBase::new(
            Arc::clone(&data.tree),
            data.large[0].clone(),
            data.large[1].clone(),
            data.small.clone(),
            data.small_universe.clone(),
            self.f,
            self.mode,
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DominanceVariant {
    Theorem1,
    Theorem2,
}

impl DominanceVariant {
    pub fn parse(s: &str) -> Option<DominanceVariant> {
        match s {
            "theorem1" => Some(DominanceVariant::Theorem1),
            "theorem2" => Some(DominanceVariant::Theorem2),
            _ => None,
        }
    }
}

enum Flavor {
    Binary(PathQueryEngine<CollectAgg, Adr2dBase>),
    Wide(PathQueryEngine<CollectAgg, Adr2deBase>),
}

/// d-dimensional ancestor dominance reporting, built in either of the two
/// reduction flavors.
pub struct DominanceIndex {
    flavor: Flavor,
    tree: Arc<OrdinalTree>,
    n: u32,
    dims: usize,
}

impl DominanceIndex {
    pub fn build(
        wt: &WeightedTree,
        eps: f64,
        branching: Option<u32>,
        variant: DominanceVariant,
        mode: ViewMode,
    ) -> Result<DominanceIndex, Error> {
        if wt.dims() < 2 {
            return Err(Error::VectorDimensionMismatch {
                expected: 2,
                got: wt.dims(),
            });
        }
        let f = branching
            .unwrap_or_else(|| crate::counting::wide_fanout(wt.n(), eps))
            .max(2);
        let flavor = match variant {
            DominanceVariant::Theorem1 => Flavor::Binary(PathQueryEngine::build(
                wt,
                StageConfig::binary(mode),
                &Adr2dFactory { f, mode },
                CollectAgg,
            )?),
            DominanceVariant::Theorem2 => Flavor::Wide(PathQueryEngine::build(
                wt,
                StageConfig::wide(f, mode),
                &Adr2deFactory { f, mode },
                CollectAgg,
            )?),
        };
        Ok(DominanceIndex {
            flavor,
            tree: Arc::clone(wt.tree()),
            n: wt.n(),
            dims: wt.dims(),
        })
    }

    /// All ancestors-or-self of x whose vectors dominate q, ascending.
    pub fn query(
        &self,
        x: NodeId,
        q: &[u32],
        stats: &mut QueryStats,
    ) -> Result<Vec<u32>, Error> {
        if q.len() != self.dims {
            return Err(Error::VectorDimensionMismatch {
                expected: self.dims,
                got: q.len(),
            });
        }
        if x == 0 || !self.tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if q.iter().any(|&qi| qi > self.n) {
            return Ok(Vec::new());
        }
        let lq: Vec<Range> = q.iter().map(|&qi| (qi.max(1), self.n)).collect();
        let steps = self.tree.depth(x) - 1;
        let y = self.tree.level_anc(x, steps).unwrap_or(x); // x's own root
        let got = match &self.flavor {
            Flavor::Binary(eng) => eng.query(x, y, &lq, &[], stats)?,
            Flavor::Wide(eng) => eng.query(x, y, &lq, &[], stats)?,
        };
        let mut out = got.unwrap_or_default();
        out.sort_unstable();
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]));
        Ok(out)
    }

    pub fn heap_bytes(&self) -> usize {
        match &self.flavor {
            Flavor::Binary(eng) => eng.heap_bytes(&Adr2dBase::heap_bytes),
            Flavor::Wide(eng) => eng.heap_bytes(&Adr2deBase::heap_bytes),
        }
    }
}
