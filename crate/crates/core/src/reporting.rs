//! Path reporting: every path node whose vector falls in a query box.
//!
//! The 1-D base decomposes the weight interval canonically over a fanout-2
//! range hierarchy and streams each covered block's in-block ancestor chain,
//! so a query costs one block visit per decomposition piece plus one step
//! per reported node. The catalog stage keeps one extracted copy per
//! orthogonal range over the small dimensions and snaps the weight interval
//! into each copy's local rank space. Wider inputs reduce onto the catalog
//! through wide hierarchy stages whose sinks relabel reported nodes on the
//! way out, so nothing is materialized per level.

use crate::counting::wide_fanout;
use crate::error::Error;
use crate::extract::{extract, Extraction};
use crate::framework::{child_stage_data, descend_wide, Range, StageData, WideDispatch};
use crate::hierarchy::{child_range, RangeHierarchy, ViewMode};
use crate::stats::QueryStats;
use crate::tree::{NodeId, OrdinalTree, NONE};
use crate::weighted::WeightedTree;
use std::sync::Arc;

/// Streaming target for reported nodes; query-local, never retained.
pub type Sink<'a> = &'a mut dyn FnMut(NodeId);

/// Scalar path reporting: nodes of P_{x,y} with weight in [lo, hi].
pub struct ReportingBase {
    tree: Arc<OrdinalTree>,
    hier: RangeHierarchy, // fanout 2 over the weights
    w1: Vec<u32>,         // by node, slot 0 = 0
}

impl ReportingBase {
    /// `w1[v]` is node v's weight, a permutation of 1..=n; slot 0 = 0.
    pub fn new(
        tree: &Arc<OrdinalTree>,
        w1: &[u32],
        mode: ViewMode,
    ) -> Result<ReportingBase, Error> {
        let n = tree.len();
        assert_eq!(w1.len() as u32, n + 1);
        let hier = RangeHierarchy::build(tree, &w1[1..], 2, mode)?;
        Ok(ReportingBase {
            tree: Arc::clone(tree),
            hier,
            w1: w1.to_vec(),
        })
    }

    pub fn tree(&self) -> &Arc<OrdinalTree> {
        &self.tree
    }

    /// Canonical walk: report the whole in-block chain once the block's
    /// range is inside the query, recurse into the at most two straddling
    /// children otherwise. Block visits land in stats.probes, reports in
    /// stats.reported.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        l: u32,
        a: u32,
        b: u32,
        x_l: NodeId,
        x: NodeId,
        top: NodeId,
        lo: u32,
        hi: u32,
        sink: Sink,
        stats: &mut QueryStats,
    ) {
        stats.probes += 1;
        if lo <= a && b <= hi {
            let lt = self.hier.level_tree(l).base();
            let mut cur = x_l;
            while cur != 0 {
                let Ok(src) = self.hier.source_of(l, cur) else {
                    break;
                };
                if src <= top {
                    break; // the rest of the chain sits at or above the cut
                }
                sink(src);
                stats.reported += 1;
                cur = lt.parent(cur).unwrap_or(0);
            }
            return;
        }
        for j in 1..=2u32 {
            let (ca, cb) = child_range(a, b, 2, j);
            if ca > cb || cb < lo || ca > hi {
                continue;
            }
            if l + 1 > self.hier.built_levels() {
                // leaf rank: direct membership test on the source tree
                debug_assert_eq!(ca, cb);
                stats.probes += 1;
                let c = self.hier.owner(ca);
                if c > top && self.tree.is_ancestor(c, x) {
                    sink(c);
                    stats.reported += 1;
                }
            } else if let Ok(c) = self.hier.descend(l, x_l, j) {
                self.walk(l + 1, ca, cb, c, x, top, lo, hi, sink, stats);
            }
        }
    }

    /// Stream the nodes with weight in [lo, hi] on the half-path from x up
    /// to, but excluding, `top` (NONE or 0 leaves it uncapped).
    pub fn report_half(
        &self,
        x: NodeId,
        top: NodeId,
        lo: u32,
        hi: u32,
        sink: Sink,
        stats: &mut QueryStats,
    ) {
        let top = if top == NONE { 0 } else { top };
        let n = self.tree.len();
        let (lo, hi) = (lo.max(1), hi.min(n));
        if lo > hi || x == 0 || x == top {
            return;
        }
        self.walk(
            1,
            1,
            n,
            self.hier.copy_of(1, x),
            x,
            top,
            lo,
            hi,
            sink,
            stats,
        );
    }

    /// Nodes of P_{x,y} with weight in [lo, hi], ascending.
    pub fn report_path(
        &self,
        x: NodeId,
        y: NodeId,
        lo: u32,
        hi: u32,
        stats: &mut QueryStats,
    ) -> Result<Vec<u32>, Error> {
        if x == 0 || !self.tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if y == 0 || !self.tree.is_node(y) {
            return Err(Error::InvalidNode(y));
        }
        let z = self.tree.lca(x, y);
        let mut out = Vec::new();
        {
            let mut sink = |v: NodeId| out.push(v);
            if x != z {
                self.report_half(x, z, lo, hi, &mut sink, stats);
            }
            if y != z {
                self.report_half(y, z, lo, hi, &mut sink, stats);
            }
        }
        if z != 0 && lo.max(1) <= self.w1[z as usize] && self.w1[z as usize] <= hi {
            out.push(z);
        }
        out.sort_unstable();
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "duplicate report");
        Ok(out)
    }

    pub fn heap_bytes(&self) -> usize {
        self.hier.heap_bytes() + std::mem::size_of_val(&self.w1[..])
    }
}

struct CatalogEntry {
    ext: Extraction,
    base: ReportingBase, // over the extraction, in its local rank space
    sorted: Vec<u32>,    // member weights ascending, for interval snapping
}

/// One extracted reporting structure per orthogonal range over the small
/// dimensions; queries go straight to their range's copy.
pub struct ReportingCatalog {
    tree: Arc<OrdinalTree>,
    w1: Vec<u32>,
    smalls: Vec<Vec<u32>>,
    universes: Vec<u32>,
    entries: Vec<Option<CatalogEntry>>, // dense over (lo, hi) pairs per dim
}

impl ReportingCatalog {
    pub fn new(
        tree: &Arc<OrdinalTree>,
        w1: Vec<u32>,
        smalls: Vec<Vec<u32>>,
        universes: Vec<u32>,
        mode: ViewMode,
    ) -> Result<ReportingCatalog, Error> {
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
        let total: usize = universes
            .iter()
            .map(|&u| (u.max(1) as usize).pow(2))
            .product();
        let mut entries = Vec::with_capacity(total);
        for idx in 0..total {
            // decode one (lo, hi) pair per dimension, first dim least
            // significant; cells with lo > hi stay unbuilt
            let mut t = idx;
            let mut box_lo = Vec::with_capacity(universes.len());
            let mut box_hi = Vec::with_capacity(universes.len());
            let mut valid = true;
            for &u in &universes {
                let u = u.max(1) as usize;
                let p = t % (u * u);
                t /= u * u;
                let (lo, hi) = (p / u + 1, p % u + 1);
                valid &= lo <= hi;
                box_lo.push(lo as u32);
                box_hi.push(hi as u32);
            }
            if !valid {
                entries.push(None);
                continue;
            }
            let mut selected = vec![false; n as usize + 1];
            for v in 1..=n {
                selected[v as usize] = smalls
                    .iter()
                    .enumerate()
                    .all(|(i, col)| (box_lo[i]..=box_hi[i]).contains(&col[v as usize]));
            }
            let ext = extract(tree, &selected, false);
            let m = ext.tree.len();
            if m == 0 {
                entries.push(None);
                continue;
            }
            let vals: Vec<u32> = (1..=m)
                .map(|id| w1[ext.source_of(id).expect("kept node") as usize])
                .collect();
            let mut sorted = vals.clone();
            sorted.sort_unstable();
            let mut lw = vec![0u32; m as usize + 1];
            for (i, &w) in vals.iter().enumerate() {
                lw[i + 1] = sorted.partition_point(|&s| s < w) as u32 + 1;
            }
            let base = ReportingBase::new(&ext.tree, &lw, mode)?;
            entries.push(Some(CatalogEntry { ext, base, sorted }));
        }
        Ok(ReportingCatalog {
            tree: Arc::clone(tree),
            w1,
            smalls,
            universes,
            entries,
        })
    }

    fn entry_index(&self, g: &[Range]) -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (i, &(lo, hi)) in g.iter().enumerate() {
            let u = self.universes[i].max(1);
            let (lo, hi) = (lo.max(1), hi.min(u));
            if lo > hi {
                return None;
            }
            idx += stride * ((lo as usize - 1) * u as usize + (hi as usize - 1));
            stride *= (u as usize).pow(2);
        }
        Some(idx)
    }

    /// Stream nodes of the half-path with weight in `q1` and small
    /// coordinates in `g`, in source ids of this catalog's tree.
    pub fn report_half(
        &self,
        x: NodeId,
        top: NodeId,
        q1: Range,
        g: &[Range],
        sink: Sink,
        stats: &mut QueryStats,
    ) {
        debug_assert_eq!(g.len(), self.universes.len());
        let top = if top == NONE { 0 } else { top };
        let Some(idx) = self.entry_index(g) else {
            return;
        };
        let Some(entry) = &self.entries[idx] else {
            return;
        };
        let Some(xv) = entry.ext.view_of(x) else {
            return;
        };
        let sx = entry.ext.source_of(xv).expect("view of a real node");
        if top != 0 && sx <= top {
            return;
        }
        // the view of the cut is exclusive in local ids exactly because it
        // is the lowest member at or above the cut
        let tv = if top == 0 {
            0
        } else {
            entry.ext.view_of(top).unwrap_or(0)
        };
        let lo = entry.sorted.partition_point(|&s| s < q1.0) as u32 + 1;
        let hi = entry.sorted.partition_point(|&s| s <= q1.1) as u32;
        if lo > hi {
            return;
        }
        let mut lifted = |v: NodeId| sink(entry.ext.source_of(v).expect("kept node"));
        entry.base.report_half(xv, tv, lo, hi, &mut lifted, stats);
    }

    fn node_in(&self, v: NodeId, q1: Range, g: &[Range]) -> bool {
        (q1.0..=q1.1).contains(&self.w1[v as usize])
            && g.iter()
                .enumerate()
                .all(|(i, &(lo, hi))| (lo..=hi).contains(&self.smalls[i][v as usize]))
    }

    /// Nodes of P_{x,y} with weight in `q1` and small coordinates in `g`,
    /// ascending.
    pub fn report_path(
        &self,
        x: NodeId,
        y: NodeId,
        q1: Range,
        g: &[Range],
        stats: &mut QueryStats,
    ) -> Result<Vec<u32>, Error> {
        if g.len() != self.universes.len() {
            return Err(Error::VectorDimensionMismatch {
                expected: self.universes.len() + 1,
                got: g.len() + 1,
            });
        }
        if x == 0 || !self.tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if y == 0 || !self.tree.is_node(y) {
            return Err(Error::InvalidNode(y));
        }
        let z = self.tree.lca(x, y);
        let mut out = Vec::new();
        {
            let mut sink = |v: NodeId| out.push(v);
            if x != z {
                self.report_half(x, z, q1, g, &mut sink, stats);
            }
            if y != z {
                self.report_half(y, z, q1, g, &mut sink, stats);
            }
        }
        if z != 0 && self.node_in(z, q1, g) {
            out.push(z);
        }
        out.sort_unstable();
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "duplicate report");
        Ok(out)
    }

    pub fn heap_bytes(&self) -> usize {
        let mut total = std::mem::size_of_val(&self.w1[..])
            + self
                .smalls
                .iter()
                .map(|c| std::mem::size_of_val(&c[..]))
                .sum::<usize>();
        for e in self.entries.iter().flatten() {
            total += e.ext.heap_bytes()
                + e.base.heap_bytes()
                + std::mem::size_of_val(&e.sorted[..]);
        }
        total
    }
}

enum Chain {
    Catalog(ReportingCatalog),
    Layer(WideLayer),
}

struct WideLayer {
    hier: RangeHierarchy,
    children: Vec<Chain>,
}

fn build_chain(data: StageData, f: u32, mode: ViewMode) -> Result<Chain, Error> {
    if data.large.len() == 1 {
        return Ok(Chain::Catalog(ReportingCatalog::new(
            &data.tree,
            data.large.into_iter().next().expect("one large dim"),
            data.small,
            data.small_universe,
            mode,
        )?));
    }
    let n = data.n();
    let dim = data.large.len() - 1;
    let weights: Vec<u32> = (1..=n).map(|v| data.large[dim][v as usize]).collect();
    let hier = RangeHierarchy::build(&data.tree, &weights, f, mode)?;
    let mut children = Vec::with_capacity(hier.built_levels() as usize);
    for l in 1..=hier.built_levels() {
        let cd = child_stage_data(&data, &hier, l, true);
        children.push(build_chain(cd, f, mode)?);
    }
    Ok(Chain::Layer(WideLayer { hier, children }))
}

impl Chain {
    fn report_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        sink: Sink,
        stats: &mut QueryStats,
    ) {
        match self {
            Chain::Catalog(cat) => {
                debug_assert_eq!(lq.len(), 1);
                cat.report_half(x, top, lq[0], sq, sink, stats);
            }
            Chain::Layer(lay) => {
                let dim = lq.len() - 1;
                let (qlo, qhi) = lq[dim];
                descend_wide(&lay.hier, x, top, qlo, qhi, stats, &mut |disp, stats| {
                    match disp {
                        WideDispatch::FullRoot => {
                            let mut sq2 = Vec::with_capacity(sq.len() + 1);
                            sq2.push((1, lay.hier.f()));
                            sq2.extend_from_slice(sq);
                            // level 1 copies carry their source ids
                            lay.children[0].report_half(x, top, &lq[..dim], &sq2, sink, stats);
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
                            let mut lifted = |v: NodeId| {
                                sink(lay.hier.source_of(l, v).expect("real node"))
                            };
                            lay.children[l as usize - 1].report_half(
                                x_l,
                                top_l,
                                &lq[..dim],
                                &sq2,
                                &mut lifted,
                                stats,
                            );
                        }
                    }
                });
            }
        }
    }

    fn heap_bytes(&self) -> usize {
        match self {
            Chain::Catalog(cat) => cat.heap_bytes(),
            Chain::Layer(lay) => {
                lay.hier.heap_bytes()
                    + lay.children.iter().map(|c| c.heap_bytes()).sum::<usize>()
            }
        }
    }
}

/// Path reporting over d-dimensional vectors: all path nodes whose vector
/// falls in the query box, streamed through wide reduction stages onto the
/// catalog structures.
pub struct ReportingIndex {
    chain: Chain,
    top: StageData,
    n: u32,
    dims: usize,
}

impl ReportingIndex {
    pub fn build(
        wt: &WeightedTree,
        eps: f64,
        branching: Option<u32>,
        mode: ViewMode,
    ) -> Result<ReportingIndex, Error> {
        let f = branching.unwrap_or_else(|| wide_fanout(wt.n(), eps)).max(2);
        let data = StageData::from_weighted(wt);
        let top = StageData {
            tree: Arc::clone(&data.tree),
            large: data.large.clone(),
            small: Vec::new(),
            small_universe: Vec::new(),
        };
        let chain = build_chain(data, f, mode)?;
        Ok(ReportingIndex {
            chain,
            top,
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

    /// Nodes of P_{x,y} whose vector lies in `q`, ascending; `q` gives one
    /// closed interval per dimension, in rank space.
    pub fn query(
        &self,
        x: NodeId,
        y: NodeId,
        q: &[Range],
        stats: &mut QueryStats,
    ) -> Result<Vec<u32>, Error> {
        if q.len() != self.dims {
            return Err(Error::VectorDimensionMismatch {
                expected: self.dims,
                got: q.len(),
            });
        }
        let tree = &self.top.tree;
        if x == 0 || !tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if y == 0 || !tree.is_node(y) {
            return Err(Error::InvalidNode(y));
        }
        let mut lq = Vec::with_capacity(q.len());
        for &(lo, hi) in q {
            let (lo, hi) = (lo.max(1), hi.min(self.n));
            if lo > hi {
                return Ok(Vec::new());
            }
            lq.push((lo, hi));
        }
        let z = tree.lca(x, y);
        let mut out = Vec::new();
        {
            let mut sink = |v: NodeId| out.push(v);
            if x != z {
                self.chain.report_half(x, z, &lq, &[], &mut sink, stats);
            }
            if y != z {
                self.chain.report_half(y, z, &lq, &[], &mut sink, stats);
            }
        }
        if self.top.node_in(z, &lq, &[]) {
            out.push(z);
        }
        out.sort_unstable();
        debug_assert!(out.windows(2).all(|w| w[0] < w[1]), "duplicate report");
        Ok(out)
    }

    pub fn heap_bytes(&self) -> usize {
        self.top.heap_bytes() + self.chain.heap_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::OracleTree;
    use crate::weighted::{generate, Shape, WeightedTree};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn t1() -> WeightedTree {
        let tree = Arc::new(OrdinalTree::from_parents(&[1, 2, 2, 1]).unwrap());
        WeightedTree::new(
            tree,
            &[
                vec![3, 2],
                vec![1, 5],
                vec![5, 1],
                vec![2, 4],
                vec![4, 3],
            ],
        )
        .unwrap()
    }

    fn oracle_of(wt: &WeightedTree) -> OracleTree {
        let n = wt.n();
        let parents: Vec<u32> = (2..=n).map(|v| wt.tree().parent(v).unwrap()).collect();
        let rows: Vec<Vec<i64>> = (1..=n)
            .map(|v| wt.vector(v).iter().map(|&w| w as i64).collect())
            .collect();
        OracleTree::new(&parents, &rows).unwrap()
    }

    fn dim_col(wt: &WeightedTree, d: usize) -> Vec<u32> {
        let mut w = vec![0u32];
        w.extend_from_slice(wt.dim_weights(d));
        w
    }

    #[test]
    fn base_fixture() {
        // P_{3,5} = {3, 2, 1, 5} with weights {5, 1, 3, 4}
        let wt = t1();
        let b = ReportingBase::new(wt.tree(), &dim_col(&wt, 0), ViewMode::Explicit).unwrap();
        let mut st = QueryStats::new();
        assert_eq!(b.report_path(3, 5, 2, 4, &mut st).unwrap(), vec![1, 5]);
        assert_eq!(b.report_path(3, 5, 1, 5, &mut st).unwrap(), vec![1, 2, 3, 5]);
        assert_eq!(b.report_path(3, 5, 0, 99, &mut st).unwrap(), vec![1, 2, 3, 5]);
        assert_eq!(b.report_path(3, 5, 4, 3, &mut st).unwrap(), Vec::<u32>::new());
        assert_eq!(b.report_path(3, 5, 1, 1, &mut st).unwrap(), vec![2]);
        assert_eq!(b.report_path(4, 4, 2, 2, &mut st).unwrap(), vec![4]);
        assert_eq!(b.report_path(4, 4, 3, 9, &mut st).unwrap(), Vec::<u32>::new());
        assert!(matches!(
            b.report_path(0, 5, 1, 5, &mut st),
            Err(Error::InvalidNode(0))
        ));
        assert!(matches!(
            b.report_path(3, 6, 1, 5, &mut st),
            Err(Error::InvalidNode(6))
        ));
        assert!(b.heap_bytes() > 0);
    }

    #[test]
    fn base_matches_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(0x3e9);
        for &n in &[1u32, 2, 3, 17, 64, 256] {
            for (si, &shape) in [Shape::Random, Shape::Path, Shape::Caterpillar]
                .iter()
                .enumerate()
            {
                let wt = generate(n, 1, 0x1e9 + n as u64 + si as u64, shape);
                let oracle = oracle_of(&wt);
                let mode = if si % 2 == 0 {
                    ViewMode::Explicit
                } else {
                    ViewMode::IndexOnly
                };
                let b = ReportingBase::new(wt.tree(), &dim_col(&wt, 0), mode).unwrap();
                let mut st = QueryStats::new();
                for _ in 0..200 {
                    let x = rng.gen_range(1..=n);
                    let y = rng.gen_range(1..=n);
                    let lo = rng.gen_range(0..=n + 1);
                    let hi = rng.gen_range(0..=n + 1);
                    let want = oracle.report(x, y, &[(lo as i64, hi as i64)]).unwrap();
                    let got = b.report_path(x, y, lo, hi, &mut st).unwrap();
                    assert_eq!(got, want, "n={n} shape={si} x={x} y={y} q=[{lo},{hi}]");
                }
            }
        }
    }

    #[test]
    fn base_visits_few_blocks() {
        let wt = generate(256, 1, 0xb10c, Shape::Random);
        let b = ReportingBase::new(wt.tree(), &dim_col(&wt, 0), ViewMode::Explicit).unwrap();
        let h = b.hier.h() as u64; // 9 at n = 256
        let mut rng = ChaCha20Rng::seed_from_u64(0xb10c);
        let mut st = QueryStats::new();
        for _ in 0..2000 {
            let x = rng.gen_range(1..=256u32);
            let y = rng.gen_range(1..=256u32);
            let lo = rng.gen_range(1..=256u32);
            let hi = rng.gen_range(1..=256u32);
            let before = st.probes;
            b.report_path(x, y, lo, hi, &mut st).unwrap();
            let visits = st.probes - before;
            // canonical decomposition: at most four blocks per level and
            // half, independent of the output size
            assert!(visits <= 8 * h + 8, "{visits} visits at h={h}");
        }
    }

    #[test]
    fn catalog_fixture() {
        let wt = t1();
        let cat = ReportingCatalog::new(
            wt.tree(),
            dim_col(&wt, 0),
            vec![dim_col(&wt, 1)],
            vec![5],
            ViewMode::Explicit,
        )
        .unwrap();
        let mut st = QueryStats::new();
        // second weights: node 1 -> 2, 2 -> 5, 3 -> 1, 4 -> 4, 5 -> 3
        assert_eq!(
            cat.report_path(3, 5, (1, 5), &[(2, 2)], &mut st).unwrap(),
            vec![1]
        );
        assert_eq!(
            cat.report_path(3, 5, (1, 5), &[(3, 5)], &mut st).unwrap(),
            vec![2, 5]
        );
        assert_eq!(
            cat.report_path(3, 5, (2, 5), &[(3, 5)], &mut st).unwrap(),
            vec![5]
        );
        assert_eq!(
            cat.report_path(3, 5, (1, 5), &[(4, 3)], &mut st).unwrap(),
            Vec::<u32>::new()
        );
        assert_eq!(
            cat.report_path(3, 5, (1, 5), &[(1, 5)], &mut st).unwrap(),
            vec![1, 2, 3, 5]
        );
        assert_eq!(
            cat.report_path(4, 4, (2, 2), &[(4, 4)], &mut st).unwrap(),
            vec![4]
        );
        assert!(matches!(
            cat.report_path(3, 5, (1, 5), &[], &mut st),
            Err(Error::VectorDimensionMismatch { .. })
        ));
        assert!(cat.heap_bytes() > 0);
    }

    #[test]
    fn catalog_matches_scan() {
        let mut rng = ChaCha20Rng::seed_from_u64(0xca7);
        for &n in &[1u32, 2, 17, 64] {
            for &u in &[2u32, 3] {
                let wt = generate(n, 1, 0x5ca9 + (n * u) as u64, Shape::Random);
                let w1 = dim_col(&wt, 0);
                let mut small = vec![0u32];
                for _ in 1..=n {
                    small.push(rng.gen_range(1..=u));
                }
                let cat = ReportingCatalog::new(
                    wt.tree(),
                    w1.clone(),
                    vec![small.clone()],
                    vec![u],
                    ViewMode::Explicit,
                )
                .unwrap();
                let oracle = oracle_of(&wt);
                let mut st = QueryStats::new();
                for _ in 0..150 {
                    let x = rng.gen_range(1..=n);
                    let y = rng.gen_range(1..=n);
                    let (lo, hi) = (rng.gen_range(0..=n + 1), rng.gen_range(0..=n + 1));
                    let (gl, gh) = (rng.gen_range(1..=u), rng.gen_range(1..=u));
                    let mut want: Vec<u32> = oracle
                        .path(x, y)
                        .unwrap()
                        .into_iter()
                        .filter(|&v| {
                            (lo..=hi).contains(&w1[v as usize])
                                && (gl..=gh).contains(&small[v as usize])
                        })
                        .collect();
                    want.sort_unstable();
                    let got = cat
                        .report_path(x, y, (lo, hi), &[(gl, gh)], &mut st)
                        .unwrap();
                    assert_eq!(got, want, "n={n} u={u} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn index_fixture() {
        let wt = t1();
        let idx = ReportingIndex::build(&wt, 0.5, None, ViewMode::Explicit).unwrap();
        let mut st = QueryStats::new();
        assert_eq!(
            idx.query(3, 5, &[(2, 4), (1, 5)], &mut st).unwrap(),
            vec![1, 5]
        );
        assert_eq!(
            idx.query(3, 5, &[(1, 5), (1, 5)], &mut st).unwrap(),
            vec![1, 2, 3, 5]
        );
        assert_eq!(
            idx.query(3, 5, &[(1, 5), (3, 4)], &mut st).unwrap(),
            vec![5]
        );
        assert_eq!(
            idx.query(3, 5, &[(1, 5), (5, 4)], &mut st).unwrap(),
            Vec::<u32>::new()
        );
        assert_eq!(idx.query(2, 2, &[(1, 1), (5, 5)], &mut st).unwrap(), vec![2]);
        assert!(matches!(
            idx.query(3, 5, &[(1, 5)], &mut st),
            Err(Error::VectorDimensionMismatch { .. })
        ));
        assert!(matches!(
            idx.query(0, 5, &[(1, 5), (1, 5)], &mut st),
            Err(Error::InvalidNode(0))
        ));
        assert!(idx.heap_bytes() > 0);

        let lone = generate(1, 2, 7, Shape::Random);
        let li = ReportingIndex::build(&lone, 0.5, None, ViewMode::Explicit).unwrap();
        assert_eq!(li.query(1, 1, &[(1, 1), (1, 1)], &mut st).unwrap(), vec![1]);
        assert_eq!(
            li.query(1, 1, &[(2, 2), (1, 1)], &mut st).unwrap(),
            Vec::<u32>::new()
        );
    }

    #[test]
    fn index_matches_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(0x4e904);
        for &d in &[2usize, 3] {
            for &n in &[1u32, 2, 17, 64, 150] {
                for (si, &shape) in [Shape::Random, Shape::Caterpillar].iter().enumerate() {
                    let wt = generate(n, d, 0xcafe + n as u64 + d as u64, shape);
                    let oracle = oracle_of(&wt);
                    let mode = if (n as usize + si) % 2 == 0 {
                        ViewMode::Explicit
                    } else {
                        ViewMode::IndexOnly
                    };
                    let branching = if si == 0 { None } else { Some(2) };
                    let idx = ReportingIndex::build(&wt, 0.5, branching, mode).unwrap();
                    let mut st = QueryStats::new();
                    for _ in 0..60 {
                        let x = rng.gen_range(1..=n);
                        let y = rng.gen_range(1..=n);
                        let q: Vec<(u32, u32)> = (0..d)
                            .map(|_| (rng.gen_range(0..=n + 1), rng.gen_range(0..=n + 1)))
                            .collect();
                        let oq: Vec<(i64, i64)> =
                            q.iter().map(|&(a, b)| (a as i64, b as i64)).collect();
                        let want = oracle.report(x, y, &oq).unwrap();
                        let got = idx.query(x, y, &q, &mut st).unwrap();
                        assert_eq!(got, want, "d={d} n={n} shape={si} x={x} y={y} q={q:?}");
                    }
                    assert_eq!(st.violations(), 0, "d={d} n={n} shape={si}");
                }
            }
        }
    }
}
