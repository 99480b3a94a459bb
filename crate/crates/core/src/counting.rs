//! Path counting.
//!
//! The base case handles trees whose weight vectors live in a small universe
//! [c]^d. A two-level cover into mini and micro subtrees turns every
//! root-path count into three table reads: a shared per-shape table answers
//! the within-micro part, and per-cluster cnt arrays store the counts for
//! the micro-to-mini and mini-to-root stretches. Full rank-space counting is
//! the wide reduction stacked on this base, one dimension at a time.

use crate::error::Error;
use crate::extract::extract;
use crate::framework::{
    BaseFactory, CountAgg, HalfQuery, PathQueryEngine, Range, StageConfig, StageData,
};
use crate::hierarchy::ViewMode;
use crate::stats::QueryStats;
use crate::tree::{NodeId, OrdinalTree, NONE};
use crate::weighted::WeightedTree;
use std::collections::HashMap;
use std::sync::Arc;

/// One cover subtree: a connected fragment with a designated root. Roots may
/// be shared between clusters; all other nodes belong to exactly one.
pub struct Cluster {
    pub root: NodeId,
    /// ascending ids, root included
    pub nodes: Vec<NodeId>,
}

pub struct Cover {
    pub param: u32,
    pub clusters: Vec<Cluster>,
    /// node -> index of the cluster where it is a non-root member; for a
    /// tree root, the final cluster it roots
    pub home: Vec<u32>,
}

/// Bottom-up greedy merge: each child passes up an open fragment of fewer
/// than `param` nodes; a parent closes `{v} + acc + next fragment` as soon
/// as the merged size without v reaches param-1. Closed clusters hold at
/// most 2·param-2 nodes and only roots are ever shared.
pub fn build_cover(tree: &OrdinalTree, param: u32) -> Cover {
    let l = param.max(2) as usize;
    let n = tree.len();
    let mut frag: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut home = vec![NONE; n as usize + 1];

    let close = |root: u32,
                 nodes: Vec<u32>,
                 home: &mut Vec<u32>,
                 clusters: &mut Vec<Cluster>,
                 root_in_home: bool| {
        let mut nodes = nodes;
        nodes.sort_unstable();
        debug_assert!(nodes.len() <= 2 * l - 2);
        let id = clusters.len() as u32;
        for &u in &nodes {
            if u != root || root_in_home {
                home[u as usize] = id;
            }
        }
        clusters.push(Cluster { root, nodes });
    };

    for v in (1..=n).rev() {
        let mut acc: Vec<u32> = Vec::new();
        for &c in tree.children(v) {
            let oc = std::mem::take(&mut frag[c as usize]);
            if acc.len() + oc.len() >= l - 1 {
                let mut nodes = Vec::with_capacity(1 + acc.len() + oc.len());
                nodes.push(v);
                nodes.append(&mut acc);
                nodes.extend(oc);
                close(v, nodes, &mut home, &mut clusters, false);
            } else {
                acc.extend(oc);
            }
        }
        let mut f = Vec::with_capacity(1 + acc.len());
        f.push(v);
        f.append(&mut acc);
        debug_assert!(f.len() <= l - 1);
        frag[v as usize] = f;
    }
    // leftover fragments at the real roots close with the root claiming the
    // cluster as its own home
    for v in 1..=n {
        if tree.parent(v).map_or(true, |p| p == 0) {
            let nodes = std::mem::take(&mut frag[v as usize]);
            if !nodes.is_empty() {
                close(v, nodes, &mut home, &mut clusters, true);
            }
        }
    }
    Cover {
        param: l as u32,
        clusters,
        home,
    }
}

/// interval -> dense index for one dimension of universe u: 0 is the empty
/// range, then all (a,b) with 1 <= a <= b <= u in lexicographic order
fn interval_index(lo: u32, hi: u32, u: u32) -> usize {
    let a = lo.max(1);
    let b = hi.min(u);
    if a > b {
        return 0;
    }
    let a = a as usize;
    let b = b as usize;
    let u = u as usize;
    (a - 1) * u - (a - 1) * (a.saturating_sub(2)) / 2 + (b - a) + 1
}

fn k_of(u: u32) -> usize {
    let u = u as usize;
    u * (u + 1) / 2 + 1
}

pub struct CountingBase {
    tree: Arc<OrdinalTree>,
    universes: Vec<u32>,
    weights: Vec<Vec<u32>>, // dim-major, node-indexed, slot 0 = 0
    k_total: usize,
    l_mini: u32,
    l_micro: u32,
    mini_cnt: Vec<u32>,  // [mini * k_total + q]
    micro_cnt: Vec<u32>, // [micro * k_total + q]
    node_mini: Vec<u32>,
    node_micro: Vec<u32>,
    node_pos: Vec<u32>,
    micro_type: Vec<u32>,
    type_rows: Vec<Vec<u32>>, // [type] -> [pos * k_total + q]
    mini_cover: Cover,
    real_root: Option<NodeId>,
}

impl CountingBase {
    pub fn new(
        tree: Arc<OrdinalTree>,
        weights: Vec<Vec<u32>>, // dim-major, slot 0 per dim is the dummy 0
        universes: Vec<u32>,
    ) -> Result<CountingBase, Error> {
        let n = tree.len();
        let d = universes.len();
        assert_eq!(weights.len(), d);
        assert!(d >= 1);
        for dim in 0..d {
            let u = universes[dim].max(1);
            for v in 1..=n {
                let w = weights[dim][v as usize];
                if w == 0 || w > u {
                    return Err(Error::WeightOutOfSmallUniverse { weight: w, c: u });
                }
            }
        }

        let c = universes.iter().copied().max().unwrap().max(1) as u64;
        let lg = (64 - (n.max(2) as u64 - 1).leading_zeros()) as u64; // ceil lg n
        let c2d = c.saturating_pow(2 * d as u32);
        let l_mini = c2d
            .saturating_mul(lg)
            .clamp(2, 2 * n.max(1) as u64) as u32;
        let l_micro = c2d.clamp(2, 2 * n.max(1) as u64) as u32;

        let k_dims: Vec<usize> = universes.iter().map(|&u| k_of(u)).collect();
        let k_total: usize = k_dims.iter().product();

        // per distinct small vector, its match row over all range indices
        let radix: Vec<u32> = universes.to_vec();
        let n_vecs: usize = radix.iter().map(|&u| u as usize).product();
        let vec_id = |v: u32| -> usize {
            let mut id = 0usize;
            for dim in (0..d).rev() {
                id = id * radix[dim] as usize + (weights[dim][v as usize] - 1) as usize;
            }
            id
        };
        let mut match_row = vec![false; n_vecs * k_total];
        {
            // enumerate (vector, combined range) pairs dimension by dimension
            let mut vec_ws = vec![1u32; d];
            for vid in 0..n_vecs {
                let mut t = vid;
                for dim in 0..d {
                    vec_ws[dim] = (t % radix[dim] as usize) as u32 + 1;
                    t /= radix[dim] as usize;
                }
                for q in 0..k_total {
                    let mut t = q;
                    let mut ok = true;
                    for dim in 0..d {
                        let qi = t % k_dims[dim];
                        t /= k_dims[dim];
                        if qi == 0 {
                            ok = false;
                            break;
                        }
                        // invert the triangular numbering
                        let u = universes[dim] as usize;
                        let mut a = 1usize;
                        let mut rem = qi - 1;
                        while rem >= u - a + 1 {
                            rem -= u - a + 1;
                            a += 1;
                        }
                        let b = a + rem;
                        let w = vec_ws[dim] as usize;
                        if w < a || w > b {
                            ok = false;
                            break;
                        }
                    }
                    match_row[vid * k_total + q] = ok;
                }
            }
        }

        let mini_cover = build_cover(&tree, l_mini);

        let mut node_mini = vec![NONE; n as usize + 1];
        let mut node_micro = vec![NONE; n as usize + 1];
        let mut node_pos = vec![NONE; n as usize + 1];
        let mut micro_type = Vec::new();
        let mut micro_root = Vec::new(); // (global root, owning mini)
        let mut type_keys: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut type_rows: Vec<Vec<u32>> = Vec::new();

        for v in 1..=n {
            node_mini[v as usize] = mini_cover.home[v as usize];
        }

        let mut selected = vec![false; n as usize + 1];
        for (mid, mini) in mini_cover.clusters.iter().enumerate() {
            for &u in &mini.nodes {
                selected[u as usize] = true;
            }
            let ext = extract(&tree, &selected, false);
            for &u in &mini.nodes {
                selected[u as usize] = false;
            }
            debug_assert!(!ext.tree.has_dummy_root());
            let mcov = build_cover(&ext.tree, l_micro);
            for mc in &mcov.clusters {
                let root_g = ext.source_of(mc.root).expect("real extraction node");
                let glob: Vec<u32> = mc
                    .nodes
                    .iter()
                    .map(|&lu| ext.source_of(lu).expect("real extraction node"))
                    .collect();
                // identify the shape: local parents in preorder plus vectors
                let k = glob.len();
                let mut key = Vec::with_capacity(1 + k + k * d);
                key.push(k as u32);
                let local_of: HashMap<u32, u32> = glob
                    .iter()
                    .enumerate()
                    .map(|(i, &g)| (g, i as u32))
                    .collect();
                for &g in &glob {
                    if g == root_g {
                        key.push(NONE);
                    } else {
                        let p = tree.parent(g).expect("non-root member");
                        key.push(local_of[&p]);
                    }
                }
                for dim in 0..d {
                    for &g in &glob {
                        key.push(weights[dim][g as usize]);
                    }
                }
                let tid = *type_keys.entry(key.clone()).or_insert_with(|| {
                    let tid = type_rows.len() as u32;
                    let mut rows = vec![0u32; k * k_total];
                    // parents precede children in preorder, so one pass fills
                    // counts from the micro root down, root excluded
                    for i in 0..k {
                        let par = key[1 + i];
                        let vid = vec_id(glob[i]);
                        for q in 0..k_total {
                            let inherited = if par == NONE {
                                0
                            } else {
                                rows[par as usize * k_total + q]
                            };
                            let own = if par == NONE {
                                0 // the micro root itself is excluded
                            } else {
                                match_row[vid * k_total + q] as u32
                            };
                            rows[i * k_total + q] = inherited + own;
                        }
                    }
                    type_rows.push(rows);
                    tid
                });
                micro_type.push(tid);
                micro_root.push((root_g, mid as u32));
            }
            // second pass: per-node micro home within this mini
            let base_gid = micro_type.len() - mcov.clusters.len();
            for &u in &mini.nodes {
                if mini_cover.home[u as usize] != mid as u32 {
                    continue;
                }
                let lu = ext.view_of(u).expect("selected node"); // its own copy
                let mh = mcov.home[lu as usize];
                let mc = &mcov.clusters[mh as usize];
                let pos = mc.nodes.binary_search(&lu).expect("member") as u32;
                node_micro[u as usize] = (base_gid + mh as usize) as u32;
                node_pos[u as usize] = pos;
            }
        }

        // prefix rows along root paths fill both cnt arrays in one sweep
        let n_minis = mini_cover.clusters.len();
        let n_micros = micro_type.len();
        let mut mini_cnt = vec![0u32; n_minis * k_total];
        let mut micro_cnt = vec![0u32; n_micros * k_total];
        let real_root = if tree.has_dummy_root() {
            None
        } else {
            Some(tree.root())
        };

        let mut minis_at: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
        for (i, cl) in mini_cover.clusters.iter().enumerate() {
            minis_at[cl.root as usize].push(i as u32);
        }
        let mut micros_at: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
        for (i, &(root_g, _)) in micro_root.iter().enumerate() {
            micros_at[root_g as usize].push(i as u32);
        }

        let root_adj: Vec<u32> = match real_root {
            Some(r) => {
                let vid = vec_id(r);
                (0..k_total)
                    .map(|q| match_row[vid * k_total + q] as u32)
                    .collect()
            }
            None => vec![0u32; k_total],
        };

        let mut cur = vec![0u32; k_total];
        let mut path: Vec<u32> = Vec::new();
        for v in 1..=n {
            let pv = tree.parent(v).unwrap_or(NONE);
            while let Some(&top) = path.last() {
                if top == pv {
                    break;
                }
                path.pop();
                let vid = vec_id(top);
                for q in 0..k_total {
                    cur[q] -= match_row[vid * k_total + q] as u32;
                }
            }
            let vid = vec_id(v);
            for q in 0..k_total {
                cur[q] += match_row[vid * k_total + q] as u32;
            }
            path.push(v);
            for &mi in &minis_at[v as usize] {
                let dst = &mut mini_cnt[mi as usize * k_total..(mi as usize + 1) * k_total];
                for q in 0..k_total {
                    dst[q] = cur[q] - root_adj[q];
                }
            }
            for &mc in &micros_at[v as usize] {
                let owner = micro_root[mc as usize].1 as usize;
                let msl = &mini_cnt[owner * k_total..(owner + 1) * k_total];
                let dst = &mut micro_cnt[mc as usize * k_total..(mc as usize + 1) * k_total];
                for q in 0..k_total {
                    // prefix(micro root) - prefix(mini root), both inclusive
                    dst[q] = cur[q] - (msl[q] + root_adj[q]);
                }
            }
        }

        Ok(CountingBase {
            tree,
            universes,
            weights,
            k_total,
            l_mini,
            l_micro,
            mini_cnt,
            micro_cnt,
            node_mini,
            node_micro,
            node_pos,
            micro_type,
            type_rows,
            mini_cover,
            real_root,
        })
    }

    pub fn l_mini(&self) -> u32 {
        self.l_mini
    }

    pub fn l_micro(&self) -> u32 {
        self.l_micro
    }

    pub fn mini_cover(&self) -> &Cover {
        &self.mini_cover
    }

    pub fn tree(&self) -> &Arc<OrdinalTree> {
        &self.tree
    }

    /// Combined dense index of an orthogonal range; None when some
    /// dimension's interval is empty after clamping.
    fn q_index(&self, sq: &[Range]) -> Option<usize> {
        debug_assert_eq!(sq.len(), self.universes.len());
        let mut q = 0usize;
        for dim in (0..sq.len()).rev() {
            let u = self.universes[dim];
            let qi = interval_index(sq[dim].0, sq[dim].1, u);
            if qi == 0 {
                return None;
            }
            q = q * k_of(u) + qi;
        }
        Some(q)
    }

    fn in_box(&self, v: NodeId, sq: &[Range]) -> bool {
        sq.iter().enumerate().all(|(dim, &(lo, hi))| {
            let w = self.weights[dim][v as usize];
            lo.max(1) <= w && w <= hi.min(self.universes[dim])
        })
    }

    /// Matching-node count on the root path of x, global root excluded;
    /// exactly three table reads.
    fn ca(&self, x: NodeId, q: usize, stats: &mut QueryStats) -> u64 {
        stats.base_lookups += 3;
        let mi = self.node_mini[x as usize] as usize;
        let mc = self.node_micro[x as usize] as usize;
        let pos = self.node_pos[x as usize] as usize;
        let tid = self.micro_type[mc] as usize;
        let d = self.type_rows[tid][pos * self.k_total + q] as u64;
        d + self.micro_cnt[mc * self.k_total + q] as u64
            + self.mini_cnt[mi * self.k_total + q] as u64
    }

    fn track_call(&self, before: u64, stats: &mut QueryStats) {
        let delta = stats.base_lookups - before;
        stats.max_base_lookups = stats.max_base_lookups.max(delta);
        if delta > 12 {
            stats.lookup_bound_violations += 1;
        }
    }

    /// Count on A_{x,top}: x up to the exclusive ancestor top (0 = through
    /// the whole real root path).
    pub fn count_half(
        &self,
        x: NodeId,
        top: NodeId,
        sq: &[Range],
        stats: &mut QueryStats,
    ) -> u64 {
        let q = match self.q_index(sq) {
            Some(q) => q,
            None => return 0,
        };
        let before = stats.base_lookups;
        let mut total = self.ca(x, q, stats);
        if top != 0 {
            total -= self.ca(top, q, stats);
        } else if let Some(r) = self.real_root {
            total += self.in_box(r, sq) as u64;
        }
        self.track_call(before, stats);
        total
    }

    /// Full path count between two nodes of the base tree.
    pub fn count_path(
        &self,
        x: NodeId,
        y: NodeId,
        sq: &[Range],
        stats: &mut QueryStats,
    ) -> Result<u64, Error> {
        if !self.tree.is_node(x) || x == 0 {
            return Err(Error::InvalidNode(x));
        }
        if !self.tree.is_node(y) || y == 0 {
            return Err(Error::InvalidNode(y));
        }
        let q = match self.q_index(sq) {
            Some(q) => q,
            None => return Ok(0),
        };
        let before = stats.base_lookups;
        let z = self.tree.lca(x, y);
        let total = if z == 0 {
            // dummy-rooted forest: the walk runs through both real roots
            self.ca(x, q, stats) + self.ca(y, q, stats)
        } else {
            self.ca(x, q, stats) + self.ca(y, q, stats) - 2 * self.ca(z, q, stats)
                + self.in_box(z, sq) as u64
        };
        self.track_call(before, stats);
        Ok(total)
    }

    pub fn heap_bytes(&self) -> usize {
        let mut total = self.tree.heap_bytes();
        for w in &self.weights {
            total += std::mem::size_of_val(&w[..]);
        }
        total += std::mem::size_of_val(&self.mini_cnt[..]);
        total += std::mem::size_of_val(&self.micro_cnt[..]);
        total += std::mem::size_of_val(&self.node_mini[..]);
        total += std::mem::size_of_val(&self.node_micro[..]);
        total += std::mem::size_of_val(&self.node_pos[..]);
        total += std::mem::size_of_val(&self.micro_type[..]);
        for r in &self.type_rows {
            total += std::mem::size_of_val(&r[..]);
        }
        for cl in &self.mini_cover.clusters {
            total += std::mem::size_of_val(&cl.nodes[..]);
        }
        total += std::mem::size_of_val(&self.mini_cover.home[..]);
        total
    }
}

impl HalfQuery<CountAgg> for CountingBase {
    fn query_half(
        &self,
        x: NodeId,
        top: NodeId,
        lq: &[Range],
        sq: &[Range],
        _agg: &CountAgg,
        stats: &mut QueryStats,
    ) -> Option<u64> {
        debug_assert!(lq.is_empty());
        let c = self.count_half(x, top, sq, stats);
        if c > 0 {
            Some(c)
        } else {
            None
        }
    }
}

pub struct CountingBaseFactory;

impl BaseFactory<CountAgg> for CountingBaseFactory {
    type Base = CountingBase;
    fn target_large(&self) -> usize {
        0
    }
    fn build(&self, data: &StageData) -> Result<CountingBase, Error> {
        CountingBase::new(
            Arc::clone(&data.tree),
            data.small.clone(),
            data.small_universe.clone(),
        )
    }
}

/// Branching factor for the wide reduction: ceil((lg n)^eps), at least 2.
pub fn wide_fanout(n: u32, eps: f64) -> u32 {
    let lg = (n.max(2) as f64).log2();
    (lg.powf(eps).ceil() as u32).max(2)
}

/// Rank-space d-dimensional path counting.
pub struct CountingIndex {
    eng: PathQueryEngine<CountAgg, CountingBase>,
    dims: usize,
    n: u32,
}

impl CountingIndex {
    pub fn build(
        wt: &WeightedTree,
        eps: f64,
        branching: Option<u32>,
        mode: ViewMode,
    ) -> Result<CountingIndex, Error> {
        let f = branching.unwrap_or_else(|| wide_fanout(wt.n(), eps)).max(2);
        let cfg = StageConfig::wide(f, mode);
        let eng = PathQueryEngine::build(wt, cfg, &CountingBaseFactory, CountAgg)?;
        Ok(CountingIndex {
            eng,
            dims: wt.dims(),
            n: wt.n(),
        })
    }

    pub fn query(
        &self,
        x: NodeId,
        y: NodeId,
        ranges: &[Range],
        stats: &mut QueryStats,
    ) -> Result<u64, Error> {
        if ranges.len() != self.dims {
            return Err(Error::VectorDimensionMismatch {
                expected: self.dims,
                got: ranges.len(),
            });
        }
        Ok(self.eng.query(x, y, ranges, &[], stats)?.unwrap_or(0))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn heap_bytes(&self) -> usize {
        self.eng.heap_bytes(&CountingBase::heap_bytes)
    }
}
