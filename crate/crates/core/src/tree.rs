//! Ordinal trees addressed by preorder rank.
//!
//! Every tree here stores its nodes as the integers `1..=n` in preorder, so
//! the node id doubles as the preorder rank. A tree may additionally carry a
//! dummy root with id 0 and depth 0; extractions of disconnected node sets
//! produce one. Because ids are preorder ranks, a subtree is the contiguous
//! id interval `[v, subtree_last(v)]`, which gives O(1) ancestor tests and an
//! O(1) lca through a single range-minimum table over the depth array:
//! for x < y with y outside x's subtree, lca(x, y) is the parent of the
//! shallowest node in `(x, y]`.

use crate::error::Error;

/// Node identifier: the preorder rank. 0 is reserved for dummy roots.
pub type NodeId = u32;

/// Sentinel for "no node".
pub const NONE: u32 = u32::MAX;

/// Static rooted ordinal tree. Construction sorts children by id, which for
/// preorder-ranked input is exactly the left-to-right sibling order.
pub struct OrdinalTree {
    n_real: u32,
    has_dummy: bool,
    parent: Vec<u32>,
    depth: Vec<u32>,
    tout: Vec<u32>, // last id in the subtree
    child_off: Vec<u32>,
    child_idx: Vec<u32>,
    by_depth_off: Vec<u32>,
    by_depth: Vec<u32>,
    rmq: DepthRmq,
}

impl OrdinalTree {
    /// Builds a tree on nodes `1..=parents.len()+1` where `parents[i]` is the
    /// parent of node `i + 2`. Parents must precede their children in
    /// preorder, i.e. `parents[i] < i + 2`.
    pub fn from_parents(parents: &[NodeId]) -> Result<OrdinalTree, Error> {
        let n = parents.len() as u32 + 1;
        let mut parent = vec![NONE; n as usize + 1];
        for (i, &p) in parents.iter().enumerate() {
            let node = i as u32 + 2;
            if p == 0 || p >= node {
                return Err(Error::CycleOrForwardParent { node, parent: p });
            }
            parent[node as usize] = p;
        }
        Self::assemble(n, false, parent)
    }

    /// Builds from a full parent array indexed by id. For a dummy-rooted tree
    /// the array covers ids `0..=n` with `parent[0] == NONE`; otherwise ids
    /// `1..=n` with `parent[1] == NONE` (slot 0 is ignored).
    pub(crate) fn assemble(
        n_real: u32,
        has_dummy: bool,
        parent: Vec<u32>,
    ) -> Result<OrdinalTree, Error> {
        let m = n_real as usize + 1; // array length; slot 0 is dummy or unused
        assert_eq!(parent.len(), m);
        let lowest = if has_dummy { 0u32 } else { 1u32 };

        let mut depth = vec![0u32; m];
        depth[lowest as usize] = if has_dummy { 0 } else { 1 };
        for v in (lowest + 1)..=n_real {
            let p = parent[v as usize];
            if p == NONE || p >= v {
                return Err(Error::CycleOrForwardParent { node: v, parent: p });
            }
            if !has_dummy && p == 0 {
                return Err(Error::CycleOrForwardParent { node: v, parent: p });
            }
            depth[v as usize] = depth[p as usize] + 1;
        }

        // One preorder sweep both verifies that ids really are preorder
        // ranks (each node's parent must sit on the rightmost path of the
        // part built so far) and closes subtree intervals as nodes leave
        // that path. parents[i] < i alone does not guarantee a preorder
        // numbering: [1,1,2] satisfies it yet splits node 2's subtree.
        let mut tout: Vec<u32> = (0..m as u32).collect();
        let mut path: Vec<u32> = vec![lowest];
        for v in (lowest + 1)..=n_real {
            let p = parent[v as usize];
            while *path.last().unwrap() != p {
                let u = path.pop().unwrap();
                tout[u as usize] = v - 1;
                if path.is_empty() {
                    return Err(Error::CycleOrForwardParent { node: v, parent: p });
                }
            }
            path.push(v);
        }
        for &u in &path {
            tout[u as usize] = n_real;
        }

        // children in id order = sibling order
        let mut child_off = vec![0u32; m + 1];
        for v in (lowest + 1)..=n_real {
            child_off[parent[v as usize] as usize + 1] += 1;
        }
        for i in 0..m {
            child_off[i + 1] += child_off[i];
        }
        let mut cursor = child_off.clone();
        let mut child_idx = vec![0u32; child_off[m] as usize];
        for v in (lowest + 1)..=n_real {
            let p = parent[v as usize] as usize;
            child_idx[cursor[p] as usize] = v;
            cursor[p] += 1;
        }

        // depth buckets, ids ascending within a depth
        let maxd = depth.iter().copied().max().unwrap_or(0) as usize;
        let mut by_depth_off = vec![0u32; maxd + 2];
        for v in lowest..=n_real {
            by_depth_off[depth[v as usize] as usize + 1] += 1;
        }
        for i in 0..=maxd {
            by_depth_off[i + 1] += by_depth_off[i];
        }
        let mut cursor = by_depth_off.clone();
        let mut by_depth = vec![0u32; by_depth_off[maxd + 1] as usize];
        for v in lowest..=n_real {
            let d = depth[v as usize] as usize;
            by_depth[cursor[d] as usize] = v;
            cursor[d] += 1;
        }

        let rmq = DepthRmq::build(&depth);
        Ok(OrdinalTree {
            n_real,
            has_dummy,
            parent,
            depth,
            tout,
            child_off,
            child_idx,
            by_depth_off,
            by_depth,
            rmq,
        })
    }

    /// Number of non-dummy nodes.
    pub fn len(&self) -> u32 {
        self.n_real
    }

    pub fn is_empty(&self) -> bool {
        self.n_real == 0
    }

    pub fn has_dummy_root(&self) -> bool {
        self.has_dummy
    }

    /// Root id: 0 for dummy-rooted trees, otherwise 1.
    pub fn root(&self) -> NodeId {
        if self.has_dummy {
            0
        } else {
            1
        }
    }

    pub fn is_node(&self, v: NodeId) -> bool {
        let lo = if self.has_dummy { 0 } else { 1 };
        v >= lo && v <= self.n_real
    }

    fn check(&self, v: NodeId) -> Result<(), Error> {
        if self.is_node(v) {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.parent[v as usize];
        if p == NONE {
            None
        } else {
            Some(p)
        }
    }

    pub fn children(&self, v: NodeId) -> &[u32] {
        let a = self.child_off[v as usize] as usize;
        let b = self.child_off[v as usize + 1] as usize;
        &self.child_idx[a..b]
    }

    /// The i-th child (1-based), per the sibling order.
    pub fn child(&self, v: NodeId, i: usize) -> Result<NodeId, Error> {
        self.check(v)?;
        let cs = self.children(v);
        if i == 0 || i > cs.len() {
            return Err(Error::ChildIndexOutOfRange { node: v, index: i });
        }
        Ok(cs[i - 1])
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.children(v).len()
    }

    /// Depth counts ancestors including the node itself; a dummy root has
    /// depth 0 and a real root depth 1.
    pub fn depth(&self, v: NodeId) -> u32 {
        self.depth[v as usize]
    }

    /// Last preorder rank inside v's subtree.
    pub fn subtree_last(&self, v: NodeId) -> NodeId {
        self.tout[v as usize]
    }

    pub fn subtree_size(&self, v: NodeId) -> u32 {
        self.tout[v as usize] - v + 1
    }

    /// True iff u is an ancestor of v or u == v.
    pub fn is_ancestor(&self, u: NodeId, v: NodeId) -> bool {
        u <= v && v <= self.tout[u as usize]
    }

    pub fn lca(&self, x: NodeId, y: NodeId) -> NodeId {
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        if y <= self.tout[x as usize] {
            return x;
        }
        // shallowest node in (x, y] is a child of the lca
        let am = self.rmq.argmin(x as usize + 1, y as usize);
        self.parent[am]
    }

    /// i-th lowest proper ancestor: level_anc(v, 1) is the parent. Among the
    /// nodes at the target depth, the predecessor of v by id is the ancestor.
    pub fn level_anc(&self, v: NodeId, i: u32) -> Option<NodeId> {
        if i == 0 {
            return Some(v);
        }
        let dv = self.depth[v as usize];
        let min_depth = if self.has_dummy { 0 } else { 1 };
        if dv < min_depth + i {
            return None;
        }
        let target = (dv - i) as usize;
        let a = self.by_depth_off[target] as usize;
        let b = self.by_depth_off[target + 1] as usize;
        let bucket = &self.by_depth[a..b];
        let k = bucket.partition_point(|&u| u < v);
        debug_assert!(k > 0);
        Some(bucket[k - 1])
    }

    /// Child of `top` on the path toward descendant `x`; `x` itself when
    /// x is a child of top. Precondition: top is a proper ancestor of x.
    pub fn step_toward(&self, top: NodeId, x: NodeId) -> NodeId {
        debug_assert!(self.is_ancestor(top, x) && top != x);
        let i = self.depth[x as usize] - self.depth[top as usize] - 1;
        if i == 0 {
            x
        } else {
            self.level_anc(x, i).expect("ancestor at known depth")
        }
    }

    /// Ids of the real nodes (the dummy root, when present, is skipped).
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.n_real
    }

    /// All ids including a dummy root.
    pub fn all_nodes(&self) -> impl Iterator<Item = NodeId> {
        (if self.has_dummy { 0 } else { 1 })..=self.n_real
    }

    /// Number of nodes on the path between x and y, both inclusive.
    pub fn path_len(&self, x: NodeId, y: NodeId) -> u32 {
        let z = self.lca(x, y);
        self.depth[x as usize] + self.depth[y as usize] - 2 * self.depth[z as usize] + 1
    }

    pub fn heap_bytes(&self) -> usize {
        4 * (self.parent.len()
            + self.depth.len()
            + self.tout.len()
            + self.child_off.len()
            + self.child_idx.len()
            + self.by_depth_off.len()
            + self.by_depth.len())
            + self.rmq.heap_bytes()
    }
}

/// Sparse table answering "position of the minimum depth in [a, b]".
/// Ties resolve to the smaller position, i.e. the earlier preorder rank.
struct DepthRmq {
    depth: Vec<u32>,
    table: Vec<u32>, // level-major argmin positions
    len: usize,
}

impl DepthRmq {
    fn build(depth: &[u32]) -> DepthRmq {
        let n = depth.len();
        let levels = if n <= 1 {
            1
        } else {
            (usize::BITS - (n - 1).leading_zeros()) as usize + 1
        };
        let mut table = vec![0u32; n * levels];
        for i in 0..n {
            table[i] = i as u32;
        }
        let mut span = 1usize;
        for l in 1..levels {
            let prev = (l - 1) * n;
            let cur = l * n;
            for i in 0..n {
                let a = table[prev + i];
                let b = if i + span < n {
                    table[prev + i + span]
                } else {
                    a
                };
                table[cur + i] = if depth[b as usize] < depth[a as usize] {
                    b
                } else {
                    a
                };
            }
            span *= 2;
        }
        DepthRmq {
            depth: depth.to_vec(),
            table,
            len: n,
        }
    }

    /// Argmin over positions [a, b], inclusive. Requires a <= b.
    fn argmin(&self, a: usize, b: usize) -> usize {
        debug_assert!(a <= b && b < self.len);
        if a == b {
            return a;
        }
        let l = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        let span = 1usize << l;
        let x = self.table[l * self.len + a];
        let y = self.table[l * self.len + b + 1 - span];
        if self.depth[y as usize] < self.depth[x as usize] {
            y as usize
        } else {
            x as usize
        }
    }

    fn heap_bytes(&self) -> usize {
        4 * (self.depth.len() + self.table.len())
    }
}
