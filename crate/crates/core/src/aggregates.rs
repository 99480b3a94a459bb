//! Path extremum queries through heavy-path decomposition, and threshold
//! ancestor search on monotone trees.

use crate::error::Error;
use crate::tree::{NodeId, OrdinalTree, NONE};
use std::sync::Arc;

/// Sparse argmin table over packed u64 keys; position of a key's node id is
/// recovered by the caller. Ties go to the smaller position because earlier
/// positions win strict comparison.
struct ArgTable {
    keys: Vec<u64>,
    table: Vec<u32>,
    len: usize,
}

impl ArgTable {
    fn build(keys: Vec<u64>) -> ArgTable {
        let n = keys.len();
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
            let (prev, cur) = ((l - 1) * n, l * n);
            for i in 0..n {
                let a = table[prev + i];
                let b = if i + span < n { table[prev + i + span] } else { a };
                table[cur + i] = if keys[b as usize] < keys[a as usize] { b } else { a };
            }
            span *= 2;
        }
        ArgTable { keys, table, len: n }
    }

    fn argmin(&self, a: usize, b: usize) -> usize {
        debug_assert!(a <= b && b < self.len);
        if a == b {
            return a;
        }
        let l = (usize::BITS - 1 - (b - a + 1).leading_zeros()) as usize;
        let span = 1usize << l;
        let x = self.table[l * self.len + a];
        let y = self.table[l * self.len + b + 1 - span];
        if self.keys[y as usize] < self.keys[x as usize] {
            y as usize
        } else {
            x as usize
        }
    }

    fn heap_bytes(&self) -> usize {
        std::mem::size_of_val(&self.keys[..]) + std::mem::size_of_val(&self.table[..])
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Extremum {
    Min,
    Max,
}

/// Heavy-path decomposition plus two sparse tables answering "which node on
/// the path between x and y has minimal (maximal) weight", ties broken by
/// the smallest node id. Works on dummy-rooted trees; the dummy weighs 0 and
/// is never reported by max queries unless the path is a lone dummy.
pub struct PathExtremumIndex {
    tree: Arc<OrdinalTree>,
    pos: Vec<u32>,  // node -> position in chain-contiguous order
    at: Vec<u32>,   // position -> node
    head: Vec<u32>, // node -> top of its chain
    min_tab: ArgTable,
    max_tab: ArgTable,
}

impl PathExtremumIndex {
    /// `w[v]` is node v's weight (slot 0 covers a dummy root).
    pub fn new(tree: &Arc<OrdinalTree>, w: &[u32]) -> PathExtremumIndex {
        let n = tree.len();
        assert_eq!(w.len() as u32, n + 1);
        let root = tree.root();

        // heavy child = largest subtree, ties to the smaller id
        let mut heavy = vec![NONE; n as usize + 1];
        for v in tree.all_nodes() {
            let mut best = NONE;
            let mut bs = 0;
            for &c in tree.children(v) {
                let s = tree.subtree_size(c);
                if s > bs {
                    bs = s;
                    best = c;
                }
            }
            heavy[v as usize] = best;
        }

        let mut pos = vec![NONE; n as usize + 1];
        let mut at = vec![0u32; (n + if tree.has_dummy_root() { 1 } else { 0 }) as usize];
        let mut head = vec![NONE; n as usize + 1];
        let mut next = 0u32;
        // walk chains from each chain head, heads discovered in id order
        let mut stack = vec![root];
        while let Some(h) = stack.pop() {
            let mut v = h;
            loop {
                head[v as usize] = h;
                pos[v as usize] = next;
                at[next as usize] = v;
                next += 1;
                for &c in tree.children(v) {
                    if c != heavy[v as usize] {
                        stack.push(c);
                    }
                }
                if heavy[v as usize] == NONE {
                    break;
                }
                v = heavy[v as usize];
            }
        }

        let mut min_keys = vec![0u64; at.len()];
        let mut max_keys = vec![0u64; at.len()];
        for (p, &v) in at.iter().enumerate() {
            let wv = w[v as usize] as u64;
            min_keys[p] = (wv << 32) | v as u64;
            max_keys[p] = ((!w[v as usize]) as u64) << 32 | v as u64;
        }
        PathExtremumIndex {
            tree: Arc::clone(tree),
            pos,
            at,
            head,
            min_tab: ArgTable::build(min_keys),
            max_tab: ArgTable::build(max_keys),
        }
    }

    /// Extremal node on the path from x to y, both inclusive.
    pub fn path_extremum(&self, x: NodeId, y: NodeId, which: Extremum) -> Result<NodeId, Error> {
        if !self.tree.is_node(x) {
            return Err(Error::InvalidNode(x));
        }
        if !self.tree.is_node(y) {
            return Err(Error::InvalidNode(y));
        }
        let tab = match which {
            Extremum::Min => &self.min_tab,
            Extremum::Max => &self.max_tab,
        };
        let (mut a, mut b) = (x, y);
        let mut best: Option<usize> = None;
        let seen = |best: &mut Option<usize>, p: usize| {
            *best = Some(match *best {
                None => p,
                Some(q) if tab.keys[p] < tab.keys[q] => p,
                Some(q) => q,
            });
        };
        while self.head[a as usize] != self.head[b as usize] {
            let (ha, hb) = (self.head[a as usize], self.head[b as usize]);
            // descend from the deeper chain head
            if self.tree.depth(ha) >= self.tree.depth(hb) {
                let p = tab.argmin(self.pos[ha as usize] as usize, self.pos[a as usize] as usize);
                seen(&mut best, p);
                a = self.tree.parent(ha).expect("chain head below the root");
            } else {
                let p = tab.argmin(self.pos[hb as usize] as usize, self.pos[b as usize] as usize);
                seen(&mut best, p);
                b = self.tree.parent(hb).expect("chain head below the root");
            }
        }
        let (pa, pb) = (self.pos[a as usize], self.pos[b as usize]);
        let (lo, hi) = if pa <= pb { (pa, pb) } else { (pb, pa) };
        seen(&mut best, tab.argmin(lo as usize, hi as usize));
        Ok(self.at[best.expect("nonempty path")] as u32)
    }

    /// Extremum over the ancestor path from x up to, but excluding, `top`.
    /// `top == NONE` means the whole root path; returns None when the
    /// stretch is empty (x == top).
    pub fn anc_extremum(&self, x: NodeId, top: NodeId, which: Extremum) -> Option<NodeId> {
        let upper = if top == NONE {
            self.tree.root()
        } else {
            if x == top {
                return None;
            }
            debug_assert!(self.tree.is_ancestor(top, x));
            self.tree.step_toward(top, x)
        };
        Some(
            self.path_extremum(x, upper, which)
                .expect("validated endpoints"),
        )
    }

    /// The weight this index was built with, recovered from the key table.
    pub fn weight(&self, v: NodeId) -> u32 {
        (self.min_tab.keys[self.pos[v as usize] as usize] >> 32) as u32
    }

    pub fn heap_bytes(&self) -> usize {
        std::mem::size_of_val(&self.pos[..])
            + std::mem::size_of_val(&self.at[..])
            + std::mem::size_of_val(&self.head[..])
            + self.min_tab.heap_bytes()
            + self.max_tab.heap_bytes()
    }
}

/// Threshold ancestor search on trees whose weights strictly decrease
/// toward the root: the highest ancestor still weighing at least the
/// threshold, found by binary search over ancestor distance.
pub struct WeightedAncestorIndex {
    tree: Arc<OrdinalTree>,
    w: Vec<u32>,
}

impl WeightedAncestorIndex {
    pub fn new(tree: &Arc<OrdinalTree>, w: Vec<u32>) -> Result<WeightedAncestorIndex, Error> {
        assert_eq!(w.len() as u32, tree.len() + 1);
        for v in tree.nodes() {
            if let Some(p) = tree.parent(v) {
                if p != 0 && w[p as usize] >= w[v as usize] {
                    return Err(Error::MonotonicityViolation { child: v, parent: p });
                }
            }
        }
        Ok(WeightedAncestorIndex {
            tree: Arc::clone(tree),
            w,
        })
    }

    /// Highest ancestor-or-self of x with weight ≥ kappa.
    pub fn query(&self, x: NodeId, kappa: u32) -> Option<NodeId> {
        if self.w[x as usize] < kappa {
            return None;
        }
        // distance depth(x)-1 reaches the deepest non-dummy top in both
        // rooting styles; weights decrease upward, so feasible distances
        // form a prefix of 0..=maxi
        let maxi = self.tree.depth(x) - 1;
        let (mut lo, mut hi) = (0u32, maxi);
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            let anc = self.tree.level_anc(x, mid).expect("within depth");
            if self.w[anc as usize] >= kappa {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        self.tree.level_anc(x, lo)
    }

    pub fn heap_bytes(&self) -> usize {
        std::mem::size_of_val(&self.w[..])
    }
}
