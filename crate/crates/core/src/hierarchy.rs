//! Layered range decomposition over one weight dimension.
//!
//! Conceptually a range tree on the weight universe [1,n] with branching
//! factor f: the root range [1,n] splits into f child ranges, recursively,
//! until singletons. Every level l below the last is materialized as one
//! auxiliary tree T_l holding a copy of every source node, laid out so the
//! copies whose weights fall in one range occupy a contiguous id block; the
//! block for a range [a,b] is exactly [a,b] because weights are a
//! permutation. Each copy carries as label the child subscript its weight
//! falls into one level down, which is what lets a query descend: the copy
//! of x in a child range's extraction is the label-j ancestor view of x's
//! copy at the current level.
//!
//! Levels at multiples of ceil(lg lg n) are marked: views there are located
//! directly through predecessor search over a block's source ids plus one
//! lca in the source tree. Other levels ascend to the nearest anchor and
//! re-descend, bounding the walk by the marking stride.

use crate::error::Error;
use crate::labeled::LabeledTree;
use crate::stats::QueryStats;
use crate::tree::{NodeId, OrdinalTree, NONE};
use std::sync::Arc;

/// i-th child range of [a,b] under branching f, 1-based; may come out
/// empty (a_i > b_i) when the range is smaller than f.
pub fn child_range(a: u32, b: u32, f: u32, i: u32) -> (u32, u32) {
    let s = (b - a + 1) as u64;
    let lo = ((i as u64 - 1) * s).div_ceil(f as u64) as u32 + a;
    let hi = ((i as u64 * s).div_ceil(f as u64)) as u32 + a - 1;
    (lo, hi)
}

/// Which child range of [a,b] the value j falls in. Derived so that
/// child_of(j) = i iff j lies in child_range(i); singleton ranges keep
/// everything in child 1.
pub fn child_of(j: u32, a: u32, b: u32, f: u32) -> u32 {
    debug_assert!(a <= j && j <= b);
    let s = (b - a + 1) as u64;
    if s == 1 {
        return 1;
    }
    (f as u64 * (j - a) as u64 / s) as u32 + 1
}

/// Levels in the range tree over [1,n]: h = ceil(log_f n) + 1, so level h
/// holds only singletons.
pub fn level_count(n: u32, f: u32) -> u32 {
    let mut t = 0u32;
    let mut p = 1u64;
    while p < n as u64 {
        p *= f as u64;
        t += 1;
    }
    t + 1
}

/// How views are located on marked levels: from a dedicated copy of the
/// per-block source arrays, or by searching the level's source array in
/// place through the block offsets.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ViewMode {
    Explicit,
    IndexOnly,
}

struct Level {
    tree: LabeledTree,
    source: Vec<u32>, // new id -> source node; [0] = NONE
    copy: Vec<u32>,   // source node -> new id; [0] = NONE
    marked: bool,
    explicit_occ: Option<Vec<u32>>, // Explicit mode: block-ordered source ids, slot 0 unused
}

pub struct RangeHierarchy {
    base: Arc<OrdinalTree>,
    n: u32,
    f: u32,
    h: u32,
    stride: u32,
    weights: Vec<u32>, // by node; slot 0 = 0
    owner: Vec<u32>,   // weight -> node
    levels: Vec<Level>,
    mode: ViewMode,
}

impl RangeHierarchy {
    /// `weights[v-1]` is the (rank-space) weight of node v; must be a
    /// permutation of 1..=n. f ≥ 2.
    pub fn build(
        base: &Arc<OrdinalTree>,
        weights: &[u32],
        f: u32,
        mode: ViewMode,
    ) -> Result<RangeHierarchy, Error> {
        assert!(f >= 2);
        let n = base.len();
        assert!(n >= 1);
        assert_eq!(weights.len() as u32, n);

        let mut w = vec![0u32; n as usize + 1];
        let mut owner = vec![0u32; n as usize + 1];
        for v in 1..=n {
            let wv = weights[v as usize - 1];
            if wv == 0 || wv > n {
                return Err(Error::WeightOutOfRankSpace {
                    weight: wv,
                    dim: 0,
                    n,
                });
            }
            if owner[wv as usize] != 0 {
                return Err(Error::DuplicateWeight {
                    weight: wv,
                    dim: 0,
                });
            }
            owner[wv as usize] = v;
            w[v as usize] = wv;
        }

        let h = level_count(n, f);
        let built = (h - 1).max(1);
        let stride = marking_stride(n);

        // current range of each node's weight, advanced level by level
        let mut lo = vec![1u32; n as usize + 1];
        let mut hi = vec![n; n as usize + 1];
        let mut levels = Vec::with_capacity(built as usize);
        let mut block_next = vec![0u32; n as usize + 2];
        let mut anc_stacks: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 2];

        for l in 1..=built {
            let mut source = vec![NONE; n as usize + 1];
            let mut copy = vec![NONE; n as usize + 1];
            let mut parent = vec![NONE; n as usize + 1];
            let mut labels = vec![0u32; n as usize];

            // per-block preorder sweep: the stack of kept ancestors within
            // v's own block gives the T_l parent, and ids fill each block
            // [a,b] in source order
            for v in 1..=n {
                block_next[lo[v as usize] as usize] = 0;
            }
            let mut path: Vec<u32> = Vec::new();
            for v in 1..=n {
                let pv = base.parent(v).unwrap_or(NONE);
                while let Some(&top) = path.last() {
                    if top == pv {
                        break;
                    }
                    path.pop();
                    anc_stacks[lo[top as usize] as usize].pop();
                }
                let a = lo[v as usize];
                let b = hi[v as usize];
                let id = a + block_next[a as usize];
                block_next[a as usize] += 1;
                copy[v as usize] = id;
                source[id as usize] = v;
                parent[id as usize] = match anc_stacks[a as usize].last() {
                    Some(&anc) => copy[anc as usize],
                    None => 0,
                };
                labels[id as usize - 1] = child_of(w[v as usize], a, b, f);
                path.push(v);
                anc_stacks[a as usize].push(v);
            }
            for v in 1..=n {
                anc_stacks[lo[v as usize] as usize].clear();
            }

            let tree = OrdinalTree::assemble(n, true, parent)
                .expect("block-major layout is a preorder");
            let tree = LabeledTree::new(Arc::new(tree), &labels, f)?;

            let marked = l % stride == 0;
            let explicit_occ = if marked && mode == ViewMode::Explicit {
                let mut occ = vec![0u32; n as usize + 1];
                occ[1..].copy_from_slice(&source[1..]);
                Some(occ)
            } else {
                None
            };
            levels.push(Level {
                tree,
                source,
                copy,
                marked,
                explicit_occ,
            });

            // advance every weight into its child range
            if l < built {
                for v in 1..=n {
                    let (a, b) = (lo[v as usize], hi[v as usize]);
                    let i = child_of(w[v as usize], a, b, f);
                    let (na, nb) = child_range(a, b, f, i);
                    lo[v as usize] = na;
                    hi[v as usize] = nb;
                }
            }
        }

        Ok(RangeHierarchy {
            base: Arc::clone(base),
            n,
            f,
            h,
            stride,
            weights: w,
            owner,
            levels,
            mode,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    /// Total level count including the singleton leaf level.
    pub fn h(&self) -> u32 {
        self.h
    }

    /// Number of levels with materialized trees.
    pub fn built_levels(&self) -> u32 {
        self.levels.len() as u32
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn is_marked(&self, l: u32) -> bool {
        self.levels[l as usize - 1].marked
    }

    pub fn weight(&self, v: NodeId) -> u32 {
        self.weights[v as usize]
    }

    /// The node carrying weight wv.
    pub fn owner(&self, wv: u32) -> NodeId {
        self.owner[wv as usize]
    }

    pub fn level_tree(&self, l: u32) -> &LabeledTree {
        &self.levels[l as usize - 1].tree
    }

    pub fn source_of(&self, l: u32, x_l: NodeId) -> Result<NodeId, Error> {
        let s = self.levels[l as usize - 1].source[x_l as usize];
        if s == NONE {
            Err(Error::DummyNode)
        } else {
            Ok(s)
        }
    }

    pub fn copy_of(&self, l: u32, v: NodeId) -> NodeId {
        self.levels[l as usize - 1].copy[v as usize]
    }

    /// Range containing weight wv at level l.
    pub fn range_of(&self, l: u32, wv: u32) -> (u32, u32) {
        let (mut a, mut b) = (1u32, self.n);
        for _ in 1..l {
            let i = child_of(wv, a, b, self.f);
            let (na, nb) = child_range(a, b, self.f, i);
            a = na;
            b = nb;
        }
        (a, b)
    }

    /// The T_{l+1} copy of the lowest ancestor-or-self of x_l's source whose
    /// weight falls in child range j; NoSuchView when no ancestor on the
    /// path has one.
    pub fn descend(&self, l: u32, x_l: NodeId, j: u32) -> Result<NodeId, Error> {
        debug_assert!(l + 1 <= self.built_levels());
        let lt = self.level_tree(l);
        match lt.lowest_anc_label(x_l, j) {
            Some(a) => {
                let src = self.source_of(l, a)?;
                Ok(self.copy_of(l + 1, src))
            }
            None => Err(Error::NoSuchView(l)),
        }
    }

    /// The T_l copy of the lowest ancestor-or-self of x whose weight lies in
    /// the level-l range containing wv.
    pub fn view_at(&self, l: u32, wv: u32, x: NodeId, stats: &mut QueryStats) -> Option<NodeId> {
        debug_assert!(l >= 1 && l <= self.built_levels());
        if l == 1 {
            return Some(self.copy_of(1, x));
        }
        if self.is_marked(l) {
            return self.view_marked(l, wv, x, stats);
        }
        // nearest anchor at or above: a marked level or level 1
        let mut m = l - 1;
        while m > 1 && !self.is_marked(m) {
            m -= 1;
        }
        let mut cur = self.view_at(m, wv, x, stats)?;
        for step in m..l {
            let (a, b) = self.range_of(step, wv);
            let j = child_of(wv, a, b, self.f);
            cur = self.descend(step, cur, j).ok()?;
        }
        Some(cur)
    }

    fn view_marked(&self, l: u32, wv: u32, x: NodeId, stats: &mut QueryStats) -> Option<NodeId> {
        let (a, b) = self.range_of(l, wv);
        let lev = &self.levels[l as usize - 1];
        let occ: &[u32] = match (&lev.explicit_occ, self.mode) {
            (Some(e), ViewMode::Explicit) => &e[a as usize..=b as usize],
            _ => &lev.source[a as usize..=b as usize],
        };

        stats.pred_accesses += 1;
        let k = occ.partition_point(|&v| v <= x);
        if k == 0 {
            return None;
        }
        let p = occ[k - 1];
        let chi = self.base.lca(x, p);
        let wc = self.weights[chi as usize];
        if a <= wc && wc <= b {
            return Some(lev.copy[chi as usize]);
        }
        // the first block occurrence below chi hangs, in T_l, right under
        // the copy of chi's lowest in-range ancestor
        stats.pred_accesses += 1;
        let j = occ.partition_point(|&v| v <= chi);
        debug_assert!(j < occ.len());
        let c = occ[j];
        let pc = lev.tree.base().parent(lev.copy[c as usize])?;
        if pc == 0 {
            None
        } else {
            Some(pc)
        }
    }

    pub fn heap_bytes(&self) -> usize {
        let mut total =
            std::mem::size_of_val(&self.weights[..]) + std::mem::size_of_val(&self.owner[..]);
        for lev in &self.levels {
            total += lev.tree.base().heap_bytes();
            total += std::mem::size_of_val(&lev.source[..]);
            total += std::mem::size_of_val(&lev.copy[..]);
            if let Some(e) = &lev.explicit_occ {
                total += std::mem::size_of_val(&e[..]);
            }
        }
        total
    }
}

pub fn marking_stride(n: u32) -> u32 {
    let lg = 32 - (n.max(1) - 1).leading_zeros(); // ceil(lg n)
    let lglg = if lg <= 1 {
        0
    } else {
        32 - (lg - 1).leading_zeros()
    };
    lglg.max(1)
}
