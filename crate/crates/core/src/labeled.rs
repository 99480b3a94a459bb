//! Ordinal trees whose nodes carry a label from a small alphabet.
//!
//! Supports per-label preorder rank/select and labeled level ancestors. The
//! machinery is three arrays: a CSR of occurrence lists per label (ids
//! ascending, which is preorder), and for every node the nearest proper
//! ancestor sharing its label. Labeled ancestor queries reduce to an
//! occurrence predecessor plus one lca:
//! the alpha-ancestors of x are exactly the alpha-ancestors-or-self of
//! lca(x, p) where p is the last alpha-occurrence at or before x.

use crate::error::Error;
use crate::tree::{NodeId, OrdinalTree, NONE};
use std::sync::Arc;

pub struct LabeledTree {
    base: Arc<OrdinalTree>,
    sigma: u32,
    labels: Vec<u32>, // by id; dummy root keeps label 0
    occ_off: Vec<u32>,
    occ: Vec<u32>,
    // nearest proper ancestor with the same label, NONE at the top
    label_parent: Vec<u32>,
}

impl LabeledTree {
    /// Labels are given for real nodes 1..=n; a dummy root stays unlabeled.
    pub fn new(base: Arc<OrdinalTree>, labels: &[u32], sigma: u32) -> Result<LabeledTree, Error> {
        assert!(sigma >= 1);
        let n = base.len();
        assert_eq!(labels.len() as u32, n);
        let mut by_id = vec![0u32; n as usize + 1];
        for (i, &a) in labels.iter().enumerate() {
            if a == 0 || a > sigma {
                return Err(Error::LabelOutOfRange { label: a, sigma });
            }
            by_id[i + 1] = a;
        }

        let mut occ_off = vec![0u32; sigma as usize + 2];
        for v in 1..=n {
            occ_off[by_id[v as usize] as usize + 1] += 1;
        }
        for i in 0..=sigma as usize {
            occ_off[i + 1] += occ_off[i];
        }
        let mut cursor = occ_off.clone();
        let mut occ = vec![0u32; n as usize];
        for v in 1..=n {
            let a = by_id[v as usize] as usize;
            occ[cursor[a] as usize] = v;
            cursor[a] += 1;
        }

        // preorder walk keeping one ancestor stack per label
        let mut label_parent = vec![NONE; n as usize + 1];
        let mut stacks: Vec<Vec<u32>> = vec![Vec::new(); sigma as usize + 1];
        let mut path: Vec<u32> = Vec::new();
        for v in 1..=n {
            let p = base.parent(v);
            while let Some(&top) = path.last() {
                if p == Some(top) {
                    break;
                }
                path.pop();
                stacks[by_id[top as usize] as usize].pop();
            }
            let a = by_id[v as usize] as usize;
            if let Some(&anc) = stacks[a].last() {
                label_parent[v as usize] = anc;
            }
            path.push(v);
            stacks[a].push(v);
        }

        Ok(LabeledTree {
            base,
            sigma,
            labels: by_id,
            occ_off,
            occ,
            label_parent,
        })
    }

    pub fn base(&self) -> &Arc<OrdinalTree> {
        &self.base
    }

    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    /// 0 for the dummy root.
    pub fn label(&self, v: NodeId) -> u32 {
        self.labels[v as usize]
    }

    /// All alpha-labeled nodes, ascending by preorder rank.
    pub fn occurrences(&self, alpha: u32) -> &[u32] {
        let a = self.occ_off[alpha as usize] as usize;
        let b = self.occ_off[alpha as usize + 1] as usize;
        &self.occ[a..b]
    }

    fn check_label(&self, alpha: u32) -> Result<(), Error> {
        if alpha == 0 || alpha > self.sigma {
            return Err(Error::LabelOutOfRange {
                label: alpha,
                sigma: self.sigma,
            });
        }
        Ok(())
    }

    fn check_node(&self, v: NodeId) -> Result<(), Error> {
        if self.base.is_node(v) && v != 0 {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    /// Number of alpha-labeled nodes with preorder rank strictly below x.
    pub fn pre_rank_label(&self, x: NodeId, alpha: u32) -> Result<u32, Error> {
        self.check_node(x)?;
        self.check_label(alpha)?;
        Ok(self.occurrences(alpha).partition_point(|&v| v < x) as u32)
    }

    /// The i-th alpha-labeled node in preorder, 1-based.
    pub fn pre_select_label(&self, i: u32, alpha: u32) -> Result<Option<NodeId>, Error> {
        self.check_label(alpha)?;
        if i == 0 {
            return Ok(None);
        }
        Ok(self.occurrences(alpha).get(i as usize - 1).copied())
    }

    /// The i-th lowest alpha-labeled ancestor of x, counting x itself as the
    /// first candidate when its label is alpha.
    pub fn level_anc_label(&self, x: NodeId, alpha: u32, i: u32) -> Result<Option<NodeId>, Error> {
        self.check_node(x)?;
        self.check_label(alpha)?;
        assert!(i >= 1);
        let mut cur = match self.lowest_anc_label(x, alpha) {
            Some(a) => a,
            None => return Ok(None),
        };
        for _ in 1..i {
            cur = self.label_parent[cur as usize];
            if cur == NONE {
                return Ok(None);
            }
        }
        Ok(Some(cur))
    }

    /// Lowest alpha-labeled ancestor-or-self of x.
    pub fn lowest_anc_label(&self, x: NodeId, alpha: u32) -> Option<NodeId> {
        if self.labels[x as usize] == alpha {
            return Some(x);
        }
        let occ = self.occurrences(alpha);
        let k = occ.partition_point(|&v| v <= x);
        if k == 0 {
            return None;
        }
        let p = occ[k - 1];
        let chi = self.base.lca(x, p);
        if self.labels[chi as usize] == alpha {
            return Some(chi);
        }
        // first occurrence inside chi's subtree sits below chi on c's root
        // path with nothing alpha-labeled in between
        let j = occ.partition_point(|&v| v <= chi);
        let c = occ[j];
        debug_assert!(self.base.is_ancestor(chi, c));
        let a = self.label_parent[c as usize];
        if a == NONE {
            None
        } else {
            debug_assert!(self.base.is_ancestor(a, chi));
            Some(a)
        }
    }
}
