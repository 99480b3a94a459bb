//! Tree extraction: keep a subset of nodes, splice removed nodes' children
//! into their place, and renumber survivors in preorder.
//!
//! Extraction preserves ancestor-descendant relations and sibling order, so
//! the new ids are exactly the old preorder restricted to the kept set. When
//! the survivors form a forest, a dummy root with id 0 glues it together.

use crate::tree::{NodeId, OrdinalTree, NONE};
use std::sync::Arc;

pub struct Extraction {
    pub tree: Arc<OrdinalTree>,
    /// New id to source node; slot 0 is NONE (the dummy owns no source).
    pub source: Vec<u32>,
    /// Source-tree id to the new id of its lowest kept ancestor-or-self,
    /// NONE where no kept ancestor exists.
    pub view: Vec<u32>,
}

impl Extraction {
    pub fn source_of(&self, x: NodeId) -> Option<NodeId> {
        let s = self.source[x as usize];
        if s == NONE {
            None
        } else {
            Some(s)
        }
    }

    pub fn view_of(&self, v: NodeId) -> Option<NodeId> {
        let w = self.view[v as usize];
        if w == NONE {
            None
        } else {
            Some(w)
        }
    }

    pub fn heap_bytes(&self) -> usize {
        self.tree.heap_bytes()
            + std::mem::size_of_val(&self.source[..])
            + std::mem::size_of_val(&self.view[..])
    }
}

/// Extracts the nodes marked in `selected` (indexed by source id). With
/// `force_dummy` the result is dummy-rooted even when it is a single tree;
/// an empty selection always yields the bare dummy.
pub fn extract(base: &OrdinalTree, selected: &[bool], force_dummy: bool) -> Extraction {
    let n = base.len();
    assert_eq!(selected.len(), n as usize + 1);

    let kept = (1..=n).filter(|&v| selected[v as usize]).count() as u32;
    let mut source = vec![NONE; kept as usize + 1];
    let mut view = vec![NONE; n as usize + 1];
    let mut new_parent = vec![NONE; kept as usize + 1];
    let mut roots = 0u32;

    // (source id, lowest kept ancestor-or-self as a new id)
    let mut path: Vec<(u32, u32)> = Vec::new();
    let mut next = 0u32;
    for v in 1..=n {
        let pv = match base.parent(v) {
            Some(p) => p,
            None => NONE,
        };
        while let Some(&(top, _)) = path.last() {
            if top == pv {
                break;
            }
            path.pop();
        }
        let above = path.last().map_or(NONE, |&(_, w)| w);
        let here = if selected[v as usize] {
            next += 1;
            source[next as usize] = v;
            new_parent[next as usize] = above;
            if above == NONE {
                roots += 1;
            }
            next
        } else {
            above
        };
        view[v as usize] = here;
        path.push((v, here));
    }

    let has_dummy = force_dummy || roots != 1;
    if has_dummy {
        for p in new_parent.iter_mut().skip(1) {
            if *p == NONE {
                *p = 0;
            }
        }
    }
    let tree = OrdinalTree::assemble(kept, has_dummy, new_parent)
        .expect("extraction preserves preorder");
    Extraction {
        tree: Arc::new(tree),
        source,
        view,
    }
}
