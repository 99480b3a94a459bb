//! Brute-force referee for every query family.
//!
//! Nothing in here touches the production structures: paths are found by
//! walking parent pointers, and each query is a linear scan applying the
//! query definition verbatim. Slow on purpose; every equivalence test in the
//! workspace compares against this module.

use crate::error::Error;

pub struct OracleTree {
    parent: Vec<u32>, // parent[1] == 0 means none; index 0 unused
    weights: Vec<Vec<i64>>,
    dims: usize,
}

impl OracleTree {
    /// `parents[i]` is the parent of node i+2, as in tree construction.
    /// `weights[v-1]` is the weight vector of node v.
    pub fn new(parents: &[u32], weights: &[Vec<i64>]) -> Result<OracleTree, Error> {
        let n = parents.len() + 1;
        if weights.len() != n {
            return Err(Error::VectorDimensionMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        let dims = weights.first().map_or(0, |w| w.len());
        for w in weights {
            if w.len() != dims {
                return Err(Error::VectorDimensionMismatch {
                    expected: dims,
                    got: w.len(),
                });
            }
        }
        let mut parent = vec![0u32; n + 1];
        for (i, &p) in parents.iter().enumerate() {
            let node = i as u32 + 2;
            if p == 0 || p >= node {
                return Err(Error::CycleOrForwardParent { node, parent: p });
            }
            parent[node as usize] = p;
        }
        let mut ws = vec![Vec::new()];
        ws.extend(weights.iter().cloned());
        Ok(OracleTree {
            parent,
            weights: ws,
            dims,
        })
    }

    pub fn len(&self) -> u32 {
        self.parent.len() as u32 - 1
    }

    pub fn is_empty(&self) -> bool {
        false // always has at least the root
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weight(&self, v: u32, dim: usize) -> i64 {
        self.weights[v as usize][dim]
    }

    fn check(&self, v: u32) -> Result<(), Error> {
        if v >= 1 && v <= self.len() {
            Ok(())
        } else {
            Err(Error::InvalidNode(v))
        }
    }

    fn depth(&self, mut v: u32) -> u32 {
        let mut d = 1;
        while self.parent[v as usize] != 0 {
            v = self.parent[v as usize];
            d += 1;
        }
        d
    }

    /// Nodes from x up through the lca and down to y, in that order.
    pub fn path(&self, x: u32, y: u32) -> Result<Vec<u32>, Error> {
        self.check(x)?;
        self.check(y)?;
        let (mut a, mut b) = (x, y);
        let mut da = self.depth(a);
        let mut db = self.depth(b);
        let mut up = vec![];
        let mut down = vec![];
        while da > db {
            up.push(a);
            a = self.parent[a as usize];
            da -= 1;
        }
        while db > da {
            down.push(b);
            b = self.parent[b as usize];
            db -= 1;
        }
        while a != b {
            up.push(a);
            down.push(b);
            a = self.parent[a as usize];
            b = self.parent[b as usize];
        }
        up.push(a);
        down.reverse();
        up.extend(down);
        Ok(up)
    }

    /// x and all its ancestors up to the root.
    pub fn ancestors(&self, x: u32) -> Result<Vec<u32>, Error> {
        self.check(x)?;
        let mut out = vec![x];
        let mut v = x;
        while self.parent[v as usize] != 0 {
            v = self.parent[v as usize];
            out.push(v);
        }
        Ok(out)
    }

    fn in_box(&self, v: u32, query: &[(i64, i64)]) -> bool {
        query
            .iter()
            .enumerate()
            .all(|(i, &(lo, hi))| (lo..=hi).contains(&self.weights[v as usize][i]))
    }

    pub fn count(&self, x: u32, y: u32, query: &[(i64, i64)]) -> Result<u64, Error> {
        Ok(self
            .path(x, y)?
            .into_iter()
            .filter(|&v| self.in_box(v, query))
            .count() as u64)
    }

    /// Matching nodes in ascending preorder rank.
    pub fn report(&self, x: u32, y: u32, query: &[(i64, i64)]) -> Result<Vec<u32>, Error> {
        let mut out: Vec<u32> = self
            .path(x, y)?
            .into_iter()
            .filter(|&v| self.in_box(v, query))
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Minimum first weight ≥ q1 among path nodes whose remaining
    /// coordinates fall in `rest`; equal weights resolve to the smaller rank.
    pub fn successor(
        &self,
        x: u32,
        y: u32,
        q1: i64,
        rest: &[(i64, i64)],
    ) -> Result<Option<u32>, Error> {
        let mut best: Option<(i64, u32)> = None;
        for v in self.path(x, y)? {
            let w1 = self.weights[v as usize][0];
            if w1 < q1 {
                continue;
            }
            let ok = rest
                .iter()
                .enumerate()
                .all(|(i, &(lo, hi))| (lo..=hi).contains(&self.weights[v as usize][i + 1]));
            if !ok {
                continue;
            }
            let cand = (w1, v);
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
        Ok(best.map(|(_, v)| v))
    }

    /// Ancestors of x (x included) whose vector dominates q coordinate-wise,
    /// ascending by rank.
    pub fn dominance(&self, x: u32, q: &[i64]) -> Result<Vec<u32>, Error> {
        let mut out: Vec<u32> = self
            .ancestors(x)?
            .into_iter()
            .filter(|&v| {
                q.iter()
                    .enumerate()
                    .all(|(i, &qi)| self.weights[v as usize][i] >= qi)
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }
}
