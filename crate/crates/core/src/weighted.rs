//! Trees with d-dimensional weight vectors in rank space, raw-coordinate
//! reduction, and deterministic test-corpus generators.
//!
//! All query structures take rank-space input: every dimension is a
//! permutation of 1..=n. Raw coordinates go through rank_space_reduce first,
//! which also returns per-dimension maps for snapping raw query ranges.

use crate::error::Error;
use crate::tree::{NodeId, OrdinalTree};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

pub struct WeightedTree {
    tree: Arc<OrdinalTree>,
    // dim-major; weights[dim][v-1] is node v's coordinate
    weights: Vec<Vec<u32>>,
    dims: usize,
}

impl WeightedTree {
    /// `rows[v-1]` is node v's weight vector; every dimension must be a
    /// permutation of 1..=n.
    pub fn new(tree: Arc<OrdinalTree>, rows: &[Vec<u32>]) -> Result<WeightedTree, Error> {
        assert!(!tree.has_dummy_root());
        let n = tree.len();
        if rows.len() as u32 != n {
            return Err(Error::VectorDimensionMismatch {
                expected: n as usize,
                got: rows.len(),
            });
        }
        let dims = rows.first().map_or(0, |r| r.len());
        assert!(dims >= 1);
        let mut weights = vec![vec![0u32; n as usize]; dims];
        let mut seen = vec![false; n as usize + 1];
        for dim in 0..dims {
            seen.iter_mut().for_each(|s| *s = false);
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dims {
                    return Err(Error::VectorDimensionMismatch {
                        expected: dims,
                        got: row.len(),
                    });
                }
                let w = row[dim];
                if w == 0 || w > n {
                    return Err(Error::WeightOutOfRankSpace { weight: w, dim, n });
                }
                if seen[w as usize] {
                    return Err(Error::DuplicateWeight { weight: w, dim });
                }
                seen[w as usize] = true;
                weights[dim][i] = w;
            }
        }
        Ok(WeightedTree {
            tree,
            weights,
            dims,
        })
    }

    pub fn tree(&self) -> &Arc<OrdinalTree> {
        &self.tree
    }

    pub fn n(&self) -> u32 {
        self.tree.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn weight(&self, v: NodeId, dim: usize) -> u32 {
        self.weights[dim][v as usize - 1]
    }

    /// Dimension as a slice indexed by v-1, ready for hierarchy building.
    pub fn dim_weights(&self, dim: usize) -> &[u32] {
        &self.weights[dim]
    }

    pub fn vector(&self, v: NodeId) -> Vec<u32> {
        (0..self.dims).map(|d| self.weight(v, d)).collect()
    }
}

/// Order-preserving map from one raw coordinate axis to rank space.
pub struct DimMap {
    sorted: Vec<i64>,
}

impl DimMap {
    /// Smallest rank whose raw value is ≥ q; n+1 when none is.
    pub fn rank_at_least(&self, q: i64) -> u32 {
        self.sorted.partition_point(|&v| v < q) as u32 + 1
    }

    /// Rank interval covering exactly the raw values in [lo, hi]; empty
    /// (start > end) when no value falls inside.
    pub fn rank_range(&self, lo: i64, hi: i64) -> (u32, u32) {
        let a = self.sorted.partition_point(|&v| v < lo) as u32 + 1;
        let b = self.sorted.partition_point(|&v| v <= hi) as u32;
        (a, b)
    }

    pub fn raw_of_rank(&self, r: u32) -> i64 {
        self.sorted[r as usize - 1]
    }
}

/// Coordinate compression, stable with ties resolved by preorder rank.
pub fn rank_space_reduce(
    tree: &Arc<OrdinalTree>,
    raw: &[Vec<i64>],
) -> Result<(WeightedTree, Vec<DimMap>), Error> {
    let n = tree.len() as usize;
    if raw.len() != n {
        return Err(Error::VectorDimensionMismatch {
            expected: n,
            got: raw.len(),
        });
    }
    let dims = raw.first().map_or(0, |r| r.len());
    for row in raw {
        if row.len() != dims {
            return Err(Error::VectorDimensionMismatch {
                expected: dims,
                got: row.len(),
            });
        }
    }
    let mut rows = vec![vec![0u32; dims]; n];
    let mut maps = Vec::with_capacity(dims);
    for dim in 0..dims {
        let mut pairs: Vec<(i64, u32)> = (0..n).map(|i| (raw[i][dim], i as u32 + 1)).collect();
        pairs.sort_unstable();
        for (rank0, &(_, v)) in pairs.iter().enumerate() {
            rows[v as usize - 1][dim] = rank0 as u32 + 1;
        }
        maps.push(DimMap {
            sorted: pairs.into_iter().map(|(w, _)| w).collect(),
        });
    }
    Ok((WeightedTree::new(Arc::clone(tree), &rows)?, maps))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Shape {
    Random,
    Path,
    Star,
    Caterpillar,
}

impl Shape {
    pub fn parse(s: &str) -> Option<Shape> {
        Some(match s {
            "random" => Shape::Random,
            "path" => Shape::Path,
            "star" => Shape::Star,
            "caterpillar" => Shape::Caterpillar,
            _ => return None,
        })
    }
}

/// Deterministic tree + rank-space weights for a (n, d, seed, shape) tuple.
pub fn generate(n: u32, dims: usize, seed: u64, shape: Shape) -> WeightedTree {
    let parents = generate_parents(n, seed, shape);
    let tree = Arc::new(OrdinalTree::from_parents(&parents).expect("generated preorder"));
    let mut rows = vec![vec![0u32; dims]; n as usize];
    for dim in 0..dims {
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ (0x9e3779b97f4a7c15u64.wrapping_mul(dim as u64 + 1)));
        let mut perm: Vec<u32> = (1..=n).collect();
        perm.shuffle(&mut rng);
        for v in 0..n as usize {
            rows[v][dim] = perm[v];
        }
    }
    WeightedTree::new(tree, &rows).expect("generated weights are permutations")
}

pub fn generate_parents(n: u32, seed: u64, shape: Shape) -> Vec<u32> {
    assert!(n >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    match shape {
        Shape::Path => (1..n).collect(),
        Shape::Star => vec![1; n as usize - 1],
        Shape::Random => {
            // uniform attachment, then renumbered to preorder
            let mut parent = vec![0u32; n as usize + 1];
            for v in 2..=n {
                parent[v as usize] = rng.gen_range(1..v);
            }
            preorder_relabel(n, &parent)
        }
        Shape::Caterpillar => {
            // spine of about half the nodes, legs scattered along it
            let spine = (n + 1) / 2;
            let mut legs = vec![0u32; spine as usize];
            for _ in 0..n - spine {
                let i = rng.gen_range(0..spine) as usize;
                legs[i] += 1;
            }
            let mut parents = Vec::with_capacity(n as usize - 1);
            let mut prev_spine = 1u32;
            let mut next_id = 2u32;
            for s in 0..spine as usize {
                let here = if s == 0 {
                    1
                } else {
                    let id = next_id;
                    parents.push(prev_spine);
                    next_id += 1;
                    id
                };
                for _ in 0..legs[s] {
                    parents.push(here);
                    next_id += 1;
                }
                prev_spine = here;
            }
            parents
        }
    }
}

fn preorder_relabel(n: u32, parent: &[u32]) -> Vec<u32> {
    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
    for v in 2..=n {
        children[parent[v as usize] as usize].push(v);
    }
    let mut new_id = vec![0u32; n as usize + 1];
    let mut out = Vec::with_capacity(n as usize - 1);
    let mut stack = vec![1u32];
    let mut next = 0u32;
    while let Some(v) = stack.pop() {
        next += 1;
        new_id[v as usize] = next;
        if next > 1 {
            out.push(new_id[parent[v as usize] as usize]);
        }
        for &c in children[v as usize].iter().rev() {
            stack.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_fixture() {
        let tree = Arc::new(OrdinalTree::from_parents(&[1, 1]).unwrap());
        let raw: Vec<Vec<i64>> = vec![vec![10], vec![5], vec![10]];
        let (wt, maps) = rank_space_reduce(&tree, &raw).unwrap();
        assert_eq!(
            (1..=3).map(|v| wt.weight(v, 0)).collect::<Vec<_>>(),
            vec![2, 1, 3]
        );
        assert_eq!(maps[0].rank_range(7, 10), (2, 3));
        assert_eq!(maps[0].rank_range(11, 20), (4, 3));
        assert_eq!(maps[0].rank_at_least(6), 2);
        assert_eq!(maps[0].rank_at_least(11), 4);
    }

    #[test]
    fn reduce_is_identity_on_permutations() {
        let tree = Arc::new(OrdinalTree::from_parents(&[1, 2, 2, 1]).unwrap());
        let raw: Vec<Vec<i64>> = [3i64, 1, 5, 2, 4].iter().map(|&v| vec![v]).collect();
        let (wt, _) = rank_space_reduce(&tree, &raw).unwrap();
        assert_eq!(
            (1..=5).map(|v| wt.weight(v, 0)).collect::<Vec<_>>(),
            vec![3, 1, 5, 2, 4]
        );
    }

    #[test]
    fn validates_rank_space() {
        let tree = Arc::new(OrdinalTree::from_parents(&[1]).unwrap());
        assert!(WeightedTree::new(tree.clone(), &[vec![1], vec![3]]).is_err());
        assert!(WeightedTree::new(tree.clone(), &[vec![1], vec![1]]).is_err());
        assert!(WeightedTree::new(tree.clone(), &[vec![1, 2], vec![2]]).is_err());
        assert!(WeightedTree::new(tree, &[vec![1, 2], vec![2, 1]]).is_ok());
    }

    #[test]
    fn shapes() {
        let p = generate_parents(4, 7, Shape::Path);
        assert_eq!(p, vec![1, 2, 3]);
        let s = generate_parents(5, 7, Shape::Star);
        assert_eq!(s, vec![1, 1, 1, 1]);
        let c = generate_parents(9, 3, Shape::Caterpillar);
        let t = OrdinalTree::from_parents(&c).unwrap();
        assert_eq!(t.len(), 9);
        let r = generate_parents(40, 3, Shape::Random);
        assert!(OrdinalTree::from_parents(&r).is_ok());
    }

    #[test]
    fn generation_is_deterministic() {
        for shape in [Shape::Random, Shape::Path, Shape::Star, Shape::Caterpillar] {
            let a = generate(33, 3, 42, shape);
            let b = generate(33, 3, 42, shape);
            for v in 1..=33 {
                assert_eq!(a.vector(v), b.vector(v));
                assert_eq!(a.tree().parent(v), b.tree().parent(v));
            }
        }
    }
}
