use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum Error {
    #[error("node {node} has parent {parent}, which does not precede it in preorder")]
    CycleOrForwardParent { node: u32, parent: u32 },

    #[error("label {label} out of range 1..={sigma}")]
    LabelOutOfRange { label: u32, sigma: u32 },

    #[error("invalid node id {0}")]
    InvalidNode(u32),

    #[error("node {node} has no child with index {index}")]
    ChildIndexOutOfRange { node: u32, index: usize },

    #[error("operation not defined on the dummy root")]
    DummyNode,

    #[error("no auxiliary view exists for level {0}")]
    NoSuchView(u32),

    #[error("weight {weight} in dimension {dim} outside rank space 1..={n}")]
    WeightOutOfRankSpace { weight: u32, dim: usize, n: u32 },

    #[error("weight {weight} repeats in dimension {dim}")]
    DuplicateWeight { weight: u32, dim: usize },

    #[error("weights along edge {child}->{parent} do not decrease upward")]
    MonotonicityViolation { child: u32, parent: u32 },

    #[error("expected {expected} weight dimensions, got {got}")]
    VectorDimensionMismatch { expected: usize, got: usize },

    #[error("weight {weight} outside small universe 1..={c}")]
    WeightOutOfSmallUniverse { weight: u32, c: u32 },
}
