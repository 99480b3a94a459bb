//! Per-query instrumentation counters.
//!
//! Every query entry point threads one of these through; the acceptance
//! suite asserts the *_bound_violations fields stay zero, so the structures
//! police their own complexity claims at run time.

#[derive(Default, Debug, Clone)]
pub struct QueryStats {
    /// Child-range dispatches issued by a hierarchy descent.
    pub child_queries: u64,
    /// Largest number of dispatches any single subpath triggered.
    pub max_subpath_child_queries: u64,
    /// Subpaths that exceeded the dispatch budget 2(h-1).
    pub dispatch_bound_violations: u64,

    /// Path-maximum probes made by the ancestor dominance base.
    pub probes: u64,
    /// Dominance base calls whose probes exceeded 2k+1.
    pub probe_bound_violations: u64,

    /// Threshold-ancestor searches.
    pub weighted_anc_queries: u64,
    /// Off-path dominance subqueries.
    pub offpath_queries: u64,
    /// Off-path subqueries that reported nothing (each must report).
    pub offpath_empty_results: u64,

    /// Table and array lookups inside the small-universe counting base.
    pub base_lookups: u64,
    /// Largest lookup count a single counting base call needed.
    pub max_base_lookups: u64,
    /// Counting base calls that exceeded the lookup budget.
    pub lookup_bound_violations: u64,

    /// Level-search iterations in the path successor base.
    pub search_iters: u64,
    /// Largest iteration count a single successor search needed.
    pub max_search_iters: u64,
    /// Successor searches that exceeded the iteration budget.
    pub iter_bound_violations: u64,

    /// Predecessor searches against marked-level occurrence arrays.
    pub pred_accesses: u64,
    /// Nodes emitted by reporting queries.
    pub reported: u64,
}

impl QueryStats {
    pub fn new() -> QueryStats {
        QueryStats::default()
    }

    pub fn reset(&mut self) {
        *self = QueryStats::default();
    }

    /// Total of all bound-violation counters; zero for a healthy run.
    pub fn violations(&self) -> u64 {
        self.dispatch_bound_violations
            + self.probe_bound_violations
            + self.lookup_bound_violations
            + self.iter_bound_violations
    }
}
