//! Expansion, matching and Hamiltonicity checks.

mod expander;
mod hamilton;
mod matching;

pub use expander::{
    check_c_expander, expansion_limit, joint_size, expander_implies_pm_test, ExpanderMode, ExpanderReport, FailingKind,
    PmTestConfig, PmTestReport, Verdict, Violation, Witness, EXACT_EXPANDER_CAP,
};
pub use hamilton::{
    find_hamiltonian_cycle, is_hamiltonian_cycle, HamBudget, HamMethod, HamResult, HamStatus,
    EXACT_HAM_CAP,
};
pub use matching::{
    hall_violation_bipartite, max_matching, odd_components, tutte_violation, Matching,
    TUTTE_CAP,
};

use crate::graph::{Graph, VertexSet};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("exact search supports n <= {cap}, got {n}")]
    Cap { n: usize, cap: usize },
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("edge {0}-{1} does not cross the given bipartition")]
    NotBipartite(usize, usize),
}

/// `N(X)`: vertices outside `X` with a neighbour in `X`.
pub fn external_neighborhood(g: &Graph, x: &VertexSet) -> VertexSet {
    let inside = x.mask(g.n());
    let mut hit = vec![false; g.n()];
    for u in x.iter() {
        for &w in g.neighbors(u) {
            if !inside[w] {
                hit[w] = true;
            }
        }
    }
    VertexSet::from_unsorted((0..g.n()).filter(|&v| hit[v]))
}

pub fn count_isolated(g: &Graph) -> usize {
    g.isolated_count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbourhoods() {
        let k4 = Graph::complete(4);
        assert_eq!(
            external_neighborhood(&k4, &VertexSet::from_unsorted([0])).as_slice(),
            &[1, 2, 3]
        );
        assert!(external_neighborhood(&k4, &VertexSet::full(4)).is_empty());
        let p = Graph::petersen();
        assert_eq!(
            external_neighborhood(&p, &VertexSet::from_unsorted([0])).as_slice(),
            &[1, 4, 5]
        );
    }

    #[test]
    fn isolated_counts() {
        assert_eq!(count_isolated(&Graph::empty(5)), 5);
        assert_eq!(count_isolated(&Graph::complete(5)), 0);
        assert_eq!(count_isolated(&Graph::complete(5).disjoint_union(&Graph::empty(1))), 1);
    }
}
