//! Spread triangle factors by iterative absorption: a greedy almost
//! factor, a nested vortex of random vertex sets, the cover-down step, an
//! exact finishing solver and the pipeline that chains them.

mod almost;
mod coverdown;
mod estimate;
mod factor;
mod pipeline;
mod vortex;

pub use almost::{almost_factor_rounds, almost_factor_spread_bound, sample_almost_factor};
pub use coverdown::{cover_down, cover_down_within, CoverBranch, CoverDownConfig, CoverDownReport};
pub use estimate::{estimate_spread, Sampler, SetEstimate, SpreadEstimate, MIN_SPREAD_TRIALS};
pub use factor::{exact_triangle_factor, exact_triangle_factor_on, ExactConfig, DEFAULT_FACTOR_CAP, DEFAULT_NODE_BUDGET};
pub use pipeline::{sample_spread_factor, LevelStep, SpreadConfig, SpreadRun};
pub use vortex::{
    default_window, level_ladder, sample_vortex, sample_vortex_with, vortex_membership_spread_check, LevelAudit,
    MembershipReport, VortexConfig, VortexSample, Window,
};

use crate::graph::{Graph, VertexSet};
use crate::hypergraph::{HypergraphError, Triple, TripleHypergraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpreadError {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("almost factor stuck at round {round}: {reason}")]
    Stuck { round: usize, reason: String },
    #[error("vortex rejected {attempts} samples; last failure: {property} at level {level}")]
    VortexExhausted {
        attempts: usize,
        level: usize,
        property: String,
    },
    #[error("vertex {vertex} has d(v, U) = {degree} < {required:.3}")]
    Precondition {
        vertex: usize,
        degree: usize,
        required: f64,
    },
    #[error("conditioning event on the split of U failed in all {0} permutations")]
    Conditioning(usize),
    #[error("no candidate triangle for leftover vertex {vertex} ({branch:?} branch)")]
    NoCandidate { vertex: usize, branch: CoverBranch },
    #[error("cover-down used {used} vertices of U, over the budget {budget:.3}")]
    Budget { used: usize, budget: f64 },
    #[error("3 does not divide the number of vertices ({0})")]
    Divisibility(usize),
    #[error("{n} vertices exceed the exact solver cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("exact search budget of {0} nodes exhausted")]
    NodeBudget(u64),
    #[error("no triangle factor on the remaining {0} vertices")]
    NoFactor(usize),
    #[error("invalid matching: {0}")]
    Invalid(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<SpreadError>,
    },
}

impl SpreadError {
    pub(crate) fn at(self, stage: impl Into<String>) -> SpreadError {
        SpreadError::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error below any stage labels.
    pub fn root(&self) -> &SpreadError {
        match self {
            SpreadError::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

/// Vertex-disjoint triangles of a host on `n` vertices, kept in the order
/// they were chosen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangleMatching {
    pub n: usize,
    pub triples: Vec<Triple>,
}

impl TriangleMatching {
    pub fn new(n: usize) -> Self {
        TriangleMatching { n, triples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Adds a triangle given in any vertex order.
    pub fn push(&mut self, mut t: Triple) {
        t.sort_unstable();
        self.triples.push(t);
    }

    pub fn extend(&mut self, other: &TriangleMatching) {
        self.triples.extend_from_slice(&other.triples);
    }

    pub fn covered(&self) -> VertexSet {
        VertexSet::from_unsorted(self.triples.iter().flatten().copied())
    }

    pub fn covered_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &v in self.triples.iter().flatten() {
            mask[v] = true;
        }
        mask
    }

    /// Checks disjointness and that every triple is a triangle of `g`.
    pub fn verify(&self, g: &Graph) -> Result<(), SpreadError> {
        if g.n() != self.n {
            return Err(SpreadError::Invalid(format!("host has {} vertices, matching {}", g.n(), self.n)));
        }
        let mut seen = vec![false; self.n];
        for t in &self.triples {
            if !(t[0] < t[1] && t[1] < t[2] && t[2] < self.n) {
                return Err(SpreadError::Invalid(format!("malformed triple {t:?}")));
            }
            if !(g.has_edge(t[0], t[1]) && g.has_edge(t[0], t[2]) && g.has_edge(t[1], t[2])) {
                return Err(SpreadError::Invalid(format!("{t:?} is not a triangle")));
            }
            for &v in t {
                if std::mem::replace(&mut seen[v], true) {
                    return Err(SpreadError::Invalid(format!("vertex {v} covered twice")));
                }
            }
        }
        Ok(())
    }

    /// A verified matching covering every vertex.
    pub fn verify_factor(&self, g: &Graph) -> Result<(), SpreadError> {
        self.verify(g)?;
        if 3 * self.triples.len() != self.n {
            return Err(SpreadError::Invalid(format!(
                "covers {} of {} vertices",
                3 * self.triples.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Triple-list text, triples sorted.
    pub fn to_triple_list(&self) -> Result<String, HypergraphError> {
        Ok(TripleHypergraph::new(self.n, self.triples.clone())?.to_triple_list())
    }

    pub fn from_triple_list(text: &str) -> Result<Self, HypergraphError> {
        let h = TripleHypergraph::from_triple_list(text)?;
        Ok(TriangleMatching {
            n: h.n(),
            triples: h.triples().to_vec(),
        })
    }
}

/// One asymptotic hypothesis evaluated on a concrete instance, with unit
/// constants wherever the statement leaves them implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
    /// Desk-scale overrides applied to the run.
    pub overrides: Vec<String>,
}

impl RegimeReport {
    pub(crate) fn check(&mut self, name: &str, holds: bool, detail: String) {
        self.checks.push(RegimeCheck {
            name: name.to_string(),
            holds,
            detail,
        });
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

pub(crate) fn check_unit(name: &str, x: f64, open: bool) -> Result<(), SpreadError> {
    let ok = if open { x > 0.0 && x < 1.0 } else { x > 0.0 && x <= 1.0 };
    if ok {
        Ok(())
    } else {
        let range = if open { "(0, 1)" } else { "(0, 1]" };
        Err(SpreadError::Param(format!("{name} must lie in {range}, got {x}")))
    }
}

/// Triangles `{v, y, z}` with `y < z` both in `pool` and adjacent to `v`,
/// enumerated in increasing `(y, z)` order.
pub(crate) fn triangles_at(bm: &crate::graph::BitMatrix, v: usize, pool: &[u64]) -> Vec<(usize, usize)> {
    use crate::graph::bitset;
    let nb: Vec<u64> = bm.row(v).iter().zip(pool).map(|(a, b)| a & b).collect();
    let mut out = Vec::new();
    for y in bitset::and_iter(&nb, &nb) {
        for z in bitset::and_iter(bm.row(y), &nb) {
            if z > y {
                out.push((y, z));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_catches_defects() {
        let g = Graph::complete(6);
        let mut m = TriangleMatching::new(6);
        m.push([2, 1, 0]);
        m.push([3, 4, 5]);
        assert!(m.verify_factor(&g).is_ok());
        let mut bad = m.clone();
        bad.triples[1] = [0, 4, 5];
        assert!(bad.verify(&g).is_err());
        let c6 = Graph::cycle(6);
        assert!(m.verify(&c6).is_err());
        let mut partial = TriangleMatching::new(6);
        partial.push([0, 1, 2]);
        assert!(partial.verify(&g).is_ok());
        assert!(partial.verify_factor(&g).is_err());
    }

    #[test]
    fn triple_list_round_trip() {
        let mut m = TriangleMatching::new(9);
        m.push([6, 7, 8]);
        m.push([0, 4, 2]);
        let back = TriangleMatching::from_triple_list(&m.to_triple_list().unwrap()).unwrap();
        assert_eq!(back.covered(), m.covered());
        assert_eq!(back.len(), 2);
    }

    #[test]
    fn triangles_at_vertex() {
        let g = Graph::complete(5);
        let bm = g.bit_matrix();
        let pool = crate::graph::bitset::full(5);
        assert_eq!(triangles_at(&bm, 0, &pool).len(), 6);
        let mut pool = pool;
        crate::graph::bitset::remove(&mut pool, 4);
        assert_eq!(triangles_at(&bm, 0, &pool), vec![(1, 2), (1, 3), (2, 3)]);
    }
}
