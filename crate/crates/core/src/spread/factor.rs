use super::{triangles_at, SpreadError, TriangleMatching};
use crate::graph::{bitset, BitMatrix, Graph};
use crate::hypergraph::Triple;
use serde::{Deserialize, Serialize};

pub const DEFAULT_FACTOR_CAP: usize = 120;
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactConfig {
    pub cap: usize,
    pub node_budget: u64,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            cap: DEFAULT_FACTOR_CAP,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// Exact triangle-factor search on the whole host with default limits.
pub fn exact_triangle_factor(g: &Graph) -> Result<Option<TriangleMatching>, SpreadError> {
    let all: Vec<usize> = (0..g.n()).collect();
    exact_triangle_factor_on(g, &all, &ExactConfig::default())
}

/// Searches for a triangle factor of `G[vertices]`. `Ok(None)` certifies
/// that none exists; running out of nodes is an error, never a `None`.
///
/// Branches on the uncovered vertex with the fewest triangles left and
/// backtracks as soon as some uncovered vertex has none.
pub fn exact_triangle_factor_on(
    g: &Graph,
    vertices: &[usize],
    cfg: &ExactConfig,
) -> Result<Option<TriangleMatching>, SpreadError> {
    let k = vertices.len();
    if !k.is_multiple_of(3) {
        return Err(SpreadError::Divisibility(k));
    }
    if k > cfg.cap {
        return Err(SpreadError::TooLarge { n: k, cap: cfg.cap });
    }
    let bm = g.bit_matrix();
    let mut uncovered = bitset::new(g.n());
    for &v in vertices {
        if v >= g.n() {
            return Err(SpreadError::Param(format!("vertex {v} out of range")));
        }
        bitset::insert(&mut uncovered, v);
    }
    if bitset::count(&uncovered) != k {
        return Err(SpreadError::Param("repeated vertex".into()));
    }
    let mut search = Search {
        bm: &bm,
        path: Vec::with_capacity(k / 3),
        nodes: 0,
        budget: cfg.node_budget,
    };
    if search.run(&mut uncovered, k)? {
        Ok(Some(TriangleMatching {
            n: g.n(),
            triples: search.path,
        }))
    } else {
        Ok(None)
    }
}

struct Search<'a> {
    bm: &'a BitMatrix,
    path: Vec<Triple>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn triangle_count(&self, v: usize, pool: &[u64]) -> usize {
        let nb: Vec<u64> = self.bm.row(v).iter().zip(pool).map(|(a, b)| a & b).collect();
        bitset::and_iter(&nb, &nb)
            .map(|y| bitset::and_count(self.bm.row(y), &nb))
            .sum::<usize>()
            / 2
    }

    fn run(&mut self, uncovered: &mut [u64], left: usize) -> Result<bool, SpreadError> {
        if left == 0 {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(SpreadError::NodeBudget(self.budget));
        }
        let mut best = (usize::MAX, usize::MAX);
        for v in bitset::and_iter(uncovered, uncovered) {
            let c = self.triangle_count(v, uncovered);
            if c == 0 {
                return Ok(false);
            }
            if c < best.0 {
                best = (c, v);
            }
        }
        let v = best.1;
        for (y, z) in triangles_at(self.bm, v, uncovered) {
            for x in [v, y, z] {
                bitset::remove(uncovered, x);
            }
            let mut t = [v, y, z];
            t.sort_unstable();
            self.path.push(t);
            if self.run(uncovered, left - 3)? {
                return Ok(true);
            }
            self.path.pop();
            for x in [v, y, z] {
                bitset::insert(uncovered, x);
            }
        }
        Ok(false)
    }
}
