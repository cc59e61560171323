//! Immutable simple undirected graphs and the edge-count primitives used by
//! every other module.
//!
//! `e(S, T)` follows the ordered-pair convention: it counts pairs
//! `(u, v) ∈ S × T` with `uv` an edge, so edges inside `S ∩ T` count twice.
//! [`Graph::internal_edge_count`] gives the unordered count inside one set.

mod bits;
mod mixing;

pub use bits::{bitset, BitMatrix};
pub(crate) use mixing::for_each_combination;
pub use mixing::{
    check_almost_mixing, check_bijumbled, check_bijumbled_bipartite, check_mixing,
    BijumbledReport, MixingError, MixingReport, PairSelection, DEFAULT_EXHAUSTIVE_CAP,
};

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex ids must be strictly increasing (saw {0} after {1})")]
    UnsortedVertexSet(usize, usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Sorted, duplicate-free set of vertex ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    /// Validates an already sorted id list against `n`.
    pub fn from_sorted(n: usize, ids: Vec<usize>) -> Result<Self, GraphError> {
        for w in ids.windows(2) {
            if w[1] <= w[0] {
                return Err(GraphError::UnsortedVertexSet(w[1], w[0]));
            }
        }
        if let Some(&last) = ids.last() {
            if last >= n {
                return Err(GraphError::VertexOutOfRange { vertex: last, n });
            }
        }
        Ok(VertexSet(ids))
    }

    /// Sorts and deduplicates; does not range-check.
    pub fn from_unsorted<I: IntoIterator<Item = usize>>(ids: I) -> Self {
        let mut v: Vec<usize> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn from_mask(mask: u64) -> Self {
        VertexSet((0..64).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Membership mask over `0..n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::from_unsorted(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| !other.contains(v))
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet::from_unsorted(iter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    /// Builds a graph, rejecting out-of-range endpoints, loops and repeated
    /// pairs (in either orientation).
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (u.min(w[0]), u.max(w[0]));
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Graph {
            n,
            adj,
            m: edges.len(),
        })
    }

    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Graph {
        let adj = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Graph {
            n,
            adj,
            m: n * n.saturating_sub(1) / 2,
        }
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).expect("cycle needs n >= 3")
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::new(n, &edges).expect("valid path")
    }

    /// Outer 5-cycle 0..5, inner pentagram 5..10, spokes i -- i+5.
    pub fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, i + 5));
        }
        Graph::new(10, &edges).expect("valid Petersen graph")
    }

    /// Star with centre 0.
    pub fn star(leaves: usize) -> Graph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        Graph::new(leaves + 1, &edges).expect("valid star")
    }

    /// Complete multipartite graph with the given part sizes.
    pub fn complete_multipartite(parts: &[usize]) -> Graph {
        let mut label = Vec::new();
        for (i, &s) in parts.iter().enumerate() {
            label.extend(std::iter::repeat_n(i, s));
        }
        let n = label.len();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if label[u] != label[v] {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, &edges).expect("valid multipartite graph")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let off = self.n;
        let mut edges = self.edges();
        edges.extend(other.edges().into_iter().map(|(u, v)| (u + off, v + off)));
        Graph::new(self.n + other.n, &edges).expect("union of simple graphs")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            2.0 * self.m as f64 / self.n as f64
        }
    }

    /// Edge density `m / C(n, 2)`.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m as f64 / (self.n * (self.n - 1) / 2) as f64
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Keeps the edges accepted by `keep`; vertex set unchanged.
    pub fn filter_edges<F: FnMut(usize, usize) -> bool>(&self, mut keep: F) -> Graph {
        let mut adj = vec![Vec::new(); self.n];
        let mut m = 0;
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v && keep(u, v) {
                    adj[u].push(v);
                    adj[v].push(u);
                    m += 1;
                }
            }
        }
        // pushes happen in increasing order of the other endpoint per vertex
        // only for `u`; sort to restore the invariant for `v`.
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph { n: self.n, adj, m }
    }

    /// Induced subgraph on `vertices` (relabelled `0..k` in the given order)
    /// together with the map back to original ids.
    pub fn induced(&self, vertices: &[usize]) -> (Graph, Vec<usize>) {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let mut adj = vec![Vec::new(); vertices.len()];
        let mut m2 = 0;
        for (i, &v) in vertices.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = index[w];
                if j != usize::MAX {
                    adj[i].push(j);
                    if i < j {
                        m2 += 1;
                    }
                }
            }
            adj[i].sort_unstable();
        }
        (
            Graph {
                n: vertices.len(),
                adj,
                m: m2,
            },
            vertices.to_vec(),
        )
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        let edges: Vec<_> = self.edges().into_iter().map(|(u, v)| (perm[u], perm[v])).collect();
        Graph::new(self.n, &edges).expect("permutation preserves simplicity")
    }

    pub fn isolated_count(&self) -> usize {
        self.adj.iter().filter(|a| a.is_empty()).count()
    }

    /// `e(S, T)`: ordered pairs `(u, v) ∈ S × T` with `uv ∈ E`.
    pub fn directed_pair_count(&self, s: &VertexSet, t: &VertexSet) -> usize {
        let tm = t.mask(self.n);
        s.iter()
            .map(|u| self.adj[u].iter().filter(|&&v| tm[v]).count())
            .sum()
    }

    /// Unordered edges with both endpoints in `S`.
    pub fn internal_edge_count(&self, s: &VertexSet) -> usize {
        self.directed_pair_count(s, s) / 2
    }

    /// `d(v, X)`: neighbours of `v` inside the membership mask.
    pub fn degree_into(&self, v: usize, mask: &[bool]) -> usize {
        self.adj[v].iter().filter(|&&w| mask[w]).count()
    }

    pub fn bit_matrix(&self) -> BitMatrix {
        BitMatrix::from_graph(self)
    }

    /// Edge-list text: `"n m"` then one `"u v"` line per edge with `u < v`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::with_capacity(16 + 12 * self.m);
        let _ = writeln!(s, "{} {}", self.n, self.m);
        for (u, v) in self.edges() {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }

    pub fn from_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let head = parse_numbers(header, hl + 1)?;
        let [n, m] = head[..] else {
            return Err(GraphError::Parse {
                line: hl + 1,
                msg: "header must be \"n m\"".into(),
            });
        };
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            let nums = parse_numbers(line, i + 1)?;
            let [u, v] = nums[..] else {
                return Err(GraphError::Parse {
                    line: i + 1,
                    msg: "edge line must be \"u v\"".into(),
                });
            };
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        Graph::new(n, &edges)
    }
}

pub(crate) fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>, GraphError> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>().map_err(|e| GraphError::Parse {
                line: lineno,
                msg: format!("{tok:?}: {e}"),
            })
        })
        .collect()
}
