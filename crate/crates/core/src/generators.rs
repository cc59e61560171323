//! Host graph families and the Bernoulli edge sparsification `G_p`.

use crate::graph::{Graph, VertexSet};
use crate::rng::{pair_key, RngStream};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Attempts made by the rejection samplers before giving up.
pub const DEFAULT_RETRY_BUDGET: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("no simple graph after {0} attempts")]
    RetryBudget(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifyParams {
    pub p: f64,
    pub seed: u64,
}

impl SparsifyParams {
    pub fn new(p: f64, seed: u64) -> Result<Self, GenError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(GenError::Param(format!("p = {p} not in [0, 1]")));
        }
        Ok(SparsifyParams { p, seed })
    }
}

/// The per-edge uniforms behind [`sparsify`]. Keeping an edge iff its value
/// is below `p` couples every `p` monotonically.
pub fn edge_uniform(seed: u64, u: usize, v: usize) -> f64 {
    RngStream::new(seed, "sparsify").unit(pair_key(u, v))
}

/// Keeps each edge independently with probability `p`.
pub fn sparsify(g: &Graph, params: SparsifyParams) -> Graph {
    let stream = RngStream::new(params.seed, "sparsify");
    let p = params.p;
    if p >= 1.0 {
        return g.clone();
    }
    g.filter_edges(|u, v| stream.unit(pair_key(u, v)) < p)
}

/// `G(n, p)`: the sparsification of `K_n`.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<Graph, GenError> {
    let params = SparsifyParams::new(p, seed)?;
    let stream = RngStream::new(params.seed, "gnp");
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if stream.unit(pair_key(u, v)) < p {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(n, &edges).expect("pairs are distinct"))
}

/// Random simple `d`-regular graph.
///
/// Points of the pairing model are matched one pair at a time, redrawing any
/// pair that would create a loop or a repeated edge; an attempt restarts when
/// no admissible pair is left. Plain whole-pairing rejection
/// ([`gen_random_regular_pairing`]) is exactly uniform but its acceptance
/// rate decays like `exp(-(d²-1)/4)`, which is already ~1e-4 at `d = 6`.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, GenError> {
    check_regular_params(n, d)?;
    let stream = RngStream::new(seed, "regular");
    let budget = DEFAULT_RETRY_BUDGET;
    let mut adj = vec![false; n * n];
    'attempt: for attempt in 0..budget {
        let mut rng = stream.at(attempt as u64).rng();
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        adj.iter_mut().for_each(|a| *a = false);
        let mut edges = Vec::with_capacity(n * d / 2);
        while !points.is_empty() {
            let k = points.len();
            let mut misses = 0;
            loop {
                let i = rng.gen_range(0..k);
                let j = rng.gen_range(0..k);
                let (u, v) = (points[i], points[j]);
                if i != j && u != v && !adj[u * n + v] {
                    adj[u * n + v] = true;
                    adj[v * n + u] = true;
                    edges.push((u.min(v), u.max(v)));
                    let (hi, lo) = (i.max(j), i.min(j));
                    points.swap_remove(hi);
                    points.swap_remove(lo);
                    break;
                }
                misses += 1;
                if misses > 64 * k && !has_admissible_pair(&points, &adj, n) {
                    continue 'attempt;
                }
            }
        }
        return Ok(Graph::new(n, &edges).expect("admissible pairs keep the graph simple"));
    }
    Err(GenError::RetryBudget(budget))
}

fn has_admissible_pair(points: &[usize], adj: &[bool], n: usize) -> bool {
    let mut vs: Vec<usize> = points.to_vec();
    vs.sort_unstable();
    vs.dedup();
    vs.iter()
        .enumerate()
        .any(|(a, &u)| vs[a + 1..].iter().any(|&v| !adj[u * n + v]))
}

fn check_regular_params(n: usize, d: usize) -> Result<(), GenError> {
    if d >= n && !(n == 0 && d == 0) {
        return Err(GenError::Param(format!("need d < n, got d = {d}, n = {n}")));
    }
    if n * d % 2 == 1 {
        return Err(GenError::Param(format!("n·d = {} is odd", n * d)));
    }
    Ok(())
}

/// Uniform simple `d`-regular graph by whole-pairing rejection.
pub fn gen_random_regular_pairing(
    n: usize,
    d: usize,
    seed: u64,
    budget: usize,
) -> Result<Graph, GenError> {
    check_regular_params(n, d)?;
    let stream = RngStream::new(seed, "regular-pairing");
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = vec![false; n * n];
    'attempt: for attempt in 0..budget {
        let mut rng = stream.at(attempt as u64).rng();
        points.shuffle(&mut rng);
        seen.iter_mut().for_each(|s| *s = false);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || seen[u * n + v] {
                continue 'attempt;
            }
            seen[u * n + v] = true;
            edges.push((u, v));
        }
        return Ok(Graph::new(n, &edges).expect("checked simple"));
    }
    Err(GenError::RetryBudget(budget))
}

pub fn is_prime(q: usize) -> bool {
    if q < 2 {
        return false;
    }
    let mut i = 2;
    while i * i <= q {
        if q.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// Paley graph on `Z_q`: `uv` is an edge iff `u - v` is a nonzero square.
pub fn gen_paley(q: usize) -> Result<Graph, GenError> {
    if !is_prime(q) || q % 4 != 1 {
        return Err(GenError::Param(format!(
            "Paley graphs need a prime q ≡ 1 (mod 4), got {q}"
        )));
    }
    let mut square = vec![false; q];
    for x in 1..q {
        square[x * x % q] = true;
    }
    let mut edges = Vec::with_capacity(q * (q - 1) / 4);
    for u in 0..q {
        for v in u + 1..q {
            if square[v - u] {
                edges.push((u, v));
            }
        }
    }
    Ok(Graph::new(q, &edges).expect("Paley graph is simple"))
}

/// A `d`-regular bipartite graph with parts `0..n` and `n..2n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph {
    pub graph: Graph,
    pub left: VertexSet,
    pub right: VertexSet,
}

/// Union of `d` random perfect matchings between the parts. Repeated pairs
/// are repaired by swapping partners with a random other slot; the draw
/// restarts if repair stalls.
pub fn gen_bipartite_biregular(n: usize, d: usize, seed: u64) -> Result<BipartiteGraph, GenError> {
    if d > n {
        return Err(GenError::Param(format!("need d <= n, got d = {d}, n = {n}")));
    }
    let stream = RngStream::new(seed, "bipartite");
    let budget = DEFAULT_RETRY_BUDGET;
    'attempt: for attempt in 0..budget {
        let mut rng = stream.at(attempt as u64).rng();
        let mut used = vec![false; n * n];
        let mut edges = Vec::with_capacity(n * d);
        for _ in 0..d {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let mut repairs = 0;
            let mut i = 0;
            while i < n {
                if !used[i * n + perm[i]] {
                    i += 1;
                    continue;
                }
                repairs += 1;
                if repairs > 50 * n.max(1) {
                    continue 'attempt;
                }
                // swap with a random slot whose exchange fixes slot i and keeps
                // slot j valid
                let j = rng.gen_range(0..n);
                if j != i && !used[i * n + perm[j]] && !used[j * n + perm[i]] {
                    perm.swap(i, j);
                }
            }
            for (a, &b) in perm.iter().enumerate() {
                used[a * n + b] = true;
                edges.push((a, n + b));
            }
        }
        let graph = Graph::new(2 * n, &edges).expect("repaired matchings are disjoint");
        return Ok(BipartiteGraph {
            graph,
            left: VertexSet::from_unsorted(0..n),
            right: VertexSet::from_unsorted(n..2 * n),
        });
    }
    Err(GenError::RetryBudget(budget))
}
