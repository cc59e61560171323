//! 3-uniform hypergraphs, chiefly the triangle hypergraph `H(G)` whose
//! hyperedges are the vertex sets of triangles of `G`.

mod configs;

pub use configs::{
    count_f_configs, detect_b1, detect_f_config, detect_f_prime, f_cycles_at,
    find_linear_3cycles_through, verify_witness, b1_threshold, ConfigKind, ConfigWitness,
    DEFAULT_SEARCH_BUDGET,
};

use crate::graph::{parse_numbers, Graph, GraphError};
use crate::rng::{triple_key, RngStream};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

pub type Triple = [usize; 3];

#[derive(Debug, Error, PartialEq)]
pub enum HypergraphError {
    #[error("triple {0:?} is not strictly increasing")]
    Unsorted(Triple),
    #[error("triple {0:?} has a vertex out of range for n = {1}")]
    OutOfRange(Triple, usize),
    #[error("duplicate triple {0:?}")]
    Duplicate(Triple),
    #[error("no hyperedge with id {0}")]
    InvalidId(usize),
    #[error("search budget of {0} nodes exceeded")]
    Budget(u64),
    #[error("probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error(transparent)]
    Parse(#[from] GraphError),
}

/// Sorted list of distinct increasing triples plus per-vertex incidence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleHypergraph {
    n: usize,
    triples: Vec<Triple>,
    incidence: Vec<Vec<usize>>,
}

impl TripleHypergraph {
    /// Accepts triples in any order; each must be strictly increasing.
    pub fn new(n: usize, mut triples: Vec<Triple>) -> Result<Self, HypergraphError> {
        for t in &triples {
            if !(t[0] < t[1] && t[1] < t[2]) {
                return Err(HypergraphError::Unsorted(*t));
            }
            if t[2] >= n {
                return Err(HypergraphError::OutOfRange(*t, n));
            }
        }
        triples.sort_unstable();
        if let Some(w) = triples.windows(2).find(|w| w[0] == w[1]) {
            return Err(HypergraphError::Duplicate(w[0]));
        }
        Ok(Self::from_sorted_unchecked(n, triples))
    }

    fn from_sorted_unchecked(n: usize, triples: Vec<Triple>) -> Self {
        let mut incidence = vec![Vec::new(); n];
        for (id, t) in triples.iter().enumerate() {
            for &v in t {
                incidence[v].push(id);
            }
        }
        TripleHypergraph {
            n,
            triples,
            incidence,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_sorted_unchecked(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple(&self, id: usize) -> Result<Triple, HypergraphError> {
        self.triples.get(id).copied().ok_or(HypergraphError::InvalidId(id))
    }

    /// Ids of the hyperedges containing `v`, increasing.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn id_of(&self, t: &Triple) -> Option<usize> {
        self.triples.binary_search(t).ok()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.id_of(t).is_some()
    }

    /// Keeps the hyperedges accepted by `keep`, preserving order.
    pub fn filter<F: FnMut(&Triple) -> bool>(&self, mut keep: F) -> Self {
        let triples = self.triples.iter().copied().filter(|t| keep(t)).collect();
        Self::from_sorted_unchecked(self.n, triples)
    }

    /// `"n t"` then one `"a b c"` line per triple.
    pub fn to_triple_list(&self) -> String {
        let mut s = String::with_capacity(16 + 16 * self.triples.len());
        let _ = writeln!(s, "{} {}", self.n, self.triples.len());
        for [a, b, c] in &self.triples {
            let _ = writeln!(s, "{a} {b} {c}");
        }
        s
    }

    pub fn from_triple_list(text: &str) -> Result<Self, HypergraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, msg: &str| GraphError::Parse {
            line,
            msg: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or(parse_err(1, "missing header"))?;
        let [n, t] = parse_numbers(header, hl + 1)?[..] else {
            return Err(parse_err(hl + 1, "header must be \"n t\"").into());
        };
        let mut triples = Vec::with_capacity(t);
        for (i, line) in lines {
            let [a, b, c] = parse_numbers(line, i + 1)?[..] else {
                return Err(parse_err(i + 1, "triple line must be \"a b c\"").into());
            };
            triples.push([a, b, c]);
        }
        if triples.len() != t {
            return Err(parse_err(1, &format!("header announces {t} triples, found {}", triples.len())).into());
        }
        Self::new(n, triples)
    }
}

/// All triangles of `g`, found by intersecting sorted adjacency lists above
/// each edge.
pub fn build_triangle_hypergraph(g: &Graph) -> TripleHypergraph {
    let mut triples = Vec::new();
    for u in 0..g.n() {
        let nu = g.neighbors(u);
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = g.neighbors(v);
            let (mut i, mut j) = (0, 0);
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        if nu[i] > v {
                            triples.push([u, v, nu[i]]);
                        }
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    // generated in lexicographic order already
    TripleHypergraph::from_sorted_unchecked(g.n(), triples)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleDegreeReport {
    pub degrees: Vec<usize>,
    pub min: usize,
    pub max: usize,
    /// `d³/(2n)`.
    pub target: f64,
    pub lo: f64,
    pub hi: f64,
    pub holds: bool,
}

/// Hyperdegrees against the band `(1 ± eps)·d³/(2n)`.
pub fn triangle_degree_stats(h: &TripleHypergraph, d: f64, eps: f64) -> TriangleDegreeReport {
    let degrees: Vec<usize> = (0..h.n()).map(|v| h.degree(v)).collect();
    let min = degrees.iter().copied().min().unwrap_or(0);
    let max = degrees.iter().copied().max().unwrap_or(0);
    let target = if h.n() == 0 { 0.0 } else { d.powi(3) / (2.0 * h.n() as f64) };
    let (lo, hi) = ((1.0 - eps) * target, (1.0 + eps) * target);
    let holds = degrees
        .iter()
        .all(|&x| (x as f64) >= lo && (x as f64) <= hi);
    TriangleDegreeReport {
        degrees,
        min,
        max,
        target,
        lo,
        hi,
        holds,
    }
}

/// Whether the triple `t` survives `pi`-sparsification under `seed`. The
/// uniform is keyed by the triple, so survivors are monotone in `pi`.
pub fn triple_kept(seed: u64, t: &Triple, pi: f64) -> bool {
    RngStream::new(seed, "hyper-sparsify").unit(triple_key(*t)) < pi
}

/// Keeps each hyperedge independently with probability `pi`.
pub fn sparsify_hypergraph(
    h: &TripleHypergraph,
    pi: f64,
    seed: u64,
) -> Result<TripleHypergraph, HypergraphError> {
    if !(0.0..=1.0).contains(&pi) {
        return Err(HypergraphError::Probability(pi));
    }
    Ok(h.filter(|t| triple_kept(seed, t, pi)))
}
