use super::StructureError;
use crate::graph::{Graph, VertexSet};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Largest `n` accepted by [`tutte_violation`].
pub const TUTTE_CAP: usize = 16;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub n: usize,
    /// Edges `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl Matching {
    pub fn from_mates(mate: &[usize]) -> Self {
        let mut edges: Vec<_> = mate
            .iter()
            .enumerate()
            .filter(|&(u, &v)| v != NONE && u < v)
            .map(|(u, &v)| (u, v))
            .collect();
        edges.sort_unstable();
        Matching {
            n: mate.len(),
            edges,
        }
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_perfect(&self) -> bool {
        2 * self.edges.len() == self.n
    }

    /// Unmatched vertex count `n - 2|M|`.
    pub fn deficiency(&self) -> usize {
        self.n - 2 * self.edges.len()
    }

    pub fn mates(&self) -> Vec<Option<usize>> {
        let mut m = vec![None; self.n];
        for &(u, v) in &self.edges {
            m[u] = Some(v);
            m[v] = Some(u);
        }
        m
    }

    /// Disjoint endpoints and every edge present in `g`.
    pub fn is_valid_in(&self, g: &Graph) -> bool {
        let mut used = vec![false; g.n()];
        for &(u, v) in &self.edges {
            if u >= g.n() || v >= g.n() || used[u] || used[v] || !g.has_edge(u, v) {
                return false;
            }
            used[u] = true;
            used[v] = true;
        }
        true
    }
}

/// Maximum matching by Edmonds' blossom algorithm, `O(n³)`.
pub fn max_matching(g: &Graph) -> Matching {
    let n = g.n();
    let mut mate = vec![NONE; n];
    // greedy warm start
    for u in 0..n {
        if mate[u] == NONE {
            if let Some(&v) = g.neighbors(u).iter().find(|&&v| mate[v] == NONE) {
                mate[u] = v;
                mate[v] = u;
            }
        }
    }
    let mut search = Blossom::new(n);
    for root in 0..n {
        if mate[root] == NONE {
            if let Some(end) = search.find_path(g, &mate, root) {
                search.augment(&mut mate, end);
            }
        }
    }
    Matching::from_mates(&mate)
}

struct Blossom {
    parent: Vec<usize>,
    base: Vec<usize>,
    used: Vec<bool>,
    in_blossom: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Blossom {
    fn new(n: usize) -> Self {
        Blossom {
            parent: vec![NONE; n],
            base: (0..n).collect(),
            used: vec![false; n],
            in_blossom: vec![false; n],
            queue: VecDeque::new(),
        }
    }

    fn lca(&self, mate: &[usize], mut a: usize, mut b: usize) -> usize {
        let mut seen = vec![false; mate.len()];
        loop {
            a = self.base[a];
            seen[a] = true;
            if mate[a] == NONE {
                break;
            }
            a = self.parent[mate[a]];
        }
        loop {
            b = self.base[b];
            if seen[b] {
                return b;
            }
            b = self.parent[mate[b]];
        }
    }

    fn mark_path(&mut self, mate: &[usize], mut v: usize, b: usize, mut child: usize) {
        while self.base[v] != b {
            self.in_blossom[self.base[v]] = true;
            self.in_blossom[self.base[mate[v]]] = true;
            self.parent[v] = child;
            child = mate[v];
            v = self.parent[mate[v]];
        }
    }

    /// BFS for an augmenting path from `root`; returns its free endpoint.
    fn find_path(&mut self, g: &Graph, mate: &[usize], root: usize) -> Option<usize> {
        let n = mate.len();
        self.used.iter_mut().for_each(|x| *x = false);
        self.parent.iter_mut().for_each(|x| *x = NONE);
        for (i, b) in self.base.iter_mut().enumerate() {
            *b = i;
        }
        self.queue.clear();
        self.used[root] = true;
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            for &to in g.neighbors(v) {
                if self.base[v] == self.base[to] || mate[v] == to {
                    continue;
                }
                if to == root || (mate[to] != NONE && self.parent[mate[to]] != NONE) {
                    let cur = self.lca(mate, v, to);
                    self.in_blossom.iter_mut().for_each(|x| *x = false);
                    self.mark_path(mate, v, cur, to);
                    self.mark_path(mate, to, cur, v);
                    for i in 0..n {
                        if self.in_blossom[self.base[i]] {
                            self.base[i] = cur;
                            if !self.used[i] {
                                self.used[i] = true;
                                self.queue.push_back(i);
                            }
                        }
                    }
                } else if self.parent[to] == NONE {
                    self.parent[to] = v;
                    if mate[to] == NONE {
                        return Some(to);
                    }
                    let next = mate[to];
                    self.used[next] = true;
                    self.queue.push_back(next);
                }
            }
        }
        None
    }

    fn augment(&self, mate: &mut [usize], mut v: usize) {
        while v != NONE {
            let pv = self.parent[v];
            let ppv = mate[pv];
            mate[v] = pv;
            mate[pv] = v;
            v = ppv;
        }
    }
}

/// Sizes of the connected components of `G - S` that have odd order.
pub fn odd_components(g: &Graph, removed: &[bool]) -> usize {
    let n = g.n();
    let mut seen = removed.to_vec();
    let mut odd = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        odd += size % 2;
    }
    odd
}

/// A set `S` with more odd components in `G - S` than `|S|`, searched by
/// increasing `|S|`.
pub fn tutte_violation(g: &Graph) -> Result<Option<VertexSet>, StructureError> {
    let n = g.n();
    if n > TUTTE_CAP {
        return Err(StructureError::Cap { n, cap: TUTTE_CAP });
    }
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mut removed = vec![false; n];
    for mask in masks {
        for (v, r) in removed.iter_mut().enumerate() {
            *r = mask >> v & 1 == 1;
        }
        if odd_components(g, &removed) > mask.count_ones() as usize {
            return Ok(Some(VertexSet::from_mask(u64::from(mask))));
        }
    }
    Ok(None)
}

/// A set `S ⊆ A` with `|N(S)| < |S|`, read off a maximum matching: the
/// `A`-vertices reachable by alternating paths from an unmatched `A`-vertex.
pub fn hall_violation_bipartite(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
) -> Result<Option<VertexSet>, StructureError> {
    let n = g.n();
    if a.len() != b.len() || a.len() + b.len() != n || !a.is_disjoint(b) {
        return Err(StructureError::Param(format!(
            "parts of sizes {} and {} do not balance-partition {} vertices",
            a.len(),
            b.len(),
            n
        )));
    }
    let in_a = a.mask(n);
    for (u, v) in g.edges() {
        if in_a[u] == in_a[v] {
            return Err(StructureError::NotBipartite(u, v));
        }
    }
    let mates = max_matching(g).mates();
    let Some(root) = a.iter().find(|&v| mates[v].is_none()) else {
        return Ok(None);
    };
    let mut reached_a = vec![false; n];
    let mut reached_b = vec![false; n];
    let mut queue = VecDeque::from([root]);
    reached_a[root] = true;
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if reached_b[y] {
                continue;
            }
            reached_b[y] = true;
            let z = mates[y].expect("maximum matching leaves no augmenting path");
            if !reached_a[z] {
                reached_a[z] = true;
                queue.push_back(z);
            }
        }
    }
    Ok(Some(VertexSet::from_unsorted((0..n).filter(|&v| reached_a[v]))))
}
