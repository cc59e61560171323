use crate::graph::Graph;
use crate::rng::RngStream;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Graphs up to this size are decided exactly by the bitmask DP.
pub const EXACT_HAM_CAP: usize = 20;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamMethod {
    Exact,
    /// Minimum degree below 2 or a disconnected graph.
    Obstruction,
    RotationExtension,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamStatus {
    Found,
    CertifiedAbsent,
    /// The heuristic gave up; says nothing about existence.
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamResult {
    pub found: bool,
    pub status: HamStatus,
    pub cycle: Vec<usize>,
    pub method: HamMethod,
    pub restarts: usize,
    pub rotations: usize,
}

impl HamResult {
    fn absent(method: HamMethod) -> Self {
        HamResult {
            found: false,
            status: HamStatus::CertifiedAbsent,
            cycle: Vec::new(),
            method,
            restarts: 0,
            rotations: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamBudget {
    pub restarts: usize,
    /// Rotations per restart, as a multiple of `n`.
    pub rotations_per_vertex: usize,
}

impl Default for HamBudget {
    fn default() -> Self {
        HamBudget {
            restarts: 50,
            rotations_per_vertex: 20,
        }
    }
}

/// Every vertex exactly once and consecutive vertices (cyclically) adjacent.
pub fn is_hamiltonian_cycle(g: &Graph, cycle: &[usize]) -> bool {
    let n = g.n();
    if n < 3 || cycle.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &v in cycle {
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    (0..n).all(|i| g.has_edge(cycle[i], cycle[(i + 1) % n]))
}

pub fn find_hamiltonian_cycle(g: &Graph, budget: HamBudget, seed: u64) -> HamResult {
    let n = g.n();
    if n < 3 {
        return HamResult::absent(HamMethod::Exact);
    }
    if n <= EXACT_HAM_CAP {
        return held_karp(g);
    }
    if g.min_degree() < 2 || !is_connected(g) {
        return HamResult::absent(HamMethod::Obstruction);
    }
    let stream = RngStream::new(seed, "hamilton");
    let mut rotations = 0;
    for restart in 0..budget.restarts.max(1) {
        let mut rng = stream.at(restart as u64).rng();
        let mut search = Posa::new(g, &mut rng);
        let limit = budget.rotations_per_vertex * n;
        let outcome = search.run(&mut rng, limit);
        rotations += search.rotations;
        if let Some(cycle) = outcome {
            debug_assert!(is_hamiltonian_cycle(g, &cycle));
            return HamResult {
                found: true,
                status: HamStatus::Found,
                cycle,
                method: HamMethod::RotationExtension,
                restarts: restart,
                rotations,
            };
        }
    }
    HamResult {
        found: false,
        status: HamStatus::NotFound,
        cycle: Vec::new(),
        method: HamMethod::RotationExtension,
        restarts: budget.restarts,
        rotations,
    }
}

fn is_connected(g: &Graph) -> bool {
    let mut seen = vec![false; g.n()];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == g.n()
}

/// `reach[mask]` holds the end vertices of paths that start at 0 and visit
/// exactly `mask`.
fn held_karp(g: &Graph) -> HamResult {
    let n = g.n();
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect();
    let full: u32 = (1u32 << n) - 1;
    let mut reach = vec![0u32; 1 << n];
    reach[1] = 1;
    for mask in (1..=full).step_by(2) {
        let mut ends = reach[mask as usize];
        while ends != 0 {
            let v = ends.trailing_zeros() as usize;
            ends &= ends - 1;
            let mut next = nbr[v] & !mask;
            while next != 0 {
                let w = next.trailing_zeros();
                next &= next - 1;
                reach[(mask | 1 << w) as usize] |= 1 << w;
            }
        }
    }
    let closing = reach[full as usize] & nbr[0];
    if closing == 0 {
        return HamResult::absent(HamMethod::Exact);
    }
    let mut cur = closing.trailing_zeros() as usize;
    let mut mask = full;
    let mut cycle = vec![cur];
    while mask != 1 {
        let prev_mask = mask & !(1 << cur);
        let prev = (reach[prev_mask as usize] & nbr[cur]).trailing_zeros() as usize;
        cycle.push(prev);
        mask = prev_mask;
        cur = prev;
    }
    cycle.reverse();
    HamResult {
        found: true,
        status: HamStatus::Found,
        cycle,
        method: HamMethod::Exact,
        restarts: 0,
        rotations: 0,
    }
}

struct Posa<'g> {
    g: &'g Graph,
    path: Vec<usize>,
    pos: Vec<usize>,
    /// Off-path neighbours per vertex, kept for the extension heuristic.
    free_degree: Vec<usize>,
    rotations: usize,
}

impl<'g> Posa<'g> {
    fn new(g: &'g Graph, rng: &mut ChaCha8Rng) -> Self {
        let n = g.n();
        let mut s = Posa {
            g,
            path: Vec::with_capacity(n),
            pos: vec![NONE; n],
            free_degree: g.degrees(),
            rotations: 0,
        };
        // start at a random vertex of minimum degree
        let dmin = g.min_degree();
        let low: Vec<usize> = (0..n).filter(|&v| g.degree(v) == dmin).collect();
        s.push(*low.choose(rng).expect("nonempty graph"));
        s
    }

    fn push(&mut self, v: usize) {
        self.pos[v] = self.path.len();
        self.path.push(v);
        for &w in self.g.neighbors(v) {
            self.free_degree[w] -= 1;
        }
    }

    fn end(&self) -> usize {
        *self.path.last().expect("path is never empty")
    }

    /// Appends the unvisited neighbour of the end with fewest unvisited
    /// neighbours of its own.
    fn extend(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let v = self.end();
        let mut best = NONE;
        let mut best_deg = usize::MAX;
        let mut ties = 0;
        for &w in self.g.neighbors(v) {
            if self.pos[w] != NONE {
                continue;
            }
            let d = self.free_degree[w];
            if d < best_deg {
                best = w;
                best_deg = d;
                ties = 1;
            } else if d == best_deg {
                ties += 1;
                if rng.gen_range(0..ties) == 0 {
                    best = w;
                }
            }
        }
        if best == NONE {
            return false;
        }
        self.push(best);
        true
    }

    fn reverse_segment(&mut self, from: usize) {
        self.path[from..].reverse();
        for i in from..self.path.len() {
            self.pos[self.path[i]] = i;
        }
    }

    fn extend_both(&mut self, rng: &mut ChaCha8Rng) {
        while self.extend(rng) {}
        self.reverse_segment(0);
        while self.extend(rng) {}
    }

    fn closes(&self) -> bool {
        self.path.len() >= 3 && self.g.has_edge(self.end(), self.path[0])
    }

    /// The path closes to a cycle that misses some vertex: reopen it next to
    /// a vertex with an outside neighbour and step out.
    fn break_cycle(&mut self) -> bool {
        let k = self.path.len();
        for i in 0..k {
            let x = self.path[i];
            if let Some(&y) = self.g.neighbors(x).iter().find(|&&y| self.pos[y] == NONE) {
                self.path.rotate_left(i + 1);
                for (j, &v) in self.path.iter().enumerate() {
                    self.pos[v] = j;
                }
                self.push(y);
                return true;
            }
        }
        false
    }

    /// One Pósa rotation at the current end.
    fn rotate(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let k = self.path.len();
        let v = self.end();
        let options: Vec<usize> = self
            .g
            .neighbors(v)
            .iter()
            .map(|&w| self.pos[w])
            .filter(|&i| i != NONE && i + 2 < k)
            .collect();
        let Some(&i) = options.choose(rng) else {
            return false;
        };
        self.reverse_segment(i + 1);
        self.rotations += 1;
        true
    }

    fn run(&mut self, rng: &mut ChaCha8Rng, limit: usize) -> Option<Vec<usize>> {
        let n = self.g.n();
        loop {
            self.extend_both(rng);
            if self.path.len() == n && self.closes() {
                return Some(self.path.clone());
            }
            if self.path.len() < n && self.closes() && self.break_cycle() {
                continue;
            }
            if self.rotations >= limit {
                return None;
            }
            if rng.gen_bool(0.5) {
                self.reverse_segment(0);
            }
            if !self.rotate(rng) {
                self.reverse_segment(0);
                if !self.rotate(rng) {
                    return None;
                }
            }
            // a rotation alone may have produced a closable full path
            if self.path.len() == n && self.closes() {
                return Some(self.path.clone());
            }
        }
    }
}
