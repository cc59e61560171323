//! Conditional success probabilities for the sequential triangle test.
//!
//! Elements are the host edges (present with probability `p`) and one
//! indicator per triangle (present with probability `c`). A refuted
//! triangle `i` carries the constraint "not all of `E_i* ∖ R` present".
//! Its indicator belongs to no other triangle, so it can be summed out:
//! given the edges `ω`, the constraint holds with probability
//! `1 - q_i·[S_i ⊆ ω]`, where `S_i` are its undetermined edges and `q_i`
//! is `c` (or 1 if the indicator were already known present). Only
//! edges are therefore ever enumerated.
//!
//! Constraints that share no undetermined edge with the current triangle,
//! directly or through a chain of other constraints, are independent of it
//! and cancel from the ratio.

use super::{CouplingError, TriangleSystem};
use crate::rng::RngStream;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest exponent (edges or constraints, whichever is smaller) handled
/// by exact summation.
pub const DEFAULT_ELEMENT_CAP: usize = 25;

/// What to do when the constraint component exceeds the exact-summation cap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    /// No fallback: an oversize component is an error.
    Exact,
    MonteCarlo { samples: usize },
    /// The union-bound lower estimate, flagged as a bound.
    Bound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbMode {
    Exact,
    MonteCarlo,
    Bound,
}

/// Element probabilities plus the exact-summation policy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbSettings {
    pub p: f64,
    pub c: f64,
    pub fallback: Fallback,
    pub cap: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondProb {
    pub value: f64,
    pub mode: ProbMode,
    /// Undetermined edges in the component of the current triangle.
    pub edges: usize,
    /// Refuted constraints in that component.
    pub constraints: usize,
    pub samples: Option<usize>,
    /// 95% interval for Monte Carlo estimates.
    pub ci: Option<(f64, f64)>,
}

/// What has been learned so far: the revealed set `R` (edges and
/// indicators known present) and the refuted triangles `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct RevealState {
    pub edge_present: Vec<bool>,
    pub indicator_present: Vec<bool>,
    refuted: Vec<usize>,
    is_refuted: Vec<bool>,
    refuted_by_edge: Vec<Vec<usize>>,
}

impl RevealState {
    pub fn new(sys: &TriangleSystem) -> Self {
        RevealState {
            edge_present: vec![false; sys.edges.len()],
            indicator_present: vec![false; sys.triangles.len()],
            refuted: Vec::new(),
            is_refuted: vec![false; sys.triangles.len()],
            refuted_by_edge: vec![Vec::new(); sys.edges.len()],
        }
    }

    pub fn refuted(&self) -> &[usize] {
        &self.refuted
    }

    pub fn is_refuted(&self, i: usize) -> bool {
        self.is_refuted[i]
    }

    /// Adds triangle `i` to `X`.
    pub fn refute(&mut self, sys: &TriangleSystem, i: usize) {
        if self.is_refuted[i] {
            return;
        }
        self.is_refuted[i] = true;
        self.refuted.push(i);
        for &e in &sys.tri_edges[i] {
            self.refuted_by_edge[e].push(i);
        }
    }

    /// Marks every element of `E_i*` present. Returns the newly revealed
    /// edge ids and whether the indicator was new.
    pub fn reveal(&mut self, sys: &TriangleSystem, i: usize) -> (Vec<usize>, bool) {
        let mut fresh = Vec::new();
        for &e in &sys.tri_edges[i] {
            if !self.edge_present[e] {
                self.edge_present[e] = true;
                fresh.push(e);
            }
        }
        let new_indicator = !self.indicator_present[i];
        self.indicator_present[i] = true;
        (fresh, new_indicator)
    }

    /// Refuted triangles all of whose edges are now present; their
    /// indicators are forced absent.
    pub fn saturated_constraints<'a>(&'a self, sys: &'a TriangleSystem, edges: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
        let mut seen = Vec::new();
        edges.iter().flat_map(move |&e| self.refuted_by_edge[e].iter().copied()).filter(move |&i| {
            if seen.contains(&i) {
                return false;
            }
            seen.push(i);
            sys.tri_edges[i].iter().all(|&e| self.edge_present[e])
        })
    }

    fn q(&self, c: f64, i: usize) -> f64 {
        if self.indicator_present[i] {
            1.0
        } else {
            c
        }
    }

    fn open_edges<'a>(&'a self, sys: &'a TriangleSystem, i: usize) -> impl Iterator<Item = usize> + 'a {
        sys.tri_edges[i].iter().copied().filter(|&e| !self.edge_present[e])
    }
}

/// The component of constraints linked to triangle `j` through shared
/// undetermined edges, with edges renumbered locally.
struct Component {
    /// Global ids of the undetermined edges, local id = position.
    edges: Vec<usize>,
    target: Vec<usize>,
    /// Local edge ids and `q_i` per linked constraint.
    constraints: Vec<(Vec<usize>, f64)>,
}

/// Bitmask form of a component with at most 128 edges.
struct Masks {
    target: u128,
    constraints: Vec<(u128, f64)>,
}

impl Component {
    fn masks(&self) -> Option<Masks> {
        if self.edges.len() > 128 {
            return None;
        }
        let mask = |ids: &[usize]| ids.iter().fold(0u128, |m, &b| m | 1u128 << b);
        Some(Masks {
            target: mask(&self.target),
            constraints: self.constraints.iter().map(|(ids, q)| (mask(ids), *q)).collect(),
        })
    }
}

fn component(sys: &TriangleSystem, state: &RevealState, c: f64, j: usize) -> Component {
    let mut edges: Vec<usize> = state.open_edges(sys, j).collect();
    let mut linked: Vec<usize> = Vec::new();
    let mut head = 0;
    while head < edges.len() {
        let e = edges[head];
        head += 1;
        for &i in &state.refuted_by_edge[e] {
            if i == j || linked.contains(&i) {
                continue;
            }
            linked.push(i);
            for f in state.open_edges(sys, i) {
                if !edges.contains(&f) {
                    edges.push(f);
                }
            }
        }
    }
    let local = |i: usize| -> Vec<usize> {
        state
            .open_edges(sys, i)
            .map(|e| edges.iter().position(|&x| x == e).unwrap())
            .collect()
    };
    let target = local(j);
    let constraints = linked.iter().map(|&i| (local(i), state.q(c, i))).collect();
    Component {
        edges,
        target,
        constraints,
    }
}

/// `π_j = P[E_j' present | every refuted E_i' not fully present]`.
pub fn conditional_prob(
    sys: &TriangleSystem,
    state: &RevealState,
    j: usize,
    settings: &ProbSettings,
    stream: RngStream,
) -> Result<CondProb, CouplingError> {
    let ProbSettings { p, c, fallback, cap } = *settings;
    let qj = state.q(c, j);
    let comp = component(sys, state, c, j);
    let ke = comp.edges.len();
    let kc = comp.constraints.len();
    let make = |value: f64, mode: ProbMode| CondProb {
        value,
        mode,
        edges: ke,
        constraints: kc,
        samples: None,
        ci: None,
    };
    if let Some(masks) = comp.masks().filter(|_| ke.min(kc) <= cap) {
        let (num, den) = if kc <= ke {
            inclusion_exclusion(&masks, p)
        } else {
            enumerate_edges(&masks, ke, p)
        };
        if !(den > 0.0) {
            return Err(CouplingError::Inconsistent(j));
        }
        return Ok(make(qj * num / den, ProbMode::Exact));
    }
    match fallback {
        Fallback::Exact => Err(CouplingError::CapExceeded {
            elements: ke.min(kc),
            cap,
        }),
        Fallback::Bound => Ok(make(lower_bound(&comp, p, qj), ProbMode::Bound)),
        Fallback::MonteCarlo { samples } => {
            let (value, ci) = monte_carlo(&comp, p, qj, samples, stream)?;
            Ok(CondProb {
                samples: Some(samples),
                ci: Some(ci),
                ..make(value, ProbMode::MonteCarlo)
            })
        }
    }
}

/// The union-bound estimate `q_j p^{|S_j|} - Σ_{i ∈ N1} q_j q_i p^{|S_j ∪ S_i|}`
/// over constraints sharing an undetermined edge with `j`. With `q = c` this
/// is `p^{|E_j∖R|}(c - c² Σ p^{|E_i∖(E_j∪R)|})`.
pub fn conditional_prob_bound(
    sys: &TriangleSystem,
    state: &RevealState,
    p: f64,
    c: f64,
    j: usize,
) -> f64 {
    let comp = component(sys, state, c, j);
    lower_bound(&comp, p, state.q(c, j))
}

fn lower_bound(comp: &Component, p: f64, qj: f64) -> f64 {
    let own = p.powi(comp.target.len() as i32);
    let overlap: f64 = comp
        .constraints
        .iter()
        .filter(|(ids, _)| ids.iter().any(|b| comp.target.contains(b)))
        .map(|(ids, q)| q * p.powi(ids.iter().filter(|b| !comp.target.contains(b)).count() as i32))
        .sum();
    own * (qj - qj * overlap)
}

/// Sums `Π_{i∈T} (-q_i) · p^{|∪_T S_i|}` over subsets `T`, with and without
/// the target edges forced in.
fn inclusion_exclusion(comp: &Masks, p: f64) -> (f64, f64) {
    fn walk(cs: &[(u128, f64)], k: usize, union: u128, coef: f64, target: u128, pw: &[f64], acc: &mut (f64, f64)) {
        if k == cs.len() {
            acc.0 += coef * pw[(union | target).count_ones() as usize];
            acc.1 += coef * pw[union.count_ones() as usize];
            return;
        }
        walk(cs, k + 1, union, coef, target, pw, acc);
        let (m, q) = cs[k];
        walk(cs, k + 1, union | m, -coef * q, target, pw, acc);
    }
    let pw: Vec<f64> = (0..=128).map(|k| p.powi(k)).collect();
    let mut acc = (0.0, 0.0);
    walk(&comp.constraints, 0, 0, 1.0, comp.target, &pw, &mut acc);
    acc
}

/// Sums the constraint weights over all `2^k` edge assignments.
fn enumerate_edges(comp: &Masks, k: usize, p: f64) -> (f64, f64) {
    let pw: Vec<f64> = (0..=k).map(|i| p.powi(i as i32)).collect();
    let qw: Vec<f64> = (0..=k).map(|i| (1.0 - p).powi(i as i32)).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for w in 0..1u128 << k {
        let ones = w.count_ones() as usize;
        let mut weight = pw[ones] * qw[k - ones];
        for &(m, q) in &comp.constraints {
            if m & !w == 0 {
                weight *= 1.0 - q;
            }
        }
        den += weight;
        if comp.target & !w == 0 {
            num += weight;
        }
    }
    (num, den)
}

/// Ratio estimator: edges drawn from the prior, each draw weighted by the
/// probability that all constraints hold given those edges.
fn monte_carlo(
    comp: &Component,
    p: f64,
    qj: f64,
    samples: usize,
    stream: RngStream,
) -> Result<(f64, (f64, f64)), CouplingError> {
    let mut rng = stream.rng();
    let k = comp.edges.len();
    let mut xs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut w = vec![false; k];
        for x in w.iter_mut() {
            *x = rng.gen::<f64>() < p;
        }
        let inside = |ids: &[usize]| ids.iter().all(|&b| w[b]);
        let weight: f64 = comp
            .constraints
            .iter()
            .map(|(ids, q)| if inside(ids) { 1.0 - q } else { 1.0 })
            .product();
        let hit = if inside(&comp.target) { weight } else { 0.0 };
        xs.push((hit, weight));
    }
    let n = samples as f64;
    let num: f64 = xs.iter().map(|x| x.0).sum::<f64>() / n;
    let den: f64 = xs.iter().map(|x| x.1).sum::<f64>() / n;
    if !(den > 0.0) {
        return Err(CouplingError::Inconsistent(usize::MAX));
    }
    let ratio = num / den;
    let var = xs
        .iter()
        .map(|&(h, w)| (h - ratio * w).powi(2))
        .sum::<f64>()
        / (n * n * den * den);
    let half = 1.959963984540054 * var.sqrt() * qj;
    let value = qj * ratio;
    Ok((value, ((value - half).max(0.0), (value + half).min(1.0))))
}
