//! Verifiers for edge-distribution inequalities over pairs of vertex sets.
//!
//! Exhaustive mode does not literally loop over all `(S, T)` pairs. For a
//! fixed `S` and size `t`, `e(S, T)` ranges over sums of `t` values of
//! `w(v) = d_S(v)`, and every inequality checked here has a slack that is
//! convex in `e`. The worst `T` of each size is therefore the `t` vertices of
//! largest or smallest `w`, so one sort per `S` covers every pair.

use super::{Graph, VertexSet};
use crate::rng::RngStream;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest `n` (or bipartite side) accepted by exhaustive verification.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 16;

/// Violations up to this size are treated as floating-point noise by
/// [`MixingReport::holds`].
const HOLD_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MixingError {
    #[error("exhaustive verification needs at most {cap} vertices per side, got {n}")]
    ExhaustiveCap { n: usize, cap: usize },
    #[error("vertex {vertex} has degree {degree} outside [{lo}, {hi}]")]
    DegreeOutOfBand {
        vertex: usize,
        degree: usize,
        lo: f64,
        hi: f64,
    },
    #[error("parts must partition the vertex set: {0}")]
    BadParts(String),
}

/// Which set pairs a verifier examines.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSelection {
    /// Every pair of nonempty sets; `n` must not exceed `cap`.
    Exhaustive { cap: usize },
    /// Every pair of nonempty sets of size at most `max_size`.
    UpToSize(usize),
    /// `count` pairs, each set drawn with a uniform size and then uniformly
    /// among sets of that size.
    Sampled { count: usize, seed: u64 },
}

impl PairSelection {
    pub fn exhaustive() -> Self {
        PairSelection::Exhaustive {
            cap: DEFAULT_EXHAUSTIVE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub checked_pairs: u64,
    /// Largest `lhs - rhs` seen; positive means some inequality failed.
    pub max_violation: f64,
    pub worst_pair: Option<(VertexSet, VertexSet)>,
}

impl MixingReport {
    pub fn holds(&self) -> bool {
        self.max_violation <= HOLD_TOL
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BijumbledReport {
    pub q: f64,
    pub beta: f64,
    #[serde(flatten)]
    pub report: MixingReport,
}

impl BijumbledReport {
    pub fn holds(&self) -> bool {
        self.report.holds()
    }
}

/// `|e(S,T) - (d/n)|S||T|| <= λ sqrt(|S||T|)`.
pub fn check_mixing(
    g: &Graph,
    d: f64,
    lambda: f64,
    pairs: &PairSelection,
) -> Result<MixingReport, MixingError> {
    let n = g.n() as f64;
    let all: Vec<usize> = (0..g.n()).collect();
    scan(g, &all, &all, pairs, |e, s, t| {
        let st = (s * t) as f64;
        (e as f64 - d / n * st).abs() - lambda * st.sqrt()
    })
}

/// Two-sided bound for graphs with all degrees in `(1 ± γ)d`:
/// `(1-γ)²d|S||T|/((1+γ)n) - ε <= e(S,T) <= (1+γ)²d|S||T|/((1-γ)n) + ε`
/// with `ε = ((1+γ)/(1-γ)) λ sqrt(|S||T|)`.
pub fn check_almost_mixing(
    g: &Graph,
    d: f64,
    gamma: f64,
    lambda: f64,
    pairs: &PairSelection,
) -> Result<MixingReport, MixingError> {
    let lo = (1.0 - gamma) * d;
    let hi = (1.0 + gamma) * d;
    for v in 0..g.n() {
        let deg = g.degree(v) as f64;
        if deg < lo - HOLD_TOL || deg > hi + HOLD_TOL {
            return Err(MixingError::DegreeOutOfBand {
                vertex: v,
                degree: g.degree(v),
                lo,
                hi,
            });
        }
    }
    let n = g.n() as f64;
    let all: Vec<usize> = (0..g.n()).collect();
    let ratio = (1.0 + gamma) / (1.0 - gamma);
    scan(g, &all, &all, pairs, |e, s, t| {
        let st = (s * t) as f64;
        let eps = ratio * lambda * st.sqrt();
        let lower = (1.0 - gamma).powi(2) * d * st / ((1.0 + gamma) * n) - eps;
        let upper = (1.0 + gamma).powi(2) * d * st / ((1.0 - gamma) * n) + eps;
        let e = e as f64;
        (lower - e).max(e - upper)
    })
}

/// `|e(X,Y) - q|X||Y|| <= β sqrt(|X||Y|)` over all `X, Y ⊆ V`.
pub fn check_bijumbled(
    g: &Graph,
    q: f64,
    beta: f64,
    pairs: &PairSelection,
) -> Result<BijumbledReport, MixingError> {
    let all: Vec<usize> = (0..g.n()).collect();
    let report = scan(g, &all, &all, pairs, bijumbled_slack(q, beta))?;
    Ok(BijumbledReport { q, beta, report })
}

/// Bipartite variant: `X ⊆ A`, `Y ⊆ B` only.
pub fn check_bijumbled_bipartite(
    g: &Graph,
    a: &VertexSet,
    b: &VertexSet,
    q: f64,
    beta: f64,
    pairs: &PairSelection,
) -> Result<BijumbledReport, MixingError> {
    if a.len() + b.len() != g.n() || !a.is_disjoint(b) {
        return Err(MixingError::BadParts(format!(
            "|A| = {}, |B| = {}, n = {}",
            a.len(),
            b.len(),
            g.n()
        )));
    }
    if a.len() != b.len() {
        return Err(MixingError::BadParts("parts must have equal size".into()));
    }
    let report = scan(g, a.as_slice(), b.as_slice(), pairs, bijumbled_slack(q, beta))?;
    Ok(BijumbledReport { q, beta, report })
}

fn bijumbled_slack(q: f64, beta: f64) -> impl Fn(usize, usize, usize) -> f64 {
    move |e, s, t| {
        let st = (s * t) as f64;
        (e as f64 - q * st).abs() - beta * st.sqrt()
    }
}

struct Worst {
    violation: f64,
    pair: Option<(Vec<usize>, Vec<usize>)>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            violation: f64::NEG_INFINITY,
            pair: None,
        }
    }

    fn offer(&mut self, violation: f64, make: impl FnOnce() -> (Vec<usize>, Vec<usize>)) {
        if violation > self.violation {
            self.violation = violation;
            self.pair = Some(make());
        }
    }
}

/// Runs `slack(e, |S|, |T|)` over the selected pairs with `S ⊆ left`,
/// `T ⊆ right`. `slack` must be convex in `e`.
fn scan<F>(
    g: &Graph,
    left: &[usize],
    right: &[usize],
    pairs: &PairSelection,
    slack: F,
) -> Result<MixingReport, MixingError>
where
    F: Fn(usize, usize, usize) -> f64,
{
    let mut worst = Worst::new();
    let mut checked: u64 = 0;
    match *pairs {
        PairSelection::Exhaustive { cap } => {
            let side = left.len().max(right.len());
            if side > cap || side > 30 {
                return Err(MixingError::ExhaustiveCap { n: side, cap });
            }
            for mask in 1u64..(1u64 << left.len()) {
                let s: Vec<usize> = (0..left.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| left[i])
                    .collect();
                checked += extremes_for(g, &s, right, right.len(), &slack, &mut worst);
            }
        }
        PairSelection::UpToSize(max_size) => {
            for size in 1..=max_size.min(left.len()) {
                for_each_combination(left.len(), size, |idx| {
                    let s: Vec<usize> = idx.iter().map(|&i| left[i]).collect();
                    checked += extremes_for(g, &s, right, max_size, &slack, &mut worst);
                });
            }
        }
        PairSelection::Sampled { count, seed } => {
            let stream = RngStream::new(seed, "mixing-pairs");
            let mut mask = vec![false; g.n()];
            for i in 0..count {
                let mut rng = stream.at(i as u64).rng();
                let s = random_subset(&mut rng, left);
                let t = random_subset(&mut rng, right);
                if s.is_empty() || t.is_empty() {
                    continue;
                }
                for &v in &t {
                    mask[v] = true;
                }
                let e: usize = s.iter().map(|&u| g.degree_into(u, &mask)).sum();
                for &v in &t {
                    mask[v] = false;
                }
                checked += 1;
                let viol = slack(e, s.len(), t.len());
                worst.offer(viol, || (s.clone(), t.clone()));
            }
        }
    }
    Ok(finish(checked, worst))
}

fn finish(checked: u64, worst: Worst) -> MixingReport {
    if checked == 0 {
        return MixingReport {
            checked_pairs: 0,
            max_violation: 0.0,
            worst_pair: None,
        };
    }
    MixingReport {
        checked_pairs: checked,
        max_violation: worst.violation,
        worst_pair: worst
            .pair
            .map(|(s, t)| (VertexSet::from_unsorted(s), VertexSet::from_unsorted(t))),
    }
}

/// For fixed `S`, checks the extreme `T ⊆ right` of every size up to
/// `max_t`; returns how many pairs that covers.
fn extremes_for<F>(
    g: &Graph,
    s: &[usize],
    right: &[usize],
    max_t: usize,
    slack: &F,
    worst: &mut Worst,
) -> u64
where
    F: Fn(usize, usize, usize) -> f64,
{
    let mut in_s = vec![false; g.n()];
    for &u in s {
        in_s[u] = true;
    }
    let mut w: Vec<(usize, usize)> = right.iter().map(|&v| (g.degree_into(v, &in_s), v)).collect();
    w.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let r = w.len();
    let max_t = max_t.min(r);
    let mut top = 0;
    let mut bottom = 0;
    let mut covered = 0u64;
    for t in 1..=max_t {
        top += w[t - 1].0;
        bottom += w[r - t].0;
        let v_top = slack(top, s.len(), t);
        let v_bottom = slack(bottom, s.len(), t);
        worst.offer(v_top, || (s.to_vec(), w[..t].iter().map(|x| x.1).collect()));
        worst.offer(v_bottom, || (s.to_vec(), w[r - t..].iter().map(|x| x.1).collect()));
        covered += binomial(r as u64, t as u64);
    }
    covered
}

fn random_subset<R: Rng>(rng: &mut R, universe: &[usize]) -> Vec<usize> {
    if universe.is_empty() {
        return Vec::new();
    }
    let size = rng.gen_range(1..=universe.len());
    let mut picked: Vec<usize> = universe.choose_multiple(rng, size).copied().collect();
    picked.sort_unstable();
    picked
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc.min(u128::from(u64::MAX)) as u64
}

/// Calls `f` with each `k`-subset of `0..n` as sorted indices.
pub(crate) fn for_each_combination<F: FnMut(&[usize])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
