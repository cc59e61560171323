use super::almost::sample_almost_factor;
use super::pipeline::{sample_spread_factor, SpreadConfig};
use super::{SpreadError, TriangleMatching};
use crate::experiments::stats::wilson;
use crate::graph::Graph;
use crate::hypergraph::Triple;
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const MIN_SPREAD_TRIALS: u64 = 10_000;
const CHUNK: usize = 256;
const TOP: usize = 20;

/// A named distribution over triangle matchings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "sampler")]
pub enum Sampler {
    AlmostFactor { q: f64, eta: f64 },
    Pipeline(SpreadConfig),
    /// Always returns the same matching.
    Fixed(TriangleMatching),
}

impl Sampler {
    pub fn sample(&self, g: &Graph, seed: u64) -> Result<TriangleMatching, SpreadError> {
        match self {
            Sampler::AlmostFactor { q, eta } => sample_almost_factor(g, *q, *eta, seed),
            Sampler::Pipeline(cfg) => sample_spread_factor(g, cfg, seed).map(|run| run.factor),
            Sampler::Fixed(m) => Ok(m.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetEstimate {
    pub triangles: Vec<Triple>,
    pub count: u64,
    pub probability: f64,
    pub ci: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub r: usize,
    pub trials: u64,
    /// Samples that produced a matching; probabilities are over these.
    pub successes: u64,
    pub confidence: f64,
    pub q_target: f64,
    /// `q_target^r`.
    pub target: f64,
    pub distinct_sets: usize,
    pub max_probability: f64,
    pub max_ci: (f64, f64),
    pub max_ratio: f64,
    /// Upper confidence limit of the largest probability over the target.
    pub max_ratio_upper: f64,
    /// Most frequent sets, most frequent first.
    pub top: Vec<SetEstimate>,
    /// `(times seen, number of sets seen that often)`, ascending.
    pub histogram: Vec<(u64, u64)>,
}

/// Estimates `max_S P[S ⊆ M]` over sets `S` of `r` triangles observed in
/// `trials` independent samples.
pub fn estimate_spread(
    g: &Graph,
    sampler: &Sampler,
    r: usize,
    trials: u64,
    q_target: f64,
    seed: u64,
) -> Result<SpreadEstimate, SpreadError> {
    if !(r == 1 || r == 2) {
        return Err(SpreadError::Param(format!("set size r must be 1 or 2, got {r}")));
    }
    if trials < MIN_SPREAD_TRIALS {
        return Err(SpreadError::Param(format!("need at least {MIN_SPREAD_TRIALS} trials, got {trials}")));
    }
    let stream = RngStream::new(seed, "spread-estimate");
    let chunks = (trials as usize).div_ceil(CHUNK);
    let parts = crate::par::map_indexed(chunks, |k| {
        let mut counts: HashMap<Vec<Triple>, u64> = HashMap::new();
        let mut ok = 0u64;
        let hi = ((k + 1) * CHUNK).min(trials as usize);
        for t in k * CHUNK..hi {
            let Ok(m) = sampler.sample(g, stream.at(t as u64).derive_seed()) else {
                continue;
            };
            ok += 1;
            let mut ts = m.triples;
            ts.sort_unstable();
            if r == 1 {
                for t in ts {
                    *counts.entry(vec![t]).or_insert(0) += 1;
                }
            } else {
                for i in 0..ts.len() {
                    for j in i + 1..ts.len() {
                        *counts.entry(vec![ts[i], ts[j]]).or_insert(0) += 1;
                    }
                }
            }
        }
        (ok, counts)
    });
    let mut successes = 0;
    let mut counts: HashMap<Vec<Triple>, u64> = HashMap::new();
    for (ok, part) in parts {
        successes += ok;
        for (set, c) in part {
            *counts.entry(set).or_insert(0) += c;
        }
    }
    let mut sets: Vec<(Vec<Triple>, u64)> = counts.into_iter().collect();
    sets.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut hist: HashMap<u64, u64> = HashMap::new();
    for (_, c) in &sets {
        *hist.entry(*c).or_insert(0) += 1;
    }
    let mut histogram: Vec<(u64, u64)> = hist.into_iter().collect();
    histogram.sort_unstable();

    let prob = |c: u64| if successes > 0 { c as f64 / successes as f64 } else { 0.0 };
    let top: Vec<SetEstimate> = sets
        .iter()
        .take(TOP)
        .map(|(s, c)| SetEstimate {
            triangles: s.clone(),
            count: *c,
            probability: prob(*c),
            ci: wilson(*c, successes),
        })
        .collect();
    let max_count = sets.first().map_or(0, |s| s.1);
    let max_ci = wilson(max_count, successes);
    let target = q_target.powi(r as i32);
    Ok(SpreadEstimate {
        r,
        trials,
        successes,
        confidence: 0.95,
        q_target,
        target,
        distinct_sets: sets.len(),
        max_probability: prob(max_count),
        max_ci,
        max_ratio: prob(max_count) / target,
        max_ratio_upper: max_ci.1 / target,
        top,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_sampler_is_maximally_concentrated() {
        let g = Graph::complete(6);
        let mut m = TriangleMatching::new(6);
        m.push([0, 1, 2]);
        m.push([3, 4, 5]);
        let e = estimate_spread(&g, &Sampler::Fixed(m), 1, 10_000, 0.1, 1).unwrap();
        assert_eq!(e.max_probability, 1.0);
        assert_eq!(e.distinct_sets, 2);
        assert!((e.max_ratio - 10.0).abs() < 1e-12);
        assert_eq!(e.histogram, vec![(10_000, 2)]);
    }

    #[test]
    fn preconditions() {
        let g = Graph::complete(6);
        let s = Sampler::AlmostFactor { q: 1.0, eta: 0.5 };
        assert!(estimate_spread(&g, &s, 3, 10_000, 0.1, 1).is_err());
        assert!(estimate_spread(&g, &s, 1, 100, 0.1, 1).is_err());
    }

    #[test]
    fn k6_first_triangle_uniform() {
        // one round on K6 picks each of the 20 triangles with probability 1/20
        let g = Graph::complete(6);
        let s = Sampler::AlmostFactor { q: 1.0, eta: 0.5 };
        let e = estimate_spread(&g, &s, 1, 20_000, 0.05, 3).unwrap();
        assert_eq!(e.distinct_sets, 20);
        assert!(e.max_ci.0 <= 0.05);
        assert!(e.max_ratio < 1.25);
    }

    #[test]
    fn pairs_counted() {
        let g = Graph::complete(9);
        let s = Sampler::AlmostFactor { q: 1.0, eta: 0.01 };
        let e = estimate_spread(&g, &s, 2, 10_000, 0.1, 3).unwrap();
        // three triangles per sample give three pairs
        let total: u64 = e.histogram.iter().map(|(c, k)| c * k).sum();
        assert_eq!(total, 3 * 10_000);
    }
}
