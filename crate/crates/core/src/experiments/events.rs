//! Sampled checks of the three events behind robust expansion of `G_p`:
//! a minimum degree of `δ ln n`, many edges between large disjoint pairs,
//! and sparsity of sets of intermediate size.

use super::stats::wilson;
use super::ExperimentError;
use crate::generators::{sparsify, SparsifyParams};
use crate::graph::{bitset, BitMatrix, Graph};
use crate::rng::RngStream;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    /// Expansion factor `C`.
    pub c: f64,
    pub delta: f64,
    /// Relative shortfall tolerated between large pairs.
    pub eps: f64,
    /// Random sets drawn per size and trial.
    pub sets_per_trial: usize,
}

impl Default for EventParams {
    fn default() -> Self {
        EventParams {
            c: 2.0,
            delta: 0.1,
            eps: 0.25,
            sets_per_trial: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFrequency {
    pub event: String,
    pub trials: u64,
    pub failures: u64,
    pub frequency: f64,
    pub ci: (f64, f64),
}

impl EventFrequency {
    fn new(event: impl Into<String>, trials: u64, failures: u64) -> Self {
        EventFrequency {
            event: event.into(),
            trials,
            failures,
            frequency: if trials > 0 { failures as f64 / trials as f64 } else { 0.0 },
            ci: wilson(failures, trials),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventsReport {
    pub n: usize,
    pub p: f64,
    pub params: EventParams,
    /// `δ ln n`.
    pub degree_threshold: f64,
    /// `⌈n / 2C²⌉`.
    pub pair_size: usize,
    /// Set sizes drawn for the sparsity event, smallest to largest.
    pub small_sizes: Vec<usize>,
    /// `δ ln n / 2C`, the allowed edges per vertex of a small set.
    pub small_density: f64,
    /// Minimum degree, large pairs, small sets.
    pub events: Vec<EventFrequency>,
    /// The small-set event split by set size.
    pub small_by_size: Vec<EventFrequency>,
}

impl EventsReport {
    pub fn event(&self, name: &str) -> Option<&EventFrequency> {
        self.events.iter().find(|e| e.event == name)
    }
}

pub const MIN_DEGREE: &str = "min-degree";
pub const LARGE_PAIRS: &str = "large-pairs";
pub const SMALL_SETS: &str = "small-sets";

struct TrialOutcome {
    min_degree: bool,
    pairs: bool,
    small: Vec<bool>,
}

/// Failure frequency of each event over `trials` samples of `G_p`. The
/// pair and small-set events are checked on random sets of the critical
/// sizes rather than on all sets.
pub fn robust_expander_events(
    g: &Graph,
    p: f64,
    params: &EventParams,
    trials: u64,
    seed: u64,
) -> Result<EventsReport, ExperimentError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ExperimentError::Param(format!("p = {p} not in [0, 1]")));
    }
    if !(params.c > 0.0 && params.delta > 0.0 && (0.0..1.0).contains(&params.eps)) {
        return Err(ExperimentError::Param("need C > 0, δ > 0 and 0 ≤ ε < 1".into()));
    }
    let n = g.n();
    if n < 2 {
        return Err(ExperimentError::Param("need at least two vertices".into()));
    }
    let ln = (n as f64).ln();
    let degree_threshold = params.delta * ln;
    let pair_size = ((n as f64 / (2.0 * params.c * params.c)).ceil() as usize).clamp(1, n / 2);
    let small_density = degree_threshold / (2.0 * params.c);
    let lo = (small_density.ceil() as usize).max(1);
    let hi = (((params.c + 1.0) * n as f64 / ln).floor() as usize).clamp(lo, n);
    let mut small_sizes = vec![lo, ((lo * hi) as f64).sqrt().round() as usize, hi];
    small_sizes.dedup();

    let bg = g.bit_matrix();
    let stream = RngStream::new(seed, "expander-events");
    let outcomes = crate::par::map_indexed(trials as usize, |t| {
        let trial = stream.at(t as u64);
        let h = sparsify(
            g,
            SparsifyParams {
                p,
                seed: trial.derive_seed(),
            },
        );
        let bh = h.bit_matrix();
        let mut rng = trial.child("sets").rng();
        let mut order: Vec<usize> = (0..n).collect();

        let min_degree = (0..n).any(|v| (h.degree(v) as f64) < degree_threshold);
        let mut pairs = false;
        for _ in 0..params.sets_per_trial {
            let (a, b) = draw(&mut order, &mut rng, 2 * pair_size).split_at(pair_size);
            let mask = mask_of(n, b);
            let eg = cross_edges(&bg, a, &mask);
            let eh = cross_edges(&bh, a, &mask);
            pairs |= eg > 0 && eh as f64 <= (1.0 - params.eps) * p * eg as f64;
        }
        let small = small_sizes
            .iter()
            .map(|&s| {
                (0..params.sets_per_trial).any(|_| {
                    let y = draw(&mut order, &mut rng, s);
                    let inside = cross_edges(&bh, y, &mask_of(n, y)) / 2;
                    inside as f64 > small_density * s as f64
                })
            })
            .collect();
        TrialOutcome { min_degree, pairs, small }
    });

    let count = |f: &dyn Fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    let events = vec![
        EventFrequency::new(MIN_DEGREE, trials, count(&|o| o.min_degree)),
        EventFrequency::new(LARGE_PAIRS, trials, count(&|o| o.pairs)),
        EventFrequency::new(SMALL_SETS, trials, count(&|o| o.small.iter().any(|&b| b))),
    ];
    let small_by_size = small_sizes
        .iter()
        .enumerate()
        .map(|(i, s)| EventFrequency::new(format!("{SMALL_SETS}-{s}"), trials, count(&|o| o.small[i])))
        .collect();
    Ok(EventsReport {
        n,
        p,
        params: params.clone(),
        degree_threshold,
        pair_size,
        small_sizes,
        small_density,
        events,
        small_by_size,
    })
}

fn draw<'a>(order: &'a mut [usize], rng: &mut rand_chacha::ChaCha8Rng, k: usize) -> &'a [usize] {
    order.partial_shuffle(rng, k).0
}

fn mask_of(n: usize, vs: &[usize]) -> Vec<u64> {
    let mut m = bitset::new(n);
    for &v in vs {
        bitset::insert(&mut m, v);
    }
    m
}

/// Ordered pairs `(a, b)` with `a ∈ from`, `b ∈ to` and `ab` an edge.
fn cross_edges(bm: &BitMatrix, from: &[usize], to: &[u64]) -> usize {
    from.iter().map(|&v| bitset::and_count(bm.row(v), to)).sum()
}
