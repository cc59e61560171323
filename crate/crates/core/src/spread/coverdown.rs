use super::almost::{almost_factor_rounds, greedy};
use super::{check_unit, triangles_at, SpreadError, TriangleMatching};
use crate::graph::{bitset, Graph, VertexSet};
use crate::rng::RngStream;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverBranch {
    /// Two vertices taken from the first part of the reserve.
    Good,
    /// Two vertices taken from the second part of the reserve.
    Bad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverDownConfig {
    /// Edge density of the host.
    pub q: f64,
    pub alpha: f64,
    /// Required relative degree into the reserve.
    pub c: f64,
    /// Slack in the conditioning event on the split of the reserve.
    pub eps: f64,
    pub max_resamples: usize,
}

impl CoverDownConfig {
    pub fn new(q: f64, alpha: f64, c: f64) -> Self {
        CoverDownConfig {
            q,
            alpha,
            c,
            eps: 0.05,
            max_resamples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverDownReport {
    pub matching: TriangleMatching,
    pub domain_size: usize,
    pub reserve_size: usize,
    pub first_part_size: usize,
    /// Whether `|U| = ⌈α²n⌉` for the domain size `n`.
    pub size_formula_holds: bool,
    /// Splits of the reserve drawn until the conditioning event held.
    pub splits_drawn: usize,
    pub greedy_rounds_planned: usize,
    pub greedy_rounds_done: usize,
    /// Why the greedy phase stopped early, if it did.
    pub greedy_stall: Option<String>,
    /// Vertices outside the reserve left by the greedy phase, in the order
    /// they were covered, with the branch used for each.
    pub branches: Vec<(usize, CoverBranch)>,
    pub reserve_used: usize,
    /// `α²|U|`.
    pub budget: f64,
    /// `2α⁴|U|`, recorded but not enforced.
    pub strong_bound: f64,
    pub within_strong_bound: bool,
}

/// Cover-down with the whole host as the domain.
pub fn cover_down(g: &Graph, reserve: &VertexSet, cfg: &CoverDownConfig, seed: u64) -> Result<CoverDownReport, SpreadError> {
    cover_down_within(g, &VertexSet::full(g.n()), reserve, cfg, seed)
}

/// Covers every vertex of `domain ∖ reserve` by triangles of
/// `G[domain]`, using at most `α²|reserve|` reserve vertices.
///
/// The reserve is split by a random permutation into a first part of size
/// `⌈α²|U|⌉` and the rest, redrawn until every domain vertex keeps a
/// `(1-ε)cq` share of neighbours in both parts. A greedy almost factor with
/// `η = α⁷` handles the domain outside the reserve; each vertex it leaves
/// is then put in a triangle with two reserve vertices, from the first part
/// when it still has at least `α⁵qn` neighbours there and from the second
/// part otherwise.
pub fn cover_down_within(
    g: &Graph,
    domain: &VertexSet,
    reserve: &VertexSet,
    cfg: &CoverDownConfig,
    seed: u64,
) -> Result<CoverDownReport, SpreadError> {
    check_unit("q", cfg.q, false)?;
    check_unit("alpha", cfg.alpha, true)?;
    check_unit("c", cfg.c, false)?;
    if !(0.0..1.0).contains(&cfg.eps) {
        return Err(SpreadError::Param(format!("eps must lie in [0, 1), got {}", cfg.eps)));
    }
    if reserve.is_empty() {
        return Err(SpreadError::Param("reserve set U is empty".into()));
    }
    if let Some(v) = domain.iter().find(|&v| v >= g.n()) {
        return Err(SpreadError::Param(format!("vertex {v} out of range")));
    }
    if let Some(v) = reserve.iter().find(|&v| !domain.contains(v)) {
        return Err(SpreadError::Param(format!("reserve vertex {v} outside the domain")));
    }
    let n = domain.len();
    let a2 = cfg.alpha * cfg.alpha;
    let bm = g.bit_matrix();
    let reserve_mask = mask_of(g.n(), reserve.iter());

    let need = cfg.c * cfg.q * reserve.len() as f64;
    for v in domain.iter() {
        let k = bitset::and_count(bm.row(v), &reserve_mask);
        if (k as f64) < need {
            return Err(SpreadError::Precondition {
                vertex: v,
                degree: k,
                required: need,
            });
        }
    }

    let mut rng = RngStream::new(seed, "cover-down").rng();
    let first_size = ((a2 * reserve.len() as f64).ceil() as usize).min(reserve.len());
    let mut order: Vec<usize> = reserve.iter().collect();
    let mut splits_drawn = 0;
    let (mut first, mut second) = loop {
        if splits_drawn == cfg.max_resamples {
            return Err(SpreadError::Conditioning(cfg.max_resamples));
        }
        splits_drawn += 1;
        order.shuffle(&mut rng);
        let first = mask_of(g.n(), order[..first_size].iter().copied());
        let second = mask_of(g.n(), order[first_size..].iter().copied());
        let share = |size: usize| (1.0 - cfg.eps) * cfg.c * cfg.q * size as f64;
        let (s1, s2) = (share(first_size), share(reserve.len() - first_size));
        let holds = domain.iter().all(|v| {
            bitset::and_count(bm.row(v), &first) as f64 >= s1 && bitset::and_count(bm.row(v), &second) as f64 >= s2
        });
        if holds {
            break (first, second);
        }
    };

    let mut outside = mask_of(g.n(), domain.iter().filter(|&v| !reserve.contains(v)));
    let eta = cfg.alpha.powi(7);
    let planned = almost_factor_rounds(bitset::count(&outside), eta);
    let (triples, stall) = greedy(&bm, &mut outside, cfg.q, planned, &mut rng);
    let mut matching = TriangleMatching {
        n: g.n(),
        triples,
    };
    let done = matching.len();

    let good_cut = cfg.alpha.powi(5) * cfg.q * n as f64;
    let mut branches = Vec::new();
    for v in bitset::and_iter(&outside, &outside).collect::<Vec<_>>() {
        let branch = if bitset::and_count(bm.row(v), &first) as f64 >= good_cut {
            CoverBranch::Good
        } else {
            CoverBranch::Bad
        };
        let part = match branch {
            CoverBranch::Good => &mut first,
            CoverBranch::Bad => &mut second,
        };
        let candidates = triangles_at(&bm, v, part);
        if candidates.is_empty() {
            return Err(SpreadError::NoCandidate { vertex: v, branch });
        }
        let (y, z) = candidates[rng.gen_range(0..candidates.len())];
        bitset::remove(part, y);
        bitset::remove(part, z);
        matching.push([v, y, z]);
        branches.push((v, branch));
    }

    let used = 2 * branches.len();
    let budget = a2 * reserve.len() as f64;
    if used as f64 > budget {
        return Err(SpreadError::Budget { used, budget });
    }
    let strong_bound = 2.0 * a2 * a2 * reserve.len() as f64;
    Ok(CoverDownReport {
        matching,
        domain_size: n,
        reserve_size: reserve.len(),
        first_part_size: first_size,
        size_formula_holds: reserve.len() == (a2 * n as f64).ceil() as usize,
        splits_drawn,
        greedy_rounds_planned: planned,
        greedy_rounds_done: done,
        greedy_stall: stall.map(|(round, why)| format!("round {round}: {why}")),
        branches,
        reserve_used: used,
        budget,
        strong_bound,
        within_strong_bound: used as f64 <= strong_bound,
    })
}

fn mask_of(n: usize, vs: impl Iterator<Item = usize>) -> Vec<u64> {
    let mut m = bitset::new(n);
    for v in vs {
        bitset::insert(&mut m, v);
    }
    m
}
