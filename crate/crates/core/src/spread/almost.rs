use super::{check_unit, triangles_at, SpreadError, TriangleMatching};
use crate::graph::{bitset, BitMatrix, Graph};
use crate::hypergraph::Triple;
use crate::rng::RngStream;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `t = ⌈(1-η)n/3⌉`.
pub fn almost_factor_rounds(n: usize, eta: f64) -> usize {
    // the small slack keeps exact products such as (2/3)·9 from rounding up
    ((1.0 - eta) * n as f64 / 3.0 - 1e-9).ceil() as usize
}

/// `(18 / (q³η³n²))^r`, the bound on `P[S ⊆ M]` for `r` given triangles.
pub fn almost_factor_spread_bound(q: f64, eta: f64, n: usize, r: u32) -> f64 {
    (18.0 / (q.powi(3) * eta.powi(3) * (n as f64).powi(2))).powi(r as i32)
}

/// Greedy random almost triangle factor: each round picks a uniform vertex
/// among those of degree at least `q|V_i|/2` in what is left, then a
/// uniform triangle through it, for `⌈(1-η)n/3⌉` rounds.
pub fn sample_almost_factor(g: &Graph, q: f64, eta: f64, seed: u64) -> Result<TriangleMatching, SpreadError> {
    check_unit("q", q, false)?;
    check_unit("eta", eta, true)?;
    let bm = g.bit_matrix();
    let mut active = bitset::full(g.n());
    let mut rng = RngStream::new(seed, "almost-factor").rng();
    let rounds = almost_factor_rounds(g.n(), eta);
    let (triples, stuck) = greedy(&bm, &mut active, q, rounds, &mut rng);
    if let Some((round, reason)) = stuck {
        return Err(SpreadError::Stuck { round, reason });
    }
    Ok(TriangleMatching { n: g.n(), triples })
}

/// Runs up to `rounds` greedy rounds on the vertices in `active`, removing
/// covered vertices from it. Stops early at the first round with no
/// candidate and reports that round (1-based) and why.
pub(crate) fn greedy(
    bm: &BitMatrix,
    active: &mut [u64],
    q: f64,
    rounds: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<Triple>, Option<(usize, String)>) {
    let n = bm.n();
    let mut deg = vec![0usize; n];
    let mut size = 0;
    for v in bitset::and_iter(active, active).collect::<Vec<_>>() {
        deg[v] = bitset::and_count(bm.row(v), active);
        size += 1;
    }
    let mut out = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let cut = q * size as f64;
        let heavy: Vec<usize> = bitset::and_iter(active, active)
            .filter(|&v| 2.0 * deg[v] as f64 >= cut)
            .collect();
        if heavy.is_empty() {
            return (out, Some((round, format!("no vertex has degree ≥ q|V_i|/2 among {size} left"))));
        }
        let v = heavy[rng.gen_range(0..heavy.len())];
        let candidates = triangles_at(bm, v, active);
        if candidates.is_empty() {
            return (out, Some((round, format!("no triangle through vertex {v}"))));
        }
        let (y, z) = candidates[rng.gen_range(0..candidates.len())];
        for x in [v, y, z] {
            bitset::remove(active, x);
        }
        for x in [v, y, z] {
            for w in bitset::and_iter(bm.row(x), active).collect::<Vec<_>>() {
                deg[w] -= 1;
            }
        }
        size -= 3;
        let mut t = [v, y, z];
        t.sort_unstable();
        out.push(t);
    }
    (out, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_gnp;

    #[test]
    fn k9_two_rounds() {
        let g = Graph::complete(9);
        for seed in 0..20 {
            let m = sample_almost_factor(&g, 1.0, 1.0 / 3.0, seed).unwrap();
            assert_eq!(m.len(), 2);
            m.verify(&g).unwrap();
        }
    }

    #[test]
    fn triangle_free_fails_first_round() {
        let g = Graph::cycle(12);
        match sample_almost_factor(&g, 0.1, 0.1, 1) {
            Err(SpreadError::Stuck { round, .. }) => assert_eq!(round, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parameters_checked() {
        let g = Graph::complete(6);
        assert!(matches!(sample_almost_factor(&g, 0.0, 0.5, 1), Err(SpreadError::Param(_))));
        assert!(matches!(sample_almost_factor(&g, 0.5, 1.0, 1), Err(SpreadError::Param(_))));
    }

    #[test]
    fn complete_host_runs_all_rounds() {
        let g = Graph::complete(30);
        let m = sample_almost_factor(&g, 1.0, 0.05, 7).unwrap();
        assert_eq!(m.len(), almost_factor_rounds(30, 0.05));
        m.verify(&g).unwrap();
    }

    #[test]
    fn deterministic_and_valid_on_dense_random_host() {
        let g = gen_gnp(120, 0.7, 5).unwrap();
        let q = g.density();
        let a = sample_almost_factor(&g, q, 0.1, 11).unwrap();
        let b = sample_almost_factor(&g, q, 0.1, 11).unwrap();
        assert_eq!(a, b);
        a.verify(&g).unwrap();
        assert_eq!(a.len(), 36);
        assert!((3 * a.len()) as f64 >= 0.9 * 120.0);
    }

    #[test]
    fn first_round_is_uniform_on_regular_host() {
        // On K6 every vertex is heavy and every triangle equally likely.
        let g = Graph::complete(6);
        let mut counts = std::collections::HashMap::new();
        let trials = 20_000;
        for seed in 0..trials {
            let m = sample_almost_factor(&g, 1.0, 0.5, seed).unwrap();
            *counts.entry(m.triples[0]).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 20);
        let mean = trials as f64 / 20.0;
        let sd = (trials as f64 * 0.05 * 0.95).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - mean).abs() < 4.5 * sd, "{c}");
        }
    }
}
