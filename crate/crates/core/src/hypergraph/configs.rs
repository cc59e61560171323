//! Dense local configurations in a triple hypergraph: high-degree vertices,
//! five linear 3-cycles sharing a hyperedge, and the three-edge pattern
//! `{w1w2w3, w3w4w5, w2w4w5}`.

use super::{HypergraphError, Triple, TripleHypergraph};
use crate::graph::Graph;
use crate::structure::max_matching;
use serde::{Deserialize, Serialize};

/// Node budget for the existence and counting searches.
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// Number of linear 3-cycles in one forbidden configuration.
const CYCLES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConfigKind {
    F,
    #[serde(rename = "F'")]
    FPrime,
    B1,
}

/// Hyperedge ids refer to the hypergraph the witness was found in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigWitness {
    pub kind: ConfigKind,
    /// The shared hyperedge of an `F` witness.
    pub common_hyperedge: Option<usize>,
    /// `F`: five `[common, f, g]` cycles. `F'`: one entry in pattern order.
    pub cycles: Vec<[usize; 3]>,
    /// `B1`: the high-degree vertex.
    pub vertex: Option<usize>,
    /// `B1`: the degree threshold that was met.
    pub threshold: Option<f64>,
}

/// `2 ln n`.
pub fn b1_threshold(n: usize) -> f64 {
    2.0 * (n.max(1) as f64).ln()
}

/// A vertex of hyperdegree at least `threshold`, the smallest such id.
pub fn detect_b1(h: &TripleHypergraph, threshold: f64) -> Option<ConfigWitness> {
    (0..h.n())
        .find(|&v| h.degree(v) as f64 >= threshold)
        .map(|v| ConfigWitness {
            kind: ConfigKind::B1,
            common_hyperedge: None,
            cycles: Vec::new(),
            vertex: Some(v),
            threshold: Some(threshold),
        })
}

fn shared(a: &Triple, b: &Triple) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

fn common_vertex(a: &Triple, b: &Triple) -> Option<usize> {
    a.iter().copied().find(|x| b.contains(x))
}

/// Linear 3-cycles `{id, f, g}` attached at `v1, v2 ∈ h_id`: `f ∩ h = {v2}`,
/// `g ∩ h = {v1}` and `|f ∩ g| = 1`. Returned as `(f, g)`.
pub fn f_cycles_at(
    h: &TripleHypergraph,
    id: usize,
    v1: usize,
    v2: usize,
) -> Result<Vec<(usize, usize)>, HypergraphError> {
    let t = h.triple(id)?;
    if v1 == v2 || !t.contains(&v1) || !t.contains(&v2) {
        return Err(HypergraphError::InvalidId(id));
    }
    let meets_once = |x: usize| -> Vec<usize> {
        h.incident(x)
            .iter()
            .copied()
            .filter(|&e| shared(&h.triples()[e], &t) == 1)
            .collect()
    };
    let fs = meets_once(v2);
    let gs = meets_once(v1);
    let mut out = Vec::new();
    for &f in &fs {
        let tf = h.triples()[f];
        for &g in &gs {
            if shared(&tf, &h.triples()[g]) == 1 {
                out.push((f, g));
            }
        }
    }
    Ok(out)
}

fn pairs_of(t: &Triple) -> [(usize, usize); 3] {
    [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])]
}

/// Every unordered pair `{f, g}` closing a linear 3-cycle with `h_id`,
/// reported as `(min, max)` in increasing order.
pub fn find_linear_3cycles_through(
    h: &TripleHypergraph,
    id: usize,
) -> Result<Vec<(usize, usize)>, HypergraphError> {
    let t = h.triple(id)?;
    let mut out = Vec::new();
    for (a, b) in pairs_of(&t) {
        for (f, g) in f_cycles_at(h, id, a, b)? {
            out.push((f.min(g), f.max(g)));
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Candidate cycles grouped by the attachment pair, skipping groups too
/// small to hold five cycles.
fn candidate_groups(
    h: &TripleHypergraph,
    id: usize,
    work: &mut u64,
    budget: u64,
) -> Result<Vec<Vec<(usize, usize)>>, HypergraphError> {
    let t = h.triples()[id];
    let mut groups = Vec::new();
    for (a, b) in pairs_of(&t) {
        let cands = f_cycles_at(h, id, a, b)?;
        *work += cands.len() as u64 + 1;
        if *work > budget {
            return Err(HypergraphError::Budget(budget));
        }
        // f and g attach at different vertices of h, so each cycle uses
        // two new hyperedges; five disjoint ones need at least five of each
        let mut fs: Vec<usize> = cands.iter().map(|c| c.0).collect();
        let mut gs: Vec<usize> = cands.iter().map(|c| c.1).collect();
        fs.sort_unstable();
        fs.dedup();
        gs.sort_unstable();
        gs.dedup();
        if fs.len() >= CYCLES && gs.len() >= CYCLES {
            groups.push(cands);
        }
    }
    Ok(groups)
}

/// A hyperedge with five linear 3-cycles through it, all attached at the
/// same two vertices, whose ten other hyperedges are distinct.
///
/// Choosing cycles with disjoint non-shared hyperedges is a matching
/// problem on the graph whose vertices are hyperedge ids and whose edges
/// are the candidate cycles, so the existence test per attachment pair is
/// a maximum matching. `Budget` means the candidate lists grew past
/// `budget` entries before a decision was reached; it is not a "none".
pub fn detect_f_config(
    h: &TripleHypergraph,
    budget: u64,
) -> Result<Option<ConfigWitness>, HypergraphError> {
    if h.len() < 2 * CYCLES + 1 {
        return Ok(None);
    }
    let mut work = 0u64;
    for id in 0..h.len() {
        for cands in candidate_groups(h, id, &mut work, budget)? {
            let mut ids: Vec<usize> = cands.iter().flat_map(|&(f, g)| [f, g]).collect();
            ids.sort_unstable();
            ids.dedup();
            let local = |x: usize| ids.binary_search(&x).unwrap();
            let edges: Vec<(usize, usize)> = cands.iter().map(|&(f, g)| (local(f), local(g))).collect();
            let graph = Graph::new(ids.len(), &edges).expect("candidate cycles are distinct pairs");
            let m = max_matching(&graph);
            if m.size() >= CYCLES {
                let cycles = m
                    .edges
                    .iter()
                    .take(CYCLES)
                    .map(|&(x, y)| {
                        let (a, b) = (ids[x], ids[y]);
                        // restore (f, g) orientation
                        if cands.contains(&(a, b)) {
                            [id, a, b]
                        } else {
                            [id, b, a]
                        }
                    })
                    .collect();
                return Ok(Some(ConfigWitness {
                    kind: ConfigKind::F,
                    common_hyperedge: Some(id),
                    cycles,
                    vertex: None,
                    threshold: None,
                }));
            }
        }
    }
    Ok(None)
}

/// Ordered count of forbidden configurations: a common hyperedge with an
/// oriented attachment pair `(v1, v2)`, times an ordered 5-tuple of
/// cycles. Each unordered copy on a given attachment pair is counted
/// `2 · 5!` times.
pub fn count_f_configs(h: &TripleHypergraph, budget: u64) -> Result<u64, HypergraphError> {
    if h.len() < 2 * CYCLES + 1 {
        return Ok(0);
    }
    let mut work = 0u64;
    let mut sets = 0u64;
    for id in 0..h.len() {
        for cands in candidate_groups(h, id, &mut work, budget)? {
            let mut used = vec![false; h.len()];
            sets += count_packings(&cands, 0, CYCLES, &mut used, &mut work, budget)?;
        }
    }
    Ok(sets * 2 * 120)
}

fn count_packings(
    cands: &[(usize, usize)],
    start: usize,
    left: usize,
    used: &mut [bool],
    work: &mut u64,
    budget: u64,
) -> Result<u64, HypergraphError> {
    if left == 0 {
        return Ok(1);
    }
    let mut total = 0;
    for i in start..cands.len() {
        if cands.len() - i < left {
            break;
        }
        let (f, g) = cands[i];
        if used[f] || used[g] {
            continue;
        }
        *work += 1;
        if *work > budget {
            return Err(HypergraphError::Budget(budget));
        }
        used[f] = true;
        used[g] = true;
        total += count_packings(cands, i + 1, left - 1, used, work, budget)?;
        used[f] = false;
        used[g] = false;
    }
    Ok(total)
}

/// Three hyperedges `w1w2w3, w3w4w5, w2w4w5` on five vertices. Scans pairs
/// sharing exactly two vertices, then looks for the closing hyperedge.
pub fn detect_f_prime(h: &TripleHypergraph) -> Option<ConfigWitness> {
    let t = h.triples();
    let through = |x: usize, y: usize| -> Vec<usize> {
        h.incident(x)
            .iter()
            .copied()
            .filter(|&e| t[e].contains(&y))
            .collect()
    };
    for e2 in 0..t.len() {
        for (a, b) in pairs_of(&t[e2]) {
            for e3 in through(a, b) {
                if e3 == e2 {
                    continue;
                }
                let w3 = t[e2].iter().copied().find(|&x| x != a && x != b).unwrap();
                let w2 = t[e3].iter().copied().find(|&x| x != a && x != b).unwrap();
                let closing = through(w2, w3)
                    .into_iter()
                    .find(|&e1| t[e1].iter().all(|&x| x != a && x != b));
                if let Some(e1) = closing {
                    return Some(ConfigWitness {
                        kind: ConfigKind::FPrime,
                        common_hyperedge: None,
                        cycles: vec![[e1, e2, e3]],
                        vertex: None,
                        threshold: None,
                    });
                }
            }
        }
    }
    None
}

/// Re-checks a witness from the raw triples.
pub fn verify_witness(h: &TripleHypergraph, w: &ConfigWitness) -> bool {
    let get = |id: usize| h.triples().get(id).copied();
    match w.kind {
        ConfigKind::B1 => match (w.vertex, w.threshold) {
            (Some(v), Some(th)) if v < h.n() => {
                h.triples().iter().filter(|t| t.contains(&v)).count() as f64 >= th
            }
            _ => false,
        },
        ConfigKind::FPrime => {
            let [[i1, i2, i3]] = w.cycles[..] else { return false };
            let (Some(e1), Some(e2), Some(e3)) = (get(i1), get(i2), get(i3)) else {
                return false;
            };
            matches_f_prime(&[e1, e2, e3])
        }
        ConfigKind::F => {
            let Some(c) = w.common_hyperedge else { return false };
            let Some(common) = get(c) else { return false };
            if w.cycles.len() != CYCLES {
                return false;
            }
            let mut others = Vec::new();
            let mut attach = None;
            for &[hc, f, g] in &w.cycles {
                let (Some(tf), Some(tg)) = (get(f), get(g)) else { return false };
                if hc != c || !is_linear_cycle(&common, &tf, &tg) {
                    return false;
                }
                let mut at = [common_vertex(&common, &tf).unwrap(), common_vertex(&common, &tg).unwrap()];
                at.sort_unstable();
                if *attach.get_or_insert(at) != at {
                    return false;
                }
                others.extend([f, g]);
            }
            others.sort_unstable();
            others.dedup();
            others.len() == 2 * CYCLES && !others.contains(&c)
        }
    }
}

/// Pairwise single intersections at three distinct vertices.
fn is_linear_cycle(a: &Triple, b: &Triple, c: &Triple) -> bool {
    if shared(a, b) != 1 || shared(b, c) != 1 || shared(a, c) != 1 {
        return false;
    }
    let x = common_vertex(a, b);
    let y = common_vertex(b, c);
    let z = common_vertex(a, c);
    x != y && y != z && x != z
}

/// Tries every labelling of the five-vertex union against the pattern.
fn matches_f_prime(es: &[Triple; 3]) -> bool {
    let mut verts: Vec<usize> = es.iter().flatten().copied().collect();
    verts.sort_unstable();
    verts.dedup();
    if verts.len() != 5 {
        return false;
    }
    let mut target: Vec<Triple> = es.to_vec();
    target.sort_unstable();
    if target.windows(2).any(|p| p[0] == p[1]) {
        return false;
    }
    let mut perm = [0usize, 1, 2, 3, 4];
    loop {
        let w = |i: usize| verts[perm[i]];
        let mut pattern: Vec<Triple> = [[0, 1, 2], [2, 3, 4], [1, 3, 4]]
            .iter()
            .map(|p| {
                let mut t = [w(p[0]), w(p[1]), w(p[2])];
                t.sort_unstable();
                t
            })
            .collect();
        pattern.sort_unstable();
        if pattern == target {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{build_triangle_hypergraph, sparsify_hypergraph};
    use proptest::prelude::*;

    fn hg(n: usize, ts: &[Triple]) -> TripleHypergraph {
        TripleHypergraph::new(n, ts.to_vec()).unwrap()
    }

    /// Common hyperedge {0,1,2} attached at 0 and 1, five cycles on fresh
    /// vertices: f_k = {1, a, b}, g_k = {0, b, c}.
    fn one_f_member() -> TripleHypergraph {
        let mut ts = vec![[0, 1, 2]];
        for k in 0..5 {
            let (a, b, c) = (3 + 3 * k, 4 + 3 * k, 5 + 3 * k);
            ts.push([1, a, b]);
            ts.push([0, b, c]);
        }
        hg(18, &ts)
    }

    fn literal_linear_cycles(h: &TripleHypergraph, id: usize) -> Vec<(usize, usize)> {
        let t = h.triples();
        let mut out = Vec::new();
        for f in 0..t.len() {
            for g in f + 1..t.len() {
                if f == id || g == id {
                    continue;
                }
                let (a, b, c) = (t[id], t[f], t[g]);
                let mut union: Vec<usize> = a.iter().chain(&b).chain(&c).copied().collect();
                union.sort_unstable();
                union.dedup();
                if shared(&a, &b) == 1
                    && shared(&a, &c) == 1
                    && shared(&b, &c) == 1
                    && union.len() == 6
                {
                    out.push((f, g));
                }
            }
        }
        out
    }

    /// Literal nested loops over the common hyperedge, its orientation and
    /// five ordered cycles drawn from all ordered hyperedge pairs.
    #[allow(clippy::needless_range_loop)]
    fn literal_f_count(h: &TripleHypergraph) -> u64 {
        let t = h.triples();
        let m = t.len();
        let cycle_ok = |c: usize, v1: usize, v2: usize, f: usize, g: usize| {
            f != c
                && g != c
                && f != g
                && is_linear_cycle(&t[c], &t[f], &t[g])
                && common_vertex(&t[c], &t[f]) == Some(v2)
                && common_vertex(&t[c], &t[g]) == Some(v1)
        };
        let mut count = 0u64;
        for c in 0..m {
            for &v1 in &t[c] {
                for &v2 in &t[c] {
                    if v1 == v2 {
                        continue;
                    }
                    let all: Vec<(usize, usize)> = (0..m)
                        .flat_map(|f| (0..m).map(move |g| (f, g)))
                        .filter(|&(f, g)| cycle_ok(c, v1, v2, f, g))
                        .collect();
                    for c1 in &all {
                        for c2 in &all {
                            for c3 in &all {
                                for c4 in &all {
                                    for c5 in &all {
                                        let mut ids =
                                            [c1.0, c1.1, c2.0, c2.1, c3.0, c3.1, c4.0, c4.1, c5.0, c5.1];
                                        ids.sort_unstable();
                                        if ids.windows(2).all(|w| w[0] != w[1]) {
                                            count += 1;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        count
    }

    fn literal_f_prime(h: &TripleHypergraph) -> bool {
        let t = h.triples();
        for a in 0..t.len() {
            for b in 0..t.len() {
                for c in 0..t.len() {
                    if a != b && b != c && a != c && matches_f_prime(&[t[a], t[b], t[c]]) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn b1_examples() {
        assert!(detect_b1(&TripleHypergraph::empty(5), b1_threshold(5)).is_none());
        let k4 = build_triangle_hypergraph(&Graph::complete(4));
        let w = detect_b1(&k4, b1_threshold(4)).unwrap();
        assert_eq!(w.vertex, Some(0));
        assert!(verify_witness(&k4, &w));
        assert!(detect_b1(&hg(30, &[[0, 1, 2]]), b1_threshold(30)).is_none());
    }

    #[test]
    fn linear_cycle_examples() {
        let one = hg(6, &[[0, 1, 2], [1, 3, 4], [0, 4, 5]]);
        for id in 0..3 {
            assert_eq!(find_linear_3cycles_through(&one, id).unwrap().len(), 1);
        }
        let k4 = build_triangle_hypergraph(&Graph::complete(4));
        for id in 0..4 {
            assert!(find_linear_3cycles_through(&k4, id).unwrap().is_empty());
        }
        let k6 = build_triangle_hypergraph(&Graph::complete(6));
        for id in 0..k6.len() {
            assert_eq!(
                find_linear_3cycles_through(&k6, id).unwrap(),
                literal_linear_cycles(&k6, id)
            );
        }
        let id = k6.id_of(&[0, 1, 2]).unwrap();
        assert_eq!(find_linear_3cycles_through(&k6, id).unwrap().len(), 18);
        assert!(matches!(
            find_linear_3cycles_through(&k6, 99),
            Err(HypergraphError::InvalidId(99))
        ));
    }

    #[test]
    fn f_config_examples() {
        let f = one_f_member();
        assert_eq!(f.len(), 11);
        let w = detect_f_config(&f, DEFAULT_SEARCH_BUDGET).unwrap().unwrap();
        assert!(verify_witness(&f, &w));
        assert_eq!(w.common_hyperedge, f.id_of(&[0, 1, 2]));

        // drop any one hyperedge: ten left, nothing to find
        for skip in 0..f.len() {
            let g = f.filter(|t| *t != f.triples()[skip]);
            assert!(detect_f_config(&g, DEFAULT_SEARCH_BUDGET).unwrap().is_none());
            assert_eq!(count_f_configs(&g, DEFAULT_SEARCH_BUDGET).unwrap(), 0);
        }

        let k6 = build_triangle_hypergraph(&Graph::complete(6));
        assert!(detect_f_config(&k6, DEFAULT_SEARCH_BUDGET).unwrap().is_none());
        assert_eq!(count_f_configs(&k6, DEFAULT_SEARCH_BUDGET).unwrap(), 0);
        assert_eq!(literal_f_count(&k6), 0);
    }

    #[test]
    fn f_count_matches_literal_loops() {
        let f = one_f_member();
        let literal = literal_f_count(&f);
        assert_eq!(literal, 2 * 120);
        assert_eq!(count_f_configs(&f, DEFAULT_SEARCH_BUDGET).unwrap(), literal);
        // a sixth cycle on the same attachment pair: C(6,5) choices
        let mut ts = f.triples().to_vec();
        ts.extend([[1, 18, 19], [0, 19, 20]]);
        let six = hg(21, &ts);
        assert_eq!(count_f_configs(&six, DEFAULT_SEARCH_BUDGET).unwrap(), literal_f_count(&six));
        assert_eq!(literal_f_count(&six), 6 * 240);
    }

    #[test]
    fn count_budget_is_reported() {
        let k9 = build_triangle_hypergraph(&Graph::complete(9));
        assert_eq!(count_f_configs(&k9, 10), Err(HypergraphError::Budget(10)));
        assert_eq!(detect_f_config(&k9, 1), Err(HypergraphError::Budget(1)));
    }

    #[test]
    fn f_prime_examples() {
        let h = hg(5, &[[0, 1, 2], [2, 3, 4], [1, 3, 4]]);
        let w = detect_f_prime(&h).unwrap();
        assert!(verify_witness(&h, &w));
        let [[e1, e2, e3]] = w.cycles[..] else { panic!() };
        assert_eq!(h.triples()[e1], [0, 1, 2]);
        assert_eq!(shared(&h.triples()[e2], &h.triples()[e3]), 2);

        assert!(detect_f_prime(&hg(9, &[[0, 1, 2], [3, 4, 5], [6, 7, 8]])).is_none());

        let k5 = build_triangle_hypergraph(&Graph::complete(5));
        assert!(literal_f_prime(&k5));
        let w = detect_f_prime(&k5).unwrap();
        assert!(verify_witness(&k5, &w));
    }

    #[test]
    fn sparse_paley_has_no_f_config() {
        let g = crate::generators::gen_paley(61).unwrap();
        let h = build_triangle_hypergraph(&g);
        let d = 30.0f64;
        let n = 61.0f64;
        // p at the top of the admissible range with C = 1, pi = a p³
        let p = ((n * n.ln()).cbrt() / d).min(1.0);
        let pi = p.powi(3) / 2048.0;
        for seed in 0..100 {
            let hs = sparsify_hypergraph(&h, pi, seed).unwrap();
            assert!(detect_f_config(&hs, DEFAULT_SEARCH_BUDGET).unwrap().is_none());
        }
    }

    fn small_hypergraph() -> impl Strategy<Value = TripleHypergraph> {
        (6usize..=10, 0.0f64..0.6, any::<u64>()).prop_map(|(n, pi, seed)| {
            sparsify_hypergraph(&build_triangle_hypergraph(&Graph::complete(n)), pi, seed).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn witnesses_reverify(h in small_hypergraph()) {
            if let Some(w) = detect_b1(&h, b1_threshold(h.n())) {
                prop_assert!(verify_witness(&h, &w));
            }
            if let Some(w) = detect_f_prime(&h) {
                prop_assert!(verify_witness(&h, &w));
            }
            prop_assert_eq!(detect_f_prime(&h).is_some(), literal_f_prime(&h));
            if let Ok(Some(w)) = detect_f_config(&h, DEFAULT_SEARCH_BUDGET) {
                prop_assert!(verify_witness(&h, &w));
            }
        }

        #[test]
        fn detector_agrees_with_count(extra in proptest::collection::vec((0usize..18, 0usize..18, 0usize..18), 0..12),
                                      drop in proptest::collection::vec(proptest::bool::weighted(0.1), 11)) {
            // perturb a planted configuration so both outcomes occur
            let base = one_f_member();
            let mut ts: Vec<Triple> = base
                .triples()
                .iter()
                .zip(&drop)
                .filter(|(_, &d)| !d)
                .map(|(t, _)| *t)
                .collect();
            for (a, b, c) in extra {
                let mut t = [a, b, c];
                t.sort_unstable();
                if t[0] < t[1] && t[1] < t[2] && !ts.contains(&t) {
                    ts.push(t);
                }
            }
            let h = TripleHypergraph::new(18, ts).unwrap();
            let found = detect_f_config(&h, DEFAULT_SEARCH_BUDGET).unwrap();
            let count = count_f_configs(&h, DEFAULT_SEARCH_BUDGET).unwrap();
            prop_assert_eq!(found.is_some(), count > 0);
        }
    }
}
