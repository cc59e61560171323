//! Acceptance checks. Each test prints one `PASS` or `FAIL` line for its
//! criterion before asserting, so `--nocapture` gives a scoreboard.
//!
//! Every oracle below is written from the definitions, independently of the
//! library's search code.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robustlab::coupling::{
    check_state_monotone, conditional_prob, conditional_prob_bound, coupling_marginal_stats, run_coupling,
    verify_coupling_embedding, CouplingParams, Fallback, ProbSettings, RevealState, TriangleSystem, DEFAULT_ELEMENT_CAP,
};
use robustlab::experiments::{
    isolated_vertex_moments, robust_expander_events, scaling_fit, threshold_sweep, EventParams, Instance, PGrid,
    Property, ScalingOptions, SweepOptions,
};
use robustlab::generators::{gen_gnp, gen_paley, gen_random_regular, sparsify, SparsifyParams};
use robustlab::hypergraph::{
    build_triangle_hypergraph, count_f_configs, detect_f_config, detect_f_prime, sparsify_hypergraph, verify_witness,
    Triple, TripleHypergraph, DEFAULT_SEARCH_BUDGET,
};
use robustlab::par::with_jobs;
use robustlab::spectral::{second_eigenvalue_with, Method, SpectralOptions};
use robustlab::spread::{
    almost_factor_spread_bound, cover_down, estimate_spread, exact_triangle_factor, sample_spread_factor,
    CoverDownConfig, Sampler, SpreadConfig, Window,
};
use robustlab::structure::{
    check_c_expander, find_hamiltonian_cycle, max_matching, tutte_violation, ExpanderMode, FailingKind, HamBudget,
};
use robustlab::{Graph, RngStream, VertexSet};

fn report(criterion: &str, ok: bool, detail: String) {
    println!("{} {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn adjacency_masks(g: &Graph) -> Vec<u32> {
    (0..g.n()).map(|v| g.neighbors(v).iter().fold(0, |m, &w| m | 1 << w)).collect()
}

// ---------------------------------------------------------------- spectral

#[test]
fn spectral_fixtures() {
    let golden = [
        ("K5", Graph::complete(5), 1.0),
        ("Petersen", Graph::petersen(), 2.0),
        ("C5", Graph::cycle(5), 2.0 * (std::f64::consts::PI / 5.0).cos()),
        ("Paley(13)", gen_paley(13).unwrap(), (1.0 + 13f64.sqrt()) / 2.0),
    ];
    let mut worst_value = 0.0f64;
    let mut worst_paths = 0.0f64;
    for (name, g, want) in &golden {
        let solve = |method| {
            let opts = SpectralOptions {
                tol: 1e-12,
                method: Some(method),
                ..SpectralOptions::default()
            };
            second_eigenvalue_with(g, &opts).unwrap_or_else(|e| panic!("{name}: {e}")).lambda
        };
        let dense = solve(Method::Dense);
        let iterative = solve(Method::Iterative);
        worst_value = worst_value.max((dense - want).abs());
        worst_paths = worst_paths.max((dense - iterative).abs());
    }
    let ok = worst_value <= 1e-6 && worst_paths <= 1e-8;
    report(
        "spectral fixtures",
        ok,
        format!("max |λ - λ*| = {worst_value:.2e}, max |dense - iterative| = {worst_paths:.2e}"),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- oracles

/// Matching number by memoised recursion on vertex subsets.
fn brute_matching_number(g: &Graph) -> usize {
    fn go(mask: u32, adj: &[u32], memo: &mut [Option<usize>]) -> usize {
        if mask == 0 {
            return 0;
        }
        if let Some(v) = memo[mask as usize] {
            return v;
        }
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut best = go(rest, adj, memo);
        let mut nb = adj[v] & rest;
        while nb != 0 {
            let w = nb.trailing_zeros();
            nb &= nb - 1;
            best = best.max(1 + go(rest & !(1 << w), adj, memo));
        }
        memo[mask as usize] = Some(best);
        best
    }
    let n = g.n();
    let mut memo = vec![None; 1 << n];
    go((1u32 << n) - 1, &adjacency_masks(g), &mut memo)
}

/// Odd components of `G - S` by union-find.
fn odd_parts(g: &Graph, s: u32) -> usize {
    let n = g.n();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (u, v) in g.edges() {
        if s >> u & 1 == 0 && s >> v & 1 == 0 {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            parent[a] = b;
        }
    }
    let mut size = vec![0usize; n];
    for v in (0..n).filter(|&v| s >> v & 1 == 0) {
        let r = find(&mut parent, v);
        size[r] += 1;
    }
    size.iter().filter(|&&k| k % 2 == 1).count()
}

/// The definition read literally: every `X` with `1 <= |X| <= n/(2C)` has
/// `|N(X)| >= C|X|`, and every two disjoint sets of size at least `n/(2C)`
/// are joined by an edge. Returns (expansion holds, joint condition holds).
fn literal_c_expander(g: &Graph, c: f64) -> (bool, bool) {
    let n = g.n();
    let adj = adjacency_masks(g);
    let bound = n as f64 / (2.0 * c);
    let reach = |x: u32| (0..n).filter(|&v| x >> v & 1 == 1).fold(0u32, |m, v| m | adj[v]) & !x;
    let mut expansion = true;
    for x in 1u32..1 << n {
        let k = x.count_ones() as f64;
        if k <= bound + 1e-12 && (reach(x).count_ones() as f64) < c * k {
            expansion = false;
            break;
        }
    }
    let mut joint = true;
    'outer: for a in 1u32..1 << n {
        if (a.count_ones() as f64) < bound - 1e-12 {
            continue;
        }
        let touched = reach(a) | a;
        // b ranges over subsets of the complement of a
        let free = !a & ((1u32 << n) - 1);
        let mut b = free;
        while b != 0 {
            if (b.count_ones() as f64) >= bound - 1e-12 && b & touched == 0 {
                joint = false;
                break 'outer;
            }
            b = (b - 1) & free;
        }
    }
    (expansion, joint)
}

/// Triangle factor existence by covering the lowest uncovered vertex with
/// every possible pair.
fn brute_has_triangle_factor(g: &Graph) -> bool {
    fn go(left: u32, adj: &[u32]) -> bool {
        if left == 0 {
            return true;
        }
        let v = left.trailing_zeros() as usize;
        let rest = left & !(1 << v);
        let mut a = adj[v] & rest;
        while a != 0 {
            let u = a.trailing_zeros() as usize;
            a &= a - 1;
            let mut b = adj[v] & adj[u] & a;
            while b != 0 {
                let w = b.trailing_zeros();
                b &= b - 1;
                if go(rest & !(1 << u) & !(1 << w), adj) {
                    return true;
                }
            }
        }
        false
    }
    go((1u32 << g.n()) - 1, &adjacency_masks(g))
}

/// `P[E_j' present | no refuted E_i' fully present]` by enumerating every
/// undetermined edge and indicator.
fn literal_conditional(sys: &TriangleSystem, st: &RevealState, p: f64, c: f64, j: usize) -> f64 {
    let open_e: Vec<usize> = (0..sys.edges.len()).filter(|&e| !st.edge_present[e]).collect();
    let open_i: Vec<usize> = (0..sys.triangles.len()).filter(|&i| !st.indicator_present[i]).collect();
    let k = open_e.len() + open_i.len();
    let (mut num, mut den) = (0.0, 0.0);
    let mut edge = st.edge_present.clone();
    let mut ind = st.indicator_present.clone();
    for w in 0u64..1 << k {
        let mut prob = 1.0;
        for (b, &e) in open_e.iter().enumerate() {
            let on = w >> b & 1 == 1;
            edge[e] = on;
            prob *= if on { p } else { 1.0 - p };
        }
        for (b, &i) in open_i.iter().enumerate() {
            let on = w >> (open_e.len() + b) & 1 == 1;
            ind[i] = on;
            prob *= if on { c } else { 1.0 - c };
        }
        let full = |i: usize| ind[i] && sys.tri_edges[i].iter().all(|&e| edge[e]);
        if st.refuted().iter().any(|&i| full(i)) {
            continue;
        }
        den += prob;
        if full(j) {
            num += prob;
        }
    }
    num / den
}

/// A consistent reveal state on a small random host with at most
/// `max_open` undetermined elements.
fn random_reveal_state(seed: u64, max_open: usize) -> Option<(TriangleSystem, RevealState, f64, usize)> {
    let mut r = rng(seed);
    let n = r.gen_range(4..=6);
    let g = gen_gnp(n, r.gen_range(0.5..1.0), seed).unwrap();
    let sys = TriangleSystem::new(&g);
    if sys.triangles.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..sys.triangles.len()).collect();
    order.shuffle(&mut r);
    let j = order[0];
    let mut st = RevealState::new(&sys);
    for &i in &order[1..] {
        match r.gen_range(0..4) {
            0 => {
                st.reveal(&sys, i);
            }
            1 | 2 => st.refute(&sys, i),
            _ => {}
        }
    }
    if st.refuted().iter().any(|&i| st.indicator_present[i]) {
        return None;
    }
    let open = st.edge_present.iter().filter(|x| !**x).count() + st.indicator_present.iter().filter(|x| !**x).count();
    (open <= max_open).then(|| (sys, st, r.gen_range(0.05..0.95), j))
}

#[test]
fn oracle_equivalence_suite() {
    let mut r = rng(11);
    let mut disagreements = Vec::new();

    // maximum matching and Tutte's condition
    for i in 0..500u64 {
        let n = r.gen_range(1..=12);
        let g = gen_gnp(n, r.gen_range(0.05..0.6), i).unwrap();
        let m = max_matching(&g);
        let nu = brute_matching_number(&g);
        if !m.is_valid_in(&g) || m.size() != nu {
            disagreements.push(format!("matching graph {i}: {} vs {nu}", m.size()));
        }
        let deficiency = n - 2 * nu;
        let berge = (0u32..1 << n).map(|s| odd_parts(&g, s) as i64 - s.count_ones() as i64).max().unwrap();
        if berge != deficiency as i64 {
            disagreements.push(format!("Tutte-Berge graph {i}: {berge} vs {deficiency}"));
        }
        match tutte_violation(&g).unwrap() {
            Some(s) => {
                let mask = s.iter().fold(0u32, |m, v| m | 1 << v);
                if deficiency == 0 || odd_parts(&g, mask) <= s.len() {
                    disagreements.push(format!("Tutte witness graph {i}"));
                }
            }
            None if deficiency > 0 => disagreements.push(format!("Tutte missed graph {i}")),
            None => {}
        }
    }

    // C-expanders
    for i in 0..100u64 {
        let n = r.gen_range(4..=12);
        let g = gen_gnp(n, r.gen_range(0.2..0.9), 1000 + i).unwrap();
        let c = [0.5, 1.0, 1.5, 2.0, 3.0][i as usize % 5];
        let rep = check_c_expander(&g, c, &ExpanderMode::Exact).unwrap();
        let (exp, joint) = literal_c_expander(&g, c);
        let got_exp = rep.violation(FailingKind::Expansion).is_none();
        let got_joint = rep.violation(FailingKind::JointEdge).is_none();
        if (got_exp, got_joint) != (exp, joint) || rep.holds != (exp && joint) {
            disagreements.push(format!("expander graph {i} C={c}: ({got_exp},{got_joint}) vs ({exp},{joint})"));
        }
    }

    // triangle factors
    let mut found = 0;
    for i in 0..200u64 {
        let n = 3 * r.gen_range(1..=4);
        let g = gen_gnp(n, r.gen_range(0.3..0.95), 5000 + i).unwrap();
        let got = exact_triangle_factor(&g).unwrap();
        if let Some(f) = &got {
            found += 1;
            if f.verify_factor(&g).is_err() {
                disagreements.push(format!("factor graph {i} does not verify"));
            }
        }
        if got.is_some() != brute_has_triangle_factor(&g) {
            disagreements.push(format!("factor graph {i}: existence differs"));
        }
    }

    // conditional probabilities
    let (mut states, mut seed) = (0, 0u64);
    while states < 1000 {
        seed += 1;
        let Some((sys, st, p, j)) = random_reveal_state(seed, 18) else { continue };
        for c in [1.0 / 512.0, 0.3] {
            let settings = ProbSettings {
                p,
                c,
                fallback: Fallback::Exact,
                cap: DEFAULT_ELEMENT_CAP,
            };
            let got = conditional_prob(&sys, &st, j, &settings, RngStream::new(seed, "oracle")).unwrap().value;
            let want = literal_conditional(&sys, &st, p, c, j);
            if (got - want).abs() > 1e-9 * want + 1e-15 {
                disagreements.push(format!("conditional state {seed}: {got} vs {want}"));
            }
        }
        states += 1;
    }

    let ok = disagreements.is_empty() && found > 20 && found < 180;
    report(
        "oracle equivalence suite",
        ok,
        format!(
            "{} disagreements over 500 matching, 100 expander, 200 factor ({found} with a factor), 1000 conditional cases {:?}",
            disagreements.len(),
            disagreements.iter().take(3).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- threshold

#[test]
fn perfect_matching_and_hamiltonicity_at_desk_scale() {
    let g = gen_paley(1009).unwrap();
    let inst = Instance::new("paley", g.clone()).unwrap();
    let reference = Property::Ham.reference_value(inst.graph.n(), inst.d);
    let grid = PGrid::Points(vec![0.5 * reference, 1.5 * reference]);
    let opts = SweepOptions::default();
    let ham = threshold_sweep(&inst, Property::Ham, &grid, 100, 1009, &opts).unwrap();
    let iso = threshold_sweep(&inst, Property::NoIsolated, &grid, 100, 1009, &opts).unwrap();
    let (below_iso, above_iso) = (&iso.points[0], &iso.points[1]);
    let above_ham = &ham.points[1];

    let checks = [
        ("HAM at 1.5", above_ham.successes >= 95, above_ham.successes),
        ("no isolated vertex at 1.5", above_iso.successes >= 95, above_iso.successes),
        ("isolated vertex at 0.5", 100 - below_iso.successes >= 95, 100 - below_iso.successes),
    ];

    // A Hamiltonian cycle needs minimum degree 2, so its success rate is
    // capped by P[δ(G_p) >= 2]. Count that directly on fresh samples.
    let mut min_two = 0;
    let mut ham_found = 0;
    for t in 0..100u64 {
        let seed = RngStream::new(7, "diagnostic").at(t).derive_seed();
        let gp = sparsify(&g, SparsifyParams::new(1.5 * reference, seed).unwrap());
        if gp.min_degree() >= 2 {
            min_two += 1;
            ham_found += u64::from(find_hamiltonian_cycle(&gp, HamBudget::default(), seed).found);
        }
    }
    for (name, ok, count) in checks {
        report(&format!("Paley(1009) {name}"), ok, format!("{count}/100 trials (need >= 95)"));
    }
    println!("  diagnostic at 1.5·ln n/d: min degree >= 2 in {min_two}/100 samples, cycle found in {ham_found} of those");
    assert!(checks.iter().all(|c| c.1), "see the FAIL lines above");
}

// ---------------------------------------------------------------- moments

#[test]
fn isolated_vertex_moments_match_monte_carlo() {
    let mut hosts = vec![("K100".to_string(), Graph::complete(100), 0.05)];
    let mut r = rng(4);
    while hosts.len() < 50 {
        let k = hosts.len() as u64;
        let (name, g) = match k % 4 {
            0 => {
                let n = r.gen_range(20..80);
                (format!("G({n},0.3)"), gen_gnp(n, 0.3, k).unwrap())
            }
            1 => {
                let n = 2 * r.gen_range(15..40);
                (format!("{n}-vertex 6-regular"), gen_random_regular(n, 6, k).unwrap())
            }
            2 => {
                let q = [13, 17, 29, 37, 41, 53, 61][r.gen_range(0..7)];
                (format!("Paley({q})"), gen_paley(q).unwrap())
            }
            _ => {
                let n = r.gen_range(10..60);
                (format!("K{n}"), Graph::complete(n))
            }
        };
        let d = g.average_degree().max(1.0);
        let p = (r.gen_range(0.5..1.5) * (g.n() as f64).ln() / d).min(0.95);
        hosts.push((name, g, p));
    }
    let mut worst = (0.0f64, String::new());
    let mut k100 = f64::NAN;
    for (i, (name, g, p)) in hosts.iter().enumerate() {
        let rep = isolated_vertex_moments(g, *p, 4000, 100 + i as u64).unwrap();
        if i == 0 {
            k100 = rep.expectation;
        }
        let z = rep.z_score.unwrap().abs();
        if z > worst.0 {
            worst = (z, name.clone());
        }
    }
    let ok = worst.0 <= 4.0 && (k100 - 0.6232).abs() < 5e-5;
    report(
        "isolated-vertex expectation vs Monte Carlo",
        ok,
        format!("50 hosts, max |z| = {:.2} ({}), E[I] on K100 at p=0.05 = {k100:.4}", worst.0, worst.1),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- coupling

#[test]
fn coupling_soundness() {
    let hosts = [("K6", Graph::complete(6)), ("Paley(13)", gen_paley(13).unwrap())];
    let mut bad = Vec::new();
    let mut failed_runs = 0;
    for (name, g) in &hosts {
        for seed in 0..10_000u64 {
            let t = run_coupling(g, &CouplingParams::new(0.5, seed)).unwrap();
            failed_runs += u64::from(t.failed);
            if !t.failed && !verify_coupling_embedding(&t) {
                bad.push(format!("{name} seed {seed}: embedding"));
            }
            if !check_state_monotone(&t) {
                bad.push(format!("{name} seed {seed}: monotonicity"));
            }
        }
    }
    let hard = bad.is_empty();
    report(
        "coupling transcripts",
        hard,
        format!("20000 runs, {} violations, {failed_runs} runs failed", bad.len()),
    );

    let stats = coupling_marginal_stats(&Graph::complete(6), &CouplingParams::new(0.5, 2024), 1_000_000).unwrap();
    let freq_ok = stats.max_abs_z <= 4.0;
    report(
        "coupling per-hyperedge frequency",
        freq_ok,
        format!(
            "K6, 10^6 trials, π = {:.3e}, counts {}..{}, max |z| = {:.2}",
            stats.pi,
            stats.counts.iter().min().unwrap(),
            stats.counts.iter().max().unwrap(),
            stats.max_abs_z
        ),
    );

    let (mut states, mut seed, mut worst_gap) = (0, 0u64, f64::NEG_INFINITY);
    while states < 1000 {
        seed += 1;
        let Some((sys, st, p, j)) = random_reveal_state(seed, 40) else { continue };
        let c = [1.0 / 512.0, 0.05, 0.3][seed as usize % 3];
        let settings = ProbSettings {
            p,
            c,
            fallback: Fallback::Exact,
            cap: DEFAULT_ELEMENT_CAP,
        };
        let exact = conditional_prob(&sys, &st, j, &settings, RngStream::new(seed, "bound")).unwrap().value;
        worst_gap = worst_gap.max(conditional_prob_bound(&sys, &st, p, c, j) - exact);
        states += 1;
    }
    let bound_ok = worst_gap <= 1e-15;
    report(
        "coupling bound mode <= exact",
        bound_ok,
        format!("1000 states, max (bound - exact) = {worst_gap:.2e}"),
    );
    assert!(hard && freq_ok && bound_ok);
}

// ---------------------------------------------------------------- configurations

fn shared(a: &Triple, b: &Triple) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

fn vertex_union(ts: &[Triple]) -> usize {
    let mut all: Vec<usize> = ts.iter().flatten().copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// Five linear 3-cycles `{h, f_k, g_k}` through one hyperedge `h`, all
/// attached at the same ordered vertex pair of `h`, with the ten other
/// hyperedges distinct. Plain recursion over candidate cycles.
fn literal_f_exists(h: &TripleHypergraph) -> bool {
    let t = h.triples();
    let m = t.len();
    fn pick(cands: &[(usize, usize)], from: usize, left: usize, used: &mut Vec<usize>) -> bool {
        if left == 0 {
            return true;
        }
        for i in from..cands.len() {
            let (f, g) = cands[i];
            if used.contains(&f) || used.contains(&g) {
                continue;
            }
            used.extend([f, g]);
            if pick(cands, i + 1, left - 1, used) {
                return true;
            }
            used.truncate(used.len() - 2);
        }
        false
    }
    for c in 0..m {
        for &v1 in &t[c] {
            for &v2 in &t[c] {
                if v1 == v2 {
                    continue;
                }
                let mut cands = Vec::new();
                for f in 0..m {
                    for g in 0..m {
                        let (a, b, e) = (t[c], t[f], t[g]);
                        let linear = f != c
                            && g != c
                            && f != g
                            && shared(&a, &b) == 1
                            && shared(&a, &e) == 1
                            && shared(&b, &e) == 1
                            && vertex_union(&[a, b, e]) == 6;
                        if linear && b.contains(&v2) && e.contains(&v1) {
                            cands.push((f, g));
                        }
                    }
                }
                if pick(&cands, 0, 5, &mut Vec::new()) {
                    return true;
                }
            }
        }
    }
    false
}

/// `w1w2w3, w3w4w5, w2w4w5` on five distinct vertices.
fn literal_f_prime_exists(h: &TripleHypergraph) -> bool {
    let t = h.triples();
    for a in 0..t.len() {
        for b in 0..t.len() {
            for c in b + 1..t.len() {
                if a == b || a == c || shared(&t[b], &t[c]) != 2 {
                    continue;
                }
                let core: Vec<usize> = t[b].iter().copied().filter(|x| t[c].contains(x)).collect();
                if shared(&t[a], &t[b]) == 1
                    && shared(&t[a], &t[c]) == 1
                    && core.iter().all(|x| !t[a].contains(x))
                    && vertex_union(&[t[a], t[b], t[c]]) == 5
                {
                    return true;
                }
            }
        }
    }
    false
}

fn planted_f(n: usize, perm: &[usize]) -> Vec<Triple> {
    let mut ts = vec![[0, 1, 2]];
    for k in 0..5 {
        let (a, b, c) = (3 + 3 * k, 4 + 3 * k, 5 + 3 * k);
        ts.push([1, a, b]);
        ts.push([0, b, c]);
    }
    assert!(n >= 18);
    ts.into_iter()
        .map(|t| {
            let mut u = t.map(|v| perm[v]);
            u.sort_unstable();
            u
        })
        .collect()
}

fn hypergraph(n: usize, mut ts: Vec<Triple>) -> TripleHypergraph {
    ts.sort_unstable();
    ts.dedup();
    TripleHypergraph::new(n, ts).unwrap()
}

fn random_triples(r: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Triple> {
    let all: Vec<usize> = (0..n).collect();
    (0..count)
        .map(|_| {
            let mut t: Triple = [0; 3];
            t.copy_from_slice(&all.choose_multiple(r, 3).copied().collect::<Vec<_>>());
            t.sort_unstable();
            t
        })
        .collect()
}

#[test]
fn forbidden_configuration_detectors() {
    let mut r = rng(21);
    let mut problems = Vec::new();

    // planted F members, relabelled and buried in noise
    for i in 0..50 {
        let n = 30;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut r);
        let mut ts = planted_f(n, &perm);
        ts.extend(random_triples(&mut r, n, i % 10));
        let h = hypergraph(n, ts);
        match detect_f_config(&h, DEFAULT_SEARCH_BUDGET).unwrap() {
            Some(w) if verify_witness(&h, &w) => {}
            _ => problems.push(format!("planted F {i} missed")),
        }
    }

    // planted F'
    for i in 0..50 {
        let n = 20;
        let w: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(&mut r, 5).copied().collect();
        let mut ts: Vec<Triple> = [[w[0], w[1], w[2]], [w[2], w[3], w[4]], [w[1], w[3], w[4]]]
            .into_iter()
            .map(|mut t| {
                t.sort_unstable();
                t
            })
            .collect();
        ts.extend(random_triples(&mut r, n, i % 4));
        let h = hypergraph(n, ts);
        match detect_f_prime(&h) {
            Some(wit) if verify_witness(&h, &wit) => {}
            _ => problems.push(format!("planted F' {i} missed")),
        }
    }

    // fewer than eleven hyperedges cannot hold an F member
    for i in 0..200 {
        let n = r.gen_range(6..16);
        let count = r.gen_range(0..=10);
        let ts = random_triples(&mut r, n, count);
        let h = hypergraph(n, ts);
        if detect_f_config(&h, DEFAULT_SEARCH_BUDGET).unwrap().is_some() {
            problems.push(format!("F found in small input {i}"));
        }
    }

    // agreement with the literal definitions on oracle-scale inputs
    let mut positives = 0;
    let mut instances = 0;
    for i in 0..300u64 {
        let h = match i % 3 {
            0 => {
                let n = r.gen_range(6..=9);
                sparsify_hypergraph(&build_triangle_hypergraph(&Graph::complete(n)), r.gen_range(0.05..0.35), i).unwrap()
            }
            1 => {
                let perm: Vec<usize> = (0..18).collect();
                let mut ts: Vec<Triple> = planted_f(18, &perm).into_iter().filter(|_| r.gen_bool(0.93)).collect();
                let extra = r.gen_range(0..8);
                ts.extend(random_triples(&mut r, 18, extra));
                hypergraph(18, ts)
            }
            _ => {
                let n = r.gen_range(7..=12);
                let count = r.gen_range(5..25);
                hypergraph(n, random_triples(&mut r, n, count))
            }
        };
        instances += 1;
        let literal = literal_f_exists(&h);
        positives += usize::from(literal);
        let detected = detect_f_config(&h, DEFAULT_SEARCH_BUDGET).unwrap().is_some();
        let counted = count_f_configs(&h, DEFAULT_SEARCH_BUDGET).unwrap() > 0;
        if detected != literal || counted != literal {
            problems.push(format!("F instance {i}: detector {detected}, count {counted}, literal {literal}"));
        }
        if detect_f_prime(&h).is_some() != literal_f_prime_exists(&h) {
            problems.push(format!("F' instance {i}"));
        }
    }

    let ok = problems.is_empty() && positives > 10 && positives < instances;
    report(
        "forbidden-configuration detectors",
        ok,
        format!(
            "50 planted F, 50 planted F', 200 small inputs, {instances} oracle instances ({positives} containing F); {} problems {:?}",
            problems.len(),
            problems.iter().take(3).collect::<Vec<_>>()
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- spread

#[test]
fn spread_pipeline() {
    let g = gen_gnp(300, 0.7, 2024).unwrap();
    let q = g.density();

    let cfg = SpreadConfig {
        window: Some(Window { lo: 18, hi: 45 }),
        ..SpreadConfig::new(0.7, 0.5)
    };
    let mut successes = 0;
    let mut unverified = 0;
    let mut over_budget = 0;
    let mut steps = 0;
    for seed in 0..20 {
        if let Ok(run) = sample_spread_factor(&g, &cfg, seed) {
            successes += 1;
            unverified += usize::from(run.factor.verify_factor(&g).is_err());
            for s in &run.steps {
                steps += 1;
                over_budget += usize::from(s.cover.reserve_used as f64 > s.cover.budget);
            }
        }
    }
    let pipeline_ok = successes >= 15 && unverified == 0;
    report(
        "spread pipeline on G(300,0.7)",
        pipeline_ok,
        format!("{successes}/20 succeeded (need >= 15), {unverified} unverified factors"),
    );

    let eta = 0.1;
    let bound = almost_factor_spread_bound(q, eta, g.n(), 1);
    let est = estimate_spread(&g, &Sampler::AlmostFactor { q, eta }, 1, 10_000, bound, 99).unwrap();
    let spread_ok = est.max_ci.1 <= 2.0 * bound;
    report(
        "almost-factor singleton spread",
        spread_ok,
        format!(
            "max P̂[T ∈ M] = {:.2e} (Wilson upper {:.2e}) vs 2·18/(q³η³n²) = {:.3}",
            est.max_probability,
            est.max_ci.1,
            2.0 * bound
        ),
    );

    // direct cover-down runs on a complete host and on the random host
    let mut r = rng(3);
    let mut direct = 0;
    for (host, alpha) in [(Graph::complete(90), 0.5), (g.clone(), 0.7)] {
        let n = host.n();
        let size = (alpha * alpha * n as f64).ceil() as usize;
        for seed in 0..10 {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut r);
            let reserve = VertexSet::from_unsorted(all[..size].iter().copied());
            let rep = cover_down(&host, &reserve, &CoverDownConfig::new(host.density(), alpha, 0.5), seed).unwrap();
            direct += 1;
            rep.matching.verify(&host).unwrap();
            let covered = rep.matching.covered_mask();
            let leftover = (0..n).filter(|&v| !reserve.contains(v) && !covered[v]).count();
            let used = reserve.iter().filter(|&v| covered[v]).count();
            over_budget += usize::from(leftover > 0 || used as f64 > alpha * alpha * size as f64);
        }
    }
    let budget_ok = over_budget == 0;
    report(
        "cover-down budget",
        budget_ok,
        format!("{steps} pipeline steps and {direct} direct runs, {over_budget} over the α²|U| budget"),
    );
    assert!(pipeline_ok && spread_ok && budget_ok);
}

// ---------------------------------------------------------------- scaling

#[test]
fn triangle_factor_scaling_on_complete_hosts() {
    let rep = scaling_fit(&[30, 60, 90, 120], Property::TriangleFactor, 200, 1, &ScalingOptions::default()).unwrap();
    let ok = (-0.75..=-0.58).contains(&rep.corrected_slope);
    let halves: Vec<String> = rep.points.iter().map(|p| format!("{}:{:.4}", p.n, p.p_half)).collect();
    report(
        "triangle-factor scaling slope",
        ok,
        format!(
            "corrected slope {:.3} (need [-0.75, -0.58]), raw slope {:.3}, p_half {}",
            rep.corrected_slope,
            rep.slope,
            halves.join(" ")
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- determinism

fn fingerprint(jobs: usize) -> Vec<String> {
    with_jobs(jobs, || {
        let paley = gen_paley(101).unwrap();
        let inst = Instance::new("paley", paley.clone()).unwrap();
        let grid = PGrid::geometric(0.02, 0.2, 5);
        let opts = SweepOptions::default();
        let gnp = gen_gnp(90, 0.7, 5).unwrap();
        let spread_cfg = SpreadConfig {
            window: Some(Window { lo: 9, hi: 30 }),
            ..SpreadConfig::new(0.7, 0.5)
        };
        vec![
            gen_gnp(200, 0.1, 3).unwrap().to_edge_list(),
            gen_random_regular(100, 6, 3).unwrap().to_edge_list(),
            sparsify(&paley, SparsifyParams::new(0.3, 3).unwrap()).to_edge_list(),
            json(&threshold_sweep(&inst, Property::Ham, &grid, 60, 3, &opts).unwrap()),
            json(&threshold_sweep(&inst, Property::NoIsolated, &grid, 60, 3, &opts).unwrap()),
            json(&coupling_marginal_stats(&Graph::complete(6), &CouplingParams::new(0.5, 3), 5000).unwrap()),
            json(&run_coupling(&paley_13(), &CouplingParams::new(0.5, 3)).unwrap()),
            json(&isolated_vertex_moments(&paley, 0.05, 2000, 3).unwrap()),
            json(&robust_expander_events(&paley, 0.1, &EventParams::default(), 30, 3).unwrap()),
            json(&sample_spread_factor(&gnp, &spread_cfg, 3).unwrap()),
            json(&estimate_spread(&gnp, &Sampler::AlmostFactor { q: 0.7, eta: 0.2 }, 1, 10_000, 0.5, 3).unwrap()),
            json(&scaling_fit(&[12, 24, 36], Property::Pm, 60, 3, &ScalingOptions::default()).unwrap()),
        ]
    })
}

fn paley_13() -> Graph {
    gen_paley(13).unwrap()
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).unwrap()
}

#[test]
fn determinism_across_reruns_and_jobs() {
    let first = fingerprint(1);
    let again = fingerprint(1);
    let wide = fingerprint(4);
    let ok = first == again && first == wide;
    let differing: Vec<usize> = (0..first.len()).filter(|&i| first[i] != again[i] || first[i] != wide[i]).collect();
    report(
        "determinism",
        ok,
        format!("{} randomized outputs compared across reruns and 1 vs 4 jobs; differing {differing:?}", first.len()),
    );
    assert!(ok);
}
