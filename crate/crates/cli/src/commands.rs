use crate::host::load;
use crate::{Cli, Command, CoupleMode, GraphInput, Output, SamplerKind};
use anyhow::{bail, ensure, Context, Result};
use robustlab::coupling::{
    check_state_monotone, coupling_marginal_stats, run_coupling, trial_seed, verify_coupling_embedding, CouplingParams,
    Fallback,
};
use robustlab::experiments::csv::{write_curves, write_events, write_scaling};
use robustlab::experiments::{
    isolated_vertex_moments, robust_expander_events, scaling_fit, threshold_sweep, uncovered_vertex_expectation,
    EventParams, Instance, PGrid, ScalingOptions, SweepOptions,
};
use robustlab::generators::{
    gen_bipartite_biregular, gen_gnp, gen_paley, gen_random_regular, gen_random_regular_pairing, sparsify,
    SparsifyParams, DEFAULT_RETRY_BUDGET,
};
use robustlab::graph::{check_mixing, PairSelection};
use robustlab::hypergraph::{build_triangle_hypergraph, triangle_degree_stats};
use robustlab::spectral::second_eigenvalue;
use robustlab::spread::{
    almost_factor_rounds, almost_factor_spread_bound, cover_down, estimate_spread, exact_triangle_factor_on,
    sample_almost_factor, sample_spread_factor, sample_vortex_with, CoverDownConfig, ExactConfig, Sampler, SpreadConfig,
    VortexConfig, Window,
};
use robustlab::structure::{
    check_c_expander, find_hamiltonian_cycle, max_matching, tutte_violation, ExpanderMode, HamBudget, TUTTE_CAP,
};
use robustlab::{Graph, RngStream, VertexSet};
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

fn sink(out: &Output) -> Result<Box<dyn Write>> {
    Ok(match &out.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_text(out: &Output, text: &str) -> Result<()> {
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(f), value)?;
    Ok(())
}

fn graph_of(input: &GraphInput, seed: u64) -> Result<(String, Graph)> {
    load(input.input.as_deref(), input.host.as_ref(), seed)
}

/// Parses `a,b,…` into exactly `k` numbers.
fn numbers<T: std::str::FromStr>(text: &str, k: usize, what: &str) -> Result<Vec<T>> {
    let vals = text
        .split(',')
        .map(|s| s.trim().parse::<T>().ok())
        .collect::<Option<Vec<T>>>()
        .with_context(|| format!("{what}: cannot parse {text:?}"))?;
    ensure!(k == 0 || vals.len() == k, "{what}: expected {k} comma-separated values");
    Ok(vals)
}

fn window(text: &Option<String>) -> Result<Option<Window>> {
    text.as_ref()
        .map(|w| {
            let v: Vec<usize> = numbers(w, 2, "window")?;
            Ok(Window { lo: v[0], hi: v[1] })
        })
        .transpose()
}

fn stream_seed(seed: u64, label: &str) -> u64 {
    RngStream::new(seed, label).derive_seed()
}

pub fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Regular { n, d, pairing, out } => {
            let g = if pairing {
                gen_random_regular_pairing(n, d, seed, DEFAULT_RETRY_BUDGET)?
            } else {
                gen_random_regular(n, d, seed)?
            };
            emit_text(&out, &g.to_edge_list())
        }
        Command::Paley { q, out } => emit_text(&out, &gen_paley(q)?.to_edge_list()),
        Command::Gnp { n, p, out } => emit_text(&out, &gen_gnp(n, p, seed)?.to_edge_list()),
        Command::Bipartite { n, d, out } => emit_text(&out, &gen_bipartite_biregular(n, d, seed)?.graph.to_edge_list()),
        Command::Sparsify { graph, p, out } => {
            let (_, g) = graph_of(&graph, seed)?;
            emit_text(&out, &sparsify(&g, SparsifyParams::new(p, seed)?).to_edge_list())
        }
        Command::Spectrum { graph, tol } => {
            let (_, g) = graph_of(&graph, seed)?;
            print_json(&second_eigenvalue(&g, tol)?)
        }
        Command::Mixing { graph, samples } => {
            let (_, g) = graph_of(&graph, seed)?;
            let lambda = second_eigenvalue(&g, robustlab::spectral::DEFAULT_TOL)?.lambda;
            let pairs = match samples {
                Some(count) => PairSelection::Sampled { count, seed },
                None => PairSelection::exhaustive(),
            };
            print_json(&check_mixing(&g, g.average_degree(), lambda, &pairs)?)
        }
        Command::CheckExpander { graph, c, sampled } => {
            let (_, g) = graph_of(&graph, seed)?;
            let mode = match sampled {
                Some(per_size) => ExpanderMode::Sampled { per_size, seed },
                None => ExpanderMode::Exact,
            };
            print_json(&check_c_expander(&g, c, &mode)?)
        }
        Command::Matching { graph } => {
            let (_, g) = graph_of(&graph, seed)?;
            let m = max_matching(&g);
            let tutte = if g.n() <= TUTTE_CAP { tutte_violation(&g)? } else { None };
            print_json(&json!({
                "n": g.n(),
                "size": m.size(),
                "perfect": m.is_perfect(),
                "deficiency": m.deficiency(),
                "edges": m.edges,
                "tutte_witness": tutte,
            }))
        }
        Command::Hamilton { graph, restarts } => {
            let (_, g) = graph_of(&graph, seed)?;
            let budget = HamBudget {
                restarts,
                ..HamBudget::default()
            };
            print_json(&find_hamiltonian_cycle(&g, budget, seed))
        }
        Command::Triangles { graph, eps, list } => {
            let (_, g) = graph_of(&graph, seed)?;
            let h = build_triangle_hypergraph(&g);
            if list {
                return emit_text(&Output { out: None }, &h.to_triple_list());
            }
            let stats = triangle_degree_stats(&h, g.average_degree(), eps);
            print_json(&json!({
                "n": g.n(),
                "triangles": h.len(),
                "min_degree": stats.min,
                "max_degree": stats.max,
                "target": stats.target,
                "band": [stats.lo, stats.hi],
                "within_band": stats.holds,
            }))
        }
        Command::Couple {
            graph,
            p,
            a,
            c,
            trials,
            mode,
            samples,
            logs,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            let params = CouplingParams {
                a,
                c,
                mode: match mode {
                    CoupleMode::Exact => Fallback::Exact,
                    CoupleMode::Bound => Fallback::Bound,
                    CoupleMode::MonteCarlo => Fallback::MonteCarlo { samples },
                },
                ..CouplingParams::new(p, seed)
            };
            params.validate()?;
            if let Some(dir) = &logs {
                std::fs::create_dir_all(dir)?;
            }
            let mut stdout = io::stdout().lock();
            for t in 0..trials {
                let run = CouplingParams {
                    seed: trial_seed(seed, t),
                    ..params
                };
                let tr = run_coupling(&g, &run)?;
                if let Some(dir) = &logs {
                    std::fs::write(dir.join(format!("trial-{t}.log")), tr.to_event_log())?;
                }
                let line = json!({
                    "trial": t,
                    "seed": run.seed,
                    "steps": tr.steps.len(),
                    "outputs": tr.output.len(),
                    "failed": tr.failed,
                    "embedding_verified": !tr.failed && verify_coupling_embedding(&tr),
                    "state_monotone": check_state_monotone(&tr),
                });
                writeln!(stdout, "{line}")?;
            }
            let stats = coupling_marginal_stats(&g, &params, trials)?;
            writeln!(stdout, "{}", json!({ "aggregate": stats }))?;
            Ok(())
        }
        Command::AlmostFactor {
            graph,
            eta,
            q,
            report,
            out,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            let q = q.unwrap_or_else(|| g.density());
            let m = sample_almost_factor(&g, q, eta, seed)?;
            if let Some(path) = report {
                write_json(
                    &path,
                    &json!({
                        "n": g.n(),
                        "q": q,
                        "eta": eta,
                        "rounds": almost_factor_rounds(g.n(), eta),
                        "triangles": m.len(),
                        "singleton_bound": almost_factor_spread_bound(q, eta, g.n(), 1),
                    }),
                )?;
            }
            emit_text(&out, &m.to_triple_list()?)
        }
        Command::Vortex {
            graph,
            alpha,
            gamma,
            retries,
            window: w,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            let cfg = VortexConfig {
                max_retries: retries,
                window: window(&w)?,
                ..VortexConfig::new(alpha, gamma)
            };
            print_json(&sample_vortex_with(&g, &cfg, seed)?)
        }
        Command::Coverdown {
            graph,
            alpha,
            c,
            reserve,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            let n = g.n();
            let k = reserve.unwrap_or_else(|| (alpha * alpha * n as f64).ceil() as usize);
            ensure!(k <= n, "reserve larger than the graph");
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = RngStream::new(seed, "cli-reserve").rng();
            let (chosen, _) = rand::seq::SliceRandom::partial_shuffle(order.as_mut_slice(), &mut rng, k);
            let u = VertexSet::from_unsorted(chosen.iter().copied());
            let cfg = CoverDownConfig::new(g.density(), alpha, c);
            print_json(&cover_down(&g, &u, &cfg, stream_seed(seed, "cli-coverdown"))?)
        }
        Command::Factor {
            graph,
            spread,
            alpha,
            gamma,
            window: w,
            budget,
            report,
            out,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            let exact = ExactConfig {
                node_budget: budget,
                ..ExactConfig::default()
            };
            let factor = if spread {
                let cfg = SpreadConfig {
                    window: window(&w)?,
                    exact,
                    ..SpreadConfig::new(alpha, gamma)
                };
                let run = sample_spread_factor(&g, &cfg, seed)?;
                if let Some(path) = report {
                    write_json(&path, &run)?;
                }
                run.factor
            } else {
                let all: Vec<usize> = (0..g.n()).collect();
                match exact_triangle_factor_on(&g, &all, &exact)? {
                    Some(m) => m,
                    None => bail!("no triangle factor exists"),
                }
            };
            emit_text(&out, &factor.to_triple_list()?)
        }
        Command::SpreadEstimate {
            graph,
            sampler,
            eta,
            alpha,
            gamma,
            window: w,
            r,
            trials,
            q_target,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            let q = g.density();
            let sampler = match sampler {
                SamplerKind::AlmostFactor => Sampler::AlmostFactor { q, eta },
                SamplerKind::Pipeline => Sampler::Pipeline(SpreadConfig {
                    window: window(&w)?,
                    ..SpreadConfig::new(alpha, gamma)
                }),
            };
            let target = q_target.unwrap_or_else(|| almost_factor_spread_bound(q, eta, g.n(), 1));
            print_json(&estimate_spread(&g, &sampler, r, trials, target, seed)?)
        }
        Command::ThresholdSweep {
            graph,
            property,
            grid,
            factors,
            bisect,
            gamma,
            trials,
            json,
            out,
        } => {
            let (family, g) = graph_of(&graph, seed)?;
            let inst = Instance::new(family, g)?;
            let reference = property.reference_value(inst.graph.n(), inst.d);
            let mut pgrid = if let Some(text) = bisect {
                let v: Vec<f64> = numbers(&text, 3, "bisect")?;
                PGrid::Bisect {
                    lo: v[0],
                    hi: v[1],
                    steps: v[2] as usize,
                }
            } else if let Some(text) = grid {
                PGrid::Points(numbers(&text, 0, "grid")?)
            } else {
                let v: Vec<f64> = numbers(factors.as_deref().unwrap_or("0.5,2,7"), 3, "factors")?;
                PGrid::geometric(v[0] * reference, (v[1] * reference).min(1.0), v[2] as usize)
            };
            if let (Some(g), PGrid::Points(ps)) = (gamma, &mut pgrid) {
                ps.push(((1.0 + g) * reference).min(1.0));
            }
            let curve = threshold_sweep(&inst, property, &pgrid, trials, seed, &SweepOptions::default())?;
            if let Some(path) = json {
                write_json(&path, &curve)?;
            }
            write_curves(sink(&out)?, std::slice::from_ref(&curve))?;
            Ok(())
        }
        Command::Moments {
            graph,
            p,
            trials,
            uncovered,
        } => {
            let (_, g) = graph_of(&graph, seed)?;
            if uncovered {
                print_json(&uncovered_vertex_expectation(&g, p, trials, seed)?)
            } else {
                print_json(&isolated_vertex_moments(&g, p, trials, seed)?)
            }
        }
        Command::Events {
            graph,
            p,
            factor,
            c,
            delta,
            eps,
            sets,
            trials,
            csv,
        } => {
            let (family, g) = graph_of(&graph, seed)?;
            let p = match (p, factor) {
                (Some(p), _) => p,
                (None, Some(f)) => (f * (g.n() as f64).ln() / g.average_degree()).min(1.0),
                (None, None) => bail!("give --p or --factor"),
            };
            let params = EventParams {
                c,
                delta,
                eps,
                sets_per_trial: sets,
            };
            let report = robust_expander_events(&g, p, &params, trials, seed)?;
            if let Some(path) = csv {
                write_events(File::create(&path)?, &family, &report)?;
            }
            print_json(&report)
        }
        Command::Scaling {
            n_list,
            property,
            trials,
            lo_factor,
            hi_factor,
            points,
            json,
            out,
        } => {
            let opts = ScalingOptions {
                lo_factor,
                hi_factor,
                grid_points: points,
                ..ScalingOptions::default()
            };
            let report = scaling_fit(&n_list, property, trials, seed, &opts)?;
            if let Some(path) = json {
                write_json(&path, &report)?;
            }
            write_scaling(sink(&out)?, &report)?;
            Ok(())
        }
    }
}
