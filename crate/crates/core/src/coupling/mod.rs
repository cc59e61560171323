//! Sequential coupling of `G_p` with a `π`-random sub-hypergraph of the
//! triangle hypergraph.
//!
//! A hidden sample of `G*` (each host edge kept with probability `p`, one
//! indicator per triangle on with probability `c`) is drawn up front from
//! keyed streams. Triangles are then visited in lexicographic order; the
//! algorithm only ever asks whether all of `E_j* = E_j ∪ {h_j}` is present,
//! and thins that answer with an auxiliary coin so that each hyperedge
//! enters `H'` with conditional probability exactly `π = a·p³`.

mod condprob;
mod stats;

pub use condprob::{
    conditional_prob, conditional_prob_bound, CondProb, Fallback, ProbMode, ProbSettings, RevealState,
    DEFAULT_ELEMENT_CAP,
};
pub use stats::{coupling_marginal_stats, trial_seed, CouplingStats};

use crate::generators::edge_uniform;
use crate::graph::Graph;
use crate::hypergraph::{build_triangle_hypergraph, Triple};
use crate::rng::{triple_key, RngStream};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CouplingError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("constraint component needs 2^{elements} terms, above the cap 2^{cap}, and no fallback is allowed")]
    CapExceeded { elements: usize, cap: usize },
    #[error("revealed state is contradictory at triangle {0}")]
    Inconsistent(usize),
}

/// Host edges and triangles with cross-references by id.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleSystem {
    pub n: usize,
    /// Sorted `(u, v)` with `u < v`.
    pub edges: Vec<(usize, usize)>,
    /// Lexicographic.
    pub triangles: Vec<Triple>,
    /// Edge ids of each triangle: `ab`, `ac`, `bc`.
    pub tri_edges: Vec<[usize; 3]>,
}

impl TriangleSystem {
    pub fn new(g: &Graph) -> Self {
        let edges = g.edges();
        let triangles = build_triangle_hypergraph(g).triples().to_vec();
        let id = |u: usize, v: usize| edges.binary_search(&(u, v)).expect("triangle edge in host");
        let tri_edges = triangles
            .iter()
            .map(|&[a, b, c]| [id(a, b), id(a, c), id(b, c)])
            .collect();
        TriangleSystem {
            n: g.n(),
            edges,
            triangles,
            tri_edges,
        }
    }

    pub fn triangle_id(&self, t: Triple) -> Option<usize> {
        self.triangles.binary_search(&t).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub p: f64,
    /// `π = a·p³`.
    pub a: f64,
    /// Indicator probability.
    pub c: f64,
    pub seed: u64,
    pub mode: Fallback,
    pub element_cap: usize,
}

impl CouplingParams {
    /// `a = 2⁻¹¹`, `c = 2⁻⁹`, exact probabilities.
    pub fn new(p: f64, seed: u64) -> Self {
        CouplingParams {
            p,
            a: 1.0 / 2048.0,
            c: 1.0 / 512.0,
            seed,
            mode: Fallback::Exact,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }

    pub fn pi(&self) -> f64 {
        self.a * self.p.powi(3)
    }

    /// `a < 2⁻¹⁰`, `0 < c < 1`, `c(1 - 2⁸c) > a`, `0 <= p <= 1`.
    pub fn validate(&self) -> Result<(), CouplingError> {
        let bad = |m: String| Err(CouplingError::Param(m));
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p = {} outside [0, 1]", self.p));
        }
        if !(self.a > 0.0 && self.a < 1.0 / 1024.0) {
            return bad(format!("a = {} must lie in (0, 2^-10)", self.a));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return bad(format!("c = {} must lie in (0, 1)", self.c));
        }
        if self.c * (1.0 - 256.0 * self.c) <= self.a {
            return bad(format!("c(1 - 2^8 c) = {} does not exceed a = {}", self.c * (1.0 - 256.0 * self.c), self.a));
        }
        if let Fallback::MonteCarlo { samples } = self.mode {
            if samples == 0 {
                return bad("Monte Carlo fallback needs samples > 0".into());
            }
        }
        Ok(())
    }

    fn settings(&self) -> ProbSettings {
        ProbSettings {
            p: self.p,
            c: self.c,
            fallback: self.mode,
            cap: self.element_cap,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Element {
    Edge(usize, usize),
    Indicator(usize, usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementState {
    Undetermined,
    Present,
    Absent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `π_j >= π`: coin with head probability `π/π_j`, then test `A_j`.
    Thin,
    /// `π_j < π`: coin with head probability `π`; heads voids the embedding.
    Deficient,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub triangle: Triple,
    /// Elements of `E_j*` still undetermined when the step began.
    pub pending: Vec<Element>,
    pub pi_j: f64,
    pub prob: ProbMode,
    pub branch: Branch,
    pub heads: bool,
    /// `Some(outcome)` when `A_j` was tested.
    pub verdict: Option<bool>,
    /// Elements that joined `R`.
    pub revealed: Vec<Element>,
    /// Indicators forced absent by this step.
    pub forced_absent: Vec<Element>,
    pub refuted: bool,
    pub added: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingTranscript {
    pub n: usize,
    pub params: CouplingParams,
    pub pi: f64,
    pub steps: Vec<StepRecord>,
    /// Hyperedges of `H'` in the order they were added.
    pub output: Vec<Triple>,
    pub failed: bool,
    /// The realized `G_p`.
    pub kept_edges: Vec<(usize, usize)>,
    pub edge_states: Vec<((usize, usize), ElementState)>,
    pub indicator_states: Vec<(Triple, ElementState)>,
}

impl CouplingTranscript {
    pub fn sparsified(&self) -> Graph {
        Graph::new(self.n, &self.kept_edges).expect("kept edges come from a simple graph")
    }

    /// One element event per line:
    /// `step <a b c> <branch> pi_j=<x> mode=<m> coin=<heads|tails> verdict=<holds|fails|untested>`,
    /// then `present|absent edge u v`, `present|absent indicator a b c`,
    /// `refute a b c`, `output a b c`, one per line.
    pub fn to_event_log(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(
            s,
            "# coupling n={} p={} a={} c={} seed={} pi={}",
            self.n, p.p, p.a, p.c, p.seed, self.pi
        );
        let elem = |e: &Element| match *e {
            Element::Edge(u, v) => format!("edge {u} {v}"),
            Element::Indicator(a, b, c) => format!("indicator {a} {b} {c}"),
        };
        for st in &self.steps {
            let [a, b, c] = st.triangle;
            let verdict = match st.verdict {
                Some(true) => "holds",
                Some(false) => "fails",
                None => "untested",
            };
            let branch = match st.branch {
                Branch::Thin => "thin",
                Branch::Deficient => "deficient",
            };
            let mode = match st.prob {
                ProbMode::Exact => "exact",
                ProbMode::MonteCarlo => "montecarlo",
                ProbMode::Bound => "bound",
            };
            let coin = if st.heads { "heads" } else { "tails" };
            let _ = writeln!(s, "step {a} {b} {c} {branch} pi_j={} mode={mode} coin={coin} verdict={verdict}", st.pi_j);
            for e in &st.revealed {
                let _ = writeln!(s, "present {}", elem(e));
            }
            for e in &st.forced_absent {
                let _ = writeln!(s, "absent {}", elem(e));
            }
            if st.refuted {
                let _ = writeln!(s, "refute {a} {b} {c}");
            }
            if st.added {
                let _ = writeln!(s, "output {a} {b} {c}");
            }
        }
        let _ = writeln!(s, "failed {}", self.failed);
        s
    }
}

/// Lean per-trial outcome used by the statistics driver.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Outcome {
    pub output: Vec<usize>,
    pub failed: bool,
    pub kept: Vec<bool>,
}

fn coin_stream(seed: u64) -> RngStream {
    RngStream::new(seed, "coupling-coin")
}

fn indicator_on(seed: u64, t: &Triple, c: f64) -> bool {
    RngStream::new(seed, "coupling-indicator").unit(triple_key(*t)) < c
}

/// Shared core of [`run_coupling`]; records a transcript when `record`.
fn execute(
    sys: &TriangleSystem,
    params: &CouplingParams,
    mut record: Option<&mut Vec<StepRecord>>,
) -> Result<Outcome, CouplingError> {
    let seed = params.seed;
    let pi = params.pi();
    let settings = params.settings();
    let kept: Vec<bool> = sys
        .edges
        .iter()
        .map(|&(u, v)| edge_uniform(seed, u, v) < params.p)
        .collect();
    let coins = coin_stream(seed);
    let mc = RngStream::new(seed, "coupling-mc");
    let mut state = RevealState::new(sys);
    let mut output = Vec::new();
    let mut failed = false;
    for j in 0..sys.triangles.len() {
        let t = sys.triangles[j];
        let prob = conditional_prob(sys, &state, j, &settings, mc.at(j as u64))?;
        let u = coins.unit(j as u64);
        let mut step = record.is_some().then(|| StepRecord {
            triangle: t,
            pending: pending_elements(sys, &state, j),
            pi_j: prob.value,
            prob: prob.mode,
            branch: Branch::Thin,
            heads: false,
            verdict: None,
            revealed: Vec::new(),
            forced_absent: Vec::new(),
            refuted: false,
            added: false,
        });
        if prob.value >= pi {
            let head_p = if prob.value > 0.0 { pi / prob.value } else { 0.0 };
            let heads = u < head_p;
            let mut verdict = None;
            if heads {
                let holds = sys.tri_edges[j].iter().all(|&e| kept[e]) && indicator_on(seed, &t, params.c);
                verdict = Some(holds);
                if holds {
                    let (fresh, _) = state.reveal(sys, j);
                    output.push(j);
                    if let Some(st) = step.as_mut() {
                        st.revealed = fresh.iter().map(|&e| edge_element(sys, e)).collect();
                        st.revealed.push(indicator_element(&t));
                        st.forced_absent = state
                            .saturated_constraints(sys, &fresh)
                            .map(|i| indicator_element(&sys.triangles[i]))
                            .collect();
                        st.added = true;
                    }
                } else {
                    state.refute(sys, j);
                    if let Some(st) = step.as_mut() {
                        st.refuted = true;
                        if sys.tri_edges[j].iter().all(|&e| state.edge_present[e]) {
                            st.forced_absent.push(indicator_element(&t));
                        }
                    }
                }
            }
            if let Some(st) = step.as_mut() {
                st.heads = heads;
                st.verdict = verdict;
            }
        } else {
            let heads = u < pi;
            if heads {
                failed = true;
                output.push(j);
            }
            if let Some(st) = step.as_mut() {
                st.branch = Branch::Deficient;
                st.heads = heads;
                st.added = heads;
            }
        }
        if let (Some(rec), Some(st)) = (record.as_deref_mut(), step) {
            rec.push(st);
        }
    }
    Ok(Outcome { output, failed, kept })
}

fn edge_element(sys: &TriangleSystem, e: usize) -> Element {
    let (u, v) = sys.edges[e];
    Element::Edge(u, v)
}

fn indicator_element(t: &Triple) -> Element {
    Element::Indicator(t[0], t[1], t[2])
}

fn pending_elements(sys: &TriangleSystem, state: &RevealState, j: usize) -> Vec<Element> {
    let mut out: Vec<Element> = sys.tri_edges[j]
        .iter()
        .filter(|&&e| !state.edge_present[e])
        .map(|&e| edge_element(sys, e))
        .collect();
    if !state.indicator_present[j] {
        out.push(indicator_element(&sys.triangles[j]));
    }
    out
}

/// Runs the coupling on `g` and returns the full transcript.
pub fn run_coupling(g: &Graph, params: &CouplingParams) -> Result<CouplingTranscript, CouplingError> {
    params.validate()?;
    let sys = TriangleSystem::new(g);
    run_on_system(&sys, params)
}

pub(crate) fn run_on_system(sys: &TriangleSystem, params: &CouplingParams) -> Result<CouplingTranscript, CouplingError> {
    let mut steps = Vec::with_capacity(sys.triangles.len());
    let out = execute(sys, params, Some(&mut steps))?;
    let mut edge_states: Vec<((usize, usize), ElementState)> =
        sys.edges.iter().map(|&e| (e, ElementState::Undetermined)).collect();
    let mut indicator_states: Vec<(Triple, ElementState)> =
        sys.triangles.iter().map(|&t| (t, ElementState::Undetermined)).collect();
    for st in &steps {
        for (list, state) in [(&st.revealed, ElementState::Present), (&st.forced_absent, ElementState::Absent)] {
            for e in list {
                match *e {
                    Element::Edge(u, v) => {
                        let i = sys.edges.binary_search(&(u, v)).unwrap();
                        edge_states[i].1 = state;
                    }
                    Element::Indicator(a, b, c) => {
                        let i = sys.triangle_id([a, b, c]).unwrap();
                        indicator_states[i].1 = state;
                    }
                }
            }
        }
    }
    Ok(CouplingTranscript {
        n: sys.n,
        params: *params,
        pi: params.pi(),
        steps,
        output: out.output.iter().map(|&j| sys.triangles[j]).collect(),
        failed: out.failed,
        kept_edges: sys
            .edges
            .iter()
            .zip(&out.kept)
            .filter(|(_, &k)| k)
            .map(|(&e, _)| e)
            .collect(),
        edge_states,
        indicator_states,
    })
}

pub(crate) fn run_lean(sys: &TriangleSystem, params: &CouplingParams) -> Result<Outcome, CouplingError> {
    execute(sys, params, None)
}

/// True iff the run did not fail and every output hyperedge spans a triangle
/// of the realized `G_p`.
pub fn verify_coupling_embedding(t: &CouplingTranscript) -> bool {
    if t.failed {
        return false;
    }
    let gp = t.sparsified();
    t.output
        .iter()
        .all(|&[a, b, c]| gp.has_edge(a, b) && gp.has_edge(a, c) && gp.has_edge(b, c))
}

/// Replays the transcript: every event must hit an undetermined element,
/// refuted triangles never repeat, and `A_j` verdicts agree with the
/// elements they reveal.
pub fn check_state_monotone(t: &CouplingTranscript) -> bool {
    use std::collections::{HashMap, HashSet};
    let mut states: HashMap<Element, ElementState> = HashMap::new();
    let mut refuted: HashSet<Triple> = HashSet::new();
    let mut r_size = 0usize;
    for st in &t.steps {
        for e in &st.pending {
            if states.get(e).copied().unwrap_or(ElementState::Undetermined) == ElementState::Present {
                return false;
            }
        }
        for (list, target) in [(&st.revealed, ElementState::Present), (&st.forced_absent, ElementState::Absent)] {
            for e in list {
                if states.insert(*e, target).is_some() {
                    return false;
                }
            }
        }
        let now = states.values().filter(|&&s| s == ElementState::Present).count();
        if now < r_size {
            return false;
        }
        r_size = now;
        if st.refuted && !refuted.insert(st.triangle) {
            return false;
        }
        if st.refuted != (st.verdict == Some(false)) || (st.verdict == Some(true)) != (!st.revealed.is_empty() && st.branch == Branch::Thin) {
            return false;
        }
    }
    true
}
