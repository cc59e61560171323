use super::stats::{fit_monotone_logistic, wilson, LogisticFit};
use super::ExperimentError;
use crate::generators::{sparsify, SparsifyParams};
use crate::graph::Graph;
use crate::rng::RngStream;
use crate::spectral::{second_eigenvalue, DEFAULT_TOL};
use crate::spread::{exact_triangle_factor_on, ExactConfig};
use crate::structure::{find_hamiltonian_cycle, is_hamiltonian_cycle, max_matching, HamBudget, EXACT_HAM_CAP};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Property {
    Pm,
    Ham,
    TriangleFactor,
    NoIsolated,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Pm, Property::Ham, Property::TriangleFactor, Property::NoIsolated];

    pub fn name(self) -> &'static str {
        match self {
            Property::Pm => "PM",
            Property::Ham => "HAM",
            Property::TriangleFactor => "TRIANGLE_FACTOR",
            Property::NoIsolated => "NO_ISOLATED",
        }
    }

    /// Predicted threshold scale on a host with `n` vertices and degree `d`:
    /// `ln n / d`, or `n^(1/3) (ln n)^(1/3) / d` for triangle factors.
    pub fn reference_value(self, n: usize, d: f64) -> f64 {
        let n = n as f64;
        match self {
            Property::TriangleFactor => (n * n.ln()).cbrt() / d,
            _ => n.ln() / d,
        }
    }

    /// Power of `ln n` in the reference threshold.
    pub fn log_exponent(self) -> f64 {
        match self {
            Property::TriangleFactor => 1.0 / 3.0,
            _ => 1.0,
        }
    }

    /// Success only means "the search found one"; failures are not certified.
    pub fn is_heuristic(self, n: usize) -> bool {
        self == Property::Ham && n > EXACT_HAM_CAP
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Property::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| ExperimentError::Param(format!("unknown property {s:?}")))
    }
}

/// A host graph with the parameters reported alongside every curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub family: String,
    pub graph: Graph,
    pub d: f64,
    pub lambda: f64,
}

impl Instance {
    /// Uses the average degree for `d` and computes `λ`.
    pub fn new(family: impl Into<String>, graph: Graph) -> Result<Self, ExperimentError> {
        let lambda = second_eigenvalue(&graph, DEFAULT_TOL)?.lambda;
        Ok(Instance {
            family: family.into(),
            d: graph.average_degree(),
            graph,
            lambda,
        })
    }

    pub fn with_parameters(family: impl Into<String>, graph: Graph, d: f64, lambda: f64) -> Self {
        Instance {
            family: family.into(),
            graph,
            d,
            lambda,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PGrid {
    Points(Vec<f64>),
    /// Geometric bisection for the `p` where success crosses 1/2, starting
    /// from the two ends; `steps` midpoints are added.
    Bisect { lo: f64, hi: f64, steps: usize },
}

impl PGrid {
    /// `points` values spaced geometrically from `lo` to `hi`.
    pub fn geometric(lo: f64, hi: f64, points: usize) -> PGrid {
        if points < 2 {
            return PGrid::Points(vec![lo]);
        }
        let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
        PGrid::Points(
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo * ratio.powi(i as i32) })
                .collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[derive(Default)]
pub struct SweepOptions {
    pub ham: HamBudget,
    pub exact: ExactConfig,
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub phat: f64,
    pub ci: (f64, f64),
}

impl CurvePoint {
    pub fn new(p: f64, trials: u64, successes: u64) -> Self {
        CurvePoint {
            p,
            trials,
            successes,
            phat: if trials > 0 { successes as f64 / trials as f64 } else { 0.0 },
            ci: wilson(successes, trials),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCurve {
    pub family: String,
    pub n: usize,
    pub d: f64,
    pub lambda: f64,
    pub property: Property,
    /// Sorted by `p`.
    pub points: Vec<CurvePoint>,
    pub fit: LogisticFit,
    pub p_half: f64,
    pub reference_value: f64,
    pub heuristic: bool,
}

impl ThresholdCurve {
    /// Sorts the points, fits the logistic curve and places `p_half`.
    pub fn from_points(
        family: impl Into<String>,
        n: usize,
        d: f64,
        lambda: f64,
        property: Property,
        mut points: Vec<CurvePoint>,
    ) -> Result<Self, ExperimentError> {
        if points.is_empty() {
            return Err(ExperimentError::TooFewPoints { need: 1, got: 0 });
        }
        points.sort_by(|a, b| a.p.total_cmp(&b.p));
        if points.windows(2).any(|w| w[0].p == w[1].p) {
            return Err(ExperimentError::Param("repeated p in grid".into()));
        }
        let data: Vec<(f64, u64, u64)> = points.iter().map(|pt| (pt.p, pt.trials, pt.successes)).collect();
        let fit = fit_monotone_logistic(&data);
        let (lo, hi) = bracket(&points);
        let p_half = match fit.median() {
            Some(m) => m.clamp(lo, hi),
            None => (lo * hi).sqrt(),
        };
        Ok(ThresholdCurve {
            family: family.into(),
            n,
            d,
            lambda,
            property,
            points,
            fit,
            p_half,
            reference_value: property.reference_value(n, d),
            heuristic: property.is_heuristic(n),
        })
    }

    pub fn bracket(&self) -> (f64, f64) {
        bracket(&self.points)
    }
}

/// Largest `p` whose interval lies below 1/2 and smallest whose interval
/// lies above it, defaulting to the ends of the grid.
fn bracket(points: &[CurvePoint]) -> (f64, f64) {
    let (first, last) = (points[0].p, points[points.len() - 1].p);
    let lo = points.iter().filter(|pt| pt.ci.1 < 0.5).map(|pt| pt.p).fold(first, f64::max);
    let hi = points.iter().filter(|pt| pt.ci.0 > 0.5).map(|pt| pt.p).fold(last, f64::min);
    if lo <= hi {
        (lo, hi)
    } else {
        (first, last)
    }
}

/// Per-trial memory: the smallest `p` at which a Hamiltonian cycle was seen.
#[derive(Clone, Default)]
struct TrialState {
    cycle: Option<(f64, Vec<usize>)>,
}

struct Evaluator<'a> {
    g: &'a Graph,
    property: Property,
    opts: &'a SweepOptions,
    stream: RngStream,
}

impl Evaluator<'_> {
    fn edge_seed(&self, trial: usize) -> u64 {
        self.stream.at(trial as u64).derive_seed()
    }

    fn sample(&self, trial: usize, p: f64) -> Graph {
        sparsify(
            self.g,
            SparsifyParams {
                p,
                seed: self.edge_seed(trial),
            },
        )
    }

    fn run(&self, trial: usize, p: f64, state: &TrialState) -> Result<(bool, Option<Vec<usize>>), ExperimentError> {
        let h = self.sample(trial, p);
        let ok = match self.property {
            Property::NoIsolated => h.isolated_count() == 0,
            Property::Pm => max_matching(&h).is_perfect(),
            Property::TriangleFactor => {
                let all: Vec<usize> = (0..h.n()).collect();
                exact_triangle_factor_on(&h, &all, &self.opts.exact)
                    .map_err(|e| ExperimentError::Evaluator { p, reason: e.to_string() })?
                    .is_some()
            }
            Property::Ham => {
                // H_q ⊆ H_p for q ≤ p, so a cycle seen at a smaller p is reused
                if let Some((q, cycle)) = &state.cycle {
                    if *q <= p && is_hamiltonian_cycle(&h, cycle) {
                        return Ok((true, None));
                    }
                }
                let search_seed = RngStream::new(self.edge_seed(trial), "sweep-ham").at(p.to_bits()).derive_seed();
                let res = find_hamiltonian_cycle(&h, self.opts.ham, search_seed);
                return Ok((res.found, res.found.then_some(res.cycle)));
            }
        };
        Ok((ok, None))
    }
}

/// Estimates the success probability of `property` in `G_p` over a grid of
/// `p`. Trial `t` uses the same per-edge uniforms at every `p`, so its
/// outcome is monotone in `p`; a violation is reported as an error.
pub fn threshold_sweep(
    inst: &Instance,
    property: Property,
    grid: &PGrid,
    trials: u64,
    seed: u64,
    opts: &SweepOptions,
) -> Result<ThresholdCurve, ExperimentError> {
    let n = inst.graph.n();
    check_scale(property, n, opts)?;
    if trials == 0 {
        return Err(ExperimentError::Param("trials must be positive".into()));
    }
    let valid = |p: f64| p > 0.0 && p <= 1.0;
    let eval = Evaluator {
        g: &inst.graph,
        property,
        opts,
        stream: RngStream::new(seed, "sweep-trial"),
    };
    let mut states = vec![TrialState::default(); trials as usize];
    let mut outcomes: Vec<(f64, Vec<bool>)> = Vec::new();
    let mut evaluate = |p: f64, states: &mut Vec<TrialState>| -> Result<f64, ExperimentError> {
        let results = crate::par::map_indexed(states.len(), |t| eval.run(t, p, &states[t]));
        let mut row = Vec::with_capacity(results.len());
        for (t, r) in results.into_iter().enumerate() {
            let (ok, cycle) = r?;
            if let Some(c) = cycle {
                if states[t].cycle.as_ref().is_none_or(|(q, _)| p < *q) {
                    states[t].cycle = Some((p, c));
                }
            }
            row.push(ok);
        }
        let phat = row.iter().filter(|&&b| b).count() as f64 / row.len() as f64;
        outcomes.push((p, row));
        Ok(phat)
    };

    match grid {
        PGrid::Points(ps) => {
            if ps.is_empty() || !ps.iter().all(|&p| valid(p)) {
                return Err(ExperimentError::Param("grid must be nonempty with 0 < p ≤ 1".into()));
            }
            let mut ps = ps.clone();
            ps.sort_by(f64::total_cmp);
            ps.dedup();
            for p in ps {
                evaluate(p, &mut states)?;
            }
        }
        &PGrid::Bisect { lo, hi, steps } => {
            if !(valid(lo) && valid(hi) && lo < hi) {
                return Err(ExperimentError::Param(format!("bisection needs 0 < lo < hi ≤ 1, got [{lo}, {hi}]")));
            }
            evaluate(lo, &mut states)?;
            evaluate(hi, &mut states)?;
            let (mut a, mut b) = (lo, hi);
            for _ in 0..steps {
                let mid = (a * b).sqrt();
                if evaluate(mid, &mut states)? < 0.5 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
        }
    }

    outcomes.sort_by(|x, y| x.0.total_cmp(&y.0));
    if property == Property::Ham {
        close_upwards(&eval, &states, &mut outcomes)?;
    }
    for t in 0..trials as usize {
        for w in outcomes.windows(2) {
            if w[0].1[t] && !w[1].1[t] {
                return Err(ExperimentError::NotMonotone {
                    trial: t as u64,
                    lower: w[0].0,
                    upper: w[1].0,
                });
            }
        }
    }
    let points = outcomes
        .iter()
        .map(|(p, row)| CurvePoint::new(*p, trials, row.iter().filter(|&&b| b).count() as u64))
        .collect();
    ThresholdCurve::from_points(inst.family.clone(), n, inst.d, inst.lambda, property, points)
}

/// When bisection visits a larger `p` before a smaller one, a cycle found
/// later at the smaller `p` is carried to the larger graphs. Each carried
/// cycle is re-verified.
fn close_upwards(
    eval: &Evaluator<'_>,
    states: &[TrialState],
    outcomes: &mut [(f64, Vec<bool>)],
) -> Result<(), ExperimentError> {
    for (t, state) in states.iter().enumerate() {
        let Some((q, cycle)) = &state.cycle else { continue };
        for (p, row) in outcomes.iter_mut() {
            if *p > *q && !row[t] {
                if !is_hamiltonian_cycle(&eval.sample(t, *p), cycle) {
                    return Err(ExperimentError::NotMonotone {
                        trial: t as u64,
                        lower: *q,
                        upper: *p,
                    });
                }
                row[t] = true;
            }
        }
    }
    Ok(())
}

pub(crate) fn check_scale(property: Property, n: usize, opts: &SweepOptions) -> Result<(), ExperimentError> {
    match property {
        Property::Pm if n % 2 == 1 => Err(ExperimentError::Param(format!("PM needs an even number of vertices, got {n}"))),
        Property::TriangleFactor if !n.is_multiple_of(3) => Err(ExperimentError::Param(format!(
            "TRIANGLE_FACTOR needs 3 | n, got {n}"
        ))),
        Property::TriangleFactor if n > opts.exact.cap => Err(ExperimentError::Scale {
            property,
            n,
            cap: opts.exact.cap,
        }),
        Property::Ham if n < 3 => Err(ExperimentError::Param(format!("HAM needs at least 3 vertices, got {n}"))),
        _ => Ok(()),
    }
}
