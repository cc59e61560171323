use super::{check_unit, SpreadError, DEFAULT_FACTOR_CAP};
use crate::experiments::stats::wilson;
use crate::graph::{bitset, BitMatrix, Graph};
use crate::rng::RngStream;
use crate::spectral::second_eigenvalue;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Inclusive bounds on the size of the last level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub max_retries: usize,
    /// Replaces the default terminal window.
    pub window: Option<Window>,
    /// Upper limit for the default window (the exact solver's cap).
    pub cap: usize,
}

impl VortexConfig {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        VortexConfig {
            alpha,
            gamma,
            max_retries: 1000,
            window: None,
            cap: DEFAULT_FACTOR_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelAudit {
    pub level: usize,
    pub size: usize,
    /// `p_i = |V_i|/n`.
    pub fraction: f64,
    /// `(1±γ)p_i d` and the extremes of `d(v, V_i)` over all of `V(G)`.
    pub band: (f64, f64),
    pub degree_range: (usize, usize),
    pub degree_ok: bool,
    /// `(1±2γ)p_i d` against degrees inside `G[V_i]`.
    pub induced_band: (f64, f64),
    pub induced_range: (usize, usize),
    pub induced_ok: bool,
    pub lambda: f64,
    /// `6 p_i λ(G)`.
    pub lambda_bound: f64,
    pub spectral_ok: bool,
}

impl LevelAudit {
    pub fn passed(&self) -> bool {
        self.degree_ok && self.induced_ok && self.spectral_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VortexSample {
    pub n: usize,
    /// Average degree and `λ` of the host.
    pub d: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub window: Window,
    pub notes: Vec<String>,
    /// `V_0 ⊇ V_1 ⊇ … ⊇ V_N`, each sorted.
    pub levels: Vec<Vec<usize>>,
    pub audits: Vec<LevelAudit>,
    /// Samples drawn, including the accepted one.
    pub attempts: usize,
    /// Rejections keyed by `"level i: property"`.
    pub rejections: BTreeMap<String, usize>,
}

impl VortexSample {
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Re-runs the size-ladder and audit checks on the stored sample.
    pub fn recheck(&self) -> bool {
        let ladder_ok = self.levels.windows(2).all(|w| {
            w[1].len() == ceil_frac(self.alpha, w[0].len()) && w[1].iter().all(|v| w[0].binary_search(v).is_ok())
        });
        let last = self.levels.last().map_or(0, Vec::len);
        ladder_ok
            && self.levels[0].len() == self.n
            && (self.window.lo..=self.window.hi).contains(&last)
            && self.audits.iter().all(LevelAudit::passed)
    }
}

fn ceil_frac(alpha: f64, size: usize) -> usize {
    (alpha * alpha * size as f64).ceil() as usize
}

/// Level sizes `n, ⌈α²n⌉, …`, continuing while the size exceeds `window.hi`.
pub fn level_ladder(n: usize, alpha: f64, window: Window) -> Result<Vec<usize>, SpreadError> {
    check_unit("alpha", alpha, true)?;
    let mut sizes = vec![n];
    while *sizes.last().unwrap() > window.hi {
        let cur = *sizes.last().unwrap();
        let next = ceil_frac(alpha, cur);
        if next >= cur {
            return Err(SpreadError::Param(format!("alpha = {alpha} does not shrink a level of size {cur}")));
        }
        sizes.push(next);
    }
    let last = *sizes.last().unwrap();
    if last < window.lo {
        return Err(SpreadError::Param(format!(
            "level sizes {sizes:?} skip the window [{}, {}]",
            window.lo, window.hi
        )));
    }
    Ok(sizes)
}

/// `[max(9, α²n^{4/3}/d), n^{4/3}/d] ∩ [9, cap]`. When the ladder would
/// jump over that window, the upper end is raised to `⌈lo/α²⌉` and the
/// change is noted.
pub fn default_window(n: usize, d: f64, alpha: f64, cap: usize) -> Result<(Window, Vec<String>), SpreadError> {
    check_unit("alpha", alpha, true)?;
    let top = (n as f64).powf(4.0 / 3.0) / d;
    let lo = ((alpha * alpha * top).ceil() as usize).max(9);
    let hi = (top.floor() as usize).min(cap);
    let mut notes = Vec::new();
    let mut window = Window { lo, hi: hi.max(lo) };
    if hi < lo {
        notes.push(format!("n^(4/3)/d = {top:.3} is below the smallest usable size {lo}"));
    }
    if n < window.lo {
        notes.push(format!("host smaller than the window; single level of size {n}"));
        return Ok((Window { lo: n, hi: n }, notes));
    }
    if level_ladder(n, alpha, window).is_err() {
        let widened = ((lo as f64 / (alpha * alpha)).ceil() as usize).max(window.hi);
        notes.push(format!(
            "terminal window [{}, {}] widened to [{}, {}] so the size ladder lands in it",
            window.lo, window.hi, lo, widened
        ));
        window.hi = widened;
    }
    level_ladder(n, alpha, window)?;
    Ok((window, notes))
}

struct Host {
    bm: BitMatrix,
    d: f64,
    lambda: f64,
}

impl Host {
    fn new(g: &Graph) -> Result<Host, SpreadError> {
        if g.n() == 0 {
            return Err(SpreadError::Param("empty host".into()));
        }
        let lambda = second_eigenvalue(g, 1e-9)
            .map_err(|e| SpreadError::Param(format!("host spectrum: {e}")))?
            .lambda;
        Ok(Host {
            bm: g.bit_matrix(),
            d: g.average_degree(),
            lambda,
        })
    }
}

/// Nested uniform random subsets with `|V_{i+1}| = ⌈α²|V_i|⌉`, redrawn
/// until every level passes the degree-band and induced-subgraph audits.
pub fn sample_vortex(
    g: &Graph,
    alpha: f64,
    gamma: f64,
    seed: u64,
    max_retries: usize,
) -> Result<VortexSample, SpreadError> {
    let cfg = VortexConfig {
        max_retries,
        ..VortexConfig::new(alpha, gamma)
    };
    sample_vortex_with(g, &cfg, seed)
}

pub fn sample_vortex_with(g: &Graph, cfg: &VortexConfig, seed: u64) -> Result<VortexSample, SpreadError> {
    let host = Host::new(g)?;
    sample_on(g, &host, cfg, seed)
}

fn sample_on(g: &Graph, host: &Host, cfg: &VortexConfig, seed: u64) -> Result<VortexSample, SpreadError> {
    check_unit("alpha", cfg.alpha, true)?;
    if !(cfg.gamma > 0.0) {
        return Err(SpreadError::Param(format!("gamma must be positive, got {}", cfg.gamma)));
    }
    if cfg.max_retries == 0 {
        return Err(SpreadError::Param("max_retries must be at least 1".into()));
    }
    let n = g.n();
    let (window, notes) = match cfg.window {
        Some(w) => (w, vec![format!("terminal window set to [{}, {}]", w.lo, w.hi)]),
        None => default_window(n, host.d, cfg.alpha, cfg.cap)?,
    };
    let sizes = level_ladder(n, cfg.alpha, window)?;
    let stream = RngStream::new(seed, "vortex");
    let mut rejections = BTreeMap::new();
    let mut last = (0, String::new());
    for attempt in 0..cfg.max_retries {
        let mut rng = stream.at(attempt as u64).rng();
        let mut levels = vec![(0..n).collect::<Vec<usize>>()];
        for &k in &sizes[1..] {
            let mut pool = levels.last().unwrap().clone();
            let mut next = pool.partial_shuffle(&mut rng, k).0.to_vec();
            next.sort_unstable();
            levels.push(next);
        }
        match audit(g, host, cfg.gamma, &levels) {
            Ok(audits) => {
                return Ok(VortexSample {
                    n,
                    d: host.d,
                    lambda: host.lambda,
                    alpha: cfg.alpha,
                    gamma: cfg.gamma,
                    window,
                    notes,
                    levels,
                    audits,
                    attempts: attempt + 1,
                    rejections,
                })
            }
            Err((level, property)) => {
                *rejections.entry(format!("level {level}: {property}")).or_insert(0) += 1;
                last = (level, property);
            }
        }
    }
    Err(SpreadError::VortexExhausted {
        attempts: cfg.max_retries,
        level: last.0,
        property: last.1,
    })
}

/// Audits every level; the first failing `(level, property)` otherwise.
fn audit(g: &Graph, host: &Host, gamma: f64, levels: &[Vec<usize>]) -> Result<Vec<LevelAudit>, (usize, String)> {
    let n = g.n();
    let mut audits = Vec::with_capacity(levels.len());
    for (i, level) in levels.iter().enumerate() {
        let mut mask = bitset::new(n);
        for &v in level {
            bitset::insert(&mut mask, v);
        }
        let frac = level.len() as f64 / n as f64;
        let target = frac * host.d;
        let band = ((1.0 - gamma) * target, (1.0 + gamma) * target);
        let induced_band = ((1.0 - 2.0 * gamma) * target, (1.0 + 2.0 * gamma) * target);
        let (mut lo, mut hi) = (usize::MAX, 0);
        let (mut ilo, mut ihi) = (usize::MAX, 0);
        for v in 0..n {
            let k = bitset::and_count(host.bm.row(v), &mask);
            lo = lo.min(k);
            hi = hi.max(k);
            if bitset::contains(&mask, v) {
                ilo = ilo.min(k);
                ihi = ihi.max(k);
            }
        }
        let within = |(a, b): (f64, f64), x: usize, y: usize| a <= x as f64 && (y as f64) <= b;
        let degree_ok = within(band, lo, hi);
        if !degree_ok {
            return Err((i, "degree band".into()));
        }
        let induced_ok = within(induced_band, ilo, ihi);
        if !induced_ok {
            return Err((i, "induced degrees".into()));
        }
        let lambda = if i == 0 {
            host.lambda
        } else {
            let (sub, _) = g.induced(level);
            second_eigenvalue(&sub, 1e-9).map_err(|e| (i, format!("spectrum: {e}")))?.lambda
        };
        let lambda_bound = 6.0 * frac * host.lambda;
        let spectral_ok = lambda <= lambda_bound + 1e-9;
        if !spectral_ok {
            return Err((i, "induced λ".into()));
        }
        audits.push(LevelAudit {
            level: i,
            size: level.len(),
            fraction: frac,
            band,
            degree_range: (lo, hi),
            degree_ok,
            induced_band,
            induced_range: (ilo, ihi),
            induced_ok,
            lambda,
            lambda_bound,
            spectral_ok,
        });
    }
    Ok(audits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub vertices: Vec<usize>,
    pub levels: Vec<usize>,
    pub trials: u64,
    /// Trials whose vortex was accepted; frequencies are over these.
    pub accepted: u64,
    pub hits: u64,
    pub frequency: f64,
    pub ci: (f64, f64),
    /// `∏ 2|V_{x_i}|/n`.
    pub bound: f64,
    /// The lower confidence limit does not exceed the bound.
    pub consistent: bool,
}

/// Estimates `P[v_1 ∈ V_{x_1} ∧ … ∧ v_m ∈ V_{x_m}]` over independent
/// vortex samples and compares it with `∏ 2|V_{x_i}|/n`.
pub fn vortex_membership_spread_check(
    g: &Graph,
    cfg: &VortexConfig,
    seed: u64,
    vertices: &[usize],
    levels: &[usize],
    trials: u64,
) -> Result<MembershipReport, SpreadError> {
    if vertices.is_empty() || vertices.len() > 3 || vertices.len() != levels.len() {
        return Err(SpreadError::Param("need 1 to 3 (vertex, level) pairs".into()));
    }
    if let Some(&v) = vertices.iter().find(|&&v| v >= g.n()) {
        return Err(SpreadError::Param(format!("vertex {v} out of range")));
    }
    let host = Host::new(g)?;
    let window = match cfg.window {
        Some(w) => w,
        None => default_window(g.n(), host.d, cfg.alpha, cfg.cap)?.0,
    };
    let sizes = level_ladder(g.n(), cfg.alpha, window)?;
    if let Some(&x) = levels.iter().find(|&&x| x >= sizes.len()) {
        return Err(SpreadError::Param(format!("level {x} beyond depth {}", sizes.len() - 1)));
    }
    let fixed = VortexConfig {
        window: Some(window),
        ..cfg.clone()
    };
    let stream = RngStream::new(seed, "vortex-membership");
    let outcomes = crate::par::map_indexed(trials as usize, |t| {
        sample_on(g, &host, &fixed, stream.at(t as u64).derive_seed())
            .ok()
            .map(|s| vertices.iter().zip(levels).all(|(&v, &x)| s.levels[x].binary_search(&v).is_ok()))
    });
    let accepted = outcomes.iter().flatten().count() as u64;
    let hits = outcomes.iter().flatten().filter(|&&h| h).count() as u64;
    let bound = levels
        .iter()
        .map(|&x| 2.0 * sizes[x] as f64 / g.n() as f64)
        .product();
    let ci = wilson(hits, accepted);
    Ok(MembershipReport {
        vertices: vertices.to_vec(),
        levels: levels.to_vec(),
        trials,
        accepted,
        hits,
        frequency: if accepted > 0 { hits as f64 / accepted as f64 } else { 0.0 },
        ci,
        bound,
        consistent: ci.0 <= bound,
    })
}
