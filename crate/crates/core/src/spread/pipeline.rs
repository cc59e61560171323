use super::coverdown::{cover_down_within, CoverDownConfig, CoverDownReport};
use super::factor::{exact_triangle_factor_on, ExactConfig};
use super::vortex::{sample_vortex_with, VortexConfig, VortexSample, Window};
use super::{RegimeReport, SpreadError, TriangleMatching};
use crate::graph::{Graph, VertexSet};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Relative degree into each reserve demanded by cover-down.
    pub c: f64,
    pub eps: f64,
    pub vortex_retries: usize,
    pub split_retries: usize,
    pub window: Option<Window>,
    pub exact: ExactConfig,
}

impl SpreadConfig {
    pub fn new(alpha: f64, gamma: f64) -> Self {
        SpreadConfig {
            alpha,
            gamma,
            c: 0.5,
            eps: 0.05,
            vortex_retries: 1000,
            split_retries: 1000,
            window: None,
            exact: ExactConfig::default(),
        }
    }

    fn vortex(&self) -> VortexConfig {
        VortexConfig {
            max_retries: self.vortex_retries,
            window: self.window,
            cap: self.exact.cap,
            ..VortexConfig::new(self.alpha, self.gamma)
        }
    }
}

/// Cover-down at one level of the vortex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStep {
    pub level: usize,
    pub cover: CoverDownReport,
    /// Every vertex of `V_i ∖ V_{i+1}` is covered after this step.
    pub mandate_met: bool,
    /// No triangle added at this step meets `V_{i+2}`.
    pub avoids_deeper: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadRun {
    pub factor: TriangleMatching,
    pub vortex: VortexSample,
    pub steps: Vec<LevelStep>,
    /// Vertices handed to the exact solver at the end.
    pub finish_size: usize,
    pub regime: RegimeReport,
}

/// Triangle factor built by iterative absorption along a random vortex:
/// at each level, cover-down clears `V_i ∖ V_{i+1}` using a few vertices
/// of `V_{i+1} ∖ V_{i+2}`; the exact solver finishes what is left of the
/// last level.
pub fn sample_spread_factor(g: &Graph, cfg: &SpreadConfig, seed: u64) -> Result<SpreadRun, SpreadError> {
    let n = g.n();
    if !n.is_multiple_of(3) {
        return Err(SpreadError::Divisibility(n));
    }
    let stream = RngStream::new(seed, "spread-factor");
    let vortex = sample_vortex_with(g, &cfg.vortex(), stream.at(0).derive_seed()).map_err(|e| e.at("vortex"))?;
    let q = vortex.d / n as f64;
    let regime = regime_report(g, cfg, &vortex);
    let cover_cfg = CoverDownConfig {
        eps: cfg.eps,
        max_resamples: cfg.split_retries,
        ..CoverDownConfig::new(q, cfg.alpha, cfg.c)
    };

    let depth = vortex.depth();
    let sets: Vec<VertexSet> = vortex
        .levels
        .iter()
        .map(|l| VertexSet::from_unsorted(l.iter().copied()))
        .collect();
    let empty = VertexSet::empty();
    let mut factor = TriangleMatching::new(n);
    let mut steps = Vec::with_capacity(depth);
    for i in 0..depth {
        let deeper = sets.get(i + 2).unwrap_or(&empty);
        let domain = sets[i].difference(&factor.covered()).difference(deeper);
        let reserve = sets[i + 1].difference(deeper);
        let cover = cover_down_within(g, &domain, &reserve, &cover_cfg, stream.at(i as u64 + 1).derive_seed())
            .map_err(|e| e.at(format!("cover-down at level {i}")))?;
        factor.extend(&cover.matching);
        let covered = factor.covered();
        let mandate_met = sets[i].difference(&sets[i + 1]).iter().all(|v| covered.contains(v));
        let avoids_deeper = cover.matching.covered().is_disjoint(deeper);
        if !(mandate_met && avoids_deeper) {
            return Err(SpreadError::Invalid(format!("level {i} step left its mandate")).at("cover-down audit"));
        }
        steps.push(LevelStep {
            level: i,
            cover,
            mandate_met,
            avoids_deeper,
        });
    }

    let rest = sets[depth].difference(&factor.covered());
    let finish_size = rest.len();
    match exact_triangle_factor_on(g, rest.as_slice(), &cfg.exact).map_err(|e| e.at("finish"))? {
        Some(tail) => factor.extend(&tail),
        None => return Err(SpreadError::NoFactor(finish_size).at("finish")),
    }
    factor.verify_factor(g).map_err(|e| e.at("final check"))?;
    Ok(SpreadRun {
        factor,
        vortex,
        steps,
        finish_size,
        regime,
    })
}

fn regime_report(g: &Graph, cfg: &SpreadConfig, vortex: &VortexSample) -> RegimeReport {
    let n = g.n() as f64;
    let ln = n.ln();
    let (d, lambda) = (vortex.d, vortex.lambda);
    let mut r = RegimeReport {
        overrides: vortex.notes.clone(),
        ..RegimeReport::default()
    };
    let need = n.powf(5.0 / 6.0) * ln.sqrt();
    r.check("degree", d >= need, format!("d = {d:.2} against n^(5/6) ln^(1/2) n = {need:.2}"));
    let ratio = lambda * n / (d * d);
    r.check(
        "spectral gap",
        ratio <= 0.1,
        format!("λn/d² = {ratio:.4} (needs to be small; 0.1 used here)"),
    );
    let gmin = n.powf(-1.0 / 6.0) * ln.sqrt();
    r.check(
        "gamma range",
        cfg.gamma > gmin && cfg.gamma < 0.01,
        format!("γ = {} against (n^(-1/6) ln^(1/2) n, 1/100) = ({gmin:.3}, 0.01)", cfg.gamma),
    );
    let c_nominal = 1.0 - 3.0 * cfg.alpha;
    r.check(
        "reserve degree constant",
        (cfg.c - c_nominal).abs() < 1e-12,
        format!("c = {} against 1 - 3α = {c_nominal:.3}", cfg.c),
    );
    r
}
