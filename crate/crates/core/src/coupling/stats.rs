use super::{run_lean, CouplingError, CouplingParams, TriangleSystem};
use crate::graph::Graph;
use crate::hypergraph::{b1_threshold, detect_b1, detect_f_config, detect_f_prime, TripleHypergraph, DEFAULT_SEARCH_BUDGET};
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const CHUNK: usize = 2048;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingStats {
    pub trials: u64,
    pub pi: f64,
    pub hyperedges: usize,
    /// Per hyperedge, in lexicographic order.
    pub counts: Vec<u64>,
    /// Largest `|count - Tπ| / sqrt(Tπ(1-π))`.
    pub max_abs_z: f64,
    /// `Σ (count - Tπ)² / (Tπ(1-π))`, with the central 99.9% band of
    /// `χ²(hyperedges)`.
    pub chi_square: f64,
    pub chi_band: (f64, f64),
    pub chi_within_band: bool,
    /// Sum over trials of `C(|H'|, 2)` against `T·C(m, 2)·π²`.
    pub joint_pairs: u64,
    pub joint_pairs_expected: f64,
    pub failures: u64,
    pub failure_rate: f64,
    pub b1: u64,
    pub b2: u64,
    pub b2_inconclusive: u64,
    pub b3: u64,
    /// Per host edge, how often it was kept in `G_p`.
    pub edge_keeps: Vec<u64>,
}

#[derive(Default)]
struct Partial {
    counts: Vec<u64>,
    joint: u64,
    failures: u64,
    b1: u64,
    b2: u64,
    b2_inconclusive: u64,
    b3: u64,
    keeps: Vec<u64>,
}

impl Partial {
    fn merge(&mut self, o: Partial) {
        for (a, b) in self.counts.iter_mut().zip(o.counts) {
            *a += b;
        }
        for (a, b) in self.keeps.iter_mut().zip(o.keeps) {
            *a += b;
        }
        self.joint += o.joint;
        self.failures += o.failures;
        self.b1 += o.b1;
        self.b2 += o.b2;
        self.b2_inconclusive += o.b2_inconclusive;
        self.b3 += o.b3;
    }
}

/// Seed of trial `t` under master seed `seed`.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    RngStream::new(seed, "coupling-trial").at(t).derive_seed()
}

/// Runs `trials` seeded couplings and compares the output hypergraph with
/// independent `π`-sampling of the triangles.
pub fn coupling_marginal_stats(
    g: &Graph,
    params: &CouplingParams,
    trials: u64,
) -> Result<CouplingStats, CouplingError> {
    params.validate()?;
    let sys = TriangleSystem::new(g);
    let m = sys.triangles.len();
    let threshold = b1_threshold(g.n());
    let chunks = (trials as usize).div_ceil(CHUNK);
    let parts = crate::par::map_indexed(chunks, |k| -> Result<Partial, CouplingError> {
        let mut part = Partial {
            counts: vec![0; m],
            keeps: vec![0; sys.edges.len()],
            ..Partial::default()
        };
        let lo = (k * CHUNK) as u64;
        let hi = ((k + 1) * CHUNK).min(trials as usize) as u64;
        for t in lo..hi {
            let run = CouplingParams {
                seed: trial_seed(params.seed, t),
                ..*params
            };
            let out = run_lean(&sys, &run)?;
            for &j in &out.output {
                part.counts[j] += 1;
            }
            for (c, &kept) in part.keeps.iter_mut().zip(&out.kept) {
                *c += u64::from(kept);
            }
            let k = out.output.len() as u64;
            part.joint += k * k.saturating_sub(1) / 2;
            part.failures += u64::from(out.failed);
            if !out.output.is_empty() {
                let h = TripleHypergraph::new(g.n(), out.output.iter().map(|&j| sys.triangles[j]).collect())
                    .expect("distinct triangles");
                part.b1 += u64::from(detect_b1(&h, threshold).is_some());
                match detect_f_config(&h, DEFAULT_SEARCH_BUDGET) {
                    Ok(found) => part.b2 += u64::from(found.is_some()),
                    Err(_) => part.b2_inconclusive += 1,
                }
                part.b3 += u64::from(detect_f_prime(&h).is_some());
            }
        }
        Ok(part)
    });
    let mut total = Partial {
        counts: vec![0; m],
        keeps: vec![0; sys.edges.len()],
        ..Partial::default()
    };
    for part in parts {
        total.merge(part?);
    }

    let pi = params.pi();
    let tf = trials as f64;
    let var = tf * pi * (1.0 - pi);
    let (chi_square, max_abs_z) = if var > 0.0 {
        total.counts.iter().fold((0.0, 0.0f64), |(chi, z), &c| {
            let dev = c as f64 - tf * pi;
            (chi + dev * dev / var, z.max(dev.abs() / var.sqrt()))
        })
    } else {
        (0.0, 0.0)
    };
    let chi_band = if m > 0 && var > 0.0 {
        let dist = ChiSquared::new(m as f64).expect("positive degrees of freedom");
        (dist.inverse_cdf(0.0005), dist.inverse_cdf(0.9995))
    } else {
        (0.0, 0.0)
    };
    let chi_within_band = var == 0.0 || m == 0 || (chi_band.0..=chi_band.1).contains(&chi_square);
    let pairs = (m * m.saturating_sub(1) / 2) as f64;
    Ok(CouplingStats {
        trials,
        pi,
        hyperedges: m,
        counts: total.counts,
        max_abs_z,
        chi_square,
        chi_band,
        chi_within_band,
        joint_pairs: total.joint,
        joint_pairs_expected: tf * pairs * pi * pi,
        failures: total.failures,
        failure_rate: if trials > 0 { total.failures as f64 / tf } else { 0.0 },
        b1: total.b1,
        b2: total.b2,
        b2_inconclusive: total.b2_inconclusive,
        b3: total.b3,
        edge_keeps: total.keeps,
    })
}
