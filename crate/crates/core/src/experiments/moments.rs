//! Isolated and uncovered vertex counts in `G_p`: exact moments and Monte
//! Carlo comparisons.

use super::stats::Z95;
use super::ExperimentError;
use crate::generators::{sparsify, SparsifyParams};
use crate::graph::Graph;
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub trials: u64,
    pub mean: f64,
    /// Standard error of the mean from the sample variance.
    pub std_error: f64,
    pub ci: (f64, f64),
}

impl MonteCarlo {
    fn from_counts(counts: &[usize]) -> Self {
        let k = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / k;
        let var = if counts.len() > 1 {
            counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        let se = (var / k).sqrt();
        MonteCarlo {
            trials: counts.len() as u64,
            mean,
            std_error: se,
            ci: (mean - Z95 * se, mean + Z95 * se),
        }
    }
}

/// Moments of the number `I` of isolated vertices in `G_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub n: usize,
    pub p: f64,
    /// `E[I] = Σ_v (1-p)^deg(v)`.
    pub expectation: f64,
    /// `Σ_{uv ∈ E} p(1-p)^(d(u)+d(v)-1)`, the covariance sum over edges as
    /// written in the second-moment argument.
    pub edge_covariance_sum: f64,
    /// Exact `Var(I)`: the diagonal terms plus twice the edge sum.
    pub variance: f64,
    /// `E[I]² / E[I²]`, a lower bound on `P[I > 0]`.
    pub second_moment_bound: f64,
    pub mc: Option<MonteCarlo>,
    /// `(mc mean - E[I]) / sqrt(Var(I) / trials)`.
    pub z_score: Option<f64>,
}

fn trial_graph(g: &Graph, p: f64, stream: &RngStream, t: usize) -> Graph {
    sparsify(
        g,
        SparsifyParams {
            p,
            seed: stream.at(t as u64).derive_seed(),
        },
    )
}

fn check_p(p: f64) -> Result<(), ExperimentError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(ExperimentError::Param(format!("p = {p} not in [0, 1]")))
    }
}

/// Exact first and second moments of the isolated-vertex count, with a
/// Monte Carlo estimate when `trials > 0`.
pub fn isolated_vertex_moments(g: &Graph, p: f64, trials: u64, seed: u64) -> Result<MomentReport, ExperimentError> {
    check_p(p)?;
    let keep = 1.0 - p;
    let isolated: Vec<f64> = g.degrees().iter().map(|&d| keep.powi(d as i32)).collect();
    let expectation: f64 = isolated.iter().sum();
    let edge_covariance_sum: f64 = g
        .edges()
        .iter()
        .map(|&(u, v)| p * keep.powi((g.degree(u) + g.degree(v)) as i32 - 1))
        .sum();
    let diagonal: f64 = isolated.iter().map(|q| q * (1.0 - q)).sum();
    let variance = diagonal + 2.0 * edge_covariance_sum;
    let second = variance + expectation * expectation;
    let second_moment_bound = if second > 0.0 {
        expectation * expectation / second
    } else {
        0.0
    };

    let (mc, z_score) = if trials > 0 {
        let stream = RngStream::new(seed, "isolated-moments");
        let counts = crate::par::map_indexed(trials as usize, |t| trial_graph(g, p, &stream, t).isolated_count());
        let mc = MonteCarlo::from_counts(&counts);
        let sd = (variance / trials as f64).sqrt();
        let z = if sd > 0.0 {
            (mc.mean - expectation) / sd
        } else if (mc.mean - expectation).abs() < 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
        (Some(mc), Some(z))
    } else {
        (None, None)
    };
    Ok(MomentReport {
        n: g.n(),
        p,
        expectation,
        edge_covariance_sum,
        variance,
        second_moment_bound,
        mc,
        z_score,
    })
}

/// Vertices of `G_p` in no triangle, against the correlation lower bound
/// `Σ_v (1-p³)^t(v)` with `t(v)` the number of triangles at `v` in `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncoveredReport {
    pub n: usize,
    pub p: f64,
    pub triangle_degrees: Vec<usize>,
    pub lower_bound: f64,
    pub mc: Option<MonteCarlo>,
}

pub fn triangle_degrees(g: &Graph) -> Vec<usize> {
    let bm = g.bit_matrix();
    (0..g.n())
        .map(|v| {
            g.neighbors(v)
                .iter()
                .map(|&w| crate::graph::bitset::and_count(bm.row(v), bm.row(w)))
                .sum::<usize>()
                / 2
        })
        .collect()
}

fn uncovered_count(h: &Graph) -> usize {
    triangle_degrees(h).iter().filter(|&&t| t == 0).count()
}

pub fn uncovered_vertex_expectation(g: &Graph, p: f64, trials: u64, seed: u64) -> Result<UncoveredReport, ExperimentError> {
    check_p(p)?;
    let triangle_degrees = triangle_degrees(g);
    let miss = 1.0 - p * p * p;
    let lower_bound = triangle_degrees.iter().map(|&t| miss.powi(t as i32)).sum();
    let mc = (trials > 0).then(|| {
        let stream = RngStream::new(seed, "uncovered");
        let counts = crate::par::map_indexed(trials as usize, |t| uncovered_count(&trial_graph(g, p, &stream, t)));
        MonteCarlo::from_counts(&counts)
    });
    Ok(UncoveredReport {
        n: g.n(),
        p,
        triangle_degrees,
        lower_bound,
        mc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_gnp, gen_paley, gen_random_regular};

    /// Exact moments by enumerating every subgraph of a small host.
    fn enumerate(g: &Graph, p: f64) -> (f64, f64) {
        let edges = g.edges();
        let (mut m1, mut m2) = (0.0, 0.0);
        for mask in 0u32..1 << edges.len() {
            let k = mask.count_ones() as i32;
            let w = p.powi(k) * (1.0 - p).powi(edges.len() as i32 - k);
            let mut touched = vec![false; g.n()];
            for (i, &(u, v)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    touched[u] = true;
                    touched[v] = true;
                }
            }
            let iso = touched.iter().filter(|&&t| !t).count() as f64;
            m1 += w * iso;
            m2 += w * iso * iso;
        }
        (m1, m2 - m1 * m1)
    }

    #[test]
    fn endpoints_count_isolated_vertices() {
        let g = Graph::star(4).disjoint_union(&Graph::empty(3));
        for p in [0.0, 1.0] {
            let r = isolated_vertex_moments(&g, p, 0, 1).unwrap();
            let want = if p == 0.0 { 8.0 } else { 3.0 };
            assert_eq!(r.expectation, want);
            assert_eq!(r.variance, 0.0);
        }
    }

    #[test]
    fn k100_expectation() {
        let r = isolated_vertex_moments(&Graph::complete(100), 0.05, 20_000, 9).unwrap();
        let want = 100.0 * 0.95f64.powi(99);
        assert!((r.expectation - want).abs() < 1e-12);
        assert!((r.expectation - 0.6232).abs() < 1e-4);
        assert!(r.z_score.unwrap().abs() < 3.0, "{r:?}");
    }

    #[test]
    fn variance_matches_enumeration() {
        let hosts = [
            Graph::cycle(7),
            Graph::petersen(),
            Graph::star(5),
            gen_gnp(8, 0.5, 3).unwrap(),
            Graph::path(6).disjoint_union(&Graph::complete(4)),
        ];
        for g in hosts {
            for p in [0.1, 0.4, 0.8] {
                let (mean, var) = enumerate(&g, p);
                let r = isolated_vertex_moments(&g, p, 0, 0).unwrap();
                assert!((r.expectation - mean).abs() < 1e-10);
                assert!((r.variance - var).abs() < 1e-10, "{} vs {var}", r.variance);
                assert!(r.edge_covariance_sum <= r.variance + 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_within_four_sigma() {
        for i in 0..50u64 {
            let g = match i % 3 {
                0 => gen_gnp(40 + i as usize, 0.3, i).unwrap(),
                1 => gen_random_regular(30 + 2 * i as usize, 6, i).unwrap(),
                _ => Graph::complete(20 + i as usize),
            };
            let p = 1.2 * (g.n() as f64).ln() / g.average_degree() * (0.6 + 0.02 * i as f64);
            let r = isolated_vertex_moments(&g, p.min(1.0), 2000, i).unwrap();
            assert!(r.z_score.unwrap().abs() <= 4.0, "instance {i}: {r:?}");
        }
    }

    #[test]
    fn triangle_free_host_is_fully_uncovered() {
        let g = Graph::complete_multipartite(&[5, 5]);
        let r = uncovered_vertex_expectation(&g, 0.7, 200, 1).unwrap();
        assert_eq!(r.lower_bound, 10.0);
        assert_eq!(r.mc.unwrap().mean, 10.0);
    }

    #[test]
    fn full_density_covers_everything() {
        let r = uncovered_vertex_expectation(&Graph::complete(6), 1.0, 10, 1).unwrap();
        assert_eq!(r.lower_bound, 0.0);
        assert_eq!(r.mc.unwrap().mean, 0.0);
    }

    #[test]
    fn k20_bound_below_monte_carlo() {
        let r = uncovered_vertex_expectation(&Graph::complete(20), 0.2, 4000, 5).unwrap();
        assert!(r.triangle_degrees.iter().all(|&t| t == 171));
        let want = 20.0 * (1.0 - 0.008f64).powi(171);
        assert!((r.lower_bound - want).abs() < 1e-12);
        let mc = r.mc.unwrap();
        assert!(mc.mean >= r.lower_bound - 3.0 * mc.std_error, "{mc:?} vs {want}");
    }

    #[test]
    fn triangle_degrees_on_paley() {
        // Paley(13) is strongly regular (13, 6, 2, 3): 6·2/2 triangles per vertex
        assert!(triangle_degrees(&gen_paley(13).unwrap()).iter().all(|&t| t == 6));
    }

    #[test]
    fn rejects_bad_p() {
        assert!(isolated_vertex_moments(&Graph::complete(3), 1.5, 0, 0).is_err());
    }
}
