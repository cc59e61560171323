//! Second-largest absolute adjacency eigenvalue `λ = max(|λ₂|, |λₙ|)`.

use crate::graph::Graph;
use crate::rng::RngStream;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_DENSE_CAP: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 500_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub d_min: usize,
    pub d_max: usize,
    pub lambda: f64,
    pub method: Method,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("graph has no vertices")]
    Empty,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("no convergence within the iteration budget (partial λ = {})", .0.lambda)]
    NotConverged(Box<SpectralReport>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralOptions {
    pub tol: f64,
    pub dense_cap: usize,
    pub max_iterations: usize,
    /// Overrides the size-based choice of method.
    pub method: Option<Method>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            tol: DEFAULT_TOL,
            dense_cap: DEFAULT_DENSE_CAP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            method: None,
        }
    }
}

pub fn second_eigenvalue(g: &Graph, tol: f64) -> Result<SpectralReport, SpectralError> {
    second_eigenvalue_with(
        g,
        &SpectralOptions {
            tol,
            ..SpectralOptions::default()
        },
    )
}

pub fn second_eigenvalue_with(
    g: &Graph,
    opts: &SpectralOptions,
) -> Result<SpectralReport, SpectralError> {
    if g.n() == 0 {
        return Err(SpectralError::Empty);
    }
    if !(opts.tol > 0.0) {
        return Err(SpectralError::BadTolerance(opts.tol));
    }
    let method = opts.method.unwrap_or(if g.n() <= opts.dense_cap {
        Method::Dense
    } else {
        Method::Iterative
    });
    let mut report = SpectralReport {
        n: g.n(),
        d_min: g.min_degree(),
        d_max: g.max_degree(),
        lambda: 0.0,
        method,
        residual: 0.0,
        iterations: 0,
        converged: true,
    };
    if g.n() == 1 || g.edge_count() == 0 {
        return Ok(report);
    }
    match method {
        Method::Dense => dense(g, &mut report),
        Method::Iterative => iterative(g, opts, &mut report),
    }
    if report.converged {
        Ok(report)
    } else {
        Err(SpectralError::NotConverged(Box::new(report)))
    }
}

/// `‖Ax - θx‖` for a unit vector `x`.
fn defect(g: &Graph, x: &[f64], theta: f64) -> f64 {
    let mut acc = 0.0;
    for (v, &xv) in x.iter().enumerate() {
        let ax: f64 = g.neighbors(v).iter().map(|&w| x[w]).sum();
        acc += (ax - theta * xv).powi(2);
    }
    acc.sqrt()
}

fn dense(g: &Graph, report: &mut SpectralReport) {
    let n = g.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let second = order[1];
    let last = order[n - 1];
    let pick = if eig.eigenvalues[second].abs() >= eig.eigenvalues[last].abs() {
        second
    } else {
        last
    };
    let theta = eig.eigenvalues[pick];
    let x: Vec<f64> = eig.eigenvectors.column(pick).iter().copied().collect();
    report.lambda = theta.abs();
    report.residual = defect(g, &x, theta);
}

struct PowerResult {
    theta: f64,
    vector: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

fn project_out(x: &mut [f64], v: &[f64]) {
    let dot: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
    x.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
}

/// Power iteration on `sign·A + shift·I`, orthogonalized against `deflate`
/// each step. `theta` is returned as an eigenvalue of `A`.
fn power(
    g: &Graph,
    sign: f64,
    shift: f64,
    deflate: Option<&[f64]>,
    label: &str,
    tol: f64,
    max_iterations: usize,
) -> PowerResult {
    let n = g.n();
    let stream = RngStream::new(0x05EC_72A1, label);
    let mut x: Vec<f64> = (0..n).map(|i| stream.unit(i as u64) - 0.5).collect();
    if let Some(v) = deflate {
        project_out(&mut x, v);
    }
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut mu = 0.0;
    for it in 1..=max_iterations {
        for (v, yv) in y.iter_mut().enumerate() {
            let ax: f64 = g.neighbors(v).iter().map(|&w| x[w]).sum();
            *yv = sign * ax + shift * x[v];
        }
        if let Some(v) = deflate {
            project_out(&mut y, v);
        }
        mu = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let residual = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (b - mu * a).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return PowerResult {
                theta: sign * (mu - shift),
                vector: x,
                iterations: it,
                converged: true,
            };
        }
        std::mem::swap(&mut x, &mut y);
        if let Some(v) = deflate {
            project_out(&mut x, v);
        }
        normalize(&mut x);
    }
    PowerResult {
        theta: sign * (mu - shift),
        vector: x,
        iterations: max_iterations,
        converged: false,
    }
}

fn iterative(g: &Graph, opts: &SpectralOptions, report: &mut SpectralReport) {
    let n = g.n();
    let shift = g.max_degree() as f64;
    let mut iterations = 0;
    let mut converged = true;
    let top: Vec<f64> = if g.min_degree() == g.max_degree() {
        vec![1.0 / (n as f64).sqrt(); n]
    } else {
        let r = power(g, 1.0, shift, None, "spectral-top", opts.tol * 1e-3, opts.max_iterations);
        iterations += r.iterations;
        converged &= r.converged;
        r.vector
    };
    // second eigenvalue from the top end, smallest from the bottom end
    let upper = power(g, 1.0, shift, Some(&top), "spectral-second", opts.tol, opts.max_iterations);
    let lower = power(g, -1.0, shift, None, "spectral-last", opts.tol, opts.max_iterations);
    iterations += upper.iterations + lower.iterations;
    converged &= upper.converged && lower.converged;
    let best = if upper.theta.abs() >= lower.theta.abs() {
        &upper
    } else {
        &lower
    };
    report.lambda = best.theta.abs();
    report.residual = defect(g, &best.vector, best.theta);
    report.iterations = iterations;
    report.converged = converged;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeBand {
    pub d_min: usize,
    pub d_max: usize,
    /// `max(|d_max/d - 1|, |1 - d_min/d|)` for the requested target `d`.
    pub gamma: f64,
}

pub fn degree_band(g: &Graph, target_d: f64) -> DegreeBand {
    let d_min = g.min_degree();
    let d_max = g.max_degree();
    let gamma = (d_max as f64 / target_d - 1.0)
        .abs()
        .max((1.0 - d_min as f64 / target_d).abs());
    DegreeBand {
        d_min,
        d_max,
        gamma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_paley, gen_random_regular};
    use proptest::prelude::*;

    fn both(g: &Graph) -> (f64, f64) {
        let d = second_eigenvalue_with(
            g,
            &SpectralOptions {
                method: Some(Method::Dense),
                ..Default::default()
            },
        )
        .unwrap();
        let i = second_eigenvalue_with(
            g,
            &SpectralOptions {
                method: Some(Method::Iterative),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(d.residual < 1e-9, "dense residual {}", d.residual);
        assert!(i.residual <= 1e-9, "iterative residual {}", i.residual);
        (d.lambda, i.lambda)
    }

    #[test]
    fn fixtures() {
        let cases = [
            (Graph::complete(5), 1.0),
            (Graph::petersen(), 2.0),
            (Graph::cycle(5), 2.0 * (std::f64::consts::PI / 5.0).cos()),
            (Graph::cycle(6), 2.0),
            (gen_paley(13).unwrap(), (1.0 + 13f64.sqrt()) / 2.0),
        ];
        for (g, want) in cases {
            let (d, i) = both(&g);
            assert!((d - want).abs() < 1e-9, "dense {d} vs {want}");
            assert!((i - want).abs() < 1e-8, "iterative {i} vs {want}");
        }
    }

    #[test]
    fn cycles_match_circulant_formula() {
        for n in 3..=14 {
            let want = (1..n)
                .map(|k| (2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()).abs())
                .fold(0.0, f64::max);
            let (d, i) = both(&Graph::cycle(n));
            assert!((d - want).abs() < 1e-9);
            assert!((i - want).abs() < 1e-8);
        }
    }

    #[test]
    fn non_regular_and_degenerate_inputs() {
        let (d, i) = both(&Graph::star(4));
        // star K_{1,4}: spectrum {2, 0, 0, 0, -2}
        assert!((d - 2.0).abs() < 1e-9 && (i - 2.0).abs() < 1e-8);
        let (d, i) = both(&Graph::path(7));
        assert!((d - i).abs() < 1e-8);
        let r = second_eigenvalue(&Graph::empty(3), 1e-9).unwrap();
        assert_eq!(r.lambda, 0.0);
        assert_eq!(second_eigenvalue(&Graph::complete(1), 1e-9).unwrap().lambda, 0.0);
        assert_eq!(second_eigenvalue(&Graph::empty(0), 1e-9), Err(SpectralError::Empty));
        assert!(second_eigenvalue(&Graph::cycle(4), 0.0).is_err());
    }

    #[test]
    fn dense_and_iterative_agree_on_random_graphs() {
        for seed in 0..50u64 {
            let n = 20 + 4 * (seed as usize % 20);
            let d = 3 + (seed as usize % 6);
            let g = if seed % 3 == 0 {
                crate::generators::gen_gnp(n, 0.2, seed).unwrap()
            } else {
                gen_random_regular(n, d, seed).unwrap()
            };
            let (a, b) = both(&g);
            assert!((a - b).abs() <= 1e-8, "seed {seed}: {a} vs {b}");
        }
    }

    #[test]
    fn degree_bands() {
        let p = Graph::petersen();
        assert_eq!(degree_band(&p, 3.0), DegreeBand { d_min: 3, d_max: 3, gamma: 0.0 });
        assert_eq!(degree_band(&Graph::star(4), 2.0), DegreeBand { d_min: 1, d_max: 4, gamma: 1.0 });
        assert_eq!(degree_band(&Graph::cycle(5), 2.0).gamma, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn relabel_invariance(seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let g = gen_random_regular(30, 4, seed).unwrap();
            let mut perm: Vec<usize> = (0..30).collect();
            perm.shuffle(&mut RngStream::new(seed, "perm").rng());
            let a = second_eigenvalue(&g, 1e-9).unwrap().lambda;
            let b = second_eigenvalue(&g.relabel(&perm), 1e-9).unwrap().lambda;
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(a <= 4.0 + 1e-9);
        }
    }
}
