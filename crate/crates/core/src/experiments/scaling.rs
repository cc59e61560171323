//! Threshold exponents on complete hosts from a log-log fit of `p_half`
//! against `n`.

use super::sweep::{check_scale, threshold_sweep, Instance, PGrid, Property, SweepOptions, ThresholdCurve};
use super::ExperimentError;
use crate::graph::Graph;
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingOptions {
    /// The grid at each `n` runs over these multiples of the reference value.
    pub lo_factor: f64,
    pub hi_factor: f64,
    pub grid_points: usize,
    pub sweep: SweepOptions,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            lo_factor: 0.4,
            hi_factor: 2.5,
            grid_points: 9,
            sweep: SweepOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub p_half: f64,
    pub reference_value: f64,
    pub log_n: f64,
    pub log_p_half: f64,
    /// `ln p_half - k ln ln n`, removing the logarithmic factor of the
    /// reference threshold.
    pub corrected_log_p_half: f64,
    pub curve: ThresholdCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub property: Property,
    /// The power `k` of `ln n` divided out.
    pub log_exponent: f64,
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub intercept: f64,
    pub corrected_slope: f64,
    pub corrected_intercept: f64,
}

/// Ordinary least squares `y = intercept + slope·x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

/// Sweeps `property` on `K_n` for each `n` on a geometric grid around the
/// reference threshold and fits `ln p_half` against `ln n`.
pub fn scaling_fit(
    n_list: &[usize],
    property: Property,
    trials: u64,
    seed: u64,
    opts: &ScalingOptions,
) -> Result<ScalingReport, ExperimentError> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return Err(ExperimentError::TooFewPoints { need: 3, got: ns.len() });
    }
    if !(opts.lo_factor > 0.0 && opts.lo_factor < opts.hi_factor && opts.grid_points >= 2) {
        return Err(ExperimentError::Param("grid factors must satisfy 0 < lo < hi with at least two points".into()));
    }
    for &n in &ns {
        check_scale(property, n, &opts.sweep)?;
    }
    let k = property.log_exponent();
    let stream = RngStream::new(seed, "scaling");
    let mut points = Vec::with_capacity(ns.len());
    for &n in &ns {
        let d = (n - 1) as f64;
        let inst = Instance::with_parameters("complete", Graph::complete(n), d, 1.0);
        let reference = property.reference_value(n, d);
        let grid = PGrid::geometric(
            reference * opts.lo_factor,
            (reference * opts.hi_factor).min(1.0),
            opts.grid_points,
        );
        let curve = threshold_sweep(&inst, property, &grid, trials, stream.at(n as u64).derive_seed(), &opts.sweep)?;
        let log_n = (n as f64).ln();
        let log_p_half = curve.p_half.ln();
        points.push(ScalingPoint {
            n,
            p_half: curve.p_half,
            reference_value: reference,
            log_n,
            log_p_half,
            corrected_log_p_half: log_p_half - k * log_n.ln(),
            curve,
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.log_n).collect();
    let raw: Vec<f64> = points.iter().map(|p| p.log_p_half).collect();
    let corrected: Vec<f64> = points.iter().map(|p| p.corrected_log_p_half).collect();
    let (intercept, slope) = least_squares(&xs, &raw);
    let (corrected_intercept, corrected_slope) = least_squares(&xs, &corrected);
    Ok(ScalingReport {
        property,
        log_exponent: k,
        points,
        slope,
        intercept,
        corrected_slope,
        corrected_intercept,
    })
}
