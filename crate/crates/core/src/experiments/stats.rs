//! Binomial confidence intervals and the monotone logistic fit used for
//! threshold estimates.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials` at 95%.
/// Returns `(0, 1)` when there are no trials.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64) {
    wilson_z(successes, trials, Z95)
}

pub fn wilson_z(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// `P[success] = 1 / (1 + exp(-(intercept + slope·ln p)))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub intercept: f64,
    pub slope: f64,
}

impl LogisticFit {
    pub fn prob(&self, p: f64) -> f64 {
        1.0 / (1.0 + (-(self.intercept + self.slope * p.ln())).exp())
    }

    /// The `p` with fitted probability 1/2; `None` for a flat fit.
    pub fn median(&self) -> Option<f64> {
        (self.slope > 0.0).then(|| (-self.intercept / self.slope).exp())
    }
}

// A light ridge keeps the maximiser finite on perfectly separated data.
const RIDGE: f64 = 1e-3;

/// Maximum-likelihood logistic curve in `ln p` with a nonnegative slope.
///
/// `points` holds `(p, trials, successes)` with `p > 0`; points without
/// trials are ignored. The fit is done in standardised coordinates.
pub fn fit_monotone_logistic(points: &[(f64, u64, u64)]) -> LogisticFit {
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|pt| pt.1 > 0 && pt.0 > 0.0)
        .map(|&(p, t, s)| (p.ln(), t as f64, s as f64))
        .collect();
    if pts.is_empty() {
        return LogisticFit {
            intercept: 0.0,
            slope: 0.0,
        };
    }
    let k = pts.len() as f64;
    let centre = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let spread = (pts.iter().map(|p| (p.0 - centre).powi(2)).sum::<f64>() / k).sqrt();
    let scale = if spread > 0.0 { spread } else { 1.0 };
    let data: Vec<(f64, f64, f64)> = pts.iter().map(|&(x, t, s)| ((x - centre) / scale, t, s)).collect();

    let (mut a, mut b) = newton(&data, true);
    if b < 0.0 {
        (a, b) = newton(&data, false);
    }
    LogisticFit {
        intercept: a - b * centre / scale,
        slope: b / scale,
    }
}

fn log_likelihood(data: &[(f64, f64, f64)], a: f64, b: f64) -> f64 {
    let ll: f64 = data
        .iter()
        .map(|&(u, t, s)| {
            let eta = a + b * u;
            // log(1 + e^eta) without overflow
            let softplus = if eta > 0.0 { eta + (-eta).exp().ln_1p() } else { eta.exp().ln_1p() };
            s * eta - t * softplus
        })
        .sum();
    ll - 0.5 * RIDGE * (a * a + b * b)
}

/// Ridge-penalised Newton ascent with step halving. With `with_slope`
/// false the slope is pinned at zero.
fn newton(data: &[(f64, f64, f64)], with_slope: bool) -> (f64, f64) {
    let (mut a, mut b) = (0.0, 0.0);
    let mut ll = log_likelihood(data, a, b);
    for _ in 0..200 {
        let (mut ga, mut gb, mut haa, mut hab, mut hbb) = (-RIDGE * a, -RIDGE * b, RIDGE, 0.0, RIDGE);
        for &(u, t, s) in data {
            let mu = 1.0 / (1.0 + (-(a + b * u)).exp());
            let r = s - t * mu;
            let w = t * mu * (1.0 - mu);
            ga += r;
            gb += r * u;
            haa += w;
            hab += w * u;
            hbb += w * u * u;
        }
        let (da, db) = if with_slope {
            let det = haa * hbb - hab * hab;
            ((hbb * ga - hab * gb) / det, (haa * gb - hab * ga) / det)
        } else {
            (ga / haa, 0.0)
        };
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-12 {
            let (na, nb) = (a + step * da, b + step * db);
            let nll = log_likelihood(data, na, nb);
            if nll >= ll {
                (a, b, ll) = (na, nb, nll);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved || (da.abs() + db.abs()) * step < 1e-12 {
            break;
        }
    }
    (a, b)
}
