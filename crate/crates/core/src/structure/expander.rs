use super::{max_matching, StructureError};
use crate::generators::gen_random_regular;
use crate::graph::{for_each_combination, Graph, VertexSet};
use crate::rng::RngStream;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Largest `n` accepted by exact C-expander certification.
pub const EXACT_EXPANDER_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub enum ExpanderMode {
    Exact,
    /// `per_size` random sets for each size class.
    Sampled { per_size: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailingKind {
    Expansion,
    JointEdge,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    NoViolationFound,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    Set(VertexSet),
    Pair(VertexSet, VertexSet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: FailingKind,
    pub witness: Witness,
}

/// `failing_kind` and `witness` describe the first violated condition in
/// definition order (expansion, then joint edges); `violations` lists every
/// condition that failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderReport {
    pub c: f64,
    pub holds: bool,
    pub verdict: Verdict,
    pub failing_kind: FailingKind,
    pub witness: Option<Witness>,
    pub violations: Vec<Violation>,
}

impl ExpanderReport {
    fn from_violations(c: f64, violations: Vec<Violation>, clean: Verdict) -> Self {
        match violations.first() {
            None => ExpanderReport {
                c,
                holds: true,
                verdict: clean,
                failing_kind: FailingKind::None,
                witness: None,
                violations,
            },
            Some(first) => ExpanderReport {
                c,
                holds: false,
                verdict: Verdict::Violated,
                failing_kind: first.kind,
                witness: Some(first.witness.clone()),
                violations,
            },
        }
    }

    pub fn violation(&self, kind: FailingKind) -> Option<&Witness> {
        self.violations.iter().find(|v| v.kind == kind).map(|v| &v.witness)
    }
}

/// Largest `|X|` constrained by the expansion condition: `⌊n/(2C)⌋`.
pub fn expansion_limit(n: usize, c: f64) -> usize {
    (n as f64 / (2.0 * c) + 1e-9).floor() as usize
}

/// Size of the sets in the joint-edge condition: `⌈n/(2C)⌉`.
pub fn joint_size(n: usize, c: f64) -> usize {
    (n as f64 / (2.0 * c) - 1e-9).ceil().max(1.0) as usize
}

/// `|N(X)| >= C|X|` for `1 <= |X| <= n/(2C)`, and an edge between every two
/// disjoint sets of size `⌈n/(2C)⌉`.
pub fn check_c_expander(
    g: &Graph,
    c: f64,
    mode: &ExpanderMode,
) -> Result<ExpanderReport, StructureError> {
    if !(c > 0.0) {
        return Err(StructureError::Param(format!("C must be positive, got {c}")));
    }
    match mode {
        ExpanderMode::Exact => exact(g, c),
        ExpanderMode::Sampled { per_size, seed } => Ok(sampled(g, c, *per_size, *seed)),
    }
}

fn masks_of(g: &Graph) -> Vec<u32> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | 1 << w))
        .collect()
}

fn set_of(mask: u32) -> VertexSet {
    VertexSet::from_mask(u64::from(mask))
}

fn exact(g: &Graph, c: f64) -> Result<ExpanderReport, StructureError> {
    let n = g.n();
    if n > EXACT_EXPANDER_CAP {
        return Err(StructureError::Cap {
            n,
            cap: EXACT_EXPANDER_CAP,
        });
    }
    let nbr = masks_of(g);
    let small = expansion_limit(n, c);
    let mut violations = Vec::new();
    let union_of = |idx: &[usize]| -> (u32, u32) {
        let x = idx.iter().fold(0u32, |m, &i| m | 1 << i);
        let reach = idx.iter().fold(0u32, |m, &i| m | nbr[i]);
        (x, reach & !x)
    };
    for size in 1..=small.min(n) {
        let mut witness = None;
        for_each_combination(n, size, |idx| {
            if witness.is_some() {
                return;
            }
            let (x, out) = union_of(idx);
            if (out.count_ones() as f64) < c * size as f64 {
                witness = Some(x);
            }
        });
        if let Some(x) = witness {
            violations.push(Violation {
                kind: FailingKind::Expansion,
                witness: Witness::Set(set_of(x)),
            });
            break;
        }
    }
    let k = joint_size(n, c);
    if 2 * k <= n {
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let mut witness = None;
        for_each_combination(n, k, |idx| {
            if witness.is_some() {
                return;
            }
            let (x, out) = union_of(idx);
            let far = full & !x & !out;
            if far.count_ones() as usize >= k {
                // any k vertices of the non-neighbourhood complete the pair
                let mut y = 0u32;
                let mut rest = far;
                for _ in 0..k {
                    let low = rest & rest.wrapping_neg();
                    y |= low;
                    rest &= !low;
                }
                witness = Some((x, y));
            }
        });
        if let Some((x, y)) = witness {
            violations.push(Violation {
                kind: FailingKind::JointEdge,
                witness: Witness::Pair(set_of(x), set_of(y)),
            });
        }
    }
    Ok(ExpanderReport::from_violations(c, violations, Verdict::Holds))
}

fn sampled(g: &Graph, c: f64, per_size: usize, seed: u64) -> ExpanderReport {
    let n = g.n();
    let stream = RngStream::new(seed, "expander-sample");
    let all: Vec<usize> = (0..n).collect();
    let small = expansion_limit(n, c);
    let mut violations = Vec::new();
    'sizes: for size in 1..=small.min(n) {
        let mut rng = stream.at(size as u64).rng();
        for _ in 0..per_size {
            let x = VertexSet::from_unsorted(all.choose_multiple(&mut rng, size).copied());
            let out = super::external_neighborhood(g, &x);
            if (out.len() as f64) < c * size as f64 {
                violations.push(Violation {
                    kind: FailingKind::Expansion,
                    witness: Witness::Set(x),
                });
                break 'sizes;
            }
        }
    }
    let k = joint_size(n, c);
    if 2 * k <= n {
        let mut rng = stream.at(u64::MAX).rng();
        for _ in 0..per_size {
            let x = VertexSet::from_unsorted(all.choose_multiple(&mut rng, k).copied());
            let out = super::external_neighborhood(g, &x);
            let far: Vec<usize> = (0..n).filter(|&v| !x.contains(v) && !out.contains(v)).collect();
            if far.len() >= k {
                let y = VertexSet::from_unsorted(far.into_iter().take(k));
                violations.push(Violation {
                    kind: FailingKind::JointEdge,
                    witness: Witness::Pair(x, y),
                });
                break;
            }
        }
    }
    ExpanderReport::from_violations(c, violations, Verdict::NoViolationFound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmTestConfig {
    /// Degree of the random regular graphs drawn as candidates.
    pub degree: usize,
}

impl Default for PmTestConfig {
    fn default() -> Self {
        PmTestConfig { degree: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmTestReport {
    pub c: f64,
    pub n: usize,
    pub trials: usize,
    pub certified: usize,
    pub skipped: usize,
    pub all_perfect: bool,
    /// Edge list of a certified expander without a perfect matching.
    pub counterexample: Option<String>,
}

/// Draws random regular graphs, keeps the certified exact C-expanders and
/// checks that each has a perfect matching.
pub fn expander_implies_pm_test(
    c: f64,
    n: usize,
    trials: usize,
    seed: u64,
    config: &PmTestConfig,
) -> Result<PmTestReport, StructureError> {
    if c < 3.0 {
        return Err(StructureError::Param(format!("need C >= 3, got {c}")));
    }
    if n % 2 == 1 {
        return Err(StructureError::Param(format!("need even n, got {n}")));
    }
    if n > EXACT_EXPANDER_CAP {
        return Err(StructureError::Cap {
            n,
            cap: EXACT_EXPANDER_CAP,
        });
    }
    let stream = RngStream::new(seed, "pm-test");
    let outcomes = crate::par::map_indexed(trials, |t| -> Result<Option<Option<String>>, StructureError> {
        let g = gen_random_regular(n, config.degree, stream.at(t as u64).derive_seed())
            .map_err(|e| StructureError::Param(e.to_string()))?;
        if !exact(&g, c)?.holds {
            return Ok(None);
        }
        let perfect = max_matching(&g).is_perfect();
        Ok(Some((!perfect).then(|| g.to_edge_list())))
    });
    let mut report = PmTestReport {
        c,
        n,
        trials,
        certified: 0,
        skipped: 0,
        all_perfect: true,
        counterexample: None,
    };
    for o in outcomes {
        match o? {
            None => report.skipped += 1,
            Some(bad) => {
                report.certified += 1;
                if let Some(el) = bad {
                    report.all_perfect = false;
                    report.counterexample.get_or_insert(el);
                }
            }
        }
    }
    Ok(report)
}
