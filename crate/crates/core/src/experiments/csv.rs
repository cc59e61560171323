//! CSV files read by the plotting scripts.
//!
//! Threshold curves use one row per grid point with the columns in
//! [`CURVE_HEADER`]. Scaling fits and event frequencies have their own
//! layouts. Readers check the header before parsing rows.

use super::events::EventsReport;
use super::scaling::ScalingReport;
use super::sweep::{CurvePoint, Property, ThresholdCurve};
use super::ExperimentError;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

pub const CURVE_HEADER: [&str; 12] = [
    "family",
    "n",
    "d",
    "lambda",
    "property",
    "p",
    "trials",
    "successes",
    "phat",
    "ci_lo",
    "ci_hi",
    "reference_value",
];

pub const SCALING_HEADER: [&str; 9] = [
    "property",
    "n",
    "p_half",
    "reference_value",
    "log_n",
    "log_p_half",
    "corrected_log_p_half",
    "slope",
    "corrected_slope",
];

pub const EVENTS_HEADER: [&str; 9] = ["family", "n", "p", "event", "trials", "failures", "frequency", "ci_lo", "ci_hi"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub family: String,
    pub n: usize,
    pub d: f64,
    pub lambda: f64,
    pub property: Property,
    pub p: f64,
    pub trials: u64,
    pub successes: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reference_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub property: Property,
    pub n: usize,
    pub p_half: f64,
    pub reference_value: f64,
    pub log_n: f64,
    pub log_p_half: f64,
    pub corrected_log_p_half: f64,
    pub slope: f64,
    pub corrected_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub family: String,
    pub n: usize,
    pub p: f64,
    pub event: String,
    pub trials: u64,
    pub failures: u64,
    pub frequency: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ThresholdCurve {
    pub fn rows(&self) -> Vec<CurveRow> {
        self.points
            .iter()
            .map(|pt| CurveRow {
                family: self.family.clone(),
                n: self.n,
                d: self.d,
                lambda: self.lambda,
                property: self.property,
                p: pt.p,
                trials: pt.trials,
                successes: pt.successes,
                phat: pt.phat,
                ci_lo: pt.ci.0,
                ci_hi: pt.ci.1,
                reference_value: self.reference_value,
            })
            .collect()
    }
}

impl ScalingReport {
    pub fn rows(&self) -> Vec<ScalingRow> {
        self.points
            .iter()
            .map(|pt| ScalingRow {
                property: self.property,
                n: pt.n,
                p_half: pt.p_half,
                reference_value: pt.reference_value,
                log_n: pt.log_n,
                log_p_half: pt.log_p_half,
                corrected_log_p_half: pt.corrected_log_p_half,
                slope: self.slope,
                corrected_slope: self.corrected_slope,
            })
            .collect()
    }
}

impl EventsReport {
    pub fn rows(&self, family: &str) -> Vec<EventRow> {
        self.events
            .iter()
            .chain(&self.small_by_size)
            .map(|e| EventRow {
                family: family.to_string(),
                n: self.n,
                p: self.p,
                event: e.event.clone(),
                trials: e.trials,
                failures: e.failures,
                frequency: e.frequency,
                ci_lo: e.ci.0,
                ci_hi: e.ci.1,
            })
            .collect()
    }
}

fn write_rows<W: Write, T: Serialize>(w: W, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<(), ExperimentError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.serialize(row)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R, header: &[&str]) -> Result<Vec<T>, ExperimentError> {
    let mut input = csv::Reader::from_reader(r);
    let found = input.headers()?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(ExperimentError::Schema(format!(
            "expected columns {}, found {}",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let rows = input.deserialize().collect::<Result<Vec<T>, _>>()?;
    if rows.is_empty() {
        return Err(ExperimentError::Schema("no data rows".into()));
    }
    Ok(rows)
}

pub fn write_curves<W: Write>(w: W, curves: &[ThresholdCurve]) -> Result<(), ExperimentError> {
    write_rows(w, &CURVE_HEADER, curves.iter().flat_map(|c| c.rows()))
}

/// Parses curve rows and rebuilds each curve, grouping consecutive rows
/// with the same family, size and property.
pub fn read_curves<R: Read>(r: R) -> Result<Vec<ThresholdCurve>, ExperimentError> {
    let rows: Vec<CurveRow> = read_rows(r, &CURVE_HEADER)?;
    let mut groups: Vec<Vec<CurveRow>> = Vec::new();
    for row in rows {
        match groups.last_mut() {
            Some(g) if g[0].family == row.family && g[0].n == row.n && g[0].property == row.property => g.push(row),
            _ => groups.push(vec![row]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let head = &g[0];
            let points = g.iter().map(|r| CurvePoint::new(r.p, r.trials, r.successes)).collect();
            ThresholdCurve::from_points(head.family.clone(), head.n, head.d, head.lambda, head.property, points)
        })
        .collect()
}

pub fn write_scaling<W: Write>(w: W, report: &ScalingReport) -> Result<(), ExperimentError> {
    write_rows(w, &SCALING_HEADER, report.rows())
}

pub fn read_scaling<R: Read>(r: R) -> Result<Vec<ScalingRow>, ExperimentError> {
    read_rows(r, &SCALING_HEADER)
}

pub fn write_events<W: Write>(w: W, family: &str, report: &EventsReport) -> Result<(), ExperimentError> {
    write_rows(w, &EVENTS_HEADER, report.rows(family))
}

pub fn read_events<R: Read>(r: R) -> Result<Vec<EventRow>, ExperimentError> {
    read_rows(r, &EVENTS_HEADER)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::sweep::{threshold_sweep, Instance, PGrid, SweepOptions};
    use crate::graph::Graph;
    use proptest::prelude::*;

    fn curve(family: &str, n: usize, prop: Property, seed: u64) -> ThresholdCurve {
        let inst = Instance::with_parameters(family, Graph::complete(n), (n - 1) as f64, 1.0);
        threshold_sweep(&inst, prop, &PGrid::geometric(0.05, 0.6, 6), 80, seed, &SweepOptions::default()).unwrap()
    }

    #[test]
    fn header_line() {
        let mut buf = Vec::new();
        write_curves(&mut buf, &[curve("complete", 12, Property::Pm, 1)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "family,n,d,lambda,property,p,trials,successes,phat,ci_lo,ci_hi,reference_value"
        );
        assert_eq!(text.lines().count(), 7);
        assert!(text.lines().nth(1).unwrap().starts_with("complete,12,11.0,1.0,PM,0.05,80,"));
    }

    #[test]
    fn curves_round_trip() {
        let curves = vec![
            curve("complete", 12, Property::Pm, 1),
            curve("complete", 12, Property::TriangleFactor, 2),
            curve("other", 9, Property::NoIsolated, 3),
        ];
        let mut buf = Vec::new();
        write_curves(&mut buf, &curves).unwrap();
        assert_eq!(read_curves(buf.as_slice()).unwrap(), curves);
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(read_curves("".as_bytes()), Err(ExperimentError::Schema(_))));
        let header_only = CURVE_HEADER.join(",") + "\n";
        assert!(matches!(read_curves(header_only.as_bytes()), Err(ExperimentError::Schema(_))));
        let wrong = "family,n,p\nx,1,0.5\n";
        assert!(matches!(read_curves(wrong.as_bytes()), Err(ExperimentError::Schema(_))));
        let mut buf = Vec::new();
        write_curves(&mut buf, &[curve("complete", 12, Property::Pm, 1)]).unwrap();
        assert!(matches!(read_scaling(buf.as_slice()), Err(ExperimentError::Schema(_))));
        let bad_value = CURVE_HEADER.join(",") + "\nx,ten,1,1,PM,0.5,1,1,1,0,1,0.1\n";
        assert!(matches!(read_curves(bad_value.as_bytes()), Err(ExperimentError::Csv(_))));
    }

    proptest! {
        #[test]
        fn arbitrary_curves_round_trip(
            counts in proptest::collection::vec((1u64..500, 0.0f64..=1.0), 1..8),
            d in 1.0f64..1000.0,
            lambda in 0.0f64..50.0,
            start in 1e-4f64..0.1,
        ) {
            let points: Vec<CurvePoint> = counts
                .iter()
                .enumerate()
                .map(|(i, &(t, r))| CurvePoint::new(start * 1.7f64.powi(i as i32), t, (r * t as f64) as u64))
                .collect();
            let c = ThresholdCurve::from_points("fam,with comma", 33, d, lambda, Property::Ham, points).unwrap();
            let mut buf = Vec::new();
            write_curves(&mut buf, std::slice::from_ref(&c)).unwrap();
            prop_assert_eq!(read_curves(buf.as_slice()).unwrap(), vec![c]);
        }
    }
}
