//! Curve CSV and trace JSON.
//!
//! CSV: one vertex per line, comma-separated coordinates, optionally led by a
//! `t=<param>` column on every row. Blank lines and lines starting with `#`
//! are skipped. The first row fixes the dimension.
//!
//! JSON: `{"dimension", "points", "values", "steps", "residuals"}` plus an
//! optional `"levels"` array for foliation orbits.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::curves::DiscreteCurve;
use crate::error::{Error, Result};
use crate::foliation::FoliationOrbit;
use crate::point::Point;
use crate::prox::{ProxTrace, Termination};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_number(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| parse_err(line, format!("not a number: {:?}", s.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {:?}", s.trim())));
    }
    Ok(v)
}

pub fn parse_curve_csv(text: &str) -> Result<DiscreteCurve> {
    let mut points = Vec::new();
    let mut params = Vec::new();
    let mut with_params: Option<bool> = None;
    let mut dim: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').collect();
        let tagged = fields[0].trim_start().starts_with("t=");
        match with_params {
            None => with_params = Some(tagged),
            Some(expected) if expected != tagged => {
                return Err(parse_err(line_no, "the t= column must appear on every row or on none"));
            }
            _ => {}
        }
        if tagged {
            let t = fields.remove(0).trim_start().trim_start_matches("t=");
            params.push(parse_number(t, line_no)?);
        }
        let coords = fields.iter().map(|s| parse_number(s, line_no)).collect::<Result<Vec<f64>>>()?;
        if coords.is_empty() {
            return Err(parse_err(line_no, "row has no coordinates"));
        }
        match dim {
            None => dim = Some(coords.len()),
            Some(n) if n != coords.len() => {
                return Err(parse_err(line_no, format!("expected {n} coordinates, found {}", coords.len())));
            }
            _ => {}
        }
        points.push(Point::new(coords).map_err(|e| parse_err(line_no, e.to_string()))?);
    }
    if points.is_empty() {
        return Err(Error::Empty("curve file has no vertices"));
    }
    if with_params == Some(true) {
        DiscreteCurve::with_params(points, params)
    } else {
        DiscreteCurve::new(points)
    }
}

pub fn curve_to_csv(curve: &DiscreteCurve) -> String {
    let mut out = String::new();
    for (k, p) in curve.points().iter().enumerate() {
        if let Some(ps) = curve.params() {
            let _ = write!(out, "t={},", ps[k]);
        }
        let row: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default)]
    pub steps: Vec<f64>,
    #[serde(default)]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminated_by: Option<Termination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
}

impl TraceFile {
    pub fn from_trace(trace: &ProxTrace) -> Self {
        TraceFile {
            dimension: trace.dim(),
            points: trace.points.iter().map(|p| p.coords().to_vec()).collect(),
            values: trace.values.clone(),
            steps: trace.steps.clone(),
            residuals: trace.residuals.clone(),
            terminated_by: Some(trace.terminated_by),
            levels: None,
        }
    }

    pub fn from_orbit(orbit: &FoliationOrbit) -> Self {
        TraceFile {
            dimension: orbit.curve.dim(),
            points: orbit.curve.points().iter().map(|p| p.coords().to_vec()).collect(),
            values: orbit.levels.clone(),
            steps: Vec::new(),
            residuals: Vec::new(),
            terminated_by: None,
            levels: Some(orbit.levels.clone()),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Empty("trace has no points"));
        }
        if let Some(p) = self.points.iter().find(|p| p.len() != self.dimension) {
            return Err(Error::DimensionMismatch { expected: self.dimension, found: p.len() });
        }
        let m = self.points.len();
        if !self.values.is_empty() && self.values.len() != m {
            return Err(Error::invalid("\"values\" must have one entry per point"));
        }
        if !self.steps.is_empty() && self.steps.len() + 1 != m {
            return Err(Error::invalid("\"steps\" must have one entry per move"));
        }
        if !self.residuals.is_empty() && self.residuals.len() + 1 != m {
            return Err(Error::invalid("\"residuals\" must have one entry per move"));
        }
        if self.levels.as_ref().is_some_and(|l| l.len() != m) {
            return Err(Error::invalid("\"levels\" must have one entry per point"));
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<Point>> {
        self.points.iter().map(|c| Point::new(c.clone())).collect()
    }

    /// The vertices as a curve with params equal to the index.
    pub fn curve(&self) -> Result<DiscreteCurve> {
        self.validate()?;
        let params = (0..self.points.len()).map(|i| i as f64).collect();
        DiscreteCurve::with_params(self.points()?, params)
    }

    /// A full proximal trace; needs `values`, `steps` and `residuals`.
    pub fn trace(&self) -> Result<ProxTrace> {
        self.validate()?;
        let m = self.points.len();
        if self.values.len() != m || self.steps.len() + 1 != m || self.residuals.len() + 1 != m {
            return Err(Error::invalid("trace needs values, steps and residuals"));
        }
        Ok(ProxTrace {
            points: self.points()?,
            values: self.values.clone(),
            steps: self.steps.clone(),
            residuals: self.residuals.clone(),
            terminated_by: self.terminated_by.unwrap_or(Termination::MaxIter),
        })
    }
}

pub fn parse_trace_json(text: &str) -> Result<TraceFile> {
    let file: TraceFile = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
    file.validate()?;
    Ok(file)
}

pub fn trace_to_json(file: &TraceFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("trace serializes");
    s.push('\n');
    s
}
