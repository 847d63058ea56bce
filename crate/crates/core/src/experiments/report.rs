//! Run reports: JSON, CSV and gnuplot data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::opnorm::ScalingFit;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON schema (draft 2020-12) of [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub series: String,
    /// The scale `R` (or `H`, `|ζ|`, distance) the value belongs to.
    pub scale: f64,
    pub value: f64,
    pub details: BTreeMap<String, f64>,
}

impl Measurement {
    pub fn new(series: &str, scale: f64, value: f64) -> Self {
        Self { series: series.into(), scale, value, details: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.details.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub series: String,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub predicted: Option<f64>,
    pub scales: Vec<f64>,
    pub values: Vec<f64>,
}

impl FitSummary {
    pub fn from_fit(series: &str, fit: &ScalingFit<f64>, predicted: Option<f64>) -> Self {
        Self {
            series: series.into(),
            slope: fit.slope,
            intercept: fit.intercept,
            stderr: fit.stderr,
            predicted,
            scales: fit.scales.clone(),
            values: fit.values.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub measured: f64,
    /// The pass condition, in words.
    pub bound: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
    pub scalar: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            scalar: "f64".into(),
        }
    }
}

/// Wall-clock data; the only part of a report that varies between
/// identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: u64,
    pub wall_seconds: f64,
    /// Seconds per step (criterion or scale).
    pub steps: BTreeMap<String, f64>,
    /// Runtime limits per step, where declared.
    pub limits: BTreeMap<String, f64>,
    pub within_limits: bool,
}

impl Timing {
    pub fn start() -> Self {
        let started_unix =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { started_unix, wall_seconds: 0.0, steps: BTreeMap::new(), limits: BTreeMap::new(), within_limits: true }
    }

    pub fn record(&mut self, step: &str, seconds: f64, limit: Option<f64>) {
        self.steps.insert(step.into(), seconds);
        if let Some(l) = limit {
            self.limits.insert(step.into(), l);
            if seconds > l {
                self.within_limits = false;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    /// Experiment kind, or `verify` for the acceptance suite.
    pub kind: String,
    pub config: BTreeMap<String, String>,
    pub measurements: Vec<Measurement>,
    pub fits: Vec<FitSummary>,
    pub criteria: Vec<CriterionResult>,
    pub notes: Vec<String>,
    pub environment: Environment,
    pub timing: Timing,
}

impl Report {
    pub fn new(kind: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.into(),
            config,
            measurements: Vec::new(),
            fits: Vec::new(),
            criteria: Vec::new(),
            notes: Vec::new(),
            environment: Environment::current(),
            timing: Timing::start(),
        }
    }

    /// All criteria pass and every step met its runtime limit.
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed) && self.timing.within_limits
    }

    pub fn series(&self, name: &str) -> impl Iterator<Item = &Measurement> + '_ {
        let name = name.to_string();
        self.measurements.iter().filter(move |m| m.series == name)
    }

    pub fn fit(&self, series: &str) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.series == series)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON without the timing block; identical for identical config and
    /// seeds.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(o) = v.as_object_mut() {
            o.remove("timing");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    /// `series,scale,value` rows.
    pub fn measurements_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["series", "scale", "value"]).map_err(csv_err)?;
        for m in &self.measurements {
            w.write_record([m.series.clone(), m.scale.to_string(), m.value.to_string()]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// One gnuplot data block per series (`index` selects it), columns
    /// `scale value`.
    pub fn plot_data(&self) -> String {
        let mut names: Vec<&str> = Vec::new();
        for m in &self.measurements {
            if !names.contains(&m.series.as_str()) {
                names.push(&m.series);
            }
        }
        let mut out = String::new();
        for (i, name) in names.iter().enumerate() {
            if i > 0 {
                out.push_str("\n\n");
            }
            let _ = writeln!(out, "# index {i}: {name}\n# scale value");
            for m in self.series(name) {
                let _ = writeln!(out, "{} {}", m.scale, m.value);
            }
        }
        out
    }

    /// Writes `report.json`, `measurements.csv` and `plot.dat` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("measurements.csv"), self.measurements_csv()?)?;
        std::fs::write(dir.join("plot.dat"), self.plot_data())?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> crate::Error {
    crate::Error::Io(std::io::Error::other(e))
}
