//! Line-oriented `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{Exponent, Order};
use crate::symbols::SymbolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Scaling,
    Transfer,
    Maximal,
    WavepacketAudit,
    SparseAudit,
    DecayAudit,
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "scaling" => Self::Scaling,
            "transfer" => Self::Transfer,
            "maximal" => Self::Maximal,
            "wavepacket-audit" => Self::WavepacketAudit,
            "sparse-audit" => Self::SparseAudit,
            "decay-audit" => Self::DecayAudit,
            other => return Err(Error::Config(format!("field `kind`: unknown experiment `{other}`"))),
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Scaling => "scaling",
            Self::Transfer => "transfer",
            Self::Maximal => "maximal",
            Self::WavepacketAudit => "wavepacket-audit",
            Self::SparseAudit => "sparse-audit",
            Self::DecayAudit => "decay-audit",
        })
    }
}

/// How a fitted slope is judged against the predicted exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeCheck {
    /// `|slope - predicted| <= tolerance`.
    Match,
    /// `slope - predicted >= tolerance`.
    Exceed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub symbol: SymbolSpec<f64>,
    pub scales: Vec<f64>,
    pub alpha: f64,
    pub q: Exponent<f64>,
    pub r: Exponent<f64>,
    pub r_tilde: Option<f64>,
    pub order: Order,
    /// `local`, `global` (`T = 8R^m`) or `global:T`.
    pub window: String,
    pub check: SlopeCheck,
    pub tolerance: f64,
    pub seed: u64,
    /// Random inputs per scale (audits).
    pub samples: usize,
    pub grid_points: usize,
    pub period: f64,
    pub levels: usize,
    pub max_cubes: usize,
    pub max_width: i64,
    pub restarts: usize,
    pub steps: usize,
    pub power_tol: f64,
    pub max_iter: usize,
    pub output: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "kind", "symbol", "R", "alpha", "q", "r", "r_tilde", "order", "window", "check", "tolerance", "seed",
    "samples", "grid_points", "period", "levels", "max_cubes", "max_width", "restarts", "steps", "power_tol",
    "max_iter", "output",
];

fn field<T: FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Config(format!("field `{key}`: {e}")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(str::trim).filter(|x| !x.is_empty()).map(|x| field::<f64>(key, x)).collect()
}

impl ExperimentConfig {
    /// Defaults for `kind`: the Schrödinger symbol in one dimension and the
    /// exponents of the corresponding acceptance run.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let two = Exponent::Finite(2.0);
        let mut c = Self {
            kind,
            symbol: SymbolSpec::schrodinger(1),
            scales: vec![8.0, 16.0, 32.0, 64.0],
            alpha: 0.5,
            q: two,
            r: two,
            r_tilde: None,
            order: Order::XT,
            window: "local".into(),
            check: SlopeCheck::Match,
            tolerance: 0.1,
            seed: 0,
            samples: 20,
            grid_points: 1024,
            period: 256.0,
            levels: 3,
            max_cubes: 128,
            max_width: 1_000_000,
            restarts: 3,
            steps: 50,
            power_tol: 1e-4,
            max_iter: 200,
            output: None,
        };
        match kind {
            ExperimentKind::Maximal => {
                c.alpha = -0.25;
                c.r = Exponent::Infinity;
                c.r_tilde = Some(4.0);
            }
            ExperimentKind::Transfer => c.r_tilde = Some(4.0),
            ExperimentKind::WavepacketAudit => c.scales = vec![4.0, 8.0],
            ExperimentKind::SparseAudit => c.samples = 50,
            ExperimentKind::DecayAudit => c.scales = vec![16.0, 32.0],
            ExperimentKind::Scaling => {}
        }
        c
    }

    /// Parses `key = value` lines; `#` starts a comment. `kind` must come
    /// first among the keys since it selects the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got `{line}`", no + 1)))?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown field `{k}`", no + 1)));
            }
            if pairs.iter().any(|(p, _): &(String, String)| p == k) {
                return Err(Error::Config(format!("line {}: field `{k}` given twice", no + 1)));
            }
            pairs.push((k.to_string(), v.trim().to_string()));
        }
        let kind = pairs
            .iter()
            .find(|(k, _)| k == "kind")
            .ok_or_else(|| Error::Config("field `kind` is required".into()))?
            .1
            .parse::<ExperimentKind>()?;
        let mut c = Self::defaults(kind);
        for (k, v) in &pairs {
            let v = v.as_str();
            match k.as_str() {
                "kind" => {}
                "symbol" => c.symbol = v.parse().map_err(|e| Error::Config(format!("field `symbol`: {e}")))?,
                "R" => c.scales = list(k, v)?,
                "alpha" => c.alpha = field(k, v)?,
                "q" => c.q = field(k, v)?,
                "r" => c.r = field(k, v)?,
                "r_tilde" => c.r_tilde = Some(field(k, v)?),
                "order" => c.order = field(k, v)?,
                "window" => c.window = v.to_string(),
                "check" => {
                    c.check = match v {
                        "match" => SlopeCheck::Match,
                        "exceed" => SlopeCheck::Exceed,
                        _ => return Err(Error::Config(format!("field `check`: expected match or exceed, got `{v}`"))),
                    }
                }
                "tolerance" => c.tolerance = field(k, v)?,
                "seed" => c.seed = field(k, v)?,
                "samples" => c.samples = field(k, v)?,
                "grid_points" => c.grid_points = field(k, v)?,
                "period" => c.period = field(k, v)?,
                "levels" => c.levels = field(k, v)?,
                "max_cubes" => c.max_cubes = field(k, v)?,
                "max_width" => c.max_width = field(k, v)?,
                "restarts" => c.restarts = field(k, v)?,
                "steps" => c.steps = field(k, v)?,
                "power_tol" => c.power_tol = field(k, v)?,
                "max_iter" => c.max_iter = field(k, v)?,
                "output" => c.output = Some(PathBuf::from(v)),
                _ => unreachable!("keys are checked above"),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks the preconditions of the modules the run will call.
    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, msg: String| Err(Error::Config(format!("field `{k}`: {msg}")));
        let needs_scaling = matches!(self.kind, ExperimentKind::Scaling | ExperimentKind::Transfer | ExperimentKind::Maximal);
        if needs_scaling {
            if self.symbol.dim() != 1 {
                return bad("symbol", format!("operator norms are implemented for n = 1, got n = {}", self.symbol.dim()));
            }
            if self.scales.len() < 3 {
                return bad("R", format!("need at least 3 scales, got {}", self.scales.len()));
            }
            if self.scales.windows(2).any(|w| !(w[1] > w[0])) {
                return bad("R", "scales must be strictly increasing".into());
            }
            if let Some(r) = self.scales.iter().find(|r| !(**r >= 1.0) || r.log2().fract() != 0.0) {
                return bad("R", format!("scales must be powers of two >= 1, got {r}"));
            }
            if !self.alpha.is_finite() {
                return bad("alpha", "must be finite".into());
            }
            crate::opnorm::parse_window(&self.window, 1.0, self.symbol.degree())
                .map_err(|e| Error::Config(format!("field `window`: {e}")))?;
        }
        if self.kind == ExperimentKind::Transfer {
            for (k, e) in [("q", self.q), ("r", self.r)] {
                match e {
                    Exponent::Finite(p) if p >= 2.0 => {}
                    _ => return bad(k, format!("transfer runs need 2 <= {k} < ∞, got {e}")),
                }
            }
            let rt = self.r_tilde.ok_or_else(|| Error::Config("field `r_tilde`: required for transfer".into()))?;
            if let Exponent::Finite(r) = self.r {
                if !(rt > r) {
                    return bad("r_tilde", format!("need r_tilde > r = {r}, got {rt}"));
                }
            }
            if self.window != "local" {
                return bad("window", "transfer compares the local window with the global one; leave it local".into());
            }
        }
        if self.kind == ExperimentKind::Maximal {
            if let Some(rt) = self.r_tilde {
                if !(rt > 1.0) || !rt.is_finite() {
                    return bad("r_tilde", format!("Sobolev display needs 1 < r_tilde < ∞, got {rt}"));
                }
            }
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance", format!("must be nonnegative, got {}", self.tolerance));
        }
        if self.samples == 0 {
            return bad("samples", "must be positive".into());
        }
        if self.kind == ExperimentKind::SparseAudit {
            if self.max_cubes == 0 || self.max_width < 1 {
                return bad("max_cubes", "need at least one cube in a box of width >= 1".into());
            }
            if self.levels == 0 {
                return bad("levels", "must be positive".into());
            }
        }
        if self.kind == ExperimentKind::WavepacketAudit && !(self.period > 0.0) {
            return bad("period", format!("must be positive, got {}", self.period));
        }
        if self.restarts == 0 || self.max_iter == 0 {
            return bad("restarts", "restarts and max_iter must be positive".into());
        }
        Ok(())
    }

    /// The configuration as sorted `key -> value` strings.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("kind", self.kind.to_string());
        put("symbol", self.symbol.to_string());
        put("R", self.scales.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","));
        put("alpha", self.alpha.to_string());
        put("q", self.q.to_string());
        put("r", self.r.to_string());
        put("r_tilde", self.r_tilde.map_or("none".into(), |v| v.to_string()));
        put("order", format!("{:?}", self.order).to_lowercase());
        put("window", self.window.clone());
        put("check", format!("{:?}", self.check).to_lowercase());
        put("tolerance", self.tolerance.to_string());
        put("seed", self.seed.to_string());
        put("samples", self.samples.to_string());
        put("grid_points", self.grid_points.to_string());
        put("period", self.period.to_string());
        put("levels", self.levels.to_string());
        put("max_cubes", self.max_cubes.to_string());
        put("max_width", self.max_width.to_string());
        put("restarts", self.restarts.to_string());
        put("steps", self.steps.to_string());
        put("power_tol", self.power_tol.to_string());
        put("max_iter", self.max_iter.to_string());
        if let Some(o) = &self.output {
            put("output", o.display().to_string());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_echoes() {
        let c = ExperimentConfig::parse("kind = scaling\n# comment\nalpha = 0.75 # trailing\nR = 8, 16, 32\ncheck = exceed\ntolerance = 0.2\n").unwrap();
        assert_eq!(c.kind, ExperimentKind::Scaling);
        assert_eq!(c.alpha, 0.75);
        assert_eq!(c.scales, vec![8.0, 16.0, 32.0]);
        assert_eq!(c.check, SlopeCheck::Exceed);
        assert_eq!(c.echo()["R"], "8,16,32");
        let m = ExperimentConfig::parse("kind = maximal").unwrap();
        assert_eq!(m.r, Exponent::Infinity);
        assert_eq!(m.alpha, -0.25);
        let s = ExperimentConfig::parse("kind=scaling\nsymbol = kind=power, m=3, n=1").unwrap();
        assert_eq!(s.symbol.degree(), 3.0);
    }

    #[test]
    fn errors_name_the_field() {
        let msg = |t: &str| ExperimentConfig::parse(t).unwrap_err().to_string();
        assert!(msg("alpha = 1").contains("`kind`"));
        assert!(msg("kind = scaling\nbogus = 1").contains("`bogus`"));
        assert!(msg("kind = scaling\nR = 8, 12, 16").contains("`R`"));
        assert!(msg("kind = scaling\nR = 8, 16").contains("`R`"));
        assert!(msg("kind = transfer\nr_tilde = 2").contains("`r_tilde`"));
        assert!(msg("kind = transfer\nr = inf").contains("`r`"));
        assert!(msg("kind = scaling\nsymbol = kind=power, m=2, n=2").contains("`symbol`"));
        assert!(msg("kind = scaling\nwindow = sideways").contains("`window`"));
        assert!(msg("kind = scaling\nalpha = x").contains("`alpha`"));
        assert!(msg("kind = scaling\nalpha = 1\nalpha = 2").contains("twice"));
        assert!(msg("kind = scaling\nnoequals").contains("line 2"));
    }
}
