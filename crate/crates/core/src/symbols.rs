//! Homogeneous dispersion symbols `Φ` with `Φ(λξ) = λ^m Φ(ξ)` and
//! nonvanishing gradient away from the origin.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symbol family.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolKind<T> {
    /// `|ξ|^m`.
    Power,
    /// `Σ_i a_i |ξ_i|^m` with positive weights `a_i`.
    Anisotropic { weights: Vec<T> },
    /// `|ξ|^m · P(ξ_1/|ξ|)` with `P(s) = 1 + Σ_k c_k s^k`; the coefficient
    /// list is the user-supplied polynomial perturbation.
    Angular { coeffs: Vec<T> },
}

/// A homogeneous symbol of degree `m` on `ℝ^n`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec<T> {
    kind: SymbolKind<T>,
    m: T,
    n: usize,
}

fn check_degree<T: Real>(m: T, n: usize) -> Result<()> {
    if !(m > T::one()) || !m.is_finite() {
        return Err(Error::Domain(format!("symbol degree must satisfy m > 1, got {m}")));
    }
    if n == 0 {
        return Err(Error::Domain("symbol dimension must be at least 1".into()));
    }
    Ok(())
}

impl<T: Real> SymbolSpec<T> {
    pub fn power(m: T, n: usize) -> Result<Self> {
        check_degree(m, n)?;
        Ok(Self { kind: SymbolKind::Power, m, n })
    }

    /// The Schrödinger symbol `|ξ|²`.
    pub fn schrodinger(n: usize) -> Self {
        Self::power(T::lit(2.0), n).expect("valid degree")
    }

    pub fn anisotropic(m: T, weights: Vec<T>) -> Result<Self> {
        check_degree(m, weights.len())?;
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::Domain("anisotropic weights must be positive and finite".into()));
        }
        let n = weights.len();
        Ok(Self { kind: SymbolKind::Anisotropic { weights }, m, n })
    }

    pub fn angular(m: T, n: usize, coeffs: Vec<T>) -> Result<Self> {
        check_degree(m, n)?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("perturbation coefficients must be finite".into()));
        }
        Ok(Self { kind: SymbolKind::Angular { coeffs }, m, n })
    }

    pub fn kind(&self) -> &SymbolKind<T> {
        &self.kind
    }

    pub fn degree(&self) -> T {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn check_len(&self, xi: &[T]) -> Result<()> {
        if xi.len() != self.n {
            return Err(Error::Domain(format!(
                "frequency has {} components, symbol lives on R^{}",
                xi.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// `Φ(ξ)`; `Φ(0) = 0`.
    pub fn value(&self, xi: &[T]) -> T {
        let r2: T = xi.iter().map(|&x| x * x).sum();
        if r2 == T::zero() {
            return T::zero();
        }
        match &self.kind {
            SymbolKind::Power => r2.powf(self.m / T::lit(2.0)),
            SymbolKind::Anisotropic { weights } => {
                weights.iter().zip(xi).map(|(&a, &x)| a * x.abs().powf(self.m)).sum()
            }
            SymbolKind::Angular { coeffs } => {
                let r = r2.sqrt();
                let (p, _) = poly_with_derivative(coeffs, xi[0] / r);
                r.powf(self.m) * p
            }
        }
    }

    /// `Φ(ξ)` and `∇Φ(ξ)`. At the origin both vanish (continuity, `m > 1`).
    pub fn phase(&self, xi: &[T]) -> Result<(T, Vec<T>)> {
        self.check_len(xi)?;
        let r2: T = xi.iter().map(|&x| x * x).sum();
        if r2 == T::zero() {
            return Ok((T::zero(), vec![T::zero(); self.n]));
        }
        let m = self.m;
        let out = match &self.kind {
            SymbolKind::Power => {
                let pm2 = r2.powf((m - T::lit(2.0)) / T::lit(2.0));
                let value = pm2 * r2;
                (value, xi.iter().map(|&x| m * pm2 * x).collect())
            }
            SymbolKind::Anisotropic { weights } => {
                let mut value = T::zero();
                let mut grad = Vec::with_capacity(self.n);
                for (&a, &x) in weights.iter().zip(xi) {
                    let ax = x.abs();
                    value = value + a * ax.powf(m);
                    grad.push(if ax == T::zero() { T::zero() } else { m * a * ax.powf(m - T::one()) * x.signum() });
                }
                (value, grad)
            }
            SymbolKind::Angular { coeffs } => {
                let r = r2.sqrt();
                let s = xi[0] / r;
                let (p, dp) = poly_with_derivative(coeffs, s);
                let rm = r.powf(m);
                let radial = m * rm / r2 * p;
                let tangential = rm / r * dp;
                let grad = xi
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let e1 = if i == 0 { T::one() } else { T::zero() };
                        radial * x + tangential * (e1 - s * x / r)
                    })
                    .collect();
                (rm * p, grad)
            }
        };
        Ok(out)
    }

    /// One-dimensional convenience: `(Φ(ξ), Φ'(ξ))`.
    pub fn phase_1d(&self, xi: T) -> (T, T) {
        let (v, g) = self.phase(&[xi]).expect("one-dimensional symbol");
        (v, g[0])
    }
}

fn poly_with_derivative<T: Real>(coeffs: &[T], s: T) -> (T, T) {
    // coeffs[k-1] = c_k.
    let mut p = T::one();
    let mut d = T::zero();
    let mut pow = T::one();
    for (i, &c) in coeffs.iter().enumerate() {
        d = d + T::from_usize_lossy(i + 1) * c * pow;
        pow = pow * s;
        p = p + c * pow;
    }
    (p, d)
}

/// Outcome of [`validate_symbol`].
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    /// Max deviation of the measured homogeneity exponent from `m`.
    pub max_exponent_deviation: f64,
    /// True when some sample had `Φ <= 0` and the ratio form was used.
    pub used_ratio_form: bool,
    /// Min `|∇Φ|` over the annulus `1/2 <= |ξ| <= 2` (contains the sector Π).
    pub min_gradient_norm: f64,
    pub min_gradient_at: Vec<f64>,
    pub passed: bool,
}

pub const HOMOGENEITY_TOL: f64 = 1e-10;
const VALIDATION_SEED: u64 = 0x5EED_0F_5EC7;

/// Randomized check of homogeneity and the gradient condition. Deterministic
/// (fixed seed); the full annulus is sampled, which includes Π.
pub fn validate_symbol<T: Real>(sym: &SymbolSpec<T>, sample_count: usize) -> Result<ValidationReport> {
    validate_symbol_seeded(sym, sample_count, VALIDATION_SEED)
}

pub fn validate_symbol_seeded<T: Real>(
    sym: &SymbolSpec<T>,
    sample_count: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if sample_count == 0 {
        return Err(Error::Precondition("sample_count must be >= 1".into()));
    }
    let n = sym.dim();
    let m = sym.degree().as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dev = 0.0f64;
    let mut ratio_form = false;
    let mut min_grad = f64::INFINITY;
    let mut min_at = vec![0.0; n];

    let probe = |xi: &[T], min_grad: &mut f64, min_at: &mut Vec<f64>| -> Result<()> {
        let (_, g) = sym.phase(xi)?;
        let gn = g.iter().map(|&v| v.as_f64().powi(2)).sum::<f64>().sqrt();
        if gn < *min_grad {
            *min_grad = gn;
            *min_at = xi.iter().map(|v| v.as_f64()).collect();
        }
        Ok(())
    };

    for _ in 0..sample_count {
        let xi = random_annulus_point::<T>(&mut rng, n);
        let lambda = loop {
            let l: f64 = rng.gen_range(0.25..4.0);
            if (l - 1.0).abs() > 0.1 {
                break l;
            }
        };
        let scaled: Vec<T> = xi.iter().map(|&x| x * T::lit(lambda)).collect();
        let a = sym.value(&xi).as_f64();
        let b = sym.value(&scaled).as_f64();
        let dev = if a > 0.0 && b > 0.0 {
            ((b / a).ln() / lambda.ln() - m).abs()
        } else {
            ratio_form = true;
            let expect = lambda.powf(m) * a;
            let scale = expect.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (b - expect).abs() / scale
            }
        };
        max_dev = max_dev.max(dev);
        probe(&xi, &mut min_grad, &mut min_at)?;
    }
    // Deterministic probes on every coordinate axis at the inner, middle and
    // outer radius; these hit the sector's central ray e_1 exactly.
    for axis in 0..n {
        for &r in &[0.5, 1.0, 2.0] {
            for &sgn in &[1.0, -1.0] {
                let mut xi = vec![T::zero(); n];
                xi[axis] = T::lit(sgn * r);
                probe(&xi, &mut min_grad, &mut min_at)?;
            }
        }
    }
    let passed = max_dev <= HOMOGENEITY_TOL && min_grad > 0.0;
    Ok(ValidationReport {
        samples: sample_count,
        max_exponent_deviation: max_dev,
        used_ratio_form: ratio_form,
        min_gradient_norm: min_grad,
        min_gradient_at: min_at,
        passed,
    })
}

/// Uniform direction, radius uniform in `[1/2, 2]`.
pub(crate) fn random_annulus_point<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
    loop {
        let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 && norm <= 1.0 {
            let r: f64 = rng.gen_range(0.5..=2.0);
            return dir.iter().map(|v| T::lit(v / norm * r)).collect();
        }
    }
}

impl<T: Real> fmt::Display for SymbolSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[T]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";");
        match &self.kind {
            SymbolKind::Power => write!(f, "kind=power, m={}, n={}", self.m, self.n),
            SymbolKind::Anisotropic { weights } => {
                write!(f, "kind=anisotropic, m={}, n={}, weights={}", self.m, self.n, join(weights))
            }
            SymbolKind::Angular { coeffs } => {
                write!(f, "kind=angular, m={}, n={}, coeffs={}", self.m, self.n, join(coeffs))
            }
        }
    }
}

/// Serialized as its textual form, which [`FromStr`] reads back.
impl<T: Real> Serialize for SymbolSpec<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<T: Real> FromStr for SymbolSpec<T> {
    type Err = Error;

    /// Parses `kind=power, m=2, n=1` style descriptors. List-valued
    /// parameters use `;` separators.
    fn from_str(s: &str) -> Result<Self> {
        let mut kind = None;
        let mut m = None;
        let mut n = None;
        let mut list: Option<Vec<T>> = None;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
            let v = v.trim();
            match k.trim() {
                "kind" => kind = Some(v.to_string()),
                "m" => m = Some(parse_num::<T>(v)?),
                "n" => n = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("n: {e}")))?),
                "weights" | "coeffs" => {
                    list = Some(
                        v.split(';')
                            .map(str::trim)
                            .filter(|x| !x.is_empty())
                            .map(parse_num::<T>)
                            .collect::<Result<_>>()?,
                    )
                }
                other => return Err(Error::Parse(format!("unknown symbol parameter `{other}`"))),
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse("symbol needs kind=".into()))?;
        let m = m.ok_or_else(|| Error::Parse("symbol needs m=".into()))?;
        match kind.as_str() {
            "power" => SymbolSpec::power(m, n.unwrap_or(1)),
            "schrodinger" => SymbolSpec::power(T::lit(2.0), n.unwrap_or(1)),
            "anisotropic" => {
                let w = list.ok_or_else(|| Error::Parse("anisotropic symbol needs weights=".into()))?;
                if let Some(n) = n {
                    if n != w.len() {
                        return Err(Error::Parse(format!("n={n} but {} weights given", w.len())));
                    }
                }
                SymbolSpec::anisotropic(m, w)
            }
            "angular" => SymbolSpec::angular(m, n.unwrap_or(1), list.unwrap_or_default()),
            other => Err(Error::Parse(format!("unknown symbol kind `{other}`"))),
        }
    }
}

pub(crate) fn parse_num<T: Real>(v: &str) -> Result<T> {
    let x: f64 = v.trim().parse().map_err(|e| Error::Parse(format!("`{v}`: {e}")))?;
    Ok(T::lit(x))
}
