//! Operator norms of the localized smoothing operator
//! `A_R f = ⟨D⟩^α U f` restricted to `B_R × I`, their scaling fits and the
//! exponent arithmetic they are compared with.

pub mod fit;
pub mod mixed;
pub mod operator;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{Exponent, Order};
use crate::propagator::SectorBump;
use crate::scalar::Real;
use crate::symbols::SymbolSpec;

pub use fit::{fit_exponent, ScalingFit};
pub use mixed::{lower_bound_mixed, lower_bound_with, MixedBound, MixedConfig};
pub use operator::{
    dense_norm, operator_norm_l2, power_iteration, window_monotonicity, CurveOperator, FrequencyMultiplier,
    LinearOperator, NormEstimate, PowerConfig,
};

/// Time window of the localized operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Window<T> {
    /// `I_{R^m} = [R^m/2, 2R^m]`.
    Local,
    /// `[-T, T]`.
    Global(T),
}

impl<T: Real> Window<T> {
    /// `T = 8 R^m`.
    pub fn default_global(r: T, m: T) -> Self {
        Window::Global(T::lit(8.0) * r.powf(m))
    }

    pub fn interval(&self, r: T, m: T) -> (T, T) {
        match *self {
            Window::Local => {
                let rm = r.powf(m);
                (rm / T::lit(2.0), T::lit(2.0) * rm)
            }
            Window::Global(t) => (-t, t),
        }
    }
}

impl<T: Real> fmt::Display for Window<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Local => write!(f, "local"),
            Window::Global(t) => write!(f, "global:{t}"),
        }
    }
}

/// `local` or `global:T`; `global` alone defers `T` to [`Window::default_global`].
pub fn parse_window<T: Real>(s: &str, r: T, m: T) -> Result<Window<T>> {
    match s.trim() {
        "local" => Ok(Window::Local),
        "global" => Ok(Window::default_global(r, m)),
        v => match v.strip_prefix("global:") {
            Some(t) => {
                let t: T = crate::symbols::parse_num(t)?;
                if !(t > T::zero()) {
                    return Err(Error::Domain(format!("global window half-length must be positive, got {t}")));
                }
                Ok(Window::Global(t))
            }
            None => Err(Error::Parse(format!("window must be local or global:T, got `{v}`"))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Real + Serialize")]
pub struct SmoothingOperatorSpec<T> {
    pub sym: SymbolSpec<T>,
    pub alpha: T,
    pub q: Exponent<T>,
    pub r: Exponent<T>,
    pub order: Order,
    /// The scale `R`.
    pub scale: T,
    pub window: Window<T>,
    pub bump: SectorBump<T>,
}

impl<T: Real> SmoothingOperatorSpec<T> {
    pub fn new(sym: SymbolSpec<T>, alpha: T, q: Exponent<T>, r: Exponent<T>, order: Order, scale: T, window: Window<T>) -> Result<Self> {
        if !(scale >= T::one()) {
            return Err(Error::Domain(format!("R must be at least 1, got {scale}")));
        }
        if !alpha.is_finite() {
            return Err(Error::Domain("α must be finite".into()));
        }
        Ok(Self { sym, alpha, q, r, order, scale, window, bump: SectorBump::default() })
    }

    /// The `q = r = 2` operator with the local window.
    pub fn l2_local(sym: SymbolSpec<T>, alpha: T, scale: T) -> Result<Self> {
        let two = Exponent::Finite(T::lit(2.0));
        Self::new(sym, alpha, two, two, Order::XT, scale, Window::Local)
    }

    pub fn with_window(mut self, window: Window<T>) -> Self {
        self.window = window;
        self
    }

    pub fn interval(&self) -> (T, T) {
        self.window.interval(self.scale, self.sym.degree())
    }

    /// Theorem hypothesis for transfer runs: `2 <= q, r < ∞`.
    pub fn check_transfer_exponents(&self) -> Result<()> {
        for (name, e) in [("q", self.q), ("r", self.r)] {
            match e {
                Exponent::Finite(p) if p >= T::lit(2.0) => {}
                _ => return Err(Error::Domain(format!("transfer runs need 2 <= {name} < ∞, got {e}"))),
            }
        }
        Ok(())
    }

    /// [`predicted_exponent`] for this spec.
    pub fn predicted_exponent(&self) -> T {
        predicted_exponent(self.sym.dim(), self.sym.degree(), self.q, self.r, self.alpha)
    }
}

/// `-α + n/q + m/r - n/2`, with `1/∞ = 0`.
pub fn predicted_exponent<T: Real>(n: usize, m: T, q: Exponent<T>, r: Exponent<T>, alpha: T) -> T {
    let n = T::from_usize_lossy(n);
    -alpha + n * q.recip() + m * r.recip() - n / T::lit(2.0)
}

/// `(δ_inf, α_global_sup) = (n(1/r - 1/r̃), α - δ_inf)`; every `α' < α_global_sup`
/// is claimed.
pub fn transfer_exponent<T: Real>(n: usize, r: T, r_tilde: T, alpha: T) -> Result<(T, T)> {
    if !(r >= T::lit(2.0)) || !r.is_finite() {
        return Err(Error::Domain(format!("need 2 <= r < ∞, got {r}")));
    }
    if !(r_tilde > r) {
        return Err(Error::Domain(format!("need r̃ > r, got r = {r}, r̃ = {r_tilde}")));
    }
    let delta = T::from_usize_lossy(n) * (T::one() / r - T::one() / r_tilde);
    Ok((delta, alpha - delta))
}

impl<T: Real> FromStr for Window<T> {
    type Err = Error;

    /// `local` or `global:T` with an explicit `T`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "global" {
            return Err(Error::Parse("global window needs a half-length: global:T".into()));
        }
        parse_window(s, T::one(), T::one())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(p: f64) -> Exponent<f64> {
        Exponent::Finite(p)
    }

    #[test]
    fn predicted_examples() {
        assert!((predicted_exponent(1, 2.0, fin(2.0), fin(2.0), 0.5) - 0.5).abs() < 1e-15);
        assert!(predicted_exponent(2, 2.0, fin(3.0), Exponent::Infinity, -1.0 / 3.0).abs() < 1e-15);
        assert!((predicted_exponent(1, 2.0, fin(2.0), Exponent::Infinity, -0.25) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn transfer_examples() {
        let (d, a) = transfer_exponent::<f64>(1, 2.0, 4.0, 0.5).unwrap();
        assert!((d - 0.25).abs() < 1e-15 && (a - 0.25).abs() < 1e-15);
        let (d, _) = transfer_exponent(1, 2.0, 2.0 + 1e-9, 0.5).unwrap();
        assert!(d < 1e-9);
        let eps: f64 = 0.1;
        let (d, _) = transfer_exponent::<f64>(2, 1.0 / eps, 2.0 / eps, 0.0).unwrap();
        assert!((d - 0.1).abs() < 1e-15);
        assert!(transfer_exponent(1, 4.0, 4.0, 0.5).is_err());
        assert!(transfer_exponent(1, 4.0, 3.0, 0.5).is_err());
    }

    #[test]
    fn windows() {
        assert_eq!(Window::Local.interval(8.0, 2.0), (32.0, 128.0));
        assert_eq!(Window::<f64>::default_global(8.0, 2.0), Window::Global(512.0));
        assert_eq!("global:100".parse::<Window<f64>>().unwrap(), Window::Global(100.0));
        assert_eq!(parse_window("global", 4.0, 2.0).unwrap(), Window::Global(128.0));
        assert!("global".parse::<Window<f64>>().is_err());
        assert!("sideways".parse::<Window<f64>>().is_err());
    }
}
