//! Least-squares scaling exponents `v(R) ≈ C R^s`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit<T> {
    pub slope: T,
    /// `log C`.
    pub intercept: T,
    /// Standard error of the slope; zero for three exactly collinear points.
    pub stderr: T,
    pub scales: Vec<T>,
    pub values: Vec<T>,
}

fn is_power_of_two<T: Real>(r: T) -> bool {
    let l = r.log2();
    r >= T::one() && (l - l.round()).abs() <= T::epsilon() * T::lit(16.0) * l.abs().max(T::one())
}

/// Fit `log v = s log R + c` over at least three strictly increasing powers
/// of two `R`.
pub fn fit_exponent<T: Real>(scales: &[T], values: &[T]) -> Result<ScalingFit<T>> {
    if scales.len() != values.len() {
        return Err(Error::Domain(format!("{} scales but {} values", scales.len(), values.len())));
    }
    if scales.len() < 3 {
        return Err(Error::Domain(format!("need at least 3 scales, got {}", scales.len())));
    }
    if let Some(r) = scales.iter().find(|r| !is_power_of_two(**r)) {
        return Err(Error::Domain(format!("scale {r} is not a power of two")));
    }
    if scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("scales must be strictly increasing".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > T::zero()) || !v.is_finite()) {
        return Err(Error::Domain(format!("values must be positive and finite, got {v}")));
    }
    let n = T::from_usize_lossy(scales.len());
    let x: Vec<T> = scales.iter().map(|r| r.ln()).collect();
    let y: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|a| (*a - mx) * (*a - mx)).sum();
    let sxy: T = x.iter().zip(&y).map(|(a, b)| (*a - mx) * (*b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: T = x.iter().zip(&y).map(|(a, b)| (*b - intercept - slope * *a).powi(2)).sum();
    let stderr = (ssr / (n - T::lit(2.0)) / sxx).sqrt();
    Ok(ScalingFit { slope, intercept, stderr, scales: scales.to_vec(), values: values.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let rs = [8.0, 16.0, 32.0, 64.0];
        let vs: Vec<f64> = rs.iter().map(|r: &f64| 3.0 * r.powf(0.5)).collect();
        let f = fit_exponent(&rs, &vs).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.stderr < 1e-12);
        let c = fit_exponent(&rs, &[2.0; 4]).unwrap();
        assert!(c.slope.abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_exponent(&[8.0, 16.0], &[1.0, 2.0]).is_err());
        assert!(fit_exponent(&[8.0, 12.0, 16.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_exponent(&[16.0, 8.0, 32.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_exponent(&[8.0, 16.0, 32.0], &[1.0, 0.0, 3.0]).is_err());
        assert!(fit_exponent(&[8.0, 16.0, 32.0], &[1.0, -2.0, 3.0]).is_err());
    }
}
