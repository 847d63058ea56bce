//! Scalar abstraction shared by every floating-point computation in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;

/// Floating-point scalar the numerical modules are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + FftNum + Default + Debug + Display + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Pairwise (tree) summation. The reduction order depends only on the length
/// of the input, so results are identical run to run.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(T::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise summation of complex values.
pub fn pairwise_sum_complex<T: Real>(values: &[Complex<T>]) -> Complex<T> {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
}

/// Smooth transition that is 0 for `s <= 0`, 1 for `s >= 1`, built from the
/// compactly supported mollifier `exp(-1/s)`.
pub fn smooth_step<T: Real>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    if s >= T::one() {
        return T::one();
    }
    let a = (-T::one() / s).exp();
    let b = (-T::one() / (T::one() - s)).exp();
    a / (a + b)
}

/// Standard mollifier `exp(-1/(1-s^2))` on `|s| < 1`, zero outside.
pub fn mollifier<T: Real>(s: T) -> T {
    let s2 = s * s;
    if s2 >= T::one() {
        T::zero()
    } else {
        (-T::one() / (T::one() - s2)).exp()
    }
}

/// Gauss–Legendre nodes and weights of order `m` on `[-1, 1]`, by Newton
/// iteration on `P_m` from the Chebyshev guesses.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for m in [1, 2, 5, 8] {
            let (x, w) = gauss_legendre(m);
            for deg in 0..2 * m {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "m={m} deg={deg} {q}");
            }
        }
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn smooth_step_limits() {
        assert_eq!(smooth_step(-1.0f64), 0.0);
        assert_eq!(smooth_step(2.0f64), 1.0);
        assert!((smooth_step(0.5f64) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3f32) + smooth_step(0.7f32) - 1.0).abs() < 1e-6);
    }
}
