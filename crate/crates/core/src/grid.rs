//! Periodic grids on the torus `[-L/2, L/2)^n` and multi-axis FFT plans.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Uniform periodic grid with `N` points per axis and period `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    n: usize,
    points: usize,
    period: T,
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize, points: usize, period: T) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::Config(format!("grid dimension must be in 1..={MAX_DIM}, got {n}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::Config(format!("points per axis must be a power of two >= 8, got {points}")));
        }
        if !(period > T::zero()) || !period.is_finite() {
            return Err(Error::Config(format!("grid period must be positive, got {period}")));
        }
        Ok(Self { n, points, period })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `N`, points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    /// `L`, the period.
    pub fn period(&self) -> T {
        self.period
    }

    pub fn dx(&self) -> T {
        self.period / T::from_usize_lossy(self.points)
    }

    /// Frequency spacing `2π/L`.
    pub fn dxi(&self) -> T {
        T::TAU() / self.period
    }

    /// `N^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spatial cell volume `Δx^n`.
    pub fn cell_volume(&self) -> T {
        self.dx().powi(self.n as i32)
    }

    /// Frequency cell volume `(2π/L)^n`.
    pub fn freq_cell_volume(&self) -> T {
        self.dxi().powi(self.n as i32)
    }

    /// Signed index in `[-N/2, N/2)` for axis position `j`.
    pub fn signed(&self, j: usize) -> i64 {
        let n = self.points as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Spatial coordinate of axis position `j` in `[-L/2, L/2)`.
    pub fn coord(&self, j: usize) -> T {
        T::lit(self.signed(j) as f64) * self.dx()
    }

    /// Frequency node `ξ_k = 2πk/L` for axis position `k` (standard FFT order).
    pub fn freq(&self, k: usize) -> T {
        T::lit(self.signed(k) as f64) * self.dxi()
    }

    /// Largest represented `|ξ_k|` along one axis, `π N / L`.
    pub fn nyquist(&self) -> T {
        T::PI() * T::from_usize_lossy(self.points) / self.period
    }

    /// Per-axis positions of a flat row-major index.
    pub fn unravel(&self, mut idx: usize) -> [usize; MAX_DIM] {
        let mut out = [0usize; MAX_DIM];
        for a in (0..self.n).rev() {
            out[a] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn ravel(&self, pos: &[usize]) -> usize {
        pos.iter().take(self.n).fold(0, |acc, &p| acc * self.points + p % self.points)
    }

    /// Spatial point of a flat index.
    pub fn point(&self, idx: usize) -> Vec<T> {
        let p = self.unravel(idx);
        (0..self.n).map(|a| self.coord(p[a])).collect()
    }

    /// Frequency vector of a flat index.
    pub fn freq_vec(&self, idx: usize) -> Vec<T> {
        let p = self.unravel(idx);
        (0..self.n).map(|a| self.freq(p[a])).collect()
    }

    pub fn freq_norm2(&self, idx: usize) -> T {
        let p = self.unravel(idx);
        (0..self.n).map(|a| self.freq(p[a]).powi(2)).sum()
    }

    /// Minimal-image difference `x - y` on the torus, per axis.
    pub fn torus_delta(&self, x: T, y: T) -> T {
        let l = self.period;
        let d = x - y;
        d - l * (d / l).round()
    }

    pub fn torus_dist2(&self, x: &[T], y: &[T]) -> T {
        x.iter().zip(y).map(|(&a, &b)| self.torus_delta(a, b).powi(2)).sum()
    }

    pub fn plan(&self) -> FftPlan<T> {
        FftPlan::new(*self)
    }

    /// Same grid, different dimension check helper.
    pub(crate) fn require_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::Domain(format!("grid is {}-dimensional, expected {n}", self.n)));
        }
        Ok(())
    }
}

/// Cached forward/inverse unnormalized FFTs for a grid.
#[derive(Clone)]
pub struct FftPlan<T: Real> {
    grid: Grid<T>,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
}

impl<T: Real> FftPlan<T> {
    pub fn new(grid: Grid<T>) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.points());
        let inv = planner.plan_fft_inverse(grid.points());
        Self { grid, fwd, inv }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// In-place `Σ_j a_j e^{-2πi jk/N}` along every axis.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.fwd);
    }

    /// In-place `Σ_k a_k e^{2πi jk/N}` along every axis (no `1/N` factor).
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(data, &self.inv);
    }

    fn run(&self, data: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        let n = self.grid.dim();
        let np = self.grid.points();
        assert_eq!(data.len(), self.grid.len(), "sample count does not match grid");
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); fft.get_inplace_scratch_len()];
        // Last axis is contiguous.
        fft.process_with_scratch(data, &mut scratch);
        let mut line = vec![Complex::new(T::zero(), T::zero()); np];
        for axis in 0..n.saturating_sub(1) {
            let stride = np.pow((n - 1 - axis) as u32);
            let blocks = data.len() / (np * stride);
            for b in 0..blocks {
                for inner in 0..stride {
                    let base = b * np * stride + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + k * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + k * stride] = *v;
                    }
                }
            }
        }
    }
}
