//! Complex fields on a grid, their spectra, and spacetime slices.
//!
//! Conventions: `f̂(ξ) = ∫ e^{-iy·ξ} f(y) dy` and
//! `f(x) = (2π)^{-n} ∫ e^{ix·ξ} f̂(ξ) dξ`, both by the rectangle rule.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::{FftPlan, Grid};
use crate::scalar::{pairwise_sum, Real};

pub type C<T> = Complex<T>;

pub(crate) fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

/// Spatial samples of a function on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    grid: Grid<T>,
    samples: Vec<C<T>>,
}

/// Samples of `f̂` at the grid's frequency nodes (FFT order).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    grid: Grid<T>,
    values: Vec<C<T>>,
}

fn check_len<T: Real>(grid: &Grid<T>, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::Domain(format!("expected {} samples, got {len}", grid.len())));
    }
    Ok(())
}

fn weighted_norm2<T: Real>(v: &[C<T>], w: T) -> T {
    let sq: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
    pairwise_sum(&sq) * w
}

impl<T: Real> Field<T> {
    pub fn new(grid: Grid<T>, samples: Vec<C<T>>) -> Result<Self> {
        check_len(&grid, samples.len())?;
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: Grid<T>) -> Self {
        Self { samples: vec![czero(); grid.len()], grid }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid<T>, mut f: impl FnMut(&[T]) -> C<T>) -> Self {
        let samples = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, samples }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[C<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C<T>> {
        self.samples
    }

    /// `‖f‖₂² = Σ |f|² Δx^n`.
    pub fn norm2_sq(&self) -> T {
        weighted_norm2(&self.samples, self.grid.cell_volume())
    }

    pub fn norm2(&self) -> T {
        self.norm2_sq().sqrt()
    }

    /// `⟨f, g⟩ = Σ f·conj(g) Δx^n`.
    pub fn inner(&self, other: &Self) -> C<T> {
        let re: Vec<T> = self.samples.iter().zip(&other.samples).map(|(a, b)| (a * b.conj()).re).collect();
        let im: Vec<T> = self.samples.iter().zip(&other.samples).map(|(a, b)| (a * b.conj()).im).collect();
        Complex::new(pairwise_sum(&re), pairwise_sum(&im)) * self.grid.cell_volume()
    }

    pub fn scale(&self, c: C<T>) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|z| z * c).collect() }
    }

    /// `a·self + b·other`.
    pub fn axpby(&self, a: C<T>, other: &Self, b: C<T>) -> Self {
        let samples = self.samples.iter().zip(&other.samples).map(|(x, y)| x * a + y * b).collect();
        Self { grid: self.grid, samples }
    }

    /// Periodic shift by whole grid steps: `g(x) = f(x - shift·Δx)`.
    pub fn translate(&self, shift: &[i64]) -> Self {
        let g = &self.grid;
        let np = g.points() as i64;
        let mut out = vec![czero(); g.len()];
        for (i, z) in self.samples.iter().enumerate() {
            let p = g.unravel(i);
            let q: Vec<usize> = (0..g.dim()).map(|a| (p[a] as i64 + shift[a]).rem_euclid(np) as usize).collect();
            out[g.ravel(&q)] = *z;
        }
        Self { grid: self.grid, samples: out }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    /// `‖self - other‖₂ / ‖other‖₂`.
    pub fn rel_l2_diff(&self, other: &Self) -> T {
        let d = self.axpby(C::new(T::one(), T::zero()), other, C::new(-T::one(), T::zero()));
        d.norm2() / other.norm2()
    }

    pub fn dft(&self) -> Spectrum<T> {
        self.dft_with(&self.grid.plan())
    }

    pub fn dft_with(&self, plan: &FftPlan<T>) -> Spectrum<T> {
        let mut v = self.samples.clone();
        plan.forward(&mut v);
        let w = self.grid.cell_volume();
        v.iter_mut().for_each(|z| *z = *z * w);
        Spectrum { grid: self.grid, values: v }
    }
}

impl<T: Real> Spectrum<T> {
    pub fn new(grid: Grid<T>, values: Vec<C<T>>) -> Result<Self> {
        check_len(&grid, values.len())?;
        Ok(Self { grid, values })
    }

    /// Samples `g(ξ)` at every frequency node.
    pub fn from_fn(grid: Grid<T>, mut g: impl FnMut(&[T]) -> C<T>) -> Self {
        let values = (0..grid.len()).map(|i| g(&grid.freq_vec(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C<T>] {
        &mut self.values
    }

    /// `(2π)^{-n} Σ |f̂|² (2π/L)^n`, equal to `‖f‖₂²` by Parseval.
    pub fn norm2_sq(&self) -> T {
        let w = self.grid.freq_cell_volume() / T::TAU().powi(self.grid.dim() as i32);
        weighted_norm2(&self.values, w)
    }

    /// Pointwise multiplication by a real or complex multiplier `m(ξ)`.
    pub fn multiply(&self, m: impl Fn(&[T]) -> C<T>) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| z * m(&self.grid.freq_vec(i)))
            .collect();
        Self { grid: self.grid, values }
    }

    /// Fraction of `Σ|f̂|²` carried by nodes where `keep` holds.
    pub fn mass_fraction(&self, keep: impl Fn(&[T]) -> bool) -> T {
        let mut inside = Vec::new();
        let mut all = Vec::with_capacity(self.values.len());
        for (i, z) in self.values.iter().enumerate() {
            let m = z.norm_sqr();
            all.push(m);
            if keep(&self.grid.freq_vec(i)) {
                inside.push(m);
            }
        }
        let total = pairwise_sum(&all);
        if total == T::zero() {
            return T::one();
        }
        pairwise_sum(&inside) / total
    }

    pub fn idft(&self) -> Field<T> {
        self.idft_with(&self.grid.plan())
    }

    pub fn idft_with(&self, plan: &FftPlan<T>) -> Field<T> {
        let mut v = self.values.clone();
        plan.inverse(&mut v);
        let w = T::one() / self.grid.period().powi(self.grid.dim() as i32);
        v.iter_mut().for_each(|z| *z = *z * w);
        Field { grid: self.grid, samples: v }
    }
}

/// `u(t, x)` on a grid at uniformly spaced times.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeField<T> {
    grid: Grid<T>,
    times: Vec<T>,
    slices: Vec<Vec<C<T>>>,
}

/// Relative tolerance on uniform time spacing.
pub const TIME_SPACING_TOL: f64 = 1e-12;

pub(crate) fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("at least one time is required".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("times must be finite".into()));
    }
    if times.len() >= 2 {
        let dt = (times[times.len() - 1] - times[0]) / T::from_usize_lossy(times.len() - 1);
        if !(dt > T::zero()) {
            return Err(Error::Domain("times must be strictly increasing".into()));
        }
        let scale = times.iter().fold(dt, |m, t| m.max(t.abs()));
        let tol = T::lit(TIME_SPACING_TOL).max(T::epsilon() * T::lit(16.0)) * scale;
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > tol {
                return Err(Error::Domain("times must be uniformly spaced".into()));
            }
        }
    }
    Ok(())
}

/// `count` uniformly spaced times from `t0` to `t1` inclusive.
pub fn uniform_times<T: Real>(t0: T, t1: T, count: usize) -> Vec<T> {
    if count <= 1 {
        return vec![t0];
    }
    let dt = (t1 - t0) / T::from_usize_lossy(count - 1);
    (0..count).map(|s| t0 + dt * T::from_usize_lossy(s)).collect()
}

impl<T: Real> SpacetimeField<T> {
    pub fn new(grid: Grid<T>, times: Vec<T>, slices: Vec<Vec<C<T>>>) -> Result<Self> {
        check_times(&times)?;
        if slices.len() != times.len() {
            return Err(Error::Domain(format!("{} slices for {} times", slices.len(), times.len())));
        }
        for s in &slices {
            check_len(&grid, s.len())?;
        }
        Ok(Self { grid, times, slices })
    }

    /// Builds `u(t,x) = g(t,x)` by sampling.
    pub fn from_fn(grid: Grid<T>, times: Vec<T>, mut g: impl FnMut(T, &[T]) -> C<T>) -> Result<Self> {
        let slices = times
            .iter()
            .map(|&t| (0..grid.len()).map(|i| g(t, &grid.point(i))).collect())
            .collect();
        Self::new(grid, times, slices)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Time step; zero for a single slice.
    pub fn dt(&self) -> T {
        if self.times.len() < 2 {
            T::zero()
        } else {
            (self.times[self.times.len() - 1] - self.times[0]) / T::from_usize_lossy(self.times.len() - 1)
        }
    }

    pub fn slices(&self) -> &[Vec<C<T>>] {
        &self.slices
    }

    pub fn slice_field(&self, s: usize) -> Field<T> {
        Field { grid: self.grid, samples: self.slices[s].clone() }
    }

    pub fn scale(&self, c: C<T>) -> Self {
        let slices = self.slices.iter().map(|s| s.iter().map(|z| z * c).collect()).collect();
        Self { grid: self.grid, times: self.times.clone(), slices }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.slices
            .iter()
            .zip(&other.slices)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(T::zero(), T::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid1() -> Grid<f64> {
        Grid::new(1, 64, 10.0).unwrap()
    }

    #[test]
    fn constant_has_only_zero_frequency() {
        let g = grid1();
        let f = Field::from_fn(g, |_| C::new(1.0, 0.0));
        let s = f.dft();
        assert!((s.values()[0].re - 10.0).abs() < 1e-12);
        assert!(s.values()[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn plane_wave_single_node() {
        let g = grid1();
        let k = 5;
        let xi = g.freq(k);
        let f = Field::from_fn(g, |x| C::new(0.0, x[0] * xi).exp());
        let s = f.dft();
        for (i, z) in s.values().iter().enumerate() {
            if i == k {
                assert!((z.norm() - 10.0).abs() < 1e-11);
            } else {
                assert!(z.norm() < 1e-11);
            }
        }
    }

    #[test]
    fn roundtrip_and_parseval_2d() {
        let g = Grid::<f64>::new(2, 16, 7.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Field::from_fn(g, |_| C::new(rng.gen_range(-1.0..1.0), 0.0));
        let f = Field::new(g, f.samples().iter().map(|z| C::new(z.re, -z.re * 0.5)).collect()).unwrap();
        let s = f.dft();
        assert!(s.idft().rel_l2_diff(&f) < 1e-13);
        assert!((s.norm2_sq() / f.norm2_sq() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn spacing_checked() {
        let g = grid1();
        let z = vec![C::new(0.0, 0.0); 64];
        assert!(SpacetimeField::new(g, vec![0.0, 1.0, 2.5], vec![z.clone(), z.clone(), z.clone()]).is_err());
        assert!(SpacetimeField::new(g, vec![0.0, 1.0, 2.0], vec![z.clone(), z.clone(), z]).is_ok());
    }
}
