//! The solution operator `e^{itΦ(D)}`, the sector-localized operator `U`,
//! Bessel potentials, Littlewood–Paley blocks and the dyadic rescaling identity.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, SpacetimeField, Spectrum};
use crate::grid::Grid;
use crate::scalar::{smooth_step, Real};
use crate::symbols::SymbolSpec;

/// Membership in `Π = {1/2 <= |ξ| <= 2, |ξ/|ξ| - e_1| <= π/4}`.
pub fn in_sector<T: Real>(xi: &[T]) -> bool {
    let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
    if r < T::lit(0.5) || r > T::lit(2.0) {
        return false;
    }
    sector_chord(xi, r) <= T::FRAC_PI_4()
}

/// `|ξ/|ξ| - e_1|` for `r = |ξ| > 0`.
fn sector_chord<T: Real>(xi: &[T], r: T) -> T {
    let mut d2 = T::zero();
    for (i, &x) in xi.iter().enumerate() {
        let e = if i == 0 { T::one() } else { T::zero() };
        d2 = d2 + (x / r - e).powi(2);
    }
    d2.sqrt()
}

/// Smooth bump `φ` supported in Π, equal to 1 on the sector shrunk by the
/// mollification widths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorBump<T> {
    /// Radial transition width at each end of `[1/2, 2]`.
    pub radial_width: T,
    /// Transition width in the chord coordinate `|ξ/|ξ| - e_1|`.
    pub angular_width: T,
}

impl<T: Real> Default for SectorBump<T> {
    /// Widths are 1/8 of the radial extent 3/2 and of the angular extent π/4.
    fn default() -> Self {
        Self { radial_width: T::lit(1.5 / 8.0), angular_width: T::FRAC_PI_4() / T::lit(8.0) }
    }
}

impl<T: Real> SectorBump<T> {
    pub fn new(radial_width: T, angular_width: T) -> Result<Self> {
        if !(radial_width > T::zero() && radial_width <= T::lit(0.75)) {
            return Err(Error::Domain("radial width must lie in (0, 3/4]".into()));
        }
        if !(angular_width > T::zero() && angular_width <= T::FRAC_PI_4()) {
            return Err(Error::Domain("angular width must lie in (0, π/4]".into()));
        }
        Ok(Self { radial_width, angular_width })
    }

    pub fn eval(&self, xi: &[T]) -> T {
        let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
        if r <= T::lit(0.5) || r >= T::lit(2.0) {
            return T::zero();
        }
        let radial = smooth_step((r - T::lit(0.5)) / self.radial_width)
            * smooth_step((T::lit(2.0) - r) / self.radial_width);
        let d = sector_chord(xi, r);
        radial * smooth_step((T::FRAC_PI_4() - d) / self.angular_width)
    }

    /// One-dimensional convenience.
    pub fn eval_1d(&self, xi: T) -> T {
        self.eval(&[xi])
    }
}

/// Largest `|Φ|` over the grid's frequency nodes.
pub fn max_phase_on_grid<T: Real>(sym: &SymbolSpec<T>, grid: &Grid<T>) -> T {
    (0..grid.len()).map(|i| sym.value(&grid.freq_vec(i)).abs()).fold(T::zero(), T::max)
}

/// Time step for which a phase of size `max_phase` advances less than π/4.
pub fn time_step_for<T: Real>(max_phase: T) -> T {
    if max_phase <= T::zero() {
        return T::one();
    }
    T::FRAC_PI_4() / max_phase * T::lit(0.999)
}

/// `I_{R^m} = [R^m/2, 2R^m]`.
pub fn local_window<T: Real>(r: T, m: T) -> (T, T) {
    let rm = r.powf(m);
    (rm / T::lit(2.0), rm * T::lit(2.0))
}

/// Uniform samples of `[a, b]` obeying [`time_step_for`], at most `cap` samples.
/// Returns the times and whether the cap was hit.
pub fn window_times<T: Real>(a: T, b: T, max_phase: T, cap: usize) -> (Vec<T>, bool) {
    let dt = time_step_for(max_phase);
    let steps = ((b - a) / dt).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    let count = steps + 1;
    let capped = count > cap;
    (crate::field::uniform_times(a, b, count.min(cap.max(2))), capped)
}

fn phase_table<T: Real>(sym: &SymbolSpec<T>, grid: &Grid<T>) -> Result<Vec<T>> {
    grid.require_dim(sym.dim())?;
    Ok((0..grid.len()).map(|i| sym.value(&grid.freq_vec(i))).collect())
}

fn evolve<T: Real>(spec: &Spectrum<T>, phases: &[T], times: &[T]) -> Result<SpacetimeField<T>> {
    let grid = *spec.grid();
    let plan = grid.plan();
    let mut slices = Vec::with_capacity(times.len());
    for &t in times {
        let mut s = spec.clone();
        for (z, &p) in s.values_mut().iter_mut().zip(phases) {
            let (sin, cos) = (t * p).sin_cos();
            *z = *z * Complex::new(cos, sin);
        }
        slices.push(s.idft_with(&plan).into_samples());
    }
    SpacetimeField::new(grid, times.to_vec(), slices)
}

/// `u(t) = e^{itΦ(D)} f` at each requested time.
pub fn propagate<T: Real>(f: &Field<T>, sym: &SymbolSpec<T>, times: &[T]) -> Result<SpacetimeField<T>> {
    let phases = phase_table(sym, f.grid())?;
    evolve(&f.dft(), &phases, times)
}

/// `Uf(t,x) = ∫ e^{i(x·ξ + tΦ(ξ))} f̂(ξ) φ(ξ) dξ`. Without the `(2π)^{-n}` of the
/// inverse transform this equals `(2π)^n e^{itΦ(D)}(φ(D) f)`.
pub fn apply_u<T: Real>(
    f: &Field<T>,
    sym: &SymbolSpec<T>,
    bump: &SectorBump<T>,
    times: &[T],
) -> Result<SpacetimeField<T>> {
    let phases = phase_table(sym, f.grid())?;
    let scale = T::TAU().powi(f.grid().dim() as i32);
    let spec = f.dft().multiply(|xi| Complex::new(bump.eval(xi) * scale, T::zero()));
    evolve(&spec, &phases, times)
}

/// `φ(D) f`.
pub fn sector_filter<T: Real>(f: &Field<T>, bump: &SectorBump<T>) -> Field<T> {
    f.dft().multiply(|xi| Complex::new(bump.eval(xi), T::zero())).idft()
}

/// `⟨D⟩^α f` with `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
pub fn bessel<T: Real>(f: &Field<T>, alpha: T) -> Field<T> {
    let half = alpha / T::lit(2.0);
    f.dft()
        .multiply(|xi| {
            let r2: T = xi.iter().map(|&x| x * x).sum();
            Complex::new((T::one() + r2).powf(half), T::zero())
        })
        .idft()
}

/// Radial profile: 1 on `r <= 1`, 0 on `r >= 3/2`.
fn lp_profile<T: Real>(r: T) -> T {
    T::one() - smooth_step((r - T::one()) * T::lit(2.0))
}

/// `ψ_k(ξ)`: `ψ_0 = β(|ξ|)`, `ψ_k = β(|ξ|/2^k) - β(|ξ|/2^{k-1})`, supported
/// in `2^{k-1} <= |ξ| <= 2^{k+1}`.
pub fn lp_symbol<T: Real>(r: T, k: u32) -> T {
    if k == 0 {
        return lp_profile(r);
    }
    let s = T::lit(2f64.powi(k as i32));
    lp_profile(r / s) - lp_profile(r * T::lit(2.0) / s)
}

/// Largest represented `|ξ|` (the grid corner).
pub fn max_frequency<T: Real>(grid: &Grid<T>) -> T {
    grid.nyquist() * T::from_usize_lossy(grid.dim()).sqrt()
}

/// Number of shells `k = 0..K` needed so that `Σ_k ψ_k = 1` on every node.
pub fn lp_shell_count<T: Real>(grid: &Grid<T>) -> u32 {
    let top = max_frequency(grid).as_f64();
    let mut k = 0u32;
    while 2f64.powi(k as i32) < top {
        k += 1;
    }
    k + 1
}

/// `S_k f`.
pub fn lp_project<T: Real>(f: &Field<T>, k: u32) -> Result<Field<T>> {
    if k > 0 && 2f64.powi(k as i32 - 1) > max_frequency(f.grid()).as_f64() {
        return Err(Error::Range(format!("dyadic shell k={k} lies beyond the grid's frequency range")));
    }
    Ok(f
        .dft()
        .multiply(|xi| {
            let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
            Complex::new(lp_symbol(r, k), T::zero())
        })
        .idft())
}

/// Time argument of the rescaled side: `2^{-mk} t`.
pub fn rescaled_time<T: Real>(t: T, m: T, k: i32) -> T {
    t * T::lit(2.0).powf(-m * T::lit(k as f64))
}

/// Bump adapted to the shell `2^{k-1} <= |ξ| <= 2^{k+1}`: 1 there, 0 outside
/// `[2^{k-2}, 2^{k+2}]`.
fn shell_bump<T: Real>(r: T, k: u32) -> T {
    let s = T::lit(2f64.powi(k as i32));
    let lo = s / T::lit(2.0);
    let hi = s * T::lit(2.0);
    smooth_step((r - lo / T::lit(2.0)) / (lo / T::lit(2.0))) * smooth_step((hi * T::lit(2.0) - r) / hi)
}

/// Sup-norm mismatch, relative to `sup|Uf|`, between `Uf(t,x)` and
/// `(2π)^n T_k[(f ∗ φ^∨)(2^k ·)](2^{-mk} t, 2^{-k} x)` over the grid points and
/// the given times. `T_k g(s, y) = e^{isΦ(D)} S̃_k g(y)` on the grid of period
/// `L/2^k`, where `2^{-k} x_j` is again a grid point.
pub fn rescale_check<T: Real>(
    f: &Field<T>,
    sym: &SymbolSpec<T>,
    bump: &SectorBump<T>,
    k: u32,
    times: &[T],
) -> Result<T> {
    let grid = *f.grid();
    if grid.nyquist() < T::lit(2.0) {
        return Err(Error::Range("grid does not resolve the sector Π (Nyquist below 2)".into()));
    }
    let scale = T::lit(2f64.powi(k as i32));
    if k >= 60 {
        return Err(Error::Range(format!("rescaling exponent k={k} too large")));
    }
    let lhs = apply_u(f, sym, bump, times)?;
    // g(y) = (f ∗ φ^∨)(2^k y); its samples on the scaled grid are those of φ(D)f.
    let h = sector_filter(f, bump);
    let fine = Grid::new(grid.dim(), grid.points(), grid.period() / scale)?;
    let g = Field::new(fine, h.into_samples())?;
    let g = g
        .dft()
        .multiply(|xi| {
            let r = xi.iter().map(|&x| x * x).sum::<T>().sqrt();
            Complex::new(shell_bump(r, k), T::zero())
        })
        .idft();
    let s_times: Vec<T> = times.iter().map(|&t| rescaled_time(t, sym.degree(), k as i32)).collect();
    let rhs = propagate(&g, sym, &s_times)?;
    let factor = T::TAU().powi(grid.dim() as i32);
    let mut worst = T::zero();
    let mut top = T::zero();
    for (a, b) in lhs.slices().iter().zip(rhs.slices()) {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y * factor).norm());
            top = top.max(x.norm());
        }
    }
    Ok(if top > T::zero() { worst / top } else { worst })
}

/// Frequency mass of a spacetime field outside Π, maximized over slices.
pub fn max_mass_outside_sector<T: Real>(u: &SpacetimeField<T>) -> T {
    (0..u.times().len())
        .map(|s| T::one() - u.slice_field(s).dft().mass_fraction(in_sector))
        .fold(T::zero(), T::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{uniform_times, C};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid<f64>, seed: u64) -> Field<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(grid, |_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn sector_membership() {
        assert!(in_sector(&[1.0]));
        assert!(!in_sector(&[-1.0]));
        assert!(!in_sector(&[0.4]));
        assert!(in_sector(&[1.0, 0.5]));
        assert!(!in_sector(&[0.0, 1.0]));
    }

    #[test]
    fn bump_profile() {
        let b = SectorBump::<f64>::default();
        assert_eq!(b.eval_1d(1.0), 1.0);
        assert_eq!(b.eval_1d(0.5), 0.0);
        assert_eq!(b.eval_1d(2.0), 0.0);
        assert_eq!(b.eval_1d(-1.0), 0.0);
        for i in 0..200 {
            let x = 0.3 + i as f64 * 0.01;
            let v = b.eval_1d(x);
            assert!((0.0..=1.0).contains(&v));
            if v > 0.0 {
                assert!(in_sector(&[x]));
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let f = random_field(g, 1);
        let u = propagate(&f, &SymbolSpec::schrodinger(1), &[0.0]).unwrap();
        assert!(u.slice_field(0).max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn translation_commutes() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let f = random_field(g, 2);
        let sym = SymbolSpec::schrodinger(1);
        let times = [0.0, 0.55, 1.1];
        let a = propagate(&f.translate(&[5]), &sym, &times).unwrap();
        let b = propagate(&f, &sym, &times).unwrap();
        for s in 0..3 {
            assert!(a.slice_field(s).max_abs_diff(&b.slice_field(s).translate(&[5])) < 1e-12);
        }
    }

    #[test]
    fn disjoint_support_gives_zero() {
        let g = Grid::new(1, 256, 200.0).unwrap();
        let f = Spectrum::from_fn(g, |xi: &[f64]| {
            C::new(if xi[0].abs() <= 0.25 { 1.0 } else { 0.0 }, 0.0)
        })
        .idft();
        let u = apply_u(&f, &SymbolSpec::schrodinger(1), &SectorBump::default(), &[0.0, 1.0]).unwrap();
        assert!(u.slices().iter().flatten().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn bessel_composition_and_plane_wave() {
        let g = Grid::new(1, 64, 20.0).unwrap();
        let f = random_field(g, 3);
        assert!(bessel(&f, 0.0).max_abs_diff(&f) < 1e-14);
        let back = bessel(&bessel(&f, 1.0), -1.0);
        assert!(back.rel_l2_diff(&f) < 1e-12);
        let ab = bessel(&bessel(&f, 0.3), 0.4);
        assert!(ab.rel_l2_diff(&bessel(&f, 0.7)) < 1e-12);
        let xi0 = g.freq(3);
        let w = Field::from_fn(g, |x| C::new(0.0, x[0] * xi0).exp());
        let scaled = bessel(&w, 0.5);
        let expect = (1.0 + xi0 * xi0).powf(0.25);
        assert!(scaled.max_abs_diff(&w.scale(C::new(expect, 0.0))) < 1e-12);
    }

    #[test]
    fn lp_partition() {
        let g = Grid::new(1, 128, 20.0).unwrap();
        let f = random_field(g, 4);
        let mut sum = Field::zeros(g);
        for k in 0..lp_shell_count(&g) {
            sum = sum.axpby(C::new(1.0, 0.0), &lp_project(&f, k).unwrap(), C::new(1.0, 0.0));
        }
        assert!(sum.rel_l2_diff(&f) < 1e-10);
        assert!(matches!(lp_project(&f, 40), Err(Error::Range(_))));
        let c = Field::from_fn(g, |_| C::new(1.0, 0.0));
        assert!(lp_project(&c, 0).unwrap().max_abs_diff(&c) < 1e-12);
        assert!(lp_project(&c, 1).unwrap().samples().iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn lp_single_shell() {
        let g = Grid::new(1, 256, 40.0).unwrap();
        // Supported in 6.5 <= |ξ| <= 7.5, inside the plateau 6 <= |ξ| <= 8 of ψ_3.
        let f = Spectrum::from_fn(g, |xi: &[f64]| {
            C::new(crate::scalar::mollifier((xi[0].abs() - 7.0) / 0.5), 0.0)
        })
        .idft();
        assert!(lp_project(&f, 3).unwrap().rel_l2_diff(&f) < 1e-12);
        assert!(lp_project(&f, 2).unwrap().norm2() < 1e-12 * f.norm2());
    }

    #[test]
    fn rescale_identity_cases() {
        let g = Grid::new(1, 256, 64.0).unwrap();
        let f = random_field(g, 5);
        let sym = SymbolSpec::schrodinger(1);
        let b = SectorBump::default();
        let times = uniform_times(0.0, 2.0, 5);
        assert!(rescale_check(&f, &sym, &b, 0, &times).unwrap() <= 1e-12);
        assert!(rescale_check(&f, &sym, &b, 1, &times).unwrap() <= 1e-6);
        assert_eq!(rescaled_time(16.0, 2.0, 2), 1.0);
        let coarse = Grid::new(1, 8, 64.0).unwrap();
        let fc = random_field(coarse, 6);
        assert!(matches!(rescale_check(&fc, &sym, &b, 1, &times), Err(Error::Range(_))));
    }

    #[test]
    fn window_respects_phase_rule() {
        let (a, b) = local_window(8.0, 2.0);
        assert_eq!((a, b), (32.0, 128.0));
        let (ts, capped) = window_times(a, b, 4.0, 100_000);
        assert!(!capped);
        assert!((ts[1] - ts[0]) * 4.0 < std::f64::consts::FRAC_PI_4);
    }
}
