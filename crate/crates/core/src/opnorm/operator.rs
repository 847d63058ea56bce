//! Linear operators with adjoints, power iteration for the top singular
//! value, and the curve realization of `A_R` in one space dimension.

use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::{SmoothingOperatorSpec, Window};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::norms::{weighted_pnorm, Exponent, Order};
use crate::scalar::{pairwise_sum, Real};

type C<T> = Complex<T>;

/// A linear map between finite-dimensional Euclidean spaces.
pub trait LinearOperator<T: Real> {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, v: &[C<T>]) -> Vec<C<T>>;
    fn adjoint(&self, w: &[C<T>]) -> Vec<C<T>>;

    /// `(A*A v, ‖A v‖²)`.
    fn normal(&self, v: &[C<T>]) -> (Vec<C<T>>, T) {
        let w = self.apply(v);
        let sq: Vec<T> = w.iter().map(|z| z.norm_sqr()).collect();
        (self.adjoint(&w), pairwise_sum(&sq))
    }
}

fn norm<T: Real>(v: &[C<T>]) -> T {
    let sq: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
    pairwise_sum(&sq).sqrt()
}

fn normalize<T: Real>(v: &mut [C<T>]) -> T {
    let n = norm(v);
    if n > T::zero() {
        v.iter_mut().for_each(|z| *z = *z / n);
    }
    n
}

/// Stopping rule for [`power_iteration`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerConfig {
    /// Relative change of the Rayleigh quotient.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self { tol: 1e-4, max_iter: 200, restarts: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormEstimate<T> {
    /// `√λ` for the Rayleigh quotient `λ` of the returned vector.
    pub norm: T,
    /// Iterations of the best restart.
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    /// Relative gap of the last two Rayleigh quotients.
    pub gap: T,
    /// Unit input attaining `norm`.
    #[serde(skip)]
    pub vector: Vec<C<T>>,
}

fn random_unit<T: Real>(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C<T>> {
    let mut v: Vec<C<T>> =
        (0..dim).map(|_| C::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))).collect();
    normalize(&mut v);
    v
}

/// Power iteration on `A*A` from seeded random starts plus any given starts;
/// the best Rayleigh quotient is kept.
pub fn power_iteration<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    cfg: &PowerConfig,
    starts: &[Vec<C<T>>],
) -> Result<NormEstimate<T>> {
    if op.dim_in() == 0 {
        return Err(Error::Domain("operator has no inputs".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inits: Vec<Vec<C<T>>> = (0..cfg.restarts).map(|_| random_unit(op.dim_in(), &mut rng)).collect();
    for s in starts {
        if s.len() != op.dim_in() {
            return Err(Error::Domain(format!("start vector has length {}, expected {}", s.len(), op.dim_in())));
        }
        let mut v = s.clone();
        if normalize(&mut v) > T::zero() {
            inits.push(v);
        }
    }
    let tol = T::lit(cfg.tol);
    let mut best: Option<NormEstimate<T>> = None;
    let restarts = inits.len();
    for mut v in inits {
        let mut lambda = T::zero();
        let mut gap = T::infinity();
        let mut iterations = 0;
        let mut converged = false;
        let mut best_v = v.clone();
        let mut best_lambda = T::zero();
        for it in 1..=cfg.max_iter {
            iterations = it;
            let (mut y, next) = op.normal(&v);
            if next >= best_lambda {
                best_lambda = next;
                best_v = v.clone();
            }
            gap = if next > T::zero() { (next - lambda).abs() / next } else { T::zero() };
            lambda = next;
            if it > 1 && gap < tol {
                converged = true;
                break;
            }
            if normalize(&mut y) == T::zero() {
                converged = true;
                break;
            }
            v = y;
        }
        let est = NormEstimate { norm: best_lambda.sqrt(), iterations, restarts, converged, gap, vector: best_v };
        if best.as_ref().map_or(true, |b| est.norm > b.norm) {
            best = Some(est);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Top singular value from the explicit matrix (columns are images of the
/// unit vectors).
pub fn dense_norm<T: Real, A: LinearOperator<T> + ?Sized>(op: &A) -> f64 {
    let (m, n) = (op.dim_out(), op.dim_in());
    let mut mat = nalgebra::DMatrix::<Complex<f64>>::zeros(m, n);
    let mut e = vec![C::new(T::zero(), T::zero()); n];
    for j in 0..n {
        e[j] = C::new(T::one(), T::zero());
        for (i, z) in op.apply(&e).into_iter().enumerate() {
            mat[(i, j)] = Complex::new(z.re.as_f64(), z.im.as_f64());
        }
        e[j] = C::new(T::zero(), T::zero());
    }
    mat.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `f ↦ m(D) f` on `L²` of a periodic grid, in sample coordinates scaled by
/// `√(cell volume)` so the Euclidean norm is the `L²` norm.
pub struct FrequencyMultiplier<T: Real> {
    grid: Grid<T>,
    symbol: Vec<C<T>>,
}

impl<T: Real> FrequencyMultiplier<T> {
    pub fn new(grid: Grid<T>, m: impl Fn(&[T]) -> C<T>) -> Self {
        let symbol = (0..grid.len()).map(|i| m(&grid.freq_vec(i))).collect();
        Self { grid, symbol }
    }

    /// `max |m|` over the represented frequencies.
    pub fn sup(&self) -> T {
        self.symbol.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    fn run(&self, v: &[C<T>], conj: bool) -> Vec<C<T>> {
        let s = self.grid.cell_volume().sqrt();
        let f = Field::new(self.grid, v.iter().map(|z| *z / s).collect()).expect("length checked by caller");
        let mut spec = f.dft();
        for (z, m) in spec.values_mut().iter_mut().zip(&self.symbol) {
            *z = *z * if conj { m.conj() } else { *m };
        }
        let out = spec.idft();
        out.samples().iter().map(|z| *z * s).collect()
    }
}

impl<T: Real> LinearOperator<T> for FrequencyMultiplier<T> {
    fn dim_in(&self) -> usize {
        self.grid.len()
    }
    fn dim_out(&self) -> usize {
        self.grid.len()
    }
    fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.run(v, false)
    }
    fn adjoint(&self, w: &[C<T>]) -> Vec<C<T>> {
        self.run(w, true)
    }
}

/// Largest spatial step on `B_R`.
pub const MAX_DX: f64 = 1.0;
/// Largest time step when `r = ∞`.
pub const MAX_DT: f64 = 0.4;
/// Time samples per input frequency for finite `r`.
pub const TIME_OVERSAMPLE: usize = 2;
/// Time period over window length.
pub const PERIOD_FACTOR: f64 = 1.25;

/// `A_R` for `n = 1` as the extension operator of the curve `(Φ(ξ), ξ)`,
/// `ξ ∈ Π = [1/2, 2]`. Inputs are `f̂` sampled uniformly in `τ = Φ(ξ)` (Φ is
/// monotone on Π), so each `x` costs one FFT in `t`; time is periodic with
/// period `PERIOD_FACTOR` times the window. Coordinates are scaled so the
/// Euclidean norms are `‖f‖_{L²}` and `‖A f‖_{L²(B_R × I)}`. Rows in `x` are
/// streamed; the full `x × t` array is only built on request.
pub struct CurveOperator<T: Real> {
    xs: Vec<T>,
    x_weights: Vec<T>,
    /// `ξ(τ_k)`.
    xi: Vec<T>,
    /// `φ⟨ξ⟩^α |dξ/dτ| Δτ e^{i a τ_k} / 2π`.
    coef: Vec<C<T>>,
    /// `√w_k`, `w_k = |dξ/dτ| Δτ / 2π`.
    in_scale: Vec<T>,
    /// `e^{i x_0 ξ_k}` and `e^{i Δx ξ_k}`.
    phase0: Vec<C<T>>,
    phase_step: Vec<C<T>>,
    times: Vec<T>,
    t_weights: Vec<T>,
    /// `e^{i j dt τ_0}`.
    carrier: Vec<C<T>>,
    fft_len: usize,
    fwd: Arc<dyn Fft<T>>,
    inv: Arc<dyn Fft<T>>,
    q: Exponent<T>,
    r: Exponent<T>,
    order: Order,
}

/// Smallest `2^a 3^b 5^c >= n`.
fn smooth_len(n: usize) -> usize {
    let mut best = usize::MAX;
    let mut p2 = 1usize;
    while p2 < 2 * n.max(1) {
        let mut p3 = p2;
        while p3 < 2 * n.max(1) {
            let mut p5 = p3;
            while p5 < n {
                p5 *= 5;
            }
            best = best.min(p5);
            p3 *= 3;
        }
        p2 *= 2;
    }
    best
}

fn trapezoid<T: Real>(count: usize, step: T) -> Vec<T> {
    (0..count)
        .map(|i| if count > 1 && (i == 0 || i == count - 1) { step / T::lit(2.0) } else { step })
        .collect()
}

fn zero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

/// `z |z|^{p-2}`, zero at the origin.
fn signed_pow<T: Real>(z: C<T>, p: T) -> C<T> {
    let a = z.norm();
    if a == T::zero() {
        zero()
    } else {
        z * a.powf(p - T::lit(2.0))
    }
}

impl<T: Real> CurveOperator<T> {
    pub fn new(spec: &SmoothingOperatorSpec<T>) -> Result<Self> {
        let (a, b) = spec.interval();
        Self::with_period(spec, (a, b), T::lit(PERIOD_FACTOR) * (b - a))
    }

    /// The operator for `spec` on the time samples of `frame` (a window that
    /// contains the spec's), so that restrictions to sub-windows are exact.
    pub fn in_frame(spec: &SmoothingOperatorSpec<T>, frame: (T, T)) -> Result<Self> {
        let (a, b) = spec.interval();
        if a < frame.0 || b > frame.1 {
            return Err(Error::Domain("frame must contain the operator's window".into()));
        }
        let mut op = Self::with_period(spec, frame, T::lit(PERIOD_FACTOR) * (frame.1 - frame.0))?;
        let dt = op.times[1] - op.times[0];
        let first = op.times.iter().position(|&t| t >= a).unwrap_or(op.times.len());
        let last = op.times.iter().rposition(|&t| t <= b).unwrap_or(0);
        if first > last {
            return Err(Error::Domain("window contains no time samples".into()));
        }
        op.t_weights = (0..op.times.len())
            .map(|j| match j {
                _ if j < first || j > last => T::zero(),
                _ if first < last && (j == first || j == last) => dt / T::lit(2.0),
                _ => dt,
            })
            .collect();
        Ok(op)
    }

    /// Samples of `frame` on a time circle of length `period`.
    pub fn with_period(spec: &SmoothingOperatorSpec<T>, frame: (T, T), period: T) -> Result<Self> {
        let sym = &spec.sym;
        if sym.dim() != 1 {
            return Err(Error::Unsupported(format!("curve operator in dimension {}", sym.dim())));
        }
        let (lo, hi) = (T::lit(0.5), T::lit(2.0));
        let (p_lo, d_lo) = sym.phase_1d(lo);
        let (p_hi, d_hi) = sym.phase_1d(hi);
        let increasing = p_hi > p_lo;
        let monotone = (0..=64).all(|i| {
            let xi = lo + (hi - lo) * T::from_usize_lossy(i) / T::lit(64.0);
            let d = sym.phase_1d(xi).1;
            if increasing { d > T::zero() } else { d < T::zero() }
        });
        if !monotone || d_lo == T::zero() || d_hi == T::zero() {
            return Err(Error::Unsupported("Φ is not strictly monotone on Π".into()));
        }
        let (t0, t1) = if increasing { (p_lo, p_hi) } else { (p_hi, p_lo) };
        let (a, b) = frame;
        if !(b > a) || !(period >= b - a) {
            return Err(Error::Domain("window must be non-empty and no longer than the period".into()));
        }
        let dtau = T::TAU() / period;
        let count = ((t1 - t0) / dtau).floor().to_usize().unwrap_or(0) + 1;
        let min_len = match spec.r {
            Exponent::Infinity => (period / T::lit(MAX_DT)).ceil().to_usize().unwrap_or(1).max(count),
            Exponent::Finite(_) => TIME_OVERSAMPLE * count,
        };
        let fft_len = smooth_len(min_len);
        let dt = period / T::from_usize_lossy(fft_len);
        let inv_phi = |tau: T| {
            let (mut l, mut h) = (lo, hi);
            for _ in 0..200 {
                let mid = (l + h) / T::lit(2.0);
                let below = sym.phase_1d(mid).0 < tau;
                if below == increasing {
                    l = mid;
                } else {
                    h = mid;
                }
                if h - l <= T::epsilon() * hi {
                    break;
                }
            }
            (l + h) / T::lit(2.0)
        };
        let mut xi = Vec::with_capacity(count);
        let mut coef = Vec::with_capacity(count);
        let mut in_scale = Vec::with_capacity(count);
        for k in 0..count {
            let tau = t0 + dtau * T::from_usize_lossy(k);
            let x = inv_phi(tau);
            let jac = T::one() / sym.phase_1d(x).1.abs();
            let weight = spec.bump.eval_1d(x) * (T::one() + x * x).powf(spec.alpha / T::lit(2.0));
            coef.push(C::from_polar(weight * jac * dtau / T::TAU(), a * tau));
            in_scale.push((jac * dtau / T::TAU()).sqrt());
            xi.push(x);
        }
        let r = spec.scale;
        let nx = (T::lit(2.0) * r / T::lit(MAX_DX)).ceil().to_usize().unwrap_or(1).max(1);
        let dx = T::lit(2.0) * r / T::from_usize_lossy(nx);
        let xs: Vec<T> = (0..=nx).map(|i| -r + dx * T::from_usize_lossy(i)).collect();
        let x_weights = trapezoid(xs.len(), dx);
        let phase0 = xi.iter().map(|&k| C::from_polar(T::one(), -r * k)).collect();
        let phase_step = xi.iter().map(|&k| C::from_polar(T::one(), dx * k)).collect();
        let nt = (((b - a) / dt).floor().to_usize().unwrap_or(0) + 1).min(fft_len);
        let times: Vec<T> = (0..nt).map(|j| a + dt * T::from_usize_lossy(j)).collect();
        let t_weights = trapezoid(nt, dt);
        let carrier = (0..nt).map(|j| C::from_polar(T::one(), dt * T::from_usize_lossy(j) * t0)).collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        Ok(Self {
            xs,
            x_weights,
            xi,
            coef,
            in_scale,
            phase0,
            phase_step,
            times,
            t_weights,
            carrier,
            fft_len,
            fwd,
            inv,
            q: spec.q,
            r: spec.r,
            order: spec.order,
        })
    }

    pub fn inputs(&self) -> usize {
        self.xi.len()
    }

    pub fn xs(&self) -> &[T] {
        &self.xs
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// FFT length in `t`.
    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    /// `ξ` of each input coordinate.
    pub fn frequencies(&self) -> &[T] {
        &self.xi
    }

    pub fn exponents(&self) -> (Exponent<T>, Exponent<T>, Order) {
        (self.q, self.r, self.order)
    }

    /// Input coordinates of `f̂` given at the input frequencies.
    pub fn encode(&self, fhat: &[C<T>]) -> Vec<C<T>> {
        fhat.iter().zip(&self.in_scale).map(|(z, &s)| *z * s).collect()
    }

    /// Visits the rows `A f(·, x_i)` (unscaled, `t` inside). The visitor may
    /// overwrite the row with a cotangent `g_i` and return `true`; the sum of
    /// `conj(∂A f(t_j, x_i)/∂v) g_ij` over those rows is returned.
    pub fn sweep(&self, v: &[C<T>], mut visit: impl FnMut(usize, &mut [C<T>]) -> bool) -> Vec<C<T>> {
        let nt = self.times.len();
        let b: Vec<C<T>> = (0..self.xi.len()).map(|k| v[k] / self.in_scale[k] * self.coef[k]).collect();
        let mut phase = self.phase0.clone();
        let mut acc = vec![zero(); self.xi.len()];
        let mut buf = vec![zero(); self.fft_len];
        for i in 0..self.xs.len() {
            buf.iter_mut().for_each(|z| *z = zero());
            for k in 0..b.len() {
                buf[k] = b[k] * phase[k];
            }
            self.inv.process(&mut buf);
            for j in 0..nt {
                buf[j] = buf[j] * self.carrier[j];
            }
            if visit(i, &mut buf[..nt]) {
                self.backward_row(&phase, &mut buf, &mut acc);
            }
            for k in 0..phase.len() {
                phase[k] = phase[k] * self.phase_step[k];
            }
        }
        acc.iter().zip(&self.in_scale).map(|(z, &s)| *z / s).collect()
    }

    /// `acc += conj(coef · phase) · FFT(g · conj(carrier))` for the row in
    /// `buf[..nt]`.
    fn backward_row(&self, phase: &[C<T>], buf: &mut [C<T>], acc: &mut [C<T>]) {
        let nt = self.times.len();
        for j in 0..nt {
            buf[j] = buf[j] * self.carrier[j].conj();
        }
        buf[nt..].iter_mut().for_each(|z| *z = zero());
        self.fwd.process(buf);
        for k in 0..acc.len() {
            acc[k] = acc[k] + buf[k] * (self.coef[k] * phase[k]).conj();
        }
    }

    /// `A f(t_j, x_i)` (unscaled), row-major in `x`.
    pub fn evaluate(&self, v: &[C<T>]) -> Vec<C<T>> {
        let mut out = Vec::with_capacity(self.xs.len() * self.times.len());
        self.sweep(v, |_, row| {
            out.extend_from_slice(row);
            false
        });
        out
    }

    /// Adjoint of [`CurveOperator::evaluate`]:
    /// `g ↦ Σ_{i,j} conj(∂Af(t_j,x_i)/∂v) g_ij`.
    pub fn evaluate_adjoint(&self, g: &[C<T>]) -> Vec<C<T>> {
        let nt = self.times.len();
        let mut phase = self.phase0.clone();
        let mut acc = vec![zero(); self.xi.len()];
        let mut buf = vec![zero(); self.fft_len];
        for i in 0..self.xs.len() {
            buf[..nt].copy_from_slice(&g[i * nt..(i + 1) * nt]);
            self.backward_row(&phase, &mut buf, &mut acc);
            for k in 0..phase.len() {
                phase[k] = phase[k] * self.phase_step[k];
            }
        }
        acc.iter().zip(&self.in_scale).map(|(z, &s)| *z / s).collect()
    }

    fn out_scale(&self, i: usize, j: usize) -> T {
        (self.x_weights[i] * self.t_weights[j]).sqrt()
    }

    /// `‖A f‖` in the spec's mixed norm, for input coordinates `v`.
    pub fn mixed_norm(&self, v: &[C<T>]) -> T {
        self.mixed_norm_with_max(v).0
    }

    /// The mixed norm and `max |A f|` over the window.
    pub fn mixed_norm_with_max(&self, v: &[C<T>]) -> (T, T) {
        let nt = self.times.len();
        let mut top = T::zero();
        let mut rows = Vec::with_capacity(self.xs.len());
        let mut cols = vec![T::zero(); nt];
        let mut col_scale = T::zero();
        let mut abs = vec![T::zero(); nt];
        match self.order {
            Order::XT => {
                self.sweep(v, |_, row| {
                    for j in 0..nt {
                        abs[j] = if self.t_weights[j] > T::zero() { row[j].norm() } else { T::zero() };
                        top = top.max(abs[j]);
                    }
                    rows.push(weighted_pnorm(&abs, &self.t_weights, self.r));
                    false
                });
                (weighted_pnorm(&rows, &self.x_weights, self.q), top)
            }
            Order::TX => {
                // Columns accumulate `Σ_x w |u|^q` rescaled to the running maximum.
                self.sweep(v, |i, row| {
                    let m = row.iter().map(|z| z.norm()).fold(T::zero(), T::max);
                    top = top.max(m);
                    if m > col_scale {
                        if let Exponent::Finite(q) = self.q {
                            if col_scale > T::zero() {
                                let f = (col_scale / m).powf(q);
                                cols.iter_mut().for_each(|c| *c = *c * f);
                            }
                        }
                        col_scale = m;
                    }
                    if col_scale == T::zero() {
                        return false;
                    }
                    for j in 0..nt {
                        let a = row[j].norm();
                        cols[j] = match self.q {
                            Exponent::Infinity => cols[j].max(a),
                            Exponent::Finite(q) => cols[j] + self.x_weights[i] * (a / col_scale).powf(q),
                        };
                    }
                    false
                });
                let inner: Vec<T> = match self.q {
                    Exponent::Infinity => cols,
                    Exponent::Finite(q) => cols.iter().map(|c| col_scale * c.powf(T::one() / q)).collect(),
                };
                let (tw, vals): (Vec<T>, Vec<T>) = self
                    .t_weights
                    .iter()
                    .zip(&inner)
                    .filter(|(w, _)| **w > T::zero())
                    .map(|(w, c)| (*w, *c))
                    .unzip();
                (weighted_pnorm(&vals, &tw, self.r), top)
            }
        }
    }

    /// A positive multiple of `A*(∂N/∂ū)` for the mixed norm `N` with finite
    /// exponents `q`, `r` (the caller substitutes large finite values for ∞);
    /// `top` is `max |A f|` over the window.
    pub(crate) fn mixed_gradient(&self, v: &[C<T>], q: T, r: T, top: T) -> Vec<C<T>> {
        let nt = self.times.len();
        if top == T::zero() {
            return vec![zero(); v.len()];
        }
        match self.order {
            Order::XT => self.sweep(v, |i, row| {
                let m = (0..nt).filter(|&j| self.t_weights[j] > T::zero()).map(|j| row[j].norm()).fold(T::zero(), T::max);
                if m == T::zero() {
                    return false;
                }
                let s: T = (0..nt).map(|j| self.t_weights[j] * (row[j].norm() / m).powf(r)).sum();
                let f = self.x_weights[i] * (m / top).powf(q - T::one()) * s.powf(q / r - T::one());
                for j in 0..nt {
                    row[j] = signed_pow(row[j] / m, r) * (f * self.t_weights[j]);
                }
                true
            }),
            Order::TX => {
                let mut cols = vec![T::zero(); nt];
                self.sweep(v, |i, row| {
                    for j in 0..nt {
                        cols[j] = cols[j] + self.x_weights[i] * (row[j].norm() / top).powf(q);
                    }
                    false
                });
                self.sweep(v, |i, row| {
                    for j in 0..nt {
                        let f = if cols[j] > T::zero() {
                            self.t_weights[j] * cols[j].powf(r / q - T::one()) * self.x_weights[i]
                        } else {
                            T::zero()
                        };
                        row[j] = signed_pow(row[j] / top, q) * f;
                    }
                    true
                })
            }
        }
    }

    /// The mixed norm of `A v`, `max |A v|`, and the ascent direction of
    /// [`CurveOperator::mixed_gradient`] for the smoothed exponents, in one
    /// sweep when `t` is inside. `hint` is a reference scale for `|A v|`.
    pub(crate) fn value_and_gradient(&self, v: &[C<T>], q: T, r: T, hint: T) -> (T, T, Vec<C<T>>) {
        if self.order == Order::TX {
            let (value, top) = self.mixed_norm_with_max(v);
            return (value, top, self.mixed_gradient(v, q, r, top));
        }
        let nt = self.times.len();
        let hint = if hint > T::zero() { hint } else { T::one() };
        let mut top = T::zero();
        let mut rows = Vec::with_capacity(self.xs.len());
        let mut abs = vec![T::zero(); nt];
        let grad = self.sweep(v, |i, row| {
            let mut m = T::zero();
            for j in 0..nt {
                abs[j] = if self.t_weights[j] > T::zero() { row[j].norm() } else { T::zero() };
                m = m.max(abs[j]);
            }
            top = top.max(m);
            rows.push(weighted_pnorm(&abs, &self.t_weights, self.r));
            if m == T::zero() {
                return false;
            }
            let s: T = (0..nt).map(|j| self.t_weights[j] * (abs[j] / m).powf(r)).sum();
            let f = self.x_weights[i] * (m / hint).powf(q - T::one()) * s.powf(q / r - T::one());
            for j in 0..nt {
                row[j] = signed_pow(row[j] / m, r) * (f * self.t_weights[j]);
            }
            true
        });
        (weighted_pnorm(&rows, &self.x_weights, self.q), top, grad)
    }

    /// `Σ_x |Af|² dx` at each time sample.
    pub fn time_density(&self, v: &[C<T>]) -> Vec<T> {
        let mut density = vec![T::zero(); self.times.len()];
        self.sweep(v, |i, row| {
            for (d, z) in density.iter_mut().zip(row.iter()) {
                *d = *d + self.x_weights[i] * z.norm_sqr();
            }
            false
        });
        density
    }
}

impl<T: Real> LinearOperator<T> for CurveOperator<T> {
    fn dim_in(&self) -> usize {
        self.xi.len()
    }

    fn dim_out(&self) -> usize {
        self.xs.len() * self.times.len()
    }

    fn apply(&self, v: &[C<T>]) -> Vec<C<T>> {
        let mut out = Vec::with_capacity(self.dim_out());
        self.sweep(v, |i, row| {
            out.extend(row.iter().enumerate().map(|(j, z)| *z * self.out_scale(i, j)));
            false
        });
        out
    }

    fn adjoint(&self, w: &[C<T>]) -> Vec<C<T>> {
        let nt = self.times.len();
        let g: Vec<C<T>> = w.iter().enumerate().map(|(idx, z)| *z * self.out_scale(idx / nt, idx % nt)).collect();
        self.evaluate_adjoint(&g)
    }

    fn normal(&self, v: &[C<T>]) -> (Vec<C<T>>, T) {
        let mut energy = Vec::with_capacity(self.xs.len());
        let out = self.sweep(v, |i, row| {
            let mut e = Vec::with_capacity(row.len());
            for (j, z) in row.iter_mut().enumerate() {
                let w = self.x_weights[i] * self.t_weights[j];
                e.push(w * z.norm_sqr());
                *z = *z * w;
            }
            energy.push(pairwise_sum(&e));
            true
        });
        (out, pairwise_sum(&energy))
    }
}

/// `‖A_R‖_{L² → L²(B_R × I)}` by power iteration (`q = r = 2` only).
pub fn operator_norm_l2<T: Real>(spec: &SmoothingOperatorSpec<T>, cfg: &PowerConfig) -> Result<NormEstimate<T>> {
    let two = T::lit(2.0);
    if spec.q != Exponent::Finite(two) || spec.r != Exponent::Finite(two) {
        return Err(Error::Domain("operator_norm_l2 requires q = r = 2".into()));
    }
    let op = CurveOperator::new(spec)?;
    power_iteration(&op, cfg, &[])
}

/// Local and global estimates on one shared discretization; the global run
/// is also started from the local optimizer, so `global >= local` holds for
/// the returned Rayleigh quotients.
pub fn window_monotonicity<T: Real>(
    spec: &SmoothingOperatorSpec<T>,
    global: T,
    cfg: &PowerConfig,
) -> Result<(NormEstimate<T>, NormEstimate<T>)> {
    let g_spec = spec.clone().with_window(Window::Global(global));
    let l_spec = spec.clone().with_window(Window::Local);
    let frame = g_spec.interval();
    let local_op = CurveOperator::in_frame(&l_spec, frame)?;
    let global_op = CurveOperator::in_frame(&g_spec, frame)?;
    let local = power_iteration(&local_op, cfg, &[])?;
    let global = power_iteration(&global_op, cfg, &[local.vector.clone()])?;
    Ok((local, global))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolSpec;

    struct Identity(usize);

    impl LinearOperator<f64> for Identity {
        fn dim_in(&self) -> usize {
            self.0
        }
        fn dim_out(&self) -> usize {
            self.0
        }
        fn apply(&self, v: &[C<f64>]) -> Vec<C<f64>> {
            v.to_vec()
        }
        fn adjoint(&self, w: &[C<f64>]) -> Vec<C<f64>> {
            w.to_vec()
        }
    }

    #[test]
    fn identity_has_norm_one() {
        let est = power_iteration(&Identity(50), &PowerConfig::default(), &[]).unwrap();
        assert!((est.norm - 1.0).abs() < 1e-12);
        assert!(est.converged);
        assert!((dense_norm(&Identity(7)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multiplier_norm_is_sup() {
        let g = Grid::<f64>::new(1, 128, 20.0).unwrap();
        let op = FrequencyMultiplier::new(g, |xi| C::new((-(xi[0] - 1.0).powi(2)).exp() * 3.0, 0.5 * xi[0]));
        let cfg = PowerConfig { tol: 1e-12, max_iter: 2000, ..PowerConfig::default() };
        let est = power_iteration(&op, &cfg, &[]).unwrap();
        assert!((est.norm - op.sup()).abs() <= 1e-4 * op.sup(), "{} {}", est.norm, op.sup());
        assert!((dense_norm(&op) - op.sup()).abs() <= 1e-10);
    }

    #[test]
    fn smooth_lengths() {
        assert_eq!(smooth_len(1), 1);
        assert_eq!(smooth_len(7), 8);
        assert_eq!(smooth_len(31), 32);
        assert_eq!(smooth_len(121), 125);
    }

    fn small_spec() -> SmoothingOperatorSpec<f64> {
        SmoothingOperatorSpec::l2_local(SymbolSpec::schrodinger(1), 0.5, 4.0).unwrap()
    }

    #[test]
    fn curve_adjoint_is_exact() {
        let op = CurveOperator::new(&small_spec()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<C<f64>> = random_unit(op.dim_in(), &mut rng);
        let w: Vec<C<f64>> = random_unit(op.dim_out(), &mut rng);
        let lhs: C<f64> = op.apply(&v).iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
        let rhs: C<f64> = v.iter().zip(op.adjoint(&w)).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn curve_matches_direct_sum() {
        let spec = small_spec();
        let op = CurveOperator::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = random_unit::<f64>(op.dim_in(), &mut rng);
        let vals = op.evaluate(&v);
        let nt = op.times().len();
        let sym = SymbolSpec::<f64>::schrodinger(1);
        for &(i, j) in &[(0usize, 0usize), (5, 17), (op.xs().len() - 1, nt - 1)] {
            let (x, t) = (op.xs()[i], op.times()[j]);
            let direct: C<f64> = (0..op.dim_in())
                .map(|k| {
                    let xi = op.frequencies()[k];
                    let tau = sym.phase_1d(xi).0;
                    let c = op.coef[k] * C::from_polar(1.0, -spec.interval().0 * tau);
                    v[k] / op.in_scale[k] * c * C::from_polar(1.0, x * xi + t * tau)
                })
                .sum();
            assert!((direct - vals[i * nt + j]).norm() < 1e-9, "{direct} {}", vals[i * nt + j]);
        }
    }

    #[test]
    fn curve_norm_matches_dense() {
        let op = CurveOperator::new(&small_spec()).unwrap();
        let est = power_iteration(&op, &PowerConfig { tol: 1e-10, max_iter: 500, ..PowerConfig::default() }, &[]).unwrap();
        let dense = dense_norm(&op);
        assert!((est.norm - dense).abs() <= 1e-4 * dense, "{} {dense}", est.norm);
    }

    /// `N(v + εd) - N(v - εd)` over `2ε` against `Re Σ g·d̄`, up to the
    /// common positive factor the gradient carries.
    fn check_gradient(order: Order) {
        let (q, r) = (3.0, 4.0);
        let spec = SmoothingOperatorSpec::new(
            SymbolSpec::schrodinger(1),
            0.5,
            Exponent::Finite(q),
            Exponent::Finite(r),
            order,
            4.0,
            Window::Local,
        )
        .unwrap();
        let op = CurveOperator::new(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = random_unit::<f64>(op.dim_in(), &mut rng);
        let (value, top) = op.mixed_norm_with_max(&v);
        let grads = [op.mixed_gradient(&v, q, r, top), op.value_and_gradient(&v, q, r, 0.7).2];
        assert!((op.value_and_gradient(&v, q, r, 0.7).0 - value).abs() <= 1e-12 * value);
        for g in &grads {
            let mut factor = None;
            for _ in 0..4 {
                let d = random_unit::<f64>(op.dim_in(), &mut rng);
                let eps = 1e-5;
                let shift = |s: f64| -> Vec<C<f64>> { v.iter().zip(&d).map(|(a, b)| a + b * s).collect() };
                let fd = (op.mixed_norm(&shift(eps)) - op.mixed_norm(&shift(-eps))) / (2.0 * eps);
                let analytic: f64 = g.iter().zip(&d).map(|(a, b)| (a * b.conj()).re).sum();
                let c = *factor.get_or_insert(fd / analytic);
                assert!(c > 0.0);
                assert!((fd - c * analytic).abs() <= 1e-5 * fd.abs().max(1e-3), "{order:?} {fd} {}", c * analytic);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        check_gradient(Order::XT);
        check_gradient(Order::TX);
    }

    #[test]
    fn higher_dimensions_are_unsupported() {
        let spec2 = SmoothingOperatorSpec::l2_local(SymbolSpec::schrodinger(2), 0.5, 4.0).unwrap();
        assert!(matches!(CurveOperator::new(&spec2), Err(Error::Unsupported(_))));
    }
}
