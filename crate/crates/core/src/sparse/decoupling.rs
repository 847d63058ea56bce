//! Numerical check of the sparse decoupling inequality
//! `‖Σ f_i ∗ φ̂_i|_S‖_{L^p(dσ)} <= C H^{1/p} (Σ ‖f_i‖_p^p)^{1/p}` for `n = 1`.
//!
//! Inputs are `f_i = F̂_i` with `F_i` supported in `B(z_i, H)`, so
//! `f_i = e^{-i z_i·w} a_i(w)` and `f_i ∗ φ̂_i = e^{-i z_i·ζ} (a_i ∗ Φ_H)(ζ)` with
//! `Φ_H(ζ) = H^2 φ̂(Hζ)`. The modulation is kept exact; only the smooth
//! profiles `a_i ∗ Φ_H` are sampled.

use num_complex::Complex64;
use serde::Serialize;

use super::family::{is_sparse, SparseFamily};
use crate::error::{Error, Result};
use crate::scalar::{gauss_legendre, mollifier};
use crate::symbols::SymbolSpec;

/// Per-axis support of `φ̂`: the square `[-a, a]^2` lies in `B(0, 3/2)`.
pub const BUMP_HALF_WIDTH: f64 = 1.5 / std::f64::consts::SQRT_2;
/// Per-axis support of the spatial profile `χ`: `[-T, T]^2` lies in `B(0, 1)`.
pub const PROFILE_HALF_WIDTH: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Stencil points per axis for `Φ_H`.
pub const STENCIL_POINTS: usize = 24;
/// Calibrated single-ball constant at `H = 8`, `p = 2`.
pub const SINGLE_BALL_CONSTANT: f64 = 0.323;

/// `B ∗ B` on `[-half, half]` for the mollifier `B` on `[-half/2, half/2]`.
fn autocorrelation(eta: f64, half: f64) -> f64 {
    if eta.abs() >= half {
        return 0.0;
    }
    let b = |u: f64| mollifier(2.0 * u / half);
    let (x, w) = gauss_legendre(16);
    let lo = (eta - half / 2.0).max(-half / 2.0);
    let hi = (eta + half / 2.0).min(half / 2.0);
    let panels = 8;
    let h = (hi - lo) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let a = lo + h * p as f64;
        for (xi, wi) in x.iter().zip(&w) {
            let u = a + h * (xi + 1.0) / 2.0;
            s += wi * h / 2.0 * b(u) * b(eta - u);
        }
    }
    s
}

/// `Φ_H` sampled on a square stencil, with trapezoid weights folded in and
/// normalized so the weights sum to 1 (`∫ φ̂ = 1`).
#[derive(Debug, Clone)]
pub struct Stencil {
    pub offsets: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn new(h: f64, points: usize) -> Result<Self> {
        if !(h >= 1.0) || points < 4 {
            return Err(Error::Domain(format!("need H >= 1 and at least 4 stencil points, got H = {h}, {points}")));
        }
        let half = BUMP_HALF_WIDTH / h;
        let step = 2.0 * half / (points + 1) as f64;
        let axis: Vec<(f64, f64)> = (1..=points)
            .map(|j| {
                let w = -half + step * j as f64;
                (w, autocorrelation(w * h, BUMP_HALF_WIDTH))
            })
            .collect();
        let mut offsets = Vec::with_capacity(points * points);
        let mut weights = Vec::with_capacity(points * points);
        for &(w0, a0) in &axis {
            for &(w1, a1) in &axis {
                offsets.push([w0, w1]);
                weights.push(a0 * a1);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { offsets, weights })
    }

    /// Radius of the stencil's support.
    pub fn radius(&self) -> f64 {
        self.offsets.iter().map(|o| o[0].hypot(o[1])).fold(0.0, f64::max)
    }
}

/// Transform of the Hann window `cos²(πu/T)` on `[-T/2, T/2]`.
fn hann_transform(omega: f64, t: f64) -> f64 {
    let k = std::f64::consts::TAU / t;
    if omega.abs() < 1e-7 {
        return t / 2.0;
    }
    if (omega.abs() - k).abs() < 1e-7 {
        return t / 4.0;
    }
    (omega * t / 2.0).sin() * k * k / (omega * (k * k - omega * omega))
}

/// `χ̂(ω)` for `χ = g ⊗ g`, `g = hann ∗ hann` on `[-T, T]`.
fn profile_transform(omega: [f64; 2]) -> f64 {
    let a = hann_transform(omega[0], PROFILE_HALF_WIDTH);
    let b = hann_transform(omega[1], PROFILE_HALF_WIDTH);
    a * a * b * b
}

/// Data on one ball: `F(z) = χ((z - z_i)/H) Σ_k c_k e^{i(z - z_i)·w_k}`,
/// supported in `B(z_i, H)`; `a(w) = H² Σ_k c_k χ̂(H(w - w_k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallData {
    pub terms: Vec<(Complex64, [f64; 2])>,
}

impl BallData {
    /// Profile `a` at frequency `w = (τ, ξ)`.
    pub fn profile(&self, h: f64, w: [f64; 2]) -> Complex64 {
        self.terms.iter().map(|&(c, wk)| c * profile_transform([h * (w[0] - wk[0]), h * (w[1] - wk[1])])).sum::<Complex64>()
            * (h * h)
    }

    /// Spatial data at offset `y = z - z_i`; zero outside `B(0, H)`.
    pub fn spatial(&self, h: f64, y: [f64; 2]) -> Complex64 {
        let g = |u: f64| hann_autocorrelation(u / h);
        let chi = g(y[0]) * g(y[1]);
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.terms.iter().map(|&(c, wk)| c * Complex64::from_polar(chi, y[0] * wk[0] + y[1] * wk[1])).sum()
    }

    /// `‖a‖_{L^p(ℝ²)}` by the trapezoid rule on a box around the `w_k`.
    pub fn lp_norm(&self, h: f64, p: f64) -> f64 {
        let reach = 40.0 / h;
        let lo0 = self.terms.iter().map(|t| t.1[0]).fold(f64::INFINITY, f64::min) - reach;
        let hi0 = self.terms.iter().map(|t| t.1[0]).fold(f64::NEG_INFINITY, f64::max) + reach;
        let lo1 = self.terms.iter().map(|t| t.1[1]).fold(f64::INFINITY, f64::min) - reach;
        let hi1 = self.terms.iter().map(|t| t.1[1]).fold(f64::NEG_INFINITY, f64::max) + reach;
        let step = 0.25 / h;
        let n0 = ((hi0 - lo0) / step).ceil() as usize;
        let n1 = ((hi1 - lo1) / step).ceil() as usize;
        let mut s = 0.0;
        for i in 0..=n0 {
            for j in 0..=n1 {
                s += self.profile(h, [lo0 + step * i as f64, lo1 + step * j as f64]).norm().powf(p);
            }
        }
        (s * step * step).powf(1.0 / p)
    }
}

/// `hann ∗ hann` on `[-T, T]` at `u`, by quadrature.
fn hann_autocorrelation(u: f64) -> f64 {
    let t = PROFILE_HALF_WIDTH;
    if u.abs() >= t {
        return 0.0;
    }
    let hann = |v: f64| if v.abs() >= t / 2.0 { 0.0 } else { (std::f64::consts::PI * v / t).cos().powi(2) };
    let lo = (u - t / 2.0).max(-t / 2.0);
    let hi = (u + t / 2.0).min(t / 2.0);
    let (x, w) = gauss_legendre(24);
    x.iter().zip(&w).map(|(x, w)| {
        let v = lo + (hi - lo) * (x + 1.0) / 2.0;
        w * (hi - lo) / 2.0 * hann(v) * hann(u - v)
    }).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecouplingReport {
    pub n: usize,
    pub h: f64,
    pub p: f64,
    /// `‖Σ f_i ∗ φ̂_i|_S‖_{L^p(dσ)}`.
    pub lhs: f64,
    /// `(Σ ‖f_i‖_p^p)^{1/p}`.
    pub rhs: f64,
    /// `lhs / (H^{1/p} rhs)`.
    pub ratio: f64,
    /// Per-ball ratios `‖f_i ∗ φ̂_i|_S‖_p / (H^{1/p} ‖f_i‖_p)`.
    pub single_ratios: Vec<f64>,
    pub nodes: usize,
}

/// Coarse Gauss–Legendre panels per unit `H` for the smooth profiles.
const COARSE_PANELS_PER_H: usize = 16;
const ORDER: usize = 8;

/// Barycentric weights for the nodes `x`.
fn bary_weights(x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| 1.0 / (0..x.len()).filter(|&k| k != j).map(|k| x[j] - x[k]).product::<f64>())
        .collect()
}

fn interpolate(x: &[f64], bw: &[f64], y: &[Complex64], at: f64) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for j in 0..x.len() {
        let d = at - x[j];
        if d == 0.0 {
            return y[j];
        }
        let c = bw[j] / d;
        num += y[j] * c;
        den += c;
    }
    num / den
}

/// Evaluates the decoupling ratio for `data[i]` on the ball `B(z_i, H)` of a
/// sparse family. Only `n = 1` (spacetime `ℝ²`, time first) is supported.
pub fn decoupling_check(
    family: &SparseFamily,
    data: &[BallData],
    sym: &SymbolSpec<f64>,
    p: f64,
) -> Result<DecouplingReport> {
    if sym.dim() != 1 {
        return Err(Error::Unsupported(format!("decoupling check in dimension {}", sym.dim())));
    }
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [1, 2], got {p}")));
    }
    if data.len() != family.centers.len() || data.iter().any(|d| d.terms.is_empty()) {
        return Err(Error::Domain("one non-empty data item per ball is required".into()));
    }
    if family.centers.iter().any(|c| c.len() != 2) {
        return Err(Error::Domain("centres must be spacetime points (t, x)".into()));
    }
    if !is_sparse(family) {
        return Err(Error::Precondition("family is not (N, H)-sparse; the bound is not claimed".into()));
    }
    let h = family
        .radius
        .to_string()
        .parse::<f64>()
        .map_err(|e| Error::Domain(format!("radius: {e}")))?;
    let stencil = Stencil::new(h, STENCIL_POINTS)?;
    let n = family.centers.len();
    // Centred positions keep the phases small.
    let mean = [0, 1].map(|a| family.centers.iter().map(|c| c[a] as f64).sum::<f64>() / n as f64);
    let z: Vec<[f64; 2]> = family.centers.iter().map(|c| [c[0] as f64 - mean[0], c[1] as f64 - mean[1]]).collect();
    let zmax = z.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);

    let (gx, gw) = gauss_legendre(ORDER);
    let bw = bary_weights(&gx);
    let coarse = COARSE_PANELS_PER_H * h.ceil() as usize;
    let (a, b) = (0.5, 2.0);
    let width = (b - a) / coarse as f64;
    let max_slope = (1.0 + sym.phase_1d(b).1.powi(2)).sqrt();
    let sub = ((zmax * max_slope * width) / 2.0).ceil().max(1.0) as usize;

    let mut lhs_p = 0.0;
    let mut single_p = vec![0.0; n];
    let mut nodes = 0;
    for panel in 0..coarse {
        let lo = a + width * panel as f64;
        let xs: Vec<f64> = gx.iter().map(|x| lo + width * (x + 1.0) / 2.0).collect();
        // Smooth profiles a_i ∗ Φ_H at the coarse nodes.
        let prof: Vec<Vec<Complex64>> = (0..n)
            .map(|i| {
                xs.iter()
                    .map(|&xi| {
                        let s = [sym.phase_1d(xi).0, xi];
                        stencil
                            .offsets
                            .iter()
                            .zip(&stencil.weights)
                            .map(|(o, &w)| data[i].profile(h, [s[0] - o[0], s[1] - o[1]]) * w)
                            .sum::<Complex64>()
                    })
                    .collect()
            })
            .collect();
        let sw = width / sub as f64;
        for k in 0..sub {
            let slo = lo + sw * k as f64;
            for (x, w) in gx.iter().zip(&gw) {
                let xi = slo + sw * (x + 1.0) / 2.0;
                let (phi, dphi) = sym.phase_1d(xi);
                let weight = w * sw / 2.0 * (1.0 + dphi * dphi).sqrt();
                let mut total = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let bi = interpolate(&xs, &bw, &prof[i], xi);
                    single_p[i] += weight * bi.norm().powf(p);
                    total += bi * Complex64::from_polar(1.0, -(z[i][0] * phi + z[i][1] * xi));
                }
                lhs_p += weight * total.norm().powf(p);
                nodes += 1;
            }
        }
    }
    let norms: Vec<f64> = data.iter().map(|d| d.lp_norm(h, p)).collect();
    let rhs = norms.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p);
    let hp = h.powf(1.0 / p);
    let lhs = lhs_p.powf(1.0 / p);
    Ok(DecouplingReport {
        n,
        h,
        p,
        lhs,
        rhs,
        ratio: lhs / (hp * rhs),
        single_ratios: single_p.iter().zip(&norms).map(|(s, v)| s.powf(1.0 / p) / (hp * v)).collect(),
        nodes,
    })
}

/// `sup_w ∫_S |Φ_H(s - w)| dσ(s) / H`: the constant of the `p = 1` bound
/// obtained from the triangle inequality and Fubini, for `Φ_H` as sampled.
pub fn fubini_constant(sym: &SymbolSpec<f64>, h: f64) -> Result<f64> {
    let stencil = Stencil::new(h, STENCIL_POINTS)?;
    let cell = {
        let o = &stencil.offsets;
        let d = (o[1][1] - o[0][1]).abs();
        d * d
    };
    // Surface measure inside one stencil-radius ball, maximized over the
    // curve, times the density bound max Φ_H.
    let peak = stencil.weights.iter().fold(0.0f64, |m, &w| m.max(w)) / cell;
    let r = stencil.radius();
    let (gx, gw) = gauss_legendre(ORDER);
    let panels = 400;
    let width = 1.5 / panels as f64;
    let pts: Vec<([f64; 2], f64)> = (0..panels)
        .flat_map(|p| {
            let lo = 0.5 + width * p as f64;
            gx.iter()
                .zip(&gw)
                .map(|(x, w)| {
                    let xi = lo + width * (x + 1.0) / 2.0;
                    let (phi, d) = sym.phase_1d(xi);
                    ([phi, xi], w * width / 2.0 * (1.0 + d * d).sqrt())
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mass = pts
        .iter()
        .map(|(c, _)| {
            pts.iter().filter(|(s, _)| (s[0] - c[0]).hypot(s[1] - c[1]) <= r).map(|(_, w)| w).sum::<f64>()
        })
        .fold(0.0, f64::max);
    Ok(peak * mass / h)
}

/// Random data with `terms` modes at frequencies within `0.1` of `S`.
pub fn random_ball_data<R: rand::Rng>(rng: &mut R, sym: &SymbolSpec<f64>, terms: usize) -> BallData {
    let terms = (0..terms)
        .map(|_| {
            let xi: f64 = rng.gen_range(0.6..1.9);
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (c, [sym.phase_1d(xi).0 + rng.gen_range(-0.1..0.1), xi])
        })
        .collect();
    BallData { terms }
}

/// `n` centres in `[-side, side]²` drawn by rejection until the family is
/// `(n, H)`-sparse.
pub fn random_sparse_family<R: rand::Rng>(
    rng: &mut R,
    n: usize,
    h: u32,
    gamma: super::family::Exponent,
    side: i64,
) -> Result<SparseFamily> {
    for _ in 0..10_000 {
        let fam = SparseFamily {
            centers: (0..n).map(|_| vec![rng.gen_range(-side..=side), rng.gen_range(-side..=side)]).collect(),
            radius: num_bigint::BigUint::from(h),
            gamma,
        };
        if is_sparse(&fam) {
            return Ok(fam);
        }
    }
    Err(Error::Domain(format!("no sparse family of {n} balls found in a box of side {side}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use num_rational::Ratio;

    #[test]
    fn hann_transform_matches_quadrature() {
        let t = PROFILE_HALF_WIDTH;
        let (x, w) = gauss_legendre(32);
        for omega in [0.0, 0.3, 2.0, std::f64::consts::TAU / t, 11.0, 40.0] {
            let q: f64 = (0..16)
                .flat_map(|p| {
                    let lo = -t / 2.0 + t / 16.0 * p as f64;
                    x.iter().zip(&w).map(move |(x, w)| {
                        let u = lo + t / 16.0 * (x + 1.0) / 2.0;
                        w * t / 32.0 * (std::f64::consts::PI * u / t).cos().powi(2) * (omega * u).cos()
                    })
                })
                .sum();
            assert!((q - hann_transform(omega, t)).abs() < 1e-12, "{omega}");
        }
    }

    #[test]
    fn stencil_is_normalized_and_supported() {
        let s = Stencil::new(8.0, STENCIL_POINTS).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(s.radius() < 1.5 / 8.0);
        assert!(s.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn plancherel_for_ball_data() {
        let h = 4.0;
        let d = BallData { terms: vec![(Complex64::new(1.0, 0.5), [1.0, 1.0]), (Complex64::new(-0.3, 0.2), [2.0, 1.4])] };
        let freq = d.lp_norm(h, 2.0).powi(2);
        let (x, w) = gauss_legendre(16);
        let t = PROFILE_HALF_WIDTH * h;
        let panels = 16;
        let step = 2.0 * t / panels as f64;
        let mut s = 0.0;
        for pi in 0..panels {
            for (xa, wa) in x.iter().zip(&w) {
                let y0 = -t + step * (pi as f64 + (xa + 1.0) / 2.0);
                for pj in 0..panels {
                    for (xb, wb) in x.iter().zip(&w) {
                        let y1 = -t + step * (pj as f64 + (xb + 1.0) / 2.0);
                        s += wa * wb * step * step / 4.0 * d.spatial(h, [y0, y1]).norm_sqr();
                    }
                }
            }
        }
        let spatial = std::f64::consts::TAU.powi(2) * s;
        assert!((freq - spatial).abs() <= 1e-6 * spatial, "{freq} {spatial}");
    }

    #[test]
    fn non_sparse_family_is_rejected() {
        let fam = SparseFamily {
            centers: vec![vec![0, 0], vec![10, 0]],
            radius: BigUint::from(8u32),
            gamma: Ratio::from_integer(2),
        };
        let d = BallData { terms: vec![(Complex64::new(1.0, 0.0), [1.0, 1.0])] };
        let sym = SymbolSpec::schrodinger(1);
        assert!(matches!(decoupling_check(&fam, &[d.clone(), d], &sym, 2.0), Err(Error::Precondition(_))));
    }
}
