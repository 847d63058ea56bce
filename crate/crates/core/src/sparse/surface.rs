//! The surface `S = {(Φ(ξ), ξ) : ξ ∈ Π}` with its induced measure `dσ`,
//! the transform `d̂σ`, the restriction `ℛf = f̂|_S` and its adjoint.
//! Spacetime vectors put time first: `ζ = (ζ_0, ζ')`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::SpacetimeField;
use crate::scalar::{gauss_legendre, pairwise_sum_complex, Real};
use crate::symbols::SymbolSpec;

/// Gauss–Legendre order per panel.
pub const PANEL_ORDER: usize = 8;

/// Quadrature for `dσ` over the sharp sector Π: polar in `n = 2`, a spherical
/// cap in `n = 3`. Weights include `√(1 + |∇Φ|²)` and the Jacobian.
#[derive(Debug, Clone)]
pub struct SurfacePatch<T> {
    sym: SymbolSpec<T>,
    panels: usize,
    nodes: Vec<Vec<T>>,
    heights: Vec<T>,
    weights: Vec<T>,
    surface_factor: Vec<T>,
}

/// Composite Gauss–Legendre rule on `[a, b]`.
fn composite(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(PANEL_ORDER);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            x.iter().zip(&w).map(move |(&x, &w)| (lo + h * (x + 1.0) / 2.0, w * h / 2.0)).collect::<Vec<_>>()
        })
        .collect()
}

/// Half-angle of Π about `e_1`: `2 sin(θ/2) = π/4`.
pub fn sector_half_angle() -> f64 {
    2.0 * (std::f64::consts::PI / 8.0).asin()
}

impl<T: Real> SurfacePatch<T> {
    /// `panels` composite panels per coordinate.
    pub fn new(sym: &SymbolSpec<T>, panels: usize) -> Result<Self> {
        if panels == 0 {
            return Err(Error::Domain("at least one panel is required".into()));
        }
        let n = sym.dim();
        let radial = composite(0.5, 2.0, panels);
        let th = sector_half_angle();
        // (ξ, parameter weight) pairs.
        let param: Vec<(Vec<f64>, f64)> = match n {
            1 => radial.iter().map(|&(r, w)| (vec![r], w)).collect(),
            2 => {
                let ang = composite(-th, th, panels);
                radial
                    .iter()
                    .flat_map(|&(r, wr)| ang.iter().map(move |&(a, wa)| (vec![r * a.cos(), r * a.sin()], wr * wa * r)))
                    .collect()
            }
            3 => {
                let polar = composite(0.0, th, panels);
                let azim = composite(0.0, std::f64::consts::TAU, 2 * panels);
                let mut out = Vec::with_capacity(radial.len() * polar.len() * azim.len());
                for &(r, wr) in &radial {
                    for &(p, wp) in &polar {
                        for &(a, wa) in &azim {
                            let xi = vec![r * p.cos(), r * p.sin() * a.cos(), r * p.sin() * a.sin()];
                            out.push((xi, wr * wp * wa * r * r * p.sin()));
                        }
                    }
                }
                out
            }
            _ => return Err(Error::Unsupported(format!("surface patch in dimension {n}"))),
        };
        let mut nodes = Vec::with_capacity(param.len());
        let mut heights = Vec::with_capacity(param.len());
        let mut weights = Vec::with_capacity(param.len());
        let mut surface_factor = Vec::with_capacity(param.len());
        for (xi, w) in param {
            let xi: Vec<T> = xi.into_iter().map(T::lit).collect();
            let (phi, grad) = sym.phase(&xi)?;
            let s = (T::one() + grad.iter().map(|&g| g * g).sum::<T>()).sqrt();
            nodes.push(xi);
            heights.push(phi);
            weights.push(T::lit(w) * s);
            surface_factor.push(s);
        }
        Ok(Self { sym: sym.clone(), panels, nodes, heights, weights, surface_factor })
    }

    pub fn symbol(&self) -> &SymbolSpec<T> {
        &self.sym
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parameter points `ξ_j ∈ Π`.
    pub fn nodes(&self) -> &[Vec<T>] {
        &self.nodes
    }

    /// `Φ(ξ_j)`.
    pub fn heights(&self) -> &[T] {
        &self.heights
    }

    /// `dσ` weights.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// `√(1 + |∇Φ(ξ_j)|²)`, at least 1.
    pub fn surface_factor(&self) -> &[T] {
        &self.surface_factor
    }

    /// `σ(S)`.
    pub fn measure(&self) -> T {
        self.weights.iter().copied().sum()
    }

    fn phase(&self, j: usize, zeta: &[T]) -> T {
        zeta[0] * self.heights[j] + self.nodes[j].iter().zip(&zeta[1..]).map(|(&a, &b)| a * b).sum::<T>()
    }

    /// `d̂σ(ζ) = ∫_S e^{-i ζ·s} dσ(s)`.
    pub fn fourier(&self, zeta: &[T]) -> Result<Complex<T>> {
        if zeta.len() != self.sym.dim() + 1 {
            return Err(Error::Domain(format!("ζ needs {} coordinates, got {}", self.sym.dim() + 1, zeta.len())));
        }
        let terms: Vec<Complex<T>> =
            (0..self.len()).map(|j| Complex::from_polar(self.weights[j], -self.phase(j, zeta))).collect();
        Ok(pairwise_sum_complex(&terms))
    }

    /// Unit normal to `S` at `(Φ(ξ_0), ξ_0)`, time component positive.
    pub fn normal(&self, xi0: &[T]) -> Result<Vec<T>> {
        let (_, grad) = self.sym.phase(xi0)?;
        let mut v = vec![T::one()];
        v.extend(grad.iter().map(|&g| -g));
        let norm = v.iter().map(|&a| a * a).sum::<T>().sqrt();
        Ok(v.into_iter().map(|a| a / norm).collect())
    }
}

/// `ℛf` with the fraction of `‖f‖²` in the boundary layer of the box.
#[derive(Debug, Clone)]
pub struct Restriction<T> {
    pub values: Vec<Complex<T>>,
    pub leakage: T,
}

/// Relative thickness of the boundary layer used for the leakage measure.
pub const BOUNDARY_LAYER: f64 = 0.05;
/// Leakage above which a warning is produced.
pub const LEAKAGE_WARN: f64 = 1e-8;

impl<T: Real> Restriction<T> {
    pub fn warning(&self) -> Option<String> {
        (self.leakage > T::lit(LEAKAGE_WARN))
            .then(|| format!("data not supported in the box: boundary-layer energy fraction {}", self.leakage))
    }
}

fn check_dims<T: Real>(f_dim: usize, patch: &SurfacePatch<T>) -> Result<()> {
    if f_dim != patch.sym.dim() {
        return Err(Error::Domain(format!("field dimension {f_dim} does not match the symbol's {}", patch.sym.dim())));
    }
    Ok(())
}

/// `f̂(Φ(ξ_j), ξ_j) = Σ_{t,x} e^{-i(tΦ(ξ_j) + x·ξ_j)} f(t,x) Δt Δx^n`
/// (a single time slice has weight 1).
pub fn restriction<T: Real>(f: &SpacetimeField<T>, patch: &SurfacePatch<T>) -> Result<Restriction<T>> {
    let g = *f.grid();
    check_dims(g.dim(), patch)?;
    let dt = if f.times().len() < 2 { T::one() } else { f.dt() };
    let cell = dt * g.cell_volume();
    let points: Vec<Vec<T>> = (0..g.len()).map(|i| g.point(i)).collect();
    let mut values = Vec::with_capacity(patch.len());
    for j in 0..patch.len() {
        let xi = &patch.nodes[j];
        let tau = patch.heights[j];
        let mut terms = Vec::with_capacity(f.times().len() * g.len());
        for (&t, slice) in f.times().iter().zip(f.slices()) {
            for (x, &v) in points.iter().zip(slice) {
                let ph = t * tau + x.iter().zip(xi).map(|(&a, &b)| a * b).sum::<T>();
                terms.push(v * Complex::from_polar(T::one(), -ph));
            }
        }
        values.push(pairwise_sum_complex(&terms) * cell);
    }
    Ok(Restriction { values, leakage: boundary_fraction(f) })
}

fn boundary_fraction<T: Real>(f: &SpacetimeField<T>) -> T {
    let g = f.grid();
    let half = g.period() / T::lit(2.0);
    let edge = half * (T::one() - T::lit(2.0 * BOUNDARY_LAYER));
    let times = f.times();
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let tw = (t1 - t0) * T::lit(BOUNDARY_LAYER);
    let mut total = T::zero();
    let mut outer = T::zero();
    for (&t, slice) in times.iter().zip(f.slices()) {
        let t_edge = times.len() > 1 && (t - t0 < tw || t1 - t < tw);
        for (i, v) in slice.iter().enumerate() {
            let e = v.norm_sqr();
            total = total + e;
            if t_edge || g.point(i).iter().any(|&x| x.abs() > edge) {
                outer = outer + e;
            }
        }
    }
    if total == T::zero() {
        T::zero()
    } else {
        outer / total
    }
}

/// `ℛ*g(t,x) = Σ_j w_j g_j e^{i(tΦ(ξ_j) + x·ξ_j)}`, the exact adjoint of
/// [`restriction`] for the pairings `⟨·,·⟩_{dσ}` and `Σ_{t,x} · ΔtΔx^n`.
pub fn extension<T: Real>(
    g: &[Complex<T>],
    patch: &SurfacePatch<T>,
    grid: crate::grid::Grid<T>,
    times: Vec<T>,
) -> Result<SpacetimeField<T>> {
    check_dims(grid.dim(), patch)?;
    if g.len() != patch.len() {
        return Err(Error::Domain(format!("{} surface samples for {} nodes", g.len(), patch.len())));
    }
    SpacetimeField::from_fn(grid, times, |t, x| {
        let terms: Vec<Complex<T>> = (0..patch.len())
            .map(|j| {
                let ph = t * patch.heights[j] + x.iter().zip(&patch.nodes[j]).map(|(&a, &b)| a * b).sum::<T>();
                g[j] * Complex::from_polar(patch.weights[j], ph)
            })
            .collect();
        pairwise_sum_complex(&terms)
    })
}

/// `⟨a, b⟩_{dσ} = Σ_j w_j a_j conj(b_j)`.
pub fn surface_inner<T: Real>(a: &[Complex<T>], b: &[Complex<T>], patch: &SurfacePatch<T>) -> Complex<T> {
    let terms: Vec<Complex<T>> = a.iter().zip(b).zip(&patch.weights).map(|((x, y), &w)| x * y.conj() * w).collect();
    pairwise_sum_complex(&terms)
}

/// `⟨f, h⟩ = Σ_{t,x} f conj(h) ΔtΔx^n`.
pub fn spacetime_inner<T: Real>(f: &SpacetimeField<T>, h: &SpacetimeField<T>) -> Complex<T> {
    let dt = if f.times().len() < 2 { T::one() } else { f.dt() };
    let terms: Vec<Complex<T>> =
        f.slices().iter().zip(h.slices()).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| x * y.conj())).collect();
    pairwise_sum_complex(&terms) * (dt * f.grid().cell_volume())
}

/// Least-squares slope of `log|d̂σ(λ n̂)|` against `log λ`, with `n̂` the
/// normal at `ξ_0`.
pub fn normal_decay_slope<T: Real>(patch: &SurfacePatch<T>, xi0: &[T], lambdas: &[T]) -> Result<f64> {
    if lambdas.len() < 2 {
        return Err(Error::Domain("need at least two radii".into()));
    }
    let nrm = patch.normal(xi0)?;
    let mut pts = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let zeta: Vec<T> = nrm.iter().map(|&a| a * l).collect();
        pts.push((l.as_f64().ln(), patch.fourier(&zeta)?.norm().as_f64().ln()));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_converges() {
        let sym = SymbolSpec::<f64>::schrodinger(1);
        let coarse = SurfacePatch::new(&sym, 4).unwrap().measure();
        let fine = SurfacePatch::new(&sym, 64).unwrap().measure();
        // ∫_{1/2}^{2} √(1 + 4ξ²) dξ.
        let prim = |x: f64| (x * (1.0 + 4.0 * x * x).sqrt() + (2.0 * x + (1.0 + 4.0 * x * x).sqrt()).ln() / 2.0) / 2.0;
        let exact = prim(2.0) - prim(0.5);
        assert!((coarse - exact).abs() < 1e-10);
        assert!((fine - exact).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_area() {
        let sym = SymbolSpec::<f64>::schrodinger(2);
        let p = SurfacePatch::new(&sym, 8).unwrap();
        // Flat surface check: the parameter area of Π is θ·(2² − ½²).
        let area: f64 = p.weights().iter().zip(p.surface_factor()).map(|(w, s)| w / s).sum();
        assert!((area - sector_half_angle() * (4.0 - 0.25)).abs() < 1e-12);
        assert!(p.surface_factor().iter().all(|&s| s >= 1.0));
        assert!(matches!(SurfacePatch::new(&SymbolSpec::<f64>::schrodinger(4), 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn normal_is_orthogonal_to_tangent() {
        let sym = SymbolSpec::<f64>::schrodinger(1);
        let p = SurfacePatch::new(&sym, 2).unwrap();
        let n = p.normal(&[1.25]).unwrap();
        assert!((n[0] * 2.5 + n[1]).abs() < 1e-15);
        assert!(n[0] > 0.0);
    }
}
