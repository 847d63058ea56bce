//! Mixed Lebesgue norms `L^q_x L^r_t` and `L^r_t L^q_x` of sampled spacetime data.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpacetimeField;
use crate::scalar::{pairwise_sum, Real};

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Exponent<T> {
    Finite(T),
    Infinity,
}

impl<T: Real> Exponent<T> {
    pub fn finite(p: T) -> Result<Self> {
        if !(p >= T::one()) || !p.is_finite() {
            return Err(Error::Domain(format!("exponent must lie in [1, ∞], got {p}")));
        }
        Ok(Exponent::Finite(p))
    }

    /// `1/p` with `1/∞ = 0`.
    pub fn recip(&self) -> T {
        match self {
            Exponent::Finite(p) => T::one() / *p,
            Exponent::Infinity => T::zero(),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl<T: Real> fmt::Display for Exponent<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl<T: Real> FromStr for Exponent<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            v => Exponent::finite(crate::symbols::parse_num(v)?),
        }
    }
}

/// Which variable is integrated first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Order {
    /// `L^q_x(L^r_t)`: time inside.
    XT,
    /// `L^r_t(L^q_x)`: space inside.
    TX,
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "xt" | "XT" => Ok(Order::XT),
            "tx" | "TX" => Ok(Order::TX),
            v => Err(Error::Parse(format!("order must be xt or tx, got `{v}`"))),
        }
    }
}

/// Closed ball `B_ρ(c)`; cells are selected by their centres (the grid points).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball<T> {
    pub center: Vec<T>,
    pub radius: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedNormSpec<T> {
    pub q: Exponent<T>,
    pub r: Exponent<T>,
    pub order: Order,
    /// `None` means the whole torus.
    pub ball: Option<Ball<T>>,
    /// `None` means all sampled times.
    pub window: Option<(T, T)>,
}

impl<T: Real> MixedNormSpec<T> {
    pub fn new(q: Exponent<T>, r: Exponent<T>, order: Order) -> Self {
        Self { q, r, order, ball: None, window: None }
    }

    pub fn with_ball(mut self, center: Vec<T>, radius: T) -> Self {
        self.ball = Some(Ball { center, radius });
        self
    }

    pub fn with_window(mut self, a: T, b: T) -> Self {
        self.window = Some((a, b));
        self
    }
}

/// `(Σ w_i a_i^p)^{1/p}` with scaling against overflow, or `max a_i` for `p = ∞`.
pub(crate) fn weighted_pnorm<T: Real>(values: &[T], weights: &[T], p: Exponent<T>) -> T {
    let top = values.iter().fold(T::zero(), |m, &v| m.max(v));
    match p {
        Exponent::Infinity => top,
        Exponent::Finite(p) => {
            if top == T::zero() {
                return T::zero();
            }
            let terms: Vec<T> = values.iter().zip(weights).map(|(&v, &w)| w * (v / top).powf(p)).collect();
            top * pairwise_sum(&terms).powf(T::one() / p)
        }
    }
}

/// Spatial cells in the region with their volumes. A cell whose centre lies on
/// the sphere (to rounding) counts with half its volume.
pub fn region_cells<T: Real>(u: &SpacetimeField<T>, ball: Option<&Ball<T>>) -> Result<(Vec<usize>, Vec<T>)> {
    let grid = u.grid();
    let vol = grid.cell_volume();
    let mut idx = Vec::new();
    let mut w = Vec::new();
    match ball {
        None => {
            idx.extend(0..grid.len());
            w.resize(grid.len(), vol);
        }
        Some(b) => {
            grid.require_dim(b.center.len())?;
            if !(b.radius >= T::zero()) {
                return Err(Error::Domain("ball radius must be nonnegative".into()));
            }
            let tol = grid.dx() * T::lit(1e-9);
            for i in 0..grid.len() {
                let d = grid.torus_dist2(&grid.point(i), &b.center).sqrt();
                if d < b.radius - tol {
                    idx.push(i);
                    w.push(vol);
                } else if d <= b.radius + tol {
                    idx.push(i);
                    w.push(vol / T::lit(2.0));
                }
            }
        }
    }
    if idx.is_empty() {
        return Err(Error::Domain("spatial region contains no grid cells".into()));
    }
    Ok((idx, w))
}

/// Sample indices in the window with trapezoid weights (a single sample has weight 1).
pub fn window_samples<T: Real>(u: &SpacetimeField<T>, window: Option<(T, T)>) -> Result<(Vec<usize>, Vec<T>)> {
    let times = u.times();
    let dt = u.dt();
    let tol = dt.max(T::one()) * T::lit(1e-9);
    let (a, b) = window.unwrap_or((times[0], times[times.len() - 1]));
    if a > b {
        return Err(Error::Domain("time window has a > b".into()));
    }
    if a < times[0] - tol || b > times[times.len() - 1] + tol {
        return Err(Error::Domain("time window extends beyond the sampled times".into()));
    }
    let idx: Vec<usize> = (0..times.len()).filter(|&s| times[s] >= a - tol && times[s] <= b + tol).collect();
    if idx.is_empty() {
        return Err(Error::Domain("time window contains no samples".into()));
    }
    let mut w = vec![dt; idx.len()];
    if idx.len() == 1 {
        w[0] = T::one();
    } else {
        w[0] = dt / T::lit(2.0);
        let last = idx.len() - 1;
        w[last] = dt / T::lit(2.0);
    }
    Ok((idx, w))
}

pub fn mixed_norm<T: Real>(u: &SpacetimeField<T>, spec: &MixedNormSpec<T>) -> Result<T> {
    let (cells, wx) = region_cells(u, spec.ball.as_ref())?;
    let (steps, wt) = window_samples(u, spec.window)?;
    let slices = u.slices();
    let out = match spec.order {
        Order::XT => {
            let mut inner = Vec::with_capacity(cells.len());
            let mut col = vec![T::zero(); steps.len()];
            for &i in &cells {
                for (c, &s) in col.iter_mut().zip(&steps) {
                    *c = slices[s][i].norm();
                }
                inner.push(weighted_pnorm(&col, &wt, spec.r));
            }
            weighted_pnorm(&inner, &wx, spec.q)
        }
        Order::TX => {
            let mut inner = Vec::with_capacity(steps.len());
            let mut row = vec![T::zero(); cells.len()];
            for &s in &steps {
                for (c, &i) in row.iter_mut().zip(&cells) {
                    *c = slices[s][i].norm();
                }
                inner.push(weighted_pnorm(&row, &wx, spec.q));
            }
            weighted_pnorm(&inner, &wt, spec.r)
        }
    };
    Ok(out)
}

/// `‖sup_t |u|‖_{L^q_x(region)}` over the sampled times.
pub fn maximal_norm<T: Real>(
    u: &SpacetimeField<T>,
    q: Exponent<T>,
    ball: Option<Ball<T>>,
    window: Option<(T, T)>,
) -> Result<T> {
    let spec = MixedNormSpec { q, r: Exponent::Infinity, order: Order::XT, ball, window };
    mixed_norm(u, &spec)
}

/// Relative change of the norm when every other time sample is dropped; an
/// empirical bound on time-undersampling error.
pub fn refinement_delta<T: Real>(u: &SpacetimeField<T>, spec: &MixedNormSpec<T>) -> Result<T> {
    let fine = mixed_norm(u, spec)?;
    let keep: Vec<usize> = (0..u.times().len()).step_by(2).collect();
    if keep.len() < 2 {
        return Err(Error::Precondition("refinement delta needs at least three samples".into()));
    }
    let times = keep.iter().map(|&s| u.times()[s]).collect();
    let slices = keep.iter().map(|&s| u.slices()[s].clone()).collect();
    let coarse_u = SpacetimeField::new(*u.grid(), times, slices)?;
    let mut coarse_spec = spec.clone();
    if let Some((a, b)) = spec.window {
        let t = coarse_u.times();
        coarse_spec.window = Some((a.max(t[0]), b.min(t[t.len() - 1])));
    }
    let coarse = mixed_norm(&coarse_u, &coarse_spec)?;
    Ok(if fine > T::zero() { (fine - coarse).abs() / fine } else { T::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{uniform_times, C};
    use crate::grid::Grid;

    fn fin(p: f64) -> Exponent<f64> {
        Exponent::finite(p).unwrap()
    }

    #[test]
    fn constant_on_unit_ball() {
        let g = Grid::new(1, 1024, 8.0).unwrap();
        let u = SpacetimeField::from_fn(g, uniform_times(0.0, 1.0, 33), |_, _| C::new(1.0, 0.0)).unwrap();
        let spec = MixedNormSpec::new(fin(2.0), fin(2.0), Order::XT).with_ball(vec![0.0], 1.0);
        assert!((mixed_norm(&u, &spec).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn separable_product() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let times = uniform_times(0.0, 2.0, 41);
        let f = |x: f64| (-x * x).exp();
        let h = |t: f64| 1.0 + t * t;
        let u = SpacetimeField::from_fn(g, times.clone(), |t, x| C::new(f(x[0]) * h(t), 0.0)).unwrap();
        let uf = SpacetimeField::from_fn(g, vec![0.0], |_, x| C::new(f(x[0]), 0.0)).unwrap();
        let ug = SpacetimeField::from_fn(g, times, |t, x| C::new(if x[0] == 0.0 { h(t) } else { 0.0 }, 0.0)).unwrap();
        for order in [Order::XT, Order::TX] {
            let spec = MixedNormSpec::new(fin(3.0), fin(1.5), order);
            let fq = mixed_norm(&uf, &MixedNormSpec::new(fin(3.0), fin(1.5), Order::XT)).unwrap();
            // Time norm of h alone: divide out the single-cell spatial weight.
            let gr = mixed_norm(&ug, &MixedNormSpec::new(fin(1.5), fin(1.5), Order::XT)).unwrap()
                / g.dx().powf(1.0 / 1.5);
            let got = mixed_norm(&u, &spec).unwrap();
            assert!((got / (fq * gr) - 1.0).abs() < 1e-12, "{order:?}");
        }
    }

    #[test]
    fn column_indicator() {
        // Height-h column over a base of P cells: h^{1/r} |P|^{1/q}.
        let g = Grid::new(1, 64, 64.0).unwrap();
        let times = uniform_times(0.0, 10.0, 11);
        let u = SpacetimeField::from_fn(g, times, |t, x| {
            C::new(if (0.0..5.0).contains(&x[0]) && (2.0..=6.0).contains(&t) { 1.0 } else { 0.0 }, 0.0)
        })
        .unwrap();
        let spec = MixedNormSpec::new(fin(2.0), fin(3.0), Order::XT).with_window(2.0, 6.0);
        let want = 4f64.powf(1.0 / 3.0) * 5f64.powf(0.5);
        assert!((mixed_norm(&u, &spec).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn maximal_examples() {
        let g = Grid::new(1, 64, 8.0).unwrap();
        let f = |x: f64| (-x * x).exp();
        let times = uniform_times(0.0, 1.0, 17);
        let u = SpacetimeField::from_fn(g, times.clone(), |t, x| C::new(0.0, t).exp() * f(x[0])).unwrap();
        let u0 = SpacetimeField::from_fn(g, vec![0.0], |_, x| C::new(f(x[0]), 0.0)).unwrap();
        let ball = Some(Ball { center: vec![0.0], radius: 1.0 });
        let a = maximal_norm(&u, fin(2.0), ball.clone(), None).unwrap();
        let b = mixed_norm(&u0, &MixedNormSpec { ball, ..MixedNormSpec::new(fin(2.0), fin(2.0), Order::XT) }).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn equal_exponents_commute() {
        let g = Grid::<f64>::new(1, 32, 8.0).unwrap();
        let u = SpacetimeField::from_fn(g, uniform_times(0.0, 1.0, 9), |t: f64, x: &[f64]| C::new(x[0].sin() + t, t * x[0])).unwrap();
        let a = mixed_norm(&u, &MixedNormSpec::new(fin(2.5), fin(2.5), Order::XT)).unwrap();
        let b = mixed_norm(&u, &MixedNormSpec::new(fin(2.5), fin(2.5), Order::TX)).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn empty_region_is_error() {
        let g = Grid::new(1, 32, 8.0).unwrap();
        let u = SpacetimeField::from_fn(g, vec![0.0], |_, _| C::new(1.0, 0.0)).unwrap();
        let spec = MixedNormSpec::new(fin(2.0), fin(2.0), Order::XT).with_ball(vec![0.1], 0.01);
        assert!(matches!(mixed_norm(&u, &spec), Err(Error::Domain(_))));
        assert!(Exponent::<f64>::finite(0.5).is_err());
        assert_eq!("inf".parse::<Exponent<f64>>().unwrap(), Exponent::Infinity);
    }
}
