//! Lower bounds for `‖A_R‖_{L² → L^q_x L^r_t}` from explicit inputs refined
//! by projected gradient ascent.

use num_complex::Complex;
use serde::Serialize;

use super::operator::{power_iteration, CurveOperator, NormEstimate, PowerConfig};
use super::SmoothingOperatorSpec;
use crate::error::Result;
use crate::norms::Exponent;
use crate::scalar::{mollifier, pairwise_sum, Real};

type C<T> = Complex<T>;

/// Finite stand-in for `∞` in the ascent direction only.
pub const SMOOTHED_INFINITY: f64 = 64.0;
/// Packet centres in `ξ`.
pub const PACKET_CENTERS: [f64; 3] = [0.75, 1.25, 1.75];
/// Focus points of the packet superposition candidate.
pub const SUPERPOSITION_POINTS: usize = 4;

/// Search budget of [`lower_bound_mixed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixedConfig {
    pub power: PowerConfig,
    /// Steps per ascent run; the step halves on rejection and grows by 3/2
    /// on acceptance.
    pub steps: usize,
    /// Ascent runs, started from the best candidates.
    pub restarts: usize,
    /// Add the top `L²` singular vector (one power iteration) as a candidate.
    pub singular_candidate: bool,
}

impl Default for MixedConfig {
    fn default() -> Self {
        Self { power: PowerConfig::default(), steps: 50, restarts: 5, singular_candidate: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedBound<T> {
    /// `‖A f‖ / ‖f‖` for the best input found.
    pub value: T,
    /// Best value among the unrefined candidates.
    pub initial: T,
    /// Label of the candidate the best run started from.
    pub candidate: String,
    /// Label of the best unrefined candidate.
    pub best_initial: String,
    pub accepted_steps: usize,
    /// Ascent runs that accepted no step.
    pub stagnant_runs: usize,
    /// The `L²` estimate, when the singular vector was a candidate.
    pub l2: Option<NormEstimate<T>>,
    #[serde(skip)]
    pub vector: Vec<C<T>>,
}

fn unit<T: Real>(mut v: Vec<C<T>>) -> Vec<C<T>> {
    let sq: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
    let n = pairwise_sum(&sq).sqrt();
    if n > T::zero() {
        v.iter_mut().for_each(|z| *z = *z / n);
    }
    v
}

fn finite<T: Real>(e: Exponent<T>) -> T {
    match e {
        Exponent::Finite(p) => p,
        Exponent::Infinity => T::lit(SMOOTHED_INFINITY),
    }
}

/// Structured inputs: Gaussian packets `e^{-((ξ-ξ0)/w)²} e^{-i(t*Φ(ξ) + x*ξ)}`
/// focusing at `(t*, x*) = (window centre, 0)`, a superposition of
/// width-`R^{-1/2}` packets focusing at points spread over `B_R`, and the
/// Knapp field (mollifier of half-width `1/(2R)` at `ξ = 1.25`) both focused
/// at `t*` and unfocused.
fn candidates<T: Real>(spec: &SmoothingOperatorSpec<T>, op: &CurveOperator<T>) -> Vec<(String, Vec<C<T>>)> {
    let r = spec.scale;
    let (a, b) = spec.interval();
    let t_star = (a + b) / T::lit(2.0);
    let phase = |xi: T, t: T, x: T| -(t * spec.sym.phase_1d(xi).0 + x * xi);
    let packet = |xi0: T, w: T, t: T, x: T| -> Vec<C<T>> {
        op.frequencies()
            .iter()
            .map(|&xi| {
                let s = (xi - xi0) / w;
                C::from_polar((-s * s).exp(), phase(xi, t, x))
            })
            .collect()
    };
    let sqrt_r = r.sqrt();
    let widths = [
        ("R^-1/2/2", T::one() / (T::lit(2.0) * sqrt_r)),
        ("R^-1/2", T::one() / sqrt_r),
        ("2R^-1/2", T::lit(2.0) / sqrt_r),
        ("R^-1", T::one() / r),
        ("1", T::one()),
    ];
    let mut out = Vec::new();
    for (label, w) in widths {
        for &c in &PACKET_CENTERS {
            out.push((format!("packet w={label} xi0={c}"), unit(op.encode(&packet(T::lit(c), w, t_star, T::zero())))));
        }
    }
    let mut sum = vec![C::new(T::zero(), T::zero()); op.inputs()];
    for j in 0..SUPERPOSITION_POINTS {
        let x = -r + r * T::from_usize_lossy(2 * j + 1) / T::from_usize_lossy(SUPERPOSITION_POINTS);
        for (s, z) in sum.iter_mut().zip(packet(T::lit(1.25), T::one() / sqrt_r, t_star, x)) {
            *s = *s + z;
        }
    }
    out.push(("superposition w=R^-1/2".into(), unit(op.encode(&sum))));
    let half = T::lit(0.5) / r;
    let c = T::lit(crate::recipes::KNAPP_CENTER);
    for (label, t) in [("knapp focused", t_star), ("knapp", T::zero())] {
        let fhat: Vec<C<T>> =
            op.frequencies().iter().map(|&xi| C::from_polar(mollifier((xi - c) / half), phase(xi, t, T::zero()))).collect();
        if fhat.iter().any(|z| z.norm() > T::zero()) {
            out.push((label.into(), unit(op.encode(&fhat))));
        }
    }
    out
}

/// Projected gradient ascent on the unit sphere; returns the final vector,
/// its value and the number of accepted steps.
fn ascend<T: Real>(op: &CurveOperator<T>, mut v: Vec<C<T>>, q: T, r: T, steps: usize) -> (Vec<C<T>>, T, usize) {
    let (mut value, mut top, mut grad) = op.value_and_gradient(&v, q, r, T::one());
    let mut step = T::lit(0.5);
    let mut accepted = 0;
    for _ in 0..steps {
        let along: C<T> = grad.iter().zip(&v).map(|(g, x)| *g * x.conj()).sum();
        let dir: Vec<C<T>> = grad.iter().zip(&v).map(|(g, x)| *g - *x * along.re).collect();
        let sq: Vec<T> = dir.iter().map(|z| z.norm_sqr()).collect();
        let dn = pairwise_sum(&sq).sqrt();
        if dn == T::zero() {
            break;
        }
        let trial = unit(v.iter().zip(&dir).map(|(x, d)| *x + *d * (step / dn)).collect());
        let (tv, tt, tg) = op.value_and_gradient(&trial, q, r, top);
        if tv > value {
            v = trial;
            value = tv;
            top = tt;
            grad = tg;
            accepted += 1;
            step = (step * T::lit(1.5)).min(T::one());
        } else {
            step = step / T::lit(2.0);
            if step < T::lit(1e-6) {
                break;
            }
        }
    }
    (v, value, accepted)
}

/// Lower bound for the mixed operator norm of `spec` (`n = 1`): the best
/// structured candidate, refined by ascent from the `cfg.restarts` best.
pub fn lower_bound_mixed<T: Real>(spec: &SmoothingOperatorSpec<T>, cfg: &MixedConfig) -> Result<MixedBound<T>> {
    let op = CurveOperator::new(spec)?;
    lower_bound_with(&op, spec, cfg)
}

/// [`lower_bound_mixed`] on a prepared operator.
pub fn lower_bound_with<T: Real>(
    op: &CurveOperator<T>,
    spec: &SmoothingOperatorSpec<T>,
    cfg: &MixedConfig,
) -> Result<MixedBound<T>> {
    let mut cands = candidates(spec, op);
    let l2 = if cfg.singular_candidate {
        let est = power_iteration(op, &cfg.power, &[])?;
        cands.push(("top singular vector".into(), est.vector.clone()));
        Some(est)
    } else {
        None
    };
    let mut scored: Vec<(T, String, Vec<C<T>>)> = cands.into_iter().map(|(l, v)| (op.mixed_norm(&v), l, v)).collect();
    // Stable sort keeps the candidate order on ties.
    scored.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let initial = scored[0].0;
    let best_initial = scored[0].1.clone();
    let (q, r) = (finite(spec.q), finite(spec.r));
    let mut best = MixedBound {
        value: initial,
        initial,
        candidate: best_initial.clone(),
        best_initial,
        accepted_steps: 0,
        stagnant_runs: 0,
        l2,
        vector: scored[0].2.clone(),
    };
    for (_, label, v) in scored.into_iter().take(cfg.restarts) {
        let (v, value, accepted) = ascend(op, v, q, r, cfg.steps);
        if accepted == 0 {
            best.stagnant_runs += 1;
        }
        if value > best.value {
            best.value = value;
            best.candidate = label;
            best.accepted_steps = accepted;
            best.vector = v;
        }
    }
    Ok(best)
}
