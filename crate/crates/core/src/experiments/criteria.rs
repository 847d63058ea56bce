//! The acceptance suite: thirteen criteria with fixed seeds, tolerances and
//! runtime limits.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ExperimentKind, SlopeCheck};
use super::report::{CriterionResult, FitSummary, Measurement, Report};
use super::run::{
    identity_errors, kernel_profile, loglog_slope, orthogonality_worst, power_config, run, sparse_sets,
    surface_profile, IDENTITY_TOL, KERNEL_SLOPE_CEILING, ORTHOGONALITY_CEILING, ORTHOGONALITY_SUBSETS,
};
use crate::error::Result;
use crate::field::{uniform_times, Field};
use crate::grid::Grid;
use crate::opnorm::{dense_norm, power_iteration, CurveOperator, SmoothingOperatorSpec};
use crate::propagator::propagate;
use crate::recipes::{make_field, FieldRecipe, Region};
use crate::sparse::{
    decoupling_check, random_ball_data, random_sparse_family, COVER_CONSTANT, SINGLE_BALL_CONSTANT,
};
use crate::symbols::SymbolSpec;
use crate::wavepackets::max_overlap_1d;

/// What a criterion measured.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub passed: bool,
    pub measured: f64,
    pub bound: String,
    pub detail: String,
    pub measurements: Vec<Measurement>,
    pub fits: Vec<FitSummary>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn new(passed: bool, measured: f64, bound: String, detail: String) -> Self {
        Self { passed, measured, bound, detail, ..Self::default() }
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub limit_seconds: f64,
    pub check: fn() -> Result<Outcome>,
}

/// A criterion's result with its wall-clock time; module errors count as
/// failures.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub result: CriterionResult,
    pub seconds: f64,
    pub limit_seconds: f64,
    pub outcome: Outcome,
}

impl Evaluation {
    pub fn within_limit(&self) -> bool {
        self.seconds <= self.limit_seconds
    }

    pub fn passed(&self) -> bool {
        self.result.passed && self.within_limit()
    }

    /// One summary line.
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} | {} | measured {:.6e} | bound {} | {:.1}s (limit {}s)",
            self.result.id,
            if self.passed() { "PASS" } else { "FAIL" },
            self.result.title,
            self.result.measured,
            self.result.bound,
            self.seconds,
            self.limit_seconds
        )
    }
}

pub fn acceptance_criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: "1", title: "energy identity", limit_seconds: 5.0, check: energy_identity },
        Criterion { id: "2", title: "Gaussian propagation oracle", limit_seconds: 5.0, check: gaussian_oracle },
        Criterion { id: "3", title: "wave-packet reconstruction and energy", limit_seconds: 30.0, check: packet_identities },
        Criterion { id: "4", title: "almost orthogonality", limit_seconds: 60.0, check: almost_orthogonality },
        Criterion { id: "5", title: "kernel decay", limit_seconds: 60.0, check: kernel_decay },
        Criterion { id: "6", title: "scaling exponent", limit_seconds: 600.0, check: scaling_exponent },
        Criterion { id: "7", title: "sharpness direction", limit_seconds: 600.0, check: sharpness },
        Criterion { id: "8", title: "maximal exponent", limit_seconds: 600.0, check: maximal_exponent },
        Criterion { id: "9", title: "local-to-global transfer", limit_seconds: 900.0, check: transfer },
        Criterion { id: "10", title: "tube overlap", limit_seconds: 120.0, check: tube_overlap },
        Criterion { id: "11", title: "sparse decomposition audit", limit_seconds: 120.0, check: sparse_audit },
        Criterion { id: "12", title: "surface-measure decay", limit_seconds: 120.0, check: surface_decay },
        Criterion { id: "13", title: "sparse decoupling", limit_seconds: 300.0, check: sparse_decoupling },
    ]
}

pub fn evaluate(c: &Criterion) -> Evaluation {
    let started = Instant::now();
    let outcome = (c.check)().unwrap_or_else(|e| Outcome::new(false, f64::NAN, "no error".into(), format!("error: {e}")));
    let seconds = started.elapsed().as_secs_f64();
    let result = CriterionResult {
        id: c.id.into(),
        title: c.title.into(),
        passed: outcome.passed,
        measured: outcome.measured,
        bound: outcome.bound.clone(),
        detail: outcome.detail.clone(),
    };
    Evaluation { result, seconds, limit_seconds: c.limit_seconds, outcome }
}

/// Runs every criterion in order; measurement series are prefixed with the
/// criterion id.
pub fn verify_all() -> Report {
    verify_with(|_| {})
}

/// [`verify_all`], calling `progress` after each criterion.
pub fn verify_with(mut progress: impl FnMut(&Evaluation)) -> Report {
    let mut report = Report::new("verify", Default::default());
    let clock = Instant::now();
    for c in acceptance_criteria() {
        let ev = evaluate(&c);
        progress(&ev);
        report.timing.record(&format!("criterion {}", c.id), ev.seconds, Some(c.limit_seconds));
        for mut m in ev.outcome.measurements.clone() {
            m.series = format!("{}/{}", c.id, m.series);
            report.measurements.push(m);
        }
        for mut f in ev.outcome.fits.clone() {
            f.series = format!("{}/{}", c.id, f.series);
            report.fits.push(f);
        }
        report.notes.extend(ev.outcome.notes.iter().map(|n| format!("criterion {}: {n}", c.id)));
        report.criteria.push(ev.result);
    }
    report.timing.wall_seconds = clock.elapsed().as_secs_f64();
    report
}

fn schrodinger() -> SymbolSpec<f64> {
    SymbolSpec::schrodinger(1)
}

fn energy_identity() -> Result<Outcome> {
    let grid = Grid::new(1, 1024, 256.0)?;
    let times = uniform_times(32.0, 128.0, 65);
    let sym = schrodinger();
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let region = Region::Annulus { inner: 0.2, outer: 3.0 };
        let f = make_field(grid, &FieldRecipe::RandomBandlimited { region, seed })?;
        let e0 = f.norm2_sq();
        let u = propagate(&f, &sym, &times)?;
        for s in 0..times.len() {
            worst = worst.max((u.slice_field(s).norm2_sq() - e0).abs() / e0);
        }
    }
    Ok(Outcome::new(worst <= 1e-12, worst, "<= 1e-12".into(), "100 fields, N = 1024, t in [32, 128], 64 steps".into()))
}

/// `(2π)^{-1} ∫ e^{i(xξ + tξ²)} √(2π) e^{-ξ²/2} dξ` by the trapezoid rule on
/// `|ξ| <= 12` with step `1/100`.
pub fn gaussian_quadrature(x: f64, t: f64) -> Complex64 {
    let h = 0.01;
    let n: i64 = 1200;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in -n..=n {
        let xi = k as f64 * h;
        let w = if k.abs() == n { 0.5 } else { 1.0 };
        sum += Complex64::from_polar(w * (-xi * xi / 2.0).exp(), x * xi + t * xi * xi);
    }
    sum * (h * (2.0 * PI).sqrt() / (2.0 * PI))
}

fn gaussian_oracle() -> Result<Outcome> {
    let grid: Grid<f64> = Grid::new(1, 512, 64.0)?;
    let t = 0.5;
    let f = Field::from_fn(grid, |x| {
        let d = grid.torus_delta(x[0], 0.0);
        Complex64::new((-d * d / 2.0).exp(), 0.0)
    });
    let u = propagate(&f, &schrodinger(), &[t])?.slice_field(0);
    let (mut err, mut closed) = (0.0f64, 0.0f64);
    for (j, z) in u.samples().iter().enumerate() {
        let x = grid.torus_delta(grid.coord(j), 0.0);
        let oracle = gaussian_quadrature(x, t);
        let a = Complex64::new(1.0, -2.0 * t);
        let exact = a.sqrt().inv() * (-(x * x) / (a * 2.0)).exp();
        err = err.max((z - oracle).norm());
        closed = closed.max((oracle - exact).norm());
    }
    let mut o = Outcome::new(
        err <= 1e-6,
        err,
        "<= 1e-6".into(),
        format!("N = 512, L = 64, t = {t}; oracle vs closed form {closed:.2e}"),
    );
    o.measurements.push(Measurement::new("max_abs_error", t, err).with("oracle_vs_closed_form", closed));
    Ok(o)
}

fn packet_identities() -> Result<Outcome> {
    let grid = Grid::new(1, 1024, 256.0)?;
    let mut o = Outcome::new(true, 0.0, format!("both <= {IDENTITY_TOL:e}"), "20 fields per R, N = 1024, L = 256".into());
    for r in [4.0, 8.0] {
        let (rec, energy) = identity_errors(grid, r, 20, 0)?;
        o.measurements.push(Measurement::new("reconstruction", r, rec));
        o.measurements.push(Measurement::new("energy", r, energy));
        o.measured = o.measured.max(rec).max(energy);
    }
    o.passed = o.measured <= IDENTITY_TOL;
    Ok(o)
}

fn almost_orthogonality() -> Result<Outcome> {
    let grid = Grid::new(1, 1024, 256.0)?;
    let (worst, used) = orthogonality_worst(grid, 8.0, ORTHOGONALITY_SUBSETS, 20)?;
    let mut o = Outcome::new(
        worst <= ORTHOGONALITY_CEILING && used == ORTHOGONALITY_SUBSETS,
        worst,
        format!("<= {ORTHOGONALITY_CEILING}"),
        format!("{used} nonempty subcollections at R = 8"),
    );
    o.notes.push(format!("calibrated almost-orthogonality constant {worst:.4}"));
    o.measurements.push(Measurement::new("orthogonality", 8.0, worst));
    Ok(o)
}

fn kernel_decay() -> Result<Outcome> {
    let sym = schrodinger();
    let mut o = Outcome::new(true, f64::NEG_INFINITY, format!("<= {KERNEL_SLOPE_CEILING}"), String::new());
    for r in [16.0, 32.0] {
        let pts = kernel_profile(&sym, r)?;
        let slope = loglog_slope(&pts);
        for &(d, k) in &pts {
            o.measurements.push(Measurement::new(&format!("kernel R={r}"), d, k));
        }
        o.detail.push_str(&format!("R = {r}: slope {slope:.3}; "));
        o.measured = o.measured.max(slope);
    }
    o.detail.push_str("t = R²/2, v = 1.25");
    o.passed = o.measured <= KERNEL_SLOPE_CEILING;
    Ok(o)
}

/// Runs `cfg` and folds its criteria into one outcome.
fn from_config(cfg: &ExperimentConfig) -> Result<Outcome> {
    let report = run(cfg)?;
    let main = &report.criteria[0];
    let mut o = Outcome::new(
        report.passed(),
        main.measured,
        main.bound.clone(),
        report.criteria.iter().map(|c| format!("{}: {}", c.id, c.detail)).collect::<Vec<_>>().join("; "),
    );
    for c in report.criteria.iter().skip(1) {
        o.detail.push_str(&format!("; {} {} ({})", c.id, if c.passed { "passed" } else { "failed" }, c.bound));
    }
    o.measurements = report.measurements;
    o.fits = report.fits;
    o.notes = report.notes;
    Ok(o)
}

/// The scaling configuration of criterion 6.
pub fn scaling_config() -> ExperimentConfig {
    ExperimentConfig::defaults(ExperimentKind::Scaling)
}

/// Criterion 7: criterion 6 at `α = 3/4`, residual slope at least 0.2.
pub fn sharpness_config() -> ExperimentConfig {
    let mut c = scaling_config();
    c.alpha = 0.75;
    c.check = SlopeCheck::Exceed;
    c.tolerance = 0.2;
    c
}

pub fn maximal_config() -> ExperimentConfig {
    ExperimentConfig::defaults(ExperimentKind::Maximal)
}

pub fn transfer_config() -> ExperimentConfig {
    ExperimentConfig::defaults(ExperimentKind::Transfer)
}

/// Inputs of the dense cross-check.
pub const DENSE_INPUTS: usize = 256;

/// Power iteration against the singular values of the explicit matrix at
/// `R = 16`, with the period chosen so the operator has 256 inputs.
pub fn dense_cross_check() -> Result<(f64, f64, usize)> {
    let spec = SmoothingOperatorSpec::l2_local(schrodinger(), 0.5, 16.0)?;
    let frame = spec.interval();
    // The Φ-image of the sector has length 3.75.
    let period = 2.0 * PI * (DENSE_INPUTS as f64 - 1.0) / 3.75;
    let op = CurveOperator::with_period(&spec, frame, period)?;
    let power = power_iteration(&op, &power_config(&scaling_config()), &[])?;
    Ok((power.norm, dense_norm(&op), op.inputs()))
}

fn scaling_exponent() -> Result<Outcome> {
    let mut o = from_config(&scaling_config())?;
    let (power, dense, inputs) = dense_cross_check()?;
    let rel = (power - dense).abs() / dense;
    o.measurements.push(Measurement::new("dense", 16.0, dense).with("power", power).with("inputs", inputs as f64));
    o.detail.push_str(&format!("; dense check N = {inputs}: power {power:.6}, dense {dense:.6}, relative {rel:.2e}"));
    o.passed &= rel <= 0.01 && inputs == DENSE_INPUTS;
    o.bound.push_str("; dense agreement <= 1%");
    Ok(o)
}

fn sharpness() -> Result<Outcome> {
    from_config(&sharpness_config())
}

fn maximal_exponent() -> Result<Outcome> {
    from_config(&maximal_config())
}

fn transfer() -> Result<Outcome> {
    from_config(&transfer_config())
}

fn tube_overlap() -> Result<Outcome> {
    let sym = schrodinger();
    let mut o = Outcome::new(true, 0.0, "max / min <= 2".into(), String::new());
    let mut counts = Vec::new();
    for h in [16.0, 32.0, 64.0] {
        let s = max_overlap_1d(&sym, h, 1.0)?;
        o.measurements.push(Measurement::new("max_overlap", h, s.max_count as f64).with("tubes", s.tubes as f64));
        counts.push(s.max_count);
    }
    let lo = *counts.iter().min().unwrap_or(&0);
    let hi = *counts.iter().max().unwrap_or(&0);
    o.measured = if lo > 0 { hi as f64 / lo as f64 } else { f64::INFINITY };
    o.passed = lo > 0 && hi <= 2 * lo;
    o.detail = format!("max counts at H = 16, 32, 64: {counts:?}");
    Ok(o)
}

fn sparse_audit() -> Result<Outcome> {
    let mut ms = Vec::new();
    let (worst, failures) = sparse_sets(1, 50, 128, 1_000_000, 3, 0, |m| ms.push(m))?;
    let mut o = Outcome::new(
        failures == 0 && worst <= COVER_CONSTANT,
        worst,
        format!("exact audit on every set; #families / |E|^(1/3) <= {COVER_CONSTANT}"),
        format!("50 sets, {failures} failing the exact audit, c_cover = {COVER_CONSTANT}"),
    );
    o.notes.push(format!("worst family ratio {worst:.4} against c_cover = {COVER_CONSTANT}"));
    o.measurements = ms;
    Ok(o)
}

fn surface_decay() -> Result<Outcome> {
    let (slope, pts) = surface_profile(&schrodinger())?;
    let mut o = Outcome::new((slope + 0.5).abs() <= 0.1, slope, "-0.5 ± 0.1".into(), "|ζ| from 16 to 256".into());
    o.measurements = pts.iter().map(|&(l, v)| Measurement::new("surface", l, v)).collect();
    Ok(o)
}

fn sparse_decoupling() -> Result<Outcome> {
    let sym = schrodinger();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let bound = 2.0 * SINGLE_BALL_CONSTANT;
    let mut o = Outcome::new(true, 0.0, format!("<= 2 × {SINGLE_BALL_CONSTANT}"), String::new());
    for k in 0..10 {
        let fam = random_sparse_family(&mut rng, 4, 8, Ratio::from_integer(2), 1600)?;
        let d: Vec<_> = (0..4).map(|_| random_ball_data(&mut rng, &sym, 3)).collect();
        let r = decoupling_check(&fam, &d, &sym, 2.0)?;
        o.measurements.push(Measurement::new("ratio", k as f64, r.ratio).with("lhs", r.lhs).with("rhs", r.rhs));
        o.measured = o.measured.max(r.ratio);
    }
    o.passed = o.measured <= bound;
    o.detail = "10 sparse families, N = 4, H = 8, p = 2".into();
    Ok(o)
}
