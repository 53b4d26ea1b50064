//! Numerical checks of the BMO, Hardy and weighted norm bounds for the
//! FRST, and a seeded suite that runs them over a signal corpus.
//!
//! Each check compares a left side computed through the transform pipeline
//! with the closed-form right side and passes when
//! `lhs <= rhs * (1 + slack)`.
//!
//! | check id               | bound                                                  |
//! |------------------------|--------------------------------------------------------|
//! | `product_bmo`          | `‖f K_a(., xi)‖_BMO <= |A_theta| (‖f‖_BMO + 2m)`       |
//! | `frst_bmo`             | `‖FRST(., xi)‖_BMO <= |A_theta| (‖f‖_BMO + 2m)`        |
//! | `frst_hardy`           | `‖FRST(., xi)‖_H1 <= |A_theta| ‖f‖_H1`, `f >= 0`       |
//! | `window_moment`        | `int g(x, xi) (1 + C|x|)^N dx <= A_{xi,N}`             |
//! | `product_bmo_weighted` | `‖f K_a‖_BMO_k <= |A_theta| (‖f‖_BMO_k + 2m)`          |
//! | `frst_bmo_weighted`    | `‖FRST‖_BMO_k <= A_{xi,N} |A_theta| (‖f‖_BMO_k + 2m)`  |
//! | `frst_hardy_weighted`  | `‖FRST‖_H1_k <= A_{xi,N} |A_theta| ‖f‖_H1_k`, `f >= 0` |
//!
//! `m` is always the unweighted mean bound on the same interval family.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frft::{frft_direct, frft_fast, ifrft, kernel_eval, TransformMode};
use crate::frst::{frst_forward, frst_inverse, frst_marginal, frst_row, s_transform_direct, s_transform_spectral};
use crate::function_spaces::{
    bmo_kappa_norm, bmo_norm, default_scales, hardy_kappa_norm, hardy_norm, mean_bound_m, tempered_check,
};
use crate::model::{
    all_intervals, classify_order, FractionalOrder, IntervalFamily, SampledSignal, TemperedWeight, TestFunction,
    UniformGrid, WindowSpec, TOL_XI,
};
use crate::scalar::Scalar;
use crate::windows::{moment_bound_closed, moment_integral, window_area, window_sigma, DEFAULT_CELLS_PER_SIGMA};

/// Slack applied to the transform inequalities.
pub const DEFAULT_SLACK: f64 = 0.05;
/// Tolerance for the weighted-vs-unweighted coherence checks.
pub const COHERENCE_TOL: f64 = 1e-12;

/// Parameters a check was run with; fields that do not apply are `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckParams {
    pub a: Option<f64>,
    pub k: Option<f64>,
    pub p: Option<f64>,
    pub xi: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    pub weight: Option<String>,
    pub signal: Option<String>,
}

/// One row of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check_id: String,
    pub params: CheckParams,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub slack: f64,
    pub pass: bool,
}

impl CheckResult {
    pub fn new(check_id: impl Into<String>, lhs: f64, rhs: f64, slack: f64, params: CheckParams) -> Self {
        Self {
            check_id: check_id.into(),
            params,
            lhs,
            rhs,
            margin: rhs - lhs,
            slack,
            pass: lhs <= rhs * (1.0 + slack),
        }
    }

    /// Same comparison graded with a different slack.
    pub fn with_slack(self, slack: f64) -> Self {
        Self::new(self.check_id, self.lhs, self.rhs, slack, self.params)
    }
}

fn order_params<T: Scalar>(order: &FractionalOrder<T>, xi: T) -> CheckParams {
    CheckParams { a: Some(order.a().to_f64_lossy()), xi: Some(xi.to_f64_lossy()), ..Default::default() }
}

fn with_window<T: Scalar>(mut p: CheckParams, spec: &WindowSpec<T>) -> CheckParams {
    p.k = Some(spec.k().to_f64_lossy());
    p.p = Some(spec.p().to_f64_lossy());
    p
}

fn with_weight<T: Scalar>(mut p: CheckParams, w: &TemperedWeight<T>) -> CheckParams {
    p.c = Some(w.c().to_f64_lossy());
    p.n = Some(w.n().to_f64_lossy());
    p.weight = Some(w.name().to_string());
    p
}

fn check_xi<T: Scalar>(xi: T) -> Result<()> {
    if xi.abs() <= T::lit(TOL_XI) {
        return Err(Error::ZeroFrequency(xi.to_f64_lossy()));
    }
    Ok(())
}

/// `f(t) K_a(t, xi)` on the grid of `f`.
fn kernel_product<T: Scalar>(f: &SampledSignal<T>, order: &FractionalOrder<T>, xi: T) -> Result<SampledSignal<T>> {
    let values = f
        .grid()
        .points()
        .zip(f.values())
        .map(|(t, &v)| Ok(v * kernel_eval(order, t, xi)?))
        .collect::<Result<Vec<_>>>()?;
    SampledSignal::new(*f.grid(), values)
}

fn frst_tau_row<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
) -> Result<SampledSignal<T>> {
    frst_row(f, order, spec, f.grid(), xi, TransformMode::Fast)
}

fn require_nonnegative<T: Scalar>(f: &SampledSignal<T>, phi: &TestFunction<T>) -> Result<()> {
    if !f.is_nonnegative_real() {
        return Err(Error::NegativeInput("signal has negative or complex samples".into()));
    }
    if !phi.is_nonnegative() {
        return Err(Error::NegativeInput("test function takes negative values".into()));
    }
    Ok(())
}

/// Sample set for certifying a weight on a grid: offsets spanning twice
/// the grid extent in each direction.
pub fn certificate_samples<T: Scalar>(grid: &UniformGrid<T>) -> Vec<T> {
    let reach = grid.start().abs().max(grid.last().abs()) + grid.span();
    let count = 129usize;
    (0..count)
        .map(|j| -reach + (reach + reach) * T::from_usize_lossy(j) / T::from_usize_lossy(count - 1))
        .collect()
}

fn certify<T: Scalar>(w: &TemperedWeight<T>, grid: &UniformGrid<T>) -> Result<()> {
    let samples = certificate_samples(grid);
    let report = tempered_check(w, &samples, &samples)?;
    if !report.pass {
        return Err(Error::WeightCertificateFailed { name: w.name().to_string(), worst_ratio: report.worst_ratio });
    }
    Ok(())
}

/// Norms of `f` shared by every check on the same signal.
struct Baseline<T> {
    bmo: T,
    m: T,
}

impl<T: Scalar> Baseline<T> {
    fn new(f: &SampledSignal<T>, family: &IntervalFamily) -> Result<Self> {
        Ok(Self { bmo: bmo_norm(f, family)?, m: mean_bound_m(f, family)? })
    }
}

fn bmo_result<T: Scalar>(id: &str, lhs: T, amp: T, bmo_f: T, m: T, factor: T, params: CheckParams) -> CheckResult {
    let rhs = factor * amp * (bmo_f + m + m);
    CheckResult::new(id, lhs.to_f64_lossy(), rhs.to_f64_lossy(), DEFAULT_SLACK, params)
}

/// `‖f K_a(., xi)‖_BMO <= |A_theta| (‖f‖_BMO + 2m)`.
pub fn check_product_bmo<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi: T,
    family: &IntervalFamily,
) -> Result<CheckResult> {
    let base = Baseline::new(f, family)?;
    product_bmo(f, order, xi, family, &base)
}

fn product_bmo<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi: T,
    family: &IntervalFamily,
    base: &Baseline<T>,
) -> Result<CheckResult> {
    order.require_generic()?;
    check_xi(xi)?;
    let lhs = bmo_norm(&kernel_product(f, order, xi)?, family)?;
    let amp = order.amplitude_modulus()?;
    Ok(bmo_result("product_bmo", lhs, amp, base.bmo, base.m, T::one(), order_params(order, xi)))
}

/// `‖FRST(., xi)‖_BMO <= |A_theta| (‖f‖_BMO + 2m)`, with the FRST row taken
/// on the grid of `f`.
pub fn check_frst_bmo<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    family: &IntervalFamily,
) -> Result<CheckResult> {
    let base = Baseline::new(f, family)?;
    let row = frst_tau_row(f, order, spec, xi)?;
    frst_bmo(&row, order, spec, xi, family, &base)
}

fn frst_bmo<T: Scalar>(
    row: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    family: &IntervalFamily,
    base: &Baseline<T>,
) -> Result<CheckResult> {
    let lhs = bmo_norm(row, family)?;
    let amp = order.amplitude_modulus()?;
    let params = with_window(order_params(order, xi), spec);
    Ok(bmo_result("frst_bmo", lhs, amp, base.bmo, base.m, T::one(), params))
}

/// `‖FRST(., xi)‖_H1 <= |A_theta| ‖f‖_H1` for nonnegative `f` and `phi`.
pub fn check_frst_hardy<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    phi: &TestFunction<T>,
    scales: &[T],
) -> Result<CheckResult> {
    require_nonnegative(f, phi)?;
    let hardy_f = hardy_norm(f, phi, scales)?;
    let row = frst_tau_row(f, order, spec, xi)?;
    frst_hardy(&row, order, spec, xi, phi, scales, hardy_f)
}

fn frst_hardy<T: Scalar>(
    row: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    phi: &TestFunction<T>,
    scales: &[T],
    hardy_f: T,
) -> Result<CheckResult> {
    let lhs = hardy_norm(row, phi, scales)?;
    let rhs = order.amplitude_modulus()? * hardy_f;
    let params = with_window(order_params(order, xi), spec);
    Ok(CheckResult::new("frst_hardy", lhs.to_f64_lossy(), rhs.to_f64_lossy(), DEFAULT_SLACK, params))
}

/// `int g(x, xi) (1 + C|x|)^N dx <= A_{xi,N}`, the integral by the midpoint
/// rule over `(12 + 2N) sigma` with 64 cells per `sigma`; no slack.
pub fn check_window_moment<T: Scalar>(
    spec: &WindowSpec<T>,
    order: &FractionalOrder<T>,
    xi: T,
    c: T,
    n: T,
) -> Result<CheckResult> {
    let sigma = window_sigma(spec, order, xi)?;
    let radius = (T::lit(12.0) + n + n) * sigma;
    let step = sigma / T::lit(DEFAULT_CELLS_PER_SIGMA);
    let lhs = moment_integral(spec, order, xi, c, n, radius, step)?;
    let rhs = moment_bound_closed(spec, order, xi, c, n)?;
    let mut params = with_window(order_params(order, xi), spec);
    params.c = Some(c.to_f64_lossy());
    params.n = Some(n.to_f64_lossy());
    Ok(CheckResult::new("window_moment", lhs.to_f64_lossy(), rhs.to_f64_lossy(), 0.0, params))
}

/// `‖f K_a(., xi)‖_BMO_kappa <= |A_theta| (‖f‖_BMO_kappa + 2m)` with the
/// unweighted `m`.
pub fn check_product_bmo_weighted<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi: T,
    w: &TemperedWeight<T>,
    family: &IntervalFamily,
) -> Result<CheckResult> {
    let m = mean_bound_m(f, family)?;
    let bmo_w = bmo_kappa_norm(f, w, family)?;
    product_bmo_weighted(f, order, xi, w, family, bmo_w, m)
}

fn product_bmo_weighted<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi: T,
    w: &TemperedWeight<T>,
    family: &IntervalFamily,
    bmo_w: T,
    m: T,
) -> Result<CheckResult> {
    order.require_generic()?;
    check_xi(xi)?;
    let lhs = bmo_kappa_norm(&kernel_product(f, order, xi)?, w, family)?;
    let amp = order.amplitude_modulus()?;
    let params = with_weight(order_params(order, xi), w);
    Ok(bmo_result("product_bmo_weighted", lhs, amp, bmo_w, m, T::one(), params))
}

/// `‖FRST(., xi)‖_BMO_kappa <= A_{xi,N} |A_theta| (‖f‖_BMO_kappa + 2m)`,
/// after certifying `(C, N)` for the weight.
pub fn check_frst_bmo_weighted<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    w: &TemperedWeight<T>,
    family: &IntervalFamily,
) -> Result<CheckResult> {
    certify(w, f.grid())?;
    let m = mean_bound_m(f, family)?;
    let bmo_w = bmo_kappa_norm(f, w, family)?;
    let row = frst_tau_row(f, order, spec, xi)?;
    frst_bmo_weighted(&row, order, spec, xi, w, family, bmo_w, m)
}

#[allow(clippy::too_many_arguments)]
fn frst_bmo_weighted<T: Scalar>(
    row: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    w: &TemperedWeight<T>,
    family: &IntervalFamily,
    bmo_w: T,
    m: T,
) -> Result<CheckResult> {
    let lhs = bmo_kappa_norm(row, w, family)?;
    let amp = order.amplitude_modulus()?;
    let bound = moment_bound_closed(spec, order, xi, w.c(), w.n())?;
    let params = with_weight(with_window(order_params(order, xi), spec), w);
    Ok(bmo_result("frst_bmo_weighted", lhs, amp, bmo_w, m, bound, params))
}

/// `‖FRST(., xi)‖_H1_kappa <= A_{xi,N} |A_theta| ‖f‖_H1_kappa` for
/// nonnegative `f` and `phi`, after certifying the weight.
#[allow(clippy::too_many_arguments)]
pub fn check_frst_hardy_weighted<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    phi: &TestFunction<T>,
    scales: &[T],
    w: &TemperedWeight<T>,
) -> Result<CheckResult> {
    require_nonnegative(f, phi)?;
    certify(w, f.grid())?;
    let hardy_w = hardy_kappa_norm(f, phi, scales, w)?;
    let row = frst_tau_row(f, order, spec, xi)?;
    frst_hardy_weighted(&row, order, spec, xi, phi, scales, w, hardy_w)
}

#[allow(clippy::too_many_arguments)]
fn frst_hardy_weighted<T: Scalar>(
    row: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    xi: T,
    phi: &TestFunction<T>,
    scales: &[T],
    w: &TemperedWeight<T>,
    hardy_w: T,
) -> Result<CheckResult> {
    let lhs = hardy_kappa_norm(row, phi, scales, w)?;
    let bound = moment_bound_closed(spec, order, xi, w.c(), w.n())?;
    let rhs = bound * order.amplitude_modulus()? * hardy_w;
    let params = with_weight(with_window(order_params(order, xi), spec), w);
    Ok(CheckResult::new("frst_hardy_weighted", lhs.to_f64_lossy(), rhs.to_f64_lossy(), DEFAULT_SLACK, params))
}

/// Weight entry of a suite configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeightChoice {
    /// `kappa = 1` certified by `(C, N)`.
    Constant { c: f64, n: f64 },
    /// `(1 + |x|)^s` certified by `(1, s)`.
    Polynomial { s: f64 },
}

impl WeightChoice {
    pub fn build(&self) -> Result<TemperedWeight<f64>> {
        match *self {
            WeightChoice::Constant { c, n } => TemperedWeight::constant(c, n),
            WeightChoice::Polynomial { s } => TemperedWeight::polynomial(s),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, WeightChoice::Constant { .. })
    }
}

/// Suite configuration. [`SuiteConfig::default`] is the standard corpus;
/// [`SuiteConfig::empty`] runs nothing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Samples per corpus signal.
    pub samples: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub orders: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub k: f64,
    pub p: f64,
    pub weights: Vec<WeightChoice>,
    /// Signals in the general corpus (BMO checks).
    pub general_signals: usize,
    /// Signals in the nonnegative corpus (Hardy checks).
    pub nonnegative_signals: usize,
    /// Random parameter draws for the window moment check.
    pub moment_draws: usize,
    /// Random trials per invariant check; 0 disables the invariants.
    pub invariant_trials: usize,
    /// Largest interval family enumerated in full; beyond it, dyadic.
    pub interval_cap: usize,
    pub slack: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            samples: 256,
            t_min: -8.0,
            t_max: 8.0,
            orders: vec![0.4, 0.8, 1.0, 1.6],
            frequencies: vec![0.5, 1.0, 2.0],
            k: 1.0,
            p: 1.0,
            weights: vec![
                WeightChoice::Constant { c: 1.0, n: 1e-6 },
                WeightChoice::Polynomial { s: 1.0 },
                WeightChoice::Polynomial { s: 2.0 },
            ],
            general_signals: 52,
            nonnegative_signals: 52,
            moment_draws: 100,
            invariant_trials: 4,
            interval_cap: 100_000,
            slack: DEFAULT_SLACK,
        }
    }
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value.trim().parse().map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_value(key, v)).collect()
}

impl SuiteConfig {
    pub fn empty() -> Self {
        Self { general_signals: 0, nonnegative_signals: 0, moment_draws: 0, invariant_trials: 0, ..Self::default() }
    }

    /// Applies one `key=value` setting. Lists are comma separated; weights
    /// are written `const:C:N` or `poly:s`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim() {
            "seed" => self.seed = parse_value(key, value)?,
            "samples" => self.samples = parse_value(key, value)?,
            "t_min" => self.t_min = parse_value(key, value)?,
            "t_max" => self.t_max = parse_value(key, value)?,
            "orders" => self.orders = parse_list(key, value)?,
            "frequencies" => self.frequencies = parse_list(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "p" => self.p = parse_value(key, value)?,
            "general_signals" => self.general_signals = parse_value(key, value)?,
            "nonnegative_signals" => self.nonnegative_signals = parse_value(key, value)?,
            "moment_draws" => self.moment_draws = parse_value(key, value)?,
            "invariant_trials" => self.invariant_trials = parse_value(key, value)?,
            "interval_cap" => self.interval_cap = parse_value(key, value)?,
            "slack" => self.slack = parse_value(key, value)?,
            "weights" => {
                self.weights = value
                    .split(',')
                    .filter(|w| !w.trim().is_empty())
                    .map(|w| {
                        let parts: Vec<&str> = w.trim().split(':').collect();
                        match parts.as_slice() {
                            ["const", c, n] => {
                                Ok(WeightChoice::Constant { c: parse_value(key, c)?, n: parse_value(key, n)? })
                            }
                            ["poly", s] => Ok(WeightChoice::Polynomial { s: parse_value(key, s)? }),
                            _ => Err(Error::Config(format!("bad weight {w:?}; expected const:C:N or poly:s"))),
                        }
                    })
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Config(format!("unknown suite setting {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.samples < 8 {
            return bad(format!("samples = {} must be >= 8", self.samples));
        }
        if !(self.t_max > self.t_min && self.t_min.is_finite() && self.t_max.is_finite()) {
            return bad(format!("time range [{}, {}] is empty", self.t_min, self.t_max));
        }
        for &a in &self.orders {
            if !classify_order(a)?.is_generic() {
                return bad(format!("order a = {a} is a delta branch; the checks need a generic order"));
            }
        }
        for &xi in &self.frequencies {
            check_xi(xi)?;
        }
        WindowSpec::new(self.k, self.p)?;
        for w in &self.weights {
            w.build()?;
        }
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return bad(format!("slack = {} must be >= 0", self.slack));
        }
        if self.interval_cap == 0 {
            return bad("interval_cap must be >= 1".into());
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<UniformGrid<f64>> {
        let step = (self.t_max - self.t_min) / self.samples as f64;
        UniformGrid::new(self.t_min, step, self.samples)
    }
}

/// Named corpus signals.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub general: Vec<(String, SampledSignal<f64>)>,
    pub nonnegative: Vec<(String, SampledSignal<f64>)>,
}

fn gaussian(t: f64, center: f64, width: f64) -> f64 {
    let z = (t - center) / width;
    (-0.5 * z * z).exp()
}

fn random_tones(rng: &mut ChaCha8Rng, count: usize, band: f64) -> Vec<(Complex<f64>, f64)> {
    (0..count)
        .map(|_| {
            let amp = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (amp, rng.gen_range(-band..band))
        })
        .collect()
}

fn tone_sum(tones: &[(Complex<f64>, f64)], t: f64) -> Complex<f64> {
    tones
        .iter()
        .map(|&(amp, nu)| amp * Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * nu * t))
        .sum()
}

fn normalized(s: SampledSignal<f64>) -> SampledSignal<f64> {
    let peak = s.max_abs();
    if peak > 0.0 {
        s.scaled(Complex::new(1.0 / peak, 0.0))
    } else {
        s
    }
}

/// Seeded corpus: steps, Gaussians, chirps and random band-limited signals,
/// plus a nonnegative set of steps, Gaussians, squared band-limited
/// signals and bump sums.
pub fn build_corpus(config: &SuiteConfig) -> Result<Corpus> {
    let grid = config.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (lo, hi) = (config.t_min, config.t_max);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);

    let mut general = Vec::with_capacity(config.general_signals);
    for i in 0..config.general_signals {
        let (name, signal) = match i % 4 {
            0 => {
                let jump = rng.gen_range(mid - 0.5 * half..mid + 0.5 * half);
                let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                ("step", SampledSignal::from_real_fn(grid, |t| if t >= jump { b } else { a })?)
            }
            1 => {
                let center = rng.gen_range(mid - 0.4 * half..mid + 0.4 * half);
                let width = rng.gen_range(0.3..2.0);
                let amp = Complex::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                ("gauss", SampledSignal::from_fn(grid, |t| amp * gaussian(t, center, width))?)
            }
            2 => {
                let rate = rng.gen_range(-2.0..2.0);
                let shift = rng.gen_range(-2.0..2.0);
                let width = rng.gen_range(1.0..3.0);
                let phase = |t: f64| std::f64::consts::PI * (rate * t * t + shift * t);
                ("chirp", SampledSignal::from_fn(grid, |t| Complex::from_polar(gaussian(t, mid, width), phase(t)))?)
            }
            _ => {
                let tones = random_tones(&mut rng, 8, 2.0);
                ("band", normalized(SampledSignal::from_fn(grid, |t| tone_sum(&tones, t))?))
            }
        };
        general.push((format!("{name}-{i:03}"), signal));
    }

    let mut nonnegative = Vec::with_capacity(config.nonnegative_signals);
    for i in 0..config.nonnegative_signals {
        let (name, signal) = match i % 4 {
            0 => {
                let jump = rng.gen_range(mid - 0.5 * half..mid + 0.5 * half);
                let (a, b) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
                ("nn-step", SampledSignal::from_real_fn(grid, |t| if t >= jump { b } else { a })?)
            }
            1 => {
                let center = rng.gen_range(mid - 0.4 * half..mid + 0.4 * half);
                let width = rng.gen_range(0.3..2.0);
                let amp = rng.gen_range(0.5..2.0);
                ("nn-gauss", SampledSignal::from_real_fn(grid, |t| amp * gaussian(t, center, width))?)
            }
            2 => {
                let tones = random_tones(&mut rng, 6, 1.5);
                let s = SampledSignal::from_real_fn(grid, |t| tone_sum(&tones, t).norm_sqr())?;
                ("nn-band", normalized(s))
            }
            _ => {
                let bumps: Vec<(f64, f64, f64)> = (0..3)
                    .map(|_| {
                        (
                            rng.gen_range(0.2..1.0),
                            rng.gen_range(mid - 0.6 * half..mid + 0.6 * half),
                            rng.gen_range(0.2..1.5),
                        )
                    })
                    .collect();
                let s = SampledSignal::from_real_fn(grid, |t| {
                    bumps.iter().map(|&(a, c, w)| a * gaussian(t, c, w)).sum()
                })?;
                ("nn-bumps", s)
            }
        };
        nonnegative.push((format!("{name}-{i:03}"), signal));
    }
    Ok(Corpus { general, nonnegative })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteMeta {
    pub seed: u64,
    pub version: String,
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub failed: usize,
    pub min_margin_by_family: BTreeMap<String, f64>,
}

/// Report of a suite run; `checks` is sorted by check id, then parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub meta: SuiteMeta,
    pub checks: Vec<CheckResult>,
    pub summary: SuiteSummary,
}

#[derive(Serialize)]
struct ReportBody<'a> {
    checks: &'a [CheckResult],
    summary: &'a SuiteSummary,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Checks and summary without the run metadata; identical for identical
    /// configurations.
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&ReportBody { checks: &self.checks, summary: &self.summary })
            .expect("report serializes")
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn coherence(id: &str, weighted: &CheckResult, plain: &CheckResult, rhs_scale: f64) -> CheckResult {
    let diff = (weighted.lhs - plain.lhs).abs().max((weighted.rhs / rhs_scale - plain.rhs).abs());
    CheckResult::new(format!("coherence.{id}"), diff, COHERENCE_TOL, 0.0, weighted.params.clone())
}

struct SuiteContext {
    family: IntervalFamily,
    spec: WindowSpec<f64>,
    orders: Vec<FractionalOrder<f64>>,
    weights: Vec<(WeightChoice, TemperedWeight<f64>)>,
    phi: TestFunction<f64>,
    scales: Vec<f64>,
}

fn general_checks(ctx: &SuiteContext, name: &str, f: &SampledSignal<f64>, freqs: &[f64]) -> Result<Vec<CheckResult>> {
    let base = Baseline::new(f, &ctx.family)?;
    let weighted_bmo: Vec<f64> =
        ctx.weights.iter().map(|(_, w)| bmo_kappa_norm(f, w, &ctx.family)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for order in &ctx.orders {
        for &xi in freqs {
            let product = product_bmo(f, order, xi, &ctx.family, &base)?;
            let row = frst_tau_row(f, order, &ctx.spec, xi)?;
            let transform = frst_bmo(&row, order, &ctx.spec, xi, &ctx.family, &base)?;
            for ((choice, w), &bmo_w) in ctx.weights.iter().zip(&weighted_bmo) {
                let wp = product_bmo_weighted(f, order, xi, w, &ctx.family, bmo_w, base.m)?;
                let wt = frst_bmo_weighted(&row, order, &ctx.spec, xi, w, &ctx.family, bmo_w, base.m)?;
                if choice.is_constant() {
                    let bound = moment_bound_closed(&ctx.spec, order, xi, w.c(), w.n())?;
                    out.push(coherence("product_bmo_weighted", &wp, &product, 1.0));
                    out.push(coherence("frst_bmo_weighted", &wt, &transform, bound));
                }
                out.push(wp);
                out.push(wt);
            }
            out.push(product);
            out.push(transform);
        }
    }
    for c in &mut out {
        c.params.signal = Some(name.to_string());
    }
    Ok(out)
}

fn nonnegative_checks(
    ctx: &SuiteContext,
    name: &str,
    f: &SampledSignal<f64>,
    freqs: &[f64],
) -> Result<Vec<CheckResult>> {
    require_nonnegative(f, &ctx.phi)?;
    let hardy_f = hardy_norm(f, &ctx.phi, &ctx.scales)?;
    let weighted: Vec<f64> = ctx
        .weights
        .iter()
        .map(|(_, w)| hardy_kappa_norm(f, &ctx.phi, &ctx.scales, w))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for order in &ctx.orders {
        for &xi in freqs {
            let row = frst_tau_row(f, order, &ctx.spec, xi)?;
            let plain = frst_hardy(&row, order, &ctx.spec, xi, &ctx.phi, &ctx.scales, hardy_f)?;
            for ((choice, w), &hw) in ctx.weights.iter().zip(&weighted) {
                let res = frst_hardy_weighted(&row, order, &ctx.spec, xi, &ctx.phi, &ctx.scales, w, hw)?;
                if choice.is_constant() {
                    let bound = moment_bound_closed(&ctx.spec, order, xi, w.c(), w.n())?;
                    out.push(coherence("frst_hardy_weighted", &res, &plain, bound));
                }
                out.push(res);
            }
            out.push(plain);
        }
    }
    for c in &mut out {
        c.params.signal = Some(name.to_string());
    }
    Ok(out)
}

fn moment_checks(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x6d6f_6d65_6e74);
    (0..config.moment_draws)
        .map(|_| {
            let spec = WindowSpec::new(rng.gen_range(0.2..3.0), rng.gen_range(0.1..2.0))?;
            let order = random_generic_order(&mut rng)?;
            let xi = rng.gen_range(0.2..4.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            check_window_moment(&spec, &order, xi, rng.gen_range(0.05..3.0), rng.gen_range(0.1..6.0))
        })
        .collect()
}

fn random_generic_order(rng: &mut ChaCha8Rng) -> Result<FractionalOrder<f64>> {
    loop {
        let a: f64 = rng.gen_range(0.05..3.95);
        if (a - 2.0).abs() > 0.05 {
            return classify_order(a);
        }
    }
}

fn invariant(id: &str, err: f64, tol: f64, params: CheckParams) -> CheckResult {
    CheckResult::new(format!("invariant.{id}"), err, tol, 0.0, params)
}

fn max_rel_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let peak = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    if peak > 0.0 {
        diff / peak
    } else {
        diff
    }
}

fn rel_l2_err(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn smooth_test_signal(rng: &mut ChaCha8Rng, grid: UniformGrid<f64>) -> Result<SampledSignal<f64>> {
    let width = rng.gen_range(0.5..1.2);
    let rate = rng.gen_range(-0.5..0.5);
    let center = rng.gen_range(-1.0..1.0);
    SampledSignal::from_fn(grid, |t| {
        Complex::from_polar(gaussian(t, center, width), std::f64::consts::PI * rate * t * t)
    })
}

/// Oracle equivalences, round trips, marginal identity, window areas and
/// weight certificates.
fn invariant_checks(config: &SuiteConfig, ctx: &SuiteContext) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x696e_7661_7269);
    let mut out = Vec::new();
    let coarse = UniformGrid::new(-8.0, 1.0 / 16.0, 256)?;
    let fine = UniformGrid::new(-8.0, 1.0 / 64.0, 1024)?;
    let xi_coarse = UniformGrid::centered(128, 1.0 / 16.0)?;
    let xi_fine = UniformGrid::centered(1024, 1.0 / 64.0)?;
    let round_trip_spec = WindowSpec::new(0.5, 0.25)?;

    for trial in 0..config.invariant_trials {
        let order = &ctx.orders[trial % ctx.orders.len()];
        let params = CheckParams { a: Some(order.a()), signal: Some(format!("trial-{trial:03}")), ..Default::default() };

        let tones = random_tones(&mut rng, 6, 2.0);
        let f = SampledSignal::from_fn(coarse, |t| tone_sum(&tones, t) * gaussian(t, 0.0, 2.0))?;
        let direct = frft_direct(&f, order, &xi_coarse)?;
        let fast = frft_fast(&f, order, &xi_coarse)?;
        out.push(invariant("frft_oracle", max_rel_err(fast.values(), direct.values()), 1e-6, params.clone()));

        let smooth = smooth_test_signal(&mut rng, fine)?;
        let back = ifrft(&frft_fast(&smooth, order, &xi_fine)?, order, &fine)?;
        out.push(invariant("frft_round_trip", rel_l2_err(back.values(), smooth.values()), 5e-3, params.clone()));

        let tf = frst_forward(&smooth, order, &round_trip_spec, &fine, &xi_fine, TransformMode::Fast)?;
        let back = frst_inverse(&tf, order, &fine)?;
        out.push(invariant(
            "frst_round_trip",
            rel_l2_err(back.values(), smooth.values()),
            5e-3,
            with_window(params.clone(), &round_trip_spec),
        ));

        let xi_rows = UniformGrid::new(1.0, 0.125, 41)?;
        let tf = frst_forward(&smooth, order, &ctx.spec, &fine, &xi_rows, TransformMode::Fast)?;
        let marginal = frst_marginal(&tf)?;
        let reference = frft_direct(&smooth, order, &xi_rows)?;
        let err = marginal.values().iter().zip(reference.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        out.push(invariant("marginal", err, 1e-3, with_window(params.clone(), &ctx.spec)));

        let xi_s = UniformGrid::new(0.25, 0.25, 16)?;
        let direct = s_transform_direct(&f, ctx.spec.k(), &coarse, &xi_s)?;
        let spectral = s_transform_spectral(&f, ctx.spec.k(), &xi_s)?;
        let mut sp = params.clone();
        sp.a = Some(1.0);
        sp.k = Some(ctx.spec.k());
        out.push(invariant("s_transform_dual", max_rel_err(spectral.values(), direct.values()), 1e-6, sp));

        let xi_f = UniformGrid::centered(16, 0.25)?;
        let direct = frst_forward(&f, order, &ctx.spec, &coarse, &xi_f, TransformMode::Direct)?;
        let fast = frst_forward(&f, order, &ctx.spec, &coarse, &xi_f, TransformMode::Fast)?;
        out.push(invariant(
            "frst_dual",
            max_rel_err(fast.values(), direct.values()),
            1e-6,
            with_window(params.clone(), &ctx.spec),
        ));

        let spec = WindowSpec::new(rng.gen_range(0.2..3.0), rng.gen_range(0.1..2.0))?;
        let draw = random_generic_order(&mut rng)?;
        let xi = rng.gen_range(0.2..4.0);
        let sigma = window_sigma(&spec, &draw, xi)?;
        let area = window_area(&spec, &draw, xi, 10.0 * sigma, sigma / DEFAULT_CELLS_PER_SIGMA)?;
        let mut ap = with_window(order_params(&draw, xi), &spec);
        ap.signal = params.signal.clone();
        out.push(invariant("window_area", (area - 1.0).abs(), 1e-6, ap));
    }

    if config.invariant_trials > 0 {
        let grid = config.grid()?;
        let samples = certificate_samples(&grid);
        for (_, w) in &ctx.weights {
            let report = tempered_check(w, &samples, &samples)?;
            let params = with_weight(CheckParams::default(), w);
            out.push(CheckResult::new("invariant.tempered_weight", report.worst_ratio, 1.0, 1e-12, params));
        }
    }
    Ok(out)
}

fn params_key(c: &CheckResult) -> String {
    serde_json::to_string(&c.params).expect("params serialize")
}

/// Runs every check of the configuration. Work is spread over the rayon
/// pool; the report is the same for any thread count.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let grid = config.grid()?;
    let weights = config.weights.iter().map(|w| Ok((*w, w.build()?))).collect::<Result<Vec<_>>>()?;
    for (_, w) in &weights {
        certify(w, &grid)?;
    }
    let ctx = SuiteContext {
        family: all_intervals(config.samples, config.interval_cap),
        spec: WindowSpec::new(config.k, config.p)?,
        orders: config.orders.iter().map(|&a| classify_order(a)).collect::<Result<_>>()?,
        weights,
        phi: TestFunction::gaussian(),
        scales: default_scales(&grid),
    };
    let corpus = build_corpus(config)?;

    let general: Vec<Vec<CheckResult>> = corpus
        .general
        .par_iter()
        .map(|(name, f)| general_checks(&ctx, name, f, &config.frequencies))
        .collect::<Result<_>>()?;
    let nonnegative: Vec<Vec<CheckResult>> = corpus
        .nonnegative
        .par_iter()
        .map(|(name, f)| nonnegative_checks(&ctx, name, f, &config.frequencies))
        .collect::<Result<_>>()?;

    let mut checks: Vec<CheckResult> = general.into_iter().chain(nonnegative).flatten().collect();
    checks.extend(moment_checks(config)?);
    if !ctx.orders.is_empty() {
        checks.extend(invariant_checks(config, &ctx)?);
    }
    let checks: Vec<CheckResult> = checks
        .into_iter()
        .map(|c| if c.check_id.contains('.') || c.check_id == "window_moment" { c } else { c.with_slack(config.slack) })
        .collect();
    Ok(assemble_report(config.seed, checks))
}

fn assemble_report(seed: u64, mut checks: Vec<CheckResult>) -> SuiteReport {
    let mut keyed: Vec<(String, String, CheckResult)> =
        checks.drain(..).map(|c| (c.check_id.clone(), params_key(&c), c)).collect();
    keyed.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let checks: Vec<CheckResult> = keyed.into_iter().map(|(_, _, c)| c).collect();

    let mut min_margin_by_family = BTreeMap::new();
    for c in &checks {
        let entry = min_margin_by_family.entry(c.check_id.clone()).or_insert(f64::INFINITY);
        *entry = f64::min(*entry, c.margin);
    }
    let summary = SuiteSummary {
        total: checks.len(),
        failed: checks.iter().filter(|c| !c.pass).count(),
        min_margin_by_family,
    };
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    SuiteReport {
        meta: SuiteMeta { seed, version: env!("CARGO_PKG_VERSION").to_string(), timestamp },
        checks,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> UniformGrid<f64> {
        UniformGrid::new(-8.0, 1.0 / 16.0, 256).unwrap()
    }

    fn family() -> IntervalFamily {
        all_intervals(256, 100_000)
    }

    #[test]
    fn zero_signal_passes_everything() {
        let f = SampledSignal::zeros(grid());
        let order = classify_order(0.8).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let fam = family();
        let w = TemperedWeight::polynomial(1.0).unwrap();
        let phi = TestFunction::gaussian();
        let scales = default_scales(&grid());
        let results = [
            check_product_bmo(&f, &order, 1.0, &fam).unwrap(),
            check_frst_bmo(&f, &order, &spec, 1.0, &fam).unwrap(),
            check_frst_hardy(&f, &order, &spec, 1.0, &phi, &scales).unwrap(),
            check_product_bmo_weighted(&f, &order, 1.0, &w, &fam).unwrap(),
            check_frst_bmo_weighted(&f, &order, &spec, 1.0, &w, &fam).unwrap(),
            check_frst_hardy_weighted(&f, &order, &spec, 1.0, &phi, &scales, &w).unwrap(),
        ];
        for r in results {
            assert!(r.pass && r.lhs == 0.0 && r.rhs == 0.0, "{r:?}");
        }
    }

    #[test]
    fn constant_and_step_signals() {
        let order = classify_order(0.8).unwrap();
        let fam = family();
        let c = SampledSignal::from_fn(grid(), |_| Complex::new(0.6, -0.8)).unwrap();
        let r = check_product_bmo(&c, &order, 2.0, &fam).unwrap();
        assert!(r.pass);
        // rhs = |A_theta| * 2 |c| with |c| = 1
        assert!((r.rhs - 2.0 * order.amplitude_modulus().unwrap()).abs() < 1e-12);
        let step = SampledSignal::from_real_fn(grid(), |t| if t >= 0.0 { 1.0 } else { 0.0 }).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let r = check_frst_bmo(&step, &order, &spec, 1.0, &fam).unwrap();
        assert!(r.pass && r.margin > 0.0, "{r:?}");
    }

    #[test]
    fn gaussian_bump_hardy_at_quarter_turn() {
        let f = SampledSignal::from_real_fn(grid(), |t| (-t * t).exp()).unwrap();
        let order = classify_order(1.0).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let phi = TestFunction::gaussian();
        let r = check_frst_hardy(&f, &order, &spec, 1.0, &phi, &default_scales(&grid())).unwrap();
        assert!(r.pass, "{r:?}");
        let neg = SampledSignal::from_real_fn(grid(), |t| t).unwrap();
        assert!(matches!(
            check_frst_hardy(&neg, &order, &spec, 1.0, &phi, &default_scales(&grid())),
            Err(Error::NegativeInput(_))
        ));
    }

    #[test]
    fn window_moment_reference_point() {
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let order = classify_order(1.0).unwrap();
        let r = check_window_moment(&spec, &order, 1.0, 1.0, 1.0).unwrap();
        assert!(r.pass && (r.rhs - 4.0).abs() < 1e-12);
        let r = check_window_moment(&spec, &order, 1.0, 1e-9, 0.5).unwrap();
        assert!(r.pass && (r.lhs - 1.0).abs() < 1e-6 && r.rhs >= 1.0);
    }

    #[test]
    fn weight_certificate_is_enforced() {
        let f = SampledSignal::from_real_fn(grid(), |t| (-t * t).exp()).unwrap();
        let order = classify_order(0.8).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let bad = TemperedWeight::new("exp(|x|)", 1.0, 0.5, |x: f64| x.abs().exp()).unwrap();
        assert!(matches!(
            check_frst_bmo_weighted(&f, &order, &spec, 1.0, &bad, &family()),
            Err(Error::WeightCertificateFailed { .. })
        ));
    }

    #[test]
    fn slack_is_monotone() {
        let r = CheckResult::new("x", 1.02, 1.0, 0.0, CheckParams::default());
        assert!(!r.pass);
        let r = r.with_slack(0.05);
        assert!(r.pass && r.clone().with_slack(0.5).pass);
    }

    #[test]
    fn empty_config_runs_nothing() {
        let report = run_suite(&SuiteConfig::empty()).unwrap();
        assert_eq!(report.summary.total, 0);
        assert!(report.passed());
    }

    #[test]
    fn config_settings() {
        let mut c = SuiteConfig::default();
        c.set("orders", "0.5,1.3").unwrap();
        c.set("weights", "const:1:0.000001,poly:2").unwrap();
        c.set("seed", "11").unwrap();
        assert_eq!(c.orders, vec![0.5, 1.3]);
        assert_eq!(c.weights[1], WeightChoice::Polynomial { s: 2.0 });
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("weights", "cubic").is_err());
        c.set("orders", "2.0").unwrap();
        assert!(matches!(run_suite(&c), Err(Error::Config(_))));
        let mut c = SuiteConfig::default();
        c.set("frequencies", "0").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_suite_is_deterministic_and_passes() {
        let mut c = SuiteConfig::default();
        c.samples = 64;
        c.general_signals = 4;
        c.nonnegative_signals = 4;
        c.moment_draws = 5;
        c.invariant_trials = 1;
        let a = run_suite(&c).unwrap();
        let b = run_suite(&c).unwrap();
        assert_eq!(a.body_json(), b.body_json());
        let failed: Vec<_> = a.failures().collect();
        assert!(failed.is_empty(), "{failed:#?}");
        let ids: std::collections::BTreeSet<_> = a.checks.iter().map(|c| c.check_id.as_str()).collect();
        for id in [
            "product_bmo",
            "frst_bmo",
            "frst_hardy",
            "window_moment",
            "product_bmo_weighted",
            "frst_bmo_weighted",
            "frst_hardy_weighted",
            "coherence.frst_bmo_weighted",
            "invariant.frst_round_trip",
        ] {
            assert!(ids.contains(id), "missing {id}");
        }
        let sorted = a.checks.windows(2).all(|w| (&w[0].check_id, params_key(&w[0])) <= (&w[1].check_id, params_key(&w[1])));
        assert!(sorted);
    }
}
