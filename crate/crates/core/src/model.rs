//! Shared domain types: grids, sampled signals, fractional orders, window
//! parameters, time-frequency matrices, tempered weights, test functions and
//! interval families. Everything here is immutable after construction.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Angular tolerance (radians) for classifying an order as a delta branch.
pub const TOL_THETA: f64 = 1e-9;
/// Frequencies with `|xi|` at or below this are treated as zero.
pub const TOL_XI: f64 = 1e-12;
/// Relative tolerance used when matching grid points or grid steps.
pub const GRID_MATCH_RTOL: f64 = 1e-9;

/// Uniform sample grid `start + i * step` for `i in 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid<T> {
    start: T,
    step: T,
    count: usize,
}

impl<T: Scalar> UniformGrid<T> {
    pub fn new(start: T, step: T, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::InvalidGrid(format!("start {start} is not finite")));
        }
        if !(step.is_finite() && step > T::zero()) {
            return Err(Error::InvalidGrid(format!("step {step} must be finite and > 0")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("count {count} must be >= 2")));
        }
        Ok(Self { start, step, count })
    }

    /// Grid of `count` points spaced by `step`, symmetric about zero. An even
    /// `count` places the points at odd multiples of `step / 2`, so zero is
    /// excluded; this is the layout used for frequency grids that feed an
    /// inversion.
    pub fn centered(count: usize, step: T) -> Result<Self> {
        let half = T::from_usize_lossy(count.saturating_sub(1)) / T::lit(2.0);
        Self::new(-half * step, step, count)
    }

    /// Grid covering `[from, to]` with `count` points (both ends included).
    pub fn linspace(from: T, to: T, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(format!("count {count} must be >= 2")));
        }
        Self::new(from, (to - from) / T::from_usize_lossy(count - 1), count)
    }

    /// Positive FFT bin frequencies `j / (N * step)` for `j = 1..=N/2` of a
    /// time grid with `N` points.
    pub fn positive_bins(time: &UniformGrid<T>) -> Result<Self> {
        let df = time.bin_spacing();
        Self::new(df, df, (time.count / 2).max(2))
    }

    pub fn start(&self) -> T {
        self.start
    }

    pub fn step(&self) -> T {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, i: usize) -> T {
        self.start + T::from_usize_lossy(i) * self.step
    }

    pub fn last(&self) -> T {
        self.point(self.count - 1)
    }

    /// Distance between the first and last points.
    pub fn span(&self) -> T {
        self.last() - self.start
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    /// Spacing of DFT bins for a transform over this grid: `1 / (count * step)`.
    pub fn bin_spacing(&self) -> T {
        T::one() / (T::from_usize_lossy(self.count) * self.step)
    }

    /// Index of the grid point equal to `x` (relative tolerance on the step),
    /// or `None` if `x` falls between points or outside the grid.
    pub fn index_of(&self, x: T) -> Option<usize> {
        let pos = (x - self.start) / self.step;
        let nearest = pos.round();
        if (pos - nearest).abs() > T::lit(GRID_MATCH_RTOL) * T::lit(1e3).max(pos.abs()) {
            return None;
        }
        let idx = nearest.to_isize()?;
        (0..self.count as isize).contains(&idx).then_some(idx as usize)
    }

    /// True when both grids share the same step (relative tolerance).
    pub fn same_step(&self, other: &UniformGrid<T>) -> bool {
        (self.step - other.step).abs() <= T::lit(GRID_MATCH_RTOL) * self.step
    }

    pub fn contains(&self, x: T) -> bool {
        let slack = self.step * T::lit(GRID_MATCH_RTOL);
        x >= self.start - slack && x <= self.last() + slack
    }
}

fn check_values<T: Scalar>(grid: &UniformGrid<T>, values: &[Complex<T>]) -> Result<()> {
    if values.len() != grid.count() {
        return Err(Error::InvalidSignal(format!(
            "{} values for a grid of {} points",
            values.len(),
            grid.count()
        )));
    }
    if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::InvalidSignal(format!("non-finite value at index {i}")));
    }
    Ok(())
}

/// Complex samples of a function on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal<T> {
    grid: UniformGrid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> SampledSignal<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: UniformGrid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: UniformGrid<T>, f: impl Fn(T) -> T) -> Result<Self> {
        Self::from_fn(grid, |t| Complex::new(f(t), T::zero()))
    }

    pub fn from_real(grid: UniformGrid<T>, values: &[T]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    pub fn zeros(grid: UniformGrid<T>) -> Self {
        Self {
            values: vec![Complex::new(T::zero(), T::zero()); grid.count()],
            grid,
        }
    }

    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map over `(t, value)` producing a signal on the same grid.
    pub fn map(&self, f: impl Fn(T, Complex<T>) -> Complex<T>) -> Result<Self> {
        let values = self.grid.points().zip(&self.values).map(|(t, &v)| f(t, v)).collect();
        Self::new(self.grid, values)
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// Sample-wise sum; both signals must share the grid.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("signals live on different grids".into()));
        }
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// True when every sample is real (zero imaginary part) and `>= 0`.
    pub fn is_nonnegative_real(&self) -> bool {
        self.values.iter().all(|v| v.im == T::zero() && v.re >= T::zero())
    }

    /// Largest sample modulus.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// Rectangle-rule L2 norm.
    pub fn l2_norm(&self) -> T {
        (self.values.iter().fold(T::zero(), |s, v| s + v.norm_sqr()) * self.grid.step()).sqrt()
    }
}

/// Complex samples of a transform on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    grid: UniformGrid<T>,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn new(grid: UniformGrid<T>, values: Vec<Complex<T>>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: UniformGrid<T>, f: impl Fn(T) -> Complex<T>) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &UniformGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Kernel case selected by the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Branch {
    /// Chirp kernel with finite amplitude.
    Generic,
    /// `theta = 0 (mod 2 pi)`: kernel is `delta(t - xi)`.
    Identity,
    /// `theta = pi (mod 2 pi)`: kernel is `delta(t + xi)`.
    Reflection,
}

/// Fractional order `a` in `[0, 4)` with its rotation angle `theta = a pi / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalOrder<T> {
    a: T,
    theta: T,
    sin: T,
    cos: T,
    branch: Branch,
    amplitude: Option<Complex<T>>,
}

/// Classifies an order into its kernel branch and, for the generic branch,
/// computes `A_theta = sqrt(1 - i cot theta)` on the principal branch.
pub fn classify_order<T: Scalar>(a: T) -> Result<FractionalOrder<T>> {
    if !(a.is_finite() && a >= T::zero() && a < T::lit(4.0)) {
        return Err(Error::OrderOutOfRange(a.to_f64_lossy()));
    }
    let theta = a * T::FRAC_PI_2();
    let tol = T::lit(TOL_THETA);
    let two_pi = T::PI() + T::PI();
    let branch = if theta.abs() < tol || (theta - two_pi).abs() < tol {
        Branch::Identity
    } else if (theta - T::PI()).abs() < tol {
        Branch::Reflection
    } else {
        Branch::Generic
    };
    let (sin, cos) = theta.sin_cos();
    let amplitude = (branch == Branch::Generic)
        .then(|| Complex::new(T::one(), -(cos / sin)).sqrt());
    Ok(FractionalOrder { a, theta, sin, cos, branch, amplitude })
}

impl<T: Scalar> FractionalOrder<T> {
    pub fn a(&self) -> T {
        self.a
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn is_generic(&self) -> bool {
        self.branch == Branch::Generic
    }

    pub fn sin(&self) -> T {
        self.sin
    }

    /// `A_theta`; fails for the delta branches.
    pub fn amplitude(&self) -> Result<Complex<T>> {
        self.amplitude.ok_or(Error::DegenerateOrder(self.a.to_f64_lossy()))
    }

    /// `|A_theta| = |csc theta|^(1/2)`.
    pub fn amplitude_modulus(&self) -> Result<T> {
        self.amplitude().map(|amp| amp.norm())
    }

    pub fn cot(&self) -> Result<T> {
        self.require_generic().map(|_| self.cos / self.sin)
    }

    pub fn csc(&self) -> Result<T> {
        self.require_generic().map(|_| self.sin.recip())
    }

    pub(crate) fn require_generic(&self) -> Result<()> {
        if self.is_generic() {
            Ok(())
        } else {
            Err(Error::DegenerateOrder(self.a.to_f64_lossy()))
        }
    }
}

/// Parameters `(k, p)` of the Gaussian window; both strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WindowSpec<T> {
    k: T,
    p: T,
}

impl<T: Scalar> WindowSpec<T> {
    pub fn new(k: T, p: T) -> Result<Self> {
        if !(k.is_finite() && k > T::zero()) {
            return Err(Error::InvalidWindow(format!("k = {k} must be > 0")));
        }
        if !(p.is_finite() && p > T::zero()) {
            return Err(Error::InvalidWindow(format!("p = {p} must be > 0")));
        }
        Ok(Self { k, p })
    }

    pub fn k(&self) -> T {
        self.k
    }

    pub fn p(&self) -> T {
        self.p
    }
}

/// Per-row bookkeeping for a time-frequency matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMeta<T> {
    /// Standard deviation (time units) of the row's window.
    pub sigma: T,
    /// Number of tau columns whose truncated window support leaves the
    /// signal's grid (computed with implicit zero extension).
    pub edge_columns: usize,
}

/// Transform values on a `xi x tau` grid, stored row-major with one row per
/// frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFreqMatrix<T> {
    tau_grid: UniformGrid<T>,
    xi_grid: UniformGrid<T>,
    values: Vec<Complex<T>>,
    order: FractionalOrder<T>,
    window: WindowSpec<T>,
    rows: Vec<RowMeta<T>>,
}

/// Rejects frequency grids touching zero.
pub fn check_nonzero_frequencies<T: Scalar>(xi_grid: &UniformGrid<T>) -> Result<()> {
    match xi_grid.points().find(|xi| xi.abs() <= T::lit(TOL_XI)) {
        Some(xi) => Err(Error::ZeroFrequency(xi.to_f64_lossy())),
        None => Ok(()),
    }
}

impl<T: Scalar> TimeFreqMatrix<T> {
    pub fn new(
        tau_grid: UniformGrid<T>,
        xi_grid: UniformGrid<T>,
        values: Vec<Complex<T>>,
        order: FractionalOrder<T>,
        window: WindowSpec<T>,
        rows: Vec<RowMeta<T>>,
    ) -> Result<Self> {
        check_nonzero_frequencies(&xi_grid)?;
        let expected = xi_grid.count() * tau_grid.count();
        if values.len() != expected {
            return Err(Error::GridMismatch(format!(
                "matrix has {} cells, grids require {expected}",
                values.len()
            )));
        }
        if rows.len() != xi_grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} row records for {} rows",
                rows.len(),
                xi_grid.count()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidSignal("non-finite matrix entry".into()));
        }
        Ok(Self { tau_grid, xi_grid, values, order, window, rows })
    }

    pub fn tau_grid(&self) -> &UniformGrid<T> {
        &self.tau_grid
    }

    pub fn xi_grid(&self) -> &UniformGrid<T> {
        &self.xi_grid
    }

    pub fn order(&self) -> &FractionalOrder<T> {
        &self.order
    }

    pub fn window(&self) -> &WindowSpec<T> {
        &self.window
    }

    pub fn row_meta(&self) -> &[RowMeta<T>] {
        &self.rows
    }

    pub fn rows(&self) -> usize {
        self.xi_grid.count()
    }

    pub fn cols(&self) -> usize {
        self.tau_grid.count()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        let c = self.cols();
        &self.values[r * c..(r + 1) * c]
    }

    pub fn get(&self, r: usize, c: usize) -> Complex<T> {
        self.values[r * self.cols() + c]
    }

    /// Row `r` as a signal on the tau grid.
    pub fn row_signal(&self, r: usize) -> SampledSignal<T> {
        SampledSignal { grid: self.tau_grid, values: self.row(r).to_vec() }
    }
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Positive weight `kappa` together with constants `(C, N)` certifying
/// `kappa(xi + eta) <= (1 + C|xi|)^N kappa(eta)`.
#[derive(Clone)]
pub struct TemperedWeight<T> {
    eval: RealFn<T>,
    c: T,
    n: T,
    name: String,
}

impl<T: Scalar> TemperedWeight<T> {
    pub fn new(
        name: impl Into<String>,
        c: T,
        n: T,
        eval: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(c > T::zero() && n > T::zero()) {
            return Err(Error::Config(format!("weight constants C = {c}, N = {n} must be > 0")));
        }
        Ok(Self { eval: Arc::new(eval), c, n, name: name.into() })
    }

    /// `kappa = 1`, certified by any `(C, N)`.
    pub fn constant(c: T, n: T) -> Result<Self> {
        Self::new("const", c, n, |_| T::one())
    }

    /// `kappa(x) = (1 + |x|)^s` with certificate `(C, N) = (1, s)`.
    pub fn polynomial(s: T) -> Result<Self> {
        if !(s > T::zero()) {
            return Err(Error::Config(format!("polynomial weight exponent {s} must be > 0")));
        }
        Self::new(format!("poly(s={s})"), T::one(), s, move |x| (T::one() + x.abs()).powf(s))
    }

    pub fn eval(&self, x: T) -> T {
        (self.eval)(x)
    }

    pub fn c(&self) -> T {
        self.c
    }

    pub fn n(&self) -> T {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Weight samples on a grid; fails if any sample is not strictly positive.
    pub fn sample(&self, grid: &UniformGrid<T>) -> Result<Vec<T>> {
        grid.points()
            .map(|x| {
                let w = self.eval(x);
                if w > T::zero() && w.is_finite() {
                    Ok(w)
                } else {
                    Err(Error::NonpositiveWeight { name: self.name.clone(), x: x.to_f64_lossy() })
                }
            })
            .collect()
    }
}

impl<T: Scalar> fmt::Debug for TemperedWeight<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TemperedWeight")
            .field("name", &self.name)
            .field("c", &self.c)
            .field("n", &self.n)
            .finish()
    }
}

/// Test function `phi` used by the maximal function, with its total
/// integral and an effective truncation radius.
#[derive(Clone)]
pub struct TestFunction<T> {
    eval: RealFn<T>,
    total_integral: T,
    support_radius: T,
}

impl<T: Scalar> TestFunction<T> {
    /// Validates that the integral over `[-support_radius, support_radius]`
    /// matches `total_integral` to 1e-8 relative.
    pub fn new(
        total_integral: T,
        support_radius: T,
        eval: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if total_integral == T::zero() || !total_integral.is_finite() {
            return Err(Error::InvalidTestFunction("total integral must be finite and nonzero".into()));
        }
        if !(support_radius > T::zero() && support_radius.is_finite()) {
            return Err(Error::InvalidTestFunction("support radius must be > 0".into()));
        }
        let phi = Self { eval: Arc::new(eval), total_integral, support_radius };
        let cells = 40_000usize;
        let h = (support_radius + support_radius) / T::from_usize_lossy(cells);
        let integral = (0..cells).fold(T::zero(), |s, j| {
            let x = -support_radius + (T::from_usize_lossy(j) + T::lit(0.5)) * h;
            s + phi.eval(x)
        }) * h;
        let rel = ((integral - total_integral) / total_integral).abs();
        if !(rel < T::lit(1e-8)) {
            return Err(Error::InvalidTestFunction(format!(
                "integral over support is {integral}, declared {total_integral}"
            )));
        }
        Ok(phi)
    }

    /// Standard normal density, radius 10.
    pub fn gaussian() -> Self {
        let norm = (T::PI() + T::PI()).sqrt().recip();
        Self::new(T::one(), T::lit(10.0), move |x| norm * (-(x * x) / T::lit(2.0)).exp())
            .expect("standard normal is a valid test function")
    }

    pub fn eval(&self, x: T) -> T {
        (self.eval)(x)
    }

    /// `phi_t(x) = phi(x / t) / t`, zero outside the dilated support.
    pub fn dilated(&self, t: T, x: T) -> T {
        let y = x / t;
        if y.abs() > self.support_radius {
            T::zero()
        } else {
            self.eval(y) / t
        }
    }

    pub fn total_integral(&self) -> T {
        self.total_integral
    }

    pub fn support_radius(&self) -> T {
        self.support_radius
    }

    /// Samples `phi` densely over its support and reports whether all
    /// samples are `>= 0`.
    pub fn is_nonnegative(&self) -> bool {
        let n = 4001usize;
        let r = self.support_radius;
        (0..n).all(|j| {
            let x = -r + (r + r) * T::from_usize_lossy(j) / T::from_usize_lossy(n - 1);
            self.eval(x) >= T::zero()
        })
    }
}

impl<T: Scalar> fmt::Debug for TestFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("total_integral", &self.total_integral)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

/// Closed index range `[first, last]` with at least two samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub first: usize,
    pub last: usize,
}

impl Interval {
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self, host_count: usize) -> Result<()> {
        if self.first < self.last && self.last < host_count {
            Ok(())
        } else {
            Err(Error::BadInterval { first: self.first, last: self.last, count: host_count })
        }
    }
}

/// Finite family of intervals over a host grid, standing in for the
/// supremum over all intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalFamily {
    intervals: Vec<Interval>,
    host_count: usize,
}

impl IntervalFamily {
    pub fn new(intervals: Vec<Interval>, host_count: usize) -> Result<Self> {
        for iv in &intervals {
            iv.validate(host_count)?;
        }
        Ok(Self { intervals, host_count })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn host_count(&self) -> usize {
        self.host_count
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Every contiguous interval of at least two samples when there are at most
/// `max_count` of them; otherwise the dyadic family (length `2^j`, start a
/// multiple of `2^j`, `j >= 1`).
pub fn all_intervals(host_count: usize, max_count: usize) -> IntervalFamily {
    let full = host_count * host_count.saturating_sub(1) / 2;
    let mut intervals = Vec::new();
    if full <= max_count {
        intervals.reserve(full);
        for len in 2..=host_count {
            for first in 0..=host_count - len {
                intervals.push(Interval { first, last: first + len - 1 });
            }
        }
    } else {
        let mut len = 2;
        while len <= host_count {
            for first in (0..=host_count - len).step_by(len) {
                intervals.push(Interval { first, last: first + len - 1 });
            }
            len *= 2;
        }
    }
    IntervalFamily { intervals, host_count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn classify_branch_examples() {
        assert_eq!(classify_order(0.0).unwrap().branch(), Branch::Identity);
        assert_eq!(classify_order(2.0).unwrap().branch(), Branch::Reflection);
        let one = classify_order(1.0).unwrap();
        assert_eq!(one.branch(), Branch::Generic);
        assert!((one.theta() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let amp = one.amplitude().unwrap();
        assert!((amp - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let half = classify_order(0.5).unwrap();
        assert!((half.amplitude_modulus().unwrap() - 2f64.powf(0.25)).abs() < 1e-12);
        assert!((half.amplitude_modulus().unwrap() - 1.189207).abs() < 1e-6);
    }

    #[test]
    fn classify_rejects_out_of_range() {
        for a in [-0.1, 4.0, 5.0, f64::NAN] {
            assert!(matches!(classify_order(a), Err(Error::OrderOutOfRange(_))));
        }
        assert!(classify_order(3.999).is_ok());
    }

    #[test]
    fn degenerate_orders_have_no_amplitude() {
        let id = classify_order(0.0).unwrap();
        assert!(matches!(id.amplitude(), Err(Error::DegenerateOrder(_))));
        assert!(id.cot().is_err());
        let near_four = classify_order(4.0 - 1e-12).unwrap();
        assert_eq!(near_four.branch(), Branch::Identity);
        let near_two = classify_order(2.0 + 1e-11).unwrap();
        assert_eq!(near_two.branch(), Branch::Reflection);
        assert_eq!(classify_order(3.0).unwrap().branch(), Branch::Generic);
    }

    proptest! {
        #[test]
        fn amplitude_modulus_matches_csc(a in 0.0f64..4.0) {
            let order = classify_order(a).unwrap();
            if order.is_generic() {
                let expected = order.csc().unwrap().abs().sqrt();
                prop_assert!((order.amplitude_modulus().unwrap() - expected).abs() < 1e-12 * expected.max(1.0));
                // principal branch: positive real part
                prop_assert!(order.amplitude().unwrap().re > 0.0);
            }
        }

        #[test]
        fn branches_only_at_multiples_of_pi(a in 0.0f64..4.0) {
            let order = classify_order(a).unwrap();
            let theta = order.theta();
            let d0 = theta.min(2.0 * std::f64::consts::PI - theta);
            let d1 = (theta - std::f64::consts::PI).abs();
            match order.branch() {
                Branch::Identity => prop_assert!(d0 < TOL_THETA),
                Branch::Reflection => prop_assert!(d1 < TOL_THETA),
                Branch::Generic => prop_assert!(d0 >= TOL_THETA && d1 >= TOL_THETA),
            }
        }
    }

    #[test]
    fn grid_validation() {
        assert!(UniformGrid::new(0.0, 0.0, 4).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
        let g = UniformGrid::new(-1.0, 0.5, 5).unwrap();
        assert_eq!(g.last(), 1.0);
        assert!(g.points().collect::<Vec<_>>().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(g.index_of(0.5), Some(3));
        assert_eq!(g.index_of(0.25), None);
        assert_eq!(g.index_of(1.5), None);
    }

    #[test]
    fn centered_even_grid_excludes_zero() {
        let g = UniformGrid::<f64>::centered(8, 0.25).unwrap();
        assert!((g.start() + 0.875).abs() < 1e-15);
        assert!(check_nonzero_frequencies(&g).is_ok());
        let odd = UniformGrid::<f64>::centered(7, 0.25).unwrap();
        assert!(matches!(check_nonzero_frequencies(&odd), Err(Error::ZeroFrequency(_))));
    }

    #[test]
    fn signal_rejects_nan_and_length_mismatch() {
        let g = UniformGrid::new(0.0, 1.0, 3).unwrap();
        assert!(SampledSignal::from_real(g, &[1.0, 2.0]).is_err());
        assert!(SampledSignal::from_real(g, &[1.0, f64::NAN, 2.0]).is_err());
        assert!(SampledSignal::from_real(g, &[1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn window_spec_validation() {
        assert!(WindowSpec::new(1.0, 1.0).is_ok());
        assert!(WindowSpec::new(0.0, 1.0).is_err());
        assert!(WindowSpec::new(1.0, -1.0).is_err());
    }

    #[test]
    fn intervals_small_hosts() {
        let fam = all_intervals(3, 100);
        let got: HashSet<_> = fam.intervals().iter().map(|i| (i.first, i.last)).collect();
        let want: HashSet<_> = [(0, 1), (1, 2), (0, 2)].into_iter().collect();
        assert_eq!(got, want);
        assert_eq!(fam.len(), 3);
        let two = all_intervals(2, 100);
        assert_eq!(two.intervals(), &[Interval { first: 0, last: 1 }]);
    }

    #[test]
    fn dyadic_family_matches_enumeration() {
        let n = 2048;
        let fam = all_intervals(n, 100_000);
        // brute force: every (first, last) whose length is a power of two >= 2
        // and whose start is a multiple of that length
        let mut expected = 0;
        for first in 0..n {
            for last in first + 1..n {
                let len = last - first + 1;
                if len.is_power_of_two() && first % len == 0 {
                    expected += 1;
                }
            }
        }
        assert_eq!(fam.len(), expected);
        assert_eq!(expected, 2047);
        let unique: HashSet<_> = fam.intervals().iter().collect();
        assert_eq!(unique.len(), fam.len());
        assert!(fam.intervals().iter().all(|iv| iv.validate(n).is_ok()));
    }

    proptest! {
        #[test]
        fn interval_families_are_valid_and_unique(n in 2usize..70, cap in 0usize..3000) {
            let fam = all_intervals(n, cap);
            let unique: HashSet<_> = fam.intervals().iter().collect();
            prop_assert_eq!(unique.len(), fam.len());
            for iv in fam.intervals() {
                prop_assert!(iv.validate(n).is_ok());
            }
        }
    }

    #[test]
    fn polynomial_weight_and_test_function() {
        let w = TemperedWeight::polynomial(2.0).unwrap();
        assert_eq!(w.eval(-1.0), 4.0);
        assert_eq!((w.c(), w.n()), (1.0, 2.0));
        let phi = TestFunction::<f64>::gaussian();
        assert!(phi.is_nonnegative());
        assert!((phi.dilated(2.0, 0.0) - 0.5 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!(TestFunction::new(2.0, 10.0, |x: f64| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()).is_err());
    }
}
