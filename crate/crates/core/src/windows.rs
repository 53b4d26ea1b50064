//! Gaussian windows for the S-transform and the fractional S-transform.
//!
//! The fractional window is a normalized Gaussian whose time-domain standard
//! deviation is `k / |xi csc theta|^p`:
//!
//! ```text
//! g(t, xi) = |xi csc theta|^p / (k sqrt(2 pi)) * exp(-t^2 |xi csc theta|^(2p) / (2 k^2))
//! ```
//!
//! The exponent base is taken in absolute value, so `g` is defined for
//! negative `xi csc theta` and non-integer `2p` and keeps unit area.

use crate::error::{Error, Result};
use crate::model::{FractionalOrder, WindowSpec, TOL_XI};
use crate::scalar::Scalar;

/// Truncation radius, in standard deviations, for window quadratures.
pub const DEFAULT_RADIUS_SIGMAS: f64 = 10.0;
/// Quadrature cells per standard deviation.
pub const DEFAULT_CELLS_PER_SIGMA: f64 = 64.0;

fn check_xi<T: Scalar>(xi: T) -> Result<()> {
    if xi.abs() <= T::lit(TOL_XI) || !xi.is_finite() {
        Err(Error::ZeroFrequency(xi.to_f64_lossy()))
    } else {
        Ok(())
    }
}

fn normal_density<T: Scalar>(sigma: T, t: T) -> T {
    let z = t / sigma;
    (-(z * z) / T::lit(2.0)).exp() / (sigma * (T::PI() + T::PI()).sqrt())
}

/// Classical S-transform window `|xi| / (k sqrt(2 pi)) exp(-xi^2 t^2 / (2 k^2))`.
pub fn classical_window<T: Scalar>(k: T, t: T, xi: T) -> Result<T> {
    check_xi(xi)?;
    if !(k > T::zero()) {
        return Err(Error::InvalidWindow(format!("k = {k} must be > 0")));
    }
    Ok(normal_density(k / xi.abs(), t))
}

/// Fourier transform of the classical window in `t`:
/// `exp(-2 pi^2 k^2 alpha^2 / xi^2)`.
pub fn classical_window_hat<T: Scalar>(k: T, alpha: T, xi: T) -> Result<T> {
    check_xi(xi)?;
    let two_pi_sq = T::lit(2.0) * T::PI() * T::PI();
    Ok((-(two_pi_sq * k * k * alpha * alpha) / (xi * xi)).exp())
}

/// `|xi csc theta|^p`, the frequency-dependent scale of the fractional window.
fn frst_scale<T: Scalar>(spec: &WindowSpec<T>, order: &FractionalOrder<T>, xi: T) -> Result<T> {
    check_xi(xi)?;
    Ok((xi * order.csc()?).abs().powf(spec.p()))
}

/// Standard deviation (time units) of `g(., xi)`: `k / |xi csc theta|^p`.
pub fn window_sigma<T: Scalar>(spec: &WindowSpec<T>, order: &FractionalOrder<T>, xi: T) -> Result<T> {
    Ok(spec.k() / frst_scale(spec, order, xi)?)
}

/// Fractional S-transform window `g(t, xi)`.
pub fn frst_window<T: Scalar>(spec: &WindowSpec<T>, order: &FractionalOrder<T>, t: T, xi: T) -> Result<T> {
    Ok(normal_density(window_sigma(spec, order, xi)?, t))
}

/// Window evaluated with the `csc theta` factor dropped, i.e. the width law
/// `k / |xi|^p`. Used by the sifting path on delta-branch orders, where
/// `csc theta` is unbounded.
pub fn sifted_window<T: Scalar>(spec: &WindowSpec<T>, t: T, xi: T) -> Result<T> {
    check_xi(xi)?;
    Ok(normal_density(spec.k() / xi.abs().powf(spec.p()), t))
}

/// Default `(radius, step)` for window quadratures at `xi`.
pub fn default_quadrature<T: Scalar>(spec: &WindowSpec<T>, order: &FractionalOrder<T>, xi: T) -> Result<(T, T)> {
    let sigma = window_sigma(spec, order, xi)?;
    Ok((sigma * T::lit(DEFAULT_RADIUS_SIGMAS), sigma / T::lit(DEFAULT_CELLS_PER_SIGMA)))
}

fn midpoint<T: Scalar>(radius: T, step: T, f: impl Fn(T) -> T) -> T {
    let cells = ((radius + radius) / step).ceil().to_usize().unwrap_or(1).max(1);
    let h = (radius + radius) / T::from_usize_lossy(cells);
    let mut acc = T::zero();
    for j in 0..cells {
        acc = acc + f(-radius + (T::from_usize_lossy(j) + T::lit(0.5)) * h);
    }
    acc * h
}

fn check_radius<T: Scalar>(spec: &WindowSpec<T>, order: &FractionalOrder<T>, xi: T, radius: T, step: T) -> Result<T> {
    let sigma = window_sigma(spec, order, xi)?;
    let required = sigma * T::lit(DEFAULT_RADIUS_SIGMAS);
    if !(radius >= required * (T::one() - T::lit(1e-12))) {
        return Err(Error::InsufficientRadius {
            radius: radius.to_f64_lossy(),
            required: required.to_f64_lossy(),
        });
    }
    if !(step > T::zero()) {
        return Err(Error::InvalidWindow(format!("quadrature step {step} must be > 0")));
    }
    Ok(sigma)
}

/// Midpoint-rule area of `g(., xi)` over `[-radius, radius]`.
pub fn window_area<T: Scalar>(
    spec: &WindowSpec<T>,
    order: &FractionalOrder<T>,
    xi: T,
    radius: T,
    step: T,
) -> Result<T> {
    let sigma = check_radius(spec, order, xi, radius, step)?;
    Ok(midpoint(radius, step, |t| normal_density(sigma, t)))
}

/// Midpoint-rule value of `int g(x, xi) (1 + C|x|)^N dx` over `[-radius, radius]`.
#[allow(clippy::too_many_arguments)]
pub fn moment_integral<T: Scalar>(
    spec: &WindowSpec<T>,
    order: &FractionalOrder<T>,
    xi: T,
    c: T,
    n: T,
    radius: T,
    step: T,
) -> Result<T> {
    check_constants(c, n)?;
    let sigma = check_radius(spec, order, xi, radius, step)?;
    Ok(midpoint(radius, step, |x| normal_density(sigma, x) * (T::one() + c * x.abs()).powf(n)))
}

fn check_constants<T: Scalar>(c: T, n: T) -> Result<()> {
    if !(c > T::zero() && n > T::zero() && c.is_finite() && n.is_finite()) {
        return Err(Error::Config(format!("moment constants C = {c}, N = {n} must be > 0")));
    }
    Ok(())
}

/// Closed-form bound `A_{xi,N}` on the weighted window moment:
///
/// ```text
/// 2^[N] (1 + 2 C^([N]+1) 2^(([N]+1)/2) k^([N]+1) / (2 sqrt(pi) |xi csc theta|^(p([N]+1))) Gamma([N]/2 + 1))
/// ```
///
/// with `[N]` the integer part of `N`.
pub fn moment_bound_closed<T: Scalar>(
    spec: &WindowSpec<T>,
    order: &FractionalOrder<T>,
    xi: T,
    c: T,
    n: T,
) -> Result<T> {
    check_constants(c, n)?;
    let scale = frst_scale(spec, order, xi)?;
    let int_n = n.floor();
    let pow = int_n + T::one();
    let two = T::lit(2.0);
    // Gamma([N]/2 + 1) = Gamma(m / 2) with m = [N] + 2
    let m = int_n.to_u32().ok_or_else(|| Error::Config(format!("N = {n} too large")))? + 2;
    let gamma = gamma_half_integer::<T>(m);
    let inner = two * c.powf(pow) * two.powf(pow / two) * spec.k().powf(pow)
        / (two * T::PI().sqrt() * scale.powf(pow))
        * gamma;
    Ok(two.powf(int_n) * (T::one() + inner))
}

/// `Gamma(m / 2)` for integer `m >= 1`, by the recursion
/// `Gamma(x + 1) = x Gamma(x)` from `Gamma(1) = 1` or `Gamma(1/2) = sqrt(pi)`.
pub fn gamma_half_integer<T: Scalar>(m: u32) -> T {
    assert!(m >= 1, "Gamma(m/2) needs m >= 1");
    let half = T::lit(0.5);
    let (mut x, mut acc) = if m % 2 == 0 { (T::one(), T::one()) } else { (half, T::PI().sqrt()) };
    let target = T::from_u32(m).unwrap() * half;
    while x < target - half * half {
        acc = acc * x;
        x = x + T::one();
    }
    acc
}
