//! Fractional Fourier transform with the chirp kernel
//!
//! ```text
//! K_a(t, xi) = A_theta * exp(i pi (xi^2 cot theta - 2 xi t csc theta + t^2 cot theta))
//! ```
//!
//! `frft_direct` is the literal rectangle-rule quadrature (O(N M)) and serves
//! as the oracle for `frft_fast`, which factors the kernel as
//! chirp * Fourier * chirp and evaluates the Fourier sum on the (uniform)
//! target frequencies `xi csc theta` with a chirp-z transform.

use num_complex::Complex;
use num_traits::Zero;
use rustfft::FftPlanner;

use crate::convolution::LinearConvolver;
use crate::error::{Error, Result};
use crate::model::{Branch, FractionalOrder, SampledSignal, Spectrum, UniformGrid};
use crate::scalar::Scalar;

/// Fast paths refuse orders with `|sin theta|` below this.
pub const SIN_GUARD: f64 = 1e-6;

/// Quadrature route for the generic branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub enum TransformMode {
    /// Literal kernel sum, O(N M).
    Direct,
    /// Chirp / FFT / chirp factorization.
    #[default]
    Fast,
}

/// How the fast path maps the Fourier sum onto `xi csc theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrequencyMapping {
    /// Exact evaluation on the uniform target grid (Bluestein chirp-z).
    #[default]
    ChirpZ,
    /// FFT on a zero-padded bin grid (`oversample` times the input length)
    /// followed by linear interpolation. Second-order accurate in the bin
    /// spacing.
    Linear { oversample: usize },
}

/// `amp * exp(i pi (y^2 cot - 2 x y csc + x^2 cot))`. The forward kernel and
/// the conjugate kernel used by the inverse share this form.
#[derive(Debug, Clone, Copy)]
struct ChirpKernel<T> {
    amp: Complex<T>,
    cot: T,
    csc: T,
}

impl<T: Scalar> ChirpKernel<T> {
    fn forward(order: &FractionalOrder<T>) -> Result<Self> {
        Ok(Self { amp: order.amplitude()?, cot: order.cot()?, csc: order.csc()? })
    }

    fn conjugate(self) -> Self {
        Self { amp: self.amp.conj(), cot: -self.cot, csc: -self.csc }
    }

    fn chirp(&self, x: T) -> Complex<T> {
        Complex::from_polar(T::one(), T::PI() * x * x * self.cot)
    }
}

/// Pointwise kernel `K_a(t, xi)`; only defined on the generic branch.
pub fn kernel_eval<T: Scalar>(order: &FractionalOrder<T>, t: T, xi: T) -> Result<Complex<T>> {
    let amp = order.amplitude()?;
    let (cot, csc) = (order.cot()?, order.csc()?);
    let two = T::lit(2.0);
    let phase = T::PI() * (xi * xi * cot - two * xi * t * csc + t * t * cot);
    Ok(amp * Complex::from_polar(T::one(), phase))
}

fn guard_fast<T: Scalar>(order: &FractionalOrder<T>) -> Result<()> {
    order.require_generic()?;
    if order.sin().abs() < T::lit(SIN_GUARD) {
        return Err(Error::NearSingularOrder {
            a: order.a().to_f64_lossy(),
            sin: order.sin().abs().to_f64_lossy(),
        });
    }
    Ok(())
}

/// Rectangle-rule quadrature `sum_i f(t_i) K_a(t_i, xi) dt` for every `xi`.
pub fn frft_direct<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi_grid: &UniformGrid<T>,
) -> Result<Spectrum<T>> {
    order.require_generic()?;
    let dt = f.grid().step();
    let values = xi_grid
        .points()
        .map(|xi| {
            let mut acc = Complex::zero();
            for (t, &v) in f.grid().points().zip(f.values()) {
                acc = acc + v * kernel_eval(order, t, xi)?;
            }
            Ok(acc * dt)
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(*xi_grid, values)
}

/// Fast FRFT with the default (chirp-z) frequency mapping.
pub fn frft_fast<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi_grid: &UniformGrid<T>,
) -> Result<Spectrum<T>> {
    frft_fast_with(f, order, xi_grid, FrequencyMapping::ChirpZ)
}

pub fn frft_fast_with<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi_grid: &UniformGrid<T>,
    mapping: FrequencyMapping,
) -> Result<Spectrum<T>> {
    guard_fast(order)?;
    let kernel = ChirpKernel::forward(order)?;
    let values = chirp_transform_fast(f.values(), f.grid(), kernel, xi_grid, mapping)?;
    Spectrum::new(*xi_grid, values)
}

/// FRFT on all three kernel branches. The generic branch runs the selected
/// quadrature; the delta branches sift `f` at `xi` (identity) or `-xi`
/// (reflection), requiring every target to be an exact grid point.
pub fn frft_apply<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    xi_grid: &UniformGrid<T>,
    mode: TransformMode,
) -> Result<Spectrum<T>> {
    match order.branch() {
        Branch::Generic => match mode {
            TransformMode::Direct => frft_direct(f, order, xi_grid),
            TransformMode::Fast => frft_fast(f, order, xi_grid),
        },
        Branch::Identity => Spectrum::new(*xi_grid, sift(f, xi_grid, T::one())?),
        Branch::Reflection => Spectrum::new(*xi_grid, sift(f, xi_grid, -T::one())?),
    }
}

/// Values of `f(sign * xi)` for each `xi`; points must land on `f`'s grid.
pub(crate) fn sift<T: Scalar>(
    f: &SampledSignal<T>,
    targets: &UniformGrid<T>,
    sign: T,
) -> Result<Vec<Complex<T>>> {
    targets
        .points()
        .map(|xi| {
            f.grid().index_of(sign * xi).map(|i| f.values()[i]).ok_or_else(|| {
                Error::GridMismatch(format!("{} is not a sample point of the input grid", sign * xi))
            })
        })
        .collect()
}

/// Inverse FRFT `f(t) = sum_m F(xi_m) conj(K_a(t, xi_m)) dxi`, fast path.
pub fn ifrft<T: Scalar>(
    spectrum: &Spectrum<T>,
    order: &FractionalOrder<T>,
    t_grid: &UniformGrid<T>,
) -> Result<SampledSignal<T>> {
    ifrft_with(spectrum, order, t_grid, TransformMode::Fast)
}

pub fn ifrft_with<T: Scalar>(
    spectrum: &Spectrum<T>,
    order: &FractionalOrder<T>,
    t_grid: &UniformGrid<T>,
    mode: TransformMode,
) -> Result<SampledSignal<T>> {
    order.require_generic()?;
    let values = match mode {
        TransformMode::Direct => {
            let dxi = spectrum.grid().step();
            t_grid
                .points()
                .map(|t| {
                    let mut acc = Complex::zero();
                    for (xi, &v) in spectrum.grid().points().zip(spectrum.values()) {
                        acc = acc + v * kernel_eval(order, t, xi)?.conj();
                    }
                    Ok(acc * dxi)
                })
                .collect::<Result<Vec<_>>>()?
        }
        TransformMode::Fast => {
            guard_fast(order)?;
            let kernel = ChirpKernel::forward(order)?.conjugate();
            chirp_transform_fast(
                spectrum.values(),
                spectrum.grid(),
                kernel,
                t_grid,
                FrequencyMapping::ChirpZ,
            )?
        }
    };
    SampledSignal::new(*t_grid, values)
}

/// `out(y) = sum_i v_i K(x_i, y) dx` via pre-chirp, Fourier sum at
/// `u = y csc`, post-chirp.
fn chirp_transform_fast<T: Scalar>(
    values: &[Complex<T>],
    in_grid: &UniformGrid<T>,
    kernel: ChirpKernel<T>,
    out_grid: &UniformGrid<T>,
    mapping: FrequencyMapping,
) -> Result<Vec<Complex<T>>> {
    let dx = in_grid.step();
    let nyquist = T::lit(0.5) / dx;
    let u0 = out_grid.start() * kernel.csc;
    let du = out_grid.step() * kernel.csc;
    let u_last = out_grid.last() * kernel.csc;
    let slack = T::one() + T::lit(1e-9);
    if u0.abs() > nyquist * slack || u_last.abs() > nyquist * slack {
        return Err(Error::GridMismatch(format!(
            "target frequencies up to {} exceed the Nyquist limit {} of the input grid",
            u0.abs().max(u_last.abs()),
            nyquist
        )));
    }
    let chirped: Vec<Complex<T>> = in_grid
        .points()
        .zip(values)
        .map(|(x, &v)| v * kernel.chirp(x))
        .collect();
    let sums = match mapping {
        FrequencyMapping::ChirpZ => {
            chirp_z(&chirped, in_grid.start(), dx, u0, du, out_grid.count())
        }
        FrequencyMapping::Linear { oversample } => {
            fourier_sum_interpolated(&chirped, in_grid, u0, du, out_grid.count(), oversample.max(1))
        }
    };
    Ok(out_grid
        .points()
        .zip(sums)
        .map(|(y, s)| kernel.amp * kernel.chirp(y) * s * dx)
        .collect())
}

/// `exp(i pi x)` with the argument reduced modulo 2 first.
fn cis_pi<T: Scalar>(x: T) -> Complex<T> {
    let two = T::lit(2.0);
    let r = x - two * (x / two).floor();
    Complex::from_polar(T::one(), T::PI() * r)
}

/// `X_m = sum_n h_n exp(-2 pi i u_m x_n)` with `x_n = x0 + n dx`,
/// `u_m = u0 + m du`, via Bluestein's identity
/// `2 m n = m^2 + n^2 - (m - n)^2`.
pub(crate) fn chirp_z<T: Scalar>(
    h: &[Complex<T>],
    x0: T,
    dx: T,
    u0: T,
    du: T,
    m_count: usize,
) -> Vec<Complex<T>> {
    let n_count = h.len();
    let beta = du * dx;
    let two = T::lit(2.0);
    let sq = |k: usize| {
        let k = T::from_usize_lossy(k);
        k * k
    };
    let a: Vec<Complex<T>> = h
        .iter()
        .enumerate()
        .map(|(n, &v)| {
            let nf = T::from_usize_lossy(n);
            v * cis_pi(-(two * u0 * nf * dx)) * cis_pi(-(beta * sq(n)))
        })
        .collect();
    let chirp: Vec<Complex<T>> = (0..n_count + m_count - 1)
        .map(|idx| {
            let l = idx.abs_diff(n_count - 1);
            cis_pi(beta * sq(l))
        })
        .collect();
    let conv = LinearConvolver::new(a.len(), chirp.len()).convolve(&a, &chirp);
    (0..m_count)
        .map(|m| {
            let um = u0 + T::from_usize_lossy(m) * du;
            conv[m + n_count - 1] * cis_pi(-(beta * sq(m))) * cis_pi(-(two * um * x0))
        })
        .collect()
}

fn fourier_sum_interpolated<T: Scalar>(
    h: &[Complex<T>],
    in_grid: &UniformGrid<T>,
    u0: T,
    du: T,
    m_count: usize,
    oversample: usize,
) -> Vec<Complex<T>> {
    let n = h.len();
    let padded = (n * oversample).next_power_of_two();
    let mut buf = vec![Complex::zero(); padded];
    buf[..n].copy_from_slice(h);
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    // re-reference the sum to the grid midpoint so the interpolated function
    // varies as slowly as possible in u
    let center = n / 2;
    let dx = in_grid.step();
    let x_center = in_grid.point(center);
    let pf = T::from_usize_lossy(padded);
    let two = T::lit(2.0);
    let centered = |q: usize| {
        let qf = T::from_usize_lossy(q);
        buf[q] * cis_pi(two * qf * T::from_usize_lossy(center) / pf)
    };
    (0..m_count)
        .map(|m| {
            let u = u0 + T::from_usize_lossy(m) * du;
            let pos = u * pf * dx;
            let lo = pos.floor();
            let frac = pos - lo;
            let lo_idx = lo.to_i64().unwrap_or(0).rem_euclid(padded as i64) as usize;
            let hi_idx = (lo_idx + 1) % padded;
            let s = centered(lo_idx) * (T::one() - frac) + centered(hi_idx) * frac;
            s * cis_pi(-(two * u * x_center))
        })
        .collect()
}
