//! Classical S-transform and fractional S-transform (FRST).
//!
//! The FRST row at frequency `xi` is the convolution in `tau` of
//! `f(t) K_a(t, xi)` with the window `g(., xi)`:
//!
//! ```text
//! FRST(tau, xi) = sum_i f(t_i) g(tau - t_i, xi) K_a(t_i, xi) dt
//! ```
//!
//! `Direct` evaluates that sum literally; `Fast` computes the same sum as a
//! zero-padded FFT convolution. Signals are implicitly zero outside their
//! grid; tau columns whose window support leaves the grid are still
//! computed and counted in [`RowMeta::edge_columns`].
//!
//! Integrating a row over `tau` gives back the FRFT at `xi` (the window has
//! unit area), which is how [`frst_inverse`] works. Frequency grids fed to
//! the inverse should be symmetric and exclude zero, e.g.
//! [`UniformGrid::centered`] with an even count.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::convolution::LinearConvolver;
use crate::error::{Error, Result};
use crate::frft::{frft_apply, ifrft_with, kernel_eval, sift, TransformMode};
use crate::model::{
    check_nonzero_frequencies, classify_order, Branch, FractionalOrder, RowMeta, SampledSignal,
    Spectrum, TimeFreqMatrix, UniformGrid, WindowSpec,
};
use crate::scalar::Scalar;
use crate::windows::{
    classical_window, classical_window_hat, sifted_window, window_sigma, DEFAULT_RADIUS_SIGMAS,
};

fn check_overlap<T: Scalar>(f: &SampledSignal<T>, tau_grid: &UniformGrid<T>) -> Result<()> {
    let g = f.grid();
    if tau_grid.last() < g.start() || tau_grid.start() > g.last() {
        return Err(Error::GridMismatch("tau grid does not overlap the signal grid".into()));
    }
    Ok(())
}

fn row_meta<T: Scalar>(f: &SampledSignal<T>, tau_grid: &UniformGrid<T>, sigma: T) -> RowMeta<T> {
    let reach = sigma * T::lit(DEFAULT_RADIUS_SIGMAS);
    let (lo, hi) = (f.grid().start(), f.grid().last());
    let edge_columns = tau_grid.points().filter(|&tau| tau - reach < lo || tau + reach > hi).count();
    RowMeta { sigma, edge_columns }
}

fn normal_density<T: Scalar>(sigma: T, t: T) -> T {
    let z = t / sigma;
    (-(z * z) / T::lit(2.0)).exp() / (sigma * (T::PI() + T::PI()).sqrt())
}

/// S-transform by literal quadrature of
/// `sum_i f(t_i) w(tau - t_i, xi) exp(-2 pi i xi t_i) dt`.
pub fn s_transform_direct<T: Scalar>(
    f: &SampledSignal<T>,
    k: T,
    tau_grid: &UniformGrid<T>,
    xi_grid: &UniformGrid<T>,
) -> Result<TimeFreqMatrix<T>> {
    check_nonzero_frequencies(xi_grid)?;
    check_overlap(f, tau_grid)?;
    let window = WindowSpec::new(k, T::one())?;
    let dt = f.grid().step();
    let two_pi = T::PI() + T::PI();
    let rows: Vec<(Vec<Complex<T>>, RowMeta<T>)> = (0..xi_grid.count())
        .into_par_iter()
        .map(|r| {
            let xi = xi_grid.point(r);
            let modulated: Vec<Complex<T>> = f
                .grid()
                .points()
                .zip(f.values())
                .map(|(t, &v)| v * Complex::from_polar(T::one(), -(two_pi * xi * t)))
                .collect();
            let row = tau_grid
                .points()
                .map(|tau| {
                    let mut acc = Complex::zero();
                    for (t, &m) in f.grid().points().zip(&modulated) {
                        acc = acc + m * classical_window(k, tau - t, xi)?;
                    }
                    Ok(acc * dt)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((row, row_meta(f, tau_grid, k / xi.abs())))
        })
        .collect::<Result<_>>()?;
    assemble(*tau_grid, *xi_grid, rows, classify_order(T::one())?, window)
}

/// S-transform through the Fourier domain: per row, the inverse transform
/// of `f_hat(. + xi) w_hat(., xi)` with the analytic window spectrum
/// `exp(-2 pi^2 k^2 alpha^2 / xi^2)`. The tau grid is the signal's grid.
///
/// The signal is zero-padded so the periodized window carries negligible
/// wrap-around; agreement with [`s_transform_direct`] additionally needs the
/// window resolved by the grid (`k / |xi|` of at least about two steps).
pub fn s_transform_spectral<T: Scalar>(
    f: &SampledSignal<T>,
    k: T,
    xi_grid: &UniformGrid<T>,
) -> Result<TimeFreqMatrix<T>> {
    check_nonzero_frequencies(xi_grid)?;
    let window = WindowSpec::new(k, T::one())?;
    let n = f.len();
    let dt = f.grid().step();
    let xi_min = xi_grid.points().fold(T::infinity(), |m, xi| m.min(xi.abs()));
    let reach = (T::lit(DEFAULT_RADIUS_SIGMAS) * k / (xi_min * dt)).ceil();
    let reach = reach.to_usize().ok_or_else(|| Error::GridMismatch("window too wide".into()))?;
    let mut padded = n;
    while padded < n + reach {
        padded *= 2;
    }
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(padded);
    let inverse = planner.plan_fft_inverse(padded);
    let mut spectrum = vec![Complex::zero(); padded];
    spectrum[..n].copy_from_slice(f.values());
    forward.process(&mut spectrum);

    let pf = T::from_usize_lossy(padded);
    let two_pi = T::PI() + T::PI();
    let t0 = f.grid().start();
    let alpha = |q: usize| {
        let signed = if q < padded / 2 { T::from_usize_lossy(q) } else { T::from_usize_lossy(q) - pf };
        signed / (pf * dt)
    };

    let rows: Vec<(Vec<Complex<T>>, RowMeta<T>)> = (0..xi_grid.count())
        .into_par_iter()
        .map(|r| {
            let xi = xi_grid.point(r);
            let bins = xi * pf * dt;
            let shift = bins.round();
            let mut buf: Vec<Complex<T>> = if (bins - shift).abs() < T::lit(1e-9) {
                // f_hat(. + xi) is a circular shift of the padded spectrum
                let s = shift.to_i64().unwrap_or(0).rem_euclid(padded as i64) as usize;
                let phase = Complex::from_polar(T::one(), -(two_pi * xi * t0));
                (0..padded).map(|q| spectrum[(q + s) % padded] * phase).collect()
            } else {
                let mut b = vec![Complex::zero(); padded];
                for ((slot, t), &v) in b.iter_mut().zip(f.grid().points()).zip(f.values()) {
                    *slot = v * Complex::from_polar(T::one(), -(two_pi * xi * t));
                }
                forward.process(&mut b);
                b
            };
            for (q, v) in buf.iter_mut().enumerate() {
                *v = *v * (classical_window_hat(k, alpha(q), xi)? / pf);
            }
            inverse.process(&mut buf);
            buf.truncate(n);
            Ok((buf, row_meta(f, f.grid(), k / xi.abs())))
        })
        .collect::<Result<_>>()?;
    assemble(*f.grid(), *xi_grid, rows, classify_order(T::one())?, window)
}

/// One FRST row at frequency `xi`, evaluated on `tau_grid`.
pub fn frst_row<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    tau_grid: &UniformGrid<T>,
    xi: T,
    mode: TransformMode,
) -> Result<SampledSignal<T>> {
    order.require_generic()?;
    check_overlap(f, tau_grid)?;
    let (row, _) = match mode {
        TransformMode::Direct => row_direct(f, order, spec, tau_grid, xi)?,
        TransformMode::Fast => {
            let conv = fast_convolver(f, tau_grid)?;
            row_fast(f, order, spec, tau_grid, xi, &conv)?
        }
    };
    SampledSignal::new(*tau_grid, row)
}

fn chirped<T: Scalar>(f: &SampledSignal<T>, order: &FractionalOrder<T>, xi: T) -> Result<Vec<Complex<T>>> {
    f.grid()
        .points()
        .zip(f.values())
        .map(|(t, &v)| Ok(v * kernel_eval(order, t, xi)?))
        .collect()
}

fn row_direct<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    tau_grid: &UniformGrid<T>,
    xi: T,
) -> Result<(Vec<Complex<T>>, RowMeta<T>)> {
    let sigma = window_sigma(spec, order, xi)?;
    let h = chirped(f, order, xi)?;
    let dt = f.grid().step();
    let row = tau_grid
        .points()
        .map(|tau| {
            let mut acc = Complex::zero();
            for (t, &v) in f.grid().points().zip(&h) {
                acc = acc + v * normal_density(sigma, tau - t);
            }
            acc * dt
        })
        .collect();
    Ok((row, row_meta(f, tau_grid, sigma)))
}

fn fast_convolver<T: Scalar>(f: &SampledSignal<T>, tau_grid: &UniformGrid<T>) -> Result<LinearConvolver<T>> {
    if !tau_grid.same_step(f.grid()) {
        return Err(Error::GridMismatch(format!(
            "fast mode needs the tau step ({}) to equal the signal step ({})",
            tau_grid.step(),
            f.grid().step()
        )));
    }
    Ok(LinearConvolver::new(f.len(), f.len() + tau_grid.count() - 1))
}

fn row_fast<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    tau_grid: &UniformGrid<T>,
    xi: T,
    conv: &LinearConvolver<T>,
) -> Result<(Vec<Complex<T>>, RowMeta<T>)> {
    let sigma = window_sigma(spec, order, xi)?;
    let h = chirped(f, order, xi)?;
    let n = f.len();
    let dt = f.grid().step();
    let offset = tau_grid.start() - f.grid().start();
    // kernel[m] = g(offset + (m - (n - 1)) dt) dt
    let kernel: Vec<Complex<T>> = (0..n + tau_grid.count() - 1)
        .map(|m| {
            let lag = T::from_usize_lossy(m) - T::from_usize_lossy(n - 1);
            Complex::new(normal_density(sigma, offset + lag * dt) * dt, T::zero())
        })
        .collect();
    let full = conv.convolve(&h, &kernel);
    let row = full[n - 1..n - 1 + tau_grid.count()].to_vec();
    Ok((row, row_meta(f, tau_grid, sigma)))
}

/// Fractional S-transform on a `xi x tau` grid. Rows are computed in
/// parallel. Fast mode requires `tau_grid` to share the signal's step.
pub fn frst_forward<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    tau_grid: &UniformGrid<T>,
    xi_grid: &UniformGrid<T>,
    mode: TransformMode,
) -> Result<TimeFreqMatrix<T>> {
    order.require_generic()?;
    check_nonzero_frequencies(xi_grid)?;
    check_overlap(f, tau_grid)?;
    let conv = match mode {
        TransformMode::Fast => Some(fast_convolver(f, tau_grid)?),
        TransformMode::Direct => None,
    };
    let rows: Vec<(Vec<Complex<T>>, RowMeta<T>)> = (0..xi_grid.count())
        .into_par_iter()
        .map(|r| {
            let xi = xi_grid.point(r);
            match &conv {
                Some(c) => row_fast(f, order, spec, tau_grid, xi, c),
                None => row_direct(f, order, spec, tau_grid, xi),
            }
        })
        .collect::<Result<_>>()?;
    assemble(*tau_grid, *xi_grid, rows, *order, *spec)
}

/// Closed-form FRST for the delta branches. Sifting the kernel gives
/// `f(xi) g(tau - xi, xi)` (identity) or `f(-xi) g(tau + xi, xi)`
/// (reflection); since `csc theta` is unbounded there, `g` is taken with
/// width `k / |xi|^p` (see [`sifted_window`]). Every `+-xi` must be a
/// sample point of `f`.
pub fn frst_sifted<T: Scalar>(
    f: &SampledSignal<T>,
    order: &FractionalOrder<T>,
    spec: &WindowSpec<T>,
    tau_grid: &UniformGrid<T>,
    xi_grid: &UniformGrid<T>,
) -> Result<TimeFreqMatrix<T>> {
    check_nonzero_frequencies(xi_grid)?;
    let sign = match order.branch() {
        Branch::Identity => T::one(),
        Branch::Reflection => -T::one(),
        Branch::Generic => {
            return Err(Error::Config("frst_sifted only applies to delta-branch orders".into()))
        }
    };
    let sifted = sift(f, xi_grid, sign)?;
    let rows = xi_grid
        .points()
        .zip(sifted)
        .map(|(xi, v)| {
            let row = tau_grid
                .points()
                .map(|tau| Ok(v * sifted_window(spec, tau - sign * xi, xi)?))
                .collect::<Result<Vec<_>>>()?;
            let sigma = spec.k() / xi.abs().powf(spec.p());
            Ok((row, row_meta(f, tau_grid, sigma)))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(*tau_grid, *xi_grid, rows, *order, *spec)
}

fn assemble<T: Scalar>(
    tau_grid: UniformGrid<T>,
    xi_grid: UniformGrid<T>,
    rows: Vec<(Vec<Complex<T>>, RowMeta<T>)>,
    order: FractionalOrder<T>,
    window: WindowSpec<T>,
) -> Result<TimeFreqMatrix<T>> {
    let mut values = Vec::with_capacity(tau_grid.count() * xi_grid.count());
    let mut meta = Vec::with_capacity(rows.len());
    for (row, m) in rows {
        values.extend(row);
        meta.push(m);
    }
    TimeFreqMatrix::new(tau_grid, xi_grid, values, order, window, meta)
}

/// Rectangle-rule integral of each row over `tau`.
pub fn frst_marginal<T: Scalar>(tf: &TimeFreqMatrix<T>) -> Result<Spectrum<T>> {
    let dtau = tf.tau_grid().step();
    let values = (0..tf.rows())
        .map(|r| tf.row(r).iter().fold(Complex::zero(), |acc, &v| acc + v) * dtau)
        .collect();
    Spectrum::new(*tf.xi_grid(), values)
}

/// Inverse FRST: the tau-marginal followed by the inverse FRFT. Uses the
/// chirp-z path when the grids allow it and the literal quadrature
/// otherwise.
pub fn frst_inverse<T: Scalar>(
    tf: &TimeFreqMatrix<T>,
    order: &FractionalOrder<T>,
    t_grid: &UniformGrid<T>,
) -> Result<SampledSignal<T>> {
    order.require_generic()?;
    let marginal = frst_marginal(tf)?;
    match ifrft_with(&marginal, order, t_grid, TransformMode::Fast) {
        Err(Error::GridMismatch(_)) | Err(Error::NearSingularOrder { .. }) => {
            ifrft_with(&marginal, order, t_grid, TransformMode::Direct)
        }
        other => other,
    }
}

/// FRFT of `f` on the FRST's frequency grid; the reference the marginal is
/// compared with.
pub fn frft_reference<T: Scalar>(
    f: &SampledSignal<T>,
    tf: &TimeFreqMatrix<T>,
    mode: TransformMode,
) -> Result<Spectrum<T>> {
    frft_apply(f, tf.order(), tf.xi_grid(), mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frft::frft_direct;

    fn grid(n: usize, step: f64) -> UniformGrid<f64> {
        UniformGrid::new(-(n as f64) * step / 2.0, step, n).unwrap()
    }

    fn max_rel(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
        let peak = b.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm())) / peak
    }

    #[test]
    fn zero_signal_gives_zero_matrix() {
        let g = grid(64, 0.125);
        let f = SampledSignal::zeros(g);
        let xi = UniformGrid::centered(8, 0.5).unwrap();
        let order = classify_order(0.6).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        for tf in [
            s_transform_direct(&f, 1.0, &g, &xi).unwrap(),
            s_transform_spectral(&f, 1.0, &xi).unwrap(),
            frst_forward(&f, &order, &spec, &g, &xi, TransformMode::Fast).unwrap(),
            frst_forward(&f, &order, &spec, &g, &xi, TransformMode::Direct).unwrap(),
        ] {
            assert!(tf.values().iter().all(|v| v.norm() == 0.0));
        }
        let tf = frst_forward(&f, &order, &spec, &g, &xi, TransformMode::Fast).unwrap();
        assert!(frst_marginal(&tf).unwrap().values().iter().all(|v| v.norm() == 0.0));
        assert!(frst_inverse(&tf, &order, &g).unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn pure_tone_row_has_flat_modulus() {
        let g = grid(512, 1.0 / 32.0);
        let xi0 = 2.0;
        let f = SampledSignal::from_fn(g, |t| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * xi0 * t)).unwrap();
        let xi = UniformGrid::new(1.0, 1.0, 3).unwrap();
        let tf = s_transform_direct(&f, 1.0, &g, &xi).unwrap();
        // interior columns, away from the grid edges by > 10 sigma
        let row = tf.row(1);
        for v in &row[200..312] {
            assert!((v.norm() - 1.0).abs() < 1e-6, "|S| = {}", v.norm());
        }
    }

    #[test]
    fn frst_at_quarter_turn_is_s_transform() {
        let g = grid(128, 1.0 / 8.0);
        let f = SampledSignal::from_fn(g, |t| Complex::new((-t * t / 4.0).exp(), (t / 3.0).sin())).unwrap();
        let xi = UniformGrid::new(0.25, 0.25, 12).unwrap();
        let s = s_transform_direct(&f, 1.0, &g, &xi).unwrap();
        let one = classify_order(1.0).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        for mode in [TransformMode::Direct, TransformMode::Fast] {
            let fr = frst_forward(&f, &one, &spec, &g, &xi, mode).unwrap();
            let err = fr.values().iter().zip(s.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
            assert!(err < 1e-9, "{mode:?}: {err}");
        }
    }

    #[test]
    fn fast_needs_matching_step() {
        let g = grid(64, 0.125);
        let f = SampledSignal::from_real_fn(g, |t| (-t * t).exp()).unwrap();
        let tau = grid(32, 0.25);
        let xi = UniformGrid::centered(4, 0.5).unwrap();
        let order = classify_order(0.6).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        assert!(matches!(
            frst_forward(&f, &order, &spec, &tau, &xi, TransformMode::Fast),
            Err(Error::GridMismatch(_))
        ));
        let direct = frst_forward(&f, &order, &spec, &tau, &xi, TransformMode::Direct).unwrap();
        assert_eq!(direct.cols(), 32);
    }

    #[test]
    fn fast_with_shifted_tau_grid_matches_direct() {
        let g = grid(96, 0.125);
        let f = SampledSignal::from_fn(g, |t| Complex::new((-t * t / 3.0).exp(), 0.3 * (2.0 * t).cos())).unwrap();
        let tau = UniformGrid::new(-9.0, 0.125, 160).unwrap();
        let xi = UniformGrid::centered(10, 0.4).unwrap();
        let order = classify_order(1.3).unwrap();
        let spec = WindowSpec::new(0.8, 0.7).unwrap();
        let d = frst_forward(&f, &order, &spec, &tau, &xi, TransformMode::Direct).unwrap();
        let s = frst_forward(&f, &order, &spec, &tau, &xi, TransformMode::Fast).unwrap();
        assert!(max_rel(s.values(), d.values()) < 1e-10);
    }

    #[test]
    fn rejects_zero_frequency_and_delta_orders() {
        let g = grid(32, 0.25);
        let f = SampledSignal::from_real_fn(g, |t| (-t * t).exp()).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let with_zero = UniformGrid::centered(5, 0.5).unwrap();
        let order = classify_order(0.5).unwrap();
        assert!(matches!(
            frst_forward(&f, &order, &spec, &g, &with_zero, TransformMode::Fast),
            Err(Error::ZeroFrequency(_))
        ));
        let xi = UniformGrid::centered(4, 0.5).unwrap();
        let id = classify_order(0.0).unwrap();
        assert!(matches!(
            frst_forward(&f, &id, &spec, &g, &xi, TransformMode::Fast),
            Err(Error::DegenerateOrder(_))
        ));
    }

    #[test]
    fn sifted_identity_branch() {
        let g = grid(32, 0.25);
        let f = SampledSignal::from_real_fn(g, |t| t + 10.0).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let xi = UniformGrid::new(0.5, 0.25, 4).unwrap();
        let id = classify_order(0.0).unwrap();
        let tf = frst_sifted(&f, &id, &spec, &g, &xi).unwrap();
        let want = (0.5 + 10.0) * sifted_window(&spec, g.point(3) - 0.5, 0.5).unwrap();
        assert!((tf.get(0, 3).re - want).abs() < 1e-12);
        let refl = classify_order(2.0).unwrap();
        let tf = frst_sifted(&f, &refl, &spec, &g, &xi).unwrap();
        let want = (-0.5 + 10.0) * sifted_window(&spec, g.point(3) + 0.5, 0.5).unwrap();
        assert!((tf.get(0, 3).re - want).abs() < 1e-12);
        assert!(frst_sifted(&f, &classify_order(1.0).unwrap(), &spec, &g, &xi).is_err());
    }

    #[test]
    fn marginal_of_constant_rows() {
        let tau = UniformGrid::new(0.0, 0.5, 5).unwrap();
        let xi = UniformGrid::new(1.0, 1.0, 2).unwrap();
        let c = Complex::new(1.5, -0.5);
        let order = classify_order(1.0).unwrap();
        let meta = vec![RowMeta { sigma: 1.0, edge_columns: 0 }; 2];
        let tf = TimeFreqMatrix::new(tau, xi, vec![c; 10], order, WindowSpec::new(1.0, 1.0).unwrap(), meta).unwrap();
        let m = frst_marginal(&tf).unwrap();
        // rectangle sum: 5 samples * 0.5
        assert!((m.values()[0] - c * 2.5).norm() < 1e-15);
    }

    #[test]
    fn marginal_matches_frft_on_gaussian() {
        let g = UniformGrid::new(-8.0, 1.0 / 64.0, 1025).unwrap();
        let f = SampledSignal::from_real_fn(g, |t| (-std::f64::consts::PI * t * t).exp()).unwrap();
        let order = classify_order(0.8).unwrap();
        let spec = WindowSpec::new(1.0, 1.0).unwrap();
        let xi = UniformGrid::new(1.0, 0.125, 41).unwrap();
        let tf = frst_forward(&f, &order, &spec, &g, &xi, TransformMode::Fast).unwrap();
        let marginal = frst_marginal(&tf).unwrap();
        let reference = frft_direct(&f, &order, &xi).unwrap();
        for (a, b) in marginal.values().iter().zip(reference.values()) {
            assert!((a - b).norm() < 1e-3);
        }
    }
}
