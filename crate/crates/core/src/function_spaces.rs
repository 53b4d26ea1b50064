//! Discrete estimators for BMO, Hardy and weighted norms.
//!
//! Suprema over intervals are taken over an [`IntervalFamily`]; suprema over
//! dilation scales over an explicit scale list. Weighted and unweighted
//! estimators share one code path, so `kappa = 1` reproduces the unweighted
//! value bit for bit.

use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::convolution::LinearConvolver;
use crate::error::{Error, Result};
use crate::model::{Interval, IntervalFamily, SampledSignal, TemperedWeight, TestFunction, UniformGrid};
use crate::scalar::Scalar;

fn modulus<T: Scalar>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

fn check_family(family: &IntervalFamily, host_count: usize) -> Result<()> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if family.host_count() != host_count {
        let iv = family.intervals()[0];
        return Err(Error::BadInterval { first: iv.first, last: iv.last, count: host_count });
    }
    Ok(())
}

fn sample_mean<T: Scalar>(values: &[Complex<T>]) -> Complex<T> {
    values.iter().fold(Complex::zero(), |s, &v| s + v) / T::from_usize_lossy(values.len())
}

/// Mean of `f` over the interval: `(1/|I|) sum f(t_i) dt` with
/// `|I| = count * dt`, i.e. the arithmetic mean of the samples.
pub fn interval_mean<T: Scalar>(f: &SampledSignal<T>, interval: Interval) -> Result<Complex<T>> {
    interval.validate(f.len())?;
    Ok(sample_mean(&f.values()[interval.first..=interval.last]))
}

/// Largest weighted mean oscillation `sum |v_i - v_I| w_i / sum w_i` over
/// the family, with `v_I` the plain sample mean.
fn max_oscillation<T: Scalar>(values: &[Complex<T>], weights: &[T], family: &IntervalFamily) -> T {
    family
        .intervals()
        .par_iter()
        .map(|iv| {
            let v = &values[iv.first..=iv.last];
            let w = &weights[iv.first..=iv.last];
            let mean = sample_mean(v);
            let mut dev = T::zero();
            let mut mass = T::zero();
            for (&x, &k) in v.iter().zip(w) {
                dev = dev + modulus(x - mean) * k;
                mass = mass + k;
            }
            dev / mass
        })
        .reduce(T::zero, |a, b| a.max(b))
}

/// BMO seminorm estimate: the largest mean oscillation
/// `(1/|I|) sum_{i in I} |f(t_i) - f_I| dt` over the family.
pub fn bmo_norm<T: Scalar>(f: &SampledSignal<T>, family: &IntervalFamily) -> Result<T> {
    check_family(family, f.len())?;
    Ok(max_oscillation(f.values(), &vec![T::one(); f.len()], family))
}

/// Mean bound `m`: the largest interval mean of `|f|` over the family.
pub fn mean_bound_m<T: Scalar>(f: &SampledSignal<T>, family: &IntervalFamily) -> Result<T> {
    check_family(family, f.len())?;
    let abs: Vec<T> = f.values().iter().map(|&v| modulus(v)).collect();
    Ok(family
        .intervals()
        .par_iter()
        .map(|iv| {
            let s = abs[iv.first..=iv.last].iter().fold(T::zero(), |s, &x| s + x);
            s / T::from_usize_lossy(iv.len())
        })
        .reduce(T::zero, |a, b| a.max(b)))
}

/// Geometric scale ladder `2 dt * 2^(j/2)`, `j = 0, 1, ...`, up to the span
/// of the grid.
pub fn default_scales<T: Scalar>(grid: &UniformGrid<T>) -> Vec<T> {
    let first = grid.step() + grid.step();
    let mut scales = Vec::new();
    let mut j = 0i32;
    loop {
        let t = first * T::lit(2f64.powf(f64::from(j) / 2.0));
        if t > grid.span() && !scales.is_empty() {
            break;
        }
        scales.push(t);
        j += 1;
    }
    scales
}

/// Maximal function `max_t |(f * phi_t)(x)|` on the grid of `f`, with
/// `phi_t(y) = phi(y / t) / t` and `f` extended by zero. Each convolution is
/// the midpoint rule on the sample grid.
pub fn maximal_function<T: Scalar>(
    f: &SampledSignal<T>,
    phi: &TestFunction<T>,
    scales: &[T],
) -> Result<SampledSignal<T>> {
    if scales.is_empty() {
        return Err(Error::Config("scale list is empty".into()));
    }
    let dt = f.grid().step();
    for &t in scales {
        if !(t >= dt + dt) {
            return Err(Error::UnresolvableScale { scale: t.to_f64_lossy(), step: dt.to_f64_lossy() });
        }
    }
    let n = f.len();
    // kernel[m] = phi_t((m - (n - 1)) dt) dt covers every lag x_j - t_i
    let conv = LinearConvolver::new(n, 2 * n - 1);
    let f_hat = conv.spectrum(f.values());
    let per_scale: Vec<Vec<T>> = scales
        .par_iter()
        .map(|&t| {
            let kernel: Vec<Complex<T>> = (0..2 * n - 1)
                .map(|m| {
                    let lag = (T::from_usize_lossy(m) - T::from_usize_lossy(n - 1)) * dt;
                    Complex::new(phi.dilated(t, lag) * dt, T::zero())
                })
                .collect();
            let full = conv.convolve_spectra(&f_hat, &conv.spectrum(&kernel));
            full[n - 1..2 * n - 1].iter().map(|&v| modulus(v)).collect()
        })
        .collect();
    let values = (0..n)
        .map(|j| {
            let m = per_scale.iter().fold(T::zero(), |m, row| m.max(row[j]));
            Complex::new(m, T::zero())
        })
        .collect();
    SampledSignal::new(*f.grid(), values)
}

fn weighted_sum<T: Scalar>(values: &SampledSignal<T>, weights: &[T]) -> T {
    values.values().iter().zip(weights).fold(T::zero(), |s, (v, &k)| s + v.re * k) * values.grid().step()
}

/// Hardy norm estimate `sum_x M f(x) dx`.
pub fn hardy_norm<T: Scalar>(f: &SampledSignal<T>, phi: &TestFunction<T>, scales: &[T]) -> Result<T> {
    let m = maximal_function(f, phi, scales)?;
    Ok(weighted_sum(&m, &vec![T::one(); f.len()]))
}

/// Outcome of [`tempered_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperedReport {
    pub pass: bool,
    pub worst_ratio: f64,
}

/// Checks `kappa(xi + eta) <= (1 + C|xi|)^N kappa(eta)` on every sample pair
/// and reports the largest ratio of the two sides.
pub fn tempered_check<T: Scalar>(w: &TemperedWeight<T>, xi_samples: &[T], eta_samples: &[T]) -> Result<TemperedReport> {
    if xi_samples.is_empty() || eta_samples.is_empty() {
        return Err(Error::Config("tempered_check needs nonempty sample lists".into()));
    }
    let positive = |x: T| {
        let v = w.eval(x);
        if v > T::zero() && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonpositiveWeight { name: w.name().to_string(), x: x.to_f64_lossy() })
        }
    };
    let mut worst = T::zero();
    for &eta in eta_samples {
        let base = positive(eta)?;
        for &xi in xi_samples {
            let growth = (T::one() + w.c() * xi.abs()).powf(w.n());
            let ratio = positive(xi + eta)? / (growth * base);
            worst = worst.max(ratio);
        }
    }
    let worst_ratio = worst.to_f64_lossy();
    Ok(TemperedReport { pass: worst_ratio <= 1.0 + 1e-12, worst_ratio })
}

/// Weighted length `|I|_kappa = sum_{i in I} kappa(t_i) dt` of every
/// interval in the family.
pub fn weighted_interval_measure<T: Scalar>(
    family: &IntervalFamily,
    w: &TemperedWeight<T>,
    grid: &UniformGrid<T>,
) -> Result<Vec<T>> {
    check_family(family, grid.count())?;
    let k = w.sample(grid)?;
    Ok(family
        .intervals()
        .iter()
        .map(|iv| k[iv.first..=iv.last].iter().fold(T::zero(), |s, &x| s + x) * grid.step())
        .collect())
}

/// Weighted BMO estimate
/// `max_I (1/|I|_kappa) sum_{i in I} |f(t_i) - f_I| kappa(t_i) dt`, where
/// `f_I` is the unweighted mean.
pub fn bmo_kappa_norm<T: Scalar>(f: &SampledSignal<T>, w: &TemperedWeight<T>, family: &IntervalFamily) -> Result<T> {
    check_family(family, f.len())?;
    let k = w.sample(f.grid())?;
    Ok(max_oscillation(f.values(), &k, family))
}

/// Weighted Hardy estimate `sum_x M f(x) kappa(x) dx`.
pub fn hardy_kappa_norm<T: Scalar>(
    f: &SampledSignal<T>,
    phi: &TestFunction<T>,
    scales: &[T],
    w: &TemperedWeight<T>,
) -> Result<T> {
    let k = w.sample(f.grid())?;
    let m = maximal_function(f, phi, scales)?;
    Ok(weighted_sum(&m, &k))
}

/// Weighted Lebesgue norm `(sum |f(t_i)|^p kappa(t_i) dt)^(1/p)`.
pub fn lp_kappa_norm<T: Scalar>(f: &SampledSignal<T>, p: T, w: &TemperedWeight<T>) -> Result<T> {
    if !(p >= T::one() && p.is_finite()) {
        return Err(Error::BadExponent(p.to_f64_lossy()));
    }
    let k = w.sample(f.grid())?;
    let s = f
        .values()
        .iter()
        .zip(&k)
        .fold(T::zero(), |s, (&v, &kv)| s + modulus(v).powf(p) * kv)
        * f.grid().step();
    Ok(s.powf(p.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::all_intervals;
    use proptest::prelude::*;

    fn sym_grid(n: usize) -> UniformGrid<f64> {
        UniformGrid::new(-1.0 + 1.0 / n as f64, 2.0 / n as f64, n).unwrap()
    }

    fn step_signal(n: usize) -> SampledSignal<f64> {
        SampledSignal::from_real_fn(sym_grid(n), |t| if t >= 0.0 { 1.0 } else { 0.0 }).unwrap()
    }

    fn brute_bmo(v: &[Complex<f64>], w: &[f64]) -> f64 {
        let n = v.len();
        let mut best = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                let mean: Complex<f64> = v[a..=b].iter().sum::<Complex<f64>>() / (b - a + 1) as f64;
                let dev: f64 = (a..=b).map(|i| (v[i] - mean).norm() * w[i]).sum();
                let mass: f64 = w[a..=b].iter().sum();
                best = best.max(dev / mass);
            }
        }
        best
    }

    #[test]
    fn interval_means() {
        let g = UniformGrid::new(0.0, 1.0, 4).unwrap();
        let f = SampledSignal::from_real(g, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(interval_mean(&f, Interval { first: 0, last: 3 }).unwrap().re, 2.5);
        let odd = SampledSignal::from_real_fn(sym_grid(10), |t| t).unwrap();
        assert!(interval_mean(&odd, Interval { first: 0, last: 9 }).unwrap().norm() < 1e-15);
        assert!(matches!(interval_mean(&f, Interval { first: 2, last: 4 }), Err(Error::BadInterval { .. })));
    }

    #[test]
    fn step_bmo_and_mean_bound() {
        let f = step_signal(64);
        let fam = all_intervals(64, 100_000);
        let bmo = bmo_norm(&f, &fam).unwrap();
        assert!((bmo - 0.5).abs() < 2.0 / 64.0);
        assert!((bmo - brute_bmo(f.values(), &[1.0; 64])).abs() < 1e-14);
        assert_eq!(mean_bound_m(&f, &fam).unwrap(), 1.0);
        let zero = SampledSignal::zeros(sym_grid(64));
        assert_eq!(bmo_norm(&zero, &fam).unwrap(), 0.0);
        assert_eq!(mean_bound_m(&zero, &fam).unwrap(), 0.0);
        let empty = IntervalFamily::new(vec![], 64).unwrap();
        assert!(matches!(bmo_norm(&f, &empty), Err(Error::EmptyFamily)));
    }

    #[test]
    fn weighted_step_matches_brute_force() {
        let f = step_signal(48);
        let fam = all_intervals(48, 100_000);
        let w = TemperedWeight::polynomial(1.0).unwrap();
        let k = w.sample(f.grid()).unwrap();
        let got = bmo_kappa_norm(&f, &w, &fam).unwrap();
        assert!((got - brute_bmo(f.values(), &k)).abs() < 1e-14);
        let one = TemperedWeight::constant(1.0, 1.0).unwrap();
        assert_eq!(bmo_kappa_norm(&f, &one, &fam).unwrap(), bmo_norm(&f, &fam).unwrap());
    }

    #[test]
    fn weighted_measure_examples() {
        let g = UniformGrid::<f64>::new(0.0005, 0.001, 1000).unwrap();
        let fam = IntervalFamily::new(vec![Interval { first: 0, last: 999 }], 1000).unwrap();
        let w = TemperedWeight::polynomial(1.0).unwrap();
        let m = weighted_interval_measure(&fam, &w, &g).unwrap();
        assert!((m[0] - 1.5).abs() < 1e-9);
        let one = TemperedWeight::constant(1.0, 1.0).unwrap();
        assert!((weighted_interval_measure(&fam, &one, &g).unwrap()[0] - 1.0).abs() < 1e-12);
        let bad = TemperedWeight::new("neg", 1.0, 1.0, |x: f64| x).unwrap();
        let small = all_intervals(5, 100);
        assert!(matches!(
            weighted_interval_measure(&small, &bad, &UniformGrid::new(-1.0, 0.5, 5).unwrap()),
            Err(Error::NonpositiveWeight { .. })
        ));
    }

    #[test]
    fn maximal_function_of_gaussians() {
        let g = UniformGrid::new(-12.0, 1.0 / 32.0, 769).unwrap();
        let phi = TestFunction::gaussian();
        let f = SampledSignal::from_real_fn(g, |t| phi.eval(t)).unwrap();
        let scales = default_scales(&g);
        let m = maximal_function(&f, &phi, &scales).unwrap();
        // (phi * phi_t)(0) = 1 / sqrt(2 pi (1 + t^2)), largest at the smallest scale
        let center = g.index_of(0.0).unwrap();
        let want = scales
            .iter()
            .map(|t| 1.0 / (2.0 * std::f64::consts::PI * (1.0 + t * t)).sqrt())
            .fold(0.0f64, f64::max);
        assert!((m.values()[center].re - want).abs() < 1e-9);
        assert!(m.values().iter().all(|v| v.re >= 0.0 && v.im == 0.0));
    }

    #[test]
    fn hardy_of_unit_mass_bump() {
        let g = UniformGrid::<f64>::new(-8.0, 1.0 / 32.0, 512).unwrap();
        let f = SampledSignal::from_real_fn(g, |t| (-t * t * 8.0).exp() * (8.0 / std::f64::consts::PI).sqrt()).unwrap();
        let phi = TestFunction::gaussian();
        let h = hardy_norm(&f, &phi, &default_scales(&g)).unwrap();
        assert!(h >= 1.0 - 1e-3, "{h}");
        assert_eq!(hardy_norm(&SampledSignal::zeros(g), &phi, &default_scales(&g)).unwrap(), 0.0);
        assert!(matches!(
            hardy_norm(&f, &phi, &[g.step()]),
            Err(Error::UnresolvableScale { .. })
        ));
        let one = TemperedWeight::constant(1.0, 1.0).unwrap();
        assert_eq!(hardy_kappa_norm(&f, &phi, &default_scales(&g), &one).unwrap(), h);
    }

    #[test]
    fn tempered_weights() {
        let xs: Vec<f64> = (-40..=40).map(|j| j as f64 * 0.5).collect();
        for s in [0.5, 1.0, 2.0, 3.0] {
            let w = TemperedWeight::polynomial(s).unwrap();
            let r = tempered_check(&w, &xs, &xs).unwrap();
            assert!(r.pass && r.worst_ratio <= 1.0 + 1e-12);
        }
        let one = TemperedWeight::constant(1.0, 1e-6).unwrap();
        assert!(tempered_check(&one, &xs, &xs).unwrap().worst_ratio <= 1.0);
        let gauss = TemperedWeight::new("exp(x^2)", 1.0, 4.0, |x: f64| (x * x).exp()).unwrap();
        let near: Vec<f64> = (-20..=20).map(|j| j as f64 * 0.25).collect();
        assert!(!tempered_check(&gauss, &near, &near).unwrap().pass);
    }

    #[test]
    fn lp_examples() {
        let g = UniformGrid::<f64>::new(0.0005, 0.001, 1000).unwrap();
        let one = TemperedWeight::constant(1.0, 1.0).unwrap();
        let f = SampledSignal::from_real_fn(g, |_| 1.0).unwrap();
        assert!((lp_kappa_norm(&f, 2.0, &one).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(lp_kappa_norm(&SampledSignal::zeros(g), 1.0, &one).unwrap(), 0.0);
        assert!(matches!(lp_kappa_norm(&f, 0.5, &one), Err(Error::BadExponent(_))));
    }

    #[test]
    fn dyadic_family_is_below_full() {
        let g = sym_grid(64);
        let f = SampledSignal::from_real_fn(g, |t| (5.0 * t).sin() + t * t).unwrap();
        let full = bmo_norm(&f, &all_intervals(64, 100_000)).unwrap();
        let dyadic = bmo_norm(&f, &all_intervals(64, 10)).unwrap();
        assert!(dyadic <= full);
    }

    fn signal(values: &[(f64, f64)]) -> SampledSignal<f64> {
        let g = UniformGrid::new(-2.0, 4.0 / values.len() as f64, values.len()).unwrap();
        SampledSignal::new(g, values.iter().map(|&(r, i)| Complex::new(r, i)).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn bmo_invariances(
            v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8..40),
            c in (-1.0f64..1.0, -1.0f64..1.0),
            s in -3.0f64..3.0,
        ) {
            let f = signal(&v);
            let fam = all_intervals(f.len(), 100_000);
            let base = bmo_norm(&f, &fam).unwrap();
            let shifted = f.map(|_, x| x + Complex::new(c.0, c.1)).unwrap();
            prop_assert!((bmo_norm(&shifted, &fam).unwrap() - base).abs() < 1e-12);
            let scaled = f.scaled(Complex::new(s, 0.0));
            prop_assert!((bmo_norm(&scaled, &fam).unwrap() - s.abs() * base).abs() < 1e-12);
            let m = mean_bound_m(&f, &fam).unwrap();
            prop_assert!(base <= 2.0 * m + 1e-12);
            prop_assert!(m <= f.max_abs() + 1e-12);
            let w = TemperedWeight::polynomial(1.5).unwrap();
            let wb = bmo_kappa_norm(&f, &w, &fam).unwrap();
            prop_assert!((bmo_kappa_norm(&shifted, &w, &fam).unwrap() - wb).abs() < 1e-12);
            prop_assert!((bmo_kappa_norm(&scaled, &w, &fam).unwrap() - s.abs() * wb).abs() < 1e-12);
        }

        #[test]
        fn lp_triangle_and_hardy_subadditivity(
            v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16..48),
            u in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 48),
        ) {
            let f = signal(&v);
            let g = signal(&u[..v.len()]);
            let sum = f.try_add(&g).unwrap();
            let w = TemperedWeight::polynomial(1.0).unwrap();
            for p in [1.0, 2.0, 3.5] {
                let lhs = lp_kappa_norm(&sum, p, &w).unwrap();
                prop_assert!(lhs <= lp_kappa_norm(&f, p, &w).unwrap() + lp_kappa_norm(&g, p, &w).unwrap() + 1e-12);
            }
            let phi = TestFunction::gaussian();
            let scales = default_scales(f.grid());
            let hs = hardy_norm(&sum, &phi, &scales).unwrap();
            prop_assert!(hs <= hardy_norm(&f, &phi, &scales).unwrap() + hardy_norm(&g, &phi, &scales).unwrap() + 1e-12);
            let h2 = hardy_norm(&f.scaled(Complex::new(0.0, -2.0)), &phi, &scales).unwrap();
            prop_assert!((h2 - 2.0 * hardy_norm(&f, &phi, &scales).unwrap()).abs() < 1e-12);
        }
    }
}
