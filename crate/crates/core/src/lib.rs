//! Fractional Fourier transform, S-transform and fractional S-transform
//! (FRST), with discrete BMO / Hardy / weighted norm estimators and a
//! harness that checks the transforms' norm bounds numerically.
//!
//! Everything is generic over the sample scalar ([`scalar::Scalar`], `f32`
//! or `f64`); the aliases below fix it to `f64` (and `f32` with a `32`
//! suffix).

pub mod convolution;
pub mod error;
pub mod frft;
pub mod frst;
pub mod function_spaces;
pub mod inequality_lab;
pub mod model;
pub mod scalar;
pub mod windows;

pub use error::{Error, Result};
pub use frft::TransformMode;
pub use model::{Branch, Interval, IntervalFamily, RowMeta};

pub type Grid = model::UniformGrid<f64>;
pub type Signal = model::SampledSignal<f64>;
pub type FrftSpectrum = model::Spectrum<f64>;
pub type Order = model::FractionalOrder<f64>;
pub type Window = model::WindowSpec<f64>;
pub type TfMatrix = model::TimeFreqMatrix<f64>;
pub type Weight = model::TemperedWeight<f64>;
pub type TestFn = model::TestFunction<f64>;

pub type Grid32 = model::UniformGrid<f32>;
pub type Signal32 = model::SampledSignal<f32>;
pub type FrftSpectrum32 = model::Spectrum<f32>;
pub type Order32 = model::FractionalOrder<f32>;
pub type Window32 = model::WindowSpec<f32>;
pub type TfMatrix32 = model::TimeFreqMatrix<f32>;
