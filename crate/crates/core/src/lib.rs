//! Analytic-signal power analysis.
//!
//! Real voltage and current are lifted to analytic signals with a phase
//! splitter, and real instantaneous power is resolved as
//! `p = ½·Re(ṽ·ĩ* + ṽ·ĩ)`: a slowly varying Hermitian power plus a
//! complementary power rotating at twice the carrier frequency. The crate
//! provides the signal generators used to exercise that decomposition, the
//! Hilbert operators, the power algebra itself, Thevenin circuit
//! interpretations, frequency-domain averages and a block-streaming meter.

pub mod error;
pub mod hilbert;
pub mod io;
pub mod meter;
pub mod power;
pub mod signals;
pub mod spectral;
pub mod thevenin;

mod dft;

pub use error::{Error, Result};
pub use hilbert::AnalyticWaveform;
pub use num_complex::Complex64;
pub use power::{PowerSeries, PowerSummary};
pub use signals::{RealWaveform, SamplingGrid, Unit};
pub use spectral::Spectrum;
