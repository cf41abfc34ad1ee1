//! Hilbert transform, phase splitter and Bedrosian machinery.
//!
//! [`hilbert_spectral`] treats the record as one period of a periodic signal
//! and applies `−j·sgn(ω)` bin by bin; it is exact for band-limited periodic
//! records. Records that are not periodic should be windowed first or go
//! through the FIR approximation in [`hilbert_fir`].
//!
//! Bedrosian validity is judged from an envelope bandwidth estimate: the
//! smallest `Ω` such that `[−Ω, Ω]` holds 99.9% of the envelope energy. This
//! threshold is a chosen convention, not a property of the theorem.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::{self, convolve_centered, signed_bin};
use crate::error::{Error, Result};
use crate::signals::{rms, RealWaveform, SamplingGrid, Unit};
pub use crate::signals::Window;
use crate::spectral::Spectrum;

/// Fraction of envelope energy that defines the Bedrosian bandwidth.
pub const BANDWIDTH_ENERGY_FRACTION: f64 = 0.999;

/// Complex signal `x + j·x̂` on a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticWaveform {
    grid: SamplingGrid,
    samples: Vec<Complex64>,
    source_unit: Unit,
}

impl AnalyticWaveform {
    pub fn new(grid: SamplingGrid, samples: Vec<Complex64>, source_unit: Unit) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            samples,
            source_unit,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn source_unit(&self) -> Unit {
        self.source_unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.re).collect()
    }

    pub fn imag_part(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.im).collect()
    }

    /// `|x̃(t)|`, the instantaneous amplitude.
    pub fn magnitude(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    /// Rotates every sample by `e^{jα}`.
    pub fn rotated(&self, alpha: f64) -> Self {
        let r = Complex64::from_polar(1.0, alpha);
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * r).collect(),
            source_unit: self.source_unit,
        }
    }
}

/// Spectral Hilbert transform of one period: positive bins times `−j`,
/// negative bins times `+j`, DC and Nyquist bins zeroed.
pub fn hilbert_spectral(x: &RealWaveform) -> RealWaveform {
    let n = x.len();
    let mut spec = dft::forward_real(x.samples());
    for (k, bin) in spec.iter_mut().enumerate() {
        let s = signed_bin(k, n);
        let is_nyquist = n % 2 == 0 && k == n / 2;
        *bin = if s == 0 || is_nyquist {
            Complex64::new(0.0, 0.0)
        } else if s > 0 {
            Complex64::new(bin.im, -bin.re)
        } else {
            Complex64::new(-bin.im, bin.re)
        };
    }
    dft::inverse_in_place(&mut spec);
    let samples = spec.into_iter().map(|z| z.re).collect();
    RealWaveform::new(*x.grid(), samples, x.unit()).expect("finite input gives finite output")
}

/// Phase splitter `x ↦ x + j·Hx`. The real part is the input, bit for bit.
pub fn phase_split(x: &RealWaveform) -> AnalyticWaveform {
    let quad = hilbert_spectral(x);
    let samples = x
        .samples()
        .iter()
        .zip(quad.samples())
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    AnalyticWaveform {
        grid: *x.grid(),
        samples,
        source_unit: x.unit(),
    }
}

/// Windowed ideal Hilbert transformer (type III linear phase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HilbertFirDesign {
    n_taps: usize,
    window: Window,
    coefficients: Vec<f64>,
}

impl HilbertFirDesign {
    pub fn new(n_taps: usize, window: Window) -> Result<Self> {
        if n_taps < 3 || n_taps % 2 == 0 {
            return Err(Error::InvalidTapCount(n_taps));
        }
        let center = n_taps / 2;
        let mut coefficients = vec![0.0; n_taps];
        for n in (1..=center).step_by(2) {
            let h = 2.0 / (PI * n as f64) * window.weight(center + n, n_taps);
            coefficients[center + n] = h;
            coefficients[center - n] = -h;
        }
        Ok(Self {
            n_taps,
            window,
            coefficients,
        })
    }

    pub fn n_taps(&self) -> usize {
        self.n_taps
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn group_delay(&self) -> usize {
        self.n_taps / 2
    }

    /// Zero-phase frequency response at `omega` rad/sample, centred on the
    /// middle tap. The ideal value is `−j·sgn(ω)`.
    pub fn response(&self, omega: f64) -> Complex64 {
        let center = self.group_delay() as f64;
        self.coefficients
            .iter()
            .enumerate()
            .map(|(m, &h)| h * Complex64::from_polar(1.0, -omega * (m as f64 - center)))
            .sum()
    }

    /// Gain at DC. Zero up to rounding for an odd-symmetric design.
    pub fn dc_gain(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// Coefficient list as `index,coefficient` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,coefficient\n");
        for (m, c) in self.coefficients.iter().enumerate() {
            let _ = writeln!(out, "{m},{c:.16e}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirHilbertOutput {
    pub output: RealWaveform,
    /// Samples at each end where the filter overlaps the zero padding.
    pub transient: usize,
    pub dc_gain: f64,
}

impl FirHilbertOutput {
    pub fn steady_range(&self) -> std::ops::Range<usize> {
        let n = self.output.len();
        if 2 * self.transient >= n {
            0..0
        } else {
            self.transient..n - self.transient
        }
    }
}

/// FIR Hilbert transform, group delay removed so output aligns with input.
pub fn hilbert_fir(x: &RealWaveform, design: &HilbertFirDesign) -> FirHilbertOutput {
    let samples = convolve_centered(x.samples(), design.coefficients());
    FirHilbertOutput {
        output: RealWaveform::new(*x.grid(), samples, x.unit()).expect("finite"),
        transient: design.group_delay(),
        dc_gain: design.dc_gain(),
    }
}

/// `u·Hv`: the Hilbert transform of a lowpass × highpass product taken with
/// the lowpass factor held outside.
pub fn bedrosian_hilbert(u: &RealWaveform, v: &RealWaveform) -> Result<RealWaveform> {
    u.grid().ensure_matches(v.grid())?;
    let hv = hilbert_spectral(v);
    let samples = u
        .samples()
        .iter()
        .zip(hv.samples())
        .map(|(a, b)| a * b)
        .collect();
    RealWaveform::new(*u.grid(), samples, v.unit())
}

/// RMS of `u·Hv − H(u·v)` relative to the RMS of `u·v`.
pub fn bedrosian_discrepancy(u: &RealWaveform, v: &RealWaveform) -> Result<f64> {
    let shortcut = bedrosian_hilbert(u, v)?;
    let product: Vec<f64> = u.samples().iter().zip(v.samples()).map(|(a, b)| a * b).collect();
    let product = RealWaveform::new(*u.grid(), product, v.unit())?;
    let exact = hilbert_spectral(&product);
    let diff: Vec<f64> = shortcut
        .samples()
        .iter()
        .zip(exact.samples())
        .map(|(a, b)| a - b)
        .collect();
    let scale = product.rms();
    Ok(if scale > 0.0 { rms(&diff) / scale } else { rms(&diff) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BedrosianReport {
    pub envelope_bandwidth: f64,
    pub carrier: f64,
    pub ratio: f64,
    pub valid: bool,
    pub rms_discrepancy: Option<f64>,
}

impl BedrosianReport {
    fn from_bandwidth(envelope_bandwidth: f64, carrier: f64) -> Self {
        let ratio = envelope_bandwidth / carrier;
        Self {
            envelope_bandwidth,
            carrier,
            ratio,
            valid: ratio < 1.0,
            rms_discrepancy: None,
        }
    }

    pub fn with_discrepancy(mut self, rms: f64) -> Self {
        self.rms_discrepancy = Some(rms);
        self
    }
}

pub enum EnvelopeSource<'a> {
    /// Bandwidth in rad/s stated by the caller.
    Declared(f64),
    /// Complex (or real) envelope samples at `sample_rate`.
    Measured {
        envelope: &'a [Complex64],
        sample_rate: f64,
    },
}

/// Smallest `Ω` such that `[−Ω, Ω]` contains the given fraction of the
/// envelope's energy, measured on its DFT bins.
pub fn energy_bandwidth(envelope: &[Complex64], sample_rate: f64, fraction: f64) -> f64 {
    let n = envelope.len();
    let mut spec = envelope.to_vec();
    dft::forward_in_place(&mut spec);
    let spacing = 2.0 * PI * sample_rate / n as f64;
    let mut bins: Vec<(u64, f64)> = spec
        .iter()
        .enumerate()
        .map(|(k, z)| (signed_bin(k, n).unsigned_abs(), z.norm_sqr()))
        .collect();
    let total: f64 = bins.iter().map(|b| b.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    bins.sort_by_key(|b| b.0);
    let mut acc = 0.0;
    let mut i = 0;
    while i < bins.len() {
        let idx = bins[i].0;
        while i < bins.len() && bins[i].0 == idx {
            acc += bins[i].1;
            i += 1;
        }
        if acc >= fraction * total {
            return idx as f64 * spacing;
        }
    }
    bins.last().map(|b| b.0 as f64 * spacing).unwrap_or(0.0)
}

pub fn bedrosian_check(source: EnvelopeSource<'_>, omega0: f64) -> Result<BedrosianReport> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "carrier frequency must be positive, got {omega0}"
        )));
    }
    let bandwidth = match source {
        EnvelopeSource::Declared(bw) => {
            if !(bw.is_finite() && bw >= 0.0) {
                return Err(Error::InvalidParameter(format!("declared bandwidth {bw}")));
            }
            bw
        }
        EnvelopeSource::Measured {
            envelope,
            sample_rate,
        } => {
            if envelope.is_empty() {
                return Err(Error::Empty("envelope"));
            }
            energy_bandwidth(envelope, sample_rate, BANDWIDTH_ENERGY_FRACTION)
        }
    };
    Ok(BedrosianReport::from_bandwidth(bandwidth, omega0))
}

/// One-sided spectra of `x`, `x̂` and `x̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTriplet {
    pub signal: Spectrum,
    pub hilbert: Spectrum,
    pub analytic: Spectrum,
}

pub fn spectral_representations(x: &RealWaveform) -> SpectralTriplet {
    let signal = Spectrum::from_waveform(x);
    let hilbert = signal.hilbert();
    let analytic = signal.analytic();
    SpectralTriplet {
        signal,
        hilbert,
        analytic,
    }
}
