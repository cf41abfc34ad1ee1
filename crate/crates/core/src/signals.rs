//! Uniformly sampled waveforms, generators for sinusoidal, harmonic and
//! modulated test signals, and the two carrier demodulators.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft::convolve_centered;
use crate::error::{Error, Result};
use crate::hilbert::AnalyticWaveform;

/// Relative tolerance used when comparing sample rates and start times of
/// two grids that were produced independently (e.g. parsed from CSV).
const GRID_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    sample_rate: f64,
    n_samples: usize,
    t0: f64,
}

impl SamplingGrid {
    pub fn new(sample_rate: f64, n_samples: usize) -> Result<Self> {
        Self::with_start(sample_rate, n_samples, 0.0)
    }

    pub fn with_start(sample_rate: f64, n_samples: usize, t0: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "sample rate must be positive and finite, got {sample_rate}"
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidGrid("no samples".into()));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidGrid("start time is not finite".into()));
        }
        Ok(Self {
            sample_rate,
            n_samples,
            t0,
        })
    }

    /// Grid holding `periods` whole periods of a carrier at `omega0` rad/s.
    /// The sample count is rounded to the nearest integer.
    pub fn periods(sample_rate: f64, omega0: f64, periods: f64) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) || !(periods.is_finite() && periods > 0.0) {
            return Err(Error::InvalidParameter(
                "carrier frequency and period count must be positive".into(),
            ));
        }
        let n = (periods * sample_rate * 2.0 * PI / omega0).round() as usize;
        Self::new(sample_rate, n)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.n_samples == 0
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.n_samples as f64 / self.sample_rate
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.sample_rate
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_samples).map(move |k| self.time(k))
    }

    /// Highest representable angular frequency, `π·fs`.
    pub fn nyquist_omega(&self) -> f64 {
        PI * self.sample_rate
    }

    /// Spacing of the DFT bins of a record on this grid, in rad/s.
    pub fn bin_spacing(&self) -> f64 {
        2.0 * PI / self.duration()
    }

    pub fn check_nyquist(&self, omega: f64) -> Result<()> {
        let nyquist = self.nyquist_omega();
        if omega.abs() < nyquist {
            Ok(())
        } else {
            Err(Error::Nyquist { omega, nyquist })
        }
    }

    /// Sub-grid of `len` samples starting at sample `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.n_samples {
            return Err(Error::LengthMismatch {
                expected: self.n_samples,
                found: start + len,
            });
        }
        Self::with_start(self.sample_rate, len, self.time(start))
    }

    pub fn matches(&self, other: &SamplingGrid) -> bool {
        let rate_ok = (self.sample_rate - other.sample_rate).abs()
            <= GRID_MATCH_TOL * self.sample_rate.max(other.sample_rate);
        let t0_ok = (self.t0 - other.t0).abs() <= GRID_MATCH_TOL * self.dt();
        rate_ok && t0_ok && self.n_samples == other.n_samples
    }

    pub fn ensure_matches(&self, other: &SamplingGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Volt,
    Ampere,
    Watt,
    Dimensionless,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealWaveform {
    grid: SamplingGrid,
    samples: Vec<f64>,
    unit: Unit,
}

impl RealWaveform {
    pub fn new(grid: SamplingGrid, samples: Vec<f64>, unit: Unit) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: samples.len(),
            });
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid,
            samples,
            unit,
        })
    }

    pub fn zeros(grid: SamplingGrid, unit: Unit) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.len()],
            unit,
        }
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.unit = unit;
        self
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn rms(&self) -> f64 {
        rms(&self.samples)
    }

    /// Samples `start..start + len` as a waveform on the matching sub-grid.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self> {
        let grid = self.grid.slice(start, len)?;
        Ok(Self {
            grid,
            samples: self.samples[start..start + len].to_vec(),
            unit: self.unit,
        })
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// `amplitude·cos(omega0·t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinusoidSpec {
    pub amplitude: f64,
    pub phase: f64,
    pub omega0: f64,
}

impl SinusoidSpec {
    pub fn new(amplitude: f64, phase: f64, omega0: f64) -> Result<Self> {
        let spec = Self {
            amplitude,
            phase,
            omega0,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be finite and non-negative, got {}",
                self.amplitude
            )));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidParameter("phase is not finite".into()));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {}",
                self.omega0
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn value_at(&self, t: f64) -> f64 {
        self.amplitude * (self.omega0 * t + self.phase).cos()
    }

    /// Stationary phasor `amplitude·e^{j·phase}`.
    pub fn phasor(&self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub index: u32,
    pub amplitude: f64,
    pub phase: f64,
}

/// Real periodic signal `Σ A_m·cos(m·ω₀·t + θ_m)` over distinct harmonic
/// indices `m ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicSpec {
    pub omega0: f64,
    terms: Vec<HarmonicTerm>,
}

impl HarmonicSpec {
    pub fn new(omega0: f64, terms: Vec<HarmonicTerm>) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "carrier frequency must be positive, got {omega0}"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for term in &terms {
            if term.index == 0 {
                return Err(Error::InvalidParameter("harmonic index must be >= 1".into()));
            }
            if !seen.insert(term.index) {
                return Err(Error::DuplicateHarmonic(term.index));
            }
            if !(term.amplitude.is_finite() && term.amplitude >= 0.0) || !term.phase.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "harmonic {} has an invalid amplitude or phase",
                    term.index
                )));
            }
        }
        Ok(Self { omega0, terms })
    }

    pub fn terms(&self) -> &[HarmonicTerm] {
        &self.terms
    }

    pub fn highest_omega(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.index as f64 * self.omega0)
            .fold(0.0, f64::max)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.amplitude * (term.index as f64 * self.omega0 * t + term.phase).cos())
            .sum()
    }

    /// Analytic signal `Σ A_m·e^{j(m·ω₀·t + θ_m)}`.
    pub fn analytic_at(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|term| {
                Complex64::from_polar(
                    term.amplitude,
                    term.index as f64 * self.omega0 * t + term.phase,
                )
            })
            .sum()
    }

    pub fn amplitude_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude).sum()
    }
}

/// Carrier at `omega0` with amplitude and phase modulation tabulated on the
/// sampling grid: `A(t_k)·cos(ω₀·t_k + θ(t_k))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedSpec {
    pub omega0: f64,
    pub envelope: Vec<f64>,
    pub phase_mod: Vec<f64>,
    /// Declared bandwidth of `A(t)·e^{jθ(t)}` in rad/s.
    pub envelope_bandwidth: f64,
}

impl ModulatedSpec {
    /// Tabulates the envelope and phase callables on `grid`.
    pub fn from_fn(
        omega0: f64,
        grid: &SamplingGrid,
        envelope: impl Fn(f64) -> f64,
        phase_mod: impl Fn(f64) -> f64,
        envelope_bandwidth: f64,
    ) -> Self {
        Self {
            omega0,
            envelope: grid.times().map(&envelope).collect(),
            phase_mod: grid.times().map(&phase_mod).collect(),
            envelope_bandwidth,
        }
    }

    /// Complex envelope `A(t)·e^{jθ(t)}` on the tabulation grid.
    pub fn complex_envelope(&self) -> Vec<Complex64> {
        self.envelope
            .iter()
            .zip(&self.phase_mod)
            .map(|(&a, &th)| Complex64::from_polar(a, th))
            .collect()
    }

    pub fn bedrosian_valid_declared(&self) -> bool {
        self.envelope_bandwidth < self.omega0
    }
}

pub fn gen_sinusoid(spec: &SinusoidSpec, grid: &SamplingGrid, unit: Unit) -> Result<RealWaveform> {
    spec.validate()?;
    grid.check_nyquist(spec.omega0)?;
    let samples = grid.times().map(|t| spec.value_at(t)).collect();
    RealWaveform::new(*grid, samples, unit)
}

pub fn gen_harmonic(spec: &HarmonicSpec, grid: &SamplingGrid, unit: Unit) -> Result<RealWaveform> {
    grid.check_nyquist(spec.highest_omega())?;
    let samples = grid.times().map(|t| spec.value_at(t)).collect();
    RealWaveform::new(*grid, samples, unit)
}

pub fn gen_modulated(spec: &ModulatedSpec, grid: &SamplingGrid, unit: Unit) -> Result<RealWaveform> {
    for table in [&spec.envelope, &spec.phase_mod] {
        if table.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: table.len(),
            });
        }
    }
    if let Some(index) = spec
        .envelope
        .iter()
        .zip(&spec.phase_mod)
        .position(|(a, th)| !a.is_finite() || !th.is_finite())
    {
        return Err(Error::NonFinite { index });
    }
    grid.check_nyquist(spec.omega0)?;
    let samples = grid
        .times()
        .zip(spec.envelope.iter().zip(&spec.phase_mod))
        .map(|(t, (&a, &th))| a * (spec.omega0 * t + th).cos())
        .collect();
    RealWaveform::new(*grid, samples, unit)
}

/// Shifts an analytic signal to baseband: `x̃(t_k)·e^{−jω₀t_k}`.
pub fn complex_demodulate(x: &AnalyticWaveform, omega0: f64) -> Vec<Complex64> {
    let grid = x.grid();
    x.samples()
        .iter()
        .enumerate()
        .map(|(k, &z)| z * Complex64::from_polar(1.0, -omega0 * grid.time(k)))
        .collect()
}

/// Linear-phase lowpass FIR (Blackman-windowed sinc) with unit DC gain.
#[derive(Debug, Clone, PartialEq)]
pub struct LowpassDesign {
    cutoff: f64,
    coefficients: Vec<f64>,
}

impl LowpassDesign {
    /// `cutoff` in rad/s; `n_taps` must be odd.
    pub fn new(cutoff: f64, n_taps: usize, sample_rate: f64) -> Result<Self> {
        if n_taps < 3 || n_taps % 2 == 0 {
            return Err(Error::InvalidTapCount(n_taps));
        }
        if !(cutoff.is_finite() && cutoff > 0.0 && cutoff < PI * sample_rate) {
            return Err(Error::InvalidParameter(format!(
                "lowpass cutoff {cutoff} rad/s outside (0, π·fs)"
            )));
        }
        let wc = cutoff / sample_rate; // rad/sample
        let half = (n_taps / 2) as isize;
        let mut coefficients: Vec<f64> = (0..n_taps)
            .map(|m| {
                let n = m as isize - half;
                let ideal = if n == 0 {
                    wc / PI
                } else {
                    (wc * n as f64).sin() / (PI * n as f64)
                };
                ideal * Window::Blackman.weight(m, n_taps)
            })
            .collect();
        let gain: f64 = coefficients.iter().sum();
        for c in &mut coefficients {
            *c /= gain;
        }
        Ok(Self {
            cutoff,
            coefficients,
        })
    }

    /// Design for a carrier at `omega0`: cutoff at the carrier, length chosen
    /// so the Blackman transition band ends before `2·ω₀ − ω₀·0.1`.
    pub fn for_carrier(omega0: f64, sample_rate: f64) -> Result<Self> {
        let transition = 0.9 * omega0 / (2.0 * PI * sample_rate); // cycles/sample
        let mut n_taps = (5.5 / transition).ceil() as usize;
        if n_taps % 2 == 0 {
            n_taps += 1;
        }
        // Centred below the carrier so the 2ω₀ image falls in the stopband.
        Self::new(0.95 * omega0, n_taps.max(3), sample_rate)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn n_taps(&self) -> usize {
        self.coefficients.len()
    }

    /// Samples at each end of a filtered record that see the zero padding.
    pub fn transient_len(&self) -> usize {
        self.coefficients.len() / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hamming,
    Blackman,
}

impl Window {
    pub(crate) fn weight(self, m: usize, len: usize) -> f64 {
        if len <= 1 {
            return 1.0;
        }
        let x = 2.0 * PI * m as f64 / (len - 1) as f64;
        match self {
            Window::Rectangular => 1.0,
            Window::Hamming => 0.54 - 0.46 * x.cos(),
            Window::Blackman => 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureOutput {
    /// `I − jQ` per sample; matches `complex_demodulate ∘ phase_split`
    /// outside the transient regions.
    pub envelope: Vec<Complex64>,
    /// Samples at each end affected by the filter start-up.
    pub transient: usize,
}

impl QuadratureOutput {
    /// Envelope samples clear of the filter transients at both ends.
    pub fn steady(&self) -> &[Complex64] {
        let n = self.envelope.len();
        if 2 * self.transient >= n {
            return &[];
        }
        &self.envelope[self.transient..n - self.transient]
    }
}

/// Mixes with `2cos(ω₀t)` and `2sin(ω₀t)` and lowpass filters each channel.
pub fn quadrature_demodulate(
    x: &RealWaveform,
    omega0: f64,
    lowpass: &LowpassDesign,
) -> Result<QuadratureOutput> {
    if lowpass.cutoff() >= omega0 {
        return Err(Error::CutoffTooHigh {
            cutoff: lowpass.cutoff(),
            omega0,
        });
    }
    let grid = x.grid();
    let (mut in_phase, mut quadrature) = (Vec::with_capacity(x.len()), Vec::with_capacity(x.len()));
    for (k, &s) in x.samples().iter().enumerate() {
        let (sin, cos) = (omega0 * grid.time(k)).sin_cos();
        in_phase.push(2.0 * s * cos);
        quadrature.push(2.0 * s * sin);
    }
    let i_ch = convolve_centered(&in_phase, lowpass.coefficients());
    let q_ch = convolve_centered(&quadrature, lowpass.coefficients());
    let envelope = i_ch
        .into_iter()
        .zip(q_ch)
        .map(|(i, q)| Complex64::new(i, -q))
        .collect();
    Ok(QuadratureOutput {
        envelope,
        transient: lowpass.transient_len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::phase_split;
    use approx::assert_relative_eq;

    fn omega60() -> f64 {
        2.0 * PI * 60.0
    }

    #[test]
    fn sinusoid_full_period() {
        let grid = SamplingGrid::new(19_200.0, 320).unwrap();
        let spec = SinusoidSpec::new(1.0, 0.0, omega60()).unwrap();
        let w = gen_sinusoid(&spec, &grid, Unit::Volt).unwrap();
        assert_eq!(w.len(), 320);
        assert_eq!(w.samples()[0], 1.0);
        assert_relative_eq!(w.samples()[160], -1.0, epsilon = 1e-12);
        assert!(w.mean().abs() < 1e-12);
    }

    #[test]
    fn zero_amplitude_is_silent() {
        let grid = SamplingGrid::new(1000.0, 64).unwrap();
        let spec = SinusoidSpec::new(0.0, 1.234, 2.0 * PI * 50.0).unwrap();
        let w = gen_sinusoid(&spec, &grid, Unit::Volt).unwrap();
        assert!(w.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn sinusoid_value_at_origin() {
        let grid = SamplingGrid::new(10_000.0, 16).unwrap();
        let spec = SinusoidSpec::new(2.0, PI / 4.0, 2.0 * PI * 50.0).unwrap();
        let w = gen_sinusoid(&spec, &grid, Unit::Volt).unwrap();
        assert_relative_eq!(w.samples()[0], 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(w.samples()[0], 2.0 * (PI / 4.0).cos(), epsilon = 0.0);
    }

    #[test]
    fn nyquist_violation_rejected() {
        let grid = SamplingGrid::new(100.0, 100).unwrap();
        let spec = SinusoidSpec::new(1.0, 0.0, 2.0 * PI * 50.0).unwrap();
        assert!(matches!(
            gen_sinusoid(&spec, &grid, Unit::Volt),
            Err(Error::Nyquist { .. })
        ));
        let harm = HarmonicSpec::new(
            2.0 * PI * 20.0,
            vec![HarmonicTerm { index: 3, amplitude: 1.0, phase: 0.0 }],
        )
        .unwrap();
        assert!(gen_harmonic(&harm, &grid, Unit::Volt).is_err());
    }

    #[test]
    fn harmonic_degenerate_cases() {
        let grid = SamplingGrid::periods(19_200.0, omega60(), 2.0).unwrap();
        let single = HarmonicSpec::new(
            omega60(),
            vec![HarmonicTerm { index: 1, amplitude: 1.0, phase: 0.0 }],
        )
        .unwrap();
        let sine = SinusoidSpec::new(1.0, 0.0, omega60()).unwrap();
        assert_eq!(
            gen_harmonic(&single, &grid, Unit::Volt).unwrap().samples(),
            gen_sinusoid(&sine, &grid, Unit::Volt).unwrap().samples()
        );
        let empty = HarmonicSpec::new(omega60(), vec![]).unwrap();
        let w = gen_harmonic(&empty, &grid, Unit::Volt).unwrap();
        assert!(w.samples().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn harmonic_value_at_origin() {
        let grid = SamplingGrid::new(19_200.0, 8).unwrap();
        let spec = HarmonicSpec::new(
            omega60(),
            vec![
                HarmonicTerm { index: 1, amplitude: 1.0, phase: 0.0 },
                HarmonicTerm { index: 3, amplitude: 0.2, phase: PI / 6.0 },
            ],
        )
        .unwrap();
        let w = gen_harmonic(&spec, &grid, Unit::Volt).unwrap();
        let oracle = 1.0 + 0.2 * (PI / 6.0).cos();
        assert_relative_eq!(w.samples()[0], oracle, epsilon = 1e-15);
        assert_relative_eq!(w.samples()[0], 1.17321, epsilon = 1e-5);
    }

    #[test]
    fn duplicate_harmonics_rejected() {
        let t = HarmonicTerm { index: 2, amplitude: 1.0, phase: 0.0 };
        assert!(matches!(
            HarmonicSpec::new(1.0, vec![t, t]),
            Err(Error::DuplicateHarmonic(2))
        ));
    }

    #[test]
    fn constant_modulation_is_a_sinusoid() {
        let grid = SamplingGrid::periods(19_200.0, omega60(), 3.0).unwrap();
        let spec = ModulatedSpec::from_fn(omega60(), &grid, |_| 1.5, |_| 0.3, 0.0);
        let sine = SinusoidSpec::new(1.5, 0.3, omega60()).unwrap();
        let a = gen_modulated(&spec, &grid, Unit::Volt).unwrap();
        let b = gen_sinusoid(&sine, &grid, Unit::Volt).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn am_tone_samples_match_scalar_formula() {
        let w0 = omega60();
        let wm = 0.05 * w0;
        let grid = SamplingGrid::periods(19_200.0, w0, 20.0).unwrap();
        let spec = ModulatedSpec::from_fn(w0, &grid, |t| 1.0 + 0.5 * (wm * t).cos(), |_| 0.0, wm);
        let w = gen_modulated(&spec, &grid, Unit::Volt).unwrap();
        for k in [0, 17, 1234, grid.len() - 1] {
            let t = grid.time(k);
            let oracle = (1.0 + 0.5 * (wm * t).cos()) * (w0 * t).cos();
            assert_relative_eq!(w.samples()[k], oracle, epsilon = 1e-14);
        }
        assert!(w.samples().iter().all(|x| x.abs() <= 1.5 + 1e-12));
    }

    #[test]
    fn modulated_rejects_non_finite_tables() {
        let grid = SamplingGrid::new(1000.0, 4).unwrap();
        let spec = ModulatedSpec {
            omega0: 10.0,
            envelope: vec![1.0, f64::NAN, 1.0, 1.0],
            phase_mod: vec![0.0; 4],
            envelope_bandwidth: 0.0,
        };
        assert!(matches!(
            gen_modulated(&spec, &grid, Unit::Volt),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn linear_phase_shifts_instantaneous_frequency() {
        let w0 = omega60();
        // β is an integer number of cycles over the record so the analytic
        // signal stays periodic.
        let grid = SamplingGrid::periods(19_200.0, w0, 10.0).unwrap();
        let beta = 2.0 * PI * 3.0 / grid.duration();
        let spec = ModulatedSpec::from_fn(w0, &grid, |_| 1.0, |t| beta * t, 0.0);
        let x = gen_modulated(&spec, &grid, Unit::Volt).unwrap();
        let analytic = phase_split(&x);
        // Finite difference of the unwrapped analytic phase.
        let dt = grid.dt();
        for k in [10, 500, 2000] {
            let d = (analytic.samples()[k + 1] * analytic.samples()[k].conj()).arg();
            assert_relative_eq!(d / dt, w0 + beta, max_relative = 1e-9);
        }
    }

    #[test]
    fn demodulating_a_rotating_phasor() {
        let w0 = omega60();
        let grid = SamplingGrid::periods(19_200.0, w0, 1.0).unwrap();
        let phasor = Complex64::from_polar(2.0, 0.7);
        let samples = grid
            .times()
            .map(|t| phasor * Complex64::from_polar(1.0, w0 * t))
            .collect();
        let x = AnalyticWaveform::new(grid, samples, Unit::Volt).unwrap();
        for z in complex_demodulate(&x, w0) {
            assert!((z - phasor).norm() < 1e-12);
        }
    }

    #[test]
    fn am_envelope_recovered_by_complex_demodulation() {
        let w0 = omega60();
        let wm = 0.05 * w0;
        let grid = SamplingGrid::periods(19_200.0, w0, 20.0).unwrap();
        let spec = ModulatedSpec::from_fn(w0, &grid, |t| 1.0 + 0.5 * (wm * t).cos(), |_| 0.0, wm);
        let x = gen_modulated(&spec, &grid, Unit::Volt).unwrap();
        let env = complex_demodulate(&phase_split(&x), w0);
        let err: Vec<f64> = env
            .iter()
            .zip(&spec.envelope)
            .map(|(z, a)| (z - Complex64::new(*a, 0.0)).norm())
            .collect();
        assert!(rms(&err) < 1e-6, "rms {}", rms(&err));
    }

    #[test]
    fn quadrature_matches_phase_splitter() {
        let w0 = omega60();
        let grid = SamplingGrid::periods(19_200.0, w0, 30.0).unwrap();
        let lp = LowpassDesign::for_carrier(w0, grid.sample_rate()).unwrap();
        let spec = SinusoidSpec::new(1.0, PI / 3.0, w0).unwrap();
        let x = gen_sinusoid(&spec, &grid, Unit::Volt).unwrap();
        let q = quadrature_demodulate(&x, w0, &lp).unwrap();
        let reference = complex_demodulate(&phase_split(&x), w0);
        let t = q.transient;
        let err: Vec<f64> = q
            .steady()
            .iter()
            .zip(&reference[t..reference.len() - t])
            .map(|(a, b)| (a - b).norm())
            .collect();
        assert!(!err.is_empty());
        assert!(rms(&err) < 1e-3, "rms {}", rms(&err));
        let target = Complex64::from_polar(1.0, PI / 3.0);
        assert!((q.steady()[err.len() / 2] - target).norm() < 1e-3);
    }

    #[test]
    fn quadrature_zero_input_and_cutoff_check() {
        let w0 = omega60();
        let grid = SamplingGrid::periods(19_200.0, w0, 5.0).unwrap();
        let lp = LowpassDesign::new(0.5 * w0, 101, grid.sample_rate()).unwrap();
        let q = quadrature_demodulate(&RealWaveform::zeros(grid, Unit::Volt), w0, &lp).unwrap();
        assert!(q.envelope.iter().all(|z| z.norm() == 0.0));
        let too_high = LowpassDesign::new(1.2 * w0, 101, grid.sample_rate()).unwrap();
        assert!(matches!(
            quadrature_demodulate(&RealWaveform::zeros(grid, Unit::Volt), w0, &too_high),
            Err(Error::CutoffTooHigh { .. })
        ));
    }

    #[test]
    fn grid_period_helper() {
        let grid = SamplingGrid::periods(19_200.0, 376.99, 10.0).unwrap();
        assert_eq!(grid.len(), 3200);
        assert!(SamplingGrid::new(0.0, 3).is_err());
        assert!(SamplingGrid::new(10.0, 0).is_err());
    }
}
