//! Frequency-domain averages of Hermitian, complementary and instantaneous
//! power, per-frequency power triangles and the broadband Pythagoras gap.
//!
//! Spectra are one-sided Fourier-series coefficients of a record taken as one
//! period: `x(t) = c₀ + c_{N/2}(−1)ⁿ + Σ_k 2·Re{c_k·e^{jω_k t}}`, so a unit
//! cosine has `|c| = ½`. With that scaling every average returned here is a
//! time average over the record: the Hermitian average is
//! `c₀ᵛc₀ⁱ + c_{N/2}ᵛc_{N/2}ⁱ + 4·Σ V_k·I_k*` and average power is
//! `Σ 2·A_k·B_k·cos(Θ_k − Φ_k)` plus the DC and Nyquist products.
//!
//! The literal factor-4 integrands (without the `1/T` normalisation, and
//! with the complementary term `4·V·I` added into average power) are kept in
//! [`RawSpectralAverages`] for comparison only.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dft;
use crate::error::{Error, Result};
use crate::signals::{HarmonicSpec, RealWaveform};

/// Bins whose apparent power is below this fraction of the largest bin are
/// treated as numerical noise by the triangle routines.
pub const TRIANGLE_NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    /// Values are `c_k` of a real signal (synthesis `2·Re{c_k e^{jωt}}`).
    Real,
    /// Values are the positive-frequency coefficients of an analytic signal
    /// (synthesis `Σ v_k e^{jωt}`, i.e. `2·c_k` for `x̃`).
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    n_samples: usize,
    sample_rate: f64,
    dc: f64,
    nyquist: f64,
    omega: Vec<f64>,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_waveform(x: &RealWaveform) -> Self {
        let n = x.len();
        let full = dft::forward_real(x.samples());
        let scale = 1.0 / n as f64;
        let spacing = x.grid().bin_spacing();
        let n_pos = (n - 1) / 2;
        let omega = (1..=n_pos).map(|k| k as f64 * spacing).collect();
        let values = full[1..=n_pos].iter().map(|z| z * scale).collect();
        let nyquist = if n % 2 == 0 { full[n / 2].re * scale } else { 0.0 };
        Self {
            kind: SpectrumKind::Real,
            n_samples: n,
            sample_rate: x.grid().sample_rate(),
            dc: full[0].re * scale,
            nyquist,
            omega,
            values,
        }
    }

    /// Spectrum of `x̂`: positive-frequency coefficients rotated by `−j`,
    /// DC and Nyquist removed.
    pub fn hilbert(&self) -> Self {
        assert_eq!(self.kind, SpectrumKind::Real);
        Self {
            kind: SpectrumKind::Real,
            dc: 0.0,
            nyquist: 0.0,
            values: self.values.iter().map(|c| c * Complex64::new(0.0, -1.0)).collect(),
            ..self.clone()
        }
    }

    /// Spectrum of `x̃ = x + jx̂`, i.e. `2·X(ω)·step(ω)`.
    pub fn analytic(&self) -> Self {
        assert_eq!(self.kind, SpectrumKind::Real);
        Self {
            kind: SpectrumKind::Analytic,
            values: self.values.iter().map(|c| c * 2.0).collect(),
            ..self.clone()
        }
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dc(&self) -> f64 {
        self.dc
    }

    pub fn nyquist(&self) -> f64 {
        self.nyquist
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn bin_spacing(&self) -> f64 {
        2.0 * PI * self.sample_rate / self.n_samples as f64
    }

    /// `A(ω)`.
    pub fn magnitude(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    /// `Θ(ω)`.
    pub fn phase(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.arg()).collect()
    }

    /// Positive-frequency bins whose magnitude exceeds `rel_tol` times the
    /// largest magnitude (DC and Nyquist not included).
    pub fn support(&self, rel_tol: f64) -> Vec<usize> {
        let peak = self.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return Vec::new();
        }
        (0..self.values.len())
            .filter(|&k| self.values[k].norm() > rel_tol * peak)
            .collect()
    }

    /// Inverse transform back onto `n_samples` points.
    pub fn synthesize(&self) -> Vec<Complex64> {
        let n = self.n_samples;
        let scale = n as f64;
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        full[0] = Complex64::new(self.dc * scale, 0.0);
        if n % 2 == 0 && n > 1 {
            full[n / 2] = Complex64::new(self.nyquist * scale, 0.0);
        }
        for (k, &c) in self.values.iter().enumerate() {
            let idx = k + 1;
            match self.kind {
                SpectrumKind::Real => {
                    full[idx] = c * scale;
                    full[n - idx] = c.conj() * scale;
                }
                SpectrumKind::Analytic => full[idx] = c * scale,
            }
        }
        dft::inverse_in_place(&mut full);
        full
    }

    pub fn synthesize_real(&self) -> Vec<f64> {
        self.synthesize().into_iter().map(|z| z.re).collect()
    }

    fn ensure_compatible(&self, other: &Spectrum) -> Result<()> {
        let rate_ok =
            (self.sample_rate - other.sample_rate).abs() <= 1e-9 * self.sample_rate.abs();
        if self.n_samples != other.n_samples || !rate_ok {
            return Err(Error::GridMismatch);
        }
        if self.kind != SpectrumKind::Real || other.kind != SpectrumKind::Real {
            return Err(Error::InvalidParameter(
                "power averages need real-signal spectra".into(),
            ));
        }
        Ok(())
    }
}

/// The factor-4 frequency integrals evaluated literally on the bin grid,
/// without DC or Nyquist bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawSpectralAverages {
    /// `Σ 4·V_k·I_k*`.
    pub hermitian: Complex64,
    /// `Σ 4·V_k·I_k`.
    pub complementary: Complex64,
    /// `Σ [2AB·cos(Θ−Φ) + 2AB·cos(Θ−Φ)·cos2Φ − 2AB·sin(Θ−Φ)·sin2Φ]`.
    pub instantaneous: f64,
}

/// Time averages over the record computed from spectra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralAverages {
    /// Mean of `ṽ·ĩ*`.
    pub hermitian: Complex64,
    /// Mean of `ṽ·ĩ`; only DC and Nyquist products survive.
    pub complementary: Complex64,
    /// Mean of `v·i`, `½·Re(hermitian + complementary)`.
    pub average_power: f64,
    /// Mean of the non-active (quadrature) power, `½·Im(hermitian)` over
    /// the positive bins.
    pub average_nonactive: f64,
    pub raw: RawSpectralAverages,
}

struct Bin {
    omega: f64,
    v: Complex64,
    i: Complex64,
}

fn bins<'a>(v: &'a Spectrum, i: &'a Spectrum) -> impl Iterator<Item = Bin> + 'a {
    v.omega
        .iter()
        .zip(v.values.iter().zip(&i.values))
        .map(|(&omega, (&v, &i))| Bin { omega, v, i })
}

fn averages_from_parts(
    edge_product: f64,
    lines: impl Iterator<Item = (Complex64, Complex64)>,
) -> SpectralAverages {
    let mut herm_sum = Complex64::new(0.0, 0.0);
    let mut comp_sum = Complex64::new(0.0, 0.0);
    let mut raw_inst = 0.0;
    for (v, i) in lines {
        herm_sum += v * i.conj();
        comp_sum += v * i;
        let (a, b) = (v.norm(), i.norm());
        let (theta, phi) = (v.arg(), i.arg());
        let d = theta - phi;
        raw_inst += 2.0 * a * b * d.cos() + 2.0 * a * b * d.cos() * (2.0 * phi).cos()
            - 2.0 * a * b * d.sin() * (2.0 * phi).sin();
    }
    let hermitian = Complex64::new(edge_product, 0.0) + herm_sum * 4.0;
    let complementary = Complex64::new(edge_product, 0.0);
    SpectralAverages {
        hermitian,
        complementary,
        average_power: 0.5 * (hermitian + complementary).re,
        average_nonactive: 2.0 * herm_sum.im,
        raw: RawSpectralAverages {
            hermitian: herm_sum * 4.0,
            complementary: comp_sum * 4.0,
            instantaneous: raw_inst,
        },
    }
}

pub fn avg_powers_spectral(v: &Spectrum, i: &Spectrum) -> Result<SpectralAverages> {
    v.ensure_compatible(i)?;
    let edge = v.dc * i.dc + v.nyquist * i.nyquist;
    Ok(averages_from_parts(edge, bins(v, i).map(|b| (b.v, b.i))))
}

/// Apparent, active and non-active power carried by one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPowerTriangle {
    pub omega: f64,
    pub apparent: f64,
    pub active: f64,
    pub nonactive: f64,
}

impl FrequencyPowerTriangle {
    fn from_line(omega: f64, v: Complex64, i: Complex64) -> Self {
        // 2·V·I* = 2AB·e^{j(Θ−Φ)}: time-average scale, a unit tone pair
        // gives the sinusoidal VI/2 triangle.
        let p = v * i.conj() * 2.0;
        Self {
            omega,
            apparent: p.norm(),
            active: p.re,
            nonactive: p.im,
        }
    }

    fn from_edge(omega: f64, product: f64) -> Self {
        Self {
            omega,
            apparent: product.abs(),
            active: product,
            nonactive: 0.0,
        }
    }
}

/// One triangle per bin carrying apparent power above the noise floor,
/// including DC and Nyquist bins (which are purely active).
pub fn per_frequency_triangles(v: &Spectrum, i: &Spectrum) -> Result<Vec<FrequencyPowerTriangle>> {
    v.ensure_compatible(i)?;
    let mut all = Vec::with_capacity(v.values.len() + 2);
    all.push(FrequencyPowerTriangle::from_edge(0.0, v.dc * i.dc));
    all.extend(bins(v, i).map(|b| FrequencyPowerTriangle::from_line(b.omega, b.v, b.i)));
    if v.n_samples % 2 == 0 {
        let omega = PI * v.sample_rate;
        all.push(FrequencyPowerTriangle::from_edge(omega, v.nyquist * i.nyquist));
    }
    let scale = 2.0 * peak_magnitude(v) * peak_magnitude(i);
    Ok(drop_noise(all, scale))
}

fn peak_magnitude(s: &Spectrum) -> f64 {
    s.values
        .iter()
        .map(|z| z.norm())
        .chain([s.dc.abs(), s.nyquist.abs()])
        .fold(0.0, f64::max)
}

/// Keeps bins above the floor relative to the product of the two largest
/// line magnitudes, so bins where one signal is absent drop out.
fn drop_noise(all: Vec<FrequencyPowerTriangle>, scale: f64) -> Vec<FrequencyPowerTriangle> {
    if scale == 0.0 {
        return Vec::new();
    }
    all.into_iter()
        .filter(|t| t.apparent > TRIANGLE_NOISE_FLOOR * scale)
        .collect()
}

pub fn triangles_to_csv(triangles: &[FrequencyPowerTriangle]) -> String {
    let mut out = String::from("omega,apparent,active,nonactive\n");
    for t in triangles {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            t.omega, t.apparent, t.active, t.nonactive
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PythagorasGap {
    /// `(Σ apparent)²`.
    pub lhs: f64,
    /// `Σ apparent²`, equal to `Σ active² + Σ nonactive²`.
    pub rhs: f64,
    pub gap: f64,
    pub bins: usize,
}

pub fn pythagoras_gap(triangles: &[FrequencyPowerTriangle]) -> PythagorasGap {
    let sum: f64 = triangles.iter().map(|t| t.apparent).sum();
    let rhs: f64 = triangles.iter().map(|t| t.apparent * t.apparent).sum();
    let lhs = sum * sum;
    PythagorasGap {
        lhs,
        rhs,
        gap: lhs - rhs,
        bins: triangles.len(),
    }
}

/// Square of the summed per-frequency apparent power against the sum of the
/// squares. They differ whenever two or more frequencies carry power.
pub fn broadband_pythagoras_gap(v: &Spectrum, i: &Spectrum) -> Result<PythagorasGap> {
    Ok(pythagoras_gap(&per_frequency_triangles(v, i)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheveninBin {
    pub omega: f64,
    pub impedance: Complex64,
    /// `R(ω) = |Z|·cos(Θ−Φ)`.
    pub resistance: f64,
    /// `X(ω) = |Z|·sin(Θ−Φ)`.
    pub reactance: f64,
    /// `4·Z·|I|²`.
    pub hermitian: Complex64,
    /// `4·Z·I²`.
    pub complementary: Complex64,
    /// `2R|I|² + 2R|I|²·cos2Φ − 2X|I|²·sin2Φ`.
    pub instantaneous_raw: f64,
    /// Contribution to average real power, `2R|I|²`.
    pub active: f64,
    /// Contribution to average reactive power, `2X|I|²`.
    pub nonactive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheveninSpectral {
    pub bins: Vec<TheveninBin>,
    pub average_real_power: f64,
    pub average_reactive_power: f64,
}

/// Frequency-by-frequency power for `V(ω) = Z(ω)·I(ω)`. Only the
/// positive-frequency bins are used; the current should be zero-mean.
pub fn thevenin_spectral(
    impedance: impl Fn(f64) -> Complex64,
    current: &Spectrum,
) -> TheveninSpectral {
    let bins: Vec<TheveninBin> = current
        .omega
        .iter()
        .zip(&current.values)
        .map(|(&omega, &i)| {
            let z = impedance(omega);
            let mag2 = i.norm_sqr();
            let phi = i.arg();
            let (r, x) = (z.re, z.im);
            TheveninBin {
                omega,
                impedance: z,
                resistance: r,
                reactance: x,
                hermitian: z * mag2 * 4.0,
                complementary: z * i * i * 4.0,
                instantaneous_raw: 2.0 * r * mag2 + 2.0 * r * mag2 * (2.0 * phi).cos()
                    - 2.0 * x * mag2 * (2.0 * phi).sin(),
                active: 2.0 * r * mag2,
                nonactive: 2.0 * x * mag2,
            }
        })
        .collect();
    let average_real_power = bins.iter().map(|b| b.active).sum();
    let average_reactive_power = bins.iter().map(|b| b.nonactive).sum();
    TheveninSpectral {
        bins,
        average_real_power,
        average_reactive_power,
    }
}

/// Discrete harmonic coefficients `c_n` (two-sided convention, so a term
/// `A·cos(nω₀t + θ)` has `c_n = (A/2)·e^{jθ}`). Index 0 is the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSpectrum {
    pub omega0: f64,
    lines: BTreeMap<u32, Complex64>,
}

impl LineSpectrum {
    pub fn new(omega0: f64, lines: impl IntoIterator<Item = (u32, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (n, c) in lines {
            if n == 0 && c.im != 0.0 {
                return Err(Error::InvalidParameter("mean of a real signal must be real".into()));
            }
            if map.insert(n, c).is_some() {
                return Err(Error::DuplicateHarmonic(n));
            }
        }
        Ok(Self { omega0, lines: map })
    }

    pub fn from_harmonics(spec: &HarmonicSpec) -> Self {
        let lines = spec
            .terms()
            .iter()
            .map(|t| (t.index, Complex64::from_polar(t.amplitude / 2.0, t.phase)))
            .collect();
        Self {
            omega0: spec.omega0,
            lines,
        }
    }

    pub fn get(&self, n: u32) -> Complex64 {
        self.lines.get(&n).copied().unwrap_or_default()
    }

    pub fn lines(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        self.lines.iter().map(|(&n, &c)| (n, c))
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
}

/// [`avg_powers_spectral`] with sums over harmonic lines.
pub fn line_spectra_powers(v: &LineSpectrum, i: &LineSpectrum) -> Result<SpectralAverages> {
    if (v.omega0 - i.omega0).abs() > 1e-12 * v.omega0.abs().max(i.omega0.abs()) {
        return Err(Error::InvalidParameter(format!(
            "line spectra have different fundamentals: {} vs {}",
            v.omega0, i.omega0
        )));
    }
    let edge = v.get(0).re * i.get(0).re;
    let common = v
        .lines
        .iter()
        .filter(|(&n, _)| n > 0)
        .filter_map(|(n, &cv)| i.lines.get(n).map(|&ci| (cv, ci)));
    Ok(averages_from_parts(edge, common))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{
        gen_harmonic, gen_sinusoid, HarmonicTerm, SamplingGrid, SinusoidSpec, Unit,
    };
    use approx::assert_relative_eq;

    fn w0() -> f64 {
        2.0 * PI * 50.0
    }

    fn tone(amp: f64, phase: f64, omega: f64, grid: &SamplingGrid) -> RealWaveform {
        gen_sinusoid(&SinusoidSpec::new(amp, phase, omega).unwrap(), grid, Unit::Volt).unwrap()
    }

    fn time_average(v: &RealWaveform, i: &RealWaveform) -> f64 {
        v.samples().iter().zip(i.samples()).map(|(a, b)| a * b).sum::<f64>() / v.len() as f64
    }

    #[test]
    fn unit_cosine_has_half_weight_and_round_trips() {
        let g = SamplingGrid::periods(10_000.0, w0(), 4.0).unwrap();
        let x = tone(1.0, 0.0, w0(), &g);
        let s = Spectrum::from_waveform(&x);
        assert_eq!(s.support(1e-9), vec![3]);
        assert_relative_eq!(s.magnitude()[3], 0.5, epsilon = 1e-12);
        let back = s.synthesize_real();
        let err = back.iter().zip(x.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn silent_signal_has_empty_support() {
        let g = SamplingGrid::new(1000.0, 100).unwrap();
        let s = Spectrum::from_waveform(&RealWaveform::zeros(g, Unit::Volt));
        assert!(s.support(0.0).is_empty());
    }

    #[test]
    fn single_tone_average_power() {
        let g = SamplingGrid::periods(10_000.0, w0(), 5.0).unwrap();
        let v = tone(1.0, PI / 3.0, w0(), &g);
        let i = tone(1.0, 0.0, w0(), &g);
        let avg = avg_powers_spectral(&Spectrum::from_waveform(&v), &Spectrum::from_waveform(&i))
            .unwrap();
        assert_relative_eq!(avg.average_power, 0.25, epsilon = 1e-12);
        assert_relative_eq!(avg.average_power, time_average(&v, &i), epsilon = 1e-12);
        assert_relative_eq!(avg.hermitian.re, 0.5, epsilon = 1e-12);
        assert!(avg.complementary.norm() < 1e-12);
    }

    #[test]
    fn disjoint_tones_carry_no_average_power() {
        let g = SamplingGrid::periods(10_000.0, w0(), 5.0).unwrap();
        let v = tone(1.0, 0.3, w0(), &g);
        let i = tone(2.0, -0.2, 3.0 * w0(), &g);
        let avg = avg_powers_spectral(&Spectrum::from_waveform(&v), &Spectrum::from_waveform(&i))
            .unwrap();
        assert!(avg.average_power.abs() < 1e-12);
        let tri =
            per_frequency_triangles(&Spectrum::from_waveform(&v), &Spectrum::from_waveform(&i))
                .unwrap();
        assert!(tri.is_empty());
    }

    #[test]
    fn triangle_axis_cases() {
        let g = SamplingGrid::periods(10_000.0, w0(), 5.0).unwrap();
        let v: Vec<f64> = g
            .times()
            .map(|t| (w0() * t).cos() + (2.0 * w0() * t + PI / 2.0).cos())
            .collect();
        let i: Vec<f64> = g.times().map(|t| (w0() * t).cos() + (2.0 * w0() * t).cos()).collect();
        let v = RealWaveform::new(g, v, Unit::Volt).unwrap();
        let i = RealWaveform::new(g, i, Unit::Ampere).unwrap();
        let tri =
            per_frequency_triangles(&Spectrum::from_waveform(&v), &Spectrum::from_waveform(&i))
                .unwrap();
        assert_eq!(tri.len(), 2);
        assert!(tri[0].nonactive.abs() < 1e-12);
        assert_relative_eq!(tri[0].active, 0.5, epsilon = 1e-12);
        assert!(tri[1].active.abs() < 1e-12);
        assert_relative_eq!(tri[1].nonactive, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn harmonic_pair_matches_closed_form_and_lines() {
        let g = SamplingGrid::periods(10_000.0, w0(), 2.0).unwrap();
        let vs = HarmonicSpec::new(
            w0(),
            vec![
                HarmonicTerm { index: 1, amplitude: 1.0, phase: 0.2 },
                HarmonicTerm { index: 3, amplitude: 0.3, phase: 1.1 },
                HarmonicTerm { index: 5, amplitude: 0.1, phase: -0.4 },
            ],
        )
        .unwrap();
        let is = HarmonicSpec::new(
            w0(),
            vec![
                HarmonicTerm { index: 1, amplitude: 2.0, phase: -0.3 },
                HarmonicTerm { index: 3, amplitude: 0.5, phase: 0.1 },
                HarmonicTerm { index: 7, amplitude: 0.2, phase: 0.0 },
            ],
        )
        .unwrap();
        let v = gen_harmonic(&vs, &g, Unit::Volt).unwrap();
        let i = gen_harmonic(&is, &g, Unit::Ampere).unwrap();
        let closed = 1.0 * 2.0 / 2.0 * (0.2_f64 + 0.3).cos() + 0.3 * 0.5 / 2.0 * (1.1_f64 - 0.1).cos();
        let spec =
            avg_powers_spectral(&Spectrum::from_waveform(&v), &Spectrum::from_waveform(&i)).unwrap();
        assert_relative_eq!(spec.average_power, closed, max_relative = 1e-9);
        assert_relative_eq!(spec.average_power, time_average(&v, &i), max_relative = 1e-9);
        let lines =
            line_spectra_powers(&LineSpectrum::from_harmonics(&vs), &LineSpectrum::from_harmonics(&is))
                .unwrap();
        assert!((lines.hermitian - spec.hermitian).norm() < 1e-10);
        assert!((lines.average_power - spec.average_power).abs() < 1e-10);
    }

    #[test]
    fn line_spectra_edge_cases() {
        let empty = LineSpectrum::new(1.0, []).unwrap();
        let r = line_spectra_powers(&empty, &empty).unwrap();
        assert_eq!(r.average_power, 0.0);
        assert_eq!(r.hermitian, Complex64::new(0.0, 0.0));

        let v = LineSpectrum::new(1.0, [(1, Complex64::from_polar(1.5, 0.7))]).unwrap();
        let i = LineSpectrum::new(1.0, [(1, Complex64::from_polar(0.5, 0.2))]).unwrap();
        let r = line_spectra_powers(&v, &i).unwrap();
        // Amplitudes 3 and 1: VI/2·cos(0.5).
        assert_relative_eq!(r.average_power, 1.5 * 0.5_f64.cos(), epsilon = 1e-14);

        assert!(matches!(
            LineSpectrum::new(1.0, [(2, Complex64::new(1.0, 0.0)), (2, Complex64::new(0.0, 1.0))]),
            Err(Error::DuplicateHarmonic(2))
        ));
        let other = LineSpectrum::new(2.0, []).unwrap();
        assert!(line_spectra_powers(&v, &other).is_err());
    }

    #[test]
    fn gap_for_single_and_two_equal_bins() {
        let single = [FrequencyPowerTriangle { omega: 1.0, apparent: 0.7, active: 0.7, nonactive: 0.0 }];
        assert_eq!(pythagoras_gap(&single).gap, 0.0);
        let a = 0.37;
        let two = [
            FrequencyPowerTriangle { omega: 1.0, apparent: a, active: a, nonactive: 0.0 },
            FrequencyPowerTriangle { omega: 2.0, apparent: a, active: 0.0, nonactive: a },
        ];
        let g = pythagoras_gap(&two);
        assert_relative_eq!(g.lhs, 4.0 * a * a, max_relative = 1e-15);
        assert_relative_eq!(g.rhs, 2.0 * a * a, max_relative = 1e-15);
        assert_relative_eq!(g.gap, 2.0 * a * a, max_relative = 1e-15);
    }

    #[test]
    fn thevenin_axis_cases() {
        let g = SamplingGrid::periods(10_000.0, w0(), 5.0).unwrap();
        let i = Spectrum::from_waveform(&tone(2.0_f64.sqrt(), 0.4, w0(), &g));
        let resistive = thevenin_spectral(|w| Complex64::new(1.0 + w * 1e-3, 0.0), &i);
        assert!(resistive.bins.iter().all(|b| b.nonactive == 0.0));
        let reactive = thevenin_spectral(|w| Complex64::new(0.0, w * 1e-2), &i);
        assert!(reactive.bins.iter().all(|b| b.active == 0.0));
        assert_eq!(reactive.average_real_power, 0.0);
        let rl = thevenin_spectral(|_| Complex64::new(3.0, 4.0), &i);
        assert_relative_eq!(rl.average_real_power, 3.0, max_relative = 1e-9);
        assert_relative_eq!(rl.average_reactive_power, 4.0, max_relative = 1e-9);
    }

    #[test]
    fn triangle_csv_header() {
        let csv = triangles_to_csv(&[FrequencyPowerTriangle {
            omega: 1.0,
            apparent: 2.0,
            active: 2.0,
            nonactive: 0.0,
        }]);
        assert!(csv.starts_with("omega,apparent,active,nonactive\n"));
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = Spectrum::from_waveform(&RealWaveform::zeros(SamplingGrid::new(100.0, 10).unwrap(), Unit::Volt));
        let b = Spectrum::from_waveform(&RealWaveform::zeros(SamplingGrid::new(100.0, 12).unwrap(), Unit::Volt));
        assert!(matches!(avg_powers_spectral(&a, &b), Err(Error::GridMismatch)));
    }
}
