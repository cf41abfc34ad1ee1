//! Hermitian, complementary and instantaneous power.
//!
//! For analytic voltage `ṽ` and current `ĩ` the Hermitian power `ṽ·ĩ*` is
//! slowly varying and the complementary power `ṽ·ĩ` rotates at twice the
//! carrier. Real instantaneous power is always `½·Re(ṽĩ* + ṽĩ)`. Writing
//! `ṽĩ = ṽĩ*·e^{jψ}` (both have magnitude `|ṽ||ĩ|`), the active part is
//! `½·Re(ṽĩ*)·(1 + cos ψ)` and the non-active part is `−½·Im(ṽĩ*)·sin ψ`;
//! for a carrier at `ω₀` with current phase `φ(t)`, `ψ = 2ω₀t + 2φ(t)`.
//!
//! All averages are time averages normalised by the window length.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{phase_split, AnalyticWaveform};
use crate::signals::{RealWaveform, SamplingGrid, Unit};

/// Samples with `p < −NEGATIVE_FLOOR·max|p|` count toward the negative-power
/// fraction; rounding noise at touching zeros does not.
pub const NEGATIVE_FLOOR: f64 = 1e-12;

pub fn instantaneous_power(v: &RealWaveform, i: &RealWaveform) -> Result<RealWaveform> {
    v.grid().ensure_matches(i.grid())?;
    check_units(v.unit(), i.unit())?;
    let p = v.samples().iter().zip(i.samples()).map(|(a, b)| a * b).collect();
    RealWaveform::new(*v.grid(), p, Unit::Watt)
}

fn check_units(v: Unit, i: Unit) -> Result<()> {
    let ok = |u: Unit, want: Unit| u == want || u == Unit::Dimensionless;
    if ok(v, Unit::Volt) && ok(i, Unit::Ampere) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "expected voltage and current, got {v:?} and {i:?}"
        )))
    }
}

/// `ṽ·ĩ*`.
pub fn hermitian_power(v: &AnalyticWaveform, i: &AnalyticWaveform) -> Result<Vec<Complex64>> {
    v.grid().ensure_matches(i.grid())?;
    Ok(v.samples().iter().zip(i.samples()).map(|(a, b)| a * b.conj()).collect())
}

/// `ṽ·ĩ`.
pub fn complementary_power(v: &AnalyticWaveform, i: &AnalyticWaveform) -> Result<Vec<Complex64>> {
    v.grid().ensure_matches(i.grid())?;
    Ok(v.samples().iter().zip(i.samples()).map(|(a, b)| a * b).collect())
}

/// `½·Re(hermitian + complementary)`.
pub fn reconstruct_instantaneous(
    hermitian: &[Complex64],
    complementary: &[Complex64],
) -> Result<Vec<f64>> {
    ensure_same_len(hermitian.len(), complementary.len())?;
    Ok(hermitian
        .iter()
        .zip(complementary)
        .map(|(h, c)| 0.5 * (h.re + c.re))
        .collect())
}

fn ensure_same_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSplit {
    pub active: Vec<f64>,
    pub nonactive: Vec<f64>,
    /// Samples where the Hermitian power vanished; there the whole
    /// instantaneous power is reported as active.
    pub degenerate: Vec<usize>,
}

pub fn active_nonactive_split(
    hermitian: &[Complex64],
    complementary: &[Complex64],
) -> Result<ActiveSplit> {
    ensure_same_len(hermitian.len(), complementary.len())?;
    let n = hermitian.len();
    let mut split = ActiveSplit {
        active: Vec::with_capacity(n),
        nonactive: Vec::with_capacity(n),
        degenerate: Vec::new(),
    };
    for (k, (&h, &c)) in hermitian.iter().zip(complementary).enumerate() {
        let mag = h.norm();
        if mag == 0.0 || c.norm() == 0.0 {
            split.active.push(0.5 * (h.re + c.re));
            split.nonactive.push(0.0);
            split.degenerate.push(k);
            continue;
        }
        // e^{jψ} = c / h, formed as c·h*/(|c||h|) to stay on the unit circle.
        let rot = c * h.conj() / (c.norm() * mag);
        split.active.push(0.5 * h.re * (1.0 + rot.re));
        split.nonactive.push(-0.5 * h.im * rot.im);
    }
    Ok(split)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignSplit {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

/// `max(p, 0)` and `min(p, 0)`.
pub fn positive_negative_split(p: &[f64]) -> SignSplit {
    SignSplit {
        positive: p.iter().map(|&x| x.max(0.0)).collect(),
        negative: p.iter().map(|&x| x.min(0.0)).collect(),
    }
}

/// Power angle folded into `(−π, π]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Average positive and negative power `(P⁺, P⁻)` of a sinusoidal pair,
/// with amplitudes `v_amp`, `i_amp` and phases `theta`, `phi`.
///
/// `P⁻ = −(VI/2)·[sin Δ/π − (Δ/π)·cos Δ]` for `Δ = |θ − φ|` folded into
/// `[0, π]`; the average depends on `Δ` only through its magnitude.
pub fn closed_form_pos_neg_averages(v_amp: f64, i_amp: f64, theta: f64, phi: f64) -> (f64, f64) {
    let s = 0.5 * v_amp * i_amp;
    let d = normalize_angle(theta - phi).abs();
    let negative = -s * (d.sin() / PI - d / PI * d.cos());
    let positive = s * d.cos() - negative;
    (positive, negative)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    grid: SamplingGrid,
    pub hermitian: Vec<Complex64>,
    pub complementary: Vec<Complex64>,
    pub instantaneous: Vec<f64>,
    pub active: Vec<f64>,
    pub nonactive: Vec<f64>,
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    pub degenerate: Vec<usize>,
}

impl PowerSeries {
    /// Assembles every component from Hermitian and complementary power.
    pub fn from_parts(
        grid: SamplingGrid,
        hermitian: Vec<Complex64>,
        complementary: Vec<Complex64>,
    ) -> Result<Self> {
        ensure_same_len(grid.len(), hermitian.len())?;
        let instantaneous = reconstruct_instantaneous(&hermitian, &complementary)?;
        let split = active_nonactive_split(&hermitian, &complementary)?;
        let signs = positive_negative_split(&instantaneous);
        Ok(Self {
            grid,
            hermitian,
            complementary,
            instantaneous,
            active: split.active,
            nonactive: split.nonactive,
            positive: signs.positive,
            negative: signs.negative,
            degenerate: split.degenerate,
        })
    }

    pub fn from_analytic(v: &AnalyticWaveform, i: &AnalyticWaveform) -> Result<Self> {
        let h = hermitian_power(v, i)?;
        let c = complementary_power(v, i)?;
        Self::from_parts(*v.grid(), h, c)
    }

    /// Phase-splits both waveforms with the spectral Hilbert transform.
    pub fn from_waveforms(v: &RealWaveform, i: &RealWaveform) -> Result<Self> {
        v.grid().ensure_matches(i.grid())?;
        check_units(v.unit(), i.unit())?;
        Self::from_analytic(&phase_split(v), &phase_split(i))
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    /// `e^{−j2ω₀t}·ṽĩ`, the complementary power shifted to baseband.
    pub fn demodulated_complementary(&self, omega0: f64) -> Vec<Complex64> {
        self.complementary
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex64::from_polar(1.0, -2.0 * omega0 * self.grid.time(k)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,p_active,p_nonactive,p_pos,p_neg,re_pH,im_pH,re_pC,im_pC\n");
        for k in 0..self.len() {
            let (h, c) = (self.hermitian[k], self.complementary[k]);
            let _ = writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.grid.time(k),
                self.instantaneous[k],
                self.active[k],
                self.nonactive[k],
                self.positive[k],
                self.negative[k],
                h.re,
                h.im,
                c.re,
                c.im
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSummary {
    #[serde(rename = "apparent_S")]
    pub apparent_s: f64,
    #[serde(rename = "active_P")]
    pub active_p: f64,
    #[serde(rename = "nonactive_Q")]
    pub nonactive_q: f64,
    pub power_angle: f64,
    pub power_factor: f64,
    pub avg_positive: f64,
    pub avg_negative: f64,
    pub negative_fraction: f64,
}

impl PowerSummary {
    /// Closed forms for `V·cos(ω₀t + θ)` and `I·cos(ω₀t + φ)`.
    pub fn sinusoidal(v_amp: f64, i_amp: f64, theta: f64, phi: f64) -> Self {
        let s = 0.5 * v_amp * i_amp;
        let angle = normalize_angle(theta - phi);
        let (avg_positive, avg_negative) = closed_form_pos_neg_averages(v_amp, i_amp, theta, phi);
        Self {
            apparent_s: s,
            active_p: s * angle.cos(),
            nonactive_q: s * angle.sin(),
            power_angle: angle,
            power_factor: if s > 0.0 { angle.cos() } else { 0.0 },
            avg_positive,
            avg_negative,
            negative_fraction: if s > 0.0 { angle.abs() / PI } else { 0.0 },
        }
    }

    /// Summary over samples `window` of `hermitian` and `instantaneous`.
    /// The window should span whole carrier periods for periodic signals.
    pub fn from_window(
        hermitian: &[Complex64],
        instantaneous: &[f64],
        window: std::ops::Range<usize>,
    ) -> Result<Self> {
        ensure_same_len(hermitian.len(), instantaneous.len())?;
        if window.is_empty() || window.end > hermitian.len() {
            return Err(Error::Empty("averaging window"));
        }
        let h = &hermitian[window.clone()];
        let p = &instantaneous[window];
        let n = h.len() as f64;
        let apparent_s = 0.5 * h.iter().map(|z| z.norm()).sum::<f64>() / n;
        let mean = h.iter().sum::<Complex64>() / n;
        let (active_p, nonactive_q) = (0.5 * mean.re, 0.5 * mean.im);
        let degenerate = active_p == 0.0 && nonactive_q == 0.0;
        let power_angle = if degenerate { 0.0 } else { nonactive_q.atan2(active_p) };
        let peak = p.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let negative_count = p.iter().filter(|&&x| x < -NEGATIVE_FLOOR * peak).count();
        Ok(Self {
            apparent_s,
            active_p,
            nonactive_q,
            power_angle,
            power_factor: if degenerate { 0.0 } else { power_angle.cos() },
            avg_positive: p.iter().map(|x| x.max(0.0)).sum::<f64>() / n,
            avg_negative: p.iter().map(|x| x.min(0.0)).sum::<f64>() / n,
            negative_fraction: negative_count as f64 / n,
        })
    }

    pub fn from_series(series: &PowerSeries) -> Result<Self> {
        Self::from_window(&series.hermitian, &series.instantaneous, 0..series.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_sinusoid, SinusoidSpec};
    use approx::assert_relative_eq;

    fn w0() -> f64 {
        2.0 * PI * 60.0
    }

    fn pair(v: f64, i: f64, theta: f64, phi: f64, periods: f64) -> (RealWaveform, RealWaveform) {
        let g = SamplingGrid::periods(19_200.0, w0(), periods).unwrap();
        (
            gen_sinusoid(&SinusoidSpec::new(v, theta, w0()).unwrap(), &g, Unit::Volt).unwrap(),
            gen_sinusoid(&SinusoidSpec::new(i, phi, w0()).unwrap(), &g, Unit::Ampere).unwrap(),
        )
    }

    #[test]
    fn in_phase_unit_pair() {
        let (v, i) = pair(1.0, 1.0, 0.0, 0.0, 1.0);
        let p = instantaneous_power(&v, &i).unwrap();
        assert_eq!(p.samples()[0], 1.0);
        for (k, t) in p.grid().times().enumerate() {
            assert_relative_eq!(p.samples()[k], 0.5 + 0.5 * (2.0 * w0() * t).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn quadrature_pair_averages_to_zero() {
        let (v, i) = pair(1.0, 1.0, PI / 2.0, 0.0, 3.0);
        assert!(instantaneous_power(&v, &i).unwrap().mean().abs() < 1e-14);
    }

    #[test]
    fn average_follows_cosine_of_power_angle() {
        let (v, i) = pair(2.0, 3.0, PI / 4.0, PI / 12.0, 4.0);
        let avg = instantaneous_power(&v, &i).unwrap().mean();
        assert_relative_eq!(avg, 3.0 * (PI / 6.0).cos(), max_relative = 1e-12);
        assert_relative_eq!(avg, 2.598_076_211_353_316, max_relative = 1e-12);
    }

    #[test]
    fn grid_and_unit_checks() {
        let (v, _) = pair(1.0, 1.0, 0.0, 0.0, 1.0);
        let (_, i) = pair(1.0, 1.0, 0.0, 0.0, 2.0);
        assert!(matches!(instantaneous_power(&v, &i), Err(Error::GridMismatch)));
        let (v, i) = pair(1.0, 1.0, 0.0, 0.0, 1.0);
        assert!(instantaneous_power(&i, &v).is_err());
    }

    #[test]
    fn hermitian_of_offset_pair_is_constant() {
        let (v, i) = pair(1.0, 1.0, PI / 3.0, 0.0, 2.0);
        let h = hermitian_power(&phase_split(&v), &phase_split(&i)).unwrap();
        let want = Complex64::from_polar(1.0, PI / 3.0);
        let spread = h.iter().map(|z| (z - want).norm()).fold(0.0, f64::max);
        assert!(spread < 1e-9);
    }

    #[test]
    fn self_hermitian_is_real_nonnegative() {
        let (v, _) = pair(1.7, 1.0, 0.4, 0.0, 1.0);
        let a = phase_split(&v);
        for z in hermitian_power(&a, &a).unwrap() {
            assert_eq!(z.im, 0.0);
            assert!(z.re >= 0.0);
        }
    }

    #[test]
    fn complementary_rotates_at_twice_carrier() {
        let (v, i) = pair(1.0, 1.0, 0.0, 0.0, 1.0);
        let (av, ai) = (phase_split(&v), phase_split(&i));
        let c = complementary_power(&av, &ai).unwrap();
        assert!((c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for (k, t) in v.grid().times().enumerate() {
            assert!((c[k] - Complex64::from_polar(1.0, 2.0 * w0() * t)).norm() < 1e-12);
        }
        let h = hermitian_power(&av, &ai).unwrap();
        for (a, b) in c.iter().zip(&h) {
            assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-14);
        }
        let zero = phase_split(&RealWaveform::zeros(*i.grid(), Unit::Ampere));
        assert!(complementary_power(&av, &zero).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn reconstruction_arithmetic() {
        let h = vec![Complex64::new(2.0, 0.0)];
        let c = vec![Complex64::new(0.0, 0.0)];
        assert_eq!(reconstruct_instantaneous(&h, &c).unwrap(), vec![1.0]);
        assert!(reconstruct_instantaneous(&h, &[]).is_err());
    }

    #[test]
    fn split_axis_cases() {
        let (v, i) = pair(1.0, 1.0, 0.3, 0.3, 2.0);
        let s = PowerSeries::from_waveforms(&v, &i).unwrap();
        assert!(s.nonactive.iter().all(|x| x.abs() < 1e-12));
        for (a, p) in s.active.iter().zip(&s.instantaneous) {
            assert_relative_eq!(a, p, epsilon = 1e-12);
            assert!(*a >= -1e-12);
        }

        let (v, i) = pair(1.0, 1.0, PI / 2.0, 0.0, 2.0);
        let s = PowerSeries::from_waveforms(&v, &i).unwrap();
        assert!(s.active.iter().all(|x| x.abs() < 1e-12));
        for (q, p) in s.nonactive.iter().zip(&s.instantaneous) {
            assert_relative_eq!(q, p, epsilon = 1e-12);
        }
    }

    #[test]
    fn split_at_origin() {
        let (v, i) = pair(1.0, 1.0, PI / 3.0, 0.0, 1.0);
        let s = PowerSeries::from_waveforms(&v, &i).unwrap();
        // ¼ + ¼·cos(0) and −(√3/4)·sin(0).
        assert_relative_eq!(s.active[0], 0.5, epsilon = 1e-12);
        assert!(s.nonactive[0].abs() < 1e-12);
        for k in 0..s.len() {
            assert_relative_eq!(s.active[k] + s.nonactive[k], s.instantaneous[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn degenerate_samples_are_flagged() {
        let h = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0)];
        let c = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, -1.0)];
        let s = active_nonactive_split(&h, &c).unwrap();
        assert_eq!(s.degenerate, vec![0]);
        assert_eq!((s.active[0], s.nonactive[0]), (0.0, 0.0));
        assert!(s.active.iter().chain(&s.nonactive).all(|x| x.is_finite()));
    }

    #[test]
    fn sign_split_cases() {
        let s = positive_negative_split(&[0.0, 1.0, 2.0]);
        assert!(s.negative.iter().all(|&x| x == 0.0));
        let p: Vec<f64> = (0..100).map(|k| (k as f64 * 0.1).cos()).collect();
        let s = positive_negative_split(&p);
        for k in 0..p.len() {
            assert_eq!(s.positive[k] + s.negative[k], p[k]);
        }
    }

    #[test]
    fn negative_fraction_tracks_power_angle() {
        let n_per_period = 4096.0;
        let g = SamplingGrid::new(n_per_period * 60.0, 4096).unwrap();
        let v = gen_sinusoid(&SinusoidSpec::new(1.0, PI / 4.0, w0()).unwrap(), &g, Unit::Volt).unwrap();
        let i = gen_sinusoid(&SinusoidSpec::new(1.0, 0.0, w0()).unwrap(), &g, Unit::Ampere).unwrap();
        let s = PowerSummary::from_series(&PowerSeries::from_waveforms(&v, &i).unwrap()).unwrap();
        assert!((s.negative_fraction - 0.25).abs() <= 2.0 / 4096.0);
    }

    #[test]
    fn closed_form_averages() {
        let (p, n) = closed_form_pos_neg_averages(1.0, 1.0, 0.0, 0.0);
        assert_eq!(n.abs(), 0.0);
        assert_relative_eq!(p, 0.5);

        let (p, n) = closed_form_pos_neg_averages(1.0, 2.0, PI / 2.0, 0.0);
        assert_relative_eq!(n, -1.0 / PI, epsilon = 1e-15);
        assert_relative_eq!(p, 1.0 / PI, epsilon = 1e-15);

        let (_, n) = closed_form_pos_neg_averages(1.0, 2.0, PI / 4.0, 0.0);
        let s = (PI / 4.0).sin();
        assert_relative_eq!(n, -(s / PI - 0.25 * s), epsilon = 1e-15);
        assert_relative_eq!(n, -0.048302, epsilon = 1e-6);

        // Sign of Δ does not matter.
        let (a, b) = closed_form_pos_neg_averages(1.0, 1.0, 0.0, 0.9);
        let (c, d) = closed_form_pos_neg_averages(1.0, 1.0, 0.9, 0.0);
        assert_relative_eq!(a, c, epsilon = 1e-15);
        assert_relative_eq!(b, d, epsilon = 1e-15);
    }

    #[test]
    fn sinusoidal_summary_triangle() {
        let s = PowerSummary::sinusoidal(1.0, 1.0, PI / 3.0, 0.0);
        assert_relative_eq!(s.apparent_s, 0.5);
        assert_relative_eq!(s.active_p, 0.25, epsilon = 1e-15);
        assert_relative_eq!(s.nonactive_q, 0.433_012_701_892_219_3, epsilon = 1e-15);
        assert_relative_eq!(s.power_factor, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s.active_p.powi(2) + s.nonactive_q.powi(2), 0.25, epsilon = 1e-15);

        let s = PowerSummary::sinusoidal(1.0, 1.0, 0.0, 0.0);
        assert_eq!((s.nonactive_q, s.power_factor), (0.0, 1.0));
        let s = PowerSummary::sinusoidal(1.0, 1.0, PI / 2.0, 0.0);
        assert!(s.active_p.abs() < 1e-16 && s.power_factor.abs() < 1e-16);
        assert_relative_eq!(s.apparent_s, s.nonactive_q);
    }

    #[test]
    fn series_summary_matches_closed_form() {
        let (v, i) = pair(1.0, 1.0, PI / 3.0, 0.0, 4.0);
        let series = PowerSeries::from_waveforms(&v, &i).unwrap();
        let got = PowerSummary::from_series(&series).unwrap();
        let want = PowerSummary::sinusoidal(1.0, 1.0, PI / 3.0, 0.0);
        assert_relative_eq!(got.apparent_s, want.apparent_s, epsilon = 1e-12);
        assert_relative_eq!(got.active_p, want.active_p, epsilon = 1e-12);
        assert_relative_eq!(got.nonactive_q, want.nonactive_q, epsilon = 1e-12);
        // Sampling the kink at the zero crossings costs a few parts in 1e-6.
        assert_relative_eq!(got.avg_negative, want.avg_negative, epsilon = 2e-5);
        assert!(PowerSummary::from_window(&series.hermitian, &series.instantaneous, 3..3).is_err());
    }

    #[test]
    fn summary_json_field_names() {
        let s = PowerSummary::sinusoidal(1.0, 1.0, 0.1, 0.0);
        let json = serde_json::to_value(s).unwrap();
        for key in [
            "apparent_S",
            "active_P",
            "nonactive_Q",
            "power_angle",
            "power_factor",
            "avg_positive",
            "avg_negative",
            "negative_fraction",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn series_csv_layout() {
        let (v, i) = pair(1.0, 1.0, 0.2, 0.0, 1.0);
        let csv = PowerSeries::from_waveforms(&v, &i).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,p,p_active,p_nonactive,p_pos,p_neg,re_pH,im_pH,re_pC,im_pC"
        );
        assert_eq!(lines.count(), v.len());
    }
}
