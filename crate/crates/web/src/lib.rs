//! Browser bindings for three interactive views: the spinning power
//! triangle for a chosen power angle, the per-harmonic Pythagoras gap, and
//! the product-rule Hilbert discrepancy for an amplitude-modulated tone.
//!
//! Each export wraps a plain Rust function of the same name with a `_impl`
//! suffix so the numerics can be tested natively.

use std::f64::consts::PI;

use powertriad::hilbert::bedrosian_discrepancy;
use powertriad::power::{active_nonactive_split, positive_negative_split};
use powertriad::signals::{gen_harmonic, gen_sinusoid, HarmonicSpec, HarmonicTerm, SinusoidSpec};
use powertriad::spectral::broadband_pythagoras_gap;
use powertriad::{PowerSeries, PowerSummary, RealWaveform, Result, SamplingGrid, Spectrum, Unit};
use wasm_bindgen::prelude::*;

const OMEGA0: f64 = 2.0 * PI;

/// One period of `cos(ωt + Δ)·cos(ωt)` at unit amplitudes and a 1 Hz
/// carrier, broken into every curve the page draws.
#[wasm_bindgen]
pub struct Decomposition {
    t: Vec<f64>,
    p: Vec<f64>,
    active: Vec<f64>,
    nonactive: Vec<f64>,
    positive: Vec<f64>,
    negative: Vec<f64>,
    tip_re: Vec<f64>,
    tip_im: Vec<f64>,
    summary: PowerSummary,
}

#[wasm_bindgen]
impl Decomposition {
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    pub fn p(&self) -> Vec<f64> {
        self.p.clone()
    }
    pub fn active(&self) -> Vec<f64> {
        self.active.clone()
    }
    pub fn nonactive(&self) -> Vec<f64> {
        self.nonactive.clone()
    }
    pub fn positive(&self) -> Vec<f64> {
        self.positive.clone()
    }
    pub fn negative(&self) -> Vec<f64> {
        self.negative.clone()
    }
    /// Moving corner of the triangle, `½(ṽĩ* + ṽĩ)`.
    pub fn tip_re(&self) -> Vec<f64> {
        self.tip_re.clone()
    }
    pub fn tip_im(&self) -> Vec<f64> {
        self.tip_im.clone()
    }
    /// `[S, P, Q, pf, P⁺, P⁻, negative fraction]`
    pub fn summary(&self) -> Vec<f64> {
        let s = &self.summary;
        vec![
            s.apparent_s,
            s.active_p,
            s.nonactive_q,
            s.power_factor,
            s.avg_positive,
            s.avg_negative,
            s.negative_fraction,
        ]
    }
}

pub fn decompose_impl(delta: f64, samples: usize) -> Result<Decomposition> {
    let grid = SamplingGrid::new(samples as f64, samples)?;
    let v = gen_sinusoid(&SinusoidSpec::new(1.0, delta, OMEGA0)?, &grid, Unit::Volt)?;
    let i = gen_sinusoid(&SinusoidSpec::new(1.0, 0.0, OMEGA0)?, &grid, Unit::Ampere)?;
    let series = PowerSeries::from_waveforms(&v, &i)?;
    let split = active_nonactive_split(&series.hermitian, &series.complementary)?;
    let signs = positive_negative_split(&series.instantaneous);
    let tip: Vec<_> = series
        .hermitian
        .iter()
        .zip(&series.complementary)
        .map(|(h, c)| 0.5 * (h + c))
        .collect();
    Ok(Decomposition {
        t: grid.times().collect(),
        summary: PowerSummary::from_series(&series)?,
        p: series.instantaneous,
        active: split.active,
        nonactive: split.nonactive,
        positive: signs.positive,
        negative: signs.negative,
        tip_re: tip.iter().map(|z| z.re).collect(),
        tip_im: tip.iter().map(|z| z.im).collect(),
    })
}

#[wasm_bindgen]
pub fn decompose(delta: f64, samples: usize) -> std::result::Result<Decomposition, JsError> {
    decompose_impl(delta, samples).map_err(js)
}

/// Harmonic `k + 1` of the voltage has amplitude `v_amps[k]`; the current
/// harmonic has `i_amps[k]` and lags it by `lag`. Returns
/// `[(Σ S_k)², Σ S_k², gap]`.
pub fn pythagoras_gap_impl(v_amps: &[f64], i_amps: &[f64], lag: f64) -> Result<Vec<f64>> {
    if v_amps.len() != i_amps.len() || v_amps.is_empty() {
        return Err(powertriad::Error::InvalidParameter(
            "voltage and current need the same non-zero number of harmonics".into(),
        ));
    }
    let top = v_amps.len() as u32;
    let grid = SamplingGrid::new(f64::from(8 * top + 8), 8 * top as usize + 8)?;
    let terms = |amps: &[f64], phase: f64| {
        amps.iter()
            .enumerate()
            .map(|(k, &a)| HarmonicTerm { index: k as u32 + 1, amplitude: a, phase })
            .collect::<Vec<_>>()
    };
    let v = gen_harmonic(&HarmonicSpec::new(OMEGA0, terms(v_amps, 0.0))?, &grid, Unit::Volt)?;
    let i = gen_harmonic(&HarmonicSpec::new(OMEGA0, terms(i_amps, -lag))?, &grid, Unit::Ampere)?;
    let gap = broadband_pythagoras_gap(&Spectrum::from_waveform(&v), &Spectrum::from_waveform(&i))?;
    Ok(vec![gap.lhs, gap.rhs, gap.gap])
}

#[wasm_bindgen]
pub fn pythagoras_gap(v_amps: &[f64], i_amps: &[f64], lag: f64) -> std::result::Result<Vec<f64>, JsError> {
    pythagoras_gap_impl(v_amps, i_amps, lag).map_err(js)
}

/// Relative RMS error of `u·H{cos}` against `H{u·cos}` for the envelope
/// `1 + depth·cos(ratio·ω₀t)` over 20 carrier periods.
pub fn bedrosian_impl(ratio: f64, depth: f64) -> Result<f64> {
    let per_period = 64;
    let grid = SamplingGrid::new(f64::from(per_period), 20 * per_period as usize)?;
    let u: Vec<f64> = grid
        .times()
        .map(|t| 1.0 + depth * (ratio * OMEGA0 * t).cos())
        .collect();
    let u = RealWaveform::new(grid, u, Unit::Dimensionless)?;
    let carrier = gen_sinusoid(&SinusoidSpec::new(1.0, 0.0, OMEGA0)?, &grid, Unit::Volt)?;
    bedrosian_discrepancy(&u, &carrier)
}

#[wasm_bindgen]
pub fn bedrosian(ratio: f64, depth: f64) -> std::result::Result<f64, JsError> {
    bedrosian_impl(ratio, depth).map_err(js)
}

fn js(e: powertriad::Error) -> JsError {
    JsError::new(&e.to_string())
}
