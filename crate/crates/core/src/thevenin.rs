//! Thevenin equivalent circuits driven by a sinusoidal current source.
//!
//! With `Z = R + jX` the Hermitian power is `Z·I²` and the complementary
//! power is `Z·I²·e^{j(2ω₀t + 2φ)}`, so active power is carried by `R` and
//! non-active power by `X`. The same holds sample by sample for a
//! time-varying impedance `Z(t, ω₀)` whose bandwidth is below the carrier.
//!
//! A regulated voltage source feeding a time-varying admittance is the dual
//! case: pass the admittance as the impedance and the voltage as the source,
//! and read the returned waveforms with the roles of `v` and `i` swapped.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{bedrosian_check, BedrosianReport, EnvelopeSource};
use crate::power::{PowerSeries, PowerSummary};
use crate::signals::{gen_sinusoid, RealWaveform, SamplingGrid, SinusoidSpec, Unit};

/// Agreement required between a tabulated carrier response and the one
/// computed from the impulse response.
pub const CARRIER_CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedImpedance {
    pub resistance: f64,
    pub reactance: f64,
}

impl FixedImpedance {
    pub fn new(resistance: f64, reactance: f64) -> Self {
        Self {
            resistance,
            reactance,
        }
    }

    pub fn complex(&self) -> Complex64 {
        Complex64::new(self.resistance, self.reactance)
    }

    pub fn magnitude(&self) -> f64 {
        self.complex().norm()
    }

    fn ensure_nonzero(&self) -> Result<()> {
        let m = self.magnitude();
        if m > 0.0 && m.is_finite() {
            Ok(())
        } else {
            Err(Error::ZeroImpedance)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourcePair {
    pub voltage_spec: SinusoidSpec,
    pub v: RealWaveform,
    pub i: RealWaveform,
}

/// `V·e^{jθ} = Z·I·e^{jφ}`.
pub fn voltage_from_current_fixed(
    z: &FixedImpedance,
    current: &SinusoidSpec,
    grid: &SamplingGrid,
) -> Result<SourcePair> {
    z.ensure_nonzero()?;
    let phasor = z.complex() * current.phasor();
    let voltage_spec = SinusoidSpec::new(
        z.magnitude() * current.amplitude,
        current.phase + z.reactance.atan2(z.resistance),
        current.omega0,
    )?;
    debug_assert!((voltage_spec.phasor() - phasor).norm() <= 1e-9 * (1.0 + phasor.norm()));
    Ok(SourcePair {
        voltage_spec,
        v: gen_sinusoid(&voltage_spec, grid, Unit::Volt)?,
        i: gen_sinusoid(current, grid, Unit::Ampere)?,
    })
}

fn carrier_rotation(grid: &SamplingGrid, omega0: f64, phi: f64) -> impl Iterator<Item = Complex64> + '_ {
    grid.times()
        .map(move |t| Complex64::from_polar(1.0, 2.0 * omega0 * t + 2.0 * phi))
}

/// Power series and summary for a fixed impedance carrying
/// `i_amp·cos(ω₀t + φ)`.
pub fn power_from_impedance_fixed(
    z: &FixedImpedance,
    i_amp: f64,
    phi: f64,
    omega0: f64,
    grid: &SamplingGrid,
) -> Result<(PowerSeries, PowerSummary)> {
    z.ensure_nonzero()?;
    grid.check_nyquist(omega0)?;
    let h = z.complex() * i_amp * i_amp;
    let hermitian = vec![h; grid.len()];
    let complementary = carrier_rotation(grid, omega0, phi).map(|r| h * r).collect();
    let series = PowerSeries::from_parts(*grid, hermitian, complementary)?;
    let summary = PowerSummary::from_series(&series)?;
    Ok((series, summary))
}

/// Time-varying impulse response `z(t_k, τ_m)` on a uniform lag grid
/// `τ_m = m·lag_step`, one row per waveform sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub lag_step: f64,
    pub rows: Vec<Vec<f64>>,
}

impl ImpulseResponse {
    /// `Σ_m z(t_k, τ_m)·e^{−jωτ_m}·Δτ` for every row.
    pub fn carrier_response(&self, omega: f64) -> Vec<Complex64> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(m, &z)| {
                        z * self.lag_step * Complex64::from_polar(1.0, -omega * m as f64 * self.lag_step)
                    })
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingImpedance {
    omega0: f64,
    carrier_response: Vec<Complex64>,
    impulse_response: Option<ImpulseResponse>,
    declared_bandwidth: f64,
}

impl TimeVaryingImpedance {
    /// Tabulated `Z(t_k, ω₀)`.
    pub fn from_carrier_response(
        omega0: f64,
        carrier_response: Vec<Complex64>,
        declared_bandwidth: f64,
    ) -> Result<Self> {
        if let Some(index) = carrier_response.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            omega0,
            carrier_response,
            impulse_response: None,
            declared_bandwidth,
        })
    }

    pub fn from_impulse_response(
        omega0: f64,
        impulse_response: ImpulseResponse,
        declared_bandwidth: f64,
    ) -> Result<Self> {
        let carrier_response = impulse_response.carrier_response(omega0);
        Ok(Self {
            omega0,
            carrier_response,
            impulse_response: Some(impulse_response),
            declared_bandwidth,
        })
    }

    /// Both forms; they must agree within [`CARRIER_CONSISTENCY_TOL`].
    pub fn with_both(
        omega0: f64,
        carrier_response: Vec<Complex64>,
        impulse_response: ImpulseResponse,
        declared_bandwidth: f64,
    ) -> Result<Self> {
        let computed = impulse_response.carrier_response(omega0);
        if computed.len() != carrier_response.len() {
            return Err(Error::LengthMismatch {
                expected: carrier_response.len(),
                found: computed.len(),
            });
        }
        let worst = computed
            .iter()
            .zip(&carrier_response)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if worst > CARRIER_CONSISTENCY_TOL {
            return Err(Error::InconsistentImpedance(worst));
        }
        Ok(Self {
            omega0,
            carrier_response,
            impulse_response: Some(impulse_response),
            declared_bandwidth,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn carrier_response(&self) -> &[Complex64] {
        &self.carrier_response
    }

    pub fn impulse_response(&self) -> Option<&ImpulseResponse> {
        self.impulse_response.as_ref()
    }

    pub fn declared_bandwidth(&self) -> f64 {
        self.declared_bandwidth
    }

    pub fn bedrosian(&self) -> Result<BedrosianReport> {
        bedrosian_check(EnvelopeSource::Declared(self.declared_bandwidth), self.omega0)
    }

    fn ensure_grid(&self, grid: &SamplingGrid) -> Result<()> {
        if self.carrier_response.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                found: self.carrier_response.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvVoltage {
    /// `Re{Z(t, ω₀)·I·e^{jφ}·e^{jω₀t}}`.
    pub v_carrier: RealWaveform,
    /// `Σ_m z(t, τ_m)·i(t − τ_m)·Δτ`, when an impulse response is known.
    pub v_convolution: Option<RealWaveform>,
    pub i: RealWaveform,
}

pub fn voltage_from_current_tv(
    z: &TimeVaryingImpedance,
    current: &SinusoidSpec,
    grid: &SamplingGrid,
) -> Result<TvVoltage> {
    z.ensure_grid(grid)?;
    let i = gen_sinusoid(current, grid, Unit::Ampere)?;
    let phasor = current.phasor();
    let v_carrier: Vec<f64> = grid
        .times()
        .zip(&z.carrier_response)
        .map(|(t, zc)| (zc * phasor * Complex64::from_polar(1.0, current.omega0 * t)).re)
        .collect();
    let v_convolution = match &z.impulse_response {
        None => None,
        Some(ir) => {
            let limit = 2.0 * PI / current.omega0 / 8.0;
            if ir.lag_step > limit {
                return Err(Error::LagGridTooCoarse {
                    spacing: ir.lag_step,
                    limit,
                });
            }
            if ir.rows.len() != grid.len() {
                return Err(Error::LengthMismatch {
                    expected: grid.len(),
                    found: ir.rows.len(),
                });
            }
            let v: Vec<f64> = grid
                .times()
                .zip(&ir.rows)
                .map(|(t, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(m, &zv)| zv * current.value_at(t - m as f64 * ir.lag_step))
                        .sum::<f64>()
                        * ir.lag_step
                })
                .collect();
            Some(RealWaveform::new(*grid, v, Unit::Volt)?)
        }
    };
    Ok(TvVoltage {
        v_carrier: RealWaveform::new(*grid, v_carrier, Unit::Volt)?,
        v_convolution,
        i,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TvPower {
    pub series: PowerSeries,
    pub bedrosian: BedrosianReport,
    /// Set when the declared impedance bandwidth is not below the carrier;
    /// the series is still computed but the analytic-voltage form is not
    /// justified.
    pub warning: Option<String>,
}

/// Hermitian `Z(t, ω₀)·I²` and complementary `Z(t, ω₀)·I²·e^{j(2ω₀t+2φ)}`.
pub fn power_from_impedance_tv(
    z: &TimeVaryingImpedance,
    i_amp: f64,
    phi: f64,
    grid: &SamplingGrid,
) -> Result<TvPower> {
    z.ensure_grid(grid)?;
    grid.check_nyquist(z.omega0)?;
    let bedrosian = z.bedrosian()?;
    let warning = (!bedrosian.valid).then(|| {
        format!(
            "impedance bandwidth {} rad/s is not below the carrier {} rad/s",
            bedrosian.envelope_bandwidth, bedrosian.carrier
        )
    });
    let scale = i_amp * i_amp;
    let hermitian: Vec<Complex64> = z.carrier_response.iter().map(|zc| zc * scale).collect();
    let complementary = hermitian
        .iter()
        .zip(carrier_rotation(grid, z.omega0, phi))
        .map(|(h, r)| h * r)
        .collect();
    Ok(TvPower {
        series: PowerSeries::from_parts(*grid, hermitian, complementary)?,
        bedrosian,
        warning,
    })
}
