//! Block-streaming power meter.
//!
//! Each block of voltage and current samples is phase split, Hermitian and
//! complementary power are formed, the complementary power is shifted to
//! baseband with `e^{−j2ω₀t}`, and one [`PowerRecord`] is emitted with the
//! short-term `S, P, Q`, power factor and the recovered current phase.
//!
//! The current phase follows from `e^{−j2ω₀t}·ṽĩ = e^{j2φ}·ṽĩ*`, which
//! fixes `2φ` only; `φ` is reported on `(−π/2, π/2]`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::thread::JoinHandle;

use num_complex::Complex64;
use serde::Serialize;

use crate::dft;
use crate::error::{Error, Result};
use crate::hilbert::{phase_split, AnalyticWaveform, HilbertFirDesign};
use crate::power::{PowerSeries, PowerSummary};
use crate::signals::{RealWaveform, SamplingGrid, Unit, Window};

/// Minimum ratio of the spectral peak to the median bin magnitude for a
/// block to count as having a dominant tone.
pub const PEAK_TO_MEDIAN_MIN: f64 = 10.0;
/// Minimum number of carrier periods per block for frequency estimation.
pub const MIN_ESTIMATION_PERIODS: f64 = 4.0;
/// Default weight of a new block's estimate in the exponential smoother.
pub const DEFAULT_SMOOTHING: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Omega0Mode {
    Known(f64),
    Estimated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HilbertMode {
    /// Spectral Hilbert transform of each block taken as one period.
    SpectralPerBlock,
    /// Streaming FIR Hilbert transformer; records lag the input by the
    /// filter's group delay.
    Fir(HilbertFirDesign),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeterConfig {
    pub block_size: usize,
    pub omega0_mode: Omega0Mode,
    pub hilbert_mode: HilbertMode,
    /// Attach the per-sample [`PowerSeries`] to each record.
    pub per_sample: bool,
    /// Weight of the newest block in the `ω̂₀` smoother.
    pub smoothing: f64,
}

impl MeterConfig {
    pub fn new(block_size: usize, omega0_mode: Omega0Mode) -> Self {
        Self {
            block_size,
            omega0_mode,
            hilbert_mode: HilbertMode::SpectralPerBlock,
            per_sample: false,
            smoothing: DEFAULT_SMOOTHING,
        }
    }

    pub fn with_hilbert(mut self, mode: HilbertMode) -> Self {
        self.hilbert_mode = mode;
        self
    }

    pub fn with_per_sample(mut self, on: bool) -> Self {
        self.per_sample = on;
        self
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if self.block_size < 2 {
            return Err(Error::InvalidParameter("block size must be at least 2".into()));
        }
        if !(self.smoothing > 0.0 && self.smoothing <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "smoothing weight {} outside (0, 1]",
                self.smoothing
            )));
        }
        if let Omega0Mode::Known(w) = self.omega0_mode {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter(format!("carrier frequency {w}")));
            }
            SamplingGrid::new(sample_rate, self.block_size)?.check_nyquist(w)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRecord {
    /// Time of the first sample in the block.
    pub t: f64,
    pub n_samples: usize,
    /// Block mean of `ṽĩ*`.
    pub hermitian: Complex64,
    /// Block mean of `e^{−j2ω̂₀t}·ṽĩ`.
    pub complementary_demod: Complex64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub pf: f64,
    pub phi_hat: f64,
    /// `φ̂` lies within π/4 of the ±π/2 branch cut; the true phase may be
    /// `φ̂ ± π`.
    pub phi_near_branch_cut: bool,
    pub omega0_hat: f64,
    /// Running time average of instantaneous power up to this block.
    pub cumulative_p: f64,
    #[serde(skip)]
    pub series: Option<PowerSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRecord {
    pub t: f64,
    pub n_samples: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MeterEvent {
    Record(PowerRecord),
    Gap(GapRecord),
}

impl MeterEvent {
    pub fn record(&self) -> Option<&PowerRecord> {
        match self {
            MeterEvent::Record(r) => Some(r),
            MeterEvent::Gap(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiEstimate {
    /// `φ̂ ∈ (−π/2, π/2]`.
    pub phi: f64,
    pub near_branch_cut: bool,
}

/// `φ̂ = ½·arg(e^{−j2ω₀t}·ṽĩ·(ṽĩ*)*)`.
pub fn recover_phi(
    hermitian: Complex64,
    complementary: Complex64,
    omega0: f64,
    t: f64,
) -> Result<PhiEstimate> {
    if hermitian.norm() == 0.0 || complementary.norm() == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    let z = Complex64::from_polar(1.0, -2.0 * omega0 * t) * complementary * hermitian.conj();
    let mut phi = 0.5 * z.arg();
    if phi <= -FRAC_PI_2 {
        phi += PI;
    }
    Ok(PhiEstimate {
        phi,
        near_branch_cut: phi.abs() > FRAC_PI_4,
    })
}

/// Dominant-tone frequency of a block, in rad/s.
///
/// A Hann-windowed spectrum locates the peak (Gaussian interpolation of the
/// log magnitudes around the largest bin); the estimate is then refined by a
/// least-squares sinusoid fit, solving for the frequency where the fit
/// residual is stationary.
pub fn estimate_omega0(block: &RealWaveform) -> Result<f64> {
    let n = block.len();
    if n < 16 {
        return Err(Error::InvalidParameter(format!(
            "block of {n} samples is too short for frequency estimation"
        )));
    }
    let fs = block.grid().sample_rate();
    let mean = block.mean();
    let windowed: Vec<f64> = block
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &x)| (x - mean) * hann(k, n))
        .collect();
    let spec = dft::forward_real(&windowed);
    let mags: Vec<f64> = spec[1..n / 2].iter().map(|z| z.norm()).collect();
    let (peak_idx, &peak) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::Empty("spectrum"))?;
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let ratio = if median > 0.0 { peak / median } else if peak > 0.0 { f64::INFINITY } else { 0.0 };
    if ratio < PEAK_TO_MEDIAN_MIN {
        return Err(Error::EstimationFailed {
            ratio,
            threshold: PEAK_TO_MEDIAN_MIN,
        });
    }

    let bin = peak_idx + 1;
    let offset = if peak_idx > 0 && peak_idx + 1 < mags.len() {
        let (a, b, c) = (
            mags[peak_idx - 1].max(f64::MIN_POSITIVE).ln(),
            peak.ln(),
            mags[peak_idx + 1].max(f64::MIN_POSITIVE).ln(),
        );
        let denom = a - 2.0 * b + c;
        if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let spacing = 2.0 * PI * fs / n as f64;
    let coarse = (bin as f64 + offset) * spacing;
    if coarse * block.grid().duration() / (2.0 * PI) < MIN_ESTIMATION_PERIODS {
        return Err(Error::InvalidParameter(format!(
            "block spans fewer than {MIN_ESTIMATION_PERIODS} periods of the dominant tone"
        )));
    }
    Ok(refine_frequency(block.samples(), fs, coarse, 0.5 * spacing))
}

fn hann(k: usize, n: usize) -> f64 {
    0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos()
}

/// Derivative of the least-squares residual of `a·cos ωt + b·sin ωt + c`
/// with respect to `ω`, with `t` centred on the block.
fn residual_slope(x: &[f64], fs: f64, omega: f64) -> f64 {
    let n = x.len();
    let center = (n - 1) as f64 / 2.0;
    let times = (0..n).map(|k| (k as f64 - center) / fs);
    // Normal equations for the basis [cos, sin, 1].
    let mut g = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (t, &xv) in times.clone().zip(x) {
        let (s, c) = (omega * t).sin_cos();
        let basis = [c, s, 1.0];
        for r in 0..3 {
            rhs[r] += basis[r] * xv;
            for col in 0..3 {
                g[r][col] += basis[r] * basis[col];
            }
        }
    }
    let Some([a, b, dc]) = solve3(g, rhs) else {
        return 0.0;
    };
    times
        .zip(x)
        .map(|(t, &xv)| {
            let (s, c) = (omega * t).sin_cos();
            let r = xv - (a * c + b * s + dc);
            r * t * (-a * s + b * c)
        })
        .sum::<f64>()
        * -2.0
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * out[k]).sum();
        out[row] = (b[row] - tail) / m[row][row];
    }
    Some(out)
}

/// Bisection on the residual slope inside `[guess − half_width, guess + half_width]`.
/// Falls back to `guess` when the slope does not change sign there.
fn refine_frequency(x: &[f64], fs: f64, guess: f64, half_width: f64) -> f64 {
    let (mut lo, mut hi) = (guess - half_width, guess + half_width);
    let (mut g_lo, g_hi) = (residual_slope(x, fs, lo), residual_slope(x, fs, hi));
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return guess;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-14 * mid {
            break;
        }
        let g = residual_slope(x, fs, mid);
        if g == 0.0 {
            return mid;
        }
        if (g < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Streaming state machine. Feed aligned chunks with [`Meter::push`]; one
/// event is produced per completed block, in input order.
#[derive(Debug)]
pub struct Meter {
    config: MeterConfig,
    sample_rate: f64,
    t0: f64,
    /// Absolute index of `pending_v[0]`.
    next_index: usize,
    pending_v: Vec<f64>,
    pending_i: Vec<f64>,
    /// FIR mode: samples preceding the pending block.
    history_v: Vec<f64>,
    history_i: Vec<f64>,
    omega_smoothed: Option<f64>,
    energy: f64,
    counted: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeterOutput {
    pub events: Vec<MeterEvent>,
    /// Samples of a final partial block that were dropped.
    pub dropped_tail: usize,
    pub warnings: Vec<String>,
}

impl MeterOutput {
    pub fn records(&self) -> impl Iterator<Item = &PowerRecord> {
        self.events.iter().filter_map(MeterEvent::record)
    }
}

impl Meter {
    pub fn new(config: MeterConfig, sample_rate: f64, t0: f64) -> Result<Self> {
        config.validate(sample_rate)?;
        let delay = match &config.hilbert_mode {
            HilbertMode::Fir(d) => d.group_delay(),
            HilbertMode::SpectralPerBlock => 0,
        };
        Ok(Self {
            config,
            sample_rate,
            t0,
            next_index: 0,
            pending_v: Vec::new(),
            pending_i: Vec::new(),
            history_v: vec![0.0; delay],
            history_i: vec![0.0; delay],
            omega_smoothed: None,
            energy: 0.0,
            counted: 0,
        })
    }

    fn lookahead(&self) -> usize {
        match &self.config.hilbert_mode {
            HilbertMode::Fir(d) => d.group_delay(),
            HilbertMode::SpectralPerBlock => 0,
        }
    }

    fn time(&self, index: usize) -> f64 {
        self.t0 + index as f64 / self.sample_rate
    }

    /// Appends an aligned chunk. Chunks of unequal length abort the pending
    /// block and produce a gap event.
    pub fn push(&mut self, v: &[f64], i: &[f64]) -> Result<Vec<MeterEvent>> {
        if v.len() != i.len() {
            let skipped = self.pending_v.len() + v.len().max(i.len());
            let gap = GapRecord {
                t: self.time(self.next_index),
                n_samples: skipped,
                reason: format!("stream desync: {} voltage vs {} current samples", v.len(), i.len()),
            };
            self.next_index += skipped;
            self.pending_v.clear();
            self.pending_i.clear();
            self.history_v.iter_mut().for_each(|x| *x = 0.0);
            self.history_i.iter_mut().for_each(|x| *x = 0.0);
            return Ok(vec![MeterEvent::Gap(gap)]);
        }
        if let Some(k) = v.iter().chain(i).position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: self.next_index + self.pending_v.len() + k % v.len().max(1) });
        }
        self.pending_v.extend_from_slice(v);
        self.pending_i.extend_from_slice(i);
        let mut events = Vec::new();
        let need = self.config.block_size + self.lookahead();
        while self.pending_v.len() >= need {
            events.push(self.process_block(false));
        }
        Ok(events)
    }

    /// Flushes blocks that were waiting only for FIR look-ahead (padded with
    /// zeros) and reports the partial block left over.
    pub fn finish(mut self) -> MeterOutput {
        let mut events = Vec::new();
        while self.pending_v.len() >= self.config.block_size {
            events.push(self.process_block(true));
        }
        let dropped_tail = self.pending_v.len();
        let warnings = if dropped_tail > 0 {
            vec![format!("dropped final partial block of {dropped_tail} samples")]
        } else {
            Vec::new()
        };
        MeterOutput {
            events,
            dropped_tail,
            warnings,
        }
    }

    fn process_block(&mut self, at_end: bool) -> MeterEvent {
        let b = self.config.block_size;
        let start = self.next_index;
        let grid = SamplingGrid::with_start(self.sample_rate, b, self.time(start))
            .expect("validated sample rate");
        let v_block = RealWaveform::new(grid, self.pending_v[..b].to_vec(), Unit::Volt)
            .expect("finite samples");
        let i_block = RealWaveform::new(grid, self.pending_i[..b].to_vec(), Unit::Ampere)
            .expect("finite samples");

        let (av, ai) = match &self.config.hilbert_mode {
            HilbertMode::SpectralPerBlock => (phase_split(&v_block), phase_split(&i_block)),
            HilbertMode::Fir(design) => {
                let d = design.group_delay();
                let av = fir_analytic(&self.history_v, &self.pending_v, b, d, at_end, design, &grid);
                let ai = fir_analytic(&self.history_i, &self.pending_i, b, d, at_end, design, &grid);
                (av, ai)
            }
        };

        let omega = match self.config.omega0_mode {
            Omega0Mode::Known(w) => Ok(w),
            Omega0Mode::Estimated => {
                let source = if v_block.rms() >= i_block.rms() { &v_block } else { &i_block };
                match (estimate_omega0(source), self.omega_smoothed) {
                    (Ok(w), Some(prev)) => Ok(self.config.smoothing * w + (1.0 - self.config.smoothing) * prev),
                    (Ok(w), None) => Ok(w),
                    (Err(_), Some(prev)) => Ok(prev),
                    (Err(e), None) => Err(e),
                }
            }
        };

        self.advance(b);

        let omega = match omega {
            Ok(w) => {
                if matches!(self.config.omega0_mode, Omega0Mode::Estimated) {
                    self.omega_smoothed = Some(w);
                }
                w
            }
            Err(e) => {
                return MeterEvent::Gap(GapRecord {
                    t: grid.t0(),
                    n_samples: b,
                    reason: e.to_string(),
                })
            }
        };

        let series = PowerSeries::from_analytic(&av, &ai).expect("matching grids");
        self.energy += series.instantaneous.iter().sum::<f64>();
        self.counted += b;
        let summary = PowerSummary::from_series(&series).expect("non-empty block");
        let n = b as f64;
        let hermitian = series.hermitian.iter().sum::<Complex64>() / n;
        let complementary_demod =
            series.demodulated_complementary(omega).iter().sum::<Complex64>() / n;
        let (phi_hat, near) = match recover_phi(hermitian, complementary_demod, omega, 0.0) {
            Ok(est) => (est.phi, est.near_branch_cut),
            Err(_) => (0.0, false),
        };
        MeterEvent::Record(PowerRecord {
            t: grid.t0(),
            n_samples: b,
            hermitian,
            complementary_demod,
            s: summary.apparent_s,
            p: summary.active_p,
            q: summary.nonactive_q,
            pf: summary.power_factor,
            phi_hat,
            phi_near_branch_cut: near,
            omega0_hat: omega,
            cumulative_p: self.energy / self.counted as f64,
            series: self.config.per_sample.then_some(series),
        })
    }

    fn advance(&mut self, b: usize) {
        let d = self.history_v.len();
        if d > 0 {
            let mut hv: Vec<f64> = self.history_v.drain(..).collect();
            hv.extend_from_slice(&self.pending_v[..b]);
            self.history_v = hv[hv.len() - d..].to_vec();
            let mut hi: Vec<f64> = self.history_i.drain(..).collect();
            hi.extend_from_slice(&self.pending_i[..b]);
            self.history_i = hi[hi.len() - d..].to_vec();
        }
        self.pending_v.drain(..b);
        self.pending_i.drain(..b);
        self.next_index += b;
    }
}

fn fir_analytic(
    history: &[f64],
    pending: &[f64],
    b: usize,
    d: usize,
    at_end: bool,
    design: &HilbertFirDesign,
    grid: &SamplingGrid,
) -> AnalyticWaveform {
    let mut ext = Vec::with_capacity(b + 2 * d);
    ext.extend_from_slice(history);
    let avail = pending.len().min(b + d);
    ext.extend_from_slice(&pending[..avail]);
    if at_end {
        ext.resize(b + 2 * d, 0.0);
    }
    let quad = dft::convolve_centered(&ext, design.coefficients());
    let samples = pending[..b]
        .iter()
        .zip(&quad[d..d + b])
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    AnalyticWaveform::new(*grid, samples, Unit::Dimensionless).expect("finite samples")
}

/// Runs the meter over complete aligned records. Unequal lengths are
/// processed up to the shorter one and the remainder is reported as a gap.
pub fn run_meter(
    v: &[f64],
    i: &[f64],
    sample_rate: f64,
    t0: f64,
    config: &MeterConfig,
) -> Result<MeterOutput> {
    let mut meter = Meter::new(config.clone(), sample_rate, t0)?;
    let common = v.len().min(i.len());
    let mut events = meter.push(&v[..common], &i[..common])?;
    let extra = v.len().max(i.len()) - common;
    let mut out = if extra > 0 {
        // Flush whole blocks first so the gap follows them in time order.
        let lead = meter.finish();
        events.extend(lead.events);
        let t = t0 + (common - lead.dropped_tail) as f64 / sample_rate;
        events.push(MeterEvent::Gap(GapRecord {
            t,
            n_samples: lead.dropped_tail + extra,
            reason: format!("stream desync: {} voltage vs {} current samples", v.len(), i.len()),
        }));
        MeterOutput {
            events: Vec::new(),
            dropped_tail: 0,
            warnings: lead.warnings,
        }
    } else {
        meter.finish()
    };
    events.append(&mut out.events);
    out.events = events;
    Ok(out)
}

pub type Chunk = (Vec<f64>, Vec<f64>);

/// Runs a [`Meter`] on its own thread behind a bounded channel of
/// `capacity` chunks; senders block when the channel is full. Dropping the
/// sender ends the stream.
pub fn spawn_meter(
    config: MeterConfig,
    sample_rate: f64,
    t0: f64,
    capacity: usize,
) -> Result<(SyncSender<Chunk>, JoinHandle<Result<MeterOutput>>)> {
    let mut meter = Meter::new(config, sample_rate, t0)?;
    let (tx, rx): (SyncSender<Chunk>, Receiver<Chunk>) = sync_channel(capacity);
    let handle = std::thread::spawn(move || {
        let mut events = Vec::new();
        for (v, i) in rx {
            events.extend(meter.push(&v, &i)?);
        }
        let mut out = meter.finish();
        events.append(&mut out.events);
        out.events = events;
        Ok(out)
    });
    Ok((tx, handle))
}

/// Hamming-windowed FIR design suited to streaming at the given tap count.
pub fn default_fir(n_taps: usize) -> Result<HilbertFirDesign> {
    HilbertFirDesign::new(n_taps, Window::Hamming)
}
