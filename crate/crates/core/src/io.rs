//! File formats: waveform CSV (`t,v[,i]`), carrier-response impedance CSV
//! (`t,re_Z,im_Z`) and raw interleaved little-endian `f64` sample pairs.
//!
//! Numbers are written with 17 significant digits so that every `f64`
//! round-trips exactly.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signals::{RealWaveform, SamplingGrid, Unit};

/// Largest tolerated relative deviation of any time step from the mean step.
pub const MAX_TIME_JITTER: f64 = 1e-6;

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformFile {
    pub v: RealWaveform,
    pub i: Option<RealWaveform>,
}

impl WaveformFile {
    pub fn grid(&self) -> &SamplingGrid {
        self.v.grid()
    }
}

fn parse_field(record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let line = record.position().map(|p| p.line()).unwrap_or(0);
    let raw = record.get(idx).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing column `{name}`"),
    })?;
    let value: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("`{raw}` is not a number in column `{name}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value in column `{name}`"),
        });
    }
    Ok(value)
}

/// Reads `t` plus named columns, returning the validated grid and columns.
fn read_columns<R: Read>(reader: R, wanted: &[&str], optional: &[&str]) -> Result<(SamplingGrid, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_idx = find("t").ok_or(Error::Parse {
        line: 1,
        message: "header has no `t` column".into(),
    })?;
    let mut cols = Vec::new();
    for name in wanted {
        let idx = find(name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("header has no `{name}` column"),
        })?;
        cols.push((*name, idx));
    }
    for name in optional {
        if let Some(idx) = find(name) {
            cols.push((*name, idx));
        }
    }

    let mut times = Vec::new();
    let mut data = vec![Vec::new(); cols.len()];
    for result in rdr.records() {
        let record = result.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        times.push(parse_field(&record, t_idx, "t")?);
        for (slot, (name, idx)) in data.iter_mut().zip(&cols) {
            slot.push(parse_field(&record, *idx, name)?);
        }
    }
    let grid = grid_from_times(&times)?;
    Ok((grid, data))
}

/// Uniform grid implied by a time column; rejects jitter above
/// [`MAX_TIME_JITTER`]. Data rows start on line 2.
pub fn grid_from_times(times: &[f64]) -> Result<SamplingGrid> {
    if times.len() < 2 {
        return Err(Error::Empty("need at least two samples to infer the sample rate"));
    }
    let n = times.len();
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Parse {
            line: 2,
            message: "time column is not increasing".into(),
        });
    }
    for (k, w) in times.windows(2).enumerate() {
        let step = w[1] - w[0];
        if ((step - dt) / dt).abs() > MAX_TIME_JITTER {
            return Err(Error::Parse {
                line: k as u64 + 3,
                message: format!("non-uniform time step {step:e} s (mean {dt:e} s)"),
            });
        }
    }
    SamplingGrid::with_start(1.0 / dt, n, times[0])
}

pub fn read_waveform_csv<R: Read>(reader: R) -> Result<WaveformFile> {
    let (grid, mut data) = read_columns(reader, &["v"], &["i"])?;
    let i = if data.len() > 1 {
        Some(RealWaveform::new(grid, data.pop().unwrap(), Unit::Ampere)?)
    } else {
        None
    };
    let v = RealWaveform::new(grid, data.pop().unwrap(), Unit::Volt)?;
    Ok(WaveformFile { v, i })
}

pub fn write_waveform_csv<W: Write>(
    mut out: W,
    v: &RealWaveform,
    i: Option<&RealWaveform>,
) -> Result<()> {
    if let Some(i) = i {
        v.grid().ensure_matches(i.grid())?;
        writeln!(out, "t,v,i")?;
    } else {
        writeln!(out, "t,v")?;
    }
    for (k, t) in v.grid().times().enumerate() {
        match i {
            Some(i) => writeln!(
                out,
                "{},{},{}",
                fmt_f64(t),
                fmt_f64(v.samples()[k]),
                fmt_f64(i.samples()[k])
            )?,
            None => writeln!(out, "{},{}", fmt_f64(t), fmt_f64(v.samples()[k]))?,
        }
    }
    Ok(())
}

/// `t,re_Z,im_Z` rows giving `Z(t, ω₀)` on a uniform grid.
pub fn read_impedance_csv<R: Read>(reader: R) -> Result<(SamplingGrid, Vec<Complex64>)> {
    let (grid, data) = read_columns(reader, &["re_Z", "im_Z"], &[])?;
    let z = data[0]
        .iter()
        .zip(&data[1])
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    Ok((grid, z))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawPairs {
    pub v: Vec<f64>,
    pub i: Vec<f64>,
    /// Bytes at the end that did not form a whole `(v, i)` pair.
    pub trailing_bytes: usize,
}

/// Interleaved little-endian `f64` pairs `v₀ i₀ v₁ i₁ …`.
pub fn read_interleaved_f64<R: Read>(mut reader: R) -> Result<RawPairs> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let chunks = bytes.chunks_exact(16);
    let trailing_bytes = chunks.remainder().len();
    let (mut v, mut i) = (Vec::new(), Vec::new());
    for (k, chunk) in chunks.enumerate() {
        let a = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let b = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite { index: k });
        }
        v.push(a);
        i.push(b);
    }
    Ok(RawPairs { v, i, trailing_bytes })
}

pub fn write_interleaved_f64<W: Write>(mut out: W, v: &[f64], i: &[f64]) -> Result<()> {
    if v.len() != i.len() {
        return Err(Error::LengthMismatch {
            expected: v.len(),
            found: i.len(),
        });
    }
    for (a, b) in v.iter().zip(i) {
        out.write_all(&a.to_le_bytes())?;
        out.write_all(&b.to_le_bytes())?;
    }
    Ok(())
}
