use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use powertriad::hilbert::{bedrosian_check, EnvelopeSource, HilbertFirDesign};
use powertriad::io::{fmt_f64, read_interleaved_f64, read_waveform_csv, write_waveform_csv};
use powertriad::meter::{run_meter, HilbertMode, MeterConfig, MeterEvent, Omega0Mode};
use powertriad::signals::{
    gen_harmonic, gen_modulated, gen_sinusoid, HarmonicSpec, HarmonicTerm, ModulatedSpec,
    SinusoidSpec, Window,
};
use powertriad::spectral::{avg_powers_spectral, per_frequency_triangles, pythagoras_gap, triangles_to_csv};
use powertriad::{PowerSeries, PowerSummary, RealWaveform, SamplingGrid, Spectrum, Unit};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{to_json_line, to_json_pretty, Run};
use crate::{AnalyzeArgs, GenerateKind, GridArgs, HilbertChoice, MeterArgs, Settings, SpectrumArgs, WindowChoice};

const DEFAULT_PERIODS: f64 = 10.0;

fn grid_from_args(s: &Settings, run: &mut Run, g: GridArgs) -> Result<(SamplingGrid, f64), CliError> {
    let fs: f64 = s.required("fs", g.fs)?;
    let omega0: f64 = s.required("omega0", g.omega0)?;
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(CliError::Usage(format!("--omega0 must be positive, got {omega0}")));
    }
    run.param("fs", fs);
    run.param("omega0", omega0);
    let grid = match s.value::<usize>("samples", g.samples)? {
        Some(n) => {
            run.param("samples", n);
            SamplingGrid::new(fs, n)?
        }
        None => {
            let periods = s.or("periods", g.periods, DEFAULT_PERIODS)?;
            run.param("periods", periods);
            SamplingGrid::periods(fs, omega0, periods)?
        }
    };
    Ok((grid, omega0))
}

fn parse_terms(raw: &[String], flag: &str) -> Result<Vec<HarmonicTerm>, CliError> {
    raw.iter()
        .map(|t| {
            let parts: Vec<&str> = t.split(',').map(str::trim).collect();
            let bad = || CliError::Usage(format!("--{flag} `{t}` is not `index,amplitude,phase`"));
            if parts.len() != 3 {
                return Err(bad());
            }
            Ok(HarmonicTerm {
                index: parts[0].parse().map_err(|_| bad())?,
                amplitude: parts[1].parse().map_err(|_| bad())?,
                phase: parts[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

pub fn generate(s: &Settings, out_dir: &Path, kind: GenerateKind) -> Result<(), CliError> {
    let mut run = Run::new("generate", out_dir)?;
    let (v, i) = match kind {
        GenerateKind::Sinusoid { grid, v, theta, i, phi } => {
            run.param("kind", "sinusoid");
            let (grid, omega0) = grid_from_args(s, &mut run, grid)?;
            let (v_amp, theta) = (s.or("v", v, 1.0)?, s.or("theta", theta, 0.0)?);
            run.param("v", v_amp);
            run.param("theta", theta);
            let v = gen_sinusoid(&SinusoidSpec::new(v_amp, theta, omega0)?, &grid, Unit::Volt)?;
            let i = match s.value("i", i)? {
                Some(i_amp) => {
                    let phi = s.or("phi", phi, 0.0)?;
                    run.param("i", i_amp);
                    run.param("phi", phi);
                    Some(gen_sinusoid(&SinusoidSpec::new(i_amp, phi, omega0)?, &grid, Unit::Ampere)?)
                }
                None => None,
            };
            (v, i)
        }
        GenerateKind::Harmonic { grid, terms, iterms } => {
            run.param("kind", "harmonic");
            let (grid, omega0) = grid_from_args(s, &mut run, grid)?;
            run.param("term", terms.clone());
            let v = gen_harmonic(&HarmonicSpec::new(omega0, parse_terms(&terms, "term")?)?, &grid, Unit::Volt)?;
            let i = if iterms.is_empty() {
                None
            } else {
                run.param("iterm", iterms.clone());
                let spec = HarmonicSpec::new(omega0, parse_terms(&iterms, "iterm")?)?;
                Some(gen_harmonic(&spec, &grid, Unit::Ampere)?)
            };
            (v, i)
        }
        GenerateKind::Modulated { grid, v, theta, am_depth, am_omega, pm_index, pm_omega, i, phi } => {
            run.param("kind", "modulated");
            let (grid, omega0) = grid_from_args(s, &mut run, grid)?;
            let v_amp = s.or("v", v, 1.0)?;
            let theta = s.or("theta", theta, 0.0)?;
            let depth = s.or("am-depth", am_depth, 0.0)?;
            let w_a = s.or("am-omega", am_omega, 0.0)?;
            let beta = s.or("pm-index", pm_index, 0.0)?;
            let w_p = s.or("pm-omega", pm_omega, 0.0)?;
            if !(0.0..=1.0).contains(&depth) {
                return Err(CliError::Usage(format!("--am-depth {depth} must lie in [0, 1]")));
            }
            for (key, value) in [("v", v_amp), ("theta", theta), ("am-depth", depth), ("am-omega", w_a), ("pm-index", beta), ("pm-omega", w_p)] {
                run.param(key, value);
            }
            // Carson's rule for the phase term.
            let pm_band = if beta != 0.0 { (beta.abs() + 1.0) * w_p } else { 0.0 };
            let declared = w_a.max(pm_band);
            let spec = ModulatedSpec::from_fn(
                omega0,
                &grid,
                |t| v_amp * (1.0 + depth * (w_a * t).cos()),
                |t| theta + beta * (w_p * t).sin(),
                declared,
            );
            // The declared width is exact for these envelopes. The DFT
            // estimate leaks when the record holds a fraction of an envelope
            // cycle, so it is only recorded.
            let measured = bedrosian_check(
                EnvelopeSource::Measured {
                    envelope: &spec.complex_envelope(),
                    sample_rate: grid.sample_rate(),
                },
                omega0,
            )?;
            run.param("envelope_bandwidth", declared);
            run.param("measured_envelope_bandwidth", measured.envelope_bandwidth);
            let report = bedrosian_check(EnvelopeSource::Declared(declared), omega0)?;
            if !report.valid {
                return Err(CliError::Numeric(format!(
                    "envelope bandwidth {declared} rad/s is not below the carrier {omega0} rad/s"
                )));
            }
            grid.check_nyquist(omega0 + declared)?;
            let v = gen_modulated(&spec, &grid, Unit::Volt)?;
            let i = match s.value("i", i)? {
                Some(i_amp) => {
                    let phi = s.or("phi", phi, 0.0)?;
                    run.param("i", i_amp);
                    run.param("phi", phi);
                    Some(gen_sinusoid(&SinusoidSpec::new(i_amp, phi, omega0)?, &grid, Unit::Ampere)?)
                }
                None => None,
            };
            (v, i)
        }
    };
    let mut csv = Vec::new();
    write_waveform_csv(&mut csv, &v, i.as_ref())?;
    let path = run.write("waveform.csv", &csv)?;
    run.finish()?;
    println!("{}", path.display());
    Ok(())
}

fn load_pair(s: &Settings, run: &mut Run, input: Option<std::path::PathBuf>) -> Result<(RealWaveform, RealWaveform), CliError> {
    let path = s.path("input", input)?;
    let bytes = run.read_input(&path)?;
    let file = read_waveform_csv(bytes.as_slice())?;
    let i = file
        .i
        .ok_or_else(|| CliError::Data(format!("{} has no `i` column", path.display())))?;
    Ok((file.v, i))
}

pub fn analyze(s: &Settings, out_dir: &Path, args: AnalyzeArgs) -> Result<(), CliError> {
    let mut run = Run::new("analyze", out_dir)?;
    let (v, i) = load_pair(s, &mut run, args.input)?;
    let series = PowerSeries::from_waveforms(&v, &i)?;
    let summary = PowerSummary::from_series(&series)?;
    run.write("series.csv", series.to_csv().as_bytes())?;
    let json = to_json_pretty(&summary)?;
    run.write("summary.json", &json)?;
    run.finish()?;
    print!("{}", String::from_utf8_lossy(&json));
    Ok(())
}

#[derive(Serialize)]
struct SpectrumReport {
    bins: usize,
    gap: powertriad::spectral::PythagorasGap,
    averages: powertriad::spectral::SpectralAverages,
}

pub fn spectrum(s: &Settings, out_dir: &Path, args: SpectrumArgs) -> Result<(), CliError> {
    let mut run = Run::new("spectrum", out_dir)?;
    let (v, i) = load_pair(s, &mut run, args.input)?;
    let (sv, si) = (Spectrum::from_waveform(&v), Spectrum::from_waveform(&i));
    let triangles = per_frequency_triangles(&sv, &si)?;
    let report = SpectrumReport {
        bins: triangles.len(),
        gap: pythagoras_gap(&triangles),
        averages: avg_powers_spectral(&sv, &si)?,
    };
    run.write("triangles.csv", triangles_to_csv(&triangles).as_bytes())?;
    let json = to_json_pretty(&report)?;
    run.write("spectrum.json", &json)?;
    run.finish()?;
    print!("{}", String::from_utf8_lossy(&json));
    Ok(())
}

const RECORD_HEADER: &str = "t,n_samples,re_hermitian,im_hermitian,re_complementary_demod,im_complementary_demod,S,P,Q,pf,phi_hat,phi_near_branch_cut,omega0_hat,cumulative_p\n";

pub fn meter(s: &Settings, out_dir: &Path, args: MeterArgs) -> Result<(), CliError> {
    let mut run = Run::new("meter", out_dir)?;
    let path = s.path("input", args.input)?;
    let bytes = run.read_input(&path)?;
    let raw = s.flag("raw", args.raw)?;
    let (v, i, fs, t0) = if raw {
        let fs: f64 = s.required("fs", args.fs)?;
        let t0 = s.or("t0", args.t0, 0.0)?;
        run.param("fs", fs);
        run.param("t0", t0);
        let pairs = read_interleaved_f64(bytes.as_slice())?;
        if pairs.trailing_bytes > 0 {
            run.warn(format!("ignored {} trailing bytes that do not form a sample pair", pairs.trailing_bytes));
        }
        (pairs.v, pairs.i, fs, t0)
    } else {
        let file = read_waveform_csv(bytes.as_slice())?;
        let i = file
            .i
            .ok_or_else(|| CliError::Data(format!("{} has no `i` column", path.display())))?;
        let grid = *file.v.grid();
        (file.v.into_samples(), i.into_samples(), grid.sample_rate(), grid.t0())
    };
    run.param("raw", raw);

    let estimate = s.flag("estimate-omega0", args.estimate_omega0)?;
    let known: Option<f64> = if estimate { None } else { s.value("omega0", args.omega0)? };
    let mode = match (known, estimate) {
        (Some(w), _) => {
            run.param("omega0", w);
            Omega0Mode::Known(w)
        }
        (None, true) => {
            run.param("estimate-omega0", true);
            Omega0Mode::Estimated
        }
        (None, false) => {
            return Err(CliError::Usage("give --omega0 or --estimate-omega0".into()));
        }
    };
    let default_block = match mode {
        Omega0Mode::Known(w) => (DEFAULT_PERIODS * 2.0 * PI * fs / w).round() as usize,
        Omega0Mode::Estimated => 4096,
    };
    let block_size = s.or("block-size", args.block_size, default_block)?;
    run.param("block-size", block_size);

    let hilbert = match s.or("hilbert", args.hilbert.map(choice_name), "spectral".to_string())?.as_str() {
        "spectral" => HilbertMode::SpectralPerBlock,
        "fir" => {
            let taps = s.or("fir-taps", args.fir_taps, 201)?;
            let window = match s.or("fir-window", args.fir_window.map(window_name), "hamming".to_string())?.as_str() {
                "rectangular" => Window::Rectangular,
                "hamming" => Window::Hamming,
                "blackman" => Window::Blackman,
                other => return Err(CliError::Usage(format!("unknown FIR window `{other}`"))),
            };
            run.param("fir-taps", taps);
            run.param("fir-window", format!("{window:?}").to_lowercase());
            HilbertMode::Fir(HilbertFirDesign::new(taps, window)?)
        }
        other => return Err(CliError::Usage(format!("unknown Hilbert mode `{other}`"))),
    };
    let hilbert_name = if matches!(hilbert, HilbertMode::Fir(_)) { "fir" } else { "spectral" };
    run.param("hilbert", hilbert_name);

    let csv = s.flag("csv", args.csv)?;
    run.param("csv", csv);
    let config = MeterConfig::new(block_size, mode).with_hilbert(hilbert);
    let out = run_meter(&v, &i, fs, t0, &config)?;
    for w in &out.warnings {
        run.warn(w.clone());
    }

    let mut body = Vec::new();
    if csv {
        body.extend_from_slice(RECORD_HEADER.as_bytes());
    }
    for event in &out.events {
        match event {
            MeterEvent::Record(r) if csv => {
                let mut line = String::new();
                let _ = writeln!(
                    line,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    fmt_f64(r.t),
                    r.n_samples,
                    fmt_f64(r.hermitian.re),
                    fmt_f64(r.hermitian.im),
                    fmt_f64(r.complementary_demod.re),
                    fmt_f64(r.complementary_demod.im),
                    fmt_f64(r.s),
                    fmt_f64(r.p),
                    fmt_f64(r.q),
                    fmt_f64(r.pf),
                    fmt_f64(r.phi_hat),
                    r.phi_near_branch_cut,
                    fmt_f64(r.omega0_hat),
                    fmt_f64(r.cumulative_p),
                );
                body.extend_from_slice(line.as_bytes());
            }
            MeterEvent::Gap(g) if csv => {
                run.warn(format!("gap of {} samples at t={}: {}", g.n_samples, fmt_f64(g.t), g.reason));
            }
            event => body.extend(to_json_line(event)?),
        }
    }
    let name = if csv { "records.csv" } else { "records.ndjson" };
    let path = run.write(name, &body)?;
    run.finish()?;
    println!("{}", path.display());
    Ok(())
}

fn choice_name(c: HilbertChoice) -> String {
    match c {
        HilbertChoice::Spectral => "spectral".into(),
        HilbertChoice::Fir => "fir".into(),
    }
}

fn window_name(w: WindowChoice) -> String {
    match w {
        WindowChoice::Rectangular => "rectangular".into(),
        WindowChoice::Hamming => "hamming".into(),
        WindowChoice::Blackman => "blackman".into(),
    }
}
