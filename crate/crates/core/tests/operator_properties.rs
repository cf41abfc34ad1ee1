use std::f64::consts::PI;

use num_complex::Complex64;
use powertriad::hilbert::{bedrosian_discrepancy, hilbert_spectral, phase_split, HilbertFirDesign, Window};
use powertriad::signals::{
    complex_demodulate, gen_harmonic, gen_modulated, gen_sinusoid, HarmonicSpec, HarmonicTerm,
    ModulatedSpec, SinusoidSpec,
};
use powertriad::{RealWaveform, SamplingGrid, Unit};
use proptest::prelude::*;

/// Zero-mean periodic signal built from random harmonics strictly between
/// DC and Nyquist.
fn harmonic_signal() -> impl Strategy<Value = RealWaveform> {
    (8usize..200, prop::collection::vec((0.0f64..2.0, -PI..PI), 1..12)).prop_map(|(half, lines)| {
        let n = 2 * half + 1;
        let grid = SamplingGrid::new(n as f64, n).unwrap();
        let w0 = 2.0 * PI;
        let terms = lines
            .iter()
            .enumerate()
            .filter(|(k, _)| *k + 1 < half)
            .map(|(k, &(amplitude, phase))| HarmonicTerm { index: k as u32 + 1, amplitude, phase })
            .collect();
        gen_harmonic(&HarmonicSpec::new(w0, terms).unwrap(), &grid, Unit::Volt).unwrap()
    })
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #[test]
    fn involution(x in harmonic_signal()) {
        let hh = hilbert_spectral(&hilbert_spectral(&x));
        let scale = max_abs(x.samples()).max(1e-300);
        for (a, b) in hh.samples().iter().zip(x.samples()) {
            prop_assert!((a + b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn energy_is_preserved(x in harmonic_signal()) {
        let e: f64 = x.samples().iter().map(|v| v * v).sum();
        prop_assume!(e > 0.0);
        let eh: f64 = hilbert_spectral(&x).samples().iter().map(|v| v * v).sum();
        prop_assert!(((eh - e) / e).abs() <= 1e-10);
    }

    #[test]
    fn real_part_is_untouched(samples in prop::collection::vec(-1e3f64..1e3, 2..300)) {
        let grid = SamplingGrid::new(100.0, samples.len()).unwrap();
        let x = RealWaveform::new(grid, samples, Unit::Ampere).unwrap();
        let a = phase_split(&x);
        for (z, v) in a.samples().iter().zip(x.samples()) {
            prop_assert_eq!(z.re.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn generator_bounds(x in harmonic_signal()) {
        // Rebuild the amplitude sum from the spectrum of the generated signal.
        let n = x.len() as f64;
        let bound: f64 = phase_split(&x).samples().iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(max_abs(x.samples()) <= bound * (1.0 + 1e-12) + 1e-12 * n);
    }

    #[test]
    fn fir_coefficients_are_type_three(half in 1usize..200, w in 0usize..3) {
        let window = [Window::Rectangular, Window::Hamming, Window::Blackman][w];
        let d = HilbertFirDesign::new(2 * half + 1, window).unwrap();
        let c = d.coefficients();
        for k in 0..=half {
            prop_assert_eq!(c[half + k], -c[half - k]);
            if k % 2 == 0 {
                prop_assert_eq!(c[half + k], 0.0);
            }
        }
    }

    #[test]
    fn demodulated_tone_is_constant(amp in 0.1f64..10.0, phase in -PI..PI, per_period in 16usize..400, periods in 1usize..6) {
        let w0 = 2.0 * PI * 50.0;
        let grid = SamplingGrid::new(50.0 * per_period as f64, per_period * periods).unwrap();
        let x = gen_sinusoid(&SinusoidSpec::new(amp, phase, w0).unwrap(), &grid, Unit::Volt).unwrap();
        let env = complex_demodulate(&phase_split(&x), w0);
        let expected = Complex64::from_polar(amp, phase);
        for z in env {
            prop_assert!((z - expected).norm() <= 1e-9 * amp);
        }
    }
}

#[test]
fn bedrosian_agreement_for_narrow_envelopes() {
    let w0 = 2.0 * PI * 60.0;
    let grid = SamplingGrid::periods(19_200.0, w0, 20.0).unwrap();
    for ratio in [0.05, 0.1] {
        let wm = ratio * w0;
        let u: Vec<f64> = grid.times().map(|t| 1.0 + 0.4 * (wm * t).cos()).collect();
        let v: Vec<f64> = grid.times().map(|t| (w0 * t + 0.3).cos()).collect();
        let u = RealWaveform::new(grid, u, Unit::Dimensionless).unwrap();
        let v = RealWaveform::new(grid, v, Unit::Volt).unwrap();
        assert!(bedrosian_discrepancy(&u, &v).unwrap() <= 1e-6);
    }
}

#[test]
fn modulated_generator_is_bounded_by_envelope() {
    let w0 = 2.0 * PI * 60.0;
    let grid = SamplingGrid::periods(19_200.0, w0, 10.0).unwrap();
    let wm = 0.1 * w0;
    let spec = ModulatedSpec::from_fn(w0, &grid, |t| 2.0 + (wm * t).sin(), |t| 0.5 * (wm * t).cos(), wm);
    let x = gen_modulated(&spec, &grid, Unit::Volt).unwrap();
    let peak = spec.envelope.iter().cloned().fold(0.0, f64::max);
    assert!(max_abs(x.samples()) <= peak);
}
