use std::f64::consts::PI;

use powertriad::meter::{run_meter, spawn_meter, MeterConfig, MeterEvent, Omega0Mode};
use powertriad::signals::{gen_modulated, gen_sinusoid, ModulatedSpec, SinusoidSpec};
use powertriad::{SamplingGrid, Unit};

const FS: f64 = 19_200.0;

fn w0() -> f64 {
    2.0 * PI * 60.0
}

fn tone(amp: f64, phase: f64, seconds: f64) -> Vec<f64> {
    let grid = SamplingGrid::new(FS, (seconds * FS) as usize).unwrap();
    gen_sinusoid(&SinusoidSpec::new(amp, phase, w0()).unwrap(), &grid, Unit::Volt)
        .unwrap()
        .into_samples()
}

#[test]
fn per_sample_series_reproduces_product() {
    let (v, i) = (tone(1.0, 0.9, 1.0), tone(2.0, 0.1, 1.0));
    let cfg = MeterConfig::new(640, Omega0Mode::Known(w0())).with_per_sample(true);
    let out = run_meter(&v, &i, FS, 0.0, &cfg).unwrap();
    let mut k = 0;
    for r in out.records() {
        for p in &r.series.as_ref().unwrap().instantaneous {
            assert!((p - v[k] * i[k]).abs() <= 1e-10);
            k += 1;
        }
    }
    assert_eq!(k, v.len());
}

#[test]
fn records_are_ordered_and_cumulative_average_matches() {
    let (v, i) = (tone(1.0, 0.9, 2.0), tone(2.0, 0.1, 2.0));
    let cfg = MeterConfig::new(3200, Omega0Mode::Known(w0()));
    let out = run_meter(&v, &i, FS, 5.0, &cfg).unwrap();
    let recs: Vec<_> = out.records().collect();
    assert!(recs.windows(2).all(|w| w[1].t > w[0].t));
    assert_eq!(recs[0].t, 5.0);
    let whole = v.iter().zip(&i).map(|(a, b)| a * b).sum::<f64>() / v.len() as f64;
    assert!((recs.last().unwrap().cumulative_p - whole).abs() <= 1e-9);
}

#[test]
fn phi_is_recovered_for_clean_tones() {
    for &phi in &[-1.4, -0.7, 0.0, PI / 5.0, 1.5] {
        let (v, i) = (tone(1.0, phi + 0.3, 0.5), tone(1.0, phi, 0.5));
        let cfg = MeterConfig::new(3200, Omega0Mode::Known(w0()));
        for r in run_meter(&v, &i, FS, 0.0, &cfg).unwrap().records() {
            assert!((r.phi_hat - phi).abs() <= 1e-9, "phi {phi}: {}", r.phi_hat);
            assert_eq!(r.phi_near_branch_cut, phi.abs() > PI / 4.0);
        }
    }
    // Past the branch cut the estimate lands on φ − π and is flagged.
    let phi = PI / 2.0 + 0.1;
    let (v, i) = (tone(1.0, phi, 0.2), tone(1.0, phi, 0.2));
    let cfg = MeterConfig::new(3200, Omega0Mode::Known(w0()));
    let r = run_meter(&v, &i, FS, 0.0, &cfg).unwrap();
    let r = r.records().next().unwrap();
    assert!((r.phi_hat - (phi - PI)).abs() <= 1e-9);
    assert!(r.phi_near_branch_cut);
}

#[test]
fn amplitude_modulation_is_tracked() {
    // Envelope period of two seconds, blocks of one carrier period.
    let wm = PI;
    let grid = SamplingGrid::new(FS, (4.0 * FS) as usize).unwrap();
    let env = |t: f64| 1.0 + 0.5 * (wm * t).sin();
    let v = gen_modulated(&ModulatedSpec::from_fn(w0(), &grid, env, |_| 0.0, wm), &grid, Unit::Volt)
        .unwrap()
        .into_samples();
    let i = tone(1.0, 0.0, 4.0);
    let cfg = MeterConfig::new(320, Omega0Mode::Known(w0()));
    for r in run_meter(&v, &i, FS, 0.0, &cfg).unwrap().records() {
        let mid = r.t + 0.5 * 320.0 / FS;
        assert!((r.s - 0.5 * env(mid)).abs() <= 1e-3, "t={} S={}", r.t, r.s);
    }
}

#[test]
fn bounded_channel_matches_batch_with_estimation() {
    let (v, i) = (tone(230.0, 0.4, 1.0), tone(5.0, -0.3, 1.0));
    let cfg = MeterConfig::new(1920, Omega0Mode::Estimated);
    let batch = run_meter(&v, &i, FS, 0.0, &cfg).unwrap();
    let (tx, handle) = spawn_meter(cfg, FS, 0.0, 1).unwrap();
    let producer = std::thread::spawn(move || {
        for (a, b) in v.chunks(1000).zip(i.chunks(1000)) {
            tx.send((a.to_vec(), b.to_vec())).unwrap();
        }
    });
    producer.join().unwrap();
    let streamed = handle.join().unwrap().unwrap();
    assert_eq!(batch.events, streamed.events);
    assert!(batch.events.iter().all(|e| matches!(e, MeterEvent::Record(_))));
}

#[test]
fn noise_only_stream_yields_gaps() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let v: Vec<f64> = (0..8192).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let cfg = MeterConfig::new(4096, Omega0Mode::Estimated);
    let out = run_meter(&v, &v, FS, 0.0, &cfg).unwrap();
    assert_eq!(out.events.len(), 2);
    assert!(out.events.iter().all(|e| matches!(e, MeterEvent::Gap(_))));
}
