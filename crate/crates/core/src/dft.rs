use num_complex::Complex64;
use rustfft::FftPlanner;

/// Unnormalized forward DFT of a real sequence.
pub(crate) fn forward_real(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward_in_place(&mut buf);
    buf
}

pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(buf);
}

/// Inverse DFT including the 1/N factor.
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let n = buf.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Signed frequency index of DFT bin `k` for an `n`-point transform.
pub(crate) fn signed_bin(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Linear convolution of `x` with an odd-length kernel, centred so that the
/// output is aligned with the input (group delay removed). Samples beyond the
/// record are taken as zero.
pub(crate) fn convolve_centered(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = x.len();
    let half = kernel.len() / 2;
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for (m, &h) in kernel.iter().enumerate() {
                // y[k] = Σ h[m]·x[k + half − m]
                let idx = k as isize + half as isize - m as isize;
                if idx >= 0 && (idx as usize) < n {
                    acc += h * x[idx as usize];
                }
            }
            acc
        })
        .collect()
}
