use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::SampledSignal;
use crate::error::{Error, Result};

pub const RESAMPLE_TAPS: usize = 32;
/// Kaiser shape for 80 dB stopband attenuation: 0.1102·(80 − 8.7).
pub const KAISER_BETA: f64 = 0.1102 * (80.0 - 8.7);

const HALF: usize = RESAMPLE_TAPS / 2;
const PHASES: usize = 4096;

fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

fn kernel(d: f64) -> f64 {
    let half = HALF as f64;
    if d.abs() >= half {
        return 0.0;
    }
    let sinc = if d == 0.0 { 1.0 } else { (PI * d).sin() / (PI * d) };
    let r = d / half;
    sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / bessel_i0(KAISER_BETA)
}

/// `table[q][j] = h(q/PHASES + HALF − 1 − j)` for `q` in `0..=PHASES`.
fn table() -> &'static [[f64; RESAMPLE_TAPS]] {
    static TABLE: OnceLock<Vec<[f64; RESAMPLE_TAPS]>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=PHASES)
            .map(|q| {
                let frac = q as f64 / PHASES as f64;
                let mut row = [0.0; RESAMPLE_TAPS];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = kernel(frac + (HALF - 1) as f64 - j as f64);
                }
                row
            })
            .collect()
    })
}

/// Value of the band-limited reconstruction at fractional input index `p`.
pub(crate) fn interpolate(samples: &[Complex64], p: f64) -> Complex64 {
    let base = p.floor();
    let frac = (p - base) * PHASES as f64;
    let q = (frac.floor() as usize).min(PHASES - 1);
    let w = frac - q as f64;
    let tab = table();
    let (lo, hi) = (&tab[q], &tab[q + 1]);
    let first = base as i64 - (HALF as i64 - 1);
    let n = samples.len() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..RESAMPLE_TAPS {
        let m = first + j as i64;
        if m < 0 || m >= n {
            continue;
        }
        let h = lo[j] + w * (hi[j] - lo[j]);
        acc += samples[m as usize] * h;
    }
    acc
}

/// Time-scaled copy `u(t) = s(ηt)` on the same sample lattice as the input.
///
/// Output samples sit at `sig.t0 + k/fs` for every integer `k` whose scaled
/// time falls inside the input support, so the first output index may be
/// negative relative to the input; `t0` of the result records it.
pub fn resample_scale(sig: &SampledSignal, eta: f64) -> Result<SampledSignal> {
    if !(eta > 0.5 && eta < 2.0) {
        return Err(Error::param("eta", format!("must lie in (0.5, 2), got {eta}")));
    }
    if eta == 1.0 {
        return Ok(sig.clone());
    }
    let fs = sig.sample_rate;
    let dt = 1.0 / fs;
    let start = sig.t0 - 0.5 * dt;
    let end = start + sig.len() as f64 * dt;
    // Keep lattice points t = t0 + k/fs with ηt in [start, end).
    let k_lo = ((start / eta - sig.t0) * fs).ceil() as i64;
    let k_hi = ((end / eta - sig.t0) * fs).ceil() as i64 - 1;
    let samples: Vec<Complex64> = (k_lo..=k_hi)
        .map(|k| {
            let t = sig.t0 + k as f64 * dt;
            interpolate(&sig.samples, (eta * t - sig.t0) * fs)
        })
        .collect();
    let mut out = SampledSignal::new(samples, fs, sig.t0 + k_lo as f64 * dt)?;
    out.energy_normalized = false;
    Ok(out)
}

/// Lattice offset of the first resampled sample relative to `sig.t0`.
#[cfg(test)]
fn lattice_offset(sig: &SampledSignal, scaled: &SampledSignal) -> i64 {
    ((scaled.t0 - sig.t0) * sig.sample_rate).round() as i64
}
