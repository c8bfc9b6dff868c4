//! Broadband (time-scale) ambiguity functions.
//!
//! `χ(τ, η) = √η ∫ s(t) s*(η(t + τ)) dt` with Doppler scale
//! `η = (1 + v/c)/(1 − v/c)`; closing velocities are positive. Surfaces hold
//! `|χ|²` normalized so that a unit-energy waveform peaks at 1 at the origin.

mod closed;
mod export;

pub use closed::{closed_af_surface, gsfm_af_closed, sfm_af_closed, ClosedForm};
pub use export::{read_f32bin, write_csv, write_f32bin, F32Surface, F32BIN_MAGIC};

use std::collections::VecDeque;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::signal::{fft_plan, next_pow2, resample_scale, SampledSignal};

pub const SOUND_SPEED: f64 = 1500.0;

pub fn doppler_eta(v: f64, c: f64) -> Result<f64> {
    if !(v.abs() < c) {
        return Err(Error::param("v", format!("|v| must be below the sound speed {c}, got {v}")));
    }
    Ok((1.0 + v / c) / (1.0 - v / c))
}

pub fn velocity_of_eta(eta: f64, c: f64) -> f64 {
    c * (eta - 1.0) / (eta + 1.0)
}

/// `n` evenly spaced points over `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Scale factors for `n` velocities evenly spaced over `[-v_max, v_max]`.
pub fn eta_grid(v_max: f64, n: usize, c: f64) -> Result<Vec<f64>> {
    linspace(-v_max, v_max, n).into_iter().map(|v| doppler_eta(v, c)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmbiguitySurface {
    pub delays: Vec<f64>,
    pub etas: Vec<f64>,
    pub velocities: Vec<f64>,
    /// `|χ|²`, row-major with one row per η.
    pub values: Vec<f64>,
    pub c: f64,
    /// Grid cells outside the computable delay span, reported as zero.
    pub clipped: usize,
}

impl AmbiguitySurface {
    pub fn value(&self, i_eta: usize, j_tau: usize) -> f64 {
        self.values[i_eta * self.delays.len() + j_tau]
    }

    pub fn row(&self, i_eta: usize) -> &[f64] {
        let n = self.delays.len();
        &self.values[i_eta * n..(i_eta + 1) * n]
    }

    /// Row closest to η = 1.
    pub fn zero_doppler_index(&self) -> usize {
        (0..self.etas.len())
            .min_by(|&a, &b| (self.etas[a] - 1.0).abs().total_cmp(&(self.etas[b] - 1.0).abs()))
            .unwrap_or(0)
    }

    pub fn delay_cut(&self, i_eta: usize) -> Cut {
        Cut { coords: self.delays.clone(), values: self.row(i_eta).to_vec() }
    }

    pub fn doppler_cut(&self, j_tau: usize) -> Cut {
        Cut {
            coords: self.velocities.clone(),
            values: (0..self.etas.len()).map(|i| self.value(i, j_tau)).collect(),
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.delays == other.delays && self.etas == other.etas && self.c == other.c
    }
}

/// One-dimensional slice of `|χ|²` along delay (s) or velocity (m/s).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cut {
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
}

/// Magnitude cross-correlation engine for one reference signal.
struct Correlator {
    sig: SampledSignal,
    spectrum_conj: Vec<Complex64>,
    len: usize,
    energy: f64,
}

impl Correlator {
    fn new(sig: &SampledSignal, max_scaled_len: usize) -> Self {
        let len = next_pow2(sig.len() + max_scaled_len);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        buf[..sig.len()].copy_from_slice(&sig.samples);
        fft_plan(len, false).process(&mut buf);
        let spectrum_conj = buf.iter().map(|v| v.conj()).collect();
        Self { sig: sig.clone(), spectrum_conj, len, energy: sig.energy() }
    }

    /// `|χ(τ, η)|²/E²` at each delay plus the count of clipped delays.
    fn row(&self, eta: f64, delays: &[f64]) -> Result<(Vec<f64>, usize)> {
        let (mags, clipped) = self.row_raw(eta, delays)?;
        let e2 = self.energy * self.energy;
        Ok((mags.into_iter().map(|m| m * m / e2).collect(), clipped))
    }

    /// Unnormalized `|χ(τ, η)|`.
    fn row_raw(&self, eta: f64, delays: &[f64]) -> Result<(Vec<f64>, usize)> {
        let scaled = resample_scale(&self.sig, eta)?;
        let fs = self.sig.sample_rate;
        let k0 = ((scaled.t0 - self.sig.t0) * fs).round() as i64;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        buf[..scaled.len()].copy_from_slice(&scaled.samples);
        fft_plan(self.len, false).process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum_conj) {
            *b *= s;
        }
        fft_plan(self.len, true).process(&mut buf);
        // buf[d mod len]·(1/len) = Σ_n u[n + d] s*[n], τ = (d + k0)/fs.
        let n = self.sig.len() as i64;
        let m = scaled.len() as i64;
        let scale = eta.sqrt() / (self.len as f64 * fs);
        let mag = |d: i64| buf[d.rem_euclid(self.len as i64) as usize].norm() * scale;
        let (d_lo, d_hi) = (-(n - 1), m - 1);
        let mut clipped = 0;
        let values = delays
            .iter()
            .map(|&tau| {
                let x = tau * fs - k0 as f64;
                let d = x.floor() as i64;
                if x < d_lo as f64 || x > d_hi as f64 {
                    clipped += 1;
                    return 0.0;
                }
                let w = x - d as f64;
                let a = mag(d);
                if w > 0.0 && d < d_hi {
                    a + w * (mag(d + 1) - a)
                } else {
                    a
                }
            })
            .collect();
        Ok((values, clipped))
    }
}

/// Numeric surface: one time-scale resampling and FFT correlation per η.
pub fn ambiguity_numeric(sig: &SampledSignal, delays: &[f64], etas: &[f64], c: f64) -> Result<AmbiguitySurface> {
    if delays.is_empty() || etas.is_empty() {
        return Err(Error::param("grid", "delay and Doppler grids must be nonempty"));
    }
    if let Some(&bad) = etas.iter().find(|&&e| !(e > 0.5 && e < 2.0)) {
        return Err(Error::param("etas", format!("scale {bad} outside (0.5, 2)")));
    }
    let min_eta = etas.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_len = (sig.len() as f64 / min_eta).ceil() as usize + 2;
    let engine = Correlator::new(sig, max_len);
    let rows: Vec<(Vec<f64>, usize)> =
        etas.par_iter().map(|&eta| engine.row(eta, delays)).collect::<Result<_>>()?;
    let clipped = rows.iter().map(|r| r.1).sum();
    let values = rows.into_iter().flat_map(|r| r.0).collect();
    Ok(AmbiguitySurface {
        delays: delays.to_vec(),
        etas: etas.to_vec(),
        velocities: etas.iter().map(|&e| velocity_of_eta(e, c)).collect(),
        values,
        c,
        clipped,
    })
}

/// Zero-Doppler cut `|χ(τ, 1)|²`.
pub fn acf(sig: &SampledSignal, delays: &[f64]) -> Result<Cut> {
    let engine = Correlator::new(sig, sig.len());
    let (values, _) = engine.row(1.0, delays)?;
    Ok(Cut { coords: delays.to_vec(), values })
}

/// Zero-Doppler cut at every sample lag.
pub fn acf_lags(sig: &SampledSignal) -> Cut {
    let n = sig.len() as i64;
    let delays: Vec<f64> = (-(n - 1)..n).map(|d| d as f64 / sig.sample_rate).collect();
    acf(sig, &delays).expect("lag grid is always valid")
}

/// Zero-Doppler cut at every sample lag within `|τ| ≤ max_delay`.
pub fn acf_window(sig: &SampledSignal, max_delay: f64) -> Cut {
    let m = (max_delay * sig.sample_rate).ceil() as i64;
    let m = m.min(sig.len() as i64 - 1);
    let delays: Vec<f64> = (-m..=m).map(|d| d as f64 / sig.sample_rate).collect();
    acf(sig, &delays).expect("lag grid is always valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MainlobeWidth {
    pub width: f64,
    /// False when the level was not crossed on both sides.
    pub crossed: bool,
}

fn peak_index(values: &[f64]) -> usize {
    let mut k = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[k] {
            k = i;
        }
    }
    k
}

/// Width of the contiguous region around the peak above `peak − level_db`
/// (power dB), with linear interpolation of the crossings.
pub fn mainlobe_width(cut: &Cut, level_db: f64) -> Result<MainlobeWidth> {
    if cut.values.len() < 2 || cut.values.len() != cut.coords.len() {
        return Err(Error::param("cut", "need matching coordinates and at least two values"));
    }
    let v = &cut.values;
    let x = &cut.coords;
    let p = peak_index(v);
    let thr = v[p] * 10f64.powf(-level_db / 10.0);
    let mut crossed = true;
    let mut right = *x.last().unwrap();
    match (p + 1..v.len()).find(|&i| v[i] < thr) {
        Some(i) => right = x[i - 1] + (x[i] - x[i - 1]) * (v[i - 1] - thr) / (v[i - 1] - v[i]),
        None => crossed = false,
    }
    let mut left = x[0];
    match (0..p).rev().find(|&i| v[i] < thr) {
        Some(i) => left = x[i + 1] - (x[i + 1] - x[i]) * (v[i + 1] - thr) / (v[i + 1] - v[i]),
        None => crossed = false,
    }
    Ok(MainlobeWidth { width: right - left, crossed })
}

fn to_db(ratio: f64) -> f64 {
    if ratio <= 1e-12 {
        f64::NEG_INFINITY
    } else {
        10.0 * ratio.log10()
    }
}

/// Highest value outside the mainlobe, in dB relative to the peak. The
/// mainlobe extends from the peak to the first local minimum on each side;
/// `-inf` means there is no sidelobe.
pub fn peak_sidelobe(cut: &Cut) -> f64 {
    let v = &cut.values;
    if v.is_empty() {
        return f64::NEG_INFINITY;
    }
    let p = peak_index(v);
    let mut r = p;
    while r + 1 < v.len() && v[r + 1] <= v[r] {
        r += 1;
    }
    let mut l = p;
    while l > 0 && v[l - 1] <= v[l] {
        l -= 1;
    }
    let side = v[..l].iter().chain(&v[r + 1..]).cloned().fold(0.0, f64::max);
    to_db(side / v[p])
}

/// Surface version of `peak_sidelobe`: the mainlobe is every cell reachable
/// from the peak through non-increasing neighbours.
pub fn peak_sidelobe_surface(surface: &AmbiguitySurface) -> f64 {
    let (nr, nc) = (surface.etas.len(), surface.delays.len());
    let v = &surface.values;
    let p = peak_index(v);
    let mut inside = vec![false; v.len()];
    inside[p] = true;
    let mut queue = VecDeque::from([p]);
    while let Some(cell) = queue.pop_front() {
        let (r, c) = (cell / nc, cell % nc);
        let mut visit = |rr: usize, cc: usize| {
            let nb = rr * nc + cc;
            if !inside[nb] && v[nb] <= v[cell] {
                inside[nb] = true;
                queue.push_back(nb);
            }
        };
        if r > 0 {
            visit(r - 1, c);
        }
        if r + 1 < nr {
            visit(r + 1, c);
        }
        if c > 0 {
            visit(r, c - 1);
        }
        if c + 1 < nc {
            visit(r, c + 1);
        }
    }
    let side = v.iter().zip(&inside).filter(|(_, &i)| !i).map(|(x, _)| *x).fold(0.0, f64::max);
    to_db(side / v[p])
}

/// Default grid: 201 delays over `|τ| ≤ T` and 101 velocities over
/// `|v| ≤ 30 m/s`.
pub fn default_grid(duration: f64, c: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((linspace(-duration, duration, 201), eta_grid(30.0, 101, c)?))
}
