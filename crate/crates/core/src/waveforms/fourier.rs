//! Cosine-series model of an even-symmetric IF and the matching phase
//! harmonics used by the closed-form spectra and ambiguity functions.
//!
//! With the normalized IF `h(t) = a0/2 + Σ a_k cos(2πkt/T)` and
//! `f(t) = f_c + (Δf/2)·h(t)`, the phase is
//! `2π(f_c + a0·Δf/4)t + Σ β_k sin(2πkt/T)` with `β_k = Δf·T·a_k/(2k)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Family, Symmetry, WaveformSpec};
use crate::error::{Error, Result};
use crate::signal::fft_plan;

/// Largest admissible `|β_k|/max|β|` at and beyond 90% of the order.
pub const TAIL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierPhaseModel {
    pub a0: f64,
    /// `a_1..a_K`.
    pub a: Vec<f64>,
    /// `β_1..β_K`.
    pub beta: Vec<f64>,
    pub k: usize,
    pub delta_f: f64,
    pub t: f64,
}

impl FourierPhaseModel {
    /// Shift of the spectral centre away from `f_c`, Hz.
    pub fn center_shift(&self) -> f64 {
        self.a0 * self.delta_f / 4.0
    }

    /// IF offset from `f_c` rebuilt from the series.
    pub fn if_offset(&self, t: f64) -> f64 {
        let w = 2.0 * PI * t / self.t;
        let s: f64 = self.a.iter().enumerate().map(|(i, a)| a * ((i + 1) as f64 * w).cos()).sum();
        0.5 * self.delta_f * (0.5 * self.a0 + s)
    }

    /// Modulation phase relative to `2π f_c t`, rebuilt from the series.
    pub fn phase_offset(&self, t: f64) -> f64 {
        let w = 2.0 * PI * t / self.t;
        let s: f64 = self.beta.iter().enumerate().map(|(i, b)| b * ((i + 1) as f64 * w).sin()).sum();
        2.0 * PI * self.center_shift() * t + s
    }

    pub fn betas_complex(&self) -> Vec<Complex64> {
        self.beta.iter().map(|&b| Complex64::new(b, 0.0)).collect()
    }
}

/// Normalized IF `h(t)` over `[-T/2, T/2]` for the families with an even
/// cosine-series model.
fn normalized_if(spec: &WaveformSpec) -> Result<Box<dyn Fn(f64) -> f64>> {
    match spec.family {
        Family::Gsfm => {
            if spec.symmetry != Symmetry::Even {
                return Err(Error::param("symmetry", "the cosine-series model needs even symmetry"));
            }
            let (alpha, rho) = (spec.alpha_value()?, spec.rho_value());
            Ok(Box::new(move |t: f64| (2.0 * PI * alpha * t.abs().powf(rho)).sin()))
        }
        Family::Sfm => {
            let fm = spec.f_m.unwrap_or(0.0);
            let m = fm * spec.t;
            if (m - m.round()).abs() > 1e-9 || m.round() < 1.0 {
                return Err(Error::param("f_m", "f_m·T must be a positive integer for a periodic model"));
            }
            Ok(Box::new(move |t: f64| (2.0 * PI * fm * t).cos()))
        }
        other => Err(Error::param("family", format!("no cosine-series model for {}", other.name()))),
    }
}

/// Projection of the normalized IF on `cos(2πkt/T)`, `k = 0..grid/2`.
fn projections(spec: &WaveformSpec, grid: usize) -> Result<Vec<f64>> {
    let h = normalized_if(spec)?;
    let t = spec.t;
    let mut buf: Vec<Complex64> = (0..grid)
        .map(|m| Complex64::new(h(-t / 2.0 + (m as f64 + 0.5) * t / grid as f64), 0.0))
        .collect();
    fft_plan(grid, false).process(&mut buf);
    // Undo the half-sample and -T/2 origin: e^{-j2πk t_m/T} = e^{jπk(1 - 1/grid)} e^{-j2πkm/grid}.
    Ok((0..=grid / 2)
        .map(|k| {
            let rot = Complex64::from_polar(1.0, PI * k as f64 * (1.0 - 1.0 / grid as f64));
            2.0 * (buf[k] * rot).re / grid as f64
        })
        .collect())
}

fn grid_for(order: usize) -> usize {
    (64 * order).max(1 << 16).next_power_of_two()
}

fn tail_ratio(beta: &[f64], order: usize) -> f64 {
    let peak = beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let from = ((0.9 * order as f64).ceil() as usize).max(1);
    beta.iter().skip(from - 1).fold(0.0f64, |m, b| m.max(b.abs())) / peak
}

/// Cosine-series model truncated at order `order`.
///
/// Accepts even-symmetric GSFM specs and SFM specs with an integer number of
/// modulation periods per pulse (the single-harmonic case). Fails with a
/// suggested order when the harmonics at and beyond `0.9·order` are not
/// below `TAIL_TOLERANCE` of the largest.
pub fn gsfm_fourier_coeffs(spec: &WaveformSpec, order: usize) -> Result<FourierPhaseModel> {
    spec.validate()?;
    if order == 0 {
        return Err(Error::param("k", "order must be at least 1"));
    }
    let grid = grid_for(order);
    let proj = projections(spec, grid)?;
    let a0 = proj[0];
    let all_beta: Vec<f64> = proj
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| spec.delta_f * spec.t * a / (2.0 * k as f64))
        .collect();
    // Harmonics past the last quarter of the grid carry projection noise only.
    let usable = &all_beta[..grid / 4];
    if tail_ratio(usable, order) >= TAIL_TOLERANCE {
        let suggested = (order + 1..=usable.len())
            .find(|&k| tail_ratio(usable, k) < TAIL_TOLERANCE)
            .unwrap_or(usable.len());
        return Err(Error::Truncation {
            field: "k".into(),
            reason: format!("harmonic tail exceeds {TAIL_TOLERANCE:e} of the peak"),
            suggested,
        });
    }
    let a = proj[1..=order].to_vec();
    let beta = all_beta[..order].to_vec();
    Ok(FourierPhaseModel { a0, a, beta, k: order, delta_f: spec.delta_f, t: spec.t })
}

/// Smallest order passing the tail test.
pub fn minimal_order(spec: &WaveformSpec) -> Result<usize> {
    match gsfm_fourier_coeffs(spec, 8) {
        Ok(_) => Ok(8),
        Err(Error::Truncation { suggested, .. }) => Ok(suggested),
        Err(e) => Err(e),
    }
}

impl FourierPhaseModel {
    /// Model at the smallest order that passes the tail test.
    pub fn auto(spec: &WaveformSpec) -> Result<Self> {
        gsfm_fourier_coeffs(spec, minimal_order(spec)?)
    }
}
