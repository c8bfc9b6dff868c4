//! Sampled complex passband signals, tapers and FFT spectra.
//!
//! Signals live on a midpoint lattice: sample `n` sits at `t0 + n/fs`, and a
//! pulse of duration `T` sampled at `fs = N/T` covers `[t_start, t_start + T]`
//! with `t0 = t_start + 0.5/fs`.

mod resample;

pub use resample::{resample_scale, KAISER_BETA, RESAMPLE_TAPS};

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Time of the first sample, seconds.
    pub t0: f64,
    pub energy_normalized: bool,
}

impl SampledSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("samples", "signal must contain at least one sample"));
        }
        if !(sample_rate > 0.0) || !sample_rate.is_finite() {
            return Err(Error::param("sample_rate", format!("must be positive, got {sample_rate}")));
        }
        Ok(Self { samples, sample_rate, t0, energy_normalized: false })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, n: usize) -> f64 {
        self.t0 + n as f64 / self.sample_rate
    }

    /// Discrete energy `Σ|s|²/fs`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.sample_rate
    }

    /// Energy of the real part `x = Re{s}`.
    pub fn real_energy(&self) -> f64 {
        self.samples.iter().map(|s| s.re * s.re).sum::<f64>() / self.sample_rate
    }

    pub fn real_part(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.re).collect()
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * gain).collect(),
            sample_rate: self.sample_rate,
            t0: self.t0,
            energy_normalized: self.energy_normalized && (gain.abs() - 1.0).abs() < 1e-15,
        }
    }

    /// Rescales to unit energy. Fails on an all-zero signal.
    pub fn normalize_energy(&mut self) -> Result<()> {
        let e = self.energy();
        if !(e > 0.0) {
            return Err(Error::UndefinedMetric {
                field: "energy".into(),
                reason: "cannot normalize an all-zero signal".into(),
            });
        }
        let g = 1.0 / e.sqrt();
        for s in &mut self.samples {
            *s *= g;
        }
        self.energy_normalized = true;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaperKind {
    #[default]
    Rectangular,
    Tukey,
    Hann,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaperScope {
    #[default]
    WholePulse,
    PerChip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Taper {
    pub kind: TaperKind,
    /// Tapered fraction for Tukey; ignored by the other kinds.
    #[serde(default)]
    pub shape_param: f64,
    #[serde(default)]
    pub scope: TaperScope,
}

impl Taper {
    pub fn rectangular() -> Self {
        Self::default()
    }

    pub fn tukey(fraction: f64) -> Self {
        Self { kind: TaperKind::Tukey, shape_param: fraction, scope: TaperScope::WholePulse }
    }

    pub fn hann() -> Self {
        Self { kind: TaperKind::Hann, shape_param: 0.0, scope: TaperScope::WholePulse }
    }

    pub fn per_chip(mut self) -> Self {
        self.scope = TaperScope::PerChip;
        self
    }

    pub fn is_rectangular(&self) -> bool {
        match self.kind {
            TaperKind::Rectangular => true,
            TaperKind::Tukey => self.shape_param == 0.0,
            TaperKind::Hann => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == TaperKind::Tukey && !(0.0..=1.0).contains(&self.shape_param) {
            return Err(Error::param(
                "taper.shape_param",
                format!("must lie in [0, 1], got {}", self.shape_param),
            ));
        }
        Ok(())
    }

    /// Window value at normalized position `x` in `[0, 1]`.
    pub fn value(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        match self.kind {
            TaperKind::Rectangular => 1.0,
            TaperKind::Hann => 0.5 * (1.0 - (2.0 * PI * x).cos()),
            TaperKind::Tukey => {
                let a = self.shape_param;
                if a <= 0.0 {
                    return 1.0;
                }
                let edge = x.min(1.0 - x);
                if edge >= a / 2.0 {
                    1.0
                } else {
                    0.5 * (1.0 - (2.0 * PI * edge / a).cos())
                }
            }
        }
    }
}

/// Samples the taper at the `n` midpoints `(i + 0.5)/n`.
pub fn make_taper(taper: &Taper, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::param("n", format!("taper needs at least 2 samples, got {n}")));
    }
    taper.validate()?;
    Ok((0..n).map(|i| taper.value((i as f64 + 0.5) / n as f64)).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
    pub df: f64,
}

impl Spectrum {
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.df
    }

    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `|S|²` in dB with a floor at -400 dB for empty bins.
    pub fn power_db(&self) -> Vec<f64> {
        self.values.iter().map(|v| 10.0 * v.norm_sqr().max(1e-40).log10()).collect()
    }
}

pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Fourier transform sampled on `k·fs/nfft`, scaled so that `Σ|S|²·df`
/// equals the time-domain energy.
pub fn spectrum_of(sig: &SampledSignal, nfft: usize) -> Result<Spectrum> {
    if nfft < sig.len() {
        return Err(Error::param(
            "nfft",
            format!("must be at least the signal length {}, got {nfft}", sig.len()),
        ));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    buf[..sig.len()].copy_from_slice(&sig.samples);
    fft_plan(nfft, false).process(&mut buf);
    let fs = sig.sample_rate;
    let df = fs / nfft as f64;
    let freqs: Vec<f64> = (0..nfft).map(|k| k as f64 * df).collect();
    let values = buf
        .iter()
        .zip(&freqs)
        .map(|(x, &f)| x * Complex64::from_polar(1.0 / fs, -2.0 * PI * f * sig.t0))
        .collect();
    Ok(Spectrum { freqs, values, df })
}

pub fn next_pow2(n: usize) -> usize {
    n.max(1).next_power_of_two()
}
