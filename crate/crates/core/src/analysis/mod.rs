//! Waveform metrics: PAPR, spectral efficiency, 98% bandwidth, Carson
//! bandwidths and energy efficiency.

mod closed;
mod sweep;

pub use closed::{gsfm_spectrum_closed, sfm_spectrum_closed};
pub use sweep::{fig8_group, pareto_undominated, se_papr_sweep, SweepBand, SweepRow, FIG8_TBPS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{next_pow2, spectrum_of, SampledSignal, Spectrum};
use crate::waveforms::{Family, Symmetry, WaveformSpec};

/// Largest `|Re{s}|`, refined by a parabola through the peak sample and its
/// neighbours so the carrier crest between samples is not missed.
pub fn peak_abs_real(sig: &SampledSignal) -> f64 {
    let x = &sig.samples;
    let (mut k, mut best) = (0usize, 0.0f64);
    for (i, s) in x.iter().enumerate() {
        if s.re.abs() > best {
            best = s.re.abs();
            k = i;
        }
    }
    if k == 0 || k + 1 >= x.len() || best == 0.0 {
        return best;
    }
    let sgn = x[k].re.signum();
    let (a, b, c) = (sgn * x[k - 1].re, best, sgn * x[k + 1].re);
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return best;
    }
    let p = 0.5 * (a - c) / curv;
    (b - 0.25 * (a - c) * p).max(best)
}

/// `10·log10(max x² / mean x²)` of the real passband signal.
pub fn papr(sig: &SampledSignal) -> Result<f64> {
    let mean = sig.samples.iter().map(|s| s.re * s.re).sum::<f64>() / sig.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::UndefinedMetric { field: "papr".into(), reason: "signal is all zero".into() });
    }
    let peak = peak_abs_real(sig);
    Ok(10.0 * (peak * peak / mean).log10())
}

/// Running integral of the piecewise-linear `|S|²` over the grid.
struct Cumulative {
    power: Vec<f64>,
    prefix: Vec<f64>,
    df: f64,
    f_first: f64,
    total: f64,
}

impl Cumulative {
    fn new(spec: &Spectrum) -> Self {
        let power = spec.power();
        let mut prefix = vec![0.0; power.len()];
        for k in 1..power.len() {
            prefix[k] = prefix[k - 1] + 0.5 * (power[k - 1] + power[k]) * spec.df;
        }
        let total = power.iter().sum::<f64>() * spec.df;
        Self { power, prefix, df: spec.df, f_first: spec.freqs[0], total }
    }

    fn f_last(&self) -> f64 {
        self.f_first + (self.power.len() - 1) as f64 * self.df
    }

    fn at(&self, f: f64) -> f64 {
        let u = (f - self.f_first) / self.df;
        let k = (u.floor().max(0.0) as usize).min(self.power.len() - 2);
        let x = (u - k as f64) * self.df;
        let slope = (self.power[k + 1] - self.power[k]) / self.df;
        self.prefix[k] + self.power[k] * x + 0.5 * slope * x * x
    }

    fn fraction(&self, lo: f64, hi: f64) -> f64 {
        ((self.at(hi) - self.at(lo)) / self.total).clamp(0.0, 1.0)
    }
}

fn check_band(cum: &Cumulative, f_c: f64, band: f64) -> Result<()> {
    if band < 0.0 || f_c - band / 2.0 < cum.f_first || f_c + band / 2.0 > cum.f_last() {
        return Err(Error::param(
            "delta_F",
            format!("band {band} Hz about {f_c} Hz leaves the spectrum grid"),
        ));
    }
    Ok(())
}

/// Fraction of energy inside `[f_c − ΔF/2, f_c + ΔF/2]`; band edges are
/// integrated through the linear interpolant of `|S|²`.
pub fn spectral_efficiency(spec: &Spectrum, f_c: f64, band: f64) -> Result<f64> {
    let cum = Cumulative::new(spec);
    if !(cum.total > 0.0) {
        return Err(Error::UndefinedMetric { field: "se".into(), reason: "spectrum carries no energy".into() });
    }
    check_band(&cum, f_c, band)?;
    Ok(cum.fraction(f_c - band / 2.0, f_c + band / 2.0))
}

/// Smallest band centred on `f_c` holding 98% of the energy, to 0.1 Hz.
pub fn bandwidth_98(spec: &Spectrum, f_c: f64) -> Result<f64> {
    bandwidth_fraction(spec, f_c, 0.98)
}

pub fn bandwidth_fraction(spec: &Spectrum, f_c: f64, fraction: f64) -> Result<f64> {
    let cum = Cumulative::new(spec);
    if !(cum.total > 0.0) {
        return Err(Error::UndefinedMetric { field: "band_98".into(), reason: "spectrum carries no energy".into() });
    }
    let widest = 2.0 * (f_c - cum.f_first).min(cum.f_last() - f_c);
    if widest <= 0.0 || cum.fraction(f_c - widest / 2.0, f_c + widest / 2.0) < fraction {
        return Err(Error::GridTooNarrow {
            field: "band_98".into(),
            reason: format!("the grid never encloses {:.0}% of the energy about {f_c} Hz", 100.0 * fraction),
        });
    }
    let (mut lo, mut hi) = (0.0, widest);
    while hi - lo > 0.05 {
        let mid = 0.5 * (lo + hi);
        if cum.fraction(f_c - mid / 2.0, f_c + mid / 2.0) >= fraction {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Power-weighted mean frequency over the lower half of the grid.
pub fn spectral_centroid(spec: &Spectrum) -> f64 {
    let half = spec.freqs.len() / 2;
    let p = spec.power();
    let w: f64 = p[..half].iter().sum();
    p[..half].iter().zip(&spec.freqs).map(|(p, f)| p * f).sum::<f64>() / w
}

/// `2(β + 1)f_m` with `β = Δf/(2 f_m)`.
pub fn carson_sfm(delta_f: f64, f_m: f64) -> f64 {
    let beta = delta_f / (2.0 * f_m);
    2.0 * (beta + 1.0) * f_m
}

/// `Δf + 2αρ·T_eff^{ρ−1}` with `T_eff = T` (nonsymmetric) or `T/2` (even).
pub fn carson_gsfm(delta_f: f64, alpha: f64, rho: f64, t: f64, symmetry: Symmetry) -> f64 {
    let t_eff = match symmetry {
        Symmetry::Nonsymmetric => t,
        Symmetry::Even => t / 2.0,
    };
    delta_f + 2.0 * alpha * rho * t_eff.powf(rho - 1.0)
}

pub fn energy_efficiency(e_w: f64, e_ref: f64) -> Result<f64> {
    if !(e_w > 0.0) {
        return Err(Error::param("e_w", format!("energy must be positive, got {e_w}")));
    }
    if !(e_ref > 0.0) {
        return Err(Error::param("e_ref", format!("energy must be positive, got {e_ref}")));
    }
    Ok(10.0 * (e_w / e_ref).log10())
}

/// Energy of the real drive `x = Re{s}/max|Re{s}|`, the peak-power-limited
/// transmit energy.
pub fn drive_energy(sig: &SampledSignal) -> Result<f64> {
    let peak = peak_abs_real(sig);
    if !(peak > 0.0) {
        return Err(Error::UndefinedMetric { field: "energy".into(), reason: "signal is all zero".into() });
    }
    Ok(sig.real_energy() / (peak * peak))
}

/// Frequency bins used for metrics: at least eight per `1/T`.
pub fn metrics_nfft(sig: &SampledSignal) -> usize {
    next_pow2(8 * sig.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub papr_db: f64,
    pub se: f64,
    pub se_band_hz: f64,
    pub band_98: f64,
    pub carson_hz: Option<f64>,
    /// Energy of the peak-normalized real drive, relative units.
    pub energy: f64,
    pub tbp: f64,
    pub centroid_shift_hz: f64,
}

pub fn carson_for(spec: &WaveformSpec) -> Option<f64> {
    match spec.family {
        Family::Sfm => spec.f_m.map(|fm| carson_sfm(spec.delta_f, fm)),
        Family::Gsfm => spec
            .alpha_value()
            .ok()
            .map(|a| carson_gsfm(spec.delta_f, a, spec.rho_value(), spec.t, spec.symmetry)),
        _ => None,
    }
}

/// Metrics of a sampled signal with carrier `f_c`; the SE band defaults to
/// the signal's own 98% bandwidth.
pub fn metrics(sig: &SampledSignal, f_c: f64, band: Option<f64>, carson: Option<f64>) -> Result<MetricsReport> {
    let spectrum = spectrum_of(sig, metrics_nfft(sig))?;
    let band_98 = bandwidth_98(&spectrum, f_c)?;
    let se_band = band.unwrap_or(band_98);
    Ok(MetricsReport {
        papr_db: papr(sig)?,
        se: spectral_efficiency(&spectrum, f_c, se_band)?,
        se_band_hz: se_band,
        band_98,
        carson_hz: carson,
        energy: drive_energy(sig)?,
        tbp: sig.duration() * band_98,
        centroid_shift_hz: spectral_centroid(&spectrum) - f_c,
    })
}
