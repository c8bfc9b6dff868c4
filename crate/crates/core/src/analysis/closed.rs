//! Bessel-series spectra of the rectangular-window SFM and even GSFM.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gbf::{bessel_j, gbf_coeffs, support_bound};
use crate::signal::Spectrum;
use crate::waveforms::{Family, FourierPhaseModel, Symmetry, WaveformSpec};

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn check_grid(freqs: &[f64], t: f64) -> Result<f64> {
    if freqs.len() < 2 {
        return Err(Error::param("freqs", "need at least two frequencies"));
    }
    let df = freqs[1] - freqs[0];
    if !(df > 0.0) {
        return Err(Error::param("freqs", "grid must be ascending"));
    }
    if df > 0.25 / t {
        return Err(Error::Resolution {
            field: "freqs".into(),
            reason: format!("spacing {df} Hz exceeds 1/(4T) = {} Hz", 0.25 / t),
        });
    }
    Ok(df)
}

fn check_rectangular(spec: &WaveformSpec) -> Result<()> {
    if !spec.taper.is_rectangular() {
        return Err(Error::param("taper", "closed forms are defined for rectangular windows only"));
    }
    Ok(())
}

/// Line spectrum `√T Σ_n c_n sinc(T(f − f0 − n·spacing))`.
fn line_spectrum(
    t: f64,
    f0: f64,
    spacing: f64,
    lines: &[(i64, Complex64)],
    phase: f64,
    freqs: &[f64],
    df: f64,
) -> Spectrum {
    let g = Complex64::from_polar(t.sqrt(), phase);
    let values = freqs
        .iter()
        .map(|&f| {
            let acc: Complex64 = lines
                .iter()
                .map(|(n, c)| c * sinc(t * (f - f0 - *n as f64 * spacing)))
                .sum();
            g * acc
        })
        .collect();
    Spectrum { freqs: freqs.to_vec(), values, df }
}

/// `√T Σ_n J_n(β) sinc(T(f − f_c − n f_m))`, `|n| ≤ β + 20`.
pub fn sfm_spectrum_closed(spec: &WaveformSpec, freqs: &[f64]) -> Result<Spectrum> {
    if spec.family != Family::Sfm {
        return Err(Error::param("family", "expected sfm"));
    }
    spec.validate()?;
    check_rectangular(spec)?;
    let df = check_grid(freqs, spec.t)?;
    let fm = spec.f_m.unwrap_or(0.0);
    let beta = spec.delta_f / (2.0 * fm);
    let n_max = (beta + 20.0).ceil() as i64;
    let lines: Vec<(i64, Complex64)> =
        (-n_max..=n_max).map(|n| (n, Complex64::new(bessel_j(n as i32, beta), 0.0))).collect();
    Ok(line_spectrum(spec.t, spec.f_c, fm, &lines, spec.carrier_phase, freqs, df))
}

/// `√T Σ_n J_n{β_1..β_K} sinc(T(f − f_c − a0·Δf/4 − n/T))`.
///
/// Also accepts an SFM spec together with its single-harmonic model, which
/// reproduces the SFM line spectrum.
pub fn gsfm_spectrum_closed(spec: &WaveformSpec, model: &FourierPhaseModel, freqs: &[f64]) -> Result<Spectrum> {
    match (spec.family, spec.symmetry) {
        (Family::Gsfm, Symmetry::Even) | (Family::Sfm, _) => {}
        (Family::Gsfm, Symmetry::Nonsymmetric) => {
            return Err(Error::param("symmetry", "the closed form needs even symmetry"))
        }
        _ => return Err(Error::param("family", "expected gsfm")),
    }
    spec.validate()?;
    check_rectangular(spec)?;
    let df = check_grid(freqs, spec.t)?;
    let betas = model.betas_complex();
    let coeffs = gbf_coeffs(&betas, support_bound(&betas), None)?;
    let lines: Vec<(i64, Complex64)> = coeffs
        .orders()
        .map(|n| (n, coeffs.get(n)))
        .filter(|(_, c)| c.norm() > 1e-16)
        .collect();
    let f0 = spec.f_c + model.center_shift();
    Ok(line_spectrum(spec.t, f0, 1.0 / spec.t, &lines, spec.carrier_phase, freqs, df))
}
