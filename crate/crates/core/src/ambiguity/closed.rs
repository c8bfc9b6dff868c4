//! Bessel-series ambiguity functions of the rectangular-window SFM and even
//! GSFM.
//!
//! Both forms expand the modulation difference `φ(t) − φ(η(t + τ))` with a
//! sum-to-product identity and keep only the `τ`-dependent half-angle, so
//! each harmonic contributes one cylindrical (SFM) or generalized (GSFM)
//! Bessel series whose terms integrate to shifted sincs over the overlap
//! `T − |τ|`. The neglected half-angle term grows with `|1 − η|·t`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{velocity_of_eta, AmbiguitySurface};
use crate::error::{Error, Result};
use crate::gbf::{bessel_j, gbf_coeffs, support_bound, GbfCoefficients};
use crate::waveforms::{Family, FourierPhaseModel, Symmetry, WaveformSpec};

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

fn j_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn check_common(spec: &WaveformSpec, eta: f64) -> Result<()> {
    spec.validate()?;
    if !spec.taper.is_rectangular() {
        return Err(Error::param("taper", "closed-form ambiguity needs a rectangular window"));
    }
    if !(eta > 0.0) {
        return Err(Error::param("eta", format!("must be positive, got {eta}")));
    }
    Ok(())
}

/// Sum over harmonic lines `Σ_n j^n c_n e^{jnπ f_h ητ} e^{−jπν_nτ} sinc(ν_n L)`
/// with `ν_n = f0(1 − η) + n f_h (1 + η)/2`, scaled by `√η·L/T`.
fn line_sum(t: f64, f0: f64, f_h: f64, tau: f64, eta: f64, lines: impl Iterator<Item = (i64, Complex64)>) -> f64 {
    let overlap = t - tau.abs();
    if overlap <= 0.0 {
        return 0.0;
    }
    let acc: Complex64 = lines
        .map(|(n, c)| {
            let nu = f0 * (1.0 - eta) + n as f64 * f_h * (1.0 + eta) / 2.0;
            let ph = n as f64 * PI * f_h * eta * tau - PI * nu * tau;
            j_pow(n) * c * Complex64::from_polar(sinc(nu * overlap), ph)
        })
        .sum();
    eta.sqrt() * overlap / t * acc.norm()
}

/// `|χ(τ, η)|` of a rectangular SFM from the cylindrical Bessel series,
/// truncated at `|n| ≤ 2β + 20`.
pub fn sfm_af_closed(spec: &WaveformSpec, tau: f64, eta: f64) -> Result<f64> {
    if spec.family != Family::Sfm {
        return Err(Error::param("family", "expected sfm"));
    }
    check_common(spec, eta)?;
    if tau.abs() >= spec.t {
        return Ok(0.0);
    }
    let fm = spec.f_m.unwrap_or(0.0);
    let beta = spec.delta_f / (2.0 * fm);
    let z = 2.0 * beta * (-PI * fm * eta * tau).sin();
    let n_max = (2.0 * beta + 20.0).ceil() as i64;
    let lines = (-n_max..=n_max).map(|n| (n, Complex64::new(bessel_j(n as i32, z), 0.0)));
    Ok(line_sum(spec.t, spec.f_c, fm, tau, eta, lines))
}

fn gsfm_coeffs(model: &FourierPhaseModel, tau: f64, eta: f64) -> Result<GbfCoefficients> {
    let t = model.t;
    let args: Vec<Complex64> = model
        .beta
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let k = (i + 1) as f64;
            Complex64::new(2.0 * b * (-PI * k * eta * tau / t).sin(), 0.0)
        })
        .collect();
    let weights: Vec<Complex64> = (1..=args.len() as i64).map(|k| j_pow(-(k - 1))).collect();
    let weighted: Vec<Complex64> = args.iter().zip(&weights).map(|(a, w)| a * w).collect();
    gbf_coeffs(&args, support_bound(&weighted), Some(&weights))
}

/// `|χ(τ, η)|` of a rectangular even GSFM from the mixed-argument GBF series
/// with arguments `2β_k sin(−πkητ/T)` and weights `j^{−(k−1)}`.
///
/// An SFM spec with its single-harmonic model is accepted as well.
pub fn gsfm_af_closed(spec: &WaveformSpec, model: &FourierPhaseModel, tau: f64, eta: f64) -> Result<f64> {
    match (spec.family, spec.symmetry) {
        (Family::Gsfm, Symmetry::Even) | (Family::Sfm, _) => {}
        (Family::Gsfm, Symmetry::Nonsymmetric) => {
            return Err(Error::param("symmetry", "the closed form needs even symmetry"))
        }
        _ => return Err(Error::param("family", "expected gsfm")),
    }
    check_common(spec, eta)?;
    if tau.abs() >= spec.t {
        return Ok(0.0);
    }
    let coeffs = gsfm_coeffs(model, tau, eta)?;
    let f0 = spec.f_c + model.center_shift();
    let lines = coeffs.orders().map(|n| (n, coeffs.get(n)));
    Ok(line_sum(spec.t, f0, 1.0 / spec.t, tau, eta, lines))
}

#[derive(Clone, Debug)]
pub enum ClosedForm<'a> {
    Sfm,
    Gsfm(&'a FourierPhaseModel),
}

/// `|χ|²` surface from a closed form, computed in parallel over rows.
pub fn closed_af_surface(
    spec: &WaveformSpec,
    form: ClosedForm<'_>,
    delays: &[f64],
    etas: &[f64],
    c: f64,
) -> Result<AmbiguitySurface> {
    let rows: Vec<Vec<f64>> = etas
        .par_iter()
        .map(|&eta| {
            delays
                .iter()
                .map(|&tau| {
                    let m = match &form {
                        ClosedForm::Sfm => sfm_af_closed(spec, tau, eta)?,
                        ClosedForm::Gsfm(model) => gsfm_af_closed(spec, model, tau, eta)?,
                    };
                    Ok(m * m)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(AmbiguitySurface {
        delays: delays.to_vec(),
        etas: etas.to_vec(),
        velocities: etas.iter().map(|&e| velocity_of_eta(e, c)).collect(),
        values: rows.into_iter().flatten().collect(),
        c,
        clipped: 0,
    })
}
