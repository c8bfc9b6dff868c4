//! Generators for the CW, LFM, SFM, GSFM, Costas, BPSK and QPSK families.
//!
//! Every generator returns a unit-energy complex analytic passband signal
//! `w(t)·e^{jψ(t)}` sampled on the midpoint lattice of its support.

mod codes;
mod fourier;
mod spec;

pub use codes::{costas_code, is_costas, m_sequence, welch_orders};
pub use fourier::{gsfm_fourier_coeffs, FourierPhaseModel, TAIL_TOLERANCE};
pub use spec::{
    alpha_from_cycles, cycles_from_alpha, Family, QpskSign, Symmetry, WaveformSpec, OVERSAMPLE,
};

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{SampledSignal, TaperScope};

/// Default QPSK transition width in chips.
pub const QPSK_RAMP_DEFAULT: f64 = 1.0;

pub fn generate(spec: &WaveformSpec) -> Result<SampledSignal> {
    match spec.family {
        Family::Cw => gen_cw(spec),
        Family::Lfm => gen_lfm(spec),
        Family::Sfm => gen_sfm(spec),
        Family::Gsfm => gen_gsfm(spec),
        Family::Costas => gen_costas(spec),
        Family::Bpsk => gen_bpsk(spec),
        Family::Qpsk => gen_qpsk(spec),
    }
}

struct Lattice {
    fs: f64,
    n: usize,
    start: f64,
}

impl Lattice {
    fn of(spec: &WaveformSpec) -> Self {
        let start = match (spec.family, spec.symmetry) {
            (Family::Gsfm, Symmetry::Nonsymmetric) => 0.0,
            _ => -spec.t / 2.0,
        };
        Lattice { fs: spec.sample_rate_value(), n: spec.n_samples(), start }
    }

    fn time(&self, i: usize) -> f64 {
        self.start + (i as f64 + 0.5) / self.fs
    }

    /// Chip index and position within the chip in `[0, 1)`.
    fn chip(&self, i: usize, chips: usize) -> (usize, f64) {
        let u = (i as f64 + 0.5) * chips as f64 / self.n as f64;
        let k = (u.floor() as usize).min(chips - 1);
        (k, u - k as f64)
    }
}

fn expect_family(spec: &WaveformSpec, family: Family) -> Result<()> {
    if spec.family != family {
        return Err(Error::param(
            "family",
            format!("expected {}, got {}", family.name(), spec.family.name()),
        ));
    }
    spec.validate()
}

/// Applies the taper and carrier, then normalizes to unit energy.
/// `phase_offset` is the modulation phase on top of `2π f_c t`.
fn assemble(
    spec: &WaveformSpec,
    lat: &Lattice,
    chips: Option<usize>,
    phase_offset: impl Fn(usize, f64) -> f64,
) -> Result<SampledSignal> {
    let samples = (0..lat.n)
        .map(|i| {
            let t = lat.time(i);
            let w = match (spec.taper.scope, chips) {
                (TaperScope::PerChip, Some(nc)) => spec.taper.value(lat.chip(i, nc).1),
                _ => spec.taper.value((i as f64 + 0.5) / lat.n as f64),
            };
            let psi = 2.0 * PI * spec.f_c * t + spec.carrier_phase + phase_offset(i, t);
            Complex64::from_polar(w, psi)
        })
        .collect();
    let mut sig = SampledSignal::new(samples, lat.fs, lat.time(0))?;
    sig.normalize_energy()?;
    Ok(sig)
}

pub fn gen_cw(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Cw)?;
    assemble(spec, &Lattice::of(spec), None, |_, _| 0.0)
}

/// Phase `π(Δf/T)t²` on `[-T/2, T/2]`.
pub fn gen_lfm(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Lfm)?;
    let k = PI * spec.delta_f / spec.t;
    assemble(spec, &Lattice::of(spec), None, |_, t| k * t * t)
}

/// Phase `β sin(2π f_m t)` with `β = Δf/(2 f_m)`.
pub fn gen_sfm(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Sfm)?;
    let fm = spec.f_m.unwrap_or(0.0);
    let beta = spec.delta_f / (2.0 * fm);
    assemble(spec, &Lattice::of(spec), None, |_, t| beta * (2.0 * PI * fm * t).sin())
}

/// Instantaneous frequency offset `(Δf/2) sin(2πα|t|^ρ)` from the carrier.
pub fn gsfm_if_offset(delta_f: f64, alpha: f64, rho: f64, t: f64) -> f64 {
    0.5 * delta_f * (2.0 * PI * alpha * t.abs().powf(rho)).sin()
}

// 8-point Gauss–Legendre rule on [-1, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

/// `2π∫₀^p f` at each ascending non-negative point `p`, integrated piecewise
/// with subintervals no longer than `max_step`.
fn cumulative_phase(f: impl Fn(f64) -> f64, points: &[f64], max_step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &p in points {
        let pieces = ((p - prev) / max_step).ceil().max(1.0) as usize;
        let h = (p - prev) / pieces as f64;
        for j in 0..pieces {
            let a = prev + j as f64 * h;
            acc += gauss_legendre(&f, a, a + h);
        }
        prev = p;
        out.push(2.0 * PI * acc);
    }
    out
}

/// GSFM with phase obtained by cumulative quadrature of the IF.
pub fn gen_gsfm(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Gsfm)?;
    let lat = Lattice::of(spec);
    let (alpha, rho, df) = (spec.alpha_value()?, spec.rho_value(), spec.delta_f);
    let f = |t: f64| gsfm_if_offset(df, alpha, rho, t);
    // Resolve each IF cycle with at least 64 quadrature panels.
    let rate = spec.modulation_rate().max(1.0 / spec.t);
    let max_step = (1.0 / (64.0 * rate)).min(1.0 / lat.fs);
    let phase: Vec<f64> = match spec.symmetry {
        Symmetry::Nonsymmetric => {
            let pts: Vec<f64> = (0..lat.n).map(|i| lat.time(i)).collect();
            cumulative_phase(f, &pts, max_step)
        }
        Symmetry::Even => {
            // The phase is odd in t; integrate over |t| once.
            let mut abs_t: Vec<f64> = (0..lat.n).map(|i| lat.time(i).abs()).collect();
            abs_t.sort_by(f64::total_cmp);
            abs_t.dedup();
            let ph = cumulative_phase(f, &abs_t, max_step);
            (0..lat.n)
                .map(|i| {
                    let t = lat.time(i);
                    let k = abs_t.partition_point(|&v| v < t.abs());
                    ph[k].copysign(t)
                })
                .collect()
        }
    };
    assemble(spec, &lat, None, |i, _| phase[i])
}

/// Frequency-hopped chips `f_c + (code_i − (N+1)/2)·Δf/N` with a continuous
/// phase across chip boundaries.
pub fn gen_costas(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Costas)?;
    let code = spec.resolved_code()?;
    let nc = code.len();
    let lat = Lattice::of(spec);
    let tc = spec.t / nc as f64;
    let offsets: Vec<f64> = code
        .iter()
        .map(|&c| (c as f64 - (nc as f64 + 1.0) / 2.0) * spec.delta_f / nc as f64)
        .collect();
    let mut chip_start_phase = vec![0.0; nc];
    for k in 1..nc {
        chip_start_phase[k] = chip_start_phase[k - 1] + 2.0 * PI * offsets[k - 1] * tc;
    }
    assemble(spec, &lat, Some(nc), |i, _| {
        let (k, x) = lat.chip(i, nc);
        chip_start_phase[k] + 2.0 * PI * offsets[k] * x * tc
    })
}

/// Binary phase chips `θ_i ∈ {0, π}` on a constant carrier.
pub fn gen_bpsk(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Bpsk)?;
    let code = spec.resolved_code()?;
    let nc = code.len();
    let lat = Lattice::of(spec);
    assemble(spec, &lat, Some(nc), |i, _| PI * code[lat.chip(i, nc).0] as f64)
}

/// Unwrapped chip phases of `q_i = j^{±i} e^{jθ_i}` (zero-based `i`): every
/// step between neighbours is `±π/2`.
pub fn qpsk_chip_phases(bits: &[i64], sign: QpskSign) -> Vec<f64> {
    let s = match sign {
        QpskSign::Plus => 1.0,
        QpskSign::Minus => -1.0,
    };
    let raw = |i: usize| PI * bits[i] as f64 + s * 0.5 * PI * i as f64;
    let mut out = Vec::with_capacity(bits.len());
    for i in 0..bits.len() {
        if i == 0 {
            out.push(raw(0));
            continue;
        }
        let mut step = (raw(i) - raw(i - 1)).rem_euclid(2.0 * PI);
        if step > PI {
            step -= 2.0 * PI;
        }
        out.push(out[i - 1] + step);
    }
    out
}

/// Quadriphase chips with linear phase transitions of width `qpsk_ramp`
/// chips centred on each chip boundary; the envelope stays constant.
pub fn gen_qpsk(spec: &WaveformSpec) -> Result<SampledSignal> {
    expect_family(spec, Family::Qpsk)?;
    let bits = spec.resolved_code()?;
    let nc = bits.len();
    let phases = qpsk_chip_phases(&bits, spec.qpsk_sign);
    let ramp = spec.qpsk_ramp.unwrap_or(QPSK_RAMP_DEFAULT);
    let lat = Lattice::of(spec);
    assemble(spec, &lat, Some(nc), |i, _| {
        let u = (i as f64 + 0.5) * nc as f64 / lat.n as f64;
        let b = u.round();
        let d = u - b;
        let bi = b as usize;
        if bi >= 1 && bi < nc && d.abs() < ramp / 2.0 {
            let (p0, p1) = (phases[bi - 1], phases[bi]);
            p0 + (p1 - p0) * (d / ramp + 0.5)
        } else {
            phases[lat.chip(i, nc).0]
        }
    })
}
