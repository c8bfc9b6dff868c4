//! Composite transmit-chain frequency response, transducer replica
//! waveforms (TRWs) and the energy and ambiguity comparisons built on them.
//!
//! The parametric response peaks at 0 dB at resonance, falls quadratically
//! (in dB) to `-ripple` at the band edge farthest from resonance and rolls
//! off at 12 dB/octave outside the band. Its phase is that of a
//! second-order resonator whose quality factor reproduces the same ripple.

use std::io::Read;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambiguity::{mainlobe_width, peak_sidelobe_surface, AmbiguitySurface};
use crate::analysis::{energy_efficiency, papr, peak_abs_real};
use crate::error::{Error, Result};
use crate::signal::{fft_plan, next_pow2, SampledSignal};
use crate::waveforms::{generate, WaveformSpec};

const ROLLOFF_DB_PER_OCTAVE: f64 = 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseMode {
    Parametric,
    Tabulated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TablePoint {
    pub freq_hz: f64,
    pub mag_db: f64,
    pub phase_rad: f64,
}

/// In-band attenuation that compresses the magnitude toward its minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flattening {
    pub floor_db: f64,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransducerResponse {
    pub mode: ResponseMode,
    pub f_r: f64,
    pub band: (f64, f64),
    pub ripple_db: f64,
    pub peak_gain_db: f64,
    /// Quadratic in-band curvature, dB/Hz².
    curvature: f64,
    quality: f64,
    table: Vec<TablePoint>,
    flattening: Option<Flattening>,
}

fn check_band(f_r: f64, band: (f64, f64)) -> Result<()> {
    if !(band.0 > 0.0 && band.0 < f_r && f_r < band.1) {
        return Err(Error::param(
            "band",
            format!("need 0 < f_lo < f_r < f_hi, got {} < {f_r} < {}", band.0, band.1),
        ));
    }
    Ok(())
}

/// Parametric response with the requested in-band ripple.
pub fn make_response(f_r: f64, band: (f64, f64), ripple_db: f64) -> Result<TransducerResponse> {
    check_band(f_r, band)?;
    if !(ripple_db >= 0.0) || !ripple_db.is_finite() {
        return Err(Error::param("ripple_db", format!("must be non-negative, got {ripple_db}")));
    }
    let reach = (f_r - band.0).max(band.1 - f_r);
    let edge_f = if f_r - band.0 >= band.1 - f_r { band.0 } else { band.1 };
    let x_edge = (edge_f / f_r - f_r / edge_f).abs();
    Ok(TransducerResponse {
        mode: ResponseMode::Parametric,
        f_r,
        band,
        ripple_db,
        peak_gain_db: 0.0,
        curvature: ripple_db / (reach * reach),
        quality: (10f64.powf(ripple_db / 10.0) - 1.0).sqrt() / x_edge,
        table: Vec::new(),
        flattening: None,
    })
}

/// Tabulated response from CSV rows `freq_hz,mag_db,phase_rad`.
pub fn load_table<R: Read>(input: R, band: (f64, f64)) -> Result<TransducerResponse> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers().map_err(|e| Error::format("table", e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["freq_hz", "mag_db", "phase_rad"] {
        return Err(Error::format("table", "header must be freq_hz,mag_db,phase_rad"));
    }
    let mut table: Vec<TablePoint> = Vec::new();
    for (i, rec) in reader.deserialize().enumerate() {
        let p: TablePoint = rec.map_err(|e| Error::format("table", format!("row {}: {e}", i + 1)))?;
        if let Some(last) = table.last() {
            if !(p.freq_hz > last.freq_hz) {
                return Err(Error::format("table", format!("row {}: frequencies must increase", i + 1)));
            }
        }
        table.push(p);
    }
    from_table(table, band)
}

pub fn from_table(table: Vec<TablePoint>, band: (f64, f64)) -> Result<TransducerResponse> {
    if table.len() < 2 {
        return Err(Error::format("table", "need at least two rows"));
    }
    if band.0 < table[0].freq_hz || band.1 > table[table.len() - 1].freq_hz || !(band.0 < band.1) {
        return Err(Error::format("band", "operational band lies outside the table"));
    }
    let mut resp = TransducerResponse {
        mode: ResponseMode::Tabulated,
        f_r: 0.5 * (band.0 + band.1),
        band,
        ripple_db: 0.0,
        peak_gain_db: 0.0,
        curvature: 0.0,
        quality: 0.0,
        table,
        flattening: None,
    };
    let (lo, hi, f_peak) = resp.in_band_extremes();
    resp.f_r = f_peak;
    resp.ripple_db = hi - lo;
    resp.peak_gain_db = hi;
    Ok(resp)
}

impl TransducerResponse {
    fn base_db(&self, f: f64) -> f64 {
        match self.mode {
            ResponseMode::Tabulated => self.table_lookup(f).0,
            ResponseMode::Parametric => {
                let inband = |f: f64| -self.curvature * (f - self.f_r).powi(2);
                let (lo, hi) = self.band;
                if f <= 0.0 {
                    f64::NEG_INFINITY
                } else if f < lo {
                    inband(lo) - ROLLOFF_DB_PER_OCTAVE * (lo / f).log2()
                } else if f > hi {
                    inband(hi) - ROLLOFF_DB_PER_OCTAVE * (f / hi).log2()
                } else {
                    inband(f)
                }
            }
        }
    }

    fn table_lookup(&self, f: f64) -> (f64, f64) {
        let t = &self.table;
        if f < t[0].freq_hz || f > t[t.len() - 1].freq_hz {
            return (f64::NEG_INFINITY, 0.0);
        }
        let k = t.partition_point(|p| p.freq_hz <= f).clamp(1, t.len() - 1);
        let (a, b) = (&t[k - 1], &t[k]);
        let w = (f - a.freq_hz) / (b.freq_hz - a.freq_hz);
        (a.mag_db + w * (b.mag_db - a.mag_db), a.phase_rad + w * (b.phase_rad - a.phase_rad))
    }

    fn in_band(&self, f: f64) -> bool {
        f >= self.band.0 && f <= self.band.1
    }

    /// Magnitude in dB at a non-negative frequency.
    pub fn magnitude_db(&self, f: f64) -> f64 {
        let base = self.base_db(f);
        match self.flattening {
            Some(fl) if self.in_band(f) => fl.floor_db + (base - fl.floor_db) * fl.scale,
            _ => base,
        }
    }

    pub fn phase(&self, f: f64) -> f64 {
        match self.mode {
            ResponseMode::Tabulated => self.table_lookup(f).1,
            ResponseMode::Parametric => {
                if f <= 0.0 {
                    0.0
                } else {
                    -(self.quality * (f / self.f_r - self.f_r / f)).atan()
                }
            }
        }
    }

    /// Complex gain with Hermitian symmetry for negative frequencies.
    pub fn gain(&self, f: f64) -> Complex64 {
        let fa = f.abs();
        let m = self.magnitude_db(fa);
        if m == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        let h = Complex64::from_polar(10f64.powf(m / 20.0), self.phase(fa));
        if f < 0.0 {
            h.conj()
        } else {
            h
        }
    }

    /// `(min, max, argmax)` of the in-band magnitude on a fine grid.
    fn in_band_extremes(&self) -> (f64, f64, f64) {
        let n = 4001;
        let (mut lo, mut hi, mut at) = (f64::INFINITY, f64::NEG_INFINITY, self.band.0);
        for i in 0..n {
            let f = self.band.0 + (self.band.1 - self.band.0) * i as f64 / (n - 1) as f64;
            let m = self.magnitude_db(f);
            lo = lo.min(m);
            if m > hi {
                hi = m;
                at = f;
            }
        }
        (lo, hi, at)
    }

    /// Measured in-band max − min, dB.
    pub fn measured_ripple(&self) -> f64 {
        let (lo, hi, _) = self.in_band_extremes();
        hi - lo
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equalized {
    pub response: TransducerResponse,
    /// False when the target was not below the current ripple.
    pub applied: bool,
}

/// Attenuation-only flattening of the in-band magnitude to `target_db`
/// ripple; the new peak gain is the old in-band minimum plus the target.
pub fn equalize(resp: &TransducerResponse, target_db: f64) -> Result<Equalized> {
    if !(target_db >= 0.0) {
        return Err(Error::param("target_ripple_db", format!("must be non-negative, got {target_db}")));
    }
    let current = resp.ripple_db;
    if target_db >= current || current <= 0.0 {
        return Ok(Equalized { response: resp.clone(), applied: false });
    }
    let mut base = resp.clone();
    base.flattening = None;
    let (floor, _, _) = base.in_band_extremes();
    let prior_scale = resp.flattening.map(|f| f.scale).unwrap_or(1.0);
    let base_ripple = current / prior_scale;
    let mut out = base;
    out.flattening = Some(Flattening { floor_db: floor, scale: target_db / base_ripple });
    let (_, hi, _) = out.in_band_extremes();
    out.peak_gain_db = hi;
    out.ripple_db = target_db;
    Ok(Equalized { response: out, applied: true })
}

/// Passes the real drive `Re{s}` through the response. The drive must be
/// peak-normalized (`|x| ≤ 1`). The result is the analytic TRW, one quarter
/// longer than the drive to hold the response's ringing.
pub fn apply_response(sig: &SampledSignal, resp: &TransducerResponse) -> Result<SampledSignal> {
    if peak_abs_real(sig) > 1.0 + 1e-9 {
        return Err(Error::param("signal", "drive must be peak-normalized to |x| <= 1"));
    }
    let n = sig.len();
    let n_out = n + n.div_ceil(4);
    let len = next_pow2(2 * n_out);
    let fs = sig.sample_rate;
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (b, s) in buf.iter_mut().zip(&sig.samples) {
        *b = Complex64::new(s.re, 0.0);
    }
    fft_plan(len, false).process(&mut buf);
    let freq = |k: usize| if k < len / 2 { k as f64 } else { k as f64 - len as f64 } * fs / len as f64;
    if resp.mode == ResponseMode::Tabulated {
        let (lo, hi) = (resp.table[0].freq_hz, resp.table[resp.table.len() - 1].freq_hz);
        let total: f64 = buf[..len / 2].iter().map(|v| v.norm_sqr()).sum();
        let covered: f64 = (0..len / 2).filter(|&k| (lo..=hi).contains(&freq(k))).map(|k| buf[k].norm_sqr()).sum();
        if covered < 1e-3 * total {
            return Err(Error::format("table", "signal band lies outside the response table"));
        }
    }
    // Analytic output: keep positive frequencies doubled, DC and Nyquist as is.
    for (k, b) in buf.iter_mut().enumerate() {
        let weight = if k == 0 || k == len / 2 {
            1.0
        } else if k < len / 2 {
            2.0
        } else {
            0.0
        };
        *b *= resp.gain(freq(k)) * (weight / len as f64);
    }
    fft_plan(len, true).process(&mut buf);
    buf.truncate(n_out);
    SampledSignal::new(buf, fs, sig.t0)
}

/// Energy of the real TRW.
pub fn trw_energy(trw: &SampledSignal) -> f64 {
    trw.real_energy()
}

/// Peak-normalized drive, its TRW and the TRW energy.
pub fn transmit(spec: &WaveformSpec, resp: &TransducerResponse) -> Result<(SampledSignal, SampledSignal, f64)> {
    let sig = generate(spec)?;
    let drive = sig.scaled(1.0 / peak_abs_real(&sig));
    let trw = apply_response(&drive, resp)?;
    let e = trw_energy(&trw);
    Ok((drive, trw, e))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrwRow {
    pub name: String,
    pub family: String,
    pub energy: f64,
    pub e_tilde_db: f64,
    pub papr_db: f64,
    pub error: Option<String>,
}

/// TRW energy of each spec relative to the spec named `reference`.
pub fn trw_report(specs: &[WaveformSpec], resp: &TransducerResponse, reference: &str) -> Result<Vec<TrwRow>> {
    let ref_idx = specs
        .iter()
        .position(|s| s.label() == reference)
        .ok_or_else(|| Error::param("reference", format!("no spec named `{reference}`")))?;
    let results: Vec<Result<(f64, f64)>> = specs
        .par_iter()
        .map(|s| {
            let (drive, _, e) = transmit(s, resp)?;
            Ok((e, papr(&drive)?))
        })
        .collect();
    let e_ref = match &results[ref_idx] {
        Ok((e, _)) => *e,
        Err(e) => return Err(Error::numeric("reference", format!("reference row failed: {e}"))),
    };
    Ok(specs
        .iter()
        .zip(results)
        .map(|(s, r)| {
            let mut row = TrwRow {
                name: s.label(),
                family: s.family.name().to_string(),
                energy: f64::NAN,
                e_tilde_db: f64::NAN,
                papr_db: f64::NAN,
                error: None,
            };
            match r.and_then(|(e, p)| Ok((e, p, energy_efficiency(e, e_ref)?))) {
                Ok((e, p, et)) => {
                    row.energy = e;
                    row.papr_db = p;
                    row.e_tilde_db = et;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AfFidelity {
    /// −3 dB zero-Doppler delay width of `b` over that of `a`.
    pub width_ratio: f64,
    /// Peak sidelobe of `b` minus that of `a`, dB.
    pub psl_delta_db: f64,
    pub max_abs_diff: f64,
}

pub fn compare_af(a: &AmbiguitySurface, b: &AmbiguitySurface) -> Result<AfFidelity> {
    if !a.same_grid(b) {
        return Err(Error::param("grid", "surfaces must share delay, Doppler and sound-speed grids"));
    }
    let i = a.zero_doppler_index();
    let wa = mainlobe_width(&a.delay_cut(i), 3.0)?.width;
    let wb = mainlobe_width(&b.delay_cut(i), 3.0)?.width;
    let (pa, pb) = (peak_sidelobe_surface(a), peak_sidelobe_surface(b));
    let psl_delta_db = if pa == pb { 0.0 } else { pb - pa };
    let max_abs_diff = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(AfFidelity { width_ratio: wb / wa, psl_delta_db, max_abs_diff })
}
