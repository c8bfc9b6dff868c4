//! SE-versus-PAPR comparisons across waveform families.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{bandwidth_98, metrics_nfft, papr, spectral_efficiency};
use crate::ambiguity::{acf_window, mainlobe_width};
use crate::error::{Error, Result};
use crate::signal::{spectrum_of, Taper};
use crate::waveforms::{generate, welch_orders, Family, Symmetry, WaveformSpec};

/// Time-bandwidth products of the standard comparison.
pub const FIG8_TBPS: [f64; 4] = [50.0, 100.0, 200.0, 500.0];

const SWEEP_T: f64 = 0.5;
const SWEEP_FC: f64 = 2000.0;
/// GSFM modulation term per hertz of swept bandwidth (253.78 at 500 Hz).
const ALPHA_PER_HZ: f64 = 253.78 / 500.0;
const SWEEP_RHO: f64 = 2.9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepBand {
    /// Each group's GSFM 98% bandwidth.
    Auto,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub group: String,
    pub name: String,
    pub family: String,
    pub tbp: f64,
    pub band_hz: f64,
    pub papr_db: f64,
    pub se: f64,
    pub error: Option<String>,
}

fn group_key(spec: &WaveformSpec) -> String {
    spec.group.clone().unwrap_or_else(|| spec.label())
}

fn band_98_of(spec: &WaveformSpec) -> Result<f64> {
    let sig = generate(spec)?;
    bandwidth_98(&spectrum_of(&sig, metrics_nfft(&sig))?, spec.f_c)
}

fn row_for(spec: &WaveformSpec, band: Result<f64>) -> SweepRow {
    let mut row = SweepRow {
        group: group_key(spec),
        name: spec.label(),
        family: spec.family.name().to_string(),
        tbp: f64::NAN,
        band_hz: f64::NAN,
        papr_db: f64::NAN,
        se: f64::NAN,
        error: None,
    };
    let outcome = band.and_then(|band| {
        let sig = generate(spec)?;
        let spectrum = spectrum_of(&sig, metrics_nfft(&sig))?;
        Ok((band, papr(&sig)?, spectral_efficiency(&spectrum, spec.f_c, band)?))
    });
    match outcome {
        Ok((band, p, se)) => {
            row.band_hz = band;
            row.tbp = spec.t * band;
            row.papr_db = p;
            row.se = se;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One row per spec, in input order. With `SweepBand::Auto`, rows are
/// grouped by `group` (or name) and the SE band is the 98% bandwidth of the
/// group's first GSFM; rows without one report an error.
pub fn se_papr_sweep(specs: &[WaveformSpec], band: SweepBand) -> Vec<SweepRow> {
    let bands: BTreeMap<String, std::result::Result<f64, String>> = match band {
        SweepBand::Fixed(_) => BTreeMap::new(),
        SweepBand::Auto => {
            let mut firsts: BTreeMap<String, &WaveformSpec> = BTreeMap::new();
            for s in specs.iter().filter(|s| s.family == Family::Gsfm) {
                firsts.entry(group_key(s)).or_insert(s);
            }
            firsts
                .into_par_iter()
                .map(|(k, s)| (k, band_98_of(s).map_err(|e| e.to_string())))
                .collect()
        }
    };
    specs
        .par_iter()
        .map(|spec| {
            let b = match band {
                SweepBand::Fixed(b) => Ok(b),
                SweepBand::Auto => match bands.get(&group_key(spec)) {
                    Some(Ok(b)) => Ok(*b),
                    Some(Err(e)) => Err(Error::numeric("band", format!("GSFM companion failed: {e}"))),
                    None => Err(Error::param("group", "no GSFM companion in group")),
                },
            };
            row_for(spec, b)
        })
        .collect()
}

/// Rows not dominated in (lower PAPR, higher SE) by another row of their group.
pub fn pareto_undominated(rows: &[SweepRow]) -> Vec<bool> {
    rows.iter()
        .map(|r| {
            if r.error.is_some() {
                return false;
            }
            !rows.iter().any(|o| {
                o.error.is_none()
                    && o.group == r.group
                    && o.papr_db <= r.papr_db
                    && o.se >= r.se
                    && (o.papr_db < r.papr_db || o.se > r.se)
            })
        })
        .collect()
}

fn acf_width(spec: &WaveformSpec, window: f64) -> Result<f64> {
    let sig = generate(spec)?;
    let w = mainlobe_width(&acf_window(&sig, window), 3.0)?;
    Ok(if w.crossed { w.width } else { f64::INFINITY })
}

/// Integer chip count whose ACF −3 dB width is closest to `target`.
fn match_chips(make: impl Fn(usize) -> WaveformSpec, start: usize, target: f64) -> Result<usize> {
    let window = 8.0 * target;
    let mut n = start.max(2);
    for _ in 0..4 {
        let w = acf_width(&make(n), window)?;
        let next = ((n as f64 * w / target).round() as usize).max(2);
        if next == n {
            break;
        }
        n = next;
    }
    let mut best = (f64::INFINITY, n);
    for cand in n.saturating_sub(3).max(2)..=n + 3 {
        let err = (acf_width(&make(cand), window)? - target).abs();
        if err < best.0 {
            best = (err, cand);
        }
    }
    Ok(best.1)
}

/// Matched comparison set for one time-bandwidth product `T·Δf` with
/// `T = 0.5 s` and `f_c = 2 kHz`:
///
/// * the reference GSFM (nonsymmetric, `ρ = 2.9`, Tukey 0.1);
/// * Hann-chip BPSK, untapered QPSK and Tukey-0.85-chip Costas, each with its
///   bandwidth knob set so the ACF −3 dB width matches the GSFM's;
/// * untapered BPSK with `T·B98` chips, `B98` being the GSFM's 98% bandwidth.
pub fn fig8_group(tbp: f64) -> Result<Vec<WaveformSpec>> {
    if !(tbp > 0.0) {
        return Err(Error::param("tbp", format!("must be positive, got {tbp}")));
    }
    let group = format!("tbp{tbp}");
    let df = tbp / SWEEP_T;
    let gsfm = WaveformSpec::gsfm_alpha(SWEEP_T, SWEEP_FC, df, SWEEP_RHO, ALPHA_PER_HZ * df, Symmetry::Nonsymmetric)
        .with_taper(Taper::tukey(0.1))
        .with_name("gsfm")
        .with_group(group.clone());
    let target = acf_width(&gsfm, 8.0 / df)?;
    let b98 = band_98_of(&gsfm)?;

    let hann_bpsk = |n: usize| {
        WaveformSpec::bpsk(SWEEP_T, SWEEP_FC, n)
            .with_taper(Taper::hann().per_chip())
            .with_name("bpsk_hann")
            .with_group(group.clone())
    };
    let n_hann = match_chips(hann_bpsk, (1.5 * tbp).round() as usize, target)?;

    let qpsk = |n: usize| WaveformSpec::qpsk(SWEEP_T, SWEEP_FC, n).with_name("qpsk").with_group(group.clone());
    let n_qpsk = match_chips(qpsk, (1.4 * tbp).round() as usize, target)?;

    let order = welch_orders(64)
        .into_iter()
        .min_by(|&a, &b| ((a as f64) - tbp.sqrt()).abs().total_cmp(&((b as f64) - tbp.sqrt()).abs()))
        .unwrap_or(1);
    let costas = |span: f64| {
        WaveformSpec::costas(SWEEP_T, SWEEP_FC, span, order)
            .with_taper(Taper::tukey(0.85).per_chip())
            .with_name("costas_tukey085")
            .with_group(group.clone())
    };
    let mut span = df;
    for _ in 0..8 {
        let w = acf_width(&costas(span), 8.0 * target)?;
        span *= w / target;
    }

    let rect_bpsk = WaveformSpec::bpsk(SWEEP_T, SWEEP_FC, (SWEEP_T * b98).round() as usize)
        .with_name("bpsk_rect")
        .with_group(group.clone());

    Ok(vec![gsfm.clone(), costas(span), hann_bpsk(n_hann), qpsk(n_qpsk), rect_bpsk])
}
