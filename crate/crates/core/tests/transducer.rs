use std::path::Path;

use sonarwave::ambiguity::{acf_window, ambiguity_numeric, linspace, peak_sidelobe, SOUND_SPEED};
use sonarwave::analysis::{metrics_nfft, papr, spectral_efficiency};
use sonarwave::signal::{spectrum_of, Taper};
use sonarwave::transducer::{apply_response, equalize, make_response, transmit, trw_energy, trw_report, TransducerResponse};
use sonarwave::waveforms::{generate, WaveformSpec};

const FC: f64 = 110e3;

fn raw() -> TransducerResponse {
    make_response(FC, (100e3, 120e3), 4.07).unwrap()
}

fn flat() -> TransducerResponse {
    equalize(&raw(), 0.39).unwrap().response
}

fn trw_spec(name: &str) -> WaveformSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../cli/examples/trw").join(format!("{name}.json"));
    WaveformSpec::from_json_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const TABLE_ONE: [&str; 10] =
    ["lfm_i", "bpsk_i", "gsfm_i", "gsfm_ii", "lfm_ii", "costas_i", "costas_ii", "bpsk_ii", "gsfm_iii", "gsfm_iv"];

fn narrowband() -> Vec<WaveformSpec> {
    TABLE_ONE[..4].iter().map(|n| trw_spec(n)).collect()
}

fn in_band_min(r: &TransducerResponse) -> f64 {
    (0..=2000).map(|i| r.magnitude_db(100e3 + 10.0 * i as f64)).fold(f64::INFINITY, f64::min)
}

#[test]
fn equalized_ripple_and_peak() {
    let r = raw();
    assert!((r.measured_ripple() - 4.07).abs() < 0.05);
    let e = flat();
    assert!((e.measured_ripple() - 0.39).abs() < 0.05);
    assert!((e.peak_gain_db - (in_band_min(&r) + 0.39)).abs() < 0.05);
    for f in [60e3, 90e3, 130e3, 200e3] {
        assert_eq!(r.magnitude_db(f), e.magnitude_db(f));
    }
}

#[test]
fn response_is_linear() {
    let (sig, _, _) = transmit(&trw_spec("gsfm_iv"), &raw()).unwrap();
    let a = apply_response(&sig, &raw()).unwrap();
    let b = apply_response(&sig.scaled(0.5), &raw()).unwrap();
    let worst = a.samples.iter().zip(&b.samples).map(|(x, y)| (x * 0.5 - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn equalization_never_adds_energy() {
    for spec in TABLE_ONE.map(trw_spec) {
        let (_, before, _) = transmit(&spec, &raw()).unwrap();
        let (_, after, _) = transmit(&spec, &flat()).unwrap();
        assert!(trw_energy(&after) <= trw_energy(&before) * (1.0 + 1e-12), "{}", spec.label());
    }
}

#[test]
fn hann_bpsk_below_gsfm_narrowband() {
    let rows = trw_report(&narrowband(), &raw(), "gsfm_ii").unwrap();
    let bpsk = rows.iter().find(|r| r.name == "bpsk_i").unwrap();
    assert!((bpsk.e_tilde_db + 4.2).abs() <= 1.0, "{}", bpsk.e_tilde_db);
}

#[test]
fn equalized_lfm_tracks_gsfm() {
    let rows = trw_report(&narrowband(), &flat(), "gsfm_ii").unwrap();
    let lfm = rows.iter().find(|r| r.name == "lfm_i").unwrap();
    assert!(lfm.e_tilde_db.abs() <= 0.5, "{}", lfm.e_tilde_db);
}

#[test]
fn lower_papr_gives_more_energy_at_matched_se() {
    // Same GSFM with and without its Tukey 0.1 edge: SEs agree within 2%.
    let tapered = trw_spec("gsfm_iv");
    let bare = tapered.clone().with_taper(Taper::rectangular());
    let se = |s: &WaveformSpec| {
        let sig = generate(s).unwrap();
        spectral_efficiency(&spectrum_of(&sig, metrics_nfft(&sig)).unwrap(), FC, 2.0 * s.delta_f).unwrap()
    };
    let (se_a, se_b) = (se(&bare), se(&tapered));
    assert!((se_a - se_b).abs() / se_a < 0.02, "{se_a} {se_b}");
    let p = |s: &WaveformSpec| papr(&generate(s).unwrap()).unwrap();
    let e = |s: &WaveformSpec| transmit(s, &raw()).unwrap().2;
    assert!(p(&bare) < p(&tapered));
    assert!(e(&bare) > e(&tapered));
}

#[test]
fn equalized_sidelobes_stay_close() {
    let spec = trw_spec("gsfm_iv");
    let (_, before, _) = transmit(&spec, &raw()).unwrap();
    let (_, after, _) = transmit(&spec, &flat()).unwrap();
    let psl = |s| peak_sidelobe(&acf_window(s, 0.9 * spec.t));
    let (p_raw, p_eq) = (psl(&before), psl(&after));
    assert!((p_raw - p_eq).abs() <= 3.0, "{p_raw} vs {p_eq}");
    assert!(p_raw <= p_eq + 1.0, "{p_raw} vs {p_eq}");
    let delays = linspace(-spec.t / 2.0, spec.t / 2.0, 41);
    let s = ambiguity_numeric(&after, &delays, &[1.0], SOUND_SPEED).unwrap();
    assert!(s.values.iter().all(|v| *v <= 1.0 + 1e-9));
}
