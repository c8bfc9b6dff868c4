//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test -p sonarwave-cli --test acceptance`.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sonarwave::ambiguity::{
    acf_window, ambiguity_numeric, closed_af_surface, eta_grid, linspace, peak_sidelobe, AmbiguitySurface,
    ClosedForm, SOUND_SPEED,
};
use sonarwave::analysis::{
    self, fig8_group, gsfm_spectrum_closed, metrics_nfft, pareto_undominated, se_papr_sweep, sfm_spectrum_closed,
    SweepBand, FIG8_TBPS,
};
use sonarwave::gbf::{bessel_j, gbf_coeffs, support_bound};
use sonarwave::signal::{spectrum_of, Spectrum};
use sonarwave::transducer::{self, compare_af, equalize, make_response, trw_report};
use sonarwave::waveforms::{generate, FourierPhaseModel, WaveformSpec};
use sonarwave::Complex64;
use sonarwave_cli::read_spec;

type Check = Result<(bool, String), String>;

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn spec(name: &str) -> WaveformSpec {
    read_spec(&example(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel_l2(a: &Spectrum, b: &Spectrum, upto: usize) -> f64 {
    let num: f64 = (0..upto).map(|k| (a.values[k] - b.values[k]).norm_sqr()).sum();
    let den: f64 = (0..upto).map(|k| b.values[k].norm_sqr()).sum();
    (num / den).sqrt()
}

fn c1_papr_floor() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for name in ["cw.json", "fig1_lfm.json", "fig5_sfm.json", "fig6_gsfm.json"] {
        let s = spec(name);
        let start = Instant::now();
        let p = analysis::papr(&generate(&s).map_err(fail)?).map_err(fail)?;
        let took = start.elapsed();
        ok &= (p - 3.01).abs() <= 0.05 && took < Duration::from_secs(1);
        notes.push(format!("{}={p:.3} dB/{:.2}s", s.family.name(), took.as_secs_f64()));
    }
    Ok((ok, notes.join(" ")))
}

fn c2_reference_gsfm() -> Check {
    let s = spec("gsfm_iv_a.json");
    let sig = generate(&s).map_err(fail)?;
    let m = analysis::metrics(&sig, s.f_c, None, analysis::carson_for(&s)).map_err(fail)?;
    let ok = (m.band_98 - 632.0).abs() <= 0.03 * 632.0 && (3.15..=3.35).contains(&m.papr_db);
    Ok((ok, format!("B98={:.1} Hz PAPR={:.3} dB", m.band_98, m.papr_db)))
}

fn c3_dominance() -> Check {
    let mut ok = true;
    let mut notes = Vec::new();
    for tbp in FIG8_TBPS {
        let group: Vec<WaveformSpec> =
            fig8_group(tbp).map_err(fail)?.into_iter().filter(|s| s.name.as_deref() != Some("bpsk_rect")).collect();
        let rows = se_papr_sweep(&group, SweepBand::Auto);
        if let Some(r) = rows.iter().find(|r| r.error.is_some()) {
            return Err(format!("tbp {tbp} {}: {}", r.name, r.error.clone().unwrap_or_default()));
        }
        let flags = pareto_undominated(&rows);
        let g = rows.iter().position(|r| r.family == "gsfm").ok_or("no gsfm row")?;
        ok &= flags[g];
        let cells: Vec<String> = rows.iter().map(|r| format!("{}({:.2},{:.3})", r.name, r.papr_db, r.se)).collect();
        notes.push(format!("tbp{tbp}: {}", cells.join(" ")));
    }
    // Untapered BPSK with the reference GSFM's TBP, SE in that GSFM's band.
    let gsfm = spec("gsfm_iv_a.json");
    let gsig = generate(&gsfm).map_err(fail)?;
    let b98 = analysis::bandwidth_98(&spectrum_of(&gsig, metrics_nfft(&gsig)).map_err(fail)?, gsfm.f_c).map_err(fail)?;
    let chips = (gsfm.t * b98).round() as usize;
    let bpsk = generate(&WaveformSpec::bpsk(gsfm.t, gsfm.f_c, chips)).map_err(fail)?;
    let se = analysis::spectral_efficiency(&spectrum_of(&bpsk, metrics_nfft(&bpsk)).map_err(fail)?, gsfm.f_c, b98)
        .map_err(fail)?;
    ok &= (se - 0.80).abs() <= 0.03;
    notes.push(format!("rect bpsk N={chips} SE={se:.3}"));
    Ok((ok, notes.join("; ")))
}

fn af_grid(t: f64) -> (Vec<f64>, Vec<f64>) {
    (linspace(-t / 2.0, t / 2.0, 101), eta_grid(20.0, 101, SOUND_SPEED).unwrap())
}

fn max_dev(a: &AmbiguitySurface, b: &AmbiguitySurface) -> (f64, f64, f64) {
    let all = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let mag = a.values.iter().zip(&b.values).map(|(x, y)| (x.sqrt() - y.sqrt()).abs()).fold(0.0, f64::max);
    let i = a.zero_doppler_index();
    let zero = a.row(i).iter().zip(b.row(i)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    (all, mag, zero)
}

fn c4_closed_af() -> Check {
    let sfm = spec("fig5_sfm.json");
    let (d, e) = af_grid(sfm.t);
    let num = ambiguity_numeric(&generate(&sfm).map_err(fail)?, &d, &e, SOUND_SPEED).map_err(fail)?;
    let closed = closed_af_surface(&sfm, ClosedForm::Sfm, &d, &e, SOUND_SPEED).map_err(fail)?;
    let (s_all, s_mag, s_zero) = max_dev(&closed, &num);

    let gsfm = spec("fig6_gsfm.json");
    let (d, e) = af_grid(gsfm.t);
    let model = FourierPhaseModel::auto(&gsfm).map_err(fail)?;
    let num = ambiguity_numeric(&generate(&gsfm).map_err(fail)?, &d, &e, SOUND_SPEED).map_err(fail)?;
    let closed = closed_af_surface(&gsfm, ClosedForm::Gsfm(&model), &d, &e, SOUND_SPEED).map_err(fail)?;
    let (g_all, g_mag, g_zero) = max_dev(&closed, &num);

    let ok = s_all < 0.02 && g_all < 0.03;
    Ok((
        ok,
        format!(
            "sfm max|Δ|χ|²|={s_all:.4} (|χ| {s_mag:.4}, zero-Doppler {s_zero:.1e}); \
             gsfm max|Δ|χ|²|={g_all:.4} (|χ| {g_mag:.4}, zero-Doppler {g_zero:.1e}, K={})",
            model.k
        ),
    ))
}

fn c5_closed_spectrum() -> Check {
    let sfm = spec("fig5_sfm.json");
    let fft = spectrum_of(&generate(&sfm).map_err(fail)?, 1 << 17).map_err(fail)?;
    let half = fft.freqs.len() / 2;
    let closed = sfm_spectrum_closed(&sfm, &fft.freqs).map_err(fail)?;
    let e_sfm = rel_l2(&fft, &closed, half);

    let gsfm = spec("fig6_gsfm.json");
    let gfft = spectrum_of(&generate(&gsfm).map_err(fail)?, 1 << 17).map_err(fail)?;
    let model = FourierPhaseModel::auto(&gsfm).map_err(fail)?;
    let gclosed = gsfm_spectrum_closed(&gsfm, &model, &gfft.freqs).map_err(fail)?;
    let e_gsfm = rel_l2(&gfft, &gclosed, gfft.freqs.len() / 2);

    // ρ = 1: the one-harmonic phase model of the SFM through the GBF series.
    let single = FourierPhaseModel::auto(&sfm).map_err(fail)?;
    let via_gbf = gsfm_spectrum_closed(&sfm, &single, &fft.freqs).map_err(fail)?;
    let e_collapse = rel_l2(&via_gbf, &closed, half);

    let ok = e_sfm < 1e-3 && e_gsfm < 1e-2 && e_collapse < 1e-6;
    Ok((ok, format!("sfm L2={e_sfm:.2e} gsfm L2={e_gsfm:.2e} collapse L2={e_collapse:.2e}")))
}

fn c6_gbf() -> Check {
    let mut worst_id: f64 = 0.0;
    for i in 0..=100 {
        let x = 0.5 * i as f64;
        let args = [Complex64::new(x, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let g = gbf_coeffs(&args, support_bound(&args).max(60), None).map_err(fail)?;
        for n in 0..=60 {
            worst_id = worst_id.max((g.get(n) - Complex64::new(bessel_j(n as i32, x), 0.0)).norm());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst_norm, mut worst_grid): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let k = rng.gen_range(1..=10);
        let betas: Vec<Complex64> = (0..k).map(|_| Complex64::new(rng.gen_range(-20.0..=20.0), 0.0)).collect();
        let n = support_bound(&betas);
        let g = gbf_coeffs(&betas, n, None).map_err(fail)?;
        worst_norm = worst_norm.max((g.energy() - 1.0).abs());
        let g2 = gbf_coeffs(&betas, 2 * n, None).map_err(fail)?;
        for m in g.orders() {
            worst_grid = worst_grid.max((g.get(m) - g2.get(m)).norm());
        }
    }
    let ok = worst_id < 1e-10 && worst_norm < 1e-8 && worst_grid < 1e-12;
    Ok((ok, format!("identity {worst_id:.1e} normalization {worst_norm:.1e} grid {worst_grid:.1e}")))
}

fn c7_acf_quality() -> Check {
    let psl = |s: &WaveformSpec| -> Result<f64, String> {
        Ok(peak_sidelobe(&acf_window(&generate(s).map_err(fail)?, 0.95 * s.t)))
    };
    let sfm = spec("fig5_sfm.json");
    let gsfm = spec("fig6_gsfm.json");
    let (p_sfm, p_gsfm) = (psl(&sfm)?, psl(&gsfm)?);

    let cut = acf_window(&generate(&sfm).map_err(fail)?, 0.25);
    let fm = sfm.f_m.unwrap_or(0.0);
    let lobe = |lo: f64, hi: f64| {
        cut.coords
            .iter()
            .zip(&cut.values)
            .filter(|(t, _)| **t >= lo && **t <= hi)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(t, _)| *t)
            .unwrap_or(f64::NAN)
    };
    let first = lobe(0.5 / fm, 1.5 / fm);
    let second = lobe(1.5 / fm, 2.5 / fm);
    let spacing_ok = (first * fm - 1.0).abs() < 0.05 && ((second - first) * fm - 1.0).abs() < 0.05;

    let bpsk = WaveformSpec::bpsk(0.5, 2000.0, 63);
    let p_bpsk = psl(&bpsk)?;

    let ok = p_gsfm <= p_sfm - 10.0 && spacing_ok && p_bpsk <= -15.0;
    Ok((
        ok,
        format!(
            "psl sfm {p_sfm:.2} dB gsfm {p_gsfm:.2} dB (margin {:.2}); grating lobes at {first:.4}, {second:.4} s; bpsk63 psl {p_bpsk:.2} dB",
            p_sfm - p_gsfm
        ),
    ))
}

fn e_tilde(rows: &[transducer::TrwRow], name: &str) -> Result<f64, String> {
    let r = rows.iter().find(|r| r.name == name).ok_or(format!("missing row {name}"))?;
    match &r.error {
        Some(e) => Err(format!("{name}: {e}")),
        None => Ok(r.e_tilde_db),
    }
}

fn c8_trw() -> Check {
    let load = |names: &[&str]| -> Vec<WaveformSpec> { names.iter().map(|n| spec(&format!("trw/{n}.json"))).collect() };
    let narrow = load(&["lfm_i", "bpsk_i", "gsfm_i", "gsfm_ii"]);
    let wide = load(&["lfm_ii", "costas_i", "costas_ii", "bpsk_ii", "gsfm_iii", "gsfm_iv"]);
    let raw = make_response(110e3, (100e3, 120e3), 4.07).map_err(fail)?;
    let eq = equalize(&raw, 0.39).map_err(fail)?.response;

    let nb = trw_report(&narrow, &raw, "gsfm_ii").map_err(fail)?;
    let wb = trw_report(&wide, &raw, "gsfm_iv").map_err(fail)?;
    let bpsk_i = e_tilde(&nb, "bpsk_i")?;
    let bpsk_ii = e_tilde(&wb, "bpsk_ii")?;
    let costas_ii = e_tilde(&wb, "costas_ii")?;

    let nb_eq = trw_report(&narrow, &eq, "gsfm_ii").map_err(fail)?;
    let wb_eq = trw_report(&wide, &eq, "gsfm_iv").map_err(fail)?;
    let gap_nb = (e_tilde(&nb_eq, "lfm_i")? - e_tilde(&nb_eq, "gsfm_ii")?).abs();
    let gap_wb = (e_tilde(&wb_eq, "lfm_ii")? - e_tilde(&wb_eq, "gsfm_iv")?).abs();

    let g4 = wide.iter().find(|s| s.label() == "gsfm_iv").ok_or("missing gsfm_iv")?;
    let (_, trw_raw, _) = transducer::transmit(g4, &raw).map_err(fail)?;
    let (_, trw_eq, _) = transducer::transmit(g4, &eq).map_err(fail)?;
    let delays = linspace(-2e-4, 2e-4, 801);
    let surf = |s| ambiguity_numeric(s, &delays, &[1.0], SOUND_SPEED).map_err(fail);
    let fid = compare_af(&surf(&trw_eq)?, &surf(&trw_raw)?).map_err(fail)?;
    let widening = fid.width_ratio - 1.0;

    let in_range = |v: f64, lo: f64, hi: f64| (lo..=hi).contains(&v);
    let ok = in_range(bpsk_i, -5.4, -3.0)
        && in_range(bpsk_ii, -5.4, -3.0)
        && in_range(costas_ii, -5.1, -3.0)
        && gap_nb <= 0.7
        && gap_wb <= 0.7
        && widening <= 0.15;
    Ok((
        ok,
        format!(
            "non-eq: bpsk_i {bpsk_i:.2} bpsk_ii {bpsk_ii:.2} costas_ii {costas_ii:.2} dB; \
             eq lfm-gsfm gap {gap_nb:.2}/{gap_wb:.2} dB; gsfm_iv widening {:.1}%",
            100.0 * widening
        ),
    ))
}

fn c9_properties() -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    let specs = ["cw.json", "fig1_lfm.json", "fig2_costas.json", "fig3_bpsk.json", "fig4_qpsk.json", "fig5_sfm.json", "fig6_gsfm.json", "fig7_gsfm.json"];
    let (mut parseval, mut unit, mut sym, mut origin, mut scale): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for name in specs {
        let s = spec(name);
        let sig = generate(&s).map_err(fail)?;
        let sp = spectrum_of(&sig, metrics_nfft(&sig)).map_err(fail)?;
        parseval = parseval.max((sp.energy() - sig.energy()).abs() / sig.energy());
        unit = unit.max((sig.energy() - 1.0).abs());
        let cut = acf_window(&sig, 0.4 * s.t);
        let n = cut.values.len();
        for i in 0..n / 2 {
            sym = sym.max((cut.values[i] - cut.values[n - 1 - i]).abs());
        }
        origin = origin.max((cut.values[n / 2] - 1.0).abs());
        let louder = sig.scaled(7.5);
        let band = analysis::bandwidth_98(&sp, s.f_c).map_err(fail)?;
        let sp2 = spectrum_of(&louder, metrics_nfft(&louder)).map_err(fail)?;
        scale = scale.max((analysis::papr(&sig).map_err(fail)? - analysis::papr(&louder).map_err(fail)?).abs());
        scale = scale.max(
            (analysis::spectral_efficiency(&sp, s.f_c, band).map_err(fail)?
                - analysis::spectral_efficiency(&sp2, s.f_c, band).map_err(fail)?)
            .abs(),
        );
    }
    ok &= parseval < 1e-6 && unit < 1e-9 && sym < 1e-9 && origin < 1e-9 && scale < 1e-9;
    notes.push(format!(
        "parseval {parseval:.1e} unit {unit:.1e} acf-sym {sym:.1e} origin {origin:.1e} scale {scale:.1e}"
    ));

    let mut monotone = true;
    for base in [spec("fig1_lfm.json"), spec("fig5_sfm.json"), spec("fig6_gsfm.json"), spec("gsfm_iv_a.json")] {
        let mut last = f64::NEG_INFINITY;
        for a in [0.0, 0.1, 0.5, 1.0] {
            let mut s = base.clone();
            s.taper = sonarwave::signal::Taper::tukey(a);
            let p = analysis::papr(&generate(&s).map_err(fail)?).map_err(fail)?;
            monotone &= p >= last - 1e-3;
            last = p;
        }
    }
    ok &= monotone;
    notes.push(format!("taper-monotone {monotone}"));

    let det = cli_determinism()?;
    ok &= det;
    notes.push(format!("cli-deterministic {det}"));
    Ok((ok, notes.join(" ")))
}

fn cli_determinism() -> Result<bool, String> {
    let dir = std::env::temp_dir().join(format!("sonarwave-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(fail)?;
    let spec_path = example("fig6_gsfm.json");
    let spec_path = spec_path.to_str().ok_or("bad path")?;
    let mut same = true;
    for (i, args) in [
        vec!["gen", "--spec", spec_path],
        vec!["metrics", "--spec", spec_path],
        vec!["spectrum", "--spec", spec_path],
        vec!["af", "--spec", spec_path, "--tau-range", "-0.05,0.05,41", "--v-range", "10,9", "--format", "f32bin"],
    ]
    .into_iter()
    .enumerate()
    {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.join(format!("{i}-{run}"));
            let mut argv = vec!["sonarwave".to_string()];
            argv.extend(args.iter().map(|s| s.to_string()));
            argv.extend(["--output".to_string(), out.display().to_string()]);
            if sonarwave_cli::run(argv) != 0 {
                return Err(format!("cli failed: {args:?}"));
            }
            outputs.push(std::fs::read(&out).map_err(fail)?);
        }
        same &= outputs[0] == outputs[1] && !outputs[0].is_empty();
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(same)
}

fn main() {
    let criteria: [(&str, &str, u64, fn() -> Check); 9] = [
        ("C1", "PAPR floor of untapered CW/LFM/SFM/GSFM", 4, c1_papr_floor),
        ("C2", "reference GSFM 98% bandwidth and PAPR", 5, c2_reference_gsfm),
        ("C3", "SE/PAPR dominance across TBPs", 60, c3_dominance),
        ("C4", "closed-form vs numeric ambiguity function", 120, c4_closed_af),
        ("C5", "closed-form vs FFT spectrum", 10, c5_closed_spectrum),
        ("C6", "generalized Bessel function suite", 10, c6_gbf),
        ("C7", "ACF sidelobe ordering", 30, c7_acf_quality),
        ("C8", "transducer replica energies", 60, c8_trw),
        ("C9", "property suite", 60, c9_properties),
    ];
    let quiet: fn(&panic::PanicHookInfo) = |_| {};
    let default_hook = panic::take_hook();
    panic::set_hook(Box::new(quiet));
    let mut failures = 0;
    for (id, title, budget, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check));
        let took = start.elapsed().as_secs_f64();
        let (pass, detail) = match outcome {
            Ok(Ok((pass, detail))) => (pass, detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(p) => {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                (false, format!("panic: {msg}"))
            }
        };
        let in_time = took <= budget as f64;
        let pass = pass && in_time;
        if !pass {
            failures += 1;
        }
        let timing = if in_time { format!("{took:.2}s") } else { format!("{took:.2}s, over {budget}s budget") };
        println!("{} {id} {title}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
    }
    panic::set_hook(default_hook);
    println!("acceptance: {} passed, {failures} failed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
