//! `sonarwave` command-line front end.
//!
//! Every subcommand reads waveform specs as strict JSON and writes plot data
//! (CSV, JSON or the binary surface format) to `--output` or stdout.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sonarwave::ambiguity::{
    self, ambiguity_numeric, closed_af_surface, default_grid, eta_grid, linspace, AmbiguitySurface, ClosedForm,
};
use sonarwave::analysis::{self, pareto_undominated, se_papr_sweep, SweepBand};
use sonarwave::signal::{spectrum_of, SampledSignal, Spectrum};
use sonarwave::transducer::{self, TransducerResponse};
use sonarwave::waveforms::{generate, Family, FourierPhaseModel, WaveformSpec};
use sonarwave::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "sonarwave", version, about = "Sonar waveform synthesis and analysis")]
struct Cli {
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a waveform (CSV: t,re,im).
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// PAPR, SE, 98% bandwidth and related figures as JSON.
    Metrics(MetricsArgs),
    /// Energy spectrum (CSV: f,power_db).
    Spectrum(SpectrumArgs),
    /// Broadband ambiguity surface.
    Af(AfArgs),
    /// SE/PAPR table with a Pareto column.
    Compare(CompareArgs),
    /// Transducer replica energies relative to a reference waveform.
    Trw(TrwArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long, conflicts_with = "signal", required_unless_present = "signal")]
    spec: Option<PathBuf>,
    /// Sampled signal written by `gen`.
    #[arg(long, requires = "fc")]
    signal: Option<PathBuf>,
    /// Carrier frequency for `--signal`, Hz.
    #[arg(long)]
    fc: Option<f64>,
    /// SE band, Hz (default: the signal's 98% bandwidth).
    #[arg(long)]
    band: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpectrumMethod {
    Fft,
    Closed,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "fft")]
    method: SpectrumMethod,
    /// FFT length (default: next power of two ≥ 8N).
    #[arg(long)]
    nfft: Option<usize>,
    /// Frequency range `lo,hi` in Hz.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    range: Option<Vec<f64>>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AfMethod {
    Numeric,
    Closed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SurfaceFormat {
    Csv,
    Json,
    F32bin,
}

#[derive(Args, Debug)]
struct AfArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "numeric")]
    method: AfMethod,
    /// Explicit delays, seconds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "tau_range")]
    taus: Option<Vec<f64>>,
    /// `lo,hi,n` delay grid, seconds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    tau_range: Option<Vec<f64>>,
    /// Explicit Doppler scales.
    #[arg(long, value_delimiter = ',', conflicts_with = "v_range")]
    etas: Option<Vec<f64>>,
    /// `v_max,n`: n velocities spanning ±v_max m/s.
    #[arg(long, value_delimiter = ',')]
    v_range: Option<Vec<f64>>,
    /// Sound speed, m/s.
    #[arg(long, default_value_t = ambiguity::SOUND_SPEED)]
    c: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: SurfaceFormat,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Spec files or directories of `*.json` specs.
    #[arg(long, num_args = 1.., required = true)]
    specs: Vec<PathBuf>,
    /// `auto` or a fixed SE band in Hz.
    #[arg(long, default_value = "auto")]
    band: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Debug)]
struct TrwArgs {
    #[arg(long, num_args = 1.., required = true)]
    specs: Vec<PathBuf>,
    /// `parametric` or a CSV table (freq_hz,mag_db,phase_rad).
    #[arg(long, default_value = "parametric")]
    response: String,
    #[arg(long, default_value_t = 4.07)]
    ripple: f64,
    #[arg(long, default_value_t = 110e3)]
    f_r: f64,
    #[arg(long, default_value_t = 100e3)]
    band_lo: f64,
    #[arg(long, default_value_t = 120e3)]
    band_hi: f64,
    /// Flatten the in-band response to this ripple, dB.
    #[arg(long)]
    equalize: Option<f64>,
    /// Name of the reference spec.
    #[arg(long)]
    reference: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: TableFormat,
    #[command(flatten)]
    out: OutputArgs,
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gen { spec, out } => cmd_gen(&spec, &out),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Spectrum(a) => cmd_spectrum(&a),
        Command::Af(a) => cmd_af(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Trw(a) => cmd_trw(&a),
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

pub fn read_spec(path: &Path) -> Result<WaveformSpec> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut spec = WaveformSpec::from_json_str(&text).map_err(|e| match e {
        Error::Format { field, reason } => Error::format(path.display().to_string(), format!("{field}: {reason}")),
        other => other,
    })?;
    if spec.name.is_none() {
        spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(spec)
}

/// Files as given; directories expand to their `*.json` entries, sorted.
fn expand_specs(paths: &[PathBuf]) -> Result<Vec<WaveformSpec>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(io_err(p))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::param("specs", "no spec files found"));
    }
    files.iter().map(|f| read_spec(f)).collect()
}

fn with_output<F>(out: &OutputArgs, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match &out.output {
        Some(path) => {
            let file = File::create(path).map_err(io_err(path))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(io_err(path))
        }
        None => {
            let mut w = BufWriter::new(ClosedPipeOk(io::stdout().lock()));
            body(&mut w)?;
            w.flush().map_err(io_err(Path::new("<stdout>")))
        }
    }
}

/// Treats a reader hanging up (`| head`) as a normal end of output.
struct ClosedPipeOk<W>(W);

impl<W: Write> Write for ClosedPipeOk<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self.0.write(buf) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(buf.len()),
            r => r,
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self.0.flush() {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::format("output", e.to_string())
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::format("output", e.to_string()))?;
    writeln!(w).map_err(io_err(Path::new("output")))
}

fn cmd_gen(spec_path: &Path, out: &OutputArgs) -> Result<()> {
    let sig = generate(&read_spec(spec_path)?)?;
    with_output(out, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["t", "re", "im"]).map_err(csv_err)?;
        for (n, s) in sig.samples.iter().enumerate() {
            csv.write_record(&[sig.time(n).to_string(), s.re.to_string(), s.im.to_string()]).map_err(csv_err)?;
        }
        csv.flush().map_err(|e| Error::format("output", e.to_string()))
    })
}

/// Reads a `t,re,im` CSV back into a signal; the rate comes from the
/// average sample spacing.
pub fn read_signal_csv(path: &Path) -> Result<SampledSignal> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for (i, rec) in reader.deserialize().enumerate() {
        let (t, re, im): (f64, f64, f64) =
            rec.map_err(|e| Error::format(path.display().to_string(), format!("row {}: {e}", i + 1)))?;
        times.push(t);
        samples.push(sonarwave::Complex64::new(re, im));
    }
    if times.len() < 2 {
        return Err(Error::format(path.display().to_string(), "need at least two samples"));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::format(path.display().to_string(), "time column must increase"));
    }
    SampledSignal::new(samples, 1.0 / dt, times[0])
}

fn cmd_metrics(a: &MetricsArgs) -> Result<()> {
    let report = match (&a.spec, &a.signal) {
        (Some(path), _) => {
            let spec = read_spec(path)?;
            let sig = generate(&spec)?;
            analysis::metrics(&sig, spec.f_c, a.band, analysis::carson_for(&spec))?
        }
        (None, Some(path)) => {
            let sig = read_signal_csv(path)?;
            let fc = a.fc.ok_or_else(|| Error::param("fc", "required with --signal"))?;
            analysis::metrics(&sig, fc, a.band, None)?
        }
        (None, None) => return Err(Error::param("spec", "need --spec or --signal")),
    };
    with_output(&a.out, |w| write_json(w, &report))
}

fn closed_spectrum(spec: &WaveformSpec, freqs: &[f64]) -> Result<Spectrum> {
    match spec.family {
        Family::Sfm => analysis::sfm_spectrum_closed(spec, freqs),
        Family::Gsfm => analysis::gsfm_spectrum_closed(spec, &FourierPhaseModel::auto(spec)?, freqs),
        _ => Err(Error::param("method", format!("no closed form for {}", spec.family.name()))),
    }
}

fn cmd_spectrum(a: &SpectrumArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let sig = generate(&spec)?;
    let nfft = a.nfft.unwrap_or_else(|| analysis::metrics_nfft(&sig));
    let fft = spectrum_of(&sig, nfft)?;
    let (lo, hi) = match &a.range {
        Some(r) if r.len() == 2 => (r[0], r[1]),
        Some(_) => return Err(Error::param("range", "expected `lo,hi`")),
        None => match a.method {
            SpectrumMethod::Fft => (0.0, sig.sample_rate / 2.0),
            SpectrumMethod::Closed => {
                let half = analysis::carson_for(&spec).unwrap_or(spec.delta_f) + 20.0 / spec.t;
                ((spec.f_c - half).max(0.0), spec.f_c + half)
            }
        },
    };
    if !(lo < hi) {
        return Err(Error::param("range", format!("need lo < hi, got {lo},{hi}")));
    }
    let picked: Vec<usize> = (0..fft.freqs.len()).filter(|&k| fft.freqs[k] >= lo && fft.freqs[k] <= hi).collect();
    let spectrum = match a.method {
        SpectrumMethod::Fft => fft,
        SpectrumMethod::Closed => {
            let freqs: Vec<f64> = picked.iter().map(|&k| fft.freqs[k]).collect();
            closed_spectrum(&spec, &freqs)?
        }
    };
    let rows: Vec<usize> = match a.method {
        SpectrumMethod::Fft => picked,
        SpectrumMethod::Closed => (0..spectrum.freqs.len()).collect(),
    };
    let db = spectrum.power_db();
    with_output(&a.out, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["f", "power_db"]).map_err(csv_err)?;
        for k in rows {
            csv.write_record(&[spectrum.freqs[k].to_string(), db[k].to_string()]).map_err(csv_err)?;
        }
        csv.flush().map_err(|e| Error::format("output", e.to_string()))
    })
}

fn grid_count(value: f64, field: &str) -> Result<usize> {
    if value >= 1.0 && value.fract() == 0.0 {
        Ok(value as usize)
    } else {
        Err(Error::param(field, format!("count must be a positive integer, got {value}")))
    }
}

fn af_grid(a: &AfArgs, spec: &WaveformSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let (default_taus, default_etas) = default_grid(spec.t, a.c)?;
    let taus = match (&a.taus, &a.tau_range) {
        (Some(t), _) => t.clone(),
        (None, Some(r)) if r.len() == 3 => linspace(r[0], r[1], grid_count(r[2], "tau_range")?),
        (None, Some(_)) => return Err(Error::param("tau_range", "expected `lo,hi,n`")),
        (None, None) => default_taus,
    };
    let etas = match (&a.etas, &a.v_range) {
        (Some(e), _) => e.clone(),
        (None, Some(r)) if r.len() == 2 => eta_grid(r[0], grid_count(r[1], "v_range")?, a.c)?,
        (None, Some(_)) => return Err(Error::param("v_range", "expected `v_max,n`")),
        (None, None) => default_etas,
    };
    Ok((taus, etas))
}

fn cmd_af(a: &AfArgs) -> Result<()> {
    let spec = read_spec(&a.spec)?;
    let (taus, etas) = af_grid(a, &spec)?;
    let surface: AmbiguitySurface = match a.method {
        AfMethod::Numeric => ambiguity_numeric(&generate(&spec)?, &taus, &etas, a.c)?,
        AfMethod::Closed => match spec.family {
            Family::Sfm => closed_af_surface(&spec, ClosedForm::Sfm, &taus, &etas, a.c)?,
            Family::Gsfm => {
                let model = FourierPhaseModel::auto(&spec)?;
                closed_af_surface(&spec, ClosedForm::Gsfm(&model), &taus, &etas, a.c)?
            }
            other => return Err(Error::param("method", format!("no closed form for {}", other.name()))),
        },
    };
    if surface.clipped > 0 {
        eprintln!("warning: {} cells beyond the signal support were set to zero", surface.clipped);
    }
    with_output(&a.out, |w| match a.format {
        SurfaceFormat::Csv => ambiguity::write_csv(&surface, w),
        SurfaceFormat::Json => write_json(w, &surface),
        SurfaceFormat::F32bin => ambiguity::write_f32bin(&surface, w),
    })
}

#[derive(Serialize)]
struct CompareRow<'a> {
    #[serde(flatten)]
    row: &'a analysis::SweepRow,
    undominated: bool,
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let specs = expand_specs(&a.specs)?;
    let band = match a.band.as_str() {
        "auto" => SweepBand::Auto,
        text => match text.parse::<f64>() {
            Ok(b) if b > 0.0 => SweepBand::Fixed(b),
            _ => return Err(Error::param("band", format!("expected `auto` or a positive number, got `{text}`"))),
        },
    };
    let rows = se_papr_sweep(&specs, band);
    let flags = pareto_undominated(&rows);
    let table: Vec<CompareRow> = rows.iter().zip(flags).map(|(row, undominated)| CompareRow { row, undominated }).collect();
    with_output(&a.out, |w| match a.format {
        TableFormat::Json => write_json(w, &table),
        TableFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["group", "name", "family", "tbp", "band_hz", "papr_db", "se", "undominated", "error"])
                .map_err(csv_err)?;
            for r in &table {
                csv.write_record(&[
                    r.row.group.clone(),
                    r.row.name.clone(),
                    r.row.family.clone(),
                    r.row.tbp.to_string(),
                    r.row.band_hz.to_string(),
                    r.row.papr_db.to_string(),
                    r.row.se.to_string(),
                    r.undominated.to_string(),
                    r.row.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            csv.flush().map_err(|e| Error::format("output", e.to_string()))
        }
    })
}

fn response_for(a: &TrwArgs) -> Result<TransducerResponse> {
    let band = (a.band_lo, a.band_hi);
    let base = if a.response == "parametric" {
        transducer::make_response(a.f_r, band, a.ripple)?
    } else {
        let path = Path::new(&a.response);
        transducer::load_table(File::open(path).map_err(io_err(path))?, band)?
    };
    match a.equalize {
        Some(target) => {
            let eq = transducer::equalize(&base, target)?;
            if !eq.applied {
                eprintln!("note: ripple already at or below {target} dB; equalization skipped");
            }
            Ok(eq.response)
        }
        None => Ok(base),
    }
}

fn cmd_trw(a: &TrwArgs) -> Result<()> {
    let specs = expand_specs(&a.specs)?;
    let resp = response_for(a)?;
    let rows = transducer::trw_report(&specs, &resp, &a.reference)?;
    with_output(&a.out, |w| match a.format {
        TableFormat::Json => write_json(w, &rows),
        TableFormat::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["name", "family", "energy", "e_tilde_db", "papr_db", "error"]).map_err(csv_err)?;
            for r in &rows {
                csv.write_record(&[
                    r.name.clone(),
                    r.family.clone(),
                    r.energy.to_string(),
                    r.e_tilde_db.to_string(),
                    r.papr_db.to_string(),
                    r.error.clone().unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            csv.flush().map_err(|e| Error::format("output", e.to_string()))
        }
    })
}
