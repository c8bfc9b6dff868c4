use serde::{Deserialize, Serialize};

use super::codes::{costas_code, is_costas, m_sequence};
use crate::error::{Error, Result};
use crate::signal::{Taper, TaperKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cw,
    Lfm,
    Sfm,
    Gsfm,
    Costas,
    Bpsk,
    Qpsk,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cw => "cw",
            Family::Lfm => "lfm",
            Family::Sfm => "sfm",
            Family::Gsfm => "gsfm",
            Family::Costas => "costas",
            Family::Bpsk => "bpsk",
            Family::Qpsk => "qpsk",
        }
    }

    pub fn is_chipped(&self) -> bool {
        matches!(self, Family::Costas | Family::Bpsk | Family::Qpsk)
    }
}

/// Support convention of the GSFM instantaneous frequency.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// IF depends on `|t|` over `[-T/2, T/2]`.
    #[default]
    Even,
    /// IF runs over `[0, T]`.
    Nonsymmetric,
}

/// Branch of the quadriphase rotation `j^{±(i-1)}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpskSign {
    #[default]
    Plus,
    Minus,
}

/// Oversampling relative to the highest occupied frequency.
pub const OVERSAMPLE: f64 = 16.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Sweep group; rows sharing a group share an SE band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub family: Family,
    /// Pulse duration, seconds.
    pub t: f64,
    pub f_c: f64,
    #[serde(default)]
    pub delta_f: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// GSFM cycle count, alternative to `alpha`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default)]
    pub symmetry: Symmetry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_chips: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<Vec<i64>>,
    #[serde(default)]
    pub taper: Taper,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_rate: Option<f64>,
    #[serde(default)]
    pub qpsk_sign: QpskSign,
    /// Width of each QPSK phase transition as a fraction of a chip.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qpsk_ramp: Option<f64>,
    /// Carrier phase at `t = 0`, radians.
    #[serde(default)]
    pub carrier_phase: f64,
}

impl WaveformSpec {
    pub fn new(family: Family, t: f64, f_c: f64, delta_f: f64) -> Self {
        Self {
            name: None,
            group: None,
            family,
            t,
            f_c,
            delta_f,
            f_m: None,
            rho: None,
            alpha: None,
            c: None,
            symmetry: Symmetry::Even,
            n_chips: None,
            code: None,
            taper: Taper::rectangular(),
            sample_rate: None,
            qpsk_sign: QpskSign::Plus,
            qpsk_ramp: None,
            carrier_phase: 0.0,
        }
    }

    pub fn cw(t: f64, f_c: f64) -> Self {
        Self::new(Family::Cw, t, f_c, 0.0)
    }

    pub fn lfm(t: f64, f_c: f64, delta_f: f64) -> Self {
        Self::new(Family::Lfm, t, f_c, delta_f)
    }

    pub fn sfm(t: f64, f_c: f64, delta_f: f64, f_m: f64) -> Self {
        Self { f_m: Some(f_m), ..Self::new(Family::Sfm, t, f_c, delta_f) }
    }

    pub fn gsfm_alpha(t: f64, f_c: f64, delta_f: f64, rho: f64, alpha: f64, symmetry: Symmetry) -> Self {
        Self { rho: Some(rho), alpha: Some(alpha), symmetry, ..Self::new(Family::Gsfm, t, f_c, delta_f) }
    }

    pub fn gsfm_cycles(t: f64, f_c: f64, delta_f: f64, rho: f64, cycles: f64, symmetry: Symmetry) -> Self {
        Self { rho: Some(rho), c: Some(cycles), symmetry, ..Self::new(Family::Gsfm, t, f_c, delta_f) }
    }

    pub fn costas(t: f64, f_c: f64, delta_f: f64, n_chips: usize) -> Self {
        Self { n_chips: Some(n_chips), ..Self::new(Family::Costas, t, f_c, delta_f) }
    }

    pub fn bpsk(t: f64, f_c: f64, n_chips: usize) -> Self {
        Self { n_chips: Some(n_chips), ..Self::new(Family::Bpsk, t, f_c, 0.0) }
    }

    pub fn qpsk(t: f64, f_c: f64, n_chips: usize) -> Self {
        Self { n_chips: Some(n_chips), ..Self::new(Family::Qpsk, t, f_c, 0.0) }
    }

    pub fn with_taper(mut self, taper: Taper) -> Self {
        self.taper = taper;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_group(mut self, group: impl Into<String>) -> Self {
        self.group = Some(group.into());
        self
    }

    pub fn with_sample_rate(mut self, fs: f64) -> Self {
        self.sample_rate = Some(fs);
        self
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::format("spec", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.family.name().to_string())
    }

    pub fn rho_value(&self) -> f64 {
        self.rho.unwrap_or(1.0)
    }

    /// Half-width of the IF support measured from the IF origin.
    pub fn t_eff(&self) -> f64 {
        match self.symmetry {
            Symmetry::Even => self.t / 2.0,
            Symmetry::Nonsymmetric => self.t,
        }
    }

    /// GSFM modulation term, derived from `c` when `alpha` is absent.
    pub fn alpha_value(&self) -> Result<f64> {
        match (self.alpha, self.c) {
            (Some(a), None) => Ok(a),
            (None, Some(c)) => Ok(alpha_from_cycles(c, self.rho_value(), self.t, self.symmetry)),
            (Some(_), Some(_)) => Err(Error::param("alpha", "give exactly one of `alpha` and `c`")),
            (None, None) => Err(Error::param("alpha", "GSFM needs `alpha` or `c`")),
        }
    }

    pub fn cycles(&self) -> Result<f64> {
        Ok(cycles_from_alpha(self.alpha_value()?, self.rho_value(), self.t, self.symmetry))
    }

    /// Peak rate of change of the modulation (Hz), the Carson-style margin.
    pub fn modulation_rate(&self) -> f64 {
        match self.family {
            Family::Sfm => self.f_m.unwrap_or(0.0),
            Family::Gsfm => {
                let rho = self.rho_value();
                self.alpha_value().map(|a| a * rho * self.t_eff().powf(rho - 1.0)).unwrap_or(0.0)
            }
            Family::Costas | Family::Bpsk | Family::Qpsk => {
                2.0 * self.chip_count().unwrap_or(1) as f64 / self.t
            }
            Family::Cw | Family::Lfm => 0.0,
        }
    }

    /// Highest frequency the sampled signal needs to carry.
    pub fn highest_frequency(&self) -> f64 {
        self.f_c + self.delta_f / 2.0 + self.modulation_rate().max(10.0 / self.t)
    }

    /// Explicit rate, or `N/T` with `N = ceil(16·T·f_high)`.
    pub fn sample_rate_value(&self) -> f64 {
        match self.sample_rate {
            Some(fs) => fs,
            None => (OVERSAMPLE * self.t * self.highest_frequency()).ceil() / self.t,
        }
    }

    pub fn n_samples(&self) -> usize {
        (self.t * self.sample_rate_value()).round().max(1.0) as usize
    }

    pub fn chip_count(&self) -> Option<usize> {
        self.n_chips.or_else(|| self.code.as_ref().map(|c| c.len()))
    }

    /// Costas frequency indices or PSK bits, generated when not supplied.
    pub fn resolved_code(&self) -> Result<Vec<i64>> {
        let n = self
            .chip_count()
            .ok_or_else(|| Error::param("n_chips", "chip families need `n_chips` or `code`"))?;
        if n == 0 {
            return Err(Error::param("n_chips", "chip count must be positive"));
        }
        if let Some(code) = &self.code {
            if code.is_empty() {
                return Err(Error::param("code", "code must not be empty"));
            }
            if code.len() != n {
                return Err(Error::param(
                    "code",
                    format!("length {} disagrees with n_chips {n}", code.len()),
                ));
            }
            return Ok(code.clone());
        }
        match self.family {
            Family::Costas => costas_code(n),
            _ => {
                let degree = usize::BITS - n.leading_zeros();
                let degree = degree.max(2);
                Ok(m_sequence(degree)?.into_iter().take(n).map(i64::from).collect())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, field: &str| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be positive and finite, got {v}")))
            }
        };
        positive(self.t, "t")?;
        positive(self.f_c, "f_c")?;
        if !(self.delta_f >= 0.0) || !self.delta_f.is_finite() {
            return Err(Error::param("delta_f", format!("must be non-negative, got {}", self.delta_f)));
        }
        self.taper.validate()?;
        match self.family {
            Family::Sfm => positive(self.f_m.unwrap_or(0.0), "f_m")?,
            Family::Gsfm => {
                let rho = self.rho.ok_or_else(|| Error::param("rho", "GSFM needs `rho`"))?;
                if !(rho >= 1.0) {
                    return Err(Error::param("rho", format!("must be >= 1, got {rho}")));
                }
                positive(self.alpha_value()?, if self.alpha.is_some() { "alpha" } else { "c" })?;
            }
            Family::Costas => {
                let code = self.resolved_code()?;
                if !is_costas(&code) {
                    return Err(Error::Validation {
                        field: "code".into(),
                        reason: "not a Costas permutation (difference triangle repeats)".into(),
                    });
                }
            }
            Family::Bpsk | Family::Qpsk => {
                let code = self.resolved_code()?;
                if code.iter().any(|&b| b != 0 && b != 1) {
                    return Err(Error::param("code", "phase bits must be 0 or 1"));
                }
                if let Some(r) = self.qpsk_ramp {
                    if !(r > 0.0 && r <= 1.0) {
                        return Err(Error::param("qpsk_ramp", format!("must lie in (0, 1], got {r}")));
                    }
                }
            }
            Family::Cw | Family::Lfm => {}
        }
        if self.family.is_chipped() {
            if self.chip_count().unwrap_or(0) > self.n_samples() {
                return Err(Error::param("n_chips", "more chips than samples"));
            }
        } else if self.taper.scope == crate::signal::TaperScope::PerChip
            && self.taper.kind != TaperKind::Rectangular
        {
            return Err(Error::param("taper.scope", "per-chip tapers need a chip family"));
        }
        if let Some(fs) = self.sample_rate {
            positive(fs, "sample_rate")?;
            let f_top = self.f_c + self.delta_f / 2.0 + self.modulation_rate();
            if f_top >= fs / 2.0 {
                return Err(Error::Sampling {
                    field: "sample_rate".into(),
                    reason: format!("highest frequency {f_top:.1} Hz reaches Nyquist {:.1} Hz", fs / 2.0),
                });
            }
        }
        Ok(())
    }
}

pub fn cycles_from_alpha(alpha: f64, rho: f64, t: f64, symmetry: Symmetry) -> f64 {
    match symmetry {
        Symmetry::Nonsymmetric => alpha * t.powf(rho),
        Symmetry::Even => 2.0 * alpha * (t / 2.0).powf(rho),
    }
}

pub fn alpha_from_cycles(cycles: f64, rho: f64, t: f64, symmetry: Symmetry) -> f64 {
    match symmetry {
        Symmetry::Nonsymmetric => cycles / t.powf(rho),
        Symmetry::Even => cycles / (2.0 * (t / 2.0).powf(rho)),
    }
}
