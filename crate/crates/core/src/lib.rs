//! Synthesis and analysis of active-sonar transmit waveforms.
//!
//! The crate generates CW, LFM, SFM, GSFM, Costas, BPSK and QPSK pulses as
//! complex analytic passband signals, measures their spectral efficiency and
//! PAPR, computes broadband (time-scale) ambiguity functions numerically and
//! through Bessel-series closed forms, and passes drive signals through a
//! band-limited transducer model.
//!
//! ```
//! use sonarwave::{analysis, waveforms::{self, WaveformSpec}};
//!
//! let spec = WaveformSpec::lfm(0.5, 2000.0, 200.0);
//! let sig = waveforms::generate(&spec).unwrap();
//! let papr = analysis::papr(&sig).unwrap();
//! assert!((papr - 3.01).abs() < 0.05);
//! ```

pub mod ambiguity;
pub mod analysis;
pub mod error;
pub mod gbf;
pub mod signal;
pub mod transducer;
pub mod waveforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
