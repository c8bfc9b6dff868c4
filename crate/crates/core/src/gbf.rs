//! Cylindrical and generalized Bessel functions of the first kind.
//!
//! The generalized function of `K` arguments is defined through its
//! generating exponential
//!
//! ```text
//! exp{ j Σ_k Im(b_k e^{jkθ}) } = Σ_n J_n{b_1..b_K} e^{jnθ}
//! ```
//!
//! With real `b_k` this is the familiar `exp{j Σ β_k sin kθ}` expansion.
//! Complex `b_k = β_k·w_k` realise the mixed-argument form where each
//! harmonic carries an extra phase factor.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// `J_n(x)` by normalized Miller downward recurrence.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let sign_n = if n < 0 && n % 2 != 0 { -1.0 } else { 1.0 };
    let n_abs = n.unsigned_abs() as usize;
    let sign_x = if x < 0.0 && n_abs % 2 == 1 { -1.0 } else { 1.0 };
    sign_n * sign_x * bessel_j_pos(n_abs, x.abs())
}

fn bessel_j_pos(n: usize, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let top = n as f64 + x + 40.0 + 12.0 * x.cbrt();
    let mut m = top.ceil() as usize;
    if m % 2 == 1 {
        m += 1;
    }
    // Recur J_{k-1} = (2k/x) J_k - J_{k+1} from k = m down to 1.
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    let mut wanted = if n == m { cur } else { 0.0 };
    for k in (1..=m).rev() {
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        // cur now holds J_{k-1}.
        if k - 1 == n {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
    }
    norm += cur;
    wanted / norm
}

#[derive(Clone, Debug, PartialEq)]
pub struct GbfCoefficients {
    pub n_max: usize,
    /// Values for orders `-n_max..=n_max`.
    pub values: Vec<Complex64>,
    pub arg_count: usize,
}

impl GbfCoefficients {
    pub fn get(&self, n: i64) -> Complex64 {
        if n.unsigned_abs() as usize > self.n_max {
            return Complex64::new(0.0, 0.0);
        }
        self.values[(n + self.n_max as i64) as usize]
    }

    pub fn orders(&self) -> impl Iterator<Item = i64> {
        let m = self.n_max as i64;
        -m..=m
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Smallest admissible `n_max`: `Σ k|b_k| + 20·k̄`, where `k̄` is the
/// amplitude-weighted mean harmonic. A lone harmonic `k` spreads its
/// cylindrical Bessel tail over multiples of `k`, hence the scaled margin.
pub fn support_bound(args: &[Complex64]) -> usize {
    let (s, k_bar) = spread(args);
    (s + 20.0 * k_bar).ceil() as usize
}

fn spread(args: &[Complex64]) -> (f64, f64) {
    let s: f64 = args.iter().enumerate().map(|(i, b)| (i + 1) as f64 * b.norm()).sum();
    let total: f64 = args.iter().map(|b| b.norm()).sum();
    let k_bar = if total > 0.0 { (s / total).max(1.0) } else { 1.0 };
    (s, k_bar)
}

fn grid_size(args: &[Complex64], n_max: usize) -> usize {
    let (s, k_bar) = spread(args);
    let reach = s + k_bar * (40.0 + 10.0 * s.cbrt());
    let need = (8 * n_max).max((4.0 * reach).ceil() as usize).max(4 * args.len() + 4);
    need.next_power_of_two()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Generalized Bessel coefficients of `b_k = betas[k-1]·weights[k-1]`.
pub fn gbf_coeffs(
    betas: &[Complex64],
    n_max: usize,
    weights: Option<&[Complex64]>,
) -> Result<GbfCoefficients> {
    if betas.is_empty() {
        return Err(Error::param("betas", "at least one argument is required"));
    }
    let args: Vec<Complex64> = match weights {
        None => betas.to_vec(),
        Some(w) => {
            if w.len() != betas.len() {
                return Err(Error::param(
                    "weights",
                    format!("expected {} weights, got {}", betas.len(), w.len()),
                ));
            }
            betas.iter().zip(w).map(|(b, w)| b * w).collect()
        }
    };
    let bound = support_bound(&args);
    if n_max < bound {
        return Err(Error::Truncation {
            field: "n_max".into(),
            reason: format!("{n_max} is below the support bound"),
            suggested: bound,
        });
    }
    gbf_on_grid(&args, n_max, grid_size(&args, n_max))
}

pub(crate) fn gbf_on_grid(args: &[Complex64], n_max: usize, p: usize) -> Result<GbfCoefficients> {
    let (inv, fwd) = PLANNER.with(|pl| {
        let mut pl = pl.borrow_mut();
        (pl.plan_fft_inverse(p), pl.plan_fft_forward(p))
    });
    let mut buf = vec![Complex64::new(0.0, 0.0); p];
    for (k, b) in args.iter().enumerate() {
        buf[k + 1] = *b;
    }
    // Σ_k b_k e^{jkθ_p}, then the generating exponential of its imaginary part.
    inv.process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::from_polar(1.0, v.im);
    }
    fwd.process(&mut buf);
    let scale = 1.0 / p as f64;
    let values: Vec<Complex64> = (-(n_max as i64)..=n_max as i64)
        .map(|n| buf[n.rem_euclid(p as i64) as usize] * scale)
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::numeric("gbf", "non-finite coefficient"));
    }
    Ok(GbfCoefficients { n_max, values, arg_count: args.len() })
}
