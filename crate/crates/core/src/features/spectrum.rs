use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// DFT magnitudes of a real series at bins `1..=L/2` (DC bin dropped).
///
/// The output has `floor(L/2)` values: 225 for `L = 450`, 512 for `L = 1025`.
pub fn spectrum(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::LengthError(n));
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    Ok(buf[1..=n / 2].iter().map(|c| c.norm()).collect())
}

/// Energy `Σ x²` of a zero-mean series of length `len` recovered from its
/// [`spectrum`] by Parseval: every kept bin except the Nyquist bin (even `len`)
/// stands for itself and its conjugate mirror.
pub fn spectral_energy(spec: &[f64], len: usize) -> f64 {
    let mut total = 0.0;
    for (i, &m) in spec.iter().enumerate() {
        let bin = i + 1;
        let weight = if len.is_multiple_of(2) && bin == len / 2 {
            1.0
        } else {
            2.0
        };
        total += weight * m * m;
    }
    total / len as f64
}
