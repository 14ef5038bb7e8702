//! FFT analysis of Rabi traces.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rabi::RabiMap;

/// Returns the common step of a uniform grid; relative spacing jitter above 1e-6 is rejected.
pub fn uniform_step(t_grid: &[f64]) -> Result<f64> {
    if t_grid.len() < 2 {
        return Err(Error::invalid("t_grid", "need at least two samples"));
    }
    let step = (t_grid[t_grid.len() - 1] - t_grid[0]) / (t_grid.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::invalid("t_grid", "times must be increasing"));
    }
    let deviation = t_grid
        .windows(2)
        .map(|w| ((w[1] - w[0]) - step).abs())
        .fold(0.0, f64::max);
    if deviation > 1e-6 * step {
        return Err(Error::NonUniformGrid { deviation });
    }
    Ok(step)
}

/// One-sided magnitude spectrum of a mean-subtracted trace (rectangular window) padded with
/// zeros to `padded_len` samples. Returns (frequencies in MHz, magnitudes); the DC bin is zero.
fn magnitude_spectrum(trace: &[f64], t_step: f64, padded_len: usize) -> (Vec<f64>, Vec<f64>) {
    let n = trace.len();
    let mean = trace.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = trace
        .iter()
        .map(|x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(padded_len.max(n))
        .collect();
    let len = buf.len();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let bins = len / 2 + 1;
    let df = 1.0 / (len as f64 * t_step);
    let freqs = (0..bins).map(|k| k as f64 * df).collect();
    let mut mags: Vec<f64> = buf[..bins].iter().map(|z| z.norm()).collect();
    mags[0] = 0.0;
    (freqs, mags)
}

/// Per-row FFT magnitude of a Rabi map.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiSpectrum {
    /// Drive frequencies of the rows, MHz.
    pub f_grid: Vec<f64>,
    /// Rabi-frequency axis, MHz.
    pub freqs: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl RabiSpectrum {
    /// Frequency of the strongest bin of row `i`.
    pub fn peak_frequency(&self, i: usize) -> f64 {
        let row = &self.rows[i];
        let k = (1..row.len())
            .max_by(|a, b| row[*a].total_cmp(&row[*b]))
            .unwrap_or(0);
        self.freqs[k]
    }
}

pub fn rabi_fft(map: &RabiMap, t_step: f64) -> Result<RabiSpectrum> {
    let step = uniform_step(&map.t_grid)?;
    if (step - t_step).abs() > 1e-6 * step {
        return Err(Error::NonUniformGrid {
            deviation: (step - t_step).abs(),
        });
    }
    let n = map.t_grid.len();
    let mut freqs = Vec::new();
    let rows = map
        .rows
        .iter()
        .map(|row| {
            let (f, m) = magnitude_spectrum(row, step, n);
            freqs = f;
            m
        })
        .collect();
    Ok(RabiSpectrum {
        f_grid: map.f_grid.clone(),
        freqs,
        rows,
    })
}

/// Dominant oscillation frequency (MHz) of a uniformly sampled trace.
///
/// The trace is mean-subtracted, zero-padded to four times its length, and the strongest bin
/// above the rectangular-window main lobe of DC (1/record length) is refined by a parabola
/// through the neighbouring magnitudes.
pub fn extract_dominant_rabi_frequency(trace: &[f64], t_step: f64) -> Result<f64> {
    let n = trace.len();
    if n < 16 {
        return Err(Error::invalid("trace", "need at least 16 samples"));
    }
    if !(t_step > 0.0 && t_step.is_finite()) {
        return Err(Error::invalid("t_step", "must be finite and > 0"));
    }
    let pad = 4;
    let (freqs, mags) = magnitude_spectrum(trace, t_step, pad * n.next_power_of_two());
    let scale = trace.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    let first = (freqs.len() as f64 * 2.0 / n as f64).ceil() as usize;
    let first = first.clamp(1, mags.len() - 1);
    let k = (first..mags.len())
        .max_by(|a, b| mags[*a].total_cmp(&mags[*b]))
        .ok_or(Error::NoOscillation)?;
    if mags[k] <= 1e-9 * scale * n as f64 {
        return Err(Error::NoOscillation);
    }
    if k == 0 || k + 1 >= mags.len() {
        return Ok(freqs[k]);
    }
    let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Ok(freqs[k] + shift.clamp(-0.5, 0.5) * (freqs[1] - freqs[0]))
}
