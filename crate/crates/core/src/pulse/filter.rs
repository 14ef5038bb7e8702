//! Filter-function estimate of coherence under classical dephasing noise.
//!
//! For a sign-switching sequence with pi pulses at normalized times `d_1 < ... < d_n` in a free
//! evolution of length T,
//!
//! ```text
//! F(x) = 1 + (-1)^(n+1) e^{ix} + 2 sum_j (-1)^j e^{i x d_j},      x = omega T
//! chi  = (1/pi) int_0^inf S(omega) |F(omega T)|^2 / omega^2 d omega
//!      = (T/pi) int_0^inf S(x/T) |F(x)|^2 / x^2 dx,                W = exp(-chi)
//! ```
//!
//! Quadrature: composite Simpson on `x in [dx, X]` with `dx = 0.05` and
//! `X = 200 + 8 pi (n + 1)`, which covers the first passbands at `x = pi n (2k + 1)`. The
//! first cell `[0, dx]` uses 4-point Gauss-Legendre so integrable singularities of `S` at zero
//! are never evaluated. Beyond `X` the oscillating `|F|^2` is replaced by its mean `2 + 4n`.
//! Frequencies are angular, in rad/us; `S` is in rad^2/us.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Psd {
    White { level: f64 },
    /// `amplitude / (1 + (omega / cutoff)^2)`
    Lorentzian { amplitude: f64, cutoff: f64 },
    /// `amplitude * omega^-exponent`
    PowerLaw { amplitude: f64, exponent: f64 },
    /// Linear interpolation of samples; zero outside the tabulated range.
    Tabulated { omega: Vec<f64>, density: Vec<f64> },
}

impl Psd {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Psd::White { level } => level.is_finite() && *level >= 0.0,
            Psd::Lorentzian { amplitude, cutoff } => {
                amplitude.is_finite() && *amplitude >= 0.0 && cutoff.is_finite() && *cutoff > 0.0
            }
            Psd::PowerLaw {
                amplitude,
                exponent,
            } => amplitude.is_finite() && *amplitude >= 0.0 && exponent.is_finite(),
            Psd::Tabulated { omega, density } => {
                omega.len() == density.len()
                    && omega.len() >= 2
                    && omega.windows(2).all(|w| w[1] > w[0])
                    && omega[0] >= 0.0
                    && density.iter().all(|s| s.is_finite() && *s >= 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("psd", "noise spectrum must be nonnegative and well formed"))
        }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            Psd::White { level } => *level,
            Psd::Lorentzian { amplitude, cutoff } => amplitude / (1.0 + (omega / cutoff).powi(2)),
            Psd::PowerLaw {
                amplitude,
                exponent,
            } => {
                if *amplitude == 0.0 {
                    0.0
                } else {
                    amplitude * omega.powf(-exponent)
                }
            }
            Psd::Tabulated { omega: w, density } => {
                if omega < w[0] || omega > w[w.len() - 1] {
                    return 0.0;
                }
                let i = w.partition_point(|x| *x <= omega).clamp(1, w.len() - 1);
                let t = (omega - w[i - 1]) / (w[i] - w[i - 1]);
                density[i - 1] + t * (density[i] - density[i - 1])
            }
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Psd::White { level } => *level == 0.0,
            Psd::Lorentzian { amplitude, .. } | Psd::PowerLaw { amplitude, .. } => *amplitude == 0.0,
            Psd::Tabulated { density, .. } => density.iter().all(|s| *s == 0.0),
        }
    }
}

/// |F(x)|^2 / x^2 for a fixed pulse pattern.
struct FilterKernel {
    signs: Vec<f64>,
    freqs: Vec<f64>,
    taylor: Vec<f64>,
}

impl FilterKernel {
    fn new(positions: &[f64]) -> Self {
        let n = positions.len();
        // terms c * e^{i x d}: the constant 1, the end point, then the pulses
        let mut signs = vec![1.0, if n.is_multiple_of(2) { -1.0 } else { 1.0 }];
        let mut freqs = vec![0.0, 1.0];
        for (j, d) in positions.iter().enumerate() {
            signs.push(if (j + 1) % 2 == 0 { 2.0 } else { -2.0 });
            freqs.push(*d);
        }
        // Taylor coefficients of F(x) = sum_k a_k (ix)^k / k!
        // coefficients at rounding level are exact zeros of symmetric patterns
        let taylor = (0..12)
            .map(|k| {
                let terms = signs.iter().zip(&freqs).map(|(c, d)| c * d.powi(k));
                let (sum, scale) = terms.fold((0.0, 0.0), |(s, a), t| (s + t, a + t.abs()));
                if sum.abs() <= 64.0 * f64::EPSILON * scale {
                    0.0
                } else {
                    sum
                }
            })
            .collect();
        Self {
            signs,
            freqs,
            taylor,
        }
    }

    fn pulses(&self) -> usize {
        self.signs.len() - 2
    }

    fn value(&self, x: f64) -> f64 {
        if x < 1e-3 {
            // F(0) = 0 for every sign-switching sequence; expand F(x)/x
            let mut acc = C64::new(0.0, 0.0);
            let mut fact = 1.0;
            let mut ipow = C64::new(0.0, 1.0);
            let mut xpow = 1.0;
            for k in 1..self.taylor.len() {
                fact *= k as f64;
                acc += ipow * (self.taylor[k] * xpow / fact);
                ipow *= C64::new(0.0, 1.0);
                xpow *= x;
            }
            return acc.norm_sqr();
        }
        let f: C64 = self
            .signs
            .iter()
            .zip(&self.freqs)
            .map(|(c, d)| C64::from_polar(*c, x * d))
            .sum();
        f.norm_sqr() / (x * x)
    }
}

const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Coherence W = exp(-chi) after a free evolution of `total_time` us with pi pulses at the given
/// normalized positions.
pub fn filter_function_coherence(pulse_times: &[f64], total_time: f64, psd: &Psd) -> Result<f64> {
    psd.validate()?;
    if !(total_time.is_finite() && total_time >= 0.0) {
        return Err(Error::invalid("total_time", "must be finite and >= 0"));
    }
    if pulse_times.iter().any(|d| !(*d > 0.0 && *d < 1.0))
        || pulse_times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::invalid(
            "pulse_times",
            "positions must be strictly increasing inside (0, 1)",
        ));
    }
    if psd.is_zero() || total_time == 0.0 {
        return Ok(1.0);
    }
    Ok((-decoherence_exponent(pulse_times, total_time, psd)?).exp())
}

/// The exponent chi of [`filter_function_coherence`].
pub fn decoherence_exponent(pulse_times: &[f64], total_time: f64, psd: &Psd) -> Result<f64> {
    FilterFunction::new(pulse_times).chi(total_time, psd)
}

/// Filter kernel |F(x)|^2 / x^2 of one pulse pattern tabulated on the quadrature grid, so that
/// chi can be evaluated for many total times and spectra.
#[derive(Debug, Clone)]
pub struct FilterFunction {
    pulses: usize,
    /// Abscissae with quadrature weights folded into `weights`.
    nodes: Vec<f64>,
    weights: Vec<f64>,
    x_end: f64,
    /// Kernel at 1e-9 and 1e-6, for the infrared check.
    k_near: f64,
    k_far: f64,
}

impl FilterFunction {
    /// Positions are not validated here; [`filter_function_coherence`] does that.
    pub fn new(pulse_times: &[f64]) -> Self {
        let kernel = FilterKernel::new(pulse_times);
        let n = kernel.pulses();
        let dx = 0.05;
        let x_max = 200.0 + 8.0 * std::f64::consts::PI * (n as f64 + 1.0);
        let cells = ((x_max - dx) / dx).ceil() as usize;
        let cells = cells + cells % 2;

        let mut nodes = Vec::with_capacity(cells + 5);
        let mut weights = Vec::with_capacity(cells + 5);
        for (node, w) in GL4 {
            let x = 0.5 * dx * (node + 1.0);
            nodes.push(x);
            weights.push(0.5 * dx * w * kernel.value(x));
        }
        for i in 0..=cells {
            let x = dx + i as f64 * dx;
            let w = if i == 0 || i == cells {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            nodes.push(x);
            weights.push(w * dx / 3.0 * kernel.value(x));
        }
        Self {
            pulses: n,
            nodes,
            weights,
            x_end: dx + cells as f64 * dx,
            k_near: kernel.value(1e-9),
            k_far: kernel.value(1e-6),
        }
    }

    pub fn pulses(&self) -> usize {
        self.pulses
    }

    /// chi = (T/pi) * integral of S(x/T) |F(x)|^2 / x^2 dx.
    pub fn chi(&self, total_time: f64, psd: &Psd) -> Result<f64> {
        let t = total_time;
        let q_far = 1e-6 * psd.eval(1e-6 / t) * self.k_far;
        let q_near = 1e-9 * psd.eval(1e-9 / t) * self.k_near;
        if !q_far.is_finite() || !q_near.is_finite() || (q_near > 0.0 && q_near >= 0.5 * q_far) {
            return Err(Error::InfraredDivergence);
        }
        let body: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * psd.eval(x / t))
            .sum();
        let tail = (2.0 + 4.0 * self.pulses as f64) * psd.eval(self.x_end / t) / self.x_end;
        let chi = t / std::f64::consts::PI * (body + tail);
        if !chi.is_finite() {
            return Err(Error::InfraredDivergence);
        }
        Ok(chi)
    }

    /// Total time at which chi reaches 1, by bisection in log T over [1e-3, 1e9] us.
    pub fn coherence_time(&self, psd: &Psd) -> Result<f64> {
        psd.validate()?;
        let (mut lo, mut hi) = (1e-3_f64.ln(), 1e9_f64.ln());
        if self.chi(lo.exp(), psd)? >= 1.0 || self.chi(hi.exp(), psd)? < 1.0 {
            return Err(Error::invalid("psd", "chi does not cross 1 between 1e-3 and 1e9 us"));
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.chi(mid.exp(), psd)? < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi)).exp())
    }
}

/// Normalized pi-pulse positions of a Hahn echo.
pub fn hahn_positions() -> Vec<f64> {
    vec![0.5]
}

/// Normalized pi-pulse positions of `repetitions` XY-8 blocks with equal spacing.
pub fn xy8_positions(repetitions: usize) -> Vec<f64> {
    let total = 8 * repetitions;
    (0..total).map(|k| (k as f64 + 0.5) / total as f64).collect()
}
