//! Nonlinear least-squares fits of decay curves.
//!
//! Models, with `t` in the units of the data:
//!
//! | model          | y(t)                                   | parameters          |
//! |----------------|----------------------------------------|---------------------|
//! | exponential    | A exp(-t/T) + c                        | A, T, c             |
//! | gaussian       | A exp(-(t/T)^2) + c                    | A, T, c             |
//! | damped_cosine  | A exp(-t/T) cos(2 pi f t + phi) + c    | A, T, c, f, phi     |
//!
//! Levenberg-Marquardt with Marquardt scaling. Only steps that lower the residual sum are
//! accepted; iteration stops when the proposed relative step drops below 1e-10, or fails after
//! 200 iterations.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;
const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Exponential,
    Gaussian,
    DampedCosine,
}

impl DecayModel {
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            DecayModel::Exponential | DecayModel::Gaussian => &["amplitude", "time_constant", "offset"],
            DecayModel::DampedCosine => &["amplitude", "time_constant", "offset", "frequency", "phase"],
        }
    }

    pub fn eval(self, p: &[f64], t: f64) -> f64 {
        match self {
            DecayModel::Exponential => p[0] * (-t / p[1]).exp() + p[2],
            DecayModel::Gaussian => p[0] * (-(t / p[1]).powi(2)).exp() + p[2],
            DecayModel::DampedCosine => {
                p[0] * (-t / p[1]).exp() * (std::f64::consts::TAU * p[3] * t + p[4]).cos() + p[2]
            }
        }
    }

    fn gradient(self, p: &[f64], t: f64, out: &mut [f64]) {
        match self {
            DecayModel::Exponential => {
                let e = (-t / p[1]).exp();
                out[0] = e;
                out[1] = p[0] * e * t / (p[1] * p[1]);
                out[2] = 1.0;
            }
            DecayModel::Gaussian => {
                let u = t / p[1];
                let e = (-u * u).exp();
                out[0] = e;
                out[1] = p[0] * e * 2.0 * u * u / p[1];
                out[2] = 1.0;
            }
            DecayModel::DampedCosine => {
                let e = (-t / p[1]).exp();
                let arg = std::f64::consts::TAU * p[3] * t + p[4];
                let (s, c) = arg.sin_cos();
                out[0] = e * c;
                out[1] = p[0] * e * c * t / (p[1] * p[1]);
                out[2] = 1.0;
                out[3] = -p[0] * e * s * std::f64::consts::TAU * t;
                out[4] = -p[0] * e * s;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: DecayModel,
    pub params: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Residual sum of squares.
    pub ssr: f64,
    pub iterations: usize,
    /// Set when the data carry no decay to fit (constant input); the time constant is NaN.
    pub degenerate: bool,
}

impl FitReport {
    pub fn amplitude(&self) -> f64 {
        self.params[0]
    }
    pub fn time_constant(&self) -> f64 {
        self.params[1]
    }
    pub fn offset(&self) -> f64 {
        self.params[2]
    }
    pub fn frequency(&self) -> Option<f64> {
        self.params.get(3).copied()
    }
    pub fn phase(&self) -> Option<f64> {
        self.params.get(4).copied()
    }
}

/// A fit that did not converge or whose Jacobian is rank deficient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitFailure {
    pub model: DecayModel,
    pub reason: String,
    pub last_params: Vec<f64>,
    pub ssr: f64,
    pub iterations: usize,
}

impl fmt::Display for FitFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} fit: {} after {} iterations (ssr {:.3e}, last {:?})",
            self.model, self.reason, self.iterations, self.ssr, self.last_params
        )
    }
}

pub fn fit_decay(t: &[f64], y: &[f64], model: DecayModel) -> Result<FitReport> {
    if t.len() != y.len() {
        return Err(Error::invalid("y", "length must match t"));
    }
    if t.len() < 5 {
        return Err(Error::invalid("t", "need at least 5 points"));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("t", "data must be finite"));
    }
    if t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("t", "must be strictly increasing"));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * mean.abs().max(1.0) {
        let mut params = vec![0.0, f64::NAN, mean];
        if model == DecayModel::DampedCosine {
            params.extend([f64::NAN, f64::NAN]);
        }
        return Ok(FitReport {
            model,
            std_errors: vec![f64::NAN; params.len()],
            params,
            ssr: 0.0,
            iterations: 0,
            degenerate: true,
        });
    }
    let p0 = initial_guess(t, y, model);
    levenberg_marquardt(t, y, model, p0)
}

fn ssr(t: &[f64], y: &[f64], model: DecayModel, p: &[f64]) -> f64 {
    t.iter()
        .zip(y)
        .map(|(ti, yi)| (yi - model.eval(p, *ti)).powi(2))
        .sum()
}

fn jacobian(t: &[f64], model: DecayModel, p: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(t.len(), p.len());
    let mut row = vec![0.0; p.len()];
    for (i, ti) in t.iter().enumerate() {
        model.gradient(p, *ti, &mut row);
        for (k, v) in row.iter().enumerate() {
            j[(i, k)] = *v;
        }
    }
    j
}

fn levenberg_marquardt(t: &[f64], y: &[f64], model: DecayModel, mut p: Vec<f64>) -> Result<FitReport> {
    let n = p.len();
    let mut cost = ssr(t, y, model, &p);
    let scale = y.iter().map(|v| v * v).sum::<f64>();
    let mut lambda = -1.0;
    let fail = |p: &[f64], cost: f64, it: usize, reason: &str| {
        Error::FitFailed(Box::new(FitFailure {
            model,
            reason: reason.into(),
            last_params: p.to_vec(),
            ssr: cost,
            iterations: it,
        }))
    };
    let mut converged_at = None;
    'outer: for it in 1..=MAX_ITER {
        let j = jacobian(t, model, &p);
        let r = DVector::from_iterator(
            t.len(),
            t.iter().zip(y).map(|(ti, yi)| yi - model.eval(&p, *ti)),
        );
        let jtj = j.transpose() * &j;
        let g = j.transpose() * r;
        if lambda < 0.0 {
            lambda = 1e-3 * (0..n).map(|k| jtj[(k, k)]).fold(0.0, f64::max);
        }
        loop {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.clone().cholesky().map(|c| c.solve(&g)) else {
                lambda *= 4.0;
                if lambda > 1e30 {
                    return Err(fail(&p, cost, it, "normal equations singular"));
                }
                continue;
            };
            let norm_p = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rel = step.norm() / (norm_p + 1e-300);
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let trial_cost = ssr(t, y, model, &trial);
            if trial_cost.is_finite() && trial_cost < cost {
                p = trial;
                cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-300);
                if rel < STEP_TOL || cost <= 1e-30 * scale {
                    converged_at = Some(it);
                    break 'outer;
                }
                continue 'outer;
            }
            if rel < STEP_TOL {
                converged_at = Some(it);
                break 'outer;
            }
            lambda *= 4.0;
            if lambda > 1e30 {
                converged_at = Some(it);
                break 'outer;
            }
        }
    }
    let Some(iterations) = converged_at else {
        return Err(fail(&p, cost, MAX_ITER, "no convergence within 200 iterations"));
    };

    let j = jacobian(t, model, &p);
    let sv = j.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > 1e-12 * smax) {
        return Err(fail(&p, cost, iterations, "rank-deficient Jacobian"));
    }
    let dof = t.len().saturating_sub(n).max(1) as f64;
    let sigma2 = cost / dof;
    let cov = (j.transpose() * j)
        .try_inverse()
        .ok_or_else(|| fail(&p, cost, iterations, "singular covariance"))?;
    let std_errors = (0..n).map(|k| (sigma2 * cov[(k, k)]).max(0.0).sqrt()).collect();
    if model == DecayModel::DampedCosine && p[0] < 0.0 {
        p[0] = -p[0];
        p[4] += std::f64::consts::PI;
    }
    if model == DecayModel::DampedCosine {
        p[4] = p[4].rem_euclid(std::f64::consts::TAU);
    }
    Ok(FitReport {
        model,
        params: p,
        std_errors,
        ssr: cost,
        iterations,
        degenerate: false,
    })
}

/// Linear least squares for the coefficients of the given basis functions.
fn linear_fit(y: &[f64], basis: &[Vec<f64>]) -> Option<(Vec<f64>, f64)> {
    let a = DMatrix::from_fn(y.len(), basis.len(), |i, k| basis[k][i]);
    let b = DVector::from_column_slice(y);
    let sol = a.clone().svd(true, true).solve(&b, 1e-12).ok()?;
    let res = (&a * &sol - b).norm_squared();
    Some((sol.iter().copied().collect(), res))
}

/// Time constants scanned for the starting point, log spaced from the smallest sample step to
/// ten times the record length.
fn time_constant_grid(t: &[f64]) -> Vec<f64> {
    let span = t[t.len() - 1] - t[0];
    let dt = t.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let (lo, hi) = ((0.5 * dt).ln(), (10.0 * span).ln());
    (0..120).map(|i| (lo + (hi - lo) * i as f64 / 119.0).exp()).collect()
}

fn dominant_frequency(t: &[f64], y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let span = t[t.len() - 1] - t[0];
    let dt = span / (t.len() - 1) as f64;
    let f_max = 0.5 / dt;
    let df = 0.25 / span;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (ti, yi) in t.iter().zip(y) {
            let (s, c) = (std::f64::consts::TAU * f * ti).sin_cos();
            re += (yi - mean) * c;
            im += (yi - mean) * s;
        }
        re * re + im * im
    };
    let count = (f_max / df).ceil() as usize;
    let mut best = (0.0, 0.0);
    for k in 1..=count {
        let f = k as f64 * df;
        let pw = power(f);
        if pw > best.1 {
            best = (f, pw);
        }
    }
    let f = best.0;
    let (a, b, c) = (power(f - df), best.1, power(f + df));
    let denom = a - 2.0 * b + c;
    if denom < 0.0 {
        f + 0.5 * df * (a - c) / denom
    } else {
        f
    }
}

fn initial_guess(t: &[f64], y: &[f64], model: DecayModel) -> Vec<f64> {
    let grid = time_constant_grid(t);
    let ones = vec![1.0; t.len()];
    match model {
        DecayModel::Exponential | DecayModel::Gaussian => {
            let mut best = (f64::INFINITY, vec![0.0, grid[0], 0.0]);
            for tc in grid {
                let e: Vec<f64> = t
                    .iter()
                    .map(|ti| match model {
                        DecayModel::Exponential => (-ti / tc).exp(),
                        _ => (-(ti / tc).powi(2)).exp(),
                    })
                    .collect();
                if let Some((c, res)) = linear_fit(y, &[e, ones.clone()]) {
                    if res < best.0 {
                        best = (res, vec![c[0], tc, c[1]]);
                    }
                }
            }
            best.1
        }
        DecayModel::DampedCosine => {
            let f = dominant_frequency(t, y);
            let w = std::f64::consts::TAU * f;
            let mut best = (f64::INFINITY, vec![0.0, grid[0], 0.0, f, 0.0]);
            for tc in grid {
                let ec: Vec<f64> = t.iter().map(|ti| (-ti / tc).exp() * (w * ti).cos()).collect();
                let es: Vec<f64> = t.iter().map(|ti| (-ti / tc).exp() * (w * ti).sin()).collect();
                if let Some((c, res)) = linear_fit(y, &[ec, es, ones.clone()]) {
                    if res < best.0 {
                        // a cos + b sin = A cos(x + phi), A = hypot, phi = atan2(-b, a)
                        let amp = c[0].hypot(c[1]);
                        let phi = (-c[1]).atan2(c[0]);
                        best = (res, vec![amp, tc, c[2], f, phi]);
                    }
                }
            }
            best.1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn noiseless_exponential() {
        let t: Vec<f64> = (0..60).map(|i| i as f64 * 5.0).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.0 * (-x / 83.9).exp() + 0.1).collect();
        let r = fit_decay(&t, &y, DecayModel::Exponential).unwrap();
        assert!((r.time_constant() - 83.9).abs() < 1e-6, "{:?}", r);
        assert!((r.amplitude() - 2.0).abs() < 1e-8);
        assert!((r.offset() - 0.1).abs() < 1e-8);
    }

    #[test]
    fn noiseless_gaussian() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|x| -0.4 * (-(x / 1.3f64).powi(2)).exp() + 0.9).collect();
        let r = fit_decay(&t, &y, DecayModel::Gaussian).unwrap();
        assert!((r.time_constant() - 1.3).abs() < 1e-8);
        assert!((r.amplitude() + 0.4).abs() < 1e-8);
    }

    #[test]
    fn constant_is_degenerate() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let r = fit_decay(&t, &[0.7; 10], DecayModel::Exponential).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.amplitude(), 0.0);
        assert!(r.time_constant().is_nan());
    }

    #[test]
    fn noisy_damped_cosine() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let t: Vec<f64> = (0..300).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t
            .iter()
            .map(|x| (-x / 1.3f64).exp() * (std::f64::consts::TAU * 5.0 * x + 0.4).cos() + noise.sample(&mut rng))
            .collect();
        let r = fit_decay(&t, &y, DecayModel::DampedCosine).unwrap();
        assert!((r.frequency().unwrap() - 5.0).abs() < 0.05);
        assert!((r.time_constant() - 1.3).abs() < 0.065);
        assert!(r.std_errors.iter().all(|e| e.is_finite()));
    }

    #[test]
    fn too_few_points() {
        assert!(fit_decay(&[0.0, 1.0], &[1.0, 0.5], DecayModel::Exponential).is_err());
    }

    #[test]
    fn step_data_fits_or_carries_last_iterate() {
        // identical samples of a line cannot pin a time constant for a damped cosine
        let t: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|x| if *x < 4.0 { 0.0 } else { 1.0 }).collect();
        match fit_decay(&t, &y, DecayModel::Exponential) {
            Ok(r) => assert!(r.ssr > 0.0),
            Err(Error::FitFailed(f)) => assert_eq!(f.last_params.len(), 3),
            Err(e) => panic!("{e}"),
        }
    }
}
