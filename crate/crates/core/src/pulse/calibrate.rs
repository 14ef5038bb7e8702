//! Pi-pulse calibration on the four-level system and the three drive-strength regimes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::rabi::{rotating_frame_hamiltonian, DriveParams, Propagator};
use crate::spin::{transition_frequencies, SpinQuartetParams, Transition};

const SCAN_POINTS: usize = 400;

/// A calibrated pi pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiPulse {
    pub transition: Transition,
    /// Omega, MHz.
    pub amplitude: f64,
    /// Carrier, MHz.
    pub frequency: f64,
    /// Microseconds.
    pub duration: f64,
    /// Population moved out of the |+-3/2> subspace at `duration`, starting from equal
    /// populations of |+3/2> and |-3/2>.
    pub transfer: f64,
}

fn transfer_out(prop: &Propagator, t: f64) -> f64 {
    let p = prop.transfer_matrix(t);
    // start 0.5/0.5 in levels 0 and 3; population ending in levels 1, 2
    0.5 * (p[1][0] + p[2][0] + p[1][3] + p[2][3])
}

/// Earliest duration maximizing the population transferred out of |+-3/2> when driving
/// `target` on resonance with amplitude `omega`.
///
/// The transfer curve is scanned on 400 points over two isolated Rabi periods; the first local
/// maximum within 1% of the global maximum is then refined by golden-section search.
pub fn calibrate_pi_pulse(spin: &SpinQuartetParams, omega: f64, target: Transition) -> Result<PiPulse> {
    spin.validate()?;
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::invalid("omega", "must be finite and >= 0"));
    }
    if omega == 0.0 {
        return Err(Error::NoTransfer);
    }
    let f = transition_frequencies(spin).frequency(target);
    let prop = Propagator::new(&rotating_frame_hamiltonian(
        spin,
        &DriveParams {
            omega,
            f,
            phase: 0.0,
        },
    ))?;
    let span = 2.0 / target.isolated_rabi_frequency(omega);
    let step = span / (SCAN_POINTS - 1) as f64;
    let curve: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| transfer_out(&prop, i as f64 * step))
        .collect();
    let best = curve.iter().cloned().fold(0.0, f64::max);
    if best < 1e-12 {
        return Err(Error::NoTransfer);
    }
    let first = (1..SCAN_POINTS)
        .find(|&i| {
            let left = curve[i - 1];
            let right = curve.get(i + 1).copied().unwrap_or(f64::NEG_INFINITY);
            curve[i] >= left && curve[i] >= right && curve[i] >= 0.99 * best
        })
        .ok_or_else(|| Error::CalibrationFailure("no maximum in scan window".into()))?;
    let lo = (first - 1) as f64 * step;
    let hi = ((first + 1).min(SCAN_POINTS - 1)) as f64 * step;
    let t = golden_max(|t| transfer_out(&prop, t), lo, hi, 1e-12 * span);
    Ok(PiPulse {
        transition: target,
        amplitude: omega,
        frequency: f,
        duration: t,
        transfer: transfer_out(&prop, t),
    })
}

pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Drive strength relative to the zero-field splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Omega/D >= 10.
    Strong,
    /// 0.1 < Omega/D < 10.
    Comparable,
    /// Omega/D <= 0.1.
    Weak,
}

impl Regime {
    pub fn classify(omega: f64, d: f64) -> Self {
        let r = omega / d.abs();
        if r >= 10.0 {
            Regime::Strong
        } else if r <= 0.1 {
            Regime::Weak
        } else {
            Regime::Comparable
        }
    }

    /// Limiting populations after a pi pulse from |+3/2> (`plus = true`) or |-3/2>, in basis
    /// order.
    pub fn target_populations(self, plus: bool) -> [f64; 4] {
        let p = match self {
            // (|3/2> + i|-1/2>)/sqrt(2)
            Regime::Strong => [0.5, 0.0, 0.5, 0.0],
            // [sqrt2 |3/2> - |-3/2> + sqrt3 (|1/2> + i|-1/2>)] / 3
            Regime::Comparable => [2.0 / 9.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 9.0],
            Regime::Weak => [0.0, 1.0, 0.0, 0.0],
        };
        if plus {
            p
        } else {
            [p[3], p[2], p[1], p[0]]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalState {
    /// Basis index of the initial state.
    pub initial: usize,
    pub pulse: PiPulse,
    /// (re, im) of each amplitude, basis order.
    pub amplitudes: [(f64, f64); 4],
    pub populations: [f64; 4],
    pub target: [f64; 4],
    /// (sum_m sqrt(p_m q_m))^2 between simulated and limiting populations.
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub omega: f64,
    pub regime: Regime,
    pub from_plus: FinalState,
    pub from_minus: FinalState,
}

fn final_state(spin: &SpinQuartetParams, omega: f64, regime: Regime, plus: bool) -> Result<FinalState> {
    let (initial, transition) = if plus {
        (0, Transition::F3)
    } else {
        (3, Transition::F1)
    };
    let pulse = calibrate_pi_pulse(spin, omega, transition)?;
    let u = Propagator::new(&rotating_frame_hamiltonian(
        spin,
        &DriveParams {
            omega,
            f: pulse.frequency,
            phase: 0.0,
        },
    ))?
    .unitary(pulse.duration);
    let amps: [C64; 4] = std::array::from_fn(|m| u[(m, initial)]);
    let populations = amps.map(|a| a.norm_sqr());
    let target = regime.target_populations(plus);
    let overlap = populations
        .iter()
        .zip(&target)
        .map(|(p, q)| (p * q).sqrt())
        .sum::<f64>()
        .powi(2);
    Ok(FinalState {
        initial,
        pulse,
        amplitudes: amps.map(|a| (a.re, a.im)),
        populations,
        target,
        overlap,
    })
}

/// States reached from |+3/2> (driving f3) and |-3/2> (driving f1) after each transition's own
/// calibrated pi pulse, compared with the limiting form of the applicable regime.
pub fn pi_pulse_regime_states(spin: &SpinQuartetParams, omega: f64) -> Result<RegimeReport> {
    let regime = Regime::classify(omega, spin.d);
    Ok(RegimeReport {
        omega,
        regime,
        from_plus: final_state(spin, omega, regime, true)?,
        from_minus: final_state(spin, omega, regime, false)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_system() -> SpinQuartetParams {
        SpinQuartetParams::new(28.0, 50.0, 6.0).unwrap()
    }

    #[test]
    fn isolated_pi_time() {
        let p = calibrate_pi_pulse(&test_system(), 1.0, Transition::F1).unwrap();
        let expect = 1.0 / 3.0_f64.sqrt();
        assert!((p.duration - expect).abs() < 0.01 * expect, "{}", p.duration);
    }

    #[test]
    fn pi_time_matches_dense_scan() {
        let spin = SpinQuartetParams::default();
        let p = calibrate_pi_pulse(&spin, 7.0, Transition::F1).unwrap();
        let prop = Propagator::new(&rotating_frame_hamiltonian(
            &spin,
            &DriveParams {
                omega: 7.0,
                f: p.frequency,
                phase: 0.0,
            },
        ))
        .unwrap();
        let dense: Vec<f64> = (0..200_001).map(|i| transfer_out(&prop, i as f64 * 1e-6)).collect();
        let global = dense.iter().cloned().fold(0.0, f64::max);
        let i = (1..dense.len() - 1)
            .find(|&i| dense[i] >= dense[i - 1] && dense[i] >= dense[i + 1] && dense[i] >= 0.99 * global)
            .unwrap();
        assert!((p.duration - i as f64 * 1e-6).abs() < 2e-6);
        assert!(p.transfer < 1.0 - 1e-6, "imperfect pi pulse expected: {}", p.transfer);
    }

    #[test]
    fn zero_drive_has_no_transfer() {
        assert!(matches!(
            calibrate_pi_pulse(&SpinQuartetParams::default(), 0.0, Transition::F1),
            Err(Error::NoTransfer)
        ));
    }

    #[test]
    fn weak_regime_reaches_half_states() {
        let spin = test_system();
        let r = pi_pulse_regime_states(&spin, 0.05 * spin.d).unwrap();
        assert_eq!(r.regime, Regime::Weak);
        assert!(r.from_plus.populations[1] >= 0.99);
        assert!(r.from_minus.populations[2] >= 0.99);
    }

    #[test]
    fn comparable_regime_spreads_over_all_levels() {
        let spin = test_system();
        let r = pi_pulse_regime_states(&spin, spin.d).unwrap();
        assert_eq!(r.regime, Regime::Comparable);
        let support = r.from_plus.populations.iter().filter(|p| **p > 1e-3).count();
        assert!(support >= 3, "{:?}", r.from_plus.populations);
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(Regime::classify(10.0, 1.0), Regime::Strong);
        assert_eq!(Regime::classify(0.1, 1.0), Regime::Weak);
        assert_eq!(Regime::classify(1.0, 1.0), Regime::Comparable);
    }
}
