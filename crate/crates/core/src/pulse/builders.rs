//! Standard decay sequences: Ramsey, Hahn echo and XY-8.
//!
//! All sequences start and end with 2 us laser pulses. The sweep value `tau` is the free
//! evolution between pi/2 and pi/2 (Ramsey), half the echo time (Hahn, decay exp(-2 tau/T2)),
//! or the inter-pulse spacing (XY-8, total free evolution 8 N tau).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::calibrate::calibrate_pi_pulse;
use super::engine::{simulate_sequence, PulseMode, SpinSetup};
use super::noise::NoiseModel;
use super::sequence::{Duration, PulseSegment, PulseSequence};
use crate::error::Result;
use crate::spin::{transition_frequencies, SpinQuartetParams, Transition};

pub const LASER_PULSE_US: f64 = 2.0;

/// Pulse parameters shared by the builders.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseCalibration {
    /// Omega, MHz.
    pub amplitude: f64,
    /// Carrier, MHz.
    pub frequency: f64,
    /// Pi-pulse duration, us.
    pub pi: f64,
    /// Pi/2-pulse duration, us.
    pub half_pi: f64,
    #[serde(default)]
    pub mode: PulseMode,
}

impl PulseCalibration {
    /// Four-level calibrated pulse on `target`; the pi/2 pulse is half the pi pulse.
    pub fn calibrated(spin: &SpinQuartetParams, amplitude: f64, target: Transition) -> Result<Self> {
        let p = calibrate_pi_pulse(spin, amplitude, target)?;
        Ok(Self {
            amplitude,
            frequency: p.frequency,
            pi: p.duration,
            half_pi: 0.5 * p.duration,
            mode: PulseMode::Calibrated,
        })
    }

    /// Instantaneous two-level pulses on `target`, with durations of the isolated transition.
    pub fn ideal(spin: &SpinQuartetParams, amplitude: f64, target: Transition) -> Self {
        let pi = 0.5 / target.isolated_rabi_frequency(amplitude);
        Self {
            amplitude,
            frequency: transition_frequencies(spin).frequency(target),
            pi,
            half_pi: 0.5 * pi,
            mode: PulseMode::Ideal,
        }
    }

    /// Same pulses with the carrier shifted by `delta` MHz.
    pub fn detuned(mut self, delta: f64) -> Self {
        self.frequency += delta;
        self
    }

    fn pulse(&self, duration: f64, phase: f64) -> PulseSegment {
        PulseSegment::rf(self.amplitude, self.frequency, phase, Duration::Fixed(duration))
    }
}

pub fn ramsey_sequence(cal: &PulseCalibration) -> Result<PulseSequence> {
    PulseSequence::new(vec![
        PulseSegment::laser_init(LASER_PULSE_US),
        cal.pulse(cal.half_pi, 0.0),
        PulseSegment::wait(Duration::swept(1.0)),
        cal.pulse(cal.half_pi, 0.0),
        PulseSegment::laser_read(LASER_PULSE_US),
    ])
}

pub fn hahn_sequence(cal: &PulseCalibration) -> Result<PulseSequence> {
    PulseSequence::new(vec![
        PulseSegment::laser_init(LASER_PULSE_US),
        cal.pulse(cal.half_pi, 0.0),
        PulseSegment::wait(Duration::swept(1.0)),
        cal.pulse(cal.pi, 0.0),
        PulseSegment::wait(Duration::swept(1.0)),
        cal.pulse(cal.half_pi, 0.0),
        PulseSegment::laser_read(LASER_PULSE_US),
    ])
}

/// Phases of the eight pi pulses of one XY-8 block: x y x y y x y x.
pub const XY8_PHASES: [f64; 8] = [0.0, FRAC_PI_2, 0.0, FRAC_PI_2, FRAC_PI_2, 0.0, FRAC_PI_2, 0.0];

pub fn xy8_sequence(cal: &PulseCalibration, repetitions: usize) -> Result<PulseSequence> {
    let mut segs = vec![
        PulseSegment::laser_init(LASER_PULSE_US),
        cal.pulse(cal.half_pi, 0.0),
    ];
    for _ in 0..repetitions {
        segs.push(PulseSegment::wait(Duration::swept(0.5)));
        for (k, phase) in XY8_PHASES.iter().enumerate() {
            if k > 0 {
                segs.push(PulseSegment::wait(Duration::swept(1.0)));
            }
            segs.push(cal.pulse(cal.pi, *phase));
        }
        segs.push(PulseSegment::wait(Duration::swept(0.5)));
    }
    segs.push(cal.pulse(cal.half_pi, 0.0));
    segs.push(PulseSegment::laser_read(LASER_PULSE_US));
    PulseSequence::new(segs)
}

pub fn ramsey_trace(setup: &SpinSetup, cal: &PulseCalibration, noise: &NoiseModel, tau_grid: &[f64]) -> Result<Vec<f64>> {
    simulate_sequence(&ramsey_sequence(cal)?, setup, noise, tau_grid, cal.mode)
}

pub fn hahn_trace(setup: &SpinSetup, cal: &PulseCalibration, noise: &NoiseModel, tau_grid: &[f64]) -> Result<Vec<f64>> {
    simulate_sequence(&hahn_sequence(cal)?, setup, noise, tau_grid, cal.mode)
}

pub fn xy8_trace(
    setup: &SpinSetup,
    cal: &PulseCalibration,
    noise: &NoiseModel,
    tau_grid: &[f64],
    repetitions: usize,
) -> Result<Vec<f64>> {
    if repetitions == 0 {
        return Err(crate::error::Error::invalid("repetitions", "must be >= 1"));
    }
    simulate_sequence(&xy8_sequence(cal, repetitions)?, setup, noise, tau_grid, cal.mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rabi::{InitialPolarization, LevelBrightness};

    fn setup() -> SpinSetup {
        SpinSetup {
            spin: SpinQuartetParams::default(),
            init: InitialPolarization::pure(3),
            brightness: LevelBrightness::new([0.0, 0.0, 0.0, 1.0]).unwrap(),
        }
    }

    #[test]
    fn xy8_free_time_and_positions() {
        let cal = PulseCalibration::ideal(&SpinQuartetParams::default(), 1.0, Transition::F1);
        let seq = xy8_sequence(&cal, 2).unwrap();
        let d = seq.durations_at(0.4).unwrap();
        let (t, pos) = seq.free_evolution(&d);
        assert!((t - 16.0 * 0.4).abs() < 1e-12);
        assert_eq!(pos.len(), 16);
        for (k, p) in pos.iter().enumerate() {
            assert!((p - (k as f64 + 0.5) / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hahn_refocuses_static_detuning() {
        let s = setup();
        let cal = PulseCalibration::ideal(&s.spin, 1.0, Transition::F1);
        let noise = NoiseModel {
            sigma_detuning: 0.5,
            ensemble_size: 32,
            seed: 3,
            ..NoiseModel::noiseless()
        };
        let taus: Vec<f64> = (0..10).map(|i| i as f64 * 0.7).collect();
        let sig = hahn_trace(&s, &cal, &noise, &taus).unwrap();
        for y in &sig {
            assert!((y - sig[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn hahn_homogeneous_envelope() {
        let s = setup();
        let cal = PulseCalibration::ideal(&s.spin, 1.0, Transition::F1);
        let noise = NoiseModel {
            t2_homogeneous: Some(10.0),
            ..NoiseModel::noiseless()
        };
        let taus = [0.0, 2.0, 5.0];
        let sig = hahn_trace(&s, &cal, &noise, &taus).unwrap();
        // contrast around the dephased level 0.5 decays as exp(-2 tau / T2)
        for (t, y) in taus.iter().zip(&sig) {
            let expect = 0.5 + 0.5 * (-2.0 * t / 10.0).exp();
            assert!((y - expect).abs() < 1e-12, "{y} {expect}");
        }
    }

    #[test]
    fn ideal_xy8_blocks_are_identity() {
        let s = setup();
        let cal = PulseCalibration::ideal(&s.spin, 1.0, Transition::F1);
        let sig = xy8_trace(&s, &cal, &NoiseModel::noiseless(), &[0.0, 0.3, 1.1], 3).unwrap();
        // the blocks cancel, leaving the two pi/2 pulses: a full transfer
        for y in sig {
            assert!(y.abs() < 1e-10, "{y}");
        }
    }
}
