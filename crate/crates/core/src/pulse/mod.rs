//! Pulse-sequence experiments on the spin quartet: construction, calibration, simulation under
//! quasi-static and homogeneous noise, filter-function coherence, decay fitting and the ODMR
//! signal-to-noise formula.

pub mod builders;
pub mod calibrate;
pub mod engine;
pub mod filter;
pub mod fit;
pub mod noise;
pub mod sequence;

pub use builders::{hahn_trace, ramsey_trace, xy8_trace, PulseCalibration};
pub use calibrate::{calibrate_pi_pulse, pi_pulse_regime_states, PiPulse, Regime, RegimeReport};
pub use engine::{simulate_sequence, PulseMode, SpinSetup};
pub use filter::{filter_function_coherence, FilterFunction, Psd};
pub use fit::{fit_decay, DecayModel, FitReport};
pub use noise::NoiseModel;
pub use sequence::{Duration, PulseSegment, PulseSequence, SegmentKind};

use crate::error::{Error, Result};

/// SNR gain 1/sqrt(1 - C) of a contrast-C ODMR measurement over its reference.
pub fn snr_ratio(contrast: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&contrast) {
        return Err(Error::Domain(format!(
            "contrast must lie in [0, 1), got {contrast}"
        )));
    }
    Ok((1.0 / (1.0 - contrast)).sqrt())
}
