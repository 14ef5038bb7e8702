//! A pulse sequence written as JSON: a spin-locking style train of x pulses with a swept gap,
//! simulated with four-level calibrated pulses.

use vsi_sim::pulse::{calibrate_pi_pulse, simulate_sequence, NoiseModel, PulseMode, PulseSequence, SpinSetup};
use vsi_sim::spin::Transition;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SpinSetup::default();
    let pi = calibrate_pi_pulse(&setup.spin, 0.5, Transition::F1)?;
    let text = format!(
        r#"[
            {{"kind": "laser_init", "duration": 2}},
            {{"kind": "rf_pulse", "amplitude": 0.5, "frequency": {f}, "phase": 0, "duration": {h}}},
            {{"kind": "wait", "duration": {{"scale": 0.5}}}},
            {{"kind": "rf_pulse", "amplitude": 0.5, "frequency": {f}, "phase": 1.5707963267948966, "duration": {p}}},
            {{"kind": "wait", "duration": {{"scale": 1}}}},
            {{"kind": "rf_pulse", "amplitude": 0.5, "frequency": {f}, "phase": 1.5707963267948966, "duration": {p}}},
            {{"kind": "wait", "duration": {{"scale": 0.5}}}},
            {{"kind": "rf_pulse", "amplitude": 0.5, "frequency": {f}, "phase": 0, "duration": {h}}},
            {{"kind": "laser_read", "duration": 2}}
        ]"#,
        f = pi.frequency,
        h = 0.5 * pi.duration,
        p = pi.duration,
    );
    let seq: PulseSequence = serde_json::from_str(&text)?;
    seq.validate()?;

    let noise = NoiseModel {
        sigma_detuning: NoiseModel::sigma_for_t2_star(1.3),
        t2_homogeneous: Some(83.9),
        ensemble_size: 100,
        ..NoiseModel::noiseless()
    };
    let tau: Vec<f64> = (0..11).map(|k| 10.0 * k as f64).collect();
    let s = simulate_sequence(&seq, &setup, &noise, &tau, PulseMode::Calibrated)?;
    for (t, v) in tau.iter().zip(&s) {
        println!("tau {t:>5.1} us  signal {v:.4}");
    }
    Ok(())
}
