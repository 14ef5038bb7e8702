//! Pi-pulse calibration on each transition and the final states in the three drive regimes.

use vsi_sim::pulse::{calibrate_pi_pulse, pi_pulse_regime_states};
use vsi_sim::spin::{SpinQuartetParams, Transition};

fn main() -> vsi_sim::Result<()> {
    let spin = SpinQuartetParams::default();
    // the metric counts population leaving |+-3/2>, so only the outer lines are calibrated
    for omega in [0.5, 7.0] {
        for t in [Transition::F1, Transition::F3] {
            let p = calibrate_pi_pulse(&spin, omega, t)?;
            println!(
                "Omega {omega:>3} MHz {t:?}: carrier {:.3} MHz, pi = {:.4} us, transfer {:.4}",
                p.frequency, p.duration, p.transfer
            );
        }
    }

    let d = 50.0;
    let spin = SpinQuartetParams::new(28.0, d, 6.0)?;
    for ratio in [0.05, 1.0, 50.0] {
        let r = pi_pulse_regime_states(&spin, ratio * d)?;
        println!("\nOmega = {:.1} MHz ({:?})", r.omega, r.regime);
        for s in [&r.from_plus, &r.from_minus] {
            let p = s.populations;
            println!(
                "  from level {}: populations [{:.3}, {:.3}, {:.3}, {:.3}], target {:?}, overlap {:.3}",
                s.initial, p[0], p[1], p[2], p[3], s.target, s.overlap
            );
        }
    }
    Ok(())
}
