//! Ramsey, Hahn-echo and XY-8 traces from a noisy ensemble, each fitted with its decay model.

use vsi_sim::pulse::{
    fit_decay, hahn_trace, ramsey_trace, xy8_trace, DecayModel, NoiseModel, Psd, PulseCalibration, SpinSetup,
};
use vsi_sim::spin::Transition;

fn grid(stop: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| stop * k as f64 / (n - 1) as f64).collect()
}

fn main() -> vsi_sim::Result<()> {
    let setup = SpinSetup::default();
    let cal = PulseCalibration::ideal(&setup.spin, 0.5, Transition::F1);
    let noise = NoiseModel {
        sigma_detuning: NoiseModel::sigma_for_t2_star(1.3),
        t2_homogeneous: Some(83.9),
        ensemble_size: 20_000,
        ..NoiseModel::noiseless()
    };

    let tau = grid(4.0, 81);
    let y = ramsey_trace(&setup, &cal, &noise, &tau)?;
    let fit = fit_decay(&tau, &y, DecayModel::Gaussian)?;
    println!("Ramsey: T2* = {:.3} us (std error {:.1e})", fit.time_constant(), fit.std_errors[1]);

    // detuned carrier: fringes under the envelope
    let fringe = ramsey_trace(&setup, &cal.detuned(2.0), &noise, &tau)?;
    println!("  detuned by 2 MHz, first samples {:?}", &fringe[..6].iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());

    let tau = grid(200.0, 81);
    let y = hahn_trace(&setup, &cal, &noise, &tau)?;
    let free: Vec<f64> = tau.iter().map(|t| 2.0 * t).collect();
    let fit = fit_decay(&free, &y, DecayModel::Exponential)?;
    println!("Hahn: T2 = {:.2} us (signal from {:.3} to {:.3})", fit.time_constant(), y[0], y[y.len() - 1]);

    // slow bath: dynamical decoupling stretches the coherence with the pulse count
    let bath = NoiseModel {
        t2_homogeneous: None,
        psd: Some(Psd::Lorentzian {
            amplitude: 1e-3,
            cutoff: 0.01,
        }),
        ensemble_size: 200,
        ..noise
    };
    let y = hahn_trace(&setup, &cal, &bath, &grid(3000.0, 61))?;
    let free: Vec<f64> = grid(3000.0, 61).iter().map(|t| 2.0 * t).collect();
    println!("Hahn, Lorentzian bath: 1/e time {:.0} us", fit_decay(&free, &y, DecayModel::Gaussian)?.time_constant());
    for n in [1usize, 10] {
        let span = 8.0 * n as f64;
        let tau = grid(40_000.0 / span, 61);
        let y = xy8_trace(&setup, &cal, &bath, &tau, n)?;
        let free: Vec<f64> = tau.iter().map(|t| span * t).collect();
        let fit = fit_decay(&free, &y, DecayModel::Exponential)?;
        println!("XY-8 x {n}, Lorentzian bath: fitted T2 {:.0} us", fit.time_constant());
    }
    Ok(())
}
