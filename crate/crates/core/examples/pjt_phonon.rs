//! Pseudo-Jahn-Teller energies across the stability boundary and the normalized
//! electron-phonon coupling curve.

use vsi_sim::thermal::{phonon_coupling_curve, pjt_energy, pjt_potential_minimize, PhononParams, PjtParams};

fn main() -> vsi_sim::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>8} {:>7}", "delta", "E_JT", "minimizer", "Q_min", "stable");
    for k in 0..=12 {
        let p = PjtParams {
            g_coupling: 1.0,
            k_elastic: 1.0,
            delta: 0.25 * k as f64,
        };
        let e = pjt_energy(&p)?;
        let (oracle, _) = pjt_potential_minimize(&p)?;
        println!("{:>6.2} {:>12.6} {:>12.6} {:>8.4} {:>7}", p.delta, e.e_jt, oracle, e.q_min, e.stable);
    }

    let ph = PhononParams::default();
    println!("\nphonon coupling peak (analytic): {:.2} K", ph.peak_temperature());
    let grid: Vec<f64> = (1..=30).map(|k| 10.0 * k as f64).collect();
    for (t, g) in grid.iter().zip(phonon_coupling_curve(&ph, &grid)?) {
        println!("{t:>6.0} K {g:>8.4} {}", "#".repeat((g * 40.0) as usize));
    }
    Ok(())
}
