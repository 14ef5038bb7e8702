//! Detuned Rabi maps at three drive strengths and the dominant Rabi frequency of each drive
//! frequency, read off the per-row FFT.

use vsi_sim::rabi::{rabi_map, InitialPolarization, LevelBrightness, RABI_DRIVE_AMPLITUDES_MHZ, RABI_T2_STAR_US};
use vsi_sim::spectral::{extract_dominant_rabi_frequency, rabi_fft};
use vsi_sim::spin::{transition_frequencies, SpinQuartetParams};

fn main() -> vsi_sim::Result<()> {
    let spin = SpinQuartetParams::default();
    let lv = transition_frequencies(&spin);
    let step = 0.005;
    let t: Vec<f64> = (0..401).map(|k| k as f64 * step).collect();
    let f: Vec<f64> = (0..31).map(|k| 160.0 + k as f64).collect();

    for omega in RABI_DRIVE_AMPLITUDES_MHZ {
        let map = rabi_map(
            &spin,
            omega,
            &f,
            &t,
            InitialPolarization::default(),
            LevelBrightness::default(),
            RABI_T2_STAR_US,
        )?;
        let spec = rabi_fft(&map, step)?;
        println!("Omega = {omega} MHz (transitions at {:?} MHz)", lv.frequencies());
        println!("  f (MHz)  dominant (MHz)  FFT peak bin (MHz)");
        for (i, fi) in map.f_grid.iter().enumerate().step_by(2) {
            let dominant = extract_dominant_rabi_frequency(&map.rows[i], step)
                .map(|x| format!("{x:>8.3}"))
                .unwrap_or_else(|_| "    none".into());
            println!("  {fi:>7.1}  {dominant}        {:>8.3}", spec.peak_frequency(i));
        }
    }
    Ok(())
}
