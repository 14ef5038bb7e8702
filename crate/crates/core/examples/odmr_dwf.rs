//! ODMR spectrum with the triplet merged by a broad line, the SNR gain of a given contrast, and
//! Debye-Waller factors of a synthetic emission spectrum.

use vsi_sim::optics::spectrum::synthetic_v1_spectrum;
use vsi_sim::optics::{debye_waller, odmr_spectrum};
use vsi_sim::pulse::snr_ratio;
use vsi_sim::spin::{transition_frequencies, SpinQuartetParams};

fn main() -> vsi_sim::Result<()> {
    let lv = transition_frequencies(&SpinQuartetParams::default());
    let grid: Vec<f64> = (0..=120).map(|k| 140.0 + 0.5 * k as f64).collect();
    for width in [1.0, 10.0] {
        let s = odmr_spectrum(&lv, [-5e-4; 3], width, &grid)?;
        let k = (0..s.len()).min_by(|a, b| s[*a].total_cmp(&s[*b])).unwrap_or(0);
        println!("linewidth {width:>4} MHz: deepest point {:.1} MHz, {:.2e}", grid[k], s[k]);
    }

    for c in [0.1, 0.5, 0.9] {
        println!("contrast {c}: SNR gain {:.4}", snr_ratio(c)?);
    }

    let (spec, [v1, v1p, psb]) = synthetic_v1_spectrum(50)?;
    println!("DWF (V1 line) {:.4}", debye_waller(&spec, &[v1], psb)?);
    println!("DWF (V1 + V1') {:.4}", debye_waller(&spec, &[v1, v1p], psb)?);
    Ok(())
}
