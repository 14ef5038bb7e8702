//! Polarization ratios of the bundled V1 and V1' selection-rule presets, in exact arithmetic,
//! and the analyzer curve each implies.

use vsi_sim::optics::lineshape::{V1_MEASURED_CONTRAST, V1_PRIME_MEASURED_CONTRAST};
use vsi_sim::optics::{allowed_polarizations, polar_intensity_curve, SelectionPreset, SymmetryLabel};

fn main() -> vsi_sim::Result<()> {
    for a in SymmetryLabel::ALL {
        let row: Vec<String> = SymmetryLabel::ALL
            .iter()
            .map(|b| {
                let al = allowed_polarizations(a, *b);
                match (al.z, al.xy) {
                    (true, true) => "Z,XY",
                    (true, false) => "Z",
                    (false, true) => "XY",
                    (false, false) => "-",
                }
                .to_string()
            })
            .collect();
        println!("{a:>14?}: {}", row.join("  "));
    }

    for (preset, measured) in [
        (SelectionPreset::v1(), V1_MEASURED_CONTRAST),
        (SelectionPreset::v1_prime(), 1.0 / V1_PRIME_MEASURED_CONTRAST),
    ] {
        let w = preset.weights()?;
        let (p, q) = w.reduced();
        println!(
            "\n{}: parallel {} perpendicular {} -> {p}:{q} (measured parallel/perpendicular {measured:.3})",
            preset.name, w.parallel, w.perpendicular
        );
        let theta: Vec<f64> = (0..=12).map(|k| 15.0 * k as f64).collect();
        for (t, i) in theta.iter().zip(polar_intensity_curve(w.ratio(), &theta)?) {
            println!("  {t:>5.0} deg {i:.3}");
        }
    }
    Ok(())
}
