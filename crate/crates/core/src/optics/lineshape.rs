//! Polarization polar curves and synthetic ODMR spectra.

use crate::error::{Error, Result};
use crate::spin::EnergyLevels;

/// Measured E_par/E_perp contrast of the V1 line.
pub const V1_MEASURED_CONTRAST: f64 = 1.85;
/// Measured E_perp/E_par contrast of the V1' line.
pub const V1_PRIME_MEASURED_CONTRAST: f64 = 19.0;

/// Normalized intensity behind an analyzer at angle `theta` (degrees from the c-axis) for a
/// parallel:perpendicular ratio `r`: `(r cos^2 + sin^2) / max(r, 1)`.
pub fn polar_intensity_curve(r: f64, theta_deg: &[f64]) -> Result<Vec<f64>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("ratio", "parallel:perpendicular ratio must be > 0"));
    }
    let norm = r.max(1.0);
    Ok(theta_deg
        .iter()
        .map(|t| {
            let (s, c) = t.to_radians().sin_cos();
            (r * c * c + s * s) / norm
        })
        .collect())
}

/// Relative ODMR signal `[I(f) - I_off] / I_off`: Lorentzians of full width `linewidth` at the
/// three transition frequencies, each peaking at its signed amplitude.
pub fn odmr_spectrum(levels: &EnergyLevels, amplitudes: [f64; 3], linewidth: f64, f_grid: &[f64]) -> Result<Vec<f64>> {
    if !(linewidth > 0.0 && linewidth.is_finite()) {
        return Err(Error::invalid("linewidth", "must be > 0"));
    }
    if amplitudes.iter().any(|a| !a.is_finite()) {
        return Err(Error::invalid("amplitudes", "must be finite"));
    }
    let hw2 = (0.5 * linewidth).powi(2);
    let centers = levels.frequencies();
    Ok(f_grid
        .iter()
        .map(|f| {
            centers
                .iter()
                .zip(&amplitudes)
                .map(|(c, a)| a * hw2 / ((f - c).powi(2) + hw2))
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::{transition_frequencies, SpinQuartetParams};

    #[test]
    fn polar_examples() {
        assert!(polar_intensity_curve(1.0, &[0.0, 33.0, 90.0]).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-15));
        let c = polar_intensity_curve(3.0, &[0.0, 90.0]).unwrap();
        assert!((c[0] / c[1] - 3.0).abs() < 1e-12);
        let c = polar_intensity_curve(1.0 / 19.0, &[0.0, 90.0]).unwrap();
        assert!((c[1] / c[0] - 19.0).abs() < 1e-9);
        assert!(polar_intensity_curve(0.0, &[0.0]).is_err());
    }

    #[test]
    fn merged_dip_and_positive_peak() {
        let lv = transition_frequencies(&SpinQuartetParams::default());
        let f: Vec<f64> = (0..=3000).map(|i| 150.0 + i as f64 * 0.01).collect();
        let s = odmr_spectrum(&lv, [-5e-4; 3], 10.0, &f).unwrap();
        let (i, min) = s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!((f[i] - 168.0).abs() < 0.02);
        assert!(*min < -5e-4 && *min > -1.5e-3);
        let p = odmr_spectrum(&lv, [0.0, 1.0, 0.0], 10.0, &[lv.f2]).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(odmr_spectrum(&lv, [0.0; 3], 10.0, &f).unwrap().iter().all(|v| *v == 0.0));
        assert!(odmr_spectrum(&lv, [1.0; 3], -1.0, &f).is_err());
    }
}
