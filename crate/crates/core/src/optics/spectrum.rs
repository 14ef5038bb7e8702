//! Emission spectra and the Debye-Waller factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// nm, strictly increasing.
    pub wavelength: Vec<f64>,
    pub intensity: Vec<f64>,
}

/// Closed wavelength interval in nm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn overlaps(&self, other: &Window) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }
}

impl Spectrum {
    pub fn new(wavelength: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        let s = Self {
            wavelength,
            intensity,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.wavelength.len() != self.intensity.len() || self.wavelength.len() < 2 {
            return Err(Error::invalid("spectrum", "need at least 2 (wavelength, intensity) samples"));
        }
        if self.wavelength.iter().any(|w| !w.is_finite()) || self.wavelength.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("spectrum", "wavelengths must be strictly increasing"));
        }
        if self.intensity.iter().any(|i| !(i.is_finite() && *i >= 0.0)) {
            return Err(Error::invalid("spectrum", "intensities must be finite and >= 0"));
        }
        Ok(())
    }

    /// Two-column text (wavelength, intensity), comma or whitespace separated. Lines that do
    /// not start with a number are skipped as headers or comments.
    pub fn from_csv(text: &str) -> Result<Self> {
        let (mut w, mut y) = (Vec::new(), Vec::new());
        for (n, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let Some(first) = fields.first() else { continue };
            let Ok(a) = first.parse::<f64>() else { continue };
            let b = fields
                .get(1)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::invalid("spectrum", format!("line {}: expected two numbers", n + 1)))?;
            w.push(a);
            y.push(b);
        }
        Self::new(w, y)
    }

    fn value_at(&self, x: f64) -> f64 {
        let w = &self.wavelength;
        let i = w.partition_point(|v| *v <= x).clamp(1, w.len() - 1);
        let t = (x - w[i - 1]) / (w[i] - w[i - 1]);
        self.intensity[i - 1] + t * (self.intensity[i] - self.intensity[i - 1])
    }

    /// Trapezoidal integral over a window, with the end points linearly interpolated.
    pub fn integrate(&self, win: Window) -> Result<f64> {
        let w = &self.wavelength;
        if !(win.lo < win.hi) || win.lo < w[0] || win.hi > w[w.len() - 1] {
            return Err(Error::invalid(
                "window",
                format!("[{}, {}] must be non-empty and inside [{}, {}] nm", win.lo, win.hi, w[0], w[w.len() - 1]),
            ));
        }
        let mut xs = vec![win.lo];
        xs.extend(w.iter().copied().filter(|x| *x > win.lo && *x < win.hi));
        xs.push(win.hi);
        Ok(xs
            .windows(2)
            .map(|p| 0.5 * (p[1] - p[0]) * (self.value_at(p[0]) + self.value_at(p[1])))
            .sum())
    }
}

/// I_ZPL / (I_ZPL + I_PSB), integrating the ZPL windows and the phonon-sideband window.
pub fn debye_waller(spec: &Spectrum, zpl_windows: &[Window], psb_window: Window) -> Result<f64> {
    spec.validate()?;
    for (i, z) in zpl_windows.iter().enumerate() {
        if z.overlaps(&psb_window) {
            return Err(Error::invalid("zpl_windows", format!("window {i} overlaps the sideband window")));
        }
    }
    let zpl = zpl_windows
        .iter()
        .map(|w| spec.integrate(*w))
        .sum::<Result<f64>>()?;
    let psb = spec.integrate(psb_window)?;
    let total = zpl + psb;
    if total <= 0.0 {
        return Err(Error::UndefinedDwf);
    }
    Ok(zpl / total)
}

/// Sum of Gaussian bands `(center nm, sigma nm, area)` sampled on `grid`.
pub fn gaussian_bands(bands: &[(f64, f64, f64)], grid: &[f64]) -> Result<Spectrum> {
    let norm = (2.0 * std::f64::consts::PI).sqrt();
    let y = grid
        .iter()
        .map(|x| {
            bands
                .iter()
                .map(|(c, s, a)| a / (s * norm) * (-0.5 * ((x - c) / s).powi(2)).exp())
                .sum()
        })
        .collect();
    Spectrum::new(grid.to_vec(), y)
}

/// Test spectrum with a V1 line (861 nm, area 0.40), a V1' line (858 nm, area 0.08) and a
/// sideband (905 nm, area 0.52), together with the windows (V1, V1', sideband).
pub fn synthetic_v1_spectrum(samples_per_nm: usize) -> Result<(Spectrum, [Window; 3])> {
    let n = 130 * samples_per_nm;
    let grid: Vec<f64> = (0..=n).map(|i| 845.0 + i as f64 / samples_per_nm as f64).collect();
    let spec = gaussian_bands(&[(861.0, 0.3, 0.40), (858.0, 0.3, 0.08), (905.0, 8.0, 0.52)], &grid)?;
    Ok((
        spec,
        [
            Window::new(859.5, 862.5),
            Window::new(856.5, 859.5),
            Window::new(865.0, 970.0),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangles_with_known_areas() {
        // ZPL triangle of area 0.4 on [1, 2], PSB triangle of area 0.6 on [3, 5]
        let w = vec![0.0, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = vec![0.0, 0.0, 0.8, 0.0, 0.0, 0.6, 0.0, 0.0];
        let s = Spectrum::new(w, y).unwrap();
        let d = debye_waller(&s, &[Window::new(0.5, 2.5)], Window::new(2.5, 5.5)).unwrap();
        assert!((d - 0.4).abs() < 1e-9, "{d}");
    }

    #[test]
    fn synthetic_two_line_spectrum() {
        let (s, [v1, v1p, psb]) = synthetic_v1_spectrum(50).unwrap();
        let single = debye_waller(&s, &[v1], psb).unwrap();
        let combined = debye_waller(&s, &[v1, v1p], psb).unwrap();
        assert!((single - 0.40 / 0.92).abs() < 1e-4, "{single}");
        assert!((combined - 0.48).abs() < 1e-4, "{combined}");
        let (coarse, _) = synthetic_v1_spectrum(25).unwrap();
        assert!((debye_waller(&coarse, &[v1], psb).unwrap() - single).abs() < 1e-3);
    }

    #[test]
    fn dark_sideband_and_dark_spectrum() {
        let s = Spectrum::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(debye_waller(&s, &[Window::new(0.0, 1.0)], Window::new(2.0, 3.0)).unwrap(), 1.0);
        let dark = Spectrum::new(vec![0.0, 1.0, 2.0], vec![0.0; 3]).unwrap();
        assert!(matches!(
            debye_waller(&dark, &[Window::new(0.0, 1.0)], Window::new(1.0, 2.0)),
            Err(Error::UndefinedDwf)
        ));
    }

    #[test]
    fn rejects_overlap_and_out_of_range() {
        let s = Spectrum::new(vec![0.0, 1.0, 2.0], vec![1.0; 3]).unwrap();
        assert!(debye_waller(&s, &[Window::new(0.0, 1.5)], Window::new(1.0, 2.0)).is_err());
        assert!(debye_waller(&s, &[Window::new(0.0, 1.0)], Window::new(1.0, 2.5)).is_err());
    }

    #[test]
    fn csv_parsing() {
        let s = Spectrum::from_csv("wavelength_nm,intensity\n850,0.1\n851, 0.2\n# c\n852 0.3\n").unwrap();
        assert_eq!(s.wavelength, vec![850.0, 851.0, 852.0]);
        assert_eq!(s.intensity, vec![0.1, 0.2, 0.3]);
    }
}
