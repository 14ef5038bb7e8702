//! Electron-phonon coupling strength against temperature.
//!
//! With a Debye density of states rho_D = 3 w^2 / (2 pi^2 v^3), zero-point amplitude
//! xi = (hbar w / 2 M v^2)^(1/2) and the hydrogenic form factor f(q) = (1 + r_B^2 q^2 / 4)^-2,
//! `g = rho_D f xi` and `g^2 ~ w^5 (1 + r_B^2 w^2 / 4 v^2)^-4`. Temperatures enter through
//! the dominant thermal phonon, hbar w = k_B T. The normalized curve peaks where
//! r_B^2 q^2 / 4 = 5/3.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
/// Longitudinal sound velocity of 4H-SiC, m/s.
pub const SOUND_VELOCITY: f64 = 7.1e3;
/// Effective Bohr radius of the defect orbital, m.
pub const BOHR_RADIUS: f64 = 2.7e-9;
/// Mass used where the normalized curve needs one; it cancels.
const UNIT_MASS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononParams {
    /// m/s
    pub v_sound: f64,
    /// m
    pub r_bohr: f64,
}

impl Default for PhononParams {
    fn default() -> Self {
        Self {
            v_sound: SOUND_VELOCITY,
            r_bohr: BOHR_RADIUS,
        }
    }
}

impl PhononParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_sound > 0.0 && self.v_sound.is_finite() && self.r_bohr > 0.0 && self.r_bohr.is_finite()) {
            return Err(Error::invalid("phonon", "v_sound and r_bohr must be > 0"));
        }
        Ok(())
    }

    /// Analytic maximum of the curve, K.
    pub fn peak_temperature(&self) -> f64 {
        let omega = 2.0 * self.v_sound / self.r_bohr * (5.0_f64 / 3.0).sqrt();
        HBAR * omega / K_B
    }
}

/// Unnormalized g^2(T) with explicit constants.
pub fn coupling_square(ph: &PhononParams, hbar: f64, k_b: f64, mass: f64, t_kelvin: f64) -> f64 {
    let w = k_b * t_kelvin / hbar;
    let v = ph.v_sound;
    let pi2 = std::f64::consts::PI.powi(2);
    let rho_d = 3.0 * w * w / (2.0 * pi2 * v.powi(3));
    let q = w / v;
    let f = (1.0 + ph.r_bohr * ph.r_bohr * q * q / 4.0).powi(-2);
    let xi2 = hbar * w / (2.0 * mass * v * v);
    (rho_d * f).powi(2) * xi2
}

pub(crate) fn normalized_curve_with(
    ph: &PhononParams,
    hbar: f64,
    k_b: f64,
    mass: f64,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    ph.validate()?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::invalid("t_grid", "temperatures must be finite and >= 0"));
    }
    let raw: Vec<f64> = t_grid
        .iter()
        .map(|&t| coupling_square(ph, hbar, k_b, mass, t))
        .collect();
    let max = raw.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(vec![0.0; raw.len()]);
    }
    Ok(raw.into_iter().map(|g| g / max).collect())
}

/// g^2(T) divided by its maximum on the grid.
pub fn phonon_coupling_curve(ph: &PhononParams, t_grid: &[f64]) -> Result<Vec<f64>> {
    normalized_curve_with(ph, HBAR, K_B, UNIT_MASS, t_grid)
}
