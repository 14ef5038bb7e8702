//! Pseudo-Jahn-Teller energetics of an A1 level coupled to an E pair by an E-symmetric mode.
//!
//! In the basis (|A>, |Ex>, |Ey>) with displacements (theta, eta):
//!
//! ```text
//! W(theta, eta) = G [[0, theta, -eta], [theta, 0, 0], [-eta, 0, 0]] + (Delta/3) diag(-2, 1, 1)
//!                 + K (theta^2 + eta^2) / 2
//! ```
//!
//! The lowest sheet depends only on Q = sqrt(theta^2 + eta^2):
//! `-Delta/6 - sqrt(Delta^2/4 + G^2 Q^2) + K Q^2 / 2`.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::calibrate::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PjtParams {
    /// Linear vibronic constant G.
    pub g_coupling: f64,
    /// Force constant K.
    pub k_elastic: f64,
    /// Splitting Delta between the E pair and the A level.
    pub delta: f64,
}

impl PjtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_elastic > 0.0 && self.k_elastic.is_finite()) {
            return Err(Error::invalid("k_elastic", "must be > 0"));
        }
        if !(self.g_coupling >= 0.0 && self.g_coupling.is_finite()) {
            return Err(Error::invalid("g_coupling", "must be >= 0"));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        Ok(())
    }

    pub fn epsilon0(&self) -> f64 {
        self.g_coupling * self.g_coupling / (2.0 * self.k_elastic)
    }

    pub fn q0(&self) -> f64 {
        self.g_coupling / self.k_elastic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PjtEnergy {
    pub e_jt: f64,
    pub q_min: f64,
    pub epsilon0: f64,
    pub q0: f64,
    /// Whether a distorted minimum exists, |Delta| < 4 epsilon0.
    pub stable: bool,
}

/// Closed-form minimum of the lowest adiabatic sheet.
pub fn pjt_energy(p: &PjtParams) -> Result<PjtEnergy> {
    p.validate()?;
    let eps0 = p.epsilon0();
    let q0 = p.q0();
    let d = p.delta;
    let stable = if p.g_coupling == 0.0 {
        false
    } else {
        d.abs() < 4.0 * eps0
    };
    let (e_jt, q_min) = if stable {
        let q2 = q0 * q0 - (d / (2.0 * p.g_coupling)).powi(2);
        (-d / 6.0 - eps0 - d * d / (16.0 * eps0), q2.max(0.0).sqrt())
    } else {
        // undistorted: lowest eigenvalue of (Delta/3) diag(-2, 1, 1)
        (-d / 6.0 - d.abs() / 2.0, 0.0)
    };
    Ok(PjtEnergy {
        e_jt,
        q_min,
        epsilon0: eps0,
        q0,
        stable,
    })
}

/// Lowest eigenvalue of the 3x3 electronic matrix plus elastic energy, at (theta, eta).
pub fn adiabatic_energy(p: &PjtParams, theta: f64, eta: f64) -> f64 {
    let g = p.g_coupling;
    let d3 = p.delta / 3.0;
    let m = Matrix3::new(
        -2.0 * d3,
        g * theta,
        -g * eta,
        g * theta,
        d3,
        0.0,
        -g * eta,
        0.0,
        d3,
    );
    let lowest = SymmetricEigen::new(m).eigenvalues.min();
    lowest + 0.5 * p.k_elastic * (theta * theta + eta * eta)
}

/// Brute-force minimum along the radial direction theta = Q, eta = 0 by golden section.
pub fn pjt_potential_minimize(p: &PjtParams) -> Result<(f64, f64)> {
    p.validate()?;
    let q_hi = 2.0 * p.q0() + (p.delta.abs() / p.k_elastic).sqrt() + 1.0;
    let q = golden_max(|q| -adiabatic_energy(p, q, 0.0), 0.0, q_hi, 1e-13 * q_hi);
    let (e_q, e_0) = (adiabatic_energy(p, q, 0.0), adiabatic_energy(p, 0.0, 0.0));
    if e_0 <= e_q {
        Ok((e_0, 0.0))
    } else {
        Ok((e_q, q))
    }
}

/// Curvature of the lowest sheet at Q = 0 by central differences with step `1e-4 q0`.
pub fn curvature_at_origin(p: &PjtParams) -> f64 {
    let h = 1e-4 * p.q0().max(1e-300);
    (adiabatic_energy(p, h, 0.0) - 2.0 * adiabatic_energy(p, 0.0, 0.0) + adiabatic_energy(p, -h, 0.0)) / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(g: f64, k: f64, d: f64) -> PjtParams {
        PjtParams {
            g_coupling: g,
            k_elastic: k,
            delta: d,
        }
    }

    #[test]
    fn zero_splitting() {
        let e = pjt_energy(&p(1.3, 0.7, 0.0)).unwrap();
        assert!((e.e_jt + e.epsilon0).abs() < 1e-15);
        assert!((e.q_min - e.q0).abs() < 1e-15);
        let (num, _) = pjt_potential_minimize(&p(1.3, 0.7, 0.0)).unwrap();
        assert!((num + e.epsilon0).abs() < 1e-9);
    }

    #[test]
    fn worked_example() {
        let e = pjt_energy(&p(1.0, 1.0, 0.5)).unwrap();
        assert_eq!(e.epsilon0, 0.5);
        assert!((e.q_min - 0.968_245_836_551_854_2).abs() < 1e-12);
        assert!((e.e_jt - (-0.5 / 6.0 - 0.5 - 0.25 / 8.0)).abs() < 1e-15);
        assert!((e.e_jt + 0.614_583).abs() < 1e-5);
        let (num, q) = pjt_potential_minimize(&p(1.0, 1.0, 0.5)).unwrap();
        assert!((num - e.e_jt).abs() < 1e-6);
        assert!((q - e.q_min).abs() < 1e-5);
    }

    #[test]
    fn threshold_is_unstable() {
        let e = pjt_energy(&p(1.0, 1.0, 2.0)).unwrap();
        assert!(!e.stable);
        assert_eq!(e.q_min, 0.0);
        assert!((e.e_jt + 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn uncoupled_system() {
        let e = pjt_energy(&p(0.0, 1.0, -0.6)).unwrap();
        assert_eq!(e.q_min, 0.0);
        assert!((e.e_jt - (-0.2)).abs() < 1e-15);
    }

    #[test]
    fn curvature_changes_sign_at_boundary() {
        // K - 2 G^2 / |Delta| vanishes at |Delta| = 4 epsilon0
        assert!(curvature_at_origin(&p(1.0, 1.0, 1.9)) < 0.0);
        assert!(curvature_at_origin(&p(1.0, 1.0, 2.1)) > 0.0);
    }

    #[test]
    fn rejects_bad_force_constant() {
        assert!(pjt_energy(&p(1.0, 0.0, 0.1)).is_err());
    }
}
