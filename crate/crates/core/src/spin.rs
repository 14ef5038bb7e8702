//! Static S=3/2 spin model.
//!
//! # Basis ordering
//!
//! Every 4x4 matrix and every 4-vector in this crate uses the S_z eigenbasis ordered as
//!
//! | index | 0      | 1      | 2      | 3      |
//! |-------|--------|--------|--------|--------|
//! | m     | +3/2   | +1/2   | -1/2   | -3/2   |
//!
//! so `sz = diag(3/2, 1/2, -1/2, -3/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat4, C64, ZERO};

/// S_z eigenvalue of each basis index.
pub const M_VALUES: [f64; 4] = [1.5, 0.5, -0.5, -1.5];

/// Gyromagnetic ratio of the V_Si electron spin, MHz/mT.
pub const GAMMA_MHZ_PER_MT: f64 = 28.0;
/// Zero-field-splitting parameter D in MHz (the splitting 2D is 4 MHz).
pub const ZFS_D_MHZ: f64 = 2.0;
/// Static field of the 60 G Rabi experiments, mT.
pub const B0_LOW_FIELD_MT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinQuartetParams {
    /// Gyromagnetic ratio g*mu_B/h in MHz/mT.
    pub gamma: f64,
    /// Zero-field-splitting parameter D in MHz.
    pub d: f64,
    /// Static field along the c-axis, mT.
    pub b0: f64,
}

impl Default for SpinQuartetParams {
    fn default() -> Self {
        Self {
            gamma: GAMMA_MHZ_PER_MT,
            d: ZFS_D_MHZ,
            b0: B0_LOW_FIELD_MT,
        }
    }
}

impl SpinQuartetParams {
    pub fn new(gamma: f64, d: f64, b0: f64) -> Result<Self> {
        let p = Self { gamma, d, b0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::invalid("gamma", "must be finite and > 0"));
        }
        if !self.d.is_finite() {
            return Err(Error::invalid("d", "must be finite"));
        }
        if !(self.b0.is_finite() && self.b0 >= 0.0) {
            return Err(Error::invalid("b0", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Zeeman frequency gamma*B0 in MHz.
    pub fn larmor(&self) -> f64 {
        self.gamma * self.b0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrices {
    pub sx: Mat4,
    pub sy: Mat4,
    pub sz: Mat4,
}

/// S=3/2 angular-momentum matrices in the crate-wide basis ordering.
pub fn spin_matrices() -> SpinMatrices {
    let mut sx = Mat4::zeros();
    let mut sy = Mat4::zeros();
    let mut sz = Mat4::zeros();
    let s = 1.5_f64;
    for (k, &m) in M_VALUES.iter().enumerate() {
        sz[(k, k)] = C64::new(m, 0.0);
    }
    // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; index k-1 holds m+1.
    for k in 1..4 {
        let m = M_VALUES[k];
        let amp = (s * (s + 1.0) - m * (m + 1.0)).sqrt();
        // <m+1| Sx |m> = amp/2, <m+1| Sy |m> = amp/(2i)
        sx[(k - 1, k)] = C64::new(amp / 2.0, 0.0);
        sx[(k, k - 1)] = C64::new(amp / 2.0, 0.0);
        sy[(k - 1, k)] = C64::new(0.0, -amp / 2.0);
        sy[(k, k - 1)] = C64::new(0.0, amp / 2.0);
    }
    SpinMatrices { sx, sy, sz }
}

/// Analytic level energies eps_m = gamma*B0*m + D(m^2 - 5/4), MHz, in basis order.
pub fn level_energies(p: &SpinQuartetParams) -> [f64; 4] {
    M_VALUES.map(|m| p.larmor() * m + p.d * (m * m - 1.25))
}

/// H = gamma*B0*Sz + D(Sz^2 - S(S+1)/3), MHz.
pub fn static_hamiltonian(p: &SpinQuartetParams) -> Mat4 {
    let s = spin_matrices();
    let id = Mat4::identity();
    let zeeman = s.sz * C64::new(p.larmor(), 0.0);
    let zfs = (s.sz * s.sz - id * C64::new(15.0 / 12.0, 0.0)) * C64::new(p.d, 0.0);
    zeeman + zfs
}

/// The three Delta m = 1 transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// |-3/2> <-> |-1/2>
    F1,
    /// |-1/2> <-> |+1/2>
    F2,
    /// |+1/2> <-> |+3/2>
    F3,
}

impl Transition {
    pub const ALL: [Transition; 3] = [Transition::F1, Transition::F2, Transition::F3];

    /// Basis indices (upper-m level, lower-m level) joined by this transition.
    pub fn levels(self) -> (usize, usize) {
        match self {
            Transition::F1 => (2, 3),
            Transition::F2 => (1, 2),
            Transition::F3 => (0, 1),
        }
    }

    /// |<upper|Sx|lower>|: sqrt(3)/2 for the outer transitions, 1 for the middle one.
    pub fn sx_element(self) -> f64 {
        match self {
            Transition::F2 => 1.0,
            _ => 3.0_f64.sqrt() / 2.0,
        }
    }

    /// Resonant Rabi frequency of this transition when isolated, for drive amplitude `omega`.
    pub fn isolated_rabi_frequency(self, omega: f64) -> f64 {
        omega * self.sx_element()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevels {
    /// Energies in MHz in basis order (+3/2, +1/2, -1/2, -3/2).
    pub eps: [f64; 4],
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl EnergyLevels {
    pub fn frequency(&self, t: Transition) -> f64 {
        match t {
            Transition::F1 => self.f1,
            Transition::F2 => self.f2,
            Transition::F3 => self.f3,
        }
    }

    pub fn frequencies(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }

    /// Transition whose frequency lies closest to `f`.
    pub fn nearest(&self, f: f64) -> Transition {
        Transition::ALL
            .into_iter()
            .min_by(|a, b| {
                (self.frequency(*a) - f)
                    .abs()
                    .total_cmp(&(self.frequency(*b) - f).abs())
            })
            .expect("three transitions")
    }
}

pub fn transition_frequencies(p: &SpinQuartetParams) -> EnergyLevels {
    let h = static_hamiltonian(p);
    let eps = [0, 1, 2, 3].map(|k| h[(k, k)].re);
    let gap = |t: Transition| {
        let (a, b) = t.levels();
        (eps[a] - eps[b]).abs()
    };
    EnergyLevels {
        eps,
        f1: gap(Transition::F1),
        f2: gap(Transition::F2),
        f3: gap(Transition::F3),
    }
}

/// Whether `h` is diagonal in the S_z basis (no off-diagonal entries above `tol`).
pub fn is_sz_diagonal(h: &Mat4, tol: f64) -> bool {
    (0..4).all(|i| (0..4).all(|j| i == j || (h[(i, j)] - ZERO).norm() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigh4, hermitian_defect, I};

    #[test]
    fn sz_is_diagonal_in_documented_order() {
        let s = spin_matrices();
        for (k, m) in M_VALUES.iter().enumerate() {
            assert_eq!(s.sz[(k, k)], C64::new(*m, 0.0));
        }
        assert!(is_sz_diagonal(&s.sz, 0.0));
    }

    #[test]
    fn commutator_closes() {
        let s = spin_matrices();
        let comm = s.sx * s.sy - s.sy * s.sx - s.sz * I;
        assert!(comm.norm() < 1e-12);
        for m in [&s.sx, &s.sy, &s.sz] {
            assert!(hermitian_defect(m) < 1e-15);
        }
    }

    #[test]
    fn sx_outer_element_is_sqrt3_over_2() {
        let s = spin_matrices();
        let v = 3.0_f64.sqrt() / 2.0;
        assert!((s.sx[(0, 1)].norm() - v).abs() < 1e-15);
        assert!((s.sx[(3, 2)].norm() - v).abs() < 1e-15);
        assert!((s.sx[(1, 2)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_field_levels_are_split_by_2d() {
        let p = SpinQuartetParams::new(28.0, 2.0, 0.0).unwrap();
        let (vals, _) = eigh4(&static_hamiltonian(&p));
        let mut v: Vec<f64> = vals.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        let expected = [-2.0, -2.0, 2.0, 2.0];
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_at_60_gauss() {
        let p = SpinQuartetParams::default();
        let h = static_hamiltonian(&p);
        let diag = [0, 1, 2, 3].map(|k| h[(k, k)].re);
        let expected = [254.0, 82.0, -86.0, -250.0];
        for (a, b) in diag.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let (vals, _) = eigh4(&h);
        let mut v: Vec<f64> = vals.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in v.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(h.trace().norm() < 1e-12);
    }

    #[test]
    fn transition_frequency_examples() {
        let lv = transition_frequencies(&SpinQuartetParams::default());
        assert_eq!(lv.frequencies(), [164.0, 168.0, 172.0]);

        let lv = transition_frequencies(&SpinQuartetParams::new(28.0, 2.0, 0.0).unwrap());
        assert_eq!(lv.frequencies(), [4.0, 0.0, 4.0]);

        let lv = transition_frequencies(&SpinQuartetParams::new(28.0, 2.0, 100.0).unwrap());
        assert_eq!(lv.frequencies(), [2796.0, 2800.0, 2804.0]);
        assert_eq!(lv.nearest(2799.0), Transition::F2);
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(SpinQuartetParams::new(0.0, 2.0, 1.0).is_err());
        assert!(SpinQuartetParams::new(28.0, 2.0, -1.0).is_err());
        assert!(SpinQuartetParams::new(28.0, f64::NAN, 1.0).is_err());
        assert!(SpinQuartetParams::new(28.0, -2.0, 1.0).is_ok());
    }
}
