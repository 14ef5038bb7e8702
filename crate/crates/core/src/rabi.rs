//! Driven spin dynamics in the frame rotating with the RF drive.
//!
//! The drive couples through `(Omega/2)(cos(phi) Sx + sin(phi) Sy)`, which puts `(sqrt(3)/4) Omega`
//! between |+-3/2> and |+-1/2> and `Omega/2` between |+1/2> and |-1/2>. The diagonal is
//! `eps_m - m f`, so driving at a transition frequency closes that transition's diagonal gap.
//! Basis ordering follows [`crate::spin`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh4, hermitian_defect, Mat4, C64};
use crate::spin::{level_energies, spin_matrices, SpinQuartetParams, M_VALUES};

/// T2* used to damp simulated Rabi traces at 60 G, in microseconds.
pub const RABI_T2_STAR_US: f64 = 0.2;
/// Drive amplitudes (MHz) of the three simulated RF powers.
pub const RABI_DRIVE_AMPLITUDES_MHZ: [f64; 3] = [2.0, 7.0, 15.0];

const TWO_PI: f64 = std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Drive amplitude Omega in MHz.
    pub omega: f64,
    /// Drive frequency in MHz.
    pub f: f64,
    /// Global phase of the drive, radians.
    #[serde(default)]
    pub phase: f64,
}

impl DriveParams {
    pub fn new(omega: f64, f: f64) -> Result<Self> {
        let d = Self { omega, f, phase: 0.0 };
        d.validate()?;
        Ok(d)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return Err(Error::invalid("omega", "must be finite and >= 0"));
        }
        if !(self.f.is_finite() && self.f > 0.0) {
            return Err(Error::invalid("f", "must be finite and > 0"));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid("phase", "must be finite"));
        }
        Ok(())
    }
}

/// Occupation probabilities of the four S_z levels after optical pumping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct InitialPolarization([f64; 4]);

impl InitialPolarization {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0) {
            return Err(Error::invalid("init", "probabilities must lie in [0, 1]"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("init", format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self(p))
    }

    /// Pure state in basis index `k`.
    pub fn pure(k: usize) -> Self {
        let mut p = [0.0; 4];
        p[k] = 1.0;
        Self(p)
    }

    pub fn probabilities(&self) -> [f64; 4] {
        self.0
    }
}

impl Default for InitialPolarization {
    /// Incoherent mixture of |+3/2> and |-3/2>.
    fn default() -> Self {
        Self([0.5, 0.0, 0.0, 0.5])
    }
}

impl TryFrom<[f64; 4]> for InitialPolarization {
    type Error = Error;
    fn try_from(p: [f64; 4]) -> Result<Self> {
        Self::new(p)
    }
}

impl From<InitialPolarization> for [f64; 4] {
    fn from(p: InitialPolarization) -> Self {
        p.0
    }
}

/// Photoluminescence weight of each S_z level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct LevelBrightness([f64; 4]);

impl LevelBrightness {
    pub fn new(i: [f64; 4]) -> Result<Self> {
        if i.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("brightness", "weights must be finite and >= 0"));
        }
        Ok(Self(i))
    }

    pub fn weights(&self) -> [f64; 4] {
        self.0
    }
}

impl Default for LevelBrightness {
    /// |+-3/2> bright, |+-1/2> dark.
    fn default() -> Self {
        Self([1.0, 0.0, 0.0, 1.0])
    }
}

impl TryFrom<[f64; 4]> for LevelBrightness {
    type Error = Error;
    fn try_from(i: [f64; 4]) -> Result<Self> {
        Self::new(i)
    }
}

impl From<LevelBrightness> for [f64; 4] {
    fn from(b: LevelBrightness) -> Self {
        b.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotatingFrameModel {
    pub h_rot: Mat4,
    pub init: InitialPolarization,
    pub brightness: LevelBrightness,
    /// Dephasing time in microseconds; `f64::INFINITY` disables damping.
    pub t2_star: f64,
}

impl RotatingFrameModel {
    pub fn new(
        h_rot: Mat4,
        init: InitialPolarization,
        brightness: LevelBrightness,
        t2_star: f64,
    ) -> Result<Self> {
        check_hermitian(&h_rot)?;
        if !(t2_star > 0.0) {
            return Err(Error::invalid("t2_star", "must be > 0"));
        }
        Ok(Self {
            h_rot,
            init,
            brightness,
            t2_star,
        })
    }

    pub fn driven(
        spin: &SpinQuartetParams,
        drive: &DriveParams,
        init: InitialPolarization,
        brightness: LevelBrightness,
        t2_star: f64,
    ) -> Result<Self> {
        Self::new(rotating_frame_hamiltonian(spin, drive), init, brightness, t2_star)
    }
}

fn check_hermitian(h: &Mat4) -> Result<()> {
    let defect = hermitian_defect(h);
    if !(defect <= 1e-9) {
        return Err(Error::NotHermitian { defect });
    }
    Ok(())
}

/// RWA Hamiltonian in the frame rotating at the drive frequency, MHz.
pub fn rotating_frame_hamiltonian(spin: &SpinQuartetParams, drive: &DriveParams) -> Mat4 {
    let s = spin_matrices();
    let eps = level_energies(spin);
    let mut h = (s.sx * C64::new(drive.phase.cos(), 0.0) + s.sy * C64::new(drive.phase.sin(), 0.0))
        * C64::new(drive.omega / 2.0, 0.0);
    for k in 0..4 {
        h[(k, k)] = C64::new(eps[k] - M_VALUES[k] * drive.f, 0.0);
    }
    h
}

/// Eigendecomposition of a rotating-frame Hamiltonian, reusable for any number of times.
#[derive(Debug, Clone)]
pub struct Propagator {
    /// Eigenvalues alpha_l in MHz.
    pub values: [f64; 4],
    /// Unitary with eigenvectors as columns, V[m, l] = <u_m|v_l>.
    pub vectors: Mat4,
}

impl Propagator {
    pub fn new(h: &Mat4) -> Result<Self> {
        check_hermitian(h)?;
        let (vals, vecs) = eigh4(h);
        Ok(Self {
            values: [vals[0], vals[1], vals[2], vals[3]],
            vectors: vecs,
        })
    }

    /// U(t) = exp(-i 2 pi H t), t in microseconds.
    pub fn unitary(&self, t: f64) -> Mat4 {
        let v = &self.vectors;
        let phases = self.values.map(|a| C64::from_polar(1.0, -TWO_PI * a * t));
        let mut u = Mat4::zeros();
        for m in 0..4 {
            for k in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..4 {
                    acc += phases[l] * v[(m, l)] * v[(k, l)].conj();
                }
                u[(m, k)] = acc;
            }
        }
        u
    }

    /// `p[m][k]`: probability of finding level m at time t after starting in level k.
    pub fn transfer_matrix(&self, t: f64) -> [[f64; 4]; 4] {
        let u = self.unitary(t);
        let mut p = [[0.0; 4]; 4];
        for (m, row) in p.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = u[(m, k)].norm_sqr();
            }
        }
        p
    }

    /// Long-time average of the transfer matrix. Eigenvalues closer than `1e-9` MHz are
    /// treated as degenerate so the average does not depend on the eigenbasis chosen inside
    /// a degenerate subspace.
    pub fn averaged_transfer_matrix(&self) -> [[f64; 4]; 4] {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|a, b| self.values[*a].total_cmp(&self.values[*b]));
        for l in order {
            match groups.last_mut() {
                Some(g) if (self.values[l] - self.values[*g.last().unwrap()]).abs() < 1e-9 => {
                    g.push(l)
                }
                _ => groups.push(vec![l]),
            }
        }
        let v = &self.vectors;
        let mut p = [[0.0; 4]; 4];
        for (m, row) in p.iter_mut().enumerate() {
            for (k, x) in row.iter_mut().enumerate() {
                *x = groups
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|&l| v[(m, l)] * v[(k, l)].conj())
                            .sum::<C64>()
                            .norm_sqr()
                    })
                    .sum();
            }
        }
        p
    }
}

/// Populations rho_mk(t) of all four levels after starting in level `k`.
pub fn propagate_populations(h_rot: &Mat4, k: usize, t: f64) -> Result<[f64; 4]> {
    if k >= 4 {
        return Err(Error::invalid("k", "level index must be < 4"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be finite and >= 0"));
    }
    let p = Propagator::new(h_rot)?.transfer_matrix(t);
    Ok([p[0][k], p[1][k], p[2][k], p[3][k]])
}

fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("t_grid", "times must be finite and >= 0"));
    }
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("t_grid", "times must be sorted"));
    }
    Ok(())
}

fn weighted(p: &[[f64; 4]; 4], init: &[f64; 4], bright: &[f64; 4]) -> f64 {
    let mut acc = 0.0;
    for m in 0..4 {
        for k in 0..4 {
            acc += bright[m] * init[k] * p[m][k];
        }
    }
    acc
}

/// I(t) = sum_{m,k} I_m P_k rho_mk(t), with the deviation from the incoherent long-time average
/// damped by exp(-t/T2*).
pub fn pl_trace(model: &RotatingFrameModel, t_grid: &[f64]) -> Result<Vec<f64>> {
    check_time_grid(t_grid)?;
    let prop = Propagator::new(&model.h_rot)?;
    let init = model.init.probabilities();
    let bright = model.brightness.weights();
    let background = weighted(&prop.averaged_transfer_matrix(), &init, &bright);
    Ok(t_grid
        .iter()
        .map(|&t| {
            let coherent = weighted(&prop.transfer_matrix(t), &init, &bright);
            let damping = if model.t2_star.is_finite() {
                (-t / model.t2_star).exp()
            } else {
                1.0
            };
            background + (coherent - background) * damping
        })
        .collect())
}

/// Photoluminescence versus drive frequency (rows) and pulse length (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct RabiMap {
    pub f_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

#[allow(clippy::too_many_arguments)]
pub fn rabi_map(
    spin: &SpinQuartetParams,
    omega: f64,
    f_grid: &[f64],
    t_grid: &[f64],
    init: InitialPolarization,
    brightness: LevelBrightness,
    t2_star: f64,
) -> Result<RabiMap> {
    if f_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::invalid("grid", "frequency and time grids must be nonempty"));
    }
    if f_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("f_grid", "frequencies must be sorted"));
    }
    check_time_grid(t_grid)?;
    let rows = f_grid
        .par_iter()
        .map(|&f| {
            let drive = DriveParams::new(omega, f)?;
            let model = RotatingFrameModel::driven(spin, &drive, init, brightness, t2_star)?;
            pl_trace(&model, t_grid)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RabiMap {
        f_grid: f_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        rows,
    })
}
