//! Four-level optical model of the V1/V1' excited-state mixing.
//!
//! Basis (|g1>, |g2>, |e+>, |e->), energies and rates in units of lambda (half the 4.4 meV
//! dressed-state splitting):
//!
//! ```text
//! H  = E+ |g1><e+| + E- |g2><e-| + h.c. + lambda (|e+><e+| - |e-><e-|)
//! L1 = |g1><e+|            rate gamma1
//! L2 = |g2><e-|            rate gamma2
//! L3 = |e+><e-| + |e-><e+| rate gamma_d(T) = gamma_d0 (T / t_ref)^alpha
//! ```
//!
//! Density matrices are vectorized column by column, `vec(rho)[i + 4 j] = rho[i, j]`, so
//! `vec(A rho B) = (B^T kron A) vec(rho)`.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, Mat4, C64, ZERO};

pub type Liouvillian = SMatrix<C64, 16, 16>;
type Vec16 = SVector<C64, 16>;
pub type DensityMatrix4 = Mat4;

pub const G1: usize = 0;
pub const G2: usize = 1;
pub const E_PLUS: usize = 2;
pub const E_MINUS: usize = 3;

/// lambda = 2.2 meV / hbar in rad/ns.
pub const LAMBDA_PER_NS: f64 = 2.2e-3 / 6.582_119_569e-16 * 1e-9;
/// Radiative lifetime of the |e+> channel, ns.
pub const TAU1_NS: f64 = 5.6;
/// Radiative lifetime of the |e-> channel, ns.
pub const TAU2_NS: f64 = 5.5;
pub const ALPHA_DEFAULT: f64 = 1.57;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FourLevelOpticalModel {
    pub drive_plus: f64,
    pub drive_minus: f64,
    pub lambda: f64,
    /// Decay rate of |e+> -> |g1>, units of lambda.
    pub gamma1: f64,
    /// Decay rate of |e-> -> |g2>, units of lambda.
    pub gamma2: f64,
    pub gamma_d0: f64,
    pub alpha: f64,
    /// Kelvin.
    pub t_ref: f64,
}

impl Default for FourLevelOpticalModel {
    fn default() -> Self {
        Self {
            drive_plus: 1e-3,
            drive_minus: 1e-3,
            lambda: 1.0,
            gamma1: rate_from_lifetime_ns(TAU1_NS),
            gamma2: rate_from_lifetime_ns(TAU2_NS),
            // puts the V1' maximum near 70 K; `calibrate_crossover` refines it
            gamma_d0: 2.5e-3,
            alpha: ALPHA_DEFAULT,
            t_ref: 1.0,
        }
    }
}

/// A decay rate 1/tau expressed in units of lambda.
pub fn rate_from_lifetime_ns(tau_ns: f64) -> f64 {
    1.0 / (tau_ns * LAMBDA_PER_NS)
}

impl FourLevelOpticalModel {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.drive_plus,
            self.drive_minus,
            self.lambda,
            self.gamma1,
            self.gamma2,
            self.gamma_d0,
            self.alpha,
            self.t_ref,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("optical model", "parameters must be finite"));
        }
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(Error::invalid("gamma1/gamma2", "decay rates must be > 0"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha", "must be > 0"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::invalid("lambda", "must be > 0"));
        }
        if !(self.gamma_d0 >= 0.0) {
            return Err(Error::invalid("gamma_d0", "must be >= 0"));
        }
        if !(self.t_ref > 0.0) {
            return Err(Error::invalid("t_ref", "must be > 0"));
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Mat4 {
        let mut h = Mat4::zeros();
        h[(G1, E_PLUS)] = C64::new(self.drive_plus, 0.0);
        h[(E_PLUS, G1)] = C64::new(self.drive_plus, 0.0);
        h[(G2, E_MINUS)] = C64::new(self.drive_minus, 0.0);
        h[(E_MINUS, G2)] = C64::new(self.drive_minus, 0.0);
        h[(E_PLUS, E_PLUS)] = C64::new(self.lambda, 0.0);
        h[(E_MINUS, E_MINUS)] = C64::new(-self.lambda, 0.0);
        h
    }
}

/// gamma_d0 (T / t_ref)^alpha.
pub fn dephasing_rate(model: &FourLevelOpticalModel, t_kelvin: f64) -> Result<f64> {
    if !(t_kelvin >= 0.0 && t_kelvin.is_finite()) {
        return Err(Error::invalid("T", "temperature must be finite and >= 0"));
    }
    if t_kelvin == 0.0 {
        return Ok(0.0);
    }
    Ok(model.gamma_d0 * (t_kelvin / model.t_ref).powf(model.alpha))
}

fn kron(a: &Mat4, b: &Mat4) -> Liouvillian {
    let mut out = Liouvillian::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

fn ket_bra(i: usize, j: usize) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// Liouvillian for Hamiltonian `h` and jump operators with rates.
pub fn lindblad_generator(h: &Mat4, jumps: &[(f64, Mat4)]) -> Liouvillian {
    let id = Mat4::identity();
    let mi = C64::new(0.0, -1.0);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * mi;
    for (rate, op) in jumps {
        if *rate == 0.0 {
            continue;
        }
        let ld = op.adjoint() * op;
        let term = kron(&op.conjugate(), op)
            - kron(&id, &ld) * C64::new(0.5, 0.0)
            - kron(&ld.transpose(), &id) * C64::new(0.5, 0.0);
        l += term * C64::new(*rate, 0.0);
    }
    l
}

pub fn jump_operators(model: &FourLevelOpticalModel, gamma_d: f64) -> Vec<(f64, Mat4)> {
    vec![
        (model.gamma1, ket_bra(G1, E_PLUS)),
        (model.gamma2, ket_bra(G2, E_MINUS)),
        (gamma_d, ket_bra(E_PLUS, E_MINUS) + ket_bra(E_MINUS, E_PLUS)),
    ]
}

pub fn liouvillian(model: &FourLevelOpticalModel, t_kelvin: f64) -> Result<Liouvillian> {
    model.validate()?;
    let gd = dephasing_rate(model, t_kelvin)?;
    Ok(liouvillian_at_rate(model, gd))
}

/// Liouvillian with the dephasing rate given directly.
pub fn liouvillian_at_rate(model: &FourLevelOpticalModel, gamma_d: f64) -> Liouvillian {
    lindblad_generator(&model.hamiltonian(), &jump_operators(model, gamma_d))
}

pub fn vectorize(rho: &Mat4) -> Vec16 {
    Vec16::from_iterator(rho.iter().copied())
}

pub fn unvectorize(v: &Vec16) -> Mat4 {
    Mat4::from_iterator(v.iter().copied())
}

/// Trace deviation, Hermiticity defect and most negative eigenvalue of a density matrix.
pub fn density_defects(rho: &Mat4) -> (f64, f64, f64) {
    let tr = (0..4).map(|k| rho[(k, k)]).sum::<C64>();
    let herm = hermitian_defect(rho);
    let sym = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let min_eig = crate::linalg::eigh4(&sym).0.min();
    ((tr - C64::new(1.0, 0.0)).norm(), herm, min_eig)
}

fn check_initial(rho: &Mat4) -> Result<()> {
    let (tr, herm, min_eig) = density_defects(rho);
    if tr > 1e-9 || herm > 1e-9 || min_eig < -1e-9 {
        return Err(Error::invalid(
            "rho0",
            format!("not a density matrix (trace error {tr:.1e}, hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e})"),
        ));
    }
    Ok(())
}

/// One classical RK4 step of the linear system, P = sum_{k<=4} (hL)^k / k!.
fn rk4_propagator(l: &Liouvillian, h: f64) -> Liouvillian {
    let hl = l * C64::new(h, 0.0);
    let mut term = Liouvillian::identity();
    let mut p = Liouvillian::identity();
    for k in 1..=4 {
        term = term * hl * C64::new(1.0 / k as f64, 0.0);
        p += term;
    }
    p
}

/// Removes rounding drift from a propagator so that tr(M rho) = tr(rho) holds for every rho.
/// Without this the error of the trace functional doubles with every squaring.
fn restore_trace_preservation(m: &mut Liouvillian) {
    const DIAG: [usize; 4] = [0, 5, 10, 15];
    for j in 0..16 {
        let want = if DIAG.contains(&j) { 1.0 } else { 0.0 };
        let s: C64 = DIAG.iter().map(|&k| m[(k, j)]).sum();
        let fix = (C64::new(want, 0.0) - s) * 0.25;
        for &k in &DIAG {
            m[(k, j)] += fix;
        }
    }
}

fn matrix_power(m: &Liouvillian, mut n: u64) -> Liouvillian {
    let mut result = Liouvillian::identity();
    let mut base = *m;
    restore_trace_preservation(&mut base);
    while n > 0 {
        if n & 1 == 1 {
            result *= base;
            restore_trace_preservation(&mut result);
        }
        base = base * base;
        restore_trace_preservation(&mut base);
        n >>= 1;
    }
    result
}

fn propagate_interval(l: &Liouvillian, h_max: f64, dt: f64, v: &Vec16) -> Vec16 {
    if dt == 0.0 {
        return *v;
    }
    let n = (dt / h_max).ceil().max(1.0) as u64;
    let p = rk4_propagator(l, dt / n as f64);
    matrix_power(&p, n) * v
}

/// Fixed-step RK4 trajectory of the master equation at temperature `t_kelvin`, sampled on
/// `t_grid` (units of 1/lambda, sorted, starting at or after 0).
///
/// The step starts at 0.1/||L|| and is halved until halving it again changes every entry of
/// every sampled state by less than 1e-8.
pub fn evolve_master(
    model: &FourLevelOpticalModel,
    t_kelvin: f64,
    rho0: &Mat4,
    t_grid: &[f64],
) -> Result<Vec<Mat4>> {
    let l = liouvillian(model, t_kelvin)?;
    evolve_with(&l, rho0, t_grid)
}

pub fn evolve_with(l: &Liouvillian, rho0: &Mat4, t_grid: &[f64]) -> Result<Vec<Mat4>> {
    check_initial(rho0)?;
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("t_grid", "times must be finite, >= 0 and sorted"));
    }
    let norm = l.iter().map(|z| z.norm()).fold(0.0, f64::max) * 16.0;
    let v0 = vectorize(rho0);
    let run = |h: f64| -> Vec<Vec16> {
        let mut v = v0;
        let mut t = 0.0;
        t_grid
            .iter()
            .map(|&tk| {
                v = propagate_interval(l, h, tk - t, &v);
                t = tk;
                v
            })
            .collect()
    };
    let mut h = if norm > 0.0 { 0.1 / norm } else { f64::INFINITY };
    let mut coarse = run(h);
    let mut accepted = None;
    for _ in 0..40 {
        if !h.is_finite() {
            accepted = Some(coarse.clone());
            break;
        }
        let fine = run(0.5 * h);
        let diff = coarse
            .iter()
            .zip(&fine)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max);
        if fine.iter().flat_map(|v| v.iter()).any(|z| !z.is_finite() || z.norm() > 10.0) {
            return Err(Error::IntegrationFailure("state entry exceeded 10 in magnitude".into()));
        }
        if diff < 1e-8 {
            accepted = Some(fine);
            break;
        }
        h *= 0.5;
        coarse = fine;
    }
    let states = accepted.ok_or_else(|| Error::IntegrationFailure("step control did not converge".into()))?;
    states
        .iter()
        .map(|v| {
            let rho = unvectorize(v);
            let (tr, herm, _) = density_defects(&rho);
            if tr > 1e-6 || herm > 1e-6 {
                Err(Error::IntegrationFailure(format!(
                    "trace error {tr:.2e}, hermiticity defect {herm:.2e}"
                )))
            } else {
                Ok(rho)
            }
        })
        .collect()
}

struct KernelSplit {
    /// Right null vectors as columns.
    right: DMatrix<C64>,
    /// Left null vectors as columns.
    left: DMatrix<C64>,
}

fn kernel(l: &Liouvillian) -> KernelSplit {
    let dm = DMatrix::from_iterator(16, 16, l.iter().copied());
    let svd = dm.svd(true, true);
    let smax = svd.singular_values.max();
    let idx: Vec<usize> = (0..16)
        .filter(|&k| svd.singular_values[k] <= 1e-13 * smax)
        .collect();
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let right = DMatrix::from_fn(16, idx.len(), |r, c| v_t[(idx[c], r)].conj());
    let left = DMatrix::from_fn(16, idx.len(), |r, c| u[(r, idx[c])]);
    KernelSplit { right, left }
}

fn finish_state(v: &DVector<C64>) -> Mat4 {
    let mut rho = Mat4::from_iterator(v.iter().copied());
    rho = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = (0..4).map(|k| rho[(k, k)].re).sum::<f64>();
    rho / C64::new(tr, 0.0)
}

/// Unique solution of L(rho) = 0 with trace 1.
pub fn steady_state(model: &FourLevelOpticalModel, t_kelvin: f64) -> Result<Mat4> {
    steady_state_of(&liouvillian(model, t_kelvin)?)
}

pub fn steady_state_of(l: &Liouvillian) -> Result<Mat4> {
    let k = kernel(l);
    let dim = k.right.ncols();
    if dim > 1 {
        return Err(Error::NonUniqueSteadyState { dimension: dim });
    }
    // bordered system [L; tr] x = [0; 1]
    let mut a = DMatrix::<C64>::zeros(17, 16);
    for r in 0..16 {
        for c in 0..16 {
            a[(r, c)] = l[(r, c)];
        }
    }
    for d in 0..4 {
        a[(16, d * 5)] = C64::new(1.0, 0.0);
    }
    let mut b = DVector::<C64>::zeros(17);
    b[16] = C64::new(1.0, 0.0);
    let x = a
        .svd(true, true)
        .solve(&b, 0.0)
        .map_err(|e| Error::IntegrationFailure(e.to_string()))?;
    Ok(finish_state(&x))
}

/// Infinite-time limit of the trajectory starting at `rho0`, valid also when the stationary
/// state is not unique: the projection R (W^H R)^-1 W^H vec(rho0) onto the kernel along the
/// conserved quantities.
pub fn stationary_limit(l: &Liouvillian, rho0: &Mat4) -> Result<Mat4> {
    check_initial(rho0)?;
    let k = kernel(l);
    if k.right.ncols() == 0 {
        return Err(Error::IntegrationFailure("generator has no stationary state".into()));
    }
    let g = k.left.adjoint() * &k.right;
    let g_inv = g
        .try_inverse()
        .ok_or_else(|| Error::IntegrationFailure("singular kernel projection".into()))?;
    let v0 = DVector::from_iterator(16, rho0.iter().copied());
    let x = &k.right * (g_inv * (k.left.adjoint() * v0));
    Ok(finish_state(&x))
}

/// Emission of the two zero-phonon lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineIntensities {
    pub t_kelvin: f64,
    /// gamma2 * rho_{e- e-}
    pub i_v1: f64,
    /// gamma1 * rho_{e+ e+}
    pub i_v1prime: f64,
}

impl LineIntensities {
    pub fn ratio(&self) -> f64 {
        self.i_v1prime / self.i_v1
    }
}

/// Ground-state mixture used when the stationary state is not unique (no dephasing).
pub fn balanced_ground_state() -> Mat4 {
    let mut rho = Mat4::zeros();
    rho[(G1, G1)] = C64::new(0.5, 0.0);
    rho[(G2, G2)] = C64::new(0.5, 0.0);
    rho
}

/// Line intensities in the stationary state. Without dephasing the two channels decouple and
/// the limit reached from equal ground populations is used.
pub fn line_intensities(model: &FourLevelOpticalModel, t_kelvin: f64) -> Result<LineIntensities> {
    let l = liouvillian(model, t_kelvin)?;
    let rho = match steady_state_of(&l) {
        Ok(rho) => rho,
        Err(Error::NonUniqueSteadyState { .. }) => stationary_limit(&l, &balanced_ground_state())?,
        Err(e) => return Err(e),
    };
    Ok(LineIntensities {
        t_kelvin,
        i_v1: model.gamma2 * rho[(E_MINUS, E_MINUS)].re.max(0.0),
        i_v1prime: model.gamma1 * rho[(E_PLUS, E_PLUS)].re.max(0.0),
    })
}

/// Line intensities on a temperature grid, evaluated in parallel and returned in grid order.
pub fn temperature_sweep(model: &FourLevelOpticalModel, t_grid: &[f64]) -> Result<Vec<LineIntensities>> {
    model.validate()?;
    t_grid.par_iter().map(|&t| line_intensities(model, t)).collect()
}

/// Temperatures 1..=300 K in 1 K steps.
pub fn kelvin_grid() -> Vec<f64> {
    (1..=300).map(f64::from).collect()
}

fn peak_temperature(model: &FourLevelOpticalModel, grid: &[f64]) -> Result<f64> {
    let sweep = temperature_sweep(model, grid)?;
    let best = sweep
        .iter()
        .max_by(|a, b| a.i_v1prime.total_cmp(&b.i_v1prime))
        .expect("non-empty grid");
    Ok(best.t_kelvin)
}

/// gamma_d0 for which the V1' line peaks at `t_peak_target` on the 1 K grid over 1..300 K.
/// Bisection on log gamma_d0; the peak temperature falls as gamma_d0 grows.
pub fn calibrate_crossover(model: &FourLevelOpticalModel, t_peak_target: f64) -> Result<f64> {
    model.validate()?;
    let grid = kelvin_grid();
    if !(t_peak_target > grid[0] && t_peak_target < grid[grid.len() - 1]) {
        return Err(Error::CalibrationFailure(format!(
            "target {t_peak_target} K outside the interior of 1..300 K"
        )));
    }
    let peak_at = |log_g: f64| {
        let m = FourLevelOpticalModel {
            gamma_d0: log_g.exp(),
            ..*model
        };
        peak_temperature(&m, &grid)
    };
    let (mut lo, mut hi) = ((1e-12_f64).ln(), (1e3_f64).ln());
    let (p_lo, p_hi) = (peak_at(lo)?, peak_at(hi)?);
    if !(p_lo > t_peak_target && p_hi < t_peak_target) {
        return Err(Error::CalibrationFailure(format!(
            "no interior maximum bracketing {t_peak_target} K (peaks {p_lo} K and {p_hi} K)"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = peak_at(mid)?;
        if (p - t_peak_target).abs() < 0.5 {
            return Ok(mid.exp());
        }
        if p > t_peak_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::CalibrationFailure("bisection did not converge".into()))
}
