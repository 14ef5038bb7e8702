//! Optical and vibronic temperature dependence: the four-level Lindblad model of the V1/V1'
//! intensity crossover, pseudo-Jahn-Teller energetics and the phonon-coupling curve.

pub mod lindblad;
pub mod phonon;
pub mod pjt;

pub use lindblad::{
    calibrate_crossover, dephasing_rate, evolve_master, line_intensities, liouvillian, stationary_limit,
    steady_state, temperature_sweep, DensityMatrix4, FourLevelOpticalModel, LineIntensities,
};
pub use phonon::{phonon_coupling_curve, PhononParams};
pub use pjt::{pjt_energy, pjt_potential_minimize, PjtEnergy, PjtParams};
