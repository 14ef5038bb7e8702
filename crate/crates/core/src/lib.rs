//! Simulation and analysis toolkit for spin-3/2 silicon-vacancy (V1/V1') defect centers in SiC.
//!
//! The crate is organised by physical subsystem:
//!
//! * [`spin`]: static S=3/2 Hamiltonian, energy levels and RF transition frequencies.
//! * [`rabi`]: rotating-frame propagation, photoluminescence traces, detuned Rabi maps.
//! * [`spectral`]: FFT helpers for Rabi maps and dominant-frequency extraction.
//! * [`pulse`]: pulse sequences, pi-pulse calibration, Ramsey/Hahn/XY-8, filter functions,
//!   decay fitting and the ODMR SNR formula.
//! * [`thermal`]: four-level optical Lindblad model of the V1/V1' crossover, pseudo-Jahn-Teller
//!   energetics and the phonon-coupling curve.
//! * [`optics`]: double-group selection rules, polarization ratios, ODMR spectra and
//!   Debye-Waller factors.
//! * [`cli`]: configuration loading and table emission behind the `vsisim` binary.
//!
//! Units: frequencies and energies of the spin system are linear frequencies in MHz, times are
//! in microseconds. Factors of 2π only appear inside propagators.

pub mod cli;
pub mod error;
pub mod linalg;
pub mod optics;
pub mod pulse;
pub mod rabi;
pub mod spectral;
pub mod spin;
pub mod thermal;

pub use error::{Error, Result};
