//! Polarization selection rules, polar analyzer curves, ODMR spectra and Debye-Waller factors.

pub mod lineshape;
pub mod selection;
pub mod spectrum;

pub use lineshape::{odmr_spectrum, polar_intensity_curve};
pub use selection::{
    allowed_polarizations, polarization_ratio, Allowed, Pairing, PolarizationWeights, SelectionPreset, Sublevel,
    SymmetryLabel,
};
pub use spectrum::{debye_waller, Spectrum, Window};
