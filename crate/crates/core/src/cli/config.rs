//! Run configuration: JSON files whose top level may carry `seed`, `jobs` and `out`, with every
//! other key belonging to the chosen subcommand. Unknown keys are rejected.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::optics::spectrum::Window;
use crate::optics::SelectionPreset;
use crate::pulse::noise::DEFAULT_SEED;
use crate::pulse::{NoiseModel, PulseMode, PulseSequence, SpinSetup};
use crate::rabi::{InitialPolarization, LevelBrightness, RABI_T2_STAR_US};
use crate::spin::{SpinQuartetParams, Transition};
use crate::thermal::{FourLevelOpticalModel, PhononParams, PjtParams};

/// `count` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, count: usize) -> Self {
        Self { start, stop, count }
    }

    pub fn validate(&self, name: &str) -> Result<(), String> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(format!("{name}: start and stop must be finite"));
        }
        if self.count < 1 {
            return Err(format!("{name}: count must be >= 1"));
        }
        if self.start > self.stop {
            return Err(format!("{name}: start must not exceed stop"));
        }
        if self.count == 1 && self.start != self.stop {
            return Err(format!("{name}: a single-point grid needs start == stop"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * step).collect()
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.stop - self.start) / (self.count - 1) as f64
        }
    }
}

pub trait Validate {
    fn validate(&self) -> Result<(), String>;
}

fn positive(name: &str, v: f64) -> Result<(), String> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name}: must be > 0"))
    }
}

fn lib(r: crate::Result<()>) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiMapConfig {
    pub spin: SpinQuartetParams,
    /// Omega, MHz.
    pub omega: f64,
    pub f_grid: Grid,
    /// Microseconds.
    pub t_grid: Grid,
    /// Microseconds.
    pub t2_star: f64,
    pub init: InitialPolarization,
    pub brightness: LevelBrightness,
}

impl Default for RabiMapConfig {
    fn default() -> Self {
        Self {
            spin: SpinQuartetParams::default(),
            omega: 7.0,
            f_grid: Grid::new(160.0, 190.0, 121),
            t_grid: Grid::new(0.0, 2.0, 401),
            t2_star: RABI_T2_STAR_US,
            init: InitialPolarization::default(),
            brightness: LevelBrightness::default(),
        }
    }
}

impl Validate for RabiMapConfig {
    fn validate(&self) -> Result<(), String> {
        lib(self.spin.validate())?;
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err("omega: must be >= 0".into());
        }
        self.f_grid.validate("f_grid")?;
        self.t_grid.validate("t_grid")?;
        if self.t_grid.start < 0.0 {
            return Err("t_grid: times must be >= 0".into());
        }
        positive("t2_star", self.t2_star)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdmrConfig {
    pub spin: SpinQuartetParams,
    /// Signed relative amplitudes of the f1, f2, f3 lines.
    pub amplitudes: [f64; 3],
    /// Full width at half maximum, MHz.
    pub linewidth: f64,
    pub f_grid: Grid,
}

impl Default for OdmrConfig {
    fn default() -> Self {
        Self {
            spin: SpinQuartetParams::default(),
            amplitudes: [-5e-4; 3],
            linewidth: 10.0,
            f_grid: Grid::new(140.0, 200.0, 601),
        }
    }
}

impl Validate for OdmrConfig {
    fn validate(&self) -> Result<(), String> {
        lib(self.spin.validate())?;
        positive("linewidth", self.linewidth)?;
        if self.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err("amplitudes: must be finite".into());
        }
        self.f_grid.validate("f_grid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Ramsey,
    Hahn,
    Xy8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSimConfig {
    pub setup: SpinSetup,
    pub noise: NoiseModel,
    /// Standard experiment, used when `sequence` is absent.
    pub experiment: Experiment,
    /// Explicit segment list; overrides `experiment`.
    pub sequence: Option<PulseSequence>,
    /// Omega of the standard experiment's pulses, MHz.
    pub amplitude: f64,
    pub transition: Transition,
    pub mode: PulseMode,
    /// Carrier offset from the transition, MHz.
    pub detuning: f64,
    /// XY-8 block count.
    pub repetitions: usize,
    /// Sweep values, us.
    pub tau_grid: Grid,
}

impl Default for PulseSimConfig {
    fn default() -> Self {
        Self {
            setup: SpinSetup::default(),
            noise: NoiseModel {
                sigma_detuning: NoiseModel::sigma_for_t2_star(1.3),
                t2_homogeneous: Some(83.9),
                ensemble_size: 200,
                ..NoiseModel::noiseless()
            },
            experiment: Experiment::Ramsey,
            sequence: None,
            amplitude: 0.5,
            transition: Transition::F1,
            mode: PulseMode::Calibrated,
            detuning: 0.0,
            repetitions: 1,
            tau_grid: Grid::new(0.0, 4.0, 81),
        }
    }
}

impl Validate for PulseSimConfig {
    fn validate(&self) -> Result<(), String> {
        lib(self.setup.spin.validate())?;
        lib(self.noise.validate())?;
        if let Some(seq) = &self.sequence {
            lib(seq.validate())?;
        }
        positive("amplitude", self.amplitude)?;
        if !self.detuning.is_finite() {
            return Err("detuning: must be finite".into());
        }
        if self.repetitions == 0 {
            return Err("repetitions: must be >= 1".into());
        }
        self.tau_grid.validate("tau_grid")?;
        if self.tau_grid.start < 0.0 {
            return Err("tau_grid: values must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TempModelConfig {
    pub model: FourLevelOpticalModel,
    /// Kelvin.
    pub t_grid: Grid,
    /// When set, gamma_d0 is recalibrated so the V1' line peaks here (K).
    pub calibrate_peak: Option<f64>,
}

impl Default for TempModelConfig {
    fn default() -> Self {
        Self {
            model: FourLevelOpticalModel::default(),
            t_grid: Grid::new(0.0, 300.0, 301),
            calibrate_peak: Some(70.0),
        }
    }
}

impl Validate for TempModelConfig {
    fn validate(&self) -> Result<(), String> {
        lib(self.model.validate())?;
        self.t_grid.validate("t_grid")?;
        if self.t_grid.start < 0.0 {
            return Err("t_grid: temperatures must be >= 0".into());
        }
        if let Some(t) = self.calibrate_peak {
            positive("calibrate_peak", t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PjtConfig {
    pub params: Vec<PjtParams>,
}

impl Default for PjtConfig {
    fn default() -> Self {
        Self {
            params: [0.0, 0.5, 1.0, 1.5, 2.0, 2.5]
                .into_iter()
                .map(|delta| PjtParams {
                    g_coupling: 1.0,
                    k_elastic: 1.0,
                    delta,
                })
                .collect(),
        }
    }
}

impl Validate for PjtConfig {
    fn validate(&self) -> Result<(), String> {
        self.params.iter().try_for_each(|p| lib(p.validate()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhononCurveConfig {
    pub phonon: PhononParams,
    /// Kelvin.
    pub t_grid: Grid,
}

impl Default for PhononCurveConfig {
    fn default() -> Self {
        Self {
            phonon: PhononParams::default(),
            t_grid: Grid::new(0.0, 300.0, 301),
        }
    }
}

impl Validate for PhononCurveConfig {
    fn validate(&self) -> Result<(), String> {
        lib(self.phonon.validate())?;
        self.t_grid.validate("t_grid")?;
        if self.t_grid.start < 0.0 {
            return Err("t_grid: temperatures must be >= 0".into());
        }
        Ok(())
    }
}

/// Bundled preset by name, or an inline preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PresetChoice {
    Named(String),
    Inline(SelectionPreset),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolarizationConfig {
    pub preset: PresetChoice,
    /// Analyzer angles from the c-axis, degrees.
    pub theta_grid: Grid,
    /// Report the axis as half-wave-plate angle (analyzer angle / 2).
    pub half_wave_plate_axis: bool,
}

impl Default for PolarizationConfig {
    fn default() -> Self {
        Self {
            preset: PresetChoice::Named("v1".into()),
            theta_grid: Grid::new(0.0, 360.0, 361),
            half_wave_plate_axis: false,
        }
    }
}

impl PolarizationConfig {
    pub fn resolve_preset(&self) -> Result<SelectionPreset, String> {
        match &self.preset {
            PresetChoice::Named(n) => {
                SelectionPreset::bundled(n).ok_or_else(|| format!("preset: unknown bundled preset {n:?} (v1, v1_prime)"))
            }
            PresetChoice::Inline(p) => Ok(p.clone()),
        }
    }
}

impl Validate for PolarizationConfig {
    fn validate(&self) -> Result<(), String> {
        self.resolve_preset()?;
        self.theta_grid.validate("theta_grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DwfConfig {
    /// Two-column CSV (nm, intensity); the built-in synthetic spectrum when absent.
    pub spectrum: Option<String>,
    /// ZPL windows; row k of the output uses the first k windows.
    pub zpl_windows: Vec<Window>,
    pub psb_window: Window,
}

impl Default for DwfConfig {
    fn default() -> Self {
        Self {
            spectrum: None,
            zpl_windows: vec![Window::new(859.5, 862.5), Window::new(856.5, 859.5)],
            psb_window: Window::new(865.0, 970.0),
        }
    }
}

impl Validate for DwfConfig {
    fn validate(&self) -> Result<(), String> {
        if self.zpl_windows.is_empty() {
            return Err("zpl_windows: at least one window required".into());
        }
        for w in self.zpl_windows.iter().chain([&self.psb_window]) {
            if !(w.lo < w.hi) {
                return Err("zpl_windows/psb_window: windows need lo < hi".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitDecayConfig {
    /// Two-column CSV (t, y); a seeded synthetic decay when absent.
    pub input: Option<String>,
    pub model: crate::pulse::DecayModel,
    /// Generating parameters of the synthetic data, in the model's parameter order.
    pub synthetic_params: Vec<f64>,
    pub synthetic_grid: Grid,
    /// Standard deviation of additive Gaussian noise on the synthetic data.
    pub synthetic_noise: f64,
}

impl Default for FitDecayConfig {
    fn default() -> Self {
        Self {
            input: None,
            model: crate::pulse::DecayModel::Exponential,
            synthetic_params: vec![2.0, 83.9, 0.1],
            synthetic_grid: Grid::new(0.0, 400.0, 81),
            synthetic_noise: 0.01,
        }
    }
}

impl Validate for FitDecayConfig {
    fn validate(&self) -> Result<(), String> {
        if self.input.is_none() {
            let want = self.model.parameter_names().len();
            if self.synthetic_params.len() != want {
                return Err(format!("synthetic_params: {:?} needs {want} values", self.model));
            }
            self.synthetic_grid.validate("synthetic_grid")?;
            if !(self.synthetic_noise >= 0.0 && self.synthetic_noise.is_finite()) {
                return Err("synthetic_noise: must be >= 0".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnrConfig {
    pub contrast: f64,
}

impl Default for SnrConfig {
    fn default() -> Self {
        Self { contrast: 0.5 }
    }
}

impl Validate for SnrConfig {
    fn validate(&self) -> Result<(), String> {
        if !self.contrast.is_finite() {
            return Err("contrast: must be finite".into());
        }
        Ok(())
    }
}

/// Options shared by all subcommands.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<String>,
}

/// Splits the shared top-level keys off a config document.
pub fn split_document(text: Option<&str>) -> Result<(Map<String, Value>, RunOptions), String> {
    let mut map = match text {
        None => Map::new(),
        Some(t) if t.trim().is_empty() => Map::new(),
        Some(t) => match serde_json::from_str::<Value>(t).map_err(|e| format!("config parse error: {e}"))? {
            Value::Object(m) => m,
            _ => return Err("config parse error: top level must be an object".into()),
        },
    };
    let mut opts = RunOptions {
        seed: DEFAULT_SEED,
        jobs: 0,
        out: None,
    };
    if let Some(v) = map.remove("seed") {
        opts.seed = v.as_u64().ok_or("seed: must be an unsigned 64-bit integer")?;
    }
    if let Some(v) = map.remove("jobs") {
        opts.jobs = v.as_u64().ok_or("jobs: must be a nonnegative integer")? as usize;
    }
    if let Some(v) = map.remove("out") {
        opts.out = Some(v.as_str().ok_or("out: must be a string")?.to_string());
    }
    Ok((map, opts))
}

/// Deserializes and validates one subcommand's section.
pub fn parse_section<T: DeserializeOwned + Validate>(map: Map<String, Value>) -> Result<T, String> {
    let cfg: T = serde_json::from_value(Value::Object(map)).map_err(|e| format!("config error: {e}"))?;
    cfg.validate().map_err(|e| format!("config error: {e}"))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rabi_config_gets_defaults() {
        let (map, opts) = split_document(Some("{}")).unwrap();
        let cfg: RabiMapConfig = parse_section(map).unwrap();
        assert_eq!(cfg, RabiMapConfig::default());
        assert_eq!(cfg.f_grid.start, 160.0);
        assert_eq!(cfg.f_grid.stop, 190.0);
        assert_eq!(opts.seed, DEFAULT_SEED);
    }

    #[test]
    fn negative_linewidth_names_key() {
        let (map, _) = split_document(Some(r#"{"linewidth": -1}"#)).unwrap();
        let err = parse_section::<OdmrConfig>(map).unwrap_err();
        assert!(err.contains("linewidth"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let (map, _) = split_document(Some(r#"{"omegaa": 3}"#)).unwrap();
        let err = parse_section::<RabiMapConfig>(map).unwrap_err();
        assert!(err.contains("omegaa"), "{err}");
    }

    #[test]
    fn parse_error_has_position() {
        let err = split_document(Some("{\n  \"seed\": ,\n}")).unwrap_err();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn shared_keys() {
        let (map, opts) = split_document(Some(r#"{"seed": 9, "jobs": 3, "out": "x.csv", "omega": 2}"#)).unwrap();
        assert_eq!(opts.seed, 9);
        assert_eq!(opts.jobs, 3);
        assert_eq!(opts.out.as_deref(), Some("x.csv"));
        assert_eq!(map.len(), 1);
    }

    #[test]
    fn grid_points() {
        assert_eq!(Grid::new(0.0, 1.0, 3).points(), vec![0.0, 0.5, 1.0]);
        assert_eq!(Grid::new(2.0, 2.0, 1).points(), vec![2.0]);
        assert!(Grid::new(1.0, 0.0, 3).validate("g").is_err());
        assert!(Grid::new(0.0, 1.0, 0).validate("g").is_err());
    }
}
