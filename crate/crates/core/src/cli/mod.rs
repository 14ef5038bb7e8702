//! Command-line front end: argument parsing, config resolution, sweep execution and output.
//!
//! Every subcommand writes a CSV table (to `--out`, or stdout) and, with `--out`, a JSON
//! sidecar `<out>.json` holding the resolved parameters. Exit status is 0 on success, 1 for
//! domain errors and 2 for usage or configuration errors.

pub mod config;
pub mod table;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use serde_json::{json, Value};

use self::config::*;
use self::table::Table;
use crate::error::Error;
use crate::optics::spectrum::synthetic_v1_spectrum;
use crate::optics::{debye_waller, odmr_spectrum, polar_intensity_curve, Spectrum};
use crate::pulse::builders::{hahn_sequence, ramsey_sequence, xy8_sequence};
use crate::pulse::{fit_decay, simulate_sequence, snr_ratio, PulseCalibration, PulseMode};
use crate::rabi::rabi_map;
use crate::spectral::{extract_dominant_rabi_frequency, rabi_fft};
use crate::spin::transition_frequencies;
use crate::thermal::lindblad::FourLevelOpticalModel;
use crate::thermal::{calibrate_crossover, phonon_coupling_curve, pjt_energy, temperature_sweep};

#[derive(Debug, Parser)]
#[command(name = "vsisim", version, about = "Spin-3/2 silicon-vacancy simulator")]
pub struct Cli {
    /// JSON configuration file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Noise seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Photoluminescence vs pulse length and drive frequency
    RabiMap,
    /// FFT of the Rabi map along pulse length
    RabiFft,
    /// Synthetic ODMR spectrum
    Odmr,
    /// Pulse-sequence signal vs sweep value
    PulseSim,
    /// V1 / V1' line intensities vs temperature
    TempModel,
    /// Pseudo-Jahn-Teller energies
    Pjt,
    /// Normalized electron-phonon coupling vs temperature
    PhononCurve,
    /// Polarization weights and analyzer polar curve
    Polarization,
    /// Debye-Waller factors of a spectrum
    Dwf,
    /// Fit a decay model to (t, y) data
    FitDecay,
    /// SNR gain of a contrast-C ODMR measurement
    Snr {
        #[arg(long)]
        contrast: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::RabiMap => "rabi-map",
            Command::RabiFft => "rabi-fft",
            Command::Odmr => "odmr",
            Command::PulseSim => "pulse-sim",
            Command::TempModel => "temp-model",
            Command::Pjt => "pjt",
            Command::PhononCurve => "phonon-curve",
            Command::Polarization => "polarization",
            Command::Dwf => "dwf",
            Command::FitDecay => "fit-decay",
            Command::Snr { .. } => "snr",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Result of one subcommand before it is written out.
pub struct Output {
    pub table: Table,
    pub parameters: Value,
    pub summary: Value,
    /// Printed to stdout instead of the table when no `--out` is given.
    pub message: Option<String>,
}

fn output<P: Serialize>(table: Table, params: &P, summary: Value) -> Output {
    Output {
        table,
        parameters: serde_json::to_value(params).expect("configs serialize"),
        summary,
        message: None,
    }
}

fn grid_label(x: f64) -> String {
    table::format_number(x)
}

fn rabi_map_cmd(cfg: &RabiMapConfig) -> Result<Output, CliError> {
    let map = rabi_map(
        &cfg.spin,
        cfg.omega,
        &cfg.f_grid.points(),
        &cfg.t_grid.points(),
        cfg.init,
        cfg.brightness,
        cfg.t2_star,
    )?;
    let mut header = vec!["time (us)".to_string()];
    header.extend(map.f_grid.iter().map(|f| format!("{} (MHz)", grid_label(*f))));
    let mut t = Table::new(header);
    for (k, time) in map.t_grid.iter().enumerate() {
        let mut row = vec![*time];
        row.extend(map.rows.iter().map(|r| r[k]));
        t.push(row);
    }
    let lv = transition_frequencies(&cfg.spin);
    Ok(output(t, cfg, json!({ "transitions_mhz": lv.frequencies() })))
}

fn rabi_fft_cmd(cfg: &RabiMapConfig) -> Result<Output, CliError> {
    let t_grid = cfg.t_grid.points();
    let map = rabi_map(&cfg.spin, cfg.omega, &cfg.f_grid.points(), &t_grid, cfg.init, cfg.brightness, cfg.t2_star)?;
    let spec = rabi_fft(&map, cfg.t_grid.step())?;
    let mut header = vec!["rabi frequency (MHz)".to_string()];
    header.extend(map.f_grid.iter().map(|f| format!("{} (MHz)", grid_label(*f))));
    let mut t = Table::new(header);
    for (k, fr) in spec.freqs.iter().enumerate() {
        let mut row = vec![*fr];
        row.extend(spec.rows.iter().map(|r| r[k]));
        t.push(row);
    }
    let dominant: Vec<Value> = map
        .rows
        .iter()
        .map(|r| match extract_dominant_rabi_frequency(r, cfg.t_grid.step()) {
            Ok(f) => json!(f),
            Err(_) => Value::Null,
        })
        .collect();
    Ok(output(t, cfg, json!({ "dominant_rabi_mhz": dominant })))
}

fn odmr_cmd(cfg: &OdmrConfig) -> Result<Output, CliError> {
    let lv = transition_frequencies(&cfg.spin);
    let f = cfg.f_grid.points();
    let s = odmr_spectrum(&lv, cfg.amplitudes, cfg.linewidth, &f)?;
    let mut t = Table::new(["frequency (MHz)", "relative signal"]);
    for (x, y) in f.iter().zip(&s) {
        t.push(vec![*x, *y]);
    }
    Ok(output(t, cfg, json!({ "transitions_mhz": lv.frequencies() })))
}

fn pulse_sim_cmd(cfg: &PulseSimConfig, seed: u64) -> Result<Output, CliError> {
    let mut cfg = cfg.clone();
    cfg.noise.seed = seed;
    let spin = cfg.setup.spin;
    let cal = match cfg.mode {
        PulseMode::Calibrated => PulseCalibration::calibrated(&spin, cfg.amplitude, cfg.transition)?,
        PulseMode::Ideal => PulseCalibration::ideal(&spin, cfg.amplitude, cfg.transition),
    }
    .detuned(cfg.detuning);
    let (seq, label) = match (&cfg.sequence, cfg.experiment) {
        (Some(seq), _) => (seq.clone(), "sweep (us)"),
        (None, Experiment::Ramsey) => (ramsey_sequence(&cal)?, "tau (us)"),
        (None, Experiment::Hahn) => (hahn_sequence(&cal)?, "tau (us; echo decay exp(-2 tau/T2))"),
        (None, Experiment::Xy8) => (xy8_sequence(&cal, cfg.repetitions)?, "tau (us; free evolution 8 N tau)"),
    };
    let taus = cfg.tau_grid.points();
    let signal = simulate_sequence(&seq, &cfg.setup, &cfg.noise, &taus, cfg.mode)?;
    let mut t = Table::new([label, "signal"]);
    for (x, y) in taus.iter().zip(&signal) {
        t.push(vec![*x, *y]);
    }
    Ok(output(t, &cfg, json!({ "pulses": cal })))
}

fn temp_model_cmd(cfg: &TempModelConfig) -> Result<Output, CliError> {
    let mut model: FourLevelOpticalModel = cfg.model;
    if let Some(peak) = cfg.calibrate_peak {
        model.gamma_d0 = calibrate_crossover(&model, peak)?;
    }
    let sweep = temperature_sweep(&model, &cfg.t_grid.points())?;
    let mut t = Table::new(["T (K)", "I_V1 (arb.)", "I_V1prime (arb.)", "ratio V1prime/V1"]);
    for s in &sweep {
        t.push(vec![s.t_kelvin, s.i_v1, s.i_v1prime, s.ratio()]);
    }
    Ok(output(t, cfg, json!({ "gamma_d0": model.gamma_d0 })))
}

fn pjt_cmd(cfg: &PjtConfig) -> Result<Output, CliError> {
    let mut t = Table::new(["G", "K", "delta", "epsilon0", "q0", "q_min", "e_jt", "stable"]);
    let mut records = Vec::new();
    for p in &cfg.params {
        let e = pjt_energy(p)?;
        t.push(vec![
            p.g_coupling,
            p.k_elastic,
            p.delta,
            e.epsilon0,
            e.q0,
            e.q_min,
            e.e_jt,
            f64::from(u8::from(e.stable)),
        ]);
        records.push(e);
    }
    Ok(output(t, cfg, json!({ "records": records })))
}

fn phonon_cmd(cfg: &PhononCurveConfig) -> Result<Output, CliError> {
    let grid = cfg.t_grid.points();
    let g = phonon_coupling_curve(&cfg.phonon, &grid)?;
    let mut t = Table::new(["T (K)", "g2 (normalized)"]);
    for (x, y) in grid.iter().zip(&g) {
        t.push(vec![*x, *y]);
    }
    Ok(output(t, cfg, json!({ "analytic_peak_k": cfg.phonon.peak_temperature() })))
}

fn polarization_cmd(cfg: &PolarizationConfig) -> Result<Output, CliError> {
    let preset = cfg.resolve_preset().map_err(CliError::Config)?;
    let w = preset.weights()?;
    let theta = cfg.theta_grid.points();
    let curve = polar_intensity_curve(w.ratio(), &theta)?;
    let label = if cfg.half_wave_plate_axis {
        "half-wave plate angle (deg)"
    } else {
        "analyzer angle (deg)"
    };
    let scale = if cfg.half_wave_plate_axis { 0.5 } else { 1.0 };
    let mut t = Table::new([label, "normalized intensity"]);
    for (x, y) in theta.iter().zip(&curve) {
        t.push(vec![x * scale, *y]);
    }
    let (p, q) = w.reduced();
    Ok(output(
        t,
        cfg,
        json!({
            "preset": preset.name,
            "parallel": w.parallel.to_string(),
            "perpendicular": w.perpendicular.to_string(),
            "reduced": [p, q],
        }),
    ))
}

fn dwf_cmd(cfg: &DwfConfig) -> Result<Output, CliError> {
    let spec = match &cfg.spectrum {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("spectrum: {path}: {e}")))?;
            Spectrum::from_csv(&text)?
        }
        None => synthetic_v1_spectrum(50)?.0,
    };
    let mut t = Table::new(["zpl windows", "zpl integral", "psb integral", "dwf"]);
    let psb = spec.integrate(cfg.psb_window)?;
    for k in 1..=cfg.zpl_windows.len() {
        let used = &cfg.zpl_windows[..k];
        let d = debye_waller(&spec, used, cfg.psb_window)?;
        let zpl = used.iter().map(|w| spec.integrate(*w)).sum::<crate::Result<f64>>()?;
        t.push(vec![k as f64, zpl, psb, d]);
    }
    Ok(output(t, cfg, Value::Null))
}

/// Two numeric columns (t, y); lines that do not start with two numbers, such as a header,
/// are skipped.
fn read_xy(path: &str) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("input: {path}: {e}")))?;
    let (mut t, mut y) = (Vec::new(), Vec::new());
    for line in text.lines() {
        let mut cols = line.split(',').map(|v| v.trim().parse::<f64>());
        if let (Some(Ok(a)), Some(Ok(b))) = (cols.next(), cols.next()) {
            t.push(a);
            y.push(b);
        }
    }
    if t.is_empty() {
        return Err(CliError::Config(format!("input: {path}: no numeric (t, y) rows")));
    }
    Ok((t, y))
}

fn fit_decay_cmd(cfg: &FitDecayConfig, seed: u64) -> Result<Output, CliError> {
    let (t, y) = match &cfg.input {
        Some(path) => read_xy(path)?,
        None => {
            let t = cfg.synthetic_grid.points();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let noise = Normal::new(0.0, cfg.synthetic_noise).map_err(|e| CliError::Config(e.to_string()))?;
            let y = t
                .iter()
                .map(|x| cfg.model.eval(&cfg.synthetic_params, *x) + noise.sample(&mut rng))
                .collect();
            (t, y)
        }
    };
    let r = fit_decay(&t, &y, cfg.model)?;
    if r.degenerate {
        return Err(CliError::Domain("data are constant: no decay to fit".into()));
    }
    let mut table = Table::new(["row (0 value, 1 std error)"].into_iter().chain(cfg.model.parameter_names().iter().copied()));
    let mut v = vec![0.0];
    v.extend(&r.params);
    table.push(v);
    let mut e = vec![1.0];
    e.extend(&r.std_errors);
    table.push(e);
    Ok(output(table, cfg, json!({ "ssr": r.ssr, "iterations": r.iterations, "seed": seed })))
}

fn snr_cmd(cfg: &SnrConfig) -> Result<Output, CliError> {
    let r = snr_ratio(cfg.contrast)?;
    let mut t = Table::new(["contrast", "snr ratio"]);
    t.push(vec![cfg.contrast, r]);
    let mut out = output(t, cfg, Value::Null);
    out.message = Some(format!("{r:.6}\n"));
    Ok(out)
}

/// Runs `command` with the configuration text (if any) and flag overrides.
pub fn execute(command: &Command, config_text: Option<&str>, seed: Option<u64>, jobs: Option<usize>) -> Result<(Output, RunOptions), CliError> {
    let (map, mut opts) = split_document(config_text).map_err(CliError::Config)?;
    if let Some(s) = seed {
        opts.seed = s;
    }
    if let Some(j) = jobs {
        opts.jobs = j;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("jobs: {e}")))?;
    let seed = opts.seed;
    let out = pool.install(|| -> Result<Output, CliError> {
        let cfg_err = CliError::Config;
        match command {
            Command::RabiMap => rabi_map_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::RabiFft => rabi_fft_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::Odmr => odmr_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::PulseSim => pulse_sim_cmd(&parse_section(map).map_err(cfg_err)?, seed),
            Command::TempModel => temp_model_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::Pjt => pjt_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::PhononCurve => phonon_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::Polarization => polarization_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::Dwf => dwf_cmd(&parse_section(map).map_err(cfg_err)?),
            Command::FitDecay => fit_decay_cmd(&parse_section(map).map_err(cfg_err)?, seed),
            Command::Snr { contrast } => {
                let mut cfg: SnrConfig = parse_section(map).map_err(cfg_err)?;
                if let Some(c) = contrast {
                    cfg.contrast = *c;
                }
                snr_cmd(&cfg)
            }
        }
    })?;
    Ok((out, opts))
}

fn sidecar(command: &Command, seed: u64, out: &Output) -> String {
    let doc = json!({
        "subcommand": command.name(),
        "seed": seed,
        "parameters": out.parameters,
        "summary": out.summary,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("json serializes");
    s.push('\n');
    s
}

/// Parses arguments, runs, writes outputs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vsisim {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(p) => Some(
            std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("config {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let (out, opts) = execute(&cli.command, text.as_deref(), cli.seed, cli.jobs)?;
    let csv = out.table.to_csv()?;
    let path = cli.out.clone().or(opts.out.map(PathBuf::from));
    match path {
        Some(p) => {
            let write = |p: &PathBuf, s: &str| {
                std::fs::write(p, s).map_err(|e| CliError::Domain(format!("writing {}: {e}", p.display())))
            };
            write(&p, &csv)?;
            let mut side = p.clone().into_os_string();
            side.push(".json");
            write(&PathBuf::from(side), &sidecar(&cli.command, opts.seed, &out))?;
            if let Some(m) = &out.message {
                print!("{m}");
            }
        }
        None => match &out.message {
            Some(m) => print!("{m}"),
            None => print!("{csv}"),
        },
    }
    Ok(())
}
