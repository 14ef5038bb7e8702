//! Exit criteria. Each criterion prints one `[PASS]`/`[FAIL]` line; the process exits with
//! status 1 when any fails.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vsi_sim::linalg::{C64, Mat4};
use vsi_sim::optics::spectrum::synthetic_v1_spectrum;
use vsi_sim::optics::{allowed_polarizations, debye_waller, odmr_spectrum, Allowed, SelectionPreset, SymmetryLabel};
use vsi_sim::pulse::filter::{hahn_positions, xy8_positions, FilterFunction};
use vsi_sim::pulse::{
    fit_decay, hahn_trace, pi_pulse_regime_states, ramsey_trace, snr_ratio, xy8_trace, DecayModel, NoiseModel,
    Psd, PulseCalibration, SpinSetup,
};
use vsi_sim::rabi::{
    rabi_map, rotating_frame_hamiltonian, DriveParams, InitialPolarization, LevelBrightness, Propagator,
};
use vsi_sim::spectral::{extract_dominant_rabi_frequency, rabi_fft};
use vsi_sim::spin::{transition_frequencies, SpinQuartetParams, Transition};
use vsi_sim::thermal::lindblad::{
    balanced_ground_state, density_defects, evolve_with, kelvin_grid, liouvillian, E_MINUS, E_PLUS, G1, G2,
};
use vsi_sim::thermal::phonon::{BOHR_RADIUS, SOUND_VELOCITY};
use vsi_sim::thermal::pjt::curvature_at_origin;
use vsi_sim::thermal::{
    calibrate_crossover, phonon_coupling_curve, pjt_energy, pjt_potential_minimize, temperature_sweep,
    FourLevelOpticalModel, PhononParams, PjtParams,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(limit) = limit {
        if took > limit {
            o.pass = false;
        }
        o.detail = format!("{}; {:.2} s (limit {} s)", o.detail, took.as_secs_f64(), limit.as_secs());
    } else {
        o.detail = format!("{}; {:.2} s", o.detail, took.as_secs_f64());
    }
    o
}

fn default_spin() -> SpinQuartetParams {
    SpinQuartetParams::new(28.0, 2.0, 6.0).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn transition_frequencies_and_odmr() -> Outcome {
    let spin = default_spin();
    let lv = transition_frequencies(&spin);
    let exact = lv.frequencies() == [164.0, 168.0, 172.0];
    let grid = linspace(140.0, 200.0, 6001);
    let s = odmr_spectrum(&lv, [-5e-4; 3], 10.0, &grid).unwrap();
    let k = (0..s.len()).min_by(|a, b| s[*a].total_cmp(&s[*b])).unwrap();
    let dip = grid[k];
    outcome(
        exact && (dip - 170.0).abs() <= 3.0,
        format!("transitions {:?} MHz, merged dip at {dip:.2} MHz", lv.frequencies()),
    )
}

fn rabi_branches() -> Outcome {
    let spin = default_spin();
    let lv = transition_frequencies(&spin);
    let step = 0.005;
    let t = linspace(0.0, 2.0, 401);
    let init = InitialPolarization::default();
    let bright = LevelBrightness::default();
    let f_grid = linspace(160.0, 190.0, 121);

    // resolved branches: two-level law in the wings of f1 and f3
    let omega = 2.0;
    let map = rabi_map(&spin, omega, &f_grid, &t, init, bright, 0.2).unwrap();
    let spec = rabi_fft(&map, step).unwrap();
    let om_r = Transition::F1.isolated_rabi_frequency(omega);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (i, &f) in map.f_grid.iter().enumerate() {
        let dw = if f <= lv.f1 - 1.0 {
            lv.f1 - f
        } else if f >= lv.f3 + 1.0 {
            f - lv.f3
        } else {
            continue;
        };
        let got = extract_dominant_rabi_frequency(&map.rows[i], step).unwrap();
        let want = (om_r * om_r + dw * dw).sqrt();
        worst = worst.max((got / want - 1.0).abs());
        checked += 1;
        assert!(spec.peak_frequency(i) > 0.0);
    }
    let parabolic = checked > 0 && worst <= 0.05;

    // strongest drive: the central branch oscillates faster than the outer one
    let mut enhancement = 0.0;
    for omega in [7.0, 15.0] {
        let m = rabi_map(&spin, omega, &[lv.f1, lv.f2], &t, init, bright, 0.2).unwrap();
        let a = extract_dominant_rabi_frequency(&m.rows[0], step).unwrap();
        let b = extract_dominant_rabi_frequency(&m.rows[1], step).unwrap();
        enhancement = b / a;
        let _ = rabi_fft(&m, step).unwrap();
    }
    outcome(
        parabolic && enhancement >= 1.2,
        format!(
            "Omega=2 MHz wings: {checked} rows, worst deviation {:.2}%; Omega=15 MHz f2/f1 Rabi ratio {enhancement:.3}",
            100.0 * worst
        ),
    )
}

fn isolated_limits() -> Outcome {
    let spin = SpinQuartetParams::new(28.0, 50.0, 6.0).unwrap();
    let lv = transition_frequencies(&spin);
    let step = 0.01;
    let t = linspace(0.0, 40.0, 4001);
    let omega = 1.0;
    let rate = |f: f64, k: usize, bright: [f64; 4]| {
        let map = rabi_map(
            &spin,
            omega,
            &[f],
            &t,
            InitialPolarization::pure(k),
            LevelBrightness::new(bright).unwrap(),
            1e9,
        )
        .unwrap();
        extract_dominant_rabi_frequency(&map.rows[0], step).unwrap()
    };
    let r1 = rate(lv.f1, 3, [0.0, 0.0, 0.0, 1.0]);
    let r2 = rate(lv.f2, 1, [0.0, 1.0, 0.0, 0.0]);
    let r3 = rate(lv.f3, 0, [1.0, 0.0, 0.0, 0.0]);
    let want = 3f64.sqrt() / 2.0;
    let ratio_ok = ((r1 / r2) / want - 1.0).abs() <= 0.01 && ((r3 / r2) / want - 1.0).abs() <= 0.01;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let drive = DriveParams::new(rng.random_range(0.1..20.0), rng.random_range(100.0..260.0))
            .unwrap()
            .with_phase(rng.random_range(0.0..std::f64::consts::TAU));
        let h = rotating_frame_hamiltonian(&spin, &drive);
        let p = Propagator::new(&h).unwrap();
        let tm = p.transfer_matrix(rng.random_range(0.0..10.0));
        for row in &tm {
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
        }
    }
    outcome(
        ratio_ok && worst <= 1e-9,
        format!(
            "f1/f2 = {:.5}, f3/f2 = {:.5} (want {want:.5}); worst population-sum error {worst:.1e}",
            r1 / r2,
            r3 / r2
        ),
    )
}

fn pulse_regimes() -> Outcome {
    let d = 50.0;
    let spin = SpinQuartetParams::new(28.0, d, 6.0).unwrap();
    let weak = pi_pulse_regime_states(&spin, 0.05 * d).unwrap();
    let weak_pop = weak.from_plus.populations[1].min(weak.from_minus.populations[2]);
    let strong = pi_pulse_regime_states(&spin, 50.0 * d).unwrap();
    let split_err = |p: &[f64; 4], a: usize, b: usize| (p[a] - 0.5).abs().max((p[b] - 0.5).abs());
    let strong_err = split_err(&strong.from_plus.populations, 0, 2).max(split_err(&strong.from_minus.populations, 3, 1));
    let fmt = |p: &[f64; 4]| format!("[{:.3}, {:.3}, {:.3}, {:.3}]", p[0], p[1], p[2], p[3]);
    outcome(
        weak_pop >= 0.99 && strong_err <= 0.05,
        format!(
            "weak drive |+-1/2> population {weak_pop:.4}; strong drive populations {} from |+3/2>, split error {strong_err:.3}",
            fmt(&strong.from_plus.populations)
        ),
    )
}

fn decoherence_round_trips() -> Outcome {
    let spin = default_spin();
    let setup = SpinSetup::default();
    let cal = PulseCalibration::ideal(&spin, 0.5, Transition::F1);
    let mut noise = NoiseModel::noiseless();
    noise.sigma_detuning = NoiseModel::sigma_for_t2_star(1.3);
    noise.ensemble_size = 20_000;

    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |name: &str, got: f64, want: f64| {
        let err = got / want - 1.0;
        pass &= err.abs() <= 0.05;
        lines.push(format!("{name} {got:.3} ({:+.2}%)", 100.0 * err));
    };

    let taus = linspace(0.0, 4.0, 81);
    let y = ramsey_trace(&setup, &cal, &noise, &taus).unwrap();
    check("T2*", fit_decay(&taus, &y, DecayModel::Gaussian).unwrap().time_constant(), 1.3);

    noise.ensemble_size = 200;
    noise.t2_homogeneous = Some(83.9);
    let taus = linspace(0.0, 200.0, 81);
    let y = hahn_trace(&setup, &cal, &noise, &taus).unwrap();
    let free: Vec<f64> = taus.iter().map(|t| 2.0 * t).collect();
    check("T2(Hahn)", fit_decay(&free, &y, DecayModel::Exponential).unwrap().time_constant(), 83.9);

    for (n, t2) in [(10usize, 286.0), (50, 600.0)] {
        noise.t2_homogeneous = Some(t2);
        let span = 8.0 * n as f64;
        let taus = linspace(0.0, 3.0 * t2 / span, 61);
        let y = xy8_trace(&setup, &cal, &noise, &taus, n).unwrap();
        let free: Vec<f64> = taus.iter().map(|t| span * t).collect();
        check(
            &format!("T2(XY8-{n})"),
            fit_decay(&free, &y, DecayModel::Exponential).unwrap().time_constant(),
            t2,
        );
    }

    let psd = Psd::Lorentzian {
        amplitude: 1e-3,
        cutoff: 0.01,
    };
    let t2 = |pos: Vec<f64>| FilterFunction::new(&pos).coherence_time(&psd).unwrap();
    let hahn = t2(hahn_positions());
    let n10 = t2(xy8_positions(10));
    let n50 = t2(xy8_positions(50));
    let ordered = n50 > n10 && n10 > hahn;
    lines.push(format!("filter T2: Hahn {hahn:.1}, XY8-10 {n10:.1}, XY8-50 {n50:.1}"));
    outcome(pass && ordered, lines.join(", "))
}

fn thermal_crossover() -> Outcome {
    let base = FourLevelOpticalModel::default();
    let g0 = calibrate_crossover(&base, 70.0).unwrap();
    let model = FourLevelOpticalModel { gamma_d0: g0, ..base };
    let grid = kelvin_grid();
    let sweep = temperature_sweep(&model, &grid).unwrap();
    let peak = sweep.iter().max_by(|a, b| a.i_v1prime.total_cmp(&b.i_v1prime)).unwrap();
    let ends = temperature_sweep(&model, &[0.0, 300.0]).unwrap();
    let (low, high) = (ends[0].i_v1prime / peak.i_v1prime, ends[1].i_v1prime / peak.i_v1prime);

    let mut starts = vec![balanced_ground_state()];
    for k in [G1, G2, E_PLUS, E_MINUS] {
        let mut rho = Mat4::zeros();
        rho[(k, k)] = C64::new(1.0, 0.0);
        starts.push(rho);
    }
    let times: Vec<f64> = std::iter::once(0.0).chain((0..=24).map(|k| 10f64.powf(-2.0 + 0.333 * k as f64))).collect();
    let mut worst: f64 = 0.0;
    for t in [0.0, 20.0, 70.0, 150.0, 300.0] {
        let l = liouvillian(&model, t).unwrap();
        for rho0 in &starts {
            for rho in evolve_with(&l, rho0, &times).unwrap() {
                let (tr, herm, min_eig) = density_defects(&rho);
                worst = worst.max(tr).max(herm).max(-min_eig);
            }
        }
    }
    outcome(
        (peak.t_kelvin - 70.0).abs() <= 1.0 && low < 0.5 && high < 0.5 && worst <= 1e-9,
        format!(
            "gamma_d0 {g0:.4e}, peak at {} K, I'(0 K)/peak {low:.4}, I'(300 K)/peak {high:.4}, worst invariant defect {worst:.1e}",
            peak.t_kelvin
        ),
    )
}

fn pjt_and_phonon() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while draws < 200 {
        let g = rng.random_range(0.1..3.0);
        let k = rng.random_range(0.2..5.0);
        let eps0 = g * g / (2.0 * k);
        let p = PjtParams {
            g_coupling: g,
            k_elastic: k,
            delta: rng.random_range(-0.95..0.95) * 4.0 * eps0,
        };
        let e = pjt_energy(&p).unwrap();
        if !e.stable {
            continue;
        }
        let (oracle, _) = pjt_potential_minimize(&p).unwrap();
        worst = worst.max((e.e_jt - oracle).abs());
        draws += 1;
    }

    // softening of the undistorted configuration locates the boundary independently
    let (g, k) = (1.3, 0.7);
    let eps0 = g * g / (2.0 * k);
    let mut boundary_err: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let curv = |d: f64| {
            curvature_at_origin(&PjtParams {
                g_coupling: g,
                k_elastic: k,
                delta: sign * d,
            })
        };
        let (mut lo, mut hi) = (0.5 * eps0, 8.0 * eps0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if curv(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        boundary_err = boundary_err.max((0.5 * (lo + hi) / (4.0 * eps0) - 1.0).abs());
    }

    let ph = PhononParams {
        v_sound: SOUND_VELOCITY,
        r_bohr: BOHR_RADIUS,
    };
    let fine = linspace(1.0, 300.0, 29_901);
    let curve = phonon_coupling_curve(&ph, &fine).unwrap();
    let kmax = (0..curve.len()).max_by(|a, b| curve[*a].total_cmp(&curve[*b])).unwrap();
    let t_peak = fine[kmax];
    outcome(
        worst <= 1e-8 && boundary_err <= 1e-6 && (t_peak - 51.9).abs() <= 0.5,
        format!(
            "E_JT worst |closed form - oracle| {worst:.1e} over {draws} draws; boundary relative error {boundary_err:.1e}; phonon peak {t_peak:.2} K"
        ),
    )
}

fn selection_rules() -> Outcome {
    let v1 = SelectionPreset::v1().weights().unwrap().reduced();
    let v1p = SelectionPreset::v1_prime().weights().unwrap().reduced();
    use SymmetryLabel::*;
    let printed = [
        (EHalfPlus, EHalfPlus, Allowed::BOTH),
        (EHalfPlus, EThreeHalf1, Allowed::XY),
        (EHalfPlus, EThreeHalf2, Allowed::XY),
        (EThreeHalf1, EHalfPlus, Allowed::XY),
        (EThreeHalf1, EThreeHalf1, Allowed::NONE),
        (EThreeHalf1, EThreeHalf2, Allowed::Z),
        (EThreeHalf2, EHalfPlus, Allowed::XY),
        (EThreeHalf2, EThreeHalf1, Allowed::Z),
        (EThreeHalf2, EThreeHalf2, Allowed::NONE),
    ];
    let matched = printed
        .iter()
        .filter(|(a, b, want)| allowed_polarizations(*a, *b) == *want)
        .count();
    outcome(
        v1 == (3, 1) && v1p == (1, 11) && matched == 9,
        format!("V1 {}:{}, V1' {}:{}, table lookups {matched}/9", v1.0, v1.1, v1p.0, v1p.1),
    )
}

fn formulas() -> Outcome {
    let snr = snr_ratio(0.5).unwrap();
    let (spec, [w1, w2, psb]) = synthetic_v1_spectrum(50).unwrap();
    let single = debye_waller(&spec, &[w1], psb).unwrap();
    let both = debye_waller(&spec, &[w1, w2], psb).unwrap();
    outcome(
        snr == std::f64::consts::SQRT_2 && (single - 0.435).abs() <= 1e-3 && (both - 0.480).abs() <= 1e-3,
        format!("snr_ratio(0.5) = {snr:.17}, DWF single {single:.4}, combined {both:.4}"),
    )
}

const SUBCOMMANDS: [&str; 11] = [
    "rabi-map",
    "rabi-fft",
    "odmr",
    "pulse-sim",
    "temp-model",
    "pjt",
    "phonon-curve",
    "polarization",
    "dwf",
    "fit-decay",
    "snr",
];

fn run_cli(dir: &std::path::Path, sub: &str, tag: &str, jobs: &str) -> Option<(Vec<u8>, Vec<u8>)> {
    let out = dir.join(format!("{sub}-{tag}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_vsisim"))
        .args([sub, "--seed", "12345", "--jobs", jobs, "--out"])
        .arg(&out)
        .stdout(std::process::Stdio::null())
        .status()
        .ok()?;
    if !status.success() {
        return None;
    }
    let side = dir.join(format!("{sub}-{tag}.csv.json"));
    Some((std::fs::read(&out).ok()?, std::fs::read(side).ok()?))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    for sub in SUBCOMMANDS {
        let a = run_cli(dir.path(), sub, "a", "1");
        let b = run_cli(dir.path(), sub, "b", "1");
        let c = run_cli(dir.path(), sub, "c", "4");
        if a.is_none() || a != b || a != c {
            bad.push(sub);
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} subcommands byte-identical across runs and --jobs 1/4", SUBCOMMANDS.len())
        } else {
            format!("differing output: {}", bad.join(", "))
        },
    )
}

fn main() {
    let criteria: Vec<(&str, Option<u64>, fn() -> Outcome)> = vec![
        ("transition frequencies and merged ODMR dip", Some(1), transition_frequencies_and_odmr),
        ("Rabi map branch structure", Some(30), rabi_branches),
        ("isolated-transition limits and unitarity", None, isolated_limits),
        ("pi-pulse regimes", None, pulse_regimes),
        ("decoherence round trips and filter ordering", Some(60), decoherence_round_trips),
        ("thermal crossover", None, thermal_crossover),
        ("pseudo-Jahn-Teller and phonon curve", None, pjt_and_phonon),
        ("selection rules", None, selection_rules),
        ("formula checks", None, formulas),
        ("CLI determinism", None, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), f);
        if !o.pass {
            failed += 1;
        }
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
