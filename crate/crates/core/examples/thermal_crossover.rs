//! Calibrates the dephasing prefactor so the V1' line peaks at 70 K, then prints the two line
//! intensities across temperature.

use vsi_sim::thermal::lindblad::kelvin_grid;
use vsi_sim::thermal::{calibrate_crossover, temperature_sweep, FourLevelOpticalModel};

fn main() -> vsi_sim::Result<()> {
    let base = FourLevelOpticalModel::default();
    let gamma_d0 = calibrate_crossover(&base, 70.0)?;
    let model = FourLevelOpticalModel { gamma_d0, ..base };
    println!("gamma_d0 = {gamma_d0:.6e} (units of lambda)");

    let mut grid = vec![0.0];
    grid.extend(kelvin_grid());
    let sweep = temperature_sweep(&model, &grid)?;
    let peak = sweep.iter().map(|s| s.i_v1prime).fold(0.0, f64::max);
    println!("{:>6} {:>14} {:>14} {:>10}", "T(K)", "I_V1", "I_V1'", "I_V1'/peak");
    for s in sweep.iter().filter(|s| s.t_kelvin as usize % 10 == 0) {
        println!(
            "{:>6.0} {:>14.6e} {:>14.6e} {:>10.4}  ratio {:.6}",
            s.t_kelvin,
            s.i_v1,
            s.i_v1prime,
            s.i_v1prime / peak,
            s.ratio()
        );
    }
    Ok(())
}
