//! Coherence time versus number of refocusing pulses for a low-frequency-dominated noise
//! spectrum, from the filter-function integral.

use vsi_sim::pulse::filter::{hahn_positions, xy8_positions, FilterFunction};
use vsi_sim::pulse::Psd;

fn main() -> vsi_sim::Result<()> {
    let psd = Psd::Lorentzian {
        amplitude: 1e-3,
        cutoff: 0.01,
    };
    let hahn = FilterFunction::new(&hahn_positions()).coherence_time(&psd)?;
    println!("{:>10} {:>8} {:>12}", "sequence", "pulses", "T2 (us)");
    println!("{:>10} {:>8} {:>12.1}", "Hahn", 1, hahn);
    for n in [1, 2, 5, 10, 20, 50] {
        let ff = FilterFunction::new(&xy8_positions(n));
        println!("{:>10} {:>8} {:>12.1}", format!("XY-8x{n}"), ff.pulses(), ff.coherence_time(&psd)?);
    }

    let white = Psd::White { level: 0.01 };
    println!("\nwhite noise: Hahn {:.2} us, XY-8x10 {:.2} us", 
        FilterFunction::new(&hahn_positions()).coherence_time(&white)?,
        FilterFunction::new(&xy8_positions(10)).coherence_time(&white)?);
    Ok(())
}
