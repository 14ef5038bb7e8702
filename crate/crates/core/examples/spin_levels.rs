//! Level energies and RF transition frequencies of the spin quartet, at the default 6 mT and
//! across a field sweep.

use vsi_sim::spin::{level_energies, transition_frequencies, SpinQuartetParams, Transition};

fn main() -> vsi_sim::Result<()> {
    let spin = SpinQuartetParams::default();
    let lv = transition_frequencies(&spin);
    println!("gamma = {} MHz/mT, D = {} MHz, B0 = {} mT", spin.gamma, spin.d, spin.b0);
    for (m, e) in ["+3/2", "+1/2", "-1/2", "-3/2"].iter().zip(level_energies(&spin)) {
        println!("  m = {m:>4}: {e:>9.3} MHz");
    }
    for t in [Transition::F1, Transition::F2, Transition::F3] {
        let (a, b) = t.levels();
        println!("  {t:?} (levels {a}-{b}): {:.3} MHz, Rabi factor {:.4}", lv.frequency(t), t.isolated_rabi_frequency(1.0));
    }

    println!("\n  B0 (mT)      f1       f2       f3");
    for b0 in [0.5, 1.0, 2.0, 4.0, 6.0, 10.0, 20.0] {
        let lv = transition_frequencies(&SpinQuartetParams::new(spin.gamma, spin.d, b0)?);
        println!("  {b0:>6.1} {:>8.2} {:>8.2} {:>8.2}", lv.f1, lv.f2, lv.f3);
    }
    Ok(())
}
