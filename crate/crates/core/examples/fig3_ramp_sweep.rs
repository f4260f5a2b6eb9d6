//! Maximum storage fidelity after a linear ω_M ramp, over ramp time and
//! initial detuning, in SI units (g/2π = 35 MHz).

use hybridmem::cli::parse_document;
use hybridmem::experiments::run_ramp_sweep;

fn main() -> hybridmem::Result<()> {
    let doc = parse_document(include_str!("../configs/fig3.json"), &[])?;
    let unit = doc.config.unit;
    let taus_ns = [0.0, 0.1, 0.2, 0.45, 1.0, 2.0];
    let dmax_mhz = [100.0, 350.0, 700.0, 1000.0];
    let taus: Vec<f64> = taus_ns.iter().map(|t| unit.time_in(t * 1e-9)).collect();
    let dmax: Vec<f64> = dmax_mhz.iter().map(|&d| unit.frequency_in(d)).collect();
    let grid = run_ramp_sweep(&doc.config, &taus, &dmax, &doc.options)?;

    print!("{:>8}", "τ [ns]");
    for d in dmax_mhz {
        print!(" {:>10}", format!("{d} MHz"));
    }
    println!();
    for (i, tau) in taus_ns.iter().enumerate() {
        print!("{tau:8.2}");
        for j in 0..dmax_mhz.len() {
            print!(" {:10.6}", grid.get(i, j));
        }
        println!();
    }
    Ok(())
}
