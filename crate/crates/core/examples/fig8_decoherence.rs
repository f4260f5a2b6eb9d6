//! Storage under qubit decay γ_C = γ_M = Γ, resonant and dispersive
//! (Δ/2π = 350 MHz), from the Lindblad master equation.

use hybridmem::cli::parse_document;
use hybridmem::experiments::{dispersive_config, run_decoherence_study, Protocol};

fn main() -> hybridmem::Result<()> {
    let doc = parse_document(include_str!("../configs/fig8.json"), &[])?;
    let unit = doc.config.unit;
    let gammas: Vec<f64> = doc.study.gammas.iter().map(|&g| unit.frequency_in(g)).collect();
    let dispersive = dispersive_config(&doc.config, unit.frequency_in(350.0));
    for (name, cfg, protocol) in [
        ("resonant", &doc.config, Protocol::Resonant),
        ("dispersive", &dispersive, Protocol::Dispersive),
    ] {
        for run in run_decoherence_study(cfg, &gammas, protocol, &doc.options)? {
            println!(
                "{name:>10} Γ/2π = {:4.1} MHz: peak F = {:.6} at t = {:.3} ns",
                unit.frequency_out(run.gamma),
                run.peak.fidelity,
                unit.time_out(run.peak.t) * 1e9
            );
        }
    }
    Ok(())
}
