//! Drive leakage into the ensemble versus control-line distance, proposed
//! three-body circuit against a single qubit–ensemble circuit.

use hybridmem::cli::parse_document;
use hybridmem::experiments::{run_separation_study, Protocol};

fn main() -> hybridmem::Result<()> {
    for (name, text, protocol) in [
        (
            "resonant",
            include_str!("../configs/fig7.json"),
            Protocol::Resonant,
        ),
        (
            "dispersive",
            include_str!("../configs/fig7-dispersive.json"),
            Protocol::Dispersive,
        ),
    ] {
        let doc = parse_document(text, &[])?;
        let r = run_separation_study(
            &doc.config,
            &doc.study.d_n_values,
            doc.study.theta,
            protocol,
            &doc.options,
        )?;
        println!(
            "{name}: θ = {:.4}, Ω_C/2π = {:.1} MHz",
            r.theta,
            doc.config.unit.frequency_out(r.omega_c)
        );
        println!(
            "{:>10} {:>12} {:>10} {:>10}",
            "d_N [μm]", "Ω_NV/2π MHz", "proposed", "single"
        );
        for k in 0..r.d_n.len() {
            println!(
                "{:10.1} {:12.4} {:10.6} {:10.6}",
                r.d_n[k] * 1e6,
                doc.config.unit.frequency_out(r.omega_nv[k]),
                r.proposed[k],
                r.single[k]
            );
        }
    }
    Ok(())
}
