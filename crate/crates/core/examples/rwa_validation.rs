//! Full laboratory Hamiltonian against its rotating-wave form at
//! g = J_t = 0.01ω.

use hybridmem::experiments::{run_rwa_validation, RunOptions};
use hybridmem::model::SystemConfig;

fn main() -> hybridmem::Result<()> {
    for ratio in [0.1, 0.03, 0.01, 0.003] {
        let cfg = SystemConfig::ideal(1.0 / ratio, 1.0, 1.0);
        let cmp = run_rwa_validation(&cfg, &RunOptions::default())?;
        println!(
            "g/ω = {ratio:6.3}: max |F_lab − F_rwa| = {:.3e}",
            cmp.max_abs_diff
        );
    }
    Ok(())
}
