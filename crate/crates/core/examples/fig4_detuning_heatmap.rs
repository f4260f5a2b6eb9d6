//! Fidelity at the ideal transfer time over (Δ_C, Δ_NV) and over (Δ, λ).

use hybridmem::experiments::{run_detuning_heatmap, Axis, Reduction, RunOptions, SweepScenario, SweepSpec};
use hybridmem::model::SystemConfig;

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn main() -> hybridmem::Result<()> {
    let cfg = SystemConfig::ideal(100.0, 1.0, 1.0);
    let opts = RunOptions::default();
    let detunings = SweepSpec {
        scenario: SweepScenario::Resonant,
        axes: vec![
            Axis::new("delta_c", axis(-2.0, 2.0, 41)),
            Axis::new("delta_nv", axis(-2.0, 2.0, 41)),
        ],
        reduction: Reduction::AtNominalTransferTime,
    };
    let grid = run_detuning_heatmap(&cfg, &detunings, &opts)?;
    let (i, j, f) = grid.argmax();
    println!(
        "(Δ_C, Δ_NV) grid {:?}: max F = {f:.9} at ({}, {})",
        grid.shape(),
        detunings.axes[0].values[i],
        detunings.axes[1].values[j]
    );

    let mismatch = SweepSpec {
        axes: vec![
            Axis::new("delta", axis(-2.0, 2.0, 9)),
            Axis::new("mismatch", axis(-0.8, 0.8, 9)),
        ],
        ..detunings
    };
    let grid = run_detuning_heatmap(&cfg, &mismatch, &opts)?;
    for (row, d) in grid.grid.iter().zip(&mismatch.axes[0].values) {
        let cells: Vec<String> = row.iter().map(|f| format!("{f:.3}")).collect();
        println!("Δ = {d:5.2}: {}", cells.join(" "));
    }
    Ok(())
}
