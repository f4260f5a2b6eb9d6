//! Dispersive-storage fidelity over detuning Δ and coupling mismatch λ,
//! maximised over [0, 3π/(2Λ)].

use hybridmem::experiments::{
    dispersive_config, run_dispersive_heatmap, Axis, Reduction, RunOptions, SweepScenario, SweepSpec,
};
use hybridmem::model::SystemConfig;

fn main() -> hybridmem::Result<()> {
    let cfg = dispersive_config(&SystemConfig::ideal(100.0, 1.0, 1.0), 10.0);
    let lambdas: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.1).collect();
    let spec = SweepSpec {
        scenario: SweepScenario::Dispersive,
        axes: vec![
            Axis::new("delta", vec![6.0, 8.0, 10.0, 14.0, 20.0]),
            Axis::new("mismatch", lambdas.clone()),
        ],
        reduction: Reduction::MaxOverTime,
    };
    let grid = run_dispersive_heatmap(&cfg, &spec, &RunOptions::default())?;
    let header: Vec<String> = lambdas.iter().map(|l| format!("{l:6.2}")).collect();
    println!("{:>6}  {}", "Δ \\ λ", header.join(" "));
    for (row, d) in grid.grid.iter().zip(&spec.axes[0].values) {
        let cells: Vec<String> = row.iter().map(|f| format!("{f:6.3}")).collect();
        println!("{d:6.1}  {}", cells.join(" "));
    }
    Ok(())
}
