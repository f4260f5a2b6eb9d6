//! Rabi frequencies of the control line on qubit C and on the ensemble.

use std::f64::consts::PI;

use hybridmem::model::{rabi_frequency_nve, rabi_frequency_qubit, DriveParams, DEFAULT_G_FACTOR};

fn main() {
    let mut p = DriveParams {
        i_ext: 700e-9,
        d_c: 1.2e-6,
        d_n: 8e-6,
        loop_side: 2e-6,
        persistent_current: 60e-9,
        drive_frequency: None,
        omega_c_override: None,
    };
    let mhz = |w: f64| w / (2.0 * PI * 1e6);
    println!("Ω_C/2π  = {:.2} MHz", mhz(rabi_frequency_qubit(&p)));
    for d_um in [2.0, 4.0, 8.0, 16.0, 1e4] {
        p.d_n = d_um * 1e-6;
        println!(
            "d_N = {d_um:>7} μm: Ω_NV/2π = {:.4} MHz",
            mhz(rabi_frequency_nve(&p, 1e6, DEFAULT_G_FACTOR))
        );
    }
}
