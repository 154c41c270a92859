//! Complexity of a stable oscillator against the sampling interval. The
//! curve saturates at the rate of the stationary distribution.

use sysrate::cli::Preset;
use sysrate::complexity::logspace;
use sysrate::{complexity_ceiling, rate_curve};

fn main() -> sysrate::Result<()> {
    let model = Preset::Stable.model();
    let d = 0.01;
    let curve = rate_curve(&model, d, &logspace(1e-2, 1e2, 13))?;
    let ceiling = complexity_ceiling(&model, d)?;

    println!("{:>10} {:>10} {:>12}", "dt", "fs", "bits/symbol");
    for s in &curve.samples {
        let bar = "#".repeat((s.rate_bits * 5.0).round() as usize);
        println!("{:>10.4} {:>10.4} {:>12.5}  {bar}", s.dt, s.fs, s.rate_bits);
    }
    println!("ceiling {:.5} bits (water level {:.4})", ceiling.rate_bits, ceiling.water_level);
    Ok(())
}
