//! How often must a channel of 8 bits per symbol sample each preset?

use sysrate::cli::Preset;
use sysrate::{min_sampling_rate, SamplingRequirement};

fn main() -> sysrate::Result<()> {
    let d = 0.01;
    for capacity in [4.0, 8.0, 12.0] {
        println!("capacity {capacity} bits");
        for preset in Preset::ALL {
            match min_sampling_rate(&preset.model(), d, capacity)? {
                SamplingRequirement::MinRate { fs, dt } => {
                    println!("  {:<9} fs >= {fs:.6} Hz (dt <= {dt:.4})", preset.name())
                }
                SamplingRequirement::NotNeeded { ceiling_bits, .. } => println!(
                    "  {:<9} any rate works, ceiling {:.4} bits",
                    preset.name(),
                    ceiling_bits.unwrap_or(0.0)
                ),
            }
        }
    }
    Ok(())
}
