//! Train on 50 noisy oscillator trials, then emulate new trials with the
//! 24-field planar grid and compare per-step increment statistics.
//!
//! Try `cargo run --release --example emulation -- 1` and `-- 100` to see how
//! the emulator's increment covariance depends on the resolution N.

use sysrate::cli::Preset;
use sysrate::emulation::{average_codes, emulate_path, initial_mean};
use sysrate::stats::{discrepancy, step_moments};
use sysrate::{LinearSystemModel, Matrix, SourceFamily, TrajectoryDataset};

fn main() -> sysrate::Result<()> {
    let resolution: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    let model = LinearSystemModel::constant(Preset::Stable.drift(), Matrix::identity(2).scale(0.01))?;
    let training = model.sample_paths(&[1.0, 1.0], 0.01, 300, 50, 7)?;

    let family = SourceFamily::planar_grid(2);
    let codes = average_codes(&training, &family)?;
    let x0 = initial_mean(&training);
    let paths = (0..50)
        .map(|p| emulate_path(&codes, &family, &x0, resolution, 7, p))
        .collect::<sysrate::Result<Vec<_>>>()?;
    let emulated = TrajectoryDataset::new(0.01, paths)?;

    let (train, emu) = (step_moments(&training), step_moments(&emulated));
    let d: Vec<_> = train.iter().zip(&emu).map(|(a, b)| discrepancy(a, b)).collect();
    let frac = |f: &dyn Fn(&sysrate::stats::Discrepancy) -> bool| d.iter().filter(|x| f(x)).count() as f64 / d.len() as f64;
    println!("N = {resolution}, infeasible increments: {}", codes.infeasible);
    println!("steps with mean within 3 SE:       {:.1}%", 100.0 * frac(&|x| x.mean_z <= 3.0));
    println!("steps with covariance within 3 SE: {:.1}%", 100.0 * frac(&|x| x.cov_z <= 3.0));

    let ratio: f64 = train.iter().zip(&emu).map(|(a, b)| b.cov.trace() / a.cov.trace()).sum::<f64>() / d.len() as f64;
    println!("mean emulated/training increment variance: {ratio:.3}");
    for k in [0, 100, 200, 299] {
        println!("  step {k:>3}: training mean {:.5?}, emulated {:.5?}", train[k].mean, emu[k].mean);
    }
    Ok(())
}
