//! Exact-discretization sample paths and their CSV form.
//!
//! Pass a path to keep the CSV, e.g. `cargo run --example sample_paths -- out.csv`.

use sysrate::cli::Preset;
use sysrate::stats::pooled_increment_covariance;
use sysrate::Matrix;

fn main() -> sysrate::Result<()> {
    let model = sysrate::LinearSystemModel::constant(Preset::Stable.drift(), Matrix::identity(2).scale(0.01))?;
    let ds = model.sample_paths(&[1.0, 1.0], 0.01, 300, 50, 42)?;
    println!("{} trials x {} steps, dim {}", ds.trials(), ds.steps(), ds.dim());

    let last: Vec<f64> = (0..2).map(|i| ds.states().iter().map(|t| t[300][i]).sum::<f64>() / 50.0).collect();
    println!("mean state at t = 3: {last:.4?}");
    println!("pooled increment covariance {:?}", pooled_increment_covariance(&ds).to_rows());
    println!("exact increment covariance  {:?}", model.gramian(0.0, 0.01)?.to_rows());

    if let Some(path) = std::env::args().nth(1) {
        ds.write_csv(&path)?;
        println!("wrote {path}");
    } else {
        print!("{}", ds.to_csv().lines().take(4).collect::<Vec<_>>().join("\n"));
        println!("\n...");
    }
    Ok(())
}
