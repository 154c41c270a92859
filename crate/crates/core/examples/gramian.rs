//! Increment law of a scalar Ornstein-Uhlenbeck process, checked against its
//! closed form, and the same machinery on a damped oscillator.
//!
//! ```text
//! cargo run --example gramian
//! ```

use sysrate::{LinearSystemModel, Matrix};

fn main() -> sysrate::Result<()> {
    let ou = LinearSystemModel::constant(Matrix::from_rows(&[vec![-1.0]])?, Matrix::identity(1))?;
    println!("{:>8} {:>14} {:>14}", "dt", "W(dt)", "(1-e^-2dt)/2");
    for dt in [0.01, 0.1, 1.0, 10.0] {
        let w = ou.gramian(0.0, dt)?[(0, 0)];
        println!("{dt:>8} {w:>14.10} {:>14.10}", (1.0 - (-2.0 * dt).exp()) / 2.0);
    }

    let osc = LinearSystemModel::constant(
        Matrix::from_rows(&[vec![-0.5, 1.0], vec![-1.0, -0.5]])?,
        Matrix::identity(2),
    )?;
    let inc = osc.increment_distribution(&[1.0, 1.0], 0.0, 0.5)?;
    println!("\noscillator from x = (1, 1), dt = 0.5");
    println!("  mean       {:?}", inc.mean);
    println!("  covariance {:?}", inc.covariance.to_rows());
    println!("  transition {:?}", osc.state_transition(0.0, 0.5)?.to_rows());
    Ok(())
}
