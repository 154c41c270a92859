//! Reverse water-filling on a correlated 3-D Gaussian.

use sysrate::{rdf, rdf_logdet_fastpath, GaussianSource, Matrix};

fn main() -> sysrate::Result<()> {
    let cov = Matrix::from_rows(&[vec![4.0, 1.0, 0.0], vec![1.0, 2.0, 0.5], vec![0.0, 0.5, 0.25]])?;
    let source = GaussianSource::centered(cov)?;
    println!("total variance {:.4}", source.total_variance());

    for d in [0.05, 0.5, 1.5, 4.0, 7.0] {
        let r = rdf(&source, d)?;
        let alloc: Vec<String> = r.allocations.iter().map(|a| format!("{a:.4}")).collect();
        println!(
            "D={d:<5} theta={:.4} rate={:.4} bits  allocations [{}]",
            r.water_level,
            r.rate_bits,
            alloc.join(", ")
        );
    }

    // Below n * min eigenvalue every mode is active and the rate is a log-det.
    let d = 0.1;
    println!("log-det shortcut at D={d}: {:.6} nats", rdf_logdet_fastpath(&source, d)?);
    println!("water-filling     at D={d}: {:.6} nats", rdf(&source, d)?.rate_nats);
    Ok(())
}
