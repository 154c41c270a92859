//! The three emulating-system codecs on one increment.

use sysrate::emulation::{onehot_code_rate_bits, ActivationSchedule, IntegerCodec};
use sysrate::{endpoint_map, integer_quantize, onehot_compress, simplex_compress, simplex_decompress, SourceFamily};

fn main() -> sysrate::Result<()> {
    let family = SourceFamily::planar_grid(2);
    let x = [0.3, -0.2];
    let dx = [0.013, -0.004];
    let dt = 0.01;

    // One-hot: pick one field per segment, tracking the straight line to dx.
    let segments = 8;
    let indices = onehot_compress(&family, &x, &dx, segments, dt)?;
    let end = endpoint_map(&family, &x, &ActivationSchedule::OneHot { indices: indices.clone(), horizon: dt })?;
    println!("one-hot   {indices:?}");
    println!("          endpoint error {:.2e}", ((end[0] - x[0] - dx[0]).powi(2) + (end[1] - x[1] - dx[1]).powi(2)).sqrt());
    println!("          {:.3} bits per symbol at blocklength 1", onehot_code_rate_bits(family.len(), segments, 1));

    // Simplex: minimum total flow time, lossless.
    let code = simplex_compress(&family, &dx)?;
    let back = simplex_decompress(&family, &x, &code)?;
    println!("simplex   Z = {:.6} (horizon {dt}), reproduces {back:.6?}", code.z());
    let support: Vec<(usize, f64)> = code.p().iter().copied().enumerate().filter(|(_, p)| *p > 0.0).collect();
    println!("          support {support:.4?}");

    // Integer: the simplex weights rounded to counts out of N.
    for n in [4, 16, 100] {
        let q = integer_quantize(&code, n)?;
        let codec = IntegerCodec::new(n);
        let approx = codec.decompress(&family, &x, &q, code.z(), dt)?;
        let err = ((approx[0] - dx[0]).powi(2) + (approx[1] - dx[1]).powi(2)).sqrt();
        println!("integer   N={n:<4} error {err:.2e}, codebook {:.1} bits", codec.codebook_bits(family.len()));
    }
    Ok(())
}
