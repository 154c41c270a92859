//! Counter-keyed random streams.
//!
//! Every draw is addressed by `(seed, stream, a, b)`; the ChaCha key is built
//! from those words directly, so streams never depend on the order in which
//! they are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};

/// Domain tags keep unrelated consumers of the same seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    ProcessNoise = 1,
    Multinomial = 2,
}

pub fn keyed_rng(seed: u64, stream: Stream, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    key[16..24].copy_from_slice(&a.to_le_bytes());
    key[24..].copy_from_slice(&b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// `n` independent standard normals for cell `(a, b)` of `stream`.
pub fn standard_normals(seed: u64, stream: Stream, a: u64, b: u64, n: usize) -> Vec<f64> {
    let mut rng = keyed_rng(seed, stream, a, b);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// One multinomial draw of `trials` over probabilities `p`, by conditional
/// binomials.
pub fn multinomial(seed: u64, a: u64, b: u64, trials: u64, p: &[f64]) -> Vec<u64> {
    let mut rng = keyed_rng(seed, Stream::Multinomial, a, b);
    let mut counts = vec![0u64; p.len()];
    let mut left = trials;
    let mut mass: f64 = p.iter().map(|v| v.max(0.0)).sum();
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        let pi = pi.max(0.0);
        if i + 1 == p.len() || mass <= 0.0 {
            counts[i] = left;
            break;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let k = if q >= 1.0 {
            left
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(&mut rng)
        };
        counts[i] = k;
        left -= k;
        mass -= pi;
    }
    counts
}
