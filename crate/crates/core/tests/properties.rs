mod common;

use proptest::prelude::*;
use sysrate::complexity::{equilibrium_covariance, logspace};
use sysrate::emulation::emulated_increment_moments;
use sysrate::matrix::cholesky;
use sysrate::{
    complexity_ceiling, integer_quantize, lyapunov_solve, mat_exp, onehot_compress, rate_curve, rdf, simplex_compress,
    simplex_decompress, sym_eig, GaussianSource, LinearSystemModel, Matrix, SimplexCode, SourceFamily,
};

use common::*;

fn square(n: usize, scale: f64) -> impl Strategy<Value = Dense> {
    prop::collection::vec(prop::collection::vec(-scale..scale, n), n)
}

fn psd(n: usize) -> impl Strategy<Value = Dense> {
    square(n, 1.0).prop_map(|b| mul(&b, &transpose(&b)))
}

fn hurwitz(n: usize) -> impl Strategy<Value = Dense> {
    // Shift by the Frobenius norm, an upper bound on every |λ|.
    (square(n, 1.0), 0.05..1.0f64).prop_map(move |(g, margin)| {
        let fro = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        add_scaled(&g, &eye(n), -(fro + margin))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exponential_semigroup(a in square(3, 1.5), s in 0.0..2.0f64, t in 0.0..2.0f64) {
        let m = to_matrix(&a);
        let lhs = mat_exp(&m, s + t).unwrap();
        let rhs = mat_exp(&m, s).unwrap().matmul(&mat_exp(&m, t).unwrap()).unwrap();
        let scale = lhs.max_abs().max(1.0);
        prop_assert!(max_abs_diff(&from_matrix(&lhs), &from_matrix(&rhs)) <= 1e-11 * scale);
    }

    #[test]
    fn exponential_matches_taylor_for_small_steps(a in square(4, 1.0), h in 0.0..0.05f64) {
        let got = from_matrix(&mat_exp(&to_matrix(&a), h).unwrap());
        prop_assert!(max_abs_diff(&got, &taylor_exp(&a, h, 20)) <= 1e-14);
    }

    #[test]
    fn eigen_reconstructs(s in psd(4)) {
        let eig = sym_eig(&to_matrix(&s)).unwrap();
        let back = from_matrix(&eig.reconstruct());
        prop_assert!(max_abs_diff(&back, &s) <= 1e-11 * max_abs(&s).max(1.0));
        prop_assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn lyapunov_solution_is_psd(a in hurwitz(3), noise in psd(3)) {
        let w = lyapunov_solve(&to_matrix(&a), &to_matrix(&noise)).unwrap();
        let eig = sym_eig(&w.symmetrize()).unwrap();
        prop_assert!(eig.values.iter().all(|&l| l >= -1e-10 * w.max_abs().max(1.0)));
    }

    #[test]
    fn gramian_is_loewner_monotone(a in hurwitz(2), noise in psd(2), dt in 0.01..3.0f64, extra in 0.01..3.0f64) {
        let model = LinearSystemModel::constant(to_matrix(&a), to_matrix(&noise)).unwrap();
        let small = model.gramian(0.0, dt).unwrap();
        let big = model.gramian(0.0, dt + extra).unwrap();
        let gap = sym_eig(&big.sub(&small).unwrap().symmetrize()).unwrap();
        prop_assert!(gap.values.iter().all(|&l| l >= -1e-10 * big.max_abs().max(1.0)));
    }

    #[test]
    fn gramian_below_equilibrium(a in hurwitz(2), noise in psd(2), dt in 0.01..20.0f64) {
        let model = LinearSystemModel::constant(to_matrix(&a), to_matrix(&noise)).unwrap();
        let winf = equilibrium_covariance(&model).unwrap();
        let gap = winf.sub(&model.gramian(0.0, dt).unwrap()).unwrap().symmetrize();
        prop_assert!(sym_eig(&gap).unwrap().values.iter().all(|&l| l >= -1e-10 * winf.max_abs().max(1.0)));
    }

    #[test]
    fn stable_rate_curve_nondecreasing(a in hurwitz(2), noise in psd(2), d in 1e-4..0.5f64) {
        let model = LinearSystemModel::constant(to_matrix(&a), to_matrix(&noise)).unwrap();
        let curve = rate_curve(&model, d, &logspace(1e-2, 1e2, 40)).unwrap();
        prop_assert!(curve.samples.windows(2).all(|w| w[1].rate_bits >= w[0].rate_bits - 1e-9));
    }

    #[test]
    fn complexity_never_exceeds_ceiling(a in hurwitz(2), noise in psd(2), d in 0.0..0.5f64) {
        let model = LinearSystemModel::constant(to_matrix(&a), to_matrix(&noise)).unwrap();
        let ceiling = complexity_ceiling(&model, d).unwrap().rate_bits;
        let curve = rate_curve(&model, d, &logspace(1e-3, 1e3, 30)).unwrap();
        prop_assert!(curve.samples.iter().all(|s| s.rate_bits <= ceiling + 1e-9));
    }

    #[test]
    fn rate_is_rotation_invariant(s in psd(3), d in 1e-3..2.0f64, seed in any::<u64>()) {
        let q = random_orthogonal(&mut rng(seed), 3);
        let rotated = mul(&mul(&q, &s), &transpose(&q));
        let r1 = rdf(&GaussianSource::centered(to_matrix(&s)).unwrap(), d).unwrap().rate_nats;
        let r2 = rdf(&GaussianSource::centered(to_matrix(&rotated).symmetrize()).unwrap(), d).unwrap().rate_nats;
        prop_assert!((r1 - r2).abs() <= 1e-8 * r1.abs().max(1.0));
    }

    #[test]
    fn rate_is_scale_invariant(s in psd(3), d in 1e-3..2.0f64, c in 0.1..10.0f64) {
        let r1 = rdf(&GaussianSource::centered(to_matrix(&s)).unwrap(), d).unwrap().rate_nats;
        let scaled = to_matrix(&s).scale(c);
        let r2 = rdf(&GaussianSource::centered(scaled).unwrap(), c * d).unwrap().rate_nats;
        prop_assert!((r1 - r2).abs() <= 1e-8 * r1.abs().max(1.0));
    }

    #[test]
    fn water_is_conserved(s in psd(4), frac in 0.0..1.5f64) {
        let source = GaussianSource::centered(to_matrix(&s)).unwrap();
        let total = source.total_variance();
        let d = frac * total;
        let res = rdf(&source, d).unwrap();
        prop_assert!((res.allocations.iter().sum::<f64>() - d.min(total)).abs() <= 1e-9 * total.max(1.0));
        prop_assert!(res.allocations.iter().zip(&res.variances).all(|(a, v)| *a <= v + 1e-12));
    }

    #[test]
    fn lp_optimum_matches_enumeration(cols in prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 2), 2..7),
                                      w in prop::collection::vec(0.0..1.0f64, 6)) {
        let dx: Vec<f64> = (0..2).map(|d| cols.iter().zip(&w).map(|(c, wi)| c[d] * wi).sum()).collect();
        let family = SourceFamily::constant(cols.clone()).unwrap();
        let code = simplex_compress(&family, &dx).unwrap();
        let best = lp_vertex_min(&cols, &dx).unwrap();
        prop_assert!((code.z() - best).abs() <= 1e-9 * best.max(1.0));
        let back = simplex_decompress(&family, &[0.0, 0.0], &code).unwrap();
        prop_assert!(back.iter().zip(&dx).all(|(a, b)| (a - b).abs() <= 1e-9));
    }

    #[test]
    fn quantization_error_is_bounded(raw in prop::collection::vec(0.0..1.0f64, 2..24), n in 1u64..500) {
        let s: f64 = raw.iter().sum();
        prop_assume!(s > 0.0);
        let p: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let q = integer_quantize(&SimplexCode::new(p.clone(), 1.0).unwrap(), n).unwrap();
        prop_assert_eq!(q.counts().iter().sum::<u64>(), n);
        let err = q.frequencies().iter().zip(&p).map(|(a, b)| (a - b).abs()).sum::<f64>();
        prop_assert!(err <= p.len() as f64 / n as f64 + 1e-12);
    }

    #[test]
    fn emulator_variance_scales_inversely(raw in prop::collection::vec(0.01..1.0f64, 24), z in 0.01..1.0f64, n in 1u64..1000) {
        let s: f64 = raw.iter().sum();
        let code = SimplexCode::new(raw.iter().map(|v| v / s).collect(), z).unwrap();
        let family = SourceFamily::planar_grid(2);
        let (m1, c1) = emulated_increment_moments(&family, &[0.0, 0.0], &code, 1).unwrap();
        let (mn, cn) = emulated_increment_moments(&family, &[0.0, 0.0], &code, n).unwrap();
        prop_assert_eq!(m1, mn);
        prop_assert!(max_abs_diff(&from_matrix(&cn.scale(n as f64)), &from_matrix(&c1)) <= 1e-12);
    }

    #[test]
    fn noise_covariance_factorises(s in psd(3)) {
        let shifted = to_matrix(&add_scaled(&s, &eye(3), 1e-3));
        let l = cholesky(&shifted).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        prop_assert!(max_abs_diff(&from_matrix(&back), &from_matrix(&shifted)) <= 1e-12 * shifted.max_abs().max(1.0));
    }
}

/// Greedy one-hot selection against exhaustive search on antipodal axis
/// fields, where the greedy choice is optimal segment by segment.
#[test]
fn onehot_greedy_matches_exhaustive() {
    let family =
        SourceFamily::constant(vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]).unwrap();
    let vectors = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    let segments = 4;
    let dt = 1.0;
    let h = dt / segments as f64;
    for target in [[0.5, 0.5], [-1.0, 0.0], [0.25, -0.75], [0.0, 0.0], [0.9, 0.1]] {
        let greedy = onehot_compress(&family, &[0.0, 0.0], &target, segments, dt).unwrap();
        let end = |seq: &[usize]| {
            seq.iter().fold([0.0, 0.0], |acc, &i| [acc[0] + h * vectors[i][0], acc[1] + h * vectors[i][1]])
        };
        let miss = |e: [f64; 2]| (e[0] - target[0]).powi(2) + (e[1] - target[1]).powi(2);
        let mut best = f64::INFINITY;
        for code in 0..4usize.pow(segments as u32) {
            let seq: Vec<usize> = (0..segments).map(|j| code / 4usize.pow(j as u32) % 4).collect();
            best = best.min(miss(end(&seq)));
        }
        assert!((miss(end(&greedy)) - best).abs() <= 1e-12, "target {target:?}");
    }
}

#[test]
fn constant_system_has_no_ceiling_when_unstable() {
    let a = Matrix::from_rows(&[vec![0.3, 1.0], vec![0.0, -0.3]]).unwrap();
    let model = LinearSystemModel::constant(a, Matrix::identity(2)).unwrap();
    assert!(equilibrium_covariance(&model).is_err());
}
