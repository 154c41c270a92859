//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Tolerances and runtime budgets are pinned here and must not be loosened.
//! Runtimes are measured in whatever profile the test binary was built with.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use sysrate::cli::Preset;
use sysrate::complexity::{equilibrium_covariance, is_hurwitz, logspace};
use sysrate::emulation::{average_codes, emulate_path, initial_mean};
use sysrate::stats::{discrepancy, step_moments};
use sysrate::{
    complexity, complexity_ceiling, min_sampling_rate, rate_curve, rdf, rdf_logdet_fastpath, simplex_compress,
    simplex_decompress, ComplexityQuery, Error, GaussianSource, LinearSystemModel, Matrix, SamplingRequirement,
    SourceFamily, TrajectoryDataset,
};

use common::*;

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn budget(elapsed: Duration, limit: Duration) -> Outcome {
    ensure!(elapsed <= limit, "took {elapsed:?}, budget {limit:?}");
    Ok(format!("{elapsed:.2?}"))
}

fn scalar_gramian() -> Outcome {
    let model = LinearSystemModel::constant(Matrix::from_rows(&[vec![-1.0]]).unwrap(), Matrix::identity(1)).unwrap();
    let start = Instant::now();
    let inc = model.increment_distribution(&[0.0], 0.0, 1.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let oracle = (1.0 - (-2.0f64).exp()) / 2.0;
    let err = (inc.covariance[(0, 0)] - oracle).abs();
    ensure!(err <= 1e-10, "covariance {} vs {oracle}, error {err:e}", inc.covariance[(0, 0)]);
    Ok(format!("error {err:.1e}, {}", budget(elapsed, Duration::from_millis(1))?))
}

fn van_loan_vs_quadrature() -> Outcome {
    let mut r = rng(0xC2);
    let mut worst: f64 = 0.0;
    let start = Instant::now();
    let mut cases = Vec::new();
    for _ in 0..20 {
        let n = r.random_range(1..=5);
        let (a, _) = random_hurwitz(&mut r, n);
        let noise = random_psd(&mut r, n);
        let dt = r.random_range(0.1..2.0);
        cases.push((a, noise, dt));
    }
    let mut grams = Vec::new();
    for (a, noise, dt) in &cases {
        let model = LinearSystemModel::constant(to_matrix(a), to_matrix(noise)).map_err(|e| e.to_string())?;
        grams.push(model.gramian(0.0, *dt).map_err(|e| e.to_string())?);
    }
    let elapsed = start.elapsed();
    for ((a, noise, dt), w) in cases.iter().zip(&grams) {
        let oracle = gramian_trapezoid(a, noise, *dt, 10_000);
        worst = worst.max(max_abs_diff(&from_matrix(w), &oracle));
    }
    ensure!(worst <= 1e-6, "max-norm gap {worst:e}");
    Ok(format!("max gap {worst:.1e}, {}", budget(elapsed, Duration::from_secs(5))?))
}

fn lyapunov_consistency() -> Outcome {
    let mut r = rng(0xC3);
    let (mut worst_res, mut worst_rel): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let n = r.random_range(1..=5);
        let (a, max_re) = random_hurwitz(&mut r, n);
        let noise = random_psd(&mut r, n);
        let am = to_matrix(&a);
        ensure!(is_hurwitz(&am), "generated drift not recognised as Hurwitz");
        let model = LinearSystemModel::constant(am, to_matrix(&noise)).map_err(|e| e.to_string())?;
        let winf = from_matrix(&equilibrium_covariance(&model).map_err(|e| e.to_string())?);
        let resid = add_scaled(&add_scaled(&mul(&a, &winf), &mul(&winf, &transpose(&a)), 1.0), &noise, 1.0);
        worst_res = worst_res.max(max_abs(&resid) / max_abs(&noise).max(1.0));
        let w = from_matrix(&model.gramian(0.0, 50.0 / max_re.abs()).map_err(|e| e.to_string())?);
        worst_rel = worst_rel.max(max_abs_diff(&w, &winf) / max_abs(&winf));
    }
    ensure!(worst_res <= 1e-8, "Lyapunov residual {worst_res:e}");
    ensure!(worst_rel <= 1e-6, "W(dt) vs W_inf relative gap {worst_rel:e}");
    Ok(format!("residual {worst_res:.1e}, long-horizon gap {worst_rel:.1e}"))
}

fn water_filling() -> Outcome {
    let mut r = rng(0xC4);
    let (mut sum_err, mut fast_err, mut brute_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for case in 0..100 {
        let n = r.random_range(1..=6);
        let (cov, spectrum) = random_covariance(&mut r, n);
        let source = GaussianSource::centered(to_matrix(&cov)).map_err(|e| e.to_string())?;
        let total: f64 = spectrum.iter().sum();
        let d = r.random_range(0.0..1.2 * total);
        let res = rdf(&source, d).map_err(|e| e.to_string())?;
        sum_err = sum_err.max((res.allocations.iter().sum::<f64>() - d.min(total)).abs());

        let mut grid: Vec<f64> = (0..40).map(|_| r.random_range(1e-6..1.2 * total)).collect();
        grid.sort_by(f64::total_cmp);
        let mut prev = f64::INFINITY;
        for &g in &grid {
            let rate = rdf(&source, g).map_err(|e| e.to_string())?.rate_nats;
            ensure!(rate <= prev + 1e-12, "rate increased with distortion ({prev} -> {rate})");
            prev = rate;
        }

        let min_var = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
        let d_fast = r.random_range(0.01..0.99) * n as f64 * min_var;
        let fast = rdf_logdet_fastpath(&source, d_fast).map_err(|e| e.to_string())?;
        let full = rdf(&source, d_fast).map_err(|e| e.to_string())?.rate_nats;
        fast_err = fast_err.max((fast - full).abs());

        if case < 10 {
            let oracle = water_filling_grid(&spectrum, d, 1_000_000);
            brute_err = brute_err.max((res.rate_nats - oracle).abs());
        }
    }
    ensure!(sum_err <= 1e-9, "allocation sum off by {sum_err:e}");
    ensure!(fast_err <= 1e-9, "log-det fast path off by {fast_err:e} nats");
    ensure!(brute_err <= 1e-6, "grid search off by {brute_err:e} nats");
    Ok(format!("sum {sum_err:.1e}, fast path {fast_err:.1e}, grid {brute_err:.1e}"))
}

fn stable_curve_reaches_ceiling() -> Outcome {
    let grid = logspace(1e-2, 1e2, 100);
    let mut checked = 0;
    let mut detail = String::new();
    for preset in Preset::ALL {
        let model = preset.model();
        if !is_hurwitz(model.constant_drift().unwrap()) {
            continue;
        }
        let curve = rate_curve(&model, 0.01, &grid).map_err(|e| e.to_string())?;
        for w in curve.samples.windows(2) {
            ensure!(
                w[1].rate_bits >= w[0].rate_bits - 1e-9,
                "{}: rate drops at dt={} ({} -> {})",
                preset.name(),
                w[1].dt,
                w[0].rate_bits,
                w[1].rate_bits
            );
        }
        let ceiling = complexity_ceiling(&model, 0.01).map_err(|e| e.to_string())?.rate_bits;
        let last = curve.last().unwrap().rate_bits;
        ensure!((last - ceiling).abs() <= 1e-3, "{}: final {last} vs ceiling {ceiling}", preset.name());
        detail += &format!("{} ceiling {ceiling:.4} bits ", preset.name());
        checked += 1;
    }
    ensure!(checked > 0, "no Hurwitz preset");
    Ok(detail.trim_end().to_string())
}

fn rate_at(model: &LinearSystemModel, dt: f64) -> std::result::Result<f64, String> {
    let q = ComplexityQuery::new(model, 0.0, dt, 0.01).map_err(|e| e.to_string())?;
    Ok(complexity(&q).map_err(|e| e.to_string())?.rate_bits)
}

fn attention_bracket() -> Outcome {
    let capacity = 8.0;
    let mut detail = String::new();
    for preset in Preset::ALL {
        let model = preset.model();
        if equilibrium_covariance(&model).is_ok() {
            continue;
        }
        let fs = match min_sampling_rate(&model, 0.01, capacity).map_err(|e| e.to_string())? {
            SamplingRequirement::MinRate { fs, .. } => fs,
            other => return Err(format!("{}: expected a finite rate, got {other:?}", preset.name())),
        };
        ensure!(fs.is_finite() && fs > 0.0, "{}: fs = {fs}", preset.name());
        let below = rate_at(&model, 1.0 / fs)?;
        let above = rate_at(&model, 1.0 / (0.99 * fs))?;
        ensure!(below < capacity && capacity <= above, "{}: bracket {below} / {above}", preset.name());
        if preset == Preset::Brownian {
            let oracle = 1.0 / (0.01 * 2f64.powf(2.0 * capacity));
            let rel = (fs - oracle).abs() / oracle;
            ensure!(rel <= 1e-6, "brownian fs {fs} vs closed form {oracle}");
        }
        detail += &format!("{} fs {fs:.6} ", preset.name());
    }
    Ok(detail.trim_end().to_string())
}

fn lp_exactness() -> Outcome {
    let mut r = rng(0xC7);
    let start = Instant::now();
    let vectors = random_dense(&mut r, 24, 2, 2.0);
    let family = SourceFamily::constant(vectors.clone()).map_err(|e| e.to_string())?;
    let mut roundtrip: f64 = 0.0;
    for _ in 0..1000 {
        let mut dx = vec![0.0; 2];
        for v in &vectors {
            if r.random_bool(0.3) {
                let w = r.random_range(0.0..0.5);
                dx[0] += w * v[0];
                dx[1] += w * v[1];
            }
        }
        let code = simplex_compress(&family, &dx).map_err(|e| e.to_string())?;
        let back = simplex_decompress(&family, &[0.0, 0.0], &code).map_err(|e| e.to_string())?;
        roundtrip = roundtrip.max(back.iter().zip(&dx).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let mut brute: f64 = 0.0;
    let mut instances = 0;
    for k in 1..=8 {
        for n in 1..=3 {
            for _ in 0..4 {
                let cols = random_dense(&mut r, k, n, 1.0);
                let dx: Vec<f64> = if r.random_bool(0.75) {
                    let w: Vec<f64> = (0..k).map(|_| r.random_range(0.0..1.0)).collect();
                    (0..n).map(|d| cols.iter().zip(&w).map(|(c, wi)| c[d] * wi).sum()).collect()
                } else {
                    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
                };
                let fam = SourceFamily::constant(cols.clone()).map_err(|e| e.to_string())?;
                let oracle = lp_vertex_min(&cols, &dx);
                match (simplex_compress(&fam, &dx), oracle) {
                    (Ok(code), Some(best)) => brute = brute.max((code.z() - best).abs()),
                    (Err(Error::Infeasible), None) => {}
                    (got, want) => return Err(format!("K={k} n={n}: solver {got:?}, enumeration {want:?}")),
                }
                instances += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(roundtrip <= 1e-9, "round trip off by {roundtrip:e}");
    ensure!(brute <= 1e-9, "flow time off by {brute:e} against enumeration");
    Ok(format!(
        "round trip {roundtrip:.1e}, {instances} enumerated instances {brute:.1e}, {}",
        budget(elapsed, Duration::from_secs(10))?
    ))
}

fn emulation_statistics() -> Outcome {
    let start = Instant::now();
    let a = Preset::Stable.drift();
    let model = LinearSystemModel::constant(a, Matrix::identity(2).scale(0.01)).map_err(|e| e.to_string())?;
    let training = model.sample_paths(&[1.0, 1.0], 0.01, 300, 50, 2024).map_err(|e| e.to_string())?;
    let family = SourceFamily::planar_grid(2);
    let codes = average_codes(&training, &family).map_err(|e| e.to_string())?;
    let x0 = initial_mean(&training);
    let paths = (0..50)
        .map(|p| emulate_path(&codes, &family, &x0, 100, 2024, p))
        .collect::<sysrate::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let emulated = TrajectoryDataset::new(0.01, paths).map_err(|e| e.to_string())?;
    let (train, emu) = (step_moments(&training), step_moments(&emulated));
    let (mut mean_ok, mut cov_ok) = (0usize, 0usize);
    for (t, e) in train.iter().zip(&emu) {
        let d = discrepancy(t, e);
        mean_ok += usize::from(d.mean_z <= 3.0);
        cov_ok += usize::from(d.cov_z <= 3.0);
    }
    let elapsed = start.elapsed();
    let steps = train.len() as f64;
    let (mf, cf) = (mean_ok as f64 / steps, cov_ok as f64 / steps);
    let summary = format!(
        "infeasible {}, mean within 3 SE {:.1}%, covariance within 3 SE {:.1}%",
        codes.infeasible,
        100.0 * mf,
        100.0 * cf
    );
    ensure!(codes.infeasible == 0, "{summary}");
    ensure!(mf >= 0.95 && cf >= 0.95, "{summary}");
    Ok(format!("{summary}, {}", budget(elapsed, Duration::from_secs(30))?))
}

fn run_cli(args: &[&str]) -> std::result::Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_sysrate")).args(args).output().map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn cli_determinism() -> Outcome {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let cfg = |name: &str| data.join(name).to_string_lossy().into_owned();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let family = cfg("grid24.json");
    let runs: Vec<(Vec<String>, String)> = vec![
        (vec!["rdf-curve".into(), "--config".into(), cfg("stable_curve.json"), "--out".into()], "curve".into()),
        (vec!["min-rate".into(), "--config".into(), cfg("unstable_attention.json"), "--out".into()], "rate".into()),
        (
            vec!["sample".into(), "--config".into(), cfg("stable_training.json"), "--seed".into(), "11".into(), "--out".into()],
            "train".into(),
        ),
        (
            vec![
                "emulate".into(),
                out("train_0.csv"),
                family,
                "--resolution".into(),
                "100".into(),
                "--seed".into(),
                "5".into(),
                "--out".into(),
            ],
            "emu".into(),
        ),
    ];
    let mut files = 0;
    for (args, stem) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let target = out(&format!("{stem}_{rep}.csv"));
            let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
            full.push(&target);
            let stdout = run_cli(&full)?;
            let bytes = std::fs::read(&target).map_err(|e| e.to_string())?;
            outputs.push((stdout, bytes));
        }
        ensure!(outputs[0] == outputs[1], "{stem}: output differs between reruns");
        files += 1;
    }
    Ok(format!("{files} commands byte-identical on rerun"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("scalar Gramian oracle", scalar_gramian),
        ("Van Loan vs quadrature", van_loan_vs_quadrature),
        ("Lyapunov consistency", lyapunov_consistency),
        ("water-filling correctness", water_filling),
        ("stable rate curve reaches ceiling", stable_curve_reaches_ceiling),
        ("minimum sampling rate bracket", attention_bracket),
        ("LP compressor exactness", lp_exactness),
        ("emulated increment statistics", emulation_statistics),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
