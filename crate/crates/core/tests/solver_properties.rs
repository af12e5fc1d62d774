use sfbm_core::fbm::{FbmMethod, FbmSampler, FbmSpec};
use sfbm_core::solver::{solve_pathwise, solve_pathwise_traced, DriftSpec, SolveConfig};

fn sampler(h: f64, n: usize, seed: u64) -> FbmSampler {
    FbmSampler::new(FbmSpec::new(h, 1.0, n, FbmMethod::CirculantEmbedding, seed)).unwrap()
}

#[test]
fn comparison_is_exact_on_computed_paths() {
    let s = sampler(0.75, 1024, 42);
    let cfg = SolveConfig::default();
    for f in [DriftSpec::reciprocal(1.0), DriftSpec::power(0.5, 1.0, 1.5)] {
        for i in 0..100 {
            let phi = s.sample_path(i);
            let (x0, x0p) = (0.5, 0.8);
            let a = solve_pathwise(x0, &f, &phi, &cfg).unwrap();
            let b = solve_pathwise(x0p, &f, &phi, &cfg).unwrap();
            let mut prev = f64::INFINITY;
            for (u, v) in a.values().iter().zip(b.values()) {
                let d = v - u;
                assert!(d >= 0.0 && d <= x0p - x0, "{} path {i}: {d}", f.describe());
                assert!(d <= prev, "{} path {i}: {d} > {prev}", f.describe());
                prev = d;
            }
        }
    }
}

#[test]
fn implicit_residual_within_tolerance_everywhere() {
    let s = sampler(0.6, 512, 9);
    let cfg = SolveConfig::default();
    for f in [DriftSpec::bessel(0.6, 2.0), DriftSpec::power(1.0, 0.5, 2.0)] {
        for i in 0..50 {
            let t = solve_pathwise_traced(0.2, &f, &s.sample_path(i), &cfg).unwrap();
            assert!(t.max_step_residual <= cfg.newton_tol);
            assert!(t.path.values().iter().all(|&v| v > 0.0));
        }
    }
}
