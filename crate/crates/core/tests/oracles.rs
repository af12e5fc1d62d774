//! Independent oracles for the fBm kernel, the Young integral and the
//! estimates used by the sup-norm bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfbm_core::fbm::{hurst_covariance, kernel_kh, FbmMethod, FbmSampler, FbmSpec};
use sfbm_core::fraccalc::{
    frac_deriv_right, holder_seminorm, rs_integral_oracle, sup_norm, young_integral, IbpOrder,
};
use sfbm_core::quad::GaussLegendre;
use sfbm_core::solver::{solve_pathwise, DriftSpec, SolveConfig};
use sfbm_core::verify::{assemble_c_ibp, default_bound_gamma};
use sfbm_core::SamplePath;
use statrs::function::gamma::gamma;

#[test]
fn kernel_factorizes_covariance() {
    // R_H(s,t) = ∫_0^{s∧t} K_H(t,r) K_H(s,r) dr; with r = m v^p, p = 1/(2-2H),
    // the r^{1-2H} endpoint behaviour becomes bounded.
    let gl = GaussLegendre::new(12);
    let grid: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
    for h in [0.6, 0.75, 0.9] {
        let p = 1.0 / (2.0 - 2.0 * h);
        for (i, &s) in grid.iter().enumerate() {
            for &t in &grid[i..] {
                let m = s.min(t);
                let integrand = |v: f64| {
                    if v <= 0.0 {
                        return 0.0;
                    }
                    let r = m * v.powf(p);
                    let jac = m * p * v.powf(p - 1.0);
                    kernel_kh(t, r, h).unwrap() * kernel_kh(s, r, h).unwrap() * jac
                };
                let got = gl.adaptive(&integrand, 0.0, 1.0, 1e-9);
                let want = hurst_covariance(s, t, h).unwrap();
                assert!((got - want).abs() <= 1e-4, "H={h} s={s} t={t}: {got} vs {want}");
            }
        }
    }
}

/// First-order Richardson of left-point sums on a grid `refine` times finer.
fn fine_oracle(y: impl Fn(f64) -> f64 + Copy, phi: impl Fn(f64) -> f64 + Copy, n: usize) -> f64 {
    let rs = |n| {
        let yp = SamplePath::from_fn(1.0, n, y).unwrap();
        let pp = SamplePath::from_fn(1.0, n, phi).unwrap();
        rs_integral_oracle(&yp, &pp, 0.0, 1.0).unwrap()
    };
    2.0 * rs(n) - rs(n / 2)
}

#[test]
fn young_integral_matches_oracle_on_random_smooth_pairs() {
    let n = 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..20 {
        let c: [f64; 6] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let w: [f64; 2] = std::array::from_fn(|_| rng.random_range(0.5..6.0));
        let y = move |u: f64| c[0] + c[1] * (w[0] * u).sin() + c[2] * u * u;
        let phi = move |u: f64| c[3] * (w[1] * u + c[4]).sin() + c[5] * u * u * u;
        let oracle = fine_oracle(y, phi, 1 << 18);
        let yp = SamplePath::from_fn(1.0, n, y).unwrap();
        let pp = SamplePath::from_fn(1.0, n, phi).unwrap();
        for a in [0.3, 0.45, 0.6] {
            let got = young_integral(&yp, &pp, 0.0, 1.0, IbpOrder::new(a).unwrap()).unwrap();
            assert!(
                (got - oracle).abs() <= 1e-4 * (1.0 + oracle.abs()),
                "pair {k}, a={a}: {got} vs {oracle}"
            );
        }
    }
}

#[test]
fn young_integral_smooth_examples() {
    let n = 2048;
    let a = IbpOrder::new(0.4).unwrap();
    let y = SamplePath::from_fn(1.0, n, |u| u * u).unwrap();
    let phi = SamplePath::from_fn(1.0, n, f64::sin).unwrap();
    let got = young_integral(&y, &phi, 0.0, 1.0, a).unwrap();
    let oracle = fine_oracle(|u| u * u, f64::sin, 1 << 20);
    assert!((got - oracle).abs() <= 1e-5 * oracle.abs(), "{got} vs {oracle}");
    // ∫ φ dφ = (φ(t)² - φ(s)²)/2
    let phi = SamplePath::from_fn(1.0, n, |u| (3.0 * u).sin() + u).unwrap();
    for (s, t) in [(0.0, 1.0), (0.25, 0.75)] {
        let got = young_integral(&phi, &phi, s, t, a).unwrap();
        let f = |u: f64| (3.0 * u).sin() + u;
        let want = 0.5 * (f(t).powi(2) - f(s).powi(2));
        assert!(
            (got - want).abs() <= 1e-5 * want.abs(),
            "[{s},{t}]: {got} vs {want}"
        );
    }
}

#[test]
fn riemann_sums_converge_at_first_order() {
    let rs = |n| {
        let y = SamplePath::from_fn(1.0, n, |u| u * u).unwrap();
        let p = SamplePath::from_fn(1.0, n, f64::sin).unwrap();
        rs_integral_oracle(&y, &p, 0.0, 1.0).unwrap()
    };
    let (a, b, c) = (rs(512), rs(1024), rs(2048));
    let ratio = (a - b).abs() / (b - c).abs();
    assert!((1.9..=2.1).contains(&ratio), "{ratio}");
    // step integrand: exact level × increment sum
    let y = SamplePath::from_fn(1.0, 8, |u| if u < 0.5 { 1.0 } else { -2.0 }).unwrap();
    let p = SamplePath::from_fn(1.0, 8, |u| u * u).unwrap();
    let want = 1.0 * 0.25 + -2.0 * 0.75;
    assert!((rs_integral_oracle(&y, &p, 0.0, 1.0).unwrap() - want).abs() < 1e-15);
}

fn fbm(h: f64, n: usize, seed: u64, i: u64) -> SamplePath {
    FbmSampler::new(FbmSpec::new(h, 1.0, n, FbmMethod::CirculantEmbedding, seed))
        .unwrap()
        .sample_path(i)
}

#[test]
fn right_derivative_obeys_holder_estimate() {
    let (h, beta, a) = (0.75, 0.65, 0.5);
    let c = (1.0 + (1.0 - a) / (a + beta - 1.0)) / gamma(a);
    for i in 0..10 {
        let phi = fbm(h, 512, 8, i);
        let norm = holder_seminorm(&phi, 0.0, 1.0, beta).unwrap();
        for k in [0usize, 100, 256, 400, 500, 511] {
            let u = k as f64 / 512.0;
            let d = frac_deriv_right(&phi, u, 1.0, 1.0 - a).unwrap().abs();
            let cap = c * norm * (1.0 - u).powf(a + beta - 1.0);
            assert!(d <= cap, "path {i}, u={u}: {d} > {cap}");
        }
    }
}

#[test]
fn young_estimate_holds_with_assembled_constant() {
    let (h, beta) = (0.75, 0.65);
    let gamma_pow = default_bound_gamma(beta);
    let c = assemble_c_ibp(beta, gamma_pow).unwrap();
    let a = IbpOrder::new(c.order).unwrap();
    let f = DriftSpec::reciprocal(1.0);
    for i in 0..10 {
        let phi = fbm(h, 512, 31, i);
        let x = solve_pathwise(1.0, &f, &phi, &SolveConfig::default()).unwrap();
        let y = x.map(|v| v.powf(gamma_pow));
        let z = y.map(|v| v.powf(1.0 - 1.0 / gamma_pow));
        let pn = holder_seminorm(&phi, 0.0, 1.0, beta).unwrap();
        for (s, t) in [(0.0, 1.0), (0.25, 0.5), (0.5, 0.625)] {
            let lhs = young_integral(&z, &phi, s, t, a).unwrap().abs();
            let ys = sup_norm(&y, s, t).unwrap();
            let yb = holder_seminorm(&y, s, t, beta).unwrap();
            let e = 1.0 - 1.0 / gamma_pow;
            let rhs = c.value
                * pn
                * (ys.powf(e) * (t - s).powf(beta)
                    + yb.powf(e) * (t - s).powf(beta * (2.0 - 1.0 / gamma_pow)));
            assert!(lhs <= rhs, "path {i} [{s},{t}]: {lhs} > {rhs}");
        }
    }
}

#[test]
fn sampler_variance_and_method_agreement() {
    use sfbm_core::verify::{distributional_distance, ks_critical_value};
    let m = 20_000u64;
    let h = 0.75;
    let circ = FbmSampler::new(FbmSpec::new(h, 1.0, 64, FbmMethod::CirculantEmbedding, 5)).unwrap();
    let chol = FbmSampler::new(FbmSpec::new(h, 1.0, 64, FbmMethod::Cholesky, 6)).unwrap();
    let a: Vec<f64> = (0..m).map(|i| circ.sample_path(i).last()).collect();
    let b: Vec<f64> = (0..m).map(|i| chol.sample_path(i).last()).collect();
    let sq: Vec<f64> = a.iter().map(|v| v * v).collect();
    let (mean, se) = sfbm_core::mc::mean_and_se(&sq);
    assert!((mean - 1.0).abs() <= 3.0 * se, "{mean} ± {se}");
    let d = distributional_distance(&a, &b).unwrap();
    assert!(d < ks_critical_value(a.len(), b.len(), 0.01).unwrap());
}
