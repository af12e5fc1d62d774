//! Drift-implicit Euler for `x_t = x0 + ∫ f(s, x_s) ds + φ_t`, assumption
//! checks, and the square-root (CIR) reduction.

mod cir;
mod drift;

pub use cir::{
    check_cir_conditions, cir_drift_transform, cir_drift_transform_checked, cir_transform, solve_cir,
    CirConditionReport, CirDirection, CirDriftSpec, CirFamily, CustomCirDrift,
};
pub use drift::{check_drift_assumptions, AssumptionReport, CustomDrift, DriftFamily, DriftSpec, Lattice};

use crate::error::{domain, Error, Result};
use crate::path::SamplePath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    DriftImplicitEuler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Step size; when set it must equal the driver's grid step.
    pub dt: Option<f64>,
    pub scheme: Scheme,
    /// Absolute tolerance on the residual of the implicit step equation.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            dt: None,
            scheme: Scheme::DriftImplicitEuler,
            newton_tol: 1e-12,
            max_newton_iters: 200,
        }
    }
}

impl SolveConfig {
    fn step_for(&self, driver: &SamplePath) -> Result<f64> {
        if !(self.newton_tol > 0.0) {
            return domain(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        if self.max_newton_iters == 0 {
            return domain("max_newton_iters must be positive");
        }
        let dt = driver.dt();
        if let Some(want) = self.dt {
            if !(want > 0.0) {
                return domain(format!("dt must be positive, got {want}"));
            }
            if (want - dt).abs() > 1e-12 * dt {
                return Err(Error::GridMismatch(format!(
                    "configured dt {want} differs from driver step {dt}"
                )));
            }
        }
        Ok(dt)
    }
}

/// Per-solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub path: SamplePath,
    /// Largest `|x - f(t, x) dt - c|` over all implicit steps.
    pub max_step_residual: f64,
    pub newton_iterations: usize,
    pub bisection_steps: usize,
}

/// Solves with drift-implicit Euler on the driver's grid; `x(0) = x0`.
pub fn solve_pathwise(
    x0: f64,
    drift: &DriftSpec,
    driver: &SamplePath,
    config: &SolveConfig,
) -> Result<SamplePath> {
    solve_pathwise_traced(x0, drift, driver, config).map(|t| t.path)
}

pub fn solve_pathwise_traced(
    x0: f64,
    drift: &DriftSpec,
    driver: &SamplePath,
    config: &SolveConfig,
) -> Result<SolveTrace> {
    if !(x0 > 0.0 && x0.is_finite()) {
        return domain(format!("initial value must be positive, got {x0}"));
    }
    let dt = config.step_for(driver)?;
    let times = driver.times();
    let phi = driver.values();
    let mut xs = Vec::with_capacity(phi.len());
    xs.push(x0);
    let mut trace = StepStats::default();
    // x_{n+1} = x0 + (φ_{n+1} - φ_0) + D_n + f(t_{n+1}, x_{n+1}) dt, with D_n the
    // accumulated drift; algebraically the one-step recursion, without
    // compounding the rounding of the increments.
    let mut x = x0;
    let mut accumulated = 0.0;
    for n in 0..phi.len() - 1 {
        let t = times[n + 1];
        let c = x0 + (phi[n + 1] - phi[0]) + accumulated;
        x = implicit_step(drift, t, dt, c, x, config, &mut trace).map_err(|reason| {
            Error::NonConvergence {
                step: n + 1,
                t,
                reason,
            }
        })?;
        accumulated += x - c;
        xs.push(x);
    }
    Ok(SolveTrace {
        path: SamplePath::uniform(dt, xs)?,
        max_step_residual: trace.max_residual,
        newton_iterations: trace.newton,
        bisection_steps: trace.bisection,
    })
}

#[derive(Default)]
struct StepStats {
    max_residual: f64,
    newton: usize,
    bisection: usize,
}

/// Positive root of `x - dt f(t, x) = c`.
fn implicit_step(
    drift: &DriftSpec,
    t: f64,
    dt: f64,
    c: f64,
    prev: f64,
    config: &SolveConfig,
    stats: &mut StepStats,
) -> std::result::Result<f64, String> {
    let residual = |x: f64| x - dt * drift.value(t, x) - c;
    let x = match &drift.family {
        _ if drift.is_zero() => c,
        DriftFamily::Reciprocal { k } => {
            // x^2 - c x - K dt = 0
            let kdt = drift.scale * k * dt;
            let disc = (c * c + 4.0 * kdt).sqrt();
            if c >= 0.0 {
                0.5 * (c + disc)
            } else {
                2.0 * kdt / (disc - c)
            }
        }
        _ => newton_bisect(drift, t, dt, c, prev, config, stats)?,
    };
    if !(x > 0.0 && x.is_finite()) {
        return Err(format!("no positive solution of the implicit step (value {x})"));
    }
    let r = residual(x).abs();
    stats.max_residual = stats.max_residual.max(r);
    Ok(x)
}

fn newton_bisect(
    drift: &DriftSpec,
    t: f64,
    dt: f64,
    c: f64,
    prev: f64,
    config: &SolveConfig,
    stats: &mut StepStats,
) -> std::result::Result<f64, String> {
    let big_f = |x: f64| x - dt * drift.value(t, x) - c;
    let tol = config.newton_tol;

    // Upper bracket: F(x_ref + dt f(x_ref)) >= 0 when f is nonincreasing;
    // doubling covers drifts that are not.
    let x_ref = if c > 0.0 { c } else { 1.0 };
    let mut hi = x_ref.max(c + dt * drift.value(t, x_ref));
    let mut f_hi = big_f(hi);
    let mut k = 0;
    while !(f_hi >= 0.0) {
        hi *= 2.0;
        f_hi = big_f(hi);
        k += 1;
        if k > 200 || !hi.is_finite() {
            return Err("could not bracket the implicit step from above".into());
        }
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }
    let mut lo = hi;
    let mut f_lo = f_hi;
    while !(f_lo < 0.0) {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err("implicit step has no positive root".into());
        }
        f_lo = big_f(lo);
        if f_lo.is_nan() {
            return Err("drift is not finite near zero".into());
        }
        if f_lo.abs() <= tol {
            return Ok(lo);
        }
    }

    let mut x = (c).max(0.5 * prev);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..config.max_newton_iters {
        let fx = big_f(x);
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(if big_f(lo).abs() < big_f(hi).abs() { lo } else { hi });
        }
        let slope = 1.0 - dt * drift.dx(t, x);
        let cand = x - fx / slope;
        if slope.is_finite() && slope > 0.0 && cand > lo && cand < hi {
            stats.newton += 1;
            x = cand;
        } else {
            stats.bisection += 1;
            x = 0.5 * (lo + hi);
        }
    }
    Err(format!(
        "no convergence after {} iterations (bracket [{lo}, {hi}])",
        config.max_newton_iters
    ))
}

/// `max_i |x_i - x_0 - Q_i - (φ_i - φ_0)|` where `Q` is the running trapezoid
/// of `f(t, x_t)`. A non-finite drift value at `t = 0` is replaced by its value
/// at the first grid time.
pub fn residual_defect(solution: &SamplePath, drift: &DriftSpec, driver: &SamplePath) -> Result<f64> {
    solution.check_same_grid(driver)?;
    let t = solution.times();
    let x = solution.values();
    let phi = driver.values();
    let dt = solution.dt();
    let mut fv: Vec<f64> = t.iter().zip(x).map(|(&t, &x)| drift.value(t, x)).collect();
    if !fv[0].is_finite() {
        fv[0] = drift.value(t[1], x[0]);
    }
    let mut q = 0.0;
    let mut worst: f64 = 0.0;
    for i in 1..x.len() {
        q += 0.5 * dt * (fv[i - 1] + fv[i]);
        worst = worst.max((x[i] - x[0] - q - (phi[i] - phi[0])).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{FbmMethod, FbmSampler, FbmSpec};

    fn fbm_driver(h: f64, n: usize, seed: u64, index: u64) -> SamplePath {
        let spec = FbmSpec::new(h, 1.0, n, FbmMethod::CirculantEmbedding, seed);
        FbmSampler::new(spec).unwrap().sample_path(index)
    }

    #[test]
    fn zero_drift_is_translation() {
        let phi = fbm_driver(0.75, 256, 3, 0);
        let x = solve_pathwise(5.0, &DriftSpec::zero(), &phi, &SolveConfig::default()).unwrap();
        for (a, b) in x.values().iter().zip(phi.values()) {
            assert_eq!(*a, 5.0 + b);
        }
        assert!(residual_defect(&x, &DriftSpec::zero(), &phi).unwrap() < 1e-12);
    }

    #[test]
    fn zero_drift_crossing_zero_is_an_error() {
        let phi = SamplePath::from_fn(1.0, 10, |t| -2.0 * t).unwrap();
        let err = solve_pathwise(1.0, &DriftSpec::zero(), &phi, &SolveConfig::default());
        assert!(matches!(err, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn reciprocal_closed_form() {
        let n = 10_000;
        let phi = SamplePath::from_fn(1.0, n, |_| 0.0).unwrap();
        let f = DriftSpec::reciprocal(1.0);
        let x = solve_pathwise(1.0, &f, &phi, &SolveConfig::default()).unwrap();
        let worst = x
            .times()
            .iter()
            .zip(x.values())
            .map(|(&t, &v)| (v - (1.0 + 2.0 * t).sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        let d = residual_defect(&x, &f, &phi).unwrap();
        assert!(d < 1e-4, "{d}");
    }

    #[test]
    fn newton_path_agrees_with_closed_form() {
        let phi = fbm_driver(0.7, 512, 11, 2);
        let f = DriftSpec::reciprocal(0.8);
        let custom = DriftSpec::custom(CustomDrift::new("0.8/x", |_, x| 0.8 / x, |_, x| -0.8 / (x * x)));
        let cfg = SolveConfig::default();
        let a = solve_pathwise(0.5, &f, &phi, &cfg).unwrap();
        let b = solve_pathwise_traced(0.5, &custom, &phi, &cfg).unwrap();
        assert!(b.max_step_residual <= cfg.newton_tol);
        for (u, v) in a.values().iter().zip(b.path.values()) {
            assert!((u - v).abs() < 1e-10 * u.max(1.0));
        }
    }

    #[test]
    fn strong_singularity_stays_positive() {
        let f = DriftSpec::power(0.2, 0.0, 3.0);
        let cfg = SolveConfig::default();
        for i in 0..20 {
            let phi = fbm_driver(0.6, 256, 5, i).map(|v| 3.0 * v);
            let t = solve_pathwise_traced(0.1, &f, &phi, &cfg).unwrap();
            assert!(t.path.values().iter().all(|&v| v > 0.0));
            assert!(t.max_step_residual <= cfg.newton_tol);
        }
    }

    #[test]
    fn time_singular_custom_drift() {
        let f = DriftSpec::custom(CustomDrift::new(
            "t^-0.3/x",
            |t, x| t.powf(-0.3) / x,
            |t, x| -t.powf(-0.3) / (x * x),
        ));
        let phi = fbm_driver(0.75, 128, 1, 0);
        let x = solve_pathwise(1.0, &f, &phi, &SolveConfig::default()).unwrap();
        assert!(residual_defect(&x, &f, &phi).unwrap().is_finite());
    }

    #[test]
    fn config_validation() {
        let phi = fbm_driver(0.75, 64, 1, 0);
        let f = DriftSpec::reciprocal(1.0);
        let cfg = SolveConfig {
            dt: Some(0.5),
            ..Default::default()
        };
        assert!(matches!(
            solve_pathwise(1.0, &f, &phi, &cfg),
            Err(Error::GridMismatch(_))
        ));
        let cfg = SolveConfig {
            newton_tol: 0.0,
            ..Default::default()
        };
        assert!(solve_pathwise(1.0, &f, &phi, &cfg).is_err());
        assert!(solve_pathwise(0.0, &f, &phi, &SolveConfig::default()).is_err());
        let cfg = SolveConfig {
            dt: Some(1.0 / 64.0),
            ..Default::default()
        };
        assert!(solve_pathwise(1.0, &f, &phi, &cfg).is_ok());
    }
}
