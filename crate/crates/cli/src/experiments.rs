//! One function per experiment. Each turns a validated configuration into
//! claims and the paths to export; nothing here touches the filesystem.

use sfbm_core::fbm::hurst_covariance;
use sfbm_core::fraccalc::{sup_norm, young_integral, IbpOrder};
use sfbm_core::malliavin::{derivative_report, directional_derivative_analytic, max_atom_mass, FdTolerance};
use sfbm_core::mc::map_paths;
use sfbm_core::rng::derive_seed;
use sfbm_core::solver::{
    check_cir_conditions, check_drift_assumptions, residual_defect, solve_cir, solve_pathwise,
    solve_pathwise_traced, CirDriftSpec, Lattice,
};
use sfbm_core::verify::{
    assemble_c_ibp, bound_growth_slope, check_path_bound, distributional_distance, ks_critical_value,
    moment_stability_from_sups, negative_moment_report, negative_moment_threshold, scaling_transform,
    BoundParams, MomentOutcome,
};
use sfbm_core::{DriftSpec, Error, FbmMethod, FbmSampler, FbmSpec, SamplePath, SolveConfig, StepFunction};

use crate::config::{CirName, DriftName, Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::report::{Claim, Relation, RunReport};

/// Seed domains: independent batches never share driver streams.
mod domain {
    pub const MAIN: u64 = 1;
    pub const ALTERNATE: u64 = 2;
    pub const CONVERGENCE: u64 = 3;
    pub const COMPARISON: u64 = 4;
    pub const SCALED: u64 = 5;
}

/// Covariance entries are checked on at most this many grid times.
const MAX_COVARIANCE_POINTS: usize = 64;
/// Lattice extent in `x` for the drift condition checks.
const LATTICE_X_MAX: f64 = 100.0;
const KS_LEVEL: f64 = 0.01;

pub struct RunOutput {
    pub report: RunReport,
    /// Paths to export as CSV.
    pub paths: Vec<SamplePath>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let (claims, paths) = match config.experiment {
        Experiment::FbmSample => fbm_sample(config)?,
        Experiment::Simulate => simulate(config)?,
        Experiment::VerifyBound => verify_bound(config)?,
        Experiment::NegMoments => neg_moments(config)?,
        Experiment::Scaling => scaling(config)?,
        Experiment::Malliavin => malliavin(config)?,
        Experiment::Cir => cir(config)?,
        Experiment::Moments => moments(config)?,
    };
    Ok(RunOutput {
        report: RunReport::new(config.clone(), claims),
        paths,
    })
}

type Outcome = Result<(Vec<Claim>, Vec<SamplePath>), CliError>;

pub fn build_drift(config: &ExperimentConfig) -> DriftSpec {
    let d = &config.drift;
    match d.family {
        DriftName::Reciprocal => DriftSpec::reciprocal(d.k),
        DriftName::Power => DriftSpec::power(d.k, d.gamma_d, d.alpha_d),
        DriftName::Bessel => DriftSpec::bessel(config.fbm.hurst, d.dim),
        DriftName::Zero => DriftSpec::zero(),
    }
}

pub fn build_cir_drift(config: &ExperimentConfig) -> CirDriftSpec {
    let c = &config.cir;
    match c.family {
        CirName::Constant => CirDriftSpec::constant(c.k),
        CirName::SqrtAffine => CirDriftSpec::sqrt_affine(c.a, c.b),
        CirName::Affine => CirDriftSpec::affine(c.a, c.b),
    }
}

fn solve_config(config: &ExperimentConfig) -> SolveConfig {
    SolveConfig {
        newton_tol: config.solver.newton_tol,
        max_newton_iters: config.solver.max_newton_iters,
        ..SolveConfig::default()
    }
}

fn sampler_with(config: &ExperimentConfig, domain: u64, method: FbmMethod) -> Result<FbmSampler, CliError> {
    let f = &config.fbm;
    let spec = FbmSpec::new(
        f.hurst,
        f.horizon,
        f.n_steps,
        method,
        derive_seed(config.seed, domain),
    );
    Ok(FbmSampler::new(spec)?)
}

fn sampler(config: &ExperimentConfig, domain: u64) -> Result<FbmSampler, CliError> {
    sampler_with(config, domain, config.fbm.method)
}

fn keep_for_csv(config: &ExperimentConfig, index: u64) -> bool {
    (index as usize) < config.csv_paths
}

/// `(time exponent, drift constant, singularity exponent)` when the drift is `K t^γ x^{-α}`.
fn power_form(config: &ExperimentConfig) -> Option<(f64, f64, f64)> {
    let d = &config.drift;
    let h = config.fbm.hurst;
    match d.family {
        DriftName::Reciprocal => Some((0.0, d.k, 1.0)),
        DriftName::Power => Some((d.gamma_d, d.k, d.alpha_d)),
        DriftName::Bessel => Some((2.0 * h - 1.0, h * (d.dim - 1.0), 1.0)),
        DriftName::Zero => None,
    }
}

/// Exact solution of `x' = f(t, x)` (zero driver).
fn zero_driver_solution(config: &ExperimentConfig, t: f64) -> f64 {
    let x0 = config.drift.x0;
    match power_form(config) {
        Some((g, k, a)) => {
            (x0.powf(a + 1.0) + (a + 1.0) * k * t.powf(g + 1.0) / (g + 1.0)).powf(1.0 / (a + 1.0))
        }
        None => x0,
    }
}

fn fbm_sample(config: &ExperimentConfig) -> Outcome {
    let n = config.fbm.n_steps;
    let m = config.n_paths as u64;
    let h = config.fbm.hurst;
    let stride = n.div_ceil(MAX_COVARIANCE_POINTS);
    let cols: Vec<usize> = (1..=n).filter(|i| i % stride == 0 || *i == n).collect();
    let main = sampler(config, domain::MAIN)?;
    let rows = map_paths(&main, 0, m, |i, p| {
        let picked: Vec<f64> = cols.iter().map(|&c| p.values()[c]).collect();
        Ok((picked, keep_for_csv(config, i).then_some(p)))
    })?;
    let times: Vec<f64> = cols.iter().map(|&c| main.spec().dt() * c as f64).collect();

    let k = cols.len();
    let mut sum = vec![0.0; k * k];
    let mut sum_sq = vec![0.0; k * k];
    for (v, _) in &rows {
        for i in 0..k {
            for j in i..k {
                let prod = v[i] * v[j];
                sum[i * k + j] += prod;
                sum_sq[i * k + j] += prod * prod;
            }
        }
    }
    let mf = m as f64;
    let mut max_z: f64 = 0.0;
    let mut worst = (0.0, 0.0);
    for i in 0..k {
        for j in i..k {
            let mean = sum[i * k + j] / mf;
            let var = (sum_sq[i * k + j] / mf - mean * mean) * mf / (mf - 1.0);
            let se = (var / mf).sqrt();
            let z = (mean - hurst_covariance(times[i], times[j], h)?).abs() / se;
            if z > max_z || z.is_nan() {
                max_z = z;
                worst = (times[i], times[j]);
            }
        }
    }
    let mut claims = vec![Claim::le("covariance_max_z", max_z, 4.0)
        .detail("grid_points", k)
        .detail("entries", k * (k + 1) / 2)
        .detail_f64("worst_s", worst.0)
        .detail_f64("worst_t", worst.1)];

    let other = match config.fbm.method {
        FbmMethod::CirculantEmbedding => FbmMethod::Cholesky,
        FbmMethod::Cholesky => FbmMethod::CirculantEmbedding,
    };
    let alt = sampler_with(config, domain::ALTERNATE, other)?;
    let ends_main: Vec<f64> = rows.iter().map(|(v, _)| *v.last().unwrap()).collect();
    let ends_alt = map_paths(&alt, 0, m, |_, p| Ok(p.last()))?;
    let name = "ks_circulant_vs_cholesky";
    claims.push(
        match ks_critical_value(ends_main.len(), ends_alt.len(), KS_LEVEL) {
            Ok(crit) => Claim::le(name, distributional_distance(&ends_main, &ends_alt)?, crit)
                .detail_f64("level", KS_LEVEL)
                .detail("samples_per_side", m),
            Err(e) => Claim::not_applicable(name, distributional_distance(&ends_main, &ends_alt)?)
                .detail("reason", e),
        },
    );
    let paths = rows.into_iter().filter_map(|(_, p)| p).collect();
    Ok((claims, paths))
}

/// Solves, mapping a failed implicit step (no positive root) to `None`.
fn solve_positive(
    x0: f64,
    drift: &DriftSpec,
    driver: &SamplePath,
    cfg: &SolveConfig,
) -> Result<Option<SamplePath>, CliError> {
    match solve_pathwise(x0, drift, driver, cfg) {
        Ok(p) => Ok(Some(p)),
        Err(Error::NonConvergence { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn sup_abs_diff(a: &SamplePath, b: &SamplePath) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn simulate(config: &ExperimentConfig) -> Outcome {
    let drift = build_drift(config);
    let sc = solve_config(config);
    let x0 = config.drift.x0;
    let horizon = config.fbm.horizon;
    let mut claims = Vec::new();

    let n_cf = config.simulate.closed_form_steps;
    let zero = SamplePath::from_fn(horizon, n_cf, |_| 0.0)?;
    let xs = solve_pathwise(x0, &drift, &zero, &sc)?;
    let cf_err = xs
        .times()
        .iter()
        .zip(xs.values())
        .map(|(&t, &x)| (x - zero_driver_solution(config, t)).abs())
        .fold(0.0, f64::max);
    let dt_cf = horizon / n_cf as f64;
    claims.push(
        Claim::le("closed_form_error", cf_err, 10.0 * dt_cf)
            .detail("steps", n_cf)
            .detail_f64("dt", dt_cf),
    );

    let main = sampler(config, domain::MAIN)?;
    let runs = map_paths(
        &main,
        0,
        config.n_paths as u64,
        |i, p| match solve_pathwise_traced(x0, &drift, &p, &sc) {
            Ok(tr) => {
                let min = tr.path.values().iter().copied().fold(f64::INFINITY, f64::min);
                Ok((
                    Some((min, tr.max_step_residual)),
                    keep_for_csv(config, i).then_some(tr.path),
                ))
            }
            Err(Error::NonConvergence { .. }) => Ok((None, None)),
            Err(e) => Err(e),
        },
    )?;
    let solved: Vec<(f64, f64)> = runs.iter().filter_map(|r| r.0).collect();
    let positive = solved.iter().filter(|(min, _)| *min > 0.0).count();
    let min_value = solved.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let max_residual = solved.iter().map(|r| r.1).fold(0.0, f64::max);
    claims.push(
        Claim::ge("positive_fraction", positive as f64 / config.n_paths as f64, 1.0)
            .detail("paths", config.n_paths)
            .detail("unsolved", config.n_paths - solved.len())
            .detail_f64("min_value", min_value),
    );
    claims.push(Claim::le(
        "max_step_residual",
        max_residual,
        config.solver.newton_tol,
    ));

    claims.extend(convergence(config, &drift, &sc)?);
    claims.push(comparison(config, &drift, &sc)?);
    let paths = runs.into_iter().filter_map(|r| r.1).collect();
    Ok((claims, paths))
}

/// Step-halving study on drivers refined by factors 1, 2, 4.
fn convergence(
    config: &ExperimentConfig,
    drift: &DriftSpec,
    sc: &SolveConfig,
) -> Result<Vec<Claim>, CliError> {
    let x0 = config.drift.x0;
    let names = ["self_convergence_ratio", "defect_ratio"];
    if !config.fbm.n_steps.is_multiple_of(4) {
        return Ok(names
            .iter()
            .map(|n| Claim::not_applicable(*n, f64::NAN).detail("reason", "n_steps not divisible by 4"))
            .collect());
    }
    let s = sampler(config, domain::CONVERGENCE)?;
    let rows = map_paths(&s, 0, config.simulate.convergence_paths as u64, |_, p| {
        let d2 = p.subsample(2)?;
        let d4 = p.subsample(4)?;
        let (Some(x1), Some(x2), Some(x4)) = (
            solve_positive(x0, drift, &p, sc).map_err(to_core)?,
            solve_positive(x0, drift, &d2, sc).map_err(to_core)?,
            solve_positive(x0, drift, &d4, sc).map_err(to_core)?,
        ) else {
            return Ok(None);
        };
        let e_coarse = sup_abs_diff(&x4, &x2.subsample(2)?);
        let e_fine = sup_abs_diff(&x2, &x1.subsample(2)?);
        let defect_coarse = residual_defect(&x2, drift, &d2)?;
        let defect_fine = residual_defect(&x1, drift, &p)?;
        Ok(Some((e_coarse, e_fine, defect_coarse, defect_fine)))
    })?;
    let ok: Vec<_> = rows.iter().flatten().collect();
    let total = |f: fn(&(f64, f64, f64, f64)) -> f64| ok.iter().map(|r| f(r)).sum::<f64>();
    let ratio = total(|r| r.0) / total(|r| r.1);
    let defect_ratio = total(|r| r.2) / total(|r| r.3);
    Ok(vec![
        Claim::within(names[0], ratio, 2.0, 0.2)
            .detail("paths", ok.len())
            .detail_f64("observed_order", ratio.log2()),
        Claim::within(names[1], defect_ratio, 2.0, 0.2).detail("paths", ok.len()),
    ])
}

fn to_core(e: CliError) -> Error {
    match e {
        CliError::Core(e) => e,
        other => Error::Degenerate(other.to_string()),
    }
}

/// Counts violations of `0 <= x'_t - x_t <= x0' - x0` and of monotonicity of the gap.
fn comparison(config: &ExperimentConfig, drift: &DriftSpec, sc: &SolveConfig) -> Result<Claim, CliError> {
    let x0 = config.drift.x0;
    let x0p = x0 + config.simulate.comparison_dx;
    let gap0 = x0p - x0;
    let s = sampler(config, domain::COMPARISON)?;
    let rows = map_paths(&s, 0, config.simulate.comparison_paths as u64, |_, p| {
        let (Some(x), Some(xp)) = (
            solve_positive(x0, drift, &p, sc).map_err(to_core)?,
            solve_positive(x0p, drift, &p, sc).map_err(to_core)?,
        ) else {
            return Ok(None);
        };
        let gaps: Vec<f64> = xp.values().iter().zip(x.values()).map(|(a, b)| a - b).collect();
        let bounds = gaps.iter().filter(|&&g| !(0.0..=gap0).contains(&g)).count();
        let monotone = gaps.windows(2).filter(|w| w[1] > w[0]).count();
        Ok(Some(bounds + monotone))
    })?;
    let violations: usize = rows.iter().flatten().sum();
    Ok(Claim::le("comparison_violations", violations as f64, 0.0)
        .detail("paths", rows.len())
        .detail("unsolved", rows.iter().filter(|r| r.is_none()).count())
        .detail_f64("x0_gap", gap0))
}

fn verify_bound(config: &ExperimentConfig) -> Outcome {
    let drift = build_drift(config);
    let sc = solve_config(config);
    let (h, horizon, x0) = (config.fbm.hurst, config.fbm.horizon, config.drift.x0);
    let (beta, gamma) = (config.bound.beta, config.bound.gamma);
    let lattice = Lattice::standard(horizon, LATTICE_X_MAX);
    let assumptions = check_drift_assumptions(&drift, h, beta, &lattice);
    let held = [assumptions.i, assumptions.ii, assumptions.iii];
    let mut a_claim = Claim::ge(
        "assumptions_hold",
        held.iter().filter(|&&b| b).count() as f64,
        3.0,
    )
    .detail("i", assumptions.i)
    .detail("ii", assumptions.ii)
    .detail("iii", assumptions.iii);
    for (n, d) in assumptions.details.iter().enumerate() {
        a_claim = a_claim.detail(&format!("note_{n}"), d);
    }
    let mut claims = vec![a_claim];

    let k_t = drift.upper_envelope_sup(horizon);
    let c_ibp = assemble_c_ibp(beta, gamma)?;
    let params = BoundParams::new(gamma, beta, horizon, k_t)?;
    let main = sampler(config, domain::MAIN)?;
    let pairs = map_paths(&main, 0, config.n_paths as u64, |_, p| {
        Ok(solve_pathwise(x0, &drift, &p, &sc)?.with_holder_hint(beta)).map(|x| (x, p))
    })?;
    let report = check_path_bound(&pairs, &params)?;
    let margin = report
        .entries
        .iter()
        .map(|e| e.sup_norm.ln() - e.log_bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let pf = Claim::ge("path_bound_pass_fraction", report.pass_fraction, 1.0)
        .detail("paths", report.entries.len())
        .detail_f64("max_log_margin", margin)
        .detail_f64("k_t", k_t)
        .detail_f64("c_ibp", c_ibp.value)
        .detail_f64("ibp_order", c_ibp.order);
    claims.push(if assumptions.all_pass() {
        pf
    } else {
        Claim::not_applicable(pf.name.clone(), pf.value).detail("reason", "drift assumptions do not hold")
    });

    let slope = bound_growth_slope(x0, &params, &config.bound.growth_norms)?;
    let target = gamma / (beta * (gamma - 1.0));
    claims.push(
        Claim::within("bound_growth_slope", slope, target, 0.1 * target)
            .detail_f64("relative_tolerance", 0.1),
    );
    let paths = pairs.into_iter().take(config.csv_paths).map(|(x, _)| x).collect();
    Ok((claims, paths))
}

fn neg_moments(config: &ExperimentConfig) -> Outcome {
    if config.drift.family != DriftName::Reciprocal {
        return Err(CliError::Invalid {
            key: "drift.family".into(),
            line: None,
            message: format!(
                "neg-moments needs the reciprocal drift, got {}",
                config.drift.family
            ),
        });
    }
    let drift = build_drift(config);
    let sc = solve_config(config);
    let (h, k, x0) = (config.fbm.hurst, config.drift.k, config.drift.x0);
    let main = sampler(config, domain::MAIN)?;
    let rows = map_paths(&main, 0, config.n_paths as u64, |i, p| {
        let x = solve_pathwise(x0, &drift, &p, &sc)?;
        // linear interpolation between grid times
        let at: Vec<f64> = config.neg_moments.iter().map(|&(_, t)| x.value_at(t)).collect();
        Ok((at, keep_for_csv(config, i).then_some(x)))
    })?;
    let mut claims = Vec::new();
    for (col, &(p, t)) in config.neg_moments.iter().enumerate() {
        let values: Vec<f64> = rows.iter().map(|r| r.0[col]).collect();
        let r = negative_moment_report(&values, k, h, x0, p, t)?;
        let name = format!("neg_moment_p{p}_t{t}");
        let claim = match (r.outcome, r.claim_bound) {
            (MomentOutcome::NotApplicable, _) | (_, None) => Claim::not_applicable(name, r.estimate),
            (_, Some(b)) => Claim::check(name, r.estimate, Relation::Le, b, 3.0 * r.std_error),
        };
        let claim = claim
            .detail_f64("std_error", r.std_error)
            .detail("paths", r.n_paths);
        claims.push(if p >= 1.0 {
            claim.detail_f64("threshold", negative_moment_threshold(k, p, h)?)
        } else {
            claim
        });
    }
    let paths = rows.into_iter().filter_map(|r| r.1).collect();
    Ok((claims, paths))
}

fn moments(config: &ExperimentConfig) -> Outcome {
    let drift = build_drift(config);
    let sc = solve_config(config);
    let main = sampler(config, domain::MAIN)?;
    let horizon = config.fbm.horizon;
    let rows = map_paths(&main, 0, config.n_paths as u64, |i, p| {
        let x = solve_pathwise(config.drift.x0, &drift, &p, &sc)?;
        Ok((sup_norm(&x, 0.0, horizon)?, keep_for_csv(config, i).then_some(x)))
    })?;
    let sups: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let report = moment_stability_from_sups(&sups, &config.moment_orders)?;
    let claims = report
        .entries
        .iter()
        .map(|e| {
            let bound = 5.0 * e.first_se.hypot(e.second_se);
            Claim::le(
                format!("moment_stability_p{}", e.order),
                (e.first_half - e.second_half).abs(),
                bound,
            )
            .detail_f64("first_half", e.first_half)
            .detail_f64("second_half", e.second_half)
        })
        .collect();
    Ok((claims, rows.into_iter().filter_map(|r| r.1).collect()))
}

fn scaling(config: &ExperimentConfig) -> Outcome {
    let drift = build_drift(config);
    let sc = solve_config(config);
    let (h, x0) = (config.fbm.hurst, config.drift.x0);
    let (a, t) = (config.scaling.a, config.scaling.t);
    let (x0_scaled, drift_scaled, spec) = scaling_transform(&drift, a, h, x0)?;
    let m = config.n_paths as u64;

    let side_a = sampler(config, domain::MAIN)?;
    let i_ta = grid_index(&side_a, t / a);
    let i_t = grid_index(&side_a, t);
    let rows = map_paths(&side_a, 0, m, |i, p| {
        let x = solve_pathwise(x0, &drift, &p, &sc)?;
        Ok((a.powf(h) * x.values()[i_ta], keep_for_csv(config, i).then_some(x)))
    })?;
    let side_b = sampler(config, domain::SCALED)?;
    let scaled = map_paths(&side_b, 0, m, |_, p| {
        Ok(solve_pathwise(x0_scaled, &drift_scaled, &p, &sc)?.values()[i_t])
    })?;
    let lhs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let d = distributional_distance(&lhs, &scaled)?;
    let crit = ks_critical_value(lhs.len(), scaled.len(), KS_LEVEL)?;
    let mut claims = vec![Claim::le("scaling_ks", d, crit)
        .detail_f64("level", KS_LEVEL)
        .detail("samples_per_side", m)
        .detail_f64("scaled_x0", x0_scaled)];
    let exp = Claim::info("scaling_exponent", spec.exponent);
    let exp = if config.drift.family == DriftName::Bessel {
        Claim::within("scaling_exponent", spec.exponent, 0.0, 0.0)
    } else {
        exp
    };
    claims.push(exp.detail_f64("m", spec.m).detail_f64("n", spec.n_hom));
    Ok((claims, rows.into_iter().filter_map(|r| r.1).collect()))
}

fn malliavin(config: &ExperimentConfig) -> Outcome {
    let drift = build_drift(config);
    let sc = solve_config(config);
    let (h, x0) = (config.fbm.hurst, config.drift.x0);
    let mc = &config.malliavin;
    let phi = StepFunction::indicator(0.0, mc.tau)?;
    let tol = FdTolerance {
        abs_tol: mc.abs_tol,
        rel_tol: mc.rel_tol,
    };
    let main = sampler(config, domain::MAIN)?;
    let it = grid_index(&main, mc.t);
    let rows = map_paths(&main, 0, config.n_paths as u64, |i, p| {
        let r = derivative_report(x0, &drift, &p, mc.t, &phi, h, &mc.eps, &sc, tol)?;
        let x = solve_pathwise(x0, &drift, &p, &sc)?;
        Ok((r, x.values()[it], keep_for_csv(config, i).then_some(x)))
    })?;
    let n = rows.len() as f64;
    let passed = rows.iter().filter(|r| r.0.pass).count();
    let worst = rows
        .iter()
        .map(|r| (r.0.analytic_value - r.0.extrapolated_fd).abs() / r.0.tolerance)
        .fold(0.0, f64::max);
    let norms: Vec<f64> = rows.iter().map(|r| r.0.norm_sq_h).collect();
    let min_norm = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let cap = mc.t.powf(2.0 * h);
    let mut claims = vec![
        Claim::ge("fd_agreement_fraction", passed as f64 / n, 1.0)
            .detail("paths", rows.len())
            .detail_f64("worst_error_over_tolerance", worst),
        Claim::check("min_norm_sq", min_norm, Relation::Ge, f64::MIN_POSITIVE, 0.0),
        Claim::check("max_norm_sq", max_norm, Relation::Le, cap, 1e-12 * cap).detail_f64("t_pow_2h", cap),
    ];

    let zero = DriftSpec::zero();
    let flat = SamplePath::from_fn(config.fbm.horizon, config.fbm.n_steps, |_| 0.0)?;
    let x_flat = solve_pathwise(x0, &zero, &flat, &sc)?;
    let indicator = directional_derivative_analytic(&x_flat, &zero, mc.t, &phi, h)?;
    let r_h = hurst_covariance(mc.t, mc.tau, h)?;
    claims.push(Claim::within("zero_drift_indicator", indicator, r_h, 1e-4).detail_f64("r_h", r_h));

    let xt: Vec<f64> = rows.iter().map(|r| r.1).collect();
    claims.push(Claim::le("max_atom_mass", max_atom_mass(&xt), 1.0 / n));
    Ok((claims, rows.into_iter().filter_map(|r| r.2).collect()))
}

/// Smooth driver of the CIR integral-equation residual check.
fn residual_driver(t: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * t).sin() + 0.25 * t * t
}

fn cir(config: &ExperimentConfig) -> Outcome {
    let f = build_cir_drift(config);
    let sc = solve_config(config);
    let (horizon, n) = (config.fbm.horizon, config.fbm.n_steps);
    let y0 = config.cir.y0;
    let cond = check_cir_conditions(&f, &Lattice::standard(horizon, LATTICE_X_MAX));
    let held = [cond.a, cond.b, cond.c];
    let mut c_claim = Claim::ge("cir_conditions", held.iter().filter(|&&b| b).count() as f64, 3.0)
        .detail("a", cond.a)
        .detail("b", cond.b)
        .detail("c", cond.c);
    for (i, d) in cond.details.iter().enumerate() {
        c_claim = c_claim.detail(&format!("note_{i}"), d);
    }
    let mut claims = vec![c_claim];

    let main = sampler(config, domain::MAIN)?;
    let rows = map_paths(&main, 0, config.n_paths as u64, |i, p| {
        match solve_cir(y0, &f, &p, &sc) {
            Ok(y) => {
                let min = y.values().iter().copied().fold(f64::INFINITY, f64::min);
                Ok((Some(min), keep_for_csv(config, i).then_some(y)))
            }
            Err(Error::NonConvergence { .. }) => Ok((None, None)),
            Err(e) => Err(e),
        }
    })?;
    let mins: Vec<f64> = rows.iter().filter_map(|r| r.0).collect();
    let positive = mins.iter().filter(|&&m| m > 0.0).count();
    claims.push(
        Claim::ge("positive_fraction", positive as f64 / config.n_paths as f64, 1.0)
            .detail("paths", config.n_paths)
            .detail("unsolved", config.n_paths - mins.len())
            .detail_f64("min_value", mins.iter().copied().fold(f64::INFINITY, f64::min)),
    );

    let phi = SamplePath::from_fn(horizon, n, residual_driver)?;
    let y = solve_cir(y0, &f, &phi, &sc)?;
    let sqrt_y = y.map(f64::sqrt);
    let order = IbpOrder::new(0.5)?;
    let dt = y.dt();
    let fv: Vec<f64> = y
        .times()
        .iter()
        .zip(y.values())
        .map(|(&t, &v)| f.value(t, v))
        .collect();
    let mut drift_int = vec![0.0; n + 1];
    for i in 1..=n {
        drift_int[i] = drift_int[i - 1] + 0.5 * dt * (fv[i - 1] + fv[i]);
    }
    let points = config.cir.residual_points.min(n);
    let mut worst: f64 = 0.0;
    for k in 1..=points {
        let i = (k * n).div_ceil(points);
        let t = y.times()[i];
        let young = young_integral(&sqrt_y, &phi, 0.0, t, order)?;
        worst = worst.max((y.values()[i] - y0 - drift_int[i] - young).abs());
    }
    claims.push(
        Claim::le("young_residual", worst, config.cir.residual_tol)
            .detail("points", points)
            .detail_f64("dt", dt),
    );
    Ok((claims, rows.into_iter().filter_map(|r| r.1).collect()))
}

/// Index of a grid time (validated by the configuration).
fn grid_index(sampler: &FbmSampler, t: f64) -> usize {
    (t / sampler.spec().dt()).round() as usize
}
