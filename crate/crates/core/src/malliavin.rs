//! Malliavin derivative of the solution: the kernel
//! `D_s X_t = exp(∫_s^t ∂ₓf(r, X_r) dr) 1_[0,t](s)`, its `H`-norm, and
//! finite-difference validation of directional derivatives along
//! Cameron–Martin directions.

use log::warn;
use rayon::prelude::*;

use crate::error::{check_hurst_long_memory, domain, Result};
use crate::fbm::{embed_direction, increment_covariance};
use crate::path::{SamplePath, StepFunction};
use crate::solver::{solve_pathwise, DriftSpec, SolveConfig};

/// Running trapezoid `P_j = ∫_0^{t_j} ∂ₓf(r, X_r) dr` along the solution.
fn log_kernel_prefix(solution: &SamplePath, drift: &DriftSpec) -> Vec<f64> {
    let t = solution.times();
    let x = solution.values();
    let mut d: Vec<f64> = t.iter().zip(x).map(|(&t, &x)| drift.dx(t, x)).collect();
    if !d[0].is_finite() && d.len() > 1 {
        d[0] = drift.dx(t[1], x[0]);
    }
    let half = 0.5 * solution.dt();
    let mut prefix = Vec::with_capacity(d.len());
    let mut acc = 0.0;
    prefix.push(0.0);
    for w in d.windows(2) {
        acc += half * (w[0] + w[1]);
        prefix.push(acc);
    }
    prefix
}

/// `D_s X_t` for grid times `s <= t`.
pub fn malliavin_kernel(solution: &SamplePath, drift: &DriftSpec, s: f64, t: f64) -> Result<f64> {
    if s > t {
        return domain(format!("kernel needs s <= t, got s = {s}, t = {t}"));
    }
    let (i, j) = (solution.index_of(s)?, solution.index_of(t)?);
    let p = log_kernel_prefix(solution, drift);
    Ok((p[j] - p[i]).exp())
}

/// `D_{t_j} X_t` for every grid time `t_j <= t`.
pub fn kernel_profile(solution: &SamplePath, drift: &DriftSpec, t: f64) -> Result<Vec<f64>> {
    let j = solution.index_of(t)?;
    let p = log_kernel_prefix(solution, drift);
    Ok(p[..=j].iter().map(|&q| (p[j] - q).exp()).collect())
}

/// Cell averages of the kernel on `[t_j, t_{j+1}]`, `t_{j+1} <= t`.
fn cell_kernel(solution: &SamplePath, drift: &DriftSpec, t: f64) -> Result<Vec<f64>> {
    let k = kernel_profile(solution, drift, t)?;
    Ok(k.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect())
}

/// `‖D X_t‖²_H`, with the kernel constant on grid cells and the exact
/// rectangle weights of `|s - u|^{2H-2}`.
pub fn dxt_norm_sq(solution: &SamplePath, drift: &DriftSpec, t: f64, hurst: f64) -> Result<f64> {
    check_hurst_long_memory(hurst)?;
    let k = cell_kernel(solution, drift, t)?;
    let dt = solution.dt();
    let n = k.len();
    // weight between cells j and l depends on |j - l| only
    let w: Vec<f64> = (0..n)
        .map(|m| increment_covariance(0.0, dt, m as f64 * dt, (m + 1) as f64 * dt, hurst))
        .collect();
    let total = (0..n)
        .into_par_iter()
        .map(|j| {
            let row: f64 = (0..n).map(|l| w[j.abs_diff(l)] * k[l]).sum();
            k[j] * row
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok(total)
}

/// `⟨D X_t, φ⟩_H = α_H ∫∫ φ(s) D_u X_t |s - u|^{2H-2} du ds`.
pub fn directional_derivative_analytic(
    solution: &SamplePath,
    drift: &DriftSpec,
    t: f64,
    phi: &StepFunction,
    hurst: f64,
) -> Result<f64> {
    check_hurst_long_memory(hurst)?;
    phi.check_within(solution.horizon())?;
    let k = cell_kernel(solution, drift, t)?;
    let times = solution.times();
    let mut acc = 0.0;
    for (a, b, level) in phi.pieces() {
        let inner: f64 = k
            .iter()
            .enumerate()
            .map(|(j, kj)| kj * increment_covariance(a, b, times[j], times[j + 1], hurst))
            .sum();
        acc += level * inner;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    /// `(ε, (X^ε_t - X_t) / ε)` in the order of the supplied `ε` list.
    pub fd_values: Vec<(f64, f64)>,
    pub extrapolated: f64,
    /// Whether the quotients behaved like `D + c ε`; when false the
    /// smallest-`ε` quotient is reported instead of the extrapolation.
    pub first_order: bool,
}

/// Differences of the quotients at or below this size (relative) count as converged.
const FD_FLAT: f64 = 1e-10;

/// Difference quotients of the solution at `t` under the perturbed driver
/// `φ + ε h`, `h` the Cameron–Martin image of `phi`, and their first-order
/// Richardson extrapolation to `ε = 0`.
#[allow(clippy::too_many_arguments)]
pub fn directional_derivative_fd(
    x0: f64,
    drift: &DriftSpec,
    driver: &SamplePath,
    t: f64,
    phi: &StepFunction,
    hurst: f64,
    eps_list: &[f64],
    config: &SolveConfig,
) -> Result<FdEstimate> {
    if eps_list.len() < 2 {
        return domain("need at least two perturbation sizes");
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return domain(format!(
            "perturbation sizes must be positive and decreasing: {eps_list:?}"
        ));
    }
    let idx = driver.index_of(t)?;
    let h = embed_direction(phi, hurst, driver.times())?;
    let base = solve_pathwise(x0, drift, driver, config)?.values()[idx];
    let fd_values = eps_list
        .par_iter()
        .map(|&eps| -> Result<(f64, f64)> {
            let perturbed = driver.add_scaled(&h, eps)?;
            let x = solve_pathwise(x0, drift, &perturbed, config)?;
            Ok((eps, (x.values()[idx] - base) / eps))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(extrapolate(fd_values))
}

fn extrapolate(fd_values: Vec<(f64, f64)>) -> FdEstimate {
    let n = fd_values.len();
    let (e1, f1) = fd_values[n - 2];
    let (e2, f2) = fd_values[n - 1];
    let scale = fd_values.iter().map(|v| v.1.abs()).fold(1e-300, f64::max);
    let flat = |d: f64| d.abs() <= FD_FLAT * scale;
    let first_order = if n < 3 {
        true
    } else {
        let (e0, f0) = fd_values[n - 3];
        let (d01, d12) = (f0 - f1, f1 - f2);
        if flat(d01) && flat(d12) {
            true
        } else {
            // D + cε predicts (f0 - f1)/(f1 - f2) = (e0 - e1)/(e1 - e2)
            let expected = (e0 - e1) / (e1 - e2);
            let observed = d01 / d12;
            (observed / expected - 1.0).abs() <= 0.25
        }
    };
    let extrapolated = if first_order {
        (e1 * f2 - e2 * f1) / (e1 - e2)
    } else {
        warn!("difference quotients are not first order in ε; reporting smallest-ε value");
        f2
    };
    FdEstimate {
        fd_values,
        extrapolated,
        first_order,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeReport {
    pub t: f64,
    pub analytic_value: f64,
    pub fd_values: Vec<(f64, f64)>,
    pub extrapolated_fd: f64,
    pub norm_sq_h: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Tolerance `max(abs_tol, rel_tol * |analytic|)` for the FD/analytic comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdTolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for FdTolerance {
    fn default() -> Self {
        Self {
            abs_tol: 1e-3,
            rel_tol: 1e-2,
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn derivative_report(
    x0: f64,
    drift: &DriftSpec,
    driver: &SamplePath,
    t: f64,
    phi: &StepFunction,
    hurst: f64,
    eps_list: &[f64],
    config: &SolveConfig,
    tol: FdTolerance,
) -> Result<DerivativeReport> {
    let solution = solve_pathwise(x0, drift, driver, config)?;
    let analytic_value = directional_derivative_analytic(&solution, drift, t, phi, hurst)?;
    let norm_sq_h = dxt_norm_sq(&solution, drift, t, hurst)?;
    let fd = directional_derivative_fd(x0, drift, driver, t, phi, hurst, eps_list, config)?;
    let tolerance = tol.abs_tol.max(tol.rel_tol * analytic_value.abs());
    Ok(DerivativeReport {
        t,
        analytic_value,
        pass: (analytic_value - fd.extrapolated).abs() <= tolerance,
        fd_values: fd.fd_values,
        extrapolated_fd: fd.extrapolated,
        norm_sq_h,
        tolerance,
    })
}

/// Largest jump of the empirical CDF: the mass of the most repeated value.
pub fn max_atom_mass(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let mut best = 1;
    let mut run = 1;
    for w in v.windows(2) {
        if w[0] == w[1] {
            run += 1;
            best = best.max(run);
        } else {
            run = 1;
        }
    }
    best as f64 / v.len() as f64
}
