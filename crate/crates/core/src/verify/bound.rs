//! Explicit form of the sup-norm bound
//! `‖x‖_∞ <= (2^n (x0^γ + C))^{1/γ}`, `n = ⌊T/Δ⌋ + 1`, `C = 8 K_T γ T + 4 T^β`,
//! with `Δ` chosen from the Hölder norm of the driver.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use statrs::function::beta::beta as beta_fn;
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{domain, Result};
use crate::fraccalc::{holder_seminorm, sup_norm, IbpOrder};
use crate::path::SamplePath;

/// `r` rounded to the nearest integer when within 1e-9 of it, so that ratios
/// like `1.2 / 0.2` are not pushed past an integer by rounding.
fn snap(r: f64) -> f64 {
    if (r - r.round()).abs() < 1e-9 {
        r.round()
    } else {
        r
    }
}

/// Smallest integer `γ >= 3` for which the integration-by-parts window
/// `(1 - β, β(1 - 1/γ))` is nonempty, i.e. `γ > β / (2β - 1)`.
pub fn default_bound_gamma(beta: f64) -> f64 {
    let floor = snap(beta / (2.0 * beta - 1.0));
    if 3.0 > floor {
        3.0
    } else {
        floor.floor() + 1.0
    }
}

/// `⌈2β/(2β - 1)⌉ + 1`, the power used with Gaussian tail arguments.
pub fn fernique_gamma(beta: f64) -> f64 {
    snap(2.0 * beta / (2.0 * beta - 1.0)).ceil() + 1.0
}

/// Constant of the Young-integral estimate
/// `|∫ y^{1-1/γ} dφ| <= C ‖φ‖_β (‖y‖_∞^{1-1/γ} (t-s)^β + ‖y‖_β^{1-1/γ} (t-s)^{β(2-1/γ)})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CIbp {
    /// Fractional order `a` of the integration by parts.
    pub order: f64,
    pub value: f64,
}

/// Assembles the constant with `a` at the midpoint of `(1 - β, β(1 - 1/γ))`:
/// `C_r max(B(1-a, a+β) / Γ(1-a), a B(β'-a+1, a+β) / ((β'-a) Γ(1-a)))`,
/// `C_r = (1 + (1-a)/(a+β-1)) / Γ(a)`, `β' = β(1 - 1/γ)`.
pub fn assemble_c_ibp(beta: f64, gamma: f64) -> Result<CIbp> {
    check_beta_gamma(beta, gamma)?;
    let bp = beta * (1.0 - 1.0 / gamma);
    let a = IbpOrder::midpoint(beta, bp)?.value();
    let c_right = (1.0 + (1.0 - a) / (a + beta - 1.0)) / gamma_fn(a);
    let g1 = gamma_fn(1.0 - a);
    let left_sup = beta_fn(1.0 - a, a + beta) / g1;
    let left_holder = a / ((bp - a) * g1) * beta_fn(bp - a + 1.0, a + beta);
    Ok(CIbp {
        order: a,
        value: c_right * left_sup.max(left_holder),
    })
}

fn check_beta_gamma(beta: f64, gamma: f64) -> Result<()> {
    if !(gamma > 2.0) {
        return domain(format!("γ must exceed 2, got {gamma}"));
    }
    if !(beta > 0.5 && beta < 1.0) {
        return domain(format!("β must lie in (1/2, 1), got {beta}"));
    }
    Ok(())
}

/// `Δ = min((2Cγ‖φ‖)^{-γ/(β(γ-1))}, 1/(16 K_T γ), (8Cγ‖φ‖)^{-1/β})`, a
/// branch with zero denominator counting as `+∞`.
pub fn step_size_delta(gamma: f64, beta: f64, k_t: f64, phi_norm: f64, c_ibp: f64) -> Result<f64> {
    check_beta_gamma(beta, gamma)?;
    if !(phi_norm >= 0.0 && k_t >= 0.0 && c_ibp >= 0.0) {
        return domain(format!(
            "need ‖φ‖ >= 0, K_T >= 0, C >= 0; got {phi_norm}, {k_t}, {c_ibp}"
        ));
    }
    let cphi = c_ibp * gamma * phi_norm;
    let branch = |denom: f64, power: f64| {
        if denom > 0.0 {
            denom.recip().powf(power)
        } else {
            f64::INFINITY
        }
    };
    let d = branch(2.0 * cphi, gamma / (beta * (gamma - 1.0)))
        .min(branch(16.0 * k_t * gamma, 1.0))
        .min(branch(8.0 * cphi, 1.0 / beta));
    if d.is_infinite() {
        return domain("step size is unbounded: zero drift bound and zero driver norm");
    }
    Ok(d)
}

/// Parameters shared by every path of an audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub gamma: f64,
    pub beta: f64,
    pub horizon: f64,
    /// `sup_{[0,T]} h`.
    pub k_t: f64,
    pub c_ibp: f64,
}

impl BoundParams {
    /// Uses the assembled constant for `(β, γ)`.
    pub fn new(gamma: f64, beta: f64, horizon: f64, k_t: f64) -> Result<Self> {
        let c = assemble_c_ibp(beta, gamma)?;
        Ok(Self {
            gamma,
            beta,
            horizon,
            k_t,
            c_ibp: c.value,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub gamma: f64,
    pub beta: f64,
    pub k_t: f64,
    pub c_ibp: f64,
    pub delta: f64,
    pub n_intervals: u64,
    pub c_gbt: f64,
}

pub fn bound_constants(params: &BoundParams, phi_norm: f64) -> Result<BoundConstants> {
    let BoundParams {
        gamma,
        beta,
        horizon,
        k_t,
        c_ibp,
    } = *params;
    if !(horizon > 0.0) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    let delta = step_size_delta(gamma, beta, k_t, phi_norm, c_ibp)?;
    let ratio = (horizon / delta).floor();
    if ratio >= u64::MAX as f64 {
        return domain(format!("T/Δ = {ratio} does not fit the interval count"));
    }
    Ok(BoundConstants {
        gamma,
        beta,
        k_t,
        c_ibp,
        delta,
        n_intervals: ratio as u64 + 1,
        c_gbt: 8.0 * k_t * gamma * horizon + 4.0 * horizon.powf(beta),
    })
}

/// `ln` of the bound; the bound itself overflows `f64` for moderate `‖φ‖`.
pub fn supnorm_log_bound(
    x0: f64,
    gamma: f64,
    beta: f64,
    horizon: f64,
    k_t: f64,
    phi_norm: f64,
    c_ibp: f64,
) -> Result<f64> {
    if !(x0 > 0.0) {
        return domain(format!("x0 must be positive, got {x0}"));
    }
    let params = BoundParams {
        gamma,
        beta,
        horizon,
        k_t,
        c_ibp,
    };
    let c = bound_constants(&params, phi_norm)?;
    Ok((c.n_intervals as f64 * LN_2 + (x0.powf(gamma) + c.c_gbt).ln()) / gamma)
}

/// `(2^n (x0^γ + C))^{1/γ}`; may be `+∞` in floating point.
pub fn supnorm_bound(
    x0: f64,
    gamma: f64,
    beta: f64,
    horizon: f64,
    k_t: f64,
    phi_norm: f64,
    c_ibp: f64,
) -> Result<f64> {
    supnorm_log_bound(x0, gamma, beta, horizon, k_t, phi_norm, c_ibp).map(f64::exp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBoundEntry {
    pub phi_norm: f64,
    pub sup_norm: f64,
    pub log_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBoundReport {
    pub entries: Vec<PathBoundEntry>,
    pub pass_fraction: f64,
}

/// Compares `ln ‖x‖_∞` with the log bound for each `(solution, driver)` pair;
/// `‖φ‖` is the grid Hölder seminorm of order `β`.
pub fn check_path_bound(pairs: &[(SamplePath, SamplePath)], params: &BoundParams) -> Result<PathBoundReport> {
    let entries = pairs
        .par_iter()
        .map(|(x, phi)| path_entry(x, phi, params))
        .collect::<Result<Vec<_>>>()?;
    let passed = entries.iter().filter(|e| e.pass).count();
    let pass_fraction = if entries.is_empty() {
        1.0
    } else {
        passed as f64 / entries.len() as f64
    };
    Ok(PathBoundReport {
        entries,
        pass_fraction,
    })
}

/// The entry of [`check_path_bound`] for one path.
pub fn path_entry(x: &SamplePath, phi: &SamplePath, params: &BoundParams) -> Result<PathBoundEntry> {
    x.check_same_grid(phi)?;
    let t = params.horizon.min(x.horizon());
    let phi_norm = holder_seminorm(phi, 0.0, t, params.beta)?;
    let sup = sup_norm(x, 0.0, t)?;
    let log_bound = supnorm_log_bound(
        x.initial(),
        params.gamma,
        params.beta,
        params.horizon,
        params.k_t,
        phi_norm,
        params.c_ibp,
    )?;
    Ok(PathBoundEntry {
        phi_norm,
        sup_norm: sup,
        log_bound,
        pass: sup.ln() <= log_bound,
    })
}

/// Least-squares slope of `ln ln(bound)` against `ln ‖φ‖`.
pub fn bound_growth_slope(x0: f64, params: &BoundParams, phi_norms: &[f64]) -> Result<f64> {
    let pts = phi_norms
        .iter()
        .map(|&p| {
            let lb = supnorm_log_bound(
                x0,
                params.gamma,
                params.beta,
                params.horizon,
                params.k_t,
                p,
                params.c_ibp,
            )?;
            Ok((p.ln(), lb.ln()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
