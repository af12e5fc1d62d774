//! Self-similarity: if `f(st, yx) = s^m y^n f(t, x)`, then `a^H X_{t/a}` has the
//! law of the solution started at `a^H x0` with drift `a^{H - nH - m - 1} f`.

use crate::error::{domain, Error, Result};
use crate::solver::DriftSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSpec {
    pub a: f64,
    pub m: f64,
    pub n_hom: f64,
    pub exponent: f64,
}

/// `H - n H - m - 1`.
pub fn scaling_exponent(m: f64, n_hom: f64, hurst: f64) -> f64 {
    hurst - n_hom * hurst - m - 1.0
}

const FACTORS: [f64; 4] = [0.25, 0.5, 2.0, 3.0];
const TIMES: [f64; 4] = [0.1, 0.3, 0.7, 1.0];
const XS: [f64; 5] = [0.05, 0.3, 1.0, 2.5, 10.0];

/// Checks `f(st, yx) = s^m y^n f(t, x)` on a fixed lattice to relative 1e-10.
pub fn check_homogeneity(drift: &DriftSpec, m: f64, n: f64) -> Result<()> {
    for &s in &FACTORS {
        for &y in &FACTORS {
            for &t in &TIMES {
                for &x in &XS {
                    let lhs = drift.value(s * t, y * x);
                    let rhs = s.powf(m) * y.powf(n) * drift.value(t, x);
                    if !((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300)) {
                        return Err(Error::HomogeneityViolation {
                            m,
                            n,
                            detail: format!(
                                "f({}, {}) = {lhs} but s^m y^n f({t}, {x}) = {rhs}",
                                s * t,
                                y * x
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Returns `(a^H x0, a^{H - nH - m - 1} f, spec)`.
pub fn scaling_transform(
    drift: &DriftSpec,
    a: f64,
    hurst: f64,
    x0: f64,
) -> Result<(f64, DriftSpec, ScalingSpec)> {
    if !(a > 0.0) {
        return domain(format!("scale factor must be positive, got {a}"));
    }
    let (m, n_hom) = drift.homogeneity().ok_or_else(|| Error::HomogeneityViolation {
        m: f64::NAN,
        n: f64::NAN,
        detail: format!("{} declares no homogeneity degrees", drift.describe()),
    })?;
    check_homogeneity(drift, m, n_hom)?;
    let exponent = scaling_exponent(m, n_hom, hurst);
    Ok((
        a.powf(hurst) * x0,
        drift.scaled(a.powf(exponent)),
        ScalingSpec {
            a,
            m,
            n_hom,
            exponent,
        },
    ))
}
