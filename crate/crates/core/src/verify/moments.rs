//! Negative moments `E[X_t^{-p}] <= x0^{-p}` for the reciprocal drift on its
//! time window, and a half-batch stability proxy for `E[‖X‖_∞^p] < ∞`.

use crate::error::{domain, Result};
use crate::fraccalc::sup_norm;
use crate::mc::mean_and_se;
use crate::path::SamplePath;

/// `(K / ((p + 1) H))^{1/(2H - 1)}`: the negative-moment claim holds for `t` up to this.
pub fn negative_moment_threshold(k: f64, p: f64, hurst: f64) -> Result<f64> {
    if !(k > 0.0) {
        return domain(format!("K must be positive, got {k}"));
    }
    if !(p >= 1.0) {
        return domain(format!("moment order must be at least 1, got {p}"));
    }
    if !(hurst > 0.5 && hurst < 1.0) {
        return domain(format!("Hurst parameter must lie in (1/2, 1), got {hurst}"));
    }
    Ok((k / ((p + 1.0) * hurst)).powf(1.0 / (2.0 * hurst - 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOutcome {
    Pass,
    Fail,
    /// `t` lies beyond the threshold, where no claim is made.
    NotApplicable,
}

impl std::fmt::Display for MomentOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotApplicable => "not_applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub t: f64,
    pub order: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub claim_bound: Option<f64>,
    pub outcome: MomentOutcome,
    pub pass: bool,
}

/// Estimate of `E[X_t^{-p}]` from solutions of the equation with drift `K/x`.
pub fn check_negative_moments(
    paths: &[SamplePath],
    k: f64,
    hurst: f64,
    x0: f64,
    p: f64,
    t: f64,
) -> Result<MomentReport> {
    let values = paths
        .iter()
        .map(|x| x.index_of(t).map(|i| x.values()[i]))
        .collect::<Result<Vec<_>>>()?;
    negative_moment_report(&values, k, hurst, x0, p, t)
}

/// As [`check_negative_moments`], from the values `X_t` directly.
pub fn negative_moment_report(
    values_at_t: &[f64],
    k: f64,
    hurst: f64,
    x0: f64,
    p: f64,
    t: f64,
) -> Result<MomentReport> {
    if values_at_t.is_empty() {
        return domain("no samples");
    }
    let (estimate, std_error) = if p == 0.0 {
        (1.0, 0.0)
    } else {
        let powered: Vec<f64> = values_at_t.iter().map(|x| x.powf(-p)).collect();
        mean_and_se(&powered)
    };
    let applicable = p == 0.0 || t <= negative_moment_threshold(k, p, hurst)?;
    let (claim_bound, outcome) = if applicable {
        let claim = x0.powf(-p);
        let ok = estimate <= claim + 3.0 * std_error;
        (
            Some(claim),
            if ok {
                MomentOutcome::Pass
            } else {
                MomentOutcome::Fail
            },
        )
    } else {
        (None, MomentOutcome::NotApplicable)
    };
    Ok(MomentReport {
        t,
        order: p,
        estimate,
        std_error,
        n_paths: values_at_t.len(),
        claim_bound,
        pass: outcome == MomentOutcome::Pass,
        outcome,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityEntry {
    pub order: f64,
    pub first_half: f64,
    pub first_se: f64,
    pub second_half: f64,
    pub second_se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    pub pass: bool,
}

/// Half-batch estimates of `E[‖X‖_{0,T,∞}^p]`; passes when the halves differ
/// by at most 5 standard errors of their difference.
pub fn empirical_moment_stability(paths: &[SamplePath], orders: &[f64]) -> Result<StabilityReport> {
    let sups = paths
        .iter()
        .map(|x| sup_norm(x, 0.0, x.horizon()))
        .collect::<Result<Vec<_>>>()?;
    moment_stability_from_sups(&sups, orders)
}

pub fn moment_stability_from_sups(sups: &[f64], orders: &[f64]) -> Result<StabilityReport> {
    if sups.len() < 4 {
        return domain(format!("need at least 4 paths, got {}", sups.len()));
    }
    let (a, b) = sups.split_at(sups.len() / 2);
    let entries: Vec<StabilityEntry> = orders
        .iter()
        .map(|&p| {
            let pow = |v: &[f64]| -> Vec<f64> { v.iter().map(|s| s.powf(p)).collect() };
            let (m1, s1) = mean_and_se(&pow(a));
            let (m2, s2) = mean_and_se(&pow(b));
            StabilityEntry {
                order: p,
                first_half: m1,
                first_se: s1,
                second_half: m2,
                second_se: s2,
                pass: (m1 - m2).abs() <= 5.0 * s1.hypot(s2),
            }
        })
        .collect();
    let pass = entries.iter().all(|e| e.pass);
    Ok(StabilityReport { entries, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_values() {
        assert!((negative_moment_threshold(1.0, 1.0, 0.75).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!((negative_moment_threshold(2.0 * 0.7, 1.0, 0.7).unwrap() - 1.0).abs() < 1e-15);
        let t = |k, p| negative_moment_threshold(k, p, 0.8).unwrap();
        assert!(t(2.0, 1.0) > t(1.0, 1.0));
        assert!(t(1.0, 2.0) < t(1.0, 1.0));
        assert!(negative_moment_threshold(1.0, 0.5, 0.75).is_err());
        assert!(negative_moment_threshold(0.0, 1.0, 0.75).is_err());
    }

    #[test]
    fn report_outcomes() {
        let v = [0.9, 1.1, 1.2, 1.3];
        let r = negative_moment_report(&v, 1.0, 0.75, 1.0, 0.0, 0.3).unwrap();
        assert_eq!(
            (r.estimate, r.std_error, r.outcome),
            (1.0, 0.0, MomentOutcome::Pass)
        );
        let r = negative_moment_report(&v, 1.0, 0.75, 1.0, 1.0, 0.6).unwrap();
        assert_eq!(r.outcome, MomentOutcome::NotApplicable);
        assert!(!r.pass && r.claim_bound.is_none());
        let r = negative_moment_report(&[0.1; 8], 1.0, 0.75, 1.0, 1.0, 0.2).unwrap();
        assert_eq!(r.outcome, MomentOutcome::Fail);
    }

    #[test]
    fn stability_trivial_cases() {
        let sups = [2.0; 10];
        let r = moment_stability_from_sups(&sups, &[0.0, 1.0, 8.0]).unwrap();
        assert!(r.pass);
        for e in &r.entries {
            assert_eq!(e.first_se, 0.0);
            assert_eq!(e.first_half, e.second_half);
        }
        assert_eq!(r.entries[0].first_half, 1.0);
    }
}
