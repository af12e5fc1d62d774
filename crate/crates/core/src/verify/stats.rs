use crate::error::{domain, Result};

/// Smallest per-sample size for which asymptotic KS critical values are used.
pub const MIN_KS_SAMPLES: usize = 1000;

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_A - F_B|`.
pub fn distributional_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return domain("both samples must be nonempty");
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return domain("samples contain NaN");
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(d)
}

/// Asymptotic critical value `sqrt(-ln(level/2)/2) sqrt((n+m)/(nm))`
/// (`1.628 sqrt((n+m)/(nm))` at level 0.01).
pub fn ks_critical_value(n: usize, m: usize, level: f64) -> Result<f64> {
    if n < MIN_KS_SAMPLES || m < MIN_KS_SAMPLES {
        return domain(format!(
            "asymptotic KS critical values need at least {MIN_KS_SAMPLES} samples per side, got {n} and {m}"
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return domain(format!("significance level must lie in (0, 1), got {level}"));
    }
    let c = (-(0.5 * level).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    Ok(c * ((n + m) / (n * m)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn extremes() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(distributional_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(distributional_distance(&a, &[10.0, 11.0]).unwrap(), 1.0);
        assert!(distributional_distance(&a, &[]).is_err());
    }

    #[test]
    fn critical_value() {
        let c = ks_critical_value(5000, 5000, 0.01).unwrap();
        assert!((c - 1.628 * (2.0f64 / 5000.0).sqrt()).abs() < 1e-4);
        assert!(ks_critical_value(999, 5000, 0.01).is_err());
    }

    #[test]
    fn same_law_batches() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
            (0..5000).map(|_| StandardNormal.sample(rng)).collect()
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let d = distributional_distance(&a, &b).unwrap();
        assert!(d < ks_critical_value(5000, 5000, 0.01).unwrap());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            a in proptest::collection::vec(-5.0f64..5.0, 1..50),
            b in proptest::collection::vec(-5.0f64..5.0, 1..50),
        ) {
            let d = distributional_distance(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, distributional_distance(&b, &a).unwrap());
        }
    }
}
