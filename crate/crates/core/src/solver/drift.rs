//! Drift families `f(t, x)` with their `x`-derivative, lower/upper envelopes
//! and the lattice checker for the structural assumptions:
//!
//! - (i) `f >= 0`, continuous, with `∂ₓf <= 0`;
//! - (ii) `f(t,x) >= g(t) x^{-α}` on `(0, x1)` for some `α > 1/β - 1`, `g > 0` for `t > 0`;
//! - (iii) `f(t,x) <= h(t) (1 + 1/x)` with `h` locally bounded.

use std::fmt;
use std::sync::Arc;

type Field = dyn Fn(f64, f64) -> f64 + Send + Sync;
type Envelope = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied drift. The `x`-derivative must be given analytically.
pub struct CustomDrift {
    pub name: String,
    pub value: Box<Field>,
    pub dx: Box<Field>,
    pub lower: Box<Envelope>,
    pub upper: Box<Envelope>,
    pub singularity_exponent: f64,
    pub x1: f64,
    /// `(m, n)` with `f(st, yx) = s^m y^n f(t, x)`, if the drift is homogeneous.
    pub homogeneity: Option<(f64, f64)>,
}

impl CustomDrift {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Box::new(value),
            dx: Box::new(dx),
            lower: Box::new(|_| 0.0),
            upper: Box::new(|_| f64::INFINITY),
            singularity_exponent: 0.0,
            x1: 1.0,
            homogeneity: None,
        }
    }

    pub fn with_envelopes(
        mut self,
        lower: impl Fn(f64) -> f64 + Send + Sync + 'static,
        upper: impl Fn(f64) -> f64 + Send + Sync + 'static,
        singularity_exponent: f64,
        x1: f64,
    ) -> Self {
        self.lower = Box::new(lower);
        self.upper = Box::new(upper);
        self.singularity_exponent = singularity_exponent;
        self.x1 = x1;
        self
    }

    pub fn with_homogeneity(mut self, m: f64, n: f64) -> Self {
        self.homogeneity = Some((m, n));
        self
    }
}

#[derive(Clone)]
pub enum DriftFamily {
    /// `f ≡ 0`.
    Zero,
    /// `K / x`.
    Reciprocal {
        k: f64,
    },
    /// `K t^γ x^{-α}`.
    Power {
        k: f64,
        gamma: f64,
        alpha: f64,
    },
    /// `H (d - 1) t^{2H-1} / x`, the fractional Bessel drift.
    Bessel {
        hurst: f64,
        dim: f64,
    },
    Custom(Arc<CustomDrift>),
}

/// A drift family times a constant factor.
#[derive(Clone)]
pub struct DriftSpec {
    pub family: DriftFamily,
    pub scale: f64,
}

impl fmt::Debug for DriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DriftSpec({})", self.describe())
    }
}

impl DriftSpec {
    pub fn zero() -> Self {
        Self::from(DriftFamily::Zero)
    }

    pub fn reciprocal(k: f64) -> Self {
        Self::from(DriftFamily::Reciprocal { k })
    }

    pub fn power(k: f64, gamma: f64, alpha: f64) -> Self {
        Self::from(DriftFamily::Power { k, gamma, alpha })
    }

    pub fn bessel(hurst: f64, dim: f64) -> Self {
        Self::from(DriftFamily::Bessel { hurst, dim })
    }

    pub fn custom(drift: CustomDrift) -> Self {
        Self::from(DriftFamily::Custom(Arc::new(drift)))
    }

    /// The same family multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            family: self.family.clone(),
            scale: self.scale * c,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, DriftFamily::Zero) || self.scale == 0.0
    }

    #[inline]
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.scale
            * match &self.family {
                DriftFamily::Zero => 0.0,
                DriftFamily::Reciprocal { k } => k / x,
                DriftFamily::Power { k, gamma, alpha } => k * t.powf(*gamma) * x.powf(-alpha),
                DriftFamily::Bessel { hurst, dim } => hurst * (dim - 1.0) * t.powf(2.0 * hurst - 1.0) / x,
                DriftFamily::Custom(c) => (c.value)(t, x),
            }
    }

    /// `∂ₓf(t, x)`.
    #[inline]
    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.scale
            * match &self.family {
                DriftFamily::Zero => 0.0,
                DriftFamily::Reciprocal { k } => -k / (x * x),
                DriftFamily::Power { k, gamma, alpha } => -alpha * k * t.powf(*gamma) * x.powf(-alpha - 1.0),
                DriftFamily::Bessel { hurst, dim } => {
                    -hurst * (dim - 1.0) * t.powf(2.0 * hurst - 1.0) / (x * x)
                }
                DriftFamily::Custom(c) => (c.dx)(t, x),
            }
    }

    /// `g(t)` of assumption (ii).
    pub fn lower_envelope(&self, t: f64) -> f64 {
        self.scale
            * match &self.family {
                DriftFamily::Zero => 0.0,
                DriftFamily::Reciprocal { k } => *k,
                DriftFamily::Power { k, gamma, .. } => k * t.powf(*gamma),
                DriftFamily::Bessel { hurst, dim } => hurst * (dim - 1.0) * t.powf(2.0 * hurst - 1.0),
                DriftFamily::Custom(c) => (c.lower)(t),
            }
    }

    /// `h(t)` of assumption (iii).
    pub fn upper_envelope(&self, t: f64) -> f64 {
        // x^{-α} <= 1 + 1/x holds for α in [0, 1], so the lower and upper
        // envelopes of the built-in families coincide.
        match &self.family {
            DriftFamily::Custom(c) => self.scale * (c.upper)(t),
            _ => self.lower_envelope(t),
        }
    }

    /// `α` of assumption (ii).
    pub fn singularity_exponent(&self) -> f64 {
        match &self.family {
            DriftFamily::Zero => 0.0,
            DriftFamily::Reciprocal { .. } | DriftFamily::Bessel { .. } => 1.0,
            DriftFamily::Power { alpha, .. } => *alpha,
            DriftFamily::Custom(c) => c.singularity_exponent,
        }
    }

    /// `x1` of assumption (ii).
    pub fn x1(&self) -> f64 {
        match &self.family {
            DriftFamily::Custom(c) => c.x1,
            _ => 1.0,
        }
    }

    /// `(m, n)` such that `f(st, yx) = s^m y^n f(t, x)`.
    pub fn homogeneity(&self) -> Option<(f64, f64)> {
        match &self.family {
            DriftFamily::Zero => None,
            DriftFamily::Reciprocal { .. } => Some((0.0, -1.0)),
            DriftFamily::Power { gamma, alpha, .. } => Some((*gamma, -alpha)),
            DriftFamily::Bessel { hurst, .. } => Some((2.0 * hurst - 1.0, -1.0)),
            DriftFamily::Custom(c) => c.homogeneity,
        }
    }

    /// `sup_{[0, T]} h` estimated on a fine grid (exact for the monotone built-in envelopes).
    pub fn upper_envelope_sup(&self, horizon: f64) -> f64 {
        (0..=1000)
            .map(|i| self.upper_envelope(horizon * i as f64 / 1000.0))
            .fold(0.0, f64::max)
    }

    pub fn describe(&self) -> String {
        let base = match &self.family {
            DriftFamily::Zero => "zero".to_string(),
            DriftFamily::Reciprocal { k } => format!("reciprocal(k={k})"),
            DriftFamily::Power { k, gamma, alpha } => {
                format!("power(k={k}, gamma={gamma}, alpha={alpha})")
            }
            DriftFamily::Bessel { hurst, dim } => format!("bessel(hurst={hurst}, dim={dim})"),
            DriftFamily::Custom(c) => format!("custom({})", c.name),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{} * {base}", self.scale)
        }
    }
}

impl From<DriftFamily> for DriftSpec {
    fn from(family: DriftFamily) -> Self {
        Self { family, scale: 1.0 }
    }
}

/// Evaluation lattice over `(0, T] x [x_min, x_max]`; `x` is log-spaced so the
/// singular region near zero is resolved.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
}

impl Lattice {
    pub fn new(horizon: f64, x_min: f64, x_max: f64, n_t: usize, n_x: usize) -> Self {
        let times = (1..=n_t).map(|i| horizon * i as f64 / n_t as f64).collect();
        let (la, lb) = (x_min.ln(), x_max.ln());
        let xs = (0..n_x)
            .map(|i| (la + (lb - la) * i as f64 / (n_x - 1).max(1) as f64).exp())
            .collect();
        Self { times, xs }
    }

    /// `(0, T] x [1e-6, x_max]` with 40 x 200 points.
    pub fn standard(horizon: f64, x_max: f64) -> Self {
        Self::new(horizon, 1e-6, x_max, 40, 200)
    }

    fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times
            .iter()
            .flat_map(move |&t| self.xs.iter().map(move |&x| (t, x)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub i: bool,
    pub ii: bool,
    pub iii: bool,
    pub details: Vec<String>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.i && self.ii && self.iii
    }
}

const REL_SLACK: f64 = 1e-12;

/// Evaluates assumptions (i)–(iii) on `lattice`; (ii) additionally requires
/// `1/2 < β < H` and `α > 1/β - 1`.
pub fn check_drift_assumptions(
    drift: &DriftSpec,
    hurst: f64,
    beta: f64,
    lattice: &Lattice,
) -> AssumptionReport {
    let mut details = Vec::new();

    let mut i_ok = true;
    for (t, x) in lattice.points() {
        let f = drift.value(t, x);
        let d = drift.dx(t, x);
        if !(f.is_finite() && f >= 0.0) {
            details.push(format!("(i) f({t}, {x}) = {f} is not finite and nonnegative"));
            i_ok = false;
            break;
        }
        if !(d.is_finite() && d <= REL_SLACK * f.abs().max(1.0)) {
            details.push(format!("(i) ∂ₓf({t}, {x}) = {d} > 0"));
            i_ok = false;
            break;
        }
    }

    let mut ii_ok = true;
    let alpha = drift.singularity_exponent();
    if !(beta > 0.5 && beta < hurst) {
        details.push(format!("(ii) β = {beta} must satisfy 1/2 < β < H = {hurst}"));
        ii_ok = false;
    }
    if !(alpha > 1.0 / beta - 1.0) {
        details.push(format!(
            "(ii) α = {alpha} does not exceed 1/β - 1 = {}",
            1.0 / beta - 1.0
        ));
        ii_ok = false;
    }
    let x1 = drift.x1();
    for &t in &lattice.times {
        let g = drift.lower_envelope(t);
        if !(g > 0.0 && g.is_finite()) {
            details.push(format!("(ii) g({t}) = {g} is not positive"));
            ii_ok = false;
            break;
        }
    }
    if ii_ok {
        'outer: for &t in &lattice.times {
            let g = drift.lower_envelope(t);
            for &x in lattice.xs.iter().filter(|&&x| x < x1) {
                let f = drift.value(t, x);
                let floor = g * x.powf(-alpha);
                if f < floor * (1.0 - REL_SLACK) {
                    details.push(format!("(ii) f({t}, {x}) = {f} < g(t) x^-α = {floor}"));
                    ii_ok = false;
                    break 'outer;
                }
            }
        }
    }

    let mut iii_ok = true;
    for (t, x) in lattice.points() {
        let h = drift.upper_envelope(t);
        let f = drift.value(t, x);
        if !(h.is_finite() && h >= 0.0) {
            details.push(format!("(iii) h({t}) = {h} is not finite and nonnegative"));
            iii_ok = false;
            break;
        }
        let cap = h * (1.0 + 1.0 / x);
        if f > cap * (1.0 + REL_SLACK) {
            details.push(format!("(iii) f({t}, {x}) = {f} > h(t)(1 + 1/x) = {cap}"));
            iii_ok = false;
            break;
        }
    }

    AssumptionReport {
        i: i_ok,
        ii: ii_ok,
        iii: iii_ok,
        details,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice() -> Lattice {
        Lattice::standard(1.0, 50.0)
    }

    #[test]
    fn reciprocal_passes_everything() {
        let r = check_drift_assumptions(&DriftSpec::reciprocal(1.0), 0.75, 0.6, &lattice());
        assert!(r.all_pass(), "{:?}", r.details);
    }

    #[test]
    fn identity_drift_fails_monotonicity() {
        let f = DriftSpec::custom(CustomDrift::new("x", |_, x| x, |_, _| 1.0).with_envelopes(
            |_| 1.0,
            |_| 1.0,
            1.0,
            1.0,
        ));
        let r = check_drift_assumptions(&f, 0.75, 0.6, &lattice());
        assert!(!r.i);
    }

    #[test]
    fn inverse_square_fails_growth_bound_only() {
        let f = DriftSpec::power(1.0, 1.0, 2.0);
        let r = check_drift_assumptions(&f, 0.75, 0.6, &lattice());
        assert!(r.i && r.ii && !r.iii, "{r:?}");
    }

    #[test]
    fn weak_singularity_fails_ii() {
        // α = 0.3 is below 1/β - 1 for β = 0.6
        let f = DriftSpec::power(1.0, 0.0, 0.3);
        let r = check_drift_assumptions(&f, 0.75, 0.6, &lattice());
        assert!(r.i && !r.ii && r.iii, "{r:?}");
        let r = check_drift_assumptions(&DriftSpec::zero(), 0.75, 0.6, &lattice());
        assert!(!r.ii);
    }

    #[test]
    fn bessel_and_scaled_power_pass() {
        for f in [
            DriftSpec::bessel(0.75, 2.0),
            DriftSpec::bessel(0.6, 3.0),
            DriftSpec::power(2.0, 1.0, 1.0).scaled(0.3),
        ] {
            let r = check_drift_assumptions(&f, 0.75, 0.62, &lattice());
            assert!(r.all_pass(), "{}: {:?}", f.describe(), r.details);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let drifts = [
            DriftSpec::reciprocal(1.3),
            DriftSpec::power(0.7, 1.5, 0.8),
            DriftSpec::bessel(0.8, 3.0).scaled(2.0),
        ];
        for f in &drifts {
            for &(t, x) in &[(0.3, 0.5), (1.0, 2.0), (0.7, 0.05)] {
                let h = 1e-6 * x;
                let fd = (f.value(t, x + h) - f.value(t, x - h)) / (2.0 * h);
                assert!((fd - f.dx(t, x)).abs() < 1e-6 * fd.abs().max(1.0));
            }
        }
    }
}
