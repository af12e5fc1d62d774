//! Square-root equation `Y = y0 + ∫ f(s, Y) ds + ∫ √Y dφ`, solved through
//! `X = 2√Y`, which satisfies `X = 2√y0 + ∫ 2 f(s, X²/4) / X ds + φ`.

use std::fmt;
use std::sync::Arc;

use super::drift::{CustomDrift, DriftSpec, Lattice};
use super::{solve_pathwise, SolveConfig};
use crate::error::{domain, Error, Result};
use crate::path::SamplePath;

type Field = dyn Fn(f64, f64) -> f64 + Send + Sync;
type Envelope = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirDirection {
    /// `Y -> X = 2√Y`
    Forward,
    /// `X -> Y = X²/4`
    Inverse,
}

pub fn cir_transform(value: f64, direction: CirDirection) -> Result<f64> {
    if !(value >= 0.0) {
        return domain(format!(
            "change of variables needs a nonnegative value, got {value}"
        ));
    }
    Ok(match direction {
        CirDirection::Forward => 2.0 * value.sqrt(),
        CirDirection::Inverse => 0.25 * value * value,
    })
}

pub struct CustomCirDrift {
    pub name: String,
    pub value: Box<Field>,
    pub dx: Box<Field>,
    pub lower: Box<Envelope>,
    pub upper: Box<Envelope>,
    pub x1: f64,
}

impl CustomCirDrift {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        dx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lower: impl Fn(f64) -> f64 + Send + Sync + 'static,
        upper: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x1: f64,
    ) -> Self {
        Self {
            name: name.into(),
            value: Box::new(value),
            dx: Box::new(dx),
            lower: Box::new(lower),
            upper: Box::new(upper),
            x1,
        }
    }
}

#[derive(Clone)]
pub enum CirFamily {
    /// `K`
    Constant {
        k: f64,
    },
    /// `a + b y`
    Affine {
        a: f64,
        b: f64,
    },
    /// `a + b √y`
    SqrtAffine {
        a: f64,
        b: f64,
    },
    Custom(Arc<CustomCirDrift>),
}

/// Drift of the square-root equation, with the parameters `g`, `h`, `x1` of
/// conditions (a)–(c).
#[derive(Clone)]
pub struct CirDriftSpec {
    pub family: CirFamily,
}

impl fmt::Debug for CirDriftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CirDriftSpec({})", self.describe())
    }
}

impl CirDriftSpec {
    pub fn constant(k: f64) -> Self {
        Self {
            family: CirFamily::Constant { k },
        }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Self {
            family: CirFamily::Affine { a, b },
        }
    }

    pub fn sqrt_affine(a: f64, b: f64) -> Self {
        Self {
            family: CirFamily::SqrtAffine { a, b },
        }
    }

    pub fn custom(drift: CustomCirDrift) -> Self {
        Self {
            family: CirFamily::Custom(Arc::new(drift)),
        }
    }

    pub fn value(&self, t: f64, y: f64) -> f64 {
        match &self.family {
            CirFamily::Constant { k } => *k,
            CirFamily::Affine { a, b } => a + b * y,
            CirFamily::SqrtAffine { a, b } => a + b * y.sqrt(),
            CirFamily::Custom(c) => (c.value)(t, y),
        }
    }

    pub fn dx(&self, t: f64, y: f64) -> f64 {
        match &self.family {
            CirFamily::Constant { .. } => 0.0,
            CirFamily::Affine { b, .. } => *b,
            CirFamily::SqrtAffine { b, .. } => 0.5 * b / y.sqrt(),
            CirFamily::Custom(c) => (c.dx)(t, y),
        }
    }

    pub fn lower_envelope(&self, t: f64) -> f64 {
        match &self.family {
            CirFamily::Constant { k } => *k,
            CirFamily::Affine { a, .. } | CirFamily::SqrtAffine { a, .. } => *a,
            CirFamily::Custom(c) => (c.lower)(t),
        }
    }

    pub fn upper_envelope(&self, t: f64) -> f64 {
        match &self.family {
            CirFamily::Constant { k } => *k,
            CirFamily::Affine { a, b } => a.max(*b),
            CirFamily::SqrtAffine { a, b } => a + b,
            CirFamily::Custom(c) => (c.upper)(t),
        }
    }

    pub fn x1(&self) -> f64 {
        match &self.family {
            CirFamily::Custom(c) => c.x1,
            _ => 1.0,
        }
    }

    pub fn describe(&self) -> String {
        match &self.family {
            CirFamily::Constant { k } => format!("constant(k={k})"),
            CirFamily::Affine { a, b } => format!("affine(a={a}, b={b})"),
            CirFamily::SqrtAffine { a, b } => format!("sqrt_affine(a={a}, b={b})"),
            CirFamily::Custom(c) => format!("custom({})", c.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirConditionReport {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub details: Vec<String>,
}

impl CirConditionReport {
    pub fn all_pass(&self) -> bool {
        self.a && self.b && self.c
    }

    pub fn failed(&self) -> Vec<&'static str> {
        [("a", self.a), ("b", self.b), ("c", self.c)]
            .into_iter()
            .filter(|(_, ok)| !ok)
            .map(|(n, _)| n)
            .collect()
    }
}

const REL_SLACK: f64 = 1e-12;

/// Evaluates conditions (a)–(c) on `lattice` (plus nonnegativity of `f`).
pub fn check_cir_conditions(f: &CirDriftSpec, lattice: &Lattice) -> CirConditionReport {
    let mut details = Vec::new();
    let points = || {
        lattice
            .times
            .iter()
            .flat_map(|&t| lattice.xs.iter().map(move |&x| (t, x)))
    };

    let mut a_ok = true;
    'a: for &t in &lattice.times {
        let g = f.lower_envelope(t);
        if !(g > 0.0 && g.is_finite()) {
            details.push(format!("(a) g({t}) = {g} is not positive"));
            a_ok = false;
            break;
        }
        for &x in lattice.xs.iter().filter(|&&x| x < f.x1()) {
            let v = f.value(t, x);
            if !(v >= g * (1.0 - REL_SLACK)) {
                details.push(format!("(a) f({t}, {x}) = {v} < g(t) = {g}"));
                a_ok = false;
                break 'a;
            }
        }
    }

    let mut b_ok = true;
    for (t, x) in points() {
        let v = f.value(t, x);
        let xd = x * f.dx(t, x);
        if !(v >= 0.0) {
            details.push(format!("(b) f({t}, {x}) = {v} is negative"));
            b_ok = false;
            break;
        }
        if !(v >= xd - REL_SLACK * v.abs().max(1.0)) {
            details.push(format!("(b) f({t}, {x}) = {v} < x ∂ₓf = {xd}"));
            b_ok = false;
            break;
        }
    }

    let mut c_ok = true;
    for (t, x) in points() {
        let h = f.upper_envelope(t);
        let v = f.value(t, x);
        if !(h.is_finite() && h >= 0.0) {
            details.push(format!("(c) h({t}) = {h} is not finite and nonnegative"));
            c_ok = false;
            break;
        }
        if v > h * (x + 1.0) * (1.0 + REL_SLACK) {
            details.push(format!("(c) f({t}, {x}) = {v} > h(t)(x + 1) = {}", h * (x + 1.0)));
            c_ok = false;
            break;
        }
    }

    CirConditionReport {
        a: a_ok,
        b: b_ok,
        c: c_ok,
        details,
    }
}

/// Drift `f₁(t, x) = 2 f(t, x²/4) / x` of the equation for `X = 2√Y`.
///
/// Envelopes carried over: `g₁ = 2g` with `α = 1` below `2√x1`, and `h₁ = 2h`,
/// which is a valid growth bound only when `f` is bounded in `y`.
pub fn cir_drift_transform(f: &CirDriftSpec) -> Result<DriftSpec> {
    cir_drift_transform_checked(f, &Lattice::standard(1.0, 100.0))
}

pub fn cir_drift_transform_checked(f: &CirDriftSpec, lattice: &Lattice) -> Result<DriftSpec> {
    let report = check_cir_conditions(f, lattice);
    if !report.all_pass() {
        return Err(Error::CirConditions {
            failed: report
                .failed()
                .iter()
                .map(|s| format!("({s})"))
                .collect::<Vec<_>>()
                .join(", "),
            detail: report.details.join("; "),
        });
    }
    Ok(transform_unchecked(f))
}

fn transform_unchecked(f: &CirDriftSpec) -> DriftSpec {
    match &f.family {
        CirFamily::Constant { k } => DriftSpec::reciprocal(2.0 * k),
        CirFamily::SqrtAffine { a, b } => {
            let (a, b) = (*a, *b);
            DriftSpec::custom(
                CustomDrift::new(
                    format!("2*{a}/x + {b}"),
                    move |_, x| 2.0 * a / x + b,
                    move |_, x| -2.0 * a / (x * x),
                )
                .with_envelopes(move |_| 2.0 * a, move |_| (2.0 * a).max(b), 1.0, 1.0),
            )
        }
        _ => {
            let outer = f.clone();
            let deriv = f.clone();
            let lo = f.clone();
            let hi = f.clone();
            DriftSpec::custom(
                CustomDrift::new(
                    format!("2 f(t, x^2/4) / x, f = {}", f.describe()),
                    move |t, x| 2.0 * outer.value(t, 0.25 * x * x) / x,
                    move |t, x| {
                        let y = 0.25 * x * x;
                        deriv.dx(t, y) - 2.0 * deriv.value(t, y) / (x * x)
                    },
                )
                .with_envelopes(
                    move |t| 2.0 * lo.lower_envelope(t),
                    move |t| 2.0 * hi.upper_envelope(t),
                    1.0,
                    2.0 * f.x1().sqrt(),
                ),
            )
        }
    }
}

/// Solves for `Y` via `X = 2√Y`; returns `Y = X²/4` on the driver's grid.
/// Conditions (a)–(c) are not enforced here; see [`cir_drift_transform`].
pub fn solve_cir(y0: f64, f: &CirDriftSpec, driver: &SamplePath, config: &SolveConfig) -> Result<SamplePath> {
    if !(y0 > 0.0) {
        return domain(format!("initial value must be positive, got {y0}"));
    }
    let drift = transform_unchecked(f);
    let x0 = cir_transform(y0, CirDirection::Forward)?;
    let x = solve_pathwise(x0, &drift, driver, config)?;
    Ok(x.map(|v| 0.25 * v * v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::check_drift_assumptions;

    #[test]
    fn transform_round_trip() {
        assert_eq!(cir_transform(1.0, CirDirection::Forward).unwrap(), 2.0);
        assert_eq!(cir_transform(4.0, CirDirection::Forward).unwrap(), 4.0);
        for y in [0.0, 0.25, 7.0] {
            let x = cir_transform(y, CirDirection::Forward).unwrap();
            let back = cir_transform(x, CirDirection::Inverse).unwrap();
            assert!((back - y).abs() <= 1e-15 * y.max(1.0));
        }
        assert!(cir_transform(-1.0, CirDirection::Forward).is_err());
    }

    #[test]
    fn constant_drift_becomes_reciprocal() {
        let d = cir_drift_transform(&CirDriftSpec::constant(1.5)).unwrap();
        for &(t, x) in &[(0.1, 0.3), (1.0, 4.0)] {
            assert!((d.value(t, x) - 3.0 / x).abs() < 1e-15);
        }
        let r = check_drift_assumptions(&d, 0.75, 0.6, &Lattice::standard(1.0, 50.0));
        assert!(r.all_pass());
    }

    #[test]
    fn identity_fails_condition_a() {
        let f = CirDriftSpec::custom(CustomCirDrift::new(
            "y",
            |_, y| y,
            |_, _| 1.0,
            |_| 0.0,
            |_| 1.0,
            1.0,
        ));
        match cir_drift_transform(&f) {
            Err(Error::CirConditions { failed, .. }) => assert!(failed.contains("(a)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn affine_drift_meets_conditions_but_transform_grows() {
        let f = CirDriftSpec::affine(1.0, 1.0);
        assert!(check_cir_conditions(&f, &Lattice::standard(1.0, 100.0)).all_pass());
        let d = cir_drift_transform(&f).unwrap();
        // 2 f(x²/4) / x = 2/x + x/2
        for x in [0.1, 1.0, 3.0, 10.0] {
            assert!((d.value(0.5, x) - (2.0 / x + 0.5 * x)).abs() < 1e-12);
        }
        let r = check_drift_assumptions(&d, 0.75, 0.6, &Lattice::standard(1.0, 50.0));
        assert!(!r.i && r.ii && !r.iii, "{r:?}");
    }

    #[test]
    fn sqrt_affine_transform_passes() {
        let f = CirDriftSpec::sqrt_affine(1.0, 0.5);
        let d = cir_drift_transform(&f).unwrap();
        let r = check_drift_assumptions(&d, 0.75, 0.6, &Lattice::standard(1.0, 50.0));
        assert!(r.all_pass(), "{:?}", r.details);
        let generic = CirDriftSpec::custom(CustomCirDrift::new(
            "1 + 0.5 sqrt(y)",
            |_, y| 1.0 + 0.5 * y.sqrt(),
            |_, y| 0.25 / y.sqrt(),
            |_| 1.0,
            |_| 1.5,
            1.0,
        ));
        let dg = cir_drift_transform(&generic).unwrap();
        for x in [0.01, 0.7, 5.0] {
            assert!((dg.value(0.3, x) - d.value(0.3, x)).abs() < 1e-12);
            assert!((dg.dx(0.3, x) - d.dx(0.3, x)).abs() < 1e-9 * d.dx(0.3, x).abs());
        }
    }

    #[test]
    fn zero_driver_solutions() {
        let flat = SamplePath::from_fn(1.0, 100, |_| 0.0).unwrap();
        let y = solve_cir(2.5, &CirDriftSpec::constant(0.0), &flat, &SolveConfig::default()).unwrap();
        assert!(y.values().iter().all(|&v| (v - 2.5).abs() < 1e-15));
        // constant K: X² = 4 y0 + 4 K t
        let phi = SamplePath::from_fn(1.0, 10_000, |_| 0.0).unwrap();
        let y = solve_cir(1.0, &CirDriftSpec::constant(0.5), &phi, &SolveConfig::default()).unwrap();
        for (&t, &v) in y.times().iter().zip(y.values()) {
            assert!((v - (1.0 + 0.5 * t)).abs() < 1e-3);
        }
    }
}
