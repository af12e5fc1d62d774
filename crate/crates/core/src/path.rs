//! Discretized paths on a uniform time grid and step functions on `[0, T]`.

use crate::error::{domain, Error, Result};

const GRID_SNAP: f64 = 1e-9;

/// A function sampled on a uniform grid `0 = t_0 < t_1 < ... < t_n`.
///
/// Carries fBm samples, driver paths and solutions alike.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
    dt: f64,
    /// Hölder exponent the path is expected to satisfy, if known.
    pub holder_hint: Option<f64>,
}

impl SamplePath {
    /// Builds a path from explicit times and values.
    ///
    /// The grid must start at zero and have a constant step.
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return domain("a path needs at least two grid points");
        }
        if times[0] != 0.0 {
            return domain(format!("grid must start at 0, starts at {}", times[0]));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) || !dt.is_finite() {
            return domain("grid step must be positive");
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-9 * dt.max(1.0) || step <= 0.0 {
                return domain(format!("grid is not uniform at index {}", i + 1));
            }
        }
        Ok(Self {
            times,
            values,
            dt,
            holder_hint: None,
        })
    }

    /// Builds a path on the uniform grid `t_i = i * dt` from its values.
    pub fn uniform(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return domain("grid step must be positive");
        }
        if values.len() < 2 {
            return domain("a path needs at least two grid points");
        }
        let times = (0..values.len()).map(|i| i as f64 * dt).collect();
        Ok(Self {
            times,
            values,
            dt,
            holder_hint: None,
        })
    }

    /// Samples `f` on the grid of `n_steps` steps over `[0, horizon]`.
    pub fn from_fn(horizon: f64, n_steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(horizon > 0.0) || n_steps == 0 {
            return domain("horizon must be positive and n_steps at least 1");
        }
        let dt = horizon / n_steps as f64;
        let values = (0..=n_steps).map(|i| f(i as f64 * dt)).collect();
        Self::uniform(dt, values)
    }

    pub fn with_holder_hint(mut self, beta: f64) -> Self {
        self.holder_hint = Some(beta);
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points (steps + 1).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Index of the grid point equal to `t` (up to a relative snapping tolerance).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt;
        let k = x.round();
        if (x - k).abs() > GRID_SNAP * x.abs().max(1.0) || k < 0.0 || k as usize >= self.len() {
            return domain(format!("time {t} is not a point of the path grid"));
        }
        Ok(k as usize)
    }

    /// Indices of the first and last grid points inside `[s, t]`.
    pub fn index_range(&self, s: f64, t: f64) -> Result<(usize, usize)> {
        if !(s <= t) {
            return Err(Error::EmptyInterval { s, t });
        }
        let tol = GRID_SNAP * self.dt;
        let lo = ((s - tol) / self.dt).ceil().max(0.0);
        let hi = ((t + tol) / self.dt).floor();
        let last = (self.len() - 1) as f64;
        let hi = hi.min(last);
        if lo > hi {
            return Err(Error::EmptyInterval { s, t });
        }
        Ok((lo as usize, hi as usize))
    }

    /// Piecewise-linear interpolation between grid values; clamps outside the grid.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values[0];
        }
        let x = t / self.dt;
        let i = x.floor() as usize;
        if i >= self.len() - 1 {
            return self.last();
        }
        let w = x - i as f64;
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// `self + eps * other` on a shared grid.
    pub fn add_scaled(&self, other: &SamplePath, eps: f64) -> Result<SamplePath> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + eps * b)
            .collect();
        Ok(SamplePath {
            times: self.times.clone(),
            values,
            dt: self.dt,
            holder_hint: self.holder_hint,
        })
    }

    /// Applies `f` to every value, keeping the grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SamplePath {
        SamplePath {
            times: self.times.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            dt: self.dt,
            holder_hint: None,
        }
    }

    /// Keeps every `stride`-th grid point.
    pub fn subsample(&self, stride: usize) -> Result<SamplePath> {
        if stride == 0 || !self.n_steps().is_multiple_of(stride) {
            return domain(format!(
                "stride {stride} does not divide the {} steps of the path",
                self.n_steps()
            ));
        }
        let values = self.values.iter().step_by(stride).copied().collect();
        let mut p = SamplePath::uniform(self.dt * stride as f64, values)?;
        p.holder_hint = self.holder_hint;
        Ok(p)
    }

    pub fn check_same_grid(&self, other: &SamplePath) -> Result<()> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::GridMismatch(format!(
                "paths have {} points (dt {}) and {} points (dt {})",
                self.len(),
                self.dt,
                other.len(),
                other.dt
            )));
        }
        Ok(())
    }
}

/// A step function `sum_i level_i * 1_[b_i, b_{i+1})` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl StepFunction {
    /// `breakpoints` must be strictly ascending and nonnegative, with one
    /// more entry than `levels`.
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() != levels.len() + 1 {
            return domain(format!(
                "{} breakpoints cannot carry {} levels",
                breakpoints.len(),
                levels.len()
            ));
        }
        if breakpoints[0] < 0.0 || breakpoints.iter().any(|b| !b.is_finite()) {
            return domain("breakpoints must be finite and nonnegative");
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return domain("breakpoints must be strictly ascending");
        }
        if levels.iter().any(|l| !l.is_finite()) {
            return domain("levels must be finite");
        }
        Ok(Self { breakpoints, levels })
    }

    /// The zero function.
    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            levels: Vec::new(),
        }
    }

    /// `1_[a, b]`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![1.0])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Iterates over `(left, right, level)` pieces.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.levels
            .iter()
            .enumerate()
            .map(move |(i, &l)| (self.breakpoints[i], self.breakpoints[i + 1], l))
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.pieces()
            .find(|&(a, b, _)| s >= a && s < b)
            .map_or(0.0, |(_, _, l)| l)
    }

    /// Largest breakpoint, or zero for the zero function.
    pub fn support_end(&self) -> f64 {
        self.breakpoints.last().copied().unwrap_or(0.0)
    }

    pub fn check_within(&self, horizon: f64) -> Result<()> {
        if self.support_end() > horizon * (1.0 + 1e-12) {
            return domain(format!(
                "step function extends to {} beyond the horizon {horizon}",
                self.support_end()
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_and_lookup() {
        let p = SamplePath::from_fn(1.0, 4, |t| 2.0 * t).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.times()[0], 0.0);
        assert_eq!(p.index_of(0.75).unwrap(), 3);
        assert!(p.index_of(0.3).is_err());
        assert_eq!(p.index_range(0.1, 0.8).unwrap(), (1, 3));
        assert!(matches!(
            p.index_range(0.3, 0.4),
            Err(Error::EmptyInterval { .. })
        ));
        assert!((p.value_at(0.375) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonuniform_grid() {
        assert!(SamplePath::new(vec![0.0, 0.1, 0.3], vec![0.0; 3]).is_err());
        assert!(SamplePath::new(vec![0.1, 0.2], vec![0.0; 2]).is_err());
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let p = SamplePath::from_fn(1.0, 8, |t| t * t).unwrap();
        let q = p.subsample(2).unwrap();
        assert_eq!(q.n_steps(), 4);
        assert_eq!(q.last(), p.last());
        assert!(p.subsample(3).is_err());
    }

    #[test]
    fn step_function_eval() {
        let f = StepFunction::new(vec![0.0, 0.5, 1.0], vec![2.0, -1.0]).unwrap();
        assert_eq!(f.eval(0.25), 2.0);
        assert_eq!(f.eval(0.75), -1.0);
        assert_eq!(f.eval(1.5), 0.0);
        assert!(StepFunction::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(f.check_within(0.9).is_err());
        assert_eq!(StepFunction::zero().eval(0.3), 0.0);
    }
}
