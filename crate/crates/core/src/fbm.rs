//! Fractional Brownian motion: covariance structure, the Volterra kernel
//! `K_H`, the inner product on step functions, and exact samplers.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use statrs::function::gamma::ln_gamma;

use crate::error::{check_hurst_long_memory, check_hurst_open_unit, domain, Error, Result};
use crate::path::{SamplePath, StepFunction};
use crate::quad::GaussLegendre;
use crate::rng::path_rng;

/// Eigenvalues of the circulant embedding in `(-EIGEN_CLAMP, 0)` are treated as roundoff.
pub const EIGEN_CLAMP: f64 = 1e-10;

/// `R_H(s, t) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn hurst_covariance(s: f64, t: f64, hurst: f64) -> Result<f64> {
    check_hurst_open_unit(hurst)?;
    if !(s >= 0.0 && t >= 0.0) {
        return domain(format!("covariance needs nonnegative times, got ({s}, {t})"));
    }
    Ok(covariance_unchecked(s, t, hurst))
}

#[inline]
pub(crate) fn covariance_unchecked(s: f64, t: f64, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
}

/// `alpha_H = H (2H - 1)`.
pub fn alpha_coeff(hurst: f64) -> Result<f64> {
    check_hurst_open_unit(hurst)?;
    Ok(hurst * (2.0 * hurst - 1.0))
}

/// Normalizing constant `c_H = sqrt(H(2H-1) / B(2-2H, H-1/2))` of the kernel.
pub fn kernel_constant(hurst: f64) -> Result<f64> {
    check_hurst_long_memory(hurst)?;
    let a = 2.0 - 2.0 * hurst;
    let b = hurst - 0.5;
    let ln_beta = ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    Ok((hurst * (2.0 * hurst - 1.0)).sqrt() * (-0.5 * ln_beta).exp())
}

/// The square-integrable kernel with `R_H(t, s) = int_0^{t∧s} K_H(t,r) K_H(s,r) dr`:
///
/// `K_H(t, s) = c_H s^{1/2-H} int_s^t (u-s)^{H-3/2} u^{H-1/2} du` for `s < t`, zero otherwise.
///
/// The endpoint singularity is removed with `w = (u-s)^{H-1/2}`, which turns
/// the integrand into `(s + w^{1/(H-1/2)})^{H-1/2} / (H-1/2)`.
pub fn kernel_kh(t: f64, s: f64, hurst: f64) -> Result<f64> {
    check_hurst_long_memory(hurst)?;
    if !(s > 0.0) {
        return domain(format!("kernel K_H(t, s) needs s > 0, got {s}"));
    }
    if s >= t {
        return Ok(0.0);
    }
    let c = kernel_constant(hurst)?;
    let q = hurst - 0.5;
    let p = 1.0 / q;
    let upper = (t - s).powf(q);
    let gl = GaussLegendre::new(10);
    let integral = gl.adaptive(&|w: f64| (s + w.powf(p)).powf(q), 0.0, upper, 1e-8) / q;
    Ok(c * s.powf(-q) * integral)
}

/// `E[(B_b - B_a)(B_d - B_c)] = alpha_H int_a^b int_c^d |r-u|^{2H-2} du dr`.
#[inline]
pub fn increment_covariance(a: f64, b: f64, c: f64, d: f64, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let g = |x: f64| x.abs().powf(h2);
    0.5 * (g(b - c) - g(a - c) - g(b - d) + g(a - d))
}

/// `<phi, psi>_H = alpha_H int_0^T int_0^T |r-u|^{2H-2} phi_r psi_u du dr`,
/// evaluated exactly rectangle by rectangle.
pub fn inner_product_h(phi: &StepFunction, psi: &StepFunction, hurst: f64, horizon: f64) -> Result<f64> {
    check_hurst_long_memory(hurst)?;
    phi.check_within(horizon)?;
    psi.check_within(horizon)?;
    let mut acc = 0.0;
    for (a, b, x) in phi.pieces() {
        for (c, d, y) in psi.pieces() {
            acc += x * y * increment_covariance(a, b, c, d, hurst);
        }
    }
    Ok(acc)
}

/// The Cameron–Martin image `h(t) = <phi, 1_[0,t]>_H` on the given grid.
pub fn embed_direction(phi: &StepFunction, hurst: f64, times: &[f64]) -> Result<SamplePath> {
    check_hurst_long_memory(hurst)?;
    let horizon = times.last().copied().unwrap_or(0.0);
    phi.check_within(horizon)?;
    let values = times
        .iter()
        .map(|&t| {
            phi.pieces()
                .map(|(a, b, l)| l * increment_covariance(a, b, 0.0, t, hurst))
                .sum()
        })
        .collect();
    let mut h = SamplePath::new(times.to_vec(), values)?;
    h.values_mut()[0] = 0.0;
    h.holder_hint = Some(hurst);
    Ok(h)
}

/// Sampling algorithm for [`sample_fbm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbmMethod {
    /// Davies–Harte / Wood–Chan: FFT of the circulant embedding of the
    /// fractional Gaussian noise covariance. `O(n log n)` per path.
    CirculantEmbedding,
    /// Cholesky factor of the full grid covariance. `O(n^2)` per path; the slow exact oracle.
    Cholesky,
}

impl std::str::FromStr for FbmMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circulant" | "circulant_embedding" | "circulant-embedding" => Ok(Self::CirculantEmbedding),
            "cholesky" => Ok(Self::Cholesky),
            other => domain(format!(
                "unknown fBm method `{other}` (expected circulant or cholesky)"
            )),
        }
    }
}

impl std::fmt::Display for FbmMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CirculantEmbedding => "circulant",
            Self::Cholesky => "cholesky",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmSpec {
    pub hurst: f64,
    pub horizon: f64,
    pub n_steps: usize,
    pub method: FbmMethod,
    pub seed: u64,
}

impl FbmSpec {
    pub fn new(hurst: f64, horizon: f64, n_steps: usize, method: FbmMethod, seed: u64) -> Self {
        Self {
            hurst,
            horizon,
            n_steps,
            method,
            seed,
        }
    }

    /// `H = 1/2` is admitted as the Brownian reference case.
    pub fn validate(&self) -> Result<()> {
        if !(self.hurst >= 0.5 && self.hurst < 1.0) {
            return domain(format!(
                "Hurst parameter must lie in (1/2, 1), got {}",
                self.hurst
            ));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return domain(format!("horizon must be positive, got {}", self.horizon));
        }
        if self.n_steps < 2 {
            return domain(format!("n_steps must be at least 2, got {}", self.n_steps));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }
}

enum Engine {
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
    Cholesky {
        lower: DMatrix<f64>,
    },
}

/// A sampler with the spectral or Cholesky factorization precomputed, so
/// Monte Carlo batches pay the setup once.
pub struct FbmSampler {
    spec: FbmSpec,
    engine: Engine,
}

impl std::fmt::Debug for FbmSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FbmSampler").field("spec", &self.spec).finish()
    }
}

impl FbmSampler {
    pub fn new(spec: FbmSpec) -> Result<Self> {
        spec.validate()?;
        let engine = match spec.method {
            FbmMethod::CirculantEmbedding => circulant_engine(spec.n_steps, spec.hurst)?,
            FbmMethod::Cholesky => cholesky_engine(&spec)?,
        };
        Ok(Self { spec, engine })
    }

    pub fn spec(&self) -> &FbmSpec {
        &self.spec
    }

    /// Path number `index` of the batch: uses ChaCha stream `index` of `spec.seed`.
    pub fn sample_path(&self, index: u64) -> SamplePath {
        let mut rng = path_rng(self.spec.seed, index);
        self.sample_with(&mut rng)
    }

    /// One path drawn from an arbitrary generator.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> SamplePath {
        let n = self.spec.n_steps;
        let dt = self.spec.dt();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        match &self.engine {
            Engine::Circulant { sqrt_eig, fft } => {
                let mut buf: Vec<Complex<f64>> = sqrt_eig
                    .iter()
                    .map(|&l| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex::new(l * re, l * im)
                    })
                    .collect();
                fft.process(&mut buf);
                let scale = dt.powf(self.spec.hurst);
                let mut acc = 0.0;
                for z in &buf[..n] {
                    acc += scale * z.re;
                    values.push(acc);
                }
            }
            Engine::Cholesky { lower } => {
                let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
                let x = lower * z;
                values.extend(x.iter());
            }
        }
        SamplePath::uniform(dt, values)
            .expect("sampler grid is valid by construction")
            .with_holder_hint(self.spec.hurst)
    }
}

/// Unit-step fractional Gaussian noise autocovariance.
fn fgn_autocov(k: usize, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

fn circulant_engine(n: usize, hurst: f64) -> Result<Engine> {
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex::new(fgn_autocov(lag, hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let mut sqrt_eig = Vec::with_capacity(m);
    for (index, z) in row.iter().enumerate() {
        let mut l = z.re;
        if l < 0.0 {
            if l > -EIGEN_CLAMP {
                l = 0.0;
            } else {
                return Err(Error::EmbeddingFailed { index, eigenvalue: l });
            }
        }
        sqrt_eig.push((l / m as f64).sqrt());
    }
    Ok(Engine::Circulant { sqrt_eig, fft })
}

fn cholesky_engine(spec: &FbmSpec) -> Result<Engine> {
    let n = spec.n_steps;
    let dt = spec.dt();
    let cov = DMatrix::from_fn(n, n, |i, j| {
        covariance_unchecked((i + 1) as f64 * dt, (j + 1) as f64 * dt, spec.hurst)
    });
    let chol = cov.cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(Engine::Cholesky { lower: chol.l() })
}

/// One fBm path for `spec` (path index 0 of its seed).
pub fn sample_fbm(spec: &FbmSpec) -> Result<SamplePath> {
    Ok(FbmSampler::new(*spec)?.sample_path(0))
}
