//! Strict `key = value` configuration documents.
//!
//! Keys before any `[section]` header belong to `run`; `section.key = value`
//! may be written anywhere. `#` starts a comment. Unknown and duplicate keys
//! are rejected with the offending line number.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use sfbm_core::verify::default_bound_gamma;
use sfbm_core::FbmMethod;

use crate::error::CliError;
use crate::report::fmt_f64;

/// One recognised key with its default (as written in a document).
pub struct KeySpec {
    pub section: &'static str,
    pub key: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

macro_rules! keys {
    ($( $s:literal . $k:literal = $d:literal : $h:literal ;)*) => {
        pub const KEYS: &[KeySpec] = &[$(KeySpec { section: $s, key: $k, default: $d, help: $h },)*];
    };
}

keys! {
    "run"."experiment" = "" : "fbm-sample | simulate | verify-bound | neg-moments | scaling | malliavin | cir | moments";
    "run"."seed" = "1" : "base seed; every batch derives its own stream from it";
    "run"."n_paths" = "1000" : "Monte Carlo paths per batch";
    "run"."output_dir" = "out" : "directory for report.txt and CSV files";
    "run"."csv" = "wide" : "none | wide | per_path";
    "run"."csv_paths" = "10" : "number of paths written to CSV";
    "fbm"."hurst" = "0.75" : "Hurst parameter, H in (1/2, 1)";
    "fbm"."horizon" = "1" : "time horizon T";
    "fbm"."n_steps" = "1024" : "grid steps on [0, T]";
    "fbm"."method" = "circulant" : "circulant | cholesky";
    "drift"."family" = "reciprocal" : "reciprocal (k/x) | power (k t^gamma_d x^-alpha_d) | bessel | zero";
    "drift"."k" = "1" : "drift constant K";
    "drift"."gamma_d" = "1" : "time exponent of the power drift";
    "drift"."alpha_d" = "1" : "singularity exponent of the power drift";
    "drift"."dim" = "2" : "dimension d of the Bessel drift H(d-1)t^{2H-1}/x";
    "drift"."x0" = "1" : "initial value";
    "solver"."newton_tol" = "1e-12" : "absolute tolerance of the implicit step";
    "solver"."max_newton_iters" = "200" : "iteration cap of the implicit step";
    "bound"."beta" = "auto" : "Hölder exponent in (1/2, H); auto = (1/2 + H)/2";
    "bound"."gamma" = "auto" : "power gamma > 2; auto = smallest admissible integer >= 3";
    "bound"."growth_norms" = "2, 4, 8, 16" : "driver norms for the log-growth fit";
    "simulate"."closed_form_steps" = "10000" : "steps of the zero-driver closed-form check";
    "simulate"."convergence_paths" = "100" : "paths in the step-halving study";
    "simulate"."comparison_paths" = "100" : "paths in the comparison check";
    "simulate"."comparison_dx" = "0.5" : "x0' - x0 in the comparison check";
    "neg_moments"."pairs" = "1:0.2, 1:0.4, 2:0.1, 2:0.15" : "p:t pairs for E[X_t^-p]";
    "moments"."orders" = "1, 2, 4, 8" : "orders p of E[sup |X|^p]";
    "scaling"."a" = "2" : "scale factor a";
    "scaling"."t" = "0.5" : "comparison time; t and t/a must be grid times";
    "malliavin"."t" = "1" : "time of X_t";
    "malliavin"."tau" = "0.5" : "direction phi = 1_[0, tau]";
    "malliavin"."eps" = "0.1, 0.05, 0.025" : "decreasing perturbation sizes";
    "malliavin"."abs_tol" = "1e-3" : "absolute FD tolerance";
    "malliavin"."rel_tol" = "1e-2" : "relative FD tolerance";
    "cir"."family" = "constant" : "constant (k) | sqrt_affine (a + b sqrt y) | affine (a + b y)";
    "cir"."k" = "1" : "constant drift";
    "cir"."a" = "1" : "intercept a";
    "cir"."b" = "0.5" : "slope b";
    "cir"."y0" = "1" : "initial value";
    "cir"."residual_points" = "16" : "grid times at which the integral residual is evaluated";
    "cir"."residual_tol" = "5e-3" : "tolerance of the integral residual";
}

fn lookup(section: &str, key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.section == section && k.key == key)
}

/// Raw `section.key -> (value, line)` pairs of one document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    entries: BTreeMap<String, (String, Option<usize>)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc = Self::default();
        let mut section = "run".to_string();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| CliError::Parse {
                    line: line_no,
                    message: format!("malformed section header `{line}`"),
                })?;
                let name = name.trim();
                if !KEYS.iter().any(|k| k.section == name) {
                    return Err(CliError::Parse {
                        line: line_no,
                        message: format!("unknown section `{name}`"),
                    });
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| CliError::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            let (sec, key) = match key.split_once('.') {
                Some((s, k)) => (s.trim(), k.trim()),
                None => (section.as_str(), key),
            };
            if lookup(sec, key).is_none() {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("unknown key `{sec}.{key}`"),
                });
            }
            let full = format!("{sec}.{key}");
            if let Some((_, Some(first))) = doc.entries.get(&full) {
                return Err(CliError::Parse {
                    line: line_no,
                    message: format!("duplicate key `{full}` (first set on line {first})"),
                });
            }
            doc.entries
                .insert(full, (value.trim().to_string(), Some(line_no)));
        }
        Ok(doc)
    }

    /// Sets `section.key`, replacing any earlier value (used for flag overrides).
    pub fn set(&mut self, full_key: &str, value: impl Into<String>) -> Result<(), CliError> {
        let (sec, key) = full_key.split_once('.').unwrap_or(("run", full_key));
        if lookup(sec, key).is_none() {
            return Err(CliError::Usage(format!("unknown key `{full_key}`")));
        }
        self.entries.insert(format!("{sec}.{key}"), (value.into(), None));
        Ok(())
    }

    pub fn contains(&self, full_key: &str) -> bool {
        self.entries.contains_key(full_key)
    }

    fn raw(&self, spec: &KeySpec) -> (String, Option<usize>) {
        self.entries
            .get(&format!("{}.{}", spec.section, spec.key))
            .cloned()
            .unwrap_or_else(|| (spec.default.to_string(), None))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    FbmSample,
    Simulate,
    VerifyBound,
    NegMoments,
    Scaling,
    Malliavin,
    Cir,
    Moments,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::FbmSample,
        Self::Simulate,
        Self::VerifyBound,
        Self::NegMoments,
        Self::Scaling,
        Self::Malliavin,
        Self::Cir,
        Self::Moments,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FbmSample => "fbm-sample",
            Self::Simulate => "simulate",
            Self::VerifyBound => "verify-bound",
            Self::NegMoments => "neg-moments",
            Self::Scaling => "scaling",
            Self::Malliavin => "malliavin",
            Self::Cir => "cir",
            Self::Moments => "moments",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvMode {
    None,
    Wide,
    PerPath,
}

impl FromStr for CsvMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Self::None),
            "wide" => Ok(Self::Wide),
            "per_path" => Ok(Self::PerPath),
            _ => Err(format!("expected none, wide or per_path, got `{s}`")),
        }
    }
}

impl fmt::Display for CsvMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Wide => "wide",
            Self::PerPath => "per_path",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftName {
    Reciprocal,
    Power,
    Bessel,
    Zero,
}

impl FromStr for DriftName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reciprocal" => Ok(Self::Reciprocal),
            "power" => Ok(Self::Power),
            "bessel" => Ok(Self::Bessel),
            "zero" => Ok(Self::Zero),
            _ => Err(format!("expected reciprocal, power, bessel or zero, got `{s}`")),
        }
    }
}

impl fmt::Display for DriftName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Reciprocal => "reciprocal",
            Self::Power => "power",
            Self::Bessel => "bessel",
            Self::Zero => "zero",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CirName {
    Constant,
    SqrtAffine,
    Affine,
}

impl FromStr for CirName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constant" => Ok(Self::Constant),
            "sqrt_affine" => Ok(Self::SqrtAffine),
            "affine" => Ok(Self::Affine),
            _ => Err(format!("expected constant, sqrt_affine or affine, got `{s}`")),
        }
    }
}

impl fmt::Display for CirName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::SqrtAffine => "sqrt_affine",
            Self::Affine => "affine",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbmSection {
    pub hurst: f64,
    pub horizon: f64,
    pub n_steps: usize,
    pub method: FbmMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSection {
    pub family: DriftName,
    pub k: f64,
    pub gamma_d: f64,
    pub alpha_d: f64,
    pub dim: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub newton_tol: f64,
    pub max_newton_iters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSection {
    pub beta: f64,
    pub gamma: f64,
    pub growth_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateSection {
    pub closed_form_steps: usize,
    pub convergence_paths: usize,
    pub comparison_paths: usize,
    pub comparison_dx: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSection {
    pub a: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MalliavinSection {
    pub t: f64,
    pub tau: f64,
    pub eps: Vec<f64>,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirSection {
    pub family: CirName,
    pub k: f64,
    pub a: f64,
    pub b: f64,
    pub y0: f64,
    pub residual_points: usize,
    pub residual_tol: f64,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub n_paths: usize,
    pub output_dir: PathBuf,
    pub csv: CsvMode,
    pub csv_paths: usize,
    pub fbm: FbmSection,
    pub drift: DriftSection,
    pub solver: SolverSection,
    pub bound: BoundSection,
    pub simulate: SimulateSection,
    /// `(p, t)` pairs.
    pub neg_moments: Vec<(f64, f64)>,
    pub moment_orders: Vec<f64>,
    pub scaling: ScalingSection,
    pub malliavin: MalliavinSection,
    pub cir: CirSection,
}

struct Reader<'a> {
    doc: &'a Document,
}

impl Reader<'_> {
    fn text(&self, section: &str, key: &str) -> (String, Option<usize>, &'static KeySpec) {
        let spec = lookup(section, key).expect("key table covers every read");
        let (v, line) = self.doc.raw(spec);
        (v, line, spec)
    }

    fn invalid(key: &KeySpec, line: Option<usize>, message: impl Into<String>) -> CliError {
        CliError::Invalid {
            key: format!("{}.{}", key.section, key.key),
            line,
            message: message.into(),
        }
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let (v, line, spec) = self.text(section, key);
        v.parse::<T>()
            .map_err(|e| Self::invalid(spec, line, format!("cannot parse `{v}`: {e}")))
    }

    fn auto_f64(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        let (v, _, _) = self.text(section, key);
        if v == "auto" {
            Ok(None)
        } else {
            self.parse(section, key).map(Some)
        }
    }

    fn list(&self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        let (v, line, spec) = self.text(section, key);
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Self::invalid(spec, line, format!("cannot parse `{}`: {e}", s.trim())))
            })
            .collect()
    }

    fn pairs(&self, section: &str, key: &str) -> Result<Vec<(f64, f64)>, CliError> {
        let (v, line, spec) = self.text(section, key);
        v.split(',')
            .map(|item| {
                let (p, t) = item.split_once(':').ok_or_else(|| {
                    Self::invalid(spec, line, format!("expected p:t, got `{}`", item.trim()))
                })?;
                let num = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Self::invalid(spec, line, format!("cannot parse `{}`: {e}", s.trim())))
                };
                Ok((num(p)?, num(t)?))
            })
            .collect()
    }

    /// Validation failure naming the key, the line it came from and the invariant.
    fn check(&self, ok: bool, section: &str, key: &str, invariant: &str) -> Result<(), CliError> {
        if ok {
            return Ok(());
        }
        let (v, line, spec) = self.text(section, key);
        Err(Self::invalid(
            spec,
            line,
            format!("value {v} violates {invariant}"),
        ))
    }
}

fn on_grid(t: f64, horizon: f64, n_steps: usize) -> bool {
    let k = t / horizon * n_steps as f64;
    t >= 0.0 && t <= horizon * (1.0 + 1e-12) && (k - k.round()).abs() < 1e-9
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::from_document(&Document::parse(text)?)
    }

    pub fn from_document(doc: &Document) -> Result<Self, CliError> {
        let r = Reader { doc };
        let experiment_text = r.text("run", "experiment").0;
        if experiment_text.is_empty() {
            return Err(CliError::Usage("no experiment selected".into()));
        }
        let experiment: Experiment = r.parse("run", "experiment")?;

        let fbm = FbmSection {
            hurst: r.parse("fbm", "hurst")?,
            horizon: r.parse("fbm", "horizon")?,
            n_steps: r.parse("fbm", "n_steps")?,
            method: r.parse("fbm", "method")?,
        };
        let h = fbm.hurst;
        r.check(h > 0.5 && h < 1.0, "fbm", "hurst", "H ∈ (1/2, 1)")?;
        r.check(
            fbm.horizon > 0.0 && fbm.horizon.is_finite(),
            "fbm",
            "horizon",
            "T > 0",
        )?;
        r.check(fbm.n_steps >= 2, "fbm", "n_steps", "n_steps >= 2")?;

        let n_paths: usize = r.parse("run", "n_paths")?;
        r.check(n_paths >= 1, "run", "n_paths", "n_paths >= 1")?;

        let drift = DriftSection {
            family: r.parse("drift", "family")?,
            k: r.parse("drift", "k")?,
            gamma_d: r.parse("drift", "gamma_d")?,
            alpha_d: r.parse("drift", "alpha_d")?,
            dim: r.parse("drift", "dim")?,
            x0: r.parse("drift", "x0")?,
        };
        r.check(drift.k > 0.0, "drift", "k", "K > 0")?;
        r.check(drift.gamma_d >= 0.0, "drift", "gamma_d", "gamma_d >= 0")?;
        r.check(drift.alpha_d > 0.0, "drift", "alpha_d", "alpha_d > 0")?;
        r.check(drift.dim >= 2.0, "drift", "dim", "d >= 2")?;
        r.check(drift.x0 > 0.0 && drift.x0.is_finite(), "drift", "x0", "x0 > 0")?;

        let solver = SolverSection {
            newton_tol: r.parse("solver", "newton_tol")?,
            max_newton_iters: r.parse("solver", "max_newton_iters")?,
        };
        r.check(solver.newton_tol > 0.0, "solver", "newton_tol", "newton_tol > 0")?;
        r.check(
            solver.max_newton_iters >= 1,
            "solver",
            "max_newton_iters",
            "max_newton_iters >= 1",
        )?;

        let beta = r.auto_f64("bound", "beta")?.unwrap_or(0.25 + 0.5 * h);
        r.check(beta > 0.5 && beta < h, "bound", "beta", "1/2 < β < H")?;
        let gamma = r
            .auto_f64("bound", "gamma")?
            .unwrap_or_else(|| default_bound_gamma(beta));
        r.check(gamma > 2.0, "bound", "gamma", "γ > 2")?;
        r.check(
            beta * (1.0 - 1.0 / gamma) > 1.0 - beta,
            "bound",
            "gamma",
            "γ > β/(2β - 1) (nonempty integration-by-parts window)",
        )?;
        let growth_norms = r.list("bound", "growth_norms")?;
        r.check(
            growth_norms.len() >= 2 && growth_norms.iter().all(|&v| v > 0.0),
            "bound",
            "growth_norms",
            "at least two positive norms",
        )?;

        let simulate = SimulateSection {
            closed_form_steps: r.parse("simulate", "closed_form_steps")?,
            convergence_paths: r.parse("simulate", "convergence_paths")?,
            comparison_paths: r.parse("simulate", "comparison_paths")?,
            comparison_dx: r.parse("simulate", "comparison_dx")?,
        };
        r.check(
            simulate.closed_form_steps >= 2,
            "simulate",
            "closed_form_steps",
            "closed_form_steps >= 2",
        )?;
        r.check(
            simulate.comparison_dx > 0.0,
            "simulate",
            "comparison_dx",
            "comparison_dx > 0",
        )?;

        let neg_moments = r.pairs("neg_moments", "pairs")?;
        for &(p, t) in &neg_moments {
            r.check(p == 0.0 || p >= 1.0, "neg_moments", "pairs", "p = 0 or p >= 1")?;
            r.check(
                t > 0.0 && (experiment != Experiment::NegMoments || t <= fbm.horizon),
                "neg_moments",
                "pairs",
                "0 < t <= T",
            )?;
        }
        let moment_orders = r.list("moments", "orders")?;
        r.check(
            moment_orders.iter().all(|&p| p >= 0.0),
            "moments",
            "orders",
            "p >= 0",
        )?;

        let scaling = ScalingSection {
            a: r.parse("scaling", "a")?,
            t: r.parse("scaling", "t")?,
        };
        r.check(scaling.a > 0.0, "scaling", "a", "a > 0")?;
        r.check(scaling.t > 0.0, "scaling", "t", "t > 0")?;
        if experiment == Experiment::Scaling {
            r.check(
                scaling.t <= fbm.horizon
                    && on_grid(scaling.t, fbm.horizon, fbm.n_steps)
                    && on_grid(scaling.t / scaling.a, fbm.horizon, fbm.n_steps),
                "scaling",
                "t",
                "t and t/a grid times in (0, T]",
            )?;
            r.check(
                n_paths >= sfbm_core::verify::MIN_KS_SAMPLES,
                "run",
                "n_paths",
                "n_paths >= 1000 for asymptotic KS critical values",
            )?;
        }

        let malliavin = MalliavinSection {
            t: r.parse("malliavin", "t")?,
            tau: r.parse("malliavin", "tau")?,
            eps: r.list("malliavin", "eps")?,
            abs_tol: r.parse("malliavin", "abs_tol")?,
            rel_tol: r.parse("malliavin", "rel_tol")?,
        };
        r.check(malliavin.t > 0.0, "malliavin", "t", "t > 0")?;
        r.check(malliavin.tau > 0.0, "malliavin", "tau", "tau > 0")?;
        if experiment == Experiment::Malliavin {
            r.check(
                malliavin.t <= fbm.horizon && on_grid(malliavin.t, fbm.horizon, fbm.n_steps),
                "malliavin",
                "t",
                "t a grid time in (0, T]",
            )?;
            r.check(malliavin.tau <= fbm.horizon, "malliavin", "tau", "tau <= T")?;
        }
        r.check(
            malliavin.eps.len() >= 2
                && malliavin.eps.iter().all(|&e| e > 0.0)
                && malliavin.eps.windows(2).all(|w| w[1] < w[0]),
            "malliavin",
            "eps",
            "at least two positive, strictly decreasing sizes",
        )?;
        r.check(malliavin.abs_tol >= 0.0, "malliavin", "abs_tol", "abs_tol >= 0")?;
        r.check(malliavin.rel_tol >= 0.0, "malliavin", "rel_tol", "rel_tol >= 0")?;

        let cir = CirSection {
            family: r.parse("cir", "family")?,
            k: r.parse("cir", "k")?,
            a: r.parse("cir", "a")?,
            b: r.parse("cir", "b")?,
            y0: r.parse("cir", "y0")?,
            residual_points: r.parse("cir", "residual_points")?,
            residual_tol: r.parse("cir", "residual_tol")?,
        };
        r.check(cir.k >= 0.0, "cir", "k", "k >= 0")?;
        r.check(cir.a >= 0.0, "cir", "a", "a >= 0")?;
        r.check(cir.b >= 0.0, "cir", "b", "b >= 0")?;
        r.check(cir.y0 > 0.0, "cir", "y0", "y0 > 0")?;
        r.check(
            cir.residual_points >= 1,
            "cir",
            "residual_points",
            "residual_points >= 1",
        )?;
        r.check(cir.residual_tol > 0.0, "cir", "residual_tol", "residual_tol > 0")?;

        Ok(Self {
            experiment,
            seed: r.parse("run", "seed")?,
            n_paths,
            output_dir: PathBuf::from(r.text("run", "output_dir").0),
            csv: r.parse("run", "csv")?,
            csv_paths: r.parse("run", "csv_paths")?,
            fbm,
            drift,
            solver,
            bound: BoundSection {
                beta,
                gamma,
                growth_norms,
            },
            simulate,
            neg_moments,
            moment_orders,
            scaling,
            malliavin,
            cir,
        })
    }

    /// Canonical document; parsing it yields the same configuration.
    pub fn to_document(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(", ");
        let pairs = self
            .neg_moments
            .iter()
            .map(|(p, t)| format!("{}:{}", fmt_f64(*p), fmt_f64(*t)))
            .collect::<Vec<_>>()
            .join(", ");
        let method = match self.fbm.method {
            FbmMethod::CirculantEmbedding => "circulant",
            FbmMethod::Cholesky => "cholesky",
        };
        let rows: Vec<(&str, Vec<(&str, String)>)> = vec![
            (
                "run",
                vec![
                    ("experiment", self.experiment.to_string()),
                    ("seed", self.seed.to_string()),
                    ("n_paths", self.n_paths.to_string()),
                    ("output_dir", self.output_dir.display().to_string()),
                    ("csv", self.csv.to_string()),
                    ("csv_paths", self.csv_paths.to_string()),
                ],
            ),
            (
                "fbm",
                vec![
                    ("hurst", fmt_f64(self.fbm.hurst)),
                    ("horizon", fmt_f64(self.fbm.horizon)),
                    ("n_steps", self.fbm.n_steps.to_string()),
                    ("method", method.to_string()),
                ],
            ),
            (
                "drift",
                vec![
                    ("family", self.drift.family.to_string()),
                    ("k", fmt_f64(self.drift.k)),
                    ("gamma_d", fmt_f64(self.drift.gamma_d)),
                    ("alpha_d", fmt_f64(self.drift.alpha_d)),
                    ("dim", fmt_f64(self.drift.dim)),
                    ("x0", fmt_f64(self.drift.x0)),
                ],
            ),
            (
                "solver",
                vec![
                    ("newton_tol", fmt_f64(self.solver.newton_tol)),
                    ("max_newton_iters", self.solver.max_newton_iters.to_string()),
                ],
            ),
            (
                "bound",
                vec![
                    ("beta", fmt_f64(self.bound.beta)),
                    ("gamma", fmt_f64(self.bound.gamma)),
                    ("growth_norms", list(&self.bound.growth_norms)),
                ],
            ),
            (
                "simulate",
                vec![
                    ("closed_form_steps", self.simulate.closed_form_steps.to_string()),
                    ("convergence_paths", self.simulate.convergence_paths.to_string()),
                    ("comparison_paths", self.simulate.comparison_paths.to_string()),
                    ("comparison_dx", fmt_f64(self.simulate.comparison_dx)),
                ],
            ),
            ("neg_moments", vec![("pairs", pairs)]),
            ("moments", vec![("orders", list(&self.moment_orders))]),
            (
                "scaling",
                vec![("a", fmt_f64(self.scaling.a)), ("t", fmt_f64(self.scaling.t))],
            ),
            (
                "malliavin",
                vec![
                    ("t", fmt_f64(self.malliavin.t)),
                    ("tau", fmt_f64(self.malliavin.tau)),
                    ("eps", list(&self.malliavin.eps)),
                    ("abs_tol", fmt_f64(self.malliavin.abs_tol)),
                    ("rel_tol", fmt_f64(self.malliavin.rel_tol)),
                ],
            ),
            (
                "cir",
                vec![
                    ("family", self.cir.family.to_string()),
                    ("k", fmt_f64(self.cir.k)),
                    ("a", fmt_f64(self.cir.a)),
                    ("b", fmt_f64(self.cir.b)),
                    ("y0", fmt_f64(self.cir.y0)),
                    ("residual_points", self.cir.residual_points.to_string()),
                    ("residual_tol", fmt_f64(self.cir.residual_tol)),
                ],
            ),
        ];
        let mut out = String::new();
        for (section, entries) in rows {
            for (k, v) in entries {
                let _ = writeln!(out, "{section}.{k} = {v}");
            }
        }
        out
    }
}

/// Key reference for `--help`.
pub fn key_reference() -> String {
    let mut out = String::from("Configuration keys (section.key = default):\n");
    for k in KEYS {
        let default = if k.default.is_empty() {
            "<required>"
        } else {
            k.default
        };
        let _ = writeln!(out, "  {}.{} = {}\n      {}", k.section, k.key, default, k.help);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_defaults() {
        let c = ExperimentConfig::parse("experiment = simulate\n[drift]\nfamily = reciprocal\n").unwrap();
        assert_eq!(c.experiment, Experiment::Simulate);
        assert_eq!(c.fbm.hurst, 0.75);
        assert_eq!(c.fbm.n_steps, 1024);
        assert_eq!(c.bound.beta, 0.625);
        assert_eq!(c.bound.gamma, 3.0);
        assert_eq!(
            c.neg_moments,
            vec![(1.0, 0.2), (1.0, 0.4), (2.0, 0.1), (2.0, 0.15)]
        );
    }

    #[test]
    fn duplicate_and_unknown_keys_name_the_line() {
        let err = Document::parse("experiment = cir\n\n[fbm]\nhurst = 0.7\nhurst = 0.8\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 5, .. }), "{err}");
        let err = Document::parse("[fbm]\nhurts = 0.7\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
        let err = Document::parse("[nope]\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }));
        let err = Document::parse("fbm.hurst = 0.7\n[fbm]\nhurst=0.6").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }));
    }

    #[test]
    fn out_of_domain_values_name_the_invariant() {
        let err = ExperimentConfig::parse("experiment = simulate\nfbm.hurst = 0.4\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("H ∈ (1/2, 1)") && msg.contains("line 2"), "{msg}");
        assert_eq!(err.exit_code(), 2);
        let err = ExperimentConfig::parse("experiment = simulate\nbound.beta = 0.8\n").unwrap_err();
        assert!(err.to_string().contains("1/2 < β < H"));
        let err = ExperimentConfig::parse("experiment = simulate\nbound.beta = 0.6\nbound.gamma = 3\n")
            .unwrap_err();
        assert!(err.to_string().contains("window"));
        assert!(ExperimentConfig::parse("experiment = scaling\nn_paths = 10\n").is_err());
        assert!(ExperimentConfig::parse("fbm.hurst = 0.7\n").is_err());
    }

    #[test]
    fn canonical_document_round_trips() {
        let text = "experiment = malliavin\nseed = 9\n[fbm]\nhurst = 0.6\nn_steps = 512\n# note\n[malliavin]\neps = 0.2, 0.1, 0.05 # trailing\n";
        let c = ExperimentConfig::parse(text).unwrap();
        let again = ExperimentConfig::parse(&c.to_document()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut doc = Document::parse("experiment = simulate\nseed = 3\n").unwrap();
        doc.set("seed", "5").unwrap();
        doc.set("fbm.hurst", "0.9").unwrap();
        assert!(doc.set("fbm.nope", "1").is_err());
        let c = ExperimentConfig::from_document(&doc).unwrap();
        assert_eq!((c.seed, c.fbm.hurst), (5, 0.9));
    }
}
