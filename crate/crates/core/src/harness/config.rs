//! Experiment configuration, read from TOML.
//!
//! ```toml
//! experiment_id = "fourier-phi0"
//! seed = 7
//! trials = 2000
//! mode = "both"                 # "mc-weights" | "projection" | "both"
//! deltas = [0.25, 0.5, 1.0]
//! ns = [25, 100, 400]
//! measure = "interval"          # "interval" | "disk"
//! lambda = "preimage"           # "preimage" | "zero" | { coeffs = [[j, re, im], ...] }
//!
//! [kernel]
//! kind = "fourier"
//! rule = "geometric"
//! ratio = 0.5
//! truncation = 64
//!
//! [target]
//! preset = "phi_k"
//! k = 0
//! ```
//!
//! Kernels nest through `inner`, `left` and `right`, e.g.
//! `{ kind = "scale", factor = { preset = "constant", re = 2.0 }, inner = { kind = "szego" } }`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::element::RkhsElement;
use crate::embedding::EmbeddingContext;
use crate::error::{Error, Result};
use crate::kernel::{FourierSeries, KernelSpec, Point, PointFn, PointMap, PointPredicate, Space};
use crate::measure::{LambdaSpec, MeasureSpec};
use crate::projection::DEFAULT_DROP_TOL;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    McWeights,
    Projection,
    Both,
}

impl Mode {
    pub fn mc(self) -> bool {
        matches!(self, Mode::McWeights | Mode::Both)
    }

    pub fn projection(self) -> bool {
        matches!(self, Mode::Projection | Mode::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format {other:?}, expected csv or json"))),
        }
    }
}

/// How λ was chosen; kept for reporting.
#[derive(Clone, Debug, PartialEq)]
pub enum LambdaChoice {
    Preimage,
    Zero,
    Table,
}

/// Settings for the growing-prefix convergence diagnostic.
#[derive(Clone, Debug)]
pub struct PrefixSettings {
    pub max_n: usize,
    pub seeds: usize,
    /// Final squared errors below this count as converged.
    pub threshold: f64,
    /// Points placed ahead of every random sequence.
    pub prepend: Vec<Point>,
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub kernel: Arc<KernelSpec>,
    pub measure: MeasureSpec,
    pub target: RkhsElement,
    pub lambda: LambdaSpec,
    pub lambda_choice: LambdaChoice,
    pub deltas: Vec<f64>,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub drop_tol: f64,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    /// Hardy truncation override for `K_P`.
    pub truncation: Option<usize>,
    pub prefix: Option<PrefixSettings>,
    /// Explicit points for one-off projections and `K_P` tables.
    pub points: Option<Vec<Point>>,
}

impl ExperimentConfig {
    /// A configuration with `λ` resolved as the exact preimage of `target`.
    pub fn with_preimage(
        experiment_id: impl Into<String>,
        measure: MeasureSpec,
        target: RkhsElement,
        ns: Vec<usize>,
        deltas: Vec<f64>,
        trials: usize,
        seed: u64,
    ) -> Result<Self> {
        let kernel = target.kernel().clone();
        let ctx = EmbeddingContext::new(kernel.clone(), measure)?;
        let lambda = ctx.preimage(&target)?;
        let cfg = Self {
            experiment_id: experiment_id.into(),
            kernel,
            measure,
            target,
            lambda,
            lambda_choice: LambdaChoice::Preimage,
            deltas,
            ns,
            trials,
            seed,
            mode: Mode::Both,
            drop_tol: DEFAULT_DROP_TOL,
            output: None,
            format: None,
            truncation: None,
            prefix: None,
            points: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// The embedding context for bounds; only the two built-in settings have one.
    pub fn context(&self) -> Result<EmbeddingContext> {
        let ctx = as_config(EmbeddingContext::new(self.kernel.clone(), self.measure))?;
        match self.truncation {
            Some(m) if self.kernel.is_szego() => as_config(ctx.with_truncation(m)),
            _ => Ok(ctx),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.ns.is_empty() {
            return fail("ns grid is empty".into());
        }
        if self.deltas.is_empty() {
            return fail("deltas grid is empty".into());
        }
        if let Some(n) = self.ns.iter().find(|n| **n == 0) {
            return fail(format!("sample size {n} in ns must be at least 1"));
        }
        if let Some(d) = self.deltas.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return fail(format!("delta {d} must be positive"));
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if !(self.drop_tol >= 0.0 && self.drop_tol < 1.0) {
            return fail(format!("drop_tol {} must lie in [0, 1)", self.drop_tol));
        }
        if self.kernel.space() != self.measure.space() {
            return fail(format!(
                "measure on the {} does not match the kernel on the {}",
                self.measure.space(),
                self.kernel.space()
            ));
        }
        if let Some(p) = &self.prefix {
            if p.max_n < 2 {
                return fail("prefix.max_n must be at least 2".into());
            }
            if p.seeds == 0 {
                return fail("prefix.seeds must be at least 1".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment_id: Option<String>,
    seed: Option<u64>,
    trials: Option<usize>,
    mode: Option<Mode>,
    #[serde(default)]
    deltas: Vec<f64>,
    #[serde(default)]
    ns: Vec<usize>,
    measure: MeasureName,
    kernel: KernelConfig,
    target: Option<TargetConfig>,
    lambda: Option<LambdaConfig>,
    output: Option<PathBuf>,
    format: Option<Format>,
    drop_tol: Option<f64>,
    truncation: Option<usize>,
    prefix: Option<RawPrefix>,
    points: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum MeasureName {
    Interval,
    Disk,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum KernelConfig {
    Fourier {
        #[serde(default = "default_rule")]
        rule: String,
        ratio: Option<f64>,
        truncation: Option<usize>,
        coeffs: Option<Vec<Vec<f64>>>,
    },
    Szego,
    Sum {
        left: Box<KernelConfig>,
        right: Box<KernelConfig>,
    },
    Scale {
        factor: FnConfig,
        inner: Box<KernelConfig>,
    },
    Normalize {
        inner: Box<KernelConfig>,
    },
    Restrict {
        subset: SubsetConfig,
        inner: Box<KernelConfig>,
    },
    Pullback {
        map: MapConfig,
        inner: Box<KernelConfig>,
    },
}

fn default_rule() -> String {
    "geometric".into()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum FnConfig {
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Monomial {
        n: u32,
    },
    Phase {
        k: i64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum SubsetConfig {
    DiskRadiusBelow { radius: f64 },
    IntervalWithin { lo: f64, hi: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum MapConfig {
    Circle { radius: f64 },
    Rotate { angle: f64 },
    Dilate { factor: f64 },
    Reflect,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
enum TargetConfig {
    PhiK { k: i64 },
    MonomialN { n: u32 },
    Section { point: Vec<f64> },
    Table { coeffs: Vec<Vec<f64>> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LambdaConfig {
    Named(String),
    Table { coeffs: Vec<Vec<f64>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrefix {
    max_n: usize,
    seeds: usize,
    #[serde(default = "default_threshold")]
    threshold: f64,
    #[serde(default)]
    prepend: Vec<Vec<f64>>,
}

fn default_threshold() -> f64 {
    1e-3
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Any library error raised while building config objects is a config error.
fn as_config<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Domain(m) | Error::Numerical(m) => Error::Config(m),
        other => other,
    })
}

fn build_kernel(cfg: &KernelConfig) -> Result<KernelSpec> {
    Ok(match cfg {
        KernelConfig::Fourier {
            rule,
            ratio,
            truncation,
            coeffs,
        } => match rule.as_str() {
            "geometric" => {
                let Some(r) = ratio else {
                    return config_err("geometric Fourier kernel needs `ratio`");
                };
                let m = truncation.unwrap_or(crate::embedding::DEFAULT_FOURIER_TRUNCATION);
                KernelSpec::fourier(as_config(FourierSeries::geometric(*r, m))?)
            }
            "table" => {
                let Some(rows) = coeffs else {
                    return config_err("table Fourier kernel needs `coeffs = [[j, mu_j], ...]`");
                };
                let mut table = BTreeMap::new();
                for row in rows {
                    let [j, mu] = row.as_slice() else {
                        return config_err(format!("kernel coefficient row {row:?} is not [j, mu]"));
                    };
                    table.insert(index(*j)?, *mu);
                }
                KernelSpec::fourier(as_config(FourierSeries::from_table(table))?)
            }
            other => return config_err(format!("unknown coefficient rule {other:?}")),
        },
        KernelConfig::Szego => KernelSpec::szego(),
        KernelConfig::Sum { left, right } => {
            as_config(KernelSpec::sum(build_kernel(left)?, build_kernel(right)?))?
        }
        KernelConfig::Scale { factor, inner } => {
            let f = match *factor {
                FnConfig::Constant { re, im } => PointFn::constant(Complex64::new(re, im)),
                FnConfig::Monomial { n } => PointFn::monomial(n),
                FnConfig::Phase { k } => PointFn::phase(k),
            };
            KernelSpec::scale(f, build_kernel(inner)?)
        }
        KernelConfig::Normalize { inner } => KernelSpec::normalize(build_kernel(inner)?),
        KernelConfig::Restrict { subset, inner } => {
            let p = match *subset {
                SubsetConfig::DiskRadiusBelow { radius } => PointPredicate::disk_radius_below(radius),
                SubsetConfig::IntervalWithin { lo, hi } => PointPredicate::interval_within(lo, hi),
            };
            KernelSpec::restrict(p, build_kernel(inner)?)
        }
        KernelConfig::Pullback { map, inner } => {
            let m = match *map {
                MapConfig::Circle { radius } => PointMap::circle(radius),
                MapConfig::Rotate { angle } => PointMap::rotate(angle),
                MapConfig::Dilate { factor } => PointMap::dilate(factor),
                MapConfig::Reflect => PointMap::reflect(),
            };
            as_config(KernelSpec::pullback(m, build_kernel(inner)?))?
        }
    })
}

fn index(v: f64) -> Result<i64> {
    if v.fract() != 0.0 || !v.is_finite() || v.abs() > 1e15 {
        return config_err(format!("index {v} is not an integer"));
    }
    Ok(v as i64)
}

fn coeff_table(rows: &[Vec<f64>]) -> Result<BTreeMap<i64, Complex64>> {
    let mut out = BTreeMap::new();
    for row in rows {
        let (j, re, im) = match row.as_slice() {
            [j, re] => (*j, *re, 0.0),
            [j, re, im] => (*j, *re, *im),
            _ => return config_err(format!("coefficient row {row:?} is not [j, re] or [j, re, im]")),
        };
        if out.insert(index(j)?, Complex64::new(re, im)).is_some() {
            return config_err(format!("coefficient index {j} listed twice"));
        }
    }
    Ok(out)
}

/// `[t]` on the interval, `[re, im]` on the disk.
pub fn parse_point(space: Space, coords: &[f64]) -> Result<Point> {
    let p = match (space, coords) {
        (Space::Interval, [t]) => Point::interval(*t),
        (Space::Disk, [re, im]) => Point::disk(Complex64::new(*re, *im)),
        _ => return config_err(format!("point {coords:?} does not fit the {space}")),
    };
    as_config(p)
}

impl RawConfig {
    fn resolve(self) -> Result<ExperimentConfig> {
        let kernel = Arc::new(build_kernel(&self.kernel)?);
        let measure = match self.measure {
            MeasureName::Interval => MeasureSpec::UniformInterval,
            MeasureName::Disk => MeasureSpec::UniformDisk,
        };
        let space = kernel.space();
        let target = match &self.target {
            None => RkhsElement::zero(kernel.clone()),
            Some(TargetConfig::PhiK { k }) => as_config(RkhsElement::phi(kernel.clone(), *k))?,
            Some(TargetConfig::MonomialN { n }) => {
                as_config(RkhsElement::monomial(kernel.clone(), *n))?
            }
            Some(TargetConfig::Section { point }) => {
                as_config(RkhsElement::section(kernel.clone(), parse_point(space, point)?))?
            }
            Some(TargetConfig::Table { coeffs }) => {
                as_config(RkhsElement::from_coeffs(kernel.clone(), coeff_table(coeffs)?))?
            }
        };

        let (lambda, lambda_choice) = match self.lambda {
            None => resolve_preimage(&kernel, measure, &target)?,
            Some(LambdaConfig::Named(name)) => match name.as_str() {
                "preimage" => resolve_preimage(&kernel, measure, &target)?,
                "zero" => (LambdaSpec::zero_on(space), LambdaChoice::Zero),
                other => return config_err(format!("unknown lambda choice {other:?}")),
            },
            Some(LambdaConfig::Table { coeffs }) => {
                let table = coeff_table(&coeffs)?;
                let lam = match space {
                    Space::Interval => LambdaSpec::FourierCoeffs(table),
                    Space::Disk => LambdaSpec::HardyWeighted(table),
                };
                as_config(lam.validate())?;
                (lam, LambdaChoice::Table)
            }
        };

        let points = self
            .points
            .map(|pts| pts.iter().map(|c| parse_point(space, c)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let prefix = self
            .prefix
            .map(|p| -> Result<PrefixSettings> {
                Ok(PrefixSettings {
                    max_n: p.max_n,
                    seeds: p.seeds,
                    threshold: p.threshold,
                    prepend: p
                        .prepend
                        .iter()
                        .map(|c| parse_point(space, c))
                        .collect::<Result<Vec<_>>>()?,
                })
            })
            .transpose()?;

        let cfg = ExperimentConfig {
            experiment_id: self.experiment_id.unwrap_or_else(|| "experiment".into()),
            kernel,
            measure,
            target,
            lambda,
            lambda_choice,
            deltas: self.deltas,
            ns: self.ns,
            trials: self.trials.unwrap_or(1),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            mode: self.mode.unwrap_or(Mode::Both),
            drop_tol: self.drop_tol.unwrap_or(DEFAULT_DROP_TOL),
            output: self.output,
            format: self.format,
            truncation: self.truncation,
            prefix,
            points,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn resolve_preimage(
    kernel: &Arc<KernelSpec>,
    measure: MeasureSpec,
    target: &RkhsElement,
) -> Result<(LambdaSpec, LambdaChoice)> {
    let ctx = as_config(EmbeddingContext::new(kernel.clone(), measure))?;
    let lam = as_config(ctx.preimage(target))?;
    Ok((lam, LambdaChoice::Preimage))
}
