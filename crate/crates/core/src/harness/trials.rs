use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{error_terms, report_from_terms, BoundReport};
use crate::element::{residual_from_gram, CANCELLATION_WARN_REL};
use crate::error::{domain, Result};
use crate::harness::config::ExperimentConfig;
use crate::projection::{factorize, gram, monotone_error_curve_with_tol, projection_norm_sq};

/// Slack on `‖f - π f‖² ≤ ‖f - (1/n) Σ λ(x_i) K_{x_i}‖²`.
pub const ORDERING_SLACK: f64 = 1e-10;

/// Relative slack on the monotonicity of prefix error curves.
pub const MONOTONE_SLACK_REL: f64 = 1e-9;

/// Outcome of one `(trial, n, δ)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub n: usize,
    pub delta: f64,
    /// `‖f - (1/n) Σ λ(x_i) K_{x_i}‖²`.
    pub residual_sq: Option<f64>,
    /// `‖f - π f‖²` onto the sampled span.
    pub projection_error_sq: Option<f64>,
    /// `‖f - (1/n) Σ λ(x_i) K_{x_i}‖ ≥ δ`.
    pub exceeded_mc: Option<bool>,
    /// `‖f - π f‖ ≥ δ`.
    pub exceeded_proj: Option<bool>,
}

/// Aggregates over all trials for one `(n, δ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub experiment_id: String,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub freq_mc_exceed: Option<f64>,
    pub freq_proj_exceed: Option<f64>,
    pub bound: BoundReport,
    pub mean_residual_sq: Option<f64>,
    /// Standard error of `mean_residual_sq`.
    pub residual_std_error: Option<f64>,
    pub mean_projection_error_sq: Option<f64>,
    pub predicted_mean_residual_sq: f64,
    /// `sqrt(p (1 - p) / T)` at `p = bound.total`.
    pub binom_stderr: f64,
    pub seed: u64,
    /// Trials whose residual cancelled below `-1e-8 ‖f‖²` before clamping.
    pub cancellation_warnings: usize,
    /// Trials violating the projection/residual ordering.
    pub ordering_violations: usize,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
}

impl RunOutput {
    pub fn cancellation_warnings(&self) -> usize {
        // One count per (n, trial), repeated for every δ of that n.
        let per_n = self.summary.iter().map(|c| (c.n, c.cancellation_warnings));
        let mut seen = std::collections::BTreeMap::new();
        for (n, w) in per_n {
            seen.insert(n, w);
        }
        seen.values().sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct TrialOutcome {
    residual_sq: Option<f64>,
    projection_error_sq: Option<f64>,
    cancelled: bool,
}

/// Runs every `(n, trial)` pair: draw `n` points on stream `trial`, form the
/// Monte Carlo combination and/or the orthogonal projection, and score the
/// exceedance events for every `δ`.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let ctx = cfg.context()?;
    let terms = error_terms(&ctx, &cfg.target, &cfg.lambda)?;
    let norm_f_sq = cfg.target.norm_sq()?;

    let mut records = Vec::new();
    let mut summary = Vec::new();
    for &n in &cfg.ns {
        let outcomes = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_one(cfg, &ctx, norm_f_sq, n, trial as u64))
            .collect::<Result<Vec<_>>>()?;

        let cancelled = outcomes.iter().filter(|o| o.cancelled).count();
        let ordering_violations = outcomes
            .iter()
            .filter(|o| match (o.residual_sq, o.projection_error_sq) {
                (Some(r), Some(p)) => p > r + ORDERING_SLACK,
                _ => false,
            })
            .count();
        let residuals: Option<Vec<f64>> = outcomes.iter().map(|o| o.residual_sq).collect();
        let projections: Option<Vec<f64>> = outcomes.iter().map(|o| o.projection_error_sq).collect();
        let (mean_residual_sq, residual_std_error) = match &residuals {
            Some(r) => {
                let (m, se) = mean_and_stderr(r);
                (Some(m), Some(se))
            }
            None => (None, None),
        };
        let mean_projection_error_sq = projections.as_ref().map(|p| mean_and_stderr(p).0);

        for &delta in &cfg.deltas {
            let d2 = delta * delta;
            let bound = report_from_terms(terms, n, delta);
            let t = cfg.trials as f64;
            let freq = |v: &Option<Vec<f64>>| {
                v.as_ref()
                    .map(|xs| xs.iter().filter(|x| exceeds(**x, d2)).count() as f64 / t)
            };
            for (trial, o) in outcomes.iter().enumerate() {
                records.push(TrialRecord {
                    trial,
                    n,
                    delta,
                    residual_sq: o.residual_sq,
                    projection_error_sq: o.projection_error_sq,
                    exceeded_mc: o.residual_sq.map(|r| exceeds(r, d2)),
                    exceeded_proj: o.projection_error_sq.map(|p| exceeds(p, d2)),
                });
            }
            summary.push(CellSummary {
                experiment_id: cfg.experiment_id.clone(),
                n,
                delta,
                trials: cfg.trials,
                freq_mc_exceed: freq(&residuals),
                freq_proj_exceed: freq(&projections),
                bound,
                mean_residual_sq,
                residual_std_error,
                mean_projection_error_sq,
                predicted_mean_residual_sq: terms.bias_sq + terms.variance / n as f64,
                binom_stderr: (bound.total * (1.0 - bound.total) / t).sqrt(),
                seed: cfg.seed,
                cancellation_warnings: cancelled,
                ordering_violations,
            });
        }
    }
    Ok(RunOutput { records, summary })
}

/// `‖·‖ ≥ δ` evaluated on squared norms.
fn exceeds(norm_sq: f64, delta_sq: f64) -> bool {
    norm_sq.sqrt() >= delta_sq.sqrt()
}

fn run_one(
    cfg: &ExperimentConfig,
    ctx: &crate::embedding::EmbeddingContext,
    norm_f_sq: f64,
    n: usize,
    stream: u64,
) -> Result<TrialOutcome> {
    let points = cfg.measure.sample(n, cfg.seed, stream)?;
    let g = gram(ctx.kernel(), &points)?;
    let values = points
        .iter()
        .map(|x| cfg.target.evaluate(x))
        .collect::<Result<Vec<_>>>()?;

    let mut cancelled = false;
    let residual_sq = if cfg.mode.mc() {
        let scale = 1.0 / n as f64;
        let weights = points
            .iter()
            .map(|x| cfg.lambda.eval(x).map(|v| v * scale))
            .collect::<Result<Vec<_>>>()?;
        let raw = residual_from_gram(norm_f_sq, &values, &weights, &g)?;
        cancelled = raw < -CANCELLATION_WARN_REL * norm_f_sq;
        Some(raw.max(0.0))
    } else {
        None
    };
    let projection_error_sq = if cfg.mode.projection() {
        let factor = factorize(&g, cfg.drop_tol)?;
        Some((norm_f_sq - projection_norm_sq(&factor, &values)?).max(0.0))
    } else {
        None
    };
    Ok(TrialOutcome {
        residual_sq,
        projection_error_sq,
        cancelled,
    })
}

/// Sample mean and its standard error.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-seed error curves over one growing i.i.d. sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PrefixOutput {
    /// `curves[s][N - 1] = ‖f - π_N f‖²` for seed `s`.
    pub curves: Vec<Vec<f64>>,
    /// Entrywise median over seeds.
    pub median: Vec<f64>,
    /// Fraction of seeds whose final error is below the threshold.
    pub fraction_converged: f64,
    pub threshold: f64,
    /// Curves that increase by more than `1e-9 ‖f‖²` anywhere.
    pub nonmonotone_curves: usize,
}

/// Error curves of `cfg.target` along `seeds` independent sequences of length
/// `max_n` (after any prepended points).
pub fn prefix_convergence(
    cfg: &ExperimentConfig,
    max_n: usize,
    seeds: usize,
    threshold: f64,
) -> Result<PrefixOutput> {
    let prepend = cfg.prefix.as_ref().map(|p| p.prepend.clone()).unwrap_or_default();
    if max_n < 2 {
        return domain("prefix convergence needs max_n >= 2");
    }
    if seeds == 0 {
        return domain("prefix convergence needs at least one seed");
    }
    let norm_f_sq = cfg.target.norm_sq()?;
    let curves = (0..seeds)
        .into_par_iter()
        .map(|s| {
            let mut points = prepend.clone();
            points.extend(cfg.measure.sample(max_n, cfg.seed, s as u64)?);
            monotone_error_curve_with_tol(&cfg.target, &points, cfg.drop_tol)
        })
        .collect::<Result<Vec<_>>>()?;

    let len = curves[0].len();
    let median = (0..len)
        .map(|i| {
            let mut col: Vec<f64> = curves.iter().map(|c| c[i]).collect();
            median_of(&mut col)
        })
        .collect();
    let slack = MONOTONE_SLACK_REL * norm_f_sq;
    let nonmonotone_curves = curves
        .iter()
        .filter(|c| c.windows(2).any(|w| w[1] > w[0] + slack))
        .count();
    let converged = curves.iter().filter(|c| c[len - 1] < threshold).count();
    Ok(PrefixOutput {
        curves,
        median,
        fraction_converged: converged as f64 / seeds as f64,
        threshold,
        nonmonotone_curves,
    })
}

fn median_of(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::element::RkhsElement;
    use crate::harness::config::{Mode, PrefixSettings};
    use crate::kernel::{FourierSeries, KernelSpec, Point};
    use crate::measure::MeasureSpec;

    fn fourier_cfg(trials: usize) -> ExperimentConfig {
        let k = Arc::new(KernelSpec::fourier(FourierSeries::geometric(0.5, 64).unwrap()));
        let f = RkhsElement::phi(k, 0).unwrap();
        ExperimentConfig::with_preimage(
            "t",
            MeasureSpec::UniformInterval,
            f,
            vec![5, 10],
            vec![0.5, 1.0],
            trials,
            42,
        )
        .unwrap()
    }

    #[test]
    fn record_layout_and_ordering() {
        let out = run_trials(&fourier_cfg(20)).unwrap();
        assert_eq!(out.records.len(), 2 * 2 * 20);
        assert_eq!(out.summary.len(), 4);
        for r in &out.records {
            let (res, proj) = (r.residual_sq.unwrap(), r.projection_error_sq.unwrap());
            assert!(proj <= res + ORDERING_SLACK);
            if r.exceeded_proj.unwrap() {
                assert!(r.exceeded_mc.unwrap());
            }
        }
        assert!(out.summary.iter().all(|c| c.ordering_violations == 0));
    }

    #[test]
    fn runs_are_deterministic() {
        let a = run_trials(&fourier_cfg(15)).unwrap();
        let b = run_trials(&fourier_cfg(15)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.summary, b.summary);
    }

    #[test]
    fn modes_skip_work() {
        let mut cfg = fourier_cfg(5);
        cfg.mode = Mode::McWeights;
        let out = run_trials(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.projection_error_sq.is_none()));
        assert!(out.summary.iter().all(|c| c.freq_proj_exceed.is_none()));
        cfg.mode = Mode::Projection;
        let out = run_trials(&cfg).unwrap();
        assert!(out.records.iter().all(|r| r.residual_sq.is_none()));
        assert!(out.summary.iter().all(|c| c.mean_residual_sq.is_none()));
    }

    #[test]
    fn prefix_with_section_target_is_zero() {
        let k = Arc::new(KernelSpec::szego());
        let x = Point::disk(num_complex::Complex64::new(0.3, -0.2)).unwrap();
        let f = RkhsElement::section(k, x).unwrap();
        let mut cfg = fourier_cfg(1);
        cfg.kernel = f.kernel().clone();
        cfg.measure = MeasureSpec::UniformDisk;
        cfg.target = f.clone();
        cfg.prefix = Some(PrefixSettings {
            max_n: 10,
            seeds: 4,
            threshold: 1e-6,
            prepend: vec![x],
        });
        let out = prefix_convergence(&cfg, 10, 4, 1e-6).unwrap();
        let scale = f.norm_sq().unwrap();
        for c in &out.curves {
            assert_eq!(c.len(), 11);
            assert!(c.iter().all(|v| *v <= 1e-12 * scale));
        }
        assert_eq!(out.fraction_converged, 1.0);
        assert_eq!(out.nonmonotone_curves, 0);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median_of(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_of(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
