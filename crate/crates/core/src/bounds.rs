//! Closed-form probability bounds for Monte Carlo kernel approximants.
//!
//! For `x_1..x_n ~ P` i.i.d., the approximant `(1/n) Σ λ(x_i) K_{x_i}` of `f`
//! has mean squared error
//!
//! ```text
//! E‖f - (1/n) Σ λ(x_i) K_{x_i}‖² = ‖f - Lλ‖² + (‖λ‖²_{P_K} - ‖Lλ‖²) / n
//! ```
//!
//! and Chebyshev's inequality with `h(t) = t²` turns this into a bound on the
//! probability that the error reaches `δ`. Every bound here is capped at 1;
//! [`BoundReport::uncapped`] keeps the raw value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::element::RkhsElement;
use crate::embedding::EmbeddingContext;
use crate::error::{domain, Error, Result};
use crate::measure::LambdaSpec;

const VARIANCE_NEG_TOL: f64 = 1e-12;

/// Right-hand side of the exceedance bound for one `(n, δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// `‖f - Lλ‖² / δ²`.
    pub term_bias: f64,
    /// `(‖λ‖²_{P_K} - ‖Lλ‖²) / (n δ²)`.
    pub term_variance: f64,
    /// `min(1, term_bias + term_variance)`.
    pub total: f64,
    pub uncapped: f64,
    pub n: usize,
    pub delta: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        domain(format!("delta must be positive and finite, got {delta}"))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        domain("sample size must be at least 1")
    } else {
        Ok(())
    }
}

/// `min(1, E[X²] / δ²)`, the bound on `P(|X| ≥ δ)`.
pub fn chebyshev_bound(second_moment: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if second_moment.is_nan() || second_moment < 0.0 {
        return domain(format!("second moment must be nonnegative, got {second_moment}"));
    }
    Ok((second_moment / (delta * delta)).min(1.0))
}

/// The bias `‖f - Lλ‖²` and per-sample variance `‖λ‖²_{P_K} - ‖Lλ‖²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorTerms {
    pub bias_sq: f64,
    pub variance: f64,
}

pub fn error_terms(ctx: &EmbeddingContext, f: &RkhsElement, lambda: &LambdaSpec) -> Result<ErrorTerms> {
    let image = ctx.apply_l(lambda)?;
    let bias_sq = ctx.dist_to_hp_sq(f, lambda)?;
    let lambda_sq = ctx.lambda_norm_sq(lambda)?;
    let variance = lambda_sq - image.norm_sq()?;
    if variance < -VARIANCE_NEG_TOL * lambda_sq.max(1.0) {
        return Err(Error::Numerical(format!(
            "variance term {variance} is negative; L is not nonexpansive here"
        )));
    }
    Ok(ErrorTerms { bias_sq, variance })
}

/// Exact mean of `‖f - (1/n) Σ λ(x_i) K_{x_i}‖²` over `P^n`.
pub fn expected_sq_error(
    ctx: &EmbeddingContext,
    f: &RkhsElement,
    lambda: &LambdaSpec,
    n: usize,
) -> Result<f64> {
    check_n(n)?;
    let t = error_terms(ctx, f, lambda)?;
    Ok(t.bias_sq + t.variance / n as f64)
}

/// Bound on `P^n(‖f - (1/n) Σ λ(x_i) K_{x_i}‖ ≥ δ)`.
pub fn thmbound_rhs(
    ctx: &EmbeddingContext,
    f: &RkhsElement,
    lambda: &LambdaSpec,
    n: usize,
    delta: f64,
) -> Result<BoundReport> {
    check_n(n)?;
    check_delta(delta)?;
    let t = error_terms(ctx, f, lambda)?;
    Ok(report_from_terms(t, n, delta))
}

pub(crate) fn report_from_terms(t: ErrorTerms, n: usize, delta: f64) -> BoundReport {
    let d2 = delta * delta;
    let term_bias = t.bias_sq / d2;
    let term_variance = t.variance / (n as f64 * d2);
    let uncapped = term_bias + term_variance;
    BoundReport {
        term_bias,
        term_variance,
        total: uncapped.min(1.0),
        uncapped,
        n,
        delta,
    }
}

/// `min(1, Σ_{j≠k} μ_j / (N δ² μ_k²))`: the bound for `f = φ_k` with `λ = φ_k / μ_k`.
pub fn fourier_basis_bound(mu: &BTreeMap<i64, f64>, k: i64, n: usize, delta: f64) -> Result<f64> {
    check_n(n)?;
    check_delta(delta)?;
    let Some(&mu_k) = mu.get(&k) else {
        return domain(format!("index {k} is outside the coefficient support"));
    };
    if mu_k.is_nan() || mu_k <= 0.0 {
        return domain(format!("mu_{k} = {mu_k} must be positive"));
    }
    let rest: f64 = mu.iter().filter(|(j, _)| **j != k).map(|(_, m)| m).sum();
    Ok((rest / (n as f64 * delta * delta * mu_k * mu_k)).min(1.0))
}

/// `min(1, (d² + 3d + 1) / (N δ²))`: the bound for `f = z^d` in the Hardy space.
pub fn hardy_monomial_bound(degree: u32, n: usize, delta: f64) -> Result<f64> {
    check_n(n)?;
    check_delta(delta)?;
    let d = degree as f64;
    Ok(((d * d + 3.0 * d + 1.0) / (n as f64 * delta * delta)).min(1.0))
}
