//! The operator `L_{P,K} λ = ∫ λ(x) K_x dP(x)` for the two example pairs
//! `(P, K)`, its Monte Carlo realization, exact preimages, and the kernel
//! `K_P` of its range `H_P`.
//!
//! On the interval, `L_{P,K}` is diagonal in `φ_j` with eigenvalue `μ_j`.
//! On the disk, the Hardy-weighted family
//! `λ(z) = Σ (n+1)(n+2)(1 - |z|²) f_n zⁿ` is mapped to `Σ f_n zⁿ`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::element::{Basis, RkhsElement};
use crate::error::{domain, Result};
use crate::kernel::{fourier_basis, KernelSpec, Point};
use crate::measure::{hardy_weight, l2pk_norm_sq, LambdaSpec, MeasureSpec};

pub const DEFAULT_FOURIER_TRUNCATION: usize = 64;
pub const DEFAULT_HARDY_TRUNCATION: usize = 128;

/// Largest tolerated truncation error of the Hardy `K_P` series before the
/// closed form is used instead.
const KP_SERIES_TAIL_TOL: f64 = 1e-16;

/// The pair `(P, K)` together with the series truncation `M`.
#[derive(Clone, Debug)]
pub struct EmbeddingContext {
    kernel: Arc<KernelSpec>,
    measure: MeasureSpec,
    truncation: usize,
}

impl EmbeddingContext {
    /// Accepts a Fourier-series kernel with the uniform interval measure, or the
    /// Szegő kernel with the uniform disk measure.
    pub fn new(kernel: Arc<KernelSpec>, measure: MeasureSpec) -> Result<Self> {
        measure.check_kernel(&kernel)?;
        let truncation = match (kernel.as_ref(), measure) {
            (KernelSpec::Fourier(series), MeasureSpec::UniformInterval) => series.truncation(),
            (KernelSpec::Szego, MeasureSpec::UniformDisk) => DEFAULT_HARDY_TRUNCATION,
            _ => return domain("embedding needs (Fourier, interval) or (Szego, disk)"),
        };
        Ok(Self {
            kernel,
            measure,
            truncation,
        })
    }

    /// Overrides the Hardy truncation; Fourier contexts share `M` with the kernel.
    pub fn with_truncation(mut self, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return domain("truncation must be positive");
        }
        if let Some(series) = self.kernel.as_fourier() {
            if series.truncation() != truncation {
                return domain(format!(
                    "Fourier kernel is truncated at {}, not {truncation}",
                    series.truncation()
                ));
            }
        }
        self.truncation = truncation;
        Ok(self)
    }

    pub fn kernel(&self) -> &Arc<KernelSpec> {
        &self.kernel
    }

    pub fn measure(&self) -> MeasureSpec {
        self.measure
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn basis(&self) -> Basis<'_> {
        Basis::of(&self.kernel).expect("context kernel is a base kernel")
    }

    /// `‖λ‖²_{L²(P_K)}` for the closed-form families.
    pub fn lambda_norm_sq(&self, lambda: &LambdaSpec) -> Result<f64> {
        Ok(l2pk_norm_sq(lambda, &self.measure, &self.kernel)?.value)
    }

    /// `L_{P,K} λ` in coefficient form.
    pub fn apply_l(&self, lambda: &LambdaSpec) -> Result<RkhsElement> {
        lambda.validate()?;
        let coeffs: BTreeMap<i64, Complex64> = match (self.basis(), lambda) {
            (Basis::Fourier(series), LambdaSpec::FourierCoeffs(t)) => t
                .iter()
                .filter(|(j, _)| series.contains(**j))
                .map(|(&j, &c)| (j, c * series.coefficient(j)))
                .collect(),
            (Basis::Hardy, LambdaSpec::HardyWeighted(t)) => t.clone(),
            (_, LambdaSpec::Opaque(_)) => {
                return domain("opaque lambda has no closed form; use apply_l_mc")
            }
            _ => return domain("lambda family does not match the context"),
        };
        RkhsElement::from_coeffs(self.kernel.clone(), coeffs)
    }

    /// `(1/n) Σ λ(x_i) K_{x_i}` with `x_i` drawn from `P` on `(seed, stream)`.
    pub fn apply_l_mc(
        &self,
        lambda: &LambdaSpec,
        n: usize,
        seed: u64,
        stream: u64,
    ) -> Result<RkhsElement> {
        let points = self.measure.sample(n, seed, stream)?;
        self.mc_combo(lambda, points)
    }

    /// `(1/n) Σ λ(x_i) K_{x_i}` on given points.
    pub fn mc_combo(&self, lambda: &LambdaSpec, points: Vec<Point>) -> Result<RkhsElement> {
        if points.is_empty() {
            return domain("Monte Carlo combination needs at least one point");
        }
        let scale = 1.0 / points.len() as f64;
        let weights = points
            .iter()
            .map(|x| lambda.eval(x).map(|v| v * scale))
            .collect::<Result<Vec<_>>>()?;
        RkhsElement::from_combo(self.kernel.clone(), points, weights)
    }

    /// A λ with `L_{P,K} λ = f` exactly at the truncation.
    pub fn preimage(&self, f: &RkhsElement) -> Result<LambdaSpec> {
        let Some(coeffs) = f.coefficients() else {
            return domain("preimage needs an element in coefficient form");
        };
        if !self.kernel.same_as(f.kernel()) {
            return domain("element belongs to a different kernel");
        }
        Ok(match self.basis() {
            Basis::Fourier(series) => LambdaSpec::FourierCoeffs(
                coeffs
                    .iter()
                    .map(|(&j, &c)| (j, c / series.coefficient(j)))
                    .collect(),
            ),
            Basis::Hardy => LambdaSpec::HardyWeighted(coeffs.clone()),
        })
    }

    /// Reproducing kernel `K_P(x, y) = ∫ K(x,z) K(z,y) / K(z,z) dP(z)` of `H_P`.
    pub fn kp_eval(&self, x: &Point, y: &Point) -> Result<Complex64> {
        match self.basis() {
            Basis::Fourier(series) => {
                let (s, t) = (x.as_interval()?, y.as_interval()?);
                let mu = series.total_mass();
                Ok(series
                    .coefficients()
                    .iter()
                    .map(|(&j, &mj)| (mj * mj / mu) * fourier_basis(j, s - t))
                    .sum())
            }
            Basis::Hardy => {
                let w = x.as_disk()? * y.as_disk()?.conj();
                Ok(hardy_kp(w, self.truncation))
            }
        }
    }

    /// `‖f - L_{P,K} λ‖²`, an upper bound on `d_H(f, H_P)²`.
    pub fn dist_to_hp_sq(&self, f: &RkhsElement, lambda: &LambdaSpec) -> Result<f64> {
        let image = self.apply_l(lambda)?;
        difference_norm_sq(f, &image)
    }
}

/// `Σ_n wⁿ / ((n+1)(n+2))`, summed to `truncation` when the tail is negligible,
/// otherwise from `((1-w) log(1-w) + w) / w²`.
fn hardy_kp(w: Complex64, truncation: usize) -> Complex64 {
    let r = w.norm();
    let m = truncation as f64;
    let tail = r.powf(m + 1.0) / ((m + 2.0) * (m + 3.0) * (1.0 - r));
    if tail <= KP_SERIES_TAIL_TOL {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        for n in 0..=truncation as i64 {
            acc += pow / hardy_weight(n);
            pow *= w;
        }
        acc
    } else {
        let one = Complex64::new(1.0, 0.0);
        ((one - w) * (one - w).ln() + w) / (w * w)
    }
}

/// `‖f - g‖²`, exact on coefficients when both are in coefficient form.
pub(crate) fn difference_norm_sq(f: &RkhsElement, g: &RkhsElement) -> Result<f64> {
    if let (Some(a), Some(b)) = (f.coefficients(), g.coefficients()) {
        let mut diff = a.clone();
        for (&j, &v) in b {
            *diff.entry(j).or_insert(Complex64::new(0.0, 0.0)) -= v;
        }
        return RkhsElement::from_coeffs(f.kernel().clone(), diff)?.norm_sq();
    }
    let cross = f.inner(g)?.re;
    Ok((f.norm_sq()? - 2.0 * cross + g.norm_sq()?).max(0.0))
}
