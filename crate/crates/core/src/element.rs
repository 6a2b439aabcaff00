//! Members of the RKHS, held either as basis coefficients or as finite kernel
//! combinations `Σ w_i K_{x_i}`.
//!
//! Coefficient form is available for the two base kernels only: Fourier index
//! `j` in the kernel's support (basis `φ_j(t) = e^{ijt}`, norm `Σ |c_j|²/μ_j`)
//! and Hardy degree `n ≥ 0` for the Szegő kernel (basis `zⁿ`, norm `Σ |f_n|²`).
//! All norms are exact finite sums.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::kernel::{fourier_basis, FourierSeries, KernelSpec, Point};

/// Relative size of a negative residual (before clamping) that is reported
/// as a numerical-quality warning.
pub const CANCELLATION_WARN_REL: f64 = 1e-8;


#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    /// Fourier index `j` or Hardy degree `n` mapped to its coefficient.
    BasisCoeffs(BTreeMap<i64, Complex64>),
    /// `Σ w_i K_{x_i}`.
    KernelCombo {
        points: Vec<Point>,
        weights: Vec<Complex64>,
    },
}

/// Which explicit orthogonal basis a base kernel is diagonal in.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Basis<'a> {
    Fourier(&'a FourierSeries),
    Hardy,
}

impl<'a> Basis<'a> {
    pub(crate) fn of(kernel: &'a KernelSpec) -> Result<Self> {
        match kernel {
            KernelSpec::Fourier(series) => Ok(Basis::Fourier(series)),
            KernelSpec::Szego => Ok(Basis::Hardy),
            _ => domain("coefficient form needs a Fourier-series or Szego kernel"),
        }
    }

    /// `‖e_j‖²` for the basis function with index `j`.
    fn weight(&self, j: i64) -> f64 {
        match self {
            Basis::Fourier(series) => 1.0 / series.coefficient(j),
            Basis::Hardy => 1.0,
        }
    }

    fn check_index(&self, j: i64) -> Result<()> {
        match self {
            Basis::Fourier(series) if !series.contains(j) => {
                domain(format!("Fourier index {j} lies outside the kernel's support"))
            }
            Basis::Hardy if j < 0 => domain(format!("Hardy degree {j} is negative")),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RkhsElement {
    kernel: Arc<KernelSpec>,
    repr: Representation,
}

impl RkhsElement {
    pub fn from_coeffs(kernel: Arc<KernelSpec>, coeffs: BTreeMap<i64, Complex64>) -> Result<Self> {
        let basis = Basis::of(&kernel)?;
        for (&j, c) in &coeffs {
            basis.check_index(j)?;
            if !c.is_finite() {
                return domain(format!("coefficient {j} is not finite"));
            }
        }
        Ok(Self {
            kernel,
            repr: Representation::BasisCoeffs(coeffs),
        })
    }

    pub fn from_combo(
        kernel: Arc<KernelSpec>,
        points: Vec<Point>,
        weights: Vec<Complex64>,
    ) -> Result<Self> {
        if points.len() != weights.len() {
            return domain(format!(
                "kernel combination has {} points but {} weights",
                points.len(),
                weights.len()
            ));
        }
        let space = kernel.space();
        for p in &points {
            p.validate()?;
            if p.space() != space {
                return domain(format!("point {p:?} is not in the kernel's {space}"));
            }
        }
        Ok(Self {
            kernel,
            repr: Representation::KernelCombo { points, weights },
        })
    }

    /// The basis element `φ_k` of a Fourier-series kernel.
    pub fn phi(kernel: Arc<KernelSpec>, k: i64) -> Result<Self> {
        if kernel.as_fourier().is_none() {
            return domain("phi_k needs a Fourier-series kernel");
        }
        Self::from_coeffs(kernel, BTreeMap::from([(k, Complex64::new(1.0, 0.0))]))
    }

    /// The monomial `zⁿ` in the Hardy space.
    pub fn monomial(kernel: Arc<KernelSpec>, n: u32) -> Result<Self> {
        if !kernel.is_szego() {
            return domain("monomial_n needs the Szego kernel");
        }
        Self::from_coeffs(kernel, BTreeMap::from([(n as i64, Complex64::new(1.0, 0.0))]))
    }

    /// The kernel section `K_x = K(·, x)`.
    pub fn section(kernel: Arc<KernelSpec>, x: Point) -> Result<Self> {
        Self::from_combo(kernel, vec![x], vec![Complex64::new(1.0, 0.0)])
    }

    pub fn zero(kernel: Arc<KernelSpec>) -> Self {
        let repr = match Basis::of(&kernel) {
            Ok(_) => Representation::BasisCoeffs(BTreeMap::new()),
            Err(_) => Representation::KernelCombo {
                points: Vec::new(),
                weights: Vec::new(),
            },
        };
        Self { kernel, repr }
    }

    pub fn kernel(&self) -> &Arc<KernelSpec> {
        &self.kernel
    }

    pub fn repr(&self) -> &Representation {
        &self.repr
    }

    pub fn coefficients(&self) -> Option<&BTreeMap<i64, Complex64>> {
        match &self.repr {
            Representation::BasisCoeffs(c) => Some(c),
            Representation::KernelCombo { .. } => None,
        }
    }

    /// Points and weights of a kernel combination.
    pub fn combo(&self) -> Option<(&[Point], &[Complex64])> {
        match &self.repr {
            Representation::KernelCombo { points, weights } => Some((points, weights)),
            Representation::BasisCoeffs(_) => None,
        }
    }

    fn check_same_kernel(&self, other: &RkhsElement) -> Result<()> {
        if Arc::ptr_eq(&self.kernel, &other.kernel) || self.kernel.same_as(&other.kernel) {
            Ok(())
        } else {
            domain("elements belong to different kernels")
        }
    }

    /// `f(p) = ⟨f, K_p⟩`.
    pub fn evaluate(&self, p: &Point) -> Result<Complex64> {
        match &self.repr {
            Representation::BasisCoeffs(coeffs) => match Basis::of(&self.kernel)? {
                Basis::Fourier(_) => {
                    let t = p.as_interval()?;
                    Ok(coeffs.iter().map(|(&j, &c)| c * fourier_basis(j, t)).sum())
                }
                Basis::Hardy => {
                    let z = p.as_disk()?;
                    Ok(coeffs.iter().map(|(&n, &c)| c * z.powu(n as u32)).sum())
                }
            },
            Representation::KernelCombo { points, weights } => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, w) in points.iter().zip(weights) {
                    acc += w * self.kernel.eval(p, x)?;
                }
                Ok(acc)
            }
        }
    }

    /// `⟨self, other⟩`, linear in `self` and conjugate-linear in `other`.
    pub fn inner(&self, other: &RkhsElement) -> Result<Complex64> {
        self.check_same_kernel(other)?;
        match (&self.repr, &other.repr) {
            (Representation::BasisCoeffs(c), Representation::BasisCoeffs(d)) => {
                let basis = Basis::of(&self.kernel)?;
                Ok(c.iter()
                    .filter_map(|(j, cj)| d.get(j).map(|dj| cj * dj.conj() * basis.weight(*j)))
                    .sum())
            }
            (
                Representation::KernelCombo { points: xs, weights: ws },
                Representation::KernelCombo { points: ys, weights: vs },
            ) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (x, w) in xs.iter().zip(ws) {
                    for (y, v) in ys.iter().zip(vs) {
                        acc += w * v.conj() * self.kernel.eval(y, x)?;
                    }
                }
                Ok(acc)
            }
            (Representation::BasisCoeffs(_), Representation::KernelCombo { points, weights }) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (y, v) in points.iter().zip(weights) {
                    acc += v.conj() * self.evaluate(y)?;
                }
                Ok(acc)
            }
            (Representation::KernelCombo { .. }, Representation::BasisCoeffs(_)) => {
                Ok(other.inner(self)?.conj())
            }
        }
    }

    /// `‖f‖²_H`, summed as a Hermitian form so the result is real by construction.
    pub fn norm_sq(&self) -> Result<f64> {
        let v = match &self.repr {
            Representation::BasisCoeffs(c) => {
                let basis = Basis::of(&self.kernel)?;
                c.iter().map(|(j, cj)| cj.norm_sqr() * basis.weight(*j)).sum()
            }
            Representation::KernelCombo { points, weights } => {
                combo_norm_sq(&self.kernel, points, weights)?
            }
        };
        Ok(v.max(0.0))
    }

    pub fn norm_h(&self) -> Result<f64> {
        self.norm_sq().map(f64::sqrt)
    }

    /// `‖self - approx‖²` by expansion, before clamping at zero.
    pub fn residual_norm_sq_raw(&self, approx: &RkhsElement) -> Result<f64> {
        self.check_same_kernel(approx)?;
        let Some((points, weights)) = approx.combo() else {
            return domain("residual approximant must be a kernel combination");
        };
        let values = points
            .iter()
            .map(|x| self.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        let quad = combo_norm_sq(&self.kernel, points, weights)?;
        let cross: f64 = weights.iter().zip(&values).map(|(w, v)| (w.conj() * v).re).sum();
        Ok(self.norm_sq()? - 2.0 * cross + quad)
    }

    /// `‖self - approx‖²`, clamped at zero. `approx` must be a kernel combination
    /// whose weights already include any `1/n` factor.
    pub fn residual_norm_sq(&self, approx: &RkhsElement) -> Result<f64> {
        self.residual_norm_sq_raw(approx).map(|v| v.max(0.0))
    }

    /// Coefficients of a Fourier-kernel combination, `c_j = μ_j Σ_i w_i conj(φ_j(x_i))`.
    /// Costs `O(n·M)` instead of the `O(n²)` kernel sums.
    pub fn fourier_coeffs_of_combo(&self) -> Result<BTreeMap<i64, Complex64>> {
        let Some(series) = self.kernel.as_fourier() else {
            return domain("fourier_coeffs_of_combo needs a Fourier-series kernel");
        };
        let Some((points, weights)) = self.combo() else {
            return domain("element is not a kernel combination");
        };
        let mut out = BTreeMap::new();
        for (&j, &mu) in series.coefficients() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in points.iter().zip(weights) {
                acc += w * fourier_basis(j, x.as_interval()?).conj();
            }
            out.insert(j, mu * acc);
        }
        Ok(out)
    }
}

/// `‖f - Σ w_i K_{x_i}‖²` from precomputed pieces: `‖f‖²`, `values[i] = f(x_i)`
/// and the Gram matrix `gram[(i, k)] = K(x_k, x_i)`. Unclamped.
pub fn residual_from_gram(
    norm_f_sq: f64,
    values: &[Complex64],
    weights: &[Complex64],
    gram: &DMatrix<Complex64>,
) -> Result<f64> {
    let n = weights.len();
    if values.len() != n || gram.nrows() != n || gram.ncols() != n {
        return domain("residual_from_gram: inconsistent lengths");
    }
    let mut quad = 0.0;
    for i in 0..n {
        quad += weights[i].norm_sqr() * gram[(i, i)].re;
        for k in (i + 1)..n {
            quad += 2.0 * (weights[i] * weights[k].conj() * gram[(i, k)]).re;
        }
    }
    let cross: f64 = weights.iter().zip(values).map(|(w, v)| (w.conj() * v).re).sum();
    Ok(norm_f_sq - 2.0 * cross + quad)
}

/// `‖Σ w_i K_{x_i}‖²` before clamping.
fn combo_norm_sq(kernel: &KernelSpec, points: &[Point], weights: &[Complex64]) -> Result<f64> {
    let mut quad = 0.0;
    for (i, (xi, wi)) in points.iter().zip(weights).enumerate() {
        quad += wi.norm_sqr() * kernel.diag(xi)?;
        for (xk, wk) in points.iter().zip(weights).skip(i + 1) {
            // Both orderings of (i, k): 2 Re(w_i conj(w_k) K(x_k, x_i)).
            quad += 2.0 * (wi * wk.conj() * kernel.eval(xk, xi)?).re;
        }
    }
    Ok(quad)
}
