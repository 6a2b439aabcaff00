//! Sampling measures, the derived measure `P_K`, and the λ families whose
//! `L²(P_K)` norms are available in closed form.
//!
//! Randomness comes from ChaCha12 keyed by `(seed, stream)`; the draw index is
//! the position in the keystream, so any stream can be regenerated on its own.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{domain, Result};
use crate::kernel::{fourier_basis, KernelSpec, Point, Space, DISK_MAX_RADIUS};

/// A sampling probability measure `P` on a base set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureSpec {
    /// Normalized Lebesgue measure on `[-π, π]`.
    UniformInterval,
    /// Normalized Lebesgue measure on the open unit disk.
    UniformDisk,
}

/// The generator behind every draw, positioned at the start of `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl MeasureSpec {
    pub fn space(&self) -> Space {
        match self {
            MeasureSpec::UniformInterval => Space::Interval,
            MeasureSpec::UniformDisk => Space::Disk,
        }
    }

    pub fn check_kernel(&self, kernel: &KernelSpec) -> Result<()> {
        if kernel.space() != self.space() {
            return domain(format!(
                "measure on the {} does not match a kernel on the {}",
                self.space(),
                kernel.space()
            ));
        }
        Ok(())
    }

    /// One draw from `P`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            MeasureSpec::UniformInterval => {
                let u: f64 = rng.random();
                Point::Interval(-PI + 2.0 * PI * u)
            }
            MeasureSpec::UniformDisk => {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                let r = u2.sqrt().min(DISK_MAX_RADIUS);
                Point::Disk(Complex64::from_polar(r, 2.0 * PI * u1))
            }
        }
    }

    /// `n` i.i.d. draws, a deterministic function of `(seed, stream, n)`.
    pub fn sample(&self, n: usize, seed: u64, stream: u64) -> Result<Vec<Point>> {
        if n == 0 {
            return domain("sample size must be at least 1");
        }
        let mut rng = stream_rng(seed, stream);
        Ok((0..n).map(|_| self.draw(&mut rng)).collect())
    }
}

/// Density `dP_K/dP` at `p`, i.e. `K(p, p)`.
pub fn pk_density(measure: &MeasureSpec, kernel: &KernelSpec, p: &Point) -> Result<f64> {
    measure.check_kernel(kernel)?;
    kernel.diag(p)
}

type LambdaFn = dyn Fn(&Point) -> Result<Complex64> + Send + Sync;

/// A λ given only as an evaluation rule.
#[derive(Clone)]
pub struct OpaqueLambda {
    name: String,
    f: Arc<LambdaFn>,
    /// Known `‖λ‖²_{L²(P_K)}`, if any.
    pub norm_sq: Option<f64>,
    /// Sample count for a Monte Carlo norm estimate when `norm_sq` is unknown.
    pub mc_samples: Option<usize>,
    pub mc_seed: u64,
}

impl OpaqueLambda {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Point) -> Result<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            norm_sq: None,
            mc_samples: None,
            mc_seed: 0,
        }
    }

    pub fn with_norm_sq(mut self, norm_sq: f64) -> Self {
        self.norm_sq = Some(norm_sq);
        self
    }

    pub fn with_mc_estimate(mut self, samples: usize, seed: u64) -> Self {
        self.mc_samples = Some(samples);
        self.mc_seed = seed;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for OpaqueLambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OpaqueLambda")
            .field("name", &self.name)
            .field("norm_sq", &self.norm_sq)
            .field("mc_samples", &self.mc_samples)
            .finish()
    }
}

/// A function `λ ∈ L²(X; P_K)`.
#[derive(Clone, Debug)]
pub enum LambdaSpec {
    /// `λ = Σ λ_j φ_j` on the interval, finite support.
    FourierCoeffs(BTreeMap<i64, Complex64>),
    /// `λ(z) = Σ (n+1)(n+2)(1 - |z|²) f_n zⁿ` on the disk, finite support.
    HardyWeighted(BTreeMap<i64, Complex64>),
    Opaque(OpaqueLambda),
}

impl LambdaSpec {
    pub fn fourier_zero() -> Self {
        LambdaSpec::FourierCoeffs(BTreeMap::new())
    }

    pub fn hardy_zero() -> Self {
        LambdaSpec::HardyWeighted(BTreeMap::new())
    }

    /// The zero λ of the family matching `space`.
    pub fn zero_on(space: Space) -> Self {
        match space {
            Space::Interval => Self::fourier_zero(),
            Space::Disk => Self::hardy_zero(),
        }
    }

    pub fn space(&self) -> Option<Space> {
        match self {
            LambdaSpec::FourierCoeffs(_) => Some(Space::Interval),
            LambdaSpec::HardyWeighted(_) => Some(Space::Disk),
            LambdaSpec::Opaque(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let table = match self {
            LambdaSpec::FourierCoeffs(t) => t,
            LambdaSpec::HardyWeighted(t) => {
                if let Some(n) = t.keys().find(|n| **n < 0) {
                    return domain(format!("Hardy degree {n} is negative"));
                }
                t
            }
            LambdaSpec::Opaque(_) => return Ok(()),
        };
        match table.iter().find(|(_, v)| !v.is_finite()) {
            Some((j, _)) => domain(format!("lambda coefficient {j} is not finite")),
            None => Ok(()),
        }
    }

    /// `λ(p)`.
    pub fn eval(&self, p: &Point) -> Result<Complex64> {
        match self {
            LambdaSpec::FourierCoeffs(t) => {
                let s = p.as_interval()?;
                Ok(t.iter().map(|(&j, &c)| c * fourier_basis(j, s)).sum())
            }
            LambdaSpec::HardyWeighted(t) => {
                let z = p.as_disk()?;
                let damp = 1.0 - z.norm_sqr();
                Ok(t.iter()
                    .map(|(&n, &f)| hardy_weight(n) * damp * f * z.powu(n as u32))
                    .sum())
            }
            LambdaSpec::Opaque(op) => (op.f)(p),
        }
    }
}

/// `(n+1)(n+2)`.
pub(crate) fn hardy_weight(n: i64) -> f64 {
    ((n + 1) * (n + 2)) as f64
}

/// A norm that is either exact (`std_error == 0`) or a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSq {
    pub value: f64,
    pub std_error: f64,
}

impl NormSq {
    fn exact(value: f64) -> Self {
        Self {
            value,
            std_error: 0.0,
        }
    }
}

/// `‖λ‖²_{L²(P_K)} = ∫ |λ(x)|² K(x,x) dP(x)`.
pub fn l2pk_norm_sq(lambda: &LambdaSpec, measure: &MeasureSpec, kernel: &KernelSpec) -> Result<NormSq> {
    measure.check_kernel(kernel)?;
    lambda.validate()?;
    match lambda {
        LambdaSpec::FourierCoeffs(t) => {
            let (MeasureSpec::UniformInterval, Some(series)) = (measure, kernel.as_fourier()) else {
                return domain("Fourier lambda needs the uniform interval and a Fourier-series kernel");
            };
            // dP_K = μ dP and {φ_j} is orthonormal in L²(P).
            let sum: f64 = t.values().map(|c| c.norm_sqr()).sum();
            Ok(NormSq::exact(series.total_mass() * sum))
        }
        LambdaSpec::HardyWeighted(t) => {
            if !(matches!(measure, MeasureSpec::UniformDisk) && kernel.is_szego()) {
                return domain("Hardy-weighted lambda needs the uniform disk and the Szego kernel");
            }
            Ok(NormSq::exact(
                t.iter().map(|(&n, f)| hardy_weight(n) * f.norm_sqr()).sum(),
            ))
        }
        LambdaSpec::Opaque(op) => {
            if let Some(v) = op.norm_sq {
                return Ok(NormSq::exact(v));
            }
            let Some(samples) = op.mc_samples else {
                return domain(format!(
                    "opaque lambda {} has neither a norm nor a Monte Carlo budget",
                    op.name
                ));
            };
            monte_carlo_l2pk(lambda, measure, kernel, samples, op.mc_seed)
        }
    }
}

/// Sample-mean estimate of `∫ |λ|² K(x,x) dP` with its standard error.
pub fn monte_carlo_l2pk(
    lambda: &LambdaSpec,
    measure: &MeasureSpec,
    kernel: &KernelSpec,
    samples: usize,
    seed: u64,
) -> Result<NormSq> {
    if samples < 2 {
        return domain("Monte Carlo norm estimate needs at least 2 samples");
    }
    let mut rng = stream_rng(seed, 0);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let x = measure.draw(&mut rng);
        let y = lambda.eval(&x)?.norm_sqr() * kernel.diag(&x)?;
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(NormSq {
        value: mean,
        std_error: (var / samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FourierSeries;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fourier() -> KernelSpec {
        KernelSpec::fourier(FourierSeries::geometric(0.5, 64).unwrap())
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        for m in [MeasureSpec::UniformInterval, MeasureSpec::UniformDisk] {
            let a = m.sample(50, 7, 3).unwrap();
            let b = m.sample(50, 7, 3).unwrap();
            assert_eq!(a, b);
            let other = m.sample(50, 7, 4).unwrap();
            assert_ne!(a, other);
            // Prefixes agree: a longer sample extends a shorter one.
            assert_eq!(&m.sample(80, 7, 3).unwrap()[..50], &a[..]);
        }
    }

    #[test]
    fn zero_sample_size_rejected() {
        assert!(MeasureSpec::UniformDisk.sample(0, 1, 0).is_err());
    }

    #[test]
    fn disk_area_law() {
        let pts = MeasureSpec::UniformDisk.sample(100_000, 11, 0).unwrap();
        let inside = pts
            .iter()
            .filter(|p| matches!(p, Point::Disk(z) if z.norm() < 0.5))
            .count() as f64
            / pts.len() as f64;
        assert!((inside - 0.25).abs() < 0.005, "fraction {inside}");
        assert!(pts.iter().all(|p| p.validate().is_ok()));
    }

    #[test]
    fn interval_mean_near_zero() {
        let pts = MeasureSpec::UniformInterval.sample(100_000, 12, 0).unwrap();
        let mean: f64 = pts.iter().map(|p| p.coords().0).sum::<f64>() / pts.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!(pts.iter().all(|p| p.validate().is_ok()));
    }

    #[test]
    fn pk_density_values() {
        let r: f64 = 0.6;
        let p = Point::disk(Complex64::from_polar(r, 1.1)).unwrap();
        let d = pk_density(&MeasureSpec::UniformDisk, &KernelSpec::szego(), &p).unwrap();
        assert!((d - 1.0 / (1.0 - r * r)).abs() < 1e-14);
        let t = Point::interval(0.4).unwrap();
        let d = pk_density(&MeasureSpec::UniformInterval, &fourier(), &t).unwrap();
        assert!((d - 3.0).abs() < 1e-12);
        let vanishing = KernelSpec::scale(crate::kernel::PointFn::monomial(2), KernelSpec::szego());
        let origin = Point::disk(c(0.0, 0.0)).unwrap();
        assert_eq!(pk_density(&MeasureSpec::UniformDisk, &vanishing, &origin).unwrap(), 0.0);
        assert!(pk_density(&MeasureSpec::UniformInterval, &KernelSpec::szego(), &origin).is_err());
    }

    #[test]
    fn closed_form_norms() {
        let disk = MeasureSpec::UniformDisk;
        let szego = KernelSpec::szego();
        assert_eq!(l2pk_norm_sq(&LambdaSpec::hardy_zero(), &disk, &szego).unwrap().value, 0.0);
        let one = LambdaSpec::HardyWeighted(BTreeMap::from([(0, c(1.0, 0.0))]));
        assert_eq!(l2pk_norm_sq(&one, &disk, &szego).unwrap().value, 2.0);

        let phi0 = LambdaSpec::FourierCoeffs(BTreeMap::from([(0, c(1.0, 0.0))]));
        let v = l2pk_norm_sq(&phi0, &MeasureSpec::UniformInterval, &fourier()).unwrap();
        assert!((v.value - 3.0).abs() < 1e-12);
        assert_eq!(v.std_error, 0.0);
    }

    #[test]
    fn opaque_needs_norm_or_budget() {
        let op = OpaqueLambda::new("one", |_| Ok(Complex64::new(1.0, 0.0)));
        let lam = LambdaSpec::Opaque(op.clone());
        assert!(l2pk_norm_sq(&lam, &MeasureSpec::UniformInterval, &fourier()).is_err());
        let known = LambdaSpec::Opaque(op.clone().with_norm_sq(3.0));
        assert_eq!(l2pk_norm_sq(&known, &MeasureSpec::UniformInterval, &fourier()).unwrap().value, 3.0);
        let mc = LambdaSpec::Opaque(op.with_mc_estimate(1000, 5));
        let est = l2pk_norm_sq(&mc, &MeasureSpec::UniformInterval, &fourier()).unwrap();
        // Constant integrand: the estimate is exact up to rounding.
        assert!((est.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn family_kernel_mismatch_rejected() {
        let phi0 = LambdaSpec::FourierCoeffs(BTreeMap::from([(0, c(1.0, 0.0))]));
        assert!(l2pk_norm_sq(&phi0, &MeasureSpec::UniformDisk, &KernelSpec::szego()).is_err());
        let bad = LambdaSpec::HardyWeighted(BTreeMap::from([(-1, c(1.0, 0.0))]));
        assert!(bad.validate().is_err());
    }
}
