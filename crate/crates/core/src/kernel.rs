//! Positive-semidefinite kernels on the two example base sets.
//!
//! Two concrete families are provided: periodic Fourier-series kernels on
//! `[-π, π]` and the Szegő kernel of the Hardy space on the open unit disk.
//! Both can be combined with the usual kernel calculus: sums, scaling by a
//! function, normalization, restriction to a subset and pullback along a map.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Largest admissible modulus of a disk point. Keeps the Szegő diagonal finite.
pub const DISK_MAX_RADIUS: f64 = 1.0 - 1e-12;

/// Default relative tolerance for [`KernelSpec::psd_check`].
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Largest analytic tail `Σ_{|j|>M} μ_j` accepted for a truncated Fourier series.
pub const SERIES_TAIL_TOL: f64 = 1e-12;

const HERMITIAN_DIAG_TOL: f64 = 1e-12;

/// The base set a point or kernel lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Interval,
    Disk,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Interval => f.write_str("interval [-pi, pi]"),
            Space::Disk => f.write_str("unit disk"),
        }
    }
}

/// A point of one of the two base sets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    /// `t` in radians, `-π ≤ t ≤ π`.
    Interval(f64),
    /// `z` with `|z| ≤ 1 - 1e-12`.
    Disk(Complex64),
}

impl Point {
    pub fn interval(t: f64) -> Result<Self> {
        let p = Point::Interval(t);
        p.validate()?;
        Ok(p)
    }

    pub fn disk(z: Complex64) -> Result<Self> {
        let p = Point::Disk(z);
        p.validate()?;
        Ok(p)
    }

    pub fn space(&self) -> Space {
        match self {
            Point::Interval(_) => Space::Interval,
            Point::Disk(_) => Space::Disk,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Point::Interval(t) if t.is_finite() && (-PI..=PI).contains(&t) => Ok(()),
            Point::Interval(t) => domain(format!("interval point {t} outside [-pi, pi]")),
            Point::Disk(z) if z.is_finite() && z.norm() <= DISK_MAX_RADIUS => Ok(()),
            Point::Disk(z) => domain(format!("disk point {z} outside |z| <= 1 - 1e-12")),
        }
    }

    pub fn as_interval(&self) -> Result<f64> {
        self.validate()?;
        match *self {
            Point::Interval(t) => Ok(t),
            Point::Disk(_) => domain("expected an interval point, got a disk point"),
        }
    }

    pub fn as_disk(&self) -> Result<Complex64> {
        self.validate()?;
        match *self {
            Point::Disk(z) => Ok(z),
            Point::Interval(_) => domain("expected a disk point, got an interval point"),
        }
    }

    /// Real/imaginary pair, with imaginary part 0 on the interval.
    pub fn coords(&self) -> (f64, f64) {
        match *self {
            Point::Interval(t) => (t, 0.0),
            Point::Disk(z) => (z.re, z.im),
        }
    }
}

/// The basis function `φ_j(t) = e^{ijt}` on `[-π, π]`.
pub fn fourier_basis(j: i64, t: f64) -> Complex64 {
    Complex64::cis(j as f64 * t)
}

/// How the coefficients of a [`FourierSeries`] were produced.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientRule {
    /// `μ_j = r^{|j|}`; evaluated through the closed Poisson-kernel form.
    Geometric { ratio: f64 },
    /// An explicit finite table.
    Table,
}

/// Kernel `K(s,t) = Σ_{|j|≤M} μ_j φ_j(s) conj(φ_j(t))` with positive weights `μ_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierSeries {
    coeffs: BTreeMap<i64, f64>,
    truncation: usize,
    rule: CoefficientRule,
    tail_bound: f64,
}

impl FourierSeries {
    /// Geometric weights `μ_j = ratio^{|j|}` for `|j| ≤ truncation`.
    pub fn geometric(ratio: f64, truncation: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return domain(format!("geometric ratio {ratio} must lie in (0, 1)"));
        }
        if truncation == 0 {
            return domain("truncation must be positive");
        }
        let m = truncation as i64;
        let coeffs = (-m..=m).map(|j| (j, ratio.powi(j.unsigned_abs() as i32))).collect();
        let tail_bound = 2.0 * ratio.powi(truncation as i32 + 1) / (1.0 - ratio);
        if tail_bound >= SERIES_TAIL_TOL {
            return domain(format!(
                "truncation {truncation} leaves tail {tail_bound:e} >= {SERIES_TAIL_TOL:e}; increase M"
            ));
        }
        Ok(Self {
            coeffs,
            truncation,
            rule: CoefficientRule::Geometric { ratio },
            tail_bound,
        })
    }

    /// An explicit finite coefficient table; the series is exact, so its tail is 0.
    pub fn from_table(coeffs: BTreeMap<i64, f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return domain("coefficient table is empty");
        }
        if let Some((j, mu)) = coeffs.iter().find(|(_, mu)| !(mu.is_finite() && **mu > 0.0)) {
            return domain(format!("coefficient mu_{j} = {mu} must be positive and finite"));
        }
        let truncation = coeffs.keys().map(|j| j.unsigned_abs() as usize).max().unwrap_or(0);
        Ok(Self {
            coeffs,
            truncation,
            rule: CoefficientRule::Table,
            tail_bound: 0.0,
        })
    }

    /// `μ_j`, or 0 outside the support.
    pub fn coefficient(&self, j: i64) -> f64 {
        self.coeffs.get(&j).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &BTreeMap<i64, f64> {
        &self.coeffs
    }

    pub fn contains(&self, j: i64) -> bool {
        self.coeffs.contains_key(&j)
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn rule(&self) -> &CoefficientRule {
        &self.rule
    }

    /// Analytic bound on `Σ_{|j|>M} μ_j` for the untruncated family.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// `μ = Σ_j μ_j`, the constant diagonal `K(t,t)`.
    pub fn total_mass(&self) -> f64 {
        self.coeffs.values().sum()
    }

    /// Direct partial sum over the stored coefficients.
    pub fn eval_truncated(&self, s: f64, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&j, &mu)| mu * fourier_basis(j, s - t))
            .sum()
    }

    pub fn eval(&self, s: f64, t: f64) -> Complex64 {
        match self.rule {
            CoefficientRule::Geometric { ratio } => {
                // Poisson kernel (1 - r²) / (1 - 2r cos θ + r²).
                let theta = s - t;
                let r2 = ratio * ratio;
                Complex64::new((1.0 - r2) / (1.0 - 2.0 * ratio * theta.cos() + r2), 0.0)
            }
            CoefficientRule::Table => self.eval_truncated(s, t),
        }
    }

    fn diag(&self) -> f64 {
        match self.rule {
            CoefficientRule::Geometric { ratio } => (1.0 + ratio) / (1.0 - ratio),
            CoefficientRule::Table => self.total_mass(),
        }
    }
}

type ScalarFn = dyn Fn(&Point) -> Result<Complex64> + Send + Sync;
type PredicateFn = dyn Fn(&Point) -> bool + Send + Sync;
type MapFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;

/// A named function `Point → ℂ`, used by the scaling combinator.
#[derive(Clone)]
pub struct PointFn {
    name: String,
    f: Arc<ScalarFn>,
}

impl PointFn {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Point) -> Result<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(format!("constant({c})"), move |_| Ok(c))
    }

    /// `z ↦ z^n` on the disk.
    pub fn monomial(n: u32) -> Self {
        Self::new(format!("monomial({n})"), move |p| Ok(p.as_disk()?.powu(n)))
    }

    /// `t ↦ e^{ikt}` on the interval.
    pub fn phase(k: i64) -> Self {
        Self::new(format!("phase({k})"), move |p| Ok(fourier_basis(k, p.as_interval()?)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn call(&self, p: &Point) -> Result<Complex64> {
        (self.f)(p)
    }
}

impl fmt::Debug for PointFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointFn({})", self.name)
    }
}

/// A named subset of a base set, used by the restriction combinator.
#[derive(Clone)]
pub struct PointPredicate {
    name: String,
    f: Arc<PredicateFn>,
}

impl PointPredicate {
    pub fn new(name: impl Into<String>, f: impl Fn(&Point) -> bool + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `{ z : |z| < radius }`.
    pub fn disk_radius_below(radius: f64) -> Self {
        Self::new(format!("disk_radius_below({radius})"), move |p| {
            matches!(p, Point::Disk(z) if z.norm() < radius)
        })
    }

    /// `{ t : lo ≤ t ≤ hi }`.
    pub fn interval_within(lo: f64, hi: f64) -> Self {
        Self::new(format!("interval_within({lo}, {hi})"), move |p| {
            matches!(p, Point::Interval(t) if (lo..=hi).contains(t))
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn admits(&self, p: &Point) -> bool {
        (self.f)(p)
    }
}

impl fmt::Debug for PointPredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointPredicate({})", self.name)
    }
}

/// A named map between base sets, used by the pullback combinator.
#[derive(Clone)]
pub struct PointMap {
    name: String,
    source: Space,
    target: Space,
    f: Arc<MapFn>,
}

impl PointMap {
    pub fn new(
        name: impl Into<String>,
        source: Space,
        target: Space,
        f: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            source,
            target,
            f: Arc::new(f),
        }
    }

    /// `t ↦ radius·e^{it}`, interval to disk.
    pub fn circle(radius: f64) -> Self {
        Self::new(format!("circle({radius})"), Space::Interval, Space::Disk, move |p| {
            Point::disk(radius * Complex64::cis(p.as_interval()?))
        })
    }

    /// `z ↦ e^{iα} z` on the disk.
    pub fn rotate(angle: f64) -> Self {
        Self::new(format!("rotate({angle})"), Space::Disk, Space::Disk, move |p| {
            Point::disk(Complex64::cis(angle) * p.as_disk()?)
        })
    }

    /// `z ↦ c·z` on the disk; leaves the domain for large `c`.
    pub fn dilate(factor: f64) -> Self {
        Self::new(format!("dilate({factor})"), Space::Disk, Space::Disk, move |p| {
            Point::disk(factor * p.as_disk()?)
        })
    }

    /// `t ↦ -t` on the interval.
    pub fn reflect() -> Self {
        Self::new("reflect", Space::Interval, Space::Interval, |p| {
            Point::interval(-p.as_interval()?)
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn source(&self) -> Space {
        self.source
    }

    pub fn target(&self) -> Space {
        self.target
    }

    pub fn apply(&self, p: &Point) -> Result<Point> {
        if p.space() != self.source {
            return domain(format!("map {} expects a point of the {}", self.name, self.source));
        }
        let q = (self.f)(p)?;
        if q.space() != self.target {
            return domain(format!("map {} left its declared target {}", self.name, self.target));
        }
        q.validate()?;
        Ok(q)
    }
}

impl fmt::Debug for PointMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointMap({}: {} -> {})", self.name, self.source, self.target)
    }
}

/// A positive-semidefinite kernel: a base family or a combinator tree.
#[derive(Clone, Debug)]
pub enum KernelSpec {
    Fourier(FourierSeries),
    Szego,
    Sum(Arc<KernelSpec>, Arc<KernelSpec>),
    Scale {
        factor: PointFn,
        inner: Arc<KernelSpec>,
    },
    Normalize(Arc<KernelSpec>),
    Restrict {
        admissible: PointPredicate,
        inner: Arc<KernelSpec>,
    },
    Pullback {
        map: PointMap,
        inner: Arc<KernelSpec>,
    },
}

impl KernelSpec {
    pub fn fourier(series: FourierSeries) -> Self {
        KernelSpec::Fourier(series)
    }

    pub fn szego() -> Self {
        KernelSpec::Szego
    }

    pub fn sum(left: KernelSpec, right: KernelSpec) -> Result<Self> {
        if left.space() != right.space() {
            return domain(format!(
                "cannot add kernels on the {} and the {}",
                left.space(),
                right.space()
            ));
        }
        Ok(KernelSpec::Sum(Arc::new(left), Arc::new(right)))
    }

    pub fn scale(factor: PointFn, inner: KernelSpec) -> Self {
        KernelSpec::Scale {
            factor,
            inner: Arc::new(inner),
        }
    }

    pub fn normalize(inner: KernelSpec) -> Self {
        KernelSpec::Normalize(Arc::new(inner))
    }

    pub fn restrict(admissible: PointPredicate, inner: KernelSpec) -> Self {
        KernelSpec::Restrict {
            admissible,
            inner: Arc::new(inner),
        }
    }

    pub fn pullback(map: PointMap, inner: KernelSpec) -> Result<Self> {
        if map.target() != inner.space() {
            return domain(format!(
                "map {} lands in the {} but the kernel lives on the {}",
                map.name(),
                map.target(),
                inner.space()
            ));
        }
        Ok(KernelSpec::Pullback {
            map,
            inner: Arc::new(inner),
        })
    }

    /// The base set the kernel's arguments come from.
    pub fn space(&self) -> Space {
        match self {
            KernelSpec::Fourier(_) => Space::Interval,
            KernelSpec::Szego => Space::Disk,
            KernelSpec::Sum(left, _) => left.space(),
            KernelSpec::Scale { inner, .. }
            | KernelSpec::Normalize(inner)
            | KernelSpec::Restrict { inner, .. } => inner.space(),
            KernelSpec::Pullback { map, .. } => map.source(),
        }
    }

    pub fn as_fourier(&self) -> Option<&FourierSeries> {
        match self {
            KernelSpec::Fourier(series) => Some(series),
            _ => None,
        }
    }

    pub fn is_szego(&self) -> bool {
        matches!(self, KernelSpec::Szego)
    }

    /// Structural identity for base kernels; combinators compare by address.
    pub fn same_as(&self, other: &KernelSpec) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        match (self, other) {
            (KernelSpec::Fourier(a), KernelSpec::Fourier(b)) => a == b,
            (KernelSpec::Szego, KernelSpec::Szego) => true,
            (KernelSpec::Sum(a1, b1), KernelSpec::Sum(a2, b2)) => a1.same_as(a2) && b1.same_as(b2),
            (KernelSpec::Normalize(a), KernelSpec::Normalize(b)) => a.same_as(b),
            (
                KernelSpec::Scale { factor: f1, inner: a },
                KernelSpec::Scale { factor: f2, inner: b },
            ) => Arc::ptr_eq(&f1.f, &f2.f) && a.same_as(b),
            (
                KernelSpec::Restrict { admissible: f1, inner: a },
                KernelSpec::Restrict { admissible: f2, inner: b },
            ) => Arc::ptr_eq(&f1.f, &f2.f) && a.same_as(b),
            (
                KernelSpec::Pullback { map: f1, inner: a },
                KernelSpec::Pullback { map: f2, inner: b },
            ) => Arc::ptr_eq(&f1.f, &f2.f) && a.same_as(b),
            _ => false,
        }
    }

    /// `K(p, q)`.
    pub fn eval(&self, p: &Point, q: &Point) -> Result<Complex64> {
        match self {
            KernelSpec::Fourier(series) => Ok(series.eval(p.as_interval()?, q.as_interval()?)),
            KernelSpec::Szego => {
                let z = p.as_disk()?;
                let w = q.as_disk()?;
                Ok((Complex64::new(1.0, 0.0) - z * w.conj()).inv())
            }
            KernelSpec::Sum(left, right) => Ok(left.eval(p, q)? + right.eval(p, q)?),
            KernelSpec::Scale { factor, inner } => {
                Ok(factor.call(p)?.conj() * inner.eval(p, q)? * factor.call(q)?)
            }
            KernelSpec::Normalize(inner) => {
                let dp = inner.diag(p)?;
                let dq = inner.diag(q)?;
                if dp == 0.0 || dq == 0.0 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(inner.eval(p, q)? / (dp.sqrt() * dq.sqrt()))
            }
            KernelSpec::Restrict { admissible, inner } => {
                for x in [p, q] {
                    if !admissible.admits(x) {
                        return domain(format!(
                            "point {x:?} outside the restriction {}",
                            admissible.name()
                        ));
                    }
                }
                inner.eval(p, q)
            }
            KernelSpec::Pullback { map, inner } => inner.eval(&map.apply(p)?, &map.apply(q)?),
        }
    }

    /// `K(p, p) = ‖K_p‖²`, checked to be real and nonnegative, then clamped at 0.
    pub fn diag(&self, p: &Point) -> Result<f64> {
        let k = match self {
            KernelSpec::Fourier(series) => {
                p.as_interval()?;
                return Ok(series.diag());
            }
            _ => self.eval(p, p)?,
        };
        let scale = k.re.abs().max(1.0);
        if k.im.abs() >= HERMITIAN_DIAG_TOL * scale {
            return Err(Error::Numerical(format!(
                "diagonal K(p,p) = {k} at {p:?} is not real"
            )));
        }
        if k.re < -HERMITIAN_DIAG_TOL * scale {
            return Err(Error::Numerical(format!(
                "diagonal K(p,p) = {} at {p:?} is negative",
                k.re
            )));
        }
        Ok(k.re.max(0.0))
    }

    /// Whether the Gram matrix of `points` has smallest eigenvalue `≥ -tol·trace`.
    pub fn psd_check(&self, points: &[Point], tol: f64) -> Result<bool> {
        if points.is_empty() {
            return domain("psd_check needs at least one point");
        }
        let g = crate::projection::gram(self, points)?;
        let trace: f64 = (0..g.nrows()).map(|i| g[(i, i)].re).sum();
        let min_eig = g.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
        Ok(min_eig >= -tol * trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk(re: f64, im: f64) -> Point {
        Point::disk(c(re, im)).unwrap()
    }

    fn geometric_half() -> KernelSpec {
        KernelSpec::fourier(FourierSeries::geometric(0.5, 64).unwrap())
    }

    #[test]
    fn szego_at_origin_is_one() {
        let k = KernelSpec::szego();
        let v = k.eval(&disk(0.0, 0.0), &disk(0.3, 0.1)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        assert_eq!(k.diag(&disk(0.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn szego_diagonal_at_one_half() {
        let k = KernelSpec::szego();
        let v = k.eval(&disk(0.5, 0.0), &disk(0.5, 0.0)).unwrap();
        assert!((v - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn geometric_series_diagonal_is_three() {
        // Partial sums of Σ 2^{-|j|} until they stop changing.
        let mut oracle = 1.0;
        let mut j = 1;
        loop {
            let next = oracle + 2.0 * 0.5f64.powi(j);
            if next == oracle {
                break;
            }
            oracle = next;
            j += 1;
        }
        assert!((oracle - 3.0).abs() < 1e-15);
        let k = geometric_half();
        for t in [-PI, -1.0, 0.0, 0.7, PI] {
            let p = Point::interval(t).unwrap();
            assert!((k.eval(&p, &p).unwrap() - c(oracle, 0.0)).norm() < 1e-12);
            assert!((k.diag(&p).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_form_matches_truncated_sum() {
        let series = FourierSeries::geometric(0.5, 64).unwrap();
        for (s, t) in [(0.1, 0.2), (-3.0, 2.5), (PI, -PI), (1.0, 1.0)] {
            let closed = series.eval(s, t);
            let direct = series.eval_truncated(s, t);
            assert!((closed - direct).norm() <= series.tail_bound() + 1e-14);
        }
    }

    #[test]
    fn doubling_truncation_moves_eval_less_than_tail() {
        let short = FourierSeries::geometric(0.5, 20).unwrap_err();
        assert!(matches!(short, Error::Domain(_)));
        let a = FourierSeries::geometric(0.6, 60).unwrap();
        let b = FourierSeries::geometric(0.6, 120).unwrap();
        for (s, t) in [(0.3, -0.4), (2.0, 1.0)] {
            let diff = (a.eval_truncated(s, t) - b.eval_truncated(s, t)).norm();
            assert!(diff <= a.tail_bound());
        }
    }

    #[test]
    fn normalized_szego_has_unit_diagonal() {
        let k = KernelSpec::normalize(KernelSpec::szego());
        assert!((k.diag(&disk(0.4, 0.0)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_zero_diagonal_gives_zero() {
        let k = KernelSpec::normalize(KernelSpec::scale(PointFn::monomial(1), KernelSpec::szego()));
        let origin = disk(0.0, 0.0);
        assert_eq!(k.eval(&origin, &disk(0.2, 0.1)).unwrap(), c(0.0, 0.0));
        assert_eq!(k.diag(&origin).unwrap(), 0.0);
        assert!((k.diag(&disk(0.2, 0.1)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mismatched_point_is_a_domain_error() {
        let k = KernelSpec::szego();
        let t = Point::interval(0.0).unwrap();
        assert!(matches!(k.eval(&t, &t), Err(Error::Domain(_))));
        assert!(matches!(geometric_half().diag(&disk(0.1, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn points_outside_their_set_are_rejected() {
        assert!(Point::interval(3.2).is_err());
        assert!(Point::interval(f64::NAN).is_err());
        assert!(Point::interval(PI).is_ok());
        assert!(Point::disk(c(1.0, 0.0)).is_err());
        assert!(Point::disk(c(DISK_MAX_RADIUS, 0.0)).is_ok());
    }

    #[test]
    fn pullback_leaving_domain_errors() {
        let k = KernelSpec::pullback(PointMap::dilate(3.0), KernelSpec::szego()).unwrap();
        let p = disk(0.5, 0.0);
        assert!(matches!(k.eval(&p, &p), Err(Error::Domain(_))));
        let inside = disk(0.1, 0.0);
        let expect = KernelSpec::szego().eval(&disk(0.3, 0.0), &disk(0.3, 0.0)).unwrap();
        assert!((k.eval(&inside, &inside).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn pullback_space_mismatch_rejected() {
        assert!(KernelSpec::pullback(PointMap::circle(0.5), geometric_half()).is_err());
        let k = KernelSpec::pullback(PointMap::circle(0.5), KernelSpec::szego()).unwrap();
        assert_eq!(k.space(), Space::Interval);
    }

    #[test]
    fn restrict_rejects_points_outside_subset() {
        let k = KernelSpec::restrict(PointPredicate::disk_radius_below(0.5), KernelSpec::szego());
        assert!(k.eval(&disk(0.1, 0.0), &disk(0.2, 0.2)).is_ok());
        assert!(matches!(k.eval(&disk(0.1, 0.0), &disk(0.6, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn sum_requires_same_space() {
        assert!(KernelSpec::sum(KernelSpec::szego(), geometric_half()).is_err());
    }

    #[test]
    fn psd_check_szego_three_points() {
        let pts = [disk(0.0, 0.0), disk(0.5, 0.0), disk(0.0, 1.0 / 3.0)];
        assert!(KernelSpec::szego().psd_check(&pts, 1e-10).unwrap());
        let sum = KernelSpec::sum(KernelSpec::szego(), KernelSpec::szego()).unwrap();
        assert!(sum.psd_check(&pts, 1e-10).unwrap());
        assert!(KernelSpec::szego().psd_check(&pts[..1], 1e-10).unwrap());
        assert!(KernelSpec::szego().psd_check(&[], 1e-10).is_err());
    }

    #[test]
    fn table_series_rejects_nonpositive_weights() {
        let mut m = BTreeMap::new();
        m.insert(0, 1.0);
        m.insert(2, 0.0);
        assert!(FourierSeries::from_table(m).is_err());
        let mut one = BTreeMap::new();
        one.insert(3, 2.0);
        let s = FourierSeries::from_table(one).unwrap();
        assert_eq!(s.truncation(), 3);
        assert_eq!(s.total_mass(), 2.0);
    }
}
