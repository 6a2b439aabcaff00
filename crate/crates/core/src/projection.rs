//! Orthogonal projection onto the span of sampled kernel sections.
//!
//! The Gram matrix is factorized by a diagonally pivoted Cholesky that stops
//! once every remaining Schur-complement diagonal falls below
//! `drop_tol · max initial diagonal`. The retained pivots index a basis of the
//! sampled span, so duplicated or numerically coincident points are handled
//! without pre-filtering.
//!
//! Indexing follows `G[(i, j)] = K(x_j, x_i) = ⟨K_{x_i}, K_{x_j}⟩`. The
//! projection weights `ω` satisfy `Σ_i ω_i K(x_j, x_i) = f(x_j)`, which is
//! `G ω̄ = v̄` with `v_j = f(x_j)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::element::RkhsElement;
use crate::error::{domain, Error, Result};
use crate::kernel::{KernelSpec, Point};

/// Default relative pivot-drop tolerance.
pub const DEFAULT_DROP_TOL: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const NEGATIVE_DIAG_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gram matrix `G[(i, j)] = K(x_j, x_i)`, Hermitian by construction.
pub fn gram(kernel: &KernelSpec, points: &[Point]) -> Result<DMatrix<Complex64>> {
    if points.is_empty() {
        return domain("Gram matrix of an empty point set");
    }
    let n = points.len();
    let mut g = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        g[(i, i)] = Complex64::new(kernel.diag(&points[i])?, 0.0);
        for j in (i + 1)..n {
            let v = kernel.eval(&points[j], &points[i])?;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

/// Pivoted Cholesky factor `G[P, P] = L Lᴴ` over the retained pivots `P`.
#[derive(Clone, Debug)]
pub struct GramFactor {
    retained: Vec<usize>,
    factor: DMatrix<Complex64>,
    drop_tol: f64,
    original_size: usize,
    max_diag: f64,
}

impl GramFactor {
    /// The factor of an empty point set; projects everything to 0.
    pub fn empty(drop_tol: f64) -> Self {
        Self {
            retained: Vec::new(),
            factor: DMatrix::from_element(0, 0, ZERO),
            drop_tol,
            original_size: 0,
            max_diag: 0.0,
        }
    }

    /// Indices into the original point list, in pivot order.
    pub fn retained_pivots(&self) -> &[usize] {
        &self.retained
    }

    /// Lower-triangular factor, rows and columns in pivot order.
    pub fn factor(&self) -> &DMatrix<Complex64> {
        &self.factor
    }

    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn original_size(&self) -> usize {
        self.original_size
    }

    pub fn rank(&self) -> usize {
        self.retained.len()
    }

    /// Largest diagonal entry of the input matrix.
    pub fn max_diag(&self) -> f64 {
        self.max_diag
    }

    /// `y = L⁻¹ v̄_P`; `‖y‖² = ‖π f‖²`.
    fn forward(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.original_size {
            return domain(format!(
                "{} values supplied for {} points",
                values.len(),
                self.original_size
            ));
        }
        let k = self.rank();
        let mut y = vec![ZERO; k];
        for a in 0..k {
            let dot: Complex64 = y[..a].iter().enumerate().map(|(m, v)| self.factor[(a, m)] * v).sum();
            y[a] = (values[self.retained[a]].conj() - dot) / self.factor[(a, a)];
        }
        Ok(y)
    }
}

/// Pivoted Cholesky of a Hermitian positive-semidefinite matrix.
pub fn factorize(g: &DMatrix<Complex64>, drop_tol: f64) -> Result<GramFactor> {
    let n = g.nrows();
    if g.ncols() != n {
        return domain("Gram matrix is not square");
    }
    if n == 0 {
        return Ok(GramFactor::empty(drop_tol));
    }
    let mut d: Vec<f64> = (0..n).map(|i| g[(i, i)].re).collect();
    let max_diag = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trace: f64 = d.iter().sum();
    let scale = max_diag.max(1.0);
    for i in 0..n {
        for j in i..n {
            if (g[(i, j)] - g[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::Numerical(format!(
                    "Gram matrix is not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    if let Some(i) = d.iter().position(|v| *v < -NEGATIVE_DIAG_TOL * trace.abs()) {
        return Err(Error::Numerical(format!(
            "Gram diagonal {} at index {i} is negative",
            d[i]
        )));
    }

    let threshold = drop_tol * max_diag;
    // Column-major storage of the n × rank factor; column k is `cols[k]`.
    let mut cols: Vec<Vec<Complex64>> = Vec::new();
    let mut retained = Vec::new();
    let mut selected = vec![false; n];
    while retained.len() < n {
        let (pivot, dmax) = d
            .iter()
            .enumerate()
            .filter(|(i, _)| !selected[*i])
            .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, &v)| {
                if v > acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });
        if dmax <= threshold {
            break;
        }
        let lkk = dmax.sqrt();
        let mut col = vec![ZERO; n];
        col[pivot] = Complex64::new(lkk, 0.0);
        for i in 0..n {
            if selected[i] || i == pivot {
                continue;
            }
            let mut acc = g[(i, pivot)];
            for prev in &cols {
                acc -= prev[i] * prev[pivot].conj();
            }
            let lik = acc / lkk;
            col[i] = lik;
            d[i] -= lik.norm_sqr();
        }
        selected[pivot] = true;
        retained.push(pivot);
        cols.push(col);
    }

    let k = retained.len();
    let factor = DMatrix::from_fn(k, k, |a, b| if b <= a { cols[b][retained[a]] } else { ZERO });
    Ok(GramFactor {
        retained,
        factor,
        drop_tol,
        original_size: n,
        max_diag,
    })
}

/// Weights `ω` with `π f = Σ ω_i K_{x_i}`, indexed like the original points.
/// Dropped pivots get weight 0.
pub fn projection_weights(factor: &GramFactor, values: &[Complex64]) -> Result<Vec<Complex64>> {
    let y = factor.forward(values)?;
    let k = factor.rank();
    let l = &factor.factor;
    // Back substitution Lᴴ u = y; ω_P = conj(u).
    let mut u = vec![ZERO; k];
    for a in (0..k).rev() {
        let mut acc = y[a];
        for m in (a + 1)..k {
            acc -= l[(m, a)].conj() * u[m];
        }
        u[a] = acc / l[(a, a)].conj();
    }
    let mut weights = vec![ZERO; factor.original_size];
    for (a, &i) in factor.retained.iter().enumerate() {
        weights[i] = u[a].conj();
    }
    Ok(weights)
}

/// `‖π f‖² = v̄ᴴ Γ v̄` over the retained pivots.
pub fn projection_norm_sq(factor: &GramFactor, values: &[Complex64]) -> Result<f64> {
    Ok(factor.forward(values)?.iter().map(|y| y.norm_sqr()).sum())
}

/// `‖f - π f‖² = ‖f‖² - ‖π f‖²`, clamped at zero.
pub fn projection_error_sq(f: &RkhsElement, factor: &GramFactor, values: &[Complex64]) -> Result<f64> {
    Ok((f.norm_sq()? - projection_norm_sq(factor, values)?).max(0.0))
}

/// Result of projecting one element onto one point set.
#[derive(Clone, Debug)]
pub struct Projection {
    pub weights: Vec<Complex64>,
    pub error_sq: f64,
    pub retained: Vec<usize>,
}

/// Gram assembly, factorization and projection of `f` onto `span{K_x : x ∈ points}`.
pub fn project(f: &RkhsElement, points: &[Point], drop_tol: f64) -> Result<Projection> {
    if points.is_empty() {
        return Ok(Projection {
            weights: Vec::new(),
            error_sq: f.norm_sq()?,
            retained: Vec::new(),
        });
    }
    let g = gram(f.kernel(), points)?;
    let factor = factorize(&g, drop_tol)?;
    let values = points.iter().map(|x| f.evaluate(x)).collect::<Result<Vec<_>>>()?;
    Ok(Projection {
        weights: projection_weights(&factor, &values)?,
        error_sq: projection_error_sq(f, &factor, &values)?,
        retained: factor.retained.clone(),
    })
}

/// Pivoted Cholesky grown one point at a time, in arrival order.
///
/// Each accepted point adds `|y_k|²` to the captured norm `‖π f‖²`, so the
/// error sequence is nonincreasing by construction.
#[derive(Clone, Debug)]
pub struct IncrementalProjector<'a> {
    f: &'a RkhsElement,
    norm_f_sq: f64,
    drop_tol: f64,
    max_diag: f64,
    points: Vec<Point>,
    rows: Vec<Vec<Complex64>>,
    y: Vec<Complex64>,
    captured: f64,
}

impl<'a> IncrementalProjector<'a> {
    pub fn new(f: &'a RkhsElement, drop_tol: f64) -> Result<Self> {
        Ok(Self {
            f,
            norm_f_sq: f.norm_sq()?,
            drop_tol,
            max_diag: 0.0,
            points: Vec::new(),
            rows: Vec::new(),
            y: Vec::new(),
            captured: 0.0,
        })
    }

    /// Number of retained pivots so far.
    pub fn rank(&self) -> usize {
        self.points.len()
    }

    pub fn error_sq(&self) -> f64 {
        (self.norm_f_sq - self.captured).max(0.0)
    }

    /// Adds `x` to the point set and returns the new projection error.
    pub fn push(&mut self, x: &Point) -> Result<f64> {
        let kernel = self.f.kernel();
        let diag = kernel.diag(x)?;
        self.max_diag = self.max_diag.max(diag);
        let k = self.points.len();
        // ℓ = conj(L⁻¹ G[P, x]) with G[p, x] = K(x, x_p).
        let mut ell = vec![ZERO; k];
        for a in 0..k {
            let dot: Complex64 = self.rows[a][..a].iter().zip(&ell[..a]).map(|(r, e)| r * e).sum();
            ell[a] = (kernel.eval(x, &self.points[a])? - dot) / self.rows[a][a];
        }
        let schur = diag - ell.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if schur > self.drop_tol * self.max_diag {
            let lkk = schur.sqrt();
            let mut row: Vec<Complex64> = ell.iter().map(|v| v.conj()).collect();
            row.push(Complex64::new(lkk, 0.0));
            let dot: Complex64 = row[..k].iter().zip(&self.y).map(|(r, v)| r * v).sum();
            let yk = (self.f.evaluate(x)?.conj() - dot) / lkk;
            self.captured += yk.norm_sqr();
            self.y.push(yk);
            self.rows.push(row);
            self.points.push(*x);
        }
        Ok(self.error_sq())
    }
}

/// `‖f - π_N f‖²` for every prefix `N = 1..=points.len()`.
pub fn monotone_error_curve(f: &RkhsElement, points: &[Point]) -> Result<Vec<f64>> {
    monotone_error_curve_with_tol(f, points, DEFAULT_DROP_TOL)
}

pub fn monotone_error_curve_with_tol(
    f: &RkhsElement,
    points: &[Point],
    drop_tol: f64,
) -> Result<Vec<f64>> {
    let mut proj = IncrementalProjector::new(f, drop_tol)?;
    points.iter().map(|x| proj.push(x)).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::kernel::FourierSeries;
    use crate::measure::MeasureSpec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk(re: f64, im: f64) -> Point {
        Point::disk(c(re, im)).unwrap()
    }

    fn szego() -> Arc<KernelSpec> {
        Arc::new(KernelSpec::szego())
    }

    #[test]
    fn gram_of_origin_and_half() {
        let g = gram(&KernelSpec::szego(), &[disk(0.0, 0.0), disk(0.5, 0.0)]).unwrap();
        let expect = [[1.0, 1.0], [1.0, 4.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)] - c(expect[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn gram_indexing_follows_sections() {
        let k = KernelSpec::szego();
        let pts = [disk(0.2, 0.3), disk(-0.4, 0.1)];
        let g = gram(&k, &pts).unwrap();
        assert_eq!(g[(0, 1)], k.eval(&pts[1], &pts[0]).unwrap());
        assert!(gram(&k, &[]).is_err());
    }

    #[test]
    fn duplicated_point_gives_rank_one() {
        let x = disk(0.3, -0.2);
        let g = gram(&KernelSpec::szego(), &[x, x]).unwrap();
        let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        assert!(det.norm() < 1e-14);
        assert_eq!(factorize(&g, DEFAULT_DROP_TOL).unwrap().rank(), 1);
    }

    #[test]
    fn identity_keeps_all_pivots() {
        let g = DMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0, 0.0) } else { ZERO });
        let f = factorize(&g, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(f.rank(), 3);
    }

    #[test]
    fn factor_reconstructs_retained_block() {
        let pts = MeasureSpec::UniformDisk.sample(12, 3, 0).unwrap();
        let g = gram(&KernelSpec::szego(), &pts).unwrap();
        let f = factorize(&g, DEFAULT_DROP_TOL).unwrap();
        let l = f.factor();
        let rec = l * l.adjoint();
        let trace: f64 = (0..12).map(|i| g[(i, i)].re).sum();
        for (a, &i) in f.retained_pivots().iter().enumerate() {
            for (b, &j) in f.retained_pivots().iter().enumerate() {
                assert!((rec[(a, b)] - g[(i, j)]).norm() < 1e-10 * trace);
            }
        }
    }

    #[test]
    fn non_hermitian_and_negative_inputs_rejected() {
        let mut g = DMatrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { ZERO });
        g[(0, 1)] = c(0.5, 0.0);
        assert!(matches!(factorize(&g, DEFAULT_DROP_TOL), Err(Error::Numerical(_))));
        let mut g = DMatrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { ZERO });
        g[(1, 1)] = c(-1.0, 0.0);
        assert!(matches!(factorize(&g, DEFAULT_DROP_TOL), Err(Error::Numerical(_))));
    }

    #[test]
    fn two_point_weights() {
        let pts = [disk(0.0, 0.0), disk(0.5, 0.0)];
        let g = gram(&KernelSpec::szego(), &pts).unwrap();
        let f = factorize(&g, DEFAULT_DROP_TOL).unwrap();
        let w = projection_weights(&f, &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((w[0] - c(-1.5, 0.0)).norm() < 1e-12);
        assert!((w[1] - c(1.5, 0.0)).norm() < 1e-12);
        let z = RkhsElement::monomial(szego(), 1).unwrap();
        let e = projection_error_sq(&z, &f, &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((e - 0.25).abs() < 1e-12);
        assert!(projection_weights(&f, &[c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn section_projects_onto_itself() {
        let k = szego();
        let pts = [disk(0.1, 0.2), disk(-0.3, 0.5), disk(0.6, -0.1)];
        let g = gram(&k, &pts).unwrap();
        let f = factorize(&g, DEFAULT_DROP_TOL).unwrap();
        let kx = RkhsElement::section(k.clone(), pts[0]).unwrap();
        let values: Vec<_> = pts.iter().map(|p| kx.evaluate(p).unwrap()).collect();
        let w = projection_weights(&f, &values).unwrap();
        assert!((w[0] - c(1.0, 0.0)).norm() < 1e-10);
        assert!(w[1].norm() < 1e-10 && w[2].norm() < 1e-10);
        assert!(projection_error_sq(&kx, &f, &values).unwrap() < 1e-12);
        let zero = projection_weights(&f, &[ZERO; 3]).unwrap();
        assert!(zero.iter().all(|w| *w == ZERO));
    }

    #[test]
    fn empty_point_set_keeps_full_norm() {
        let z = RkhsElement::monomial(szego(), 3).unwrap();
        let e = projection_error_sq(&z, &GramFactor::empty(DEFAULT_DROP_TOL), &[]).unwrap();
        assert_eq!(e, 1.0);
        assert_eq!(project(&z, &[], DEFAULT_DROP_TOL).unwrap().error_sq, 1.0);
    }

    #[test]
    fn near_coincident_points_drop_pivots() {
        let pts: Vec<Point> = (0..8).map(|k| disk(0.3 + k as f64 * 1e-9, 0.0)).collect();
        let g = gram(&KernelSpec::szego(), &pts).unwrap();
        let eigs = g.clone().symmetric_eigenvalues();
        let max_diag = (0..8).map(|i| g[(i, i)].re).fold(0.0, f64::max);
        let above = eigs.iter().filter(|e| **e > DEFAULT_DROP_TOL * max_diag).count();
        let f = factorize(&g, DEFAULT_DROP_TOL).unwrap();
        assert!(f.rank() < 8);
        assert_eq!(f.rank(), above);
    }

    #[test]
    fn curve_duplicate_and_section_cases() {
        let k = szego();
        let x = disk(0.2, -0.4);
        let pts = vec![disk(0.5, 0.1), x, x, disk(-0.1, 0.7)];
        let kx = RkhsElement::section(k.clone(), x).unwrap();
        let curve = monotone_error_curve(&kx, &pts).unwrap();
        assert!(curve[1] < 1e-12 * kx.norm_sq().unwrap());
        assert_eq!(curve[1], curve[2]);

        let z2 = RkhsElement::monomial(k, 2).unwrap();
        let curve = monotone_error_curve(&z2, &pts).unwrap();
        assert_eq!(curve[1], curve[2]);
        assert!(curve.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn curve_on_random_fourier_points_is_monotone() {
        let k = Arc::new(KernelSpec::fourier(FourierSeries::geometric(0.5, 64).unwrap()));
        let f = RkhsElement::phi(k, 0).unwrap();
        let pts = MeasureSpec::UniformInterval.sample(30, 9, 0).unwrap();
        let curve = monotone_error_curve(&f, &pts).unwrap();
        assert_eq!(curve.len(), 30);
        assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        // Endpoints agree when neither factorization drops a pivot.
        let head = &pts[..10];
        let full = project(&f, head, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(full.retained.len(), 10);
        assert!((full.error_sq - curve[9]).abs() < 1e-9);
    }
}
