//! Approximation in reproducing kernel Hilbert spaces from randomly sampled
//! points, with closed-form Chebyshev-type bounds on the approximation error
//! and a Monte Carlo harness that checks those bounds empirically.
//!
//! Two worked settings are built in:
//!
//! * periodic Fourier-series kernels `K(s,t) = Σ μ_j e^{ij(s-t)}` on `[-π, π]`
//!   with the uniform measure, and
//! * the Szegő kernel `K(z,ζ) = 1/(1 - z ζ̄)` of the Hardy space on the unit
//!   disk with normalized area measure.
//!
//! [`projection`] computes best approximations from sampled kernel sections,
//! [`embedding`] realizes the integral operator `L_{P,K}` and its range kernel
//! `K_P`, and [`bounds`] evaluates the resulting exceedance bounds.

pub mod bounds;
pub mod element;
pub mod embedding;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod measure;
pub mod projection;

pub use bounds::{
    chebyshev_bound, expected_sq_error, fourier_basis_bound, hardy_monomial_bound, thmbound_rhs,
    BoundReport,
};
pub use element::{RkhsElement, Representation};
pub use embedding::EmbeddingContext;
pub use error::{Error, Result};
pub use kernel::{FourierSeries, KernelSpec, Point, Space};
pub use measure::{l2pk_norm_sq, pk_density, LambdaSpec, MeasureSpec};
pub use num_complex::Complex64;
pub use projection::{factorize, gram, monotone_error_curve, projection_error_sq, projection_weights, GramFactor};
