//! Exact-arithmetic toolkit for affine symmetry Lie algebras of polynomial
//! hypersurfaces, their moving-frame invariants (second fundamental form,
//! cubic tensor, tube-domain criterion) and the complex-side verification
//! machinery (holomorphic tangency, bracket closure, Chern-Moser jets).
//!
//! Everything runs over exact scalars: [`Rational`] for the real theory and
//! [`GaussRational`] for the holomorphic side. The core types are generic
//! over the [`Scalar`] trait; the aliases below fix the two concrete
//! instantiations used throughout.
//!
//! ```
//! use affsym::parse::parse_rational_poly;
//! use affsym::scalar::rat_int;
//! use affsym::symmetry::{symmetry_algebra, isotropy_at, Hypersurface};
//!
//! // the round paraboloid carries two lifted translations, a rotation and
//! // a scaling
//! let f = parse_rational_poly("x3 - x1^2 - x2^2", 3)?;
//! let surface = Hypersurface::new(2, f, None, vec![rat_int(0); 3])?;
//! let algebra = symmetry_algebra(&surface)?;
//! assert_eq!(algebra.len(), 4);
//! assert_eq!(isotropy_at(&algebra, surface.ref_point())?.len(), 2);
//! # Ok::<(), affsym::Error>(())
//! ```

pub mod catalog;
pub mod error;
pub mod holo;
pub mod invariants;
pub mod matrix;
pub mod parse;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{GaussRational, Rational, Scalar};

/// Sparse polynomial over the rationals.
pub type RatPoly = poly::MultiPoly<Rational>;
/// Sparse polynomial over the Gaussian rationals.
pub type GaussPoly = poly::MultiPoly<GaussRational>;
/// Truncated power series over the rationals.
pub type RatSeries = poly::TruncSeries<Rational>;
/// Truncated power series over the Gaussian rationals.
pub type GaussSeries = poly::TruncSeries<GaussRational>;
/// Exact matrix over the rationals.
pub type RatMatrix = matrix::ExactMatrix<Rational>;
/// Exact matrix over the Gaussian rationals.
pub type GaussMatrix = matrix::ExactMatrix<GaussRational>;
