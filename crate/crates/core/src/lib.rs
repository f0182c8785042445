//! Finite-dimensional toolkit for the closed symmetrized tridisc Γ₃.
//!
//! Provides scalar membership geometry for Γ₂/Γ₃ and its distinguished
//! boundary, operator pencils and polynomial functional calculus for
//! commuting triples, certification batteries for Γ₃-contractions and
//! Γ₃-unitaries, the canonical decomposition of a Γ₃-contraction into a
//! Γ₃-unitary part and a completely non-unitary part, and reproducible
//! generators of certified test instances.
//!
//! All core math is generic over the real scalar type; use the `f64`
//! aliases at the crate root unless you have a reason not to.

use nalgebra::DMatrix;
use num_complex::Complex;

pub mod certify;
pub mod decomp;
pub mod error;
pub mod gen;
pub mod numerics;
pub mod opcore;
pub mod points;

pub use error::{Gamma3Error, Result};

/// Real scalar carrier for all numerics: `f32` or `f64`.
pub trait Real:
    nalgebra::RealField
    + num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
{
    /// Widen to `f64` for reporting.
    fn to_report(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for converting an `f64` constant into the working scalar.
pub(crate) fn re<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Complex scalar over the working real type.
pub type Cx<T> = Complex<T>;

/// Dense square complex matrix, the carrier for all operators.
pub type ComplexMatrix<T> = DMatrix<Complex<T>>;

/// `f64` concrete aliases.
pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type Cx64 = Cx<f64>;

/// `f32` concrete aliases.
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type Cx32 = Cx<f32>;
