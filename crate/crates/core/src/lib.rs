//! Moment and sum-of-squares relaxations for polynomial optimization on
//! real algebraic varieties, including singular ones handled through a
//! resolution morphism.

pub mod boundcalc;
pub mod certify;
pub mod fixtures;
pub mod kktsys;
pub mod linalg;
pub mod momentsos;
pub mod polyalg;
pub mod rational;
pub mod resolve;
pub mod scalar;
pub mod sdpcore;
pub mod varietylab;

use num_rational::BigRational;

pub use polyalg::{parse, Monomial, PolyError, Polynomial};
pub use scalar::{Coefficient, Real};

/// Exact rational polynomial, the default carrier everywhere.
pub type Poly = Polynomial<BigRational>;
/// Floating point polynomial.
pub type FloatPoly = Polynomial<f64>;
