//! Grassmann algebras Λ_N over exact or floating coefficient rings.

mod coeff;
mod conjugation;
mod element;
mod json;
mod series;

pub use coeff::{Coefficient, Gauss, PhasePoly};
pub use conjugation::Conjugation;
pub use element::{merge_sign_negative, Blade, GrassmannElement, Parity, MAX_DENSE_GENERATORS, MAX_GENERATORS};
pub use series::Series;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrassmannError {
    #[error("generator index {index} out of range 1..={generators}")]
    IndexOutOfRange { index: usize, generators: usize },
    #[error("blade {blade:#b} does not fit in {generators} generators")]
    BladeOutOfRange { blade: Blade, generators: usize },
    #[error("elements live in different algebras (N = {left} vs N = {right})")]
    MismatchedGenerators { left: usize, right: usize },
    #[error("series argument must be even")]
    NotEven,
    #[error("body is not invertible")]
    NonInvertibleBody,
    #[error("square root of a negative real body")]
    NegativeBody,
    #[error("{0} is not representable in this coefficient ring")]
    NonRepresentable(&'static str),
    #[error("ordering is not a permutation of the generators")]
    NotAPermutation,
    #[error("generator {0} has no conjugate partner")]
    UnpairedConjugation(usize),
    #[error("dense tables are limited to {MAX_DENSE_GENERATORS} generators, got {0}")]
    DenseTooLarge(usize),
    #[error("dense table has length {got}, expected {expected}")]
    DenseLength { expected: usize, got: usize },
    #[error("malformed JSON: {0}")]
    Json(String),
}

/// Exact Grassmann algebra element.
pub type ExactElement = GrassmannElement<Gauss>;
/// Floating Grassmann algebra element.
pub type FloatElement = GrassmannElement<num_complex::Complex64>;
