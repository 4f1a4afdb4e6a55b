//! Interlacing particle system with a reflecting wall.
//!
//! The crate simulates the discrete-time particle dynamics, evaluates the
//! exact level transition kernels in rational arithmetic, computes the
//! determinantal correlation kernel by quadrature, and evaluates the discrete
//! Jacobi and symmetric Pearcey limit kernels.

pub mod asymptotic;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod montecarlo;
pub mod quad;
pub mod scalar;
pub mod transition;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{
    densely_packed, height_function, interlaces, level_label, shift_to_simple, Convention,
    HalfParam, InterlacedState, LevelLabel, ModelParams, Partition,
};
pub use scalar::{Real, Scalar};

/// Exact scalar for transition probabilities.
pub type Rational = num_rational::BigRational;
/// Double-double scalar used by the extended-precision quadrature.
pub type Extended = twofloat::TwoFloat;

pub type ExactMatrix = transition::TransitionMatrix<Rational>;
pub type FloatMatrix = transition::TransitionMatrix<f64>;
pub type KernelValueF64 = kernel::KernelValue<f64>;
