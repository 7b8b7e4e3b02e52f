//! Fractional integrals with three-parameter Mittag-Leffler kernels taken
//! along an increasing map ψ, plus solvers for the Cauchy problem they
//! define.

// `!(x > 0.0)` is how parameter checks reject NaN along with bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// frozen oracle values in the unit tests keep all printed digits
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod cauchy;
pub mod cli;
pub mod error;
pub mod operators;
pub mod psi;
pub mod special_fn;

pub use cauchy::{CauchyProblem, Forcing, MlForcing};
pub use error::{Error, Result};
pub use operators::{OperatorSpec, SampledFunction};
pub use psi::{PsiDescriptor, PsiMap};
pub use special_fn::{ml3, MlParams, SeriesControl, SeriesSum};
