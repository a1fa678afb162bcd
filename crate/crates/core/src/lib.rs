//! Asymptotic ψ-densities of integer sets, sub-series and sub-signed series
//! of non-negative coefficient sequences, and executable witness
//! constructions for their convergence behaviour.
//!
//! Every limit is estimated over a finite tail window; every identity has an
//! exact rational mode that serves as an oracle for the floating one.

pub mod constructions;
pub mod error;
pub mod primes;
pub mod psi;
pub mod series;
pub mod sets;
pub mod signed;
pub mod summation;

pub use error::{Error, Result};
pub use psi::{PsiClassReport, PsiFunction, PsiKind};
pub use series::{CoeffSequence, MonotonicityHint, Trace, TraceOptions};
pub use sets::{DensityReport, IntegerSet, Normalization};
