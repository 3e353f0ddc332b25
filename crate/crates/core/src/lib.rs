//! Finite-difference spectral analysis of singular Sturm-Liouville operators
//! whose weight changes sign.

pub mod assembly;
pub mod budgets;
pub mod coeff;
pub mod eigen;
pub mod error;
pub mod expr;
pub mod extnum;
pub mod kneser;
pub mod pipeline;
pub mod problem;
pub mod quadrature;
pub mod serialize;
pub mod spectra;
pub mod structure;

pub use error::{Error, Result};
pub use expr::CoeffExpr;
