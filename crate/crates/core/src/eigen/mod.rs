//! Eigenvalue kernels for tridiagonal pencils `T - lambda R` with `R`
//! diagonal: Sturm bisection and inertia for the definite case, a dense
//! Francis QR and a tridiagonal Aberth iteration for the indefinite case.

mod aberth;
mod hqr;
mod indefinite;
mod rank;
mod sturm;
mod tridiag;

pub use hqr::{balance, hqr_eigenvalues};
pub use indefinite::{indefinite_eigs, pair_conjugates, ComplexSpectrum, EigOptions, Method};
pub use rank::{numerical_rank, pencil_resolvent_difference, singular_values};
pub use sturm::{count_in_interval, inertia_count, sturm_count, sym_tridiag_eigs, Inertia};
pub use tridiag::{solve_complex_tridiag, SymTridiag};
