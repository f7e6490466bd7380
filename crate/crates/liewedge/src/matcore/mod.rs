//! Dense linear algebra over small matrices.

mod eig;
mod expm;
mod mat;
mod span;

pub use eig::{eig_sym, eigvals_sym, reconstruct, HERMITIAN_TOL};
pub use expm::{expm, logm, sqrtm};
pub use mat::{acomm, comm, kron, lin_comb, try_comm, Field, Mat, C64, I, ONE, ZERO};
pub use span::{orthonormal_span, skew_hermitian_basis, span_in, Subspace, RANK_TOL};
