//! Small dense complex linear algebra, the qutrit bases and base-3 entropies.
//!
//! Dimensions are carried at runtime so the composite qutrit ⊗ ancilla
//! spaces used by the attack module reuse the same kernels. Kronecker
//! products put the left factor in the most significant index position.

mod basis;
mod entropy;
mod matrix;

pub use basis::{basis_vectors, omega, BasisId, BasisSet};
pub use entropy::{
    entropy_term3, hermitian_eigenvalues, log3, shannon_entropy3, von_neumann_entropy3,
    EIGEN_CLAMP, PROB_CLAMP,
};
pub use matrix::{random_isometry, tensor, CMat, CVec, Tensor, C64};
