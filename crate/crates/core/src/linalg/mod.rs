//! Dense linear-algebra kernels: vectors, symmetric matrices, conjugate
//! gradient with warm start, Cholesky solves and the Sherman–Morrison update.

mod cg;
mod direct;
mod matrix;
mod operator;
mod sherman_morrison;
mod vector;

pub use cg::{cg_solve, default_max_iter, residual_threshold, CgReport, RESIDUAL_FLOOR};
pub use direct::{direct_solve, Cholesky};
pub use matrix::{rank1_update, DiagonalWeights, SymmetricMatrix};
pub use operator::{FnOperator, LinearOperator, RegularizedGram};
pub use sherman_morrison::{sherman_morrison_update, SINGULARITY_THRESHOLD};
pub use vector::DenseVector;
