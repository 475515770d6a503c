//! Online reweighted least squares (ORLS) for sequential sparse recovery.
//!
//! Measurements `y_t = a_t' x + ξ_t` arrive one at a time. Each arrival
//! updates the accumulated Gram matrix and right-hand side, refreshes the
//! ℓ1-surrogate weights from the previous estimate, and re-solves the
//! weighted system by warm-started conjugate gradient. A batch IRLS solver
//! over the same objective serves as the baseline.
//!
//! The [`imaging`] module applies this to a simulated focal-plane-array
//! camera: the scene is cut into non-overlapping square patches, every patch
//! is measured through the same sequence of random binary masks, and each
//! patch is recovered independently in a 2-D DCT basis.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`.

pub mod dictionary;
pub mod error;
pub mod imaging;
pub mod linalg;
mod scalar;
pub mod sensing;
pub mod solvers;

pub use dictionary::{dct2d_dictionary, sensing_vector, Dictionary};
pub use error::{Error, Result};
pub use imaging::{ImagePlane, MetricsTrajectory, PatchGrid, StopRule};
pub use linalg::{CgReport, DenseVector, DiagonalWeights, SymmetricMatrix};
pub use scalar::Real;
pub use sensing::{BinaryMask, MaskSet, NoiseModel};
pub use solvers::{MeasurementEvent, OrlsParams, OrlsState};

pub type DenseVector64 = DenseVector<f64>;
pub type SymmetricMatrix64 = SymmetricMatrix<f64>;
pub type DiagonalWeights64 = DiagonalWeights<f64>;
pub type Dictionary64 = Dictionary<f64>;
pub type OrlsParams64 = OrlsParams<f64>;
pub type OrlsState64 = OrlsState<f64>;
pub type MeasurementEvent64 = MeasurementEvent<f64>;

pub type DenseVector32 = DenseVector<f32>;
pub type OrlsParams32 = OrlsParams<f32>;
pub type OrlsState32 = OrlsState<f32>;

/// Tool version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
