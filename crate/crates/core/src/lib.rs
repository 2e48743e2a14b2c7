//! Numerical engine for pseudo-Riemannian metrics given in moving frames,
//! geodesic foliations by circles, and their verification.
//!
//! Kernels that only evaluate closed-form expressions (vector fields, frame
//! Gram matrices, cutoffs, embeddings) are generic over [`Scalar`], so the
//! same code runs in `f64`, in `f32`, on [`Dual`] numbers for exact
//! derivatives and on [`Ext`] for values far below the `f64` exponent range.
//! Integrators and audits work in `f64`.

pub mod connection;
pub mod dual;
pub mod error;
pub mod ext;
pub mod frame;
pub mod integrate;
pub mod linalg;
pub mod metrics;
pub mod sasaki;
pub mod scalar;
pub mod surfaces;
pub mod thurston;

pub use dual::Dual;
pub use error::{GeoError, Result};
pub use ext::Ext;
pub use scalar::Scalar;

/// Dense real vector used at the `f64` boundary.
pub type Vector = nalgebra::DVector<f64>;
/// Dense real matrix used at the `f64` boundary.
pub type Matrix = nalgebra::DMatrix<f64>;
/// First-order dual number over `f64`.
pub type Dual64 = Dual<f64>;
/// Second-order (nested) dual number over `f64`.
pub type HyperDual64 = Dual<Dual<f64>>;
