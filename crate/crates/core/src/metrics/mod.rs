//! Metrics that make the Thurston-type foliations geodesic, plus the
//! Riemannization and divergence operators.

pub mod divergence;
pub mod lightlike;
pub mod riemannize;
pub mod typechange;

pub use lightlike::LightlikeModel;

pub use divergence::{divergence_trace, divergence_volume};
pub use riemannize::Riemannized;
pub use typechange::{Branch, InterpParams, TypeChangeConfig, TypeChangeModel};
