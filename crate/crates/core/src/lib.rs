//! Constructive reconstruction of functions with dominating mixed smoothness
//! from their boundary traces, and Sobolev-convergent approximation built on it.

mod error;
pub mod lattice;
pub mod funcmodel;
pub mod benchlab;
pub mod expansion;
pub mod polyrep;
pub mod projection;
pub mod quadnorm;
mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{face_spec, multiindex_range, HyperRect, MultiIndex, SubdomainSpec};
pub use polyrep::{Calculus, LegendreSeries, PiecewisePoly, Poly1D};
pub use tensor::pairwise_sum;
