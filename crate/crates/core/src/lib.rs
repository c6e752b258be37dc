//! Construct neural-network training problems whose weights are certified
//! sub-optimal local minima of the squared loss, and check such claims
//! independently.
//!
//! Pipelines:
//! - [`forge_smooth`]: deep networks with a smooth activation.
//! - [`forge_sigmoid`]: one hidden sigmoid layer, scalar input/output, with a
//!   data-perturbation experiment showing the bad minimum persists.
//! - [`forge_piecewise`]: activations with a linear piece (ReLU family).
//!
//! [`certify`] provides the independent evidence: gradient residuals,
//! sampled perturbation search, the half-space test and a training baseline.

pub mod activations;
pub mod bundle;
pub mod certify;
pub mod data;
pub mod dualspace;
pub mod error;
pub mod forge_piecewise;
pub mod forge_sigmoid;
pub mod forge_smooth;
pub mod network;
pub mod precise;

pub use error::{Error, Result};
