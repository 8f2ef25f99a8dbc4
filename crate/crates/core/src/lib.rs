//! Loss–complexity landscapes for enumerable regression model families.
//!
//! The crate fits nested families (polynomials, truncated Fourier series,
//! depth-capped regression trees) to noisy 1-D samples, records each model's
//! complexity and raw sum-of-squares losses, and exposes the thermodynamic
//! view of the resulting finite landscape: structure functions, free
//! energies at zero and positive temperature, Legendre–Fenchel transforms,
//! envelope breakpoints, susceptibility scans, and Metropolis/annealing
//! chains over the model index.

pub mod dataset;
pub mod duality;
mod error;
pub mod fit;
pub mod rng;
pub mod sampler;
pub mod space;
pub mod thermo;
mod tree;

pub use dataset::{generate_dataset, Dataset};
pub use error::{Error, Result};
pub use fit::{enumerate_space, fit_fourier, fit_polynomial};
pub use space::{Family, ModelPoint, ModelSpace};
pub use tree::fit_tree;
