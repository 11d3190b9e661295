//! Bergman kernel of the egg domains `{ |w|^{2K} + |z|^2 < 1 } ⊂ C^{n+1}`.

pub mod acceptance;
pub mod cartan_hua;
pub mod classifier;
pub mod coefficients;
pub mod error;
pub mod kernel;
pub mod repcoords;
pub mod reproducing;
pub mod roots;
pub mod sampling;
pub mod series;

pub use error::{Error, Result};
