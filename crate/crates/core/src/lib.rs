pub mod annihilation;
pub mod bessel;
pub mod calculus;
pub mod error;
pub mod family;
pub mod grid;
pub mod kernel;
pub mod oracle;

pub use error::{Error, Result};
pub use grid::{Dimension, Grid, GridFunction, Spacing};
