//! Multidimensional scaling on finite groups.

pub mod chartheory;
pub mod cyclotomic;
pub mod error;
pub mod group;
pub mod mds;
pub mod plot;
pub mod rankings;
pub mod metric;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
