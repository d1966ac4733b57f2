pub mod eigenstate;
pub mod equimeasurable;
pub mod error;
pub mod euler;
pub mod lattice;
pub mod manifest;
pub mod optimize;
pub mod snapshot;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
