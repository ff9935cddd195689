pub mod carleman;
pub mod config;
pub mod error;
pub mod fields;
pub mod forward;
pub mod geometry;
pub mod inversion;
pub mod io;
pub mod jet;
pub mod quad;
pub mod run;
pub mod transport;

pub use error::{Error, Result};
