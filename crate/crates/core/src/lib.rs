pub mod abelian;
#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod group;
pub mod iso;
pub mod linalg;
pub mod measure;
mod par;
pub mod rep;
pub mod report;
pub mod shift;
pub mod verify;

pub use error::{Error, Result};
