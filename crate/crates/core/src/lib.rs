pub mod control;
pub mod device;
pub mod error;
pub mod layout;
pub mod ode;
pub mod optim;
pub mod park;
pub mod quad;
pub mod special;
pub mod synthetic;
pub mod table;
pub mod turbine;
pub mod wave;

pub use error::{Error, Result};

/// Library version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
