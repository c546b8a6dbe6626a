pub mod chem;
pub mod driver;
pub mod error;
pub mod fem;
pub mod mech;
pub mod mesh;
pub mod post;
pub mod state;
pub mod units;

pub use error::{Error, ParamError, Result, StepRejection};
