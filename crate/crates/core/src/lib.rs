pub mod bernstein;
pub mod elasticity;
pub mod error;
pub mod fitter;
pub mod geom;
pub mod image_io;
pub mod levelset;
pub mod pipeline;
pub mod pht;
pub mod sparse;
pub mod templates;

pub use error::{Error, Result};
