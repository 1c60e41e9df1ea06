pub mod error;
pub mod eval;
pub mod harmory;
pub mod harte;
pub mod io;
pub mod segmentation;
pub mod similarity;
pub mod timeline;
pub mod tps;

pub use error::{Error, Result};
